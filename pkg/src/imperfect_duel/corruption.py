"""Corruption schedules: magnitudes, adversarial sign, and budget accounting.

Schedules are single-owner per run.  ``RhoImperfect`` is the decaying
utility corruption c_kappa * t^(rho-1); ``GeneralizedLearnability`` derives
the magnitude from the design matrix of past action differences;
``FlipFirstC`` is outcome-level (it forces the least preferred action to
win for the first C rounds and contributes zero utility corruption to the
budget ledger).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BudgetLedger",
    "NoCorruption",
    "RhoImperfect",
    "GeneralizedLearnability",
    "FlipFirstC",
    "LearnabilityState",
    "adversarial_signed_corruption",
]


@dataclass
class BudgetLedger:
    """Running account of per-round corruption magnitudes |c_t|.

    ``record_per_round`` can be disabled for long runs where only the
    cumulative total is needed.
    """

    cumulative_abs_corruption: float = 0.0
    per_round: list[float] = field(default_factory=list)
    record_per_round: bool = True
    n_rounds: int = 0

    def add(self, abs_c: float) -> None:
        self.cumulative_abs_corruption += abs_c
        self.n_rounds += 1
        if self.record_per_round:
            self.per_round.append(abs_c)

    def total(self) -> float:
        return self.cumulative_abs_corruption


def adversarial_signed_corruption(delta: float, c: float) -> float:
    """Sign the magnitude c against the true utility difference delta.

    The corrupted argument to the link is delta + returned value.  Ties
    (delta == 0) take the negative sign.
    """
    if c < 0:
        raise ValueError("corruption magnitude must be nonnegative")
    return c if delta < 0 else -c


@dataclass
class LearnabilityState:
    """Design matrix V_bar = lambda*I + sum (a_s - a'_s)(a_s - a'_s)^T."""

    v_bar: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, d: int, lam: float) -> "LearnabilityState":
        if lam <= 0:
            raise ValueError("lambda must be positive")
        return cls(v_bar=lam * np.eye(d), t=0)

    def update(self, a: np.ndarray, a_prime: np.ndarray) -> None:
        diff = a - a_prime
        self.v_bar += np.outer(diff, diff)
        self.t += 1


@dataclass
class NoCorruption:
    ledger: BudgetLedger = field(default_factory=BudgetLedger)

    def magnitude(self, t: int, a: np.ndarray, a_prime: np.ndarray) -> float:
        if t < 1:
            raise ValueError("round must be >= 1")
        return 0.0

    def note_round(
        self,
        t: int,
        abs_c: float,
        a: np.ndarray | None = None,
        a_prime: np.ndarray | None = None,
        flipped: bool = False,
    ) -> None:
        self.ledger.add(abs_c)


@dataclass
class RhoImperfect:
    """|c_t| = c_kappa * t^(rho - 1), the imperfect-user decay schedule."""

    rho: float
    c_kappa: float
    ledger: BudgetLedger = field(default_factory=BudgetLedger)

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if self.c_kappa <= 0:
            raise ValueError("c_kappa must be positive")

    def magnitude(self, t: int, a: np.ndarray, a_prime: np.ndarray) -> float:
        if t < 1:
            raise ValueError("round must be >= 1")
        return self.c_kappa * t ** (self.rho - 1.0)

    def note_round(
        self,
        t: int,
        abs_c: float,
        a: np.ndarray | None = None,
        a_prime: np.ndarray | None = None,
        flipped: bool = False,
    ) -> None:
        self.ledger.add(abs_c)


@dataclass
class GeneralizedLearnability:
    """c_t = c0 * ((a - a')^T Vbar_{t-1}^{-1} (a - a'))^(1 - rho).

    The design matrix is updated with the queried pair after the
    magnitude is computed, so round t sees Vbar_{t-1}.
    """

    rho: float
    lam: float
    c0: float
    state: LearnabilityState
    ledger: BudgetLedger = field(default_factory=BudgetLedger)

    @classmethod
    def create(cls, d: int, rho: float, lam: float = 2.0, c0: float = 1.0) -> "GeneralizedLearnability":
        return cls(rho=rho, lam=lam, c0=c0, state=LearnabilityState.initial(d, lam))

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if self.c0 <= 0 or self.lam <= 0:
            raise ValueError("c0 and lambda must be positive")

    def magnitude(self, t: int, a: np.ndarray, a_prime: np.ndarray) -> float:
        if t < 1:
            raise ValueError("round must be >= 1")
        diff = a - a_prime
        quad = float(diff @ np.linalg.solve(self.state.v_bar, diff))
        assert quad >= -1e-12, "design matrix lost positive definiteness"
        return self.c0 * max(quad, 0.0) ** (1.0 - self.rho)

    def note_round(
        self,
        t: int,
        abs_c: float,
        a: np.ndarray | None = None,
        a_prime: np.ndarray | None = None,
        flipped: bool = False,
    ) -> None:
        self.ledger.add(abs_c)
        if a is not None and a_prime is not None:
            self.state.update(a, a_prime)


@dataclass
class FlipFirstC:
    """Force the least preferred action to win on rounds 1..C."""

    C: int
    ledger: BudgetLedger = field(default_factory=BudgetLedger)
    flips: int = 0

    def __post_init__(self) -> None:
        if self.C < 0:
            raise ValueError("C must be nonnegative")

    def magnitude(self, t: int, a: np.ndarray, a_prime: np.ndarray) -> float:
        if t < 1:
            raise ValueError("round must be >= 1")
        return 0.0

    def note_round(
        self,
        t: int,
        abs_c: float,
        a: np.ndarray | None = None,
        a_prime: np.ndarray | None = None,
        flipped: bool = False,
    ) -> None:
        self.ledger.add(abs_c)
        if flipped:
            self.flips += 1


CorruptionSchedule = NoCorruption | RhoImperfect | GeneralizedLearnability | FlipFirstC
