"""Utility functions, link functions, and the stochastic duel oracle.

The duel oracle produces one Bernoulli comparison outcome per round.  The
win probability of the first action is sigma(delta + c) where delta is the
true utility difference and c is the signed corruption supplied by the
active corruption schedule (see :mod:`imperfect_duel.corruption`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corruption import CorruptionSchedule, FlipFirstC, adversarial_signed_corruption

__all__ = [
    "QuadraticConcave",
    "Linear",
    "RescaledCosine",
    "Logistic",
    "LinearLink",
    "DuelOutcome",
    "duel",
]


# --------------------------------------------------------------------------
# Utilities


@dataclass(frozen=True)
class QuadraticConcave:
    """mu(a) = theta.a - ||a||^2 / 2; 1-strongly concave, maximized at theta."""

    theta: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))

    def __call__(self, a: np.ndarray) -> float:
        return float(self.theta @ a - 0.5 * (a @ a))


@dataclass(frozen=True)
class Linear:
    """mu(a) = theta.a"""

    theta: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))

    def __call__(self, a: np.ndarray) -> float:
        return float(self.theta @ a)


@dataclass(frozen=True)
class RescaledCosine:
    """mu(a) = scale * cos(angle between pref and a), range [-scale, scale]."""

    pref: np.ndarray
    scale: float = 100.0

    def __post_init__(self) -> None:
        pref = np.asarray(self.pref, dtype=float)
        nrm = float(np.linalg.norm(pref))
        if nrm <= 0:
            raise ValueError("preference vector must be nonzero")
        object.__setattr__(self, "pref", pref / nrm)

    def __call__(self, a: np.ndarray) -> float:
        nrm = float(np.linalg.norm(a))
        if nrm <= 0:
            raise ValueError("cosine utility undefined at the zero vector")
        return self.scale * float(self.pref @ a) / nrm


UtilityFunction = QuadraticConcave | Linear | RescaledCosine


# --------------------------------------------------------------------------
# Links


class Logistic:
    """sigma(x) = 1 / (1 + exp(-x))"""

    def __call__(self, x: float) -> float:
        if math.isnan(x):
            raise ValueError("link input must not be NaN")
        if x >= 0:
            return 1.0 / (1.0 + math.exp(-x))
        e = math.exp(x)
        return e / (1.0 + e)

    def derivative(self, x: float) -> float:
        p = self(x)
        return p * (1.0 - p)


class LinearLink:
    """sigma(x) = (1 + x) / 2 with x clamped to [-1, 1]."""

    def __call__(self, x: float) -> float:
        if math.isnan(x):
            raise ValueError("link input must not be NaN")
        x = min(1.0, max(-1.0, x))
        return 0.5 * (1.0 + x)

    def derivative(self, x: float) -> float:
        return 0.5 if -1.0 <= x <= 1.0 else 0.0


LinkFunction = Logistic | LinearLink


# --------------------------------------------------------------------------
# Duel oracle


@dataclass(frozen=True)
class DuelOutcome:
    """One comparison outcome; winner 0 means the first presented action."""

    winner: int
    corrupted_prob: float
    clean_prob: float
    corruption_value: float
    round: int


def duel(
    mu: UtilityFunction,
    sigma: LinkFunction,
    schedule: CorruptionSchedule,
    a: np.ndarray,
    a_prime: np.ndarray,
    t: int,
    rng: np.random.Generator,
    utilities: tuple[float, float] | None = None,
) -> DuelOutcome:
    """Sample one (possibly corrupted) duel between a and a_prime at round t.

    ``utilities`` lets the caller pass precomputed (mu(a), mu(a_prime)) to
    avoid re-evaluating the utility in tight loops.
    """
    if t < 1:
        raise ValueError(f"round must be >= 1, got {t}")
    if utilities is None:
        delta = mu(a) - mu(a_prime)
    else:
        delta = utilities[0] - utilities[1]
    clean_prob = sigma(delta)
    if isinstance(schedule, FlipFirstC) and t <= schedule.C:
        # Outcome-level corruption: the lower-true-utility action wins.
        winner = 1 if delta > 0 else 0
        corrupted_prob = float(winner == 0)
        schedule.note_round(t, 0.0, flipped=True)
        return DuelOutcome(winner, corrupted_prob, clean_prob, 0.0, t)
    c = schedule.magnitude(t, a, a_prime)
    signed = adversarial_signed_corruption(delta, c)
    corrupted_prob = sigma(delta + signed)
    winner = 0 if rng.random() < corrupted_prob else 1
    schedule.note_round(t, abs(signed), a, a_prime)
    return DuelOutcome(winner, corrupted_prob, clean_prob, signed, t)
