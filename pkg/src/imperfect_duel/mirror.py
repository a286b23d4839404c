"""Self-concordant barrier calculus for the ball and the mirror-map solve.

The barrier for the radius-R ball is -log(R^2 - ||a||^2).  The accumulated
regularizer at round t is

    R_t(a) = barrier(a) + (lam * eta / 2) * sum_{i<=t} ||a - a_i||^2 + phi * ||a||^2

whose gradient and Hessian only need the running sum of past iterates and
the count t, keeping each round O(d) plus one d x d eigendecomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BallBarrier", "MirrorState", "inv_sqrt_psd", "sqrt_and_inv_sqrt_psd"]


class MirrorSolveError(RuntimeError):
    """Damped Newton failed to reach the residual tolerance."""


@dataclass(frozen=True)
class BallBarrier:
    """-log(R^2 - ||a||^2) on the open ball of radius R."""

    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def value(self, a: np.ndarray) -> float:
        gap = self.radius**2 - float(a @ a)
        if gap <= 0:
            return np.inf
        return -np.log(gap)

    def grad_hess(self, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        gap = self.radius**2 - float(a @ a)
        if gap <= 0:
            raise ValueError("barrier derivatives undefined on or outside the boundary")
        grad = (2.0 / gap) * a
        hess = (2.0 / gap) * np.eye(len(a)) + (4.0 / gap**2) * np.outer(a, a)
        return grad, hess

    def grad(self, a: np.ndarray) -> np.ndarray:
        gap = self.radius**2 - float(a @ a)
        if gap <= 0:
            raise ValueError("barrier gradient undefined on or outside the boundary")
        return (2.0 / gap) * a


def sqrt_and_inv_sqrt_psd(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root and inverse square root of a PD matrix."""
    if not np.allclose(M, M.T, atol=1e-10):
        raise ValueError("matrix must be symmetric")
    w, V = np.linalg.eigh(M)
    if w[0] <= 1e-12:
        raise ValueError(f"matrix must be positive definite (min eigenvalue {w[0]:.3e})")
    sq = np.sqrt(w)
    return (V * sq) @ V.T, (V / sq) @ V.T


def inv_sqrt_psd(M: np.ndarray) -> np.ndarray:
    """Symmetric S with S M S = I."""
    return sqrt_and_inv_sqrt_psd(M)[1]


@dataclass
class MirrorState:
    """Accumulated regularizer state for the mirror-descent learner."""

    barrier: BallBarrier
    lam: float
    phi: float
    eta: float
    t: int = 0
    sum_actions: np.ndarray | None = None
    current: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.lam <= 0 or self.phi < 0 or self.eta <= 0:
            raise ValueError("lam and eta must be positive, phi nonnegative")

    def reset(self, d: int) -> None:
        self.t = 0
        self.sum_actions = np.zeros(d)
        self.current = np.zeros(d)

    def accumulate(self, a: np.ndarray) -> None:
        """Add a to the quadratic-penalty anchor set (round counter +1)."""
        self.t += 1
        self.sum_actions = self.sum_actions + a

    def value(self, a: np.ndarray) -> float:
        """R_t(a) up to an additive constant (sum of ||a_i||^2 dropped)."""
        le = self.lam * self.eta
        quad = 0.5 * le * (self.t * float(a @ a) - 2.0 * float(a @ self.sum_actions))
        return self.barrier.value(a) + quad + self.phi * float(a @ a)

    def grad(self, a: np.ndarray) -> np.ndarray:
        le = self.lam * self.eta
        return self.barrier.grad(a) + le * (self.t * a - self.sum_actions) + 2.0 * self.phi * a

    def grad_hess(self, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        bgrad, bhess = self.barrier.grad_hess(a)
        le = self.lam * self.eta
        grad = bgrad + le * (self.t * a - self.sum_actions) + 2.0 * self.phi * a
        hess = bhess + (le * self.t + 2.0 * self.phi) * np.eye(len(a))
        return grad, hess

    def dikin_point(self, u: np.ndarray) -> np.ndarray:
        """current + Hessian^(-1/2) u for a unit direction u."""
        _, hess = self.grad_hess(self.current)
        _, inv_sq = sqrt_and_inv_sqrt_psd(hess)
        return self.current + inv_sq @ u

    def mirror_solve(self, y: np.ndarray, tol: float = 1e-8, max_iter: int = 200) -> np.ndarray:
        """Solve grad R_t(a) = y by damped Newton on min_a R_t(a) - y.a.

        Initialized at the current iterate; step halving until the
        objective decreases and the trial point stays interior.
        """
        if not np.all(np.isfinite(y)):
            raise ValueError("dual target must be finite")
        a = np.array(self.current, dtype=float)
        R2 = self.barrier.radius**2
        # Residuals below float64 relative precision of the target are
        # unreachable when the iterate sits near the boundary and the
        # barrier gradient (hence y) is huge, so the tolerance is
        # relative to ||y|| with an absolute floor.
        tol = tol * max(1.0, float(np.linalg.norm(y)))
        r_norm = float(np.linalg.norm(self.grad(a) - y))
        for _ in range(max_iter):
            if r_norm <= tol:
                return a
            _, hess = self.grad_hess(a)
            step = np.linalg.solve(hess, y - self.grad(a))
            scale = 1.0
            for _ in range(60):
                cand = a + scale * step
                if float(cand @ cand) < R2:
                    rc = float(np.linalg.norm(self.grad(cand) - y))
                    # Residual-decrease line search: the gradient map is
                    # strictly monotone, so this is globally convergent and
                    # immune to float cancellation in the value.
                    if rc < r_norm:
                        a, r_norm = cand, rc
                        break
                scale *= 0.5
            else:
                break
        if r_norm <= tol:
            return a
        raise MirrorSolveError(
            f"mirror solve did not converge (residual {r_norm:.3e}); "
            "the learning rate is likely mis-tuned"
        )
