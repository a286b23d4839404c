"""Learner state machines and their parameter schedules.

All learners follow the same protocol: ``propose(t)`` returns the pair to
present, ``observe(t, outcome)`` consumes the duel result.  Proposals are
always members of the action space; on a discrete catalog the gradient
learners keep a continuous iterate inside the enclosing ball, present the
snapped (nearest-item) pair, and update the continuous iterate as if the
unsnapped pair had been played.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ActionSpace, Ball, DiscreteEmbeddingSet, bulk_unit_sphere, sample_unit_sphere
from .mirror import BallBarrier, MirrorState, sqrt_and_inv_sqrt_psd
from .preference import DuelOutcome

__all__ = [
    "Schedule",
    "schedule_rosmid",
    "schedule_dbgd",
    "RosmidLearner",
    "DbgdLearner",
    "BgdInstance",
    "SparringLearner",
    "DoublerLearner",
]


@dataclass(frozen=True)
class Schedule:
    """Resolved step-size parameters for one learner configuration."""

    eta_rho: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    alpha: float = 0.0


def schedule_rosmid(d: int, T: int, rho_or_alpha: float, mode: str = "known-rho") -> Schedule:
    """Learning rate for the mirror-descent learner.

    mode="known-rho": eta = sqrt(ln T) / (d * T^max(1/2, rho))
    mode="alpha":     eta = sqrt(ln T) / (2d) * T^(-alpha), alpha in [1/2, 1)
    """
    if T < 2 or d < 1:
        raise ValueError("need T >= 2 and d >= 1")
    if mode == "known-rho":
        rho = rho_or_alpha
        eta = math.sqrt(math.log(T)) / (d * T ** max(0.5, rho))
        return Schedule(eta_rho=eta, alpha=max(0.5, rho))
    if mode == "alpha":
        alpha = rho_or_alpha
        if not 0.5 <= alpha < 1.0:
            raise ValueError(f"alpha must be in [0.5, 1), got {alpha}")
        eta = math.sqrt(math.log(T)) / (2.0 * d) * T ** (-alpha)
        return Schedule(eta_rho=eta, alpha=alpha)
    raise ValueError(f"unknown schedule mode {mode!r}")


def schedule_dbgd(R: float, d: int, T: int, alpha: float, L_sigma: float, L_mu: float) -> Schedule:
    """Exploration/exploitation rates: gamma = R/sqrt(T),
    delta = sqrt(2Rd) / (sqrt(13 L_sigma L_mu) * T^alpha)."""
    if not 0.0 < alpha <= 0.25:
        raise ValueError(f"alpha must be in (0, 1/4], got {alpha}")
    if min(R, L_sigma, L_mu) <= 0:
        raise ValueError("R, L_sigma, L_mu must be positive")
    gamma = R / math.sqrt(T)
    delta = math.sqrt(2.0 * R * d) / (math.sqrt(13.0 * L_sigma * L_mu) * T**alpha)
    return Schedule(gamma=gamma, delta=delta, alpha=alpha)


# --------------------------------------------------------------------------


class RosmidLearner:
    """Mirror descent over the ball with Dikin-ellipsoid exploration.

    Runs on Ball spaces only; the barrier is the log barrier of the ball.

    ``feedback`` selects the comparison-outcome encoding fed into the
    gradient estimate g_hat = F_hat * d * Hessian^(1/2) u:

    - "signed" (default): F_hat = +1 when the current iterate beats the
      perturbed candidate, -1 when it loses, so every round moves the
      dual point.
    - "binary": F_hat in {0, 1}; on a win by the candidate the gradient
      is zero and the iterate stays put.

    The signed encoding doubles the drift toward the optimum and is what
    reproduces the reported sublinear growth under heavy corruption; the
    binary one is the conservative only-move-on-win variant.
    """

    def __init__(
        self,
        space: Ball,
        schedule: Schedule,
        rng: np.random.Generator,
        horizon: int,
        lam: float = 0.01,
        phi: float = 0.01,
        feedback: str = "signed",
    ) -> None:
        if not isinstance(space, Ball):
            raise TypeError("mirror-descent learner requires a Ball action space")
        if feedback not in ("signed", "binary"):
            raise ValueError(f"feedback must be 'signed' or 'binary', got {feedback!r}")
        self.space = space
        self.rng = rng
        self.feedback = feedback
        self.d = space.dim
        # Exploration directions for the whole run, drawn up front in bulk.
        self._units = bulk_unit_sphere(rng, horizon, self.d)
        self._k = 0
        self.state = MirrorState(
            barrier=BallBarrier(space.radius), lam=lam, phi=phi, eta=schedule.eta_rho
        )
        self.state.reset(self.d)
        self.eta = schedule.eta_rho
        self._u: np.ndarray | None = None
        self._sqrt_hess: np.ndarray | None = None

    def propose(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        self.state.accumulate(self.state.current)
        _, hess = self.state.grad_hess(self.state.current)
        sq, inv_sq = sqrt_and_inv_sqrt_psd(hess)
        if self._k < len(self._units):
            u = self._units[self._k]
        else:
            u = sample_unit_sphere(self.rng, self.d)
        self._k += 1
        self._u = u
        self._sqrt_hess = sq
        a = self.state.current
        a_prime = a + inv_sq @ u
        return a, a_prime

    def observe(self, t: int, outcome: DuelOutcome) -> None:
        # F_hat(a', a) = 1 iff the perturbed action LOST the duel: the dual
        # step then pushes the iterate away from the losing direction, which
        # is utility ascent.  (The regularized objective is phrased as cost
        # minimization, so the indicator rewards beating the candidate.)
        if outcome.winner == 0:
            f_hat = 1.0
        elif self.feedback == "signed":
            f_hat = -1.0
        else:
            # Dual target equals grad R_t(current); iterate is a fixed point.
            return
        g_hat = f_hat * self.d * (self._sqrt_hess @ self._u)
        y = self.state.grad(self.state.current) - self.eta * g_hat
        self.state.current = self.state.mirror_solve(y)


class DbgdLearner:
    """Projected dueling gradient descent starting from the zero action.

    ``feedback`` selects the comparison-outcome encoding fed into the
    gradient estimate g_hat = -(d/delta) * F_hat * u:

    - "signed" (default): F_hat = +1 when the perturbed action wins, -1
      when it loses, so the iterate steps +-gamma*u every round.
    - "binary": F_hat in {0, 1}; on a loss the gradient is zero and the
      iterate stays put.

    The signed encoding is what reproduces the reported T^0.76 growth on
    the hard linear-utility instance; the binary one is the conservative
    only-move-toward-winners variant.
    """

    def __init__(
        self,
        space: ActionSpace,
        schedule: Schedule,
        rng: np.random.Generator,
        horizon: int,
        feedback: str = "signed",
    ) -> None:
        if feedback not in ("signed", "binary"):
            raise ValueError(f"feedback must be 'signed' or 'binary', got {feedback!r}")
        self.space = space
        self.rng = rng
        self.feedback = feedback
        self.gamma = schedule.gamma
        self.delta = schedule.delta
        if isinstance(space, DiscreteEmbeddingSet):
            self.d = space.dim
            self._cont = Ball(space.enclosing_radius, space.dim)
        else:
            self.d = space.dim
            self._cont = None
        self.x = np.zeros(self.d)
        self._units = bulk_unit_sphere(rng, horizon, self.d)
        self._k = 0
        self._u: np.ndarray | None = None

    def propose(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        if self._k < len(self._units):
            u = self._units[self._k]
        else:
            u = sample_unit_sphere(self.rng, self.d)
        self._k += 1
        self._u = u
        if self._cont is not None:
            return self.space.project(self.x), self.space.project(self.x + self.delta * u)
        return self.x, self.space.project(self.x + self.delta * u)

    def observe(self, t: int, outcome: DuelOutcome) -> None:
        if outcome.winner == 1:
            f_hat = 1.0
        elif self.feedback == "signed":
            f_hat = -1.0
        else:
            return
        # g_hat = -(d/delta) F_hat u; step eta = gamma*delta/d, so the move
        # is gamma * F_hat * u.
        target = self.x + self.gamma * f_hat * self._u
        if self._cont is not None:
            self.x = self._cont.project(target)
        else:
            self.x = self.space.project(target)


class BgdInstance:
    """One-point bandit gradient ascent over a shrunk copy of the space.

    Plays y_t = x_t + delta_b u_t with x_t kept inside the (1 - xi)-shrunk
    set, so the played point is always feasible.  Rewards are in [0, 1].
    """

    def __init__(
        self,
        space: ActionSpace,
        T: int,
        rng: np.random.Generator,
        delta_b: float | None = None,
        eta_b: float | None = None,
    ) -> None:
        self.space = space
        self.rng = rng
        if isinstance(space, DiscreteEmbeddingSet):
            self.d = space.dim
            R = space.enclosing_radius
            self._cont = Ball(R, space.dim)
            self._snap = True
        elif isinstance(space, Ball):
            self.d = space.dim
            R = space.radius
            self._cont = space
            self._snap = False
        else:
            self.d = space.dim
            # Radius of a ball enclosing the polytope, from its box bounds.
            R = _enclosing_radius(space)
            self._cont = space
            self._snap = False
        self.R = R
        self.delta_b = R * T**-0.25 if delta_b is None else delta_b
        self.eta_b = (R * T**-0.75 / self.d) if eta_b is None else eta_b
        self.xi = self.delta_b / R
        self.x = np.zeros(self.d)
        self._units = bulk_unit_sphere(rng, T, self.d)
        self._k = 0
        self._u: np.ndarray | None = None
        self._y: np.ndarray | None = None

    def _project_shrunk(self, z: np.ndarray) -> np.ndarray:
        shrink = 1.0 - self.xi
        if isinstance(self._cont, Ball):
            nrm = float(np.linalg.norm(z))
            rmax = shrink * self.R
            if nrm <= rmax:
                return z
            return z * (rmax / nrm)
        # Project onto the shrunk polytope via scaling of the projection of z/shrink.
        return shrink * self._cont.project(z / shrink)

    def propose(self, t: int) -> np.ndarray:
        if self._k < len(self._units):
            u = self._units[self._k]
        else:
            u = sample_unit_sphere(self.rng, self.d)
        self._k += 1
        self._u = u
        y = self.x + self.delta_b * u
        self._y = y
        if self._snap:
            return self.space.project(y)
        if not isinstance(self._cont, Ball):
            # Shrinking a polytope does not leave delta_b of slack in every
            # direction, so feasibility of the played point needs a projection.
            return self.space.project(y)
        return y

    def observe(self, t: int, reward: float) -> None:
        if not 0.0 <= reward <= 1.0:
            raise ValueError("reward must lie in [0, 1]")
        if reward == 0.0:
            return
        step = self.eta_b * (self.d / self.delta_b) * reward
        self.x = self._project_shrunk(self.x + step * self._u)


class SparringLearner:
    """Two independent gradient instances duel each other; the winner's
    instance observes reward 1, the loser's 0."""

    def __init__(self, space: ActionSpace, T: int, rng: np.random.Generator) -> None:
        self.left = BgdInstance(space, T, rng)
        self.right = BgdInstance(space, T, rng)

    def propose(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        return self.left.propose(t), self.right.propose(t)

    def observe(self, t: int, outcome: DuelOutcome) -> None:
        if outcome.winner == 0:
            self.left.observe(t, 1.0)
            self.right.observe(t, 0.0)
        else:
            self.left.observe(t, 0.0)
            self.right.observe(t, 1.0)


class DoublerLearner:
    """Epoch-doubling reduction to a single-action bandit learner.

    Epoch j spans rounds 2^j .. 2^(j+1)-1.  The left arm is sampled
    uniformly from the multiset of right arms played in the previous
    epoch (epoch 0 plays the zero action on the left); the right arm
    comes from the embedded gradient instance, which observes its win
    indicator as reward.
    """

    def __init__(self, space: ActionSpace, T: int, rng: np.random.Generator) -> None:
        self.space = space
        self.rng = rng
        self.bandit = BgdInstance(space, T, rng)
        self.d = self.bandit.d
        self._prev_epoch_arms: list[np.ndarray] = []
        self._this_epoch_arms: list[np.ndarray] = []
        self._next_boundary = 2  # first round of epoch 1

    def propose(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        while t >= self._next_boundary:
            self._prev_epoch_arms = self._this_epoch_arms
            self._this_epoch_arms = []
            self._next_boundary *= 2
        if self._prev_epoch_arms:
            idx = int(self.rng.integers(len(self._prev_epoch_arms)))
            left = self._prev_epoch_arms[idx]
        else:
            left = np.zeros(self.d)
            if isinstance(self.space, DiscreteEmbeddingSet):
                left = self.space.project(left)
        right = self.bandit.propose(t)
        self._this_epoch_arms.append(right)
        return left, right

    def observe(self, t: int, outcome: DuelOutcome) -> None:
        self.bandit.observe(t, 1.0 if outcome.winner == 1 else 0.0)


def _enclosing_radius(space: ActionSpace) -> float:
    """Radius of an origin-centered ball covering the space (coarse bound)."""
    if isinstance(space, Ball):
        return space.radius
    if isinstance(space, DiscreteEmbeddingSet):
        return space.enclosing_radius
    # Polytope: bound each coordinate by projecting large axis points.
    d = space.dim
    r = 0.0
    for i in range(d):
        for sgn in (1.0, -1.0):
            z = np.zeros(d)
            z[i] = sgn * 1e6
            r = max(r, float(np.linalg.norm(space.project(z))))
    return max(r, 1e-12)
