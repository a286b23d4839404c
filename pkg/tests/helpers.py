"""Shared oracles, builders, and property checks used by both the unit
tests and the acceptance suite."""

from __future__ import annotations

import numpy as np

from imperfect_duel.corruption import RhoImperfect
from imperfect_duel.geometry import Ball, HalfspacePolytope
from imperfect_duel.mirror import BallBarrier, MirrorState, sqrt_and_inv_sqrt_psd
from imperfect_duel.preference import Linear, LinearLink, Logistic, duel

TRIANGLE_ROWS = (((0.5, 1.0), 0.25),)
TRIANGLE_NONNEG = (True, True)


def make_triangle() -> HalfspacePolytope:
    """The hard d=2 instance {a1>=0, a2>=0, a1/2 + a2 <= 1/4}."""
    return HalfspacePolytope(rows=TRIANGLE_ROWS, nonneg=TRIANGLE_NONNEG)


def grid_project_oracle(space, x: np.ndarray, step: float = 1e-3) -> np.ndarray:
    """Brute-force nearest feasible point on a d=2 grid of given step."""
    axis = np.arange(-0.5, 0.75 + step, step)
    g0, g1 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([g0.ravel(), g1.ravel()])
    mask = np.all(space._C @ pts.T <= space._b[:, None] + 1e-12, axis=0)
    feas = pts[mask]
    assert feas.size, "oracle found no feasible grid point"
    d2 = ((feas - x) ** 2).sum(axis=1)
    return feas[int(np.argmin(d2))]


def random_mirror_state(rng: np.random.Generator, d: int, radius: float = 10.0) -> MirrorState:
    """A MirrorState with random accumulated history and interior current."""
    state = MirrorState(
        barrier=BallBarrier(radius),
        lam=float(rng.uniform(0.001, 1.0)),
        phi=float(rng.uniform(0.0, 1.0)),
        eta=float(rng.uniform(1e-5, 1e-2)),
    )
    state.reset(d)
    for _ in range(int(rng.integers(0, 20))):
        a = rng.uniform(-radius / 2, radius / 2, size=d)
        if np.linalg.norm(a) < radius:
            state.accumulate(a)
    cur = rng.uniform(-radius / 2, radius / 2, size=d)
    state.current = cur * min(1.0, 0.8 * radius / max(np.linalg.norm(cur), 1e-9))
    return state


def cluster_purity(assignments: np.ndarray, labels: np.ndarray, k: int) -> float:
    """Best-match purity: each found cluster votes for its majority label."""
    n = len(labels)
    correct = 0
    for j in range(k):
        mask = assignments == j
        if not mask.any():
            continue
        counts = np.bincount(labels[mask])
        correct += int(counts.max())
    return correct / n


# --------------------------------------------------------------------------
# Property checks shared between unit tests and the acceptance gate.
# Each raises AssertionError on failure.


def check_projection_oracle(n_points: int = 25, tol: float = 2e-3) -> None:
    """d=2 polytope projection vs brute-force grid search."""
    tri = make_triangle()
    rng = np.random.default_rng(7)
    for _ in range(n_points):
        x = rng.uniform(-0.4, 0.7, size=2)
        exact = tri.project(x)
        approx = grid_project_oracle(tri, x, step=1e-3)
        assert np.linalg.norm(exact - approx) <= tol


def check_mirror_residuals(n_targets: int = 1000, tol: float = 1e-8) -> None:
    """mirror_solve residual on random states and dual targets."""
    rng = np.random.default_rng(11)
    for i in range(n_targets):
        state = random_mirror_state(rng, d=int(rng.integers(1, 6)))
        y = rng.normal(scale=0.5, size=len(state.current))
        a = state.mirror_solve(y, tol=tol)
        assert np.linalg.norm(state.grad(a) - y) <= tol * max(1.0, np.linalg.norm(y))
        assert np.linalg.norm(a) < state.barrier.radius


def check_inv_sqrt_roundtrip(n_per_dim: int = 1000, dims=(2, 5, 15), tol: float = 1e-8) -> None:
    """S M S = I Frobenius residual on random PD matrices."""
    rng = np.random.default_rng(13)
    for d in dims:
        for _ in range(n_per_dim):
            A = rng.normal(size=(d, d))
            M = A @ A.T + 0.1 * np.eye(d)
            sq, inv_sq = sqrt_and_inv_sqrt_psd(M)
            assert np.linalg.norm(inv_sq @ M @ inv_sq - np.eye(d)) < tol
            assert np.linalg.norm(sq @ inv_sq - np.eye(d)) < 1e-6


def check_barrier_finite_differences(n_points: int = 100, tol: float = 1e-6) -> None:
    """Regularizer gradient vs central finite differences of its value."""
    rng = np.random.default_rng(17)
    h = 1e-5
    for _ in range(n_points):
        d = int(rng.integers(1, 5))
        state = random_mirror_state(rng, d, radius=2.0)
        a = state.current * 0.5
        grad = state.grad(a)
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            fd = (state.value(a + e) - state.value(a - e)) / (2 * h)
            assert abs(grad[i] - fd) <= tol * max(1.0, abs(grad[i]))


def check_dikin_containment(n_draws: int = 100_000) -> None:
    """Dikin-ellipsoid candidates stay strictly inside the ball."""
    rng = np.random.default_rng(19)
    n_states = 200
    per_state = n_draws // n_states
    from imperfect_duel.geometry import bulk_unit_sphere

    for _ in range(n_states):
        d = int(rng.integers(1, 6))
        state = random_mirror_state(rng, d)
        _, hess = state.grad_hess(state.current)
        _, inv_sq = sqrt_and_inv_sqrt_psd(hess)
        U = bulk_unit_sphere(rng, per_state, d)
        pts = state.current + U @ inv_sq.T
        assert np.all(np.linalg.norm(pts, axis=1) < state.barrier.radius)


def check_link_symmetry(n_samples: int = 10_000, tol: float = 1e-12) -> None:
    """sigma(x) + sigma(-x) = 1 for both links on sampled inputs."""
    rng = np.random.default_rng(23)
    logistic, linear = Logistic(), LinearLink()
    for x in rng.normal(scale=3.0, size=n_samples):
        assert abs(logistic(x) + logistic(-x) - 1.0) <= tol
        assert abs(linear(x) + linear(-x) - 1.0) <= tol


def check_duel_bernoulli(n_trials: int = 1_000_000) -> None:
    """Empirical win frequency within 4 SE of corrupted_prob at fixed inputs."""
    mu = Linear(theta=np.array([1.0]))
    link = Logistic()
    a, ap, t = np.array([0.3]), np.array([0.1]), 7
    rng = np.random.default_rng(29)
    sched = RhoImperfect(rho=0.5, c_kappa=0.1)
    first = duel(mu, link, sched, a, ap, t, rng)
    p = first.corrupted_prob
    wins = 1 if first.winner == 0 else 0
    for _ in range(n_trials - 1):
        out = duel(mu, link, sched, a, ap, t, rng)
        assert out.corrupted_prob == p
        wins += 1 if out.winner == 0 else 0
    se = np.sqrt(p * (1 - p) / n_trials)
    assert abs(wins / n_trials - p) <= 4 * se


def check_budget_bound() -> None:
    """Cumulative decaying-corruption budget vs its closed-form bound."""
    a = np.zeros(1)
    for c_kappa, rho, T in [(1.0, 0.5, 10_000), (0.3, 0.9, 2_000), (2.0, 1.0, 500)]:
        sched = RhoImperfect(rho=rho, c_kappa=c_kappa)
        for t in range(1, T + 1):
            sched.note_round(t, sched.magnitude(t, a, a))
        total = sched.ledger.total()
        assert np.isclose(total, sum(sched.ledger.per_round), rtol=1e-9)
        bound = c_kappa * (1 + (T**rho - 1) / rho)
        assert total <= bound + 1e-9


def check_fit_order_exact() -> None:
    """Order fitting recovers exact power laws to 1e-12."""
    from imperfect_duel.experiments import fit_order

    t = np.arange(1, 2001, dtype=float)
    for expo, scale in [(0.75, 1.0), (0.6, 3.0), (1.0, 0.5)]:
        fit = fit_order(t, scale * t**expo)
        assert abs(fit.slope - expo) < 1e-12
        assert abs(fit.intercept - np.log(scale)) < 1e-10
    assert abs(fit_order(t, np.full_like(t, 2.0)).slope) < 1e-12


def check_bit_identical_replay() -> None:
    """Same (config, seed) twice gives bit-identical traces."""
    from imperfect_duel.experiments import parse_config, run_single

    cfg = parse_config(
        {
            "space": {"type": "ball", "radius": 10.0, "dim": 3},
            "utility": {"type": "quadratic", "theta": [5.0, 1.0, -2.0]},
            "link": {"type": "logistic"},
            "corruption": {"type": "rho_imperfect", "rho": 0.5, "c_kappa": 1.0},
            "algorithm": {"type": "dbgd", "alpha": 0.25},
            "horizon": 2000,
            "seeds": [42],
            "record_every": 100,
        }
    )
    t1 = run_single(cfg, 42)
    t2 = run_single(cfg, 42)
    assert t1.rounds == t2.rounds
    assert t1.cum_dueling == t2.cum_dueling
    assert t1.cum_functional == t2.cum_functional
    assert t1.total_corruption == t2.total_corruption


def check_kmeans_purity(tmp_path, min_purity: float = 0.95) -> None:
    """Clustering recovers well-separated synthetic mixture components."""
    from imperfect_duel.corpus import ingest_corpus, make_synthetic_corpus

    path = str(tmp_path / "purity_corpus.csv")
    labels = make_synthetic_corpus(path, N=2000, d=15, k_true=5, seed=3)
    corpus = ingest_corpus(path, k=5, seed=3)
    assert cluster_purity(corpus.assignments, labels, 5) >= min_purity


def check_regret_bracket() -> None:
    """Increment-level bracket l1*FO <= dueling <= L1*FO on random pairs."""
    from imperfect_duel.experiments import exact_utility_bounds, regret_increment

    from imperfect_duel.preference import QuadraticConcave

    rng = np.random.default_rng(31)
    space = Ball(radius=10.0, dim=3)
    theta = np.array([4.0, -3.0, 1.0])
    mu = QuadraticConcave(theta=theta)
    link = Logistic()
    a_star = space.project(theta)
    lo, _hi = exact_utility_bounds(space, mu)
    max_gap = mu(a_star) - lo
    l1 = min(link.derivative(0.0), link.derivative(max_gap))
    L1 = link.derivative(0.0)
    for _ in range(2000):
        x = rng.uniform(-1, 1, size=3) * 10
        y = rng.uniform(-1, 1, size=3) * 10
        a, ap = space.project(x), space.project(y)
        d_inc, f_inc = regret_increment(mu, link, a_star, a, ap)
        assert d_inc >= -1e-12 and f_inc >= -1e-12
        assert l1 * f_inc - 1e-9 <= d_inc <= L1 * f_inc + 1e-9
