"""Barrier calculus, Hessian square roots, Dikin points, mirror solve."""

import numpy as np
import pytest

from imperfect_duel.mirror import (
    BallBarrier,
    MirrorSolveError,
    MirrorState,
    inv_sqrt_psd,
    sqrt_and_inv_sqrt_psd,
)

from helpers import (
    check_barrier_finite_differences,
    check_dikin_containment,
    check_inv_sqrt_roundtrip,
    check_mirror_residuals,
    random_mirror_state,
)

# --------------------------------------------------------------------------
# Barrier derivatives


def test_barrier_gradient_zero_at_center():
    grad, hess = BallBarrier(3.0).grad_hess(np.zeros(2))
    np.testing.assert_array_equal(grad, np.zeros(2))
    np.testing.assert_allclose(hess, (2.0 / 9.0) * np.eye(2), atol=1e-15)


def test_barrier_gradient_1d_pinned():
    grad, _ = BallBarrier(1.0).grad_hess(np.array([0.5]))
    assert grad[0] == pytest.approx(4.0 / 3.0, abs=1e-12)


def test_barrier_value_and_boundary():
    b = BallBarrier(2.0)
    assert b.value(np.zeros(3)) == pytest.approx(-np.log(4.0))
    assert b.value(np.array([2.0, 0.0, 0.0])) == np.inf
    with pytest.raises(ValueError):
        b.grad_hess(np.array([2.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        BallBarrier(0.0)


def test_barrier_self_concordance_spot_check():
    # |f'''| <= 2 f''^(3/2) along random interior segments, by finite
    # differences of f(s) = -log(R^2 - ||a + s v||^2).
    rng = np.random.default_rng(5)
    b = BallBarrier(2.0)
    h = 1e-3
    for _ in range(50):
        d = int(rng.integers(1, 4))
        a = rng.uniform(-0.5, 0.5, size=d)
        v = rng.normal(size=d)
        v /= np.linalg.norm(v)

        def f(s):
            return b.value(a + s * v)

        f2 = (f(h) - 2 * f(0) + f(-h)) / h**2
        f3 = (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h**3)
        assert abs(f3) <= 2.0 * f2**1.5 + 1e-4


def test_regularizer_matches_barrier_when_empty():
    state = MirrorState(barrier=BallBarrier(2.0), lam=0.5, phi=0.0, eta=0.01)
    state.reset(2)
    a = np.array([0.3, -0.4])
    g1, h1 = state.grad_hess(a)
    g2, h2 = state.barrier.grad_hess(a)
    np.testing.assert_allclose(g1, g2, atol=1e-15)
    np.testing.assert_allclose(h1, h2, atol=1e-15)


def test_regularizer_accumulation_pinned():
    # lam*eta = 1, t = 3, sum_actions = 0, phi = 0, a = 0.
    state = MirrorState(barrier=BallBarrier(1.0), lam=1.0, phi=0.0, eta=1.0)
    state.reset(2)
    for _ in range(3):
        state.accumulate(np.zeros(2))
    g, h = state.grad_hess(np.zeros(2))
    np.testing.assert_array_equal(g, np.zeros(2))
    np.testing.assert_allclose(h, 2.0 * np.eye(2) + 3.0 * np.eye(2), atol=1e-15)


def test_regularizer_finite_differences():
    check_barrier_finite_differences(n_points=100, tol=1e-6)


def test_mirror_state_validation():
    with pytest.raises(ValueError):
        MirrorState(barrier=BallBarrier(1.0), lam=0.0, phi=0.0, eta=0.1)
    with pytest.raises(ValueError):
        MirrorState(barrier=BallBarrier(1.0), lam=0.1, phi=-0.1, eta=0.1)


# --------------------------------------------------------------------------
# Matrix square roots


def test_inv_sqrt_pinned():
    np.testing.assert_allclose(inv_sqrt_psd(4.0 * np.eye(3)), 0.5 * np.eye(3), atol=1e-12)
    np.testing.assert_allclose(
        inv_sqrt_psd(np.diag([1.0, 9.0])), np.diag([1.0, 1.0 / 3.0]), atol=1e-12
    )
    sq, inv_sq = sqrt_and_inv_sqrt_psd(np.diag([4.0, 16.0]))
    np.testing.assert_allclose(sq, np.diag([2.0, 4.0]), atol=1e-12)
    np.testing.assert_allclose(inv_sq, np.diag([0.5, 0.25]), atol=1e-12)


def test_inv_sqrt_rejects_bad_input():
    with pytest.raises(ValueError):
        inv_sqrt_psd(np.array([[1.0, 2.0], [0.0, 1.0]]))  # asymmetric
    with pytest.raises(ValueError):
        inv_sqrt_psd(np.diag([1.0, -1.0]))  # not PD


def test_inv_sqrt_roundtrip_random():
    check_inv_sqrt_roundtrip(n_per_dim=1000, dims=(2, 5, 15), tol=1e-8)


# --------------------------------------------------------------------------
# Dikin points


def test_dikin_point_1d_pinned():
    state = MirrorState(barrier=BallBarrier(1.0), lam=0.1, phi=0.0, eta=0.01)
    state.reset(1)
    # Hessian at the center is 2, so the offset is +-1/sqrt(2).
    for u, expected in [(np.array([1.0]), 1 / np.sqrt(2)), (np.array([-1.0]), -1 / np.sqrt(2))]:
        assert state.dikin_point(u)[0] == pytest.approx(expected, abs=1e-12)


def test_dikin_shrinks_with_large_phi():
    base = MirrorState(barrier=BallBarrier(1.0), lam=0.1, phi=0.0, eta=0.01)
    heavy = MirrorState(barrier=BallBarrier(1.0), lam=0.1, phi=1e6, eta=0.01)
    for s in (base, heavy):
        s.reset(2)
    u = np.array([1.0, 0.0])
    assert np.linalg.norm(heavy.dikin_point(u)) < 1e-2
    assert np.linalg.norm(base.dikin_point(u)) > 0.5


def test_dikin_containment_bulk():
    check_dikin_containment(n_draws=100_000)


# --------------------------------------------------------------------------
# Mirror solve


def test_mirror_solve_fixed_point():
    rng = np.random.default_rng(3)
    state = random_mirror_state(rng, 3)
    y = state.grad(state.current)
    np.testing.assert_allclose(state.mirror_solve(y), state.current, atol=1e-7)


def test_mirror_solve_scalar_pinned():
    # 2a/(1-a^2) = 3  ->  a = (-2 + sqrt(40)) / 6.
    state = MirrorState(barrier=BallBarrier(1.0), lam=0.1, phi=0.0, eta=0.01)
    state.reset(1)
    a = state.mirror_solve(np.array([3.0]))
    assert a[0] == pytest.approx((-2 + np.sqrt(40)) / 6, abs=1e-9)
    assert a[0] == pytest.approx(0.720759, abs=1e-6)


def test_mirror_solve_symmetric_minimum():
    state = MirrorState(barrier=BallBarrier(1.0), lam=0.1, phi=0.5, eta=0.01)
    state.reset(2)
    state.current = np.array([0.3, -0.2])
    np.testing.assert_allclose(state.mirror_solve(np.zeros(2)), np.zeros(2), atol=1e-9)


def test_mirror_solve_random_targets():
    check_mirror_residuals(n_targets=1000, tol=1e-8)


def test_mirror_solve_rejects_nonfinite_target():
    state = MirrorState(barrier=BallBarrier(1.0), lam=0.1, phi=0.0, eta=0.01)
    state.reset(2)
    with pytest.raises(ValueError):
        state.mirror_solve(np.array([np.inf, 0.0]))


def test_mirror_solve_nonconvergence_raises():
    state = MirrorState(barrier=BallBarrier(1.0), lam=0.1, phi=0.0, eta=0.01)
    state.reset(1)
    with pytest.raises(MirrorSolveError):
        state.mirror_solve(np.array([5.0]), max_iter=1)
