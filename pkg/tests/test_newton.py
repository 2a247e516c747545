import numpy as np
import pytest

from nhcontact.newton import (
    NewtonConfig,
    NewtonDivergence,
    SingularJacobian,
    fd_jacobian,
    newton_solve,
    solve_dense,
)


def test_solve_dense_matches_numpy():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = rng.normal(size=(6, 6))
        b = rng.normal(size=6)
        assert np.allclose(solve_dense(a, b), np.linalg.solve(a, b))


def test_solve_dense_badly_scaled_rows():
    # equilibration keeps the pivoting sane across 12 orders of magnitude
    a = np.array([[1e12, 2e12], [1.0, 3.0]])
    b = np.array([3e12, 4.0])
    assert np.allclose(solve_dense(a, b), np.linalg.solve(a, b))


def test_solve_dense_singular_raises():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularJacobian) as info:
        solve_dense(a, np.ones(2))
    assert info.value.pivot < 1e-14


def test_fd_jacobian_quadratic():
    def residual(x):
        return np.array([x[0] ** 2 + x[1], 3.0 * x[1] ** 2])

    x = np.array([1.5, -0.5])
    jac = fd_jacobian(residual, x, residual(x))
    assert np.allclose(jac, [[3.0, 1.0], [0.0, -3.0]], atol=1e-6)


def test_newton_scalar_root():
    x, iters = newton_solve(lambda x: np.array([x[0] ** 2 - 2.0]),
                            np.array([1.0]),
                            NewtonConfig(tolerance=1e-12))
    assert x[0] == pytest.approx(np.sqrt(2.0), abs=1e-12)
    assert 1 <= iters <= 8


def test_newton_converged_guess_is_free():
    x, iters = newton_solve(lambda x: x - 1.0, np.array([1.0]), NewtonConfig())
    assert iters == 0
    assert x[0] == 1.0


def test_newton_analytic_jacobian():
    config = NewtonConfig(tolerance=1e-12,
                          jacobian=lambda x: np.array([[2.0 * x[0]]]))
    x, _ = newton_solve(lambda x: np.array([x[0] ** 2 - 9.0]),
                        np.array([5.0]), config)
    assert x[0] == pytest.approx(3.0, abs=1e-10)


def test_newton_divergence_carries_diagnostics():
    # root-free residual
    with pytest.raises(NewtonDivergence) as info:
        newton_solve(lambda x: np.array([x[0] ** 2 + 1.0]),
                     np.array([1.0]),
                     NewtonConfig(max_iterations=5))
    assert info.value.iterations == 5
    assert info.value.residual_norm >= 1.0


def test_newton_armijo_handles_overshoot():
    # steep tanh: full steps oscillate, damping converges
    def residual(x):
        return np.array([np.tanh(20.0 * x[0])])

    config = NewtonConfig(tolerance=1e-10, damping="armijo", max_iterations=50)
    x, _ = newton_solve(residual, np.array([0.4]), config)
    assert abs(x[0]) < 1e-10


def test_newton_rejects_bad_config():
    with pytest.raises(ValueError):
        NewtonConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        NewtonConfig(max_iterations=0)
    with pytest.raises(ValueError):
        NewtonConfig(damping="cubic")


def test_newton_multivariate_system():
    def residual(x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 4.0, x[0] - x[1]])

    x, _ = newton_solve(residual, np.array([1.0, 0.5]),
                        NewtonConfig(tolerance=1e-13))
    assert np.allclose(x, np.sqrt(2.0), atol=1e-12)
