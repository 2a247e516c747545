import numpy as np
import pytest

from nhcontact.experiments import steady_rolling_spin_rate
from nhcontact.model import (
    DiscretizationRule,
    PositionRule,
    StepState,
    ZRule,
    partials_of_Ld,
)
from nhcontact.newton import NewtonConfig
from nhcontact.reference import rkf45_integrate
from nhcontact.systems import (
    DiskParams,
    FoucaultParams,
    disk_eliminated_step,
    disk_kinetic_energy,
    disk_system,
    foucault_reference_multiplier,
    foucault_reference_ode,
    foucault_system,
)

DISK_RULE = DiscretizationRule(PositionRule.MIDPOINT, ZRule.SECOND_ORDER, 0.1)


def test_foucault_default_parameters():
    p = FoucaultParams()
    assert p.m == 28.0 and p.l == 67.0
    assert p.beta == pytest.approx(np.deg2rad(49.0))
    assert p.omega_vertical == pytest.approx(7.2921159e-5 * np.sin(np.deg2rad(49.0)))


def test_foucault_invalid_parameters():
    with pytest.raises(ValueError):
        FoucaultParams(m=-1.0)
    with pytest.raises(ValueError):
        foucault_system(FoucaultParams(), formulation="hamiltonian")


def test_foucault_gradients_match_finite_differences():
    system = foucault_system(FoucaultParams(alpha=1e-3))
    bare = type(system)(**{**{f: getattr(system, f) for f in system.__dataclass_fields__},
                           "lagrangian_gradients": None})
    rule = DiscretizationRule(PositionRule.TRAPEZOIDAL, ZRule.FIRST_ORDER, 0.05)
    rng = np.random.default_rng(5)
    q = rng.normal(size=2)
    qn = q + 0.01 * rng.normal(size=2)
    got = partials_of_Ld(system, rule, 0.0, q, qn, 0.2, 0.3)
    ref = partials_of_Ld(bare, rule, 0.0, q, qn, 0.2, 0.3)
    for a, b in zip(got, ref):
        assert np.allclose(a, b, rtol=1e-5, atol=1e-5)


def test_foucault_reference_ode_preserves_constraint():
    params = FoucaultParams(alpha=1e-3)
    from nhcontact.contact import project_velocity

    system = foucault_system(params)
    q0 = np.array([0.0, 0.67])
    v0 = project_velocity(system, q0, np.zeros(2))
    traj = rkf45_integrate(foucault_reference_ode(params),
                           np.concatenate([q0, v0]), (0.0, 30.0),
                           rel_tol=1e-10, abs_tol=1e-12)
    worst = 0.0
    for y in traj.states:
        x, yy, vx, vy = y
        c = -yy * vx + x * vy + params.omega_vertical * (x * x + yy * yy)
        worst = max(worst, abs(c))
    assert worst < 1e-9


def test_foucault_reference_multiplier_consistent_with_ode():
    # the eliminated multiplier must reproduce the constraint-force terms
    params = FoucaultParams(alpha=1e-3)
    y = np.array([0.1, 0.5, -0.02, 0.3])
    lam = foucault_reference_multiplier(params, y)
    rhs = foucault_reference_ode(params)(0.0, y)
    x, yy, vx, vy = y
    ax_free = -params.g / params.l * x - params.alpha * vx
    assert rhs[2] == pytest.approx(ax_free - lam / params.m * yy)


def test_disk_default_moments_of_inertia():
    p = DiskParams()
    assert p.I_A == pytest.approx(0.5 * 5.0 * 0.25)
    assert p.I_T == pytest.approx(0.25 * 5.0 * 0.25)


def test_disk_kinetic_energy_vertical_rolling():
    # upright disk rolling straight: T = (m + I_A/R^2)/2 * Xdot^2
    p = DiskParams()
    psidot = 2.0
    xdot = p.R * psidot
    q = np.zeros(5)
    qdot = np.array([xdot, 0.0, 0.0, 0.0, psidot])
    expected = 0.5 * p.m * xdot ** 2 + 0.5 * p.I_A * psidot ** 2
    assert disk_kinetic_energy(p, q, qdot) == pytest.approx(expected)


def test_disk_gradients_match_finite_differences():
    params = DiskParams(alpha=0.05, forcing=lambda t: np.array([0, 0, 0, t / 16, t / 16.0]))
    system = disk_system(params)
    bare = type(system)(**{**{f: getattr(system, f) for f in system.__dataclass_fields__},
                           "lagrangian_gradients": None})
    rng = np.random.default_rng(6)
    q = rng.normal(size=5) * 0.3
    qn = q + 0.02 * rng.normal(size=5)
    got = partials_of_Ld(system, DISK_RULE, 0.7, q, qn, 0.1, 0.2)
    ref = partials_of_Ld(bare, DISK_RULE, 0.7, q, qn, 0.1, 0.2)
    for a, b in zip(got, ref):
        assert np.allclose(a, b, rtol=1e-4, atol=1e-4)


def test_disk_constraints_annihilate_rolling_velocity():
    # rolling without slipping: contact-point velocity vanishes
    params = DiskParams()
    system = disk_system(params)
    rng = np.random.default_rng(8)
    for _ in range(5):
        theta, phi = rng.uniform(0.1, 1.0), rng.uniform(0.0, 2 * np.pi)
        thetadot, phidot, psidot = rng.normal(size=3)
        r = params.R
        xdot = r * (np.cos(phi) * psidot - np.cos(phi) * np.sin(theta) * phidot
                    - np.cos(theta) * np.sin(phi) * thetadot)
        ydot = r * (np.sin(phi) * psidot - np.sin(phi) * np.sin(theta) * phidot
                    + np.cos(phi) * np.cos(theta) * thetadot)
        q = np.array([0.0, 0.0, theta, phi, 0.0])
        v = np.array([xdot, ydot, thetadot, phidot, psidot])
        assert np.max(np.abs(system.constraint_matrix(q) @ v)) < 1e-12


def test_disk_eliminated_step_is_deterministic_and_smooth():
    params = DiskParams(alpha=0.005, forcing=lambda t: np.array([0, 0, 0, 0, 0.5]))
    h = 0.1
    q_prev = np.zeros(5)
    q_curr = np.array([0.0, 0.0, 0.0, 0.0, 0.001])
    solver = NewtonConfig(tolerance=1e-12)
    a = disk_eliminated_step(params, h, q_prev, q_curr, h, solver)
    b = disk_eliminated_step(params, h, q_prev, q_curr, h, solver)
    assert np.array_equal(a, b)
    assert np.max(np.abs(a - (2 * q_curr - q_prev))) < 0.1


def test_catalog_spin_rate_formula():
    params = DiskParams()
    theta0 = 20.0 * np.pi / 180.0
    phidot0 = -3.0 * np.pi / 10.0
    m, R, I_A, I_T, g = params.m, params.R, params.I_A, params.I_T, params.g
    expected = ((I_T - I_A - m * R ** 2) * np.sin(theta0) * phidot0 ** 2
                - m * g * R) / ((I_A + m * R ** 2) * np.tan(theta0) * phidot0)
    assert steady_rolling_spin_rate(params, theta0, phidot0) == pytest.approx(expected)


def test_steady_rolling_balance():
    # tilt balance of the rolling disk:
    # (I_T + mR^2) thetadd = -I_T s c phidot^2
    #   - (I_A + mR^2) c (psidot - s phidot) phidot + mgR s
    # the spin rate zeroing it leaves theta stationary
    params = DiskParams()
    theta0 = 20.0 * np.pi / 180.0
    phidot0 = -3.0 * np.pi / 10.0
    m, R, I_A, I_T, g = params.m, params.R, params.I_A, params.I_T, params.g
    s, t = np.sin(theta0), np.tan(theta0)
    psidot0 = (m * g * R * t + (I_A + m * R ** 2 - I_T) * s * phidot0 ** 2) / (
        (I_A + m * R ** 2) * phidot0
    )
    from nhcontact.model import initial_acceleration

    system = disk_system(params)
    q0 = np.array([0.0, 0.0, theta0, 0.0, 0.0])
    # rolling-consistent center velocity at phi = 0
    v0 = np.array([params.R * (psidot0 - s * phidot0), 0.0, 0.0, phidot0, psidot0])
    acc = initial_acceleration(system, q0, v0)
    assert abs(acc[2]) < 1e-8  # no tilt acceleration
