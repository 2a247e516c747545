import numpy as np
import pytest

from nhcontact.contact import run_contact
from nhcontact.dalembert import (
    ForcedStepResidualSpec,
    la_residual,
    run_la,
)
from nhcontact.model import (
    DiscretizationRule,
    PositionRule,
    StepState,
    ZRule,
)
from nhcontact.newton import NewtonConfig
from nhcontact.systems import FoucaultParams, foucault_system

TRAP_FIRST = DiscretizationRule(PositionRule.TRAPEZOIDAL, ZRule.FIRST_ORDER, 0.05)


def test_pendulum_la_residual_matches_hand_coded_block():
    """Forced stepping equations for the damped pendulum: the discrete force
    h * (-alpha m (q_{j+1} - q_j)/h) must appear as -alpha m (q_{j+1} - q_j).
    """
    params = FoucaultParams(alpha=1e-3)
    system = foucault_system(params, formulation="la")
    h = TRAP_FIRST.h
    m, g, l, alpha = params.m, params.g, params.l, params.alpha
    rng = np.random.default_rng(1)
    for _ in range(10):
        qm = rng.normal(size=2)
        qj = qm + 0.05 * rng.normal(size=2)
        qp = qj + 0.05 * rng.normal(size=2)
        lam = rng.normal(size=1)
        window = StepState(q_prev=qm, q_curr=qj, z_prev=0.0, z_curr=0.0, t_curr=1.0)
        res = la_residual(
            ForcedStepResidualSpec(system, TRAP_FIRST, window),
            np.concatenate([qp, lam]),
        )
        # h * [D1 Ld(fwd) + D2 Ld(bwd)] with trapezoidal quadrature,
        # plus the one-step force quadrature, minus the constraint term
        hand = m * ((2 * qj - qp - qm) / h - h * (g / l) * qj) \
            - alpha * m * (qp - qj)
        hand -= np.array([[-qj[1], qj[0]]]).T @ lam
        assert np.allclose(res[:2], hand, rtol=1e-12, atol=1e-9)


def test_all_force_splits_consistent_to_first_order():
    params = FoucaultParams(alpha=1e-2)
    system = foucault_system(params, formulation="la")
    rng = np.random.default_rng(2)
    qm = rng.normal(size=2)
    qj = qm + 0.01 * rng.normal(size=2)
    qp = qj + 0.01 * rng.normal(size=2)
    window = StepState(q_prev=qm, q_curr=qj, z_prev=0.0, z_curr=0.0, t_curr=1.0)
    unknowns = np.concatenate([qp, [0.0]])
    values = [
        la_residual(ForcedStepResidualSpec(system, TRAP_FIRST, window, split), unknowns)
        for split in ("all-left", "all-right", "half-half")
    ]
    # splits differ by O(h) in the force term only
    scale = np.max(np.abs(values[0]))
    for v in values[1:]:
        assert np.max(np.abs(v - values[0])) < 1e-3 * scale


def test_unknown_force_split_rejected():
    system = foucault_system(FoucaultParams(), formulation="la")
    window = StepState(q_prev=np.zeros(2), q_curr=np.zeros(2),
                       z_prev=0.0, z_curr=0.0, t_curr=0.0)
    with pytest.raises(ValueError):
        la_residual(ForcedStepResidualSpec(system, TRAP_FIRST, window, "middle"),
                    np.zeros(3))


def test_conservative_la_matches_contact_per_step():
    params = FoucaultParams(alpha=0.0)
    herglotz = foucault_system(params, formulation="herglotz")
    forced = foucault_system(params, formulation="la")
    q0 = np.array([0.0, params.l / 100.0])
    v0 = np.zeros(2)
    solver = NewtonConfig(tolerance=1e-12)
    tc = run_contact(herglotz, TRAP_FIRST, q0, v0, 500, solver)
    tl = run_la(forced, TRAP_FIRST, q0, v0, 500, solver)
    assert tc.termination.completed and tl.termination.completed
    assert np.max(np.abs(tc.configurations - tl.configurations)) < 1e-10


def test_la_z_values_stay_zero():
    system = foucault_system(FoucaultParams(alpha=1e-3), formulation="la")
    traj = run_la(system, TRAP_FIRST, np.array([0.0, 0.67]), np.zeros(2), 50)
    assert np.all(traj.z_values == 0.0)
    assert traj.termination.completed


def test_la_dissipates_energy():
    system = foucault_system(FoucaultParams(alpha=1e-2), formulation="la")
    traj = run_la(system, TRAP_FIRST, np.array([0.0, 0.67]), np.zeros(2), 4000)
    # one pendulum period is about 330 steps; compare full-period averages
    period = 330
    early = np.mean(traj.energies[:period])
    late = np.mean(traj.energies[-period:])
    assert late < early
