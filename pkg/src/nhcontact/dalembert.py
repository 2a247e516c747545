"""Forced, constrained Lagrange-d'Alembert integrator.

Baseline against which the contact integrator is compared.  The discrete
Lagrangian is the one-step quadrature ``h * L(Psi(q, q'))`` with z frozen at
zero, dissipation entering through a discretized external force instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    Array,
    ContactSystem,
    DiscretizationRule,
    ExperimentSpec,
    PositionRule,
    StepState,
    Termination,
    Trajectory,
    discrete_constraint,
    initial_acceleration,
    partials_of_Ld,
)
from .newton import NewtonConfig, NewtonDivergence, SingularJacobian, newton_solve


@dataclass(frozen=True)
class ForcedStepResidualSpec:
    system: ContactSystem
    rule: DiscretizationRule
    window: StepState
    force_split: str = "all-left"   # "all-left" | "all-right" | "half-half"

    @property
    def n_unknowns(self) -> int:
        return self.system.dim_q + self.system.dim_c


def _discrete_force(system, rule, t, q, q_next):
    """One-step force quadrature ``h * F^e`` with forward-difference velocity."""
    h = rule.h
    v = (q_next - q) / h
    if rule.position_rule is PositionRule.MIDPOINT:
        t_eval = t + 0.5 * h
        q_eval = 0.5 * (q + q_next)
    else:
        t_eval = t
        q_eval = q
    return h * system.external_force(t_eval, q_eval, v)


def la_residual(spec: ForcedStepResidualSpec, unknowns: Array) -> Array:
    """Forced discrete Euler-Lagrange residual plus discrete constraints."""
    system, rule, w = spec.system, spec.rule, spec.window
    n, m, h = system.dim_q, system.dim_c, rule.h
    q_next = unknowns[:n]
    lam = unknowns[n:]

    t_prev = w.t_curr - h
    d1f, _, _, _ = partials_of_Ld(system, rule, w.t_curr, w.q_curr, q_next, 0.0, 0.0)
    _, d2b, _, _ = partials_of_Ld(system, rule, t_prev, w.q_prev, w.q_curr, 0.0, 0.0)
    momentum = h * (d1f + d2b)

    if spec.force_split == "all-left":
        momentum = momentum + _discrete_force(system, rule, w.t_curr, w.q_curr, q_next)
    elif spec.force_split == "all-right":
        momentum = momentum + _discrete_force(system, rule, t_prev, w.q_prev, w.q_curr)
    elif spec.force_split == "half-half":
        momentum = momentum + 0.5 * (
            _discrete_force(system, rule, w.t_curr, w.q_curr, q_next)
            + _discrete_force(system, rule, t_prev, w.q_prev, w.q_curr)
        )
    else:
        raise ValueError(f"unknown force split {spec.force_split!r}")

    if m:
        momentum = momentum - system.constraint_matrix(w.q_curr).T @ lam

    out = np.empty(n + m)
    out[:n] = momentum
    if m:
        out[n:] = discrete_constraint(system, rule, w.q_curr, q_next)
    return out


def la_step(
    spec: ForcedStepResidualSpec,
    solver: NewtonConfig = NewtonConfig(),
    lam_prev: Optional[Array] = None,
):
    """One implicit forced step; returns ``(q_next, lam, iterations)``."""
    system, w = spec.system, spec.window
    n, m = system.dim_q, system.dim_c
    q_guess = 2.0 * w.q_curr - w.q_prev
    lam_guess = np.zeros(m) if lam_prev is None else np.asarray(lam_prev, dtype=float)
    x0 = np.concatenate([q_guess, lam_guess])
    x, iterations = newton_solve(lambda u: la_residual(spec, u), x0, solver)
    return x[:n], x[n:], iterations


def run_la(
    system: ContactSystem,
    rule: DiscretizationRule,
    q0: Array,
    v0: Array,
    n_steps: int,
    solver: NewtonConfig = NewtonConfig(),
    t0: float = 0.0,
    force_split: str = "all-left",
    stats=None,
) -> Trajectory:
    """Integrate ``n_steps`` forced variational steps from ``(q0, v0)``."""
    from .analysis import reconstruct_velocities_from_arrays
    from .contact import project_seed_position, project_velocity

    n, m, h = system.dim_q, system.dim_c, rule.h
    q0 = np.asarray(q0, dtype=float)

    qs = np.empty((n_steps + 1, n))
    lams = np.empty((n_steps, m))
    qs[0] = q0
    termination = Termination.done()
    steps_done = 0

    if n_steps > 0:
        v = project_velocity(system, q0, np.asarray(v0, dtype=float))
        acc = initial_acceleration(system, q0, v, t0=t0,
                                   include_external_force=True)
        qs[1] = project_seed_position(system, rule, q0,
                                      q0 + h * v + 0.5 * h ** 2 * acc)
        if m:
            lams[0] = 0.0
        lam = np.zeros(m)
        steps_done = 1
        window = StepState(q_prev=qs[0], q_curr=qs[1], z_prev=0.0, z_curr=0.0,
                           t_curr=t0 + h, step_index=1)
        for j in range(1, n_steps):
            spec = ForcedStepResidualSpec(system, rule, window, force_split)
            try:
                q_next, lam, iters = la_step(spec, solver, lam_prev=lam)
            except (NewtonDivergence, SingularJacobian) as exc:
                termination = Termination.failure(step=j + 1, message=str(exc))
                break
            if stats is not None:
                stats.record(iters)
            qs[j + 1] = q_next
            lams[j] = lam
            steps_done = j + 1
            window = StepState(q_prev=window.q_curr, q_curr=q_next,
                               z_prev=0.0, z_curr=0.0,
                               t_curr=window.t_curr + h,
                               step_index=window.step_index + 1)

    qs = qs[: steps_done + 1]
    lams = lams[:steps_done]
    times = t0 + h * np.arange(steps_done + 1)
    if steps_done == 0:
        from .contact import project_velocity as _proj
        vels = np.asarray([_proj(system, q0, np.asarray(v0, dtype=float))])
    else:
        vels = reconstruct_velocities_from_arrays(qs, h)
    energies = np.array([system.energy(q, v) for q, v in zip(qs, vels)])
    return Trajectory(
        times=times, configurations=qs, velocities=vels,
        z_values=np.zeros(steps_done + 1), multipliers=lams,
        energies=energies, termination=termination,
    )


def simulate_la(
    spec: ExperimentSpec,
    solver: NewtonConfig = NewtonConfig(),
    stats=None,
) -> Trajectory:
    """Run a catalog experiment with the Lagrange-d'Alembert integrator."""
    from .experiments import build_la_system

    system = build_la_system(spec)
    n_steps = int(round(spec.t_final / spec.h))
    return run_la(system, spec.rule, spec.q0, spec.v0, n_steps,
                  solver=solver, stats=stats)
