"""Constrained contact integrator.

One step solves, fully coupled, for the next configuration, the next
accumulated action ``z`` and the constraint multipliers:

* n momentum-balance components
  ``D1 L_d(fwd) + D2 L_d(bwd) * (1 + h D3 L_d(fwd)) / (1 - h D4 L_d(bwd))
  - lambda^T A(q_j)``,
* one action-update component ``z_{j+1} - z_j - h L_d(fwd)``,
* m discrete-constraint components ``A(q_d) qdot_d + b(q_d)``.
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
    StepState,
    Termination,
    Trajectory,
    ZRule,
    discrete_constraint,
    evaluate_discrete_lagrangian,
    initial_acceleration,
    partials_of_Ld,
)
from .newton import NewtonConfig, NewtonDivergence, SingularJacobian, newton_solve


class DenominatorSingular(RuntimeError):
    """The implicit z-coupling factor ``1 - h D4 L_d`` is degenerate."""


@dataclass(frozen=True)
class ContactStepResidualSpec:
    system: ContactSystem
    rule: DiscretizationRule
    window: StepState

    @property
    def n_unknowns(self) -> int:
        return self.system.dim_q + 1 + self.system.dim_c


def contact_residual(spec: ContactStepResidualSpec, unknowns: Array) -> Array:
    """Stacked residual at a candidate ``(q_{j+1}, z_{j+1}, lambda)``."""
    system, rule, w = spec.system, spec.rule, spec.window
    n, m, h = system.dim_q, system.dim_c, rule.h
    q_next = unknowns[:n]
    z_next = unknowns[n]
    lam = unknowns[n + 1:]

    t_prev = w.t_curr - h
    d1f, _, d3f, _ = partials_of_Ld(system, rule, w.t_curr, w.q_curr, q_next, w.z_curr, z_next)
    _, d2b, _, d4b = partials_of_Ld(system, rule, t_prev, w.q_prev, w.q_curr, w.z_prev, w.z_curr)

    denom = 1.0 - h * d4b
    if abs(denom) < 1e-12:
        raise DenominatorSingular(
            f"1 - h*D4 = {denom:.3e} at t={w.t_curr}: implicit z-coupling degenerate"
        )

    momentum = d1f + d2b * (1.0 + h * d3f) / denom
    if m:
        momentum = momentum - system.constraint_matrix(w.q_curr).T @ lam

    ld_fwd = evaluate_discrete_lagrangian(
        system, rule, w.t_curr, w.q_curr, q_next, w.z_curr, z_next
    )
    z_res = z_next - w.z_curr - h * ld_fwd

    out = np.empty(n + 1 + m)
    out[:n] = momentum
    out[n] = z_res
    if m:
        out[n + 1:] = discrete_constraint(system, rule, w.q_curr, q_next)
    return out


def solve_z_update(
    system: ContactSystem,
    rule: DiscretizationRule,
    t: float,
    q: Array,
    q_next: Array,
    z: float,
) -> float:
    """Solve ``z' = z + h L_d(q, q', z, z')`` for ``z'``.

    Explicit under the first-order z rule; a scalar Newton solve otherwise
    (one iteration when the Lagrangian is linear in z).
    """
    h = rule.h
    if rule.z_rule is ZRule.FIRST_ORDER:
        return z + h * evaluate_discrete_lagrangian(system, rule, t, q, q_next, z, z)

    def residual(u):
        zn = float(u[0])
        return np.array(
            [zn - z - h * evaluate_discrete_lagrangian(system, rule, t, q, q_next, z, zn)]
        )

    guess = z + h * evaluate_discrete_lagrangian(system, rule, t, q, q_next, z, z)
    zn, _ = newton_solve(residual, np.array([guess]), NewtonConfig(tolerance=1e-13))
    return float(zn[0])


def contact_step(
    spec: ContactStepResidualSpec,
    solver: NewtonConfig = NewtonConfig(),
    lam_prev: Optional[Array] = None,
):
    """One implicit contact step; returns ``(q_next, z_next, lam, iterations)``.

    The initial guess extrapolates the configuration linearly, advances z by
    the previous window's discrete Lagrangian and carries the previous
    multipliers forward.
    """
    system, rule, w = spec.system, spec.rule, spec.window
    n, m, h = system.dim_q, system.dim_c, rule.h

    q_guess = 2.0 * w.q_curr - w.q_prev
    t_prev = w.t_curr - h
    z_guess = w.z_curr + h * evaluate_discrete_lagrangian(
        system, rule, t_prev, w.q_prev, w.q_curr, w.z_prev, w.z_curr
    )
    lam_guess = np.zeros(m) if lam_prev is None else np.asarray(lam_prev, dtype=float)

    x0 = np.concatenate([q_guess, [z_guess], lam_guess])
    x, iterations = newton_solve(lambda u: contact_residual(spec, u), x0, solver)
    return x[:n], float(x[n]), x[n + 1:], iterations


def project_velocity(system: ContactSystem, q: Array, v: Array) -> Array:
    """Minimal-norm correction of ``v`` onto ``{v : A(q) v + b(q) = 0}``.

    Rank-deficient constraint matrices are handled by least squares.
    """
    if system.dim_c == 0:
        return np.array(v, dtype=float)
    a = system.constraint_matrix(q)
    defect = a @ v + system.constraint_offset(q)
    correction, *_ = np.linalg.lstsq(a, defect, rcond=None)
    return v - correction


def project_seed_position(
    system: ContactSystem,
    rule: DiscretizationRule,
    q0: Array,
    q1: Array,
) -> Array:
    """Correct ``q1`` along the constraint-force directions so the discrete
    constraint holds over the seed step.

    The correction is O(h) times the discrete-constraint defect, so a
    second-order-accurate seed stays second order.
    """
    if system.dim_c == 0:
        return q1

    def residual(mu: Array) -> Array:
        a = system.constraint_matrix(q0)
        return discrete_constraint(system, rule, q0, q1 + a.T @ mu)

    mu, _ = newton_solve(residual, np.zeros(system.dim_c),
                         NewtonConfig(tolerance=1e-12))
    return q1 + system.constraint_matrix(q0).T @ mu


def initialize_window(
    system: ContactSystem,
    rule: DiscretizationRule,
    q0: Array,
    v0: Array,
    t0: float = 0.0,
    z0: float = 0.0,
) -> StepState:
    """Build the first stepping window from initial position and velocity.

    ``v0`` is projected onto the constraint set at ``q0``, then
    ``q1 = q0 + h v0 + h^2/2 a0`` with a consistent initial acceleration
    (second-order seed, preserving the scheme's order), and ``z1`` solves
    the discrete action update.
    """
    q0 = np.asarray(q0, dtype=float)
    v = project_velocity(system, q0, np.asarray(v0, dtype=float))
    acc = initial_acceleration(system, q0, v, t0=t0, z0=z0)
    q1 = q0 + rule.h * v + 0.5 * rule.h ** 2 * acc
    q1 = project_seed_position(system, rule, q0, q1)
    z1 = solve_z_update(system, rule, t0, q0, q1, z0)
    return StepState(q_prev=q0, q_curr=q1, z_prev=z0, z_curr=z1,
                     t_curr=t0 + rule.h, step_index=1)


@dataclass
class StepStats:
    """Per-run Newton bookkeeping, reported by the CLI summary."""

    total_iterations: int = 0
    max_iterations: int = 0
    steps: int = 0

    def record(self, iterations: int) -> None:
        self.total_iterations += iterations
        self.max_iterations = max(self.max_iterations, iterations)
        self.steps += 1


def run_contact(
    system: ContactSystem,
    rule: DiscretizationRule,
    q0: Array,
    v0: Array,
    n_steps: int,
    solver: NewtonConfig = NewtonConfig(),
    t0: float = 0.0,
    stats: Optional[StepStats] = None,
) -> Trajectory:
    """Integrate ``n_steps`` contact steps from ``(q0, v0)``."""
    from .analysis import reconstruct_velocities_from_arrays

    n, m, h = system.dim_q, system.dim_c, rule.h
    q0 = np.asarray(q0, dtype=float)

    qs = np.empty((n_steps + 1, n))
    zs = np.empty(n_steps + 1)
    lams = np.empty((n_steps, m))
    qs[0] = q0
    zs[0] = 0.0
    termination = Termination.done()
    steps_done = 0

    if n_steps > 0:
        window = initialize_window(system, rule, q0, v0, t0=t0)
        qs[1] = window.q_curr
        zs[1] = window.z_curr
        lam = np.zeros(m)
        steps_done = 1
        # The seeding step q1 = q0 + h v0 carries no multiplier of its own.
        if m:
            lams[0] = 0.0
        for j in range(1, n_steps):
            spec = ContactStepResidualSpec(system, rule, window)
            try:
                q_next, z_next, lam, iters = contact_step(spec, solver, lam_prev=lam)
            except (NewtonDivergence, SingularJacobian, DenominatorSingular) as exc:
                termination = Termination.failure(step=j + 1, message=str(exc))
                break
            if stats is not None:
                stats.record(iters)
            qs[j + 1] = q_next
            zs[j + 1] = z_next
            lams[j] = lam
            steps_done = j + 1
            window = StepState(
                q_prev=window.q_curr, q_curr=q_next,
                z_prev=window.z_curr, z_curr=z_next,
                t_curr=window.t_curr + h, step_index=window.step_index + 1,
            )

    qs = qs[: steps_done + 1]
    zs = zs[: steps_done + 1]
    lams = lams[:steps_done]
    times = t0 + h * np.arange(steps_done + 1)
    if steps_done == 0:
        vels = np.asarray([project_velocity(system, q0, np.asarray(v0, dtype=float))])
    else:
        vels = reconstruct_velocities_from_arrays(qs, h)
    energies = np.array([system.energy(q, v) for q, v in zip(qs, vels)])
    return Trajectory(
        times=times, configurations=qs, velocities=vels, z_values=zs,
        multipliers=lams, energies=energies, termination=termination,
    )


def simulate_contact(
    spec: ExperimentSpec,
    solver: NewtonConfig = NewtonConfig(),
    stats: Optional[StepStats] = None,
) -> Trajectory:
    """Run a catalog experiment with the contact integrator."""
    from .experiments import build_contact_system

    system = build_contact_system(spec)
    n_steps = int(round(spec.t_final / spec.h))
    return run_contact(system, spec.rule, spec.q0, spec.v0, n_steps,
                       solver=solver, stats=stats)
