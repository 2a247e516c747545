"""Core domain types: contact-type Lagrangian systems, discretization rules,
stepping windows and trajectories.

A contact-type Lagrangian ``L(t, q, qdot, z)`` depends on the accumulated
action ``z`` in addition to the usual state, which lets dissipation enter the
dynamics intrinsically.  Velocity-level constraints are kept in affine form
``A(q) qdot + b(q) = 0``; ``b == 0`` recovers the purely linear case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

#: Central finite-difference probe scale (balances truncation and roundoff).
SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


class EvaluationError(RuntimeError):
    """A Lagrangian or derivative evaluation produced a non-finite value."""


def _zero_offset(q: Array) -> Array:
    return np.zeros(0)


def _zero_force(t: float, q: Array, qdot: Array) -> Array:
    return np.zeros_like(q)


@dataclass(frozen=True)
class ContactSystem:
    """A mechanical system with a contact-type Lagrangian and affine
    velocity constraints.

    Parameters
    ----------
    dim_q, dim_c:
        Number of configuration coordinates and of constraints.
    lagrangian:
        ``(t, q, qdot, z) -> float``.
    constraint_matrix:
        ``q -> (dim_c, dim_q)`` array; rows are the constraint covectors.
    constraint_offset:
        ``q -> (dim_c,)`` array, the affine part ``b(q)``.  Defaults to zero.
    external_force:
        ``(t, q, qdot) -> (dim_q,)`` covector used by the forced
        (Lagrange-d'Alembert) formulation; zero for pure contact systems.
    energy:
        ``(q, qdot) -> float`` diagnostic, kinetic plus potential.
    dissipation_alpha:
        Coefficient of the ``-alpha * z`` term in the Lagrangian.
    lagrangian_gradients:
        Optional ``(t, q, qdot, z) -> (dL/dq, dL/dqdot, dL/dz)``.  When
        provided, discrete-Lagrangian partials use it via the chain rule
        instead of finite differences.
    """

    dim_q: int
    dim_c: int
    lagrangian: Callable[[float, Array, Array, float], float]
    constraint_matrix: Callable[[Array], Array]
    constraint_offset: Callable[[Array], Array] = _zero_offset
    external_force: Callable[[float, Array, Array], Array] = _zero_force
    energy: Callable[[Array, Array], float] = lambda q, qdot: 0.0
    dissipation_alpha: float = 0.0
    lagrangian_gradients: Optional[Callable] = None

    def __post_init__(self) -> None:
        if self.constraint_offset is _zero_offset and self.dim_c:
            m = self.dim_c
            object.__setattr__(self, "constraint_offset", lambda q: np.zeros(m))


class PositionRule(Enum):
    """How a pair of configurations maps to an evaluation point.

    LEFT_ENDPOINT evaluates at ``q`` with velocity ``(q' - q)/h``; MIDPOINT
    evaluates at ``(q + q')/2``; TRAPEZOIDAL averages the Lagrangian over both
    endpoints with the same difference velocity.
    """

    LEFT_ENDPOINT = "left"
    MIDPOINT = "midpoint"
    TRAPEZOIDAL = "trapezoidal"


class ZRule(Enum):
    """Whether the discrete Lagrangian sees ``z_j`` only (first order) or the
    average ``(z_j + z_{j+1})/2`` (second order)."""

    FIRST_ORDER = "first"
    SECOND_ORDER = "second"


@dataclass(frozen=True)
class DiscretizationRule:
    position_rule: PositionRule
    z_rule: ZRule
    h: float

    def __post_init__(self) -> None:
        if self.h <= 0.0:
            raise ValueError(f"step size must be positive, got {self.h}")


@dataclass(frozen=True)
class StepState:
    """The two-point window from which one implicit step is solved."""

    q_prev: Array
    q_curr: Array
    z_prev: float
    z_curr: float
    t_curr: float
    step_index: int = 1


@dataclass(frozen=True)
class Termination:
    status: str  # "completed" or "solver_failure"
    step: Optional[int] = None
    message: Optional[str] = None

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    @staticmethod
    def done() -> "Termination":
        return Termination(status="completed")

    @staticmethod
    def failure(step: int, message: str) -> "Termination":
        return Termination(status="solver_failure", step=step, message=message)


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid output of a simulation.

    ``velocities`` are finite-difference reconstructions (see
    :mod:`nhcontact.analysis`); ``multipliers`` has one row per accepted step.
    """

    times: Array                  # (N+1,)
    configurations: Array         # (N+1, n)
    velocities: Array             # (N+1, n)
    z_values: Array               # (N+1,)
    multipliers: Array            # (N, m)
    energies: Array               # (N+1,)
    termination: Termination

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1


class Integrator(Enum):
    CONTACT = "contact"
    LAGRANGE_DALEMBERT = "la"
    RKF45_REFERENCE = "rkf45"
    IMPLICIT_DAE_REFERENCE = "implicit-dae"


@dataclass(frozen=True)
class ExperimentSpec:
    """A named experiment: system, parameters, initial data and numerics."""

    system_id: str                # "foucault" or "falling-disk"
    parameters: dict
    alpha: float
    forcing: Optional[Callable[[float], Array]]
    q0: Array
    v0: Array
    h: float
    t_final: float
    integrator: Integrator
    rule: DiscretizationRule

    def __post_init__(self) -> None:
        if self.h <= 0.0:
            raise ValueError("h must be positive")
        if self.t_final < 0.0:
            raise ValueError("t_final must be non-negative")


# ---------------------------------------------------------------------------
# Discrete Lagrangian evaluation
# ---------------------------------------------------------------------------

def _z_discrete(rule: DiscretizationRule, z: float, z_next: float) -> float:
    if rule.z_rule is ZRule.FIRST_ORDER:
        return z
    return 0.5 * (z + z_next)


def evaluate_discrete_lagrangian(
    system: ContactSystem,
    rule: DiscretizationRule,
    t: float,
    q: Array,
    q_next: Array,
    z: float,
    z_next: float,
) -> float:
    """Discrete Lagrangian ``L_d(q, q', z, z')`` over one step starting at ``t``."""
    h = rule.h
    v = (q_next - q) / h
    z_d = _z_discrete(rule, z, z_next)
    pos = rule.position_rule
    if pos is PositionRule.LEFT_ENDPOINT:
        val = system.lagrangian(t, q, v, z_d)
    elif pos is PositionRule.MIDPOINT:
        val = system.lagrangian(t + 0.5 * h, 0.5 * (q + q_next), v, z_d)
    else:  # TRAPEZOIDAL
        val = 0.5 * (
            system.lagrangian(t, q, v, z_d)
            + system.lagrangian(t + h, q_next, v, z_d)
        )
    val = float(val)
    if not np.isfinite(val):
        raise EvaluationError(
            f"non-finite discrete Lagrangian at t={t}, q={q}, q_next={q_next}, "
            f"z={z}, z_next={z_next}"
        )
    return val


def _partials_analytic(system, rule, t, q, q_next, z, z_next):
    h = rule.h
    v = (q_next - q) / h
    z_d = _z_discrete(rule, z, z_next)
    pos = rule.position_rule
    if pos is PositionRule.LEFT_ENDPOINT:
        gq, gv, gz = system.lagrangian_gradients(t, q, v, z_d)
        d1 = gq - gv / h
        d2 = gv / h
    elif pos is PositionRule.MIDPOINT:
        gq, gv, gz = system.lagrangian_gradients(t + 0.5 * h, 0.5 * (q + q_next), v, z_d)
        d1 = 0.5 * gq - gv / h
        d2 = 0.5 * gq + gv / h
    else:  # TRAPEZOIDAL
        gq0, gv0, gz0 = system.lagrangian_gradients(t, q, v, z_d)
        gq1, gv1, gz1 = system.lagrangian_gradients(t + h, q_next, v, z_d)
        gv_mean = 0.5 * (gv0 + gv1)
        d1 = 0.5 * gq0 - gv_mean / h
        d2 = 0.5 * gq1 + gv_mean / h
        gz = 0.5 * (gz0 + gz1)
    if rule.z_rule is ZRule.FIRST_ORDER:
        d3, d4 = float(gz), 0.0
    else:
        d3 = d4 = 0.5 * float(gz)
    return np.asarray(d1, dtype=float), np.asarray(d2, dtype=float), d3, d4


def _partials_fd(system, rule, t, q, q_next, z, z_next):
    n = system.dim_q

    def ld(qa, qb, za, zb):
        return evaluate_discrete_lagrangian(system, rule, t, qa, qb, za, zb)

    d1 = np.empty(n)
    d2 = np.empty(n)
    for i in range(n):
        e = SQRT_EPS * max(1.0, abs(q[i]))
        qp, qm = q.copy(), q.copy()
        qp[i] += e
        qm[i] -= e
        d1[i] = (ld(qp, q_next, z, z_next) - ld(qm, q_next, z, z_next)) / (2 * e)
        e = SQRT_EPS * max(1.0, abs(q_next[i]))
        qp, qm = q_next.copy(), q_next.copy()
        qp[i] += e
        qm[i] -= e
        d2[i] = (ld(q, qp, z, z_next) - ld(q, qm, z, z_next)) / (2 * e)
    e = SQRT_EPS * max(1.0, abs(z))
    d3 = (ld(q, q_next, z + e, z_next) - ld(q, q_next, z - e, z_next)) / (2 * e)
    if rule.z_rule is ZRule.FIRST_ORDER:
        d4 = 0.0  # L_d does not see z_next under the first-order rule
    else:
        e = SQRT_EPS * max(1.0, abs(z_next))
        d4 = (ld(q, q_next, z, z_next + e) - ld(q, q_next, z, z_next - e)) / (2 * e)
    return d1, d2, d3, d4


def partials_of_Ld(
    system: ContactSystem,
    rule: DiscretizationRule,
    t: float,
    q: Array,
    q_next: Array,
    z: float,
    z_next: float,
):
    """Partial derivatives ``(D1, D2, D3, D4)`` of the discrete Lagrangian
    with respect to its two configuration and two z arguments.

    Uses the system's registered analytic gradients when available, otherwise
    central finite differences on :func:`evaluate_discrete_lagrangian`.
    """
    if system.lagrangian_gradients is not None:
        out = _partials_analytic(system, rule, t, q, q_next, z, z_next)
    else:
        out = _partials_fd(system, rule, t, q, q_next, z, z_next)
    d1, d2, d3, d4 = out
    if not (np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))
            and np.isfinite(d3) and np.isfinite(d4)):
        raise EvaluationError(
            f"non-finite discrete Lagrangian partials at t={t}, q={q}, "
            f"q_next={q_next}"
        )
    return d1, d2, d3, d4


def lagrangian_gradients_or_fd(
    system: ContactSystem, t: float, q: Array, v: Array, z: float
):
    """Gradients ``(dL/dq, dL/dqdot, dL/dz)``, analytic when registered."""
    if system.lagrangian_gradients is not None:
        gq, gv, gz = system.lagrangian_gradients(t, q, v, z)
        return np.asarray(gq, dtype=float), np.asarray(gv, dtype=float), float(gz)
    n = system.dim_q
    gq = np.empty(n)
    gv = np.empty(n)
    for i in range(n):
        e = SQRT_EPS * max(1.0, abs(q[i]))
        qp, qm = q.copy(), q.copy()
        qp[i] += e
        qm[i] -= e
        gq[i] = (system.lagrangian(t, qp, v, z) - system.lagrangian(t, qm, v, z)) / (2 * e)
        e = SQRT_EPS * max(1.0, abs(v[i]))
        vp, vm = v.copy(), v.copy()
        vp[i] += e
        vm[i] -= e
        gv[i] = (system.lagrangian(t, q, vp, z) - system.lagrangian(t, q, vm, z)) / (2 * e)
    e = SQRT_EPS * max(1.0, abs(z))
    gz = (system.lagrangian(t, q, v, z + e) - system.lagrangian(t, q, v, z - e)) / (2 * e)
    return gq, gv, gz


def initial_acceleration(
    system: ContactSystem,
    q0: Array,
    v0: Array,
    t0: float = 0.0,
    z0: float = 0.0,
    include_external_force: bool = False,
) -> Array:
    """Consistent acceleration at ``(q0, v0)`` from the continuous equations
    of motion, used to seed the two-point stepping window at second order.

    Solves the saddle system of the momentum balance and the differentiated
    constraints by least squares (robust to redundant constraint rows).
    """
    n, m = system.dim_q, system.dim_c
    q0 = np.asarray(q0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    zdot = float(system.lagrangian(t0, q0, v0, z0))
    gq, gv, gz = lagrangian_gradients_or_fd(system, t0, q0, v0, z0)

    def momentum(t, q, v, z):
        return lagrangian_gradients_or_fd(system, t, q, v, z)[1]

    # probing an FD-based momentum needs a coarser step, or the inner
    # differencing noise dominates the outer quotient
    probe = SQRT_EPS if system.lagrangian_gradients is not None \
        else float(np.finfo(float).eps ** 0.25)

    # explicit part of dp/dt: derivative along (t, q, z) -> (1, v0, zdot)
    scale = max(1.0, float(np.max(np.abs(v0))) if n else 1.0, abs(zdot))
    e = probe / scale
    p_plus = momentum(t0 + e, q0 + e * v0, v0, z0 + e * zdot)
    p_minus = momentum(t0 - e, q0 - e * v0, v0, z0 - e * zdot)
    pdot_explicit = (p_plus - p_minus) / (2 * e)

    mass = np.empty((n, n))
    for i in range(n):
        e = probe * max(1.0, abs(v0[i]))
        vp, vm = v0.copy(), v0.copy()
        vp[i] += e
        vm[i] -= e
        mass[:, i] = (momentum(t0, q0, vp, z0) - momentum(t0, q0, vm, z0)) / (2 * e)

    rhs = gq + gz * gv - pdot_explicit
    if include_external_force:
        rhs = rhs + system.external_force(t0, q0, v0)

    if m == 0:
        acc, *_ = np.linalg.lstsq(mass, rhs, rcond=None)
        return acc

    a0 = system.constraint_matrix(q0)
    e = SQRT_EPS / max(1.0, float(np.max(np.abs(v0))))
    drift = (
        (system.constraint_matrix(q0 + e * v0) @ v0
         + system.constraint_offset(q0 + e * v0))
        - (system.constraint_matrix(q0 - e * v0) @ v0
           + system.constraint_offset(q0 - e * v0))
    ) / (2 * e)
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = mass
    kkt[:n, n:] = -a0.T
    kkt[n:, :n] = a0
    sol, *_ = np.linalg.lstsq(kkt, np.concatenate([rhs, -drift]), rcond=None)
    return sol[:n]


def constraint_evaluation_point(rule: DiscretizationRule, q: Array, q_next: Array) -> Array:
    """Configuration at which the constraint matrix is sampled for the
    discrete constraint.  Follows the position rule; the trapezoidal rule
    samples at the left endpoint, matching the printed benchmark equations."""
    if rule.position_rule is PositionRule.MIDPOINT:
        return 0.5 * (q + q_next)
    return q


def discrete_constraint(
    system: ContactSystem,
    rule: DiscretizationRule,
    q: Array,
    q_next: Array,
) -> Array:
    """Discrete constraint residual ``A(q_d) qdot_d + b(q_d)``."""
    q_d = constraint_evaluation_point(rule, q, q_next)
    v = (q_next - q) / rule.h
    return system.constraint_matrix(q_d) @ v + system.constraint_offset(q_d)
