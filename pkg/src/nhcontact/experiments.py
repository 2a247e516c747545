"""Named experiment catalog and a single entry point for running any
experiment with any of the four integrators."""

from __future__ import annotations

import numpy as np

from .contact import StepStats, simulate_contact
from .dalembert import simulate_la
from .model import (
    Array,
    DiscretizationRule,
    ExperimentSpec,
    Integrator,
    PositionRule,
    Termination,
    Trajectory,
    ZRule,
)
from .newton import NewtonConfig
from .reference import (
    consistent_init,
    implicit_dae_integrate,
    make_continuous_system,
    rkf45_integrate,
)
from .systems import (
    DiskParams,
    FoucaultParams,
    disk_system,
    foucault_reference_multiplier,
    foucault_reference_ode,
    foucault_system,
)

FOUCAULT_RULE = DiscretizationRule(PositionRule.TRAPEZOIDAL, ZRule.FIRST_ORDER, h=0.05)
DISK_RULE = DiscretizationRule(PositionRule.MIDPOINT, ZRule.SECOND_ORDER, h=0.1)


class UnknownExperiment(KeyError):
    pass


def steady_rolling_spin_rate(params: DiskParams, theta0: float, phidot0: float) -> float:
    """Rolling rate giving steady circular motion at tilt ``theta0`` and
    precession rate ``phidot0``."""
    m, R, I_A, I_T, g = params.m, params.R, params.I_A, params.I_T, params.g
    return ((I_T - I_A - m * R ** 2) * np.sin(theta0) * phidot0 ** 2 - m * g * R) / (
        (I_A + m * R ** 2) * np.tan(theta0) * phidot0
    )


def _foucault_entry(alpha: float) -> ExperimentSpec:
    params = FoucaultParams(alpha=alpha)
    return ExperimentSpec(
        system_id="foucault",
        parameters={"m": params.m, "l": params.l, "g": params.g,
                    "beta": params.beta, "Omega": params.Omega},
        alpha=alpha,
        forcing=None,
        q0=np.array([0.0, params.l / 100.0]),
        v0=np.zeros(2),
        h=FOUCAULT_RULE.h,
        t_final=3600.0,
        integrator=Integrator.CONTACT,
        rule=FOUCAULT_RULE,
    )


def _disk_entry(alpha, q0, v0, forcing=None, t_final=20.0) -> ExperimentSpec:
    params = DiskParams()
    return ExperimentSpec(
        system_id="falling-disk",
        parameters={"m": params.m, "R": params.R, "I_A": params.I_A,
                    "I_T": params.I_T, "g": params.g},
        alpha=alpha,
        forcing=forcing,
        q0=np.asarray(q0, dtype=float),
        v0=np.asarray(v0, dtype=float),
        h=DISK_RULE.h,
        t_final=t_final,
        integrator=Integrator.CONTACT,
        rule=DISK_RULE,
    )


def _rolling_force(t: float) -> Array:
    return np.array([0.0, 0.0, 0.0, 0.0, 0.5])


def _ramp_force(t: float) -> Array:
    return np.array([0.0, 0.0, 0.0, t / 16.0, t / 16.0])


def _build_catalog() -> dict:
    cat = {
        "foucault-1": _foucault_entry(alpha=1e-3),
        "foucault-2": _foucault_entry(alpha=1e-4),
    }
    zero5 = np.zeros(5)
    for tag, alpha in (("1.1", 0.005), ("1.2", 0.1)):
        cat[f"disk-{tag}"] = _disk_entry(alpha, zero5, zero5, forcing=_rolling_force)
    q0_tilted = np.array([0.0, 0.0, np.pi / 36.0, 0.0, 0.0])
    v0_rolling = np.array([np.pi, 0.0, 0.0, 0.0, 2.0 * np.pi])
    for tag, alpha in (("2.1", 0.0), ("2.2", 0.005), ("2.3", 0.1)):
        cat[f"disk-{tag}"] = _disk_entry(alpha, q0_tilted, v0_rolling)
    v0_forced = np.array([np.pi / 2.0, 0.0, 0.0, 0.0, np.pi])
    for tag, alpha in (("3.1", 0.0), ("3.2", 0.005), ("3.3", 0.1)):
        cat[f"disk-{tag}"] = _disk_entry(alpha, zero5, v0_forced, forcing=_ramp_force)
    theta0 = 20.0 * np.pi / 180.0
    phidot0 = -3.0 * np.pi / 10.0
    psidot0 = steady_rolling_spin_rate(DiskParams(), theta0, phidot0)
    q0_circ = np.array([0.0, 0.0, theta0, 0.0, 0.0])
    v0_circ = np.array([np.pi / 2.0, 0.0, 0.0, phidot0, psidot0])
    for tag, alpha in (("4.1", 0.0), ("4.2", 0.005), ("4.3", 0.1)):
        cat[f"disk-{tag}"] = _disk_entry(alpha, q0_circ, v0_circ, t_final=25.0)
    return cat


CATALOG = _build_catalog()


def catalog_ids() -> list:
    return sorted(CATALOG.keys())


def get_experiment(experiment_id: str, **overrides) -> ExperimentSpec:
    """Look up a catalog entry, optionally replacing spec fields."""
    try:
        spec = CATALOG[experiment_id]
    except KeyError:
        raise UnknownExperiment(experiment_id) from None
    if not overrides:
        return spec
    fields = {f: getattr(spec, f) for f in spec.__dataclass_fields__}
    fields.update(overrides)
    if "h" in overrides and "rule" not in overrides:
        fields["rule"] = DiscretizationRule(
            spec.rule.position_rule, spec.rule.z_rule, h=float(overrides["h"])
        )
    return ExperimentSpec(**fields)


def _foucault_params(spec: ExperimentSpec) -> FoucaultParams:
    p = spec.parameters
    return FoucaultParams(m=p["m"], l=p["l"], g=p["g"], beta=p["beta"],
                          Omega=p["Omega"], alpha=spec.alpha)


def _disk_params(spec: ExperimentSpec) -> DiskParams:
    p = spec.parameters
    forcing = spec.forcing if spec.forcing is not None else (lambda t: np.zeros(5))
    return DiskParams(m=p["m"], R=p["R"], I_A=p["I_A"], I_T=p["I_T"],
                      g=p["g"], alpha=spec.alpha, forcing=forcing)


def build_contact_system(spec: ExperimentSpec):
    """System instance for the intrinsic-dissipation formulation."""
    if spec.system_id == "foucault":
        return foucault_system(_foucault_params(spec), formulation="herglotz")
    if spec.system_id == "falling-disk":
        return disk_system(_disk_params(spec))
    raise UnknownExperiment(spec.system_id)


def build_la_system(spec: ExperimentSpec):
    """System instance for the external-force formulation."""
    if spec.system_id == "foucault":
        return foucault_system(_foucault_params(spec), formulation="la")
    if spec.system_id == "falling-disk":
        raise ValueError(
            "the disk has no external-force damping formulation; "
            "use the contact integrator"
        )
    raise UnknownExperiment(spec.system_id)


def _grid(spec: ExperimentSpec) -> Array:
    n_steps = int(round(spec.t_final / spec.h))
    return spec.h * np.arange(n_steps + 1)


def _run_rkf45(spec: ExperimentSpec, rel_tol: float = 1e-8) -> Trajectory:
    if spec.system_id != "foucault":
        raise ValueError("the adaptive explicit reference covers the pendulum only")
    from .contact import project_velocity

    params = _foucault_params(spec)
    system = foucault_system(params, formulation="herglotz")
    grid = _grid(spec)
    v0 = project_velocity(system, spec.q0, spec.v0)
    y0 = np.concatenate([spec.q0, v0])
    if len(grid) == 1:
        states = y0[None, :]
    else:
        dense = rkf45_integrate(foucault_reference_ode(params), y0,
                                (grid[0], grid[-1]), rel_tol=rel_tol)
        states = dense.sample(grid)
    qs, vels = states[:, :2], states[:, 2:]
    lams = np.array([
        [foucault_reference_multiplier(params, states[j + 1])]
        for j in range(len(grid) - 1)
    ]).reshape(len(grid) - 1, 1)
    energies = np.array([system.energy(q, v) for q, v in zip(qs, vels)])
    return Trajectory(times=grid, configurations=qs, velocities=vels,
                      z_values=np.zeros(len(grid)), multipliers=lams,
                      energies=energies, termination=Termination.done())


def _run_implicit_dae(spec: ExperimentSpec, refinement: int = 10) -> Trajectory:
    """Fixed-step implicit reference at a step ``refinement`` times finer than
    the experiment grid, downsampled back onto it."""
    system = build_contact_system(spec)
    continuous = make_continuous_system(system)
    y0, ydot0 = consistent_init(continuous, spec.q0, spec.v0)
    grid = _grid(spec)
    n, m = system.dim_q, system.dim_c
    if len(grid) == 1:
        result_states = y0[None, :]
        termination = Termination.done()
    else:
        h_ref = spec.h / refinement
        dae = implicit_dae_integrate(continuous, y0, ydot0, (grid[0], grid[-1]),
                                     h_ref, newton=NewtonConfig(tolerance=1e-6))
        n_full = (len(dae.times) - 1) // refinement
        grid = grid[: n_full + 1]
        result_states = dae.states[:: refinement][: n_full + 1]
        if dae.completed:
            termination = Termination.done()
        else:
            termination = Termination.failure(
                step=n_full + 1,
                message=f"reference failure at t={dae.failure_time:.6e}: "
                        f"{dae.failure_message}",
            )
    qs = result_states[:, :n]
    vels = result_states[:, n:2 * n]
    zs = result_states[:, 2 * n]
    lams = result_states[1:, 2 * n + 1:].reshape(len(grid) - 1, m)
    energies = np.array([system.energy(q, v) for q, v in zip(qs, vels)])
    return Trajectory(times=grid, configurations=qs, velocities=vels,
                      z_values=zs, multipliers=lams, energies=energies,
                      termination=termination)


def run_experiment(
    spec: ExperimentSpec,
    solver: NewtonConfig = NewtonConfig(),
    stats: StepStats = None,
) -> Trajectory:
    """Run ``spec`` with its selected integrator, on a uniform grid of
    step ``spec.h``."""
    if spec.integrator is Integrator.CONTACT:
        return simulate_contact(spec, solver=solver, stats=stats)
    if spec.integrator is Integrator.LAGRANGE_DALEMBERT:
        return simulate_la(spec, solver=solver, stats=stats)
    if spec.integrator is Integrator.RKF45_REFERENCE:
        return _run_rkf45(spec)
    if spec.integrator is Integrator.IMPLICIT_DAE_REFERENCE:
        return _run_implicit_dae(spec)
    raise ValueError(f"unknown integrator {spec.integrator!r}")
