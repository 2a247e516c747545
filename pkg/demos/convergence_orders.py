"""Measured convergence orders of the two discretization rules.

Integrates a damped harmonic oscillator (alpha = 0.1, omega = 1) with the
contact integrator at a sequence of step sizes and fits the slope of
log(error) against log(h).  The left-endpoint rule with the explicit
action update is first order; the midpoint rule with the implicit action
update is second order.

Usage: python demos/convergence_orders.py
"""

import numpy as np

from nhcontact import (
    ContactSystem,
    DiscretizationRule,
    NewtonConfig,
    PositionRule,
    ZRule,
)
from nhcontact.analysis import convergence_order
from nhcontact.contact import run_contact

ALPHA, OMEGA, T_FINAL = 0.1, 1.0, 10.0


def oscillator() -> ContactSystem:
    return ContactSystem(
        dim_q=1,
        dim_c=0,
        lagrangian=lambda t, q, v, z: 0.5 * v[0] ** 2
        - 0.5 * OMEGA ** 2 * q[0] ** 2 - ALPHA * z,
        constraint_matrix=lambda q: np.zeros((0, 1)),
        lagrangian_gradients=lambda t, q, v, z: (-OMEGA ** 2 * q, v.copy(), -ALPHA),
        energy=lambda q, v: 0.5 * v[0] ** 2 + 0.5 * OMEGA ** 2 * q[0] ** 2,
        dissipation_alpha=ALPHA,
    )


def exact(t):
    wd = np.sqrt(OMEGA ** 2 - ALPHA ** 2 / 4.0)
    return np.exp(-ALPHA * t / 2.0) * (np.cos(wd * t)
                                       + (ALPHA / 2.0) / wd * np.sin(wd * t))


def main() -> None:
    system = oscillator()
    rules = [
        ("left endpoint + explicit action", PositionRule.LEFT_ENDPOINT,
         ZRule.FIRST_ORDER),
        ("midpoint + implicit action", PositionRule.MIDPOINT,
         ZRule.SECOND_ORDER),
    ]
    for label, pos, zr in rules:
        print(f"\n{label}")
        print(f"  {'h':>8} {'max error':>12}")
        pairs = []
        for h in [0.1, 0.05, 0.025, 0.0125]:
            rule = DiscretizationRule(pos, zr, h)
            traj = run_contact(system, rule, np.array([1.0]), np.array([0.0]),
                               int(round(T_FINAL / h)),
                               solver=NewtonConfig(tolerance=1e-12))
            err = float(np.max(np.abs(traj.configurations[:, 0]
                                      - exact(traj.times))))
            pairs.append((h, err))
            print(f"  {h:>8.4f} {err:>12.3e}")
        print(f"  fitted order: {convergence_order(pairs):.2f}")


if __name__ == "__main__":
    main()
