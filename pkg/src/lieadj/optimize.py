"""Gradient-based solvers driven by the exact discrete sensitivities.

Initial-condition optimization updates the group point intrinsically,
g0 <- g0 tau(-gamma grad), so every iterate stays on the group to
numerical precision; parameter optimization is plain vector-space
descent. Both use Armijo backtracking.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Union

import numpy as np

from .algebra import AlgVec, GroupElem, compose, pair
from .dynamics import ParamVec
from .errors import LineSearchFailure
from .integrator import forward_flow
from .sensitivity import initial_condition_sensitivity, parameter_sensitivity


@dataclass(frozen=True)
class LineSearchConfig:
    gamma0: float = 1.0
    shrink: float = 0.5
    armijo_c: float = 1e-4
    max_backtracks: int = 40
    max_outer_iters: int = 500
    grad_tol: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class OptimizationTrace:
    """Accepted iterates as rows (iteration, cost, gradient norm, step).

    Row 0 is the starting point (step 0); `converged` is False when the
    iteration cap stopped the solver first.
    """

    iterates: tuple
    final_point: Union[GroupElem, ParamVec]
    converged: bool

    @property
    def final_cost(self):
        return self.iterates[-1][1]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "cost", "grad_norm", "step"])
            for it, cost, gnorm, step in self.iterates:
                writer.writerow(
                    [it, f"{cost:.17g}", f"{gnorm:.17g}", f"{step:.17g}"]
                )


def gradient_direction(spec, mu):
    """Riesz representative of a covector under the basis' Frobenius metric.

    coords = gram^-1 mu, so <mu, direction> = mu^T gram^-1 mu >= 0 and
    the negated result is a descent direction whenever mu is nonzero.
    """
    return AlgVec(spec, spec.gram_inv @ mu.coords)


def minimize_initial_condition(vf, cost, g_init, grid, r, ls=None):
    """Armijo descent on the initial condition, intrinsically on the group."""
    ls = ls or LineSearchConfig()
    spec = vf.spec

    g = g_init
    report = initial_condition_sensitivity(vf, cost, g, grid, r)
    current_cost = cost.value(report.trajectory.terminal)
    direction = gradient_direction(spec, report.gradient)
    decrease = pair(report.gradient, direction)
    grad_norm = float(np.sqrt(max(decrease, 0.0)))
    rows = [(0, current_cost, grad_norm, 0.0)]

    it = 0
    while grad_norm > ls.grad_tol and it < ls.max_outer_iters:
        gamma = ls.gamma0
        accepted = None
        for _ in range(ls.max_backtracks):
            candidate = compose(g, r.tau(AlgVec(spec, -gamma * direction.coords)))
            cand_cost = cost.value(forward_flow(vf, candidate, grid, r).terminal)
            if cand_cost <= current_cost - ls.armijo_c * gamma * decrease:
                accepted = (candidate, cand_cost, gamma)
                break
            gamma *= ls.shrink
        if accepted is None:
            failure = LineSearchFailure(
                f"no decrease after {ls.max_backtracks} backtracks at "
                f"iteration {it} (cost {current_cost:.6e})"
            )
            failure.trace = OptimizationTrace(tuple(rows), g, False)
            raise failure
        g, current_cost, gamma = accepted
        it += 1
        report = initial_condition_sensitivity(vf, cost, g, grid, r)
        direction = gradient_direction(spec, report.gradient)
        decrease = pair(report.gradient, direction)
        grad_norm = float(np.sqrt(max(decrease, 0.0)))
        rows.append((it, current_cost, grad_norm, gamma))

    return OptimizationTrace(tuple(rows), g, grad_norm <= ls.grad_tol)


def minimize_parameters(vf, cost, g0, u_init, grid, r, ls=None):
    """Armijo gradient descent on the parameter vector."""
    ls = ls or LineSearchConfig()
    u = u_init if isinstance(u_init, ParamVec) else ParamVec(u_init)

    report = parameter_sensitivity(vf, cost, g0, u, grid, r)
    current_cost = cost.value(report.trajectory.terminal)
    grad = report.gradient
    grad_norm = float(np.linalg.norm(grad))
    rows = [(0, current_cost, grad_norm, 0.0)]

    it = 0
    while grad_norm > ls.grad_tol and it < ls.max_outer_iters:
        gamma = ls.gamma0
        decrease = float(grad @ grad)
        accepted = None
        for _ in range(ls.max_backtracks):
            candidate = ParamVec(u.coords - gamma * grad)
            cand_cost = cost.value(
                forward_flow(vf, g0, grid, r, u=candidate).terminal
            )
            if cand_cost <= current_cost - ls.armijo_c * gamma * decrease:
                accepted = (candidate, cand_cost, gamma)
                break
            gamma *= ls.shrink
        if accepted is None:
            failure = LineSearchFailure(
                f"no decrease after {ls.max_backtracks} backtracks at "
                f"iteration {it} (cost {current_cost:.6e})"
            )
            failure.trace = OptimizationTrace(tuple(rows), u, False)
            raise failure
        u, current_cost, gamma = accepted
        it += 1
        report = parameter_sensitivity(vf, cost, g0, u, grid, r)
        grad = report.gradient
        grad_norm = float(np.linalg.norm(grad))
        rows.append((it, current_cost, grad_norm, gamma))

    return OptimizationTrace(tuple(rows), u, grad_norm <= ls.grad_tol)
