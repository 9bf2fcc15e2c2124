"""Projected gradient with Armijo backtracking for the continuous ADMM subproblem."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .adjoint import ContObjectiveParams, cont_objective_and_gradient
from .fem import FemContext

log = logging.getLogger(__name__)

_FEAS_TOL = 1e-12


@dataclass(frozen=True)
class BoxBudgetSet:
    """{v in [0,1]^dim : sum(v) <= budget}"""

    budget: float
    dim: int

    def __post_init__(self):
        if not 0.0 < self.budget:
            raise ValueError(f"budget must be positive, got {self.budget}")

    def contains(self, v, tol: float = 1e-10) -> bool:
        v = np.asarray(v)
        return bool(v.shape == (self.dim,) and v.min() >= -tol and v.max() <= 1 + tol
                    and v.sum() <= self.budget + tol)


def project_box_budget(x, budget: float) -> np.ndarray:
    """Euclidean projection onto {v in [0,1]^n : sum(v) <= budget}.

    If the clipped point is over budget the answer is ``clip(x - mu, 0, 1)`` for
    the unique ``mu > 0`` that puts the sum on the budget; ``mu`` is bracketed
    by bisection and then recomputed exactly from the identified active sets.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(budget, BoxBudgetSet):
        budget = budget.budget
    y = np.clip(x, 0.0, 1.0)
    if y.sum() <= budget + _FEAS_TOL:
        return y

    def excess(mu):
        return np.clip(x - mu, 0.0, 1.0).sum() - budget

    lo, hi = 0.0, float(x.max())
    # excess(lo) > 0 >= excess(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, abs(hi)):
            break
    mu = 0.5 * (lo + hi)
    z = x - mu
    inner = (z > 0.0) & (z < 1.0)
    if inner.any():
        n_upper = np.count_nonzero(z >= 1.0)
        mu_exact = (x[inner].sum() + n_upper - budget) / np.count_nonzero(inner)
        if lo - 1e-9 <= mu_exact <= hi + 1e-9:
            mu = mu_exact
    out = np.clip(x - mu, 0.0, 1.0)
    total = out.sum()
    if total > budget + _FEAS_TOL:  # residual rounding on huge inputs
        out *= budget / total
    return out


@dataclass
class ContSolveReport:
    v_star: np.ndarray
    objective: float
    iterations: int
    last_step_norm: float
    projected_gradient_norm: float
    line_search_failed: bool = False
    objectives: list = field(default_factory=list, repr=False)


def solve_continuous(v_init, params: ContObjectiveParams, feasible: BoxBudgetSet, fem: FemContext,
                     tol_inner: float = 1e-6, max_inner: int = 500, t_init: float = 1.0,
                     armijo: float = 1e-4, max_halvings: int = 50) -> ContSolveReport:
    v = np.asarray(v_init, dtype=float).copy()
    if not feasible.contains(v):
        raise ValueError("initial point is not feasible for the box-budget set")
    v = project_box_budget(v, feasible.budget)
    f, g = cont_objective_and_gradient(v, params, fem)
    objectives = [f]
    step_norm = np.inf
    failed = False
    k = 0
    while k < max_inner:
        t = t_init
        for _ in range(max_halvings):
            cand = project_box_budget(v - t * g, feasible.budget)
            fc, gc = cont_objective_and_gradient(cand, params, fem)
            if fc <= f + armijo * float(g @ (cand - v)):
                break
            t *= 0.5
        else:
            failed = True
            log.warning("line search failed after %d halvings at inner iteration %d", max_halvings, k)
            break
        k += 1
        step_norm = float(np.max(np.abs(cand - v)))
        v, f, g = cand, fc, gc
        objectives.append(f)
        if step_norm <= tol_inner:
            break

    pg = float(np.max(np.abs(v - project_box_budget(v - g, feasible.budget))))
    return ContSolveReport(v_star=v, objective=f, iterations=k, last_step_norm=step_norm,
                           projected_gradient_norm=pg, line_search_failed=failed, objectives=objectives)
