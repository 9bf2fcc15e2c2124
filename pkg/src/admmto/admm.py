"""ADMM outer loop with a funnel-controlled penalty.

Each iteration solves the continuous subproblem for v (warm started), then the
discrete subproblem for w, and tests the candidate residual ``||w - v||^2``
against ``beta * tau``. Accepted steps tighten the funnel and update the
multipliers; rejected steps keep the iterates and multiply rho by ``c``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .adjoint import ContObjectiveParams
from .config import SolverConfig
from .cont_solver import BoxBudgetSet, solve_continuous
from .disc_solver import DiscreteEnergy, solve_discrete_heuristic
from .fem import FemContext, SimpParams
from .mesh import AdjacencyGraph, Mesh, build_adjacency, build_unit_square_mesh

log = logging.getLogger(__name__)


class AdmmIterationError(RuntimeError):
    pass


@dataclass(frozen=True)
class FunnelParams:
    beta: float = 0.9
    zeta: float = 0.5
    gamma: float = 2.0
    c: float = 2.0
    delta_tol: float = 1e-2

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0,1)")
        if not 0 < self.zeta < 1:
            raise ValueError("zeta must lie in (0,1)")
        if not self.gamma > 1:
            raise ValueError("gamma must be > 1")
        if not self.c > 1:
            raise ValueError("c must be > 1")
        if not self.delta_tol > 0:
            raise ValueError("delta_tol must be positive")

    @classmethod
    def from_config(cls, config: SolverConfig) -> "FunnelParams":
        return cls(beta=config.beta, zeta=config.zeta, gamma=config.gamma, c=config.c,
                   delta_tol=config.delta_tol)

    def initial_tau(self, residual: float) -> float:
        return max(1.0, residual) * self.gamma

    def contracted_tau(self, tau: float, residual: float) -> float:
        return (1.0 - self.zeta) * tau + self.zeta * residual


@dataclass
class AdmmState:
    v: np.ndarray
    w: np.ndarray
    lam: np.ndarray
    rho: float
    tau: float
    j: int = 0

    @property
    def residual(self) -> float:
        d = self.w - self.v
        return float(d @ d)


@dataclass
class IterationRecord:
    j: int
    residual: float
    tau: float
    rho: float
    accepted: bool
    candidate_residual: float
    compliance: float  # at the binary w
    tv_value: float  # each adjacent pair once
    original_objective: float  # compliance(w) + alpha * 2 * tv_value
    augmented_lagrangian: float
    cont_iterations: int
    disc_energy: float
    wall_time: float
    v: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)

    CSV_FIELDS = ("j", "residual", "tau", "rho", "accepted", "candidate_residual", "compliance",
                  "tv_value", "original_objective", "augmented_lagrangian", "cont_iterations",
                  "disc_energy", "wall_time")

    def row(self) -> list:
        return [int(getattr(self, k)) if k == "accepted" else getattr(self, k) for k in self.CSV_FIELDS]


class AdmmProblem:
    """Mesh, adjacency, FEM cache and tunables for one configuration."""

    def __init__(self, config: SolverConfig, mesh: Mesh | None = None):
        self.config = config
        self.mesh = mesh or build_unit_square_mesh(config.n)
        self.graph: AdjacencyGraph = build_adjacency(self.mesh)
        self.fem = FemContext(self.mesh, SimpParams(config.simp_delta, config.simp_p), config.source,
                              config.tol_lin)
        self.funnel = FunnelParams.from_config(config)
        self.budget = config.V_max * self.mesh.n_elements
        self.feasible = BoxBudgetSet(self.budget, self.mesh.n_elements)

    @property
    def alpha(self) -> float:
        return self.config.alpha

    def tv(self, w) -> float:
        return self.graph.total_variation(w)

    def original_objective(self, w) -> float:
        """Compliance plus alpha times the double-sum TV (every pair seen from both sides)."""
        return self.fem.compliance(w) + self.alpha * 2.0 * self.tv(w)

    def augmented_lagrangian(self, v, w, lam, rho) -> float:
        d = np.asarray(w, dtype=float) - v
        return self.fem.compliance(v) + self.alpha * self.tv(w) + float(lam @ d) + 0.5 * rho * float(d @ d)


def round_to_budget(v: np.ndarray, budget: float) -> np.ndarray:
    """Threshold at 0.5; if over budget keep only the largest entries (lowest index on ties)."""
    w = (v >= 0.5).astype(np.int8)
    cap = int(np.floor(budget + 1e-9))
    if w.sum() > cap:
        order = np.argsort(-v, kind="stable")
        w[:] = 0
        w[order[:cap]] = 1
    return w


def initialize(problem: AdmmProblem) -> AdmmState:
    cfg = problem.config
    if not 0 < cfg.V_max <= 1:
        raise ValueError(f"V_max must lie in (0,1], got {cfg.V_max}")
    n_el = problem.mesh.n_elements
    v = np.full(n_el, cfg.V_max)
    w = round_to_budget(v, problem.budget)
    state = AdmmState(v=v, w=w, lam=np.zeros(n_el), rho=cfg.rho0, tau=1.0)
    state.tau = problem.funnel.initial_tau(state.residual)
    return state


def _disc_seed(seed: int, j: int) -> int:
    return int(np.random.SeedSequence([seed, j]).generate_state(1)[0])


def admm_iteration(problem: AdmmProblem, state: AdmmState) -> tuple[AdmmState, IterationRecord]:
    cfg, funnel = problem.config, problem.funnel
    t0 = time.perf_counter()
    try:
        cont = solve_continuous(state.v, ContObjectiveParams(state.w, state.lam, state.rho),
                                problem.feasible, problem.fem, tol_inner=cfg.tol_inner,
                                max_inner=cfg.max_inner, t_init=cfg.t_init)
        v_star = cont.v_star
        energy = DiscreteEnergy.from_admm(v_star, state.lam, state.rho, cfg.alpha, problem.graph)
        disc = solve_discrete_heuristic(energy, problem.budget, state.w, seed=_disc_seed(cfg.seed, state.j),
                                        q=cfg.q, r_max=cfg.R_max, sweeps=cfg.sweeps, restarts=cfg.restarts)
    except Exception as exc:
        raise AdmmIterationError(f"ADMM iteration {state.j + 1} (rho={state.rho:.3e}) failed: {exc}") from exc
    w_star = disc.w_star
    d = w_star - v_star
    r_star = float(d @ d)

    accepted = r_star <= funnel.beta * state.tau
    if accepted:
        new = AdmmState(v=v_star, w=w_star, lam=state.lam + state.rho * d, rho=state.rho,
                        tau=funnel.contracted_tau(state.tau, r_star), j=state.j + 1)
    else:
        new = AdmmState(v=state.v, w=state.w, lam=state.lam, rho=funnel.c * state.rho, tau=state.tau,
                        j=state.j + 1)

    comp_w = problem.fem.compliance(new.w)
    tv = problem.tv(new.w)
    record = IterationRecord(
        j=new.j, residual=new.residual, tau=new.tau, rho=new.rho, accepted=accepted,
        candidate_residual=r_star, compliance=comp_w, tv_value=tv,
        original_objective=comp_w + cfg.alpha * 2.0 * tv,
        augmented_lagrangian=problem.augmented_lagrangian(new.v, new.w, new.lam, new.rho),
        cont_iterations=cont.iterations, disc_energy=disc.energy,
        wall_time=time.perf_counter() - t0, v=new.v.copy(), w=new.w.copy(), lam=new.lam.copy(),
    )
    log.info("j=%d %s r*=%.3e tau=%.3e rho=%.3e obj=%.6e inner=%d", new.j,
             "accept" if accepted else "reject", r_star, new.tau, new.rho,
             record.original_objective, cont.iterations)
    return new, record


@dataclass
class RunResult:
    state: AdmmState
    history: list
    initial: AdmmState
    converged: bool

    @property
    def rejections(self) -> int:
        return sum(not r.accepted for r in self.history)

    @property
    def rho_ratio(self) -> float:
        return self.state.rho / self.initial.rho


def run(problem: AdmmProblem, callback: Callable[[AdmmState, IterationRecord], None] | None = None) -> RunResult:
    cfg = problem.config
    state = initialize(problem)
    initial = AdmmState(state.v.copy(), state.w.copy(), state.lam.copy(), state.rho, state.tau, 0)
    history = []
    while state.residual > cfg.delta_tol and state.j < cfg.max_outer:
        state, record = admm_iteration(problem, state)
        history.append(record)
        if callback is not None:
            callback(state, record)
    converged = state.residual <= cfg.delta_tol
    if not converged:
        log.warning("ADMM stopped at max_outer=%d with residual %.3e > %.1e", cfg.max_outer,
                    state.residual, cfg.delta_tol)
    return RunResult(state=state, history=history, initial=initial, converged=converged)
