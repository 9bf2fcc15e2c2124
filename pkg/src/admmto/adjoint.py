"""Compliance sensitivities and the continuous ADMM subproblem objective.

Compliance is self-adjoint, so the gradient needs no extra linear solve:
``dC/dv_e = -k'(v_e) u_e^T S_e u_e`` with ``S_e`` the unit-conductivity
element matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import FemContext, SimpParams, StiffnessSystem, compliance, simp_derivative, unit_stiffness
from .mesh import Mesh


class StaleStateError(ValueError):
    """The state passed to a gradient does not solve the state equation for the design."""


@dataclass
class ContObjectiveParams:
    w_bar: np.ndarray
    lam: np.ndarray
    rho: float

    def __post_init__(self):
        self.w_bar = np.asarray(self.w_bar, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)
        if self.w_bar.shape != self.lam.shape:
            raise ValueError("w_bar and lambda must have the same length")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")


def element_energies(S: np.ndarray, elements: np.ndarray, u: np.ndarray) -> np.ndarray:
    ue = u[elements]
    return np.einsum("ei,eij,ej->e", ue, S, ue)


def compliance_gradient(mesh: Mesh, v, u, simp: SimpParams, system: StiffnessSystem | None = None,
                        S: np.ndarray | None = None, check_tol: float = 1e-8) -> np.ndarray:
    """Gradient of f^T u(v) with respect to the element design.

    Args:
        system: the assembled system for ``v``; used to check that ``u`` is not
            stale. Pass ``None`` to skip the check (callers that just solved).
        S: cached unit stiffness matrices, recomputed if omitted.
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    if system is not None:
        res = system.relative_residual(u)
        if res > check_tol:
            raise StaleStateError(f"state residual {res:.3e} > {check_tol:.1e}; u does not match v")
    if S is None:
        S = unit_stiffness(mesh)
    return -simp_derivative(v, simp) * element_energies(S, mesh.elements, u)


def cont_objective_and_gradient(v, params: ContObjectiveParams, fem: FemContext):
    """Value and gradient of compliance + lam^T (w_bar - v) + rho/2 ||w_bar - v||^2 (one state solve)."""
    v = np.asarray(v, dtype=float)
    u, system = fem.solve(v)
    comp = compliance(u, system.full_load())
    diff = params.w_bar - v
    value = comp + float(params.lam @ diff) + 0.5 * params.rho * float(diff @ diff)
    grad = compliance_gradient(fem.mesh, v, u, fem.simp, S=fem.S) - params.lam - params.rho * diff
    return value, grad
