"""P1 finite elements for -div(k(v) grad u) = F with SIMP conductivity.

The assembled system is SPD: we solve ``K u = f`` which is ``A(v) u + f = 0``
with ``A = -K``. Homogeneous Neumann data is natural and needs no assembly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import Mesh

_BOX_TOL = 1e-12


class StateSolveError(RuntimeError):
    """Raised when the state system cannot be solved to the requested residual."""


@dataclass(frozen=True)
class SimpParams:
    delta: float = 1e-3
    p: float = 3.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"simp delta must lie in (0,1), got {self.delta}")
        if self.p < 1.0:
            raise ValueError(f"simp exponent p must be >= 1, got {self.p}")


def _check_box(v):
    v = np.asarray(v, dtype=float)
    if np.any(v < -_BOX_TOL) or np.any(v > 1.0 + _BOX_TOL):
        raise ValueError("design values must lie in [0, 1]")
    return np.clip(v, 0.0, 1.0)


def simp_conductivity(v, simp: SimpParams):
    """k(v) = delta + (1 - delta) v^p, elementwise."""
    v = _check_box(v)
    return simp.delta + (1.0 - simp.delta) * v**simp.p


def simp_derivative(v, simp: SimpParams):
    v = _check_box(v)
    return simp.p * (1.0 - simp.delta) * v ** (simp.p - 1.0)


def _gradients(coords: np.ndarray):
    """Hat-function gradients and areas for stacked triangles of shape (..., 3, 2)."""
    x, y = coords[..., 0], coords[..., 1]
    # b_i = y_j - y_k, c_i = x_k - x_j for cyclic (i, j, k)
    b = np.stack([y[..., 1] - y[..., 2], y[..., 2] - y[..., 0], y[..., 0] - y[..., 1]], axis=-1)
    c = np.stack([x[..., 2] - x[..., 1], x[..., 0] - x[..., 2], x[..., 1] - x[..., 0]], axis=-1)
    area = 0.5 * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0])
    return b, c, area


def local_stiffness(coords, conductivity: float) -> np.ndarray:
    """Element matrix k * area * B^T B for one triangle given as a (3, 2) coordinate array."""
    coords = np.asarray(coords, dtype=float)
    b, c, area = _gradients(coords)
    if not area > 0.0:
        raise ValueError(f"degenerate or clockwise element (signed area {area})")
    return conductivity * (np.outer(b, b) + np.outer(c, c)) / (4.0 * area)


def unit_stiffness(mesh: Mesh) -> np.ndarray:
    """Unit-conductivity element matrices, shape (n_elements, 3, 3)."""
    b, c, area = _gradients(mesh.nodes[mesh.elements])
    if np.any(area <= 0.0):
        raise ValueError("mesh contains degenerate or clockwise elements")
    outer = b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]
    return outer / (4.0 * area)[:, None, None]


def nodal_load(mesh: Mesh, source: float) -> np.ndarray:
    """Full-length load vector: each element sends area/3 of the source to each of its nodes."""
    share = np.repeat(source * mesh.element_area / 3.0, 3)
    return np.bincount(mesh.elements.ravel(), weights=share, minlength=mesh.n_nodes)


@dataclass
class StiffnessSystem:
    matrix: sp.csr_matrix  # over free nodes
    load: np.ndarray  # over free nodes
    free: np.ndarray  # free position -> node index
    n_nodes: int

    @property
    def free_index_map(self) -> np.ndarray:
        """Node index -> free-system index, -1 on Dirichlet nodes."""
        out = np.full(self.n_nodes, -1, dtype=np.int64)
        out[self.free] = np.arange(len(self.free))
        return out

    def full_load(self) -> np.ndarray:
        out = np.zeros(self.n_nodes)
        out[self.free] = self.load
        return out

    def relative_residual(self, u: np.ndarray) -> float:
        uf = u[self.free]
        fnorm = np.linalg.norm(self.load)
        r = np.linalg.norm(self.matrix @ uf - self.load)
        return float(r / fnorm) if fnorm > 0 else float(r)


class FemContext:
    """Per-mesh cache of everything in the assembly that does not depend on the design."""

    def __init__(self, mesh: Mesh, simp: SimpParams | None = None, source: float = 1.0,
                 tol_lin: float = 1e-10):
        self.mesh = mesh
        self.simp = simp or SimpParams()
        self.source = float(source)
        self.tol_lin = tol_lin
        self.S = unit_stiffness(mesh)
        self.free = mesh.free_nodes
        fmap = np.full(mesh.n_nodes, -1, dtype=np.int64)
        fmap[self.free] = np.arange(len(self.free))
        loc = fmap[mesh.elements]  # (n_el, 3)
        rows = np.repeat(loc, 3, axis=1)
        cols = np.tile(loc, (1, 3))
        self._keep = ((rows >= 0) & (cols >= 0)).ravel()
        self._rows = rows.ravel()[self._keep]
        self._cols = cols.ravel()[self._keep]
        self.load = nodal_load(mesh, self.source)[self.free]

    def assemble_conductivity(self, k: np.ndarray) -> StiffnessSystem:
        k = np.asarray(k, dtype=float)
        if k.shape != (self.mesh.n_elements,):
            raise ValueError(f"expected {self.mesh.n_elements} element values, got shape {k.shape}")
        vals = (k[:, None, None] * self.S).ravel()[self._keep]
        nf = len(self.free)
        K = sp.coo_matrix((vals, (self._rows, self._cols)), shape=(nf, nf)).tocsr()
        return StiffnessSystem(matrix=K, load=self.load.copy(), free=self.free, n_nodes=self.mesh.n_nodes)

    def assemble(self, v) -> StiffnessSystem:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.mesh.n_elements,):
            raise ValueError(f"expected {self.mesh.n_elements} element values, got shape {v.shape}")
        return self.assemble_conductivity(simp_conductivity(v, self.simp))

    def solve(self, v):
        """Assemble and solve for v; returns (u over all nodes, system)."""
        system = self.assemble(v)
        return solve_state(system, self.tol_lin), system

    def compliance(self, v) -> float:
        u, system = self.solve(v)
        return compliance(u, system.full_load())


def assemble(mesh: Mesh, v, simp: SimpParams, source: float) -> StiffnessSystem:
    return FemContext(mesh, simp, source).assemble(v)


def solve_state(system: StiffnessSystem, tol_lin: float = 1e-10) -> np.ndarray:
    """Sparse direct solve of K u = f, returned on all nodes with Dirichlet entries exactly zero."""
    u = np.zeros(system.n_nodes)
    if not np.any(system.load):
        return u
    K = system.matrix.tocsc()
    try:
        lu = spla.splu(K)
    except RuntimeError as exc:  # exactly singular
        raise StateSolveError(f"state factorization failed: {exc}") from exc
    uf = lu.solve(system.load)
    for _ in range(3):
        if not np.all(np.isfinite(uf)):
            raise StateSolveError("state solve produced non-finite values (singular or indefinite system)")
        r = system.load - K @ uf
        if np.linalg.norm(r) <= 0.1 * tol_lin * np.linalg.norm(system.load):
            break
        uf = uf + lu.solve(r)
    u[system.free] = uf
    res = system.relative_residual(u)
    if res > tol_lin:
        raise StateSolveError(f"state residual {res:.3e} exceeds tolerance {tol_lin:.1e}")
    # f^T u = u^T K u must be positive for an SPD operator
    if system.load @ uf <= 0.0:
        raise StateSolveError("state system is not positive definite (f^T u <= 0)")
    return u


def compliance(u: np.ndarray, load: np.ndarray) -> float:
    """f^T u; pass both on all nodes or both on free nodes."""
    u = np.asarray(u, dtype=float)
    load = np.asarray(load, dtype=float)
    if u.shape != load.shape:
        raise ValueError(f"shape mismatch: u {u.shape} vs load {load.shape}")
    return float(load @ u)
