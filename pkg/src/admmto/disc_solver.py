"""Binary TV + linearized penalty under a cardinality budget.

For binary w the penalty ``lam^T (w - v) + rho/2 ||w - v||^2`` is linear in w
(``w_e^2 = w_e``), so the energy is ``unary @ w + alpha * TV(w) + constant``
with ``unary_e = lam_e + rho/2 (1 - 2 v_e)``. Each adjacent pair enters TV once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .mesh import AdjacencyGraph

EXACT_MAX_ELEMENTS = 24
_IMPROVE_TOL = 1e-12


def _budget_count(budget: float) -> int:
    return int(np.floor(budget + 1e-9))


def _check_binary(w) -> np.ndarray:
    w = np.asarray(w)
    if not np.all((w == 0) | (w == 1)):
        raise ValueError("w must be binary")
    return w.astype(np.int8)


def discrete_objective(w, v_bar, lam, rho: float, alpha: float, graph: AdjacencyGraph) -> float:
    """alpha * TV(w) + lam^T (w - v_bar) + rho/2 ||w - v_bar||^2, evaluated directly."""
    w = _check_binary(w).astype(float)
    diff = w - np.asarray(v_bar, dtype=float)
    return float(alpha * graph.total_variation(w) + np.asarray(lam, dtype=float) @ diff
                 + 0.5 * rho * diff @ diff)


@dataclass
class DiscreteEnergy:
    unary: np.ndarray
    graph: AdjacencyGraph
    alpha: float
    constant: float = 0.0

    @classmethod
    def from_admm(cls, v_bar, lam, rho: float, alpha: float, graph: AdjacencyGraph) -> "DiscreteEnergy":
        v_bar = np.asarray(v_bar, dtype=float)
        lam = np.asarray(lam, dtype=float)
        unary = lam + 0.5 * rho * (1.0 - 2.0 * v_bar)
        constant = 0.5 * rho * float(v_bar @ v_bar) - float(lam @ v_bar)
        return cls(unary=unary, graph=graph, alpha=float(alpha), constant=constant)

    @property
    def n(self) -> int:
        return len(self.unary)

    def value(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(self.unary @ w + self.alpha * self.graph.total_variation(w) + self.constant)

    def flip_deltas(self, w: np.ndarray) -> np.ndarray:
        """Energy change of flipping each element alone."""
        w = np.asarray(w, dtype=float)
        i, j = self.graph.edges[:, 0], self.graph.edges[:, 1]
        term = self.graph.weights * (1.0 - 2.0 * np.abs(w[i] - w[j]))
        tv = np.bincount(i, weights=term, minlength=self.n) + np.bincount(j, weights=term, minlength=self.n)
        return (1.0 - 2.0 * w) * self.unary + self.alpha * tv

    def delta_flip(self, w, e: int) -> float:
        we = w[e]
        d = (1 - 2 * we) * self.unary[e]
        for f, s in self.graph.neighbors[e]:
            d += self.alpha * s * (1 - 2 * abs(we - w[f]))
        return float(d)


@dataclass
class DiscSolveReport:
    w_star: np.ndarray
    energy: float
    moves_tried: int
    moves_accepted: int
    seed: int | None


def solve_discrete_exact(energy: DiscreteEnergy, budget: float, chunk: int = 1 << 16) -> DiscSolveReport:
    """Global minimizer by enumeration in lexicographic order; first of tied minima wins."""
    n = energy.n
    if n > EXACT_MAX_ELEMENTS:
        raise ValueError(f"exact enumeration limited to {EXACT_MAX_ELEMENTS} elements, got {n}")
    cap = _budget_count(budget)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    i, j = energy.graph.edges[:, 0], energy.graph.edges[:, 1]
    s = energy.graph.weights
    best_e, best_code = np.inf, -1
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        W = ((codes[:, None] >> shifts) & 1).astype(float)
        vals = W @ energy.unary + energy.alpha * (np.abs(W[:, i] - W[:, j]) @ s) + energy.constant
        vals[W.sum(axis=1) > cap] = np.inf
        m = vals.min()
        if not np.isfinite(m):
            continue
        tol = 1e-12 * max(1.0, abs(m))
        if m < best_e - tol:
            best_e = float(m)
            best_code = int(codes[np.flatnonzero(vals <= m + tol)[0]])
    w = ((best_code >> shifts) & 1).astype(np.int8)
    return DiscSolveReport(w_star=w, energy=energy.value(w), moves_tried=1 << n, moves_accepted=0, seed=None)


def greedy_unary(energy: DiscreteEnergy, budget: float) -> np.ndarray:
    """Switch on up to the budget the elements with the most negative unary cost."""
    w = np.zeros(energy.n, dtype=np.int8)
    order = np.argsort(energy.unary, kind="stable")
    order = order[energy.unary[order] < 0][:_budget_count(budget)]
    w[order] = 1
    return w


@numba.njit(cache=True)
def _region_kernel(w, unary, indptr, indices, weights, alpha, cap, q, r_max, seeds, rng):
    """Grow and apply region flips in place; returns the accepted move count."""
    n = w.shape[0]
    mark = np.zeros(n, np.int64)
    region = np.empty(r_max, np.int64)
    count = 0
    for e in range(n):
        count += w[e]
    accepted = 0
    for p in range(seeds.shape[0]):
        stamp = p + 1
        region[0] = seeds[p]
        mark[seeds[p]] = stamp
        size, head = 1, 0
        while head < size and size < r_max:
            e = region[head]
            head += 1
            for k in range(indptr[e], indptr[e + 1]):
                f = indices[k]
                if mark[f] != stamp and rng.random() < q:
                    mark[f] = stamp
                    region[size] = f
                    size += 1
                    if size >= r_max:
                        break
        # energy change of setting the whole region to 0 (d0) or to 1 (d1)
        d0 = 0.0
        d1 = 0.0
        n_on = 0
        for r in range(size):
            e = region[r]
            we = w[e]
            n_on += we
            if we == 1:
                d0 -= unary[e]
            else:
                d1 += unary[e]
            for k in range(indptr[e], indptr[e + 1]):
                f = indices[k]
                s = weights[k]
                wf = w[f]
                if mark[f] == stamp:
                    if e < f and we != wf:
                        d0 -= alpha * s
                        d1 -= alpha * s
                else:
                    old = abs(we - wf)
                    d0 += alpha * s * (wf - old)
                    d1 += alpha * s * ((1 - wf) - old)
        if count + size - n_on > cap:
            d1 = np.inf
        if d0 >= -1e-12 and d1 >= -1e-12:
            continue
        b = 0 if d0 <= d1 else 1
        for r in range(size):
            w[region[r]] = b
        count += (size - n_on) if b == 1 else -n_on
        accepted += 1
    return accepted


def _csr(graph: AdjacencyGraph):
    indptr = np.zeros(graph.n_elements + 1, dtype=np.int64)
    indices, weights = [], []
    for e, nb in enumerate(graph.neighbors):
        indptr[e + 1] = indptr[e] + len(nb)
        indices += [f for f, _ in nb]
        weights += [s for _, s in nb]
    return indptr, np.asarray(indices, dtype=np.int64), np.asarray(weights, dtype=float)


def _best_swap(energy: DiscreteEnergy, w: np.ndarray, deltas: np.ndarray, top: int = 8):
    """Most improving (switch on, switch off) pair among the best few of each kind."""
    off = np.flatnonzero(w == 0)
    on = np.flatnonzero(w == 1)
    if len(on) == 0 or len(off) == 0:
        return None
    cand_on = off[np.argsort(deltas[off], kind="stable")[:top]]
    cand_off = on[np.argsort(deltas[on], kind="stable")[:top]]
    best, best_d = None, -_IMPROVE_TOL
    for a in cand_on:
        nb = dict(energy.graph.neighbors[a])
        for b in cand_off:
            d = deltas[a] + deltas[b] + 2.0 * energy.alpha * nb.get(int(b), 0.0)
            if d < best_d:
                best, best_d = (int(a), int(b)), d
    return best


def local_search(energy: DiscreteEnergy, budget: float, w: np.ndarray):
    """Best-improvement single flips, then budget-neutral swaps, until neither improves.

    Returns (w, accepted move count).
    """
    w = w.copy()
    cap = _budget_count(budget)
    accepted = 0
    while True:
        deltas = energy.flip_deltas(w)
        allowed = deltas < -_IMPROVE_TOL
        if w.sum() >= cap:
            allowed &= w == 1
        if allowed.any():
            e = int(np.flatnonzero(allowed)[np.argmin(deltas[allowed])])
            w[e] = 1 - w[e]
            accepted += 1
            continue
        pair = _best_swap(energy, w, deltas)
        if pair is None:
            return w, accepted
        w[pair[0]], w[pair[1]] = 1, 0
        accepted += 1


def _region_search(energy: DiscreteEnergy, budget: float, w0: np.ndarray, rng: np.random.Generator,
                   q: float, r_max: int, proposals: int):
    w = np.asarray(w0, dtype=np.int64).copy()
    indptr, indices, weights = _csr(energy.graph)
    seeds = rng.integers(0, energy.n, size=proposals)
    accepted = _region_kernel(w, np.asarray(energy.unary, dtype=float), indptr, indices, weights,
                              float(energy.alpha), _budget_count(budget), float(q), int(r_max), seeds, rng)
    return w.astype(np.int8), int(accepted)


def solve_discrete_heuristic(energy: DiscreteEnergy, budget: float, w_init, seed: int,
                             q: float = 0.7, r_max: int = 64, sweeps: float = 20.0,
                             restarts: int = 1) -> DiscSolveReport:
    """Randomized connected-region flips followed by flip/swap local search.

    Each restart draws ``sweeps * n`` region proposals from its own child of
    ``SeedSequence(seed)``. Even-numbered restarts start from ``w_init``,
    odd-numbered ones from the budgeted unary-greedy labelling. The lowest
    energy over restarts is returned (earliest restart on ties).
    """
    w_init = _check_binary(w_init)
    if w_init.shape != (energy.n,):
        raise ValueError(f"w_init has shape {w_init.shape}, expected ({energy.n},)")
    if w_init.sum() > _budget_count(budget):
        raise ValueError(f"w_init violates the budget: {int(w_init.sum())} > {budget}")
    if not 0.0 <= q <= 1.0 or r_max < 1 or restarts < 1:
        raise ValueError("need 0 <= q <= 1, r_max >= 1, restarts >= 1")

    proposals = int(round(sweeps * energy.n))
    best = None
    tried = accepted_total = 0
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        start = w_init if r % 2 == 0 else greedy_unary(energy, budget)
        w, acc_region = _region_search(energy, budget, start, rng, q, r_max, proposals)
        w, acc_local = local_search(energy, budget, w)
        val = energy.value(w)
        tried += proposals
        accepted_total += acc_region + acc_local
        if best is None or val < best[1] - _IMPROVE_TOL:
            best = (w, val)
    return DiscSolveReport(w_star=best[0], energy=best[1], moves_tried=tried,
                           moves_accepted=accepted_total, seed=seed)
