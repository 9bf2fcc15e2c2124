"""Uniform triangular mesh of the unit square and its element adjacency graph."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class Mesh:
    """P1 triangulation of [0, 1]^2 with n x n squares, each cut lower-left to upper-right.

    Nodes are ordered row-major by (y, x): node ``j * (n + 1) + i`` sits at
    ``(i / n, j / n)``. Square ``(i, j)`` contributes elements ``2 * (j * n + i)``
    (below the diagonal) and ``2 * (j * n + i) + 1`` (above it).
    """

    n: int
    nodes: np.ndarray  # (n_nodes, 2) float64
    elements: np.ndarray  # (n_elements, 3) int64, counterclockwise
    dirichlet_nodes: np.ndarray  # sorted int64 indices, x == 0 or y == 1
    element_area: np.ndarray  # (n_elements,)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def free_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.dirichlet_nodes] = False
        return np.flatnonzero(mask)

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.elements]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def centroids(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    def dirichlet_edge_elements(self) -> np.ndarray:
        """Indices of elements having a full edge on the Dirichlet boundary."""
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        on_west = np.isclose(x, 0.0)
        on_north = np.isclose(y, 1.0)
        hits = []
        for e, tri in enumerate(self.elements):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                if (on_west[a] and on_west[b]) or (on_north[a] and on_north[b]):
                    hits.append(e)
                    break
        return np.asarray(hits, dtype=np.int64)

    def to_text(self) -> str:
        """Plain listing, one record per line: ``node i x y`` then ``element e a b c``."""
        lines = [f"node {i} {x:.17g} {y:.17g}" for i, (x, y) in enumerate(self.nodes)]
        lines += [f"element {e} {a} {b} {c}" for e, (a, b, c) in enumerate(self.elements)]
        lines += [f"dirichlet {i}" for i in self.dirichlet_nodes]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class AdjacencyGraph:
    """Edge-sharing element adjacency with TV weights (shared edge length / h).

    ``edges`` holds each unordered pair once with ``edges[k, 0] < edges[k, 1]``.
    """

    n_elements: int
    edges: np.ndarray  # (m, 2) int64
    weights: np.ndarray  # (m,) values in {1, sqrt(2)}
    neighbors: tuple = field(repr=False)  # neighbors[e] = tuple of (e', s)

    def degree(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=np.int64)

    def total_variation(self, w: np.ndarray) -> float:
        """Weighted TV with each unordered pair counted once."""
        w = np.asarray(w, dtype=float)
        return float(np.sum(self.weights * np.abs(w[self.edges[:, 0]] - w[self.edges[:, 1]])))


def build_unit_square_mesh(n: int) -> Mesh:
    if int(n) != n or n < 1:
        raise ValueError(f"mesh subdivision count must be a positive integer, got {n!r}")
    n = int(n)
    ticks = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(ticks, ticks, indexing="xy")
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    i, j = i.ravel(), j.ravel()
    a = j * (n + 1) + i
    b = a + 1
    c = a + n + 2
    d = a + n + 1
    elements = np.empty((2 * n * n, 3), dtype=np.int64)
    elements[0::2] = np.column_stack([a, b, c])
    elements[1::2] = np.column_stack([a, c, d])

    dirichlet = np.flatnonzero((nodes[:, 0] == 0.0) | (nodes[:, 1] == 1.0))
    area = np.full(len(elements), 0.5 / n**2)
    return Mesh(n=n, nodes=nodes, elements=elements, dirichlet_nodes=dirichlet, element_area=area)


def build_adjacency(mesh: Mesh) -> AdjacencyGraph:
    owner: dict[tuple[int, int], int] = {}
    pairs, weights = [], []
    h = mesh.h
    for e, tri in enumerate(mesh.elements):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(min(a, b)), int(max(a, b)))
            other = owner.pop(key, None)
            if other is None:
                owner[key] = e
                continue
            length = float(np.linalg.norm(mesh.nodes[key[0]] - mesh.nodes[key[1]]))
            s = SQRT2 if length > 1.2 * h else 1.0
            pairs.append((other, e))
            weights.append(s)

    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    edges.sort(axis=1)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]
    weights = np.asarray(weights, dtype=float)[order]

    nbrs: list[list[tuple[int, float]]] = [[] for _ in range(mesh.n_elements)]
    for (p, q), s in zip(edges.tolist(), weights.tolist()):
        nbrs[p].append((q, s))
        nbrs[q].append((p, s))
    return AdjacencyGraph(
        n_elements=mesh.n_elements,
        edges=edges,
        weights=weights,
        neighbors=tuple(tuple(nb) for nb in nbrs),
    )
