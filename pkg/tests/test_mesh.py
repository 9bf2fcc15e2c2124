import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admmto.mesh import SQRT2, build_adjacency, build_unit_square_mesh


def test_full_size_mesh_counts():
    mesh = build_unit_square_mesh(32)
    assert mesh.n_elements == 2048
    assert mesh.n_nodes == 1089


def test_smallest_mesh():
    mesh = build_unit_square_mesh(1)
    assert mesh.n_elements == 2 and mesh.n_nodes == 4
    coords = {tuple(mesh.nodes[i]) for i in mesh.dirichlet_nodes}
    assert coords == {(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)}


def test_n2_area():
    mesh = build_unit_square_mesh(2)
    assert mesh.n_elements == 8
    assert mesh.element_area.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(mesh.signed_areas(), mesh.element_area)


@pytest.mark.parametrize("n", [0, -3])
def test_rejects_nonpositive(n):
    with pytest.raises(ValueError):
        build_unit_square_mesh(n)


def test_adjacency_n1():
    g = build_adjacency(build_unit_square_mesh(1))
    assert g.neighbors == (((1, SQRT2),), ((0, SQRT2),))


def test_adjacency_n2():
    mesh = build_unit_square_mesh(2)
    g = build_adjacency(mesh)
    assert len(g.edges) == 8
    # diagonal pairs live inside one square: elements 2k and 2k+1
    for (a, b), s in zip(g.edges, g.weights):
        if b == a + 1 and a % 2 == 0:
            assert s == SQRT2
        else:
            assert s == 1.0
    assert np.count_nonzero(g.weights == SQRT2) == 4


def test_text_export(mesh2):
    text = mesh2.to_text()
    assert text.count("\nelement ") == 8
    assert text.startswith("node 0 0 0")


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=1, max_value=12))
def test_mesh_invariants(n):
    mesh = build_unit_square_mesh(n)
    assert mesh.n_nodes == (n + 1) ** 2
    assert mesh.n_elements == 2 * n * n
    tri = mesh.elements
    assert np.all((tri >= 0) & (tri < mesh.n_nodes))
    assert np.all((tri[:, 0] != tri[:, 1]) & (tri[:, 1] != tri[:, 2]) & (tri[:, 0] != tri[:, 2]))
    assert np.all(mesh.signed_areas() > 0)
    assert abs(mesh.element_area.sum() - 1.0) < 1e-12
    x, y = mesh.nodes.T
    expected = set(np.flatnonzero((x == 0) | (y == 1)).tolist())
    assert set(mesh.dirichlet_nodes.tolist()) == expected
    assert len(mesh.dirichlet_nodes) == 2 * n + 1  # corner (0, 1) once

    g = build_adjacency(mesh)
    deg = g.degree()
    assert deg.max() <= 3 and deg.sum() % 2 == 0
    for e, nb in enumerate(g.neighbors):
        for f, s in nb:
            assert (e, s) in g.neighbors[f]
            shared = set(mesh.elements[e]) & set(mesh.elements[f])
            assert len(shared) == 2
            a, b = shared
            assert s == pytest.approx(np.linalg.norm(mesh.nodes[a] - mesh.nodes[b]) * n)


def test_dirichlet_edge_elements():
    mesh = build_unit_square_mesh(2)
    # west column: upper triangles of squares (0,0),(0,1); north row: upper triangles of (0,1),(1,1)
    assert mesh.dirichlet_edge_elements().tolist() == [1, 5, 7]
