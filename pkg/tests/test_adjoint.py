import numpy as np
import pytest

from admmto.adjoint import (ContObjectiveParams, StaleStateError, compliance_gradient,
                            cont_objective_and_gradient)
from admmto.fem import FemContext


def fd_gradient(func, v, step=1e-6):
    g = np.empty_like(v)
    for e in range(len(v)):
        vp, vm = v.copy(), v.copy()
        vp[e] += step
        vm[e] -= step
        g[e] = (func(vp) - func(vm)) / (2 * step)
    return g


def test_zero_state_zero_gradient(fem4, rng):
    v = rng.uniform(0, 1, fem4.mesh.n_elements)
    g = compliance_gradient(fem4.mesh, v, np.zeros(fem4.mesh.n_nodes), fem4.simp)
    assert np.all(g == 0.0)


def test_gradient_nonpositive(fem4, rng):
    for _ in range(10):
        v = rng.uniform(0, 1, fem4.mesh.n_elements)
        u, system = fem4.solve(v)
        assert np.all(compliance_gradient(fem4.mesh, v, u, fem4.simp, system=system) <= 1e-12)


def test_gradient_matches_finite_differences(fem4, rng):
    v = rng.uniform(0.05, 0.95, fem4.mesh.n_elements)
    u, system = fem4.solve(v)
    g = compliance_gradient(fem4.mesh, v, u, fem4.simp, system=system)
    fd = fd_gradient(fem4.compliance, v)
    assert np.all(np.abs(fd - g) / np.maximum(1.0, np.abs(g)) <= 1e-5)


def test_stale_state_rejected(fem4, rng):
    v = rng.uniform(0.05, 0.95, fem4.mesh.n_elements)
    u, _ = fem4.solve(v)
    other = fem4.assemble(np.clip(v + 0.2, 0, 1))
    with pytest.raises(StaleStateError):
        compliance_gradient(fem4.mesh, v, u, fem4.simp, system=other)


def test_boundary_gradient_is_one_sided(fem4):
    v = np.zeros(fem4.mesh.n_elements)
    u, system = fem4.solve(v)
    assert np.all(compliance_gradient(fem4.mesh, v, u, fem4.simp, system=system) == 0.0)


def test_cont_objective_at_w_bar(fem4, rng):
    w_bar = (rng.uniform(size=fem4.mesh.n_elements) > 0.5).astype(float)
    params = ContObjectiveParams(w_bar, np.zeros_like(w_bar), rho=3.0)
    value, _ = cont_objective_and_gradient(w_bar, params, fem4)
    assert value == pytest.approx(fem4.compliance(w_bar), rel=1e-14)


def test_cont_gradient_without_source(mesh4, rng):
    ctx = FemContext(mesh4, source=0.0)
    v = rng.uniform(0, 1, mesh4.n_elements)
    w_bar = (rng.uniform(size=v.shape) > 0.5).astype(float)
    lam = rng.normal(size=v.shape)
    _, g = cont_objective_and_gradient(v, ContObjectiveParams(w_bar, lam, 2.5), ctx)
    assert np.array_equal(g, -lam - 2.5 * (w_bar - v))


def test_cont_gradient_finite_differences(fem4, rng):
    for _ in range(3):
        v = rng.uniform(0.05, 0.95, fem4.mesh.n_elements)
        params = ContObjectiveParams((rng.uniform(size=v.shape) > 0.5).astype(float),
                                     rng.uniform(-1, 1, v.shape), rng.uniform(0.01, 10))
        _, g = cont_objective_and_gradient(v, params, fem4)
        fd = fd_gradient(lambda x: cont_objective_and_gradient(x, params, fem4)[0], v)
        assert np.all(np.abs(fd - g) / np.maximum(1e-12, np.abs(g)) <= 1e-5)


def test_params_validation():
    with pytest.raises(ValueError):
        ContObjectiveParams(np.zeros(3), np.zeros(3), rho=0.0)
    with pytest.raises(ValueError):
        ContObjectiveParams(np.zeros(3), np.zeros(4), rho=1.0)
