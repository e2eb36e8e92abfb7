from __future__ import annotations

import numpy as np
import pytest

from cssdr.data import Dataset, center
from cssdr.kernels import GKernel, HBasis
from cssdr.objective import (
    CssObjective,
    FitOptions,
    GBasis,
    fhat,
    fit_classical,
    fit_css,
    g_features,
    g_jacobian,
    objective_reference,
)
from cssdr.optimizer import OptimOptions
from cssdr.rotations import AngleVector, eta, frame_to_angles, random_angles

KERNELS = [GKernel("ols"), GKernel("sir", slices=5), GKernel("kir", bandwidth=0.4), GKernel("pir", hbasis=HBasis(2))]


def test_gbasis_counts_and_values():
    assert GBasis(2, 2).k == 2 * 5 // 2 + 1
    assert GBasis(3, 2).k == 3 * 6 // 2 + 1
    assert GBasis(2, 3).k == 10
    assert GBasis(2, 3, "pure").k == 8
    assert g_features(np.array([[2.0]]), GBasis(1, 2)).tolist() == [[1.0, 2.0, 4.0]]
    assert GBasis(2, 3).terms[0] == (0, 0)
    assert (0, 3) in GBasis(2, 3).terms


def test_g_jacobian_matches_differences(rng):
    gb = GBasis(3, 3)
    u = rng.standard_normal((6, 3))
    J = g_jacobian(u, gb)
    h = 1e-6
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        fd = (g_features(u + e, gb) - g_features(u - e, gb)) / (2 * h)
        assert np.allclose(J[:, :, a], fd, atol=1e-7)


def test_fhat_reproduces_linear_x(rng):
    E = np.linalg.qr(rng.standard_normal((4, 2)))[0]
    X = rng.standard_normal((30, 2)) @ E.T + 1.5
    assert np.allclose(fhat(E, X, GBasis(2, 1)), X, atol=1e-8)


@pytest.mark.parametrize("g", KERNELS, ids=lambda g: g.variant)
def test_fast_objective_matches_literal_sums(rng, g):
    ds = center(Dataset(rng.standard_normal((25, 4)), rng.standard_normal(25)))
    gb = GBasis(2, 2)
    obj = CssObjective(ds, g, gb)
    for _ in range(3):
        E = eta(random_angles(4, 2, rng))
        ref = objective_reference(E, ds, g, gb)
        assert np.isclose(obj.at_frame(E), ref, rtol=1e-10, atol=1e-14)
        assert obj.at_frame(E) >= 0


@pytest.mark.parametrize("g", KERNELS, ids=lambda g: g.variant)
def test_objective_depends_only_on_span(rng, g):
    ds = Dataset(rng.standard_normal((40, 5)), rng.standard_normal(40))
    obj = CssObjective(ds, g, GBasis(2, 3))
    av = random_angles(5, 2, rng)
    E = eta(av)
    Q = np.linalg.qr(rng.standard_normal((2, 2)))[0]
    other = frame_to_angles(E @ Q)
    assert np.isclose(obj(av), obj(other), rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("g", KERNELS, ids=lambda g: g.variant)
def test_zero_when_x_is_polynomial_in_index(rng, g):
    n, p = 60, 4
    E = eta(random_angles(p, 2, rng))
    u = rng.standard_normal((n, 2))
    gb = GBasis(2, 2)
    # X = E u + N q(u): projecting onto span(E) returns u exactly
    N = np.linalg.svd(E, full_matrices=True)[0][:, 2:]
    q = np.column_stack([u[:, 0] ** 2 - 1, u[:, 0] * u[:, 1]])
    X = u @ E.T + q @ N.T
    Y = u[:, 0] + np.sin(u[:, 1]) + 0.1 * rng.standard_normal(n)
    obj = CssObjective(Dataset(X, Y), g, gb)
    assert obj.at_frame(E) < 1e-20 * max(1.0, np.sum(X**2))
    assert obj.at_frame(np.eye(p)[:, :2]) > 1e-6


@pytest.mark.filterwarnings("ignore:Nelder-Mead stopped")
def test_fit_css_improves_on_classical(rng):
    ds = Dataset(rng.standard_normal((60, 4)) ** 2, rng.standard_normal(60))
    opts = FitOptions(optim=OptimOptions(max_iter=200))
    rep = fit_css(ds, "css-sir", 2, opts)
    assert rep.objective <= rep.initial_objective
    assert np.all(np.diff(rep.trace) <= 0)
    assert np.allclose(rep.beta.T @ rep.beta, np.eye(2), atol=1e-10)
    assert rep.beta_original.shape == (4, 2)


def test_fit_css_full_dimension_is_identity(rng):
    ds = Dataset(rng.standard_normal((20, 3)), rng.standard_normal(20))
    rep = fit_css(ds, "pir", 3)
    assert np.array_equal(rep.beta, np.eye(3)) and rep.objective == 0.0
    with pytest.raises(ValueError):
        fit_css(ds, "pir", 4)


def test_fit_classical_report(rng):
    ds = Dataset(rng.standard_normal((50, 4)), rng.standard_normal(50))
    rep = fit_classical(ds, "kir", 2)
    assert rep.phi is None and rep.method == "kir"
    assert np.allclose(rep.beta.T @ rep.beta, np.eye(2), atol=1e-12)
