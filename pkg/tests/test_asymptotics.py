from __future__ import annotations

import numpy as np
import pytest

from cssdr import asymptotics as asy
from cssdr.data import Dataset
from cssdr.kernels import HBasis
from cssdr.objective import FitOptions, GBasis, fit_css, g_features
from cssdr.optimizer import OptimOptions
from cssdr.rotations import AngleVector, eta
from helpers import exact_design


HB = HBasis(2)


def _weighted_ell(ds, gb, w):
    def f(phi):
        E = eta(AngleVector(phi, ds.p, gb.d))
        return asy._moments(ds.X, HB(ds.Y), g_features(ds.X @ E, gb), w).ell

    return f


def _fd_grad(f, phi, h=1e-5):
    out = np.empty(phi.size)
    for t in range(phi.size):
        e = np.zeros(phi.size)
        e[t] = h
        out[t] = (f(phi + e) - f(phi - e)) / (2 * h)
    return out


def test_exact_design_has_zero_R():
    phi0 = np.array([1.0, 1.2])
    ds = exact_design(50, 3, 1, phi0)
    assert np.linalg.norm(asy.gram_bundle(phi0, ds, HB, GBasis(1, 2)).R) < 1e-12


@pytest.mark.parametrize("p,d", [(3, 1), (4, 2)])
def test_dR_matches_differences(p, d):
    rng = np.random.default_rng(p)
    ds = Dataset(rng.standard_normal((80, p)) ** 2, rng.standard_normal(80))
    gb = GBasis(d, 2)
    phi = rng.uniform(0.2, 2.8, p * d - d * (d + 1) // 2)
    dR = asy.partials(phi, ds, HB, gb).dR
    h = 1e-6
    for t in range(phi.size):
        e = np.zeros(phi.size)
        e[t] = h
        fd = (asy.gram_bundle(phi + e, ds, HB, gb).R - asy.gram_bundle(phi - e, ds, HB, gb).R) / (2 * h)
        assert np.linalg.norm(dR[t] - fd) < 1e-5 * np.linalg.norm(fd)
        single = asy.partials(phi, ds, HB, gb, t=t + 1)
        assert np.array_equal(single[3], dR[t])


@pytest.mark.parametrize("p,d,phi0", [(3, 1, [1.0, 1.2]), (4, 2, [0.7, 1.9, 0.4, 1.3, 2.2])])
def test_W_is_hessian_at_zero_residual(p, d, phi0):
    phi0 = np.array(phi0)
    ds = exact_design(200, p, d, phi0, seed=1)
    gb = GBasis(d, 2)
    hess = asy.hessian_W(phi0, ds, HB, gb)
    f = _weighted_ell(ds, gb, None)
    H = np.empty((phi0.size,) * 2)
    h = 1e-4
    for a in range(phi0.size):
        e = np.zeros(phi0.size)
        e[a] = h
        H[a] = (_fd_grad(f, phi0 + e) - _fd_grad(f, phi0 - e)) / (2 * h)
    H = (H + H.T) / 2
    wa = np.sort(np.linalg.eigvalsh(hess.W))[::-1]
    wb = np.sort(np.linalg.eigvalsh(H))[::-1]
    r = hess.rank
    assert r == d * (p - d)
    assert np.allclose(wa[:r], wb[:r], rtol=1e-3)
    assert np.allclose(hess.W, H, atol=1e-3 * wa[0])


def test_moore_penrose_identities():
    phi0 = np.array([0.7, 1.9, 0.4, 1.3, 2.2])
    ds = exact_design(150, 4, 2, phi0, seed=2)
    hess = asy.hessian_W(phi0, ds, HB, GBasis(2, 2))
    W, Wp, P = hess.W, hess.W_pinv, hess.P_W
    assert np.allclose(W @ Wp @ W, W, atol=1e-10 * np.abs(W).max())
    assert np.allclose(Wp @ W @ Wp, Wp, atol=1e-8 * np.abs(Wp).max())
    assert np.allclose(P, P.T, atol=1e-10) and np.allclose(P @ P, P, atol=1e-10)
    assert np.isclose(np.trace(P), hess.rank)
    assert np.allclose(hess.Q_W @ P, 0, atol=1e-10)


def test_influence_matches_gateaux_derivative():
    phi0 = np.array([1.0, 1.2])
    ds = exact_design(50, 3, 1, phi0, seed=3)
    gb = GBasis(1, 2)
    G = asy.influence_matrix(phi0, ds, HB, gb)
    n = ds.n
    alpha = 1e-5
    for i in np.random.default_rng(0).choice(n, 20, replace=False):
        def grad_at(a):
            w = np.full(n, (1 - a) / n)
            w[i] += a
            return _fd_grad(_weighted_ell(ds, gb, w), phi0)

        fd = (grad_at(alpha) - grad_at(-alpha)) / (2 * alpha)
        assert np.linalg.norm(G[i] - fd) < 1e-3 * np.linalg.norm(fd)
        assert np.array_equal(asy.influence_g_star(phi0, ds, HB, gb, int(i)), G[i])
    assert np.allclose(G.sum(0), 0, atol=1e-10)


def test_r_star_matches_weight_derivative(rng):
    ds = Dataset(rng.standard_normal((40, 3)), rng.standard_normal(40))
    gb = GBasis(1, 2)
    E = eta(AngleVector([0.5, 0.9], 3, 1))
    F, Hm = g_features(ds.X @ E, gb), HB(ds.Y)
    b = asy._moments(ds.X, Hm, F)
    Rs = asy._r_star(b, ds.X, Hm, F)
    for i in (0, 17):
        w1 = np.full(40, (1 - 1e-5) / 40)
        w1[i] += 1e-5
        w2 = np.full(40, (1 + 1e-5) / 40)
        w2[i] -= 1e-5
        fd = (asy._moments(ds.X, Hm, F, w1).R - asy._moments(ds.X, Hm, F, w2).R) / 2e-5
        assert np.allclose(Rs[i], fd, atol=1e-6 * np.abs(fd).max())


def test_covariance_shapes_and_se():
    phi0 = np.array([1.0, 1.2])
    ds = exact_design(100, 3, 1, phi0, seed=4)
    est = asy.covariance_Lambda(phi0, ds, HB, GBasis(1, 2))
    assert est.Lambda.shape == (2, 2)
    assert np.all(np.linalg.eigvalsh(est.Lambda) >= -1e-12)
    assert np.allclose(est.per_angle_se, np.sqrt(np.diag(est.Lambda) / 100))


def _mc_design(n, rng, phi0):
    E0 = eta(AngleVector(phi0, 3, 1))[:, 0]
    N = np.linalg.svd(E0[:, None], full_matrices=True)[0][:, 1:]
    u = rng.standard_normal(n)
    v = np.array([0.8, -0.5])
    X = np.outer(u, E0) + ((u**2 - 1)[:, None] * v + 0.5 * rng.standard_normal((n, 2))) @ N.T
    Y = 1.0 + 2.0 * u + 0.5 * rng.standard_normal(n)
    return Dataset(X, Y)


@pytest.mark.slow
def test_sandwich_matches_monte_carlo_spread():
    # population R(phi0, F) = 0: E[X | u] lies in the quadratic feature span
    phi0 = np.array([1.0, 1.2])
    n, reps = 400, 200
    rng = np.random.default_rng(2024)
    opts = FitOptions(h_degree=2, g_degree=2, standardize=False, optim=OptimOptions(f_tol=1e-12, x_tol=1e-9))
    dev, lams = [], []
    for _ in range(reps):
        ds = _mc_design(n, rng, phi0)
        rep = fit_css(ds, "css-pir", 1, opts)
        dev.append(np.sqrt(n) * (rep.phi.phi - phi0))
        lams.append(asy.covariance_Lambda(rep.phi, rep.dataset, HB, GBasis(1, 2)).Lambda)
    emp = np.cov(np.array(dev).T)
    pred = np.mean(lams, axis=0)
    ratio = np.diag(emp) / np.diag(pred)
    assert np.all((ratio > 0.75) & (ratio < 1.33)), ratio
