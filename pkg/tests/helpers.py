"""Synthetic data builders shared by several test modules."""

from __future__ import annotations

import numpy as np

from cssdr.data import Dataset
from cssdr.kernels import HBasis
from cssdr.objective import GBasis, g_features
from cssdr.rotations import AngleVector, eta


def quadratic_design(n, seed=0, noise=0.0):
    """p = 3, d = 1 data with X curved along a known direction and Y linear in it."""
    r = np.random.default_rng(seed)
    phi0 = np.array([1.0, 1.2])
    e0 = eta(AngleVector(phi0, 3, 1))[:, 0]
    N = np.linalg.qr(np.column_stack([e0, r.standard_normal((3, 2))]))[0][:, 1:]
    u = r.standard_normal(n)
    v = r.standard_normal((n, 2))
    X = np.outer(u, e0) + (v + (u**2 - 1)[:, None] * np.array([0.7, -0.4])) @ N.T
    Y = 0.5 + 1.3 * u + noise * r.standard_normal(n)
    return Dataset(X, Y), phi0


def exact_design(n, p, d, phi0, seed=0, noise=0.3):
    """Sample with R(phi0, F_n) = 0 exactly but a noisy response.

    X = eta0 u + N z where z is residualised on span{G(u), H(Y)}, so the
    least-squares residual of X on G(u) is N z and is orthogonal to H(Y).
    """
    rng = np.random.default_rng(seed)
    E0 = eta(AngleVector(phi0, p, d))
    N = np.linalg.svd(E0, full_matrices=True)[0][:, d:]
    u = rng.standard_normal((n, d))
    Y = 0.5 + u @ np.linspace(1.0, 2.0, d) + noise * rng.standard_normal(n)
    z = rng.standard_normal((n, p - d)) + (u[:, :1] ** 2)
    B = np.column_stack([g_features(u, GBasis(d, 2)), HBasis(2)(Y)])
    z = z - B @ np.linalg.lstsq(B, z, rcond=None)[0]
    return Dataset(u @ E0.T + z @ N.T, Y)
