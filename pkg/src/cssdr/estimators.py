"""Classical inverse-regression estimators in the common candidate-matrix form.

All four estimators use ``A = S^-1 E_n{v(Y~) v(Y~)^T} S^-1`` with
``v(y~) = E_n[X g(Y, y~)]`` and ``S`` the sample covariance of X.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import DataError, Dataset, center
from .kernels import GKernel, h_gram_inverse, make_slices
from .rotations import AngleVector, frame_to_angles

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateMatrix:
    A: np.ndarray
    gkernel: GKernel
    M: np.ndarray  # the inner matrix E_n{v v^T}


@dataclass(frozen=True)
class ClassicalFit:
    beta_hat: np.ndarray
    eigenvalues: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def inv_sym(S: np.ndarray, max_cond: float = 1e12) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via eigh, eigenvalues floored at 1e-12 max."""
    w, V = np.linalg.eigh((S + S.T) / 2)
    top = w[-1]
    if top <= 0 or w[0] < top / max_cond:
        raise DataError(f"covariance matrix is singular or ill-conditioned (eigenvalues {w[0]:.3g} .. {top:.3g})")
    w = np.maximum(w, 1e-12 * top)
    return (V / w) @ V.T


def inverse_regression_moment(X: np.ndarray, Y: np.ndarray, g: GKernel) -> np.ndarray:
    """``E_n{v(Y~) v(Y~)^T}`` for centered ``X`` and ``Y``."""
    n = X.shape[0]
    if g.variant == "ols":
        v = X.T @ Y / n
        return np.outer(v, v)
    if g.variant == "sir":
        part = make_slices(Y, g.slices)
        sizes = part.sizes
        if sizes.min() == sizes.max():
            log.info("SIR: %d slices of %d observations", part.k, sizes[0])
        else:
            log.info("SIR: %d slices of %d to %d observations", part.k, sizes.min(), sizes.max())
        M = np.zeros((X.shape[1],) * 2)
        for ell, prop in enumerate(part.proportions):
            mean = X[part.assignment == ell].mean(axis=0)
            M += prop * np.outer(mean, mean)
        return M
    if g.variant == "pir":
        Hm = g.hbasis(Y)
        C = X.T @ Hm / n
        return C @ h_gram_inverse(Hm) @ C.T
    V = X.T @ g.matrix(Y) / n
    return V @ V.T / n


def candidate_matrix(ds: Dataset, g: GKernel) -> CandidateMatrix:
    if not ds.centered:
        ds = center(ds)
    X, Y = ds.X, ds.Y
    Sinv = inv_sym(X.T @ X / ds.n)
    M = inverse_regression_moment(X, Y, g)
    A = Sinv @ M @ Sinv
    return CandidateMatrix((A + A.T) / 2, g, M)


def candidate_matrix_gform(ds: Dataset, g: GKernel) -> np.ndarray:
    """Same matrix computed literally from the n x n kernel (reference path)."""
    if not ds.centered:
        ds = center(ds)
    X, Y = ds.X, ds.Y
    n = ds.n
    Sinv = inv_sym(X.T @ X / n)
    V = X.T @ g.matrix(Y) / n
    A = Sinv @ (V @ V.T / n) @ Sinv
    return (A + A.T) / 2


def leading_span(cm: CandidateMatrix | np.ndarray, d: int) -> ClassicalFit:
    """Top-``d`` eigenvectors of the candidate matrix."""
    A = cm.A if isinstance(cm, CandidateMatrix) else np.asarray(cm, dtype=float)
    p = A.shape[0]
    if not 1 <= d <= p:
        raise ValueError(f"need 1 <= d <= p, got d={d}, p={p}")
    w, V = np.linalg.eigh((A + A.T) / 2)
    w, V = w[::-1], V[:, ::-1]
    beta, _ = np.linalg.qr(V[:, :d])
    diagnostics = {}
    if d < p and np.isclose(w[d - 1], w[d], rtol=1e-10, atol=1e-14 * max(abs(w[0]), 1.0)):
        diagnostics["tied_eigenvalues"] = True
        warnings.warn("eigenvalues d and d+1 are tied; the span is not unique", RuntimeWarning, stacklevel=2)
    return ClassicalFit(beta, w, diagnostics)


def whitened_span(cm: CandidateMatrix, sigma: np.ndarray, d: int) -> ClassicalFit:
    """Top-``d`` eigenvectors of ``S^-1/2 M S^-1/2`` mapped back by ``S^-1/2``.

    Spans the same space as :func:`leading_span` when ``M`` has rank ``d``;
    with a full-rank sample ``M`` it weights directions in the whitened metric.
    """
    w, V = np.linalg.eigh(sigma)
    Sih = (V / np.sqrt(w)) @ V.T
    fit = leading_span(Sih @ cm.M @ Sih, d)
    beta, _ = np.linalg.qr(Sih @ fit.beta_hat)
    return ClassicalFit(beta, fit.eigenvalues, fit.diagnostics)


def classical_fit(ds: Dataset, g: GKernel, d: int, whiten: bool = False) -> ClassicalFit:
    cm = candidate_matrix(ds, g)
    if whiten:
        X = ds.X - ds.X.mean(axis=0)
        return whitened_span(cm, X.T @ X / ds.n, d)
    return leading_span(cm, d)


def classical_to_angles(fit: ClassicalFit | np.ndarray) -> AngleVector:
    beta = fit.beta_hat if isinstance(fit, ClassicalFit) else fit
    return frame_to_angles(beta)
