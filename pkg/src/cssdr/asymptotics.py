"""Plug-in asymptotic covariance of the CSS-PIR angle estimate.

Works with uncentered data and monomial bases ``H(y) = (1, y, ..., y^(s-1))``
and ``G`` (from :class:`~cssdr.objective.GBasis`), both containing the
constant. With the moment matrices

    R1 = E[X H'],  R2 = E[X G'],  R3 = E[G G'],  R4 = E[G H'],  R5 = E[H H']

the PIR objective is ``ell(phi) = tr(R R5^-1 R')`` with
``R = R1 - R2 R3^-1 R4``. The angle estimate satisfies

    P_W (phi_hat - phi_0) ~ -W^+ E_n g*(X, Y)

with ``W`` the Hessian of ``ell`` and ``g*`` the influence function of its
gradient, so ``sqrt(n) P_W (phi_hat - phi_0)`` has covariance
``W^+ E[g* g*'] W^+``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .kernels import HBasis
from .objective import GBasis, g_features, g_jacobian
from .rotations import AngleVector, eta, eta_jacobian

PINV_RCOND = 1e-8


@dataclass(frozen=True)
class GramBundle:
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray
    R4: np.ndarray
    R5: np.ndarray
    R: np.ndarray

    @property
    def ell(self) -> float:
        return float(np.trace(self.R @ np.linalg.solve(self.R5, self.R.T)))


@dataclass(frozen=True)
class Partials:
    dR2: np.ndarray  # (m, p, k)
    dR3: np.ndarray  # (m, k, k)
    dR4: np.ndarray  # (m, k, s)
    dR: np.ndarray  # (m, p, s)


@dataclass(frozen=True)
class HessianBundle:
    W: np.ndarray
    W_pinv: np.ndarray
    rank: int
    P_W: np.ndarray
    residual_norm: float  # ||R||_F at phi; W is the exact Hessian only when this is 0

    @property
    def Q_W(self) -> np.ndarray:
        return np.eye(self.W.shape[0]) - self.P_W


@dataclass(frozen=True)
class CovarianceEstimate:
    Lambda: np.ndarray
    per_angle_se: np.ndarray
    hessian: HessianBundle
    n: int


def _frame(phi, p, d):
    if isinstance(phi, AngleVector):
        return phi, eta(phi)
    av = AngleVector(phi, p, d)
    return av, eta(av)


def _moments(X, Hm, F, w=None):
    """Weighted moment matrices; ``w`` defaults to uniform ``1/n``."""
    n = X.shape[0]
    w = np.full(n, 1.0 / n) if w is None else w
    Xw, Fw, Hw = X * w[:, None], F * w[:, None], Hm * w[:, None]
    R1 = Xw.T @ Hm
    R2 = Xw.T @ F
    R3 = Fw.T @ F
    R4 = Fw.T @ Hm
    R5 = Hw.T @ Hm
    R = R1 - R2 @ np.linalg.solve(R3, R4)
    return GramBundle(R1, R2, R3, R4, R5, R)


def gram_bundle(phi, ds: Dataset, hb: HBasis, gb: GBasis) -> GramBundle:
    """Sample moment matrices at ``phi`` (data used exactly as stored, no centering)."""
    _, E = _frame(phi, ds.p, gb.d)
    X = ds.X
    return _moments(X, hb(ds.Y), g_features(X @ E, gb))


def ell(phi, ds: Dataset, hb: HBasis, gb: GBasis) -> float:
    return gram_bundle(phi, ds, hb, gb).ell


def partials(phi, ds: Dataset, hb: HBasis, gb: GBasis, t: int | None = None):
    """Angle derivatives of R2, R3, R4 and R.

    Features are evaluated at ``eta'(X - mean)``; this leaves ``R`` unchanged
    (the feature span contains the constant and is closed under shifts) and
    makes the derivative of ``R2`` the centered cross moment
    ``E[(X - EX)(X - EX)' eta_dot G_dot']``. With ``t`` (1-based) only that
    angle's matrices are returned as a tuple.
    """
    av, E = _frame(phi, ds.p, gb.d)
    n = ds.n
    Xc = ds.X - ds.X.mean(axis=0)
    Hm = hb(ds.Y)
    U = Xc @ E
    F = g_features(U, gb)
    J = g_jacobian(U, gb)  # (n, k, d)
    c = _moments(Xc, Hm, F)
    R3inv_R4 = np.linalg.solve(c.R3, c.R4)
    R2_R3inv = np.linalg.solve(c.R3.T, c.R2.T).T

    Edot = eta_jacobian(av)  # (m, p, d)
    A = np.einsum("ia,tab->tib", Xc, Edot)  # d(U)/d(phi_t): (m, n, d)
    dF = np.einsum("ikb,tib->tik", J, A)  # (m, n, k)
    dR2 = np.einsum("ia,tik->tak", Xc, dF) / n
    half = np.einsum("tik,il->tkl", dF, F) / n
    dR3 = half + half.transpose(0, 2, 1)
    dR4 = np.einsum("tik,is->tks", dF, Hm) / n
    dR = -dR2 @ R3inv_R4 + R2_R3inv @ dR3 @ R3inv_R4 - R2_R3inv @ dR4
    if t is not None:
        k = t - 1
        return dR2[k], dR3[k], dR4[k], dR[k]
    return Partials(dR2, dR3, dR4, dR)


def hessian_W(phi, ds: Dataset, hb: HBasis, gb: GBasis) -> HessianBundle:
    """``W_tu = 2 tr(dR_t R5^-1 dR_u')`` with its Moore-Penrose inverse."""
    dR = partials(phi, ds, hb, gb).dR
    b = gram_bundle(phi, ds, hb, gb)
    R5inv = np.linalg.inv(b.R5)
    W = 2.0 * np.einsum("tps,sr,upr->tu", dR, R5inv, dR)
    W = (W + W.T) / 2
    W_pinv = np.linalg.pinv(W, rcond=PINV_RCOND, hermitian=True)
    sv = np.abs(np.linalg.eigvalsh(W))
    rank = int(np.sum(sv > PINV_RCOND * sv.max())) if sv.size and sv.max() > 0 else 0
    return HessianBundle(W, W_pinv, rank, W_pinv @ W, float(np.linalg.norm(b.R)))


def _r_star(b: GramBundle, X, Hm, F):
    """Influence of each observation on R, shape (n, p, s)."""
    R3inv = np.linalg.inv(b.R3)
    R1s = X[:, :, None] * Hm[:, None, :] - b.R1
    R2s = X[:, :, None] * F[:, None, :] - b.R2
    R3s = F[:, :, None] * F[:, None, :] - b.R3
    R4s = F[:, :, None] * Hm[:, None, :] - b.R4
    A = R3inv @ b.R4
    B = b.R2 @ R3inv
    return R1s - R2s @ A + B @ R3s @ A - B @ R4s


def influence_matrix(phi, ds: Dataset, hb: HBasis, gb: GBasis) -> np.ndarray:
    """``g*`` for every observation, shape (n, m)."""
    av, E = _frame(phi, ds.p, gb.d)
    X = ds.X
    Hm = hb(ds.Y)
    F = g_features(X @ E, gb)
    b = _moments(X, Hm, F)
    Rs = _r_star(b, X, Hm, F)
    dR = partials(av, ds, hb, gb).dR
    R5inv = np.linalg.inv(b.R5)
    return 2.0 * np.einsum("tps,sr,ipr->it", dR, R5inv, Rs)


def influence_g_star(phi, ds: Dataset, hb: HBasis, gb: GBasis, i: int) -> np.ndarray:
    """Influence vector of observation ``i`` (0-based)."""
    if ds.n == 1:
        return np.zeros(AngleVector(phi, ds.p, gb.d).m if not isinstance(phi, AngleVector) else phi.m)
    return influence_matrix(phi, ds, hb, gb)[i]


def covariance_Lambda(phi, ds: Dataset, hb: HBasis, gb: GBasis) -> CovarianceEstimate:
    """``W^+ E_n[g* g*'] W^+`` and per-angle standard errors ``sqrt(diag / n)``."""
    hess = hessian_W(phi, ds, hb, gb)
    gs = influence_matrix(phi, ds, hb, gb)
    S = gs.T @ gs / ds.n
    L = hess.W_pinv @ S @ hess.W_pinv
    L = (L + L.T) / 2
    se = np.sqrt(np.clip(np.diag(L), 0.0, None) / ds.n)
    return CovarianceEstimate(L, se, hess, ds.n)
