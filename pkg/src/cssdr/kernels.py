"""Response kernels g(y, y~) that unify OLS, SIR, KIR and PIR.

Each kernel is materialised on a sample as an n x n matrix ``G`` with
``G[i, j] = g(Y_i, Y_j)``, so that ``X.T @ G / n`` stacks the inverse
regression vectors ``E_n[X g(Y, Y_j)]`` column by column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Table 2 bandwidth schedule for n = 200, 300, 400, 500
KIR_BANDWIDTH_PRESETS = {100: 0.4, 200: 0.3, 300: 0.2, 400: 0.1, 500: 0.1}


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class HBasis:
    """Monomial basis ``H(y) = (1, y, ..., y**degree)``."""

    degree: int = 2

    def __post_init__(self):
        if self.degree < 0:
            raise KernelError("H basis degree must be >= 0")

    @property
    def s(self) -> int:
        return self.degree + 1

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return y[..., None] ** np.arange(self.s)


@dataclass(frozen=True)
class SlicePartition:
    k: int
    boundaries: np.ndarray
    assignment: np.ndarray  # 0-based slice label per observation

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    @property
    def proportions(self) -> np.ndarray:
        return self.sizes / self.assignment.size


def make_slices(y, k: int) -> SlicePartition:
    """Equal-count slices on the order statistics of ``y`` (stable ties)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if k < 2:
        raise KernelError(f"need at least 2 slices, got {k}")
    if k > n:
        raise KernelError(f"cannot cut {n} observations into {k} slices")
    order = np.argsort(y, kind="stable")
    labels = np.empty(n, dtype=int)
    chunks = np.array_split(order, k)
    for ell, idx in enumerate(chunks):
        labels[idx] = ell
    boundaries = np.array([y[c[-1]] for c in chunks[:-1]])
    return SlicePartition(k, boundaries, labels)


@dataclass(frozen=True)
class GKernel:
    """One of ``"ols"``, ``"sir"``, ``"kir"``, ``"pir"`` with its tuning value."""

    variant: str
    slices: int = 10
    bandwidth: float = 0.4
    hbasis: HBasis = HBasis(2)

    def __post_init__(self):
        v = self.variant.lower()
        object.__setattr__(self, "variant", v)
        if v not in ("ols", "sir", "kir", "pir"):
            raise KernelError(f"unknown kernel {self.variant!r}; expected ols, sir, kir or pir")
        if v == "sir" and self.slices < 2:
            raise KernelError("SIR needs at least 2 slices")
        if v == "kir" and not self.bandwidth > 0:
            raise KernelError("KIR bandwidth must be positive")

    def matrix(self, y) -> np.ndarray:
        """The n x n matrix ``g(Y_i, Y_j)``."""
        y = np.asarray(y, dtype=float)
        if self.variant == "ols":
            return np.repeat(y[:, None], y.size, axis=1)
        if self.variant == "sir":
            return sir_matrix(make_slices(y, self.slices))
        if self.variant == "kir":
            return kappa_matrix(y, self.bandwidth)
        return rho_matrix(y, self.hbasis)


def _psi(u):
    return np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)


def kappa_matrix(y, h: float) -> np.ndarray:
    """``K[i, j] = psi(|y_i - y_j| / h) / mean_l psi(|y_l - y_j| / h)``, normal ``psi``."""
    y = np.asarray(y, dtype=float)
    if not h > 0:
        raise KernelError("bandwidth must be positive")
    num = _psi(np.abs(y[:, None] - y[None, :]) / h)
    den = num.mean(axis=0)
    if np.any(den <= np.finfo(float).tiny):
        raise KernelError(f"kernel normaliser underflows for bandwidth h={h}")
    return num / den


def kappa(yi: float, yj: float, h: float, y_sample) -> float:
    """Single kernel value, normalised by the sample mean over ``y_sample``."""
    y_sample = np.asarray(y_sample, dtype=float)
    den = _psi(np.abs(y_sample - yj) / h).mean()
    if den <= np.finfo(float).tiny:
        raise KernelError(f"kernel normaliser underflows for bandwidth h={h}")
    return float(_psi(abs(yi - yj) / h) / den)


def h_gram_inverse(Hm: np.ndarray) -> np.ndarray:
    """Inverse of ``E_n[H H^T]``; ridge ``1e-10 tr / s`` if the condition number exceeds 1e12."""
    n, s = Hm.shape
    gram = Hm.T @ Hm / n
    if np.linalg.cond(gram) > 1e12:
        gram = gram + 1e-10 * np.trace(gram) / s * np.eye(s)
        if np.linalg.cond(gram) > 1e15:
            raise KernelError("H basis Gram matrix is singular")
    return np.linalg.inv(gram)


def rho_matrix(y, hb: HBasis) -> np.ndarray:
    Hm = hb(y)
    return Hm @ h_gram_inverse(Hm) @ Hm.T


def rho_kernel(yi: float, yj: float, hb: HBasis, y_sample) -> float:
    Ginv = h_gram_inverse(hb(np.asarray(y_sample, dtype=float)))
    return float(hb(yi) @ Ginv @ hb(yj))


def sir_matrix(part: SlicePartition) -> np.ndarray:
    """``I(delta_i = delta_j) / P_n(delta = delta_j)``."""
    lab = part.assignment
    same = (lab[:, None] == lab[None, :]).astype(float)
    return same / part.proportions[lab][None, :]
