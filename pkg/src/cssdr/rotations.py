"""Polar (Givens) parameterization of p x d orthonormal frames.

A frame is the first ``d`` columns of ``D_1(phi_1) D_2(phi_2) ... D_m(phi_m)``
where ``D_t`` rotates the coordinate plane ``(i, j)`` with ``i <= d`` and
``i < j <= p``. Pairs are ordered with ``j`` varying fastest, so for
``p = 5, d = 2`` the order is (1,2), (1,3), (1,4), (1,5), (2,3), (2,4), (2,5).

Indices in the public ``index_*`` helpers are 1-based to match that
enumeration; everything else uses 0-based numpy indexing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def n_angles(p: int, d: int) -> int:
    """Number of angles ``m = p d - d (d + 1) / 2``."""
    if not 1 <= d <= p:
        raise ValueError(f"need 1 <= d <= p, got p={p}, d={d}")
    return p * d - d * (d + 1) // 2


def index_forward(i: int, j: int, p: int) -> int:
    """Map the 1-based plane ``(i, j)`` to its 1-based position ``t``."""
    if not (1 <= i < j <= p):
        raise ValueError(f"need 1 <= i < j <= p, got i={i}, j={j}, p={p}")
    return p * (i - 1) - (i - 1) * i // 2 + (j - i)


def index_backward(t: int, p: int, d: int) -> tuple[int, int]:
    """Inverse of :func:`index_forward` for ``1 <= t <= m``."""
    m = n_angles(p, d)
    if not (1 <= t <= m):
        raise ValueError(f"t={t} out of range 1..{m} for p={p}, d={d}")
    # strict inequality: the offset of row i is the last t of row i - 1
    i = max(k for k in range(1, d + 1) if p * (k - 1) - (k - 1) * k // 2 < t)
    j = t - (p * (i - 1) - (i - 1) * i // 2) + i
    return i, j


@lru_cache(maxsize=None)
def planes(p: int, d: int) -> tuple[tuple[int, int], ...]:
    """0-based planes ``(i, j)`` in ascending ``t`` order."""
    if not (1 <= d <= p):
        raise ValueError(f"need 1 <= d <= p, got d={d}, p={p}")
    return tuple((i, j) for i in range(d) for j in range(i + 1, p))


@dataclass(frozen=True)
class AngleVector:
    phi: np.ndarray
    p: int
    d: int

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float).reshape(-1)
        if phi.size != n_angles(self.p, self.d):
            raise ValueError(f"expected {n_angles(self.p, self.d)} angles for p={self.p}, d={self.d}, got {phi.size}")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def m(self) -> int:
        return self.phi.size


def givens(p: int, i: int, j: int, angle: float) -> np.ndarray:
    """Full p x p rotation in the 0-based plane ``(i, j)``."""
    if not (0 <= i < j < p):
        raise ValueError(f"need 0 <= i < j < p, got i={i}, j={j}, p={p}")
    G = np.eye(p)
    c, s = np.cos(angle), np.sin(angle)
    G[i, i] = G[j, j] = c
    G[i, j] = -s
    G[j, i] = s
    return G


def _rotate(A: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    ai, aj = A[i].copy(), A[j]
    A[i] = c * ai - s * aj
    A[j] = s * ai + c * aj


def _phi(av, p, d):
    if isinstance(av, AngleVector):
        return av.phi, av.p, av.d
    if p is None or d is None:
        raise TypeError("p and d are required when passing a bare array")
    return AngleVector(av, p, d).phi, p, d


def eta(av, p: int | None = None, d: int | None = None) -> np.ndarray:
    """Orthonormal p x d frame for the angles ``av``."""
    phi, p, d = _phi(av, p, d)
    # plain lists: the rows are tiny and numpy call overhead dominates
    rows = [[1.0 if r == k else 0.0 for k in range(d)] for r in range(p)]
    cs = zip(np.cos(phi[::-1]).tolist(), np.sin(phi[::-1]).tolist())
    for (i, j), (c, s) in zip(reversed(planes(p, d)), cs):
        ri, rj = rows[i], rows[j]
        rows[i] = [c * a - s * b for a, b in zip(ri, rj)]
        rows[j] = [s * a + c * b for a, b in zip(ri, rj)]
    return np.array(rows, dtype=float).reshape(p, d)


def eta_naive(av, p: int | None = None, d: int | None = None) -> np.ndarray:
    """Same as :func:`eta` but via full p x p products (for testing)."""
    phi, p, d = _phi(av, p, d)
    B = np.eye(p)
    for (i, j), a in zip(planes(p, d), phi):
        B = B @ givens(p, i, j, a)
    return B[:, :d]


def eta_jacobian(av, p: int | None = None, d: int | None = None) -> np.ndarray:
    """All derivatives ``d eta / d phi_t`` stacked as an (m, p, d) array."""
    phi, p, d = _phi(av, p, d)
    pl = planes(p, d)
    m = len(pl)
    cs = np.cos(phi), np.sin(phi)

    # suffix[t] = D_{t+1} ... D_m E  (0-based t)
    suffix = [None] * m
    S = np.eye(p)[:, :d]
    for t in range(m - 1, -1, -1):
        suffix[t] = S.copy()
        i, j = pl[t]
        _rotate(S, i, j, cs[0][t], cs[1][t])

    out = np.empty((m, p, d))
    for t in range(m):
        i, j = pl[t]
        c, s = cs[0][t], cs[1][t]
        S = suffix[t]
        M = np.zeros((p, d))
        M[i] = -s * S[i] - c * S[j]
        M[j] = c * S[i] - s * S[j]
        for u in range(t - 1, -1, -1):
            _rotate(M, *pl[u], cs[0][u], cs[1][u])
        out[t] = M
    return out


def eta_dot(av, t: int, p: int | None = None, d: int | None = None) -> np.ndarray:
    """``d eta / d phi_t`` for 1-based ``t``."""
    phi, p, d = _phi(av, p, d)
    if not (1 <= t <= phi.size):
        raise ValueError(f"t={t} out of range 1..{phi.size}")
    return eta_jacobian(phi, p, d)[t - 1]


@lru_cache(maxsize=None)
def _neighbours(p: int, d: int) -> tuple[tuple[int, ...], ...]:
    """Later planes sharing exactly one index with plane ``t``."""
    pl = planes(p, d)
    return tuple(
        tuple(u for u in range(t + 1, len(pl)) if len(set(pl[t]) & set(pl[u])) == 1)
        for t in range(len(pl))
    )


def wrap(av, p: int | None = None, d: int | None = None):
    """Reduce every angle into ``[0, pi)`` without changing ``span(eta)``.

    Shifting ``phi_t`` by ``pi`` multiplies ``D_t`` on the right by the sign
    flip ``F`` of coordinates ``i, j``. Pushing ``F`` through later rotations
    negates the angle of every later plane that shares exactly one index with
    ``(i, j)``; at the end ``F`` only flips column signs of the frame.
    """
    bare = not isinstance(av, AngleVector)
    phi, p, d = _phi(av, p, d)
    nb = _neighbours(p, d)
    vals = np.asarray(phi, dtype=float).tolist()
    for t in range(len(vals)):
        k = math.floor(vals[t] / math.pi)
        r = vals[t] - k * math.pi
        if r < 0:  # tiny negatives where floor() rounds to -0
            r += math.pi
            k -= 1
        if r >= math.pi:
            r -= math.pi
            k += 1
        vals[t] = r
        if k % 2:
            for u in nb[t]:
                vals[u] = -vals[u]
    out = np.array(vals, dtype=float)
    return out if bare else AngleVector(out, p, d)


def frame_to_angles(beta: np.ndarray, tol: float = 1e-8) -> AngleVector:
    """Angles whose frame spans the columns of the orthonormal ``beta``.

    Applies ``D_1^T, D_2^T, ...`` in turn, each chosen to zero entry ``(j, i)``
    by rotating it into row ``i``; what remains is a signed identity block.
    """
    A = np.array(beta, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    p, d = A.shape
    if d > p or not np.allclose(A.T @ A, np.eye(d), atol=tol):
        raise ValueError("beta must have orthonormal columns")
    pl = planes(p, d)
    phi = np.empty(len(pl))
    for t, (i, j) in enumerate(pl):
        a = np.arctan2(A[j, i], A[i, i])
        phi[t] = a
        # D^T rotates by -a
        _rotate(A, i, j, np.cos(a), -np.sin(a))
    return wrap(AngleVector(phi, p, d))


def random_angles(p: int, d: int, rng: np.random.Generator) -> AngleVector:
    return AngleVector(rng.uniform(0.0, np.pi, n_angles(p, d)), p, d)
