"""CSS sample objectives and the CSS fitting routine.

For a candidate frame ``eta`` the conditional mean ``E(X | eta'X)`` is modelled
by least squares on polynomial features ``G(eta'X)``. The objective measures
how much of the inverse-regression signal ``E_n[X g(Y, y~)]`` is left in the
residuals ``r = X - fhat``:

    L_n(eta) = c * || r' W ||_F^2

where ``W`` (n x q) and the constant ``c`` depend only on the response kernel
and are computed once per data set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations_with_replacement

import numpy as np
from scipy.linalg import cholesky, lstsq

from .data import Dataset, center, standardize, whiten
from .estimators import ClassicalFit, classical_fit
from .kernels import GKernel, HBasis, h_gram_inverse, make_slices
from .optimizer import OptimOptions, OptimResult, multistart
from .rotations import AngleVector, eta, frame_to_angles


@dataclass(frozen=True)
class GBasis:
    """Monomials in the ``d`` reduced coordinates, constant first.

    ``kind="full"`` keeps every monomial of total degree <= ``degree``;
    ``kind="pure"`` keeps the full quadratic part and adds only pure powers
    ``u_i**k`` above degree 2.
    """

    d: int
    degree: int = 2
    kind: str = "full"

    def __post_init__(self):
        if self.degree < 0 or self.d < 1:
            raise ValueError("need d >= 1 and degree >= 0")
        if self.kind not in ("full", "pure"):
            raise ValueError(f"unknown basis kind {self.kind!r}")

    @cached_property
    def terms(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for deg in range(self.degree + 1):
            for combo in combinations_with_replacement(range(self.d), deg):
                powers = tuple(combo.count(a) for a in range(self.d))
                if self.kind == "pure" and deg > 2 and max(powers) != deg:
                    continue
                out.append(powers)
        return tuple(out)

    @property
    def k(self) -> int:
        return len(self.terms)

    @cached_property
    def _powers(self) -> np.ndarray:
        return np.array(self.terms, dtype=int).reshape(self.k, self.d)


def g_features(u: np.ndarray, gb: GBasis) -> np.ndarray:
    """Evaluate the basis row-wise on reduced data ``u`` (n x d)."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    P = gb._powers
    # table of u**e by repeated products, then gather one factor per column
    pw = np.empty((gb.degree + 1,) + u.shape)
    pw[0] = 1.0
    for e in range(1, gb.degree + 1):
        pw[e] = pw[e - 1] * u
    F = pw[P[:, 0], :, 0]
    for a in range(1, gb.d):
        F *= pw[P[:, a], :, a]
    return F.T


def g_jacobian(u: np.ndarray, gb: GBasis) -> np.ndarray:
    """Derivatives of the features w.r.t. ``u``: array (n, k, d)."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    n = u.shape[0]
    P = gb._powers
    J = np.zeros((n, gb.k, gb.d))
    for t in range(gb.k):
        for b in range(gb.d):
            if P[t, b] == 0:
                continue
            col = P[t, b] * u[:, b] ** (P[t, b] - 1)
            for a in range(gb.d):
                if a != b and P[t, a]:
                    col = col * u[:, a] ** P[t, a]
            J[:, t, b] = col
    return J


def fhat(eta_: np.ndarray, X: np.ndarray, gb: GBasis) -> np.ndarray:
    """Least-squares projection of the columns of ``X`` onto ``G(X eta)``."""
    F = g_features(X @ eta_, gb)
    # gelsy (pivoted QR) handles rank deficiency and is ~2x faster than gelsd
    coef = lstsq(F, X, lapack_driver="gelsy", check_finite=False)[0]
    return F @ coef


def residual_weights(Y: np.ndarray, g: GKernel) -> tuple[np.ndarray, float]:
    """``(W, c)`` with ``L_n = c ||r' W||_F^2`` for centered ``Y``."""
    n = Y.size
    if g.variant == "ols":
        return Y[:, None] / n, 1.0
    if g.variant == "sir":
        part = make_slices(Y, g.slices)
        sizes = part.sizes
        S = np.zeros((n, part.k))
        S[np.arange(n), part.assignment] = 1.0
        return S * (np.sqrt(part.proportions) / sizes), 1.0 / n
    if g.variant == "pir":
        Hm = g.hbasis(Y)
        L = cholesky(h_gram_inverse(Hm), lower=True)
        return Hm @ L / n, 1.0
    return g.matrix(Y) / n, 1.0 / n


@dataclass
class CssObjective:
    """``L_n`` for a centered data set, response kernel and feature basis."""

    dataset: Dataset
    gkernel: GKernel
    gbasis: GBasis

    def __post_init__(self):
        if not self.dataset.centered:
            self.dataset = center(self.dataset)
        self._W, self._c = residual_weights(self.dataset.Y, self.gkernel)

    @property
    def p(self) -> int:
        return self.dataset.p

    @property
    def d(self) -> int:
        return self.gbasis.d

    def residuals(self, eta_: np.ndarray) -> np.ndarray:
        X = self.dataset.X
        return X - fhat(eta_, X, self.gbasis)

    def at_frame(self, eta_: np.ndarray) -> float:
        R = self.residuals(eta_).T @ self._W
        return float(self._c * np.sum(R * R))

    def __call__(self, phi) -> float:
        if isinstance(phi, AngleVector):
            return self.at_frame(eta(phi))
        return self.at_frame(eta(phi, self.p, self.d))


def objective(phi, obj: CssObjective) -> float:
    return obj(phi)


def objective_reference(eta_: np.ndarray, ds: Dataset, g: GKernel, gb: GBasis) -> float:
    """Objective from the literal sums (slow path, for cross-checking)."""
    if not ds.centered:
        ds = center(ds)
    X, Y, n = ds.X, ds.Y, ds.n
    r = X - fhat(eta_, X, gb)
    if g.variant == "ols":
        v = (r * Y[:, None]).mean(axis=0)
        return float(v @ v)
    if g.variant == "sir":
        part = make_slices(Y, g.slices)
        total = 0.0
        for ell in range(part.k):
            ind = part.assignment == ell
            share = ind.mean()
            cm = (r * ind[:, None]).mean(axis=0) / share
            total += share * cm @ cm
        return total / n
    G = g.matrix(Y)
    return float(sum(np.sum(((r * G[:, j][:, None]).mean(axis=0)) ** 2) for j in range(n)) / n)


@dataclass
class FitReport:
    method: str
    d: int
    beta: np.ndarray  # frame in the working (centered / standardized) coordinates
    beta_original: np.ndarray  # directions acting on the raw predictors
    phi: AngleVector | None
    objective: float
    initial_objective: float
    classical: ClassicalFit | None = None
    trace: list[float] = field(default_factory=list)
    converged: bool = True
    warnings: list[str] = field(default_factory=list)
    dataset: Dataset | None = field(default=None, repr=False)


# G with the cubic terms used in the simulation design; the default is quadratic
G_DEGREE_CUBIC = 3


@dataclass(frozen=True)
class FitOptions:
    slices: int = 10
    bandwidth: float = 0.4
    h_degree: int = 2
    g_degree: int = 2
    g_kind: str = "full"
    standardize: bool | str = True  # True / "scale", "whiten", or False
    whiten: bool = True
    scale_y: bool = False
    optim: OptimOptions = OptimOptions()


def make_kernel(method: str, opts: FitOptions) -> GKernel:
    base = method.lower().removeprefix("css-").removeprefix("css_")
    return GKernel(base, slices=opts.slices, bandwidth=opts.bandwidth, hbasis=HBasis(opts.h_degree))


def prepare(ds: Dataset, opts: FitOptions) -> Dataset:
    if opts.standardize == "whiten" and not ds.whitened:
        ds = whiten(ds)
    elif opts.standardize and not ds.standardized:
        ds = standardize(ds)
    elif not ds.centered:
        ds = center(ds)
    if opts.scale_y:
        ds = replace(ds, Y=ds.Y / ds.Y.std())
    return ds


def fit_classical(ds: Dataset, method: str, d: int, opts: FitOptions | None = None) -> FitReport:
    opts = opts or FitOptions()
    work = prepare(ds, opts)
    fit = classical_fit(work, make_kernel(method, opts), d, opts.whiten)
    return FitReport(method.lower(), d, fit.beta_hat, work.to_original(fit.beta_hat), None,
                     np.nan, np.nan, fit, dataset=work)


def fit_css(ds: Dataset, method: str, d: int, opts: FitOptions | None = None,
            inits: list[AngleVector] | None = None) -> FitReport:
    """CSS fit started from the classical estimator with the same kernel."""
    opts = opts or FitOptions()
    work = prepare(ds, opts)
    p = work.p
    if not 1 <= d <= p:
        raise ValueError(f"need 1 <= d <= p, got d={d}, p={p}")
    name = "css-" + method.lower().removeprefix("css-")
    g = make_kernel(method, opts)
    if d == p:
        beta = np.eye(p)
        return FitReport(name, d, beta, work.to_original(beta), None, 0.0, 0.0, dataset=work)

    cfit = classical_fit(work, g, d, opts.whiten)
    obj = CssObjective(work, g, GBasis(d, opts.g_degree, opts.g_kind))
    starts = [frame_to_angles(cfit.beta_hat)] + list(inits or [])
    f_init = obj(starts[0])
    res: OptimResult = multistart(obj, starts, opts.optim)
    msgs = []
    if not res.converged:
        msgs.append(f"Nelder-Mead stopped after {res.nit} iterations without meeting tolerances")
        warnings.warn(msgs[-1], RuntimeWarning, stacklevel=2)
    beta = eta(res.phi)
    return FitReport(name, d, beta, work.to_original(beta), res.phi, res.fun, f_init, cfit,
                     res.trace, res.converged, msgs, dataset=work)
