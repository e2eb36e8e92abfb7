"""Derivative-free minimisation over polar angles.

Nelder-Mead (scipy) on the periodic angle box. Every trial point is first
mapped into ``[0, pi)^m`` with the span-preserving :func:`~cssdr.rotations.wrap`,
so the optimiser never leaves the box and never changes the objective by
wrapping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize as _sp_minimize

from .rotations import AngleVector, wrap


@dataclass(frozen=True)
class OptimOptions:
    max_iter: int | None = None  # default 500 * m
    max_fev: int | None = None  # default 4 * max_iter
    f_tol: float = 1e-8
    x_tol: float = 1e-6
    restarts: int = 0
    jitter: float = 0.3
    step: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.f_tol <= 0 or self.x_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class OptimResult:
    phi: AngleVector
    fun: float
    f0: float
    trace: list[float] = field(default_factory=list)
    nit: int = 0
    nfev: int = 0
    converged: bool = False
    start: int = 0


def minimize(f: Callable[[AngleVector], float], phi0: AngleVector, opts: OptimOptions | None = None) -> OptimResult:
    """Nelder-Mead from ``phi0`` with an axis-aligned initial simplex of size ``opts.step``."""
    opts = opts or OptimOptions()
    p, d = phi0.p, phi0.d
    x0 = wrap(phi0).phi
    m = x0.size

    def fw(x):
        return float(f(wrap(AngleVector(x, p, d))))

    f0 = fw(x0)
    if not np.isfinite(f0):
        raise FloatingPointError("objective is not finite at the initial angles")
    if m == 0:
        return OptimResult(AngleVector(x0, p, d), f0, f0, [f0], 0, 1, True)

    simplex = np.vstack([x0, x0 + opts.step * np.eye(m)])
    trace = [f0]

    def callback(intermediate_result):
        trace.append(float(intermediate_result.fun))

    max_iter = opts.max_iter or 500 * m
    res = _sp_minimize(
        lambda x: fw(x) if np.all(np.isfinite(x)) else np.inf,
        x0,
        method="Nelder-Mead",
        callback=callback,
        options={
            "initial_simplex": simplex,
            "maxiter": max_iter,
            "maxfev": opts.max_fev or 4 * max_iter,
            "xatol": opts.x_tol,
            "fatol": opts.f_tol * max(abs(f0), np.finfo(float).tiny),
        },
    )
    x, fx = res.x, float(res.fun)
    if not fx <= f0:  # scipy returns the best vertex; this only guards NaN
        x, fx = x0, f0
    trace = list(np.minimum.accumulate(trace + [fx]))
    return OptimResult(wrap(AngleVector(x, p, d)), fx, f0, trace, int(res.nit), int(res.nfev), bool(res.success))


def multistart(
    f: Callable[[AngleVector], float],
    inits: list[AngleVector],
    opts: OptimOptions | None = None,
) -> OptimResult:
    """Run :func:`minimize` from each start; lowest value wins, ties to the earlier start.

    When ``opts.restarts > 0`` that many extra starts are drawn by jittering the
    first initial value with a generator seeded by ``opts.seed``.
    """
    opts = opts or OptimOptions()
    if not inits:
        raise ValueError("need at least one initial value")
    starts = list(inits)
    if opts.restarts:
        rng = np.random.default_rng(opts.seed)
        base = inits[0]
        for _ in range(opts.restarts):
            starts.append(AngleVector(base.phi + rng.normal(0.0, opts.jitter, base.m), base.p, base.d))
    best = None
    for k, phi0 in enumerate(starts):
        r = minimize(f, phi0, opts)
        r.start = k
        if best is None or r.fun < best.fun:
            best = r
    return best
