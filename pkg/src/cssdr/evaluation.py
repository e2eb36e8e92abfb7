"""Accuracy metrics, the nonelliptical simulation design and the benchmark runner."""

from __future__ import annotations

import csv
import io
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset
from .objective import FitOptions, fit_classical, fit_css

log = logging.getLogger(__name__)

MODELS = ("I", "II", "III")
METHODS = ("ols", "sir", "kir", "pir", "css-ols", "css-sir", "css-kir", "css-pir")


def trace_correlation(U, V) -> float:
    """Squared trace correlation ``tr[S_U^-1 S_UV S_V^-1 S_VU]`` between two samples.

    Ranges over ``[0, d]``; equals ``d`` when ``V = U A`` for invertible ``A``.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if V.ndim == 1:
        V = V[:, None]
    if U.shape != V.shape:
        raise ValueError(f"U and V must have the same shape, got {U.shape} and {V.shape}")
    U = U - U.mean(axis=0)
    V = V - V.mean(axis=0)
    # orthonormal bases of the centered column spaces; the singular values of
    # Q_U' Q_V are the canonical correlations, and the metric is their squared sum
    Qu, _ = _orth(U)
    Qv, _ = _orth(V)
    cc = np.linalg.svd(Qu.T @ Qv, compute_uv=False)
    # correlations equal to 1 up to rounding are reported as exactly 1
    cc = np.where(cc > 1.0 - 64 * np.finfo(float).eps, 1.0, cc)
    return float(np.sum(cc**2))


def _orth(A):
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-12 * max(diag.max(), 1e-300):
        raise np.linalg.LinAlgError("sample covariance in the trace correlation is singular")
    return Q, diag


def gen_design(n: int, p: int, seed=None, *, rng: np.random.Generator | None = None) -> np.ndarray:
    """Nonelliptical predictors: X3 and X4 are quadratic in X1, X2 plus a shared noise."""
    if p < 4:
        raise ValueError(f"the design needs p >= 4, got {p}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    delta = rng.standard_normal(n)
    x1, x2 = X[:, 0], X[:, 1]
    X[:, 2] = 0.2 * x1 + 0.2 * (x2 + 2) ** 2 + 0.2 * delta
    X[:, 3] = 0.1 + 0.1 * (x1 + x2) + 0.3 * (x1 + 1.5) ** 2 + 0.2 * delta
    return X


def model_mean(X: np.ndarray, model: str) -> np.ndarray:
    x3, x4 = X[:, 2], X[:, 3]
    if model == "I":
        return np.exp(x3) + (x4 + 1.5) ** 2
    if model == "II":
        return 0.4 * x3**2 + 3 * np.sin(x4 / 4)
    if model == "III":
        return x3 / (0.5 + (x4 + 1.5) ** 2)
    raise ValueError(f"unknown model {model!r}; valid models are {', '.join(MODELS)}")


NOISE_SCALE = {"I": 1.0, "II": 0.5, "III": 0.1}


def gen_response(X: np.ndarray, model: str, seed=None, *, rng: np.random.Generator | None = None,
                 eps: np.ndarray | None = None) -> np.ndarray:
    mean = model_mean(np.asarray(X, dtype=float), model)
    if eps is None:
        rng = rng if rng is not None else np.random.default_rng(seed)
        eps = rng.standard_normal(mean.size)
    return mean + NOISE_SCALE[model] * eps


def true_basis(p: int) -> np.ndarray:
    B = np.zeros((p, 2))
    B[2, 0] = B[3, 1] = 1.0
    return B


def simulate(model: str, n: int, p: int, seed=None) -> Dataset:
    """Draw one data set; a single generator produces X then Y."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; valid models are {', '.join(MODELS)}")
    rng = np.random.default_rng(seed)
    X = gen_design(n, p, rng=rng)
    Y = gen_response(X, model, rng=rng)
    return Dataset(X, Y, names=tuple(f"x{k + 1}" for k in range(p)))


@dataclass(frozen=True)
class SimConfig:
    model: str = "I"
    p: int = 4
    n: int = 100
    replicates: int = 100
    seed: int = 0
    methods: tuple[str, ...] = ("sir", "css-sir", "kir", "css-kir", "pir", "css-pir")
    d: int = 2
    fit: FitOptions = FitOptions()
    threads: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; valid models are {', '.join(MODELS)}")
        if self.n < 20 or self.replicates < 1 or self.p < 4:
            raise ValueError("need n >= 20, replicates >= 1 and p >= 4")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown method(s) {bad}; valid methods are {', '.join(METHODS)}")


@dataclass
class MethodSummary:
    model: str
    p: int
    method: str
    values: np.ndarray
    failures: int = 0

    @property
    def n_success(self) -> int:
        return int(self.values.size)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values.size else float("nan")

    @property
    def se(self) -> float:
        if self.values.size < 2:
            return 0.0
        return float(np.std(self.values, ddof=1) / np.sqrt(self.values.size))


@dataclass
class BenchResult:
    config: SimConfig
    summaries: list[MethodSummary] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __getitem__(self, method: str) -> MethodSummary:
        for s in self.summaries:
            if s.method == method:
                return s
        raise KeyError(method)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "p", "method", "mean", "se", "n_success"])
        for s in self.summaries:
            w.writerow([s.model, s.p, s.method, f"{s.mean:.17g}", f"{s.se:.17g}", s.n_success])
        return buf.getvalue()

    def table(self) -> str:
        """Aligned ``mean (se)`` table, one row per method."""
        c = self.config
        head = f"Model {c.model}, p = {c.p}, n = {c.n}, N = {c.replicates}"
        width = max(len(s.method) for s in self.summaries) if self.summaries else 6
        lines = [head, f"{'method':<{width}}  {'mean (se)':>15}  failures"]
        for s in self.summaries:
            lines.append(f"{s.method.upper():<{width}}  {s.mean:6.3f} ({s.se:.3f})  {s.failures:>8d}")
        return "\n".join(lines)


def replicate_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


def _one_replicate(args):
    cfg, ss = args
    ds = simulate(cfg.model, cfg.n, cfg.p, seed=ss)
    beta0 = true_basis(cfg.p)
    truth = ds.X @ beta0
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for method in cfg.methods:
            try:
                if method.startswith("css-"):
                    fit = fit_css(ds, method, cfg.d, cfg.fit)
                else:
                    fit = fit_classical(ds, method, cfg.d, cfg.fit)
                out[method] = trace_correlation(ds.X @ fit.beta_original, truth)
            except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
                out[method] = exc
    return out


def run_benchmark(cfg: SimConfig) -> BenchResult:
    """Replicate the simulation ``cfg.replicates`` times and summarise each method.

    Replicate ``r`` draws its data from the ``r``-th child of ``SeedSequence(cfg.seed)``,
    so results do not depend on ``cfg.threads``.
    """
    jobs = [(cfg, ss) for ss in replicate_seeds(cfg.seed, cfg.replicates)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(cfg.threads) as ex:
            results = list(ex.map(_one_replicate, jobs, chunksize=max(1, len(jobs) // (4 * cfg.threads))))
    else:
        results = [_one_replicate(j) for j in jobs]

    bench = BenchResult(cfg)
    for method in cfg.methods:
        vals = [r[method] for r in results]
        ok = np.array([v for v in vals if not isinstance(v, Exception)], dtype=float)
        failures = len(vals) - ok.size
        if failures:
            msg = f"{method}: {failures} of {len(vals)} replicates failed and were excluded"
            log.warning(msg)
            bench.warnings.append(msg)
        bench.summaries.append(MethodSummary(cfg.model, cfg.p, method, ok, failures))
    if cfg.replicates == 1:
        bench.warnings.append("a single replicate gives no standard error; reported as 0")
    return bench


def _predict_linear(U_train, y_train, U_test):
    A = np.column_stack([np.ones(len(U_train)), U_train])
    coef = np.linalg.lstsq(A, y_train, rcond=None)[0]
    return coef[0] + U_test @ coef[1:]


def loo_cv(ds: Dataset, method: str, d: int, opts: FitOptions | None = None) -> float:
    """Leave-one-out sum of squared prediction errors.

    For each held-out row the directions are re-estimated on the others, then
    ``Y`` is regressed linearly on the reduced predictors and the held-out
    response is predicted.
    """
    opts = opts or FitOptions()
    if ds.n < 10:
        raise ValueError("leave-one-out needs n >= 10")
    raw = ds.original()
    X0, Y0 = raw.X, raw.Y
    total = 0.0
    failed = []
    for k in range(ds.n):
        keep = np.arange(ds.n) != k
        train = Dataset(X0[keep], Y0[keep], names=ds.names)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                if method.startswith("css-"):
                    fit = fit_css(train, method, d, opts)
                else:
                    fit = fit_classical(train, method, d, opts)
        except (np.linalg.LinAlgError, ValueError, FloatingPointError):
            failed.append(k)
            continue
        b = fit.beta_original
        pred = _predict_linear(X0[keep] @ b, Y0[keep], X0[k : k + 1] @ b)[0]
        total += (Y0[k] - pred) ** 2
    if failed:
        raise RuntimeError(f"leave-one-out fits failed for rows {failed}")
    return float(total)


def with_options(cfg: SimConfig, **fit_changes) -> SimConfig:
    return replace(cfg, fit=replace(cfg.fit, **fit_changes))
