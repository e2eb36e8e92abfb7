"""Datasets: centering, standardization, covariance and CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed or degenerate input data."""


@dataclass(frozen=True)
class Dataset:
    """Predictor matrix ``X`` (n x p) and response ``Y`` (n,).

    ``shift`` and ``transform`` record the affine map applied so far:
    ``X = (X_original - shift) @ transform``.
    """

    X: np.ndarray
    Y: np.ndarray
    centered: bool = False
    standardized: bool = False
    names: tuple[str, ...] = ()
    whitened: bool = False
    shift: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    transform: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    y_shift: float = 0.0

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise DataError(f"X must be 2-D, got shape {X.shape}")
        n, p = X.shape
        if Y.shape[0] != n:
            raise DataError(f"X has {n} rows but Y has {Y.shape[0]} entries")
        if n < 2 or p < 1:
            raise DataError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DataError("data contain non-finite values")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if self.shift is None:
            object.__setattr__(self, "shift", np.zeros(p))
        if self.transform is None:
            object.__setattr__(self, "transform", np.eye(p))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{k + 1}" for k in range(p)))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def original(self) -> "Dataset":
        """The untransformed data."""
        X0 = np.linalg.solve(self.transform.T, self.X.T).T + self.shift
        return Dataset(X0, self.Y + self.y_shift, names=self.names)

    def to_original(self, beta: np.ndarray) -> np.ndarray:
        """Map directions acting on the stored X to directions acting on the raw X.

        ``X beta = (X_raw - shift) @ (transform @ beta)``.
        """
        return self.transform @ np.asarray(beta, dtype=float)


@dataclass(frozen=True)
class CovMatrix:
    sigma: np.ndarray
    chol_ok: bool


def center(ds: Dataset) -> Dataset:
    """Subtract column means of X and the mean of Y."""
    mx = ds.X.mean(axis=0)
    my = ds.Y.mean()
    return replace(
        ds,
        X=ds.X - mx,
        Y=ds.Y - my,
        centered=True,
        shift=ds.shift + np.linalg.solve(ds.transform.T, mx),
        y_shift=ds.y_shift + my,
    )


def covariance(ds: Dataset) -> CovMatrix:
    """Sample covariance of X with divisor n."""
    Xc = ds.X - ds.X.mean(axis=0)
    sigma = Xc.T @ Xc / ds.n
    sigma = (sigma + sigma.T) / 2
    try:
        np.linalg.cholesky(sigma)
        ok = bool(np.min(np.linalg.eigvalsh(sigma)) > 1e-12 * max(np.trace(sigma), 1e-300))
    except np.linalg.LinAlgError:
        ok = False
    return CovMatrix(sigma, ok)


def _check_variance(ds: Dataset) -> np.ndarray:
    sd = ds.X.std(axis=0)
    bad = np.flatnonzero(sd <= 1e-12 * max(1.0, float(np.abs(ds.X).max())))
    if bad.size:
        cols = ", ".join(ds.names[k] for k in bad)
        raise DataError(f"zero-variance predictor column(s): {cols}")
    return sd


def standardize(ds: Dataset) -> Dataset:
    """Center and scale each predictor to unit variance (divisor n).

    The response is centered but not scaled.
    """
    sd = _check_variance(ds)
    c = center(ds)
    return replace(c, X=c.X / sd, standardized=True, transform=ds.transform / sd)


def whiten(ds: Dataset) -> Dataset:
    """Center and transform X to identity sample covariance with ``S^-1/2``."""
    _check_variance(ds)
    c = center(ds)
    w, V = np.linalg.eigh(covariance(c).sigma)
    if w[0] <= 1e-12 * w[-1]:
        raise DataError("predictor covariance is singular; cannot whiten")
    T = (V / np.sqrt(w)) @ V.T
    return replace(c, X=c.X @ T, standardized=True, whitened=True, transform=ds.transform @ T)


def load_csv(path, response: str | int = -1) -> Dataset:
    """Read a comma-separated file with a header row.

    ``response`` is a column name or a (possibly negative) column index; every
    other column becomes a predictor.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if isinstance(response, str) and response not in header:
        try:
            response = int(response)
        except ValueError:
            raise DataError(f"{path}: response column {response!r} not in header {header}") from None
    if isinstance(response, int):
        if not -len(header) <= response < len(header):
            raise DataError(f"{path}: response column index {response} out of range")
        ycol = response % len(header)
    else:
        ycol = header.index(response)
    if len(body) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(body)}")

    values = np.empty((len(body), len(header)))
    for r, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r + 2} has {len(row)} fields, expected {len(header)}")
        for c, cell in enumerate(row):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell {cell!r} at row {r + 2}, column {c + 1} ({header[c]})"
                ) from None
    if not np.all(np.isfinite(values)):
        r, c = np.argwhere(~np.isfinite(values))[0]
        raise DataError(f"{path}: non-finite value at row {r + 2}, column {c + 1} ({header[c]})")
    xcols = [c for c in range(len(header)) if c != ycol]
    return Dataset(values[:, xcols], values[:, ycol], names=tuple(header[c] for c in xcols))


def write_csv(path, ds: Dataset, response_name: str = "y") -> None:
    """Write raw-coordinate data with 17 significant digits."""
    raw = ds.original()
    X, Y = raw.X, raw.Y
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*ds.names, response_name])
        for xi, yi in zip(X, Y):
            w.writerow([f"{v:.17g}" for v in (*xi, yi)])
