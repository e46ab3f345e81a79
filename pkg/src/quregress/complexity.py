"""Twelve regression complexity measures and their statistical kernels.

Profiles are meant to be computed on the scaled dataset so the fixed 0.1
residual and 0.9 correlation thresholds mean the same thing for every
function.
"""
from __future__ import annotations

import csv
from dataclasses import astuple, dataclass, fields

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from .errors import DegenerateTargetError, InvalidArgument, UndefinedCorrelationError, UnderdeterminedError

MEASURES = ("c1", "c2", "c3", "c4", "l1", "l2", "l3", "s1", "s2", "s3", "s4", "t2")


@dataclass(frozen=True)
class ComplexityProfile:
    c1: float
    c2: float
    c3: float
    c4: float
    l1: float
    l2: float
    l3: float
    s1: float
    s2: float
    s3: float
    s4: float
    t2: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coefficients: np.ndarray

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        return self.intercept + X @ self.coefficients


def spearman_rho(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidArgument("spearman_rho needs two vectors of equal length")
    if a.size < 3:
        raise InvalidArgument("spearman_rho needs at least 3 samples")
    rho = _rank_corr(a, b)
    if np.isnan(rho):
        raise UndefinedCorrelationError("correlation undefined for constant input")
    return rho


def _rank_corr(a, b) -> float:
    ra = rankdata(a) - (len(a) + 1) / 2.0
    rb = rankdata(b) - (len(b) + 1) / 2.0
    den = np.sqrt(np.dot(ra, ra) * np.dot(rb, rb))
    if den == 0:
        return float("nan")
    return float(np.clip(np.dot(ra, rb) / den, -1.0, 1.0))


def ols_fit(X, y) -> LinearModel:
    """Least squares with intercept; minimum-norm solution when rank deficient."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, d = X.shape
    if n < d + 1:
        raise UnderdeterminedError(f"{n} sample(s) cannot determine {d + 1} coefficients")
    xm, ym = X.mean(axis=0), y.mean()
    # centring keeps the intercept out of the minimum-norm penalty
    beta, *_ = np.linalg.lstsq(X - xm, y - ym, rcond=None)
    return LinearModel(float(ym - xm @ beta), beta)


def minimum_spanning_tree(X) -> list[tuple[int, int]]:
    """Prim's algorithm on the dense Euclidean graph.

    Returns ``n - 1`` edges ``(i, j)`` with ``i < j``.  Among equal-weight
    candidates the lower index pair wins.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n = X.shape[0]
    if n < 2:
        raise InvalidArgument("MST needs at least two points")
    dist = cdist(X, X)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        w = cand.min()
        ties = np.flatnonzero(cand == w)
        pairs = [tuple(sorted((int(parent[v]), int(v)))) for v in ties]
        k = min(range(len(ties)), key=lambda t: pairs[t])
        v = int(ties[k])
        edges.append(pairs[k])
        in_tree[v] = True
        closer = (dist[v] < best) | ((dist[v] == best) & (v < parent))
        closer &= ~in_tree
        parent[closer] = v
        best[closer] = dist[v][closer]
    return edges


def _nn_index(dist: np.ndarray) -> np.ndarray:
    # argmin returns the first minimum, so ties go to the lower row index
    return np.argmin(dist, axis=1)


def _c3_removed(x, y, threshold=0.9, min_keep=4) -> int:
    keep = np.arange(len(x))
    while len(keep) >= min_keep:
        xs, ys = x[keep], y[keep]
        rho = _rank_corr(xs, ys)
        if not np.isnan(rho) and abs(rho) > threshold:
            break
        if len(keep) == min_keep:
            break
        rx, ry = rankdata(xs), rankdata(ys)
        rxc = rx - rx.mean()
        sxx = np.dot(rxc, rxc)
        slope = np.dot(rxc, ry - ry.mean()) / sxx if sxx > 0 else 0.0
        resid = ry - (ry.mean() + slope * rxc)
        keep = np.delete(keep, int(np.argmax(np.abs(resid))))
    return len(x) - len(keep)


def _c4(X, y, order, tol=0.1) -> float:
    n = len(y)
    remaining = np.arange(n)
    for j in order:
        if len(remaining) == 0:
            break
        xj = X[remaining, j]
        yr = y[remaining]
        if len(remaining) >= 2:
            model = ols_fit(xj, yr)
            resid = yr - model.predict(xj)
        else:
            resid = np.zeros(1)
        remaining = remaining[np.abs(resid) > tol]
    return len(remaining) / n


def interpolated_points(X, y, rng):
    """Points on segments joining samples adjacent in target order."""
    order = np.argsort(y, kind="stable")
    Xs, ys = X[order], y[order]
    t = rng.uniform(0.0, 1.0, size=len(y) - 1)
    Xi = Xs[:-1] + t[:, None] * (Xs[1:] - Xs[:-1])
    yi = ys[:-1] + t * (ys[1:] - ys[:-1])
    return Xi, yi


def profile_arrays(X, y, seed: int = 0) -> ComplexityProfile:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, d = X.shape
    if n < 10:
        raise InvalidArgument("complexity profile needs at least 10 samples")
    if np.all(y == y[0]):
        raise DegenerateTargetError("target is constant")

    rhos = np.array([abs(_rank_corr(X[:, j], y)) for j in range(d)])
    rhos = np.nan_to_num(rhos, nan=0.0)
    c1 = float(rhos.max())
    c2 = float(rhos.mean())
    c3 = min(_c3_removed(X[:, j], y) for j in range(d)) / n
    order = np.argsort(-rhos, kind="stable")
    c4 = _c4(X, y, order)

    lin = ols_fit(X, y)
    resid = y - lin.predict(X)
    l1 = float(np.mean(np.abs(resid)))
    l2 = float(np.mean(resid ** 2))

    s1 = float(sum(abs(y[i] - y[j]) for i, j in minimum_spanning_tree(X)) / n)
    sorted_x = X[np.argsort(y, kind="stable")]
    s2 = float(np.sum(np.linalg.norm(np.diff(sorted_x, axis=0), axis=1)) / n)

    dist = cdist(X, X)
    np.fill_diagonal(dist, np.inf)
    s3 = float(np.mean((y[_nn_index(dist)] - y) ** 2))

    Xi, yi = interpolated_points(X, y, np.random.default_rng(seed))
    l3 = float(np.mean((lin.predict(Xi) - yi) ** 2))
    s4 = float(np.mean((y[_nn_index(cdist(Xi, X))] - yi) ** 2))

    return ComplexityProfile(c1, c2, c3, c4, l1, l2, l3, s1, s2, s3, s4, n / d)


def compute_profile(data, seed: int = 0) -> ComplexityProfile:
    """Profile of a :class:`RegressionDataset` on its scaled X and y."""
    return profile_arrays(data.X, data.y, seed)


def write_profiles_csv(path, profiles: dict) -> None:
    """``profiles`` maps a function id to its :class:`ComplexityProfile`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("id",) + MEASURES)
        for fid, prof in profiles.items():
            w.writerow([fid] + [repr(float(v)) for v in prof.as_array()])


def read_profiles_csv(path) -> dict:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            fid = row["id"]
            key = int(fid) if fid.isdigit() else fid
            out[key] = ComplexityProfile(*(float(row[m]) for m in MEASURES))
    return out
