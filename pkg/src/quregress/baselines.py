"""Classical reference regressors and the exact Wilcoxon signed-rank test.

Parameter counts follow the usual comparison convention: a KNN regressor
stores data but trains nothing (0), a decision tree counts its nodes, a
linear model counts its coefficients plus intercept.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .complexity import LinearModel, ols_fit
from .errors import DegeneratePairError, InvalidArgument, InvalidStateError
from .forest import ForestClassifier

__all__ = [
    "ForestClassifier", "KnnRegressor", "LinearRegressor", "TreeRegressor",
    "knn_predict", "tree_fit", "wilcoxon_signed_rank",
]


def _as_2d(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(-1, 1) if X.ndim == 1 else X


class LinearRegressor:
    def __init__(self):
        self.model: LinearModel | None = None

    def fit(self, X, y) -> "LinearRegressor":
        self.model = ols_fit(_as_2d(X), y)
        return self

    def predict(self, X) -> np.ndarray:
        if self.model is None:
            raise InvalidStateError("regressor is not fitted")
        return self.model.predict(_as_2d(X))

    @property
    def param_count(self) -> int:
        if self.model is None:
            raise InvalidStateError("regressor is not fitted")
        return len(self.model.coefficients) + 1


class KnnRegressor:
    param_count = 0

    def __init__(self, k: int = 2):
        if k < 1:
            raise InvalidArgument("k must be >= 1")
        self.k = k
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, X, y) -> "KnnRegressor":
        X = _as_2d(X)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if len(X) != len(y):
            raise InvalidArgument("X and y lengths differ")
        if len(y) == 0:
            raise InvalidStateError("empty training set")
        if self.k > len(y):
            raise InvalidArgument(f"k={self.k} exceeds training size {len(y)}")
        self.X, self.y = X, y
        return self

    def neighbors(self, Q) -> np.ndarray:
        if self.X is None or len(self.X) == 0:
            raise InvalidStateError("empty training set")
        Q = _as_2d(Q)
        out = np.empty((len(Q), self.k), dtype=np.int64)
        for s in range(0, len(Q), 256):
            # direct differences rather than the |a|^2 - 2ab + |b|^2 expansion keep ties exact
            d2 = np.sum((Q[s:s + 256, None, :] - self.X[None, :, :]) ** 2, axis=2)
            out[s:s + 256] = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return out

    def predict(self, Q) -> np.ndarray:
        return self.y[self.neighbors(Q)].mean(axis=1)


def knn_predict(model: KnnRegressor, x) -> float:
    return float(model.predict(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


@dataclass(frozen=True)
class _Nodes:
    feature: np.ndarray    # -1 for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray


class TreeRegressor:
    """CART regressor with squared-error splits on midpoints of unique values."""

    def __init__(self, max_depth: int | None = None, min_samples_split: int = 2):
        if max_depth is not None and max_depth < 0:
            raise InvalidArgument("max_depth must be >= 0")
        if min_samples_split < 2:
            raise InvalidArgument("min_samples_split must be >= 2")
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.nodes: _Nodes | None = None

    @staticmethod
    def _best_split(X, y):
        n, d = X.shape
        best = (0.0, -1, 0.0)
        total = y.sum()
        base = total * total / n
        for j in range(d):
            order = np.argsort(X[:, j], kind="stable")
            xs, ys = X[order, j], y[order]
            cs = np.cumsum(ys)[:-1]
            nl = np.arange(1, n, dtype=np.float64)
            valid = xs[1:] > xs[:-1]
            if not valid.any():
                continue
            # SSE reduction = sum_l^2/n_l + sum_r^2/n_r - total^2/n
            gain = cs ** 2 / nl + (total - cs) ** 2 / (n - nl) - base
            gain = np.where(valid, gain, -np.inf)
            i = int(np.argmax(gain))
            if gain[i] > best[0] + 1e-12 * max(1.0, abs(base)):
                best = (float(gain[i]), j, 0.5 * (xs[i] + xs[i + 1]))
        return best[1], best[2]

    def fit(self, X, y) -> "TreeRegressor":
        X = _as_2d(X)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if len(y) < 1 or len(X) != len(y):
            raise InvalidArgument("need n >= 1 rows with matching targets")
        feat, thr, left, right, val = [], [], [], [], []

        def new_node(value):
            feat.append(-1); thr.append(0.0); left.append(-1); right.append(-1); val.append(value)
            return len(val) - 1

        root = new_node(float(y.mean()))
        stack = [(root, np.arange(len(y)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            ys = y[idx]
            if len(idx) < self.min_samples_split or np.all(ys == ys[0]):
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            j, t = self._best_split(X[idx], ys)
            if j < 0:
                continue
            mask = X[idx, j] <= t
            li, ri = idx[mask], idx[~mask]
            feat[node], thr[node] = j, t
            left[node] = new_node(float(y[li].mean()))
            right[node] = new_node(float(y[ri].mean()))
            stack.append((right[node], ri, depth + 1))
            stack.append((left[node], li, depth + 1))
        self.nodes = _Nodes(np.array(feat), np.array(thr), np.array(left), np.array(right), np.array(val))
        return self

    @property
    def param_count(self) -> int:
        if self.nodes is None:
            raise InvalidStateError("tree is not fitted")
        return len(self.nodes.value)

    @property
    def depth(self) -> int:
        nd = self.nodes
        best, stack = 0, [(0, 0)]
        while stack:
            i, dpt = stack.pop()
            best = max(best, dpt)
            if nd.feature[i] >= 0:
                stack += [(nd.left[i], dpt + 1), (nd.right[i], dpt + 1)]
        return best

    def predict(self, X) -> np.ndarray:
        if self.nodes is None:
            raise InvalidStateError("tree is not fitted")
        X = _as_2d(X)
        nd = self.nodes
        at = np.zeros(len(X), dtype=np.int64)
        active = nd.feature[at] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = at[rows]
            go_left = X[rows, nd.feature[cur]] <= nd.threshold[cur]
            at[rows] = np.where(go_left, nd.left[cur], nd.right[cur])
            active[rows] = nd.feature[at[rows]] >= 0
        return nd.value[at]


def tree_fit(X, y, max_depth: int | None = None, min_samples_split: int = 2) -> TreeRegressor:
    return TreeRegressor(max_depth, min_samples_split).fit(X, y)


def wilcoxon_signed_rank(a, b) -> float:
    """Exact two-sided p-value of the signed-rank statistic.

    The null distribution of W+ is built by counting sign assignments over
    doubled (hence integral) tie-averaged ranks, which is the full 2^m
    enumeration collapsed by statistic value.  The p-value is the null mass
    at least as far from the centre as the observed statistic.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise InvalidArgument("samples must have equal length")
    if not 5 <= len(a) <= 25:
        raise InvalidArgument("exact test supports 5 <= n <= 25 pairs")
    d = a - b
    d = d[d != 0]
    if d.size == 0:
        raise DegeneratePairError("all paired differences are zero")
    r2 = np.rint(2 * rankdata(np.abs(d))).astype(np.int64)
    total = int(r2.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in r2:
        counts[r:] += counts[:-r].copy()
    w = int(r2[d > 0].sum())
    s = np.arange(total + 1)
    extreme = np.abs(2 * s - total) >= abs(2 * w - total)
    return float(counts[extreme].sum() / 2.0 ** len(d))
