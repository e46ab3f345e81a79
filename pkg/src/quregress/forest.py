"""Random-forest classifier compiled with numba.

The meta-learning search fits tens of thousands of small forests, so tree
growth, prediction and the leave-one-out loop all live in compiled code.
Labels are integer codes ``0..K-1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidArgument, InvalidStateError

LEAF = -1


@njit(cache=True)
def _gini(counts, total):
    if total == 0:
        return 0.0
    s = 0.0
    for c in counts:
        p = c / total
        s += p * p
    return 1.0 - s


@njit(cache=True)
def _argmax_low(counts):
    best = 0
    for k in range(1, counts.shape[0]):
        if counts[k] > counts[best]:
            best = k
    return best


@njit(cache=True)
def _grow_tree(X, y, rows, n_classes, max_features, feat, thr, left, right, label):
    """Grow one tree on ``rows``; returns the node count.  Uses numba's RNG."""
    d = X.shape[1]
    n = rows.shape[0]
    cap = feat.shape[0]
    stack_node = np.empty(cap, np.int64)
    stack_lo = np.empty(cap, np.int64)
    stack_hi = np.empty(cap, np.int64)
    idx = rows.copy()
    counts = np.zeros(n_classes, np.int64)
    lcounts = np.zeros(n_classes, np.int64)
    order_feats = np.arange(d)
    vals = np.empty(n)
    tmp = np.empty(n, np.int64)

    n_nodes = 1
    sp = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack_node[sp]
        lo = stack_lo[sp]
        hi = stack_hi[sp]
        m = hi - lo
        counts[:] = 0
        for i in range(lo, hi):
            counts[y[idx[i]]] += 1
        label[node] = _argmax_low(counts)
        feat[node] = LEAF
        if m < 2 or counts[label[node]] == m:
            continue
        parent = _gini(counts, m)
        best_imp = parent
        best_f = -1
        best_t = 0.0
        # visit features in random order; constant ones do not use up the budget
        for i in range(d - 1, 0, -1):
            j = np.random.randint(0, i + 1)
            order_feats[i], order_feats[j] = order_feats[j], order_feats[i]
        visited = 0
        for fi in range(d):
            if visited >= max_features:
                break
            f = order_feats[fi]
            for i in range(lo, hi):
                vals[i - lo] = X[idx[i], f]
            perm = np.argsort(vals[:m], kind="mergesort")
            if vals[perm[0]] == vals[perm[m - 1]]:
                continue
            visited += 1
            lcounts[:] = 0
            for p in range(m - 1):
                r = idx[lo + perm[p]]
                lcounts[y[r]] += 1
                a = vals[perm[p]]
                b = vals[perm[p + 1]]
                if b <= a:
                    continue
                nl = p + 1
                nr = m - nl
                gl = 1.0
                gr = 1.0
                for k in range(n_classes):
                    pl = lcounts[k] / nl
                    pr = (counts[k] - lcounts[k]) / nr
                    gl -= pl * pl
                    gr -= pr * pr
                imp = (nl * gl + nr * gr) / m
                if imp < best_imp - 1e-12:
                    best_imp = imp
                    best_f = f
                    t = 0.5 * (a + b)
                    best_t = t if t < b else a
        if best_f < 0:
            continue
        # partition idx[lo:hi] so rows with x <= t come first
        nl = 0
        for i in range(lo, hi):
            if X[idx[i], best_f] <= best_t:
                tmp[nl] = idx[i]
                nl += 1
        k = nl
        for i in range(lo, hi):
            if X[idx[i], best_f] > best_t:
                tmp[k] = idx[i]
                k += 1
        for i in range(m):
            idx[lo + i] = tmp[i]
        feat[node] = best_f
        thr[node] = best_t
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        stack_node[sp] = left[node]
        stack_lo[sp] = lo
        stack_hi[sp] = lo + nl
        sp += 1
        stack_node[sp] = right[node]
        stack_lo[sp] = lo + nl
        stack_hi[sp] = hi
        sp += 1
    return n_nodes


@njit(cache=True)
def _fit_forest(X, y, n_classes, n_trees, max_features, bootstrap, seed,
                feat, thr, left, right, label, sizes):
    np.random.seed(seed)
    n = X.shape[0]
    rows = np.empty(n, np.int64)
    for t in range(n_trees):
        for i in range(n):
            rows[i] = np.random.randint(0, n) if bootstrap else i
        sizes[t] = _grow_tree(X, y, rows, n_classes, max_features,
                              feat[t], thr[t], left[t], right[t], label[t])


@njit(cache=True)
def _predict_forest(Q, n_classes, feat, thr, left, right, label):
    out = np.empty(Q.shape[0], np.int64)
    votes = np.zeros(n_classes, np.int64)
    for q in range(Q.shape[0]):
        votes[:] = 0
        for t in range(feat.shape[0]):
            node = 0
            while feat[t, node] != LEAF:
                if Q[q, feat[t, node]] <= thr[t, node]:
                    node = left[t, node]
                else:
                    node = right[t, node]
            votes[label[t, node]] += 1
        out[q] = _argmax_low(votes)
    return out


@njit(cache=True)
def _loocv_correct(X, y, n_classes, n_trees, max_features, seeds):
    """Number of held-out rows predicted correctly; fold ``i`` uses ``seeds[i]``."""
    n, d = X.shape
    cap = 2 * n
    feat = np.empty((n_trees, cap), np.int64)
    thr = np.empty((n_trees, cap))
    left = np.empty((n_trees, cap), np.int64)
    right = np.empty((n_trees, cap), np.int64)
    label = np.empty((n_trees, cap), np.int64)
    sizes = np.empty(n_trees, np.int64)
    Xtr = np.empty((n - 1, d))
    ytr = np.empty(n - 1, np.int64)
    correct = 0
    for hold in range(n):
        k = 0
        for i in range(n):
            if i != hold:
                Xtr[k] = X[i]
                ytr[k] = y[i]
                k += 1
        _fit_forest(Xtr, ytr, n_classes, n_trees, max_features, True, seeds[hold],
                    feat, thr, left, right, label, sizes)
        pred = _predict_forest(X[hold:hold + 1], n_classes, feat, thr, left, right, label)
        if pred[0] == y[hold]:
            correct += 1
    return correct


def default_max_features(d: int) -> int:
    return max(1, math.ceil(math.sqrt(d)))


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: int | None = None   # None -> ceil(sqrt(d))
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidArgument("n_trees must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise InvalidArgument("max_features must be >= 1")

    def features_for(self, d: int) -> int:
        return min(d, self.max_features or default_max_features(d))


class ForestClassifier:
    def __init__(self, config: ForestConfig = ForestConfig(), seed: int = 0):
        self.config = config
        self.seed = int(seed)
        self._trees = None
        self.n_classes = 0

    def fit(self, X, y) -> "ForestClassifier":
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.asarray(y, dtype=np.int64).reshape(-1)
        if len(y) == 0 or len(X) != len(y):
            raise InvalidArgument("need at least one row with a matching label")
        if y.min() < 0:
            raise InvalidArgument("labels must be non-negative integer codes")
        self.n_classes = int(y.max()) + 1
        self.n_features = X.shape[1]
        T, cap = self.config.n_trees, 2 * len(y)
        arrays = (np.empty((T, cap), np.int64), np.empty((T, cap)), np.empty((T, cap), np.int64),
                  np.empty((T, cap), np.int64), np.empty((T, cap), np.int64))
        sizes = np.empty(T, np.int64)
        _fit_forest(X, y, self.n_classes, T, self.config.features_for(X.shape[1]),
                    self.config.bootstrap, self.seed % 2**32, *arrays, sizes)
        self._trees = arrays
        self.node_counts = sizes
        return self

    def predict(self, X) -> np.ndarray:
        if self._trees is None:
            raise InvalidStateError("forest is not fitted")
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.shape[1] != self.n_features:
            raise InvalidArgument(f"expected {self.n_features} feature(s), got {X.shape[1]}")
        return _predict_forest(X, self.n_classes, *self._trees)


def loocv_correct(X, y, n_trees: int, max_features: int, seeds) -> int:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    seeds = np.asarray(seeds, dtype=np.int64) % 2**32
    return int(_loocv_correct(X, y, int(y.max()) + 1, n_trees, max_features, seeds))
