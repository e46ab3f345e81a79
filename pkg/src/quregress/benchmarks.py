"""Benchmark regression functions, seeded dataset generation, scaling and splits.

The 22 suite functions are two-dimensional; four one-dimensional functions
serve as a proof-of-concept set on [-1, 1].  Formulas follow the published
benchmark table verbatim, including its Rosenbrock ``(x_i + 1)^2`` term.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgument

TWO_PI = 2.0 * np.pi


def sphere(x):
    return np.sum(x ** 2)


def ellipsoid(x):
    i = np.arange(1, len(x) + 1)
    return np.sum(i * x ** 2)


def bent_cigar(x):
    return x[0] ** 2 + 1e6 * np.sum(x[1:] ** 2)


def discus(x):
    return 1e6 * x[0] ** 2 + np.sum(x[1:] ** 2)


def different_powers(x):
    i = np.arange(1, len(x) + 1)
    return np.sum(np.abs(x) ** (i + 1))


def rosenbrock(x):
    a, b = x[:-1], x[1:]
    return np.sum(100.0 * (b - a ** 2) ** 2 + (a + 1.0) ** 2)


def schaffer_f7(x):
    s = np.sqrt(x[:-1] ** 2 + x[1:] ** 2)
    terms = np.sqrt(s) + np.sqrt(s) * np.sin(50.0 * s ** 0.2) ** 2
    return (np.sum(terms) / (len(x) - 1)) ** 2


def ackley(x):
    # exponential form; a square root of the cosine mean is undefined when that mean is negative
    d = len(x)
    return (-20.0 * np.exp(-0.2 * np.sqrt(np.sum(x ** 2) / d))
            - np.exp(np.sum(np.cos(TWO_PI * x)) / d) + np.e + 20.0)


def rastrigin(x):
    return np.sum(x ** 2 - 10.0 * np.cos(TWO_PI * x)) + 10.0 * len(x)


_W_K = np.arange(21)
_W_A = 0.5 ** _W_K
_W_B = 3.0 ** _W_K


def weierstrass(x):
    inner = np.sum(_W_A[None, :] * np.cos(TWO_PI * _W_B[None, :] * (x[:, None] + 0.5)), axis=1)
    return np.sum(inner) - len(x) * np.sum(_W_A * np.cos(np.pi * _W_B))


def griewank(x):
    i = np.arange(1, len(x) + 1)
    return np.sum(x ** 2) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))) + 1.0


def schwefel(x):
    return -np.sum(x * np.sin(np.sqrt(np.abs(x)))) + 418.9828872724337 * len(x)


_K_POW = 2.0 ** np.arange(1, 33)


def katsuura(x):
    d = len(x)
    i = np.arange(1, d + 1)
    scaled = _K_POW[None, :] * x[:, None]
    inner = np.sum(np.abs(scaled - np.floor(scaled + 0.5)) / _K_POW[None, :], axis=1)
    return 10.0 / d ** 2 * np.prod((1.0 + i * inner) ** (10.0 / d ** 1.2)) - 10.0 / d ** 2


def griewank_rosenbrock(x):
    # no wrap-around term: i runs while x_{i+1} exists
    a, b = x[:-1], x[1:]
    r = 100.0 * (a ** 2 - b) ** 2 + (a - 1.0) ** 2
    return np.sum(r ** 2 / 4000.0 - np.cos(r) + 1.0)


def _schaffer_g(a, b):
    r2 = a ** 2 + b ** 2
    return 0.5 + (np.sin(np.sqrt(r2)) ** 2 - 0.5) / (1.0 + 0.001 * r2) ** 2


def expanded_schaffer_f6(x):
    return np.sum(_schaffer_g(x[:-1], x[1:])) + _schaffer_g(x[-1], x[0])


def step_rastrigin(x):
    z = np.where(np.abs(x) > 0.5, np.floor(0.0512 * x + 0.5), 0.0512 * x)
    return np.sum(z ** 2 - 10.0 * np.cos(TWO_PI * z) + 10.0)


def happycat(x):
    d = len(x)
    sq = np.sum(x ** 2)
    return np.abs(sq - d) ** 0.25 + (0.5 * sq + np.sum(x)) / d + 0.5


def hgbat(x):
    d = len(x)
    sq, s = np.sum(x ** 2), np.sum(x)
    return np.abs(sq ** 2 - s ** 2) ** 0.5 + (0.5 * sq + s) / d + 0.5


def different_powers_modified(x):
    d = len(x)
    i = np.arange(1, d + 1)
    expo = 2.0 + 4.0 * (i - 1) / (d - 1) if d > 1 else np.full(1, 2.0)
    return np.sum(np.abs(x) ** expo) ** 0.5


def zakharov(x):
    i = np.arange(1, len(x) + 1)
    s = np.sum(0.5 * i * x)
    return np.sum(x ** 2) + s ** 2 + s ** 4


def levy(x):
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[0]) ** 2
    mid = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(TWO_PI * w[-1]) ** 2)
    return head + mid + tail


def dixon_price(x):
    i = np.arange(2, len(x) + 1)
    return (x[0] - 1.0) ** 2 + np.sum(i * (4.0 * x[1:] ** 2 - x[:-1]) ** 2)


@dataclass(frozen=True)
class BenchmarkFn:
    id: int | str
    name: str
    func: Callable[[np.ndarray], float]
    domain: tuple[float, float]
    dimension: int = 2

    def __call__(self, x) -> float:
        return eval_function(self.id, x)


_SUITE = [
    ("Sphere", sphere, (-5, 5)),
    ("Ellipsoid", ellipsoid, (-5, 5)),
    ("Bent Cigar", bent_cigar, (-5, 5)),
    ("Discus", discus, (-5, 5)),
    ("Different Powers", different_powers, (-5, 5)),
    ("Rosenbrock", rosenbrock, (-5, 5)),
    ("Schaffer F7", schaffer_f7, (-5, 5)),
    ("Ackley", ackley, (-5, 5)),
    ("Rastrigin", rastrigin, (-5, 5)),
    ("Weierstrass", weierstrass, (-5, 5)),
    ("Griewank", griewank, (-10, 10)),
    ("Schwefel", schwefel, (-500, 500)),
    ("Katsuura", katsuura, (-500, 500)),
    ("Griewank-Rosenbrock", griewank_rosenbrock, (-300, 300)),
    ("Expanded Schaffer F6", expanded_schaffer_f6, (-10, 10)),
    ("Step-Rastrigin", step_rastrigin, (-30, 30)),
    ("HappyCat", happycat, (-50, 50)),
    ("HGBat", hgbat, (-30, 30)),
    ("Different Powers Modified", different_powers_modified, (-5, 5)),
    ("Zakharov", zakharov, (-5, 5)),
    ("Levy", levy, (-500, 500)),
    ("Dixon-Price", dixon_price, (-1000, 1000)),
]

SUITE: dict[int, BenchmarkFn] = {
    i + 1: BenchmarkFn(i + 1, name, fn, (float(lo), float(hi)))
    for i, (name, fn, (lo, hi)) in enumerate(_SUITE)
}


def _f1(x):
    return x ** 2


def _f2(x):
    return x ** 3


def _f3(x):
    return 2.0 * x ** 4 - 1.0


def _f4(x):
    return 0.9 / (1.0 + np.exp(-10.0 * x))


ONE_D = {1: _f1, 2: _f2, 3: _f3, 4: _f4}
ONE_D_DOMAIN = (-1.0, 1.0)


def parse_function_id(fid) -> int | str:
    """Normalise ``3``, ``"3"`` or ``"1d-2"`` to a suite int or a 1-D key."""
    if isinstance(fid, (int, np.integer)):
        if int(fid) not in SUITE:
            raise InvalidArgument(f"benchmark id {fid} outside 1..22")
        return int(fid)
    s = str(fid).strip().lower()
    if s.isdigit():
        return parse_function_id(int(s))
    for prefix in ("1d-", "1d:", "1d", "f"):
        if s.startswith(prefix) and s[len(prefix):].isdigit():
            k = int(s[len(prefix):])
            if k in ONE_D:
                return f"1d-{k}"
    raise InvalidArgument(f"unknown function id {fid!r}")


def get_function(fid) -> BenchmarkFn:
    key = parse_function_id(fid)
    if isinstance(key, int):
        return SUITE[key]
    k = int(key[3:])
    return BenchmarkFn(key, f"f{k}-1D", lambda x, _k=k: ONE_D[_k](x[0]), ONE_D_DOMAIN, 1)


def eval_function(fid, x) -> float:
    key = parse_function_id(fid)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if isinstance(key, str):
        if len(x) != 1:
            raise InvalidArgument(f"{key} takes a single input, got {len(x)}")
        return float(ONE_D[int(key[3:])](x[0]))
    if len(x) != 2:
        raise InvalidArgument(f"benchmark {key} is two-dimensional, got {len(x)} input(s)")
    return float(SUITE[key].func(x))


def eval_1d_function(fid: int, x: float) -> float:
    if fid not in ONE_D:
        raise InvalidArgument(f"1-D function id must be 1..4, got {fid}")
    return float(ONE_D[fid](float(x)))


# -- datasets ----------------------------------------------------------------

# Features map onto [-pi/2, pi/2]: a full [-pi, pi] span forces the periodic
# extension of even targets to kink at the boundary and stalls training.
DEFAULT_X_HALF_RANGE = np.pi / 2

def _to_range(v, lo, hi, a, b):
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = a + (b - a) * (v - lo) / safe
    return np.where(span > 0, out, 0.5 * (a + b))


@dataclass(frozen=True, eq=False)
class RegressionDataset:
    X_raw: np.ndarray
    X: np.ndarray
    y_raw: np.ndarray
    y: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray
    x_min: np.ndarray
    x_max: np.ndarray
    y_min: float
    y_max: float
    function_id: int | str | None = None
    seed: int | None = None
    x_half_range: float = DEFAULT_X_HALF_RANGE

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def X_train(self):
        return self.X[self.train_idx]

    @property
    def y_train(self):
        return self.y[self.train_idx]

    def scale_x(self, X_raw):
        h = self.x_half_range
        return _to_range(np.asarray(X_raw, float), self.x_min, self.x_max, -h, h)

    def unscale_x(self, X):
        h = self.x_half_range
        return self.x_min + (np.asarray(X, float) + h) / (2 * h) * (self.x_max - self.x_min)

    def scale_y(self, y_raw):
        return _to_range(np.asarray(y_raw, float), self.y_min, self.y_max, -1.0, 1.0)

    def unscale_y(self, y):
        return self.y_min + (np.asarray(y, float) + 1.0) / 2.0 * (self.y_max - self.y_min)

    @classmethod
    def from_arrays(cls, X_raw, y_raw, seed=0, train_fraction=0.7, scale=True,
                    function_id=None, rng=None,
                    x_half_range=DEFAULT_X_HALF_RANGE) -> "RegressionDataset":
        X_raw = np.asarray(X_raw, dtype=np.float64)
        if X_raw.ndim == 1:
            X_raw = X_raw.reshape(-1, 1)
        y_raw = np.asarray(y_raw, dtype=np.float64).reshape(-1)
        n = X_raw.shape[0]
        if y_raw.shape[0] != n:
            raise InvalidArgument("X and y have different numbers of rows")
        if rng is None:
            rng = np.random.default_rng(seed)
        n_train = int(math.floor(train_fraction * n + 0.5))
        perm = rng.permutation(n)
        train_idx = np.sort(perm[:n_train])
        test_idx = np.sort(perm[n_train:])
        if scale:
            x_min, x_max = X_raw.min(axis=0), X_raw.max(axis=0)
            y_min, y_max = float(y_raw.min()), float(y_raw.max())
            X = _to_range(X_raw, x_min, x_max, -x_half_range, x_half_range)
            y = _to_range(y_raw, y_min, y_max, -1.0, 1.0)
        else:
            x_min = np.full(X_raw.shape[1], -x_half_range)
            x_max = np.full(X_raw.shape[1], x_half_range)
            y_min, y_max = -1.0, 1.0
            X, y = X_raw.copy(), y_raw.copy()
        for arr in (X_raw, X, y_raw, y, train_idx, test_idx):
            arr.setflags(write=False)
        return cls(X_raw, X, y_raw, y, train_idx, test_idx, x_min, x_max, y_min, y_max,
                   function_id, seed, float(x_half_range))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{j + 1}" for j in range(self.d)] + ["y_raw", "y_scaled"])
            for row, yr, ys in zip(self.X_raw, self.y_raw, self.y):
                w.writerow([repr(float(v)) for v in row] + [repr(float(yr)), repr(float(ys))])

    def manifest(self) -> dict:
        return {
            "id": self.function_id,
            "n": self.n,
            "seed": self.seed,
            "scaling": {
                "x_min": [float(v) for v in self.x_min],
                "x_max": [float(v) for v in self.x_max],
                "y_min": self.y_min,
                "y_max": self.y_max,
                "x_range": [-self.x_half_range, self.x_half_range],
                "y_range": [-1.0, 1.0],
            },
            "train_idx": [int(i) for i in self.train_idx],
        }

    def write_manifest(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.manifest(), fh, indent=2)


def generate_dataset(fid, n: int = 900, seed: int = 0,
                     x_half_range: float = DEFAULT_X_HALF_RANGE) -> RegressionDataset:
    if n < 10:
        raise InvalidArgument("n must be >= 10")
    bench = get_function(fid)
    rng = np.random.default_rng(seed)
    lo, hi = bench.domain
    X_raw = rng.uniform(lo, hi, size=(n, bench.dimension))
    y_raw = np.array([bench.func(row) for row in X_raw], dtype=np.float64)
    return RegressionDataset.from_arrays(X_raw, y_raw, seed=seed, function_id=bench.id, rng=rng,
                                         x_half_range=x_half_range)
