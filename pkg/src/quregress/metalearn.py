"""Meta-learning: predict the winning circuit family from complexity profiles.

Each benchmark function becomes one row (its twelve complexity measures) with
a class label naming the model that won under a given scenario.  Feature
subsets are ranked by leave-one-out accuracy of a random forest.
"""
from __future__ import annotations

import csv
import itertools
import math
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .complexity import MEASURES, ComplexityProfile
from .errors import InvalidArgument
from .forest import ForestConfig, loocv_correct

SCENARIO_2_POOL = ("RRQNN-120-2q", "RRQNN-120-1q", "RRQNN-20-2q", "RRQNN-40-1q")
SCENARIOS = {
    1: "StronglyEntanglingLayers vs SimplifiedTwoDesign",
    2: "best of four RRQNN configurations",
    3: "one vs two qubit RRQNN",
    4: "best model and depth",
    5: "best family, depths collapsed",
}


def _family_of(model: str) -> str:
    """``StronglyEntanglingLayers-10`` -> ``StronglyEntanglingLayers``; RRQNN names are kept whole."""
    if model.startswith("RRQNN"):
        return model
    head, _, tail = model.rpartition("-")
    return head if tail.isdigit() else model


def _best(scores: dict[str, float]) -> str:
    # highest mean R^2; ties go to the lexicographically smaller name
    return min(scores, key=lambda m: (-scores[m], m))


def scenario_label(scenario: int, mean_r2: dict[str, float]) -> str:
    """Winner for one function given the mean full-data R^2 of each model."""
    if scenario == 1:
        fams = {}
        for fam in ("StronglyEntanglingLayers", "SimplifiedTwoDesign"):
            vals = [v for m, v in mean_r2.items() if _family_of(m) == fam]
            if vals:
                fams[fam] = max(vals)
        pool = fams
    elif scenario == 2:
        pool = {m: mean_r2[m] for m in SCENARIO_2_POOL if m in mean_r2}
    elif scenario == 3:
        pool = {}
        for q in ("1q", "2q"):
            vals = [v for m, v in mean_r2.items() if m.startswith("RRQNN") and m.endswith(q)]
            if vals:
                pool[q] = max(vals)
    elif scenario in (4, 5):
        pool = {m: v for m, v in mean_r2.items()
                if m.startswith("RRQNN") or _family_of(m) != m}
    else:
        raise InvalidArgument(f"scenario must be 1..5, got {scenario}")
    if not pool:
        raise InvalidArgument(f"no models for scenario {scenario} among {sorted(mean_r2)}")
    winner = _best(pool)
    return _family_of(winner) if scenario == 5 else winner


def labels_from_records(records, scenario: int) -> dict:
    """Map function id -> scenario label from run records (mean full R^2 over seeds)."""
    acc: dict = defaultdict(lambda: defaultdict(list))
    for r in records:
        acc[r.function_id][r.model].append(r.metrics["full_r2"])
    return {fid: scenario_label(scenario, {m: float(np.mean(v)) for m, v in models.items()})
            for fid, models in acc.items()}


@dataclass(frozen=True)
class MetaRow:
    function_id: object
    features: tuple[float, ...]
    label: str


@dataclass(frozen=True)
class MetaDataset:
    rows: tuple[MetaRow, ...]
    scenario: int = 0
    feature_names: tuple[str, ...] = MEASURES

    def __post_init__(self):
        if not self.rows:
            raise InvalidArgument("meta-dataset is empty")
        for r in self.rows:
            if len(r.features) != len(self.feature_names):
                raise InvalidArgument(f"row {r.function_id}: expected {len(self.feature_names)} features")
        ids = [r.function_id for r in self.rows]
        if len(set(ids)) != len(ids):
            raise InvalidArgument("duplicate function ids in meta-dataset")

    @classmethod
    def build(cls, profiles: dict, labels: dict, scenario: int = 0) -> "MetaDataset":
        missing = set(profiles) ^ set(labels)
        if missing:
            raise InvalidArgument(f"profiles and labels disagree on ids {sorted(map(str, missing))}")
        rows = []
        for fid in sorted(profiles, key=str):
            p = profiles[fid]
            feats = p.as_array() if isinstance(p, ComplexityProfile) else np.asarray(p, dtype=float)
            rows.append(MetaRow(fid, tuple(float(v) for v in feats), str(labels[fid])))
        return cls(tuple(rows), scenario)

    @property
    def X(self) -> np.ndarray:
        return np.array([r.features for r in self.rows], dtype=np.float64)

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.rows]

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.labels))

    @property
    def y(self) -> np.ndarray:
        code = {c: i for i, c in enumerate(self.classes)}
        return np.array([code[l] for l in self.labels], dtype=np.int64)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("function_id",) + self.feature_names + ("label",))
            for r in self.rows:
                w.writerow([r.function_id] + [repr(v) for v in r.features] + [r.label])

    @classmethod
    def from_csv(cls, path, scenario: int = 0) -> "MetaDataset":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            names = tuple(n for n in reader.fieldnames if n not in ("function_id", "label"))
            rows = []
            for row in reader:
                fid = row["function_id"]
                rows.append(MetaRow(int(fid) if fid.isdigit() else fid,
                                    tuple(float(row[n]) for n in names), row["label"]))
        return cls(tuple(rows), scenario, names)


def majority_baseline(labels) -> float:
    labels = list(labels)
    if not labels:
        raise InvalidArgument("no labels")
    return max(Counter(labels).values()) / len(labels)


def _subset_mask(meta: MetaDataset, subset) -> tuple[tuple[str, ...], int, list[int]]:
    names = list(meta.feature_names)
    subset = set(subset)
    if not subset:
        raise InvalidArgument("feature subset must be non-empty")
    unknown = subset - set(names)
    if unknown:
        raise InvalidArgument(f"unknown features {sorted(unknown)}")
    cols = [i for i, n in enumerate(names) if n in subset]
    return tuple(names[i] for i in cols), sum(1 << i for i in cols), cols


def _fold_seeds(seed: int, mask: int, n: int) -> np.ndarray:
    return np.array([np.random.SeedSequence([seed, mask, fold]).generate_state(1)[0]
                     for fold in range(n)], dtype=np.int64)


def loocv_accuracy(meta: MetaDataset, subset, forest_config: ForestConfig = ForestConfig(),
                   seed: int = 0) -> float:
    _, mask, cols = _subset_mask(meta, subset)
    y = meta.y
    n = len(y)
    if n < 2:
        raise InvalidArgument("LOOCV needs at least two rows")
    X = meta.X[:, cols]
    correct = loocv_correct(X, y, forest_config.n_trees, forest_config.features_for(len(cols)),
                            _fold_seeds(seed, mask, n))
    return correct / n


@dataclass(frozen=True)
class SubsetSearchResult:
    subset: tuple[str, ...]
    k: int
    loocv_accuracy: float
    baseline: float


@dataclass
class SearchOutcome:
    results: list[SubsetSearchResult]
    by_size: dict[int, list[float]] = field(default_factory=dict)

    @property
    def best(self) -> SubsetSearchResult:
        return self.results[0]


def _evaluate_chunk(args):
    meta, subsets, forest_config, seed = args
    return [loocv_accuracy(meta, s, forest_config, seed) for s in subsets]


def subset_search(meta: MetaDataset, k_min: int = 1, k_max: int = 12,
                  forest_config: ForestConfig = ForestConfig(), seed: int = 0,
                  jobs: int = 1) -> SearchOutcome:
    d = len(meta.feature_names)
    if not 1 <= k_min <= k_max <= d:
        raise InvalidArgument(f"need 1 <= k_min <= k_max <= {d}")
    subsets = [c for k in range(k_min, k_max + 1)
               for c in itertools.combinations(meta.feature_names, k)]
    if jobs > 1 and len(subsets) > 1:
        size = math.ceil(len(subsets) / (4 * jobs))
        chunks = [subsets[i:i + size] for i in range(0, len(subsets), size)]
        with ProcessPoolExecutor(jobs) as pool:
            accs = [a for part in pool.map(_evaluate_chunk, [(meta, c, forest_config, seed) for c in chunks])
                    for a in part]
    else:
        accs = _evaluate_chunk((meta, subsets, forest_config, seed))
    base = majority_baseline(meta.labels)
    results = [SubsetSearchResult(s, len(s), a, base) for s, a in zip(subsets, accs)]
    by_size: dict[int, list[float]] = defaultdict(list)
    for r in results:
        by_size[r.k].append(r.loocv_accuracy)
    results.sort(key=lambda r: (-r.loocv_accuracy, r.subset))
    return SearchOutcome(results, dict(by_size))


def write_results_csv(path, outcome: SearchOutcome) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("subset", "k", "accuracy", "baseline"))
        for r in outcome.results:
            w.writerow(("|".join(r.subset), r.k, repr(r.loocv_accuracy), repr(r.baseline)))


def read_results_csv(path) -> list[SubsetSearchResult]:
    with open(path, newline="") as fh:
        return [SubsetSearchResult(tuple(row["subset"].split("|")), int(row["k"]),
                                   float(row["accuracy"]), float(row["baseline"]))
                for row in csv.DictReader(fh)]
