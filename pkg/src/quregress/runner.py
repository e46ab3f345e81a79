"""Experiment orchestration: configs, model registry, run records and reports."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .baselines import KnnRegressor, LinearRegressor, TreeRegressor
from .benchmarks import SUITE, generate_dataset, parse_function_id
from .circuits import AnsatzFamily, Family, build_ansatz
from .errors import ConfigError, EmptyReportError, InvalidArgument
from .ga import GAConfig, run_ga
from .training import Metrics, TrainConfig, train

log = logging.getLogger(__name__)

GRID_DEPTHS = (1, 2, 3, 4, 5, 6, 7, 9, 10, 20, 40, 60)
GRID_RRQNN = tuple(f"RRQNN-{b}-{q}q" for b in (20, 40, 60, 120) for q in (1, 2))
GRID_MODELS = tuple(f"{fam.value}-{L}" for fam in Family for L in GRID_DEPTHS) + GRID_RRQNN
NEG_R2_SENTINEL = -100.0

_RRQNN = re.compile(r"^RRQNN-(\d+)-(\d+)q$")
_KNN = re.compile(r"^knn(\d+)$")


# -- model registry ------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    name: str
    kind: str                  # "ansatz", "rrqnn", "knn", "tree", "ols"
    family: Family | None = None
    layers: int = 0
    n_gates: int = 0
    n_qubits: int = 0
    k: int = 0


def parse_model(name: str) -> ModelSpec:
    m = _RRQNN.match(name)
    if m:
        gates, q = int(m.group(1)), int(m.group(2))
        if gates < 1 or q < 1:
            raise InvalidArgument(f"bad RRQNN descriptor {name!r}")
        return ModelSpec(name, "rrqnn", n_gates=gates, n_qubits=q)
    m = _KNN.match(name)
    if m:
        if int(m.group(1)) < 1:
            raise InvalidArgument("knn needs k >= 1")
        return ModelSpec(name, "knn", k=int(m.group(1)))
    if name == "DT":
        return ModelSpec(name, "tree")
    if name == "OLS":
        return ModelSpec(name, "ols")
    head, _, tail = name.rpartition("-")
    if head and tail.isdigit() and int(tail) >= 1:
        return ModelSpec(name, "ansatz", family=Family.parse(head), layers=int(tail))
    raise InvalidArgument(f"unknown model {name!r}")


def expand_models(names) -> list[str]:
    out: list[str] = []
    for n in names:
        for m in (GRID_MODELS if n == "full" else (n,)):
            if m not in out:
                out.append(m)
    return out


def expand_functions(ids) -> list:
    out: list = []
    for f in ids:
        for key in (list(SUITE) if f == "all" else [parse_function_id(f)]):
            if key not in out:
                out.append(key)
    return out


# -- configuration -------------------------------------------------------------

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TrainSection(_Section):
    learning_rate: float = Field(0.05, gt=0)
    epochs: int = Field(200, ge=0)
    init_range: float = Field(math.pi, gt=0)


class GASection(_Section):
    population: int = Field(20, ge=2)
    generations: int = Field(15, ge=0)
    elites: int = Field(4, ge=1)
    mutation_genome_fraction: float = Field(0.10, ge=0, le=1)
    mutation_individual_prob: float = Field(0.20, ge=0, le=1)
    fitness_epochs: int = Field(100, ge=0)

    @model_validator(mode="after")
    def _elites(self):
        if self.elites >= self.population:
            raise ValueError("elites must be smaller than population")
        return self


class MetaSection(_Section):
    scenarios: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5])
    k_min: int = Field(1, ge=1, le=12)
    k_max: int = Field(6, ge=1, le=12)
    n_trees: int = Field(100, ge=1)
    profile_seed: int = 0

    @field_validator("scenarios")
    @classmethod
    def _scenarios(cls, v):
        bad = [s for s in v if s not in range(1, 6)]
        if bad:
            raise ValueError(f"scenarios must lie in 1..5, got {bad}")
        return v


class ExperimentConfig(_Section):
    functions: list[Union[int, str]] = Field(default_factory=lambda: ["all"])
    models: list[str] = Field(default_factory=lambda: ["full"])
    seeds: Union[int, list[int]] = 10
    n_samples: int = Field(900, ge=10)
    train: TrainSection = Field(default_factory=TrainSection)
    ga: GASection = Field(default_factory=GASection)
    meta: MetaSection = Field(default_factory=MetaSection)

    @field_validator("functions")
    @classmethod
    def _functions(cls, v):
        for f in v:
            if f != "all":
                parse_function_id(f)
        return v

    @field_validator("models")
    @classmethod
    def _models(cls, v):
        for m in expand_models(v):
            parse_model(m)
        return v

    @field_validator("seeds")
    @classmethod
    def _seeds(cls, v):
        if isinstance(v, int) and v < 1:
            raise ValueError("seed count must be >= 1")
        if isinstance(v, list) and (not v or len(set(v)) != len(v)):
            raise ValueError("seed list must be non-empty and distinct")
        return v

    def seed_list(self, base: int = 0) -> list[int]:
        return list(range(base, base + self.seeds)) if isinstance(self.seeds, int) else list(self.seeds)

    def train_config(self) -> TrainConfig:
        return TrainConfig(**self.train.model_dump())


def parse_config(obj: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(obj)
    except ValidationError as exc:
        err = exc.errors()[0]
        path = ".".join(str(p) for p in err["loc"])
        raise ConfigError(err["msg"], path) from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc.msg} at line {exc.lineno})", str(path)) from None
    if not isinstance(obj, dict):
        raise ConfigError("top level must be a JSON object", str(path))
    return parse_config(obj)


# -- run records ---------------------------------------------------------------

@dataclass
class RunRecord:
    run_id: str
    command: str
    config: dict
    function_id: Any
    model: str
    seed: int
    metrics: dict
    param_count: int
    wall_time_seconds: float
    model_detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id, "command": self.command, "config": self.config,
            "function_id": self.function_id, "model": self.model, "seed": self.seed,
            "metrics": self.metrics, "param_count": self.param_count,
            "wall_time_seconds": self.wall_time_seconds, "model_detail": self.model_detail,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj) -> "RunRecord":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["run_id"], obj["command"], obj["config"], obj["function_id"], obj["model"],
                   int(obj["seed"]), obj["metrics"], int(obj["param_count"]),
                   float(obj["wall_time_seconds"]), obj.get("model_detail", {}))


def make_run_id(function_id, model: str, seed: int) -> str:
    return f"{function_id}:{model}:{seed}"


def read_records(path) -> list[RunRecord]:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(RunRecord.from_json(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InvalidArgument(f"{path}:{lineno}: malformed record ({exc})") from None
    return out


class RecordSink:
    """Single appender for the JSON-lines record file."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a")

    def write(self, record: RunRecord) -> None:
        self._fh.write(record.dumps() + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# -- running -------------------------------------------------------------------

def _metrics_dict(train_m: Metrics, full_m: Metrics) -> dict:
    return {"train_r2": train_m.r2, "train_rmse": train_m.rmse,
            "full_r2": full_m.r2, "full_rmse": full_m.rmse}


def fit_model(spec: ModelSpec, data, seed: int, train_config: TrainConfig, ga: GASection):
    """Fit one model; returns (metrics dict, param count, detail dict)."""
    if spec.kind == "ansatz":
        circuit = build_ansatz(AnsatzFamily(spec.family, spec.layers, data.d), data.d)
        res = train(circuit, data, train_config.replace(seed=seed))
        return _metrics_dict(res.train_metrics, res.full_metrics), circuit.n_trainable, {}
    if spec.kind == "rrqnn":
        cfg = GAConfig(n_gates=spec.n_gates, n_qubits=spec.n_qubits, seed=seed, **ga.model_dump())
        res = run_ga(cfg, data, train_config)
        return (_metrics_dict(res.train_metrics, res.final_metrics), len(res.best_params),
                {"chromosome": res.best_chromosome.to_json(),
                 "best_fitness_history": res.best_fitness_history})
    if spec.kind == "knn":
        model = KnnRegressor(spec.k)
    elif spec.kind == "tree":
        model = TreeRegressor()
    else:
        model = LinearRegressor()
    model.fit(data.X_train, data.y_train)
    tm = Metrics.of(data.y_train, model.predict(data.X_train))
    fm = Metrics.of(data.y, model.predict(data.X))
    return _metrics_dict(tm, fm), int(model.param_count), {}


@dataclass(frozen=True)
class PlannedRun:
    function_id: Any
    model: str
    seed: int

    @property
    def run_id(self) -> str:
        return make_run_id(self.function_id, self.model, self.seed)


def plan_runs(config: ExperimentConfig, base_seed: int = 0) -> list[PlannedRun]:
    return [PlannedRun(f, m, s)
            for f in expand_functions(config.functions)
            for m in expand_models(config.models)
            for s in config.seed_list(base_seed)]


def execute_run(run: PlannedRun, config: ExperimentConfig, command: str = "bench") -> RunRecord:
    t0 = time.perf_counter()
    data = generate_dataset(run.function_id, config.n_samples, run.seed)
    metrics, params, detail = fit_model(parse_model(run.model), data, run.seed,
                                        config.train_config(), config.ga)
    return RunRecord(run.run_id, command, config.model_dump(), run.function_id, run.model,
                     run.seed, metrics, params, time.perf_counter() - t0, detail)


def _execute(args):
    return execute_run(*args)


def run_suite(config: ExperimentConfig, records_path, jobs: int = 1, base_seed: int = 0,
              progress=None) -> list[RunRecord]:
    """Run every planned (function, model, seed) not already in ``records_path``."""
    done = {r.run_id for r in read_records(records_path)}
    todo = [r for r in plan_runs(config, base_seed) if r.run_id not in done]
    new: list[RunRecord] = []
    with RecordSink(records_path) as sink:
        if jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(jobs) as pool:
                for rec in pool.map(_execute, [(r, config) for r in todo]):
                    sink.write(rec)
                    new.append(rec)
                    if progress:
                        progress(rec)
        else:
            for r in todo:
                rec = execute_run(r, config)
                sink.write(rec)
                new.append(rec)
                if progress:
                    progress(rec)
    return new


# -- reports -------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.6f}"


def _fmt_r2(v: float) -> str:
    return "inf" if v < NEG_R2_SENTINEL else _fmt(v)


def _sort_key(fid):
    return (isinstance(fid, str), str(fid) if isinstance(fid, str) else fid)


def _grouped(records):
    groups: dict = {}
    for r in records:
        groups.setdefault(r.function_id, {}).setdefault(r.model, []).append(r)
    return groups


def table_rows(records) -> dict:
    """function id -> rows of (model, r2 mean, r2 std, rmse mean, rmse std, params mean, params std)."""
    out = {}
    for fid, models in _grouped(records).items():
        rows = []
        for model, recs in models.items():
            r2 = np.array([r.metrics["full_r2"] for r in recs])
            rm = np.array([r.metrics["full_rmse"] for r in recs])
            pc = np.array([r.param_count for r in recs], dtype=float)
            rows.append((model, r2.mean(), r2.std(), rm.mean(), rm.std(), pc.mean(), pc.std(), len(recs)))
        rows.sort(key=lambda t: (-t[1], t[0]))
        out[fid] = rows
    return out


def write_tables(records, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fid, rows in sorted(table_rows(records).items(), key=lambda kv: _sort_key(kv[0])):
        p = out_dir / f"table_{fid}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("model", "r2_mean", "r2_std", "rmse_mean", "rmse_std",
                        "params_mean", "params_std", "runs"))
            for model, r2m, r2s, rmm, rms, pm, ps, n in rows:
                w.writerow((model, _fmt_r2(r2m), _fmt(r2s), _fmt(rmm), _fmt(rms), _fmt(pm), _fmt(ps), n))
        paths.append(p)
    return paths


def layers_curve_rows(records) -> list[tuple]:
    """(function_id, family, L, mean_r2, std_r2) for every fixed-ansatz model present."""
    acc: dict = {}
    for r in records:
        try:
            spec = parse_model(r.model)
        except InvalidArgument:
            continue
        if spec.kind != "ansatz":
            continue
        acc.setdefault((r.function_id, spec.family.value, spec.layers), []).append(r.metrics["full_r2"])
    rows = [(f, fam, L, float(np.mean(v)), float(np.std(v))) for (f, fam, L), v in acc.items()]
    rows.sort(key=lambda t: (_sort_key(t[0]), t[1], t[2]))
    return rows


def write_layers_curve(records, out_dir) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = layers_curve_rows(records)
    csv_path = out_dir / "layers_curve.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("function_id", "family", "layers", "mean_r2", "std_r2"))
        for f, fam, L, m, s in rows:
            w.writerow((f, fam, L, _fmt_r2(m), _fmt(s)))
    paths = [csv_path]
    plt.rcParams["svg.hashsalt"] = "quregress"
    for fid in sorted({r[0] for r in rows}, key=_sort_key):
        fig, ax = plt.subplots(figsize=(6, 4))
        for fam in sorted({r[1] for r in rows if r[0] == fid}):
            pts = [r for r in rows if r[0] == fid and r[1] == fam]
            L = np.array([p[2] for p in pts])
            m = np.array([max(p[3], NEG_R2_SENTINEL) for p in pts])
            s = np.array([p[4] for p in pts])
            ax.plot(L, m, marker="o", label=fam)
            ax.fill_between(L, m - s, m + s, alpha=0.2)
        ax.set_xlabel("layers")
        ax.set_ylabel("R² (full data)")
        ax.set_title(f"Function {fid}")
        ax.legend(fontsize=8)
        p = out_dir / f"layers_curve_{fid}.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(p)
    return paths


def write_violin_data(results_path, out_dir) -> list[Path]:
    from .metalearn import read_results_csv

    results = read_results_csv(results_path)
    if not results:
        raise EmptyReportError(f"{results_path}: no subset results")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    p = out_dir / "violin_data.csv"
    rows = sorted((r.k, r.loocv_accuracy, "|".join(r.subset)) for r in results)
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("k", "accuracy", "subset"))
        for k, a, s in rows:
            w.writerow((k, _fmt(a), s))
    return [p]


REPORT_KINDS = ("table", "layers_curve", "violin_data")


def emit_report(records_path, kind: str, out_dir) -> list[Path]:
    if kind not in REPORT_KINDS:
        raise InvalidArgument(f"report kind must be one of {REPORT_KINDS}")
    if kind == "violin_data":
        return write_violin_data(records_path, out_dir)
    records = read_records(records_path)
    if not records:
        raise EmptyReportError(f"{records_path}: no run records")
    if kind == "table":
        return write_tables(records, out_dir)
    if not layers_curve_rows(records):
        raise EmptyReportError(f"{records_path}: no fixed-ansatz records for a layers curve")
    return write_layers_curve(records, out_dir)


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)
