"""Command-line entry point.

Exit status: 0 on success, 2 for configuration or usage errors, 1 for
failures while running.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, QuregressError

log = logging.getLogger("quregress")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")


def _floats(text: str | None) -> list[float]:
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quregress", description="Quantum circuit regression workbench")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evaluate one circuit and print its Z expectation")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--circuit", help="circuit JSON file")
    src.add_argument("--model", help="ansatz name such as StronglyEntanglingLayers-2 or SEL-2")
    p.add_argument("--qubits", type=int, default=2, help="qubits for --model (default 2)")
    p.add_argument("--params", help="comma-separated angles; random in [-pi, pi] from --seed if omitted")
    p.add_argument("--x", required=True, help="comma-separated feature values")
    p.add_argument("--wire", type=int, default=0)

    p = sub.add_parser("train", help="fit one model on one benchmark dataset")
    _common(p)
    p.add_argument("--function", required=True, help="benchmark id (1..22 or 1d-1..1d-4)")
    p.add_argument("--model", required=True, help="e.g. StronglyEntanglingLayers-10, RRQNN-20-1q, knn3, DT")
    p.add_argument("--epochs", type=int)
    p.add_argument("--n-samples", type=int)

    p = sub.add_parser("ga", help="search a circuit architecture with the genetic algorithm")
    _common(p)
    p.add_argument("--function", required=True)
    p.add_argument("--gates", type=int, default=20)
    p.add_argument("--qubits", type=int, default=1)
    p.add_argument("--population", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--elites", type=int)
    p.add_argument("--mutation-genome-fraction", type=float)
    p.add_argument("--mutation-individual-prob", type=float)
    p.add_argument("--fitness-epochs", type=int)
    p.add_argument("--epochs", type=int, help="epochs of the final retraining")
    p.add_argument("--n-samples", type=int)

    p = sub.add_parser("bench", help="run the configured function x model x seed grid")
    _common(p)
    p.add_argument("--dry-run", action="store_true", help="only report the planned run count")

    p = sub.add_parser("complexity", help="write complexity profiles as CSV")
    _common(p)
    p.add_argument("--functions", default="all", help="comma-separated ids or 'all'")
    p.add_argument("--n-samples", type=int)

    p = sub.add_parser("meta", help="label scenarios and run the feature-subset search")
    _common(p)
    lab = p.add_mutually_exclusive_group(required=True)
    lab.add_argument("--records", help="run-record JSONL to derive labels from")
    lab.add_argument("--labels", help="CSV with function_id,label columns")
    p.add_argument("--profiles", help="profiles CSV from the complexity command")
    p.add_argument("--scenario", type=int, action="append", help="scenario number (repeatable)")
    p.add_argument("--k-min", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--n-trees", type=int)

    p = sub.add_parser("report", help="emit tables, layer curves or violin data")
    _common(p)
    p.add_argument("--records", required=True, help="run-record JSONL (or subset-results CSV for violin_data)")
    p.add_argument("--kind", required=True, choices=("table", "layers_curve", "violin_data"))
    return ap


def _config(args):
    from .runner import ExperimentConfig, load_config

    return load_config(args.config) if args.config else ExperimentConfig()


def _override(cfg, top=None, **sections):
    """Apply command-line values (``None`` means not given) over the config."""
    from .runner import parse_config

    data = cfg.model_dump()
    for key, val in (top or {}).items():
        if val is not None:
            data[key] = val
    for section, values in sections.items():
        for key, val in values.items():
            if val is not None:
                data[section][key] = val
    return parse_config(data)


def _emit(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")
    print(text)


def cmd_simulate(args) -> int:
    from .circuits import AnsatzFamily, Family, build_ansatz
    from .sim import CircuitSpec, expectation_z, run_circuit

    if args.circuit:
        try:
            circuit = CircuitSpec.from_json(json.loads(Path(args.circuit).read_text()))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot load circuit: {exc}", args.circuit) from None
    else:
        head, _, tail = args.model.rpartition("-")
        if not tail.isdigit():
            raise ConfigError(f"model must look like NAME-LAYERS, got {args.model!r}", "--model")
        try:
            circuit = build_ansatz(AnsatzFamily(Family.parse(head), int(tail), args.qubits))
        except QuregressError as exc:
            raise ConfigError(str(exc), "--model") from None
    params = _floats(args.params)
    if not params:
        params = list(np.random.default_rng(args.seed).uniform(-np.pi, np.pi, circuit.n_trainable))
    x = _floats(args.x)
    if len(params) != circuit.n_trainable:
        raise ConfigError(f"circuit needs {circuit.n_trainable} parameter(s), got {len(params)}", "--params")
    if not x:
        raise ConfigError("at least one feature value is required", "--x")
    if not 0 <= args.wire < circuit.n_qubits:
        raise ConfigError(f"wire must lie in 0..{circuit.n_qubits - 1}", "--wire")
    state = run_circuit(circuit, np.array(params), np.array(x))
    _emit({"expectation": expectation_z(state, args.wire), "n_qubits": circuit.n_qubits,
           "n_trainable": circuit.n_trainable}, args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    from .runner import PlannedRun, RecordSink, execute_run, parse_model
    from .benchmarks import parse_function_id

    cfg = _override(_config(args), {"n_samples": args.n_samples}, train={"epochs": args.epochs})
    try:
        fid = parse_function_id(args.function)
        parse_model(args.model)
    except QuregressError as exc:
        raise ConfigError(str(exc), "--function/--model") from None
    rec = execute_run(PlannedRun(fid, args.model, args.seed), cfg, command="train")
    if args.out:
        with RecordSink(args.out) as sink:
            sink.write(rec)
    print(json.dumps(rec.to_json()["metrics"] | {"param_count": rec.param_count,
                                                  "run_id": rec.run_id}, sort_keys=True))
    return EXIT_OK


def cmd_ga(args) -> int:
    from .benchmarks import generate_dataset, parse_function_id
    from .ga import GAConfig, run_ga

    cfg = _override(_config(args), {"n_samples": args.n_samples}, train={"epochs": args.epochs},
                    ga={"population": args.population, "generations": args.generations,
                        "elites": args.elites, "fitness_epochs": args.fitness_epochs,
                        "mutation_genome_fraction": args.mutation_genome_fraction,
                        "mutation_individual_prob": args.mutation_individual_prob})
    try:
        fid = parse_function_id(args.function)
        ga_cfg = GAConfig(n_gates=args.gates, n_qubits=args.qubits, seed=args.seed, **cfg.ga.model_dump())
    except QuregressError as exc:
        raise ConfigError(str(exc), "ga") from None
    data = generate_dataset(fid, cfg.n_samples, args.seed)
    res = run_ga(ga_cfg, data, cfg.train_config())
    _emit(res.to_json(), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .runner import plan_runs, read_records, run_suite

    if not args.config:
        raise ConfigError("bench requires --config", "--config")
    cfg = _config(args)
    planned = plan_runs(cfg, args.seed)
    out = args.out or "records.jsonl"
    done = {r.run_id for r in read_records(out)}
    pending = sum(r.run_id not in done for r in planned)
    print(f"planned runs: {len(planned)} (pending {pending})", file=sys.stderr)
    if args.dry_run:
        return EXIT_OK

    def progress(rec):
        log.info("%s full_r2=%.4f (%.1fs)", rec.run_id, rec.metrics["full_r2"], rec.wall_time_seconds)

    new = run_suite(cfg, out, jobs=args.jobs, base_seed=args.seed, progress=progress)
    print(f"wrote {len(new)} record(s) to {out}", file=sys.stderr)
    return EXIT_OK


def _function_list(text):
    from .runner import expand_functions

    try:
        return expand_functions([t.strip() for t in text.split(",") if t.strip()])
    except QuregressError as exc:
        raise ConfigError(str(exc), "--functions") from None


def cmd_complexity(args) -> int:
    from .benchmarks import generate_dataset
    from .complexity import compute_profile, write_profiles_csv

    cfg = _override(_config(args), {"n_samples": args.n_samples})
    profiles = {fid: compute_profile(generate_dataset(fid, cfg.n_samples, args.seed), args.seed)
                for fid in _function_list(args.functions)}
    out = args.out or "profiles.csv"
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    write_profiles_csv(out, profiles)
    print(f"wrote {len(profiles)} profile(s) to {out}", file=sys.stderr)
    return EXIT_OK


def _read_labels(path) -> dict:
    import csv

    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read labels: {exc.strerror}", path) from None
    if not rows or not {"function_id", "label"} <= set(rows[0]):
        raise ConfigError("labels CSV needs function_id and label columns", path)
    return {int(r["function_id"]) if r["function_id"].isdigit() else r["function_id"]: r["label"]
            for r in rows}


def cmd_meta(args) -> int:
    from .benchmarks import generate_dataset
    from .complexity import compute_profile, read_profiles_csv
    from .forest import ForestConfig
    from .metalearn import (MetaDataset, labels_from_records, majority_baseline,
                            subset_search, write_results_csv)
    from .runner import read_records, write_violin_data

    cfg = _override(_config(args), meta={"k_min": args.k_min, "k_max": args.k_max,
                                         "n_trees": args.n_trees, "scenarios": args.scenario})
    m = cfg.meta
    if m.k_min > m.k_max:
        raise ConfigError("k_min must not exceed k_max", "meta.k_min")
    out = Path(args.out or "meta")
    out.mkdir(parents=True, exist_ok=True)

    if args.labels:
        label_sets = {0: _read_labels(args.labels)}
    else:
        records = read_records(args.records)
        if not records:
            raise ConfigError("no run records to derive labels from", args.records)
        label_sets = {s: labels_from_records(records, s) for s in m.scenarios}
    ids = sorted({f for labels in label_sets.values() for f in labels}, key=str)
    if args.profiles:
        profiles = read_profiles_csv(args.profiles)
    else:
        profiles = {f: compute_profile(generate_dataset(f, cfg.n_samples, m.profile_seed), m.profile_seed)
                    for f in ids}

    summary = {}
    for scenario, labels in label_sets.items():
        meta = MetaDataset.build({f: profiles[f] for f in labels}, labels, scenario)
        tag = f"s{scenario}" if scenario else "custom"
        meta.to_csv(out / f"meta_{tag}.csv")
        res = subset_search(meta, m.k_min, m.k_max, ForestConfig(n_trees=m.n_trees), args.seed, args.jobs)
        write_results_csv(out / f"subsets_{tag}.csv", res)
        (out / tag).mkdir(exist_ok=True)
        write_violin_data(out / f"subsets_{tag}.csv", out / tag)
        top = [r for r in res.results if r.loocv_accuracy == res.best.loocv_accuracy]
        summary[tag] = {
            "baseline": majority_baseline(meta.labels),
            "best_accuracy": res.best.loocv_accuracy,
            "best_subsets": [list(r.subset) for r in top[:10]],
            "class_counts": {c: meta.labels.count(c) for c in meta.classes},
            "beats_baseline": res.best.loocv_accuracy >= majority_baseline(meta.labels),
        }
    _emit(summary, out / "summary.json")
    return EXIT_OK


def cmd_report(args) -> int:
    from .runner import emit_report

    paths = emit_report(args.records, args.kind, args.out or "report")
    for p in paths:
        print(p)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate, "train": cmd_train, "ga": cmd_ga, "bench": cmd_bench,
    "complexity": cmd_complexity, "meta": cmd_meta, "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuregressError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
