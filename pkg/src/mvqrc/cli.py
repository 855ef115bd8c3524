"""Experiment driver: config parsing, grid runners, persistence, plots.

Subcommands reproduce the benchmark experiment families at configurable
scale: capacity-scan, capacity-heatmap, lorenz-bench, quantum-sweep,
optimize, plot. Each run writes a JSON manifest first (status
"running") and finalizes it last with checksums of every emitted file,
so interrupted runs are detectable. Re-running with an identical config
and master seed reproduces all CSV outputs bitwise.

Config files are INI-style key = value text, fully echoed into the
manifest. CLI flags override config values.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime
import functools
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import experiments, svgplot
from .errors import DomainError
from .experiments import PipelineSpec
from .hyperopt import SearchSpace
from .numerics import Prng, _label_to_stream

ARTIFACT_VERSION = "0.1.0"

KINDS = ("capacity-scan", "capacity-heatmap", "lorenz-bench", "quantum-sweep", "optimize")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

DEFAULTS = {
    "experiment": {
        "kind": "",
        "out": "",
        "master_seed": "0",
        "workers": "1",
        "trials": "15",
        "seeds": "3",
    },
    "grid": {
        "systems": "dv cv",
        "encodings": "local",
        "n": "4",
        "d": "2",
        "j": "",
        "epsilon": "",
    },
    "fixed": {"j": "1.0", "epsilon": "0.1", "gamma": "1.0"},
    "protocol": {
        "washout": "1000",
        "t_eval": "10000",
        "tau_max": "15",
        "p_level": "1e-4",
        "early_stop": "false",
    },
    "lorenz": {"input_sets": "x xy xyz", "target": "x"},
    "objective": {"kind": "capacity"},
    "dv": {"propagator": "split", "substeps": ""},
    "space": {
        "j": "1e-4 10",
        "epsilon": "1e-3 1",
        "gamma": "1e-2 100",
    },
}


def load_config(path: str | None) -> dict:
    """Parse an INI config into a nested str dict over the defaults."""
    merged = {sec: dict(values) for sec, values in DEFAULTS.items()}
    if path:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        read = parser.read(path)
        if not read:
            raise DomainError(f"config file {path} not found")
        for sec in parser.sections():
            merged.setdefault(sec, {})
            for key, value in parser.items(sec):
                merged[sec][key] = value
    return merged


def _floats(text: str) -> list:
    return [float(tok) for tok in text.split()]


def _ints(text: str) -> list:
    return [int(tok) for tok in text.split()]


def _words(text: str) -> list:
    return text.split()


def derive_point_seed(master_seed: int, label) -> int:
    """Stable per-grid-point seed so results are scheduling-independent."""
    return _label_to_stream((master_seed, label))


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

class RunWriter:
    """Owns one run directory: manifest lifecycle, CSV/SVG/JSONL files."""

    def __init__(self, out_dir: str, kind: str, config: dict):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.kind = kind
        self.config = config
        self.points: list = []
        self.failures: list = []
        self._t0 = time.monotonic()
        self._started = datetime.datetime.now(datetime.timezone.utc).isoformat()
        self._write_manifest("running")

    def _manifest_body(self, status: str) -> dict:
        return {
            "artifact": "mvqrc",
            "version": ARTIFACT_VERSION,
            "kind": self.kind,
            "status": status,
            "config": self.config,
            "started": self._started,
        }

    def _write_manifest(self, status: str, extra: dict | None = None):
        body = self._manifest_body(status)
        if extra:
            body.update(extra)
        (self.dir / "manifest.json").write_text(json.dumps(body, indent=2) + "\n")

    def write_text(self, name: str, text: str) -> Path:
        path = self.dir / name
        path.write_text(text)
        return path

    def write_csv(self, name: str, header: list, rows: list) -> Path:
        path = self.dir / name
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        return path

    def write_jsonl(self, name: str, records: list) -> Path:
        path = self.dir / name
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        with path.open("w") as fh:
            for rec in records:
                body = json.loads(rec.to_json())
                body["timestamp"] = stamp
                fh.write(json.dumps(body) + "\n")
        return path

    def record_point(self, label: dict, **info):
        self.points.append({**label, **info})

    def record_failure(self, label: dict, error: Exception):
        self.failures.append({**label, "error": f"{type(error).__name__}: {error}"})

    def finalize(self):
        files = {}
        for path in sorted(self.dir.iterdir()):
            if path.name == "manifest.json" or not path.is_file():
                continue
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            files[path.name] = f"sha256:{digest}"
        self._write_manifest(
            "complete",
            {
                "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                "duration_seconds": round(time.monotonic() - self._t0, 3),
                "points": self.points,
                "failures": self.failures,
                "files": files,
            },
        )


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _stderr(values) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(values.size))


# ---------------------------------------------------------------------------
# Worker pool
# ---------------------------------------------------------------------------

class SeedMapper:
    """Maps seed evaluations over an optional process pool, in seed order."""

    def __init__(self, workers: int):
        self.pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None

    def __call__(self, objective, jobs):
        if self.pool is None:
            return [objective(*job) for job in jobs]
        futures = [self.pool.submit(objective, *job) for job in jobs]
        return [f.result() for f in futures]

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


# ---------------------------------------------------------------------------
# Experiment runners
# ---------------------------------------------------------------------------

def _search_space(cfg: dict) -> SearchSpace:
    sp = cfg["space"]
    j = _floats(sp["j"])
    eps = _floats(sp["epsilon"])
    gamma = _floats(sp["gamma"])
    return SearchSpace(j=(j[0], j[1]), epsilon=(eps[0], eps[1]), gamma=(gamma[0], gamma[1]))


def _protocol_kwargs(cfg: dict) -> dict:
    proto = cfg["protocol"]
    return {
        "washout": int(proto["washout"]),
        "t_eval": int(proto["t_eval"]),
        "tau_max": int(proto["tau_max"]),
        "p_level": float(proto["p_level"]),
        "early_stop": proto["early_stop"].lower() in ("1", "true", "yes"),
    }


def _dv_kwargs(cfg: dict) -> dict:
    dv = cfg["dv"]
    substeps = dv["substeps"].strip()
    return {
        "dv_propagator": dv["propagator"],
        "dv_substeps": int(substeps) if substeps else None,
    }


def _pipe(cfg: dict, system: str, encoding: str, n: int, d: int, **extra) -> PipelineSpec:
    kwargs = {**_protocol_kwargs(cfg), **_dv_kwargs(cfg), **extra}
    return PipelineSpec(system=system, encoding=encoding, n=n, d=d, **kwargs)


def run_capacity_scan(cfg: dict, writer: RunWriter, mapper) -> list:
    """Optimized mixing capacity per (system, encoding, n, D) grid point."""
    grid = cfg["grid"]
    exp = cfg["experiment"]
    trials, seeds = int(exp["trials"]), int(exp["seeds"])
    master = int(exp["master_seed"])
    space = _search_space(cfg)
    rows = []
    for system in _words(grid["systems"]):
        for encoding in _words(grid["encodings"]):
            for n in _ints(grid["n"]):
                for d in _ints(grid["d"]):
                    label = {"system": system, "encoding": encoding, "n": n, "d": d}
                    try:
                        pipe = _pipe(cfg, system, encoding, n, d)
                        seed = derive_point_seed(master, tuple(sorted(label.items())))
                        result = experiments.optimize_point(
                            pipe, "capacity", trials, seeds, seed, space=space, map_fn=mapper
                        )
                        best = result.best
                        norm = best.aggregate / (d * (d - 1) / 2.0 * pipe.n_outputs())
                        rows.append(
                            [
                                system,
                                encoding,
                                n,
                                d,
                                best.aggregate,
                                _stderr(best.per_seed),
                                norm,
                                best.params["j"],
                                best.params["epsilon"],
                                best.params["gamma"],
                            ]
                        )
                        writer.write_jsonl(
                            f"trials_{system}_{encoding}_n{n}_d{d}.jsonl", result.history
                        )
                        writer.record_point(label, c_mix=best.aggregate)
                    except Exception as exc:  # noqa: BLE001 - per-point isolation
                        writer.record_failure(label, exc)
    header = [
        "system", "encoding", "n", "d",
        "c_mix_mean", "c_mix_stderr", "c_mix_norm",
        "best_j", "best_eps", "best_gamma",
    ]
    writer.write_csv("capacity_scan.csv", header, rows)
    _scan_plot(writer, rows)
    return rows


def _scan_plot(writer: RunWriter, rows: list):
    series = {}
    for row in rows:
        key = f"{row[0]}/{row[1]} D={row[3]}"
        series.setdefault(key, {"label": key, "x": [], "y": []})
        series[key]["x"].append(row[2])
        series[key]["y"].append(row[4])
    if series:
        svg = svgplot.line_plot(
            list(series.values()), xlabel="n", ylabel="C_mix", title="Mixing capacity vs system size"
        )
        writer.write_text("capacity_scan.svg", svg)


def run_capacity_heatmap(cfg: dict, writer: RunWriter, mapper) -> list:
    """C_mix averaged over seeds per (J, epsilon) cell at fixed gamma."""
    grid, fixed, exp = cfg["grid"], cfg["fixed"], cfg["experiment"]
    j_grid, eps_grid = _floats(grid["j"]), _floats(grid["epsilon"])
    if not j_grid or not eps_grid:
        raise DomainError("capacity-heatmap requires [grid] j and epsilon lists")
    seeds = int(exp["seeds"])
    master = int(exp["master_seed"])
    gamma = float(fixed["gamma"])
    n = _ints(grid["n"])[0]
    d = _ints(grid["d"])[0]
    rows = []
    for system in _words(grid["systems"]):
        for encoding in _words(grid["encodings"]):
            grid_values = []
            for eps in eps_grid:
                line = []
                for j in j_grid:
                    label = {
                        "system": system, "encoding": encoding,
                        "j": j, "epsilon": eps,
                    }
                    try:
                        pipe = _pipe(cfg, system, encoding, n, d)
                        seed = derive_point_seed(master, tuple(sorted(label.items())))
                        params = {"j": j, "epsilon": eps, "gamma": gamma}
                        record = experiments.capacity_at_params(pipe, params, seeds, seed, map_fn=mapper)
                        rows.append(
                            [system, encoding, n, d, j, eps, gamma,
                             record.aggregate, _stderr(record.per_seed)]
                        )
                        line.append(record.aggregate)
                        writer.record_point(label, c_mix=record.aggregate)
                    except Exception as exc:  # noqa: BLE001
                        writer.record_failure(label, exc)
                        line.append(float("nan"))
                grid_values.append(line)
            svg = svgplot.heatmap(
                j_grid, eps_grid, grid_values,
                xlabel="J", ylabel="epsilon",
                title=f"C_mix {system}/{encoding} (n={n}, D={d}, gamma={gamma})",
                xlog=True, ylog=True,
            )
            writer.write_text(f"heatmap_{system}_{encoding}.svg", svg)
    header = ["system", "encoding", "n", "d", "j", "epsilon", "gamma", "c_mix_mean", "c_mix_stderr"]
    writer.write_csv("capacity_heatmap.csv", header, rows)
    return rows


def run_lorenz_bench(cfg: dict, writer: RunWriter, mapper) -> list:
    """Optimized test NRMSE per (input subset, encoding, system)."""
    grid, exp, lor = cfg["grid"], cfg["experiment"], cfg["lorenz"]
    trials, seeds = int(exp["trials"]), int(exp["seeds"])
    master = int(exp["master_seed"])
    space = _search_space(cfg)
    n = _ints(grid["n"])[0]
    target = tuple(lor["target"])
    rows = []
    best_overlay = None
    for system in _words(grid["systems"]):
        for encoding in _words(grid["encodings"]):
            for input_set in _words(lor["input_sets"]):
                inputs = tuple(input_set)
                label = {"system": system, "encoding": encoding, "inputs": input_set}
                try:
                    pipe = _pipe(
                        cfg, system, encoding, n, len(inputs),
                        input_components=inputs, target_components=target,
                    )
                    seed = derive_point_seed(master, tuple(sorted(label.items())))
                    result = experiments.optimize_point(
                        pipe, "lorenz", trials, seeds, seed, space=space, map_fn=mapper
                    )
                    best = result.best
                    baseline = experiments.persistence_baseline_nrmse(pipe)
                    rows.append(
                        [system, encoding, input_set, lor["target"],
                         best.aggregate, _stderr(best.per_seed), baseline,
                         best.params["j"], best.params["epsilon"], best.params["gamma"]]
                    )
                    writer.write_jsonl(
                        f"trials_{system}_{encoding}_{input_set}.jsonl", result.history
                    )
                    writer.record_point(label, nrmse=best.aggregate, baseline=baseline)
                    if best_overlay is None or best.aggregate < best_overlay[0]:
                        best_overlay = (best.aggregate, pipe, best.params, seed)
                except Exception as exc:  # noqa: BLE001
                    writer.record_failure(label, exc)
    header = [
        "system", "encoding", "inputs", "target",
        "nrmse_mean", "nrmse_stderr", "baseline_nrmse",
        "best_j", "best_eps", "best_gamma",
    ]
    writer.write_csv("lorenz_bench.csv", header, rows)
    if best_overlay is not None:
        _overlay_plot(writer, *best_overlay[1:])
    return rows


def _overlay_plot(writer: RunWriter, pipe: PipelineSpec, params: dict, master_seed: int):
    prng = Prng(master_seed).split(("realization", 0))
    _, true, predicted, _ = experiments.lorenz_run(params, prng, pipe)
    steps = list(range(min(300, true.shape[1])))
    series = [
        {"label": "true", "x": steps, "y": list(true[0, : len(steps)])},
        {"label": "predicted", "x": steps, "y": list(predicted[0, : len(steps)])},
    ]
    svg = svgplot.line_plot(
        series, xlabel="test step", ylabel=f"{pipe.target_components[0]} (normalized)",
        title="Best-trial prediction overlay",
    )
    writer.write_text("lorenz_overlay.svg", svg)


def run_quantum_sweep(cfg: dict, writer: RunWriter, mapper) -> list:
    """Paired performance metric and quantum property over a J grid."""
    grid, fixed, exp = cfg["grid"], cfg["fixed"], cfg["experiment"]
    j_grid = _floats(grid["j"])
    if not j_grid:
        raise DomainError("quantum-sweep requires a [grid] j list")
    seeds = int(exp["seeds"])
    master = int(exp["master_seed"])
    epsilon = float(fixed["epsilon"])
    gamma = float(fixed["gamma"])
    n = _ints(grid["n"])[0]
    d = _ints(grid["d"])[0]
    rows = []
    for system in _words(grid["systems"]):
        prop_kind = "negativity" if system == "dv" else "squeezing_db"
        for encoding in _words(grid["encodings"]):
            xs, metric_curve, prop_curve = [], [], []
            for j in j_grid:
                label = {"system": system, "encoding": encoding, "j": j}
                try:
                    pipe = _pipe(cfg, system, encoding, n, d)
                    seed = derive_point_seed(master, tuple(sorted(label.items())))
                    objective = functools.partial(
                        experiments.quantum_sweep_point, pipe=pipe, kind="capacity"
                    )
                    params = {"j": j, "epsilon": epsilon, "gamma": gamma}
                    jobs = [
                        (params, s, Prng(seed).split(("realization", s)))
                        for s in range(seeds)
                    ]
                    results = mapper(objective, jobs)
                    metric_vals = [r[0] for r in results]
                    prop_vals = [r[1] for r in results]
                    rows.append(
                        [system, encoding, j, epsilon, gamma,
                         float(np.mean(metric_vals)), _stderr(metric_vals),
                         prop_kind, float(np.mean(prop_vals)), _stderr(prop_vals), seeds]
                    )
                    xs.append(j)
                    metric_curve.append(float(np.mean(metric_vals)))
                    prop_curve.append(float(np.mean(prop_vals)))
                    writer.record_point(label, metric=metric_curve[-1], prop=prop_curve[-1])
                except Exception as exc:  # noqa: BLE001
                    writer.record_failure(label, exc)
            if xs:
                svg = svgplot.line_plot(
                    [
                        {"label": "C_mix", "x": xs, "y": metric_curve},
                        {"label": prop_kind, "x": xs, "y": prop_curve},
                    ],
                    xlabel="J", ylabel="value", xlog=True,
                    title=f"Performance and {prop_kind}: {system}/{encoding}",
                )
                writer.write_text(f"quantum_sweep_{system}_{encoding}.svg", svg)
    header = [
        "system", "encoding", "j", "epsilon", "gamma",
        "c_mix_mean", "c_mix_stderr",
        "property", "property_mean", "property_stderr", "seeds",
    ]
    writer.write_csv("quantum_sweep.csv", header, rows)
    return rows


def run_optimize(cfg: dict, writer: RunWriter, mapper) -> list:
    """One hyperparameter study for a single pipeline configuration."""
    grid, exp = cfg["grid"], cfg["experiment"]
    trials, seeds = int(exp["trials"]), int(exp["seeds"])
    master = int(exp["master_seed"])
    system = _words(grid["systems"])[0]
    encoding = _words(grid["encodings"])[0]
    n, d = _ints(grid["n"])[0], _ints(grid["d"])[0]
    objective_kind = cfg["objective"]["kind"]
    extra = {}
    if objective_kind == "lorenz":
        inputs = tuple(cfg["lorenz"]["input_sets"].split()[0])
        extra = {"input_components": inputs, "target_components": tuple(cfg["lorenz"]["target"])}
        d = len(inputs)
    pipe = _pipe(cfg, system, encoding, n, d, **extra)
    result = experiments.optimize_point(
        pipe, objective_kind, trials, seeds, master, space=_search_space(cfg), map_fn=mapper
    )
    writer.write_jsonl("trials.jsonl", result.history)
    writer.write_text("best.json", result.best.to_json() + "\n")
    writer.record_point(
        {"system": system, "encoding": encoding, "n": n, "d": d},
        best=result.best.aggregate,
    )
    return [result.best]


RUNNERS = {
    "capacity-scan": run_capacity_scan,
    "capacity-heatmap": run_capacity_heatmap,
    "lorenz-bench": run_lorenz_bench,
    "quantum-sweep": run_quantum_sweep,
    "optimize": run_optimize,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def run_plot(args) -> int:
    """Re-plot a CSV column selection into an SVG."""
    rows = list(csv.DictReader(open(args.csv)))
    if not rows:
        raise DomainError("empty CSV")
    if args.kind == "line":
        series = {}
        for row in rows:
            key = row.get(args.series, "data") if args.series else "data"
            series.setdefault(key, {"label": key, "x": [], "y": []})
            series[key]["x"].append(float(row[args.x]))
            series[key]["y"].append(float(row[args.y]))
        svg = svgplot.line_plot(
            list(series.values()), xlabel=args.x, ylabel=args.y,
            xlog=args.xlog, ylog=args.ylog,
        )
    else:
        xs = sorted({float(r[args.x]) for r in rows})
        ys = sorted({float(r[args.y]) for r in rows})
        z = [[float("nan")] * len(xs) for _ in ys]
        for row in rows:
            xi = xs.index(float(row[args.x]))
            yi = ys.index(float(row[args.y]))
            z[yi][xi] = float(row[args.z])
        svg = svgplot.heatmap(xs, ys, z, xlabel=args.x, ylabel=args.y,
                              xlog=args.xlog, ylog=args.ylog)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvqrc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seeds", type=int, default=None)
    plot = sub.add_parser("plot")
    plot.add_argument("csv")
    plot.add_argument("--kind", choices=("line", "heatmap"), default="line")
    plot.add_argument("--x", required=True)
    plot.add_argument("--y", required=True)
    plot.add_argument("--z", default=None)
    plot.add_argument("--series", default=None)
    plot.add_argument("--xlog", action="store_true")
    plot.add_argument("--ylog", action="store_true")
    plot.add_argument("--out", default="plot.svg")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "plot":
        return run_plot(args)

    cfg = load_config(args.config)
    exp = cfg["experiment"]
    exp["kind"] = args.command
    if args.out:
        exp["out"] = args.out
    if args.workers is not None:
        exp["workers"] = str(args.workers)
    if args.seed is not None:
        exp["master_seed"] = str(args.seed)
    if args.trials is not None:
        exp["trials"] = str(args.trials)
    if args.seeds is not None:
        exp["seeds"] = str(args.seeds)
    if not exp["out"]:
        print("error: an output directory is required (--out or [experiment] out)", file=sys.stderr)
        return 2

    writer = RunWriter(exp["out"], args.command, cfg)
    mapper = SeedMapper(int(exp["workers"]))
    try:
        RUNNERS[args.command](cfg, writer, mapper)
    finally:
        mapper.close()
        writer.finalize()
    print(f"run complete: {writer.dir}/manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
