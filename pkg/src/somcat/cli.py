"""Command-line front end.

Subcommands cover the whole pipeline: ``ingest`` and ``tables`` prepare the
data, ``kmca`` / ``kmca-ind`` / ``kdisj`` train maps, ``macro`` cuts the
second-level clustering, ``pies`` crosses a map with an external variable,
``render`` redraws stored results and ``report`` chains everything over
several seeds and summarizes the stability of the runs.

Conventions shared by all subcommands:

* artifacts land in ``--out``, else ``$SOMCAT_OUTDIR``, else the current
  directory (for derived artifacts: next to their input);
* run artifacts are named ``<dataset>.<algorithm>.<seed>.<kind>``;
* ``--config FILE`` loads a JSON object whose keys override the flags;
* ``--json`` prints a machine-readable summary to stdout;
* failures print ``error:<category>: <message>`` to stderr and exit 1
  (argparse keeps its usual exit 2 for malformed arguments).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import jsonio
from .analyses import ALGORITHMS, AnalysisResult, deviations, run_analysis
from .crossing import cross, external_from_csv, external_from_dataset
from .dataset import CategoricalDataset, ingest_csv, load_schema, to_disjunctive
from .errors import ConfigError, SomcatError
from .macrocluster import MacroClassing, cut, unit_weights, ward_cluster
from .marriages import marriage_dataset
from .render import MapRenderSpec, render_map, render_pies, render_text
from .som import SomModel, Topology, TrainConfig
from .tables import burt, corrected_burt, corrected_disjunctive

ENV_OUTDIR = "SOMCAT_OUTDIR"


# ---------------------------------------------------------------- helpers


def _grid_arg(text: str) -> str:
    parts = text.lower().split("x")
    try:
        if len(parts) != 2:
            raise ValueError(text)
        rows, cols = int(parts[0]), int(parts[1])
        Topology.grid(rows, cols)
    except (ValueError, SomcatError):
        raise argparse.ArgumentTypeError(
            f"bad grid {text!r} (want ROWSxCOLS with positive sides, >= 2 units)"
        ) from None
    return f"{rows}x{cols}"


def _topology(args) -> Topology:
    if getattr(args, "string", None):
        return Topology.string(int(args.string))
    try:
        rows, cols = (int(p) for p in str(args.grid).lower().split("x"))
    except ValueError:
        raise ConfigError(f"bad grid {args.grid!r}") from None
    return Topology.grid(rows, cols)


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Overlay a JSON config file on the parsed flags (file wins)."""
    path = getattr(args, "config", None)
    if not path:
        return args
    data = jsonio.load(path)
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest in ("func", "command", "config") or not hasattr(args, dest):
            raise ConfigError(f"config key {key!r} does not match any option")
        setattr(args, dest, value)
    return args


def _outdir(args, fallback: str | None = None) -> Path:
    out = (
        getattr(args, "out", None)
        or os.environ.get(ENV_OUTDIR)
        or fallback
        or "."
    )
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_dataset(args) -> tuple[str, CategoricalDataset]:
    src = args.data
    if src == "builtin:marriages":
        name, ds = "marriages", marriage_dataset()
    else:
        path = Path(src)
        if path.suffix == ".json":
            name = path.stem.removesuffix(".dataset")
            ds = CategoricalDataset.from_json(jsonio.load(path))
        else:
            schema = load_schema(args.schema) if args.schema else "infer"
            name, ds = path.stem, ingest_csv(path, schema)
    if getattr(args, "name", None):
        name = args.name
    return name, ds


def _load_result(
    result_path: str, model_path: str | None = None
) -> AnalysisResult:
    data = jsonio.load(result_path)
    model = None
    candidate = model_path or data.get("model_file")
    if candidate:
        p = Path(candidate)
        if not p.is_absolute():
            p = Path(result_path).parent / p
        if p.exists():
            model = SomModel.load(p)
        elif model_path:
            raise ConfigError(f"model file {model_path} not found")
    return AnalysisResult.from_json(data, model=model)


def _result_base(result_path: str) -> str:
    name = Path(result_path).name
    return name.removesuffix(".json").removesuffix(".result")


def _emit(args, summary: dict, human_lines: list[str]) -> None:
    if args.json:
        sys.stdout.write(jsonio.dumps(summary))
    else:
        for line in human_lines:
            print(line)


def _write(outdir: Path, filename: str, text: str, files: list[str]) -> None:
    jsonio.write_atomic(outdir / filename, text)
    files.append(filename)


def _render_spec(args) -> MapRenderSpec:
    return MapRenderSpec(
        cell_size=int(getattr(args, "cell_size", 120)),
        label_source=getattr(args, "labels", "auto"),
    )


# ---------------------------------------------------------------- training


def _train_job(payload) -> AnalysisResult:
    algorithm, ds_json, topo_json, cfg_json = payload
    return run_analysis(
        algorithm,
        CategoricalDataset.from_json(ds_json),
        Topology.from_json(topo_json),
        TrainConfig.from_json(cfg_json),
    )


def _run_seeds(
    algorithm: str,
    ds: CategoricalDataset,
    topology: Topology,
    args,
    seeds: list[int],
) -> list[AnalysisResult]:
    payloads = [
        (
            algorithm,
            ds.to_json(),
            topology.to_json(),
            TrainConfig(
                epsilon0=float(args.eps0),
                c0=float(args.c0),
                t_max=None if args.iters is None else int(args.iters),
                seed=seed,
            ).to_json(),
        )
        for seed in seeds
    ]
    workers = args.workers or min(len(seeds), os.cpu_count() or 1, 4)
    if int(workers) > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            return list(pool.map(_train_job, payloads))
    return [_train_job(p) for p in payloads]


def _write_run(
    outdir: Path,
    name: str,
    result: AnalysisResult,
    ds: CategoricalDataset,
    args,
    macro_k,
):
    """Persist one run's artifacts; returns (base, files, macro, deviations)."""
    seed = result.provenance["config"]["seed"]
    base = f"{name}.{result.algorithm}.{seed}"
    files: list[str] = []
    model_file = f"{base}.model.json"
    _write(outdir, model_file, jsonio.dumps(result.model.to_json()), files)
    _write(
        outdir,
        f"{base}.result.json",
        jsonio.dumps(result.to_json(model_file=model_file)),
        files,
    )

    macro = None
    if macro_k is not None:
        weights = unit_weights(result, uniform=bool(args.uniform_weights))
        dendro = ward_cluster(result.model, weights=weights)
        k = min(4, dendro.n_leaves) if macro_k == "auto" else int(macro_k)
        macro = cut(dendro, k)
        _write(outdir, f"{base}.macro.json", jsonio.dumps(macro.to_json()), files)

    dev = None
    if result.individuals is not None:
        dev = deviations(result, ds)
        _write(
            outdir, f"{base}.deviations.json", jsonio.dumps(dev.to_json()), files
        )

    spec = _render_spec(args)
    mode = args.render
    if mode in ("svg", "both"):
        _write(outdir, f"{base}.svg", render_map(result, macro, spec), files)
    if mode in ("text", "both"):
        _write(outdir, f"{base}.txt", render_text(result, macro), files)
    return base, files, macro, dev


def _run_summary(base, result, files, macro, dev) -> dict:
    counts = (
        result.individuals.counts
        if result.individuals is not None
        else result.modalities.counts
    )
    out = {
        "base": base,
        "algorithm": result.algorithm,
        "seed": result.provenance["config"]["seed"],
        "t_max": result.provenance["config"]["t_max"],
        "qe_initial": result.qe_log[0][1],
        "qe_final": result.qe_log[-1][1],
        "occupied_units": int(np.count_nonzero(counts)),
        "files": files,
    }
    if macro is not None:
        out["macro"] = {"k": macro.k, "all_connected": all(macro.connected)}
    if dev is not None:
        out["deviations"] = {
            "own_positive": int(np.sum(dev.own_deviation > 0)),
            "modalities": len(dev.modalities),
        }
    return out


def stability_report(
    results: list[AnalysisResult],
    macros: list[MacroClassing] | None = None,
    ds: CategoricalDataset | None = None,
) -> dict:
    """How stably items co-locate across several runs of one analysis.

    Modalities get dense co-location frequency matrices (same unit; same
    macro-class when cuts are given).  Individuals are first collapsed into
    groups with identical response patterns, and only group pairs that ever
    share a unit are reported.
    """
    if not results:
        raise ConfigError("stability needs at least one run")
    algo = results[0].algorithm
    sha = results[0].provenance["dataset_sha256"]
    labels = tuple(results[0].modalities.labels)
    for r in results:
        if r.algorithm != algo or r.provenance["dataset_sha256"] != sha:
            raise ConfigError("stability runs must share algorithm and dataset")
        if tuple(r.modalities.labels) != labels:
            raise ConfigError("stability runs must share the modality list")
    if macros is not None and len(macros) != len(results):
        raise ConfigError("need one macro-classing per run (or none)")

    n = len(results)
    m = len(labels)
    co_unit = np.zeros((m, m))
    co_class = np.zeros((m, m))
    for idx, r in enumerate(results):
        units = r.modalities.units
        co_unit += units[:, np.newaxis] == units[np.newaxis, :]
        if macros is not None:
            cls = macros[idx].labels[units]
            co_class += cls[:, np.newaxis] == cls[np.newaxis, :]
    out = {
        "algorithm": algo,
        "dataset_sha256": sha,
        "runs": n,
        "modalities": list(labels),
        "co_unit_frequency": (co_unit / n).tolist(),
    }
    if macros is not None:
        out["co_class_frequency"] = (co_class / n).tolist()

    if ds is not None and results[0].individuals is not None:
        disj = to_disjunctive(ds)
        for r in results:
            if tuple(r.individuals.labels) != tuple(disj.individuals):
                raise ConfigError("stability dataset does not match the runs")
        order: list[str] = []
        first_row: list[int] = []
        seen: dict[str, int] = {}
        sizes: dict[str, int] = {}
        for i in range(disj.n_individuals):
            sig = "+".join(
                disj.names[j] for j in np.flatnonzero(disj.entries[i])
            )
            if sig not in seen:
                seen[sig] = len(order)
                order.append(sig)
                first_row.append(i)
            sizes[sig] = sizes.get(sig, 0) + 1
        rep = np.asarray(first_row)
        g = len(order)
        co = np.zeros((g, g))
        for r in results:
            u = r.individuals.units[rep]
            co += u[:, np.newaxis] == u[np.newaxis, :]
        co /= n
        pairs = {}
        for a in range(g):
            for b in range(a + 1, g):
                if co[a, b] > 0:
                    pairs[f"{order[a]}|{order[b]}"] = float(co[a, b])
        out["individual_groups"] = {sig: sizes[sig] for sig in order}
        out["individual_pair_co_unit"] = pairs
    return out


# ------------------------------------------------------------- subcommands


def cmd_ingest(args) -> int:
    name, ds = _load_dataset(args)
    outdir = _outdir(args)
    files: list[str] = []
    _write(outdir, f"{name}.dataset.json", jsonio.dumps(ds.to_json()), files)
    summary = {
        "dataset": name,
        "individuals": ds.n_individuals,
        "variables": ds.n_variables,
        "modalities": ds.n_modalities,
        "sha256": ds.sha256(),
        "files": files,
    }
    _emit(args, summary, [f"wrote {outdir / f}" for f in files])
    return 0


def cmd_tables(args) -> int:
    name, ds = _load_dataset(args)
    outdir = _outdir(args)
    disj = to_disjunctive(ds)
    bt = burt(disj)
    bc = corrected_burt(bt)
    dc = corrected_disjunctive(disj)
    files: list[str] = []
    payload = {
        "dataset": name,
        "dataset_sha256": ds.sha256(),
        "disjunctive": disj.to_json(),
        "burt": {
            "names": list(bt.names),
            "counts": bt.counts.tolist(),
            "entries": bt.entries.tolist(),
        },
        "burt_corrected": bc.entries.tolist(),
        "disjunctive_corrected": dc.entries.tolist(),
    }
    _write(outdir, f"{name}.tables.json", jsonio.dumps(payload), files)
    k, n = ds.n_variables, ds.n_individuals
    summary = {
        "dataset": name,
        "n_individuals": n,
        "n_variables": k,
        "n_modalities": ds.n_modalities,
        "burt_total": int(bt.entries.sum()),
        "expected_burt_total": k * k * n,
        "files": files,
    }
    _emit(args, summary, [f"wrote {outdir / f}" for f in files])
    return 0


def cmd_train(args, algorithm: str) -> int:
    name, ds = _load_dataset(args)
    outdir = _outdir(args)
    topology = _topology(args)
    seeds = [int(args.seed) + i for i in range(int(args.seeds))]
    results = _run_seeds(algorithm, ds, topology, args, seeds)
    summaries, macros, files_all = [], [], []
    for result in results:
        base, files, macro, dev = _write_run(
            outdir, name, result, ds, args, args.macro
        )
        summaries.append(_run_summary(base, result, files, macro, dev))
        macros.append(macro)
        files_all.extend(files)
    stability = None
    if len(results) > 1:
        stability = stability_report(
            results,
            macros if all(m is not None for m in macros) else None,
            ds=ds,
        )
        fname = f"{name}.{algorithm}.stability.json"
        _write(outdir, fname, jsonio.dumps(stability), files_all)
    summary = {"dataset": name, "runs": summaries}
    if stability is not None:
        summary["stability_file"] = f"{name}.{algorithm}.stability.json"
    _emit(args, summary, [f"wrote {outdir / f}" for f in files_all])
    return 0


def cmd_macro(args) -> int:
    result = _load_result(args.result, args.model)
    if result.model is None:
        raise ConfigError("macro clustering needs the trained model file")
    outdir = _outdir(args, fallback=str(Path(args.result).parent))
    base = _result_base(args.result)
    weights = unit_weights(result, uniform=bool(args.uniform_weights))
    dendro = ward_cluster(result.model, weights=weights)
    macro = cut(dendro, int(args.macro))
    files: list[str] = []
    _write(outdir, f"{base}.macro.json", jsonio.dumps(macro.to_json()), files)
    _write(outdir, f"{base}.dendrogram.json", jsonio.dumps(dendro.to_json()), files)
    spec = _render_spec(args)
    if args.render in ("svg", "both"):
        _write(outdir, f"{base}.svg", render_map(result, macro, spec), files)
    if args.render in ("text", "both"):
        _write(outdir, f"{base}.txt", render_text(result, macro), files)
    summary = {
        "base": base,
        "k": macro.k,
        "classes": macro.to_json()["classes"],
        "connected": macro.connected,
        "files": files,
    }
    _emit(args, summary, [f"wrote {outdir / f}" for f in files])
    return 0


def cmd_pies(args) -> int:
    result = _load_result(args.result)
    if result.individuals is None:
        raise ConfigError("pies need an analysis that mapped the individuals")
    outdir = _outdir(args, fallback=str(Path(args.result).parent))
    base = _result_base(args.result)
    if args.external:
        if not args.column:
            raise ConfigError("--external needs --column NAME")
        external = external_from_csv(args.external, args.column)
    else:
        if not args.variable:
            raise ConfigError("pies need --variable NAME (or --external FILE)")
        _, ds = _load_dataset(args)
        if ds.sha256() != result.provenance["dataset_sha256"]:
            raise ConfigError("dataset does not match the one the map was trained on")
        external = external_from_dataset(ds, args.variable)
    pies = cross(result.individuals, external, result.topology)
    files: list[str] = []
    _write(
        outdir, f"{base}.pies.{external.name}.json", jsonio.dumps(pies.to_json()), files
    )
    if args.render != "none":
        _write(outdir, f"{base}.pies.{external.name}.svg", render_pies(pies), files)
    summary = {
        "base": base,
        "variable": external.name,
        "labels": list(pies.labels),
        "global_counts": pies.global_counts.tolist(),
        "populations": pies.populations.tolist(),
        "files": files,
    }
    _emit(args, summary, [f"wrote {outdir / f}" for f in files])
    return 0


def cmd_render(args) -> int:
    result = _load_result(args.result)
    outdir = _outdir(args, fallback=str(Path(args.result).parent))
    base = _result_base(args.result)
    macro = None
    if args.macro_file:
        macro = MacroClassing.from_json(jsonio.load(args.macro_file))
    spec = _render_spec(args)
    files: list[str] = []
    if args.render in ("svg", "both"):
        _write(outdir, f"{base}.svg", render_map(result, macro, spec), files)
    if args.render in ("text", "both"):
        _write(outdir, f"{base}.txt", render_text(result, macro), files)
    _emit(
        args,
        {"base": base, "files": files},
        [f"wrote {outdir / f}" for f in files],
    )
    return 0


def cmd_report(args) -> int:
    name, ds = _load_dataset(args)
    outdir = _outdir(args)
    topology = _topology(args)
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    for algo in algorithms:
        if algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algo!r}")
    seeds = [int(args.seed) + i for i in range(int(args.seeds))]
    macro_k = "auto" if args.macro is None else int(args.macro)

    per_algo: dict[str, dict] = {}
    rows: list[dict] = []
    files_all: list[str] = []
    for algo in algorithms:
        results = _run_seeds(algo, ds, topology, args, seeds)
        summaries, macros = [], []
        for result in results:
            base, files, macro, dev = _write_run(
                outdir, name, result, ds, args, macro_k
            )
            s = _run_summary(base, result, files, macro, dev)
            summaries.append(s)
            macros.append(macro)
            files_all.extend(files)
            rows.append(
                {
                    "algorithm": algo,
                    "seed": s["seed"],
                    "t_max": s["t_max"],
                    "qe_initial": s["qe_initial"],
                    "qe_final": s["qe_final"],
                    "occupied_units": s["occupied_units"],
                    "macro_k": macro.k if macro else "",
                    "macro_all_connected": all(macro.connected) if macro else "",
                    "own_positive_deviations": (
                        s["deviations"]["own_positive"] if dev is not None else ""
                    ),
                }
            )
        stability = None
        if len(results) > 1:
            stability = stability_report(
                results,
                macros if all(m is not None for m in macros) else None,
                ds=ds,
            )
        per_algo[algo] = {"runs": summaries, "stability": stability}

    report = {
        "dataset": name,
        "dataset_sha256": ds.sha256(),
        "topology": topology.to_json(),
        "seeds": seeds,
        "algorithms": per_algo,
    }
    files: list[str] = []
    _write(outdir, f"{name}.report.json", jsonio.dumps(report), files)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    _write(outdir, f"{name}.report.csv", buf.getvalue(), files)
    files_all.extend(files)
    summary = {"dataset": name, "report": f"{name}.report.json", "runs": rows}
    _emit(args, summary, [f"wrote {outdir / f}" for f in files_all])
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="somcat",
        description="Map-based analysis of categorical survey data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    data_p = argparse.ArgumentParser(add_help=False)
    data_p.add_argument(
        "--data",
        default="builtin:marriages",
        help="CSV file, <name>.dataset.json, or builtin:marriages",
    )
    data_p.add_argument("--schema", default=None, help="schema JSON for CSV ingest")
    data_p.add_argument("--name", default=None, help="override the dataset name")

    io_p = argparse.ArgumentParser(add_help=False)
    io_p.add_argument("--out", default=None, help=f"output dir (or ${ENV_OUTDIR})")
    io_p.add_argument("--json", action="store_true", help="print a JSON summary")
    io_p.add_argument("--config", default=None, help="JSON file overriding flags")

    render_p = argparse.ArgumentParser(add_help=False)
    render_p.add_argument(
        "--labels",
        choices=("auto", "modalities", "modalities+counts", "none"),
        default="auto",
    )
    render_p.add_argument("--cell-size", type=int, default=120)

    train_p = argparse.ArgumentParser(add_help=False)
    train_p.add_argument("--grid", type=_grid_arg, default="4x4", help="ROWSxCOLS")
    train_p.add_argument("--string", type=int, default=None, help="1-d map length")
    train_p.add_argument("--iters", type=int, default=None, help="training steps")
    train_p.add_argument("--eps0", type=float, default=0.5)
    train_p.add_argument("--c0", type=float, default=1.0)
    train_p.add_argument("--seed", type=int, default=0)
    train_p.add_argument("--seeds", type=int, default=1, help="run seed..seed+N-1")
    train_p.add_argument("--workers", type=int, default=None)
    train_p.add_argument("--macro", type=int, default=None, help="macro-class count")
    train_p.add_argument("--uniform-weights", action="store_true")
    train_p.add_argument(
        "--render", choices=("svg", "text", "both", "none"), default="svg"
    )

    p = sub.add_parser("ingest", parents=[data_p, io_p], help="normalize a dataset")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser(
        "tables", parents=[data_p, io_p], help="disjunctive/Burt/corrected tables"
    )
    p.set_defaults(func=cmd_tables)

    for algo, blurb in (
        ("kmca", "map the modalities (corrected co-occurrence rows)"),
        ("kmca-ind", "map the individuals, place modalities by mean vector"),
        ("kdisj", "map individuals and modalities simultaneously"),
    ):
        p = sub.add_parser(algo, parents=[data_p, io_p, train_p, render_p], help=blurb)
        p.set_defaults(func=lambda a, _algo=algo: cmd_train(a, _algo))

    p = sub.add_parser(
        "macro", parents=[io_p, render_p], help="cut the code-vector clustering"
    )
    p.add_argument("--result", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--macro", type=int, required=True, help="number of classes")
    p.add_argument("--uniform-weights", action="store_true")
    p.add_argument(
        "--render", choices=("svg", "text", "both", "none"), default="none"
    )
    p.set_defaults(func=cmd_macro)

    p = sub.add_parser(
        "pies", parents=[data_p, io_p], help="cross the map with a variable"
    )
    p.add_argument("--result", required=True)
    p.add_argument("--variable", default=None, help="dataset variable to cross")
    p.add_argument("--external", default=None, help="CSV with an external column")
    p.add_argument("--column", default=None, help="column name in --external")
    p.add_argument("--render", choices=("svg", "none"), default="svg")
    p.set_defaults(func=cmd_pies)

    p = sub.add_parser(
        "render", parents=[io_p, render_p], help="redraw a stored result"
    )
    p.add_argument("--result", required=True)
    p.add_argument("--macro-file", default=None)
    p.add_argument(
        "--render", choices=("svg", "text", "both"), default="svg"
    )
    p.set_defaults(func=cmd_render)

    p = sub.add_parser(
        "report",
        parents=[data_p, io_p, train_p, render_p],
        help="full pipeline over several seeds",
    )
    p.add_argument(
        "--algorithms", default="kmca,kmca-ind,kdisj", help="comma-separated"
    )
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args = _apply_config(args)
        return args.func(args)
    except SomcatError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
