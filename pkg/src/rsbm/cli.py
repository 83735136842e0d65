"""Command-line entry point: ``python -m rsbm <command> ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 an experiment
ran but one of its checks failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments as E
from .blocks import Partition, compute_block_stats, read_partition
from .generators import planted_instance
from .graph import (TWIN_STARS_PARTITIONS, DATASETS, dataset_blocks, load_dataset,
                    read_edge_list, twin_stars, write_edge_list)
from .mcmc import MCMCConfig, Trace, anneal_f, run_trials
from .metrics import coverage, modularity, sample_landscape
from .models import (Model, PriorSpec, fit_theta, model_to_dict, objective,
                     objective_terms)

OUT_ENV = "RSBM_OUT_DIR"
DEFAULT_SEED = 0
log = logging.getLogger("rsbm")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _r5(x):
    return round(float(x), 5)


def _seed(value: str) -> int:
    if value == "random":
        return int(np.random.SeedSequence().entropy % (2**31))
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer or 'random'")


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "rsbm-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8",
                    newline="\n")


def _manifest(args, out: Path, command: str, outputs, **extra) -> None:
    doc = {"command": command, "seed": args.seed, "threads": args.threads,
           "arguments": {k: v for k, v in sorted(vars(args).items())
                         if k not in ("func", "out") and not callable(v)},
           "outputs": sorted(outputs) + ["manifest.json"], **extra}
    _write_json(out / "manifest.json", doc)


def _load_graph(args):
    picks = [x for x in (args.graph, args.dataset) if x] + (["twin"] if args.twin_stars else [])
    if len(picks) != 1:
        raise UsageError("give exactly one of --graph, --dataset, --twin-stars")
    if args.twin_stars:
        return twin_stars()
    if args.dataset:
        return load_dataset(args.dataset)
    return read_edge_list(args.graph, simple=args.simple)


def _blocks(args, default=None) -> int:
    if getattr(args, "blocks", None):
        return args.blocks
    if getattr(args, "dataset", None):
        return dataset_blocks(args.dataset)
    if default is not None:
        return default
    raise UsageError("--blocks is required for this graph")


def _model(args, g=None, partition=None) -> Model:
    if args.model == "ssbm":
        return Model.ssbm()
    if args.model == "dcsbm":
        return Model.dcsbm()
    if args.prior == "floor":
        spec = PriorSpec.floor_form(args.f)
    else:
        spec = PriorSpec.alpha_form(args.alpha)
    if getattr(args, "theta", "degree") == "fit":
        if g is None or partition is None:
            raise UsageError("--theta fit needs a graph and a partition")
        spec = spec.with_theta(fit_theta(compute_block_stats(g, partition), spec))
    return Model.rsbm(spec)


# --------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    out = _out_dir(args)
    g, p = planted_instance(args.n_per_block, args.blocks, args.omega0, args.gamma,
                            args.exponent, args.k_min, args.seed,
                            giant_component=args.giant_component, simple=args.simple)
    write_edge_list(g, out / "graph.txt")
    (out / "planted.txt").write_text(p.to_text(g.labels), encoding="utf-8", newline="\n")
    log.info("generated %d nodes, %d edges", g.node_count, g.m)
    _manifest(args, out, "generate", ["graph.txt", "graph.txt.labels.json", "planted.txt"],
              nodes=g.node_count, edges=g.m)
    return 0


def cmd_score(args) -> int:
    g = _load_graph(args)
    if args.twin_partition:
        if not args.twin_stars:
            raise UsageError("--twin-partition only applies to --twin-stars")
        p = Partition(TWIN_STARS_PARTITIONS[args.twin_partition], 2)
    elif args.partition:
        p = read_partition(args.partition, g, args.blocks)
    else:
        raise UsageError("give --partition or --twin-partition")
    if len(p) != g.node_count:
        raise ValueError(f"partition has {len(p)} entries for {g.node_count} nodes")
    model = _model(args, g, p)
    st = compute_block_stats(g, p)
    terms = objective_terms(st, model)
    doc = {"model": args.model, "objective": _r5(terms["objective"]),
           "breakdown": {k: _r5(v) for k, v in terms.items() if k != "objective"},
           "coverage": _r5(coverage(st)), "modularity": _r5(modularity(st)),
           "n_blocks": p.n_blocks, "nodes": g.node_count, "edges": g.m}
    print(json.dumps(doc, sort_keys=True))
    out = _out_dir(args)
    _write_json(out / "score.json", doc)
    _manifest(args, out, "score", ["score.json"])
    return 0


def cmd_infer(args) -> int:
    g = _load_graph(args)
    B = _blocks(args)
    init = read_partition(args.init, g, B) if args.init else None
    if args.theta == "fit":
        raise UsageError("--theta fit is only available for score")
    model = _model(args)
    cfg = MCMCConfig(B, model, epsilon=args.epsilon, sweeps=args.sweeps, seed=args.seed,
                     record_every=args.record_every, record_unit=args.record_unit)
    traces = run_trials(g, cfg, args.trials, parallelism=args.threads, init=init)
    out = _out_dir(args)
    tdir = out / "traces"
    tdir.mkdir(exist_ok=True)
    rows, outputs = [], []
    for t, tr in enumerate(traces):
        name = f"trace_{t:03d}.json"
        (tdir / name).write_text(json.dumps(tr.to_dict()) + "\n", encoding="utf-8", newline="\n")
        outputs.append(f"traces/{name}")
        fs, bs = compute_block_stats(g, tr.final), compute_block_stats(g, tr.best)
        rows.append((t, tr.seed, tr.best_objective, objective(fs, model), coverage(bs),
                     modularity(bs), coverage(fs)))
    (out / "summary.csv").write_text(
        E.table_csv(("trial", "seed", "best_objective", "final_objective", "best_coverage",
                     "best_modularity", "final_coverage"), rows), encoding="utf-8", newline="\n")
    k = int(np.argmax([tr.best_objective for tr in traces]))
    (out / "best_partition.txt").write_text(traces[k].best.to_text(g.labels), encoding="utf-8",
                                            newline="\n")
    log.info("best objective %.5f (trial %d)", traces[k].best_objective, k)
    _manifest(args, out, "infer", outputs + ["summary.csv", "best_partition.txt"],
              model=model_to_dict(model))
    return 0


def _schedule(text: str) -> list[float]:
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        return [round(x, 10) for x in np.arange(lo, hi + step / 2, step)]
    return [float(x) for x in text.split(",")]


def cmd_sweep_f(args) -> int:
    g = _load_graph(args)
    B = _blocks(args)
    cfg = MCMCConfig(B, Model.dcsbm(), epsilon=args.epsilon, sweeps=args.sweeps, seed=args.seed)
    steps = anneal_f(g, _schedule(args.schedule), cfg, prior=f"{args.prior}_form")
    out = _out_dir(args)
    rows = [(s.f, s.objective, s.coverage, s.modularity) for s in steps]
    (out / "f_sweep.csv").write_text(E.table_csv(("f", "objective", "coverage", "modularity"),
                                                 rows), encoding="utf-8", newline="\n")
    _write_json(out / "partitions.json",
                {f"{s.f:.5f}": s.partition.assignment.tolist() for s in steps})
    _manifest(args, out, "sweep-f", ["f_sweep.csv", "partitions.json"])
    return 0


def cmd_landscape(args) -> int:
    g = _load_graph(args)
    files = sorted(Path(args.traces).glob("*.json"))
    if not files:
        raise FileNotFoundError(f"no trace files in {args.traces}")
    traces = [Trace.from_dict(json.loads(f.read_text(encoding="utf-8"))) for f in files]
    if args.theta == "fit":
        raise UsageError("--theta fit is only available for score")
    model = _model(args)
    land = sample_landscape(g, model, traces, max_points=args.max_points, seed=args.seed)
    out = _out_dir(args)
    (out / "landscape.csv").write_text(
        E.table_csv(("x", "y", "objective", "trial", "sweep"), land.rows()),
        encoding="utf-8", newline="\n")
    _manifest(args, out, "landscape", ["landscape.csv"], points=len(land.partitions))
    return 0


def cmd_experiment(args) -> int:
    if args.action == "list":
        for e in E.experiment_ids():
            print(e)
        return 0
    if not args.id:
        raise UsageError("experiment run needs an id")
    if args.id not in E.experiment_ids():
        raise UsageError(f"unknown experiment {args.id!r}; try 'experiment list'")
    res = E.run_experiment(args.id, seed=args.seed, parallelism=args.threads)
    out = _out_dir(args)
    E.write_result(res, out)
    for c in res.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return 0 if res.passed else 3


# ----------------------------------------------------------------- parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                   help="integer seed or 'random' (default %(default)s)")
    p.add_argument("--threads", type=int, default=1, help="parallel chains")
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./rsbm-out)")
    return p


def _graph_opts() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--graph", help="edge-list file")
    p.add_argument("--dataset", choices=sorted(DATASETS), help="bundled network")
    p.add_argument("--twin-stars", action="store_true", help="the 10-node twin-stars graph")
    p.add_argument("--simple", action="store_true",
                   help="collapse multi-edges and drop self-loops when reading --graph")
    p.add_argument("--blocks", type=int, help="number of blocks B")
    return p


def _model_opts() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--model", choices=["ssbm", "dcsbm", "rsbm"], default="dcsbm")
    p.add_argument("--prior", choices=["alpha", "floor"], default="alpha",
                   help="rsbm prior ratio: alpha + (1-alpha)/k, or max(f, 1/k)")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--f", type=float, default=0.85)
    p.add_argument("--theta", choices=["degree", "fit"], default="degree",
                   help="rsbm node budgets: the degrees, or the fitted estimate")
    return p


def build_parser() -> argparse.ArgumentParser:
    common, graph, model = _common(), _graph_opts(), _model_opts()
    ap = argparse.ArgumentParser(prog="rsbm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("generate", parents=[common], help="sample a planted-partition graph")
    p.add_argument("--n-per-block", type=int, default=10)
    p.add_argument("--blocks", type=int, default=2)
    p.add_argument("--omega0", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=10.0)
    p.add_argument("--exponent", type=float, default=2.5)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--giant-component", action="store_true")
    p.add_argument("--simple", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("score", parents=[common, graph, model], help="objective of a partition")
    p.add_argument("--partition", help="JSON array or 'node block' file")
    p.add_argument("--twin-partition", choices=sorted(TWIN_STARS_PARTITIONS))
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("infer", parents=[common, graph, model], help="run MCMC chains")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--record-unit", choices=["sweep", "move"], default="sweep")
    p.add_argument("--init", help="initial partition file")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("sweep-f", parents=[common, graph], help="warm-started sweep over f")
    p.add_argument("--schedule", default="0.1:0.95:0.05", help="lo:hi:step or comma list")
    p.add_argument("--prior", choices=["alpha", "floor"], default="floor")
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.set_defaults(func=cmd_sweep_f)

    p = sub.add_parser("landscape", parents=[common, graph, model],
                       help="MDS projection of sampled partitions")
    p.add_argument("--traces", required=True, help="directory of trace JSON files")
    p.add_argument("--max-points", type=int, default=2000)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("experiment", parents=[common], help="run a scripted experiment")
    p.add_argument("action", choices=["run", "list"])
    p.add_argument("id", nargs="?")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not getattr(args, "func", None):
        ap.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"rsbm: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failures become exit code 1
        log.debug("failure", exc_info=True)
        print(f"rsbm: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
