"""Manifest-driven reproductions of the block-model experiments.

Each experiment function returns an :class:`ExperimentResult` holding its
manifest, CSV tables, JSON documents and a list of named checks. Nothing is
written to disk until :func:`write_result` is called, so tests can inspect
results directly.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .blocks import Partition, compute_block_stats
from .generators import planted_instance
from .graph import (TWIN_STARS_PARTITIONS, DATASETS, karate_groundtruth, load_dataset,
                    sparsify, twin_stars)
from .mcmc import MCMCConfig, anneal_f, plateaus, run_trials
from .metrics import coverage, modularity, partition_distance, sample_landscape
from .models import Model, PriorSpec, model_to_dict, objective


@dataclass
class ExperimentManifest:
    """Everything needed to regenerate an experiment's outputs."""

    experiment: str
    source: dict
    model: dict
    mcmc: dict
    seed: int
    outputs: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentManifest":
        return cls(**json.loads(text))


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)


@dataclass
class ExperimentResult:
    manifest: ExperimentManifest
    tables: dict = field(default_factory=dict)      # name -> (header, rows)
    documents: dict = field(default_factory=dict)   # name -> JSON-able object
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.5f}"
    return str(x)


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def write_result(result: ExperimentResult, out_dir) -> list[Path]:
    """Write tables as CSV, documents as JSON and the manifest; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (header, rows) in result.tables.items():
        p = out / f"{name}.csv"
        p.write_text(table_csv(header, rows), encoding="utf-8", newline="\n")
        paths.append(p)
    for name, doc in result.documents.items():
        p = out / f"{name}.json"
        p.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8",
                     newline="\n")
        paths.append(p)
    result.manifest.outputs = sorted(p.name for p in paths) + ["manifest.json"]
    doc = json.loads(result.manifest.to_json())
    doc["checks"] = [asdict(c) for c in result.checks]
    mp = out / "manifest.json"
    mp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8",
                  newline="\n")
    return paths + [mp]


def _mcmc_dict(cfg: MCMCConfig) -> dict:
    return {"n_blocks": cfg.n_blocks, "epsilon": cfg.epsilon, "sweeps": cfg.sweeps,
            "seed": cfg.seed, "record_every": cfg.record_every}


# ------------------------------------------------------------- twin stars

TWIN_STARS_ROWS = ("SSBM", "DCSBM", "RSBM(alpha=0.3)", "RSBM(alpha=0.6)", "RSBM(alpha=0.9)")
TWIN_STARS_COLUMNS = ("core-periphery", "twisted", "assortative")
# column expected to win each row
TWIN_STARS_ARGMAX = (0, 1, 2, 2, 2)


def twin_stars_models() -> list[Model]:
    return [Model.ssbm(), Model.dcsbm()] + [Model.rsbm(PriorSpec.alpha_form(a))
                                            for a in (0.3, 0.6, 0.9)]


def twin_stars_table() -> np.ndarray:
    """5 x 3 objective table: models by rows, partitions by columns."""
    g = twin_stars()
    parts = [Partition(TWIN_STARS_PARTITIONS[c], 2) for c in TWIN_STARS_COLUMNS]
    stats = [compute_block_stats(g, p) for p in parts]
    return np.array([[objective(s, m) for s in stats] for m in twin_stars_models()])


def twin_stars_experiment() -> ExperimentResult:
    T = twin_stars_table()
    arg = T.argmax(axis=1)
    rows = [(name, *T[i], TWIN_STARS_COLUMNS[arg[i]]) for i, name in enumerate(TWIN_STARS_ROWS)]
    man = ExperimentManifest("twin-stars-table", {"graph": "twin-stars"},
                             {"rows": list(TWIN_STARS_ROWS)}, {}, 0,
                             params={"columns": list(TWIN_STARS_COLUMNS)})
    ok = tuple(int(a) for a in arg) == TWIN_STARS_ARGMAX
    return ExperimentResult(
        man, {"twin_stars_table": (("model", *TWIN_STARS_COLUMNS, "argmax"), rows)},
        checks=[Check("row argmax pattern", ok, f"argmax columns {arg.tolist()}")])


# ------------------------------------------------------------ convergence

CONVERGENCE_INSTANCE = {"n_per_block": 10, "n_blocks": 2, "omega0": 0.01, "gamma": 10.0,
                        "exponent": 2.5, "k_min": 1, "seed": 0, "giant_component": True}


def convergence_models() -> dict:
    return {"dcsbm": Model.dcsbm(), "rsbm": Model.rsbm(PriorSpec.alpha_form(0.8))}


def convergence_experiment(model: str = "rsbm", n_trials: int = 20, sweeps: int = 300,
                           epsilon: float = 0.1, seed: int = 0, within: int = 150,
                           instance: dict | None = None, landscape_points: int = 2000,
                           parallelism: int = 1, tol: float = 1e-6) -> ExperimentResult:
    """Independent chains from random partitions on the planted instance.

    Trials are grouped into plateaus by their best objective. For ``rsbm`` the
    checks ask for a single plateau reached by every trial within ``within``
    sweeps; for ``dcsbm`` for several plateaus with a minority at the top.
    """
    models = convergence_models()
    if model not in models:
        raise KeyError(f"model must be one of {sorted(models)}")
    inst = dict(CONVERGENCE_INSTANCE, **(instance or {}))
    g, planted = planted_instance(**inst)
    m = models[model]
    cfg = MCMCConfig(2, m, epsilon=epsilon, sweeps=sweeps, seed=seed)
    traces = run_trials(g, cfg, n_trials, parallelism=parallelism)
    best = np.array([t.best_objective for t in traces])
    levels = plateaus(best, tol)
    top = levels[0][0]
    reach = [t.first_reach(top, tol) for t in traces]
    planted_obj = objective(compute_block_stats(g, planted), m)
    top_part = traces[int(np.argmax(best))].best
    trial_rows = [(t, traces[t].seed, best[t], -1 if reach[t] is None else reach[t],
                   partition_distance(traces[t].best, planted)) for t in range(n_trials)]
    plateau_rows = [(lvl, cnt) for lvl, cnt in levels]

    if model == "rsbm":
        checks = [Check("single plateau", len(levels) == 1, f"{len(levels)} plateaus"),
                  Check(f"all trials at top within {within} sweeps",
                        all(r is not None and r <= within for r in reach),
                        f"first-reach sweeps {reach}")]
    else:
        checks = [Check("several plateaus", len(levels) >= 2, f"{len(levels)} plateaus"),
                  Check("minority at top", levels[0][1] < n_trials / 2,
                        f"{levels[0][1]} of {n_trials} at the top")]

    tables = {"trials": (("trial", "seed", "best_objective", "first_reach_top",
                          "distance_to_planted"), trial_rows),
              "plateaus": (("objective", "trials"), plateau_rows)}
    if landscape_points > 0:
        land = sample_landscape(g, m, traces, max_points=landscape_points, seed=seed)
        tables["landscape"] = (("x", "y", "objective", "trial", "sweep"), land.rows())
    docs = {"traces": [t.to_dict() for t in traces],
            "summary": {"plateaus": [[round(l, 5), c] for l, c in levels],
                        "planted_objective": round(planted_obj, 5),
                        "top_distance_to_planted": partition_distance(top_part, planted),
                        "nodes": g.node_count, "edges": g.m}}
    man = ExperimentManifest(f"convergence-{model}", {"generator": "planted_instance", **inst},
                             model_to_dict(m), _mcmc_dict(cfg), seed,
                             params={"n_trials": n_trials, "within": within,
                                     "plateau_tol": tol, "landscape_points": landscape_points,
                                     "interpolation_pairs": "uniform random"})
    return ExperimentResult(man, tables, docs, checks)


# ------------------------------------------------------ coverage vs density

def coverage_clusters(values, gap: float = 0.15) -> list[np.ndarray]:
    """Split sorted values wherever consecutive ones differ by at least ``gap``."""
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        return []
    cuts = np.flatnonzero(np.diff(v) >= gap) + 1
    return np.split(v, cuts)


def coverage_vs_density(network: str, n_trials: int = 20, sweeps: int = 2000,
                        fractions=(0.0, 0.1, 0.2, 0.3), repetitions: int = 2,
                        epsilon: float = 0.1, seed: int = 0, alpha: float = 0.8,
                        gap: float = 0.15, band: float = 0.1,
                        parallelism: int = 1) -> ExperimentResult:
    """Final-partition coverage of every trial on sparsified copies of a network.

    Repetition ``r`` of removal fraction ``x`` drops ``round(x m)`` edges with
    seed ``r`` and runs its chains from seed ``seed + 1000 (r + 1) + 100 j``
    for fraction index ``j``.
    """
    if network not in DATASETS:
        raise KeyError(f"unknown dataset {network!r}")
    g0 = load_dataset(network)
    B = DATASETS[network][1]
    models = {"dcsbm": Model.dcsbm(), "rsbm": Model.rsbm(PriorSpec.alpha_form(alpha))}
    rows = []
    cov = {k: [] for k in models}
    for j, frac in enumerate(fractions):
        for r in range(repetitions):
            g = sparsify(g0, int(round(frac * g0.m)), seed=r) if frac > 0 else g0
            mean_deg = 2.0 * g.m / g.node_count
            for name, m in models.items():
                cfg = MCMCConfig(B, m, epsilon=epsilon, sweeps=sweeps,
                                 seed=seed + 1000 * (r + 1) + 100 * j)
                for t, tr in enumerate(run_trials(g, cfg, n_trials, parallelism=parallelism)):
                    c = coverage(compute_block_stats(g, tr.final))
                    cov[name].append(c)
                    rows.append((network, frac, r, mean_deg, name, t, c))
    dc = coverage_clusters(cov["dcsbm"], gap)
    rs = coverage_clusters(cov["rsbm"], gap)
    checks = [
        Check("dcsbm coverages bimodal", len(dc) >= 2,
              f"{len(dc)} clusters, ranges {[(round(float(c[0]), 3), round(float(c[-1]), 3)) for c in dc]}"),
        Check("rsbm coverages in one high cluster",
              len(rs) == 1 and rs[0][0] >= dc[-1][0] - band,
              f"{len(rs)} clusters, ranges {[(round(float(c[0]), 3), round(float(c[-1]), 3)) for c in rs]}"),
    ]
    man = ExperimentManifest(f"coverage-vs-density-{network}", {"dataset": network},
                             {k: model_to_dict(v) for k, v in models.items()},
                             {"n_blocks": B, "epsilon": epsilon, "sweeps": sweeps,
                              "n_trials": n_trials}, seed,
                             params={"fractions": list(fractions), "repetitions": repetitions,
                                     "gap": gap, "band": band})
    return ExperimentResult(
        man, {"coverage": (("dataset", "removed_fraction", "repetition", "mean_degree",
                            "model", "trial", "coverage"), rows)}, checks=checks)


# ---------------------------------------------------------------- f sweep

def default_f_schedule() -> list[float]:
    return [round(x, 2) for x in np.arange(0.10, 0.951, 0.05)]


def best_of_trials(g, model: Model, n_blocks: int, n_trials: int = 20, sweeps: int = 2000,
                   epsilon: float = 0.1, seed: int = 0, parallelism: int = 1):
    """Best-seen partition over independent chains; returns ``(partition, objective)``."""
    cfg = MCMCConfig(n_blocks, model, epsilon=epsilon, sweeps=sweeps, seed=seed)
    traces = run_trials(g, cfg, n_trials, parallelism=parallelism)
    k = int(np.argmax([t.best_objective for t in traces]))
    return traces[k].best, traces[k].best_objective


def _transition(fs, values, min_jump: float):
    jumps = np.diff(values)
    if len(jumps) == 0 or jumps.max() < min_jump:
        return None
    return float(fs[int(np.argmax(jumps)) + 1])


def f_sweep_experiment(network: str = "karate", schedule=None, sweeps: int = 2000,
                       epsilon: float = 0.1, seed: int = 0, check_f: float = 0.85,
                       n_trials: int = 20, window=(0.6, 0.85), min_jump: float = 0.1,
                       parallelism: int = 1) -> ExperimentResult:
    """Warm-started sweep over ``f`` with the floor-form prior and theta = k.

    Also runs ``n_trials`` independent chains at ``check_f``; on Karate the best
    of them is compared with the factional split.
    """
    if network not in DATASETS:
        raise KeyError(f"unknown dataset {network!r}")
    g = load_dataset(network)
    B = DATASETS[network][1]
    fs = list(default_f_schedule() if schedule is None else schedule)
    base = MCMCConfig(B, Model.dcsbm(), epsilon=epsilon, sweeps=sweeps, seed=seed)
    steps = anneal_f(g, fs, base, prior="floor_form")
    gt = karate_groundtruth(g) if network == "karate" else None
    rows = []
    for st in steps:
        d = "" if gt is None else round(partition_distance(st.partition, gt) * g.node_count)
        rows.append((st.f, st.objective, st.coverage, st.modularity, d))
    cov = np.array([s.coverage for s in steps])
    mod = np.array([s.modularity for s in steps])
    tol = 1e-9
    monotone = bool(np.all(np.diff(cov) >= -tol) and np.all(np.diff(mod) >= -tol))
    fc = _transition(np.array(fs), cov, min_jump)
    checks = [Check("coverage and modularity nondecreasing in f", monotone,
                    f"coverage {np.round(cov, 3).tolist()}"),
              Check(f"transition inside {list(window)}",
                    fc is not None and window[0] <= fc <= window[1],
                    f"largest coverage jump at f = {fc}")]
    docs = {"partitions": {f"{s.f:.2f}": s.partition.assignment.tolist() for s in steps}}
    m_check = Model.rsbm(PriorSpec.floor_form(check_f))
    best, best_obj = best_of_trials(g, m_check, B, n_trials, sweeps, epsilon,
                                    seed + 7919, parallelism)
    st = compute_block_stats(g, best)
    docs["check"] = {"f": check_f, "objective": round(best_obj, 5),
                     "coverage": round(coverage(st), 5), "modularity": round(modularity(st), 5),
                     "partition": best.assignment.tolist()}
    if gt is not None:
        off = round(partition_distance(best, gt) * g.node_count)
        club = round(partition_distance(best, karate_groundtruth(g, "club")) * g.node_count)
        docs["check"].update({"nodes_off_faction": off, "nodes_off_club": club})
        checks.append(Check(f"best of {n_trials} at f = {check_f} within one node of the split",
                            off <= 1, f"{off} nodes off (club labels: {club})"))
    man = ExperimentManifest(f"f-sweep-{network}", {"dataset": network},
                             {"kind": "rsbm", "prior": "floor_form", "theta": "degree"},
                             _mcmc_dict(base), seed,
                             params={"schedule": fs, "check_f": check_f, "n_trials": n_trials,
                                     "window": list(window), "min_jump": min_jump,
                                     "warm_start": "best partition of previous step"})
    return ExperimentResult(
        man, {"f_sweep": (("f", "objective", "coverage", "modularity", "nodes_off_split"),
                          rows)}, docs, checks)


# --------------------------------------------------------------- registry

def experiment_ids() -> list[str]:
    ids = ["twin-stars-table", "convergence-dcsbm", "convergence-rsbm"]
    ids += [f"coverage-vs-density-{d}" for d in DATASETS]
    ids += [f"f-sweep-{d}" for d in DATASETS]
    return ids


def run_experiment(exp_id: str, seed: int = 0, parallelism: int = 1,
                   **overrides) -> ExperimentResult:
    """Dispatch an experiment id to its function."""
    if exp_id == "twin-stars-table":
        return twin_stars_experiment()
    if exp_id.startswith("convergence-"):
        return convergence_experiment(exp_id.split("-", 1)[1], seed=seed,
                                      parallelism=parallelism, **overrides)
    for prefix, fn in (("coverage-vs-density-", coverage_vs_density),
                       ("f-sweep-", f_sweep_experiment)):
        if exp_id.startswith(prefix):
            return fn(exp_id[len(prefix):], seed=seed, parallelism=parallelism, **overrides)
    raise KeyError(f"unknown experiment {exp_id!r}; choose from {experiment_ids()}")


__all__ = [
    "Check", "ExperimentManifest", "ExperimentResult", "TWIN_STARS_ARGMAX",
    "TWIN_STARS_COLUMNS", "TWIN_STARS_ROWS", "best_of_trials", "convergence_experiment",
    "coverage_clusters", "coverage_vs_density", "experiment_ids", "f_sweep_experiment",
    "run_experiment", "table_csv", "twin_stars_experiment",
    "twin_stars_table", "write_result",
]
