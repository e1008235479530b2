"""Command-line front end: ``anonet anonymize | utility | tune | compare``.

Every command reads a plain edge-list graph. ``anonymize`` writes one
deleted-edge file per run (original node ids, ``u w`` per line) plus a
``results.json``; ``utility`` and ``compare`` consume those artifacts.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import stats
from .anonymity import UniquenessEvaluator
from .baselines import edge_sampling, unique_affect_greedy
from .evolution import PRESETS, GAConfig, budget, preset, run
from .graph import EdgeListError, Graph, load_edge_list, write_id_map
from .tuning import enumerate_grid, successive_halving
from .utility import utility_report

ALGORITHMS = ("ga", "uga", "es", "ua")
RESULTS_FORMAT = "anonet-results/1"
DEFAULT_PRESET = {"ga": "conf2", "uga": "conf1"}


class CLIError(Exception):
    """A user-facing error; printed without a traceback."""


# ------------------------------------------------------------------ artifacts

def fingerprint(g: Graph) -> dict:
    """Node count, edge count and a hash of the canonical edge list."""
    h = hashlib.sha256()
    h.update(np.int64(g.node_count).tobytes())
    h.update(np.ascontiguousarray(g.edges).tobytes())
    return {"n": g.node_count, "m": g.edge_count, "sha256": h.hexdigest()}


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def format_deleted_edges(g: Graph, indices) -> str:
    lines = []
    for i in sorted(int(i) for i in indices):
        u, v = g.edge(i)
        lines.append(f"{g.label(u)} {g.label(v)}\n")
    return "".join(lines)


def read_deleted_edges(g: Graph, path) -> list[int]:
    """Edge indices for a deleted-edge file written in original node ids."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read deleted-edge file {path}: {exc.strerror}") from None
    index = {str(g.label(v)): v for v in range(g.node_count)}
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.replace(",", " ").split()
        if not parts or parts[0].startswith(("#", "%")):
            continue
        if len(parts) < 2:
            raise CLIError(f"{path}:{lineno}: expected two node ids, got {line.strip()!r}")
        a, b = parts[0], parts[1]
        if a not in index or b not in index or not g.has_edge(index[a], index[b]):
            raise CLIError(f"{path}:{lineno}: edge ({a}, {b}) is not in the graph")
        out.append(g.edge_index(index[a], index[b]))
    if len(set(out)) != len(out):
        raise CLIError(f"{path}: edge listed more than once")
    return out


@dataclass
class RunRecord:
    seed: int
    best_f: int
    unique_before: int
    unique_after: int
    deletions: int
    generations: int | None
    wall_time: float
    trajectory: list[int]
    deleted_file: str

    @property
    def reduction(self) -> int:
        return self.unique_before - self.unique_after


@dataclass
class ExperimentResult:
    """Everything ``anonymize`` records; round-trips through JSON."""

    algorithm: str
    label: str
    graph: dict
    gamma: int
    gamma_frac: float
    settings: dict
    runs: list[RunRecord] = field(default_factory=list)
    format: str = RESULTS_FORMAT

    def reductions(self) -> list[int]:
        return [r.reduction for r in self.runs]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        if d.get("format") != RESULTS_FORMAT:
            raise CLIError(f"not an anonet results file (format {d.get('format')!r})")
        d = dict(d)
        d["runs"] = [RunRecord(**r) for r in d["runs"]]
        return cls(**d)

    def save(self, path) -> None:
        atomic_write(path, json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "ExperimentResult":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CLIError(f"cannot read results file {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise CLIError(f"{path}: invalid JSON ({exc.msg})") from None
        try:
            return cls.from_dict(d)
        except (KeyError, TypeError) as exc:
            raise CLIError(f"{path}: malformed results file ({exc})") from None


# ------------------------------------------------------------------ anonymize

def _load_graph(path) -> Graph:
    try:
        return load_edge_list(path)
    except EdgeListError as exc:
        raise CLIError(f"{path}: {exc}") from None


def resolve_config(algo: str, config_path=None, preset_name=None) -> GAConfig:
    if config_path is not None:
        try:
            cfg = GAConfig.load(config_path)
        except OSError as exc:
            raise CLIError(f"cannot read config {config_path}: {exc.strerror}") from None
        except (ValueError, KeyError) as exc:
            raise CLIError(f"{config_path}: {exc}") from None
    else:
        try:
            cfg = preset(preset_name or DEFAULT_PRESET[algo])
        except ValueError as exc:
            raise CLIError(str(exc)) from None
    return cfg.replace(uniqueness_aware=(algo == "uga"))


def _one_run(g: Graph, algo: str, cfg: GAConfig | None, gamma: int, batches: int, seed: int):
    """One seeded run; returns (deleted indices, partial record fields)."""
    before = UniquenessEvaluator(g).unique_count(np.zeros(g.edge_count, bool))
    t0 = time.perf_counter()
    if algo in ("ga", "uga"):
        res = run(g, cfg.replace(seed=seed), gamma=gamma)
        deleted = res.deleted.tolist()
        fields_ = dict(best_f=res.best_f, unique_after=res.best_unique,
                       generations=res.generations, trajectory=list(map(int, res.trajectory)),
                       wall_time=res.wall_time)
    else:
        algo_fn = edge_sampling if algo == "es" else unique_affect_greedy
        trace = algo_fn(g, gamma, batches=batches, seed=seed)
        k, after = trace.best_prefix()
        deleted = trace.deleted[:k]
        fields_ = dict(best_f=int(after), unique_after=int(after), generations=None,
                       trajectory=list(map(int, trace.uniqueness_curve)),
                       wall_time=time.perf_counter() - t0)
    return deleted, dict(seed=seed, unique_before=before, deletions=len(deleted), **fields_)


def anonymize(g: Graph, algo: str, out_dir, runs: int = 5, seed: int = 0,
              cfg: GAConfig | None = None, gamma_frac: float = 0.05, batches: int = 100,
              jobs: int = 1, label: str | None = None) -> ExperimentResult:
    """Run ``runs`` seeded runs (seed_i = seed + i) and write their artifacts."""
    if algo not in ALGORITHMS:
        raise CLIError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    if runs < 1:
        raise CLIError("--runs must be at least 1")
    if not 0 <= gamma_frac <= 1:
        raise CLIError("--gamma-frac must be in [0, 1]")
    if g.edge_count == 0:
        raise CLIError("graph has no edges")
    if algo in ("ga", "uga") and cfg is None:
        cfg = resolve_config(algo)
    gamma = budget(g.edge_count, gamma_frac)
    out_dir = Path(out_dir)
    seeds = [seed + i for i in range(runs)]
    args = [(g, algo, cfg, gamma, batches, s) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            outcomes = list(pool.map(_one_run, *zip(*args)))
    else:
        outcomes = [_one_run(*a) for a in args]
    settings = asdict(cfg) if cfg is not None else {"batches": batches}
    result = ExperimentResult(algorithm=algo, label=label or algo, graph=fingerprint(g),
                              gamma=gamma, gamma_frac=gamma_frac, settings=settings)
    for i, (deleted, rec) in enumerate(outcomes):
        name = f"run{i}.edges"
        atomic_write(out_dir / name, format_deleted_edges(g, deleted))
        result.runs.append(RunRecord(deleted_file=name, **rec))
    result.save(out_dir / "results.json")
    return result


def summary_line(res: ExperimentResult) -> str:
    after_m, after_s = stats.mean_std([r.unique_after for r in res.runs])
    red_m, red_s = stats.mean_std(res.reductions())
    del_m, _ = stats.mean_std([r.deletions for r in res.runs])
    before = res.runs[0].unique_before
    return (f"{res.label}: unique nodes {before} -> {after_m:.1f} ± {after_s:.1f} "
            f"(reduction {red_m:.1f} ± {red_s:.1f}, mean deletions {del_m:.1f} of budget "
            f"{res.gamma}, {len(res.runs)} runs)")


# -------------------------------------------------------------------- compare

COMPARE_COLUMNS = ["a", "b", "a_reduction_mean", "a_reduction_std", "b_reduction_mean",
                   "b_reduction_std", "improvement_factor", "rank_sum", "p_value",
                   "significant", "test"]


def compare(results) -> list[dict]:
    """Pairwise rows ``a vs b`` with factor reduction(b) / reduction(a).

    Results are put in the usual es, ua, ga, uga order first, so the output
    does not depend on the order the files were given in.
    """
    results = list(results)
    if len(results) < 2:
        raise CLIError("compare needs at least two results files")
    prints = {json.dumps(r.graph, sort_keys=True) for r in results}
    if len(prints) > 1:
        raise CLIError("results files were produced on different graphs")
    labels = [r.label for r in results]
    if len(set(labels)) != len(labels):
        raise CLIError("results files share a label; rerun anonymize with distinct --label")
    results.sort(key=lambda r: stats.algorithm_rank(r.label))
    rows = []
    for a, b in itertools.combinations(results, 2):
        ra, rb = a.reductions(), b.reductions()
        test = stats.rank_sum_test(ra, rb)
        am, asd = stats.mean_std(ra)
        bm, bsd = stats.mean_std(rb)
        rows.append({
            "a": a.label, "b": b.label,
            "a_reduction_mean": f"{am:.2f}", "a_reduction_std": f"{asd:.2f}",
            "b_reduction_mean": f"{bm:.2f}", "b_reduction_std": f"{bsd:.2f}",
            "improvement_factor": stats.format_factor(stats.improvement_factor(ra, rb)),
            "rank_sum": f"{test.statistic:g}", "p_value": f"{test.p_value:.4g}",
            "significant": "yes" if test.significant() else "no",
            "test": test.method + (" exact" if test.exact else " normal approx."),
        })
    return rows


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# --------------------------------------------------------------------- parser

def _emit(text: str, out) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def cmd_anonymize(args) -> int:
    g = _load_graph(args.graph)
    cfg = None
    if args.algo in ("ga", "uga"):
        cfg = resolve_config(args.algo, args.config, args.preset)
        label = args.label or f"{args.algo}:{args.preset or ('config' if args.config else DEFAULT_PRESET[args.algo])}"
    elif args.config or args.preset:
        raise CLIError(f"--config/--preset do not apply to {args.algo}")
    else:
        label = args.label or args.algo
    res = anonymize(g, args.algo, args.out, runs=args.runs, seed=args.seed, cfg=cfg,
                    gamma_frac=args.gamma_frac, batches=args.batches, jobs=args.jobs,
                    label=label)
    if args.idmap:
        write_id_map(g, Path(args.out) / "idmap.txt")
    print(summary_line(res))
    return 0


def cmd_utility(args) -> int:
    g = _load_graph(args.graph)
    jobs = [(str(p), p, None) for p in args.deleted or []]
    if args.results:
        res = ExperimentResult.load(args.results)
        if res.graph != fingerprint(g):
            raise CLIError(f"{args.results} was produced on a different graph")
        base = Path(args.results).parent
        jobs += [(r.deleted_file, base / r.deleted_file, (res.label, i)) for i, r in enumerate(res.runs)]
    if not jobs:
        raise CLIError("give --deleted files and/or --results")
    ev = UniquenessEvaluator(g)
    before = ev.unique_count(np.zeros(g.edge_count, bool))
    reports = []
    for name, path, tag in jobs:
        idx = read_deleted_edges(g, path)
        bits = np.zeros(g.edge_count, bool)
        bits[idx] = True
        entry = {"deleted_file": name}
        if tag is not None:
            entry["algorithm"], entry["run"] = tag
        entry.update(unique_before=before, unique_after=ev.unique_count(bits),
                     report=utility_report(g, bits, seed=args.seed,
                                           louvain_runs=args.louvain_runs).to_dict())
        reports.append(entry)
    _emit(json.dumps(reports, indent=2) + "\n", args.out)
    return 0


def cmd_tune(args) -> int:
    g = _load_graph(args.graph)
    grid = enumerate_grid(uniqueness_aware=args.uga)
    gamma = budget(g.edge_count, args.gamma_frac)
    try:
        trace = successive_halving(g, grid, args.sample, args.epoch_gens, rng=args.seed,
                                   pinned=args.pin, min_survivors=args.min_survivors,
                                   gamma=gamma, jobs=args.jobs)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    _emit(trace.to_csv(), args.out)
    counts = "/".join(map(str, trace.survivor_counts))
    print(f"survivors per epoch: {counts}; final ids: {trace.final}", file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    rows = compare(ExperimentResult.load(p) for p in args.results)
    text = rows_to_csv(rows, COMPARE_COLUMNS)
    _emit(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anonet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("anonymize", help="run an anonymizer over several seeds")
    a.add_argument("--graph", required=True)
    a.add_argument("--algo", required=True, choices=ALGORITHMS)
    src = a.add_mutually_exclusive_group()
    src.add_argument("--config", help="GA key = value config file")
    src.add_argument("--preset", help=f"one of {', '.join(PRESETS)}")
    a.add_argument("--gamma-frac", type=float, default=0.05)
    a.add_argument("--runs", type=int, default=5)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--batches", type=int, default=100, help="baseline recomputation batches")
    a.add_argument("--label", help="name used in results and comparisons")
    a.add_argument("--idmap", action="store_true", help="also write idmap.txt")
    a.add_argument("--out", required=True, help="output directory")
    a.set_defaults(func=cmd_anonymize)

    u = sub.add_parser("utility", help="utility report for deleted-edge files")
    u.add_argument("--graph", required=True)
    u.add_argument("--deleted", nargs="+")
    u.add_argument("--results", help="results.json whose runs to report on")
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--louvain-runs", type=int, default=100)
    u.add_argument("--out")
    u.set_defaults(func=cmd_utility)

    t = sub.add_parser("tune", help="successive halving over the configuration grid")
    t.add_argument("--graph", required=True)
    t.add_argument("--sample", type=int, default=50)
    t.add_argument("--epoch-gens", type=int, default=10)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--pin", type=int, nargs="*", default=[], help="grid ids always included")
    t.add_argument("--min-survivors", type=int, default=8)
    t.add_argument("--gamma-frac", type=float, default=0.05)
    t.add_argument("--uga", action="store_true", help="tune the uniqueness-aware GA")
    t.add_argument("--jobs", type=int, default=1)
    t.add_argument("--out")
    t.set_defaults(func=cmd_tune)

    c = sub.add_parser("compare", help="compare results files")
    c.add_argument("results", nargs="+")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"anonet {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
