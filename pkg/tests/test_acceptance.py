"""Acceptance criteria 1-9, one test each.

Criterion 4 (and the dataset half of 5) needs the Blogs edge list; point
ANONET_BLOGS at it. Without the file those tests fail with a BLOCKED message
rather than being skipped.
"""
import csv
import io
import os
import random
import time
from collections import Counter
from itertools import combinations

import numpy as np
import pytest

from anonet import cli, stats
from anonet.anonymity import UniquenessEvaluator, build_view
from anonet.evolution import GAState, Individual, mutate_uniqueness_aware, preset, run
from anonet.graph import (
    Graph,
    average_distance,
    connected_components,
    load_edge_list,
    local_clustering,
)
from anonet.tuning import enumerate_grid, successive_halving
from anonet.utility import betweenness, consensus_partition, nmi, utility_report

import oracles

BLOGS_ENV = "ANONET_BLOGS"
_blogs_results = {}


def er_graph(rng, n, p):
    return Graph(n, [e for e in combinations(range(n), 2) if rng.random() < p])


def scratch_states(g):
    """Degrees and triangle counts from the dense adjacency matrix."""
    a = np.zeros((g.n, g.n), dtype=np.int64)
    a[g.edges[:, 0], g.edges[:, 1]] = a[g.edges[:, 1], g.edges[:, 0]] = 1
    return a.sum(1), np.diagonal(a @ a @ a) // 2


def test_criterion_1_uniqueness_delta_equivalence(record_property):
    record_property("criterion", 1)
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    steps = 0
    for trial in range(500):
        n = int(rng.integers(2, 31))
        g = er_graph(rng, n, 0.3)
        view = build_view(g)
        alive = np.ones(g.m, dtype=bool)
        for e in rng.permutation(g.m).tolist():
            view.delete_edge(e)
            alive[e] = False
            deg, tri = scratch_states(Graph(n, g.edges[alive]))
            want_states = list(zip(deg.tolist(), tri.tolist()))
            assert [tuple(s) for s in view.states] == want_states
            counts = Counter(want_states)
            want_unique = {v for v, s in enumerate(want_states) if counts[s] == 1}
            assert view.unique == want_unique
            assert view.unique_count == len(want_unique)
            steps += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 10, f"took {elapsed:.1f}s (limit 10s)"
    record_property("detail", f"500 graphs, {steps} deletion steps exact, {elapsed:.1f}s")


def test_criterion_2_metric_oracles(record_property):
    record_property("criterion", 2)
    t0 = time.perf_counter()
    rng = random.Random(2)
    worst = 0.0
    for trial in range(300):
        n = rng.randint(10, 25)
        edges = oracles.random_edges(rng, n, rng.uniform(0.1, 0.4))
        g = Graph(n, edges)
        tri, _ = oracles.triangles_by_triples(n, edges)
        assert g.triangle_counts.tolist() == tri
        cc = oracles.clustering(n, edges)
        assert [local_clustering(g, v) for v in range(n)] == [float(c) for c in cc]
        want_d = oracles.average_distance(n, edges)
        if want_d is None:
            with pytest.raises(ValueError):
                average_distance(g)
        else:
            assert average_distance(g) == float(want_d)
        if n <= 16:
            bc = betweenness(g)
            worst = max(worst, float(np.max(np.abs(bc - oracles.betweenness_by_paths(n, edges)))))
    assert worst <= 1e-9
    elapsed = time.perf_counter() - t0
    assert elapsed < 30, f"took {elapsed:.1f}s (limit 30s)"
    record_property("detail", f"300 graphs exact, max betweenness error {worst:.1e}, {elapsed:.1f}s")


def constructed_graphs(count=20):
    """Random small graphs with 6..14 edges and at least one unique node."""
    rng = np.random.default_rng(3)
    out = []
    while len(out) < count:
        n = int(rng.integers(6, 10))
        g = er_graph(rng, n, 0.4)
        if 6 <= g.m <= 14 and build_view(g).unique_count > 0:
            out.append(g)
    return out


def test_criterion_3_small_instance_optimality(record_property):
    record_property("criterion", 3)
    t0 = time.perf_counter()
    gamma = 3
    # c = 25 crossover points cannot be placed in m <= 14 bits, so the
    # high-rate preset operators are used with uniform crossover here
    cfg = preset("highrate", mu=20, lam=30, tau=40, crossover="uniform")
    short = []
    for i, g in enumerate(constructed_graphs()):
        edges = g.edges.tolist()
        f_star = min(
            oracles.objective(g.n, edges, np.isin(np.arange(g.m), s), gamma)
            for k in range(gamma + 1) for s in combinations(range(g.m), k)
        )
        hits = sum(run(g, cfg.replace(seed=s), gamma=gamma).best_f <= f_star for s in range(5))
        if hits < 4:
            short.append(f"graph {i} (m={g.m}, f*={f_star}): {hits}/5")
    elapsed = time.perf_counter() - t0
    assert not short, f"{20 - len(short)}/20 graphs reach f* in >= 4/5 runs; short: {'; '.join(short)}"
    assert elapsed < 120, f"took {elapsed:.1f}s (limit 120s)"
    record_property("detail", f"20/20 graphs reach f* in >= 4/5 runs, {elapsed:.1f}s")


def blogs_graph():
    path = os.environ.get(BLOGS_ENV)
    if not path or not os.path.exists(path):
        pytest.fail(f"BLOCKED: Blogs dataset unavailable (set {BLOGS_ENV} to its edge list)")
    return load_edge_list(path)


def test_criterion_4_blogs_privacy(record_property, tmp_path):
    record_property("criterion", 4)
    g = blogs_graph()
    assert (g.n, g.m) == (1224, 16715), f"loaded n={g.n}, m={g.m}"
    before = build_view(g).unique_count
    assert abs(before - 598) <= 5, f"initial |V_u| = {before}"
    runs = {}
    for algo, cfg in [("ga", preset("conf2")), ("uga", preset("conf1", uniqueness_aware=True)),
                      ("es", None)]:
        t0 = time.perf_counter()
        res = cli.anonymize(g, algo, tmp_path / algo, runs=5, seed=0, cfg=cfg)
        minutes = (time.perf_counter() - t0) / 60
        assert minutes <= 30, f"{algo} took {minutes:.1f} min"
        runs[algo] = res
    _blogs_results.update(runs, graph=g)
    red = {a: stats.mean_std(r.reductions())[0] for a, r in runs.items()}
    factor = stats.improvement_factor(runs["es"].reductions(), runs["ga"].reductions())
    assert red["ga"] >= 250, f"GA reduction {red['ga']:.1f}"
    assert red["uga"] >= 250, f"UGA reduction {red['uga']:.1f}"
    assert red["es"] <= 40, f"ES reduction {red['es']:.1f}"
    assert factor is not None and factor >= 5, f"GA/ES factor {stats.format_factor(factor)}"
    record_property("detail", f"|V_u| {before}; reductions GA {red['ga']:.1f} UGA {red['uga']:.1f} "
                              f"ES {red['es']:.1f}; factor {factor:.2f}")


def test_criterion_5_budget_and_utility_bounds(record_property):
    record_property("criterion", 5)
    rng = np.random.default_rng(5)
    checked = 0
    for trial in range(10):
        g = er_graph(rng, 40, 0.15)
        rep = utility_report(g, [], seed=trial, louvain_runs=5)
        assert rep.to_dict() == {"frac_deleted": 0.0, "delta_clustering": 0.0,
                                 "delta_avg_distance": 0.0, "delta_lcc_frac": 0.0,
                                 "betweenness_top100_overlap": 1.0, "community_nmi": 1.0}
        for _ in range(5):
            deleted = rng.choice(g.m, size=int(rng.integers(1, 10)), replace=False)
            h = g.delete_edge_indices(deleted)
            if connected_components(h).count == connected_components(g).count:
                rep = utility_report(g, deleted, louvain_runs=3)
                assert rep.delta_lcc_frac == 0 and rep.delta_avg_distance >= 0
                checked += 1
    assert checked > 0
    if "graph" not in _blogs_results:
        pytest.fail("BLOCKED: identity and distance bounds hold, but the budget checks need "
                    f"criterion 4's Blogs runs ({BLOGS_ENV} unset)")
    g = _blogs_results["graph"]
    for algo in ("ga", "uga", "es"):
        res = _blogs_results[algo]
        for r in res.runs:
            assert r.deletions <= res.gamma, f"{algo} seed {r.seed}: {r.deletions} > {res.gamma}"
            assert r.deletions / g.m < 0.05
    record_property("detail", f"identity exact, {checked} connectivity-preserving deletions, "
                              "Blogs best individuals within budget")


def test_criterion_6_ga_mechanics(record_property):
    record_property("criterion", 6)
    rng = np.random.default_rng(6)
    g = er_graph(rng, 35, 0.2)
    logged = 0
    for mode in [dict(), dict(crossover="points", c=5), dict(parental="tournament"),
                 dict(environmental="roulette"), dict(environmental="tournament"),
                 dict(uniqueness_aware=True)]:
        cfg = preset("conf1", mu=20, lam=30, tau=15, alpha0=0.05, eta=0.01, **mode)
        state = GAState(g, cfg)
        while state.step():
            assert state.alpha >= 1 / g.m
        traj = state.trajectory
        assert all(a >= b for a, b in zip(traj, traj[1:]))
        a, b = run(g, cfg), run(g, cfg)
        assert np.array_equal(a.best_bits, b.best_bits) and a.trajectory == b.trajectory
        logged += 1
    # uniqueness-aware mutation, instrumented
    ev_graphs = [er_graph(rng, 30, 0.2) for _ in range(5)]
    events = 0
    while events < 10_000:
        h = ev_graphs[events % 5]
        ev = UniquenessEvaluator(h)
        bits = rng.random(h.m) < 0.1
        ind = Individual(bits)
        out = mutate_uniqueness_aware(ind, 0.3, ev, rng)
        uniq = ev.unique_mask(bits)
        turned_on = np.flatnonzero(out.bits & ~bits)
        u, v = h.edges[turned_on, 0], h.edges[turned_on, 1]
        assert np.all(uniq[u] | uniq[v]), "zero-bit flipped on an edge between anonymous nodes"
        events += int(np.count_nonzero(out.bits != bits))
    record_property("detail", f"{logged} runs monotone with alpha >= 1/m and deterministic; "
                              f"{events} UGA flips checked")


def test_criterion_7_tuning_protocol(record_property):
    record_property("criterion", 7)
    grid = enumerate_grid()
    assert len(grid) == 432
    rng = np.random.default_rng(7)
    g = er_graph(rng, 40, 0.25)
    assert g.m > 100  # 100-point crossover needs more than 100 bits
    trace = successive_halving(g, grid, 50, 10, rng=0)
    assert trace.survivor_counts == [50, 25, 13, 7]
    for outer, inner in zip(trace.epochs, trace.epochs[1:]):
        assert set(inner) <= set(outer)
    record_property("detail", "432 configs; survivors 50/25/13/7, nested")


def test_criterion_8_nmi_and_consensus(record_property):
    record_property("criterion", 8)
    rng = np.random.default_rng(8)
    for _ in range(100):
        n = int(rng.integers(2, 50))
        p = rng.integers(0, rng.integers(1, 8), n)
        q = rng.integers(0, rng.integers(1, 8), n)
        assert nmi(p, p) == pytest.approx(1.0)
        assert nmi(p, q) == pytest.approx(nmi(q, p), abs=1e-12)
        relabel = rng.permutation(16)
        assert nmi(relabel[p], relabel[q]) == pytest.approx(nmi(p, q), abs=1e-12)
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
    best, q_best = oracles.best_partition(6, edges)
    got = consensus_partition(Graph(6, edges), 20, np.random.default_rng(0))
    assert oracles.modularity(6, edges, got.tolist()) == pytest.approx(q_best)
    assert nmi(got, best) == 1.0
    record_property("detail", f"100 pairs; consensus modularity {q_best:.4f} is optimal")


def test_criterion_9_statistics(record_property, tmp_path, capsys):
    record_property("criterion", 9)
    ExperimentResult, RunRecord = cli.ExperimentResult, cli.RunRecord

    def result(label, reductions):
        runs = [RunRecord(seed=i, best_f=600 - r, unique_before=600, unique_after=600 - r,
                          deletions=0, generations=None, wall_time=0.0, trajectory=[],
                          deleted_file=f"run{i}.edges") for i, r in enumerate(reductions)]
        res = ExperimentResult(algorithm=label.split(":")[0], label=label,
                               graph={"n": 1, "m": 1, "sha256": "0"}, gamma=0,
                               gamma_frac=0.05, settings={}, runs=runs)
        path = tmp_path / f"{label.replace(':', '_')}.json"
        res.save(path)
        return path

    def rows(*paths):
        assert cli.main(["compare", *map(str, paths)]) == 0
        return list(csv.DictReader(io.StringIO(capsys.readouterr().out)))

    (r1,) = rows(result("ga", [391] * 5), result("es", [34] * 5))
    assert abs(float(r1["improvement_factor"]) - 11.5) <= 0.1 and r1["significant"] == "yes"
    (r2,) = rows(result("ga:conf1", [313, 300, 310, 305, 320]), result("ga:conf2", [313, 300, 310, 305, 320]))
    assert r2["improvement_factor"] == "1.00" and r2["significant"] == "no"
    (r3,) = rows(result("ua", [0] * 5), result("ga:x", [192] * 5))
    assert r3["improvement_factor"] == "−"
    record_property("detail", f"factor {r1['improvement_factor']} (p={r1['p_value']}); "
                              f"identical 1.00 (p={r2['p_value']}); zero -> −")
