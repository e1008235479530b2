"""Hyperparameter search: the full configuration grid and successive halving.

Halving samples configurations, runs each for a short epoch, keeps the
better half (rounded up) and continues the survivors from where they left
off until only a handful remain.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .anonymity import UniquenessEvaluator
from .evolution import GAConfig, GAState
from .graph import Graph

P_INIT = (0.0025, 0.005, 0.02)
CROSSOVER = (10, 25, 100, "uniform")
ALPHA0 = (0.0001, 0.0005)
ETA = (0.0, 0.00001, 0.000025)
PARENTAL = ("roulette", "tournament")
ENVIRONMENTAL = ("roulette", "tournament", "mu+lambda")


def enumerate_grid(uniqueness_aware: bool = False, seed: int = 0) -> list[GAConfig]:
    """All 432 grid configurations, axis-major with ``p_init`` slowest.

    Position in the returned list is the configuration id used by halving.
    """
    grid = []
    for p, cross, a0, eta, par, env in itertools.product(
            P_INIT, CROSSOVER, ALPHA0, ETA, PARENTAL, ENVIRONMENTAL):
        points = cross != "uniform"
        grid.append(GAConfig(
            mu=100, lam=150, tau=40, gamma_frac=0.05, tournament_t=5,
            p_init=p, crossover="points" if points else "uniform",
            c=cross if points else 25, alpha0=a0, eta=eta,
            parental=par, environmental=env,
            uniqueness_aware=uniqueness_aware, seed=seed,
        ))
    return grid


@dataclass
class HalvingTrace:
    """Survivor ids per epoch and each configuration's best-f curve.

    ``epochs[k]`` lists the configurations that ran during epoch ``k``;
    ``curves[cid]`` holds best_f at generation 0, 1, ... for as long as the
    configuration survived.
    """

    epoch_gens: int
    epochs: list[list[int]] = field(default_factory=list)
    curves: dict[int, list[int]] = field(default_factory=dict)
    seeds: dict[int, int] = field(default_factory=dict)

    @property
    def survivor_counts(self) -> list[int]:
        return [len(e) for e in self.epochs]

    @property
    def final(self) -> list[int]:
        return list(self.epochs[-1]) if self.epochs else []

    def rows(self):
        """(epoch, config_id, generation, best_f), generation 0 only in epoch 0."""
        for k, ids in enumerate(self.epochs):
            lo = 0 if k == 0 else k * self.epoch_gens + 1
            hi = (k + 1) * self.epoch_gens
            for cid in ids:
                curve = self.curves[cid]
                for gen in range(lo, min(hi, len(curve) - 1) + 1):
                    yield k, cid, gen, curve[gen]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "config_id", "generation", "best_f"])
        w.writerows(self.rows())
        return buf.getvalue()


def _advance(state: GAState, generations: int) -> GAState:
    state.advance(generations)
    return state


def _rank_key(cid: int, state: GAState):
    return (state.best.f, state.best.ones, cid)


def successive_halving(g: Graph, grid, sample: int, epoch_gens: int, rng=None,
                       pinned=(), min_survivors: int = 8, gamma: int | None = None,
                       jobs: int = 1) -> HalvingTrace:
    """Successive halving over ``grid``.

    ``sample`` distinct ids are drawn uniformly and ``pinned`` ids are added
    to them. Every recorded survivor set runs ``epoch_gens`` more generations;
    if it has at most ``min_survivors`` members the search stops, otherwise
    the best ``ceil(s / 2)`` by (best_f, deletions, id) go on. Each config
    gets its own seed drawn from ``rng``.
    """
    grid = list(grid)
    if not 1 <= sample <= len(grid):
        raise ValueError(f"sample must be in 1..{len(grid)}")
    if epoch_gens < 1:
        raise ValueError("epoch_gens must be at least 1")
    rng = np.random.default_rng(rng)
    chosen = rng.choice(len(grid), size=sample, replace=False).tolist()
    for cid in pinned:
        if not 0 <= cid < len(grid):
            raise ValueError(f"pinned config id {cid} outside grid")
        if cid not in chosen:
            chosen.append(int(cid))
    seeds = rng.integers(0, 2**31 - 1, size=len(chosen)).tolist()
    evaluator = UniquenessEvaluator(g)
    states = {cid: GAState(g, grid[cid].replace(seed=s), gamma=gamma, evaluator=evaluator)
              for cid, s in zip(chosen, seeds)}
    trace = HalvingTrace(epoch_gens=epoch_gens, seeds=dict(zip(chosen, seeds)))
    alive = sorted(chosen)
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        while True:
            trace.epochs.append(list(alive))
            if pool is None:
                for cid in alive:
                    states[cid].advance(epoch_gens)
            else:
                done = pool.map(_advance, [states[c] for c in alive], [epoch_gens] * len(alive))
                states.update(zip(alive, done))
            if len(alive) <= min_survivors:
                break
            keep = math.ceil(len(alive) / 2)
            alive = sorted(sorted(alive, key=lambda c: _rank_key(c, states[c]))[:keep])
    finally:
        if pool is not None:
            pool.shutdown()
    trace.curves = {cid: list(st.trajectory) for cid, st in states.items()}
    return trace
