"""Genetic algorithms that search for a budgeted set of edges to delete.

An individual is a boolean vector over the canonical edge order of the input
graph; a set bit means "delete this edge". Fitness (minimised) is the number
of unique nodes in the derived graph plus one unit for every deletion beyond
the budget.

The uniqueness-aware variant differs only in mutation: a kept edge may be
switched to "delete" only if it touches a unique node of the individual's own
derived graph.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .anonymity import UniquenessEvaluator
from .graph import Graph

CROSSOVER_MODES = ("points", "uniform")
PARENTAL_MODES = ("roulette", "tournament")
ENVIRONMENTAL_MODES = ("mu+lambda", "roulette", "tournament")

# sub-stream ids for the per-generation generators
_INIT, _PARENTS, _CROSS, _MUTATE, _SURVIVE = range(5)


@dataclass(frozen=True)
class GAConfig:
    mu: int = 100
    p_init: float = 0.005
    lam: int = 150
    crossover: str = "uniform"
    c: int = 25
    alpha0: float = 0.0005
    eta: float = 0.000025
    parental: str = "roulette"
    environmental: str = "mu+lambda"
    tournament_t: int = 5
    gamma_frac: float = 0.05
    tau: int = 40
    uniqueness_aware: bool = False
    seed: int = 0

    def __post_init__(self):
        checks = [
            (self.mu >= 1, "mu must be >= 1"),
            (self.lam >= 1, "lambda must be >= 1"),
            (0 <= self.p_init <= 1, "p_init must be in [0, 1]"),
            (0 <= self.alpha0 <= 1, "alpha0 must be in [0, 1]"),
            (self.eta >= 0, "eta must be >= 0"),
            (0 <= self.gamma_frac <= 1, "gamma_frac must be in [0, 1]"),
            (self.tau >= 1, "tau must be >= 1"),
            (self.tournament_t >= 1, "tournament_t must be >= 1"),
            (self.crossover in CROSSOVER_MODES, f"crossover must be one of {CROSSOVER_MODES}"),
            (self.crossover != "points" or self.c >= 1, "c must be >= 1"),
            (self.parental in PARENTAL_MODES, f"parental must be one of {PARENTAL_MODES}"),
            (self.environmental in ENVIRONMENTAL_MODES, f"environmental must be one of {ENVIRONMENTAL_MODES}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    def replace(self, **changes) -> "GAConfig":
        return replace(self, **changes)

    # flat "key = value" text; the file says ``lambda`` where Python can't
    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            key = "lambda" if f.name == "lam" else f.name
            val = getattr(self, f.name)
            if isinstance(val, bool):
                val = str(val).lower()
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GAConfig":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            name = "lam" if key == "lambda" else key
            if name not in types:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            kind = types[name]
            if kind == "bool":
                if val.lower() not in ("true", "false", "1", "0"):
                    raise ValueError(f"config line {lineno}: bad boolean {val!r}")
                values[name] = val.lower() in ("true", "1")
            elif kind == "int":
                values[name] = int(val)
            elif kind == "float":
                values[name] = float(val)
            else:
                values[name] = val
        return cls(**values)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "GAConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


_FINAL = dict(mu=100, p_init=0.005, lam=150, alpha0=0.0005, parental="roulette",
              environmental="mu+lambda", tau=40, gamma_frac=0.05)

PRESETS: dict[str, GAConfig] = {
    "conf1": GAConfig(**_FINAL, crossover="uniform", eta=0.000025),
    "conf2": GAConfig(**_FINAL, crossover="points", c=25, eta=0.000025),
    "conf3": GAConfig(**_FINAL, crossover="uniform", eta=0.00001),
    "conf4": GAConfig(**_FINAL, crossover="points", c=25, eta=0.00001),
    # the same operators with 100x larger mutation and decay rates
    "highrate": GAConfig(mu=100, p_init=0.005, lam=150, crossover="points", c=25,
                         alpha0=0.05, eta=0.001, parental="roulette",
                         environmental="mu+lambda", tau=40, gamma_frac=0.05),
}


def preset(name: str, **changes) -> GAConfig:
    try:
        cfg = PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return cfg.replace(**changes) if changes else cfg


@dataclass(eq=False)
class Individual:
    bits: np.ndarray
    f: int | None = None
    ones: int = field(init=False)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        self.bits.setflags(write=False)
        self.ones = int(np.count_nonzero(self.bits))


@dataclass
class RunResult:
    best_bits: np.ndarray
    best_f: int
    best_unique: int
    generations: int
    trajectory: list[int]
    seed: int
    wall_time: float
    gamma: int

    @property
    def deleted(self) -> np.ndarray:
        return np.flatnonzero(self.best_bits)

    @property
    def deletions(self) -> int:
        return int(np.count_nonzero(self.best_bits))


def budget(m: int, frac: float) -> int:
    """Largest deletion count allowed without penalty: ``floor(frac * m)``."""
    if not 0 <= frac <= 1:
        raise ValueError("budget fraction must be in [0, 1]")
    # rounding first keeps e.g. 0.29 * 100 from flooring to 28
    return int(math.floor(round(frac * m, 9)))


def initialize_population(m: int, mu: int, p_init: float, rng) -> list[Individual]:
    return [Individual(row) for row in rng.random((mu, m)) < p_init]


def objective(g_or_evaluator, bits, gamma: int) -> int:
    ev = _evaluator(g_or_evaluator)
    bits = np.asarray(bits, dtype=bool)
    if bits.shape != (ev.m,):
        raise ValueError("bitstring length does not match edge count")
    return ev.unique_count(bits) + max(0, int(np.count_nonzero(bits)) - gamma)


def _evaluator(obj) -> UniquenessEvaluator:
    return obj if isinstance(obj, UniquenessEvaluator) else UniquenessEvaluator(obj)


def roulette_probabilities(fs: Sequence[float]) -> np.ndarray:
    fs = np.asarray(fs, dtype=np.float64)
    if fs.size == 0:
        raise ValueError("empty population")
    weights = fs.max() - fs
    total = weights.sum()
    if total <= 0:
        return np.full(fs.size, 1.0 / fs.size)
    return weights / total


def roulette_select(fs, count: int, rng) -> np.ndarray:
    p = roulette_probabilities(fs)
    return rng.choice(len(p), size=count, p=p)


def _rank(fs, ones) -> np.ndarray:
    """Position of every individual in the (f, ones, index) order."""
    fs = np.asarray(fs)
    ones = np.zeros(len(fs), dtype=np.int64) if ones is None else np.asarray(ones)
    order = np.lexsort((np.arange(len(fs)), ones, fs))
    rank = np.empty(len(fs), dtype=np.int64)
    rank[order] = np.arange(len(fs))
    return rank


def tournament_select(fs, count: int, t: int, rng, ones=None) -> np.ndarray:
    """Each draw samples ``t`` contestants with replacement and keeps the best."""
    if t < 1:
        raise ValueError("tournament size must be >= 1")
    if len(fs) == 0:
        raise ValueError("empty population")
    rank = _rank(fs, ones)
    contestants = rng.integers(0, len(fs), size=(count, t))
    winners = np.argmin(rank[contestants], axis=1)
    return contestants[np.arange(count), winners]


def _select(mode: str, fs, ones, count, t, rng) -> np.ndarray:
    if mode == "roulette":
        return roulette_select(fs, count, rng)
    if mode == "tournament":
        return tournament_select(fs, count, t, rng, ones)
    raise ValueError(f"unknown selection mode {mode!r}")


def crossover(parents: Sequence[Individual], mode: str, rng, c: int = 25) -> list[Individual]:
    """Recombine consecutive parent pairs into two children each.

    ``mode`` is ``"points"`` (``c`` distinct cut positions, alternating
    segments) or ``"uniform"`` (coin flip per bit, the sibling takes the
    other parent's bit). An odd trailing parent is copied unchanged.
    """
    if mode not in CROSSOVER_MODES:
        raise ValueError(f"unknown crossover {mode!r}")
    out: list[Individual] = []
    if not parents:
        return out
    m = parents[0].bits.size
    if mode == "points" and c >= m:
        raise ValueError(f"{c} crossover points need more than {m} bits")
    for i in range(0, len(parents) - 1, 2):
        a, b = parents[i].bits, parents[i + 1].bits
        if mode == "uniform":
            mask = rng.random(m) < 0.5
        else:
            cuts = np.zeros(m, dtype=np.int64)
            cuts[rng.choice(np.arange(1, m), size=c, replace=False)] = 1
            mask = (np.cumsum(cuts) % 2).astype(bool)
        out.append(Individual(np.where(mask, b, a)))
        out.append(Individual(np.where(mask, a, b)))
    if len(parents) % 2:
        last = parents[-1]
        out.append(Individual(last.bits, last.f))
    return out


def _flip(ind: Individual, flips: np.ndarray) -> Individual:
    if not flips.any():
        return ind
    return Individual(ind.bits ^ flips)


def mutate(pop: Sequence[Individual], alpha: float, rng) -> list[Individual]:
    """Flip each bit independently with probability ``alpha``."""
    return [_flip(ind, rng.random(ind.bits.size) < alpha) for ind in pop]


def mutate_uniqueness_aware(ind: Individual, alpha: float, g_or_evaluator, rng,
                            unique_nodes: np.ndarray | None = None) -> Individual:
    """Mutation restricted to unique edges of the individual's derived graph.

    A kept edge may become deleted (probability ``alpha``) only if it touches a
    unique node after the individual's current deletions; deleted edges may be
    restored with probability ``alpha`` so over-budget individuals can shed
    deletions.
    """
    ev = _evaluator(g_or_evaluator)
    eligible = ev.unique_edge_mask(ind.bits, unique_nodes) | ind.bits
    return _flip(ind, (rng.random(ind.bits.size) < alpha) & eligible)


def decay(alpha: float, eta: float, gen: int, m: int) -> float:
    return max(alpha * (1 - eta * gen), 1.0 / m)


def environmental_select(pop: Sequence[Individual], offspring: Sequence[Individual], mu: int,
                         mode: str = "mu+lambda", rng=None, t: int = 5) -> list[Individual]:
    """Choose the next population from parents plus offspring.

    ``mu+lambda`` keeps the ``mu`` best by (f, ones, parents first, index);
    ``roulette``/``tournament`` draw ``mu`` survivors from the union.
    """
    union = list(pop) + list(offspring)
    fs = np.array([ind.f for ind in union])
    ones = np.array([ind.ones for ind in union])
    if mode == "mu+lambda":
        return [union[i] for i in np.lexsort((np.arange(len(union)), ones, fs))[:mu]]
    if rng is None:
        raise ValueError(f"{mode} survivor selection needs an rng")
    return [union[i] for i in _select(mode, fs, ones, mu, t, rng)]


def _best(pop: Sequence[Individual]) -> Individual:
    return min(pop, key=lambda ind: (ind.f, ind.ones))


class GAState:
    """A GA run that can be advanced a few generations at a time.

    ``gamma`` overrides the budget derived from ``cfg.gamma_frac``.
    """

    def __init__(self, g: Graph, cfg: GAConfig, gamma: int | None = None,
                 evaluator: UniquenessEvaluator | None = None):
        if g.edge_count < 1:
            raise ValueError("graph has no edges to delete")
        self.graph = g
        self.cfg = cfg
        self.m = g.edge_count
        self.gamma = budget(self.m, cfg.gamma_frac) if gamma is None else int(gamma)
        self.evaluator = evaluator or UniquenessEvaluator(g)
        self._t0 = time.perf_counter()
        self.elapsed = 0.0
        self.gen = 0
        self.gen_best = 0
        self.alpha = cfg.alpha0
        self.pop = initialize_population(self.m, cfg.mu, cfg.p_init, self._rng(_INIT, -1))
        self._evaluate(self.pop)
        self.best = _best(self.pop)
        if self.best.f == 0 and self.evaluator.unique_count(np.zeros(self.m, bool)) == 0:
            # already anonymous: deleting nothing ties on f and has fewest ones
            self.best = Individual(np.zeros(self.m, dtype=bool), 0)
        self.trajectory = [self.best.f]
        self.elapsed = time.perf_counter() - self._t0

    def _rng(self, op: int, gen: int | None = None):
        gen = self.gen if gen is None else gen
        return np.random.default_rng([self.cfg.seed, gen + 1, op])

    def _fitness(self, ind: Individual, unique_nodes=None) -> int:
        if unique_nodes is None:
            unique_nodes = self.evaluator.unique_mask(ind.bits)
        return int(unique_nodes.sum()) + max(0, ind.ones - self.gamma)

    def _evaluate(self, pop) -> None:
        for ind in pop:
            if ind.f is None:
                ind.f = self._fitness(ind)

    @property
    def done(self) -> bool:
        return self.gen - self.gen_best >= self.cfg.tau or self.best.f == 0

    def step(self) -> bool:
        """Run one generation; returns False (and does nothing) once terminated."""
        if self.done:
            return False
        t0 = time.perf_counter()
        cfg = self.cfg
        fs = np.array([ind.f for ind in self.pop])
        ones = np.array([ind.ones for ind in self.pop])
        idx = _select(cfg.parental, fs, ones, cfg.lam, cfg.tournament_t, self._rng(_PARENTS))
        children = crossover([self.pop[i] for i in idx], cfg.crossover, self._rng(_CROSS), cfg.c)
        rng = self._rng(_MUTATE)
        if cfg.uniqueness_aware:
            mutated = []
            for ch in children:
                mask = self.evaluator.unique_mask(ch.bits)
                out = mutate_uniqueness_aware(ch, self.alpha, self.evaluator, rng, mask)
                if out is ch and ch.f is None:
                    # unchanged child: its unique set is the one just computed
                    ch.f = self._fitness(ch, mask)
                mutated.append(out)
            children = mutated
        else:
            children = mutate(children, self.alpha, rng)
        self._evaluate(children)
        cand = _best(children)
        if cand.f < self.best.f:
            self.best = cand
            self.gen_best = self.gen
        elif cand.f == self.best.f and cand.ones < self.best.ones:
            # same fitness with fewer deletions; not counted as progress
            self.best = cand
        self.pop = environmental_select(self.pop, children, cfg.mu, cfg.environmental,
                                        self._rng(_SURVIVE), cfg.tournament_t)
        self.alpha = decay(self.alpha, cfg.eta, self.gen, self.m)
        self.gen += 1
        self.trajectory.append(self.best.f)
        self.elapsed += time.perf_counter() - t0
        return True

    def advance(self, generations: int | None = None) -> int:
        """Step until terminated or ``generations`` steps ran; returns steps taken."""
        steps = 0
        while (generations is None or steps < generations) and self.step():
            steps += 1
        return steps

    def result(self) -> RunResult:
        bits = np.array(self.best.bits)
        return RunResult(
            best_bits=bits,
            best_f=int(self.best.f),
            best_unique=int(self.best.f) - max(0, self.best.ones - self.gamma),
            generations=self.gen,
            trajectory=list(self.trajectory),
            seed=self.cfg.seed,
            wall_time=self.elapsed,
            gamma=self.gamma,
        )


def run(g: Graph, cfg: GAConfig, gamma: int | None = None,
        max_generations: int | None = None) -> RunResult:
    """Run the GA (or the uniqueness-aware GA if ``cfg.uniqueness_aware``)."""
    state = GAState(g, cfg, gamma)
    state.advance(max_generations)
    return state.result()
