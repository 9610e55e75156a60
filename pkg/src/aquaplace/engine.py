"""NSGA-II over binary placement genomes with constraint domination.

The loop is the classic elitist (mu + mu) scheme: binary tournaments pick
parents, two-point (or uniform) crossover and bit-flip mutation produce mu
children, and survival truncates the combined pool.  Feasible individuals
always outrank infeasible ones; infeasible individuals are compared by
constraint violation, which reproduces the long all-infeasible opening phase
seen when the budget is much smaller than half of |L|.

Determinism: one PCG64 stream drives initialization, selection, and the
operators, consumed in a fixed order; objective evaluations are pure and may
run on worker threads without affecting any result bit.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist

from . import indicators, pareto, placement
from .errors import ParseError, ValidationError
from .events import EventTensor
from .indicators import GenerationRecord
from .network import Network
from .placement import ObjectivePoint, PenaltyPolicy


@dataclass(frozen=True)
class KappaHammingCriterion:
    epsilon: float


@dataclass(frozen=True)
class KappaFrobeniusCriterion:
    epsilon: float


@dataclass(frozen=True)
class HypervolumeStagnationCriterion:
    """Stop once hypervolume has been present and flat (within ``tol``)
    over the last ``generations`` + 1 records."""

    generations: int
    tol: float = 0.0


TerminationCriterion = Union[
    KappaHammingCriterion, KappaFrobeniusCriterion, HypervolumeStagnationCriterion
]


@dataclass(frozen=True)
class EngineConfig:
    population_size: int
    max_generations: int
    budget: int
    threshold: float
    seed: int = 0
    crossover: str = "two_point"
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # default 1/|L|
    termination: tuple[TerminationCriterion, ...] = ()
    penalty: PenaltyPolicy = PenaltyPolicy()
    reference_point: tuple[float, float] | None = None
    include_t0: bool = False
    budget_aware_init: bool = False

    def __post_init__(self) -> None:
        if self.population_size < 4 or self.population_size % 2 != 0:
            raise ValidationError("population_size must be even and >= 4")
        if self.max_generations < 0:
            raise ValidationError("max_generations must be >= 0")
        if self.budget < 1:
            raise ValidationError("budget must be >= 1")
        if not self.threshold > 0:
            raise ValidationError("threshold must be positive")
        if self.crossover not in ("two_point", "uniform"):
            raise ValidationError(f"unknown crossover {self.crossover!r}")
        for name, rate in (("crossover_rate", self.crossover_rate),
                           ("mutation_rate", self.mutation_rate)):
            if rate is not None and not 0.0 <= rate <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1]")
        for crit in self.termination:
            if isinstance(crit, (KappaHammingCriterion, KappaFrobeniusCriterion)):
                if not crit.epsilon > 0:
                    raise ValidationError("kappa epsilon must be positive")
            elif isinstance(crit, HypervolumeStagnationCriterion):
                if crit.generations < 1:
                    raise ValidationError("stagnation window must be >= 1 generations")
                if crit.tol < 0:
                    raise ValidationError("stagnation tol must be >= 0")
            else:
                raise ValidationError(f"unknown termination criterion {crit!r}")


_CONFIG_KEYS = {
    "population_size", "max_generations", "budget", "threshold", "seed",
    "crossover", "crossover_rate", "mutation_rate", "termination", "penalty",
    "reference_point", "include_t0", "budget_aware_init",
}
_REQUIRED_KEYS = {"population_size", "max_generations", "budget", "threshold"}


def _termination_from_dict(item: dict) -> TerminationCriterion:
    if not isinstance(item, dict) or "kind" not in item:
        raise ValidationError(f"termination entries need a 'kind': {item!r}")
    kind = item["kind"]
    rest = {k: v for k, v in item.items() if k != "kind"}
    try:
        if kind == "kappa_hamming":
            return KappaHammingCriterion(**rest)
        if kind == "kappa_frobenius":
            return KappaFrobeniusCriterion(**rest)
        if kind == "hypervolume_stagnant":
            return HypervolumeStagnationCriterion(**rest)
    except TypeError as exc:
        raise ValidationError(f"bad termination entry {item!r}: {exc}") from exc
    raise ValidationError(f"unknown termination kind {kind!r}")


def config_from_dict(doc: dict) -> EngineConfig:
    """Build an EngineConfig from its JSON form; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - set(doc)
    if missing:
        raise ValidationError(f"missing config keys: {sorted(missing)}")

    kwargs = dict(doc)
    if "termination" in kwargs:
        kwargs["termination"] = tuple(
            _termination_from_dict(item) for item in kwargs["termination"]
        )
    if "penalty" in kwargs:
        pen = kwargs["penalty"]
        if not isinstance(pen, dict) or set(pen) - {"mode", "seconds"}:
            raise ValidationError(f"bad penalty object {pen!r}")
        kwargs["penalty"] = PenaltyPolicy(**pen)
    if kwargs.get("reference_point") is not None:
        rp = kwargs["reference_point"]
        if not (isinstance(rp, (list, tuple)) and len(rp) == 2):
            raise ValidationError(f"reference_point must be a [r1, r2] pair, got {rp!r}")
        kwargs["reference_point"] = (float(rp[0]), float(rp[1]))
    try:
        return EngineConfig(**kwargs)
    except TypeError as exc:
        raise ValidationError(f"bad config value: {exc}") from exc


def load_config(path: str) -> EngineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(doc)


def config_to_dict(config: EngineConfig) -> dict:
    """JSON-ready snapshot (used by run manifests)."""
    termination = []
    for crit in config.termination:
        if isinstance(crit, KappaHammingCriterion):
            termination.append({"kind": "kappa_hamming", "epsilon": crit.epsilon})
        elif isinstance(crit, KappaFrobeniusCriterion):
            termination.append({"kind": "kappa_frobenius", "epsilon": crit.epsilon})
        else:
            termination.append({"kind": "hypervolume_stagnant",
                                "generations": crit.generations, "tol": crit.tol})
    return {
        "population_size": config.population_size,
        "max_generations": config.max_generations,
        "budget": config.budget,
        "threshold": config.threshold,
        "seed": config.seed,
        "crossover": config.crossover,
        "crossover_rate": config.crossover_rate,
        "mutation_rate": config.mutation_rate,
        "termination": termination,
        "penalty": {"mode": config.penalty.mode, "seconds": config.penalty.seconds},
        "reference_point": list(config.reference_point) if config.reference_point else None,
        "include_t0": config.include_t0,
        "budget_aware_init": config.budget_aware_init,
    }


@dataclass
class Individual:
    genome: np.ndarray
    objectives: ObjectivePoint | None = None
    violation: float = 0.0
    rank: int | None = None
    crowding: float | None = None
    h_flat: np.ndarray | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return self.violation == 0


@dataclass
class RunResult:
    population: list[Individual]
    pareto_set: list[np.ndarray]
    pareto_frontier: np.ndarray  # (m, 2) distinct non-dominated points
    trace: list[GenerationRecord]
    termination_reason: str
    min_violations: list[float]
    reference_point: tuple[float, float]


def default_reference_point(penalty_s: float, delta_t: float) -> tuple[float, float]:
    """One step beyond the worst attainable objective values, fixed across
    generations so hypervolume traces stay comparable."""
    r = penalty_s + delta_t
    return (r, r)


class _Evaluator:
    """Scores genomes against one tensor; pure, so thread-safe."""

    def __init__(self, tensor: EventTensor, config: EngineConfig):
        self.tensor = tensor
        self.config = config
        self.penalty_s = config.penalty.seconds_for(tensor.grid)
        self.steps = placement.detection_step_table(
            tensor.values, config.threshold, config.include_t0
        )
        self.values_flat = tensor.values.reshape(tensor.n_locations, -1)
        self.n_cells = self.values_flat.shape[1]

    def evaluate(self, ind: Individual) -> None:
        selected = np.flatnonzero(ind.genome)
        vio = float(placement.violation(ind.genome, self.config.budget))
        if selected.size == 0:
            # empty placement: no signal at all, objectives by convention
            ind.h_flat = np.zeros(self.n_cells)
            ind.objectives = ObjectivePoint(self.penalty_s, 0.0)
            ind.violation = vio
            return
        ind.h_flat = self.values_flat[selected].max(axis=0)
        event_steps = self.steps[selected].min(axis=0)
        undetected = np.isinf(event_steps)
        times = placement.detection_times_s(
            event_steps, self.tensor.grid.delta_t, self.penalty_s
        )
        point = placement.objectives_from_times(times, self.tensor.weights)
        if not (np.isfinite(point.f1) and np.isfinite(point.f2)):
            raise ValidationError(f"non-finite objectives {point} for genome")
        if self.config.penalty.mode == "reject":
            vio += float(undetected.sum())
        ind.objectives = point
        ind.violation = vio

    def evaluate_all(self, individuals: list[Individual], workers: int = 1) -> None:
        if workers > 1 and len(individuals) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(self.evaluate, individuals))
        else:
            for ind in individuals:
                self.evaluate(ind)


def initialize(config: EngineConfig, n_locations: int,
               rng: np.random.Generator) -> list[Individual]:
    """Random initial genomes: each bit Bernoulli(1/2), or 1..budget random
    ones per genome when ``budget_aware_init`` is set."""
    individuals = []
    for _ in range(config.population_size):
        if config.budget_aware_init:
            k = int(rng.integers(1, min(config.budget, n_locations) + 1))
            genome = np.zeros(n_locations, dtype=np.uint8)
            genome[rng.choice(n_locations, size=k, replace=False)] = 1
        else:
            genome = rng.integers(0, 2, size=n_locations, dtype=np.uint8)
        individuals.append(Individual(genome=genome))
    return individuals


def constrained_better(a: Individual, b: Individual) -> Individual:
    """Constraint-domination tournament rule; ties go to the first argument."""
    if a.objectives is None or b.objectives is None:
        raise ValidationError("individuals must be evaluated before comparison")
    if a.feasible != b.feasible:
        return a if a.feasible else b
    if not a.feasible:
        return a if a.violation <= b.violation else b
    if a.rank != b.rank:
        # ranks are always assigned to feasible individuals before selection
        return a if a.rank < b.rank else b
    if (b.crowding or 0.0) > (a.crowding or 0.0):
        return b
    return a


def two_point_crossover(p1: np.ndarray, p2: np.ndarray,
                        cut1: int, cut2: int) -> tuple[np.ndarray, np.ndarray]:
    """Swap the segment [cut1, cut2) between the parents."""
    c1, c2 = p1.copy(), p2.copy()
    c1[cut1:cut2] = p2[cut1:cut2]
    c2[cut1:cut2] = p1[cut1:cut2]
    return c1, c2


def uniform_crossover(p1: np.ndarray, p2: np.ndarray,
                      swap_mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c1 = np.where(swap_mask, p2, p1).astype(np.uint8)
    c2 = np.where(swap_mask, p1, p2).astype(np.uint8)
    return c1, c2


def make_offspring(parents: list[Individual], config: EngineConfig,
                   rng: np.random.Generator) -> list[Individual]:
    """mu children via tournament selection, crossover, bit-flip mutation.

    RNG consumption order per child pair: two tournaments, crossover coin,
    cut points / swap mask, then the two mutation masks.
    """
    n = len(parents[0].genome)
    mu = config.population_size
    mutation_rate = config.mutation_rate if config.mutation_rate is not None else 1.0 / n

    def tournament() -> Individual:
        i, j = rng.integers(0, len(parents), size=2)
        return constrained_better(parents[i], parents[j])

    children: list[Individual] = []
    for _ in range(mu // 2):
        pa, pb = tournament().genome, tournament().genome
        if rng.random() < config.crossover_rate:
            if config.crossover == "two_point":
                cut1, cut2 = sorted(rng.integers(1, n, size=2)) if n > 1 else (0, 0)
                ca, cb = two_point_crossover(pa, pb, int(cut1), int(cut2))
            else:
                ca, cb = uniform_crossover(pa, pb, rng.random(n) < 0.5)
        else:
            ca, cb = pa.copy(), pb.copy()
        for child in (ca, cb):
            flips = rng.random(n) < mutation_rate
            child ^= flips.astype(np.uint8)
            children.append(Individual(genome=child))
    return children


def _assign_ranks(feasible: list[Individual]) -> list[list[int]]:
    """Non-dominated sort the feasible individuals in place; returns fronts."""
    if not feasible:
        return []
    points = np.array([ind.objectives for ind in feasible])
    fronts = pareto.non_dominated_sort(points)
    for rank, front in enumerate(fronts):
        crowd = pareto.crowding_distance(points[front])
        for member, c in zip(front, crowd):
            feasible[member].rank = rank
            feasible[member].crowding = float(c)
    return fronts


def survive(pool: list[Individual], config: EngineConfig) -> list[Individual]:
    """Elitist truncation: feasible by (rank, crowding) first, then infeasible
    by ascending violation; a partial front is admitted by descending crowding."""
    mu = config.population_size
    feasible = [ind for ind in pool if ind.feasible]
    infeasible = [ind for ind in pool if not ind.feasible]
    for ind in infeasible:
        ind.rank, ind.crowding = None, None

    survivors: list[Individual] = []
    fronts = _assign_ranks(feasible)
    for front in fronts:
        members = [feasible[i] for i in front]
        if len(survivors) + len(members) <= mu:
            survivors.extend(members)
        else:
            crowd = np.array([-(m.crowding or 0.0) for m in members])
            order = np.argsort(crowd, kind="stable")
            survivors.extend(members[i] for i in order[: mu - len(survivors)])
        if len(survivors) == mu:
            return survivors

    vio = np.array([ind.violation for ind in infeasible])
    order = np.argsort(vio, kind="stable")
    survivors.extend(infeasible[i] for i in order[: mu - len(survivors)])
    return survivors


def _population_kappas(population: list[Individual], n_locations: int,
                       frobenius_norm: float) -> tuple[float, float, float]:
    """Kappa-Hamming, Kappa-Frobenius, and the updated running Frobenius max.

    Hamming normalizes by the theoretical maximum |L|; Frobenius by the
    largest pairwise distance observed so far (monotone, so later values stay
    comparable), and is 0 while no two matrices have ever differed.
    """
    genomes = np.array([ind.genome for ind in population], dtype=np.float64)
    d_hamming = pdist(genomes, metric="hamming") * n_locations
    kappa_h = indicators.kappa_from_distances(d_hamming, float(n_locations))

    h_stack = np.array([ind.h_flat for ind in population])
    d_frob = pdist(h_stack)
    frobenius_norm = max(frobenius_norm, float(d_frob.max()))
    if frobenius_norm == 0.0:
        kappa_f = 0.0
    else:
        kappa_f = indicators.kappa_from_distances(d_frob, frobenius_norm)
    return kappa_h, kappa_f, frobenius_norm


def _check_termination(config: EngineConfig,
                       trace: list[GenerationRecord]) -> str | None:
    last = trace[-1]
    for crit in config.termination:
        if isinstance(crit, KappaHammingCriterion):
            if last.kappa_hamming <= crit.epsilon:
                return "kappa_hamming"
        elif isinstance(crit, KappaFrobeniusCriterion):
            if last.kappa_frobenius <= crit.epsilon:
                return "kappa_frobenius"
        else:
            window = trace[-(crit.generations + 1):]
            if len(window) == crit.generations + 1:
                hvs = [rec.hypervolume for rec in window]
                if all(hv is not None for hv in hvs):
                    if max(hvs) - min(hvs) <= crit.tol:  # type: ignore[type-var]
                        return "hypervolume_stagnant"
    if last.generation >= config.max_generations - 1:
        return "max_generations"
    return None


def run(net: Network, tensor: EventTensor, config: EngineConfig,
        workers: int = 1) -> RunResult:
    """Full NSGA-II run; generation 0 is the evaluated initial population.

    The trace gets one record per generation (so exactly ``max_generations``
    records when only that criterion fires, and a single record when it is 0)
    and the run stops at the first satisfied termination criterion.
    """
    if tuple(net.sensor_locations) != tensor.locations:
        raise ValidationError("tensor locations do not match the network's L")
    if tuple(net.event_sources) != tensor.events:
        raise ValidationError("tensor events do not match the network's A")

    n = tensor.n_locations
    evaluator = _Evaluator(tensor, config)
    ref = config.reference_point or default_reference_point(
        evaluator.penalty_s, tensor.grid.delta_t
    )
    rng = np.random.default_rng(config.seed)

    population = initialize(config, n, rng)
    evaluator.evaluate_all(population, workers)
    _assign_ranks([ind for ind in population if ind.feasible])

    trace: list[GenerationRecord] = []
    min_violations: list[float] = []
    frob_norm = 0.0

    def record(generation: int) -> None:
        nonlocal frob_norm
        kappa_h, kappa_f, frob_norm = _population_kappas(population, n, frob_norm)
        points = np.array([ind.objectives for ind in population])
        violations = np.array([ind.violation for ind in population])
        trace.append(indicators.record_generation(
            generation, points, violations, kappa_h, kappa_f, ref
        ))
        min_violations.append(float(violations.min()))

    record(0)
    reason = _check_termination(config, trace)
    while reason is None:
        children = make_offspring(population, config, rng)
        evaluator.evaluate_all(children, workers)
        population = survive(population + children, config)
        record(trace[-1].generation + 1)
        reason = _check_termination(config, trace)

    pareto_set, frontier = _final_front(population)
    return RunResult(
        population=population,
        pareto_set=pareto_set,
        pareto_frontier=frontier,
        trace=trace,
        termination_reason=reason,
        min_violations=min_violations,
        reference_point=ref,
    )


def _final_front(population: list[Individual]) -> tuple[list[np.ndarray], np.ndarray]:
    """Feasible rank-0 genomes (deduplicated) and their distinct points."""
    feasible = [ind for ind in population if ind.feasible]
    if not feasible:
        return [], np.zeros((0, 2))
    points = np.array([ind.objectives for ind in feasible])
    mask = pareto.nondominated_mask(points)
    seen: set[str] = set()
    genomes = []
    for ind, keep in zip(feasible, mask):
        key = placement.placement_to_string(ind.genome)
        if keep and key not in seen:
            seen.add(key)
            genomes.append(ind.genome.copy())
    distinct = np.unique(np.round(points[mask], 9), axis=0)
    return genomes, distinct
