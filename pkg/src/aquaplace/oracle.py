"""Exhaustive ground truth for small instances.

Enumerates every feasible placement, recovers the exact Pareto set and
frontier (with hypervolume), and computes, over all feasible pairs, the
search-space (Hamming) and information-space (Frobenius) distances next to
the objective gaps.  The engine's output on the same instance can then be
checked for containment, and the pairwise records expose how loosely genome
distance tracks matrix distance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from scipy.spatial.distance import pdist

from . import pareto, placement
from .engine import default_reference_point
from .errors import CapExceededError, ValidationError
from .events import EventTensor
from .placement import PenaltyPolicy

DEFAULT_CAP = 10**7


class PairRecord(NamedTuple):
    hamming: int
    frobenius: float
    df1: float
    df2: float


@dataclass(frozen=True)
class ExhaustiveResult:
    pareto_set: list[np.ndarray]  # every placement mapping onto the frontier
    pareto_frontier: np.ndarray  # (m, 2) distinct non-dominated points
    hypervolume: float
    total_feasible: int
    reference_point: tuple[float, float]


@dataclass(frozen=True)
class BinSummary:
    bin_kind: str  # "hamming" | "frobenius"
    bin_key: int  # hamming value, or frobenius bin index
    count: int
    frobenius_mean: float | None
    frobenius_std: float | None
    df1_mean: float | None
    df1_std: float | None
    df2_mean: float | None
    df2_std: float | None


@dataclass(frozen=True)
class PairwiseResult:
    n_placements: int
    n_pairs: int
    hamming: np.ndarray  # condensed pair vectors, combinations(m, 2) order
    frobenius: np.ndarray
    df1: np.ndarray
    df2: np.ndarray
    summary: list[BinSummary]

    def records(self) -> Iterator[PairRecord]:
        for h, f, d1, d2 in zip(self.hamming, self.frobenius, self.df1, self.df2):
            yield PairRecord(int(h), float(f), float(d1), float(d2))


def enumerate_feasible(n_locations: int, budget: int,
                       cap: int = DEFAULT_CAP) -> Iterator[np.ndarray]:
    """All genomes with 1..budget ones, in lexicographic combination order."""
    total = placement.count_feasible(n_locations, budget)
    if total > cap:
        raise CapExceededError(
            f"{total} feasible placements exceed the cap of {cap}; "
            "use the evolutionary engine for instances of this size"
        )
    for k in range(1, budget + 1):
        for combo in itertools.combinations(range(n_locations), k):
            genome = np.zeros(n_locations, dtype=np.uint8)
            genome[list(combo)] = 1
            yield genome


def _evaluate_feasible(
    tensor: EventTensor,
    tau: float,
    budget: int,
    penalty: PenaltyPolicy,
    cap: int,
    include_t0: bool = False,
) -> tuple[list[np.ndarray], np.ndarray]:
    """Genomes (after any reject-mode filtering) and their (m, 2) points."""
    steps = placement.detection_step_table(tensor.values, tau, include_t0)
    penalty_s = penalty.seconds_for(tensor.grid)
    delta_t = tensor.grid.delta_t
    weights = tensor.weights

    genomes: list[np.ndarray] = []
    points: list[placement.ObjectivePoint] = []
    for genome in enumerate_feasible(tensor.n_locations, budget, cap):
        event_steps = steps[np.flatnonzero(genome)].min(axis=0)
        if penalty.mode == "reject" and np.isinf(event_steps).any():
            continue
        times = placement.detection_times_s(event_steps, delta_t, penalty_s)
        genomes.append(genome)
        points.append(placement.objectives_from_times(times, weights))
    return genomes, np.asarray(points, dtype=np.float64).reshape(len(points), 2)


def exhaustive_pareto(
    tensor: EventTensor,
    tau: float,
    budget: int,
    penalty: PenaltyPolicy = PenaltyPolicy(),
    cap: int = DEFAULT_CAP,
    reference_point: tuple[float, float] | None = None,
    include_t0: bool = False,
) -> ExhaustiveResult:
    """Evaluate every feasible placement and keep the non-dominated ones.

    The Pareto set keeps every placement whose objective point is dominated
    by none; the frontier is the set of distinct points (rounded to 1e-9 s),
    usually smaller because the mapping is many-to-one.
    """
    total = placement.count_feasible(tensor.n_locations, budget)
    genomes, points = _evaluate_feasible(tensor, tau, budget, penalty, cap, include_t0)
    if not genomes:
        raise ValidationError("no feasible placement (reject-mode penalty removed all)")

    mask = pareto.nondominated_mask(points)
    pareto_set = [genomes[i] for i in np.flatnonzero(mask)]
    frontier = np.unique(np.round(points[mask], 9), axis=0)

    ref = reference_point or default_reference_point(
        penalty.seconds_for(tensor.grid), tensor.grid.delta_t
    )
    hv = pareto.hypervolume_2d(frontier, ref)
    return ExhaustiveResult(
        pareto_set=pareto_set,
        pareto_frontier=frontier,
        hypervolume=hv,
        total_feasible=total,
        reference_point=ref,
    )


def _stats(x: np.ndarray) -> tuple[float | None, float | None]:
    if x.size == 0:
        return None, None
    return float(x.mean()), float(x.std())


def _summarize(hamming: np.ndarray, frobenius: np.ndarray, df1: np.ndarray,
               df2: np.ndarray, bins: int) -> list[BinSummary]:
    rows: list[BinSummary] = []
    for h in np.unique(hamming):
        sel = hamming == h
        fm, fs = _stats(frobenius[sel])
        d1m, d1s = _stats(df1[sel])
        d2m, d2s = _stats(df2[sel])
        rows.append(BinSummary("hamming", int(h), int(sel.sum()),
                               fm, fs, d1m, d1s, d2m, d2s))

    lo, hi = float(frobenius.min()), float(frobenius.max())
    if hi > lo:
        edges = np.linspace(lo, hi, bins + 1)
        idx = np.clip(np.digitize(frobenius, edges[1:-1]), 0, bins - 1)
    else:
        idx = np.zeros(len(frobenius), dtype=int)
    for b in range(bins):
        sel = idx == b
        fm, fs = _stats(frobenius[sel])
        d1m, d1s = _stats(df1[sel])
        d2m, d2s = _stats(df2[sel])
        rows.append(BinSummary("frobenius", b, int(sel.sum()),
                               fm, fs, d1m, d1s, d2m, d2s))
    return rows


def pairwise_analysis(
    tensor: EventTensor,
    tau: float,
    budget: int,
    penalty: PenaltyPolicy = PenaltyPolicy(),
    bins: int = 8,
    cap: int = DEFAULT_CAP,
    include_t0: bool = False,
) -> PairwiseResult:
    """Distances and objective gaps over all unordered feasible pairs.

    The summary bins pairs twice: by exact Hamming value and by ``bins``
    equal-width intervals over the observed Frobenius range, reporting the
    mean and (population) standard deviation of the Frobenius distance and of
    |f1 - f1'|, |f2 - f2'| within each bin.
    """
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    if penalty.mode == "penalize":
        m_expected = placement.count_feasible(tensor.n_locations, budget)
        if m_expected * (m_expected - 1) // 2 > cap:
            raise CapExceededError(
                f"{m_expected * (m_expected - 1) // 2} pairs exceed the cap of {cap}"
            )
    genomes, points = _evaluate_feasible(tensor, tau, budget, penalty, cap, include_t0)
    m = len(genomes)
    if m < 2:
        raise ValidationError("pairwise analysis needs at least two feasible placements")
    n_pairs = m * (m - 1) // 2
    if n_pairs > cap:
        raise CapExceededError(f"{n_pairs} pairs exceed the cap of {cap}")

    genome_mat = np.array(genomes, dtype=np.float64)
    hamming = np.rint(pdist(genome_mat, metric="hamming") * tensor.n_locations
                      ).astype(np.int64)

    values_flat = tensor.values.reshape(tensor.n_locations, -1)
    h_stack = np.empty((m, values_flat.shape[1]))
    for i, genome in enumerate(genomes):
        h_stack[i] = values_flat[np.flatnonzero(genome)].max(axis=0)
    frobenius = pdist(h_stack)

    df1 = pdist(points[:, :1], metric="cityblock")
    df2 = pdist(points[:, 1:], metric="cityblock")

    return PairwiseResult(
        n_placements=m,
        n_pairs=n_pairs,
        hamming=hamming,
        frobenius=frobenius,
        df1=df1,
        df2=df2,
        summary=_summarize(hamming, frobenius, df1, df2, bins),
    )
