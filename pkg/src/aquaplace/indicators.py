"""Population homogeneity and per-generation diagnostics.

Distances live in two spaces: the Hamming distance between genomes (search
space) and the Frobenius distance between placement matrices (information
space).  Kappa is the mean normalized pairwise distance of a population in
either space: 0 for a population of clones, 1 for maximal heterogeneity; the
shared [0,1] range is what makes the two traces directly comparable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import pareto
from .errors import ValidationError

TRACE_HEADER = (
    "generation", "hypervolume", "pareto_count", "feasible_count",
    "f1_min_feas", "f1_max_feas", "f1_min_infeas", "f1_max_infeas",
    "f2_min_feas", "f2_max_feas", "f2_min_infeas", "f2_max_infeas",
    "kappa_hamming", "kappa_frobenius",
)


def hamming(s, s_prime) -> int:
    """Number of differing genome components."""
    a = np.asarray(s)
    b = np.asarray(s_prime)
    if a.shape != b.shape:
        raise ValidationError(f"genome length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def frobenius(H, H_prime) -> float:
    """Frobenius norm of the element-wise difference of two matrices."""
    a = np.asarray(H, dtype=np.float64)
    b = np.asarray(H_prime, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"matrix shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def kappa_from_distances(distances: np.ndarray, normalizer: float) -> float:
    """Mean pairwise distance, normalized and clamped into [0, 1].

    ``distances`` is the condensed vector of all unordered-pair distances,
    so its length is k_max = (mu^2 - mu) / 2.
    """
    if not normalizer > 0:
        raise ValidationError("kappa normalizer must be positive")
    d = np.asarray(distances, dtype=np.float64)
    if d.size == 0:
        raise ValidationError("kappa needs at least one pair (population size >= 2)")
    return float(np.minimum(d / normalizer, 1.0).mean())


def kappa(population: Sequence, dist: Callable, normalizer: float) -> float:
    """Kappa over all unordered pairs of ``population`` under ``dist``."""
    mu = len(population)
    if mu < 2:
        raise ValidationError("kappa needs a population of at least 2")
    pair_d = [
        dist(population[i], population[j])
        for i in range(mu)
        for j in range(i + 1, mu)
    ]
    return kappa_from_distances(np.asarray(pair_d, dtype=np.float64), normalizer)


@dataclass(frozen=True)
class GenerationRecord:
    """One row of the per-generation diagnostics trace.

    Hypervolume and the feasible min-max pairs are None while the population
    holds no feasible individual; the infeasible pairs are None when everyone
    is feasible.
    """

    generation: int
    hypervolume: float | None
    pareto_count: int
    feasible_count: int
    f1_minmax_feasible: tuple[float, float] | None
    f1_minmax_infeasible: tuple[float, float] | None
    f2_minmax_feasible: tuple[float, float] | None
    f2_minmax_infeasible: tuple[float, float] | None
    kappa_hamming: float
    kappa_frobenius: float


def _minmax(values: np.ndarray) -> tuple[float, float] | None:
    if values.size == 0:
        return None
    return float(values.min()), float(values.max())


def record_generation(
    generation: int,
    points: np.ndarray,
    violations: np.ndarray,
    kappa_hamming: float,
    kappa_frobenius: float,
    ref: tuple[float, float],
) -> GenerationRecord:
    """Summarize an evaluated population into one trace record.

    ``points`` is (mu, 2) objective seconds, ``violations`` the matching
    constraint violations; ``ref`` is the hypervolume reference point.
    """
    points = np.asarray(points, dtype=np.float64)
    violations = np.asarray(violations, dtype=np.float64)
    feasible = violations == 0
    feasible_pts = points[feasible]
    infeasible_pts = points[~feasible]

    if len(feasible_pts):
        mask = pareto.nondominated_mask(feasible_pts)
        pareto_count = int(mask.sum())
        hypervolume = pareto.hypervolume_2d(feasible_pts[mask], ref)
    else:
        pareto_count = 0
        hypervolume = None

    return GenerationRecord(
        generation=generation,
        hypervolume=hypervolume,
        pareto_count=pareto_count,
        feasible_count=int(feasible.sum()),
        f1_minmax_feasible=_minmax(feasible_pts[:, 0]) if len(feasible_pts) else None,
        f1_minmax_infeasible=_minmax(infeasible_pts[:, 0]) if len(infeasible_pts) else None,
        f2_minmax_feasible=_minmax(feasible_pts[:, 1]) if len(feasible_pts) else None,
        f2_minmax_infeasible=_minmax(infeasible_pts[:, 1]) if len(infeasible_pts) else None,
        kappa_hamming=kappa_hamming,
        kappa_frobenius=kappa_frobenius,
    )


def _cell(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def trace_row(rec: GenerationRecord) -> tuple[str, ...]:
    f1f = rec.f1_minmax_feasible or (None, None)
    f1i = rec.f1_minmax_infeasible or (None, None)
    f2f = rec.f2_minmax_feasible or (None, None)
    f2i = rec.f2_minmax_infeasible or (None, None)
    return (
        str(rec.generation),
        _cell(rec.hypervolume),
        str(rec.pareto_count),
        str(rec.feasible_count),
        _cell(f1f[0]), _cell(f1f[1]), _cell(f1i[0]), _cell(f1i[1]),
        _cell(f2f[0]), _cell(f2f[1]), _cell(f2i[0]), _cell(f2i[1]),
        _cell(rec.kappa_hamming),
        _cell(rec.kappa_frobenius),
    )


def write_trace_csv(records: Sequence[GenerationRecord], path: str) -> None:
    """Indicator trace CSV; absent values are emitted as empty fields."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for rec in records:
            writer.writerow(trace_row(rec))
