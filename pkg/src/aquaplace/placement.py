"""Sensor placements, placement matrices, objectives, and feasibility.

A placement is a binary genome over the candidate locations L.  Its placement
matrix is the element-wise maximum of the selected locations' sensor matrices:
the strongest signal any deployed sensor sees, per (time step, event).  An
event counts as detected at the first step (scanning t = 1..K by default)
where that signal reaches the threshold; undetected events contribute a
configurable penalty time.  The two objectives are the weighted mean and the
weighted population standard deviation of the per-event detection times, in
seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .events import EventTensor, TimeGrid


class ObjectivePoint(NamedTuple):
    f1: float  # mean detection time, seconds
    f2: float  # standard deviation of detection times, seconds


@dataclass(frozen=True)
class PenaltyPolicy:
    """How undetected events enter the objectives.

    ``penalize`` (default): an undetected event contributes ``seconds``
    (one step past the horizon, ``(K+1)*delta_t``, unless overridden), which
    keeps the objectives total and detection monotone.  ``reject``: the
    objectives are still computed with the penalty time, but the engine and
    the oracle treat any placement with an undetected event as infeasible.
    """

    mode: str = "penalize"
    seconds: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("penalize", "reject"):
            raise ValidationError(f"unknown penalty mode {self.mode!r}")
        if self.seconds is not None and not self.seconds > 0:
            raise ValidationError("penalty seconds must be positive")

    def seconds_for(self, grid: TimeGrid) -> float:
        if self.seconds is not None:
            return self.seconds
        return (grid.steps + 1) * grid.delta_t


def as_placement(bits, n_locations: int) -> np.ndarray:
    """Validate and normalize a genome to a uint8 array of exactly |L| bits."""
    s = np.asarray(bits)
    if s.shape != (n_locations,):
        raise ValidationError(f"placement length {s.shape} != ({n_locations},)")
    if not np.isin(s, (0, 1)).all():
        raise ValidationError("placement components must be 0 or 1")
    return s.astype(np.uint8)


def placement_to_string(s: np.ndarray) -> str:
    """Bitstring over L's order; leftmost bit is L[0]."""
    return "".join("1" if b else "0" for b in s)


def placement_from_string(text: str, n_locations: int) -> np.ndarray:
    if len(text) != n_locations or set(text) - {"0", "1"}:
        raise ValidationError(f"bad placement bitstring {text!r} for |L|={n_locations}")
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def placement_matrix(tensor: EventTensor, s) -> np.ndarray:
    """Element-wise maximum of the selected sensor matrices: (K+1) x |A|."""
    s = as_placement(s, tensor.n_locations)
    selected = np.flatnonzero(s)
    if selected.size == 0:
        raise ValidationError("placement selects no location")
    return tensor.values[selected].max(axis=0)


def detect(H: np.ndarray, event: int, tau: float, include_t0: bool = False) -> int | None:
    """First step index in 1..K (0..K with ``include_t0``) where the signal
    for ``event`` reaches ``tau``; None when it never does."""
    if not tau > 0:
        raise ValidationError("detection threshold tau must be positive")
    column = H[:, event] if include_t0 else H[1:, event]
    hits = np.flatnonzero(column >= tau)
    if hits.size == 0:
        return None
    return int(hits[0]) + (0 if include_t0 else 1)


def detection_step_table(values: np.ndarray, tau: float, include_t0: bool = False) -> np.ndarray:
    """Per (location, event) first crossing step; ``inf`` when never reached.

    Because the placement signal is the max over the selected locations, the
    placement's first crossing for an event is the min of these entries over
    the selected rows; this table lets populations be scored without building
    each placement matrix.
    """
    if not tau > 0:
        raise ValidationError("detection threshold tau must be positive")
    scan = values if include_t0 else values[:, 1:, :]
    hit = scan >= tau
    any_hit = hit.any(axis=1)
    first = hit.argmax(axis=1) + (0 if include_t0 else 1)
    return np.where(any_hit, first.astype(np.float64), np.inf)


def detection_times_s(
    steps: np.ndarray, delta_t: float, penalty_s: float
) -> np.ndarray:
    """Convert per-event crossing steps (``inf`` = undetected) to seconds."""
    return np.where(np.isfinite(steps), steps * delta_t, penalty_s)


def objectives_from_times(times_s: np.ndarray, weights: np.ndarray) -> ObjectivePoint:
    f1 = float(weights @ times_s)
    f2 = math.sqrt(float(weights @ (times_s - f1) ** 2))
    return ObjectivePoint(f1, f2)


def objectives(
    tensor: EventTensor,
    s,
    tau: float,
    penalty: PenaltyPolicy = PenaltyPolicy(),
    include_t0: bool = False,
) -> ObjectivePoint:
    """Weighted mean and population standard deviation of detection times.

    With uniform weights this is the plain mean / std over events.  Undetected
    events contribute the policy's penalty time.
    """
    H = placement_matrix(tensor, s)
    hit = (H if include_t0 else H[1:]) >= tau
    any_hit = hit.any(axis=0)
    first = hit.argmax(axis=0) + (0 if include_t0 else 1)
    steps = np.where(any_hit, first.astype(np.float64), np.inf)
    times = detection_times_s(steps, tensor.grid.delta_t, penalty.seconds_for(tensor.grid))
    return objectives_from_times(times, tensor.weights)


def violation(s, budget: int) -> int:
    """Budget-constraint violation: 0 iff 1 <= sum(s) <= budget."""
    ones = int(np.sum(np.asarray(s)))
    if ones == 0:
        return 1
    return max(0, ones - budget)


def count_feasible(n_locations: int, budget: int) -> int:
    """Number of placements with 1..budget sensors over n_locations sites."""
    if budget < 1 or budget > n_locations:
        raise ValidationError(f"budget {budget} outside [1, {n_locations}]")
    return sum(math.comb(n_locations, k) for k in range(1, budget + 1))
