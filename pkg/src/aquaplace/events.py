"""Concentration data: the event tensor and its per-location sensor matrices.

The tensor D holds one concentration value per (sensor location, time step,
event).  The (K+1) x |A| slice D[l] is the sensor matrix of location l: what a
sensor deployed there would read over time, one column per contamination event.
Tensors either come from the built-in plug-flow simulator or are ingested from
CSV exports of an external hydraulic simulator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import ParseError, ValidationError
from .network import Network

TENSOR_HEADER = ("location", "event", "t", "concentration")
WEIGHTS_HEADER = ("event", "weight")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid: ``steps`` intervals of ``delta_t`` seconds.

    Step indices run 0..steps inclusive, so a tensor has steps+1 rows per
    location; the horizon is ``t_max = steps * delta_t``.
    """

    delta_t: float = 3600.0
    steps: int = 24

    def __post_init__(self) -> None:
        if not self.delta_t > 0:
            raise ValidationError("delta_t must be positive")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")

    @property
    def t_max(self) -> float:
        return self.steps * self.delta_t


def uniform_weights(n_events: int) -> np.ndarray:
    return np.full(n_events, 1.0 / n_events)


@dataclass(frozen=True, eq=False)
class EventTensor:
    """Immutable dense concentration tensor with per-event weights.

    ``values`` has shape (|L|, steps+1, |A|); ``weights`` is a probability
    vector over events (uniform by default).  Arrays are made read-only at
    construction so tensors can be shared across threads.
    """

    grid: TimeGrid
    locations: tuple[str, ...]
    events: tuple[str, ...]
    values: np.ndarray
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        weights = self.weights
        if weights is None:
            weights = uniform_weights(len(self.events))
        weights = np.asarray(weights, dtype=np.float64)

        expected = (len(self.locations), self.grid.steps + 1, len(self.events))
        if values.shape != expected:
            raise ValidationError(f"tensor shape {values.shape} != expected {expected}")
        if not self.locations or not self.events:
            raise ValidationError("tensor needs at least one location and one event")
        if np.any(values < 0):
            raise ValidationError("concentrations must be non-negative")
        if weights.shape != (len(self.events),):
            raise ValidationError("weights length must equal the number of events")
        if np.any(weights < 0):
            raise ValidationError("event weights must be non-negative")
        if abs(float(weights.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"event weights must sum to 1, got {weights.sum()!r}")

        values.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @property
    def n_locations(self) -> int:
        return len(self.locations)

    @property
    def n_events(self) -> int:
        return len(self.events)

    def sensor_matrix(self, location: int) -> np.ndarray:
        """Read-only (steps+1) x |A| concentration slice for one location."""
        if not 0 <= location < self.n_locations:
            raise IndexError(
                f"location index {location} out of range [0, {self.n_locations})"
            )
        return self.values[location]


def travel_time_table(net: Network) -> np.ndarray:
    """Shortest directed travel time from every event source to every location.

    Returns a (|L|, |A|) array of seconds; unreachable pairs are ``inf``.
    Parallel edges collapse to their fastest pipe.
    """
    ids = net.node_ids
    index = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)

    best: dict[tuple[int, int], float] = {}
    for e in net.edges:
        key = (index[e.source], index[e.target])
        t = e.travel_time_s
        if key not in best or t < best[key]:
            best[key] = t
    if best:
        rows, cols, data = zip(*((r, c, t) for (r, c), t in best.items()))
        graph = csr_matrix((data, (rows, cols)), shape=(n, n))
    else:
        graph = csr_matrix((n, n))

    source_idx = [index[a] for a in net.event_sources]
    dist = dijkstra(graph, directed=True, indices=source_idx)  # (|A|, n)
    loc_idx = [index[l] for l in net.sensor_locations]
    return dist[:, loc_idx].T  # (|L|, |A|)


def simulate_plug_flow(
    net: Network,
    grid: TimeGrid,
    c0: float = 100.0,
    decay: float = 0.0,
) -> EventTensor:
    """Simplified transport: injection at t=0 arrives after the shortest
    directed travel time and persists thereafter.

    The concentration seen at location l for the event injected at a is
    ``c0 * exp(-decay * tau(a, l))`` from the first step index t with
    ``t * delta_t >= tau(a, l)`` onward, and 0 before (and forever, if l is
    unreachable from a).  Event weights are uniform.  This is a stand-in for
    a real hydraulic simulation; ingest exported tensors for real studies.
    """
    if c0 < 0:
        raise ValidationError("c0 must be non-negative")
    if decay < 0:
        raise ValidationError("decay rate must be non-negative")

    tau = travel_time_table(net)  # (|L|, |A|) seconds
    with np.errstate(invalid="ignore"):
        amplitude = np.where(np.isfinite(tau), c0 * np.exp(-decay * tau), 0.0)
    # first step index whose time is >= tau; inf stays past the horizon
    arrival_step = np.ceil(tau / grid.delta_t)
    steps = np.arange(grid.steps + 1, dtype=np.float64)
    reached = steps[None, :, None] >= arrival_step[:, None, :]
    values = reached * amplitude[:, None, :]
    return EventTensor(
        grid=grid,
        locations=net.sensor_locations,
        events=net.event_sources,
        values=values,
    )


def _read_rows(path: str, header: tuple[str, ...]) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except csv.Error as exc:
        raise ParseError(f"{path}: malformed CSV ({exc})") from exc
    if not rows:
        raise ParseError(f"{path}: missing header row")
    if tuple(rows[0]) != header:
        raise ParseError(f"{path}: expected header {','.join(header)!r}, got {rows[0]!r}")
    return rows[1:]


def load_event_tensor(
    path: str,
    net: Network,
    grid: TimeGrid,
    weights_path: str | None = None,
) -> EventTensor:
    """Ingest a tensor CSV (one row per nonzero cell); absent cells are 0.

    Location and event ids must resolve to the network's L and A.  Weights
    default to uniform unless a weights CSV is supplied.
    """
    loc_index = {l: i for i, l in enumerate(net.sensor_locations)}
    evt_index = {a: i for i, a in enumerate(net.event_sources)}
    values = np.zeros((len(loc_index), grid.steps + 1, len(evt_index)))

    for lineno, row in enumerate(_read_rows(path, TENSOR_HEADER), start=2):
        if len(row) != 4:
            raise ValidationError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
        loc, evt, t_raw, c_raw = row
        if loc not in loc_index:
            raise ValidationError(f"{path}:{lineno}: unknown location id {loc!r}")
        if evt not in evt_index:
            raise ValidationError(f"{path}:{lineno}: unknown event id {evt!r}")
        try:
            t = int(t_raw)
            c = float(c_raw)
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: malformed row ({exc})") from exc
        if t < 0 or t > grid.steps:
            raise ValidationError(
                f"{path}:{lineno}: step {t} outside [0, {grid.steps}]"
            )
        if c < 0:
            raise ValidationError(f"{path}:{lineno}: negative concentration {c!r}")
        values[loc_index[loc], t, evt_index[evt]] = c

    weights = None
    if weights_path is not None:
        weights = np.zeros(len(evt_index))
        for lineno, row in enumerate(_read_rows(weights_path, WEIGHTS_HEADER), start=2):
            if len(row) != 2:
                raise ValidationError(
                    f"{weights_path}:{lineno}: expected 2 fields, got {len(row)}"
                )
            evt, w_raw = row
            if evt not in evt_index:
                raise ValidationError(f"{weights_path}:{lineno}: unknown event id {evt!r}")
            try:
                weights[evt_index[evt]] = float(w_raw)
            except ValueError as exc:
                raise ValidationError(f"{weights_path}:{lineno}: malformed row ({exc})") from exc

    return EventTensor(
        grid=grid,
        locations=net.sensor_locations,
        events=net.event_sources,
        values=values,
        weights=weights,
    )


def _fmt(x: float) -> str:
    # repr of a Python float round-trips exactly
    return repr(float(x))


def save_event_tensor(
    tensor: EventTensor,
    path: str,
    weights_path: str | None = None,
) -> None:
    """Write the tensor CSV (nonzero cells only) and optionally the weights CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TENSOR_HEADER)
        for li, t, ai in np.argwhere(tensor.values != 0):
            writer.writerow(
                (tensor.locations[li], tensor.events[ai], int(t),
                 _fmt(tensor.values[li, t, ai]))
            )
    if weights_path is not None:
        with open(weights_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(WEIGHTS_HEADER)
            for ai, evt in enumerate(tensor.events):
                writer.writerow((evt, _fmt(tensor.weights[ai])))
