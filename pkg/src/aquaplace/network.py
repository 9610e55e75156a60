"""Directed network graphs on which events propagate and sensors are placed.

A network is a set of typed nodes (junction/tank/reservoir), directed edges
carrying positive travel times, plus two ordered node subsets: the candidate
sensor locations L and the event source set A.  The orderings are load-bearing:
position in L is the genome bit index, position in A is the tensor column index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError

NODE_KINDS = ("junction", "tank", "reservoir")


@dataclass(frozen=True)
class Node:
    id: str
    kind: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("node id must be non-empty")
        if self.kind not in NODE_KINDS:
            raise ValidationError(
                f"node {self.id!r} has unknown kind {self.kind!r}; expected one of {NODE_KINDS}"
            )


@dataclass(frozen=True)
class Edge:
    """Directed edge; undirected pipes are expressed as two edges."""

    source: str
    target: str
    travel_time_s: float

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValidationError(f"self-loop edge at node {self.source!r}")
        if not self.travel_time_s > 0:
            raise ValidationError(
                f"edge {self.source!r}->{self.target!r} has non-positive travel time"
            )


@dataclass(frozen=True)
class Network:
    """Immutable network; safe for concurrent shared reads.

    ``sensor_locations`` (L) and ``event_sources`` (A) are ordered subsets of
    the node ids.  ``index_of_location`` maps a location id to its stable
    genome bit position.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    sensor_locations: tuple[str, ...]
    event_sources: tuple[str, ...]
    _location_index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        id_set = set(ids)
        if len(ids) != len(id_set):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate node ids: {dupes}")
        for e in self.edges:
            for endpoint in (e.source, e.target):
                if endpoint not in id_set:
                    raise ValidationError(f"edge endpoint {endpoint!r} is not a node")
        for name, subset in (("sensor_locations", self.sensor_locations),
                             ("event_sources", self.event_sources)):
            if not subset:
                raise ValidationError(f"{name} must be non-empty")
            if len(set(subset)) != len(subset):
                raise ValidationError(f"duplicate ids in {name}")
            missing = [i for i in subset if i not in id_set]
            if missing:
                raise ValidationError(f"{name} contains unknown node ids: {missing}")
        object.__setattr__(
            self, "_location_index", {loc: i for i, loc in enumerate(self.sensor_locations)}
        )

    def index_of_location(self, node_id: str) -> int:
        """Genome bit index of ``node_id`` within L."""
        try:
            return self._location_index[node_id]
        except KeyError:
            raise ValidationError(f"{node_id!r} is not a sensor location") from None

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)


def _require_keys(obj: dict, allowed: set[str], required: set[str], what: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"unknown keys in {what}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ValidationError(f"missing keys in {what}: {sorted(missing)}")


def network_from_dict(doc: dict) -> Network:
    """Build a validated Network from the JSON document structure.

    When ``sensor_locations`` is absent, L defaults to all junctions (in node
    order); when ``event_sources`` is absent, A defaults to L.
    """
    if not isinstance(doc, dict):
        raise ValidationError("network document must be a JSON object")
    _require_keys(doc, {"nodes", "edges", "sensor_locations", "event_sources"},
                  {"nodes", "edges"}, "network")

    nodes = []
    for item in doc["nodes"]:
        _require_keys(item, {"id", "kind"}, {"id", "kind"}, "node")
        if not isinstance(item["id"], str):
            raise ValidationError(f"node id must be a string, got {item['id']!r}")
        nodes.append(Node(id=item["id"], kind=item["kind"]))

    edges = []
    for item in doc["edges"]:
        _require_keys(item, {"from", "to", "travel_time_s"},
                      {"from", "to", "travel_time_s"}, "edge")
        t = item["travel_time_s"]
        if not isinstance(t, (int, float)) or isinstance(t, bool):
            raise ValidationError(f"travel_time_s must be a number, got {t!r}")
        edges.append(Edge(source=item["from"], target=item["to"], travel_time_s=float(t)))

    locations = doc.get("sensor_locations")
    if locations is None:
        locations = [n.id for n in nodes if n.kind == "junction"]
    sources = doc.get("event_sources")
    if sources is None:
        sources = list(locations)

    return Network(
        nodes=tuple(nodes),
        edges=tuple(edges),
        sensor_locations=tuple(locations),
        event_sources=tuple(sources),
    )


def parse_network(path: str) -> Network:
    """Load and validate a network JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    return network_from_dict(doc)


def network_to_dict(net: Network) -> dict:
    """Inverse of ``network_from_dict``; L and A are written explicitly."""
    return {
        "nodes": [{"id": n.id, "kind": n.kind} for n in net.nodes],
        "edges": [
            {"from": e.source, "to": e.target, "travel_time_s": e.travel_time_s}
            for e in net.edges
        ],
        "sensor_locations": list(net.sensor_locations),
        "event_sources": list(net.event_sources),
    }


def write_network(net: Network, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, indent=2)
        fh.write("\n")
