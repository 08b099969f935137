"""Labelled/attributed digraphs and their instantiation for a car park.

An ``LAGraph`` declares vertices, arcs, unique labels and attribute *names*;
an ``ILAGraph`` adds concrete attribute values. Both are immutable: every
operation returns a new graph.

Vertices come in four kinds: gates (G), road segments (R), parking spaces (P)
and cars (C). A car is a C vertex with exactly one outgoing arc pointing at its
current position; parking spaces carry a boolean ``free`` attribute.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Union

AttrValue = Union[bool, int, str]


class NodeKind(str, enum.Enum):
    G = "G"
    R = "R"
    P = "P"
    C = "C"


class GraphError(ValueError):
    pass


def _frozen(d) -> Mapping:
    return MappingProxyType(dict(d))


@dataclass(frozen=True, eq=False)
class LAGraph:
    vertices: frozenset[int] = frozenset()
    edges: frozenset[tuple[int, int]] = frozenset()
    lab_v: Mapping[int, str] = field(default_factory=dict)
    lab_e: Mapping[tuple[int, int], str] = field(default_factory=dict)
    att_v: Mapping[int, frozenset[str]] = field(default_factory=dict)
    att_e: Mapping[tuple[int, int], frozenset[str]] = field(default_factory=dict)
    kind: Mapping[int, NodeKind] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, LAGraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and dict(self.lab_v) == dict(other.lab_v)
            and dict(self.lab_e) == dict(other.lab_e)
            and dict(self.att_v) == dict(other.att_v)
            and dict(self.att_e) == dict(other.att_e)
            and dict(self.kind) == dict(other.kind)
        )

    def vertex(self, label: str) -> int:
        for v, lab in self.lab_v.items():
            if lab == label:
                return v
        raise GraphError(f"unknown label: {label}")

    def has_label(self, label: str) -> bool:
        return label in self.lab_v.values()

    def out_edges(self, v: int) -> list[tuple[int, int]]:
        return sorted(e for e in self.edges if e[0] == v)

    def in_edges(self, v: int) -> list[tuple[int, int]]:
        return sorted(e for e in self.edges if e[1] == v)

    def labels_of(self, kind: NodeKind) -> set[str]:
        return {self.lab_v[v] for v in self.vertices if self.kind[v] is kind}

    def check(self):
        """Raise GraphError if the structural invariants do not hold."""
        if any(a not in self.vertices or b not in self.vertices for a, b in self.edges):
            raise GraphError("edge endpoint outside V")
        if set(self.lab_v) != set(self.vertices) or set(self.kind) != set(self.vertices):
            raise GraphError("every vertex needs exactly one label and kind")
        if len(set(self.lab_v.values())) != len(self.lab_v):
            raise GraphError("vertex labels are not unique")
        if set(self.lab_e) != set(self.edges) or len(set(self.lab_e.values())) != len(self.lab_e):
            raise GraphError("edge labels missing or not unique")


@dataclass(frozen=True, eq=False)
class ILAGraph:
    base: LAGraph = field(default_factory=LAGraph)
    val_v: Mapping[tuple[int, str], AttrValue] = field(default_factory=dict)
    val_e: Mapping[tuple[tuple[int, int], str], AttrValue] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, ILAGraph):
            return NotImplemented
        return (
            self.base == other.base
            and dict(self.val_v) == dict(other.val_v)
            and dict(self.val_e) == dict(other.val_e)
        )

    def value(self, label: str, attr: str) -> AttrValue:
        return self.val_v[(self.base.vertex(label), attr)]

    def check(self):
        self.base.check()
        declared_v = {(v, a) for v, names in self.base.att_v.items() for a in names}
        declared_e = {(e, a) for e, names in self.base.att_e.items() for a in names}
        if set(self.val_v) != declared_v or set(self.val_e) != declared_e:
            raise GraphError("attribute values do not match declarations")
        types: dict[str, type] = {}
        for (_, attr), value in list(self.val_v.items()) + list(self.val_e.items()):
            if types.setdefault(attr, type(value)) is not type(value):
                raise GraphError(f"attribute {attr} has mixed value types")


def _edge_label(g: LAGraph, a: int, b: int) -> str:
    return f"{g.lab_v[a]}>{g.lab_v[b]}"


def _add_vertex(g: ILAGraph, label: str, kind: NodeKind, attrs: dict[str, AttrValue]) -> ILAGraph:
    base = g.base
    if base.has_label(label):
        raise GraphError(f"duplicate label: {label}")
    v = max(base.vertices, default=-1) + 1
    base = replace(
        base,
        vertices=base.vertices | {v},
        lab_v=_frozen({**base.lab_v, v: label}),
        att_v=_frozen({**base.att_v, v: frozenset(attrs)}),
        kind=_frozen({**base.kind, v: kind}),
    )
    val_v = {**g.val_v, **{(v, a): x for a, x in attrs.items()}}
    return ILAGraph(base, _frozen(val_v), g.val_e)


def _add_edge(g: ILAGraph, a: int, b: int) -> ILAGraph:
    base = g.base
    e = (a, b)
    if e in base.edges:
        raise GraphError(f"duplicate edge: {base.lab_v[a]} -> {base.lab_v[b]}")
    base = replace(
        base,
        edges=base.edges | {e},
        lab_e=_frozen({**base.lab_e, e: _edge_label(base, a, b)}),
        att_e=_frozen({**base.att_e, e: frozenset()}),
    )
    return ILAGraph(base, g.val_v, g.val_e)


def _drop_edge(g: ILAGraph, e: tuple[int, int]) -> ILAGraph:
    base = g.base
    base = replace(
        base,
        edges=base.edges - {e},
        lab_e=_frozen({k: x for k, x in base.lab_e.items() if k != e}),
        att_e=_frozen({k: x for k, x in base.att_e.items() if k != e}),
    )
    val_e = {k: x for k, x in g.val_e.items() if k[0] != e}
    return ILAGraph(base, g.val_v, _frozen(val_e))


def _set_value(g: ILAGraph, v: int, attr: str, value: AttrValue) -> ILAGraph:
    if (v, attr) not in g.val_v:
        raise GraphError(f"attribute {attr} not declared on {g.base.lab_v[v]}")
    return ILAGraph(g.base, _frozen({**g.val_v, (v, attr): value}), g.val_e)


# -- topology files ---------------------------------------------------------


@dataclass(frozen=True)
class Topology:
    nodes: tuple[tuple[NodeKind, str], ...] = ()
    edges: tuple[tuple[str, str], ...] = ()


def parse_topology(text: str, source: str = "<topology>") -> Topology:
    """Parse ``node <G|R|P> <label>`` / ``edge <from> <to>`` records."""
    nodes, edges = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] == "node" and len(line) == 3:
            try:
                kind = NodeKind(line[1])
            except ValueError:
                raise GraphError(f"{source}:{lineno}: bad node kind {line[1]!r}") from None
            if kind is NodeKind.C:
                raise GraphError(f"{source}:{lineno}: cars are not part of a topology")
            nodes.append((kind, line[2]))
        elif line[0] == "edge" and len(line) == 3:
            edges.append((line[1], line[2]))
        else:
            raise GraphError(f"{source}:{lineno}: malformed record {raw.strip()!r}")
    return Topology(tuple(nodes), tuple(edges))


def load_topology(path) -> Topology:
    path = Path(path)
    return parse_topology(path.read_text(), str(path))


def build_parking(topology: Topology) -> ILAGraph:
    g = ILAGraph()
    for kind, label in topology.nodes:
        attrs = {"free": True} if kind is NodeKind.P else {}
        g = _add_vertex(g, label, kind, attrs)
    for a, b in topology.edges:
        for lab in (a, b):
            if not g.base.has_label(lab):
                raise GraphError(f"edge references unknown label: {lab}")
        g = _add_edge(g, g.base.vertex(a), g.base.vertex(b))
    return g


# -- car lifecycle ----------------------------------------------------------


def _car(g: ILAGraph, car_id: str) -> int:
    if not g.base.has_label(car_id):
        raise GraphError(f"unknown car: {car_id}")
    v = g.base.vertex(car_id)
    if g.base.kind[v] is not NodeKind.C:
        raise GraphError(f"{car_id} is not a car")
    return v


def car_position(g: ILAGraph, car_id: str) -> str:
    (_, target), = g.base.out_edges(_car(g, car_id))
    return g.base.lab_v[target]


def add_car(g: ILAGraph, car_id: str, gate_label: str) -> ILAGraph:
    if not g.base.has_label(gate_label):
        raise GraphError(f"unknown gate: {gate_label}")
    gate = g.base.vertex(gate_label)
    if g.base.kind[gate] is not NodeKind.G:
        raise GraphError(f"{gate_label} is not a gate")
    if g.base.has_label(car_id):
        raise GraphError(f"duplicate car: {car_id}")
    g = _add_vertex(g, car_id, NodeKind.C, {})
    return _add_edge(g, g.base.vertex(car_id), gate)


def _release(g: ILAGraph, car: int) -> tuple[ILAGraph, tuple[int, int]]:
    (edge,) = g.base.out_edges(car)
    here = edge[1]
    if g.base.kind[here] is NodeKind.P:
        g = _set_value(g, here, "free", True)
    return _drop_edge(g, edge), edge


def move_car(g: ILAGraph, car_id: str, node_label: str) -> ILAGraph:
    car = _car(g, car_id)
    if not g.base.has_label(node_label):
        raise GraphError(f"unknown node: {node_label}")
    target = g.base.vertex(node_label)
    kind = g.base.kind[target]
    if kind is NodeKind.C:
        raise GraphError(f"cannot move onto car {node_label}")
    (old,) = g.base.out_edges(car)
    if old[1] == target:
        return g
    if kind is NodeKind.P and not g.val_v[(target, "free")]:
        raise GraphError(f"space {node_label} is already occupied")
    g, _ = _release(g, car)
    g = _add_edge(g, car, target)
    if kind is NodeKind.P:
        g = _set_value(g, target, "free", False)
    return g


def remove_car(g: ILAGraph, car_id: str) -> ILAGraph:
    car = _car(g, car_id)
    g, _ = _release(g, car)
    base = g.base
    base = replace(
        base,
        vertices=base.vertices - {car},
        lab_v=_frozen({k: x for k, x in base.lab_v.items() if k != car}),
        att_v=_frozen({k: x for k, x in base.att_v.items() if k != car}),
        kind=_frozen({k: x for k, x in base.kind.items() if k != car}),
    )
    val_v = {k: x for k, x in g.val_v.items() if k[0] != car}
    return ILAGraph(base, _frozen(val_v), g.val_e)


def free_spaces(g: ILAGraph) -> set[str]:
    return {
        g.base.lab_v[v]
        for v in g.base.vertices
        if g.base.kind[v] is NodeKind.P and g.val_v[(v, "free")]
    }


def cars(g: ILAGraph) -> set[str]:
    return g.base.labels_of(NodeKind.C)
