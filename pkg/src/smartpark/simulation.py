"""Trace-driven simulation of the car park.

A trace is a text file with one sighting per line::

    <tYYYY.MM.DD.hh.mm.ss> <object id> <node label>

Blank lines and ``#`` comments are ignored; records may come in any order.
The decision log gets one tab-separated line per gate entry:
timestamp, user, gate, suggestion (``-`` for none), removed formulas
(``;``-separated, ``-`` for none), candidates (``space:r`` comma-separated,
``-`` for none).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .agents import AgentError, Dispatcher, PreferenceReply
from .formula import render
from .graph import (
    GraphError,
    ILAGraph,
    NodeKind,
    add_car,
    build_parking,
    free_spaces,
    load_topology,
    move_car,
    remove_car,
)
from .knowledge import SpecStore, StoreError, dumps_store, format_time, load_store, parse_time


class InputError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass(frozen=True)
class TraceRecord:
    timestamp: datetime
    object_id: str
    node: str
    line: int = 0


@dataclass(frozen=True)
class DecisionLogEntry:
    timestamp: datetime
    user_id: str
    gate: str
    suggestion: str | None
    removed_formulas: tuple[str, ...] = ()
    candidates: tuple[tuple[str, int], ...] = ()

    def to_line(self) -> str:
        return "\t".join(
            [
                format_time(self.timestamp),
                self.user_id,
                self.gate,
                self.suggestion or "-",
                ";".join(self.removed_formulas) or "-",
                ",".join(f"{s}:{r}" for s, r in self.candidates) or "-",
            ]
        )


def parse_trace(text: str, source: str = "<trace>") -> list[TraceRecord]:
    records = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        fields = raw.split("#", 1)[0].split()
        if not fields:
            continue
        if len(fields) != 3:
            raise InputError(f"{source}:{lineno}: expected '<timestamp> <object> <node>'")
        try:
            t = parse_time(fields[0])
        except ValueError as exc:
            raise InputError(f"{source}:{lineno}: {exc}") from None
        records.append(TraceRecord(t, fields[1], fields[2], lineno))
    return records


def dispatch_order(records):
    return sorted(records, key=lambda r: (r.timestamp, r.node, r.object_id))


@dataclass
class SimulationResult:
    graph: ILAGraph
    store: SpecStore
    log: list[DecisionLogEntry] = field(default_factory=list)
    entered: int = 0
    exited: int = 0

    @property
    def present(self) -> int:
        return self.entered - self.exited


def simulate(graph: ILAGraph, records, store: SpecStore | None = None, depth_bound=None,
             source: str = "<trace>") -> SimulationResult:
    """Replay `records` through the agent hierarchy."""
    kinds = {graph.base.lab_v[v]: graph.base.kind[v] for v in graph.base.vertices}
    result = SimulationResult(graph, SpecStore() if store is None else store)

    def on_enter(user, gate):
        result.graph = add_car(result.graph, user, gate)
        result.entered += 1

    def on_move(user, node):
        result.graph = move_car(result.graph, user, node)

    def on_exit(user):
        result.graph = remove_car(result.graph, user)
        result.exited += 1

    def on_reply(reply: PreferenceReply):
        result.log.append(
            DecisionLogEntry(
                reply.time,
                reply.user_id,
                reply.gate,
                reply.suggestion,
                tuple(render(f) for f in reply.removed),
                reply.candidates,
            )
        )

    dispatcher = Dispatcher(
        kinds,
        result.store,
        depth_bound,
        free_spaces=lambda: free_spaces(result.graph),
        on_enter=on_enter,
        on_move=on_move,
        on_exit=on_exit,
        on_reply=on_reply,
    )
    for rec in dispatch_order(records):
        if kinds.get(rec.node) in (None, NodeKind.C):
            raise InputError(f"{source}:{rec.line}: unknown node {rec.node!r}")
        try:
            dispatcher.sense(rec.object_id, rec.node, rec.timestamp)
        except (AgentError, GraphError, StoreError) as exc:
            raise InputError(f"{source}:{rec.line}: {exc}") from None
    result.store = dispatcher.a3.store
    return result


def run_simulation(topology, trace, store_out, log_out, store_in=None, depth_bound=None) -> SimulationResult:
    """File-level entry point; raises InputError on any bad input."""
    try:
        graph = build_parking(load_topology(topology))
    except (GraphError, OSError) as exc:
        raise InputError(str(exc)) from None
    try:
        records = parse_trace(Path(trace).read_text(), str(trace))
    except OSError as exc:
        raise InputError(str(exc)) from None
    store = SpecStore()
    if store_in is not None:
        try:
            store = load_store(store_in)
        except (StoreError, OSError) as exc:
            raise InputError(str(exc)) from None
    result = simulate(graph, records, store, depth_bound, str(trace))
    Path(log_out).write_text("".join(e.to_line() + "\n" for e in result.log))
    Path(store_out).write_text(dumps_store(result.store))
    return result
