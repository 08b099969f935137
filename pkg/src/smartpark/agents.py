"""Three-tier agent runtime.

* A1 (node agents) sit on every gate, road segment and parking space and turn
  sightings into presence events.
* A2 (followers) live for one visit: spawned when an unfollowed car shows up at
  a gate, they record its path and report a visit summary at the exit gate.
* A3 (the decision agent) owns the store of learned formulas. It answers
  preference queries and learns from visit summaries.

Agents are plain state machines; the dispatcher owns their state and delivers
messages in ``(time, node, object, kind)`` order.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Callable, Collection, Iterable

from .formula import Atom, Formula, Or
from .graph import NodeKind
from .knowledge import (
    EventRecord,
    SpecStore,
    VisitSummary,
    entries_for,
    preference_target,
    reconcile,
    record_visit,
)
from .tableau import decide

log = logging.getLogger(__name__)


class AgentError(RuntimeError):
    pass


# -- messages ---------------------------------------------------------------


@dataclass(frozen=True)
class Presence:
    event: EventRecord

    @property
    def time(self):
        return self.event.timestamp


@dataclass(frozen=True)
class SpawnFollower:
    user_id: str
    gate: str
    time: datetime


@dataclass(frozen=True)
class AskPreference:
    user_id: str
    gate: str
    time: datetime


@dataclass(frozen=True)
class PreferenceReply:
    user_id: str
    suggestion: str | None
    time: datetime
    gate: str = ""
    candidates: tuple[tuple[str, int], ...] = ()
    removed: tuple[Formula, ...] = ()


@dataclass(frozen=True)
class VisitDone:
    summary: VisitSummary
    time: datetime


@dataclass(frozen=True)
class DestroyFollower:
    follower_id: str
    time: datetime
    user_id: str = ""
    gate: str = ""


# Causal order inside one sensing instant: a sighting may spawn a follower,
# which asks for a preference, which is answered; an exit reports the visit
# before the follower goes away.
KIND_ORDER = {
    Presence: 0,
    SpawnFollower: 1,
    AskPreference: 2,
    PreferenceReply: 3,
    VisitDone: 4,
    DestroyFollower: 5,
}


# -- A1 ---------------------------------------------------------------------


@dataclass(frozen=True)
class A1State:
    node: str
    kind: NodeKind = NodeKind.R


def a1_sense(a: A1State, object_id: str, time: datetime, followed: Collection[str] = ()) -> list:
    msgs: list = [Presence(EventRecord(object_id, a.node, time))]
    if a.kind is NodeKind.G and object_id not in followed:
        msgs.append(SpawnFollower(object_id, a.node, time))
    return msgs


# -- A2 ---------------------------------------------------------------------


@dataclass(frozen=True)
class A2State:
    follower_id: str
    user_id: str
    path: tuple[EventRecord, ...] = ()
    active: bool = True


def a2_on_presence(a: A2State, e: EventRecord) -> A2State:
    if not a.active:
        raise AgentError(f"follower {a.follower_id} is no longer active")
    if e.object_id != a.user_id:
        raise AgentError(f"follower of {a.user_id} got an event for {e.object_id}")
    if a.path and e.timestamp < a.path[-1].timestamp:
        raise AgentError(f"out-of-order event {e} after {a.path[-1]}")
    return replace(a, path=a.path + (e,))


def a2_on_exit(a: A2State, exit_event: EventRecord, kind_of: Callable[[str], NodeKind]):
    """Close the visit. Returns ``(VisitDone, destroyed follower state)``."""
    if not a.active:
        raise AgentError(f"follower {a.follower_id} is no longer active")
    if kind_of(exit_event.node) is not NodeKind.G:
        raise AgentError(f"exit at {exit_event.node}, which is not a gate")
    if not a.path:
        raise AgentError("cannot exit before entering")
    a = a2_on_presence(a, exit_event)
    spaces = [e.node for e in a.path if kind_of(e.node) is NodeKind.P]
    summary = VisitSummary(
        user_id=a.user_id,
        entry_gate=a.path[0].node,
        parked_space=spaces[-1] if spaces else None,
        exit_gate=exit_event.node,
        path=a.path,
    )
    return VisitDone(summary, exit_event.timestamp), replace(a, active=False)


# -- A3 ---------------------------------------------------------------------


@dataclass(frozen=True)
class A3State:
    store: SpecStore = field(default_factory=SpecStore)
    gates: frozenset[str] = frozenset()
    depth_bound: int | None = None


def a3_on_ask(a: A3State, user_id: str, gate: str, free: Collection[str], time=None):
    """Pick a free space for `user_id` entering at `gate`.

    Contradicted knowledge is dropped first. The remaining ``gate -> F space``
    entries are combined into ``gate & (e1 | e2 | ...)``; the open branches of
    its truth tree name the candidate spaces, which are ranked by count.
    Returns ``(new_state, PreferenceReply)``.
    """
    if gate not in a.gates:
        raise AgentError(f"{gate} is not a gate")
    store, removed = reconcile(a.store, user_id, gate, a.depth_bound)
    for f in removed:
        log.info("dropped %s for %s: contradicted at %s", f, user_id, gate)
    a = replace(a, store=store)
    entries = entries_for(store, user_id, gate)
    candidates: list[tuple[str, int]] = []
    if entries:
        disjunction = entries[0].formula
        for e in entries[1:]:
            disjunction = Or(disjunction, e.formula)
        result = decide(Atom(gate) & disjunction, a.depth_bound)
        count = {preference_target(e.formula, gate): e.count for e in entries}
        targets = set().union(*result.fulfilled_targets) & set(count)
        candidates = sorted(((s, count[s]) for s in targets), key=lambda sc: (-sc[1], sc[0]))
    suggestion = next((s for s, _ in candidates if s in free), None)
    reply = PreferenceReply(user_id, suggestion, time, gate, tuple(candidates), tuple(removed))
    return a, reply


def a3_on_visit(a: A3State, v: VisitSummary, all_gates: Iterable[str] | None = None) -> A3State:
    gates = a.gates if all_gates is None else all_gates
    return replace(a, store=record_visit(a.store, v, gates))


# -- dispatcher -------------------------------------------------------------


def message_key(msg) -> tuple:
    if isinstance(msg, Presence):
        node, obj = msg.event.node, msg.event.object_id
    elif isinstance(msg, VisitDone):
        node, obj = msg.summary.exit_gate, msg.summary.user_id
    else:
        node, obj = msg.gate, msg.user_id
    return (msg.time, node, obj, KIND_ORDER[type(msg)])


class Dispatcher:
    """Owns all agent state and delivers messages deterministically.

    Hooks let the caller mirror the world: ``on_enter(user, gate)``,
    ``on_move(user, node)``, ``on_exit(user)`` and ``on_reply(reply)``. The
    ``free_spaces`` callable reports current occupancy to the A3 agent.
    """

    def __init__(
        self,
        nodes: dict[str, NodeKind],
        store: SpecStore | None = None,
        depth_bound: int | None = None,
        free_spaces: Callable[[], Collection[str]] = frozenset,
        on_enter=None,
        on_move=None,
        on_exit=None,
        on_reply=None,
    ):
        self.kinds = dict(nodes)
        self.a1 = {
            n: A1State(n, k) for n, k in sorted(nodes.items()) if k is not NodeKind.C
        }
        gates = frozenset(n for n, k in nodes.items() if k is NodeKind.G)
        self.a3 = A3State(SpecStore() if store is None else store, gates, depth_bound)
        self.followers: dict[str, A2State] = {}  # keyed by user id
        self.free_spaces = free_spaces
        self.hooks = {
            "enter": on_enter or (lambda user, gate: None),
            "move": on_move or (lambda user, node: None),
            "exit": on_exit or (lambda user: None),
            "reply": on_reply or (lambda reply: None),
        }
        self.delivered: list = []
        self._queue: list = []
        self._seq = itertools.count()
        self._ids = itertools.count(1)

    def kind_of(self, node: str) -> NodeKind:
        try:
            return self.kinds[node]
        except KeyError:
            raise AgentError(f"unknown node: {node}") from None

    def post(self, msg):
        heapq.heappush(self._queue, (message_key(msg), next(self._seq), msg))

    def sense(self, object_id: str, node: str, time: datetime):
        """Feed one sighting to the node's A1 agent and run to quiescence."""
        if node not in self.a1:
            raise AgentError(f"no node agent at {node}")
        for msg in a1_sense(self.a1[node], object_id, time, self.followers):
            self.post(msg)
        self.run()

    def run(self):
        while self._queue:
            _, _, msg = heapq.heappop(self._queue)
            self.delivered.append(msg)
            self.handle(msg)

    def handle(self, msg):
        if isinstance(msg, Presence):
            e = msg.event
            follower = self.followers.get(e.object_id)
            if follower is None:
                if self.kind_of(e.node) is not NodeKind.G:
                    log.warning("ignoring %s: no follower for %s", e, e.object_id)
                return
            if self.kind_of(e.node) is NodeKind.G:
                done, follower = a2_on_exit(follower, e, self.kind_of)
                self.followers[e.object_id] = follower
                self.post(done)
                self.post(DestroyFollower(follower.follower_id, e.timestamp, e.object_id, e.node))
            else:
                self.followers[e.object_id] = a2_on_presence(follower, e)
                self.hooks["move"](e.object_id, e.node)
        elif isinstance(msg, SpawnFollower):
            fid = f"a2-{next(self._ids)}"
            entry = EventRecord(msg.user_id, msg.gate, msg.time)
            self.followers[msg.user_id] = A2State(fid, msg.user_id, (entry,))
            self.hooks["enter"](msg.user_id, msg.gate)
            self.post(AskPreference(msg.user_id, msg.gate, msg.time))
        elif isinstance(msg, AskPreference):
            self.a3, reply = a3_on_ask(self.a3, msg.user_id, msg.gate, self.free_spaces(), msg.time)
            self.post(reply)
        elif isinstance(msg, PreferenceReply):
            self.hooks["reply"](msg)
        elif isinstance(msg, VisitDone):
            self.a3 = a3_on_visit(self.a3, msg.summary)
        elif isinstance(msg, DestroyFollower):
            user = next(u for u, f in self.followers.items() if f.follower_id == msg.follower_id)
            del self.followers[user]
            self.hooks["exit"](user)
        else:
            raise AgentError(f"unknown message {msg!r}")
