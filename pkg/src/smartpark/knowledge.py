"""Presence events and the per-user store of learned preference formulas.

The store holds triples ``(user, formula, r)`` where ``r`` counts how often
the behaviour behind the formula was observed. Two formula shapes are learned
from completed visits:

* ``gate -> F space`` for a visit entering at ``gate`` and parking at ``space``;
* ``G ~gate`` for every gate the user has never been seen at.

Entries are keyed by ``(user, nnf(formula))`` so syntactic variants merge.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .formula import Always, Atom, Eventually, Formula, Implies, Not, ParseError, nnf, parse, render
from .tableau import Verdict, decide

TIME_FORMAT = "t%Y.%m.%d.%H.%M.%S"


def parse_time(text: str) -> datetime:
    try:
        return datetime.strptime(text, TIME_FORMAT)
    except ValueError:
        raise ValueError(f"bad timestamp {text!r}, expected tYYYY.MM.DD.hh.mm.ss") from None


def format_time(t: datetime) -> str:
    return t.strftime(TIME_FORMAT)


class StoreError(ValueError):
    pass


@dataclass(frozen=True)
class EventRecord:
    object_id: str
    node: str
    timestamp: datetime

    def __str__(self):
        return f"<{self.object_id},{self.node},{format_time(self.timestamp)}>"


@dataclass(frozen=True)
class SpecEntry:
    id: str
    formula: Formula
    count: int

    def __post_init__(self):
        if self.count <= 0:
            raise StoreError(f"count must be positive, got {self.count}")


@dataclass(frozen=True)
class VisitSummary:
    user_id: str
    entry_gate: str
    parked_space: str | None
    exit_gate: str
    path: tuple[EventRecord, ...]

    def validate(self):
        if not self.path:
            raise StoreError("visit path is empty")
        if self.path[0].node != self.entry_gate or self.path[-1].node != self.exit_gate:
            raise StoreError("visit path must start at the entry gate and end at the exit gate")
        if any(e.object_id != self.user_id for e in self.path):
            raise StoreError("visit path mixes objects")


def preference(gate: str, space: str) -> Formula:
    return Implies(Atom(gate), Eventually(Atom(space)))


def never(gate: str) -> Formula:
    return Always(Not(Atom(gate)))


def preference_target(f: Formula, gate: str) -> str | None:
    """Space `s` if `f` is ``gate -> F s``, else None."""
    if (
        isinstance(f, Implies)
        and f.left == Atom(gate)
        and isinstance(f.right, Eventually)
        and isinstance(f.right.operand, Atom)
    ):
        return f.right.operand.name
    return None


@dataclass(frozen=True, eq=False)
class SpecStore:
    """Immutable store. ``gate_usage`` tallies, per user, the gates seen on visits."""

    entries: Mapping[tuple[str, Formula], SpecEntry] = field(default_factory=dict)
    gate_usage: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, SpecStore):
            return NotImplemented
        return dict(self.entries) == dict(other.entries) and {
            u: dict(c) for u, c in self.gate_usage.items()
        } == {u: dict(c) for u, c in other.gate_usage.items()}

    def __iter__(self):
        return iter(sorted(self.entries.values(), key=lambda e: (e.id, render(e.formula))))

    def __len__(self):
        return len(self.entries)

    @classmethod
    def of(cls, entries: Iterable[SpecEntry], gate_usage=None) -> SpecStore:
        s = cls(gate_usage=MappingProxyType(dict(gate_usage or {})))
        for e in entries:
            s = s.upsert(e.id, e.formula, e.count)
        return s

    def get(self, user: str, f: Formula) -> SpecEntry | None:
        return self.entries.get((user, nnf(f)))

    def for_user(self, user: str) -> list[SpecEntry]:
        return [e for e in self if e.id == user]

    def upsert(self, user: str, f: Formula, by: int = 1) -> SpecStore:
        key = (user, nnf(f))
        old = self.entries.get(key)
        entry = SpecEntry(user, old.formula if old else f, (old.count if old else 0) + by)
        return SpecStore(MappingProxyType({**self.entries, key: entry}), self.gate_usage)

    def remove(self, user: str, f: Formula) -> SpecStore:
        key = (user, nnf(f))
        if key not in self.entries:
            return self
        rest = {k: e for k, e in self.entries.items() if k != key}
        return SpecStore(MappingProxyType(rest), self.gate_usage)

    def used_gates(self, user: str) -> set[str]:
        return {g for g, n in self.gate_usage.get(user, {}).items() if n > 0}


def record_visit(s: SpecStore, v: VisitSummary, all_gates: Iterable[str]) -> SpecStore:
    """Learn from one completed visit."""
    all_gates = set(all_gates)
    v.validate()
    if v.entry_gate not in all_gates or v.exit_gate not in all_gates:
        raise StoreError(f"visit gates {v.entry_gate}/{v.exit_gate} are not gates")
    if v.parked_space is not None:
        s = s.upsert(v.user_id, preference(v.entry_gate, v.parked_space))
    tally = Counter(s.gate_usage.get(v.user_id, {}))
    tally.update({v.entry_gate, v.exit_gate})
    usage = {**s.gate_usage, v.user_id: MappingProxyType(dict(sorted(tally.items())))}
    s = SpecStore(s.entries, MappingProxyType(usage))
    for g in sorted(all_gates):
        if tally[g] == 0:
            s = s.upsert(v.user_id, never(g))
        else:
            s = s.remove(v.user_id, never(g))
    return s


def reconcile(s: SpecStore, user: str, gate: str, depth_bound: int | None = None):
    """Drop the user's entries that contradict being at `gate` now.

    Returns ``(store, removed_formulas)``.
    """
    removed = []
    for e in s.for_user(user):
        if decide(e.formula & Atom(gate), depth_bound).verdict is Verdict.UNSAT:
            removed.append(e.formula)
            s = s.remove(user, e.formula)
    return s, removed


def entries_for(s: SpecStore, user: str, gate: str) -> list[SpecEntry]:
    """The user's ``gate -> F space`` entries, most frequent first."""
    found = [(e, preference_target(e.formula, gate)) for e in s.for_user(user)]
    found = [(e, t) for e, t in found if t is not None]
    found.sort(key=lambda et: (-et[0].count, et[1]))
    return [e for e, _ in found]


# -- persistence ------------------------------------------------------------
#
# One record per line: ``id<TAB>formula<TAB>r``. Gate tallies are kept on
# ``#used<TAB>id<TAB>gate<TAB>n`` lines; other ``#`` lines are comments.


def dumps_store(s: SpecStore) -> str:
    lines = [f"{e.id}\t{render(e.formula)}\t{e.count}" for e in s]
    for user in sorted(s.gate_usage):
        for gate, n in sorted(s.gate_usage[user].items()):
            lines.append(f"#used\t{user}\t{gate}\t{n}")
    return "".join(line + "\n" for line in lines)


def loads_store(text: str, source: str = "<store>") -> SpecStore:
    entries = []
    usage: dict[str, dict[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        fields = raw.split("\t")
        if raw.startswith("#"):
            if fields[0] == "#used":
                if len(fields) != 4 or not fields[3].isdigit():
                    raise StoreError(f"{source}:{lineno}: malformed gate tally")
                usage.setdefault(fields[1], {})[fields[2]] = int(fields[3])
            continue
        if len(fields) != 3:
            raise StoreError(f"{source}:{lineno}: expected 3 tab-separated fields")
        user, text_f, r = fields
        try:
            f = parse(text_f)
        except ParseError as exc:
            raise StoreError(f"{source}:{lineno}: {exc}") from None
        try:
            count = int(r)
        except ValueError:
            raise StoreError(f"{source}:{lineno}: count {r!r} is not an integer") from None
        if count <= 0:
            raise StoreError(f"{source}:{lineno}: count must be positive, got {count}")
        if not user.strip():
            raise StoreError(f"{source}:{lineno}: empty id")
        entries.append(SpecEntry(user, f, count))
    usage_view = {u: MappingProxyType(c) for u, c in usage.items()}
    return SpecStore.of(entries, usage_view)


def save_store(s: SpecStore, path) -> None:
    Path(path).write_text(dumps_store(s))


def load_store(path) -> SpecStore:
    path = Path(path)
    return loads_store(path.read_text(), str(path))
