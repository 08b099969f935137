"""Semantic tableaux (truth trees) for PLTL.

The root formula is put in negation normal form and expanded at state 0.
Within a state the rules are

    alpha   p & q        =>  p, q
            G p          =>  p, X G p
    beta    p | q        =>  p  |  q
            p -> q       =>  ~p |  q
            F p          =>  p  |  X F p      (right child only if the left closes)

Once a state has only literals and ``X`` formulas left, one ``X`` is stripped
from each and the branch moves to the next state. A branch closes on a
complementary pair of literals at one state, or when the formulas carried into
a new state repeat an earlier state's set and some eventuality postponed in the
loop is never fulfilled inside it. A repeat whose loop fulfils every postponed
eventuality, or an empty carried set, leaves the branch open.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .formula import (
    BINARY,
    UNARY,
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    atoms,
    is_literal,
    nnf,
    render,
)


class Verdict(enum.Enum):
    SAT = "Sat"
    UNSAT = "Unsat"


class Status(enum.Enum):
    OPEN = "Open"
    CLOSED = "Closed"
    UNEXPANDED = "Unexpanded"


class DepthExceeded(RuntimeError):
    """A branch reached the state bound without closing or looping."""


@dataclass(frozen=True)
class PrefixedFormula:
    state: int
    formula: Formula

    def __str__(self):
        return f"s{self.state}: {render(self.formula)}"


@dataclass(frozen=True)
class Step:
    entry: PrefixedFormula
    rule: str


@dataclass(frozen=True)
class TreeNode:
    """A maximal run of non-branching steps, followed by children or a leaf mark."""

    steps: tuple[Step, ...]
    children: tuple[TreeNode, ...] = ()
    mark: str | None = None  # "x" closed, "o" open; None on inner nodes

    def leaves(self):
        if self.mark is not None:
            yield self
        for c in self.children:
            yield from c.leaves()


@dataclass(frozen=True)
class Branch:
    entries: tuple[PrefixedFormula, ...]
    pending_eventualities: frozenset[tuple[int, Formula]]
    status: Status
    state_labels: dict[int, frozenset[Formula]] = field(hash=False)
    fulfilled: frozenset[str] = frozenset()
    reason: str = ""

    def __hash__(self):
        return hash((self.entries, self.status))


@dataclass(frozen=True)
class TruthTree:
    root: Formula
    nodes: TreeNode
    branches: tuple[Branch, ...]


@dataclass(frozen=True)
class TableauResult:
    verdict: Verdict
    tree: TruthTree
    open_branches: tuple[Branch, ...]
    fulfilled_targets: tuple[frozenset[str], ...]

    @property
    def satisfiable(self) -> bool:
        return self.verdict is Verdict.SAT


def closure(f: Formula) -> set[Formula]:
    """Formulas that can appear on a branch of the tableau for `f`."""
    out: set[Formula] = set()
    todo = [nnf(f)]
    while todo:
        g = todo.pop()
        if g in out:
            continue
        out.add(g)
        if isinstance(g, (Always, Eventually)):
            todo += [g.operand, Next(g)]
        elif isinstance(g, Implies):
            todo += [nnf(Not(g.left)), g.right]
        elif isinstance(g, UNARY):
            todo.append(g.operand)
        elif isinstance(g, BINARY):
            todo += [g.left, g.right]
    return out


def default_depth(f: Formula) -> int:
    return 2 * len(closure(f)) + 2


class _Ctx:
    """Mutable per-branch bookkeeping; copied at every branching point."""

    __slots__ = (
        "state", "todo", "seen", "carried", "history", "postponed",
        "fulfilled_ev", "entries", "labels", "targets", "closed", "steps", "missing",
    )

    def copy(self) -> _Ctx:
        c = _Ctx.__new__(_Ctx)
        c.state = self.state
        c.todo = list(self.todo)
        c.seen = set(self.seen)
        c.carried = dict(self.carried)
        c.history = list(self.history)
        c.postponed = [set(s) for s in self.postponed]
        c.fulfilled_ev = [set(s) for s in self.fulfilled_ev]
        c.entries = list(self.entries)
        c.labels = {k: set(v) for k, v in self.labels.items()}
        c.targets = set(self.targets)
        c.closed = self.closed
        c.steps = []
        c.missing = set()
        return c

    def add(self, f: Formula, rule: str):
        if self.closed or f in self.seen:
            return
        self.seen.add(f)
        pf = PrefixedFormula(self.state, f)
        self.entries.append(pf)
        self.steps.append(Step(pf, rule))
        if is_literal(f):
            lits = self.labels.setdefault(self.state, set())
            complement = f.operand if isinstance(f, Not) else Not(f)
            lits.add(f)
            if complement in lits:
                self.closed = "contradiction"
        elif isinstance(f, Next):
            self.carried.setdefault(f.operand)
        else:
            self.todo.append(f)


_ALPHA = (And, Always)


class _Engine:
    def __init__(self, depth_bound: int):
        self.depth_bound = depth_bound
        self.branches: list[Branch] = []

    def run(self, f: Formula) -> TreeNode:
        ctx = _Ctx.__new__(_Ctx)
        ctx.state = 0
        ctx.todo = []
        ctx.seen = set()
        ctx.carried = {}
        ctx.history = [frozenset([f])]
        ctx.postponed = [set()]
        ctx.fulfilled_ev = [set()]
        ctx.entries = []
        ctx.labels = {}
        ctx.targets = set()
        ctx.closed = None
        ctx.steps = []
        ctx.missing = set()
        ctx.add(f, "root")
        return self.expand(ctx)

    def expand(self, ctx: _Ctx) -> TreeNode:
        while not ctx.closed:
            if not ctx.todo:
                outcome = self.advance(ctx)
                if outcome is not None:
                    return self.leaf(ctx, outcome)
                continue
            i = next((k for k, g in enumerate(ctx.todo) if isinstance(g, _ALPHA)), 0)
            g = ctx.todo.pop(i)
            if isinstance(g, And):
                ctx.add(g.left, "and")
                ctx.add(g.right, "and")
            elif isinstance(g, Always):
                ctx.add(g.operand, "always")
                ctx.add(Next(g), "always")
            elif isinstance(g, Or):
                return self.split(ctx, g, (g.left, "or"), (g.right, "or"))
            elif isinstance(g, Implies):
                return self.split(ctx, g, (nnf(Not(g.left)), "implies"), (g.right, "implies"))
            elif isinstance(g, Eventually):
                return self.split(ctx, g, (g.operand, "eventually"), (Next(g), "postpone"), lazy=True)
            else:
                raise TypeError(f"unexpected formula on branch: {g!r}")
        return self.leaf(ctx, "contradiction")

    def split(self, ctx, g, left, right, lazy=False) -> TreeNode:
        steps = tuple(ctx.steps)
        children = []
        for side, (h, rule) in enumerate((left, right)):
            child = ctx.copy()
            if isinstance(g, Eventually):
                if side == 0:
                    child.fulfilled_ev[child.state].add(g)
                    if isinstance(h, Atom):
                        child.targets.add(h.name)
                else:
                    child.postponed[child.state].add(g)
            child.add(h, rule)
            node = self.expand(child)
            children.append(node)
            if lazy and any(leaf.mark == "o" for leaf in node.leaves()):
                break
        return TreeNode(steps, tuple(children))

    def advance(self, ctx: _Ctx) -> str | None:
        """Move to the next state; return a leaf outcome if the branch ends."""
        if not ctx.carried:
            return "exhausted"
        carried = frozenset(ctx.carried)
        for i, earlier in enumerate(ctx.history):
            if earlier == carried:
                postponed = set().union(*ctx.postponed[i:])
                fulfilled = set().union(*ctx.fulfilled_ev[i:])
                missing = postponed - fulfilled
                if missing:
                    ctx.missing = {(k, ev) for k in range(i, len(ctx.history)) for ev in ctx.postponed[k] & missing}
                    return "bad-loop"
                return "loop"
        if ctx.state + 1 >= self.depth_bound:
            raise DepthExceeded(f"branch reached {self.depth_bound} states without looping")
        order = list(ctx.carried)
        ctx.state += 1
        ctx.history.append(carried)
        ctx.postponed.append(set())
        ctx.fulfilled_ev.append(set())
        ctx.todo = []
        ctx.seen = set()
        ctx.carried = {}
        for g in order:
            ctx.add(g, "next")
        return None

    def leaf(self, ctx: _Ctx, outcome: str) -> TreeNode:
        closed = outcome in ("contradiction", "bad-loop")
        if outcome == "bad-loop":
            pending = frozenset(ctx.missing)
        elif closed:
            pending = frozenset(
                (k, ev)
                for k, evs in enumerate(ctx.postponed)
                for ev in evs
                if ev not in set().union(*ctx.fulfilled_ev[k + 1:])
            )
        else:
            pending = frozenset()
        self.branches.append(
            Branch(
                entries=tuple(ctx.entries),
                pending_eventualities=pending,
                status=Status.CLOSED if closed else Status.OPEN,
                state_labels={k: frozenset(v) for k, v in ctx.labels.items()},
                fulfilled=frozenset(ctx.targets),
                reason=outcome,
            )
        )
        return TreeNode(tuple(ctx.steps), (), "x" if closed else "o")


def decide(f: Formula, depth_bound: int | None = None) -> TableauResult:
    """Build the finished truth tree for `f` and read off the verdict.

    `f` is satisfiable iff the tree has an open branch. Raises DepthExceeded
    when a branch runs past `depth_bound` states (default derived from the
    closure size of `f`).
    """
    root = nnf(f)
    if depth_bound is None:
        depth_bound = default_depth(root)
    if depth_bound < 1:
        raise ValueError("depth_bound must be positive")
    engine = _Engine(depth_bound)
    nodes = engine.run(root)
    branches = tuple(engine.branches)
    open_branches = tuple(b for b in branches if b.status is Status.OPEN)
    return TableauResult(
        verdict=Verdict.SAT if open_branches else Verdict.UNSAT,
        tree=TruthTree(root=f, nodes=nodes, branches=branches),
        open_branches=open_branches,
        fulfilled_targets=tuple(b.fulfilled for b in open_branches),
    )


def is_satisfiable(f: Formula, depth_bound: int | None = None) -> bool:
    return decide(f, depth_bound).verdict is Verdict.SAT


def is_valid(f: Formula, depth_bound: int | None = None) -> bool:
    """`f` is valid iff the finished tree for ``~f`` is closed."""
    return decide(Not(f), depth_bound).verdict is Verdict.UNSAT


def render_tree(tree: TruthTree, indent: str = "  ") -> str:
    """Indented text rendering; closed leaves end in ``x``, open ones in ``o``."""
    lines: list[str] = []

    def walk(node: TreeNode, depth: int):
        pad = indent * depth
        lines.extend(pad + str(step.entry) for step in node.steps)
        if node.mark is not None:
            lines.append(pad + node.mark)
        for child in node.children:
            walk(child, depth + 1)

    walk(tree.nodes, 0)
    return "\n".join(lines)
