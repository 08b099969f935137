"""Brute-force satisfiability over ultimately periodic traces.

Independent of the tableau: it only evaluates the textbook PLTL semantics.
Every lasso ``u v^w`` with ``|u| <= max_prefix`` and ``1 <= |v| <= max_period``
over the alphabet ``2^atoms(f)`` is covered. Instead of materialising each
lasso, the search works on truth vectors (one boolean per subformula) at a
trace position: the vector at position 0 of ``a.w`` is a function of the
letter ``a`` and the vector at position 0 of ``w``, so lassos sharing a
suffix vector are explored once.
"""

from __future__ import annotations

import itertools

import numpy as np

from .formula import (
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
    subformulas,
)

MAX_ATOMS = 4

SAT = "Sat"
UNSAT = "Unsat"


class OracleGuardError(ValueError):
    pass


def _loop_vectors(subs, index, names, period):
    """Truth vectors at every position of every loop of length `period`."""
    n_letters = 1 << len(names)
    letters = np.array(list(itertools.product(range(n_letters), repeat=period)), dtype=np.int64)
    letters = letters.reshape(-1, period)
    val = {}
    for g in subs:
        if isinstance(g, Atom):
            bit = 1 << names.index(g.name)
            v = (letters & bit) != 0
        elif isinstance(g, Not):
            v = ~val[g.operand]
        elif isinstance(g, And):
            v = val[g.left] & val[g.right]
        elif isinstance(g, Or):
            v = val[g.left] | val[g.right]
        elif isinstance(g, Implies):
            v = ~val[g.left] | val[g.right]
        elif isinstance(g, Next):
            v = np.roll(val[g.operand], -1, axis=1)
        elif isinstance(g, Eventually):
            # every loop position is visited again infinitely often
            v = np.repeat(val[g.operand].any(axis=1, keepdims=True), period, axis=1)
        elif isinstance(g, Always):
            v = np.repeat(val[g.operand].all(axis=1, keepdims=True), period, axis=1)
        else:
            raise TypeError(f"not a formula: {g!r}")
        val[g] = v
    stacked = np.stack([val[g] for g in subs], axis=-1)
    return stacked.reshape(-1, len(subs))


def _prepend(vectors, letter, subs, index, names):
    """Vectors at position 0 of ``letter . w`` given vectors of ``w``."""
    out = np.zeros_like(vectors)
    for g in subs:
        k = index[g]
        if isinstance(g, Atom):
            out[:, k] = bool(letter & (1 << names.index(g.name)))
        elif isinstance(g, Not):
            out[:, k] = ~out[:, index[g.operand]]
        elif isinstance(g, And):
            out[:, k] = out[:, index[g.left]] & out[:, index[g.right]]
        elif isinstance(g, Or):
            out[:, k] = out[:, index[g.left]] | out[:, index[g.right]]
        elif isinstance(g, Implies):
            out[:, k] = ~out[:, index[g.left]] | out[:, index[g.right]]
        elif isinstance(g, Next):
            out[:, k] = vectors[:, index[g.operand]]
        elif isinstance(g, Eventually):
            out[:, k] = out[:, index[g.operand]] | vectors[:, k]
        elif isinstance(g, Always):
            out[:, k] = out[:, index[g.operand]] & vectors[:, k]
    return out


def _unique_rows(vectors):
    """Drop duplicate truth vectors (rows), keyed on their bit-packed form."""
    packed = np.packbits(vectors, axis=1)
    _, first = np.unique(packed, axis=0, return_index=True)
    return vectors[np.sort(first)], packed[np.sort(first)]


def oracle_decide(f: Formula, max_prefix: int = 6, max_period: int = 4) -> str:
    """Return ``"Sat"`` iff some lasso within the bounds satisfies `f`."""
    names = sorted(atoms(f))
    if len(names) > MAX_ATOMS:
        raise OracleGuardError(f"oracle limited to {MAX_ATOMS} atoms, got {len(names)}")
    if max_prefix < 1 or max_period < 1:
        raise OracleGuardError("bounds must be positive")
    subs = subformulas(f)
    index = {g: i for i, g in enumerate(subs)}
    root = index[f]

    loops = np.concatenate([_loop_vectors(subs, index, names, p) for p in range(1, max_period + 1)])
    if loops[:, root].any():
        return SAT
    level, packed = _unique_rows(loops)
    seen = {row.tobytes() for row in packed}
    for _ in range(max_prefix):
        grown = np.concatenate([_prepend(level, a, subs, index, names) for a in range(1 << len(names))])
        if grown[:, root].any():
            return SAT
        grown, packed = _unique_rows(grown)
        keep = [i for i, row in enumerate(packed) if row.tobytes() not in seen]
        if not keep:
            break
        seen.update(packed[i].tobytes() for i in keep)
        level = grown[keep]
    return UNSAT


def holds_on_lasso(f: Formula, prefix: list[set[str]], loop: list[set[str]]) -> bool:
    """Evaluate `f` at position 0 of ``prefix . loop^w`` directly.

    Naive position-by-position recursion; used to cross-check the vectorised
    search on hand-written traces.
    """
    trace = list(prefix) + list(loop)
    n, start = len(trace), len(prefix)

    def succ(i):
        return i + 1 if i + 1 < n else start

    def future(i):
        # positions reachable from i (inclusive) on the infinite unrolling
        return list(range(i, n)) + list(range(start, i)) if i >= start else list(range(i, n))

    def ev(g, i):
        if isinstance(g, Atom):
            return g.name in trace[i]
        if isinstance(g, Not):
            return not ev(g.operand, i)
        if isinstance(g, And):
            return ev(g.left, i) and ev(g.right, i)
        if isinstance(g, Or):
            return ev(g.left, i) or ev(g.right, i)
        if isinstance(g, Implies):
            return (not ev(g.left, i)) or ev(g.right, i)
        if isinstance(g, Next):
            return ev(g.operand, succ(i))
        if isinstance(g, Eventually):
            return any(ev(g.operand, j) for j in future(i))
        if isinstance(g, Always):
            return all(ev(g.operand, j) for j in future(i))
        raise TypeError(f"not a formula: {g!r}")

    return ev(f, 0)
