from datetime import datetime, timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smartpark.formula import Atom, Implies, parse
from smartpark.knowledge import (
    EventRecord,
    SpecEntry,
    SpecStore,
    StoreError,
    VisitSummary,
    dumps_store,
    entries_for,
    format_time,
    load_store,
    loads_store,
    never,
    parse_time,
    preference,
    reconcile,
    record_visit,
    save_store,
)
from smartpark.tableau import Verdict, decide

GATES = {"g1", "g2", "g3"}
T0 = datetime(2014, 1, 28, 9, 30, 15)


def visit(user, entry, space, exit_=None, start=T0):
    exit_ = exit_ or entry
    nodes = [entry] + ([space] if space else []) + [exit_]
    path = tuple(EventRecord(user, n, start + timedelta(minutes=i)) for i, n in enumerate(nodes))
    return VisitSummary(user, entry, space, exit_, path)


def learned_store():
    return SpecStore.of(
        [
            SpecEntry("idOla91", preference("g2", "p018"), 7),
            SpecEntry("idOla91", preference("g2", "p015"), 2),
        ]
    )


def test_timestamps():
    assert parse_time("t2014.01.28.09.30.15") == T0
    assert format_time(T0) == "t2014.01.28.09.30.15"
    with pytest.raises(ValueError):
        parse_time("2014-01-28 09:30:15")
    assert str(EventRecord("idOla91", "p0018", T0)) == "<idOla91,p0018,t2014.01.28.09.30.15>"


def test_counts_accumulate():
    s = SpecStore()
    for _ in range(7):
        s = record_visit(s, visit("idOla91", "g2", "p018"), GATES)
    for _ in range(2):
        s = record_visit(s, visit("idOla91", "g2", "p015"), GATES)
    assert s.get("idOla91", parse("g2 -> F p018")).count == 7
    assert s.get("idOla91", parse("g2 -> F p015")).count == 2


def test_first_visit_learns_unused_gates():
    s = record_visit(SpecStore(), visit("idOla91", "g2", "p018"), GATES)
    assert s.get("idOla91", never("g1")).count == 1
    assert s.get("idOla91", never("g3")).count == 1
    assert s.get("idOla91", never("g2")) is None
    assert len(s) == 3


def test_using_a_gate_retracts_never():
    s = record_visit(SpecStore(), visit("u", "g2", "p018"), GATES)
    s = record_visit(s, visit("u", "g3", None, exit_="g1"), GATES)
    assert s.get("u", never("g3")) is None
    assert s.get("u", never("g1")) is None
    assert s.used_gates("u") == {"g1", "g2", "g3"}


def test_drive_through_changes_only_gate_knowledge():
    s = record_visit(SpecStore(), visit("u", "g2", "p018"), GATES)
    t = record_visit(s, visit("u", "g2", None), GATES)
    assert t.get("u", preference("g2", "p018")).count == 1
    assert t.get("u", never("g1")).count == 2
    assert {e.formula for e in t} == {e.formula for e in s}


def test_malformed_visit():
    bad = VisitSummary("u", "g2", None, "g2", ())
    with pytest.raises(StoreError):
        record_visit(SpecStore(), bad, GATES)
    with pytest.raises(StoreError):
        record_visit(SpecStore(), visit("u", "g9", None), GATES)
    wrong_end = visit("u", "g2", "p018")
    with pytest.raises(StoreError):
        record_visit(SpecStore(), VisitSummary("u", "g2", "p018", "g1", wrong_end.path), GATES)


def test_syntactic_variants_merge():
    s = SpecStore.of([SpecEntry("u", parse("G ~g1"), 2), SpecEntry("u", parse("~F g1"), 3)])
    assert len(s) == 1
    (entry,) = s
    assert entry.count == 5


def test_reconcile_drops_contradiction():
    s = learned_store().upsert("idOla91", never("g3"), 5)
    t, removed = reconcile(s, "idOla91", "g3")
    assert removed == [never("g3")]
    assert t.get("idOla91", never("g3")) is None
    assert len(t) == 2


def test_reconcile_keeps_open_knowledge():
    s = SpecStore.of([SpecEntry("idOla91", preference("g2", "p018"), 7)])
    t, removed = reconcile(s, "idOla91", "g2")
    assert t == s and removed == []
    t, removed = reconcile(SpecStore(), "idOla91", "g2")
    assert t == SpecStore() and removed == []


def test_reconcile_only_touches_user():
    s = SpecStore.of([SpecEntry("a", never("g3"), 1), SpecEntry("b", never("g3"), 1)])
    t, _ = reconcile(s, "a", "g3")
    assert [e.id for e in t] == ["b"]


def test_entries_for_ordering():
    es = entries_for(learned_store(), "idOla91", "g2")
    assert [(e.formula, e.count) for e in es] == [
        (preference("g2", "p018"), 7),
        (preference("g2", "p015"), 2),
    ]
    assert entries_for(learned_store(), "nobody", "g2") == []
    assert entries_for(learned_store(), "idOla91", "g1") == []
    tied = SpecStore.of([SpecEntry("u", preference("g2", "p018"), 3), SpecEntry("u", preference("g2", "p015"), 3)])
    assert [e.formula for e in entries_for(tied, "u", "g2")] == [
        preference("g2", "p015"),
        preference("g2", "p018"),
    ]


def test_store_file_roundtrip(tmp_path):
    s = record_visit(learned_store(), visit("idOla91", "g2", "p018"), GATES)
    path = tmp_path / "store.tsv"
    save_store(s, path)
    assert load_store(path) == s
    text = path.read_text()
    assert "idOla91\tg2 -> F p018\t8\n" in text
    assert dumps_store(SpecStore()) == ""
    assert loads_store("") == SpecStore()


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("u\tp\t0\n", 1),
        ("u\tp\t1\nu\tp\t-2\n", 2),
        ("u\tp\n", 1),
        ("u\tp &\t1\n", 1),
        ("u\tp\tseven\n", 1),
        ("#used\tu\tg1\n", 1),
    ],
)
def test_store_file_errors(text, lineno):
    with pytest.raises(StoreError, match=f":{lineno}:"):
        loads_store(text)


def test_entry_count_positive():
    with pytest.raises(StoreError):
        SpecEntry("u", Atom("p"), 0)


# -- properties -------------------------------------------------------------

USERS = ["u1", "u2"]
SPACES = ["p010", "p015", "p018", None]
visits = st.builds(
    visit,
    st.sampled_from(USERS),
    st.sampled_from(sorted(GATES)),
    st.sampled_from(SPACES),
    st.sampled_from(sorted(GATES)),
)
actions = st.lists(
    st.one_of(
        st.tuples(st.just("visit"), visits),
        st.tuples(st.just("reconcile"), st.tuples(st.sampled_from(USERS), st.sampled_from(sorted(GATES)))),
    ),
    max_size=12,
)


def check_store_actions(seq):
    s = SpecStore()
    for kind, arg in seq:
        if kind == "visit":
            before = {(e.id, e.formula): e.count for e in s}
            s = record_visit(s, arg, GATES)
            after = {(e.id, e.formula): e.count for e in s}
            if arg.parked_space:
                key = (arg.user_id, preference(arg.entry_gate, arg.parked_space))
                assert after[key] == before.get(key, 0) + 1
                bumped = [k for k in after if isinstance(k[1], Implies) and after[k] != before.get(k)]
                assert bumped == [key]
        else:
            user, gate = arg
            s, _ = reconcile(s, user, gate)
            for e in s.for_user(user):
                assert decide(e.formula & Atom(gate)).verdict is Verdict.SAT
            again, removed = reconcile(s, user, gate)
            assert again == s and removed == []
        keys = [(e.id, e.formula) for e in s]
        assert len(keys) == len(set(keys))
        assert all(e.count > 0 for e in s)
    assert loads_store(dumps_store(s)) == s


@settings(max_examples=200, deadline=None)
@given(actions)
def test_store_invariants(seq):
    check_store_actions(seq)
