"""Checkers: sequential specs, constructive/brute-force linearization, IO."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzreg import histories
from byzreg.histories import (
    BOTTOM,
    Event,
    HistoryTrace,
    Operation,
    SearchBoundExceeded,
    byz_linearize_bruteforce,
    byz_linearize_constructive,
    check_observations,
    check_sequential,
    restrict_correct,
    trace_from_jsonl,
    trace_to_jsonl,
)
from byzreg.runtime import DONE, SUCCESS, Request

from conftest import simulate


def op(process, name, arg, result, inv=0, resp=0):
    return Operation(process, name, arg, result, inv, resp)


# -- sequential specs -------------------------------------------------------


def test_sequential_verifiable_accepts_write_sign_verify():
    seq = [
        op(1, "write", 1, DONE),
        op(1, "sign", 1, SUCCESS),
        op(2, "verify", 1, True),
    ]
    assert check_sequential(seq, "verifiable").passed


def test_sequential_verifiable_rejects_unbacked_verify():
    verdict = check_sequential([op(2, "verify", 1, True)], "verifiable")
    assert not verdict.passed
    assert verdict.violation["index"] == 0


def test_sequential_sticky_first_write_sticks():
    seq = [op(1, "write", 3, DONE), op(1, "write", 4, DONE), op(2, "read", None, 3)]
    assert check_sequential(seq, "sticky").passed
    seq[-1] = op(2, "read", None, 4)
    assert not check_sequential(seq, "sticky").passed


def test_sequential_authenticated_initial_value_verifies():
    assert check_sequential([op(2, "verify", 0, True)], "authenticated").passed
    assert not check_sequential([op(2, "verify", 0, False)], "authenticated").passed


def test_sequential_read_sees_last_write():
    seq = [op(1, "write", 1, DONE), op(1, "write", 2, DONE), op(2, "read", None, 1)]
    assert not check_sequential(seq, "verifiable").passed


def test_sequential_tos():
    assert check_sequential([op(2, "test", None, 0), op(1, "set", None, DONE),
                             op(3, "test", None, 1)], "tos").passed
    assert not check_sequential([op(3, "test", None, 1)], "tos").passed


# -- restrict_correct -------------------------------------------------------


def _mini_trace(events, correct, tag="verifiable", v0=0):
    return HistoryTrace(
        events=tuple(events), correct=frozenset(correct), type_tag=tag,
        n=4, f=1, v0=v0,
    )


def test_restrict_correct_drops_byzantine_ops():
    events = [
        Event(1, 1, "invoke", "write", 5),
        Event(2, 1, "respond", "write", 5, DONE),
        Event(3, 2, "invoke", "read", None),
        Event(4, 2, "respond", "read", None, 5),
    ]
    tr = _mini_trace(events, {2, 3, 4})
    restricted = restrict_correct(tr)
    assert [ev.process for ev in restricted.events] == [2, 2]
    assert [ev.tick for ev in restricted.events] == [3, 4]


def test_restrict_correct_identity_when_all_correct():
    events = [Event(1, 2, "invoke", "read", None), Event(2, 2, "respond", "read", None, 0)]
    tr = _mini_trace(events, {1, 2, 3, 4})
    assert restrict_correct(tr).events == tr.events


def test_restrict_correct_empty_trace():
    tr = _mini_trace([], {1, 2, 3, 4})
    assert restrict_correct(tr).events == ()


# -- constructive linearization, faulty writer ------------------------------


def test_faulty_writer_synthesizes_sign_inside_window():
    # Verify(7) -> false then Verify(7) -> true: the sign must land between
    # the false verify's invocation and the true verify's response
    events = [
        Event(10, 2, "invoke", "verify", 7),
        Event(20, 2, "respond", "verify", 7, False),
        Event(30, 3, "invoke", "verify", 7),
        Event(40, 3, "respond", "verify", 7, True),
    ]
    tr = _mini_trace(events, {2, 3, 4})
    verdict = byz_linearize_constructive(tr)
    assert verdict.passed
    seq = verdict.witness
    kinds = [(o["op"], o["result"]) for o in seq]
    assert ("sign", SUCCESS) in kinds
    sign_pos = kinds.index(("sign", SUCCESS))
    false_pos = kinds.index(("verify", False))
    true_pos = kinds.index(("verify", True))
    assert false_pos < sign_pos < true_pos


def test_faulty_writer_relay_violation_has_empty_window():
    events = [
        Event(10, 2, "invoke", "verify", 7),
        Event(20, 2, "respond", "verify", 7, True),
        Event(30, 3, "invoke", "verify", 7),
        Event(40, 3, "respond", "verify", 7, False),
    ]
    tr = _mini_trace(events, {2, 3, 4})
    verdict = byz_linearize_constructive(tr)
    assert not verdict.passed
    assert verdict.violation["certificate"] == "empty-window"
    brute = byz_linearize_bruteforce(tr)
    assert not brute.passed


def test_faulty_writer_reads_are_justified_by_synthesized_writes():
    events = [
        Event(10, 2, "invoke", "read", None),
        Event(20, 2, "respond", "read", None, 5),
        Event(30, 3, "invoke", "read", None),
        Event(40, 3, "respond", "read", None, 6),
    ]
    tr = _mini_trace(events, {2, 3, 4})
    assert byz_linearize_constructive(tr).passed
    assert byz_linearize_bruteforce(tr).passed


def test_faulty_writer_sticky_disagreement_fails():
    events = [
        Event(10, 2, "invoke", "read", None),
        Event(20, 2, "respond", "read", None, 5),
        Event(30, 3, "invoke", "read", None),
        Event(40, 3, "respond", "read", None, 6),
    ]
    tr = _mini_trace(events, {2, 3, 4}, tag="sticky", v0=BOTTOM)
    verdict = byz_linearize_constructive(tr)
    assert not verdict.passed
    assert verdict.violation["certificate"] == "uniqueness"
    assert not byz_linearize_bruteforce(tr).passed


def test_missing_annotations_with_correct_writer_raises():
    events = [
        Event(1, 1, "invoke", "write", 5),
        Event(2, 1, "respond", "write", 5, DONE),  # no lin annotation
    ]
    tr = _mini_trace(events, {1, 2, 3, 4})
    with pytest.raises(histories.MissingAnnotations):
        byz_linearize_constructive(tr)


# -- brute force ------------------------------------------------------------


def test_bruteforce_empty_history_passes():
    tr = _mini_trace([], {2, 3, 4})
    assert byz_linearize_bruteforce(tr).passed


def test_bruteforce_refuses_oversized_traces():
    events = []
    t = 1
    for i in range(11):
        events.append(Event(t, 2, "invoke", "verify", 1)); t += 1
        events.append(Event(t, 2, "respond", "verify", 1, False)); t += 1
    tr = _mini_trace(events, {2, 3, 4})
    with pytest.raises(SearchBoundExceeded):
        byz_linearize_bruteforce(tr)


def test_bruteforce_completes_open_operations():
    events = [
        Event(10, 2, "invoke", "verify", 7),
        Event(20, 2, "respond", "verify", 7, True),
        Event(30, 3, "invoke", "verify", 7),  # left open
    ]
    tr = _mini_trace(events, {2, 3, 4})
    assert byz_linearize_bruteforce(tr).passed


def test_constructive_pass_implies_bruteforce_pass_on_runs():
    for seed in range(12):
        _, tr, _ = simulate(
            "verifiable",
            [
                Request(1, "write", 1, 1),
                Request(1, "sign", 1, 5),
                Request(2, "verify", 1, 30),
                Request(3, "read", None, 40),
            ],
            seed=seed,
        )
        c = byz_linearize_constructive(tr)
        b = byz_linearize_bruteforce(tr)
        assert c.passed and b.passed


def test_pass_witness_revalidates_under_sequential_spec():
    _, tr, _ = simulate(
        "verifiable",
        [Request(1, "write", 1, 1), Request(1, "sign", 1, 5),
         Request(2, "verify", 1, 30)],
    )
    verdict = byz_linearize_constructive(tr)
    seq = [
        Operation(w["process"], w["op"],
                  histories._values.decode_value(w["arg"]),
                  histories._values.decode_value(w["result"]), 0, 0)
        for w in verdict.witness
    ]
    assert check_sequential(seq, "verifiable").passed


def test_pass_witness_respects_real_time_precedence():
    _, tr, _ = simulate(
        "verifiable",
        [
            Request(1, "write", 1, 1),
            Request(1, "sign", 1, 5),
            Request(2, "verify", 1, 30),
            Request(3, "verify", 1, 200),
            Request(4, "read", None, 250),
        ],
        seed=6,
    )
    verdict = byz_linearize_constructive(tr)
    assert verdict.passed
    order = {
        (w["process"], w["op"], w["inv"]): i for i, w in enumerate(verdict.witness)
    }
    ops = [o for o in tr.operations(only_correct=True)]
    for a in ops:
        for b in ops:
            if a.resp < b.inv:  # a precedes b in real time
                assert (
                    order[(a.process, a.op, a.inv)] < order[(b.process, b.op, b.inv)]
                )


# -- metamorphic: linearizable histories satisfy the observations -----------


def _faulty_writer_ops(tag):
    if tag in ("verifiable", "authenticated"):
        return (("verify", [1, 2], [True, False]), ("read", [None], [0, 1, 2]))
    if tag == "sticky":
        return (("read", [None], [BOTTOM, 1, 2]),)
    return (("test", [None], [0, 1]),)


@st.composite
def small_faulty_writer_traces(draw, tag="verifiable"):
    """Random correct-process traces of one type under a faulty writer."""
    op_table = _faulty_writer_ops(tag)
    events = []
    tick = 1
    pending = {}
    used_test = set()
    for _ in range(draw(st.integers(0, 4))):
        pid = draw(st.sampled_from([2, 3, 4]))
        if pid in pending:
            o, arg, results = pending.pop(pid)
            events.append(Event(tick, pid, "respond", o, arg,
                                draw(st.sampled_from(results))))
        else:
            if tag == "tos" and pid in used_test:
                continue  # one-shot discipline
            used_test.add(pid)
            o, args, results = draw(st.sampled_from(op_table))
            arg = draw(st.sampled_from(args))
            pending[pid] = (o, arg, results)
            events.append(Event(tick, pid, "invoke", o, arg))
        tick += 1
    for pid, (o, arg, results) in sorted(pending.items()):
        events.append(Event(tick, pid, "respond", o, arg,
                            draw(st.sampled_from(results))))
        tick += 1
    v0 = BOTTOM if tag == "sticky" else 0
    return _mini_trace(events, {2, 3, 4}, tag=tag, v0=v0)


@settings(max_examples=80, deadline=None)
@pytest.mark.parametrize("tag", ["verifiable", "authenticated", "sticky", "tos"])
@given(st.data())
def test_constructive_and_bruteforce_agree(tag, data):
    tr = data.draw(small_faulty_writer_traces(tag=tag))
    c = byz_linearize_constructive(tr)
    b = byz_linearize_bruteforce(tr)
    assert c.passed == b.passed, (c.describe(), b.describe())


@settings(max_examples=120, deadline=None)
@given(small_faulty_writer_traces())
def test_linearizable_implies_relay_holds(tr):
    if byz_linearize_constructive(tr).passed:
        relay = [v for v in check_observations(tr) if v.check == "relay"][0]
        assert relay.passed


# -- io ----------------------------------------------------------------------


def test_annotations_lie_within_their_operation_interval():
    for seed in range(6):
        for rtype in ("verifiable", "authenticated", "sticky"):
            wl = [Request(1, "write", 1, 1), Request(2, "read", None, 40)]
            if rtype == "verifiable":
                wl.append(Request(1, "sign", 1, 5))
            _, tr, _ = simulate(rtype, wl, seed=seed)
            for o in tr.operations():
                if o.lin is not None:
                    assert o.inv <= o.lin <= o.resp, o


def test_jsonl_round_trip_preserves_verdicts():
    _, tr, _ = simulate(
        "verifiable",
        [Request(1, "write", 1, 1), Request(1, "sign", 1, 5),
         Request(2, "verify", 1, 30)],
        seed=7,
    )
    text = trace_to_jsonl(tr)
    tr2 = trace_from_jsonl(text)
    assert tr2 == tr
    assert trace_to_jsonl(tr2) == text
    v1 = [v.describe() for v in check_observations(tr)]
    v2 = [v.describe() for v in check_observations(tr2)]
    assert v1 == v2
    assert byz_linearize_constructive(tr).passed == byz_linearize_constructive(tr2).passed
