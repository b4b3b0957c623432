"""Sticky register semantics: the first written value is kept forever."""

from byzreg import adversary as adv
from byzreg import histories
from byzreg.runtime import BOTTOM, DONE, Request

from conftest import results_of, simulate


def test_read_before_any_write_returns_bottom():
    _, tr, _ = simulate("sticky", [Request(2, "read", None, 1)])
    assert results_of(tr, "read")[0].result is BOTTOM


def test_first_write_sticks():
    _, tr, _ = simulate(
        "sticky",
        [Request(1, "write", 3, 1), Request(2, "read", None, 100)],
    )
    read = results_of(tr, "read")[0]
    write = results_of(tr, "write")[0]
    assert write.result == DONE
    assert read.inv > write.resp
    assert read.result == 3


def test_second_write_returns_done_without_effect():
    result, tr, _ = simulate(
        "sticky",
        [
            Request(1, "write", 3, 1),
            Request(1, "write", 4, 200),
            Request(2, "read", None, 300),
            Request(3, "read", None, 320),
        ],
    )
    w1, w2 = results_of(tr, "write")
    assert w2.result == DONE
    # the second write never touches the echo register
    assert not any(e[1] == "w" and e[2] == "E[1]" and e[4] == 4
                   for e in result.step_log)
    for read in results_of(tr, "read"):
        assert read.result == 3


def test_write_waits_for_witness_quorum():
    result, tr, system = simulate(
        "sticky", [Request(1, "write", 5, 1)], n=4, f=1
    )
    assert not result.non_terminating
    write = results_of(tr, "write")[0]
    # at response time, n - f witness registers hold the value
    witnesses = [
        e for e in result.step_log
        if e[1] == "w" and e[2].startswith("R[") and e[4] == 5 and e[0] < write.resp
    ]
    assert len({e[2] for e in witnesses}) >= 3


def test_correct_readers_agree_despite_equivocation():
    script = adv.write_own(("E[1]", 5, 10), ("E[1]", 6, 30), ("R[1]", 6, 50))
    result, tr, _ = simulate(
        "sticky",
        [
            Request(2, "read", None, 15),
            Request(3, "read", None, 25),
            Request(4, "read", None, 200),
        ],
        byzantine=(1,),
        scripts={1: script},
    )
    assert not result.non_terminating
    solid = [o.result for o in results_of(tr, "read") if o.result is not BOTTOM]
    assert len(set(solid)) <= 1
    for v in histories.check_observations(tr):
        assert v.passed, v.describe()
    assert histories.byz_linearize_constructive(tr).passed


def test_byzantine_writer_only_bottom_reads():
    _, tr, _ = simulate(
        "sticky",
        [Request(2, "read", None, 1), Request(3, "read", None, 5)],
        byzantine=(1,),
        scripts={1: adv.silent()},
    )
    for o in results_of(tr, "read"):
        assert o.result is BOTTOM


def test_helpers_echo_the_writer_and_form_witnesses():
    _, _, system = simulate(
        "sticky",
        [Request(1, "write", 5, 1), Request(2, "read", None, 80)],
    )
    # every correct process echoed the writer's value and, having seen an
    # n-f echo quorum, became a witness
    for pid in (1, 2, 3, 4):
        assert system.cells_by_name[f"E[{pid}]"].value == 5
        assert system.cells_by_name[f"R[{pid}]"].value == 5


def test_witness_via_f_plus_one_quorum_when_asked():
    # a late helper that missed the echo phase still adopts from f+1
    # existing witnesses once a reader asks
    script = adv.write_own(("E[1]", 5, 5))
    result, tr, system = simulate(
        "sticky",
        [Request(2, "read", None, 40), Request(3, "read", None, 300)],
        byzantine=(1,),
        scripts={1: script},
        masks={4: 250},  # p4 sleeps through the echo phase
    )
    assert not result.non_terminating
    reads = results_of(tr, "read")
    solid = {o.result for o in reads if o.result is not BOTTOM}
    assert len(solid) <= 1


def test_sticky_cells_write_once_for_correct_processes():
    result, _, _ = simulate(
        "sticky",
        [
            Request(1, "write", 5, 1),
            Request(2, "read", None, 40),
            Request(3, "read", None, 60),
        ],
        seed=13,
    )
    transitions = {}
    for (tick, kind, cell, pid, value) in result.step_log:
        if kind == "w" and (cell.startswith("E[") or
                            (cell.startswith("R[") and not cell.startswith("Rr["))):
            transitions.setdefault(cell, []).append(value)
    for cell, values in transitions.items():
        non_bottom = [v for v in values if v is not BOTTOM]
        assert len(set(non_bottom)) <= 1, f"{cell} changed value: {values}"
