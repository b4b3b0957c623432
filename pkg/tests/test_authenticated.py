"""Authenticated register semantics: timestamped, atomically signed writes."""

from byzreg import adversary as adv
from byzreg import histories
from byzreg.runtime import DONE, Request

from conftest import results_of, simulate


def test_fresh_register_reads_initial_value():
    _, tr, _ = simulate("authenticated", [Request(2, "read", None, 1)])
    assert results_of(tr, "read")[0].result == 0


def test_write_inserts_timestamped_pair():
    _, tr, system = simulate("authenticated", [Request(1, "write", 7, 1)])
    assert results_of(tr, "write")[0].result == DONE
    assert system.cells_by_name["R[1]"].value == frozenset({(0, 0), (1, 7)})


def test_double_write_gets_distinct_timestamps():
    _, _, system = simulate(
        "authenticated", [Request(1, "write", 7, 1), Request(1, "write", 7, 5)]
    )
    assert system.cells_by_name["R[1]"].value == frozenset({(0, 0), (1, 7), (2, 7)})


def test_read_returns_last_write():
    _, tr, _ = simulate(
        "authenticated",
        [Request(1, "write", 7, 1), Request(2, "read", None, 30)],
    )
    assert results_of(tr, "read")[0].result == 7


def test_verify_written_value_true():
    _, tr, _ = simulate(
        "authenticated",
        [Request(1, "write", 7, 1), Request(2, "verify", 7, 30)],
    )
    assert results_of(tr, "verify")[0].result is True


def test_verify_initial_value_always_true():
    _, tr, _ = simulate("authenticated", [Request(2, "verify", 0, 1)])
    assert results_of(tr, "verify")[0].result is True


def test_verify_unwritten_value_false():
    _, tr, _ = simulate("authenticated", [Request(3, "verify", 9, 1)])
    assert results_of(tr, "verify")[0].result is False


def test_malformed_register_content_reads_as_initial_value():
    # Byzantine writer stores a non-pair-set blob; the v0 path absorbs it
    script = adv.write_own(("R[1]", "junk", 5))
    _, tr, _ = simulate(
        "authenticated",
        [Request(2, "read", None, 20)],
        byzantine=(1,),
        scripts={1: script},
    )
    assert results_of(tr, "read")[0].result == 0


def test_byzantine_writer_pair_content_still_verifiable():
    # pairs planted by a Byzantine writer behave like written values
    script = adv.write_own(("R[1]", frozenset({(0, 0), (3, 8)}), 5))
    result, tr, _ = simulate(
        "authenticated",
        [Request(2, "read", None, 20), Request(3, "verify", 8, 20)],
        byzantine=(1,),
        scripts={1: script},
    )
    assert not result.non_terminating
    read = results_of(tr, "read")[0]
    assert read.result in (0, 8)
    for v in histories.check_observations(tr):
        assert v.passed, v.describe()
    assert histories.byz_linearize_constructive(tr).passed


def test_writer_helper_publishes_the_value_projection():
    # the writer keeps no separate witness register: its replies carry the
    # values projected out of its timestamped pair set
    result, _, _ = simulate(
        "authenticated",
        [Request(1, "write", 7, 1), Request(2, "verify", 7, 30)],
    )
    replies = [
        e for e in result.step_log
        if e[1] == "w" and e[3] == 1 and e[2].startswith("Rr[1,")
    ]
    assert replies
    payload, _counter = replies[-1][4]
    assert payload == frozenset({0, 7})


def test_observations_hold_on_basic_run():
    _, tr, _ = simulate(
        "authenticated",
        [
            Request(1, "write", 7, 1),
            Request(2, "read", None, 30),
            Request(3, "verify", 7, 60),
            Request(2, "verify", 9, 80),
        ],
        seed=4,
    )
    for v in histories.check_observations(tr):
        assert v.passed, v.describe()
    assert histories.byz_linearize_constructive(tr).passed
    assert histories.byz_linearize_bruteforce(tr).passed
