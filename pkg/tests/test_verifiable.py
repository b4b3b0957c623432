"""Verifiable register semantics: Read/Write plus Sign/Verify."""

from byzreg import adversary as adv
from byzreg import histories
from byzreg.runtime import DONE, FAIL, SUCCESS, Request

from conftest import results_of, simulate


def last_result(trace, op, process=None):
    ops = results_of(trace, op, process)
    assert ops, f"no completed {op}"
    return ops[-1].result


def test_write_then_read_returns_value():
    _, tr, _ = simulate(
        "verifiable",
        [Request(1, "write", 5, 1), Request(2, "read", None, 20)],
    )
    assert last_result(tr, "write") == DONE
    assert last_result(tr, "read") == 5


def test_rewrite_initial_value_is_permitted():
    _, tr, _ = simulate("verifiable", [Request(1, "write", 0, 1)])
    assert last_result(tr, "write") == DONE


def test_last_write_wins():
    _, tr, _ = simulate(
        "verifiable",
        [
            Request(1, "write", 1, 1),
            Request(1, "write", 2, 5),
            Request(2, "read", None, 50),
        ],
    )
    assert last_result(tr, "read") == 2


def test_fresh_register_reads_initial_value():
    _, tr, _ = simulate("verifiable", [Request(3, "read", None, 1)])
    assert last_result(tr, "read") == 0


def test_sign_requires_prior_write():
    _, tr, _ = simulate("verifiable", [Request(1, "sign", 4, 1)])
    assert last_result(tr, "sign") == FAIL


def test_sign_after_write_succeeds():
    _, tr, _ = simulate(
        "verifiable", [Request(1, "write", 4, 1), Request(1, "sign", 4, 5)]
    )
    assert last_result(tr, "sign") == SUCCESS


def test_older_written_values_remain_signable():
    _, tr, _ = simulate(
        "verifiable",
        [
            Request(1, "write", 1, 1),
            Request(1, "write", 2, 5),
            Request(1, "sign", 1, 10),
        ],
    )
    assert last_result(tr, "sign") == SUCCESS


def test_verify_after_successful_sign_is_true():
    _, tr, _ = simulate(
        "verifiable",
        [
            Request(1, "write", 4, 1),
            Request(1, "sign", 4, 5),
            Request(2, "verify", 4, 40),
        ],
    )
    sign = results_of(tr, "sign")[0]
    verify = results_of(tr, "verify")[0]
    assert sign.result == SUCCESS
    assert verify.inv > sign.resp
    assert verify.result is True


def test_verify_of_unsigned_value_is_false():
    _, tr, _ = simulate("verifiable", [Request(2, "verify", 4, 1)])
    assert last_result(tr, "verify") is False


def test_verify_true_with_silent_byzantine_helper():
    result, tr, _ = simulate(
        "verifiable",
        [
            Request(1, "write", 4, 1),
            Request(1, "sign", 4, 5),
            Request(2, "verify", 4, 40),
        ],
        byzantine=(4,),
        scripts={4: adv.silent()},
    )
    assert not result.non_terminating
    assert last_result(tr, "verify") is True


def test_read_does_not_authenticate_byzantine_writes():
    # a Byzantine writer stores 3 directly in the main cell; Read returns it
    script = adv.write_own(("Rstar", 3, 5))
    _, tr, _ = simulate(
        "verifiable",
        [Request(2, "read", None, 20)],
        byzantine=(1,),
        scripts={1: script},
    )
    assert last_result(tr, "read") == 3


def test_helper_writes_nothing_without_askers():
    # no Verify ever runs, so no helper may publish a reply or witness-set
    result, _, _ = simulate(
        "verifiable",
        [Request(1, "write", 5, 1), Request(2, "read", None, 10)],
    )
    helper_writes = [
        e for e in result.step_log
        if e[1] == "w" and (e[2].startswith("Rr[") or e[2].startswith("R["))
    ]
    assert helper_writes == []


def test_verify_true_survives_writer_reset():
    # witness quorum already formed: wiping the writer's registers later
    # cannot revoke the signature
    script = adv.reset_at(600)
    result, tr, system = simulate(
        "verifiable",
        [
            Request(1, "write", 4, 1),
            Request(1, "sign", 4, 10),
            Request(2, "verify", 4, 40),
            Request(3, "verify", 4, 900),
        ],
        byzantine=(1,),
        scripts={1: script},
    )
    assert not result.non_terminating
    first, second = results_of(tr, "verify")
    assert first.result is True
    assert second.inv > 600
    assert second.result is True
    for v in histories.check_observations(tr):
        assert v.passed, v.describe()
    # the second verifier's own helper adopted the value through the f+1
    # quorum rule: the writer's register was already wiped by then
    assert system.cells_by_name["R[1]"].value == frozenset()
    assert 4 in system.cells_by_name["R[3]"].value


def test_helper_adopts_signed_value_when_asked():
    # an asker appears while the value sits in the writer's register: every
    # correct helper becomes a witness
    _, _, system = simulate(
        "verifiable",
        [
            Request(1, "write", 7, 1),
            Request(1, "sign", 7, 5),
            Request(2, "verify", 7, 30),
        ],
    )
    for pid in (2, 3, 4):
        assert 7 in system.cells_by_name[f"R[{pid}]"].value


def test_monotone_witness_sets_for_correct_processes():
    result, _, _ = simulate(
        "verifiable",
        [
            Request(1, "write", 1, 1),
            Request(1, "sign", 1, 5),
            Request(2, "verify", 1, 30),
            Request(3, "verify", 1, 60),
        ],
        seed=11,
    )
    seen = {}
    for (tick, kind, cell, pid, value) in result.step_log:
        if kind == "w" and cell.startswith("R[") and not cell.startswith("Rr["):
            prev = seen.get(cell, frozenset())
            assert prev <= value, f"witness set shrank in {cell} at {tick}"
            seen[cell] = value
