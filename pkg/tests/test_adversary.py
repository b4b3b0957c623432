"""Adversary scripting: directives, mimicry, replay, determinism."""

import pytest

from byzreg import adversary as adv
from byzreg.runtime import ConfigError, Request

from conftest import results_of, simulate

WORKLOAD = [
    Request(1, "write", 4, 1),
    Request(1, "sign", 4, 5),
    Request(2, "verify", 4, 40),
]


def test_silent_byzantine_helper_does_not_block_progress():
    result, tr, _ = simulate(
        "verifiable", WORKLOAD, byzantine=(4,), scripts={4: adv.silent()}
    )
    assert not result.non_terminating
    assert all(o.resp is not None for o in tr.operations(only_correct=True))
    assert not any(e[3] == 4 for e in result.step_log)


def test_crashing_helper_behaves_correctly_until_the_crash():
    result, _, _ = simulate(
        "verifiable", WORKLOAD, byzantine=(4,), scripts={4: adv.crash_at(100)}
    )
    p4_steps = [e for e in result.step_log if e[3] == 4]
    assert all(e[0] < 100 for e in p4_steps)


def test_directive_ticks_must_not_decrease():
    with pytest.raises(ConfigError):
        simulate(
            "verifiable",
            WORKLOAD,
            byzantine=(4,),
            scripts={4: adv.write_own(("R[4]", frozenset({1}), 50),
                                      ("R[4]", frozenset({2}), 10))},
        )


def test_foreign_register_directives_rejected_at_load():
    with pytest.raises(ConfigError):
        simulate(
            "verifiable",
            WORKLOAD,
            byzantine=(4,),
            scripts={4: adv.write_own(("Rstar", 9, 5))},
        )


def test_unknown_register_directives_rejected_at_load():
    with pytest.raises(ConfigError):
        simulate(
            "verifiable",
            WORKLOAD,
            byzantine=(4,),
            scripts={4: adv.write_own(("Nope", 9, 5))},
        )


def test_pinned_write_lands_at_its_trigger_tick():
    script = adv.write_own(("R[4]", frozenset({9}), 77))
    result, _, _ = simulate("verifiable", WORKLOAD, byzantine=(4,),
                            scripts={4: script})
    hits = [e for e in result.step_log if e[3] == 4 and e[1] == "w"]
    assert hits and hits[0][0] == 77


def test_stale_responder_cannot_unblock_or_block_verifies():
    result, tr, _ = simulate(
        "verifiable",
        WORKLOAD + [Request(3, "verify", 9, 60)],
        byzantine=(4,),
        scripts={4: adv.stale_responder()},
    )
    assert not result.non_terminating
    good, bad = results_of(tr, "verify")
    assert good.result is True
    assert bad.result is False
    stale = [e for e in result.step_log if e[3] == 4 and e[1] == "w"]
    assert stale and all(e[4][1] == 0 for e in stale)


def test_script_determinism():
    script = adv.write_own(("R[4]", frozenset({9}), 30), ("R[4]", frozenset(), 90))
    r1, _, _ = simulate("verifiable", WORKLOAD, byzantine=(4,), scripts={4: script})
    r2, _, _ = simulate("verifiable", WORKLOAD, byzantine=(4,), scripts={4: script})
    assert r1.step_log == r2.step_log


def test_replay_reissues_own_writes_verbatim():
    r1, _, _ = simulate("verifiable", WORKLOAD, seed=5)
    own = [(t, c, v) for (t, k, c, p, v) in r1.step_log if p == 1 and k == "w"]
    assert own
    # re-run with p1 Byzantine, replaying exactly the recorded writes
    scripts = adv.replay_from_log(r1.step_log, [1])
    r2, _, _ = simulate(
        "verifiable",
        [Request(2, "verify", 4, 40)],
        byzantine=(1,),
        scripts=scripts,
        seed=5,
    )
    replayed = [(t, c, v) for (t, k, c, p, v) in r2.step_log if p == 1 and k == "w"]
    # byte-identical while the second run lasts (it may respond earlier)
    horizon = r2.final_tick
    assert replayed == [w for w in own if w[0] <= horizon]
    assert len(replayed) >= 2


def test_exhausted_scripts_act_as_silent():
    script = adv.write_own(("R[4]", frozenset({1}), 10))
    result, _, _ = simulate("verifiable", WORKLOAD, byzantine=(4,),
                            scripts={4: script})
    p4 = [e for e in result.step_log if e[3] == 4]
    assert len(p4) == 1
