"""Test-or-set reductions and the executable optimality attack.

The one-shot test-or-set object is implemented from each of the three
register types (Set = Write(1)+Sign(1), Write(1), or Write(1); Test =
Verify(1) or Read), plus a deliberately naive quorum strawman that the
three-history attack breaks at 3 <= n <= 3f.

The attack builds the histories in sequence:

* H1: setter and first tester run with a silent faulty minority; the Test
  must return 1.
* H2: the setter's coalition behaves exactly as in H1 (the runs share a
  seed, so the schedules coincide), then resets all its registers to their
  initial states; a second tester wakes afterwards and runs Test'.
* H3: the first tester's coalition replays its H2 register writes verbatim
  at the same ticks while the setter's coalition, now correct, sleeps; the
  second tester cannot distinguish H3 from H2, so Test' returns the same
  answer even though no Set was ever invoked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from byzreg import adversary as adv
from byzreg import histories
from byzreg import runtime

Request = runtime.Request
SystemConfig = runtime.SystemConfig

TOS_BACKENDS = ("tos_verifiable", "tos_authenticated", "tos_sticky", "naive_quorum")

# Lemma-style property ids: see histories.check_observations for the
# matching trace predicates.
SAVER_VALIDITY = "saver-1-validity"
SAVER_UNFORGEABILITY = "saver-2-unforgeability"
SAVER_RELAY = "saver-3-relay"


def derive_partition(n, f):
    """Split 1..n into setter, two testers, and Q1..Q3 of size <= f-1.

    Returns None when no such partition exists, i.e. outside 3 <= n <= 3f.
    """
    if not (3 <= n <= 3 * f):
        return None
    rest = list(range(4, n + 1))
    cap = f - 1
    if len(rest) > 3 * cap:
        return None
    qs = ([], [], [])
    for i, pid in enumerate(rest):
        qs[i // cap if cap else 0].append(pid)
    return {
        "setter": 1,
        "tester_a": 2,
        "tester_b": 3,
        "q1": qs[0],
        "q2": qs[1],
        "q3": qs[2],
    }


@dataclass
class AttackReport:
    backend: str
    n: int
    f: int
    seed: int
    applicable: bool
    conclusive: bool = False
    violation: bool = False
    violated_property: str = ""
    detail: str = ""
    partition: dict = field(default_factory=dict)
    test_prime_result: object = None
    phase_traces: dict = field(default_factory=dict)  # name -> HistoryTrace
    dumps: dict = field(default_factory=dict)  # "t2"/"t4"/"t5"/"t7" -> register dump

    def describe(self):
        return {
            "backend": self.backend,
            "n": self.n,
            "f": self.f,
            "seed": self.seed,
            "applicable": self.applicable,
            "conclusive": self.conclusive,
            "violation": self.violation,
            "violated_property": self.violated_property,
            "detail": self.detail,
            "partition": self.partition,
            "test_prime_result": self.test_prime_result,
        }


def _op_response(events, pid, op):
    for ev in events:
        if ev.process == pid and ev.op == op and ev.kind == "respond":
            return ev
    return None


def _events_prefix(events, upto, pids=None):
    return [
        (ev.tick, ev.process, ev.kind, ev.op, ev.arg, ev.result)
        for ev in events
        if ev.tick <= upto and (pids is None or ev.process in pids)
    ]


def impossibility_attack(backend, n, f, seed=0, step_budget=500_000):
    """Replay the three-history construction against a test-or-set backend."""
    if backend not in runtime.PROTOCOLS:
        raise runtime.ConfigError(f"unknown backend {backend!r}")
    report = AttackReport(backend=backend, n=n, f=f, seed=seed, applicable=False)
    part = derive_partition(n, f)
    if part is None:
        report.detail = f"no attack partition exists for n={n}, f={f} (needs 3 <= n <= 3f)"
        return report
    report.applicable = True
    report.partition = part
    s = part["setter"]
    pa = part["tester_a"]
    pb = part["tester_b"]
    q1, q2, q3 = part["q1"], part["q2"], part["q3"]

    sleepy = frozenset({pb, *q3})
    correct1 = frozenset({s, pa, *q1, *q2})
    cfg1 = SystemConfig(n=n, f=f, correct=correct1, seed=seed, step_budget=step_budget)

    def fresh(cfg):
        system = runtime.create_system(cfg)
        protocol = runtime.make_protocol(backend, system)
        return system, protocol

    # ---- probe: when does the Set complete under this seed? --------------
    system, protocol = fresh(cfg1)
    probe = runtime.run(system, protocol, [Request(s, "set", None, 1)])
    if probe.non_terminating:
        report.detail = "inconclusive: Set does not terminate in H1 (backend not live)"
        return report
    t2 = _op_response(probe.events, s, "set").tick

    # ---- H1 ---------------------------------------------------------------
    system, protocol = fresh(cfg1)
    h1 = runtime.run(
        system,
        protocol,
        [Request(s, "set", None, 1), Request(pa, "test", None, t2 + 1)],
        snapshot_at={t2},
    )
    trace1 = histories.make_trace(h1, cfg1, "tos")
    report.phase_traces["h1"] = trace1
    if h1.non_terminating:
        report.detail = "inconclusive: Test does not terminate in H1 (backend not live)"
        return report
    test_ev = _op_response(h1.events, pa, "test")
    report.dumps["t2"] = h1.snapshots.get(t2)
    report.dumps["t4"] = system.dump()
    if test_ev.result != 1:
        report.detail = "inconclusive: H1 Test returned 0, backend already fails validity"
        return report
    t4 = test_ev.tick

    # ---- H2 ---------------------------------------------------------------
    correct2 = frozenset({pa, pb, *q2, *q3})
    cfg2 = SystemConfig(n=n, f=f, correct=correct2, seed=seed, step_budget=step_budget)
    system2, protocol2 = fresh(cfg2)
    reset_cells = sum(len(protocol2.owned_cells(q)) for q in sorted({s, *q1}))
    t5 = t4 + reset_cells
    t6 = t5 + 1
    scripts2 = {
        q: adv.AdversaryScript(
            mimic_until=t4 + 1, directives=(adv.ResetOwn(at=t4 + 1),)
        )
        for q in sorted({s, *q1})
    }
    h2 = runtime.run(
        system2,
        protocol2,
        [
            Request(s, "set", None, 1),
            Request(pa, "test", None, t2 + 1),
            Request(pb, "test", None, t6),
        ],
        adversary=scripts2,
        masks={pid: t6 for pid in sorted(sleepy)},
        snapshot_at={t5},
    )
    trace2 = histories.make_trace(h2, cfg2, "tos")
    report.phase_traces["h2"] = trace2
    report.dumps["t5"] = h2.snapshots.get(t5)
    if _events_prefix(h2.events, t4) != _events_prefix(h1.events, t4):
        report.detail = "inconclusive: H2 diverged from H1 before the reset"
        return report
    if h2.non_terminating:
        report.detail = "inconclusive: Test' does not terminate in H2 (backend not live)"
        return report
    test_prime_h2 = _op_response(h2.events, pb, "test")
    if test_prime_h2.result != 1:
        # a correct implementation must relay the earlier Test's 1
        report.conclusive = True
        report.violation = True
        report.violated_property = SAVER_RELAY
        report.test_prime_result = test_prime_h2.result
        report.detail = (
            "H2: Test by the first tester returned 1, a later Test' by a "
            "correct tester returned 0"
        )
        return report
    t7 = test_prime_h2.tick

    # ---- H3 ---------------------------------------------------------------
    correct3 = frozenset({s, pb, *q1, *q3})
    cfg3 = SystemConfig(n=n, f=f, correct=correct3, seed=seed, step_budget=step_budget)
    system3, protocol3 = fresh(cfg3)
    replayers = sorted({pa, *q2})
    scripts3 = adv.replay_from_log(h2.step_log, replayers, until=t7)
    live = sleepy
    script = {}
    for tick in range(1, t7 + 1):
        key = h2.schedule[tick] if tick < len(h2.schedule) else None
        script[tick] = key if (key is not None and key[0] in live) else None
    h3 = runtime.run(
        system3,
        protocol3,
        [Request(pb, "test", None, t6)],
        adversary=scripts3,
        masks={pid: t7 + 1 for pid in sorted({s, *q1})}
        | {pid: t6 for pid in sorted(sleepy)},
        schedule_script=script,
        snapshot_at={t7},
    )
    trace3 = histories.make_trace(h3, cfg3, "tos")
    report.phase_traces["h3"] = trace3
    report.dumps["t7"] = h3.snapshots.get(t7) or system3.dump()
    if h3.non_terminating:
        report.detail = "inconclusive: Test' does not terminate in H3"
        return report

    # replay fidelity: the waking coalition saw the same world as in H2
    h2_view = _events_prefix(h2.events, t7, live)
    h3_view = _events_prefix(h3.events, t7, live)
    if h2_view != h3_view:
        report.detail = "inconclusive: H3 diverged from H2 for the waking processes"
        return report
    h2_writes = [
        e for e in h2.step_log if e[1] == "w" and e[3] in set(replayers) and e[0] <= t7
    ]
    h3_writes = [
        e for e in h3.step_log if e[1] == "w" and e[3] in set(replayers) and e[0] <= t7
    ]
    if h2_writes != h3_writes:
        report.detail = "inconclusive: replayed writes diverged between H2 and H3"
        return report

    test_prime_h3 = _op_response(h3.events, pb, "test")
    report.test_prime_result = test_prime_h3.result
    report.conclusive = True
    setter_invoked = any(
        ev.process == s and ev.op == "set" and ev.kind == "invoke"
        for ev in h3.events
    )
    if test_prime_h3.result == 1 and not setter_invoked:
        report.violation = True
        report.violated_property = SAVER_UNFORGEABILITY
        report.detail = (
            "H3: Test' by a correct tester returned 1 although the correct "
            "setter never invoked Set"
        )
    else:
        report.violation = False
        report.detail = "H3: no violation observed"
    return report


def validate_one_shot(workload):
    """One-shot discipline: one Set total, at most one Test per tester."""
    sets = [r for r in workload if r.op == "set"]
    if len(sets) > 1:
        raise runtime.ConfigError("test-or-set is one-shot: multiple Set requests")
    testers = {}
    for r in workload:
        if r.op == "test":
            testers[r.process] = testers.get(r.process, 0) + 1
            if testers[r.process] > 1:
                raise runtime.ConfigError(
                    f"test-or-set is one-shot: p{r.process} tests twice"
                )
