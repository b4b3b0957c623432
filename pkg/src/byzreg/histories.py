"""History traces, sequential-spec checking, and Byzantine linearizability.

Two independent routes decide whether a trace is Byzantine linearizable:

* ``byz_linearize_constructive`` rebuilds the explicit witness history: with
  a correct writer it orders operations by their recorded internal
  linearization-point ticks; with a faulty writer it synthesizes the missing
  writer operations inside windows derived from the correct processes'
  responses (between the last refuting invocation and the first accepting
  response) and shrinks them to rational points.

* ``byz_linearize_bruteforce`` knows nothing about linearization points: it
  exhaustively searches interleavings consistent with real-time order plus
  a bounded number of synthesized writer operations.

Both validate candidate sequences with ``check_sequential``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction

from byzreg.engine import impl as _impl
from byzreg import values as _values

BOTTOM = _impl.BOTTOM
DONE = _impl.DONE
SUCCESS = _impl.SUCCESS
FAIL = _impl.FAIL
Event = _impl.Event

INF = float("inf")

TYPE_TAGS = ("verifiable", "authenticated", "sticky", "tos")


class MissingAnnotations(ValueError):
    """Constructive check needs internal linearization points it cannot find."""


class SearchBoundExceeded(RuntimeError):
    """Brute-force search refused: trace exceeds the operation bound."""


@dataclass(frozen=True)
class Operation:
    process: int
    op: str
    arg: object
    result: object
    inv: int
    resp: object  # int, or None while the operation is open
    lin: object = None  # internal linearization-point tick, if instrumented

    def describe(self):
        def tick(t):
            return t if t is None or isinstance(t, int) else str(t)

        return {
            "process": self.process,
            "op": self.op,
            "arg": _values.encode_value(self.arg),
            "result": _values.encode_value(self.result),
            "inv": tick(self.inv),
            "resp": tick(self.resp),
        }


@dataclass(frozen=True)
class HistoryTrace:
    events: tuple
    correct: frozenset
    type_tag: str
    n: int
    f: int
    v0: object = 0
    seed: int = 0
    non_terminating: bool = False

    def operations(self, only_correct=False, only=None):
        """Pair invoke/respond events into operations, preserving ticks."""
        open_by_pid = {}
        ops = []
        for ev in self.events:
            if only_correct and ev.process not in self.correct:
                continue
            if only is not None and ev.process not in only:
                continue
            if ev.kind == "invoke":
                if ev.process in open_by_pid:
                    raise ValueError(
                        f"p{ev.process} has two open operations at tick {ev.tick}"
                    )
                open_by_pid[ev.process] = (len(ops), ev)
                ops.append(
                    Operation(ev.process, ev.op, ev.arg, None, ev.tick, None)
                )
            elif ev.kind == "respond":
                idx, inv_ev = open_by_pid.pop(ev.process, (None, None))
                if idx is None or inv_ev.op != ev.op:
                    raise ValueError(
                        f"unmatched respond by p{ev.process} at tick {ev.tick}"
                    )
                ops[idx] = replace(
                    ops[idx], result=ev.result, resp=ev.tick, lin=ev.lin
                )
        return ops

    def mentioned_values(self):
        """Register values observed in the trace (args and read results)."""
        vals = set()
        for ev in self.events:
            for v in (ev.arg, ev.result):
                if v is None or v is BOTTOM or isinstance(v, bool):
                    continue
                if isinstance(v, str) and v in (DONE, SUCCESS, FAIL):
                    continue
                vals.add(v)
        return vals


def make_trace(run_result, config, type_tag, v0=0):
    return HistoryTrace(
        events=tuple(run_result.events),
        correct=config.correct,
        type_tag=type_tag,
        n=config.n,
        f=config.f,
        v0=v0,
        seed=config.seed,
        non_terminating=run_result.non_terminating,
    )


def restrict_correct(trace):
    """H restricted to the correct processes, ticks preserved."""
    return replace(
        trace,
        events=tuple(ev for ev in trace.events if ev.process in trace.correct),
    )


@dataclass(frozen=True)
class Verdict:
    outcome: str  # "pass" | "fail"
    check: str
    witness: object = None  # linearization for pass verdicts
    violation: object = None  # certificate for fail verdicts

    @property
    def passed(self):
        return self.outcome == "pass"

    def describe(self):
        d = {"check": self.check, "outcome": self.outcome}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.violation is not None:
            d["violation"] = self.violation
        return d


# --------------------------------------------------------------------------
# Sequential specifications
# --------------------------------------------------------------------------


def check_sequential(seq, type_tag, v0=0):
    """Does the totally ordered sequence conform to the type's spec?

    ``seq`` is a list of Operation-like objects (process/op/arg/result).
    Returns a pass Verdict carrying the sequence, or a fail Verdict whose
    violation names the offending position.
    """
    if type_tag == "verifiable":
        ok, why = _seq_verifiable(seq, v0)
    elif type_tag == "authenticated":
        ok, why = _seq_authenticated(seq, v0)
    elif type_tag == "sticky":
        ok, why = _seq_sticky(seq)
    elif type_tag == "tos":
        ok, why = _seq_tos(seq)
    else:
        raise ValueError(f"unknown type tag {type_tag!r}")
    if ok:
        return Verdict("pass", "sequential", witness=[o.describe() for o in seq])
    return Verdict("fail", "sequential", violation=why)


def _bad(i, op, expect):
    return {
        "index": i,
        "op": op.describe(),
        "expected": _values.encode_value(expect),
    }


def _seq_verifiable(seq, v0):
    last = None
    written = set()
    signed = set()
    for i, o in enumerate(seq):
        if o.op == "write":
            last = o.arg
            written.add(o.arg)
        elif o.op == "read":
            expect = v0 if last is None else last
            if o.result != expect:
                return False, _bad(i, o, expect)
        elif o.op == "sign":
            expect = SUCCESS if o.arg in written else FAIL
            if o.result != expect:
                return False, _bad(i, o, expect)
            if expect == SUCCESS:
                signed.add(o.arg)
        elif o.op == "verify":
            expect = o.arg in signed
            if o.result != expect:
                return False, _bad(i, o, expect)
        else:
            return False, _bad(i, o, "verifiable op")
    return True, None


def _seq_authenticated(seq, v0):
    last = None
    written = {v0}
    for i, o in enumerate(seq):
        if o.op == "write":
            last = o.arg
            written.add(o.arg)
        elif o.op == "read":
            expect = v0 if last is None else last
            if o.result != expect:
                return False, _bad(i, o, expect)
        elif o.op == "verify":
            expect = o.arg in written
            if o.result != expect:
                return False, _bad(i, o, expect)
        else:
            return False, _bad(i, o, "authenticated op")
    return True, None


def _seq_sticky(seq):
    first = None
    for i, o in enumerate(seq):
        if o.op == "write":
            if first is None:
                first = o.arg
        elif o.op == "read":
            expect = BOTTOM if first is None else first
            if o.result != expect:
                return False, _bad(i, o, expect)
        else:
            return False, _bad(i, o, "sticky op")
    return True, None


def _seq_tos(seq):
    set_done = False
    for i, o in enumerate(seq):
        if o.op == "set":
            set_done = True
        elif o.op == "test":
            expect = 1 if set_done else 0
            if o.result != expect:
                return False, _bad(i, o, expect)
        else:
            return False, _bad(i, o, "test-or-set op")
    return True, None


# --------------------------------------------------------------------------
# Observation checks (real-time trace predicates over correct processes)
# --------------------------------------------------------------------------


def check_observations(trace):
    """Evaluate the type's validity/unforgeability/relay-style properties.

    All predicates range over complete operations of correct processes.
    Writer-dependent predicates are vacuously passing when the writer is
    Byzantine (there are no writer events to relate).
    """
    ops = [o for o in trace.operations(only_correct=True) if o.resp is not None]
    writer_correct = 1 in trace.correct
    tag = trace.type_tag
    checks = []
    if tag == "verifiable":
        grants = [(o.arg, o) for o in ops if o.op == "sign" and o.result == SUCCESS]
        checks.append(_obs_validity(ops, grants, "verify", writer_correct))
        checks.append(_obs_unforgeability(ops, grants, "verify", writer_correct, None))
        checks.append(_obs_relay(ops, "verify"))
    elif tag == "authenticated":
        grants = [(o.arg, o) for o in ops if o.op == "write"]
        checks.append(_obs_validity(ops, grants, "verify", writer_correct))
        checks.append(
            _obs_unforgeability(ops, grants, "verify", writer_correct, trace.v0)
        )
        checks.append(_obs_relay(ops, "verify"))
        checks.append(_obs_read_then_verify(ops))
    elif tag == "sticky":
        checks.append(_obs_sticky_validity(ops, writer_correct))
        checks.append(_obs_sticky_unforgeability(ops, writer_correct))
        checks.append(_obs_sticky_uniqueness(ops))
    elif tag == "tos":
        grants = [(None, o) for o in ops if o.op == "set"]
        checks.append(_obs_tos_validity(ops, grants, writer_correct))
        checks.append(_obs_tos_unforgeability(ops, grants, writer_correct))
        checks.append(_obs_tos_relay(ops))
    else:
        raise ValueError(f"unknown type tag {tag!r}")
    return checks


def _pair_violation(first, second):
    return {"first": first.describe(), "second": second.describe()}


def _obs_validity(ops, grants, verify_op, writer_correct):
    """A granted value verifies true ever after."""
    if not writer_correct:
        return Verdict("pass", "validity", witness="vacuous: writer not correct")
    for (v, g) in grants:
        for o in ops:
            if o.op == verify_op and o.arg == v and o.inv > g.resp and o.result is False:
                return Verdict("fail", "validity", violation=_pair_violation(g, o))
    return Verdict("pass", "validity")


def _obs_unforgeability(ops, grants, verify_op, writer_correct, v0):
    """A true verify needs a grant invoked before its response."""
    if not writer_correct:
        return Verdict("pass", "unforgeability", witness="vacuous: writer not correct")
    for o in ops:
        if o.op == verify_op and o.result is True:
            if v0 is not None and o.arg == v0:
                continue
            if not any(v == o.arg and g.inv < o.resp for (v, g) in grants):
                return Verdict(
                    "fail", "unforgeability", violation={"second": o.describe()}
                )
    return Verdict("pass", "unforgeability")


def _obs_relay(ops, verify_op):
    """True then subsequently-invoked false, same value, is forbidden."""
    for a in ops:
        if a.op == verify_op and a.result is True:
            for b in ops:
                if (
                    b.op == verify_op
                    and b.arg == a.arg
                    and b.result is False
                    and b.inv > a.resp
                ):
                    return Verdict("fail", "relay", violation=_pair_violation(a, b))
    return Verdict("pass", "relay")


def _obs_read_then_verify(ops):
    """A read value verifies true ever after (authenticated registers)."""
    for a in ops:
        if a.op == "read":
            for b in ops:
                if (
                    b.op == "verify"
                    and b.arg == a.result
                    and b.result is False
                    and b.inv > a.resp
                ):
                    return Verdict(
                        "fail", "read_implies_verify", violation=_pair_violation(a, b)
                    )
    return Verdict("pass", "read_implies_verify")


def _first_write(ops):
    writes = sorted((o for o in ops if o.op == "write"), key=lambda o: o.inv)
    return writes[0] if writes else None


def _obs_sticky_validity(ops, writer_correct):
    if not writer_correct:
        return Verdict("pass", "validity", witness="vacuous: writer not correct")
    w = _first_write(ops)
    if w is None:
        return Verdict("pass", "validity")
    for o in ops:
        if o.op == "read" and o.inv > w.resp and o.result != w.arg:
            return Verdict("fail", "validity", violation=_pair_violation(w, o))
    return Verdict("pass", "validity")


def _obs_sticky_unforgeability(ops, writer_correct):
    if not writer_correct:
        return Verdict("pass", "unforgeability", witness="vacuous: writer not correct")
    w = _first_write(ops)
    for o in ops:
        if o.op == "read" and o.result is not BOTTOM:
            if w is None or w.arg != o.result or w.inv >= o.resp:
                return Verdict(
                    "fail", "unforgeability", violation={"second": o.describe()}
                )
    return Verdict("pass", "unforgeability")


def _obs_sticky_uniqueness(ops):
    reads = [o for o in ops if o.op == "read"]
    solid = [o for o in reads if o.result is not BOTTOM]
    for a in solid:
        for b in solid:
            if a.result != b.result:
                return Verdict("fail", "uniqueness", violation=_pair_violation(a, b))
    for a in solid:
        for b in reads:
            if b.inv > a.resp and b.result != a.result:
                return Verdict("fail", "uniqueness", violation=_pair_violation(a, b))
    return Verdict("pass", "uniqueness")


def _obs_tos_validity(ops, grants, setter_correct):
    if not setter_correct:
        return Verdict("pass", "validity", witness="vacuous: setter not correct")
    for (_v, g) in grants:
        for o in ops:
            if o.op == "test" and o.inv > g.resp and o.result == 0:
                return Verdict("fail", "validity", violation=_pair_violation(g, o))
    return Verdict("pass", "validity")


def _obs_tos_unforgeability(ops, grants, setter_correct):
    if not setter_correct:
        return Verdict("pass", "unforgeability", witness="vacuous: setter not correct")
    for o in ops:
        if o.op == "test" and o.result == 1:
            if not any(g.inv < o.resp for (_v, g) in grants):
                return Verdict(
                    "fail", "unforgeability", violation={"second": o.describe()}
                )
    return Verdict("pass", "unforgeability")


def _obs_tos_relay(ops):
    for a in ops:
        if a.op == "test" and a.result == 1:
            for b in ops:
                if b.op == "test" and b.inv > a.resp and b.result == 0:
                    return Verdict("fail", "relay", violation=_pair_violation(a, b))
    return Verdict("pass", "relay")


# --------------------------------------------------------------------------
# Constructive Byzantine linearization
# --------------------------------------------------------------------------

_HALF = Fraction(1, 2)


def _fresh_point(lo, hi, used):
    """Unused rational point in the open interval (lo, hi), else None.

    ``hi`` may be INF.  Picks the midpoint of the widest free gap so later
    placements keep room.
    """
    if hi == INF:
        base = max([p for p in used if p > lo], default=lo)
        return max(lo, base) + 1
    if lo >= hi:
        return None
    inside = sorted(p for p in used if lo < p < hi)
    pts = [lo] + inside + [hi]
    widest = max(range(len(pts) - 1), key=lambda i: pts[i + 1] - pts[i])
    if pts[widest + 1] <= pts[widest]:
        return None
    return (pts[widest] + pts[widest + 1]) / 2


def _gap_point_before(target, used, floor=None):
    """Point in the empty gap immediately before ``target``.

    ``floor`` optionally forces the point strictly above a tick.  Returns
    None when the gap is squeezed shut, which is itself a certificate.
    """
    prev = max([p for p in used if p < target], default=Fraction(target) - 1)
    lo = prev
    if floor is not None and Fraction(floor) > lo:
        lo = Fraction(floor)
    if lo >= target:
        return None
    return (lo + Fraction(target)) / 2


def _window(ops, value, refute_op, refute_result, accept_op, accept_result):
    """(t0, t1): last refuting invocation, first accepting response."""
    t0 = 0
    t1 = INF
    for o in ops:
        if o.op == refute_op and o.result == refute_result and (
            value is None or o.arg == value
        ):
            t0 = max(t0, o.inv)
        if o.op == accept_op and o.result == accept_result and (
            value is None or o.arg == value
        ):
            t1 = min(t1, o.resp)
    return t0, t1


def _synth(op, arg, result, point):
    frac = Fraction(point)
    return Operation(1, op, arg, result, frac, frac), frac


def byz_linearize_constructive(trace):
    """Build the appendix witness history and validate it.

    Correct writer: order by recorded linearization points (raises
    MissingAnnotations if the trace is uninstrumented).  Faulty writer:
    restrict to correct processes, synthesize the writer operations inside
    the derived windows, and order by the defined points.  Fails with an
    empty-window certificate when no placement exists.
    """
    tag = trace.type_tag
    if tag not in TYPE_TAGS:
        raise ValueError(f"unknown type tag {tag!r}")
    ops = [o for o in trace.operations(only_correct=True) if o.resp is not None]
    writer_correct = 1 in trace.correct
    if writer_correct:
        pointed = _points_correct_writer(ops, tag)
    else:
        pointed = _points_faulty_writer(ops, tag)
    if isinstance(pointed, Verdict):
        return pointed
    seq = [o for (_p, o) in sorted(pointed, key=lambda po: po[0])]
    verdict = check_sequential(seq, tag, trace.v0)
    return replace(verdict, check="constructive")


def _points_correct_writer(ops, tag):
    pointed = []
    if tag in ("sticky", "tos"):
        return _points_correct_writer_windowed(ops, tag)
    for o in ops:
        if tag == "verifiable":
            if o.op in ("write", "read") or (o.op == "sign" and o.result == SUCCESS):
                if o.lin is None:
                    raise MissingAnnotations(f"operation lacks lin point: {o}")
                pointed.append((Fraction(o.lin), o))
            elif o.op == "sign":
                pointed.append((Fraction(o.resp), o))
            elif o.op == "verify":
                pointed.append((Fraction(o.resp if o.result else o.inv), o))
            else:
                raise ValueError(f"op {o.op!r} in verifiable trace")
        else:  # authenticated
            if o.op in ("write", "read"):
                if o.lin is None:
                    raise MissingAnnotations(f"operation lacks lin point: {o}")
                pointed.append((Fraction(o.lin), o))
            elif o.op == "verify":
                pointed.append((Fraction(o.resp if o.result else o.inv), o))
            else:
                raise ValueError(f"op {o.op!r} in authenticated trace")
    return pointed


def _points_correct_writer_windowed(ops, tag):
    """Sticky registers and test-or-set: the grant linearizes inside the
    window between the last refuting invocation and the first accepting
    response, intersected with its own interval."""
    grant_op = "write" if tag == "sticky" else "set"
    t0 = 0
    t1 = INF
    pointed = []
    used = set()
    grants = []
    for o in ops:
        if o.op == grant_op:
            grants.append(o)
            continue
        if tag == "sticky":
            accepting = o.result is not BOTTOM
        else:
            accepting = o.result == 1
        p = Fraction(o.resp if accepting else o.inv)
        if accepting:
            t1 = min(t1, o.resp)
        else:
            t0 = max(t0, o.inv)
        pointed.append((p, o))
        used.add(p)
    grants.sort(key=lambda o: o.inv)
    for idx, g in enumerate(grants):
        if idx == 0:
            # point inside [inv, resp] and strictly inside (t0, t1)
            lo = Fraction(g.inv)
            if lo <= Fraction(t0):
                lo = Fraction(t0) + _HALF
            hi = Fraction(g.resp)
            if t1 != INF and hi >= Fraction(t1):
                hi = Fraction(t1) - _HALF
            if lo > hi:
                return Verdict(
                    "fail",
                    "constructive",
                    violation={
                        "certificate": "empty-window",
                        "grant": g.describe(),
                        "t0": t0,
                        "t1": None if t1 == INF else t1,
                    },
                )
            p = lo if lo not in used else _fresh_point(lo, hi, used)
            if p is None:
                return Verdict(
                    "fail",
                    "constructive",
                    violation={
                        "certificate": "empty-window",
                        "grant": g.describe(),
                        "t0": t0,
                        "t1": None if t1 == INF else t1,
                    },
                )
        else:
            p = Fraction(g.resp)
        pointed.append((p, g))
        used.add(p)
    return pointed


def _points_faulty_writer(ops, tag):
    for o in ops:
        if o.process == 1:
            raise ValueError("faulty-writer construction got writer operations")
    if tag == "verifiable":
        return _faulty_verifiable(ops)
    if tag == "authenticated":
        return _faulty_authenticated(ops)
    if tag == "sticky":
        return _faulty_sticky(ops)
    return _faulty_tos(ops)


def _empty_window_fail(value, t0, t1):
    return Verdict(
        "fail",
        "constructive",
        violation={
            "certificate": "empty-window",
            "value": _values.encode_value(value),
            "t0": t0,
            "t1": None if t1 == INF else t1,
        },
    )


def _faulty_verifiable(ops):
    pointed = []
    used = set()
    for o in ops:
        if o.op == "read":
            p = Fraction(o.inv)
        elif o.op == "verify":
            p = Fraction(o.resp if o.result else o.inv)
        else:
            raise ValueError(f"unexpected correct-process op {o.op!r}")
        pointed.append((p, o))
        used.add(p)
    # one sign per value some verify accepted, placed inside its window
    signs = []
    for v in sorted({o.arg for o in ops if o.op == "verify" and o.result is True}):
        t0, t1 = _window(ops, v, "verify", False, "verify", True)
        if t1 <= t0:
            return _empty_window_fail(v, t0, t1)
        p = _fresh_point(Fraction(t0), Fraction(t1), used)
        if p is None:
            return _empty_window_fail(v, t0, t1)
        op, p = _synth("sign", v, SUCCESS, p)
        pointed.append((p, op))
        used.add(p)
        signs.append((p, v))
    # a write immediately before every sign and every read
    targets = sorted(
        [(p, v) for (p, v) in signs]
        + [(Fraction(o.inv), o.result) for o in ops if o.op == "read"]
    )
    for (target, v) in targets:
        p = _gap_point_before(target, used)
        if p is None:
            return Verdict(
                "fail",
                "constructive",
                violation={"certificate": "no-room-before", "target": float(target)},
            )
        op, p = _synth("write", v, DONE, p)
        pointed.append((p, op))
        used.add(p)
    return pointed


def _faulty_authenticated(ops):
    pointed = []
    used = set()
    for o in ops:
        if o.op == "read":
            p = Fraction(o.resp)
        elif o.op == "verify":
            p = Fraction(o.resp if o.result else o.inv)
        else:
            raise ValueError(f"unexpected correct-process op {o.op!r}")
        pointed.append((p, o))
        used.add(p)
    for v in sorted({o.arg for o in ops if o.op == "verify" and o.result is True}):
        t0, t1 = _window(ops, v, "verify", False, "verify", True)
        if t1 <= t0:
            return _empty_window_fail(v, t0, t1)
        p = _fresh_point(Fraction(t0), Fraction(t1), used)
        if p is None:
            return _empty_window_fail(v, t0, t1)
        op, p = _synth("write", v, DONE, p)
        pointed.append((p, op))
        used.add(p)
    for o in sorted((o for o in ops if o.op == "read"), key=lambda o: o.resp):
        v = o.result
        t0, _t1 = _window(ops, v, "verify", False, "verify", True)
        p = _gap_point_before(Fraction(o.resp), used, floor=t0)
        if p is None:
            return Verdict(
                "fail",
                "constructive",
                violation={
                    "certificate": "read-window-empty",
                    "read": o.describe(),
                    "t0": t0,
                },
            )
        op2, p = _synth("write", v, DONE, p)
        pointed.append((p, op2))
        used.add(p)
    return pointed


def _faulty_sticky(ops):
    pointed = []
    used = set()
    solid_values = set()
    for o in ops:
        if o.op != "read":
            raise ValueError(f"unexpected correct-process op {o.op!r}")
        accepting = o.result is not BOTTOM
        if accepting:
            solid_values.add(o.result)
        p = Fraction(o.resp if accepting else o.inv)
        pointed.append((p, o))
        used.add(p)
    if len(solid_values) > 1:
        a, b = sorted(solid_values, key=repr)[:2]
        return Verdict(
            "fail",
            "constructive",
            violation={
                "certificate": "uniqueness",
                "values": [_values.encode_value(a), _values.encode_value(b)],
            },
        )
    if solid_values:
        v = next(iter(solid_values))
        t0 = max(
            (o.inv for o in ops if o.op == "read" and o.result is BOTTOM), default=0
        )
        t1 = min(
            (o.resp for o in ops if o.op == "read" and o.result is not BOTTOM),
            default=INF,
        )
        if t1 <= t0:
            return _empty_window_fail(v, t0, t1)
        p = _fresh_point(Fraction(t0), Fraction(t1), used)
        if p is None:
            return _empty_window_fail(v, t0, t1)
        op, p = _synth("write", v, DONE, p)
        pointed.append((p, op))
    return pointed


def _faulty_tos(ops):
    pointed = []
    used = set()
    any_one = False
    for o in ops:
        if o.op != "test":
            raise ValueError(f"unexpected correct-process op {o.op!r}")
        accepting = o.result == 1
        any_one = any_one or accepting
        p = Fraction(o.resp if accepting else o.inv)
        pointed.append((p, o))
        used.add(p)
    if any_one:
        t0, t1 = _window(ops, None, "test", 0, "test", 1)
        if t1 <= t0:
            return _empty_window_fail(1, t0, t1)
        p = _fresh_point(Fraction(t0), Fraction(t1), used)
        if p is None:
            return _empty_window_fail(1, t0, t1)
        op, p = _synth("set", None, DONE, p)
        pointed.append((p, op))
    return pointed


# --------------------------------------------------------------------------
# Brute-force Byzantine linearization
# --------------------------------------------------------------------------

_BRUTE_OP_BOUND = 10


def byz_linearize_bruteforce(trace, max_synth=None):
    """Exhaustive oracle: interleavings + bounded synthesized writer ops.

    Independent of the constructive route: uses only invocation/response
    ticks, never the recorded linearization points.  Raises
    SearchBoundExceeded above the operation bound instead of guessing.
    """
    tag = trace.type_tag
    all_ops = trace.operations(only_correct=True)
    if len(all_ops) > _BRUTE_OP_BOUND:
        raise SearchBoundExceeded(
            f"{len(all_ops)} correct operations exceed bound {_BRUTE_OP_BOUND}"
        )
    writer_correct = 1 in trace.correct
    closed = [o for o in all_ops if o.resp is not None]
    open_ops = [o for o in all_ops if o.resp is None]
    candidates = trace.mentioned_values()
    if trace.v0 is not BOTTOM:
        candidates.add(trace.v0)
    candidates = sorted(candidates, key=repr)

    synth_pool = []
    if not writer_correct:
        if tag == "verifiable":
            for v in candidates:
                synth_pool.append(("write", v, DONE))
                synth_pool.append(("sign", v, SUCCESS))
        elif tag == "authenticated":
            for v in candidates:
                synth_pool.append(("write", v, DONE))
        elif tag == "sticky":
            for v in candidates:
                synth_pool.append(("write", v, DONE))
        elif tag == "tos":
            synth_pool.append(("set", None, DONE))
        if max_synth is None:
            max_synth = 2 * len(all_ops) + 2

    for completion in _completions(open_ops, tag, candidates, trace.v0):
        ops = closed + completion
        seq = _search(ops, tag, trace.v0, synth_pool, max_synth or 0)
        if seq is not None:
            return Verdict(
                "pass", "bruteforce", witness=[o.describe() for o in seq]
            )
    return Verdict(
        "fail",
        "bruteforce",
        violation={"certificate": "search-exhausted", "operations": len(all_ops)},
    )


def _completions(open_ops, tag, candidates, v0):
    """All ways to complete or drop the open operations."""
    if not open_ops:
        yield []
        return
    first, rest = open_ops[0], open_ops[1:]
    results = {
        "write": [DONE],
        "set": [DONE],
        "sign": [SUCCESS, FAIL],
        "verify": [True, False],
        "test": [1, 0],
        "read": (
            list(candidates) + [BOTTOM]
            if tag == "sticky"
            else list(candidates) + ([v0] if v0 not in candidates else [])
        ),
    }[first.op]
    for tail in _completions(rest, tag, candidates, v0):
        yield tail  # remove the open op
        for r in results:
            yield [replace(first, result=r, resp=None)] + tail


def _spec_init(tag):
    if tag == "verifiable":
        return (None, frozenset(), frozenset())
    if tag == "authenticated":
        return (None, frozenset())
    if tag == "sticky":
        return (None,)
    return (False,)


def _spec_step(tag, state, op, arg, result, v0):
    """Apply one operation; None if the result contradicts the state."""
    if tag == "verifiable":
        last, written, signed = state
        if op == "write":
            return (arg, written | {arg}, signed)
        if op == "read":
            return state if result == (v0 if last is None else last) else None
        if op == "sign":
            ok = arg in written
            if result != (SUCCESS if ok else FAIL):
                return None
            return (last, written, signed | {arg}) if ok else state
        if op == "verify":
            return state if result == (arg in signed) else None
    elif tag == "authenticated":
        last, written = state
        if op == "write":
            return (arg, written | {arg})
        if op == "read":
            expect = v0 if last is None else last
            return state if result == expect else None
        if op == "verify":
            return state if result == (arg in written or arg == v0) else None
    elif tag == "sticky":
        (first,) = state
        if op == "write":
            return (arg,) if first is None else state
        if op == "read":
            expect = BOTTOM if first is None else first
            return state if result == expect else None
    else:
        (set_done,) = state
        if op == "set":
            return (True,)
        if op == "test":
            return state if result == (1 if set_done else 0) else None
    return None


def _search(ops, tag, v0, synth_pool, max_synth):
    """DFS with memoization over (emitted set, spec state, synth budget)."""
    n = len(ops)
    preds = []
    for i, a in enumerate(ops):
        mask = 0
        for j, b in enumerate(ops):
            if b.resp is not None and b.resp < a.inv:
                mask |= 1 << j
        preds.append(mask)

    init = _spec_init(tag)
    seen = set()
    full = (1 << n) - 1

    def dfs(emitted, state, budget, path):
        if emitted == full:
            return path
        key = (emitted, state, budget)
        if key in seen:
            return None
        for i in range(n):
            bit = 1 << i
            if emitted & bit or (preds[i] & ~emitted):
                continue
            o = ops[i]
            nxt = _spec_step(tag, state, o.op, o.arg, o.result, v0)
            if nxt is not None:
                res = dfs(emitted | bit, nxt, budget, path + [o])
                if res is not None:
                    return res
        if budget > 0:
            for (op, arg, result) in synth_pool:
                nxt = _spec_step(tag, state, op, arg, result, v0)
                if nxt is not None and nxt != state:
                    fake = Operation(1, op, arg, result, -1, -1)
                    res = dfs(emitted, nxt, budget - 1, path + [fake])
                    if res is not None:
                        return res
        seen.add(key)
        return None

    return dfs(0, init, max_synth, [])


# --------------------------------------------------------------------------
# JSONL trace format
# --------------------------------------------------------------------------


def _dump_line(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def trace_to_jsonl(trace):
    """One JSON object per line; the first line is the trace metadata."""
    lines = [
        _dump_line(
            {
                "kind": "meta",
                "version": 1,
                "type": trace.type_tag,
                "n": trace.n,
                "f": trace.f,
                "correct": sorted(trace.correct),
                "v0": _values.encode_value(trace.v0),
                "seed": trace.seed,
                "non_terminating": trace.non_terminating,
            }
        )
    ]
    for ev in trace.events:
        obj = {
            "tick": ev.tick,
            "process": ev.process,
            "kind": ev.kind,
            "op": ev.op,
            "arg": _values.encode_value(ev.arg),
            "result": _values.encode_value(ev.result),
        }
        if ev.lin is not None:
            obj["lin"] = ev.lin
        lines.append(_dump_line(obj))
    return "\n".join(lines) + "\n"


def trace_from_jsonl(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty trace file")
    meta = json.loads(lines[0])
    if meta.get("kind") != "meta":
        raise ValueError("trace file does not start with a meta line")
    events = []
    for ln in lines[1:]:
        obj = json.loads(ln)
        events.append(
            Event(
                tick=obj["tick"],
                process=obj["process"],
                kind=obj["kind"],
                op=obj["op"],
                arg=_values.decode_value(obj.get("arg")),
                result=_values.decode_value(obj.get("result")),
                lin=obj.get("lin"),
            )
        )
    return HistoryTrace(
        events=tuple(events),
        correct=frozenset(meta["correct"]),
        type_tag=meta["type"],
        n=meta["n"],
        f=meta["f"],
        v0=_values.decode_value(meta["v0"]),
        seed=meta.get("seed", 0),
        non_terminating=meta.get("non_terminating", False),
    )
