"""Scriptable Byzantine behaviors, constrained only by register ownership.

A script optionally mimics the correct protocol until a tick (crash-style
faults, or the reset-after-acting constructions) and then executes a list
of tick-triggered directives.  Directives may only write registers owned by
the scripted process; violations are rejected when the script is loaded,
not at run time.
"""

from byzreg.engine import impl as _impl

AdversaryScript = _impl.AdversaryScript
WriteOwn = _impl.WriteOwn
ResetOwn = _impl.ResetOwn
Replay = _impl.Replay
StaleFlood = _impl.StaleFlood

BOTTOM = _impl.BOTTOM


def silent():
    """Never take a step."""
    return AdversaryScript()


def crash_at(tick):
    """Run the protocol faithfully, then stop forever at the given tick."""
    return AdversaryScript(mimic_until=tick)


def reset_at(tick, mimic=True):
    """Run the protocol until the tick, then wipe own registers to initial."""
    return AdversaryScript(
        mimic_until=tick if mimic else 0,
        directives=(ResetOwn(at=tick),),
    )


def write_own(*writes):
    """Raw tick-triggered own-register writes: (cell, value, tick) triples."""
    return AdversaryScript(
        directives=tuple(WriteOwn(cell=c, value=v, at=t) for (c, v, t) in writes)
    )


def lying_witness(pid, readers, payload, counter, at=1):
    """Fabricate (payload, counter) replies into every own per-reader cell.

    The fabricated counter can exceed any verifier round, which makes this
    process the first fresh replier in every scan: the strongest lie
    ownership allows.
    """
    writes = tuple(
        WriteOwn(cell=f"Rr[{pid},{k}]", value=(payload, counter), at=at + i)
        for i, k in enumerate(sorted(readers))
    )
    return AdversaryScript(directives=writes)


def stale_responder():
    """Respond to every asker with a counter below its current round."""
    return AdversaryScript(directives=(StaleFlood(),))


def replay_from_log(step_log, pids, until=None):
    """Build per-process Replay scripts from a recorded run's own writes."""
    per_pid = {pid: [] for pid in pids}
    for (tick, kind, cell, pid, value) in step_log:
        if kind == "w" and pid in per_pid and (until is None or tick <= until):
            per_pid[pid].append((tick, cell, value))
    return {
        pid: AdversaryScript(directives=(Replay(writes=tuple(ws)),))
        for pid, ws in per_pid.items()
    }
