"""Adversary preset library and seeded workload generation for sweeps.

A preset names a Byzantine coalition and its behavior for a given system
size; the workload generator then produces a small operation mix that only
targets correct processes.  Everything is a pure function of its arguments,
so sweeps are reproducible seed by seed.
"""

from __future__ import annotations

import random

from byzreg import adversary as adv
from byzreg import runtime

Request = runtime.Request

BIG_COUNTER = 10**9
_VALS = (1, 2, 3)


def _helper_pids(n, f):
    """The last f processes: always readers, never the writer."""
    return list(range(n - f + 1, n + 1))


def _writer_coalition(n, f):
    """The writer plus enough trailing helpers to fill the fault budget."""
    return [1] + _helper_pids(n, f - 1) if f > 1 else [1]


def _lying_script(register_type, pid, n):
    readers = range(2, n + 1)
    if register_type == "sticky":
        payload = 1
        fake_witness = [
            adv.WriteOwn(cell=f"E[{pid}]", value=1, at=3),
            adv.WriteOwn(cell=f"R[{pid}]", value=1, at=4),
        ]
    else:
        payload = frozenset(_VALS)
        fake_witness = [adv.WriteOwn(cell=f"R[{pid}]", value=payload, at=4)]
    writes = fake_witness + [
        adv.WriteOwn(cell=f"Rr[{pid},{k}]", value=(payload, BIG_COUNTER), at=5 + i)
        for i, k in enumerate(readers)
    ]
    return adv.AdversaryScript(directives=tuple(writes))


def _equivocating_writer_script(register_type):
    if register_type == "verifiable" or register_type == "verifiable_flawed":
        ds = (
            adv.WriteOwn(cell="Rstar", value=5, at=10),
            adv.WriteOwn(cell="R[1]", value=frozenset({7}), at=20),
            adv.WriteOwn(cell="Rstar", value=6, at=40),
            adv.WriteOwn(cell="R[1]", value=frozenset(), at=320),
        )
    elif register_type == "authenticated":
        ds = (
            adv.WriteOwn(cell="R[1]", value=frozenset({(1, 5)}), at=10),
            adv.WriteOwn(cell="R[1]", value=frozenset({(1, 6)}), at=40),
            adv.WriteOwn(cell="R[1]", value="junk", at=160),
            adv.WriteOwn(cell="R[1]", value=frozenset({(0, 0), (2, 9)}), at=320),
        )
    else:  # sticky
        ds = (
            adv.WriteOwn(cell="E[1]", value=5, at=10),
            adv.WriteOwn(cell="E[1]", value=6, at=30),
            adv.WriteOwn(cell="R[1]", value=6, at=50),
            adv.WriteOwn(cell="E[1]", value=5, at=320),
        )
    return adv.AdversaryScript(directives=ds)


def build_preset(name, register_type, n, f):
    """Return (byzantine pids, scripts) for one library preset."""
    if name == "none":
        return [], {}
    if name == "silent_helper":
        pids = _helper_pids(n, f)
        return pids, {p: adv.silent() for p in pids}
    if name == "crash_helper":
        pids = _helper_pids(n, f)
        return pids, {p: adv.crash_at(150) for p in pids}
    if name == "stale_helper":
        pids = _helper_pids(n, f)
        return pids, {p: adv.stale_responder() for p in pids}
    if name == "lying_helper":
        pids = _helper_pids(n, f)
        return pids, {p: _lying_script(register_type, p, n) for p in pids}
    if name == "silent_writer":
        pids = _writer_coalition(n, f)
        return pids, {p: adv.silent() for p in pids}
    if name == "equivocating_writer":
        pids = _writer_coalition(n, f)
        scripts = {p: adv.silent() for p in pids}
        scripts[1] = _equivocating_writer_script(register_type)
        return pids, scripts
    if name == "reset_writer":
        pids = _writer_coalition(n, f)
        scripts = {p: adv.silent() for p in pids}
        scripts[1] = adv.reset_at(400)
        return pids, scripts
    raise runtime.ConfigError(f"unknown adversary preset {name!r}")


REGISTER_PRESETS = (
    "none",
    "silent_helper",
    "crash_helper",
    "stale_helper",
    "lying_helper",
    "silent_writer",
    "equivocating_writer",
    "reset_writer",
)

TOS_PRESETS = ("none", "silent_helper", "crash_helper", "stale_helper", "silent_writer")


def gen_workload(register_type, n, f, correct, seed, max_ops=12):
    """Seeded operation mix targeting only correct processes."""
    rng = random.Random((seed * 0x9E3779B1 + 0x5DEE) & 0xFFFFFFFF)
    readers = [p for p in range(2, n + 1) if p in correct]
    writer_ok = 1 in correct
    reqs = []

    if register_type in ("verifiable", "verifiable_flawed"):
        if writer_ok:
            written = []
            for _ in range(rng.randint(1, 3)):
                v = rng.choice(_VALS)
                written.append(v)
                reqs.append(Request(1, "write", v, rng.randint(1, 120)))
            for _ in range(rng.randint(1, 2)):
                v = rng.choice(written + [9])  # 9 was never written: Sign fails
                reqs.append(Request(1, "sign", v, rng.randint(100, 240)))
        for _ in range(rng.randint(2, 4)):
            k = rng.choice(readers)
            v = rng.choice(_VALS + (9,))
            reqs.append(Request(k, "verify", v, rng.randint(1, 500)))
        for _ in range(rng.randint(1, 2)):
            reqs.append(Request(rng.choice(readers), "read", None, rng.randint(1, 500)))
    elif register_type == "authenticated":
        if writer_ok:
            for _ in range(rng.randint(1, 3)):
                reqs.append(Request(1, "write", rng.choice(_VALS), rng.randint(1, 120)))
        for _ in range(rng.randint(2, 4)):
            k = rng.choice(readers)
            v = rng.choice(_VALS + (0, 9))
            reqs.append(Request(k, "verify", v, rng.randint(1, 500)))
        for _ in range(rng.randint(1, 2)):
            reqs.append(Request(rng.choice(readers), "read", None, rng.randint(1, 500)))
    elif register_type == "sticky":
        if writer_ok:
            for _ in range(rng.randint(1, 2)):
                reqs.append(Request(1, "write", rng.choice(_VALS), rng.randint(1, 150)))
        for _ in range(rng.randint(2, 4)):
            reqs.append(Request(rng.choice(readers), "read", None, rng.randint(1, 500)))
    elif register_type.startswith("tos") or register_type == "naive_quorum":
        if writer_ok:
            reqs.append(Request(1, "set", None, rng.randint(1, 100)))
        for k in rng.sample(readers, min(len(readers), 3)):
            reqs.append(Request(k, "test", None, rng.randint(1, 250)))
    else:
        raise runtime.ConfigError(f"unknown register type {register_type!r}")

    # keep each process's queue ordered by earliest-invoke tick, trim to cap
    reqs.sort(key=lambda r: (r.at, r.process, r.op))
    reqs = reqs[:max_ops]
    per_proc = {}
    for r in reqs:
        per_proc.setdefault(r.process, []).append(r)
    flat = []
    for p in sorted(per_proc):
        flat.extend(per_proc[p])
    return flat


def late_verify_wave(register_type, n, correct, seed, base=600):
    """A second wave of reader checks, after writer-reset style adversaries."""
    rng = random.Random((seed * 0x85EBCA6B + 0x1B) & 0xFFFFFFFF)
    readers = [p for p in range(2, n + 1) if p in correct]
    if register_type in ("verifiable", "verifiable_flawed", "authenticated"):
        return [
            Request(rng.choice(readers), "verify", rng.choice(_VALS), base + 10 * i)
            for i in range(2)
        ]
    if register_type == "sticky":
        return [
            Request(rng.choice(readers), "read", None, base + 10 * i) for i in range(2)
        ]
    return []
