# cython: language_level=3
"""Simulation core: atomic register cells, step machines, scheduler, protocols.

This module is the hot path of the whole package.  It is plain Python, but it
is written so that Cython can compile it unchanged (see setup.py); the
package prefers the compiled twin ``byzreg._engine_opt`` when it is present.

Everything in here is deterministic: the only source of randomness is the
``random.Random`` instance seeded from the system config, and it is consumed
exclusively by the scheduler's per-window shuffle.  All set iteration happens
in sorted order.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass


class _Bottom:
    """Distinguished non-domain sentinel, distinct from every scalar."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOT"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()

DONE = "done"
SUCCESS = "success"
FAIL = "fail"


class ConfigError(ValueError):
    """Invalid system or scenario configuration."""


class AccessViolation(RuntimeError):
    """A process touched a register port it does not own / cannot read."""


def as_witness_set(value):
    """Coerce arbitrary register content to a frozenset of scalars.

    Byzantine owners may store junk in their own registers; a correct
    process scanning them treats anything that is not a set as the empty
    set and keeps only integer members.
    """
    if isinstance(value, frozenset):
        if all(isinstance(x, int) for x in value):
            return value
        return frozenset(x for x in value if isinstance(x, int))
    if isinstance(value, (set, list)):
        return frozenset(x for x in value if isinstance(x, int))
    return frozenset()


def as_reply_pair(value, init_payload):
    """Coerce R_jk content to a (payload, counter) pair; junk is stale."""
    if (
        isinstance(value, tuple)
        and len(value) == 2
        and isinstance(value[1], int)
    ):
        return value
    return (init_payload, 0)


def as_counter(value):
    if isinstance(value, int):
        return value
    return 0


def as_scalar_or_bottom(value):
    if isinstance(value, int):
        return value
    return BOTTOM


def as_pair_set(value):
    """Return the content as a frozenset of (timestamp, scalar) pairs, or None.

    ``None`` means the content is malformed, which is possible only when the
    owner is Byzantine.
    """
    if not isinstance(value, frozenset):
        return None
    for item in value:
        if not (
            isinstance(item, tuple)
            and len(item) == 2
            and isinstance(item[0], int)
            and isinstance(item[1], int)
        ):
            return None
    return value


def pair_set_values(value):
    """Project whatever pairs are present to their scalars (liberal parse)."""
    if not isinstance(value, frozenset):
        return frozenset()
    out = set()
    for item in value:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], int):
            out.add(item[1])
    return frozenset(out)


@dataclass(frozen=True)
class SystemConfig:
    n: int
    f: int
    correct: frozenset
    seed: int = 0
    fairness_window: int = 0  # 0 means the default of 8 * n
    step_budget: int = 500_000

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"need at least 2 processes, got n={self.n}")
        if not (1 <= self.f < self.n):
            raise ConfigError(f"fault budget must satisfy 1 <= f < n, got f={self.f}, n={self.n}")
        correct = frozenset(self.correct)
        if not correct:
            raise ConfigError("correct set is empty")
        if not correct <= frozenset(range(1, self.n + 1)):
            raise ConfigError(f"correct set {sorted(correct)} not within 1..{self.n}")
        if len(correct) < self.n - self.f:
            raise ConfigError(
                f"|correct|={len(correct)} below n-f={self.n - self.f}"
            )
        object.__setattr__(self, "correct", correct)
        if self.fairness_window == 0:
            object.__setattr__(self, "fairness_window", 8 * self.n)
        if self.fairness_window < self.n:
            raise ConfigError("fairness window must be at least n ticks")
        if self.step_budget <= 0:
            raise ConfigError("step budget must be positive")

    @property
    def byzantine(self):
        return frozenset(range(1, self.n + 1)) - self.correct


class RegisterCell:
    """One atomic SWMR/SWSR register."""

    __slots__ = ("name", "owner", "readers", "value", "init")

    def __init__(self, name, owner, readers, init):
        self.name = name
        self.owner = owner
        self.readers = readers
        self.value = init
        self.init = init

    def __repr__(self):
        return f"<{self.name} owner={self.owner} value={self.value!r}>"


@dataclass(frozen=True)
class Event:
    tick: int
    process: int
    kind: str  # "invoke" | "respond"
    op: str
    arg: object = None
    result: object = None
    lin: object = None  # internal linearization-point tick, respond events only


@dataclass(frozen=True)
class Request:
    process: int
    op: str
    arg: object = None
    at: int = 0  # earliest invoke tick


class System:
    """Deterministic shared-memory substrate with a global event clock.

    One tick per atomic step: a shared-register access, an operation
    invocation, an operation response, or an idle slot.  Local computation
    is free.
    """

    def __init__(self, config):
        self.config = config
        self.rng = random.Random(config.seed)
        self.tick = 0
        self.cells = []
        self.cells_by_name = {}
        self.events = []
        self.step_log = []  # (tick, "r"/"w", cell name, process, value)

    def alloc(self, name, owner, readers, init):
        if not (1 <= owner <= self.config.n):
            raise ConfigError(f"bad owner {owner}")
        readers = frozenset(readers)
        if not readers <= frozenset(range(1, self.config.n + 1)):
            raise ConfigError(f"bad reader set for {name}")
        if name in self.cells_by_name:
            raise ConfigError(f"duplicate register {name}")
        cell = RegisterCell(name, owner, readers, init)
        self.cells.append(cell)
        self.cells_by_name[name] = cell
        return cell

    def read(self, cell, reader):
        if reader not in cell.readers:
            raise AccessViolation(f"p{reader} cannot read {cell.name}")
        self.tick += 1
        self.step_log.append((self.tick, "r", cell.name, reader, cell.value))
        return cell.value

    def write(self, cell, writer, value):
        if writer != cell.owner:
            raise AccessViolation(f"p{writer} does not own {cell.name}")
        self.tick += 1
        cell.value = value
        self.step_log.append((self.tick, "w", cell.name, writer, value))

    def record_event(self, process, kind, op, arg=None, result=None, lin=None):
        self.tick += 1
        ev = Event(self.tick, process, kind, op, arg, result, lin)
        self.events.append(ev)
        return ev

    def idle(self):
        self.tick += 1

    def dump(self):
        return {c.name: c.value for c in self.cells}


# --------------------------------------------------------------------------
# Step machines
# --------------------------------------------------------------------------
#
# Protocol procedures are generators that yield exactly one shared access per
# scheduler slot:
#     value = yield ("r", cell)            read
#     value = yield ("r", cell, "lin")     read, marks the op's lin point
#             yield ("w", cell, value)     write
#             yield ("w", cell, value, "lin")
#             yield ("spin",)              burn one tick (pathological loops)
# Returning from the generator produces the operation response.


class OpMachine:
    """Drives one process's operation thread."""

    def __init__(self, pid, ops):
        self.pid = pid
        self.ops = ops  # op name -> generator factory
        self.queue = deque()
        self.gen = None
        self.inbox = None
        self.current = None  # active Request
        self.lin_tick = None

    def submit(self, request):
        self.queue.append(request)

    def enabled(self, tick):
        return self.gen is not None or (
            bool(self.queue) and self.queue[0].at <= tick
        )

    def busy(self):
        return self.gen is not None or bool(self.queue)

    def step(self, system):
        if self.gen is None:
            req = self.queue.popleft()
            system.record_event(self.pid, "invoke", req.op, req.arg)
            self.current = req
            self.inbox = None
            self.lin_tick = None
            self.gen = self.ops[req.op](req.arg)
            return
        try:
            action = self.gen.send(self.inbox)
        except StopIteration as stop:
            system.record_event(
                self.pid,
                "respond",
                self.current.op,
                self.current.arg,
                result=stop.value,
                lin=self.lin_tick,
            )
            self.gen = None
            self.current = None
            return
        self.inbox = self._perform(system, action)

    def _perform(self, system, action):
        kind = action[0]
        if kind == "r":
            value = system.read(action[1], self.pid)
            if len(action) > 2:
                self.lin_tick = system.tick
            return value
        if kind == "w":
            system.write(action[1], self.pid, action[2])
            if len(action) > 3:
                self.lin_tick = system.tick
            return None
        if kind == "spin":
            system.idle()
            return None
        raise AssertionError(f"unknown action {action!r}")


class HelpMachine:
    """Drives one process's background help thread.

    Enabled until the generator yields ("halt",), which a protocol may use
    when its helper provably has nothing left to do.
    """

    def __init__(self, pid, factory):
        self.pid = pid
        self.factory = factory
        self.gen = None
        self.inbox = None
        self.halted = False

    def enabled(self, tick):
        return not self.halted

    def step(self, system):
        if self.gen is None:
            self.gen = self.factory()
            self.inbox = None
        action = self.gen.send(self.inbox)
        kind = action[0]
        if kind == "r":
            self.inbox = system.read(action[1], self.pid)
        elif kind == "w":
            system.write(action[1], self.pid, action[2])
            self.inbox = None
        elif kind == "spin":
            system.idle()
            self.inbox = None
        elif kind == "halt":
            system.idle()
            self.halted = True
            self.inbox = None
        else:
            raise AssertionError(f"unknown action {action!r}")


# --------------------------------------------------------------------------
# Adversary directives
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WriteOwn:
    """Write a raw value to an owned cell at a given tick."""

    cell: str
    value: object
    at: int


@dataclass(frozen=True)
class ResetOwn:
    """Reset every owned cell to its initial value, starting at a tick."""

    at: int


@dataclass(frozen=True)
class Replay:
    """Re-issue recorded own-register writes verbatim (tick, cell, value)."""

    writes: tuple


@dataclass(frozen=True)
class StaleFlood:
    """Keep republishing stale (init, 0) replies into own per-reader cells."""

    at: int = 0


@dataclass(frozen=True)
class AdversaryScript:
    """Declarative Byzantine behavior for one process.

    The process runs its normal protocol machines while ``tick <
    mimic_until`` and is driven by the directive list afterwards.  An
    exhausted directive list means silence.
    """

    mimic_until: int = 0
    directives: tuple = ()

    @staticmethod
    def silent():
        return AdversaryScript()

    @staticmethod
    def crash_at(tick):
        return AdversaryScript(mimic_until=tick)


class ScriptMachine:
    """Executes one process's adversary directives, one access per slot."""

    def __init__(self, pid, script, protocol):
        self.pid = pid
        self.script = script
        self.protocol = protocol
        self.items = deque(self._expand(script.directives, protocol, pid))
        self.flood_targets = []
        self.flood_idx = 0

    @staticmethod
    def _expand(directives, protocol, pid):
        last = -1
        for d in directives:
            if isinstance(d, WriteOwn):
                if d.at < last:
                    raise ConfigError(f"p{pid}: directive ticks decrease at {d}")
                last = d.at
                yield ("w", d.at, d.cell, d.value)
            elif isinstance(d, ResetOwn):
                if d.at < last:
                    raise ConfigError(f"p{pid}: directive ticks decrease at {d}")
                last = d.at
                for cell in protocol.owned_cells(pid):
                    yield ("w", d.at, cell.name, cell.init)
            elif isinstance(d, Replay):
                for (t, cell, value) in d.writes:
                    if t < last:
                        raise ConfigError(f"p{pid}: replay ticks decrease at {t}")
                    last = t
                    yield ("w", t, cell, value)
            elif isinstance(d, StaleFlood):
                yield ("flood", d.at)
            else:
                raise ConfigError(f"p{pid}: unknown directive {d!r}")

    def validate(self, system):
        for item in self.items:
            if item[0] == "w":
                cell = system.cells_by_name.get(item[2])
                if cell is None:
                    raise ConfigError(f"p{self.pid}: unknown register {item[2]}")
                if cell.owner != self.pid:
                    raise ConfigError(
                        f"p{self.pid}: directive writes foreign register {item[2]}"
                    )

    def pinned_tick(self):
        """Tick of the next pinned write, or None."""
        if self.items and self.items[0][0] == "w":
            return self.items[0][1]
        return None

    def has_unpinned(self, tick):
        return bool(self.items) and self.items[0][0] == "flood" and self.items[0][1] <= tick

    def step(self, system):
        item = self.items[0]
        if item[0] == "w":
            self.items.popleft()
            system.write(system.cells_by_name[item[2]], self.pid, item[3])
            return
        # stale flood: cycle over own per-reader reply cells forever
        if not self.flood_targets:
            self.flood_targets = self.protocol.reply_cells(self.pid)
            if not self.flood_targets:
                self.items.popleft()  # nothing to flood, fall silent
                return
        cell = self.flood_targets[self.flood_idx % len(self.flood_targets)]
        self.flood_idx += 1
        system.write(cell, self.pid, (cell.init[0], 0))


# --------------------------------------------------------------------------
# Scheduler
# --------------------------------------------------------------------------


@dataclass
class RunResult:
    events: list
    step_log: list
    schedule: list  # 1-indexed by tick: machine key or None
    non_terminating: bool
    open_requests: list
    snapshots: dict
    final_tick: int


class _ProcState:
    __slots__ = ("pid", "correct", "mimic_until", "mask_until", "op", "help", "script")

    def __init__(self, pid, correct, mimic_until, mask_until, op, help_m, script):
        self.pid = pid
        self.correct = correct
        self.mimic_until = mimic_until
        self.mask_until = mask_until
        self.op = op
        self.help = help_m
        self.script = script

    def protocol_active(self, tick):
        return tick >= self.mask_until and (self.correct or tick < self.mimic_until)

    def overlay_active(self, tick):
        return tick >= self.mask_until and not self.correct and tick >= self.mimic_until


def run(
    system,
    protocol,
    workload,
    adversary=None,
    masks=None,
    schedule_script=None,
    snapshot_at=(),
):
    """Drive all step machines until every correct-process operation responds.

    ``adversary`` maps Byzantine pid -> AdversaryScript.  ``masks`` maps
    pid -> wake tick (the process takes no steps before it).  When
    ``schedule_script`` is given (a dict tick -> machine key), those slots
    are forced; unlisted slots fall back to the fair policy.  Pinned
    adversary writes always preempt the slot of their trigger tick.
    """
    config = system.config
    adversary = dict(adversary or {})
    masks = dict(masks or {})
    snapshot_at = set(snapshot_at)

    for pid in adversary:
        if pid in config.correct:
            raise ConfigError(f"p{pid} is scripted but listed as correct")

    ops_tables = {pid: protocol.op_table(pid) for pid in range(1, config.n + 1)}
    procs = {}
    for pid in range(1, config.n + 1):
        script = adversary.get(pid, AdversaryScript.silent())
        correct = pid in config.correct
        sm = ScriptMachine(pid, script, protocol)
        sm.validate(system)
        procs[pid] = _ProcState(
            pid,
            correct,
            script.mimic_until if not correct else 0,
            masks.get(pid, 0),
            OpMachine(pid, ops_tables[pid]),
            HelpMachine(pid, lambda pid=pid: protocol.help_gen(pid)),
            sm,
        )

    for req in workload:
        if not (1 <= req.process <= config.n):
            raise ConfigError(f"workload names unknown process p{req.process}")
        protocol.check_request(req)
        procs[req.process].op.submit(req)

    machines = []  # fixed universe, identical across runs of equal n
    for pid in range(1, config.n + 1):
        machines.append((pid, "op"))
        machines.append((pid, "help"))
        machines.append((pid, "adv"))

    window = config.fairness_window
    perm = list(machines)
    ptr = 0
    schedule = [None]  # index 0 unused; schedule[t] = key of slot t
    snapshots = {}

    def eligible(key, tick):
        pid, kind = key
        p = procs[pid]
        if kind == "op":
            return p.protocol_active(tick) and p.op.enabled(tick)
        if kind == "help":
            return p.protocol_active(tick) and p.help.enabled(tick)
        return p.overlay_active(tick) and p.script.has_unpinned(tick)

    def machine_of(key):
        pid, kind = key
        p = procs[pid]
        return p.op if kind == "op" else p.help if kind == "help" else p.script

    def pending_correct():
        return any(procs[pid].op.busy() for pid in config.correct)

    while pending_correct():
        if system.tick >= config.step_budget:
            open_reqs = [
                (pid, procs[pid].op.current or procs[pid].op.queue[0])
                for pid in sorted(config.correct)
                if procs[pid].op.busy()
            ]
            return RunResult(
                system.events,
                system.step_log,
                schedule,
                True,
                open_reqs,
                snapshots,
                system.tick,
            )
        tick = system.tick + 1

        # 1. pinned adversary directives preempt their trigger slot
        chosen = None
        best = None
        for pid in sorted(adversary):
            p = procs[pid]
            if not p.overlay_active(tick):
                continue
            pt = p.script.pinned_tick()
            if pt is not None and pt <= tick:
                if best is None or (pt, pid) < best:
                    best = (pt, pid)
                    chosen = (pid, "adv")
        if chosen is not None:
            machine_of(chosen).step(system)
            schedule.append(chosen)
        elif schedule_script is not None and tick in schedule_script:
            key = schedule_script[tick]
            if key is not None and eligible(key, tick):
                machine_of(key).step(system)
                schedule.append(key)
            else:
                system.idle()
                schedule.append(None)
        else:
            if (tick - 1) % window == 0:
                system.rng.shuffle(perm)
                ptr = 0
            pick = None
            for i in range(len(perm)):
                key = perm[(ptr + i) % len(perm)]
                if eligible(key, tick):
                    pick = key
                    ptr = (ptr + i + 1) % len(perm)
                    break
            if pick is None:
                system.idle()
                schedule.append(None)
            else:
                machine_of(pick).step(system)
                schedule.append(pick)

        if system.tick in snapshot_at:
            snapshots[system.tick] = system.dump()

    return RunResult(
        system.events,
        system.step_log,
        schedule,
        False,
        [],
        snapshots,
        system.tick,
    )


# --------------------------------------------------------------------------
# Protocols
# --------------------------------------------------------------------------


class _Ctx:
    """Per-process protocol locals, shared by the op and help threads."""

    __slots__ = (
        "written",
        "own_witness",
        "ck_val",
        "ts",
        "own_pairs",
        "echo",
        "witness",
        "help_prev",
    )

    def __init__(self):
        self.written = set()
        self.own_witness = frozenset()
        self.ck_val = 0
        self.ts = 0
        self.own_pairs = frozenset()
        self.echo = BOTTOM
        self.witness = BOTTOM
        self.help_prev = {}


class Protocol:
    """Common cell bookkeeping for the register protocols."""

    name = "abstract"
    type_tag = "abstract"
    v0 = 0

    def __init__(self, system):
        self.system = system
        self.n = system.config.n
        self.f = system.config.f
        self.readers = list(range(2, self.n + 1))
        self.ctx = {pid: _Ctx() for pid in range(1, self.n + 1)}
        for pid in range(1, self.n + 1):
            self.ctx[pid].help_prev = {k: 0 for k in self.readers}
        self._alloc()

    def _alloc(self):
        raise NotImplementedError

    def owned_cells(self, pid):
        return [c for c in self.system.cells if c.owner == pid]

    def reply_cells(self, pid):
        return [
            c
            for c in self.system.cells
            if c.owner == pid and c.name.startswith("Rr[")
        ]

    # ops ------------------------------------------------------------
    op_roles = {}

    def op_table(self, pid):
        table = {}
        for op, (role, factory) in self._op_factories().items():
            table[op] = self._bind(pid, role, op, factory)
        return table

    def _bind(self, pid, role, op, factory):
        def make(arg):
            if role == "writer" and pid != 1:
                raise AccessViolation(f"op {op} is writer-only, requested by p{pid}")
            if role == "reader" and pid == 1:
                raise AccessViolation(f"op {op} is reader-only, requested by p{pid}")
            return factory(pid, arg)

        return make

    def check_request(self, req):
        roles = self.op_roles
        if req.op not in roles:
            raise ConfigError(f"op {req.op!r} not valid for {self.name}")
        role = roles[req.op]
        if role == "writer" and req.process != 1:
            raise ConfigError(f"op {req.op!r} belongs to the writer, not p{req.process}")
        if role == "reader" and req.process == 1:
            raise ConfigError(f"op {req.op!r} belongs to readers, not the writer")

    def _op_factories(self):
        raise NotImplementedError

    def help_gen(self, pid):
        raise NotImplementedError

    # shared verify machinery -----------------------------------------

    def _verify_loop(self, pid, v):
        """Two-set round protocol of the verifiable/authenticated registers."""
        ctx = self.ctx[pid]
        set1 = set()
        set0 = set()
        while True:
            # loop-head invariants of the round protocol
            assert not (set1 & set0)
            assert len(set1) < self.n - self.f and len(set0) <= self.f
            ctx.ck_val += 1
            yield ("w", self.ck[pid], ctx.ck_val)
            sel = None
            while sel is None:
                eligible = [j for j in range(1, self.n + 1) if j not in set1 and j not in set0]
                if not eligible:
                    yield ("spin",)
                    continue
                for j in eligible:
                    raw = yield ("r", self.rr[(j, pid)])
                    payload, cj = as_reply_pair(raw, frozenset())
                    if cj >= ctx.ck_val:
                        sel = (j, as_witness_set(payload))
                        break
            j, rj = sel
            if v in rj:
                set1.add(j)
                set0.clear()
            else:
                set0.add(j)
            if len(set1) >= self.n - self.f:
                return True
            if len(set0) > self.f:
                return False

    def _read_counters(self, pid):
        cks = {}
        for k in self.readers:
            if k == pid:
                cks[k] = self.ctx[pid].ck_val
            else:
                raw = yield ("r", self.ck[k])
                cks[k] = as_counter(raw)
        return cks


class VerifiableRegister(Protocol):
    """Algorithm with Read/Write plus signature-emulating Sign/Verify."""

    name = "verifiable"
    type_tag = "verifiable"
    op_roles = {"write": "writer", "read": "reader", "sign": "writer", "verify": "reader"}

    def _alloc(self):
        sysm = self.system
        everyone = frozenset(range(1, self.n + 1))
        self.rstar = sysm.alloc("Rstar", 1, everyone, self.v0)
        self.rw = {i: sysm.alloc(f"R[{i}]", i, everyone, frozenset()) for i in range(1, self.n + 1)}
        self.rr = {
            (i, j): sysm.alloc(f"Rr[{i},{j}]", i, frozenset({j}), (frozenset(), 0))
            for i in range(1, self.n + 1)
            for j in self.readers
        }
        self.ck = {k: sysm.alloc(f"C[{k}]", k, everyone, 0) for k in self.readers}

    def _op_factories(self):
        return {
            "write": ("writer", self._op_write),
            "read": ("reader", self._op_read),
            "sign": ("writer", self._op_sign),
            "verify": ("reader", self._op_verify),
        }

    def _op_write(self, pid, v):
        ctx = self.ctx[pid]
        yield ("w", self.rstar, v, "lin")
        ctx.written.add(v)
        return DONE

    def _op_read(self, pid, _arg):
        v = yield ("r", self.rstar, "lin")
        return v

    def _op_sign(self, pid, v):
        ctx = self.ctx[pid]
        if v in ctx.written:
            ctx.own_witness = ctx.own_witness | {v}
            yield ("w", self.rw[pid], ctx.own_witness, "lin")
            return SUCCESS
        return FAIL
        yield  # pragma: no cover - makes this a generator

    def _op_verify(self, pid, v):
        result = yield from self._verify_loop(pid, v)
        return result

    def help_gen(self, pid):
        ctx = self.ctx[pid]
        prev = ctx.help_prev
        while True:
            cks = yield from self._read_counters(pid)
            askers = [k for k in self.readers if cks[k] > prev[k]]
            if not askers:
                continue
            sets = {}
            for i in range(1, self.n + 1):
                if i == pid:
                    sets[i] = ctx.own_witness
                else:
                    raw = yield ("r", self.rw[i])
                    sets[i] = as_witness_set(raw)
            r1 = sets[1]
            candidates = set().union(*sets.values())
            adopted = {
                v
                for v in candidates
                if v in r1 or sum(1 for i in sets if v in sets[i]) >= self.f + 1
            }
            ctx.own_witness = ctx.own_witness | adopted
            yield ("w", self.rw[pid], ctx.own_witness)
            rj = ctx.own_witness
            for k in sorted(askers):
                yield ("w", self.rr[(pid, k)], (rj, cks[k]))
                prev[k] = cks[k]


class FlawedVerifiableRegister(VerifiableRegister):
    """Verifiable register with the rejected first-2f+1-replies verifier.

    Write, Read, Sign and Help are unchanged; Verify asks everyone, takes the
    first 2f+1 fresh replies, and in the ambiguous band retries exactly once
    before giving up with false.
    """

    name = "verifiable_flawed"

    def _op_verify(self, pid, v):
        ctx = self.ctx[pid]
        need = 2 * self.f + 1
        for _attempt in (0, 1):
            ctx.ck_val += 1
            yield ("w", self.ck[pid], ctx.ck_val)
            fresh = {}
            while len(fresh) < need:
                for j in range(1, self.n + 1):
                    if j in fresh:
                        continue
                    raw = yield ("r", self.rr[(j, pid)])
                    payload, cj = as_reply_pair(raw, frozenset())
                    if cj >= ctx.ck_val:
                        fresh[j] = as_witness_set(payload)
                        if len(fresh) == need:
                            break
            yes = sum(1 for rj in fresh.values() if v in rj)
            if yes >= need:
                return True
            if yes <= self.f:
                return False
        return False


class AuthenticatedRegister(Protocol):
    """Register whose every write is atomically timestamped and signed."""

    name = "authenticated"
    type_tag = "authenticated"
    op_roles = {"write": "writer", "read": "reader", "verify": "reader"}

    def _alloc(self):
        sysm = self.system
        everyone = frozenset(range(1, self.n + 1))
        init_pairs = frozenset({(0, self.v0)})
        self.r1 = sysm.alloc("R[1]", 1, everyone, init_pairs)
        self.rw = {1: self.r1}
        for k in self.readers:
            self.rw[k] = sysm.alloc(f"R[{k}]", k, everyone, frozenset({self.v0}))
        self.rr = {
            (i, j): sysm.alloc(f"Rr[{i},{j}]", i, frozenset({j}), (frozenset(), 0))
            for i in range(1, self.n + 1)
            for j in self.readers
        }
        self.ck = {k: sysm.alloc(f"C[{k}]", k, everyone, 0) for k in self.readers}
        self.ctx[1].own_pairs = init_pairs
        for k in self.readers:
            self.ctx[k].own_witness = frozenset({self.v0})

    def _op_factories(self):
        return {
            "write": ("writer", self._op_write),
            "read": ("reader", self._op_read),
            "verify": ("reader", self._op_verify),
        }

    def _op_write(self, pid, v):
        ctx = self.ctx[pid]
        ctx.ts += 1
        ctx.own_pairs = ctx.own_pairs | {(ctx.ts, v)}
        yield ("w", self.r1, ctx.own_pairs, "lin")
        return DONE

    def _op_read(self, pid, _arg):
        raw = yield ("r", self.r1, "lin")
        pairs = as_pair_set(raw)
        if pairs:
            _ts, v = max(pairs)
            verified = yield from self._verify_loop(pid, v)
            if verified:
                return v
        return self.v0

    def _op_verify(self, pid, v):
        result = yield from self._verify_loop(pid, v)
        return result

    def help_gen(self, pid):
        ctx = self.ctx[pid]
        prev = ctx.help_prev
        while True:
            cks = yield from self._read_counters(pid)
            askers = [k for k in self.readers if cks[k] > prev[k]]
            if not askers:
                continue
            if pid == 1:
                r1 = pair_set_values(ctx.own_pairs)
                rj = r1
            else:
                raw = yield ("r", self.r1)
                r1 = pair_set_values(raw)
                sets = {1: r1}
                for i in self.readers:
                    if i == pid:
                        sets[i] = ctx.own_witness
                    else:
                        raw = yield ("r", self.rw[i])
                        sets[i] = as_witness_set(raw)
                candidates = set().union(*sets.values())
                adopted = {
                    v
                    for v in candidates
                    if v in r1 or sum(1 for i in sets if v in sets[i]) >= self.f + 1
                }
                ctx.own_witness = ctx.own_witness | adopted
                yield ("w", self.rw[pid], ctx.own_witness)
                rj = ctx.own_witness
            for k in sorted(askers):
                yield ("w", self.rr[(pid, k)], (rj, cks[k]))
                prev[k] = cks[k]


class StickyRegister(Protocol):
    """Register that keeps its first written value forever."""

    name = "sticky"
    type_tag = "sticky"
    v0 = BOTTOM
    op_roles = {"write": "writer", "read": "reader"}

    def _alloc(self):
        sysm = self.system
        everyone = frozenset(range(1, self.n + 1))
        self.echo = {i: sysm.alloc(f"E[{i}]", i, everyone, BOTTOM) for i in range(1, self.n + 1)}
        self.rw = {i: sysm.alloc(f"R[{i}]", i, everyone, BOTTOM) for i in range(1, self.n + 1)}
        self.rr = {
            (i, j): sysm.alloc(f"Rr[{i},{j}]", i, frozenset({j}), (BOTTOM, 0))
            for i in range(1, self.n + 1)
            for j in self.readers
        }
        self.ck = {k: sysm.alloc(f"C[{k}]", k, everyone, 0) for k in self.readers}

    def _op_factories(self):
        return {
            "write": ("writer", self._op_write),
            "read": ("reader", self._op_read),
        }

    def _op_write(self, pid, v):
        ctx = self.ctx[pid]
        if ctx.echo is not BOTTOM:
            return DONE
        ctx.echo = v
        yield ("w", self.echo[pid], v, "lin")
        while True:
            count = 0
            for i in range(1, self.n + 1):
                if i == pid:
                    ri = ctx.witness
                else:
                    ri = as_scalar_or_bottom((yield ("r", self.rw[i])))
                if ri == v:
                    count += 1
            if count >= self.n - self.f:
                return DONE

    def _op_read(self, pid, _arg):
        ctx = self.ctx[pid]
        set_bot = set()
        set_val = {}  # pid -> vouched value
        while True:
            # loop-head invariants: the sets name different processes
            assert not (set_bot & set_val.keys())
            assert len(set_bot) <= self.f
            ctx.ck_val += 1
            yield ("w", self.ck[pid], ctx.ck_val)
            scan = [j for j in range(1, self.n + 1) if j not in set_bot and j not in set_val]
            sel = None
            while sel is None:
                if not scan:
                    yield ("spin",)
                    continue
                for j in scan:
                    raw = yield ("r", self.rr[(j, pid)])
                    payload, cj = as_reply_pair(raw, BOTTOM)
                    if cj >= ctx.ck_val:
                        sel = (j, as_scalar_or_bottom(payload))
                        break
            j, uj = sel
            if uj is not BOTTOM:
                set_val[j] = uj
                set_bot.clear()
            else:
                set_bot.add(j)
            counts = {}
            for vouched in set_val.values():
                counts[vouched] = counts.get(vouched, 0) + 1
            winners = [v for v, c in sorted(counts.items()) if c >= self.n - self.f]
            if winners:
                return winners[0]
            if len(set_bot) > self.f:
                return BOTTOM

    def help_gen(self, pid):
        ctx = self.ctx[pid]
        prev = ctx.help_prev
        while True:
            if ctx.echo is BOTTOM:
                if pid == 1:
                    e1 = ctx.echo
                else:
                    e1 = as_scalar_or_bottom((yield ("r", self.echo[1])))
                if e1 is not BOTTOM:
                    ctx.echo = e1
                    yield ("w", self.echo[pid], e1)
            if ctx.witness is BOTTOM:
                echoes = []
                for i in range(1, self.n + 1):
                    if i == pid:
                        echoes.append(ctx.echo)
                    else:
                        echoes.append(as_scalar_or_bottom((yield ("r", self.echo[i]))))
                quorum = self._value_with_quorum(echoes, self.n - self.f)
                if quorum is not None:
                    ctx.witness = quorum
                    yield ("w", self.rw[pid], quorum)
            cks = yield from self._read_counters(pid)
            askers = [k for k in self.readers if cks[k] > prev[k]]
            if not askers:
                continue
            if ctx.witness is BOTTOM:
                vals = []
                for i in range(1, self.n + 1):
                    if i == pid:
                        vals.append(ctx.witness)
                    else:
                        vals.append(as_scalar_or_bottom((yield ("r", self.rw[i]))))
                quorum = self._value_with_quorum(vals, self.f + 1)
                if quorum is not None:
                    ctx.witness = quorum
                    yield ("w", self.rw[pid], quorum)
            rj = ctx.witness
            for k in sorted(askers):
                yield ("w", self.rr[(pid, k)], (rj, cks[k]))
                prev[k] = cks[k]

    @staticmethod
    def _value_with_quorum(values, threshold):
        counts = {}
        for v in values:
            if v is not BOTTOM:
                counts[v] = counts.get(v, 0) + 1
        hits = [v for v, c in sorted(counts.items()) if c >= threshold]
        return hits[0] if hits else None


class NaiveQuorumTos(Protocol):
    """Strawman signature-free test-or-set over plain SWMR registers.

    Set raises the setter's flag and waits for a majority of echoes; a
    process echoes when it sees the flag or any other echo, and Test
    accepts on the flag or a majority of echoes.  Deliberately not
    Byzantine-tolerant: it is the attack target.
    """

    name = "naive_quorum"
    type_tag = "tos"
    op_roles = {"set": "writer", "test": "reader"}

    def _alloc(self):
        sysm = self.system
        everyone = frozenset(range(1, self.n + 1))
        self.flag = sysm.alloc("F", 1, everyone, 0)
        self.echo = {i: sysm.alloc(f"E[{i}]", i, everyone, 0) for i in range(1, self.n + 1)}
        self.quorum = (self.n + 1 + 1) // 2  # ceil((n+1)/2)

    def _op_factories(self):
        return {
            "set": ("writer", self._op_set),
            "test": ("reader", self._op_test),
        }

    def _op_set(self, pid, _arg):
        ctx = self.ctx[pid]
        yield ("w", self.flag, 1, "lin")
        ctx.echo = 1
        yield ("w", self.echo[pid], 1)
        while True:
            count = 0
            for i in range(1, self.n + 1):
                ei = ctx.echo if i == pid else as_counter((yield ("r", self.echo[i])))
                if ei == 1:
                    count += 1
            if count >= self.quorum:
                return DONE

    def _op_test(self, pid, _arg):
        ctx = self.ctx[pid]
        flag = as_counter((yield ("r", self.flag)))
        if flag == 1:
            return 1
        seen = {}
        for i in range(1, self.n + 1):
            seen[i] = ctx.echo if i == pid else as_counter((yield ("r", self.echo[i])))
        if any(e == 1 for e in seen.values()) and ctx.echo != 1:
            ctx.echo = 1
            yield ("w", self.echo[pid], 1)
            seen[pid] = 1
        if sum(1 for e in seen.values() if e == 1) >= self.quorum:
            return 1
        return 0

    def help_gen(self, pid):
        ctx = self.ctx[pid]
        while True:
            if ctx.echo == 1:
                yield ("halt",)
                return
            flag = as_counter((yield ("r", self.flag))) if pid != 1 else 0
            adopt = flag == 1
            if not adopt:
                for i in range(1, self.n + 1):
                    if i == pid:
                        continue
                    if as_counter((yield ("r", self.echo[i]))) == 1:
                        adopt = True
                        break
            if adopt:
                ctx.echo = 1
                yield ("w", self.echo[pid], 1)


class _TosReduction(Protocol):
    """One-shot test-or-set layered on one of the register protocols."""

    type_tag = "tos"
    op_roles = {"set": "writer", "test": "reader"}
    backing_cls = None

    def __init__(self, system):
        self.backing = self.backing_cls(system)
        self.system = system
        self.n = self.backing.n
        self.f = self.backing.f
        self.readers = self.backing.readers
        self.ctx = self.backing.ctx

    def _alloc(self):  # pragma: no cover - backing allocates
        pass

    def owned_cells(self, pid):
        return self.backing.owned_cells(pid)

    def reply_cells(self, pid):
        return self.backing.reply_cells(pid)

    def help_gen(self, pid):
        return self.backing.help_gen(pid)

    def _op_factories(self):
        return {
            "set": ("writer", self._op_set),
            "test": ("reader", self._op_test),
        }


class VerifiableTos(_TosReduction):
    name = "tos_verifiable"
    backing_cls = VerifiableRegister

    def _op_set(self, pid, _arg):
        yield from self.backing._op_write(pid, 1)
        res = yield from self.backing._op_sign(pid, 1)
        assert res == SUCCESS
        return DONE

    def _op_test(self, pid, _arg):
        ok = yield from self.backing._op_verify(pid, 1)
        return 1 if ok else 0


class AuthenticatedTos(_TosReduction):
    name = "tos_authenticated"
    backing_cls = AuthenticatedRegister

    def _op_set(self, pid, _arg):
        yield from self.backing._op_write(pid, 1)
        return DONE

    def _op_test(self, pid, _arg):
        ok = yield from self.backing._op_verify(pid, 1)
        return 1 if ok else 0


class StickyTos(_TosReduction):
    name = "tos_sticky"
    backing_cls = StickyRegister

    def _op_set(self, pid, _arg):
        yield from self.backing._op_write(pid, 1)
        return DONE

    def _op_test(self, pid, _arg):
        v = yield from self.backing._op_read(pid, None)
        return 1 if v == 1 else 0


PROTOCOLS = {
    cls.name: cls
    for cls in (
        VerifiableRegister,
        FlawedVerifiableRegister,
        AuthenticatedRegister,
        StickyRegister,
        NaiveQuorumTos,
        VerifiableTos,
        AuthenticatedTos,
        StickyTos,
    )
}
