"""Deterministic shared-memory substrate.

Atomic SWMR/SWSR register cells, a two-step-machines-per-process execution
model (operation thread plus background help thread), and a seeded fair
scheduler.  One tick per atomic step: a register access, an operation
invocation, an operation response, or an idle slot; local computation is
free.  A run is a pure function of (config, workload, policy, adversary).
"""

from byzreg.engine import impl as _impl

BOTTOM = _impl.BOTTOM
DONE = _impl.DONE
SUCCESS = _impl.SUCCESS
FAIL = _impl.FAIL

ConfigError = _impl.ConfigError
AccessViolation = _impl.AccessViolation

SystemConfig = _impl.SystemConfig
RegisterCell = _impl.RegisterCell
System = _impl.System
Event = _impl.Event
Request = _impl.Request
RunResult = _impl.RunResult

PROTOCOLS = _impl.PROTOCOLS


def create_system(config: SystemConfig) -> System:
    """Fresh system: n processes, empty register space, tick 0, seeded PRNG."""
    return System(config)


def alloc_register(system, name, owner, readers, init):
    return system.alloc(name, owner, readers, init)


def atomic_read(system, cell, reader):
    return system.read(cell, reader)


def atomic_write(system, cell, writer, value):
    return system.write(cell, writer, value)


def make_protocol(name, system):
    try:
        cls = PROTOCOLS[name]
    except KeyError:
        raise ConfigError(f"unknown register type {name!r}") from None
    return cls(system)


def run(system, protocol, workload, adversary=None, masks=None,
        schedule_script=None, snapshot_at=()):
    """Drive all step machines until every correct-process operation responds
    or the step budget runs out (which flags the result non-terminating)."""
    return _impl.run(
        system,
        protocol,
        workload,
        adversary=adversary,
        masks=masks,
        schedule_script=schedule_script,
        snapshot_at=snapshot_at,
    )
