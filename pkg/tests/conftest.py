import pytest

from byzreg import histories, runtime

Request = runtime.Request


def simulate(rtype, workload, n=4, f=1, byzantine=(), scripts=None, seed=0,
             budget=500_000, masks=None):
    """Run one protocol instance and return (run result, trace, system)."""
    correct = frozenset(range(1, n + 1)) - frozenset(byzantine)
    cfg = runtime.SystemConfig(n=n, f=f, correct=correct, seed=seed,
                               step_budget=budget)
    system = runtime.create_system(cfg)
    protocol = runtime.make_protocol(rtype, system)
    result = runtime.run(system, protocol, workload, adversary=scripts or {},
                         masks=masks)
    trace = histories.make_trace(result, cfg, protocol.type_tag, protocol.v0)
    return result, trace, system


def results_of(trace, op=None, process=None):
    """Completed operations, optionally filtered."""
    ops = [o for o in trace.operations() if o.resp is not None]
    if op is not None:
        ops = [o for o in ops if o.op == op]
    if process is not None:
        ops = [o for o in ops if o.process == process]
    return ops


@pytest.fixture
def vr_all_correct():
    def make(workload, seed=0, **kw):
        return simulate("verifiable", workload, seed=seed, **kw)

    return make
