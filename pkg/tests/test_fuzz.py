"""Randomized adversaries: arbitrary junk into owned registers.

The protocols must stay safe and live against any ownership-respecting
script, not just the curated preset library.  Each example runs a seeded
simulation with random tick-triggered writes of structurally arbitrary
values into the Byzantine coalition's own cells, then requires termination,
all observation predicates, and a constructive linearization.
"""

from hypothesis import given, settings
from hypothesis import strategies as st

from byzreg import adversary as adv
from byzreg import histories, presets, runtime

from conftest import simulate

JUNK = st.one_of(
    st.integers(0, 9),
    st.just(runtime.BOTTOM),
    st.text(max_size=3),
    st.frozensets(st.integers(0, 9), max_size=4),
    st.frozensets(st.tuples(st.integers(0, 5), st.integers(0, 9)), max_size=3),
    st.tuples(st.frozensets(st.integers(0, 9), max_size=3), st.integers(0, 10**9)),
    st.tuples(st.integers(0, 9), st.integers(0, 10**9)),
)


def _own_cells(rtype, pid, n):
    cells = [f"R[{pid}]"] + [f"Rr[{pid},{k}]" for k in range(2, n + 1)]
    if rtype == "sticky":
        cells.append(f"E[{pid}]")
    if rtype == "verifiable" and pid == 1:
        cells.append("Rstar")
    return cells


@st.composite
def fuzz_case(draw):
    rtype = draw(st.sampled_from(["verifiable", "authenticated", "sticky"]))
    n, f = 4, 1
    byz = draw(st.sampled_from([1, 2, 3, 4]))
    cells = _own_cells(rtype, byz, n)
    ticks = sorted(draw(st.lists(st.integers(1, 400), min_size=0, max_size=6)))
    directives = tuple(
        adv.WriteOwn(cell=draw(st.sampled_from(cells)), value=draw(JUNK), at=t)
        for t in ticks
    )
    seed = draw(st.integers(0, 10_000))
    return rtype, byz, directives, seed


@settings(max_examples=150, deadline=None)
@given(fuzz_case())
def test_protocols_survive_arbitrary_own_register_junk(case):
    rtype, byz, directives, seed = case
    correct = frozenset({1, 2, 3, 4}) - {byz}
    workload = presets.gen_workload(rtype, 4, 1, correct, seed)
    result, trace, _ = simulate(
        rtype,
        workload,
        byzantine=(byz,),
        scripts={byz: adv.AdversaryScript(directives=directives)},
        seed=seed,
    )
    assert not result.non_terminating, "correct operation starved"
    for v in histories.check_observations(trace):
        assert v.passed, v.describe()
    assert histories.byz_linearize_constructive(trace).passed
