"""The compiled engine and the pure-Python fallback must be byte-identical.

Both are built from the same source file; this guards the build wiring, not
the logic.  Skipped when the compiled twin has not been built.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

import byzreg

SCENARIOS = Path(__file__).resolve().parent.parent / "src" / "byzreg" / "scenarios"

PROG = """
import sys
import byzreg
from byzreg import cli
sys.exit(cli.main(sys.argv[1:]) if False else 0) if False else None
print(byzreg.ENGINE)
code = cli.main(["run", sys.argv[1], "--out", sys.argv[2], "--seed", "5"])
sys.exit(code)
"""


def _run(engine, scenario, out):
    env = dict(os.environ)
    if engine == "pure":
        env["BYZREG_PURE"] = "1"
    else:
        env.pop("BYZREG_PURE", None)
    res = subprocess.run(
        [sys.executable, "-c", PROG, str(scenario), str(out)],
        env=env,
        capture_output=True,
        text=True,
    )
    assert res.returncode in (0, 1), res.stderr
    assert res.stdout.splitlines()[0] == engine
    return Path(out).with_suffix(".jsonl").read_bytes()


@pytest.mark.skipif(byzreg.ENGINE != "compiled", reason="compiled engine not built")
@pytest.mark.parametrize(
    "scenario", ["vr_basic.json", "sticky_equivocation.json", "flawed_relay.json"]
)
def test_engines_produce_identical_traces(scenario, tmp_path):
    a = _run("pure", SCENARIOS / scenario, tmp_path / "pure")
    b = _run("compiled", SCENARIOS / scenario, tmp_path / "fast")
    assert a == b


ATTACK_PROG = """
import json, sys
import byzreg
from byzreg import tos
report = tos.impossibility_attack("naive_quorum", 3, 1, seed=7)
doc = report.describe()
doc["engine"] = byzreg.ENGINE
print(json.dumps(doc, sort_keys=True))
"""


@pytest.mark.skipif(byzreg.ENGINE != "compiled", reason="compiled engine not built")
def test_attack_identical_across_engines():
    docs = {}
    for engine in ("pure", "compiled"):
        env = dict(os.environ)
        if engine == "pure":
            env["BYZREG_PURE"] = "1"
        else:
            env.pop("BYZREG_PURE", None)
        res = subprocess.run([sys.executable, "-c", ATTACK_PROG], env=env,
                             capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        doc = json.loads(res.stdout)
        assert doc.pop("engine") == engine
        docs[engine] = doc
    assert docs["pure"] == docs["compiled"]
