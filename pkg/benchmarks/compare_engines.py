#!/usr/bin/env python3
"""Benchmark the compiled engine against the pure-Python fallback.

Both engines are built from the same source file, so this is purely a
speed comparison: it runs an identical batch of seeded simulations in two
subprocesses (one with BYZREG_PURE=1) and reports ticks per second.
"""

import json
import os
import subprocess
import sys

BATCH = r"""
import json, time
import byzreg
from byzreg import histories, presets, runtime

t0 = time.time()
ticks = 0
runs = 0
for rtype in ("verifiable", "authenticated", "sticky"):
    for preset in ("none", "lying_helper", "equivocating_writer"):
        for seed in range(40):
            n, f = 7, 2
            byz, scripts = presets.build_preset(preset, rtype, n, f)
            correct = frozenset(range(1, n + 1)) - frozenset(byz)
            cfg = runtime.SystemConfig(n=n, f=f, correct=correct, seed=seed)
            wl = presets.gen_workload(rtype, n, f, correct, seed)
            system = runtime.create_system(cfg)
            protocol = runtime.make_protocol(rtype, system)
            res = runtime.run(system, protocol, wl, adversary=scripts)
            assert not res.non_terminating
            ticks += res.final_tick
            runs += 1
dt = time.time() - t0
print(json.dumps({"engine": byzreg.ENGINE, "runs": runs, "ticks": ticks,
                  "seconds": round(dt, 3),
                  "ticks_per_s": int(ticks / dt)}))
"""


def run_batch(pure):
    env = dict(os.environ)
    if pure:
        env["BYZREG_PURE"] = "1"
    else:
        env.pop("BYZREG_PURE", None)
    out = subprocess.run(
        [sys.executable, "-c", BATCH], env=env, capture_output=True, text=True
    )
    if out.returncode != 0:
        raise SystemExit(out.stderr)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    pure = run_batch(pure=True)
    other = run_batch(pure=False)
    print(f"pure python : {pure['ticks_per_s']:>10,} ticks/s "
          f"({pure['seconds']}s for {pure['runs']} runs)")
    if other["engine"] == "compiled":
        speedup = other["ticks_per_s"] / pure["ticks_per_s"]
        print(f"compiled    : {other['ticks_per_s']:>10,} ticks/s "
              f"({other['seconds']}s)  -> {speedup:.2f}x")
    else:
        print("compiled engine not built; run "
              "`python setup.py build_ext --inplace` first")


if __name__ == "__main__":
    main()
