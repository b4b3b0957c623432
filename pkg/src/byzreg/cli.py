"""Scenario runner and data plane.

Subcommands:

* ``run``    execute one scenario file: emit trace JSONL + verdict JSON
* ``sweep``  run a scenario across a seed range, summarize outcomes
* ``check``  re-check an emitted trace offline
* ``attack`` replay the three-history optimality attack against a backend

Exit codes: 0 pass, 1 check failure, 2 config error, 3 non-termination.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from byzreg import adversary as adv
from byzreg import histories, registers, runtime, tos
from byzreg import values as _values

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NON_TERMINATION = 3

_CHECK_NAMES = ("observations", "constructive", "bruteforce")


def _reject_unknown(obj, allowed, where):
    unknown = set(obj) - set(allowed)
    if unknown:
        raise runtime.ConfigError(f"unknown field(s) {sorted(unknown)} in {where}")


def _parse_directive(obj, where):
    _reject_unknown(obj, {"kind", "cell", "value", "at"}, where)
    kind = obj.get("kind")
    if kind == "write_own":
        return adv.WriteOwn(
            cell=obj["cell"], value=_values.decode_value(obj["value"]), at=obj["at"]
        )
    if kind == "reset_own":
        return adv.ResetOwn(at=obj["at"])
    if kind == "stale_flood":
        return adv.StaleFlood(at=obj.get("at", 0))
    raise runtime.ConfigError(f"unknown directive kind {kind!r} in {where}")


def _parse_script(obj, where):
    _reject_unknown(obj, {"mimic_until", "directives"}, where)
    return adv.AdversaryScript(
        mimic_until=obj.get("mimic_until", 0),
        directives=tuple(
            _parse_directive(d, where) for d in obj.get("directives", [])
        ),
    )


def load_scenario(path):
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise runtime.ConfigError(f"cannot load scenario {path}: {exc}") from exc
    _reject_unknown(
        raw,
        {
            "version",
            "system",
            "register_type",
            "workload",
            "adversary",
            "masks",
            "checks",
            "output",
            "attack",
        },
        "scenario",
    )
    if raw.get("version") != 1:
        raise runtime.ConfigError("scenario version must be 1")
    if "attack" in raw:
        _reject_unknown(raw["attack"], {"backend", "n", "f", "seed"}, "attack")
        return raw
    for field in ("system", "register_type", "workload"):
        if field not in raw:
            raise runtime.ConfigError(f"scenario lacks required field {field!r}")
    _reject_unknown(
        raw["system"],
        {"n", "f", "correct", "seed", "fairness_window", "step_budget"},
        "system",
    )
    if raw["register_type"] not in registers.REGISTER_TYPES:
        raise runtime.ConfigError(f"unknown register type {raw['register_type']!r}")
    for w in raw["workload"]:
        _reject_unknown(w, {"process", "op", "arg", "at"}, "workload entry")
    for pid, script in raw.get("adversary", {}).items():
        _parse_script(script, f"adversary[{pid}]")
    for check in raw.get("checks", []):
        if check not in _CHECK_NAMES:
            raise runtime.ConfigError(f"unknown check {check!r}")
    return raw


def _build(raw, seed=None, budget=None, fairness=None):
    sysraw = dict(raw["system"])
    if seed is not None:
        sysraw["seed"] = seed
    if budget is not None:
        sysraw["step_budget"] = budget
    if fairness is not None:
        sysraw["fairness_window"] = fairness
    config = runtime.SystemConfig(
        n=sysraw["n"],
        f=sysraw["f"],
        correct=frozenset(sysraw["correct"]),
        seed=sysraw.get("seed", 0),
        fairness_window=sysraw.get("fairness_window", 0),
        step_budget=sysraw.get("step_budget", 500_000),
    )
    workload = [
        runtime.Request(
            process=w["process"],
            op=w["op"],
            arg=_values.decode_value(w.get("arg")),
            at=w.get("at", 1),
        )
        for w in raw["workload"]
    ]
    scripts = {
        int(pid): _parse_script(obj, f"adversary[{pid}]")
        for pid, obj in raw.get("adversary", {}).items()
    }
    masks = {int(pid): t for pid, t in raw.get("masks", {}).items()}
    rtype = raw["register_type"]
    if registers.REGISTER_TYPES[rtype] == "tos":
        tos.validate_one_shot(workload)
    return config, rtype, workload, scripts, masks


def execute_scenario(raw, seed=None, budget=None, fairness=None):
    """Run the scenario in memory. Returns (trace, verdicts, non_terminating)."""
    config, rtype, workload, scripts, masks = _build(raw, seed, budget, fairness)
    system = runtime.create_system(config)
    protocol = runtime.make_protocol(rtype, system)
    result = runtime.run(system, protocol, workload, adversary=scripts, masks=masks)
    trace = histories.make_trace(
        result, config, registers.REGISTER_TYPES[rtype], protocol.v0
    )
    verdicts = []
    if not result.non_terminating:
        verdicts = run_checks(trace, raw.get("checks", []))
    return trace, verdicts, result.non_terminating


def run_checks(trace, checks):
    verdicts = []
    for check in checks:
        if check == "observations":
            verdicts.extend(histories.check_observations(trace))
        elif check == "constructive":
            try:
                verdicts.append(histories.byz_linearize_constructive(trace))
            except histories.MissingAnnotations:
                v = histories.byz_linearize_bruteforce(trace)
                verdicts.append(
                    histories.Verdict(
                        v.outcome,
                        "constructive(bruteforce-fallback)",
                        v.witness,
                        v.violation,
                    )
                )
        elif check == "bruteforce":
            try:
                verdicts.append(histories.byz_linearize_bruteforce(trace))
            except histories.SearchBoundExceeded as exc:
                verdicts.append(
                    histories.Verdict(
                        "pass", "bruteforce", witness=f"refused: {exc}"
                    )
                )
    return verdicts


def _write_outputs(out_base, trace, verdicts, non_terminating, extra=None):
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    trace_path = out_base.with_suffix(".jsonl")
    trace_path.write_text(histories.trace_to_jsonl(trace))
    report = {
        "non_terminating": non_terminating,
        "checks": [v.describe() for v in verdicts],
        "all_pass": all(v.passed for v in verdicts),
    }
    if extra:
        report.update(extra)
    verdict_path = out_base.with_suffix(".verdict.json")
    verdict_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return trace_path, verdict_path


def cmd_run(args):
    raw = load_scenario(args.scenario)
    if "attack" in raw:
        return _run_attack_scenario(raw, args)
    trace, verdicts, hung = execute_scenario(
        raw, seed=args.seed, budget=args.budget, fairness=args.fairness_window
    )
    out = args.out or raw.get("output") or "byzreg-out"
    trace_path, verdict_path = _write_outputs(out, trace, verdicts, hung)
    for v in verdicts:
        print(f"{v.check}: {v.outcome}")
    print(f"trace: {trace_path}")
    print(f"verdicts: {verdict_path}")
    if hung:
        print("non-terminating: correct operations left unresponded")
        return EXIT_NON_TERMINATION
    return EXIT_PASS if all(v.passed for v in verdicts) else EXIT_CHECK_FAILED


def _run_attack_scenario(raw, args):
    spec = raw["attack"]
    report = tos.impossibility_attack(
        spec["backend"],
        spec["n"],
        spec["f"],
        seed=args.seed if args.seed is not None else spec.get("seed", 0),
        step_budget=args.budget or 500_000,
    )
    out = Path(args.out or raw.get("output") or "attack-report")
    out.parent.mkdir(parents=True, exist_ok=True)
    path = out.with_suffix(".json")
    doc = report.describe()
    doc["dumps"] = {
        k: {name: _values.encode_value(v) for name, v in d.items()} if d else None
        for k, d in report.dumps.items()
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"attack report: {path}")
    print(
        f"applicable={report.applicable} conclusive={report.conclusive} "
        f"violation={report.violation} ({report.violated_property or 'n/a'})"
    )
    if report.applicable and not report.conclusive:
        return EXIT_NON_TERMINATION
    return EXIT_PASS


def cmd_sweep(args):
    raw = load_scenario(args.scenario)
    if "attack" in raw:
        raise runtime.ConfigError("sweep does not apply to attack scenarios")
    lo, hi = _parse_seed_range(args.seeds)
    summary = {"pass": 0, "fail": 0, "non_terminating": 0}
    failures = []
    for seed in range(lo, hi):
        _trace, verdicts, hung = execute_scenario(
            raw, seed=seed, budget=args.budget, fairness=args.fairness_window
        )
        if hung:
            summary["non_terminating"] += 1
        elif all(v.passed for v in verdicts):
            summary["pass"] += 1
        else:
            summary["fail"] += 1
            failures.append(seed)
    print(json.dumps({"seeds": [lo, hi], **summary, "failing_seeds": failures[:20]}))
    if args.out:
        Path(args.out).write_text(
            json.dumps({"seeds": [lo, hi], **summary, "failing_seeds": failures}) + "\n"
        )
    return EXIT_PASS


def _parse_seed_range(text):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return int(lo), int(hi)
    return 0, int(text)


def cmd_check(args):
    try:
        trace = histories.trace_from_jsonl(Path(args.trace).read_text())
    except (OSError, ValueError) as exc:
        raise runtime.ConfigError(f"cannot load trace {args.trace}: {exc}") from exc
    checks = args.checks.split(",") if args.checks else ["observations"]
    for c in checks:
        if c not in _CHECK_NAMES:
            raise runtime.ConfigError(f"unknown check {c!r}")
    verdicts = run_checks(trace, checks)
    for v in verdicts:
        print(f"{v.check}: {v.outcome}")
    if args.out:
        Path(args.out).write_text(
            json.dumps([v.describe() for v in verdicts], indent=2, sort_keys=True)
            + "\n"
        )
    return EXIT_PASS if all(v.passed for v in verdicts) else EXIT_CHECK_FAILED


def cmd_attack(args):
    report = tos.impossibility_attack(
        args.backend, args.n, args.f, seed=args.seed or 0,
        step_budget=args.budget or 500_000,
    )
    doc = report.describe()
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        doc["dumps"] = {
            k: {name: _values.encode_value(v) for name, v in d.items()} if d else None
            for k, d in report.dumps.items()
        }
        out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(json.dumps(report.describe(), sort_keys=True))
    if report.applicable and not report.conclusive:
        return EXIT_NON_TERMINATION
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="byzreg",
        description="Byzantine-tolerant register protocol simulator and checker",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--budget", type=int, default=None)
    p_run.add_argument("--fairness-window", dest="fairness_window", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario across seeds")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--seeds", default="0:100", help="range lo:hi or a count")
    p_sweep.add_argument("--budget", type=int, default=None)
    p_sweep.add_argument("--fairness-window", dest="fairness_window", type=int, default=None)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_check = sub.add_parser("check", help="re-check an emitted trace")
    p_check.add_argument("trace")
    p_check.add_argument("--checks", default="observations,constructive,bruteforce")
    p_check.add_argument("--out", default=None)
    p_check.set_defaults(func=cmd_check)

    p_attack = sub.add_parser("attack", help="run the optimality attack")
    p_attack.add_argument("--backend", default="naive_quorum", choices=tos.TOS_BACKENDS)
    p_attack.add_argument("--n", type=int, default=3)
    p_attack.add_argument("--f", type=int, default=1)
    p_attack.add_argument("--seed", type=int, default=0)
    p_attack.add_argument("--budget", type=int, default=None)
    p_attack.add_argument("--out", default=None)
    p_attack.set_defaults(func=cmd_attack)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (runtime.ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
