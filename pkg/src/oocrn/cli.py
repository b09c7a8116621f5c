"""``oocrn`` command line: check, eval, synth, simulate, verify.

Exit codes: 0 on success or all-PASS, 1 on failures and diagnostics,
2 when a verdict is inconclusive or a step budget runs out.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import funcspec, synth as synth_mod, verify
from .crn import CrnError, check_output_oblivious, validate_crn
from .crnfile import dump_crn, load_crn

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2


def _nat(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}")
    return value


def _pair(text: str) -> tuple[int, ...]:
    parts = text.split(",")
    if not 1 <= len(parts) <= 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return tuple(_nat(p.strip()) for p in parts)


def _pad(n: tuple[int, ...]) -> tuple[int, int]:
    return (n[0], n[1] if len(n) > 1 else 0)


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _load_spec(path: str) -> funcspec.FunctionSpec:
    try:
        return funcspec.load_spec(path)
    except funcspec.SpecError as exc:
        msg = str(exc)
        raise funcspec.SpecError(msg if msg.startswith(str(path)) else f"{path}: {msg}") from None


def cmd_check(args) -> int:
    spec = _load_spec(args.spec)
    problems = funcspec.validate_spec(spec)
    box = _pad(args.box) if args.box else funcspec.audit_box(spec)
    if args.box and not problems:
        problems = [funcspec.Diagnostic("increasing", f"value drops from {a} to {b}", (a, b))
                    for a, b in funcspec.check_increasing(spec, box)]
    for d in problems:
        print(d)
    if problems:
        return EXIT_FAIL
    print(f"ok: {spec.kind} spec, audited on [0,{box[0]}]x[0,{box[1]}]")
    return EXIT_OK


def cmd_eval(args) -> int:
    spec = _load_spec(args.spec)
    print(funcspec.eval(spec, _pad(args.input)))
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = _load_spec(args.spec)
    report = synth_mod.synth(spec, stitching=args.stitching)
    if args.output is None:
        from .crnfile import serialize_crn

        sys.stdout.write(serialize_crn(report.crn))
        return EXIT_OK
    out = Path(args.output)
    dump_crn(report.crn, out, header=[f"compiled from {Path(args.spec).name}"])
    sidecar = out.with_suffix(".synth.json")
    sidecar.write_text(report.dumps())
    print(f"wrote {out} ({len(report.crn.species)} species, {len(report.crn.reactions)} reactions)")
    print(f"wrote {sidecar}")
    return EXIT_OK


def _load_checked_crn(path: str):
    crn = load_crn(path)
    problems = validate_crn(crn)
    if problems:
        raise CrnError("; ".join(map(str, problems)))
    return crn


def cmd_simulate(args) -> int:
    crn = _load_checked_crn(args.crn)
    n = args.input[: len(crn.inputs)] if len(crn.inputs) == 1 else _pad(args.input)
    e = verify.simulate(crn, n, args.seed, args.max_steps)
    if args.trace:
        for i, (c, ri) in enumerate(e.steps):
            print(f"{i} {c} {crn.reactions[ri]}")
        print(f"{len(e.steps)} {e.final}")
    print(e.output())
    if not e.quiescent:
        _err(f"step budget of {args.max_steps} exhausted before quiescence")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_verify(args) -> int:
    crn = _load_checked_crn(args.crn)
    spec = _load_spec(args.spec)
    box = _pad(args.box)
    verdicts = verify.sweep(crn, spec, box, args.mode, args.max_configs, args.runs, args.seed,
                            args.max_steps, args.jobs)
    for v in verdicts:
        print(v.to_line())
    counts = {k: sum(v.outcome == k for v in verdicts) for k in (verify.PASS, verify.FAIL, verify.INCONCLUSIVE)}
    oblivious = check_output_oblivious(crn)
    print(f"summary: {counts['PASS']} PASS, {counts['FAIL']} FAIL, {counts['INCONCLUSIVE']} INCONCLUSIVE")
    if oblivious:
        print(f"output-oblivious: no ({oblivious[0]})")
    else:
        print("output-oblivious: yes")
    first_fail = next((v for v in verdicts if v.outcome == verify.FAIL), None)
    if first_fail is not None and first_fail.witness is not None:
        print(f"witness for n={first_fail.input}:")
        for c, ri in first_fail.witness[: args.witness_steps]:
            print(f"  {c}  --{crn.reactions[ri]}-->")
        if len(first_fail.witness) > args.witness_steps:
            print(f"  ... {len(first_fail.witness) - args.witness_steps} more steps")
        print(f"  {first_fail.witness_end}")
    if args.json:
        doc = {"mode": args.mode, "box": list(box), "summary": counts,
               "output_oblivious": not oblivious,
               "verdicts": [v.to_dict(crn) for v in verdicts]}
        Path(args.json).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if counts["FAIL"]:
        return EXIT_FAIL
    if counts["INCONCLUSIVE"]:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oocrn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a spec file")
    p.add_argument("spec")
    p.add_argument("--box", type=_pair, help="audit box a,b (default: derived from the period)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="evaluate a spec at one input")
    p.add_argument("spec")
    p.add_argument("--input", type=_pair, required=True, metavar="A,B")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="compile a spec into a CRN")
    p.add_argument("spec")
    p.add_argument("-o", "--output", help="write the .crn here (plus a .synth.json report)")
    p.add_argument("--stitching", choices=("sync", "async"), default="sync")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="run one random execution")
    p.add_argument("crn")
    p.add_argument("--input", type=_pair, required=True, metavar="A,B")
    p.add_argument("--seed", default="0")
    p.add_argument("--max-steps", type=_nat, default=verify.DEFAULT_MAX_STEPS)
    p.add_argument("--trace", action="store_true", help="print every step")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check that a CRN stably computes a spec on a box")
    p.add_argument("crn")
    p.add_argument("--spec", required=True)
    p.add_argument("--box", type=_pair, required=True, metavar="A,B")
    p.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    p.add_argument("--max-configs", type=_nat, default=verify.DEFAULT_MAX_CONFIGS)
    p.add_argument("--runs", type=_nat, default=verify.DEFAULT_RUNS)
    p.add_argument("--seed", default="0")
    p.add_argument("--max-steps", type=_nat, default=verify.DEFAULT_MAX_STEPS)
    p.add_argument("--jobs", type=_nat, default=1)
    p.add_argument("--json", help="also write the full report as JSON")
    p.add_argument("--witness-steps", type=_nat, default=40, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (funcspec.SpecError, CrnError, synth_mod.SynthError, OSError) as exc:
        _err(str(exc))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
