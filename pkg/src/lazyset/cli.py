"""Command-line front end.

Exit codes: 0 accept / linearizable, 1 reject, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import lazy_machine as lm
from . import simpler_machine as sm
from .axiom_checker import CycleError, check_axioms, detect_cycle, format_cycle, linearize
from .concurrent_set import stress
from .history import (ParseError, dump_full, dump_linear, dump_log, dump_simpler, load,
                      parse_full, parse_linear)
from .linear_spec import NoWitness, check_functional_mode, check_state_mode, derive_gamma, derive_states
from .oracle import TooLarge, brute_force
from .reduct import destutter, project_history, validate_reduct
from .schedule import RandomScheduler, ScriptNotEnabled, ScriptScheduler, parse_mix

EXIT_OK, EXIT_REJECT, EXIT_USAGE = 0, 1, 2


def _keys(text: str) -> list[int]:
    """``0..7`` or ``3,5``."""
    if ".." in text:
        lo, hi = text.split("..")
        keys = list(range(int(lo), int(hi) + 1))
    else:
        keys = [int(k) for k in text.split(",")]
    if not keys or min(keys) < 0:
        raise argparse.ArgumentTypeError(f"bad key range {text!r}")
    return keys


def _mix(text: str) -> tuple[int, int, int]:
    try:
        return parse_mix(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _prob(text: str) -> float:
    p = float(text)
    if not 0 <= p <= 1:
        raise argparse.ArgumentTypeError("probability must lie in [0, 1]")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    if args.script:
        sched = ScriptScheduler(Path(args.script).read_text())
    else:
        sched = RandomScheduler(args.seed, args.procs, args.keys, args.fail_prob, args.mix)
    if args.machine == "simpler":
        H = sm.run(sched, args.steps)
        _emit(dump_simpler(H), args.out)
    else:
        H = lm.run_full(sched, args.steps)
        _emit(dump_full(H), args.out)
    return EXIT_OK


def cmd_stress(args) -> int:
    started = time.perf_counter()
    _, records = stress(args.threads, args.ops, args.keys, args.mix, args.seed, jitter=args.jitter)
    elapsed = time.perf_counter() - started
    _emit(dump_log(records, [f"t{n + 1}" for n in range(args.threads)]), args.out)
    print(f"stress: {args.threads} threads x {args.ops} ops, {len(records)} records in {elapsed:.2f}s",
          file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    text = Path(args.file).read_text()
    loaded = load(text, args.file)
    M = loaded.structure
    print(f"{args.file}: {loaded.machine}, {len(M)} events")
    status = EXIT_OK
    if args.mode in ("axioms", "both"):
        verdict = check_axioms(M)
        print(f"axioms: {verdict}")
        if verdict.witnesses:
            print("  witnesses: " + " ".join(str(M.events.get(w, w)) for w in verdict.witnesses))
        if not verdict:
            status = EXIT_REJECT
        else:
            cycle = detect_cycle(M)
            if cycle:
                print(f"cycle: {format_cycle(cycle)}")
                return EXIT_REJECT
            try:
                lin = linearize(M)
            except CycleError as exc:
                print(f"linearize: {exc}")
                return EXIT_REJECT
            print(f"linearization: {lin.checked}")
            if not args.quiet:
                for line in lin.lines(M):
                    print("  " + line)
            if not lin.checked:
                status = EXIT_REJECT
    if args.mode in ("oracle", "both"):
        try:
            ov = brute_force(M, cap=args.cap)
        except TooLarge as exc:
            print(f"oracle: {exc}")
            return EXIT_USAGE
        print(f"{args.file} {'yes' if ov else 'no'} {ov.explored}")
        if not ov:
            status = EXIT_REJECT
    return status


def cmd_reduct(args) -> int:
    H = parse_full(Path(args.file).read_text(), args.file)
    P = project_history(H)
    verdict = validate_reduct(P)
    if args.log:
        Path(args.log).write_text("\n".join(P.log()) + "\n")
    _emit(dump_simpler(destutter(P)), args.out)
    print(f"reduct: {verdict}", file=sys.stderr)
    return EXIT_OK if verdict else EXIT_REJECT


def cmd_convert(args) -> int:
    lf = parse_linear(Path(args.file).read_text(), args.file)
    if args.direction == "state-gamma":
        verdict = check_state_mode(lf.seq)
        if not verdict:
            print(f"state mode: {verdict}", file=sys.stderr)
            return EXIT_REJECT
        try:
            gamma = derive_gamma(lf.seq)
        except NoWitness as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_REJECT
        _emit(dump_linear(lf.seq, gamma), args.out)
        return EXIT_OK
    if lf.gamma is None:
        print("gamma-state conversion needs G lines", file=sys.stderr)
        return EXIT_USAGE
    verdict = check_functional_mode(lf.seq, lf.gamma)
    if not verdict:
        print(f"functional mode: {verdict}", file=sys.stderr)
        return EXIT_REJECT
    _emit(dump_linear(lf.seq, lf.gamma, derive_states(lf.seq, lf.gamma)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lazyset", description="Lazy Set simulators, checkers and stress harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the Simpler or full state machine")
    p.add_argument("machine", choices=("simpler", "full"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--procs", type=int, default=2)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--keys", type=_keys, default=list(range(8)))
    p.add_argument("--fail-prob", type=_prob, default=0.1)
    p.add_argument("--mix", type=_mix, default=(1, 1, 1))
    p.add_argument("--script", help="file with one step per line: proc kind [key]")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stress", help="drive the threaded set and record its log")
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--ops", type=int, default=10_000)
    p.add_argument("--keys", type=_keys, default=list(range(8)))
    p.add_argument("--mix", type=_mix, default=(3, 3, 4))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", type=_prob, default=0.0,
                   help="probability of a short sleep at each interleaving point")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stress)

    p = sub.add_parser("check", help="check a history or structure file")
    p.add_argument("file")
    p.add_argument("--mode", choices=("axioms", "oracle", "both"), default="axioms")
    p.add_argument("--cap", type=int, default=8)
    p.add_argument("--quiet", action="store_true", help="do not print the witness order")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduct", help="project a full-machine history onto the Simpler machine")
    p.add_argument("file")
    p.add_argument("--out")
    p.add_argument("--log", help="write the per-step classification here")
    p.set_defaults(func=cmd_reduct)

    p = sub.add_parser("convert", help="convert a linear sequence between the two specifications")
    p.add_argument("file")
    p.add_argument("--direction", choices=("state-gamma", "gamma-state"), default="state-gamma")
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for name in ("procs", "threads", "steps", "ops", "cap"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 0:
            print(f"lazyset: --{name} must be non-negative", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except (ParseError, ScriptNotEnabled, OSError, ValueError) as exc:
        print(f"lazyset: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
