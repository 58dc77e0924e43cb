"""Command-line interface: ``tpwn <command> ...``.

Exit codes: 0 success, 1 validation failure, 2 usage error.  Results go to
stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction
from pathlib import Path

from .chain import DEFAULT_CHAIN_CAP, analyze, build_chain, chain_to_dot
from .errors import TPWNError
from .generate import generate_random_net, parse_range
from .io import dump_net, load_net, load_pert
from .net import parse_rational
from .oracle import SCHEDULERS, enumerate_expected_time, simulate
from .pert import expected_project_duration, reduce_rational, reduce_unit_weights, validate_pert
from .structural import DEFAULT_MARKING_CAP, analyze_structure

_DECIMAL = Context(prec=10, rounding=ROUND_HALF_EVEN)


def to_decimal(q: Fraction) -> str:
    """``q`` rounded half-even to 10 significant digits, in plain notation."""
    d = _DECIMAL.divide(Decimal(q.numerator), Decimal(q.denominator))
    return format(d.normalize(_DECIMAL), "f")


def render_value(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q} (= {to_decimal(q)})"


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_check(args) -> int:
    net = load_net(args.net)
    report = analyze_structure(net, args.max_markings)
    print(report.render())
    return 0 if report.is_tpwn else 1


def cmd_expected_time(args) -> int:
    net = load_net(args.net)
    res = analyze(
        net,
        assume_sound=args.assume_sound,
        max_states=args.max_states,
        max_markings=args.max_markings,
        tie_break=args.tie_break,
    )
    if args.json:
        doc = {
            "expected_time": None if res.is_infinite else str(res.value),
            "decimal": None if res.is_infinite else to_decimal(res.value),
            "infinite": res.is_infinite,
            "witness": res.witness,
            "chain_states": res.chain_states,
            "structure": res.report.as_dict() if res.report else None,
            "timings_ms": {
                "construction": round(res.construction_ms, 3),
                "solving": round(res.solving_ms, 3),
            },
        }
        print(json.dumps(doc, indent=2))
        return 0
    if res.is_infinite:
        print("infinite")
        print(f"unsound: {res.witness}", file=sys.stderr)
        return 0
    print(render_value(res.value))
    print(f"chain states: {res.chain_states}")
    print(f"construction: {res.construction_ms:.3f} ms, solving: {res.solving_ms:.3f} ms")
    return 0


def cmd_chain(args) -> int:
    net = load_net(args.net)
    if not args.assume_sound:
        report = analyze_structure(net, args.max_markings)
        if not report.is_tpwn:
            print(report.render(), file=sys.stderr)
            return 1
    chain = build_chain(net, args.tie_break, args.max_states)
    _write(chain_to_dot(chain), args.dot)
    if args.dot not in (None, "-"):
        print(f"{len(chain)} states written to {args.dot}")
    return 0


def cmd_enumerate(args) -> int:
    net = load_net(args.net)
    res = enumerate_expected_time(net, args.scheduler, parse_rational(args.mass_epsilon), args.depth_cap)
    kind = "exact" if res.exact else "lower bound"
    print(f"{kind}: {render_value(res.value)}")
    print(f"covered mass: {res.covered_mass} (= {to_decimal(res.covered_mass)})")
    if res.truncated_mass:
        print(f"truncated mass: {to_decimal(res.truncated_mass)}")
    if res.stuck_mass:
        print(f"stuck mass: {to_decimal(res.stuck_mass)}")
    print(f"runs: {res.runs_explored}")
    return 0


def cmd_simulate(args) -> int:
    net = load_net(args.net)
    res = simulate(net, args.runs, args.seed, step_cap=args.step_cap)
    print(f"mean: {res.mean:.10g}")
    print(f"std error: {res.std_error:.6g}")
    print(f"runs: {res.runs}")
    if res.failed:
        print(f"{res.failed} runs deadlocked or hit the step cap", file=sys.stderr)
    return 0


def cmd_pert(args) -> int:
    pn = load_pert(args.pert, validate=args.action != "check")
    if args.action == "check":
        problems = validate_pert(pn)
        if problems:
            for p in problems:
                print(p, file=sys.stderr)
            return 1
        print(f"valid: {len(pn.vertices)} vertices, {len(pn.edges)} edges")
        return 0
    if args.action == "expected":
        print(expected_project_duration(pn))
        return 0
    net = reduce_unit_weights(pn) if args.unit_weights else reduce_rational(pn)
    _write(dump_net(net), args.output)
    return 0


def cmd_generate(args) -> int:
    net = generate_random_net(
        args.places, args.seed, parse_range(args.times), parse_range(args.weights)
    )
    _write(dump_net(net), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tpwn", description="Expected time of timed probabilistic workflow nets")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, chain=True):
        p.add_argument("net", help="net JSON file")
        p.add_argument("--max-markings", type=int, default=DEFAULT_MARKING_CAP,
                       help="cap on reachable markings during the structural checks")
        if chain:
            p.add_argument("--max-states", type=int, default=DEFAULT_CHAIN_CAP,
                           help="cap on scheduler chain states")
            p.add_argument("--assume-sound", action="store_true",
                           help="skip the structural checks")
            p.add_argument("--tie-break", choices=("least", "greatest"), default="least")

    p = sub.add_parser("check", help="structural report")
    common(p, chain=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("expected-time", help="exact expected time")
    common(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_expected_time)

    p = sub.add_parser("chain", help="export the scheduler chain")
    common(p)
    p.add_argument("--dot", required=True, help="output DOT file, - for stdout")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("enumerate", help="expected time by run enumeration")
    p.add_argument("net")
    p.add_argument("--mass-epsilon", default="0", help="prune branches below this probability")
    p.add_argument("--scheduler", choices=SCHEDULERS, default="earliest")
    p.add_argument("--depth-cap", type=int, default=10_000)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("simulate", help="Monte Carlo estimate")
    p.add_argument("net")
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--step-cap", type=int, default=10**6)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pert", help="PERT networks")
    p.add_argument("action", choices=("check", "expected", "reduce"))
    p.add_argument("pert", help="PERT JSON file")
    p.add_argument("--unit-weights", action="store_true", help="use the binary unit-weight gadgets")
    p.add_argument("-o", "--output", help="output file for reduce (default stdout)")
    p.set_defaults(func=cmd_pert)

    p = sub.add_parser("generate", help="random sound free-choice net")
    p.add_argument("--places", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--times", default="1:1", help="duration range lo:hi")
    p.add_argument("--weights", default="1:1", help="weight range lo:hi")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TPWNError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
