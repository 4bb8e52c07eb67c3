"""Command line entry point.

Exit codes: 0 all identities verified, 1 verification failure, 2 usage or
parse error, 3 engine error.
"""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import nullcontext

from .algebra import counting_sums
from .calculus import directional_derivative, frechet_operator, lie_bracket
from .dsl import expr_to_data, parse, print_canonical, print_latex
from .errors import DSLSyntaxError, EngineError, SchemaError, UnknownBuiltin
from .oracle import ZeroTestConfig, default_seed, zero_test
from .store import dump_hierarchy
from .symmetries import (
    builtin,
    hierarchy,
    is_master_symmetry,
    is_symmetry,
    nilpotency_verify,
    sl2_verify,
    time_symmetry,
    verify_time_symmetry,
    weight_verify,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_ENGINE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--timing", action="store_true", help="include elapsed time in --json output")
    p.add_argument("--seed", type=int, default=None, help="oracle seed (default: $DDKP_SEED or built-in)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--width", type=int, default=6, help="support width of random states")
    p.add_argument("--xdeg", type=int, default=4, help="max x-degree of random states")
    p.add_argument(
        "--counting",
        action="store_true",
        help="admit Dinv of u-free terms (realized as the counting function n - n0)",
    )
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="ddkp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("normalize", parents=[common], help="print the canonical form")
    p.add_argument("expr")
    p = sub.add_parser("latex", parents=[common], help="print LaTeX")
    p.add_argument("expr")
    p = sub.add_parser("bracket", parents=[common], help="Lie bracket [F, G]")
    p.add_argument("f")
    p.add_argument("g")
    p = sub.add_parser("frechet", parents=[common], help="Frechet derivative of F")
    p.add_argument("f")
    p.add_argument("--direction", default=None, help="apply F_* to this expression")

    p = sub.add_parser("verify", help="theorem-level checks")
    vsub = p.add_subparsers(dest="what", required=True, parser_class=_Parser)
    v = vsub.add_parser("symmetry", parents=[common])
    v.add_argument("generator", nargs="?", default="G3")
    v.add_argument("--equation", default="K")
    v = vsub.add_parser("master", parents=[common])
    v.add_argument("generator", nargs="?", default="W")
    v.add_argument("--equation", default="K")
    v.add_argument("--expected", default=None, help="expected value of [W,K] (default -2*G3 for the builtins)")
    vsub.add_parser("sl2", parents=[common])
    v = vsub.add_parser("weights", parents=[common])
    v.add_argument("--m", type=int, action="append", default=None)
    v = vsub.add_parser("nilpotent", parents=[common])
    v.add_argument("--m", type=int, required=True)
    v.add_argument("--l", type=int, default=None, help="default: every l in 0..m+2")

    p = sub.add_parser("hierarchy", parents=[common], help="flows generated by the master symmetry")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--orientation", choices=("left", "right"), default="left")

    p = sub.add_parser("timesym", parents=[common], help="time dependent symmetry exp(-t ad_K) G0")
    p.add_argument("--generator", required=True)
    p.add_argument("--cap", type=int, default=16)

    p = sub.add_parser("oracle", help="oracle utilities")
    osub = p.add_subparsers(dest="what", required=True, parser_class=_Parser)
    z = osub.add_parser("zero", parents=[common])
    z.add_argument("expr")
    return parser


def _config(args) -> ZeroTestConfig:
    return ZeroTestConfig(
        trials=args.trials,
        support_width=args.width,
        xdeg_max=args.xdeg,
        seed=default_seed() if args.seed is None else args.seed,
    )


def _emit(args, data: dict, text: str) -> None:
    if args.json:
        print(json.dumps(data, sort_keys=True, indent=1))
    else:
        print(text)


def _emit_reports(args, reports) -> int:
    ok = all(r.passed for r in reports)
    data = {"passed": ok, "reports": [r.to_data(timing=args.timing) for r in reports]}
    _emit(args, data, "\n".join(r.describe() for r in reports))
    return EXIT_OK if ok else EXIT_FAILED


def _run(args) -> int:
    cfg = _config(args)
    cmd = args.command
    if cmd == "normalize":
        e = parse(args.expr)
        _emit(args, {"canonical": print_canonical(e), "expr": expr_to_data(e)}, print_canonical(e))
        return EXIT_OK
    if cmd == "latex":
        e = parse(args.expr)
        _emit(args, {"latex": print_latex(e)}, print_latex(e))
        return EXIT_OK
    if cmd == "bracket":
        e = lie_bracket(parse(args.f), parse(args.g))
        _emit(args, {"canonical": print_canonical(e), "terms": len(e)}, print_canonical(e))
        return EXIT_OK
    if cmd == "frechet":
        f = parse(args.f)
        op = frechet_operator(f)
        lines = [f"({print_canonical(c)}) * {w}" for c, w in op] or ["0"]
        data = {"operator": [[print_canonical(c), str(w)] for c, w in op]}
        if args.direction is not None:
            applied = directional_derivative(f, parse(args.direction))
            lines.append(f"applied: {print_canonical(applied)}")
            data["applied"] = print_canonical(applied)
        _emit(args, data, "\n".join(lines))
        return EXIT_OK
    if cmd == "verify":
        what = args.what
        if what == "symmetry":
            return _emit_reports(args, [is_symmetry(parse(args.equation), parse(args.generator), cfg)])
        if what == "master":
            k, w = parse(args.equation), parse(args.generator)
            if args.expected is not None:
                expected = parse(args.expected)
            elif k == builtin("K") and w == builtin("W"):
                expected = builtin("G3").scale(-2)
            else:
                expected = None
            return _emit_reports(args, [is_master_symmetry(k, w, cfg, expected)])
        if what == "sl2":
            return _emit_reports(args, [sl2_verify()])
        if what == "weights":
            ms = args.m if args.m is not None else [0, 1, 2]
            return _emit_reports(args, [weight_verify(m, cfg) for m in ms])
        if what == "nilpotent":
            ls = [args.l] if args.l is not None else list(range(args.m + 3))
            for l in ls:
                if args.m < 0 or not 0 <= l <= args.m + 2:
                    print(f"ddkp: need m >= 0 and 0 <= l <= m+2 (got m={args.m}, l={l})", file=sys.stderr)
                    return EXIT_USAGE
            return _emit_reports(args, [nilpotency_verify(args.m, l, cfg) for l in ls])
    if cmd == "hierarchy":
        if args.depth < 1:
            print("ddkp: --depth must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        h = hierarchy(args.depth, cfg, orientation=args.orientation)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(dump_hierarchy(h, cfg))
        data = h.report.to_data(timing=args.timing)
        data["members"] = [print_canonical(m) for m in h.members]
        text = "\n".join(
            [h.report.describe()] + [f"H{i} = {print_canonical(m)}" for i, m in enumerate(h.members, 1)]
        )
        _emit(args, data, text)
        return EXIT_OK if h.report.passed else EXIT_FAILED
    if cmd == "timesym":
        p = time_symmetry(parse(args.generator), args.cap, cfg)
        report = verify_time_symmetry(p, cfg)
        data = {"polynomial": p.to_data(), "latex": print_latex(p), "report": report.to_data(args.timing)}
        text = f"G(t) = {print_latex(p)}\n{report.describe()}"
        _emit(args, data, text)
        return EXIT_OK if report.passed else EXIT_FAILED
    if cmd == "oracle":
        e = parse(args.expr)
        verdict = zero_test(e, cfg)
        data = {"verdict": verdict.to_data(), "config": cfg.to_data(), "terms": len(e)}
        text = f"{verdict.kind} ({verdict.evaluations} evaluations, seed {cfg.seed})"
        if verdict.witness:
            w = verdict.witness
            text += f"\nwitness: trial {w['trial']}, n={w['n']}, x={w['x']}, value {w['value']}"
        _emit(args, data, text)
        return EXIT_OK if verdict.is_zero else EXIT_FAILED
    raise AssertionError(cmd)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with counting_sums() if args.counting else nullcontext():
            return _run(args)
    except (DSLSyntaxError, UnknownBuiltin, SchemaError) as exc:
        print(f"ddkp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"ddkp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EngineError as exc:
        print(f"ddkp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
