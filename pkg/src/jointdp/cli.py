"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 a requested property
fails (or the design problem is infeasible), 3 a size limit is exceeded.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from jointdp import certify, constructions, fileformat, optimize, oracle
from jointdp.errors import Infeasible, MechanismError, SizeLimitExceeded
from jointdp.mechanisms import IndependentMechanism, OutputAlphabet, hamming_graph, path_graph

log = logging.getLogger("jointdp")

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_SIZE = 0, 1, 2, 3
CHECK_TOL = 1e-12


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def real(text: str) -> float:
    """A float, or ``ln(x)`` for the natural log of a positive float."""
    t = text.strip()
    try:
        if t.startswith("ln(") and t.endswith(")"):
            return math.log(float(t[3:-1]))
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def nonneg(text: str) -> float:
    v = real(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def unit(text: str) -> float:
    v = real(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1]: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    p = _Parser(prog="jointdp", description="Certify, optimize and construct finite randomized mechanisms.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="certify a mechanism file")
    c.add_argument("file", type=Path)
    c.add_argument("--epsilon", type=nonneg, required=True)
    c.add_argument("--delta", type=unit, help="require (epsilon, delta)-DP")
    c.add_argument("--iota", type=unit, help="require iota-low influence")
    c.add_argument("--require-nontrivial", action="store_true")
    c.add_argument("--tie-tol", type=nonneg, default=certify.TIE_TOL)
    c.add_argument("-o", "--output", default="-", help="certificate JSON path (default stdout)")

    o = sub.add_parser("optimize", parents=[common], help="solve the balanced binary design problem")
    o.add_argument("--example", choices=["joint", "independent"], required=True)
    o.add_argument("--epsilon", type=nonneg, required=True)
    o.add_argument("--delta", type=unit, default=0.0)
    o.add_argument("--iota", type=unit, help="add an influence ceiling (joint only)")
    o.add_argument("--lex-influence", action="store_true",
                   help="then minimise influence at the optimal utility (joint only)")
    o.add_argument("-o", "--output", default="-", help="mechanism JSON path (default stdout)")
    o.add_argument("--report", default=None, help="certificate JSON path (default stderr)")

    k = sub.add_parser("construct", parents=[common], help="emit one of the explicit mechanisms")
    k.add_argument("which", choices=["tight-half", "low-influence"])
    k.add_argument("--alpha", type=real, help="influence of the low-influence mechanism, in (0, 1)")
    g = k.add_mutually_exclusive_group()
    g.add_argument("--datasets", type=int, default=2, help="path graph on N datasets (default 2)")
    g.add_argument("--hamming", type=int, help="hypercube on bitstrings of length n")
    k.add_argument("--values", type=int, default=2, help="alphabet size (default 2)")
    k.add_argument("-o", "--output", default="-")

    r = sub.add_parser("regions", parents=[common], help="sample the binary DP / LI / nontrivial regions as CSV")
    r.add_argument("kind", choices=["independent", "joint"])
    r.add_argument("--epsilon", type=nonneg, required=True)
    r.add_argument("--delta", type=unit, required=True)
    r.add_argument("--iota", type=unit, required=True)
    r.add_argument("--step", type=real, default=0.01)
    r.add_argument("--outdir", type=Path, default=Path("."))
    r.add_argument("-o", "--output", default=None, help="explicit CSV path ('-' for stdout)")

    t = sub.add_parser("tradeoff", parents=[common], help="utility / privacy / influence curves as CSV")
    t.add_argument("--from", dest="lo", type=real, default=0.51)
    t.add_argument("--to", dest="hi", type=real, default=0.99)
    t.add_argument("--points", type=int, default=49)
    t.add_argument("-o", "--output", default="-")

    a = sub.add_parser("audit", parents=[common], help="run the randomized property suites")
    a.add_argument("--trials", type=int, required=True)
    a.add_argument("--seed", type=int, required=True)
    a.add_argument("-o", "--output", default="-")
    return p


@contextlib.contextmanager
def _open_out(target: Optional[str], fallback: str = "stdout"):
    """``None`` writes to ``sys.<fallback>``, ``-`` to stdout, anything else to a file."""
    if target is None:
        yield getattr(sys, fallback)
    elif target == "-":
        yield sys.stdout
    else:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write_json(obj, target: Optional[str], fallback: str = "stdout") -> None:
    with _open_out(target, fallback) as fh:
        fh.write(json.dumps(obj, indent=1) + "\n")


def cmd_check(args) -> int:
    mech = fileformat.load(args.file)
    rep = certify.certify(mech, args.epsilon, args.tie_tol)
    out = rep.to_dict()
    _write_json(out, args.output)
    ok = True
    if args.delta is not None and rep.delta > args.delta + CHECK_TOL:
        log.info("not (%g, %g)-DP: tightest delta %.12g", args.epsilon, args.delta, rep.delta)
        ok = False
    if args.iota is not None and rep.influence > args.iota + CHECK_TOL:
        log.info("not %g-LI: influence %.12g", args.iota, rep.influence)
        ok = False
    if args.require_nontrivial and not rep.nontrivial:
        log.info("mechanism is trivial")
        ok = False
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_optimize(args) -> int:
    if args.example == "independent":
        if args.iota is not None or args.lex_influence:
            raise _UsageError("--iota and --lex-influence apply to --example joint only")
        x, _, _ = optimize.solve_independent_example(args.epsilon, args.delta)
        graph, alphabet, _, _ = optimize.binary_example_instance()
        mech = IndependentMechanism(graph, alphabet, np.array([[x, 1 - x], [1 - x, x]]))
    else:
        graph, alphabet, utility, balance = optimize.binary_example_instance()
        mech = optimize.optimize_joint(graph, alphabet, utility, args.epsilon, args.delta,
                                       iota=args.iota, balance=balance,
                                       lexicographic_min_influence=args.lex_influence)
    with _open_out(args.output) as fh:
        fh.write(fileformat.dumps(mech))
    _write_json(certify.certify(mech, args.epsilon).to_dict(), args.report, fallback="stderr")
    return EXIT_OK


def cmd_construct(args) -> int:
    graph = hamming_graph(args.hamming) if args.hamming is not None else path_graph(args.datasets)
    alphabet = OutputAlphabet.of_size(args.values)
    if args.which == "tight-half":
        mech = constructions.tight_half_mechanism(graph, alphabet)
    else:
        if args.alpha is None:
            raise _UsageError("low-influence needs --alpha")
        mech = constructions.low_influence_nontrivial(graph, alphabet, args.alpha)
    with _open_out(args.output) as fh:
        fh.write(fileformat.dumps(mech))
    return EXIT_OK


def cmd_regions(args) -> int:
    sampler = (constructions.region_independent_binary if args.kind == "independent"
               else constructions.region_joint_binary)
    region = sampler(args.epsilon, args.delta, args.iota, args.step)
    if args.output is not None:
        with _open_out(args.output) as fh:
            region.write_csv(fh)
    else:
        args.outdir.mkdir(parents=True, exist_ok=True)
        path = region.save(args.outdir)
        log.info("wrote %d points to %s", len(region), path)
        print(path)
    return EXIT_OK


def cmd_tradeoff(args) -> int:
    if args.points < 1:
        raise _UsageError("--points must be positive")
    grid = np.linspace(args.lo, args.hi, args.points) if args.points > 1 else [args.lo]
    rows = optimize.tradeoff_curve(grid)
    with _open_out(args.output) as fh:
        optimize.write_tradeoff_csv(rows, fh)
    return EXIT_OK


def cmd_audit(args) -> int:
    if args.trials < 1:
        raise _UsageError("--trials must be positive")
    rep = oracle.audit_theorems(args.trials, args.seed)
    _write_json(rep.to_dict(), args.output)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


COMMANDS = {
    "check": cmd_check,
    "optimize": cmd_optimize,
    "construct": cmd_construct,
    "regions": cmd_regions,
    "tradeoff": cmd_tradeoff,
    "audit": cmd_audit,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"jointdp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"jointdp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SizeLimitExceeded as exc:
        print(f"jointdp: size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except Infeasible as exc:
        print(f"jointdp: infeasible: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (MechanismError, OSError) as exc:
        print(f"jointdp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
