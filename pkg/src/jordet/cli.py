"""Command-line front end.

Every command prints one report, JSON by default::

    {"schema_version": "1", "command": ..., "inputs": {...}, "result": {...},
     "elapsed_ms": ...}

Input errors print ``{"schema_version", "command", "inputs", "error"}`` instead.
Keys appear in exactly this order and the output is byte-identical for equal
inputs apart from ``elapsed_ms``.

Exit codes: 0 success/determined, 2 input error, 3 negative finding,
4 inconclusive, 5 contradiction with the proven statement.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from typing import Callable

import yaml

from .applications import (
    LinMap,
    PreconditionFailed,
    derivable_space,
    multiplicative_check,
)
from .decision import Strategy, StrategyUnsupported, decide
from .jordan import IndexOutOfRange, SizeMismatch, kernel_of_jordan, sym_dim
from .linalg import CapabilityError, DimensionMismatch, Matrix, Ring, RingRejected, parse_ring
from .replay import CatalogError, resolve_catalog, run_catalog

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NEGATIVE = 3
EXIT_INCONCLUSIVE = 4
EXIT_CONTRADICTION = 5


class InputError(ValueError):
    pass


_UNIT_RE = re.compile(r"^e:\s*(\d+)\s*,\s*(\d+)\s*$")
_SPARSE_RE = re.compile(r"^m:\{(.*)\}$", re.S)
_ENTRY_RE = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*=\s*(\S+)\s*$")


def parse_point(text: str, n: int, ring: Ring) -> Matrix:
    """``e:i,j`` (matrix unit) or ``m:{i,j=c;...}`` (sparse matrix), 1-based."""
    m = Matrix.zeros(ring, n)
    unit = _UNIT_RE.match(text)
    if unit:
        entries = [(int(unit.group(1)), int(unit.group(2)), ring.one)]
    else:
        sparse = _SPARSE_RE.match(text.strip())
        if not sparse:
            raise InputError(f"bad point spec {text!r}; expected e:i,j or m:{{i,j=c;...}}")
        entries = []
        for part in filter(str.strip, sparse.group(1).split(";")):
            e = _ENTRY_RE.match(part)
            if not e:
                raise InputError(f"bad matrix entry {part!r}")
            try:
                c = ring.parse(e.group(3))
            except (ValueError, ZeroDivisionError) as exc:
                raise InputError(str(exc)) from None
            entries.append((int(e.group(1)), int(e.group(2)), c))
    for i, j, c in entries:
        if not (1 <= i <= n and 1 <= j <= n):
            raise InputError(f"index ({i},{j}) outside 1..{n}")
        m[i - 1, j - 1] = ring.add(m[i - 1, j - 1], c)
    return m


def parse_strategy(args) -> Strategy:
    text = args.strategy
    if text == "exhaustive":
        return Strategy.exhaustive(early_exit=not args.no_early_exit, threads=args.threads)
    if text == "random":
        return Strategy("random", seed=args.seed, max_samples=args.max_samples,
                        early_exit=not args.no_early_exit)
    if text.startswith("structured:") and len(text) > len("structured:"):
        return Strategy.structured(text.split(":", 1)[1])
    raise InputError(f"bad strategy {text!r}; expected exhaustive, random or structured:CATALOG")


# ---------------------------------------------------------------------------
# Commands: each returns (exit code, result dict, text lines)
# ---------------------------------------------------------------------------


def _ring_and_n(args) -> tuple[Ring, int]:
    if args.n < 1:
        raise InputError("--n must be positive")
    return parse_ring(args.ring), args.n


def cmd_decide(args):
    ring, n = _ring_and_n(args)
    point = parse_point(args.point, n, ring)
    rep = decide(point, parse_strategy(args))
    code = {"determined": EXIT_OK, "not_determined": EXIT_NEGATIVE}.get(rep.verdict,
                                                                        EXIT_INCONCLUSIVE)
    text = [
        f"verdict: {rep.verdict}",
        f"dim_sym2: {rep.dim_sym2}",
        f"dim_kernel: {rep.dim_kernel}",
        f"dim_span: {rep.dim_span}",
        f"samples_used: {rep.samples_used}",
    ]
    if rep.certificate is not None:
        text.append("certificate: present")
    return code, rep.to_dict(), text


def cmd_replay(args):
    ring, n = _ring_and_n(args)
    catalog = resolve_catalog(args.catalog)
    if catalog.point_kind == "diagonal":
        if args.s is None:
            raise InputError(f"catalog {catalog.name} needs --s")
        point = (args.s,)
    else:
        if args.p is None or args.q is None:
            raise InputError(f"catalog {catalog.name} needs --p and --q")
        point = (args.p, args.q)
    rep = run_catalog(catalog, n, point, ring)
    d = rep.to_dict()
    text = [
        f"success: {str(rep.success).lower()}",
        f"instantiations_checked: {rep.instantiations_checked}",
        f"kernel_phase: {d['kernel_phase']}",
    ]
    if rep.kernel_span_ok is not None:
        text += [
            f"kernel_span_ok: {str(rep.kernel_span_ok).lower()}",
            f"dims: {rep.relation_span_dim}/{rep.kernel_dim}",
        ]
    for f in rep.identity_failures + rep.membership_failures:
        assign = ",".join(f"{k}={v}" for k, v in sorted(f.assignment.items()))
        text.append(f"FAIL {f.step_id} [{assign}] {f.anchor}: {f.detail}")
    return (EXIT_OK if rep.success else EXIT_NEGATIVE), d, text


def cmd_derivable(args):
    ring, n = _ring_and_n(args)
    point = parse_point(args.point, n, ring)
    strategy = parse_strategy(args)
    rep = derivable_space(point, strategy)
    if rep.all_solutions_are_jordan_derivations:
        code = EXIT_OK
    elif strategy.kind == "exhaustive":
        # an uncertified exhaustive run has seen the whole fiber
        code = EXIT_NEGATIVE
    else:
        code = EXIT_INCONCLUSIVE
    d = rep.to_dict()
    if not args.dump_basis:
        d.pop("basis")
    text = [
        f"all_solutions_are_jordan_derivations: "
        f"{str(rep.all_solutions_are_jordan_derivations).lower()}",
        f"constraint_rank: {rep.constraint_rank}",
        f"solution_dim: {rep.solution_dim}",
        f"pairs_used: {rep.pairs_used}",
    ]
    return code, d, text


def _load_map(path: str, ring: Ring) -> LinMap:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = yaml.safe_load(fh)  # JSON is a subset of YAML
    except OSError as exc:
        raise InputError(f"cannot read map file: {exc}") from None
    except yaml.YAMLError as exc:
        raise InputError(f"map file is not JSON/YAML: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("map file must hold an object with n, ring and entries")
    if "ring" in obj and parse_ring(str(obj["ring"])) != ring:
        raise InputError(f"map ring {obj['ring']} differs from --ring {ring.spec}")
    return LinMap.from_dict(obj, ring)


def cmd_multiplicative(args):
    ring, n = _ring_and_n(args)
    point = parse_point(args.point, n, ring)
    phi = _load_map(args.map, ring)
    if phi.n != n:
        raise InputError(f"map acts on M_{phi.n}, not M_{n}")
    rep = multiplicative_check(phi, point, parse_strategy(args))
    if rep.paper_contradiction:
        code = EXIT_CONTRADICTION
    elif rep.outcome == "conclusion_holds":
        code = EXIT_OK
    else:
        code = EXIT_NEGATIVE
    text = [
        f"outcome: {rep.outcome}",
        f"hypothesis_ok: {str(rep.hypothesis_ok).lower()}",
        f"conclusion_ok: {str(rep.conclusion_ok).lower()}",
        f"slices_checked: {rep.slices_checked}",
    ]
    if rep.paper_contradiction:
        text.append("PAPER-CONTRADICTION")
    return code, rep.to_dict(), text


def cmd_kernel(args):
    ring, n = _ring_and_n(args)
    kb = kernel_of_jordan(n, ring)
    d = {"n": n, "ring": ring.spec, "dim_sym2": sym_dim(n), "dim_kernel": kb.dim}
    if args.dump_basis:
        d["basis"] = [[ring.format(x) for x in v] for v in kb.vectors]
    text = [f"dim_sym2: {sym_dim(n)}", f"dim_kernel: {kb.dim}"]
    return EXIT_OK, d, text


# ---------------------------------------------------------------------------
# Parser and driver
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _common(p: argparse.ArgumentParser, point: bool = True, strategy: str | None = None):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ring", default="q", help="q, fp:P or zm:M")
    if point:
        p.add_argument("--point", required=True, help="e:i,j or m:{i,j=c;...}")
    if strategy is not None:
        p.add_argument("--strategy", default=strategy,
                       help="exhaustive, random or structured:CATALOG")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-samples", type=int, default=5000)
        p.add_argument("--no-early-exit", action="store_true")
        p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("json", "text"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jordet", description="Jordan product determined points in M_n.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("decide", help="decide whether a point is Jordan product determined")
    _common(p, strategy="random")

    p = sub.add_parser("replay", help="replay a proof catalog")
    _common(p, point=False)
    p.add_argument("--catalog", required=True, help="t22, t23 or a path")
    p.add_argument("--s", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)

    p = sub.add_parser("derivable", help="maps Jordan-derivable at a point")
    _common(p, strategy="exhaustive")
    p.add_argument("--dump-basis", action="store_true")

    p = sub.add_parser("multiplicative", help="check a map that fixes I")
    _common(p, strategy="exhaustive")
    p.add_argument("--map", required=True, help="map file (n, ring, entries)")

    p = sub.add_parser("kernel", help="kernel of the Jordan product on the symmetric square")
    _common(p, point=False)
    p.add_argument("--dump-basis", action="store_true")
    return parser


COMMANDS: dict[str, Callable] = {
    "decide": cmd_decide,
    "replay": cmd_replay,
    "derivable": cmd_derivable,
    "multiplicative": cmd_multiplicative,
    "kernel": cmd_kernel,
}

_INPUT_ERRORS = (InputError, RingRejected, CapabilityError, DimensionMismatch, SizeMismatch,
                 IndexOutOfRange, CatalogError, StrategyUnsupported, PreconditionFailed,
                 ValueError, ZeroDivisionError)


def _echo(args) -> dict:
    skip = {"command", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _raw_command(argv: list[str]) -> str | None:
    return next((a for a in argv if a in COMMANDS), None)


def run(argv: list[str] | None = None) -> tuple[int, str]:
    """Run a command and return ``(exit code, rendered output)``."""
    argv = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    fmt = "text" if "--format=text" in argv or _flag_value(argv, "--format") == "text" else "json"
    args = None
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise InputError(f"a command is required: {', '.join(COMMANDS)}")
        fmt = args.format
        code, result, text = COMMANDS[args.command](args)
    except _INPUT_ERRORS as exc:
        command = args.command if args is not None else _raw_command(argv)
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "inputs": _echo(args) if args is not None else {"argv": argv},
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        if fmt == "text":
            return EXIT_INPUT, f"error: {exc}"
        return EXIT_INPUT, json.dumps(report)
    elapsed = int((time.perf_counter() - t0) * 1000)
    if fmt == "text":
        lines = [f"command: {args.command}"] + text + [f"elapsed_ms: {elapsed}"]
        return code, "\n".join(lines)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "inputs": _echo(args),
        "result": result,
        "elapsed_ms": elapsed,
    }
    return code, json.dumps(report)


def _flag_value(argv: list[str], flag: str) -> str | None:
    try:
        return argv[argv.index(flag) + 1]
    except (ValueError, IndexError):
        return None


def main(argv: list[str] | None = None) -> int:
    code, out = run(argv)
    print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
