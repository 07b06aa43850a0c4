"""Command-line interface.

Subcommands: ``gen`` writes a JSONL sample file, ``decide`` runs the rank test
on one, ``search`` recovers ``<u>`` from a source, ``verify-lemmas`` runs the
exhaustive invariant suites and ``grm`` prints minimum weights of small
evaluation codes.  Machine output is JSON on stdout; ``--human`` switches to
plain tables where that makes sense.

Exit codes: 0 success (``decide``: Uniform), 10 AvoidsKernel, 2 bad input or
header mismatch, 3 too few samples, 4 inconsistent descent, 1 a failed
verification suite.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import oracle, verify
from .charsample import KINDS, TILTS, SampleSource, sample
from .decision import Verdict, decide, extract_witness
from .errors import InconsistencyError, InsufficientSamplesError
from .ring import GroupParams, as_fraction
from .search import search

__all__ = ["RunConfig", "main", "build_parser", "read_samples", "write_samples"]

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_INSUFFICIENT = 3
EXIT_INCONSISTENT = 4
EXIT_AVOIDS = 10


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    p: Optional[int] = None
    k: Optional[int] = None
    n: Optional[int] = None
    c: Fraction = Fraction(1)
    seed: int = 0
    samples: Optional[str] = None
    trials: int = 1
    trace: bool = False
    target_error: float = 1 / 3
    jobs: int = 1

    def __post_init__(self):
        if self.c < 1:
            raise InputError("--c must be at least 1")
        if not 0 < self.target_error < 1:
            raise InputError("--target-error must lie in (0, 1)")
        if self.jobs < 1:
            raise InputError("--jobs must be positive")
        if self.trials < 1:
            raise InputError("--trials must be positive")

    def params(self) -> GroupParams:
        if None in (self.p, self.k, self.n):
            raise InputError("--p, --k and --n are required")
        try:
            return GroupParams(self.p, self.k, self.n)
        except ValueError as exc:
            raise InputError(str(exc)) from exc


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _parse_u(text: Optional[str], params: GroupParams) -> tuple:
    if text is None:
        raise InputError("--u is required for this source")
    try:
        u = tuple(int(a) for a in text.split(","))
    except ValueError as exc:
        raise InputError(f"cannot parse --u {text!r}") from exc
    if len(u) != params.n:
        raise InputError(f"--u needs {params.n} comma-separated entries")
    return u


def _source(args, cfg: RunConfig, params: GroupParams) -> SampleSource:
    try:
        if args.source == "uniform":
            return SampleSource.uniform(params, seed=cfg.seed)
        u = _parse_u(args.u, params)
        if args.source == "avoid-kernel":
            return SampleSource.avoid_kernel(params, u, cfg.c, args.tilt, cfg.seed)
        return SampleSource.half_fourier(params, u, seed=cfg.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def write_samples(stream, source: SampleSource, count: int, jobs: int = 1):
    p = source.params
    header = {"p": p.p, "k": p.k, "n": p.n, "source": source.describe(), "seed": source.seed, "count": count}
    stream.write(_dump(header) + "\n")
    for row in sample(source, count, jobs).tolist():
        stream.write(_dump(row) + "\n")


def read_samples(path: str):
    """Return ``(header, rows)`` from a JSONL sample file."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line for line in fh.read().splitlines() if line.strip()]
    except OSError as exc:
        raise InputError(str(exc)) from exc
    if not lines:
        raise InputError(f"{path}: empty sample file")
    try:
        header = json.loads(lines[0])
        rows = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not isinstance(header, dict) or not {"p", "k", "n"} <= header.keys():
        raise InputError(f"{path}: header lacks p, k, n")
    return header, rows


# Subcommands ------------------------------------------------------------------

def cmd_gen(args, cfg: RunConfig) -> int:
    params = cfg.params()
    if args.count < 0:
        raise InputError("--count must be nonnegative")
    source = _source(args, cfg, params)
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_samples(fh, source, args.count, cfg.jobs)
    else:
        write_samples(sys.stdout, source, args.count, cfg.jobs)
    return EXIT_OK


def cmd_decide(args, cfg: RunConfig) -> int:
    header, rows = read_samples(cfg.samples)
    try:
        params = GroupParams(int(header["p"]), int(header["k"]), int(header["n"]))
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad header: {exc}") from exc
    for name in ("p", "k", "n"):
        given = getattr(cfg, name)
        if given is not None and given != getattr(params, name):
            raise InputError(f"header {name}={getattr(params, name)} does not match --{name} {given}")
    if "count" in header and header["count"] != len(rows):
        raise InputError(f"header announces {header['count']} rows, file has {len(rows)}")
    try:
        result = decide(rows, params, cfg.c, cfg.target_error, jobs=cfg.jobs)
    except InsufficientSamplesError as exc:
        print(_dump({"error": "insufficient samples", "required": exc.required, "given": exc.given}))
        return EXIT_INSUFFICIENT
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = result.to_json()
    if args.witness:
        w = extract_witness(result.accumulator, result.basis)
        out["witness"] = None if w is None else str(w)
    if args.human:
        print(f"verdict {out['verdict']}  rank {out['rank']}/{out['delta']}  rows {out['rows_consumed']}")
    else:
        print(_dump(out))
    return EXIT_OK if result.verdict is Verdict.UNIFORM else EXIT_AVOIDS


def cmd_search(args, cfg: RunConfig) -> int:
    params = cfg.params()
    status = EXIT_OK
    for t in range(cfg.trials):
        source = _source(args, cfg, params).with_seed(cfg.seed + t)
        try:
            if args.oracle:
                result = oracle.search_exhaustive(source)
            else:
                c = None if args.c is None else cfg.c
                result = search(source, c, cfg.target_error, jobs=cfg.jobs)
            out = result.to_json(with_trace=cfg.trace)
        except InconsistencyError as exc:
            out = {"result": "Inconsistent", "error": str(exc)}
            status = EXIT_INCONSISTENT
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        if cfg.trials > 1:
            out = {"seed": source.seed, **out}
        if args.human:
            gen = out.get("generator")
            print(f"seed {source.seed}: {out['result']}" + (f" <{','.join(map(str, gen))}>" if gen else ""))
        else:
            print(_dump(out))
    return status


def cmd_verify(args, cfg: RunConfig) -> int:
    only = [s for part in (args.only or []) for s in part.split(",") if s]
    try:
        reports = verify.run_all(only)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc
    if args.human:
        width = max(len(r.name) for r in reports)
        for r in reports:
            line = f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.cases:>6} cases  {r.seconds:7.2f}s  {r.ranges}"
            print(line)
            if r.failure:
                print(f"      {r.failure}")
    else:
        for r in reports:
            print(_dump(r.to_json()))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_grm(args, cfg: RunConfig) -> int:
    if args.p is None:
        raise InputError("--p is required")
    rows = []
    try:
        for m in range(1, args.max_vars + 1):
            for D in range(0, args.max_degree + 1):
                w = oracle.grm_min_weight_brute(args.p, m, D)
                rows.append({
                    "p": args.p, "m": m, "D": D, "min_weight": w,
                    "standard": oracle.grm_standard_weight(args.p, m, D),
                    "bound": args.p ** (m - min(m, -(-D // (args.p - 1)))),
                })
    except (ValueError, RuntimeError) as exc:
        raise InputError(str(exc)) from exc
    if args.human:
        print(" m  D  weight  standard  bound")
        for r in rows:
            print(f"{r['m']:2d} {r['D']:2d}  {r['min_weight']:6d}  {r['standard']:8d}  {r['bound']:5d}")
    else:
        for r in rows:
            print(_dump(r))
    return EXIT_OK


# Parser -----------------------------------------------------------------------

def _add_group(sp, required=False):
    sp.add_argument("--p", type=int, required=required)
    sp.add_argument("--k", type=int, required=required)
    sp.add_argument("--n", type=int, required=required)


def _add_common(sp):
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--human", action="store_true", help="plain-text output")


def _add_source(sp):
    sp.add_argument("--source", choices=KINDS, default="uniform")
    sp.add_argument("--u", help="hidden element, comma separated")
    sp.add_argument("--c", help="tolerance (integer, fraction or decimal; default: the source's own)")
    sp.add_argument("--tilt", choices=TILTS, default="uniform")
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lindiseq", description="Random linear disequations over Z_{p^k}^n")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("gen", help="write a JSONL sample file")
    _add_group(g, required=True)
    _add_source(g)
    _add_common(g)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--out", "-o", help="output path (default stdout)")

    d = sub.add_parser("decide", help="rank test on a sample file")
    d.add_argument("samples", help="JSONL sample file")
    _add_group(d)
    d.add_argument("--c", default="1")
    d.add_argument("--target-error", type=float, default=1 / 3)
    d.add_argument("--witness", action="store_true", help="include a vanishing polynomial")
    _add_common(d)

    s = sub.add_parser("search", help="recover the cyclic group generated by u")
    _add_group(s, required=True)
    _add_source(s)
    s.add_argument("--target-error", type=float, default=1 / 3)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--oracle", action="store_true", help="use the exhaustive baseline")
    s.add_argument("--trace", action="store_true", help="include the descent trace")
    _add_common(s)

    v = sub.add_parser("verify-lemmas", help="run the exhaustive invariant suites")
    v.add_argument("--only", action="append", help=f"suite names ({', '.join(verify.SUITES)})")
    _add_common(v)

    r = sub.add_parser("grm", help="minimum weights of small evaluation codes")
    r.add_argument("--p", type=int)
    r.add_argument("--max-vars", type=int, default=3)
    r.add_argument("--max-degree", type=int, default=3)
    _add_common(r)
    return parser


_COMMANDS = {
    "gen": cmd_gen,
    "decide": cmd_decide,
    "search": cmd_search,
    "verify-lemmas": cmd_verify,
    "grm": cmd_grm,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            subcommand=args.subcommand,
            p=getattr(args, "p", None),
            k=getattr(args, "k", None),
            n=getattr(args, "n", None),
            c=as_fraction(getattr(args, "c", None) or "1"),
            seed=getattr(args, "seed", 0),
            samples=getattr(args, "samples", None),
            trials=getattr(args, "trials", 1),
            trace=getattr(args, "trace", False),
            target_error=getattr(args, "target_error", 1 / 3),
            jobs=args.jobs,
        )
        return _COMMANDS[args.subcommand](args, cfg)
    except (InputError, ValueError, ZeroDivisionError) as exc:
        print(_dump({"error": str(exc)}), file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
