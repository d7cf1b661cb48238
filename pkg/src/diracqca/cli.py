"""Command-line front end.

    diracqca evolve       --m 0.6 --t 100 --method pathsum [--input s.json]
    diracqca kernel       --m 0.6 --t 2 --method pathsum
    diracqca compare      --m 0.6 --t 128 --methods direct,spectral --tol 1e-9
    diracqca bench        --grid "10,50;0.3,0.6" [--methods direct,spectral]
    diracqca oracle-check --t 8

Exit codes: 0 success, 1 usage or parse error, 2 comparison or oracle
failure, 3 resource guard.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import tracemalloc
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import closedform, oracle, pathsum, spectral
from .core import DomainError, FieldState, MassParameter, delta_state, evolve, make_mass
from .stateio import StateFormatError, evolve_table, fmt, kernel_table, load_state

COMMANDS = ("evolve", "kernel", "compare", "bench", "oracle-check")
METHODS = ("direct", "pathsum", "closedform", "spectral", "brute")

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_GUARD = 0, 1, 2, 3

PREFACTOR_CASES = ((2, 1), (4, 0), (3, 3))


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    m: float = 0.6
    t: int = 10
    method: str = "pathsum"
    methods: tuple = ("direct", "spectral")
    input: Optional[str] = None
    output: Optional[str] = None
    format: str = "csv"
    tol: float = 1e-9
    grid: Optional[str] = None
    workers: Optional[int] = None
    precision: str = "exact"
    prefactor_masses: tuple = (0.3, 0.6)

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not 0.0 <= self.m <= 1.0:
            raise UsageError("--m must lie in [0, 1]")
        if self.t < 0:
            raise UsageError("--t must be non-negative")
        for meth in (self.method, *self.methods):
            if meth not in METHODS:
                raise UsageError(f"unknown method {meth!r}; choose from {', '.join(METHODS)}")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.command == "compare" and len(self.methods) != 2:
            raise UsageError("compare needs exactly two --methods")
        if self.command in ("evolve", "kernel") and self.method == "brute" and self.t > oracle.MAX_T:
            raise oracle.ResourceGuardError(f"method brute requires t <= {oracle.MAX_T}")
        if self.command == "compare" and "brute" in self.methods and self.t > oracle.MAX_T:
            raise oracle.ResourceGuardError(f"method brute requires t <= {oracle.MAX_T}")


def kernel_by(method: str, t: int, mass: MassParameter, workers=None, precision="exact") -> pathsum.PropagatorKernel:
    if method == "pathsum":
        return pathsum.kernel(t, mass, workers=workers)
    if method == "closedform":
        return closedform.kernel_closedform(t, mass, precision=precision)
    if method == "brute":
        return oracle.kernel_bruteforce(t, mass, workers=workers)
    # read off columns of A^t from evolved basis states
    entries = np.zeros((2 * t + 1, 2, 2), dtype=complex)
    for b in (0, 1):
        delta = delta_state(0, *((1.0, 0.0) if b == 0 else (0.0, 1.0)))
        out = evolve(delta, mass, t) if method == "direct" else spectral.evolve_spectral(delta, mass, t)
        entries[:, :, b] = out.window(-t, t + 1)
    return pathsum.PropagatorKernel(t, entries)


def evolve_by(method: str, state: FieldState, mass: MassParameter, t: int,
              workers=None, precision="exact") -> FieldState:
    if method == "direct":
        return evolve(state, mass, t)
    if method == "spectral":
        return spectral.evolve_spectral(state, mass, t)
    return pathsum.convolve(state, kernel_by(method, t, mass, workers, precision))


def _cone(state: FieldState, t: int) -> tuple[int, int]:
    return state.offset - t, state.stop + t


def _initial(cfg: RunConfig) -> FieldState:
    return load_state(cfg.input) if cfg.input else delta_state(0)


def _emit(text: str, cfg: RunConfig):
    if cfg.output and cfg.output != "-":
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _meta(cfg: RunConfig, **extra) -> dict:
    out = {"command": cfg.command, "m": cfg.m, "t": cfg.t}
    out.update(extra)
    return out


def cmd_evolve(cfg: RunConfig) -> int:
    mass = make_mass(cfg.m)
    state = _initial(cfg)
    out = evolve_by(cfg.method, state, mass, cfg.t, cfg.workers, cfg.precision)
    start, stop = _cone(state, cfg.t)
    _emit(evolve_table(out, start, stop, cfg.format, _meta(cfg, method=cfg.method)), cfg)
    return EXIT_OK


def cmd_kernel(cfg: RunConfig) -> int:
    mass = make_mass(cfg.m)
    k = kernel_by(cfg.method, cfg.t, mass, cfg.workers, cfg.precision)
    _emit(kernel_table(k, cfg.format, _meta(cfg, method=cfg.method)), cfg)
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    mass = make_mass(cfg.m)
    state = _initial(cfg)
    start, stop = _cone(state, cfg.t)
    a, b = (evolve_by(meth, state, mass, cfg.t, cfg.workers, cfg.precision).window(start, stop)
            for meth in cfg.methods)
    diff = float(np.max(np.abs(a - b))) if a.size else 0.0
    ok = diff <= cfg.tol
    if cfg.format == "json":
        text = json.dumps(_meta(cfg, methods=list(cfg.methods), max_abs_diff=diff, tol=cfg.tol, ok=ok)) + "\n"
    else:
        text = ("method_a,method_b,t,m,max_abs_diff,tol,ok\n"
                f"{cfg.methods[0]},{cfg.methods[1]},{cfg.t},{fmt(cfg.m)},{fmt(diff)},{fmt(cfg.tol)},{int(ok)}\n")
    _emit(text, cfg)
    return EXIT_OK if ok else EXIT_FAIL


def parse_grid(grid: str) -> tuple[list, list]:
    try:
        ts, ms = grid.split(";")
        return [int(v) for v in ts.split(",") if v.strip()], [float(v) for v in ms.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--grid must look like 't1,t2;m1,m2', got {grid!r}") from exc


def cmd_bench(cfg: RunConfig) -> int:
    ts, ms = parse_grid(cfg.grid or f"{cfg.t};{cfg.m}")
    state = _initial(cfg)
    rows = []
    for t in ts:
        for m in ms:
            mass = make_mass(m)
            for meth in cfg.methods:
                if meth == "brute" and t > oracle.MAX_T:
                    continue
                tracemalloc.start()
                t0 = time.perf_counter()
                evolve_by(meth, state, mass, t, cfg.workers, cfg.precision)
                elapsed = time.perf_counter() - t0
                _, peak = tracemalloc.get_traced_memory()
                tracemalloc.stop()
                rows.append((meth, t, m, elapsed, peak))
    if cfg.format == "json":
        text = json.dumps({"command": "bench", "runs": [
            {"method": meth, "t": t, "m": m, "seconds": s, "peak_bytes": p} for meth, t, m, s, p in rows]}) + "\n"
    else:
        text = "method,t,m,seconds,peak_bytes\n" + "".join(
            f"{meth},{t},{fmt(m)},{s:.6f},{p}\n" for meth, t, m, s, p in rows)
    _emit(text, cfg)
    return EXIT_OK


def oracle_report(t_max: int, masses=(0.3, 0.6)) -> dict:
    """Structure check and coefficient recount for ``t = 0..t_max`` plus the prefactor report."""
    if t_max > oracle.MAX_T:
        raise oracle.ResourceGuardError(f"oracle-check requires t <= {oracle.MAX_T}")
    per_t = []
    failures = 0
    for t in range(t_max + 1):
        rep = oracle.structure_check(t)
        mismatches = oracle.coefficient_recount(t, rep)
        laws = {}
        for word, law in rep.violations:
            laws.setdefault(law, []).append(word)
        failures += len(rep.violations) + len(mismatches)
        per_t.append({
            "t": t, "words": rep.words, "nonzero": rep.nonzero,
            "violations": {law: {"count": len(words), "examples": words[:5]}
                           for law, words in sorted(laws.items())},
            "coefficient_mismatches": [list(mm) for mm in mismatches],
        })
    prefactors = [closedform.reconcile_paper_prefactors(t, d, make_mass(m)).as_dict()
                  for t, d in PREFACTOR_CASES for m in masses]
    return {"command": "oracle-check", "t_max": t_max, "structure": per_t,
            "prefactor_reconciliation": prefactors, "failures": failures}


def cmd_oracle_check(cfg: RunConfig) -> int:
    report = oracle_report(cfg.t, cfg.prefactor_masses)
    if cfg.format == "csv":
        lines = ["t,words,nonzero,law,violations"]
        for row in report["structure"]:
            laws = row["violations"] or {"none": {"count": 0}}
            for law, info in laws.items():
                lines.append(f"{row['t']},{row['words']},{row['nonzero']},{law},{info['count']}")
        lines.append("")
        lines.append("t,d,m,channel,verdict,printed_re,printed_im,normative_re,normative_im")
        for rec in report["prefactor_reconciliation"]:
            for ch in rec["channels"]:
                pr = ch["printed"] or [float("nan")] * 2
                nv = ch["normative"]
                lines.append(f"{rec['t']},{rec['d']},{fmt(rec['m'])},{ch['channel']},{ch['verdict']},"
                             f"{fmt(pr[0])},{fmt(pr[1])},{fmt(nv[0])},{fmt(nv[1])}")
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(report, indent=1) + "\n"
    _emit(text, cfg)
    return EXIT_OK if report["failures"] == 0 else EXIT_FAIL


HANDLERS = {
    "evolve": cmd_evolve, "kernel": cmd_kernel, "compare": cmd_compare,
    "bench": cmd_bench, "oracle-check": cmd_oracle_check,
}


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg)
    except oracle.ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, StateFormatError, DomainError, closedform.PrecisionLossError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="diracqca", description="One-dimensional Dirac quantum cellular automaton.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--m", type=float, default=0.6, help="mass parameter in [0, 1]")
    p.add_argument("--t", type=int, default=10, help="number of steps (oracle-check: maximum t)")
    p.add_argument("--method", default="pathsum", help="|".join(METHODS))
    p.add_argument("--methods", default=None,
                   help="comma-separated methods (compare: exactly two; bench: any)")
    p.add_argument("--input", help="initial state JSON (default: R-mode delta at x=0)")
    p.add_argument("--output", help="output file (default stdout)")
    p.add_argument("--format", default=None, choices=("csv", "json"))
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--grid", help='bench grid "t1,t2,..;m1,m2,.."')
    p.add_argument("--workers", type=int, default=None, help="worker processes for kernel evaluation")
    p.add_argument("--precision", default="exact", choices=("exact", "mp", "double"),
                   help="closed-form arithmetic")
    p.add_argument("--prefactor-masses", default="0.3,0.6",
                   help="masses for the prefactor reconciliation (oracle-check)")
    return p


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    if args.methods:
        methods = tuple(s.strip() for s in args.methods.split(",") if s.strip())
    elif args.command == "bench":
        methods = ("direct", "pathsum", "closedform", "spectral")
    else:
        methods = ("direct", "spectral")
    fmt_name = args.format or ("json" if args.command == "oracle-check" else "csv")
    try:
        masses = tuple(float(v) for v in args.prefactor_masses.split(","))
    except ValueError as exc:
        raise UsageError(f"bad --prefactor-masses {args.prefactor_masses!r}") from exc
    return RunConfig(command=args.command, m=args.m, t=args.t, method=args.method, methods=methods,
                     input=args.input, output=args.output, format=fmt_name, tol=args.tol,
                     grid=args.grid, workers=args.workers, precision=args.precision,
                     prefactor_masses=masses)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
