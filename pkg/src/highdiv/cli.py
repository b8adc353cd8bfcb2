"""Command-line entry point: sample, coverage, verify, bench."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Any, Iterable, TextIO

from .ccss import SearchParams
from .coverage import CoverageAccumulator
from .errors import HighDivError, UnsatFormulaError
from .sampler import Problem, RunConfig, highdiv_sample, highdiv_sample_parallel, verify_sample
from .smtlib import ParseError, Ast, format_int, parse_file

EXIT_OK, EXIT_INPUT, EXIT_UNSAT = 0, 1, 2


# ---------------------------------------------------------------------------
# sample files


def dump_sample(sample: dict[str, Any]) -> str:
    out = {k: (v if isinstance(v, bool) else str(v)) for k, v in sample.items()}
    return json.dumps(out, separators=(", ", ": "))


def load_sample(line: str, ast: Ast | None = None) -> dict[str, Any]:
    raw = json.loads(line)
    ints = set(ast.int_vars) if ast is not None else None
    out: dict[str, Any] = {}
    for k, v in raw.items():
        if isinstance(v, bool):
            out[k] = v
        elif isinstance(v, (int, str)) and (ints is None or k in ints):
            out[k] = int(v)
        elif isinstance(v, str) and v in ("true", "false"):
            out[k] = v == "true"
        else:
            raise ValueError(f"bad value for {k!r}: {v!r}")
    return out


def read_samples(path: str | Path, ast: Ast | None = None) -> list[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        return [load_sample(line, ast) for line in fh if line.strip()]


def write_samples(samples: Iterable[dict[str, Any]], fh: TextIO, fmt: str, ast: Ast) -> None:
    if fmt == "jsonl":
        for s in samples:
            fh.write(dump_sample(s) + "\n")
        return
    for s in samples:
        fh.write("(model\n")
        for name in ast.int_vars:
            fh.write(f"  (define-fun {name} () Int {format_int(s[name])})\n")
        for name in ast.bool_vars:
            fh.write(f"  (define-fun {name} () Bool {'true' if s[name] else 'false'})\n")
        fh.write(")\n")


# ---------------------------------------------------------------------------
# commands


def _load(path: str) -> Problem:
    return Problem.from_ast(parse_file(path))


def _report_parse_error(path: str, exc: ParseError) -> int:
    print(f"{path}:{exc.line}:{exc.column}: error: {exc.diagnostic.message}", file=sys.stderr)
    return EXIT_INPUT


def _config(args) -> RunConfig:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("HIGHDIV_SEED", "0"))
    search = SearchParams(lam=args.lam, max_steps=args.max_steps, window=args.window, move=args.move)
    return RunConfig(
        k=args.samples,
        time_limit=args.time_limit,
        seed=seed,
        fix_probability=args.fix_prob,
        search=search,
        iteration_budget=args.deterministic_budget,
    )


def cmd_sample(args) -> int:
    try:
        problem = _load(args.input)
    except ParseError as exc:
        return _report_parse_error(args.input, exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _config(args)
    start = time.monotonic()
    try:
        if args.workers > 1:
            samples = highdiv_sample_parallel(problem, cfg, args.workers)
        else:
            samples = highdiv_sample(problem, cfg)
    except UnsatFormulaError:
        print("unsat")
        return EXIT_UNSAT
    elapsed = time.monotonic() - start
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_samples(samples, fh, args.format, problem.ast)
    else:
        write_samples(samples, sys.stdout, args.format, problem.ast)
    print(f"{len(samples)} samples in {elapsed:.2f}s", file=sys.stderr)
    return EXIT_OK


def _verified(problem: Problem, path: str) -> tuple[list[dict], int]:
    good, bad = [], 0
    for s in read_samples(path, problem.ast):
        if verify_sample(s, problem.ast):
            good.append(s)
        else:
            bad += 1
    return good, bad


def cmd_coverage(args) -> int:
    try:
        problem = _load(args.input)
        good, bad = _verified(problem, args.samples_file)
    except ParseError as exc:
        return _report_parse_error(args.input, exc)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    acc = CoverageAccumulator(problem.ast)
    for s in good:
        acc.accumulate(s)
    report = acc.report(per_node=args.per_node)
    report["rejected"] = bad
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        problem = _load(args.input)
        good, bad = _verified(problem, args.samples_file)
    except ParseError as exc:
        return _report_parse_error(args.input, exc)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"passed {len(good)} failed {bad}")
    return EXIT_OK if bad == 0 else EXIT_INPUT


def bench_instance(path: str, cfg: RunConfig) -> dict[str, Any]:
    row: dict[str, Any] = {"file": path, "samples": 0, "coverage": 0.0, "seconds": 0.0}
    start = time.monotonic()
    try:
        problem = _load(path)
        samples = highdiv_sample(problem, cfg)
        acc = CoverageAccumulator(problem.ast)
        for s in samples:
            acc.accumulate(s)
        row.update(samples=len(samples), coverage=acc.coverage(), status="ok")
    except UnsatFormulaError:
        row["status"] = "unsat"
    except (ParseError, HighDivError, OSError) as exc:
        row["status"] = f"error: {exc}"
    row["seconds"] = round(time.monotonic() - start, 3)
    return row


def cmd_bench(args) -> int:
    root = Path(args.directory)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return EXIT_INPUT
    files = sorted(str(p) for p in root.rglob("*.smt2"))
    cfg = _config(args)
    if args.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(bench_instance, files, [cfg] * len(files)))
    else:
        rows = [bench_instance(f, cfg) for f in files]
    ok = [r for r in rows if r["status"] == "ok"]
    summary = {
        "instances": len(rows),
        "mean_coverage": sum(r["coverage"] for r in ok) / len(ok) if ok else 0.0,
        "mean_samples": sum(r["samples"] for r in ok) / len(ok) if ok else 0.0,
        "mean_seconds": sum(r["seconds"] for r in rows) / len(rows) if rows else 0.0,
    }
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["file", "samples", "coverage", "seconds", "status"])
            writer.writeheader()
            writer.writerows(rows)
        with open(out.with_suffix(".json"), "w", encoding="utf-8") as fh:
            json.dump({"rows": rows, "summary": summary}, fh, indent=2)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps(summary))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _sampling_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", "-k", type=int, default=100)
    p.add_argument("--time-limit", type=float, default=900.0, help="wall-clock seconds")
    p.add_argument("--seed", type=int, default=None, help="defaults to $HIGHDIV_SEED or 0")
    p.add_argument("--lambda", dest="lam", type=int, default=50, help="high-frequency threshold")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--fix-prob", type=float, default=0.5)
    p.add_argument("--window", type=int, default=1000)
    p.add_argument("--move", choices=["bam", "cm"], default="bam")
    p.add_argument("--deterministic-budget", type=int, default=None, metavar="N",
                   help="stop after N iterations instead of using the clock")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="highdiv", description="Diverse model sampling for QF_LIA formulas.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw distinct models")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=["jsonl", "smt2"], default="jsonl")
    _sampling_flags(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("coverage", help="bit coverage of a sample file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--samples", dest="samples_file", required=True)
    p.add_argument("--per-node", action="store_true")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("verify", help="check every sample against the formula")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--samples", dest="samples_file", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="sample every .smt2 file under a directory")
    p.add_argument("directory")
    p.add_argument("--out", default="bench_report")
    _sampling_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
