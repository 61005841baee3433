"""Command-line entry point: construction, verification, extraction, and
basis workflows, emitting machine-readable JSON reports.

Reports are byte-stable across runs and thread counts: payloads are exact
rational strings plus fixed-width decimals, dict key order is fixed, and
wall-clock timings are only included when explicitly requested.  The
KSLAB_THREADS environment variable caps parallelism over independent
measure indices; results are independent of it.

Exit codes: 0 = all certified checks pass; 1 = a mathematical check failed
or was undecided; 2 = usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import ks_measure, normal_subseq, rect_sup, schauder, tensor_bounds
from .exactnum import decimal_str, format_rational
from .ks_measure import EXPLICIT_MAX_N, build, support_size, total_variation
from .rect_sup import BRUTE_MAX_N, certify_bound2, sup_rect_bruteforce, sup_rect_fast
from .tensor_bounds import TENSOR_MAX_N, certify_bound3, tensor_sup_exact


def _threads() -> int:
    raw = os.environ.get("KSLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_json(path: str, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# verify


def _verify_one(n: int) -> tuple[dict, float]:
    t0 = time.perf_counter()
    m = build(n)
    tv = total_variation(m)
    supp = support_size(m)
    report = sup_rect_fast(m)
    row = {
        "n": n,
        "total_variation": format_rational(tv),
        "tv_ok": tv == 1,
        "support_size": str(supp),
        "support_ok": supp == n * (1 << n),
        "sup": format_rational(report.sup),
        "sup_decimal": decimal_str(report.sup),
        "lower_ok": report.lower_ok.value,
        "upper_ok": report.upper_ok.value,
        "bound2": certify_bound2(report),
        "brute_sup": None,
        "brute_matches": None,
        "tensor_sup": None,
        "tensor_sup_decimal": None,
        "bound3": None,
        "tensor_ge_rect": None,
    }
    if n <= BRUTE_MAX_N:
        brute = sup_rect_bruteforce(m)
        row["brute_sup"] = format_rational(brute.sup)
        row["brute_matches"] = brute.sup == report.sup
    if n <= TENSOR_MAX_N:
        tsup = tensor_sup_exact(m)
        row["tensor_sup"] = format_rational(tsup)
        row["tensor_sup_decimal"] = decimal_str(tsup)
        row["bound3"] = certify_bound3(n, tsup, rect_sup=report.sup)
        row["tensor_ge_rect"] = tsup >= report.sup
    return row, time.perf_counter() - t0


def _row_failure(row: dict) -> str | None:
    if not row["tv_ok"]:
        return f"total_variation(n={row['n']})"
    if not row["support_ok"]:
        return f"support_size(n={row['n']})"
    if row["bound2"] != "PASS":
        return f"bound2(n={row['n']})={row['bound2']}"
    if row["brute_matches"] is False:
        return f"brute_vs_fast(n={row['n']})"
    if row["bound3"] not in (None, "PASS"):
        return f"bound3(n={row['n']})={row['bound3']}"
    if row["tensor_ge_rect"] is False:
        return f"tensor_ge_rect(n={row['n']})"
    return None


def cmd_verify(args: argparse.Namespace) -> int:
    n_max = args.n_max
    rows_and_times: list[tuple[dict, float]]
    threads = _threads()
    ns = range(1, n_max + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows_and_times = list(pool.map(_verify_one, ns))
    else:
        rows_and_times = [_verify_one(n) for n in ns]

    rows = [r for r, _ in rows_and_times]
    if args.timings:
        for row, dt in rows_and_times:
            row["wall_time_s"] = round(dt, 6)

    failure = next((f for f in map(_row_failure, rows) if f), None)
    doc = {
        "config": {
            "n_max": n_max,
            "brute_max": BRUTE_MAX_N,
            "tensor_max": TENSOR_MAX_N,
            "explicit_max": EXPLICIT_MAX_N,
        },
        "checks": rows,
        "overall": "PASS" if failure is None else "FAIL",
    }
    _write_json(args.out, doc)
    if args.csv:
        _write_verify_csv(args.csv, rows)
    if failure is not None:
        print(f"FAILED check: {failure}", file=sys.stderr)
        return 1
    print(f"verified n=1..{n_max}: overall PASS -> {args.out}")
    return 0


def _write_verify_csv(path: str, rows: list[dict]) -> None:
    fields = [
        "n", "total_variation", "support_size", "sup", "sup_decimal",
        "lower_ok", "upper_ok", "bound2", "brute_sup", "brute_matches",
        "tensor_sup", "bound3", "tensor_ge_rect",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)


# ---------------------------------------------------------------------------
# subseq


def cmd_subseq(args: argparse.Namespace) -> int:
    try:
        family_doc = json.loads(Path(args.family).read_text(encoding="utf-8"))
        family = tensor_bounds.family_from_json(family_doc)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"cannot parse family file: {exc}", file=sys.stderr)
        return 2
    stream = itertools.count(args.stream_start, args.stream_step)
    cert = normal_subseq.extract(stream, args.n)
    try:
        report = normal_subseq.strongly_normal_report(cert, family)
    except ValueError as exc:
        print(f"evaluation failed: {exc}", file=sys.stderr)
        return 1
    _write_json(args.out, report)
    verdict = report["verdict"]
    print(f"subsequence {list(cert.indices)}: verdict {verdict} -> {args.out}")
    return 0 if verdict in ("PASS", "VACUOUS") else 1


# ---------------------------------------------------------------------------
# schauder


def cmd_schauder(args: argparse.Namespace) -> int:
    try:
        gen_text = Path(args.generators).read_text(encoding="utf-8")
        gens = schauder.GeneratorSet.from_jsonl(gen_text)
    except (OSError, ValueError) as exc:
        print(f"cannot parse generators file: {exc}", file=sys.stderr)
        return 2

    targets: list[list] = []
    if args.target:
        try:
            doc = json.loads(Path(args.target).read_text(encoding="utf-8"))
            raw = doc["targets"] if isinstance(doc, dict) else doc
            for entry in raw:
                vec = [schauder.parse_rational(str(v)) for v in entry]
                vec += [0] * max(0, args.horizon - len(vec))
                targets.append(vec)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            print(f"cannot parse target file: {exc}", file=sys.stderr)
            return 2

    density = schauder.density_check(gens, args.n)
    doc = {
        "density": {
            "status": density.status,
            "m": density.m,
            "rank": density.rank,
            "failing": list(density.failing),
            "pivot_generators": list(density.pivot_generators),
        },
        "basis": None,
        "expansions": [],
        "overall": "FAIL",
    }
    if density.status != schauder.DENSE_UP_TO:
        _write_json(args.out, doc)
        print(
            f"density check {density.status}: rank {density.rank} < {args.n}",
            file=sys.stderr,
        )
        return 1

    basis = schauder.build_triangular_basis(gens, args.n, args.horizon)
    doc["basis"] = schauder.basis_to_json(basis)
    all_grids_true = True
    for vec in targets:
        exp = schauder.expand(vec, basis)
        grid = schauder.verify_stabilization(exp, basis, vec)
        all_grids_true = all_grids_true and grid.all_true
        entry = schauder.expansion_to_json(exp)
        entry["target"] = [format_rational(v) for v in exp.target]
        entry["grid_all_true"] = grid.all_true
        doc["expansions"].append(entry)
    doc["overall"] = "PASS" if all_grids_true else "FAIL"
    _write_json(args.out, doc)
    if not all_grids_true:
        print("stabilization grid has false entries", file=sys.stderr)
        return 1
    print(f"basis of length {args.n} on horizon {args.horizon} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# sup


def cmd_sup(args: argparse.Namespace) -> int:
    m = build(args.n)
    report = sup_rect_bruteforce(m) if args.brute else sup_rect_fast(m)
    verdict = certify_bound2(report)
    doc = rect_sup.report_to_json(report)
    doc["bound2"] = verdict
    _write_json(args.out, doc)
    print(f"sup(n={args.n}) = {format_rational(report.sup)} [{verdict}] -> {args.out}")
    return 0 if verdict == "PASS" else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kslab",
        description="Exact construction and certification of sign-cube measures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="full bound-verification sweep over n = 1..n_max")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None, help="also write a flat CSV of the per-n rows")
    p.add_argument(
        "--timings",
        action="store_true",
        help="include wall times per check (breaks byte-stability across runs)",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("subseq", help="extract a summable subsequence and verify a family")
    p.add_argument("--n", type=int, required=True, help="certificate length")
    p.add_argument("--family", required=True, help="JSON file with tensor combinations")
    p.add_argument("--out", required=True)
    p.add_argument("--stream-start", type=int, default=1)
    p.add_argument("--stream-step", type=int, default=1)
    p.set_defaults(func=cmd_subseq)

    p = sub.add_parser("schauder", help="density check and triangular basis construction")
    p.add_argument("--generators", required=True, help="JSONL file, one generator per line")
    p.add_argument("--n", type=int, required=True, help="basis length")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--target", default=None, help="optional JSON file of expansion targets")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_schauder)

    p = sub.add_parser("sup", help="rectangle supremum report for a single index")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--brute", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sup)

    return parser


def _validate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if args.command == "verify" and args.n_max < 1:
        parser.error("--n-max must be >= 1")
    if args.command == "subseq" and args.n < 1:
        parser.error("--n must be >= 1")
    if args.command == "schauder":
        if args.n < 1:
            parser.error("--n must be >= 1")
        if args.horizon < args.n:
            parser.error("--horizon must be >= --n")
    if args.command == "sup":
        if args.n < 1:
            parser.error("--n must be >= 1")
        if args.brute and args.n > BRUTE_MAX_N:
            parser.error(f"--brute is limited to n <= {BRUTE_MAX_N}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
