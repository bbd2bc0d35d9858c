"""Command-line front end.

    recon ecme|iht|dore --matrix H.csv --y y.csv --r K [--tol --max-iter --out --out-signal]
    recon adore --matrix H.csv --y y.csv [--resolution L ...]
    recon analyze --matrix H.csv --r-max K [--exact|--sampled] [--out cert.json]
    recon phantom --side 64 --lines 22 --method dore [--r K] [--out report.json]
    recon bench --config bench.cfg [--out-csv ...] [--out-json ...]

Exit codes: 0 success, 2 input error, 3 size-guard error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dataio import (
    load_matrix_csv,
    load_vector_csv,
    save_json,
    save_vector_csv,
)
from .dore import dore_run
from .errors import InputError, SizeGuardError
from .experiments import (
    CSV_HEADER,
    BenchConfig,
    benchmark_sweep,
    parse_bench_config,
    phantom_problem,
    psnr,
    report_csv_row,
)
from .matrix_analysis import certify, min_ssq_sampled, ric_sampled
from .model_selection import adore_run
from .operators import DenseOperator, HaarBasis
from .recon import StoppingRule, ecme_run, iht_run, minimum_norm_estimate


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recon",
        description="Sparse signal reconstruction by hard thresholding, "
                    "with exact sensing-matrix analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("ecme", "iht", "dore", "adore"):
        cmd = sub.add_parser(name, help=f"run the {name} solver")
        cmd.add_argument("--matrix", required=True, help="sensing matrix CSV")
        cmd.add_argument("--y", required=True, help="measurement vector CSV")
        if name == "adore":
            cmd.add_argument("--resolution", type=int, default=1,
                             help="golden-section resolution L (default 1)")
        else:
            cmd.add_argument("--r", type=int, required=True, help="sparsity level")
        cmd.add_argument("--tol", type=float, default=1e-14)
        cmd.add_argument("--max-iter", type=int, default=50_000)
        cmd.add_argument("--out", help="write the result JSON here")
        cmd.add_argument("--out-signal", help="write the signal estimate CSV here")

    cmd = sub.add_parser("analyze", help="exact matrix measures and certificate")
    cmd.add_argument("--matrix", required=True)
    cmd.add_argument("--r-max", type=int, required=True)
    mode = cmd.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--sampled", action="store_true",
                      help="sampled non-exact bounds instead of a certificate")
    cmd.add_argument("--samples", type=int, default=10_000)
    cmd.add_argument("--guard", type=int, default=None,
                     help="override the enumeration guard (exact mode)")
    cmd.add_argument("--out", help="write the certificate JSON here")

    cmd = sub.add_parser("phantom", help="desk-scale tomographic reconstruction")
    cmd.add_argument("--side", type=int, default=64)
    cmd.add_argument("--lines", type=int, default=22)
    cmd.add_argument("--method", choices=("ecme", "iht", "dore", "adore", "mn"),
                     default="dore")
    cmd.add_argument("--r", type=int, default=None,
                     help="sparsity level (default: true support size)")
    cmd.add_argument("--tol", type=float, default=1e-14)
    cmd.add_argument("--max-iter", type=int, default=50_000)
    cmd.add_argument("--resolution", type=int, default=64,
                     help="golden-section resolution for adore")
    cmd.add_argument("--out", help="write the report JSON here")

    cmd = sub.add_parser("bench", help="benchmark sweep over sampling densities")
    cmd.add_argument("--config", required=True, help="key=value config file")
    cmd.add_argument("--out-csv", help="write report rows CSV here")
    cmd.add_argument("--out-json", help="write report summary JSON here")
    return parser


def _cmd_solver(args) -> int:
    op = DenseOperator(load_matrix_csv(args.matrix))
    y = load_vector_csv(args.y)
    stop = StoppingRule(tol=args.tol, max_iter=args.max_iter)
    if args.command == "adore":
        auto = adore_run(op, y, resolution=args.resolution, stop=stop)
        payload = auto.to_json_dict()
        result = auto.final
        print(f"adore: selected r={auto.r_selected} after {auto.dore_runs} "
              f"solver runs; final sigma2={result.estimate.sigma2:.6g}")
    else:
        runner = {"ecme": ecme_run, "iht": iht_run, "dore": dore_run}[args.command]
        result = runner(op, y, args.r, stop=stop)
        payload = result.to_json_dict()
        print(f"{args.command}: iterations={result.iterations} "
              f"converged={result.converged} sigma2={result.estimate.sigma2:.6g}")
    if args.out:
        save_json(args.out, payload)
    if args.out_signal:
        save_vector_csv(args.out_signal, result.estimate.s)
    return 0


def _cmd_analyze(args) -> int:
    matrix = load_matrix_csv(args.matrix)
    if args.sampled:
        per_r = []
        for r in range(1, args.r_max + 1):
            rho, rho_support = min_ssq_sampled(matrix, r, args.samples)
            gamma, gamma_support = ric_sampled(matrix, r, args.samples)
            per_r.append({
                "r": r,
                "rho_min_upper_bound": rho,
                "rho_support": list(rho_support),
                "gamma_lower_bound": gamma,
                "gamma_support": list(gamma_support),
            })
        payload = {
            "mode": "sampled",
            "exact": False,
            "note": "sampled supports only: rho values upper-bound the true "
                    "minimum, gamma values lower-bound the true constant",
            "per_r": per_r,
        }
        print(f"sampled bounds for r=1..{args.r_max} "
              f"({args.samples} supports per level)")
    else:
        if args.guard is not None:
            cert = certify(matrix, args.r_max, guard=args.guard)
        else:
            cert = certify(matrix, args.r_max)
        payload = {"mode": "exact", "exact": True, **cert.to_json_dict()}
        spark_text = str(cert.spark) if cert.spark is not None \
            else f">= {cert.spark_min} (exact search over guard)"
        print(f"certificate: spark {spark_text}, urp={cert.urp}, "
              f"coherence={cert.coherence:.6g}")
        for entry in cert.per_r:
            print(f"  r={entry.r}: min-ssq={entry.rho_min:.6g} "
                  f"ric={entry.gamma:.6g}")
        for flag in cert.flags:
            print(f"  r={flag.r}: unique={flag.p0_unique} "
                  f"recovery={flag.recovery_guaranteed} "
                  f"(min 2r-ssq={flag.rho_2r_min:.6g})")
    if args.out:
        save_json(args.out, payload)
    return 0


def _cmd_phantom(args) -> int:
    problem = phantom_problem(args.side, args.lines)
    r = args.r if args.r is not None else problem.truth_support_size
    stop = StoppingRule(tol=args.tol, max_iter=args.max_iter)
    basis = HaarBasis(args.side)
    reference = basis.synthesize(problem.truth)
    op, y = problem.operator, problem.y
    if args.method == "mn":
        estimate = minimum_norm_estimate(op, y)
        iterations, converged, r_used = 0, True, 0
    elif args.method == "adore":
        auto = adore_run(op, y, resolution=args.resolution, stop=stop)
        estimate = auto.final.estimate.s
        iterations, converged, r_used = (
            auto.final.iterations, auto.final.converged, auto.r_selected)
    else:
        runner = {"ecme": ecme_run, "iht": iht_run, "dore": dore_run}[args.method]
        result = runner(op, y, r, stop=stop)
        estimate = result.estimate.s
        iterations, converged, r_used = result.iterations, result.converged, r
    value = psnr(reference, basis.synthesize(estimate))
    n_over_m = op.n_rows / op.n_cols
    print(f"phantom side={args.side} lines={args.lines} N/m={n_over_m:.3f} "
          f"method={args.method} r={r_used}: psnr={value:.2f} dB, "
          f"iterations={iterations}, converged={converged}")
    if args.out:
        save_json(args.out, {
            "side": args.side,
            "lines": args.lines,
            "n_over_m": n_over_m,
            "method": args.method,
            "r_used": r_used,
            "psnr_db": value,
            "iterations": iterations,
            "converged": converged,
        })
    return 0


def _cmd_bench(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as handle:
            config = parse_bench_config(handle.read())
    except OSError as exc:
        raise InputError(f"could not read config {args.config}: {exc}") from exc
    reports = benchmark_sweep(config)
    lines = [CSV_HEADER] + [report_csv_row(rep) for rep in reports]
    print("\n".join(lines))
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
    if args.out_json:
        save_json(args.out_json, {
            "config": {
                "side": config.side,
                "lines": list(config.lines),
                "methods": list(config.methods),
                "tol": config.tol,
                "max_iter": config.max_iter,
                "adore_resolution": config.adore_resolution,
                "seed": config.seed,
            },
            "reports": [rep.to_json_dict() for rep in reports],
        })
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "ecme": _cmd_solver, "iht": _cmd_solver, "dore": _cmd_solver,
        "adore": _cmd_solver, "analyze": _cmd_analyze,
        "phantom": _cmd_phantom, "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
