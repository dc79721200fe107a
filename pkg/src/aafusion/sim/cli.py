"""Command-line entry point: ``aafusion run | mse-experiment | oracle-suite``."""

from __future__ import annotations

import argparse
import sys

from ..gaussian import ContractError
from .config import FUSION_MODES, WEIGHT_MODES, ConfigError, ScenarioConfig

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3
MSE_TOL = 0.05


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("sensor counts must be positive integers")
    return values


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aafusion", description="Arithmetic-average multi-sensor fusion simulations.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write per-step metrics")
    run.add_argument("--scenario", required=True, help="scenario JSON file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int)
    run.add_argument("--fusion", choices=FUSION_MODES)
    run.add_argument("--weights", choices=WEIGHT_MODES)
    run.add_argument("--consensus-iters", type=int)
    run.add_argument("--mc-runs", type=int)

    mse = sub.add_parser("mse-experiment", help="MSE of averaged unbiased count estimates")
    mse.add_argument("--sensors", type=_int_list, default=[2, 4, 8, 16], help="e.g. 2,4,8,16")
    mse.add_argument("--trials", type=int, default=100_000)
    mse.add_argument("--out", required=True, help="output CSV file")
    mse.add_argument("--sigma", type=float, default=1.0)
    mse.add_argument("--seed", type=int, default=0)

    orc = sub.add_parser("oracle-suite", help="compare closed-form PHDs with brute-force set integrals")
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--per-family", type=int, default=2)
    return p


def _run(args) -> int:
    from .io import write_run_outputs
    from .runner import aggregate, run_monte_carlo

    cfg = ScenarioConfig.load(args.scenario).with_overrides(
        seed=args.seed, fusion=args.fusion, weights=args.weights,
        consensus_iters=args.consensus_iters, mc_runs=args.mc_runs,
    )
    results = run_monte_carlo(cfg)
    rec, summ = write_run_outputs(results, args.out)
    print(f"{'node':<10} {'mean OSPA':>10} {'card err²':>10}")
    for node, s in aggregate(results).items():
        print(f"{node:<10} {s['mean_ospa']:>10.4f} {s['mean_card_err2']:>10.4f}")
    print(f"wrote {rec} and {summ}")
    return EXIT_OK


def _mse(args) -> int:
    from .experiments import mse_consistency_experiment
    from .io import write_mse_table

    rows = mse_consistency_experiment(args.sensors, args.trials, args.sigma, seed=args.seed)
    write_mse_table(rows, args.out)
    ok = True
    for prev, r in zip([None] + rows[:-1], rows):
        good = r.relative_error <= MSE_TOL and (prev is None or prev.sensors >= r.sensors or r.empirical < prev.empirical)
        ok &= good
        print(f"{'PASS' if good else 'FAIL'} I={r.sensors:<3} analytic={r.analytic:.6f} "
              f"empirical={r.empirical:.6f} rel.err={r.relative_error:.4f}")
    return EXIT_OK if ok else EXIT_CHECK


def _oracle(args) -> int:
    from ..oracle_suite import ORACLE_TOL, run_oracle_suite

    checks = run_oracle_suite(args.seed, args.per_family)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.family:<9} #{c.instance} max|Δ|={c.max_error:.2e} "
              f"(tol {ORACLE_TOL:.0e}, {c.seconds:.2f}s)")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _run, "mse-experiment": _mse, "oracle-suite": _oracle}[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractError as e:
        # invalid parameters that slipped past the scenario validation
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
