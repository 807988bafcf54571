"""``qem-bench`` command line.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from ..errors import ConfigError
from .config import load_config
from .harness import (
    bias_ratios,
    converged_mse_ratios,
    run_mse_sweep,
    run_state_table,
    simulate,
)
from .report import emit_reports

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qem-bench", description="Trotter error-mitigation benchmarks")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    st = sub.add_parser("states", help="trace-distance table of the (p2, M) grid")
    st.add_argument("--config")
    st.add_argument("--out", required=True)
    st.add_argument("--profile", choices=("smoke", "full"), default="full")

    ms = sub.add_parser("mse", help="MSE versus total shots for every estimator")
    ms.add_argument("--config")
    ms.add_argument("--out", required=True)
    ms.add_argument("--seed", type=int)
    ms.add_argument("--trials", type=int)
    ms.add_argument("--profile", choices=("smoke", "full"), default="full")

    vc = sub.add_parser("validate-config", help="check a config file and print the resolved settings")
    vc.add_argument("path")
    vc.add_argument("--profile", choices=("smoke", "full"), default="full")
    return p


def _summary(cfg, sim, started, sweep=None) -> dict:
    out = {
        "config": cfg.to_dict(),
        "seed": cfg.master_seed,
        "exact_value": sim.exact_value,
        "raw_state": list(sim.raw_key),
        "nodes": {
            "states": [list(k) for k in sim.node_keys],
            "coefficients": list(sim.nodes.coefficients),
            "on_rule": sim.nodes.on_rule,
        },
        "simulation_seconds": sim.seconds,
    }
    if sweep is not None:
        out["bias_sq"] = sweep.bias_sq
        out["infinite_shot_values"] = sweep.values
        out["bias_sq_ratios_vs_data_efficient"] = bias_ratios(sweep.bias_sq)
        out["converged_mse_ratios_vs_data_efficient"] = converged_mse_ratios(sweep.rows)
        out["failures"] = sweep.failures
        ph = sweep.physicality
        out["data_efficient_physicality"] = {
            "min_eigenvalue": ph.min_eigenvalue,
            "trace": ph.trace,
            "operator_norm": ph.operator_norm,
            "unphysical": ph.unphysical,
            "expectation": ph.expectation,
            "bound": ph.bound,
        }
    out["wall_clock_seconds"] = time.perf_counter() - started
    return out


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "validate-config":
            cfg = load_config(args.path, profile=args.profile)
            for k, v in cfg.to_dict().items():
                print(f"{k} = {v!r}")
            return EXIT_OK
        overrides = {}
        if args.command == "mse":
            overrides = {"master_seed": args.seed, "trials": args.trials}
        cfg = load_config(args.config, profile=args.profile, **overrides)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    started = time.perf_counter()
    try:
        sim = simulate(cfg)
        states = run_state_table(cfg, sim)
        if args.command == "states":
            written = emit_reports(args.out, states=states, summary=_summary(cfg, sim, started))
        else:
            sweep = run_mse_sweep(cfg, sim)
            written = emit_reports(args.out, states=states, mse=sweep.rows, summary=_summary(cfg, sim, started, sweep))
    except Exception as e:  # noqa: BLE001 - any failure past config parsing is a runtime error
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written.values():
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
