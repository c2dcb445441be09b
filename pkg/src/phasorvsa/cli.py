"""Command-line entry point.

Subcommands:
    stopwatch   run the six state-transition queries through the spiking
                clean-up path and report winner similarities
    spatial     run the spatial-memory task: location query plus the two
                SSP similarity sweeps
    eval EXPR   compile, simulate, and decode an ad-hoc expression

Exit codes: 0 success, 2 anomaly detected (or a readout/simulation error),
3 validation failure (bad flags, config, expression, or network).
"""

from __future__ import annotations

import argparse
import sys

from .compiler import UnresolvedSymbolError
from .engine import SimConfig, SimulationError
from .expr import ParseError
from .experiments import (
    ExperimentSpec,
    run_expression,
    run_spatial,
    run_stopwatch,
    write_outputs,
)
from .network import NetworkValidationError
from .readout import SilentNeuronError

DEFAULT_DIMS = {"stopwatch": 100, "spatial": 200, "expression": 100}
DEFAULT_SPATIAL_SEED = 1

EXIT_OK = 0
EXIT_ANOMALY = 2
EXIT_VALIDATION = 3


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dim", type=int, default=None, help="vector dimensionality")
    parser.add_argument("--seed", type=int, default=None, help="master random seed")
    parser.add_argument(
        "--freq-hz", type=float, default=None,
        help="base cycle frequency (default: 10 Hz)",
    )
    parser.add_argument(
        "--dt", type=float, default=None,
        help="fixed-step size in seconds (default: period/1000)",
    )
    parser.add_argument(
        "--mode", choices=("fixed", "event"), default=None,
        help="simulation kernel (default: event)",
    )
    parser.add_argument(
        "--cycles", type=int, default=None,
        help="simulation length in global cycles (default: 12)",
    )
    parser.add_argument("--out", default="phasorvsa_out", help="output directory")
    parser.add_argument(
        "--vocab", default=None,
        help="vocabulary JSON file (eval: resolves symbols instead of seeding)",
    )
    parser.add_argument(
        "--config", default=None,
        help="simulation config file (key = value); explicit flags override it",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasorvsa",
        description="Spiking-phasor VSA: run experiments and expressions "
        "as spike-timing computations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("stopwatch", "state-transition task through the spiking clean-up"),
        ("spatial", "spatial-memory task with SSP similarity sweeps"),
        ("eval", "compile and run one VSA expression"),
    ):
        p = sub.add_parser(name, help=text)
        if name == "eval":
            p.add_argument("expression", help="e.g. 'cleanup(A * B / B + rho(C, 1))'")
        _add_common_flags(p)
    return parser


def _make_config(args) -> SimConfig:
    """Config file values are the baseline; explicit flags override them."""
    base = SimConfig.from_file(args.config) if args.config else SimConfig()
    freq = args.freq_hz if args.freq_hz is not None else base.base_frequency_hz
    if args.dt is not None:
        dt = args.dt
    elif args.config and args.freq_hz is None:
        dt = base.dt_s
    else:
        dt = (1.0 / freq) / 1000.0
    return SimConfig(
        base_frequency_hz=freq,
        dt_s=dt,
        duration_cycles=args.cycles if args.cycles is not None else base.duration_cycles,
        mode=args.mode if args.mode is not None else base.mode,
        seed=args.seed if args.seed is not None else base.seed,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kind = {"eval": "expression"}.get(args.command, args.command)

    if args.seed is None:
        args.seed = DEFAULT_SPATIAL_SEED if kind == "spatial" else 0
    dim = args.dim if args.dim is not None else DEFAULT_DIMS[kind]

    try:
        config = _make_config(args)
        spec = ExperimentSpec(
            kind=kind,
            dim=dim,
            seed=args.seed,
            config=config,
            expression=getattr(args, "expression", None),
            out_dir=args.out,
            vocab_path=args.vocab,
        )
        runner = {
            "stopwatch": run_stopwatch,
            "spatial": run_spatial,
            "expression": run_expression,
        }[kind]
        result = runner(spec)
        written = write_outputs(result)
    except (ParseError, NetworkValidationError, UnresolvedSymbolError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SilentNeuronError, SimulationError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_ANOMALY

    for q in result.queries:
        line = (
            f"{q.label}: winner={q.report.winner} "
            f"similarity={q.report.winner_score:.4f}"
        )
        if q.expected is not None:
            line += f" expected={q.expected} {'ok' if q.correct else 'MISMATCH'}"
        if q.peak is not None:
            line += f" sweep_peak_x={q.peak[0]:+.2f}"
        print(line)
    if kind == "expression":
        dev = result.extra["oracle_max_phase_deviation_rad"]
        print(f"max per-component deviation from the exact algebra: {dev:.3e} rad")
    print(f"total neurons: {result.total_neurons}")
    print(f"outputs written to: {written[0].parent}")

    if result.anomaly_count > 0:
        print(f"anomalies detected: {result.anomaly_count}", file=sys.stderr)
        return EXIT_ANOMALY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
