"""Command-line entry point: ``resonant-search <command> [options]``.

Exit codes: 0 success, 2 configuration or sweep-setup error, 3 integration
abort (norm drift), 4 an internal tolerance check failed.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path

from .config import COMMANDS, ConfigError, build_spec, convert, parse_config_text
from .dynamics import NormDriftError
from .harness import SweepError, run

EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_TOLERANCE = 4

_OPTIONS = {
    "--spectrum": "harmonic, rotor or custom",
    "--epsilon0": "energy scale",
    "--levels": "custom energies, comma separated",
    "--set": "search set, a..b or comma list",
    "--j": "initial level",
    "--s": "searched level",
    "--v0": "coupling strength",
    "--dt": "RK4 step",
    "--tmax": "integration window (evolve, sweep-n)",
    "--out": "output CSV path, - for stdout",
    "--n-list": "search-set sizes for sweeps, a,b,c or a..b:step",
    "--delta-max": "half-width of the detuning grid",
    "--delta-points": "odd number of detuning grid points",
    "--steps": "discrete steps (floquet-compare)",
    "--mode": "U_D construction: exact or rounded",
    "--workers": "threads for independent sweep members",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonant-search",
        description="Resonance-driven quantum search: trajectories, sweeps and Floquet comparison.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key=value config file; flags override it")
        for flag, text in _OPTIONS.items():
            p.add_argument(flag, help=text)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    values = {}
    for flag in _OPTIONS:
        key = flag[2:].replace("-", "_")
        raw = getattr(args, key)
        if raw is not None:
            values[key] = convert(key, raw)
    return values


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = parse_config_text(args.config.read_text()) if args.config else {}
        file_values.pop("command", None)
        spec = build_spec(args.command, file_values, _overrides(args))
        result = run(spec)
    except (ConfigError, SweepError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NormDriftError as exc:
        print(f"integration aborted: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION

    try:
        with _open_out(spec.out) as fh:
            result.write_csv(fh)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if spec.out != "-":
        _print_summary(result)

    failed = [c for c in getattr(result, "checks", []) if not c.passed]
    for c in failed:
        print(f"tolerance failure: {c.line()}", file=sys.stderr)
    return EXIT_TOLERANCE if failed else 0


def _print_summary(result) -> None:
    lines = result.summary() if hasattr(result, "summary") else result.comments()
    for line in lines:
        print(line)


if __name__ == "__main__":
    sys.exit(main())
