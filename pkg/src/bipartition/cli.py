"""Command-line entry point.

    bipartition <command> <config> [--json] [--tol X] [--grid N] [--horizon T]

Exit codes: 0 ok, 2 configuration error, 3 physics-validity error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .commands import COMMANDS, run
from .config import parse
from .errors import BipartitionError, ConfigError
from .report import Report

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_NUMERICAL = 0, 2, 3, 4


def bundled_config(name: str) -> Path:
    return Path(str(resources.files("bipartition") / "data" / name))


def resolve_config(path: str) -> Path:
    """Use ``path`` if it exists; ``examples/NAME.cfg`` falls back to the bundled copy."""
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_config(p.name)
    if p.parent.name == "examples" and bundled.exists():
        return bundled
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bipartition",
        description="Division-relative entanglement and decoupling for quadratic "
                    "continuous-variable systems.",
        epilog="exit codes: 0 ok, 2 config error, 3 physics-validity error, 4 numerical failure")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("config", help="TOML config file (schema = 1); examples/NAME.cfg "
                                   "resolves to the bundled examples")
    ap.add_argument("--json", action="store_true", help="print a machine-readable report")
    ap.add_argument("--tol", type=float, help="canonicity tolerance (default from config, 1e-10)")
    ap.add_argument("--grid", type=int, help="oracle grid points per axis (default 512)")
    ap.add_argument("--horizon", type=float, help="decoherence search horizon (default 10)")
    ap.add_argument("--timestamp", action="store_true",
                    help="stamp the report with the current UTC time (excluded from equality)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    path = resolve_config(args.config)
    try:
        doc = parse(path)
        report = run(args.command, doc, tol=args.tol, grid=args.grid, horizon=args.horizon)
    except BipartitionError as exc:
        report = _error_report(args, str(path), exc, exc.exit_code)
    except ValueError as exc:
        report = _error_report(args, str(path), exc, EXIT_PHYSICS)
    except (ArithmeticError, RuntimeError) as exc:
        report = _error_report(args, str(path), exc, EXIT_NUMERICAL)
    if args.timestamp:
        report.timestamp = datetime.now(timezone.utc).isoformat()
    if args.json:
        print(report.to_json())
    else:
        print(report.render())
    if report.exit_code and not args.json:
        print(f"error: {'; '.join(report.messages)}", file=sys.stderr)
    return report.exit_code


def _error_report(args, path, exc, code) -> Report:
    rep = Report(command=args.command, config=path)
    if isinstance(exc, ConfigError):
        for e in exc.errors:
            rep.fail(e, code)
    else:
        rep.fail(f"{type(exc).__name__}: {exc}", code)
    rep.status = "error"
    return rep


if __name__ == "__main__":
    sys.exit(main())
