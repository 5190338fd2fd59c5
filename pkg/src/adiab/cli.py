"""Command-line front end.

    adiab run <scenario.json> [--out DIR]     execute, write CSV + report
    adiab batch <dir> [--out DIR]             run every *.json in a directory
    adiab verify <scenario.json>              identity checks only, no files

Exit codes: 0 all checks pass, 1 identity failure, 2 configuration error,
3 numerical failure (degeneracy, lost level identity, non-convergence).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from adiab.linalg import ConvergenceError
from adiab.runner import RunResult, emit_csv, emit_report, run_scenario
from adiab.scenario import ScenarioError, load_scenario
from adiab.tracking import DegeneracyError, LevelCrossingError

EXIT_OK = 0
EXIT_IDENTITY = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _print_checks(result: RunResult) -> None:
    report = result.report
    for name, entry in report.checks.items():
        status = "PASS" if entry["pass"] else "FAIL"
        print(f"check {name}: max {entry['value']:.3e} tol {entry['tolerance']:.1e} {status}")
    print(f"regime: {report.regime_description}")
    if report.marzlin_sanders is not None:
        ms = report.marzlin_sanders
        print(
            "transformed pair: min fidelity A "
            f"{ms['min_fidelity_system_a']:.4f}, B {ms['min_fidelity_system_b']:.4f}, "
            f"max |U_B U_A - 1| {ms['max_inverse_residual']:.3e}"
        )


def _finish(result: RunResult) -> int:
    failure = result.report.first_failure()
    if failure is not None:
        print(f"FAIL: first failing check is {failure!r}", file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


def _run_one(path: Path, out_dir: Path) -> int:
    scenario = load_scenario(path)
    result = run_scenario(scenario)
    out_dir.mkdir(parents=True, exist_ok=True)
    if "csv" in scenario.outputs:
        csv_path = emit_csv(result, out_dir / f"{scenario.name}.csv")
        print(f"wrote {csv_path}")
    if "report" in scenario.outputs:
        report_path = emit_report(result, out_dir / f"{scenario.name}.report.json")
        print(f"wrote {report_path}")
    _print_checks(result)
    return _finish(result)


def _cmd_run(args) -> int:
    return _run_one(Path(args.scenario), Path(args.out))


def _cmd_batch(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise ScenarioError(f"batch directory {directory} does not exist")
    files = sorted(directory.glob("*.json"))
    if not files:
        raise ScenarioError(f"batch directory {directory} contains no *.json scenarios")
    code = EXIT_OK
    for path in files:
        print(f"== {path.name} ==")
        status = _run_one(path, Path(args.out))
        if status != EXIT_OK and code == EXIT_OK:
            code = status
    return code


def _cmd_verify(args) -> int:
    scenario = load_scenario(Path(args.scenario))
    result = run_scenario(scenario)
    _print_checks(result)
    return _finish(result)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adiab",
        description="Exact transition-amplitude diagnostics for driven quantum systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write its CSV and report")
    p_run.add_argument("scenario", help="path to a scenario JSON document")
    p_run.add_argument("--out", default=".", help="output directory (default: current)")
    p_run.set_defaults(func=_cmd_run)

    p_batch = sub.add_parser("batch", help="run every *.json scenario in a directory")
    p_batch.add_argument("directory", help="directory of scenario documents")
    p_batch.add_argument("--out", default=".", help="output directory (default: current)")
    p_batch.set_defaults(func=_cmd_batch)

    p_verify = sub.add_parser("verify", help="run identity checks only, write no files")
    p_verify.add_argument("scenario", help="path to a scenario JSON document")
    p_verify.set_defaults(func=_cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegeneracyError, LevelCrossingError, ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
