#!/usr/bin/env python3
"""Run the shipped regime panels and print a summary table.

Writes each panel's CSV and JSON report under --out (default results/),
then tabulates the peak off-level amplitude, the coupling and correction
term maxima, and the regime flags. Plotting is left to external tools
reading the CSVs.
"""

import argparse
import sys
from pathlib import Path

from adiab.runner import emit_csv, emit_report, run_scenario
from adiab.scenario import load_scenario

REPO = Path(__file__).resolve().parent.parent


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenarios", default=str(REPO / "scenarios"),
                        help="directory of scenario documents")
    parser.add_argument("--out", default=str(REPO / "results"), help="output directory")
    args = parser.parse_args(argv)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = sorted(Path(args.scenarios).glob("*.json"))
    if not files:
        print(f"no scenarios found in {args.scenarios}", file=sys.stderr)
        return 2

    rows = []
    all_pass = True
    for path in files:
        scenario = load_scenario(path)
        print(f"running {scenario.name} ...")
        result = run_scenario(scenario)
        emit_csv(result, out_dir / f"{scenario.name}.csv")
        emit_report(result, out_dir / f"{scenario.name}.report.json")
        report = result.report
        all_pass &= report.passed
        off = [label for label in report.max_abs_q]
        peak_c = max(report.max_abs_c[label] for label in off)
        rows.append(
            (
                scenario.name,
                peak_c,
                max(report.max_abs_q.values()),
                max(report.max_abs_r.values()),
                max(report.max_qac.values()),
                "yes" if report.adiabatic_approximation_holds else "no",
                "yes" if report.qac_violated else "no",
                "ok" if report.passed else "FAIL",
            )
        )

    print()
    header = f"{'scenario':<18}{'max|c_off|':>12}{'max|Q|':>10}{'max|R|':>10}{'max ratio':>11}{'adiab':>7}{'ratio>thr':>11}{'checks':>8}"
    print(header)
    print("-" * len(header))
    for name, c, q, r, ratio, adiab, viol, ok in rows:
        print(f"{name:<18}{c:>12.5f}{q:>10.5f}{r:>10.5f}{ratio:>11.5f}{adiab:>7}{viol:>11}{ok:>8}")
    print(f"\noutputs in {out_dir}")
    return 0 if all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
