"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 stability
verdict disagrees with the R0 threshold, 4 Riccati grid too short.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import control, model, scenario
from .errors import GridCoverage, IoError, SiqrError
from .scenario import (
    Scenario,
    analysis_report,
    controllability_report,
    load_scenario,
    render_svg,
    run_scenario,
    write_report_json,
    write_table_csv,
    write_trajectory_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VERDICT, EXIT_GRID = 0, 1, 2, 3, 4
SWEEP_KEYS = ("alpha", "v", "eta")


def _title(sc: Scenario, extra: str = "") -> str:
    head = sc.name or "scenario"
    return f"{head}: R0 = {model.r0(sc.params):.4f}{extra}"


def cmd_analyze(sc: Scenario, out: Path, args) -> int:
    report = analysis_report(sc.params)
    write_report_json(report, out / "report.json")
    endemic = report["endemic"]
    print(f"R0 = {report['r0']:.4f}")
    print(f"disease-free point: {tuple(round(x, 4) for x in report['dfe']['point'])} "
          f"-> {report['dfe_verdict']['classification']}")
    if endemic["exists"]:
        print(f"endemic point: {tuple(round(x, 4) for x in endemic['point'])} "
              f"-> {report['endemic_verdict']['classification']}")
    else:
        print("endemic point: does not exist (R0 <= 1)")
    print(f"controllability rank: {report['controllability']['rank']}")
    return EXIT_OK if report["theorem_consistent"] else EXIT_VERDICT


def _write_run(run, out: Path, stem: str, title: str) -> None:
    sc = run.scenario
    if "csv" in sc.outputs:
        write_trajectory_csv(run.trajectory, out / f"{stem}.csv", run.weights)
    if "svg" in sc.outputs:
        render_svg(run.trajectory, out / f"{stem}.svg", title)


def cmd_simulate(sc: Scenario, out: Path, args) -> int:
    run = run_scenario(sc)
    _write_run(run, out, "trajectory", _title(sc))
    if "report" in sc.outputs:
        write_report_json(analysis_report(sc.params), out / "report.json")
    final = run.trajectory.final
    print(f"t = {run.trajectory.times[-1]:g}: S={final[0]:.4f} I={final[1]:.4f} "
          f"Q={final[2]:.4f} R={final[3]:.4f}")
    if run.weights is not None:
        print(f"cost J = {control.evaluate_cost(run.trajectory, run.weights):.6g}")
    return EXIT_OK


def cmd_controllability(sc: Scenario, out: Path, args) -> int:
    report = controllability_report(sc.params)
    write_report_json(report, out / "controllability.json")
    print(f"rank W_c = {report['rank']} ({'controllable' if report['controllable'] else 'not controllable'})")
    print(f"rank with vaccination feedback = {report['closed_loop_rank']}")
    return EXIT_OK


def cmd_lqr(sc: Scenario, out: Path, args) -> int:
    if sc.controller.kind != "lqr":
        # default synthesis: reference weights, backward from P(T) = 0
        sc = Scenario(
            params=sc.params,
            initial=sc.initial,
            horizon=sc.horizon,
            step=sc.step,
            controller=scenario.ControllerSpec(kind="lqr"),
            outputs=sc.outputs,
            name=sc.name,
            description=sc.description,
        )
    run = run_scenario(sc)
    sol = run.riccati
    summary = sol.summary()
    sys_ = control.build_system(sc.params)
    gain = control.lqr_gain(sys_, sc.controller.weights, sol.limit)
    summary["gain"] = gain.tolist()
    summary["cost"] = control.evaluate_cost(run.trajectory, sc.controller.weights)
    write_report_json(summary, out / "riccati.json")
    write_table_csv(("t", "P_norm"), [(float(t), float(n)) for t, n in zip(sol.times, sol.norms)],
                    out / "riccati_norm.csv")
    _write_run(run, out, "controlled", _title(sc, " (LQR)"))
    print(f"Riccati ({summary['mode']}): converged={summary['converged']} "
          f"|P|={summary['limit_norm']:.6g} ARE residual={summary['final_are_residual']:.3g}")
    print(f"cost J = {summary['cost']:.6g}")
    return EXIT_OK


def cmd_sweep(sc: Scenario, out: Path, args) -> int:
    key = args.key
    values = [v for v in (args.values or "").split(",") if v.strip()]
    rows = []
    for text in values:
        try:
            value = float(text)
        except ValueError:
            raise scenario.ValidationError("values", f"not a number: {text!r}") from None
        point = load_scenario(args.scenario, list(args.set or []) + [f"{key}={value!r}"])
        run = run_scenario(point)
        rows.append((value, model.r0(point.params), *map(float, run.trajectory.final)))
    write_table_csv(("value", "r0", "S", "I", "Q", "R"), rows, out / "sweep.csv")
    for row in rows:
        print(f"{key}={row[0]:g}: R0={row[1]:.4f}")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "controllability": cmd_controllability,
    "lqr": cmd_lqr,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="siqrctl", description="SIQR epidemic control workbench")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario key")
        if name == "sweep":
            p.add_argument("--key", required=True, choices=SWEEP_KEYS)
            p.add_argument("--values", default="", help="comma-separated values")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        sc = load_scenario(args.scenario, args.set or [])
        return COMMANDS[args.command](sc, out, args)
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GridCoverage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except SiqrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
