import argparse
from pathlib import Path

from mqpsh.core.logger import logger
from mqpsh.schemas.report import ScenarioReport
from mqpsh.services.scenario_service import SCENARIO_ALIASES, bundled_scenarios, scenario_service


def format_summary(report: ScenarioReport) -> str:
    width = max([len("assertion")] + [len(r.name) for r in report.rows])
    lines = [f"scenario {report.name}", f"{'assertion':<{width}}  status  max_error  detail"]
    for row in report.rows:
        lines.append(f"{row.name:<{width}}  {row.status:<6}  {row.max_error:9.2e}  {row.detail or ''}".rstrip())
    passed = len(report.rows) - len(report.failed)
    lines.append(f"{passed}/{len(report.rows)} assertions passed")
    for path in report.written:
        lines.append(f"wrote {path}")
    return "\n".join(lines)


def run(args: argparse.Namespace) -> int:
    report = scenario_service.run_scenario(args.scenario, args.out_dir)
    print(format_summary(report))
    logger.info("scenario_reported", scenario=report.name, passed=report.passed)
    scenario_service.assert_passed(report)
    return 0


def register(subparsers):
    parser = subparsers.add_parser(
        "run",
        help="execute a scenario",
        description="Run a TOML scenario, write its artifacts and print one row per assertion.",
    )
    parser.add_argument(
        "scenario",
        help=f"scenario file, or a bundled scenario: {', '.join(bundled_scenarios() + sorted(SCENARIO_ALIASES))}",
    )
    parser.add_argument("--out-dir", type=Path, default=Path("."), help="directory for declared outputs (default: .)")
    parser.set_defaults(handler=run)
