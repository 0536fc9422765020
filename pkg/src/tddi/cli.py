"""Command-line front end.

    tddi run --case case9 --feeder fc1 --out out/
    tddi table1 [--scenario fc2] [--json]
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from ._format import fmt
from .cpf import CPFOptions, trace_csv
from .scenarios import (ScenarioConfig, ScenarioConfigError, ScenarioError, ScenarioResult,
                        reference_scenarios, run_scenario)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

INDEX_COLUMNS = ["scenario", "bus", "total_load_mw", "vsi", "tddi", "z_t_mag", "z_d_mag",
                 "z_l_mag", "e_th_mag", "classification"]

# published margins, bus 5 nose voltages and critical-bus TDDI
REFERENCE = {
    "standard": {"margin_mw": 467.5, "nose_v": 0.71, "tddi": None},
    "fc1": {"margin_mw": 163.0, "nose_v": 0.85, "tddi": -0.4},
    "fc2": {"margin_mw": 419.0, "nose_v": 0.67, "tddi": 0.71},
}
LARGE_REDUCTION = 0.5  # fraction of the unmodified margin


@dataclass
class ReportRow:
    scenario: str
    margin_mw: float
    critical_bus: str | None
    tddi: float | None
    classification: str | None
    nose_voltage: float
    ref_margin_mw: float | None = None
    ref_nose_voltage: float | None = None
    ref_tddi: float | None = None
    comment: str | None = None


def indices_csv(result: ScenarioResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(INDEX_COLUMNS)
    for bus, recs in result.records.items():
        name = result.bus_name(bus)
        for r in recs:
            eq = r.equivalent
            w.writerow([result.config.name, name, fmt(r.total_load_mw), fmt(r.vsi), fmt(r.tddi),
                        fmt(abs(eq.z_t)), fmt(abs(eq.z_d)), fmt(abs(eq.z_l)), fmt(abs(eq.e_th)),
                        r.classification.value])
    return buf.getvalue()


def nose_voltage(result: ScenarioResult, bus: int) -> float:
    return float(abs(result.trace.nose.solution.v[result.network.index(bus)]))


def report_row(result: ScenarioResult, bus: int = 5) -> ReportRow:
    name = result.config.name
    ref = REFERENCE.get(name, {})
    crit = result.bus_name(result.critical_bus) if result.critical_bus is not None else None
    return ReportRow(
        scenario=name,
        margin_mw=result.margin_mw,
        critical_bus=crit,
        tddi=result.nose_tddi,
        classification=result.classification.value if result.classification else None,
        nose_voltage=nose_voltage(result, bus),
        ref_margin_mw=ref.get("margin_mw"),
        ref_nose_voltage=ref.get("nose_v"),
        ref_tddi=ref.get("tddi"),
    )


def summary(result: ScenarioResult, bus: int = 5) -> dict:
    row = report_row(result, bus)
    return {
        "scenario": row.scenario,
        "case": result.config.case,
        "feeder": result.config.feeder if isinstance(result.config.feeder, str) else None,
        "margin_mw": float(fmt(row.margin_mw)),
        "base_load_mw": float(fmt(result.trace.points[0].total_load_mw)),
        "nose_load_mw": float(fmt(result.trace.nose.total_load_mw)),
        "nose_lambda": float(fmt(result.trace.nose.lam)),
        "nose_voltage_bus": bus,
        "nose_voltage": float(fmt(row.nose_voltage)),
        "critical_bus": row.critical_bus,
        "tddi_at_critical": None if row.tddi is None else float(fmt(row.tddi)),
        "classification": row.classification,
        "points": len(result.trace.points),
        "nose_index": result.trace.nose_index,
    }


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_opt(x, spec):
    return "-" if x is None else format(x, spec)


def format_table(rows: list[ReportRow]) -> str:
    head = (f"{'Bus 5 load':<10} {'Margin MW':>10} {'(ref)':>8} {'V nose':>7} {'(ref)':>8} "
            f"{'Crit bus':<11} {'TDDI':>7} {'(ref)':>8}  {'Classification':<21} Comment")
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r.scenario:<10} {r.margin_mw:>10.1f} {_fmt_opt(r.ref_margin_mw, '.1f'):>8} "
            f"{r.nose_voltage:>7.3f} {_fmt_opt(r.ref_nose_voltage, '.2f'):>8} "
            f"{r.critical_bus or '-':<11} {_fmt_opt(r.tddi, '.3f'):>7} "
            f"{_fmt_opt(r.ref_tddi, '.2f'):>8}  {r.classification or '-':<21} "
            f"{r.comment or ''}")
    return "\n".join(lines)


def _config_from_args(args) -> ScenarioConfig:
    cpf = CPFOptions(step=args.step)
    name = args.name or (Path(str(args.feeder)).stem if args.feeder else "standard")
    return ScenarioConfig(
        name=name,
        case=args.case,
        feeder=args.feeder,
        replicas=args.replicas if args.feeder else None,
        attach_bus=args.attach_bus if args.feeder else None,
        cpf=cpf,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
        estimator=args.estimator,
        window=args.window if args.window is not None else (3 if args.estimator == "lsq" else 2),
        deadband=args.deadband,
        literal_eq8=args.literal_eq8,
        monitor_all_replicas=args.all_replicas,
    )


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    result = run_scenario(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summ = summary(result, args.attach_bus)
    _write_atomic(out / "trace.csv", trace_csv(result.trace))
    _write_atomic(out / "indices.csv", indices_csv(result))
    _write_atomic(out / "summary.json", json.dumps(summ, indent=2) + "\n")
    if args.json:
        print(json.dumps(summ, indent=2))
    else:
        print(format_table([report_row(result, args.attach_bus)]))
    return 0


def margin_comment(margin_mw: float, base_mw: float) -> str:
    """Describe how much a feeder case erodes the unmodified margin."""
    cut = 1.0 - margin_mw / base_mw
    if cut <= 0:
        return "No reduction in margin"
    return ("Large" if cut > LARGE_REDUCTION else "Small") + " reduction in margin"


def cmd_table1(args) -> int:
    scenarios = reference_scenarios()
    names = [args.scenario] if args.scenario else list(scenarios)
    rows = []
    for n in names:
        cfg = scenarios[n]
        if args.step is not None:
            cfg = replace(cfg, cpf=CPFOptions(step=args.step))
        rows.append(report_row(run_scenario(cfg)))
    base = next((r.margin_mw for r in rows if r.scenario == "standard"), REFERENCE["standard"]["margin_mw"])
    for r in rows:
        r.comment = margin_comment(r.margin_mw, base) if r.scenario != "standard" else "-"
    if args.json:
        print(json.dumps([asdict(r) for r in rows], indent=2))
    else:
        print(format_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tddi", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario and write trace/indices/summary files")
    r.add_argument("--case", default="case9", help="case file path or bundled name")
    r.add_argument("--feeder", default=None, help="feeder file path or bundled name (fc1, fc2)")
    r.add_argument("--replicas", type=int, default=10)
    r.add_argument("--attach-bus", type=int, default=5)
    r.add_argument("--step", type=float, default=0.02)
    r.add_argument("--noise-sigma", type=float, default=0.0)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--estimator", choices=["two_point", "lsq"], default="two_point")
    r.add_argument("--window", type=int, default=None)
    r.add_argument("--deadband", type=float, default=0.05)
    r.add_argument("--literal-eq8", action="store_true",
                   help="use the substation-only Z_D formula instead of the feeder drop")
    r.add_argument("--all-replicas", action="store_true", help="monitor every feeder replica")
    r.add_argument("--name", default=None, help="scenario label used in outputs")
    r.add_argument("--out", default="tddi-out")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table1", help="margins and classifications for the three reference cases")
    t.add_argument("--scenario", choices=list(reference_scenarios()), default=None)
    t.add_argument("--step", type=float, default=None)
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_table1)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioConfigError, ValueError, OSError) as exc:
        print(f"tddi: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        print(f"tddi: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
