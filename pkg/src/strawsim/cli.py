"""Command-line front end.

Subcommands: run, sweep, compare, gen-trace, dump-ground-truth.
Exit codes: 0 ok, 1 usage/config error, 2 a run failed its integrity
check (corrupted data was observed).
"""

import argparse
import copy
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import report as rpt_io
from .config import (ConfigError, RunConfig, load_config, parse_override,
                     _apply_override)
from .device import Device
from .engine import run_simulation, run_simulation_with_events
from .ftl import SimulationError
from .workload import TraceFormatError, write_trace

log = logging.getLogger("strawsim")

SWEEP_CAP = 64


def _add_common(parser):
    parser.add_argument("--config", required=True, help="run config (YAML)")
    parser.add_argument("--override", action="append", default=[],
                        metavar="K=V", help="patch a config key (repeatable)")


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.override)
    report, events = run_simulation_with_events(cfg)
    out = Path(args.out or cfg.resolved["output"] or "report.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    rpt_io.save_report(report, out)
    if args.events:
        with open(args.events, "w", newline="") as fh:
            rpt_io.write_events_csv(events, fh)
    copies = rpt_io.total_rr_copies(report)
    print(f"{report['name']}: reads={report['total_reads']} "
          f"rr_copies={copies} corruption={report['corruption_events']} "
          f"p999={report['read_latency_us']['p999']}us -> {out}")
    if report["failed"]:
        print("run FAILED: integrity violation (corrupted data read)",
              file=sys.stderr)
        return 2
    return 0


def _parse_axes(specs):
    axes = []
    for spec in specs:
        key, raw = spec.split("=", 1) if "=" in spec else (None, None)
        if not key:
            raise ConfigError(f"axis must look like key=v1,v2 got {spec!r}")
        values = []
        for chunk in raw.split(","):
            _, value = parse_override(f"{key}={chunk}")
            if value in values:
                log.warning("axis %s: duplicate value %r dropped", key, value)
            else:
                values.append(value)
        axes.append((key, values))
    return axes


def _sweep_cells(base: RunConfig, axes):
    cells = [([], base.resolved)]
    for key, values in axes:
        nxt = []
        for tags, resolved in cells:
            for value in values:
                patched = copy.deepcopy(resolved)
                _apply_override(patched, key, value)
                nxt.append((tags + [f"{key.split('.')[-1]}={value}"], patched))
        cells = nxt
    out = []
    for tags, resolved in cells:
        resolved = copy.deepcopy(resolved)
        resolved["name"] = "_".join([resolved["name"]] + tags)
        out.append(resolved)
    return out


def _run_cell(resolved: dict) -> dict:
    report, _ = run_simulation_with_events(RunConfig(resolved))
    return report


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.override)
    axes = _parse_axes(args.axis)
    cells = _sweep_cells(cfg, axes)
    if len(cells) > SWEEP_CAP:
        raise ConfigError(
            f"sweep would run {len(cells)} cells (cap {SWEEP_CAP})")
    outdir = Path(args.out or "sweep_out")
    outdir.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_cell, cells))
    else:
        reports = [_run_cell(cell) for cell in cells]
    for rep in reports:
        rpt_io.save_report(rep, outdir / f"{rep['name']}.json")
    with open(outdir / "summary.csv", "w", newline="") as fh:
        rpt_io.write_summary_csv(reports, fh)
    if args.plot:
        from .plots import render_sweep
        for path in render_sweep(reports, outdir):
            print(f"figure: {path}")
    print(f"{len(reports)} reports -> {outdir}/summary.csv")
    return 2 if any(rep["failed"] for rep in reports) else 0


def cmd_compare(args) -> int:
    reports = [rpt_io.load_report(path) for path in args.reports]
    rows = rpt_io.compare_reports(reports)
    print(rpt_io.format_comparison(rows))
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            rpt_io.write_comparison_csv(rows, fh)
        if args.plot:
            from .plots import render_comparison
            for path in render_comparison(rows, out.parent):
                print(f"figure: {path}")
    elif args.plot:
        from .plots import render_comparison
        for path in render_comparison(rows, Path(".")):
            print(f"figure: {path}")
    return 0


def cmd_gen_trace(args) -> int:
    cfg = load_config(args.config, args.override)
    records = cfg.build_workload(cfg.geometry().total_pages)
    out = Path(args.out or "trace.csv")
    with open(out, "w", newline="") as fh:
        write_trace(fh, records, cfg.geometry().page_size)
    print(f"{len(records)} records -> {out}")
    return 0


def cmd_dump_ground_truth(args) -> int:
    cfg = load_config(args.config, args.override)
    rel = cfg.reliability()
    device = Device(cfg.geometry(), rel, seed=rel.seed,
                    initial_pec=cfg.initial_pec)
    out = Path(args.out or "ground_truth.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block", "wl", "group", "tolerance", "alpha"])
        writer.writerows(device.ground_truth_rows())
    print(f"ground truth -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strawsim",
        description="Trace-driven SSD read-disturbance / read-reclaim "
                    "simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation")
    _add_common(p)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--events", help="write the reclaim event log CSV here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a cross-product of config axes")
    _add_common(p)
    p.add_argument("--axis", action="append", default=[], metavar="K=V1,V2",
                   help="sweep axis (repeatable)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output directory")
    p.add_argument("--plot", action="store_true",
                   help="render summary figures into the output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="compare >=2 report files")
    p.add_argument("reports", nargs="+", help="report JSON files; the first "
                   "is the baseline")
    p.add_argument("--out", help="comparison CSV path")
    p.add_argument("--plot", action="store_true",
                   help="render ratio figures next to the CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-trace", help="write the configured synthetic "
                       "workload as a trace CSV")
    _add_common(p)
    p.add_argument("--out", help="trace CSV path")
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("dump-ground-truth", help="export per-WL ground truth")
    _add_common(p)
    p.add_argument("--out", help="CSV path")
    p.set_defaults(func=cmd_dump_ground_truth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TraceFormatError, rpt_io.ReportError,
            SimulationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
