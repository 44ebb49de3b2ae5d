"""Report serialization and cross-run comparison."""

import csv
import json


class ReportError(ValueError):
    pass


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def save_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_report(report))


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def total_rr_copies(report: dict) -> int:
    copies = report["rr_page_copies"]
    return int(copies["block_rr"]) + int(copies["wl_rr"])


def _ratio(value, base):
    if base in (0, None):
        return 1.0 if value in (0, None) else float("inf")
    if value is None:
        return float("inf")
    return round(value / base, 4)


def compare_reports(reports: list[dict]) -> list[dict]:
    """Per-metric ratios normalized to the first report. All reports must
    describe the same workload identity."""
    if len(reports) < 2:
        raise ReportError("compare needs at least 2 reports")
    hashes = {r["workload_hash"] for r in reports}
    if len(hashes) > 1:
        raise ReportError(
            "reports describe different workloads/physics; refusing to "
            f"compare (hashes: {sorted(hashes)})")
    base = reports[0]
    base_copies = total_rr_copies(base)
    base_p999 = base["read_latency_us"]["p999"]
    rows = []
    for rep in reports:
        rows.append({
            "config_name": rep["name"],
            "rr_copies_ratio": _ratio(total_rr_copies(rep), base_copies),
            "p999_ratio": _ratio(rep["read_latency_us"]["p999"], base_p999),
            "corruption_events": rep["corruption_events"],
        })
    return rows


def write_comparison_csv(rows: list[dict], stream) -> None:
    writer = csv.DictWriter(stream, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)


def format_comparison(rows: list[dict]) -> str:
    headers = list(rows[0].keys())
    table = [headers] + [[str(row[h]) for h in headers] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths))
             for line in table]
    return "\n".join(lines)


SUMMARY_FIELDS = [
    "name", "total_reads", "total_writes", "rr_copies_block", "rr_copies_wl",
    "gc_page_copies", "erases", "corruption_events", "read_p50", "read_p99",
    "read_p999", "read_max", "read_mean", "counter_footprint_bytes", "failed",
]


def summary_row(report: dict) -> dict:
    lat = report["read_latency_us"]
    return {
        "name": report["name"],
        "total_reads": report["total_reads"],
        "total_writes": report["total_writes"],
        "rr_copies_block": report["rr_page_copies"]["block_rr"],
        "rr_copies_wl": report["rr_page_copies"]["wl_rr"],
        "gc_page_copies": report["gc_page_copies"],
        "erases": report["erases"],
        "corruption_events": report["corruption_events"],
        "read_p50": lat["p50"], "read_p99": lat["p99"],
        "read_p999": lat["p999"], "read_max": lat["max"],
        "read_mean": lat["mean"],
        "counter_footprint_bytes": report["counter_footprint_bytes"],
        "failed": report["failed"],
    }


def write_summary_csv(reports: list[dict], stream) -> None:
    writer = csv.DictWriter(stream, fieldnames=SUMMARY_FIELDS)
    writer.writeheader()
    for rep in reports:
        writer.writerow(summary_row(rep))


def write_events_csv(events, stream) -> None:
    writer = csv.writer(stream)
    writer.writerow(["timestamp_us", "cause", "block", "wl", "pages_copied"])
    for ev in events:
        writer.writerow([ev.timestamp_us, ev.cause, ev.block,
                         "" if ev.wl is None else ev.wl, ev.pages_copied])
