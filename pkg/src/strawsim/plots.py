"""Figure rendering for compare/sweep outputs.

Figures are written next to the delimited output so a sweep or compare
directory is self-contained: bar charts of reclaim-induced page copies
and of read tail latency across configurations.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .report import summary_row  # noqa: E402


def _bar_chart(path, labels, values, title, ylabel):
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(labels) + 1.5), 3.2))
    ax.bar(range(len(labels)), values, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_comparison(rows, outdir):
    """Render ratio charts for cmd_compare; returns the figure paths."""
    labels = [row["config_name"] for row in rows]
    paths = []
    paths.append(_bar_chart(
        outdir / "compare_rr_copies.png", labels,
        [row["rr_copies_ratio"] for row in rows],
        "Reclaim-induced page copies (normalized to baseline)", "ratio"))
    paths.append(_bar_chart(
        outdir / "compare_p999.png", labels,
        [row["p999_ratio"] for row in rows],
        "p99.9 read latency (normalized to baseline)", "ratio"))
    return paths


def render_sweep(reports, outdir):
    """Render absolute-value charts for cmd_sweep; returns figure paths."""
    rows = [summary_row(rep) for rep in reports]
    labels = [row["name"] for row in rows]
    paths = []
    paths.append(_bar_chart(
        outdir / "sweep_rr_copies.png", labels,
        [row["rr_copies_block"] + row["rr_copies_wl"] for row in rows],
        "Reclaim-induced page copies", "pages"))
    paths.append(_bar_chart(
        outdir / "sweep_p999.png", labels,
        [row["read_p999"] or 0 for row in rows],
        "p99.9 read latency", "us"))
    return paths
