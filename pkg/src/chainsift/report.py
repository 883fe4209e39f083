"""Render scan results to delimited tables and figures.

Everything lands in one output directory: per-chain CSV tables for the
text shape classes, the most frequent texts, URL scheme counts and file
type counts, plus plain two-column series for the monthly frequency and
length histogram, and PNG renders of those two series.  The analytics
stay in :mod:`chainsift.analytics`; this module only formats and draws.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .analytics import FileStats, TextStats, UrlStats
from .ingest import BITCOIN, ETHEREUM
from .pipeline import ScanResult
from .textscan import TYPE_LABELS

DEFAULT_TOP_N = 25

_CHAINS = (BITCOIN, ETHEREUM)


def _write_csv(path: Path, header: tuple[str, ...], rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_tables(
    out_dir: Path,
    text_stats: TextStats,
    url_stats: UrlStats,
    file_stats: FileStats,
    top_n: int = DEFAULT_TOP_N,
) -> list[Path]:
    paths = []
    for chain in _CHAINS:
        paths.append(
            _write_csv(
                out_dir / f"textual_types_{chain}.csv",
                ("textual_type", "count"),
                (
                    (TYPE_LABELS[t], n)
                    for t, n in text_stats.type_rows(chain)
                ),
            )
        )
        paths.append(
            _write_csv(
                out_dir / f"top_texts_{chain}.csv",
                ("text", "count"),
                text_stats.top_texts(top_n, chain=chain).entries,
            )
        )
        paths.append(
            _write_csv(
                out_dir / f"files_{chain}.csv",
                ("file_type", "total", "embedded", "injected"),
                file_stats.rows(chain),
            )
        )
        paths.append(
            _write_csv(
                out_dir / f"monthly_texts_{chain}.csv",
                ("month", "count"),
                text_stats.monthly.rows(chain),
            )
        )
        paths.append(
            _write_csv(
                out_dir / f"text_lengths_{chain}.csv",
                ("length", "count"),
                text_stats.lengths.rows(chain),
            )
        )
    paths.append(
        _write_csv(
            out_dir / "urls.csv",
            ("scheme", "total", "bitcoin", "ethereum"),
            url_stats.rows(),
        )
    )
    return paths


def render_figures(out_dir: Path, text_stats: TextStats) -> list[Path]:
    """Draw the monthly series and the length histogram to PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []

    fig, ax = plt.subplots(figsize=(9, 4.5))
    for chain, marker in ((BITCOIN, "o"), (ETHEREUM, "s")):
        rows = text_stats.monthly.rows(chain)
        if rows:
            months = [m for m, _ in rows]
            counts = [n for _, n in rows]
            ax.plot(months, counts, marker=marker, markersize=3, label=chain)
    ax.set_xlabel("month")
    ax.set_ylabel("text findings")
    ax.set_title("Monthly text findings")
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    # Month labels crowd fast; keep roughly a dozen ticks.
    ticks = ax.get_xticks()
    if len(ticks) > 12:
        ax.set_xticks(ticks[:: max(1, len(ticks) // 12)])
    ax.tick_params(axis="x", rotation=45)
    fig.tight_layout()
    monthly_path = out_dir / "monthly_texts.png"
    fig.savefig(monthly_path, dpi=120)
    plt.close(fig)
    paths.append(monthly_path)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    drew = False
    for chain, marker in ((BITCOIN, "o"), (ETHEREUM, "s")):
        rows = text_stats.lengths.rows(chain)
        if rows:
            lengths = [length for length, _ in rows]
            counts = [n for _, n in rows]
            ax.plot(lengths, counts, marker=marker, markersize=3, linestyle="none", label=chain)
            drew = True
    if drew:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("text length (characters)")
    ax.set_ylabel("texts")
    ax.set_title("Text length distribution")
    if drew:
        ax.legend()
    fig.tight_layout()
    lengths_path = out_dir / "text_lengths.png"
    fig.savefig(lengths_path, dpi=120)
    plt.close(fig)
    paths.append(lengths_path)

    return paths


def render(
    out_dir: str | Path,
    result: ScanResult,
    top_n: int = DEFAULT_TOP_N,
    figures: bool = True,
) -> list[Path]:
    """Write every table (and optionally the figures) for a scan result."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text_stats = TextStats.collect(result.texts)
    url_stats = UrlStats.collect(result.urls)
    file_stats = FileStats.collect(result.files)
    paths = write_tables(out_dir, text_stats, url_stats, file_stats, top_n)
    if figures:
        paths.extend(render_figures(out_dir, text_stats))
    return paths
