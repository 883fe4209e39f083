"""Aggregation of findings into report tables and plot-ready series.

Every aggregate here is a bag of counters with a ``merge`` operation, so
partial aggregates built from stream shards combine into exactly the
result of aggregating the whole stream.  That keeps parallel scans and
incremental runs honest: aggregation order never changes a report.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .filescan import FileFinding, FileType, InsertionMode
from .textscan import TextFinding, TextualType
from .urlscan import SchemeClass, UrlFinding


def month_key(moment: datetime) -> str:
    utc = moment.astimezone(timezone.utc)
    return f"{utc.year:04d}-{utc.month:02d}"


def _month_range(first: str, last: str) -> list[str]:
    y0, m0 = (int(p) for p in first.split("-"))
    y1, m1 = (int(p) for p in last.split("-"))
    months = []
    index = y0 * 12 + (m0 - 1)
    end = y1 * 12 + (m1 - 1)
    while index <= end:
        months.append(f"{index // 12:04d}-{index % 12 + 1:02d}")
        index += 1
    return months


@dataclass
class MonthlySeries:
    """Findings per calendar month (UTC), keyed by chain."""

    counts: Counter = field(default_factory=Counter)  # (chain, "YYYY-MM") -> n

    def add(self, chain: str, moment: datetime, n: int = 1) -> None:
        self.counts[(chain, month_key(moment))] += n

    def merge(self, other: "MonthlySeries") -> "MonthlySeries":
        return MonthlySeries(counts=self.counts + other.counts)

    def rows(self, chain: str) -> list[tuple[str, int]]:
        """(month, count) rows with interior months zero-filled."""
        months = sorted(m for c, m in self.counts if c == chain)
        if not months:
            return []
        return [
            (m, self.counts.get((chain, m), 0))
            for m in _month_range(months[0], months[-1])
        ]

    def total(self, chain: str) -> int:
        return sum(n for (c, _), n in self.counts.items() if c == chain)


@dataclass
class LengthHistogram:
    """How many findings have a text of each character length."""

    counts: Counter = field(default_factory=Counter)  # (chain, length) -> n

    def add(self, chain: str, length: int, n: int = 1) -> None:
        self.counts[(chain, length)] += n

    def merge(self, other: "LengthHistogram") -> "LengthHistogram":
        return LengthHistogram(counts=self.counts + other.counts)

    def rows(self, chain: str) -> list[tuple[int, int]]:
        return sorted(
            (length, n) for (c, length), n in self.counts.items() if c == chain
        )

    def total(self, chain: str) -> int:
        return sum(n for (c, _), n in self.counts.items() if c == chain)


@dataclass(frozen=True)
class RankedTexts:
    """The n most frequent exact texts; ties break lexicographically."""

    entries: tuple[tuple[str, int], ...]


@dataclass
class TextStats:
    """Counters over text findings, mergeable across shards."""

    monthly: MonthlySeries = field(default_factory=MonthlySeries)
    lengths: LengthHistogram = field(default_factory=LengthHistogram)
    texts: Counter = field(default_factory=Counter)  # (chain, text) -> n
    types: Counter = field(default_factory=Counter)  # (chain, TextualType) -> n
    total: Counter = field(default_factory=Counter)  # chain -> n

    def add(self, finding: TextFinding) -> None:
        chain = finding.chain
        self.monthly.add(chain, finding.block_timestamp)
        self.lengths.add(chain, len(finding.text))
        self.texts[(chain, finding.text)] += 1
        for textual_type in finding.classes:
            self.types[(chain, textual_type)] += 1
        self.total[chain] += 1

    def merge(self, other: "TextStats") -> "TextStats":
        return TextStats(
            monthly=self.monthly.merge(other.monthly),
            lengths=self.lengths.merge(other.lengths),
            texts=self.texts + other.texts,
            types=self.types + other.types,
            total=self.total + other.total,
        )

    @classmethod
    def collect(cls, findings: Iterable[TextFinding]) -> "TextStats":
        stats = cls()
        for finding in findings:
            stats.add(finding)
        return stats

    def top_texts(self, n: int, chain: str | None = None) -> RankedTexts:
        pool = Counter()
        for (c, text), count in self.texts.items():
            if chain is None or c == chain:
                pool[text] += count
        ranked = sorted(pool.items(), key=lambda item: (-item[1], item[0]))
        return RankedTexts(entries=tuple(ranked[:n]))

    def type_rows(self, chain: str) -> list[tuple[TextualType, int]]:
        return [(t, self.types.get((chain, t), 0)) for t in TextualType]


@dataclass
class UrlStats:
    counts: Counter = field(default_factory=Counter)  # (chain, SchemeClass) -> n

    def add(self, finding: UrlFinding) -> None:
        self.counts[(finding.chain, finding.scheme_class)] += 1

    def merge(self, other: "UrlStats") -> "UrlStats":
        return UrlStats(counts=self.counts + other.counts)

    @classmethod
    def collect(cls, findings: Iterable[UrlFinding]) -> "UrlStats":
        stats = cls()
        for finding in findings:
            stats.add(finding)
        return stats

    def rows(self) -> list[tuple[str, int, int, int]]:
        """(scheme, total, bitcoin, ethereum) rows plus a Sum row."""
        from .ingest import BITCOIN, ETHEREUM

        rows = []
        for scheme in SchemeClass:
            btc = self.counts.get((BITCOIN, scheme), 0)
            eth = self.counts.get((ETHEREUM, scheme), 0)
            rows.append((scheme.value, btc + eth, btc, eth))
        rows.append(
            ("sum", sum(r[1] for r in rows), sum(r[2] for r in rows), sum(r[3] for r in rows))
        )
        return rows


@dataclass
class FileStats:
    # (chain, FileType, insertion_mode) -> n
    counts: Counter = field(default_factory=Counter)

    def add(self, finding: FileFinding) -> None:
        self.counts[(finding.chain, finding.file_type, finding.insertion_mode)] += 1

    def merge(self, other: "FileStats") -> "FileStats":
        return FileStats(counts=self.counts + other.counts)

    @classmethod
    def collect(cls, findings: Iterable[FileFinding]) -> "FileStats":
        stats = cls()
        for finding in findings:
            stats.add(finding)
        return stats

    def rows(self, chain: str) -> list[tuple[str, int, int, int]]:
        """(file_type, total, embedded, injected) rows for one chain."""
        rows = []
        for file_type in FileType:
            modes = {
                mode: n
                for (c, t, mode), n in self.counts.items()
                if c == chain and t == file_type
            }
            rows.append(
                (
                    file_type.value,
                    sum(modes.values()),
                    modes.get(InsertionMode.EMBEDDED.value, 0),
                    modes.get(InsertionMode.INJECTED.value, 0),
                )
            )
        return rows


# Convenience wrappers over the stats classes.

def monthly_frequency(findings: Iterable[TextFinding]) -> MonthlySeries:
    return TextStats.collect(findings).monthly


def length_histogram(findings: Iterable[TextFinding]) -> LengthHistogram:
    return TextStats.collect(findings).lengths


def top_texts(findings: Iterable[TextFinding], n: int) -> RankedTexts:
    return TextStats.collect(findings).top_texts(n)


def type_summary(findings: Iterable[TextFinding]) -> Counter:
    return TextStats.collect(findings).types


def url_summary(findings: Iterable[UrlFinding]) -> UrlStats:
    return UrlStats.collect(findings)


def file_summary(findings: Iterable[FileFinding]) -> FileStats:
    return FileStats.collect(findings)
