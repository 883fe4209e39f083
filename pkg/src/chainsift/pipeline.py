"""Sharded scanning over export files with deterministic output.

The driver reads newline-delimited export records, splits them into
fixed-size shards, scans each shard (in worker processes when asked
for), merges shard results in shard order and finishes with a canonical
sort.  The sort makes the output bytes independent of how many workers
ran, so the same corpus always produces the same files.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .btcscript import InsertionChannel, ScriptError, channel_payloads
from .filescan import FileFinding, scan_btc_block_files, scan_btc_tx_files, scan_eth_tx_files
from .ingest import (
    BITCOIN,
    ETHEREUM,
    ParseError,
    iter_lines,
    parse_btc_block,
    parse_btc_tx,
    parse_eth_tx,
)
from .textscan import (
    DEFAULT_CONFIG,
    DetectorConfig,
    TextFinding,
    scan_btc_text,
    scan_coinbase_text,
    scan_eth_text,
)
from .urlscan import UrlFinding, find_onion, find_url, validate_and_classify

BTC_TX = "btc_tx"
BTC_BLOCK = "btc_block"
ETH_TX = "eth_tx"

TEXT = "text"
URL = "url"
FILE = "file"
ALL_KINDS = (TEXT, URL, FILE)

# Bitcoin channels whose payloads get the URL matchers; mirrors the text
# scan so a URL is only looked for where chosen bytes can sit.
_URL_CHANNELS = (
    InsertionChannel.STANDARD_OUTPUT,
    InsertionChannel.OP_RETURN_OUTPUT,
    InsertionChannel.NON_STANDARD_OUTPUT,
    InsertionChannel.NON_STANDARD_INPUT,
)


class StrictDataError(Exception):
    """A record failed to parse while strict mode was on."""


@dataclass(frozen=True)
class RunConfig:
    jobs: int = 1
    strict: bool = False
    shard_size: int = 2000
    detector: DetectorConfig = DEFAULT_CONFIG


@dataclass
class ScanStats:
    records: Counter = field(default_factory=Counter)
    parse_errors: int = 0
    script_errors: int = 0
    url_drops: Counter = field(default_factory=Counter)

    def merge(self, other: "ScanStats") -> "ScanStats":
        self.records.update(other.records)
        self.parse_errors += other.parse_errors
        self.script_errors += other.script_errors
        self.url_drops.update(other.url_drops)
        return self


@dataclass
class ScanResult:
    texts: list[TextFinding] = field(default_factory=list)
    urls: list[UrlFinding] = field(default_factory=list)
    files: list[FileFinding] = field(default_factory=list)
    stats: ScanStats = field(default_factory=ScanStats)

    def extend(self, other: "ScanResult") -> "ScanResult":
        self.texts.extend(other.texts)
        self.urls.extend(other.urls)
        self.files.extend(other.files)
        self.stats.merge(other.stats)
        return self

    def sort(self) -> None:
        self.texts.sort(key=lambda f: (f.tx_hash, f.channel.value))
        self.urls.sort(key=lambda f: (f.tx_hash, f.offset, f.url))
        self.files.sort(
            key=lambda f: (f.tx_hash, f.offset, f.file_type.value, f.channel.value)
        )


def _url_findings_from_payload(
    data: bytes,
    chain: str,
    tx_hash: str,
    block_timestamp,
    drops: Counter,
) -> list[UrlFinding]:
    raw = find_url(data, chain, tx_hash, block_timestamp)
    if raw is None:
        raw = find_onion(data, chain, tx_hash, block_timestamp)
    if raw is None:
        return []
    finding = validate_and_classify(raw, drops)
    return [finding] if finding is not None else []


def _scan_shard(
    record_kind: str,
    lines: list[tuple[int, str]],
    kinds: tuple[str, ...],
    run: RunConfig,
) -> ScanResult:
    """Scan one shard of export lines; this runs inside workers."""
    result = ScanResult()
    stats = result.stats
    for line_no, line in lines:
        # Each detector kind walks the same slots and would re-collect
        # the same script errors, so give each its own list and count
        # the largest.
        error_lists: list[list[ScriptError]] = []

        def errors() -> list[ScriptError]:
            error_lists.append([])
            return error_lists[-1]

        try:
            record = json.loads(line)
            if record_kind == BTC_TX:
                tx = parse_btc_tx(record)
            elif record_kind == BTC_BLOCK:
                block = parse_btc_block(record)
            else:
                eth_tx = parse_eth_tx(record)
        except (ParseError, ValueError) as exc:
            if run.strict:
                raise StrictDataError(f"line {line_no}: {exc}") from exc
            stats.parse_errors += 1
            continue
        stats.records[record_kind] += 1

        if record_kind == BTC_TX:
            if TEXT in kinds:
                result.texts.extend(scan_btc_text(tx, run.detector, errors()))
            if URL in kinds:
                for payload in channel_payloads(tx, errors=errors()):
                    if payload.channel not in _URL_CHANNELS:
                        continue
                    result.urls.extend(
                        _url_findings_from_payload(
                            payload.data,
                            BITCOIN,
                            tx.hash,
                            tx.block_timestamp,
                            stats.url_drops,
                        )
                    )
            if FILE in kinds:
                result.files.extend(scan_btc_tx_files(tx, errors()))
        elif record_kind == BTC_BLOCK:
            if TEXT in kinds:
                result.texts.extend(scan_coinbase_text(block, run.detector))
            if URL in kinds:
                result.urls.extend(
                    _url_findings_from_payload(
                        block.coinbase_bytes(),
                        BITCOIN,
                        block.hash,
                        block.timestamp,
                        stats.url_drops,
                    )
                )
            if FILE in kinds:
                result.files.extend(scan_btc_block_files(block))
        else:
            if TEXT in kinds:
                result.texts.extend(scan_eth_text(eth_tx, run.detector))
            if URL in kinds:
                result.urls.extend(
                    _url_findings_from_payload(
                        eth_tx.input_bytes(),
                        ETHEREUM,
                        eth_tx.hash,
                        eth_tx.block_timestamp,
                        stats.url_drops,
                    )
                )
            if FILE in kinds:
                result.files.extend(scan_eth_tx_files(eth_tx))

        stats.script_errors += max((len(l) for l in error_lists), default=0)
    return result


def _shards(path: Path, size: int):
    shard: list[tuple[int, str]] = []
    for line_no, line in iter_lines(path):
        shard.append((line_no, line))
        if len(shard) >= size:
            yield shard
            shard = []
    if shard:
        yield shard


def _scan_file(
    path: Path,
    record_kind: str,
    kinds: tuple[str, ...],
    run: RunConfig,
) -> ScanResult:
    result = ScanResult()
    if run.jobs > 1:
        with ProcessPoolExecutor(max_workers=run.jobs) as pool:
            futures = [
                pool.submit(_scan_shard, record_kind, shard, kinds, run)
                for shard in _shards(path, run.shard_size)
            ]
            for future in futures:
                result.extend(future.result())
    else:
        for shard in _shards(path, run.shard_size):
            result.extend(_scan_shard(record_kind, shard, kinds, run))
    return result


def scan_corpus(
    btc_txs: str | Path | None = None,
    btc_blocks: str | Path | None = None,
    eth_txs: str | Path | None = None,
    kinds: tuple[str, ...] = ALL_KINDS,
    run: RunConfig = RunConfig(),
) -> ScanResult:
    """Scan up to three export files and return sorted findings."""
    result = ScanResult()
    for path, record_kind in (
        (btc_txs, BTC_TX),
        (btc_blocks, BTC_BLOCK),
        (eth_txs, ETH_TX),
    ):
        if path is None:
            continue
        result.extend(_scan_file(Path(path), record_kind, kinds, run))
    result.sort()
    return result


def scan_directory(
    corpus_dir: str | Path,
    kinds: tuple[str, ...] = ALL_KINDS,
    run: RunConfig = RunConfig(),
) -> ScanResult:
    """Scan a generated corpus directory by its conventional file names."""
    from . import corpusgen

    corpus_dir = Path(corpus_dir)
    named = {
        "btc_txs": corpus_dir / corpusgen.BTC_TX_FILE,
        "btc_blocks": corpus_dir / corpusgen.BTC_BLOCK_FILE,
        "eth_txs": corpus_dir / corpusgen.ETH_TX_FILE,
    }
    kwargs = {name: path for name, path in named.items() if path.exists()}
    if not kwargs:
        raise FileNotFoundError(f"no export files under {corpus_dir}")
    return scan_corpus(kinds=kinds, run=run, **kwargs)


# ---------------------------------------------------------------------------
# writers

def write_text_findings(path: str | Path, findings: list[TextFinding]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for finding in findings:
            handle.write(json.dumps(finding.to_record(), sort_keys=True) + "\n")


def write_url_findings(path: str | Path, findings: list[UrlFinding]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for finding in findings:
            handle.write(json.dumps(finding.to_record(), sort_keys=True) + "\n")


def write_file_findings(
    path: str | Path,
    findings: list[FileFinding],
    dump_dir: str | Path | None = None,
) -> None:
    """Write file findings; with ``dump_dir`` also carve the bytes out."""
    dump_path = Path(dump_dir) if dump_dir is not None else None
    if dump_path is not None:
        dump_path.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for finding in findings:
            carved = None
            if dump_path is not None:
                name = (
                    f"{finding.chain}_{finding.tx_hash.removeprefix('0x')[:16]}"
                    f"_{finding.offset}.{finding.file_type.value}"
                )
                (dump_path / name).write_bytes(finding.data)
                carved = str(dump_path / name)
            handle.write(
                json.dumps(finding.to_record(path=carved), sort_keys=True) + "\n"
            )
