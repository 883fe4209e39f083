"""Printable-content detection over insertion-channel payloads.

The detector asks one question of a payload: how much of it reads as
text?  The answer is the printable ratio, computed over bytes rather
than characters:

* walk the payload as UTF-8; wherever a valid sequence decodes to a
  printable code point, all of its bytes count as printable;
* a byte that cannot start a valid sequence counts as one non-printable
  byte and the walk resumes at the next byte;
* printable means not a control, surrogate or unassigned code point,
  except that TAB, LF and CR do count as printable.

Fake keys and hashes in standard outputs are random-looking, so a lower
bar (90% printable) is enough to separate text from key material there.
Channels that hold arbitrary bytes by construction get no such slack:
only fully printable payloads (ratio 1.0) count, because anything with
a few raw bytes mixed in is more likely data than prose.

Detected texts are classified into shape categories: a finding is either
a single token (Strings) or whitespace-separated prose (Texts), and may
additionally contain JSON objects, hex runs, email addresses, URLs, PGP
armor, HTML/XML fragments or data URLs.
"""

from __future__ import annotations

import base64
import binascii
import json
import re
import unicodedata
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from functools import lru_cache

from . import urlscan
from .btcscript import ChannelPayload, InsertionChannel, ScriptError, channel_payloads
from .ingest import BITCOIN, ETHEREUM, BtcBlock, BtcTransaction, EthTransaction


@dataclass(frozen=True)
class DetectorConfig:
    """Tunable thresholds for the text detector."""

    ratio_threshold_standard_output: float = 0.90
    ratio_threshold_other: float = 1.00
    min_text_chars: int = 2
    # Shortest maximal hex run that counts as hex content; must be even.
    min_hex_run: int = 16
    # Standard inputs hold signatures and keys and drown the scan in
    # near-random data, so they are skipped unless explicitly enabled.
    include_standard_input: bool = False


DEFAULT_CONFIG = DetectorConfig()


class TextualType(str, Enum):
    STRINGS = "strings"
    TEXTS = "texts"
    CONTAIN_JSON = "contain_json"
    CONTAIN_HEX = "contain_hex"
    CONTAIN_EMAIL = "contain_email"
    CONTAIN_URL = "contain_url"
    CONTAIN_PGP = "contain_pgp"
    CONTAIN_HTML_XML = "contain_html_xml"
    CONTAIN_DATA_URL = "contain_data_url"


# Report labels for the shape categories.
TYPE_LABELS = {
    TextualType.STRINGS: "Strings",
    TextualType.TEXTS: "Texts",
    TextualType.CONTAIN_JSON: "Contain JSON",
    TextualType.CONTAIN_HEX: "Contain HEX",
    TextualType.CONTAIN_EMAIL: "Contain Email Address",
    TextualType.CONTAIN_URL: "Contain URL",
    TextualType.CONTAIN_PGP: "Contain PGP",
    TextualType.CONTAIN_HTML_XML: "Contain HTML/XML",
    TextualType.CONTAIN_DATA_URL: "Contain Data URL",
}


@dataclass(frozen=True)
class TextFinding:
    chain: str
    tx_hash: str
    block_timestamp: datetime
    channel: InsertionChannel
    ratio: float
    text: str
    classes: frozenset[TextualType]

    def to_record(self) -> dict:
        from .ingest import format_timestamp

        return {
            "chain": self.chain,
            "tx_hash": self.tx_hash,
            "block_timestamp": format_timestamp(self.block_timestamp),
            "channel": self.channel.value,
            "ratio": self.ratio,
            "text": self.text,
            "classes": sorted(c.value for c in self.classes),
        }

    @classmethod
    def from_record(cls, record: dict) -> "TextFinding":
        from .ingest import parse_timestamp

        return cls(
            chain=record["chain"],
            tx_hash=record["tx_hash"],
            block_timestamp=parse_timestamp(record["block_timestamp"]),
            channel=InsertionChannel(record["channel"]),
            ratio=record["ratio"],
            text=record["text"],
            classes=frozenset(TextualType(c) for c in record["classes"]),
        )


@dataclass(frozen=True)
class DataUrl:
    """One data: URI found in a text; data is None when base64 is broken."""

    media_type: str
    data: bytes | None


# ---------------------------------------------------------------------------
# printable ratio

_TAB_LF_CR = frozenset({0x09, 0x0A, 0x0D})


@lru_cache(maxsize=4096)
def _printable_codepoint(cp: int) -> bool:
    if cp in _TAB_LF_CR:
        return True
    return unicodedata.category(chr(cp)) not in ("Cc", "Cs", "Cn")


def _decode_one(data: bytes, i: int) -> tuple[int | None, int]:
    """Decode one UTF-8 sequence at offset i.

    Returns (codepoint, length) or (None, 1) when no valid sequence
    starts here.  Overlong forms, surrogates and values past U+10FFFF
    are invalid, matching the byte ranges of RFC 3629.
    """
    b0 = data[i]
    if b0 < 0x80:
        return b0, 1
    n = len(data)
    if 0xC2 <= b0 <= 0xDF:
        if i + 1 < n and 0x80 <= data[i + 1] <= 0xBF:
            return ((b0 & 0x1F) << 6) | (data[i + 1] & 0x3F), 2
        return None, 1
    if 0xE0 <= b0 <= 0xEF:
        lo, hi = 0x80, 0xBF
        if b0 == 0xE0:
            lo = 0xA0
        elif b0 == 0xED:
            hi = 0x9F
        if (
            i + 2 < n
            and lo <= data[i + 1] <= hi
            and 0x80 <= data[i + 2] <= 0xBF
        ):
            cp = ((b0 & 0x0F) << 12) | ((data[i + 1] & 0x3F) << 6) | (data[i + 2] & 0x3F)
            return cp, 3
        return None, 1
    if 0xF0 <= b0 <= 0xF4:
        lo, hi = 0x80, 0xBF
        if b0 == 0xF0:
            lo = 0x90
        elif b0 == 0xF4:
            hi = 0x8F
        if (
            i + 3 < n
            and lo <= data[i + 1] <= hi
            and 0x80 <= data[i + 2] <= 0xBF
            and 0x80 <= data[i + 3] <= 0xBF
        ):
            cp = (
                ((b0 & 0x07) << 18)
                | ((data[i + 1] & 0x3F) << 12)
                | ((data[i + 2] & 0x3F) << 6)
                | (data[i + 3] & 0x3F)
            )
            return cp, 4
        return None, 1
    return None, 1


def printable_ratio(payload: bytes) -> float:
    """Fraction of bytes inside valid UTF-8 runs of printable characters."""
    if not payload:
        raise ValueError("printable_ratio of an empty payload is undefined")
    printable = 0
    i = 0
    n = len(payload)
    while i < n:
        cp, length = _decode_one(payload, i)
        if cp is not None and _printable_codepoint(cp):
            printable += length
        i += length
    return printable / n


# ---------------------------------------------------------------------------
# shape classification

_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")
_HEX_RUN_RE = re.compile(r"[0-9A-Fa-f]+")
_PGP_RE = re.compile(
    r"-----BEGIN PGP [A-Z ]+-----[\s\S]*?-----END PGP [A-Z ]+-----"
)
_HTML_RE = re.compile(r"<([A-Za-z][A-Za-z0-9]*)(?:\s[^<>]*)?>[\s\S]*?</\1\s*>")
_DATA_URL_RE = re.compile(
    r"data:([\w.+-]+/[\w.+-]+)?(?:;[\w-]+=[\w.-]+)*;base64,([A-Za-z0-9+/]+={0,2})"
)
_JSON_DECODER = json.JSONDecoder()


def _contains_json_object(text: str) -> bool:
    start = text.find("{")
    while start != -1:
        try:
            value, _ = _JSON_DECODER.raw_decode(text, start)
        except ValueError:
            value = None
        if isinstance(value, dict) and value:
            return True
        start = text.find("{", start + 1)
    return False


def _contains_hex_run(text: str, min_run: int) -> bool:
    for match in _HEX_RUN_RE.finditer(text):
        length = match.end() - match.start()
        if length >= min_run and length % 2 == 0:
            return True
    return False


def classify_text(
    text: str, config: DetectorConfig = DEFAULT_CONFIG
) -> frozenset[TextualType]:
    """Assign shape categories to a detected text.

    Exactly one of STRINGS and TEXTS is always present; the contain-*
    categories stack on top as matched.
    """
    classes = set()
    if any(c.isspace() for c in text):
        classes.add(TextualType.TEXTS)
    else:
        classes.add(TextualType.STRINGS)
    if _contains_json_object(text):
        classes.add(TextualType.CONTAIN_JSON)
    if _contains_hex_run(text, config.min_hex_run):
        classes.add(TextualType.CONTAIN_HEX)
    if _EMAIL_RE.search(text):
        classes.add(TextualType.CONTAIN_EMAIL)
    if urlscan.SCHEME_PATTERN.search(text.encode("utf-8", errors="replace")):
        classes.add(TextualType.CONTAIN_URL)
    if _PGP_RE.search(text):
        classes.add(TextualType.CONTAIN_PGP)
    if _HTML_RE.search(text):
        classes.add(TextualType.CONTAIN_HTML_XML)
    if _DATA_URL_RE.search(text):
        classes.add(TextualType.CONTAIN_DATA_URL)
    return frozenset(classes)


def extract_data_urls(text: str) -> list[DataUrl]:
    """Decode every data: URI in the text.

    Entries whose base64 payload does not decode are kept with
    ``data=None`` rather than dropped, so callers can count them.
    """
    found = []
    for match in _DATA_URL_RE.finditer(text):
        media_type = match.group(1) or ""
        try:
            decoded = base64.b64decode(match.group(2), validate=True)
        except (binascii.Error, ValueError):
            decoded = None
        found.append(DataUrl(media_type=media_type, data=decoded))
    return found


# ---------------------------------------------------------------------------
# channel scanning

# Channels scanned for text and the threshold family they use.  P2SH
# inputs hold scripts, not chosen bytes, and are left to the file scan.
_TEXT_CHANNELS = (
    InsertionChannel.STANDARD_OUTPUT,
    InsertionChannel.OP_RETURN_OUTPUT,
    InsertionChannel.NON_STANDARD_OUTPUT,
    InsertionChannel.NON_STANDARD_INPUT,
)


def threshold_for(channel: InsertionChannel, config: DetectorConfig) -> float:
    if channel is InsertionChannel.STANDARD_OUTPUT:
        return config.ratio_threshold_standard_output
    return config.ratio_threshold_other


def _finding_from_payload(
    chain: str,
    payload: ChannelPayload,
    config: DetectorConfig,
) -> TextFinding | None:
    if not payload.data:
        return None
    ratio = printable_ratio(payload.data)
    if ratio < threshold_for(payload.channel, config):
        return None
    text = payload.data.decode("utf-8", errors="replace")
    if len(text) < config.min_text_chars:
        return None
    return TextFinding(
        chain=chain,
        tx_hash=payload.tx_hash,
        block_timestamp=payload.block_timestamp,
        channel=payload.channel,
        ratio=ratio,
        text=text,
        classes=classify_text(text, config),
    )


def scan_btc_text(
    tx: BtcTransaction,
    config: DetectorConfig = DEFAULT_CONFIG,
    errors: list[ScriptError] | None = None,
) -> list[TextFinding]:
    """Scan one Bitcoin transaction's channel payloads for text."""
    channels = _TEXT_CHANNELS
    if config.include_standard_input:
        channels = channels + (InsertionChannel.STANDARD_INPUT,)
    findings = []
    for payload in channel_payloads(tx, errors=errors):
        if payload.channel not in channels:
            continue
        finding = _finding_from_payload(BITCOIN, payload, config)
        if finding is not None:
            findings.append(finding)
    return findings


def scan_coinbase_text(
    block: BtcBlock, config: DetectorConfig = DEFAULT_CONFIG
) -> list[TextFinding]:
    """Scan a block's coinbase bytes; miners write these freely."""
    data = block.coinbase_bytes()
    payload = ChannelPayload(
        channel=InsertionChannel.COINBASE_INPUT,
        data=data,
        tx_hash=block.hash,
        block_timestamp=block.timestamp,
    )
    finding = _finding_from_payload(BITCOIN, payload, config)
    return [finding] if finding is not None else []


def scan_eth_text(
    tx: EthTransaction, config: DetectorConfig = DEFAULT_CONFIG
) -> list[TextFinding]:
    """Scan an Ethereum transaction's input data for text."""
    data = tx.input_bytes()
    if not data:
        return []
    payload = ChannelPayload(
        channel=InsertionChannel.ETH_INPUT,
        data=data,
        tx_hash=tx.hash,
        block_timestamp=tx.block_timestamp,
    )
    finding = _finding_from_payload(ETHEREUM, payload, config)
    return [finding] if finding is not None else []
