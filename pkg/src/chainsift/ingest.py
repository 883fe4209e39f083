"""Readers for line-delimited blockchain export records.

Input files hold one JSON object per line, with field names exactly as
they appear in the public warehouse tables (``hash``, ``block_timestamp``,
``script_asm``, ``coinbase_param``, ``input``, ...).  Files ending in
``.gz`` are decompressed transparently.  Unknown fields are ignored so
exports that carry extra columns load unchanged.
"""

from __future__ import annotations

import gzip
import json
import string
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

BITCOIN = "bitcoin"
ETHEREUM = "ethereum"

_HEX_DIGITS = frozenset(string.hexdigits)


class ParseError(ValueError):
    """A record that does not satisfy the documented schema."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message)
        self.message = message
        self.line_no = line_no

    def __str__(self) -> str:
        if self.line_no is None:
            return self.message
        return f"line {self.line_no}: {self.message}"


class HexError(ParseError):
    """A field that should be hex-encoded but is not."""


def hex_to_bytes(value: str, field: str = "value") -> bytes:
    """Decode a hex string, tolerating an optional ``0x`` prefix.

    Odd-length or non-hex input raises :class:`HexError`.
    """
    if value.startswith(("0x", "0X")):
        value = value[2:]
    if len(value) % 2:
        raise HexError(f"{field}: odd-length hex string ({len(value)} digits)")
    try:
        return bytes.fromhex(value)
    except ValueError:
        raise HexError(f"{field}: invalid hex digit") from None


def bytes_to_hex(data: bytes, prefix: bool = False) -> str:
    return ("0x" + data.hex()) if prefix else data.hex()


def parse_timestamp(value: str, field: str = "block_timestamp") -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime.

    Accepts a ``Z`` or numeric offset suffix, a trailing `` UTC`` marker,
    a space or ``T`` date separator, and optional fractional seconds.
    Naive timestamps are taken to be UTC.
    """
    text = value.strip()
    if text.endswith(" UTC"):
        text = text[:-4]
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise ParseError(f"{field}: unparseable timestamp {value!r}") from None
    if parsed.tzinfo is None:
        return parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def format_timestamp(moment: datetime) -> str:
    moment = moment.astimezone(timezone.utc)
    if moment.microsecond:
        return moment.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class ScriptSlot:
    """One input or output script of a Bitcoin transaction.

    ``type`` is the address-type label from the source table, for example
    pubkey, pubkeyhash, multisig, scripthash, nulldata, nonstandard or one
    of the witness types.  Inputs carry the type of the output they spend.
    """

    script_asm: str
    type: str

    def to_record(self) -> dict[str, str]:
        return {"script_asm": self.script_asm, "type": self.type}


@dataclass(frozen=True)
class BtcTransaction:
    hash: str
    block_timestamp: datetime
    inputs: tuple[ScriptSlot, ...]
    outputs: tuple[ScriptSlot, ...]

    def to_record(self) -> dict[str, Any]:
        return {
            "hash": self.hash,
            "block_timestamp": format_timestamp(self.block_timestamp),
            "inputs": [slot.to_record() for slot in self.inputs],
            "outputs": [slot.to_record() for slot in self.outputs],
        }


@dataclass(frozen=True)
class BtcBlock:
    hash: str
    timestamp: datetime
    coinbase_param: str

    def coinbase_bytes(self) -> bytes:
        return hex_to_bytes(self.coinbase_param, "coinbase_param")

    def to_record(self) -> dict[str, Any]:
        return {
            "hash": self.hash,
            "timestamp": format_timestamp(self.timestamp),
            "coinbase_param": self.coinbase_param,
        }


@dataclass(frozen=True)
class EthTransaction:
    hash: str
    block_timestamp: datetime
    from_address: str | None
    to_address: str | None
    input: str

    def input_bytes(self) -> bytes:
        return hex_to_bytes(self.input, "input")

    def to_record(self) -> dict[str, Any]:
        return {
            "hash": self.hash,
            "block_timestamp": format_timestamp(self.block_timestamp),
            "from_address": self.from_address,
            "to_address": self.to_address,
            "input": self.input,
        }


def _require(record: Mapping[str, Any], field: str) -> Any:
    if field not in record or record[field] is None:
        raise ParseError(f"missing required field {field!r}")
    return record[field]


def _tx_hash(value: Any, prefixed: bool) -> str:
    if not isinstance(value, str):
        raise ParseError("hash: expected a string")
    body = value
    if prefixed:
        if not value.startswith(("0x", "0X")):
            raise ParseError(f"hash: missing 0x prefix in {value!r}")
        body = value[2:]
    if len(body) != 64 or not all(c in _HEX_DIGITS for c in body):
        raise ParseError(f"hash: expected 64 hex digits, got {value!r}")
    return ("0x" + body.lower()) if prefixed else body.lower()


def _check_script_asm(asm: Any, where: str) -> str:
    if not isinstance(asm, str):
        raise ParseError(f"{where}: script_asm must be a string")
    for token in asm.split():
        if token.startswith("OP_"):
            continue
        if len(token) % 2 or not all(c in _HEX_DIGITS for c in token):
            raise HexError(f"{where}: bad pushdata token {token!r}")
    return asm


def _parse_slots(record: Mapping[str, Any], field: str) -> tuple[ScriptSlot, ...]:
    raw = record.get(field) or []
    if not isinstance(raw, list):
        raise ParseError(f"{field}: expected a list")
    slots = []
    for index, item in enumerate(raw):
        if not isinstance(item, Mapping):
            raise ParseError(f"{field}[{index}]: expected an object")
        where = f"{field}[{index}]"
        asm = _check_script_asm(item.get("script_asm", ""), where)
        slot_type = item.get("type") or ""
        if not isinstance(slot_type, str):
            raise ParseError(f"{where}: type must be a string")
        slots.append(ScriptSlot(script_asm=asm, type=slot_type))
    return tuple(slots)


def parse_btc_tx(record: Mapping[str, Any]) -> BtcTransaction:
    return BtcTransaction(
        hash=_tx_hash(_require(record, "hash"), prefixed=False),
        block_timestamp=parse_timestamp(str(_require(record, "block_timestamp"))),
        inputs=_parse_slots(record, "inputs"),
        outputs=_parse_slots(record, "outputs"),
    )


def parse_btc_block(record: Mapping[str, Any]) -> BtcBlock:
    coinbase = record.get("coinbase_param") or ""
    if not isinstance(coinbase, str):
        raise ParseError("coinbase_param: expected a string")
    if len(coinbase) % 2 or not all(c in _HEX_DIGITS for c in coinbase):
        raise HexError(f"coinbase_param: bad hex {coinbase!r}")
    return BtcBlock(
        hash=_tx_hash(_require(record, "hash"), prefixed=False),
        timestamp=parse_timestamp(str(_require(record, "timestamp"))),
        coinbase_param=coinbase,
    )


def parse_eth_tx(record: Mapping[str, Any]) -> EthTransaction:
    raw_input = _require(record, "input")
    if not isinstance(raw_input, str) or not raw_input.startswith(("0x", "0X")):
        raise ParseError(f"input: expected a 0x-prefixed hex string, got {raw_input!r}")
    body = raw_input[2:]
    if len(body) % 2 or not all(c in _HEX_DIGITS for c in body):
        raise HexError("input: bad hex payload")

    def address(field: str) -> str | None:
        value = record.get(field)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ParseError(f"{field}: expected a string or null")
        return value.lower()

    return EthTransaction(
        hash=_tx_hash(_require(record, "hash"), prefixed=True),
        block_timestamp=parse_timestamp(str(_require(record, "block_timestamp"))),
        from_address=address("from_address"),
        to_address=address("to_address"),
        input="0x" + body.lower(),
    )


def open_export(path: str | Path):
    """Open an export file for text reading, decompressing ``.gz`` names."""
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def iter_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (line_no, line) pairs for non-blank lines, 1-based."""
    with open_export(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            if line.strip():
                yield line_no, line


def _read(path: str | Path, parser) -> Iterator[Any]:
    for line_no, line in iter_lines(path):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line_no) from None
        if not isinstance(record, Mapping):
            raise ParseError("each line must hold a JSON object", line_no)
        try:
            yield parser(record)
        except ParseError as exc:
            exc.line_no = line_no
            raise


def read_btc_txs(path: str | Path) -> Iterator[BtcTransaction]:
    return _read(path, parse_btc_tx)


def read_btc_blocks(path: str | Path) -> Iterator[BtcBlock]:
    return _read(path, parse_btc_block)


def read_eth_txs(path: str | Path) -> Iterator[EthTransaction]:
    return _read(path, parse_eth_tx)
