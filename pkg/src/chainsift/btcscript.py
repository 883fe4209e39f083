"""Bitcoin script introspection: tokens, mutable bytes, insertion channels.

A script's assembly form is a whitespace-separated token list.  Tokens
prefixed with ``OP_`` are opcodes; every other token is taken to be hex
pushdata.  The bytes an author can choose freely (the "mutable" bytes of
a script) are the pushdata operands concatenated in script order, which
is where inserted content lives: fake public keys and hashes in standard
scripts, the data operand of OP_RETURN, or the whole body of a
non-standard script.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from datetime import datetime
from enum import Enum

from .ingest import BtcTransaction, ScriptSlot

_HEX_DIGITS = frozenset(string.hexdigits)


class ScriptError(ValueError):
    """Base class for script-level problems inside a single slot."""


class TokenError(ScriptError):
    """A pushdata token that is not even-length hex."""


class ClassifyError(ScriptError):
    """A slot that cannot be assigned an insertion channel."""


class InsertionChannel(str, Enum):
    """Where in a transaction a payload was placed."""

    STANDARD_OUTPUT = "standard_output"
    STANDARD_INPUT = "standard_input"
    OP_RETURN_OUTPUT = "op_return_output"
    NON_STANDARD_OUTPUT = "non_standard_output"
    NON_STANDARD_INPUT = "non_standard_input"
    P2SH_INPUT = "p2sh_input"
    COINBASE_INPUT = "coinbase_input"
    ETH_INPUT = "eth_input"


@dataclass(frozen=True)
class ScriptToken:
    """One token: an opcode mnemonic, or pushdata with its decoded bytes."""

    text: str
    data: bytes | None = None

    @property
    def is_push(self) -> bool:
        return self.data is not None


@dataclass(frozen=True)
class ChannelPayload:
    """The concatenated mutable bytes of one channel of one transaction."""

    channel: InsertionChannel
    data: bytes
    tx_hash: str
    block_timestamp: datetime


def tokenize(script_asm: str) -> list[ScriptToken]:
    """Split assembly text into opcode and pushdata tokens.

    Raises :class:`TokenError` for a pushdata token that is not
    even-length hex.
    """
    tokens = []
    for text in script_asm.split():
        if text.startswith("OP_"):
            tokens.append(ScriptToken(text=text))
            continue
        if len(text) % 2 or not all(c in _HEX_DIGITS for c in text):
            raise TokenError(f"bad pushdata token {text!r}")
        tokens.append(ScriptToken(text=text, data=bytes.fromhex(text)))
    return tokens


def mutable_bytes(tokens: list[ScriptToken]) -> bytes:
    """Concatenate pushdata bytes in token order."""
    return b"".join(token.data for token in tokens if token.data is not None)


# Type labels the source tables use.  Inputs carry the label of the output
# they spend.
_STANDARD_OUTPUT_TYPES = frozenset({"pubkey", "pubkeyhash", "multisig"})
_KNOWN_TYPES = _STANDARD_OUTPUT_TYPES | frozenset(
    {
        "",
        "nulldata",
        "nonstandard",
        "scripthash",
        "witness_v0_keyhash",
        "witness_v0_scripthash",
        "witness_v1_taproot",
        "witness_unknown",
    }
)


def _leads_with_op_return(script_asm: str) -> bool:
    head = script_asm.split(maxsplit=1)
    return bool(head) and head[0] == "OP_RETURN"


def classify_slot(slot: ScriptSlot, is_input: bool) -> InsertionChannel:
    """Assign an insertion channel to one script slot.

    Raises :class:`ClassifyError` when the type label is unknown and the
    script is empty, which leaves nothing to classify by.
    """
    slot_type = slot.type
    if slot_type not in _KNOWN_TYPES and not slot.script_asm:
        raise ClassifyError(f"unknown slot type {slot_type!r} with empty script")

    if is_input:
        if slot_type == "scripthash":
            return InsertionChannel.P2SH_INPUT
        if slot_type == "nonstandard":
            return InsertionChannel.NON_STANDARD_INPUT
        return InsertionChannel.STANDARD_INPUT

    if slot_type == "nulldata" or _leads_with_op_return(slot.script_asm):
        return InsertionChannel.OP_RETURN_OUTPUT
    if slot_type == "nonstandard":
        return InsertionChannel.NON_STANDARD_OUTPUT
    if slot_type in _KNOWN_TYPES:
        # Remaining known labels (pubkey, pubkeyhash, multisig, scripthash,
        # witness variants) all describe standard payment outputs.
        return InsertionChannel.STANDARD_OUTPUT
    return InsertionChannel.NON_STANDARD_OUTPUT


def channel_payloads(
    tx: BtcTransaction, errors: list[ScriptError] | None = None
) -> list[ChannelPayload]:
    """Group a transaction's mutable bytes by insertion channel.

    Emits at most one payload per channel, holding the slot payloads
    concatenated in slot order (outputs first, then inputs).  Channels
    whose mutable bytes come out empty are omitted.  Slots that fail to
    tokenize or classify are skipped; when ``errors`` is given the
    exceptions are appended to it.
    """
    buckets: dict[InsertionChannel, list[bytes]] = {}
    for is_input, slots in ((False, tx.outputs), (True, tx.inputs)):
        for slot in slots:
            try:
                channel = classify_slot(slot, is_input=is_input)
                data = mutable_bytes(tokenize(slot.script_asm))
            except ScriptError as exc:
                if errors is not None:
                    errors.append(exc)
                continue
            if data:
                buckets.setdefault(channel, []).append(data)
    return [
        ChannelPayload(
            channel=channel,
            data=b"".join(parts),
            tx_hash=tx.hash,
            block_timestamp=tx.block_timestamp,
        )
        for channel, parts in buckets.items()
    ]
