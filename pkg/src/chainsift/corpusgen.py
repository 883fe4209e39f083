"""Synthetic corpus generation with a plant manifest.

The generator writes three export files (Bitcoin transactions, Bitcoin
blocks, Ethereum transactions) plus a manifest that records every
deliberately planted payload and what a correct scan must report for
it: the exact text and shape classes, the exact URL and scheme, or the
exact file bytes, type, mode and verdict.  Everything is drawn from one
seeded generator, so the same seed always produces byte-identical files.

Plants are built from templates whose classifications are known by
construction, never by running the detectors; the manifest is the
independent ground truth the scan is judged against.  Noise records
carry random bytes in the 4-128 byte range, the regime where short
false-positive texts live; they are not listed in the manifest.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from random import Random

from . import filebodies
from .btcscript import InsertionChannel
from .filescan import FileType, Validity
from .ingest import BITCOIN, ETHEREUM, format_timestamp
from .textscan import TextualType

BTC_TX_FILE = "btc_transactions.ndjson"
BTC_BLOCK_FILE = "btc_blocks.ndjson"
ETH_TX_FILE = "eth_transactions.ndjson"
MANIFEST_FILE = "manifest.ndjson"

# A coinbase script is consensus-capped at 100 bytes; the other channels
# get a generous bound that still rejects absurd plants.
CHANNEL_CAPS = {
    InsertionChannel.COINBASE_INPUT: 100,
    InsertionChannel.STANDARD_OUTPUT: 100_000,
    InsertionChannel.OP_RETURN_OUTPUT: 100_000,
    InsertionChannel.NON_STANDARD_OUTPUT: 100_000,
    InsertionChannel.NON_STANDARD_INPUT: 100_000,
    InsertionChannel.P2SH_INPUT: 100_000,
    InsertionChannel.ETH_INPUT: 1_000_000,
}

TEXT_CHANNELS = (
    InsertionChannel.STANDARD_OUTPUT,
    InsertionChannel.NON_STANDARD_INPUT,
    InsertionChannel.OP_RETURN_OUTPUT,
    InsertionChannel.NON_STANDARD_OUTPUT,
    InsertionChannel.COINBASE_INPUT,
    InsertionChannel.ETH_INPUT,
)

_NOISE_CHANNELS = (
    InsertionChannel.ETH_INPUT,
    InsertionChannel.ETH_INPUT,
    InsertionChannel.OP_RETURN_OUTPUT,
    InsertionChannel.NON_STANDARD_OUTPUT,
    InsertionChannel.NON_STANDARD_INPUT,
    InsertionChannel.P2SH_INPUT,
    InsertionChannel.STANDARD_OUTPUT,
    InsertionChannel.COINBASE_INPUT,
)

# Injected Ethereum payloads ride behind a call selector and two ABI head
# words, as dynamic bytes arguments do.
_ETH_SELECTOR = b"\xa9\x05\x9c\xbb"
_ONION_ALPHABET = "abcdefghijklmnopqrstuvwxyz234567"


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenCounts:
    """How many of each plant kind to generate."""

    texts_per_channel: int = 40
    urls_per_scheme: int = 12
    eth_files_per_type: int = 1
    btc_files: int = 8


@dataclass(frozen=True)
class PlantEntry:
    tx_hash: str
    chain: str
    channel: str
    kind: str  # text | url | file
    payload_hex: str
    expected: dict

    def to_record(self) -> dict:
        return {
            "tx_hash": self.tx_hash,
            "chain": self.chain,
            "channel": self.channel,
            "kind": self.kind,
            "payload_hex": self.payload_hex,
            "expected": self.expected,
        }


@dataclass
class PlantManifest:
    entries: list[PlantEntry] = field(default_factory=list)

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for entry in self.entries:
                handle.write(json.dumps(entry.to_record(), sort_keys=True) + "\n")

    @classmethod
    def read(cls, path: str | Path) -> "PlantManifest":
        entries = []
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                entries.append(
                    PlantEntry(
                        tx_hash=record["tx_hash"],
                        chain=record["chain"],
                        channel=record["channel"],
                        kind=record["kind"],
                        payload_hex=record["payload_hex"],
                        expected=record["expected"],
                    )
                )
        return cls(entries=entries)


def _text_template(n: int) -> tuple[str, set[TextualType]]:
    """A planted text and the classes it carries by construction."""
    gif_b64 = base64.b64encode(filebodies.GIF).decode("ascii")
    forms = (
        (f"note{n}", {TextualType.STRINGS}),
        (f"status update {n} ok", {TextualType.TEXTS}),
        (
            f"ping admin{n}@example.org",
            {TextualType.TEXTS, TextualType.CONTAIN_EMAIL},
        ),
        ('{"seq":%d}' % n, {TextualType.STRINGS, TextualType.CONTAIN_JSON}),
        (
            f"see https://example.org/page/{n} now",
            {TextualType.TEXTS, TextualType.CONTAIN_URL},
        ),
        (
            f"deadbeef{n % 0xFFFFFFFF:08x}cafebabe",
            {TextualType.STRINGS, TextualType.CONTAIN_HEX},
        ),
        (
            f"-----BEGIN PGP MESSAGE-----\nhQ{n}\n-----END PGP MESSAGE-----",
            {TextualType.TEXTS, TextualType.CONTAIN_PGP},
        ),
        (
            f"<b>msg {n}</b>",
            {TextualType.TEXTS, TextualType.CONTAIN_HTML_XML},
        ),
        (
            "data:image/gif;base64," + gif_b64,
            {TextualType.STRINGS, TextualType.CONTAIN_DATA_URL},
        ),
    )
    return forms[n % len(forms)]


class _Builder:
    """Accumulates records and manifest entries from one seeded stream."""

    def __init__(self, seed: int):
        self.rng = Random(seed)
        self.btc_txs: list[dict] = []
        self.btc_blocks: list[dict] = []
        self.eth_txs: list[dict] = []
        self.manifest = PlantManifest()

    # -- low-level record pieces ------------------------------------------

    def _timestamp(self) -> str:
        base = datetime(2020, 1, 1, tzinfo=timezone.utc)
        moment = base + timedelta(
            days=self.rng.randint(0, 729), seconds=self.rng.randint(0, 86399)
        )
        return format_timestamp(moment)

    def _btc_hash(self) -> str:
        return self.rng.randbytes(32).hex()

    def _eth_hash(self) -> str:
        return "0x" + self.rng.randbytes(32).hex()

    def _dummy_input(self) -> dict:
        sig = self.rng.randbytes(71).hex()
        key = self.rng.randbytes(33).hex()
        return {"script_asm": f"{sig} {key}", "type": "pubkeyhash"}

    def _dummy_output(self) -> dict:
        digest = self.rng.randbytes(20).hex()
        return {
            "script_asm": f"OP_DUP OP_HASH160 {digest} OP_EQUALVERIFY OP_CHECKSIG",
            "type": "pubkeyhash",
        }

    def _standard_outputs(self, payload: bytes, pay_to_key: bool) -> list[dict]:
        """Split a payload over fake key or key-hash operands."""
        chunk_size = 33 if pay_to_key else 20
        slots = []
        for start in range(0, len(payload), chunk_size):
            chunk = payload[start : start + chunk_size].hex()
            if pay_to_key:
                slots.append({"script_asm": f"{chunk} OP_CHECKSIG", "type": "pubkey"})
            else:
                slots.append(
                    {
                        "script_asm": (
                            f"OP_DUP OP_HASH160 {chunk} OP_EQUALVERIFY OP_CHECKSIG"
                        ),
                        "type": "pubkeyhash",
                    }
                )
        return slots

    # -- payload placement --------------------------------------------------

    def _check_cap(self, payload: bytes, channel: InsertionChannel) -> None:
        cap = CHANNEL_CAPS[channel]
        if len(payload) > cap:
            raise GenerationError(
                f"payload of {len(payload)} bytes exceeds the "
                f"{channel.value} cap of {cap}"
            )

    def place_btc(
        self, payload: bytes, channel: InsertionChannel, pay_to_key: bool = False
    ) -> str:
        """Wrap a payload in a Bitcoin record for the channel; returns the hash."""
        self._check_cap(payload, channel)
        if channel is InsertionChannel.COINBASE_INPUT:
            block_hash = self._btc_hash()
            self.btc_blocks.append(
                {
                    "hash": block_hash,
                    "timestamp": self._timestamp(),
                    "coinbase_param": payload.hex(),
                }
            )
            return block_hash

        tx_hash = self._btc_hash()
        record = {
            "hash": tx_hash,
            "block_timestamp": self._timestamp(),
            "inputs": [],
            "outputs": [],
        }
        if channel is InsertionChannel.STANDARD_OUTPUT:
            record["outputs"] = self._standard_outputs(payload, pay_to_key)
            record["inputs"] = [self._dummy_input()]
        elif channel is InsertionChannel.OP_RETURN_OUTPUT:
            record["outputs"] = [
                {"script_asm": f"OP_RETURN {payload.hex()}", "type": "nulldata"}
            ]
            record["inputs"] = [self._dummy_input()]
        elif channel is InsertionChannel.NON_STANDARD_OUTPUT:
            record["outputs"] = [
                {"script_asm": f"{payload.hex()} OP_DROP", "type": "nonstandard"}
            ]
            record["inputs"] = [self._dummy_input()]
        elif channel is InsertionChannel.NON_STANDARD_INPUT:
            record["inputs"] = [
                {"script_asm": payload.hex(), "type": "nonstandard"}
            ]
            record["outputs"] = [self._dummy_output()]
        elif channel is InsertionChannel.P2SH_INPUT:
            record["inputs"] = [
                {"script_asm": payload.hex(), "type": "scripthash"}
            ]
            record["outputs"] = [self._dummy_output()]
        else:
            raise GenerationError(f"no Bitcoin placement for {channel.value}")
        self.btc_txs.append(record)
        return tx_hash

    def place_eth(self, payload: bytes) -> str:
        self._check_cap(payload, InsertionChannel.ETH_INPUT)
        tx_hash = self._eth_hash()
        self.eth_txs.append(
            {
                "hash": tx_hash,
                "block_timestamp": self._timestamp(),
                "from_address": "0x" + self.rng.randbytes(20).hex(),
                "to_address": "0x" + self.rng.randbytes(20).hex(),
                "input": "0x" + payload.hex(),
            }
        )
        return tx_hash

    def place(self, payload: bytes, channel: InsertionChannel, **kwargs) -> str:
        if channel is InsertionChannel.ETH_INPUT:
            return self.place_eth(payload)
        return self.place_btc(payload, channel, **kwargs)

    # -- plants ------------------------------------------------------------

    def plant_texts(self, per_channel: int) -> None:
        n = 0
        for channel in TEXT_CHANNELS:
            for index in range(per_channel):
                text, classes = _text_template(n)
                n += 1
                payload = text.encode("utf-8")
                chain = ETHEREUM if channel is InsertionChannel.ETH_INPUT else BITCOIN
                tx_hash = self.place(
                    payload, channel, pay_to_key=bool(index % 2)
                    if channel is InsertionChannel.STANDARD_OUTPUT
                    else False,
                )
                self.manifest.entries.append(
                    PlantEntry(
                        tx_hash=tx_hash,
                        chain=chain,
                        channel=channel.value,
                        kind="text",
                        payload_hex=payload.hex(),
                        expected={
                            "text": text,
                            "ratio": 1.0,
                            "classes": sorted(c.value for c in classes),
                        },
                    )
                )

    def plant_urls(self, per_scheme: int) -> None:
        channels = (InsertionChannel.ETH_INPUT, InsertionChannel.OP_RETURN_OUTPUT)
        for scheme_index, scheme in enumerate(("http", "ipfs", "onion")):
            for index in range(per_scheme):
                n = scheme_index * per_scheme + index
                if scheme == "http":
                    url = f"https://files{n}.example.net/item/{n}"
                elif scheme == "ipfs":
                    url = f"ipfs://bafybeic{n:06d}qexamplemanifest/file{n}.png"
                else:
                    label = "".join(
                        self.rng.choice(_ONION_ALPHABET) for _ in range(56)
                    )
                    url = f"{label}.onion"
                channel = channels[index % 2]
                if channel is InsertionChannel.ETH_INPUT:
                    payload = _ETH_SELECTOR + url.encode("ascii") + b"\x00"
                    offset = len(_ETH_SELECTOR)
                else:
                    wrapper = f"get {url} fast" if scheme != "onion" else f"visit {url} today"
                    payload = wrapper.encode("ascii")
                    offset = wrapper.index(url)
                chain = ETHEREUM if channel is InsertionChannel.ETH_INPUT else BITCOIN
                tx_hash = self.place(payload, channel)
                self.manifest.entries.append(
                    PlantEntry(
                        tx_hash=tx_hash,
                        chain=chain,
                        channel=channel.value,
                        kind="url",
                        payload_hex=payload.hex(),
                        expected={
                            "url": url,
                            "scheme_class": scheme,
                            "offset": offset,
                        },
                    )
                )

    def plant_eth_files(self, per_type: int) -> None:
        for file_type in FileType:
            body = filebodies.BODIES[file_type]
            for _ in range(per_type):
                for mode in ("embedded", "injected"):
                    if mode == "embedded":
                        payload = body
                        offset = 0
                    else:
                        head = (32).to_bytes(32, "big") + len(body).to_bytes(32, "big")
                        payload = _ETH_SELECTOR + head + body
                        offset = len(_ETH_SELECTOR) + len(head)
                    tx_hash = self.place_eth(payload)
                    self.manifest.entries.append(
                        PlantEntry(
                            tx_hash=tx_hash,
                            chain=ETHEREUM,
                            channel=InsertionChannel.ETH_INPUT.value,
                            kind="file",
                            payload_hex=payload.hex(),
                            expected={
                                "file_type": file_type.value,
                                "insertion_mode": mode,
                                "valid": Validity.VALIDATED.value,
                                "offset": offset,
                                "data_hex": body.hex(),
                            },
                        )
                    )

    _BTC_FILE_PLAN = (
        (FileType.PNG, InsertionChannel.STANDARD_OUTPUT),
        (FileType.GIF, InsertionChannel.P2SH_INPUT),
        (FileType.WEBP, InsertionChannel.NON_STANDARD_INPUT),
        (FileType.RAR, InsertionChannel.COINBASE_INPUT),
        (FileType.JPEG, InsertionChannel.STANDARD_OUTPUT),
        (FileType.ZIP, InsertionChannel.P2SH_INPUT),
        (FileType.MP4, InsertionChannel.NON_STANDARD_INPUT),
        (FileType.SEVENZIP, InsertionChannel.COINBASE_INPUT),
    )

    def plant_btc_files(self, count: int) -> None:
        for index in range(count):
            file_type, channel = self._BTC_FILE_PLAN[index % len(self._BTC_FILE_PLAN)]
            body = filebodies.BODIES[file_type]
            tx_hash = self.place(body, channel)
            self.manifest.entries.append(
                PlantEntry(
                    tx_hash=tx_hash,
                    chain=BITCOIN,
                    channel=channel.value,
                    kind="file",
                    payload_hex=body.hex(),
                    expected={
                        "file_type": file_type.value,
                        "insertion_mode": channel.value,
                        "valid": Validity.VALIDATED.value,
                        "offset": 0,
                        "data_hex": body.hex(),
                    },
                )
            )

    def add_noise(self, count: int) -> None:
        for _ in range(count):
            channel = self.rng.choice(_NOISE_CHANNELS)
            upper = 100 if channel is InsertionChannel.COINBASE_INPUT else 128
            payload = self.rng.randbytes(self.rng.randint(4, upper))
            if channel is InsertionChannel.ETH_INPUT:
                self.place_eth(payload)
            elif channel is InsertionChannel.COINBASE_INPUT:
                self.place_btc(payload, channel)
            else:
                # Noise transactions carry just the noise slot so their
                # channel payloads are exactly the drawn bytes.
                tx_hash = self._btc_hash()
                record = {
                    "hash": tx_hash,
                    "block_timestamp": self._timestamp(),
                    "inputs": [],
                    "outputs": [],
                }
                if channel is InsertionChannel.STANDARD_OUTPUT:
                    record["outputs"] = self._standard_outputs(payload, False)
                elif channel is InsertionChannel.OP_RETURN_OUTPUT:
                    record["outputs"] = [
                        {"script_asm": f"OP_RETURN {payload.hex()}", "type": "nulldata"}
                    ]
                elif channel is InsertionChannel.NON_STANDARD_OUTPUT:
                    record["outputs"] = [
                        {"script_asm": f"{payload.hex()} OP_DROP", "type": "nonstandard"}
                    ]
                elif channel is InsertionChannel.NON_STANDARD_INPUT:
                    record["inputs"] = [
                        {"script_asm": payload.hex(), "type": "nonstandard"}
                    ]
                else:
                    record["inputs"] = [
                        {"script_asm": payload.hex(), "type": "scripthash"}
                    ]
                self.btc_txs.append(record)


def generate(
    out_dir: str | Path,
    seed: int = 1,
    counts: GenCounts = GenCounts(),
    noise: int = 0,
) -> PlantManifest:
    """Write a synthetic corpus and its manifest into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    builder = _Builder(seed)
    builder.plant_texts(counts.texts_per_channel)
    builder.plant_urls(counts.urls_per_scheme)
    builder.plant_eth_files(counts.eth_files_per_type)
    builder.plant_btc_files(counts.btc_files)
    builder.add_noise(noise)

    builder.rng.shuffle(builder.btc_txs)
    builder.rng.shuffle(builder.btc_blocks)
    builder.rng.shuffle(builder.eth_txs)

    for name, records in (
        (BTC_TX_FILE, builder.btc_txs),
        (BTC_BLOCK_FILE, builder.btc_blocks),
        (ETH_TX_FILE, builder.eth_txs),
    ):
        with open(out_dir / name, "w", encoding="utf-8") as handle:
            for record in records:
                handle.write(json.dumps(record, sort_keys=True) + "\n")
    builder.manifest.write(out_dir / MANIFEST_FILE)
    return builder.manifest
