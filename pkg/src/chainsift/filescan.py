"""File carving from transaction payloads by magic-byte signatures.

A carve runs from the start of a matched signature to the very end of
the payload, because inserted files usually occupy the tail of whatever
slot carries them and their true length is unknown.  Types whose
signatures are shorter than three bytes are not covered at all: two
magic bytes match far too much random data to be worth reporting.

Every carve then passes a structural validator for its type.  The
validators are deliberately lightweight: they walk container structure
(chunk lists, marker streams, header checksums) without decoding image
or audio data, and sort candidates into validated, broken, and
manual-review buckets.

Bitcoin payloads are assembled per the channels worth scanning: the
mutable bytes of all output scripts concatenated in order (files are
routinely split across consecutive outputs), non-standard input scripts,
P2SH input scripts, and block coinbase bytes.  Ethereum inputs are
scanned whole; a signature at offset zero means the file is the payload
(embedded), anywhere later means it rides inside call data (injected).
"""

from __future__ import annotations

import re
import struct
import zipfile
import zlib
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from io import BytesIO

from .btcscript import (
    InsertionChannel,
    ScriptError,
    classify_slot,
    mutable_bytes,
    tokenize,
)
from .ingest import BITCOIN, ETHEREUM, BtcBlock, BtcTransaction, EthTransaction

# Ethereum block extra-data is consensus-capped at 32 bytes; nothing that
# small is a recoverable file, so that channel never yields findings.
ETH_EXTRA_DATA_CAP = 32

MIN_SIGNATURE_LEN = 3


class FileType(str, Enum):
    PNG = "png"
    JPEG = "jpeg"
    GIF = "gif"
    PDF = "pdf"
    ZIP = "zip"
    SEVENZIP = "7z"
    WEBP = "webp"
    DOC = "doc"
    MP3 = "mp3"
    MP4 = "mp4"
    MOV = "mov"
    WAV = "wav"
    AVI = "avi"
    RAR = "rar"
    TAR = "tar"


class Validity(str, Enum):
    VALIDATED = "validated"
    BROKEN = "broken"
    MANUAL_REVIEW = "manual_review"


class InsertionMode(str, Enum):
    EMBEDDED = "embedded"
    INJECTED = "injected"


@dataclass(frozen=True)
class FileSignature:
    """One recognizable file type.

    ``pattern`` is a bytes regex for the magic; ``inner_offset`` says how
    far into the file the magic sits (0 for most types, 4 for the ISO
    media ftyp box, 257 for the ustar field of a tar header), so the
    carve starts that many bytes before the match.
    """

    file_type: FileType
    pattern: re.Pattern
    inner_offset: int
    min_signature_len: int


def _sig(file_type: FileType, pattern: bytes, inner_offset: int, length: int) -> FileSignature:
    # (?s) so the RIFF size placeholder bytes match anything; the
    # lookahead wrapper in scan_payload needs the raw pattern compiled.
    return FileSignature(
        file_type=file_type,
        pattern=re.compile(pattern, re.DOTALL),
        inner_offset=inner_offset,
        min_signature_len=length,
    )


# Ordered most-specific-first (longest fixed signature wins a shared
# offset).  RIFF containers are told apart by the form type at offset 8;
# ISO media brands split MP4 from MOV.
_SIGNATURES = (
    _sig(FileType.WEBP, rb"RIFF.{4}WEBP", 0, 12),
    _sig(FileType.WAV, rb"RIFF.{4}WAVE", 0, 12),
    _sig(FileType.AVI, rb"RIFF.{4}AVI ", 0, 12),
    _sig(FileType.MP4, rb"ftyp(?:isom|iso2|mp41|mp42|avc1|dash|M4V )", 4, 8),
    _sig(FileType.MOV, rb"ftypqt  ", 4, 8),
    _sig(FileType.PNG, rb"\x89PNG\r\n\x1a\n", 0, 8),
    _sig(FileType.DOC, rb"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1", 0, 8),
    _sig(FileType.RAR, rb"Rar!\x1a\x07(?:\x01\x00|\x00)", 0, 7),
    _sig(FileType.GIF, rb"GIF8[79]a", 0, 6),
    _sig(FileType.SEVENZIP, rb"7z\xbc\xaf\x27\x1c", 0, 6),
    _sig(FileType.TAR, rb"ustar", 257, 5),
    _sig(FileType.PDF, rb"%PDF", 0, 4),
    _sig(FileType.ZIP, rb"PK\x03\x04", 0, 4),
    _sig(FileType.JPEG, rb"\xff\xd8\xff", 0, 3),
    _sig(FileType.MP3, rb"ID3", 0, 3),
)


def signature_table() -> tuple[FileSignature, ...]:
    """The signature list, ordered most-specific-first."""
    return _SIGNATURES


@dataclass(frozen=True)
class FileFinding:
    chain: str
    tx_hash: str
    block_timestamp: datetime
    channel: InsertionChannel
    file_type: FileType
    offset: int
    # Embedded/injected for Ethereum inputs; for Bitcoin the channel is
    # the mode, so the channel label is repeated here.
    insertion_mode: str
    data: bytes
    valid: Validity | None = None

    def to_record(self, path: str | None = None) -> dict:
        from .ingest import format_timestamp

        record = {
            "chain": self.chain,
            "tx_hash": self.tx_hash,
            "block_timestamp": format_timestamp(self.block_timestamp),
            "channel": self.channel.value,
            "file_type": self.file_type.value,
            "offset": self.offset,
            "insertion_mode": self.insertion_mode,
            "valid": self.valid.value if self.valid else None,
            "size": len(self.data),
        }
        if path is not None:
            record["path"] = path
        return record


# ---------------------------------------------------------------------------
# scanning

def _occurrences(payload: bytes) -> list[tuple[int, FileSignature]]:
    """Every (file_start, signature) pair in the payload.

    Overlapping matches count via a lookahead wrapper; when two types
    claim the same start offset the more specific one wins.
    """
    claimed: dict[int, FileSignature] = {}
    for signature in _SIGNATURES:
        wrapper = re.compile(
            rb"(?=(" + signature.pattern.pattern + rb"))", re.DOTALL
        )
        for match in wrapper.finditer(payload):
            start = match.start() - signature.inner_offset
            if start < 0 or start in claimed:
                continue
            claimed[start] = signature
    return sorted(claimed.items())


def scan_payload(
    payload: bytes,
    channel: InsertionChannel,
    chain: str = BITCOIN,
    tx_hash: str = "",
    block_timestamp: datetime | None = None,
    insertion_mode: str | None = None,
) -> list[FileFinding]:
    """Carve every signature occurrence in one payload.

    Findings come back unvalidated (``valid=None``), sorted by offset,
    each carrying the bytes from its signature start to the payload end.
    """
    findings = []
    for start, signature in _occurrences(payload):
        mode = insertion_mode if insertion_mode is not None else channel.value
        findings.append(
            FileFinding(
                chain=chain,
                tx_hash=tx_hash,
                block_timestamp=block_timestamp or _EPOCH,
                channel=channel,
                file_type=signature.file_type,
                offset=start,
                insertion_mode=mode,
                data=payload[start:],
            )
        )
    return findings


_EPOCH = datetime.fromtimestamp(0, tz=timezone.utc)


# ---------------------------------------------------------------------------
# validators

def _validate_png(data: bytes) -> Validity:
    pos = 8
    first = True
    while True:
        if pos + 8 > len(data):
            return Validity.BROKEN
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        ctype = data[pos + 4 : pos + 8]
        if first and ctype != b"IHDR":
            return Validity.BROKEN
        first = False
        end = pos + 8 + length
        if end + 4 > len(data):
            return Validity.BROKEN
        crc = struct.unpack(">I", data[end : end + 4])[0]
        if zlib.crc32(data[pos + 4 : end]) != crc:
            return Validity.BROKEN
        if ctype == b"IEND":
            return Validity.VALIDATED
        pos = end + 4


def _validate_jpeg(data: bytes) -> Validity:
    pos = 2
    while pos + 1 < len(data):
        if data[pos] != 0xFF:
            return Validity.BROKEN
        marker = data[pos + 1]
        if marker == 0xFF:  # fill byte
            pos += 1
            continue
        if marker == 0xD9:
            return Validity.VALIDATED
        if marker == 0x01 or 0xD0 <= marker <= 0xD8:
            pos += 2
            continue
        if marker == 0xDA:
            # Entropy-coded data follows; an end-of-image marker after it
            # is all this validator asks for.
            if data.find(b"\xff\xd9", pos + 2) != -1:
                return Validity.VALIDATED
            return Validity.BROKEN
        if pos + 4 > len(data):
            return Validity.BROKEN
        (length,) = struct.unpack(">H", data[pos + 2 : pos + 4])
        if length < 2:
            return Validity.BROKEN
        pos += 2 + length
    return Validity.BROKEN


def _gif_subblocks(data: bytes, pos: int) -> int | None:
    """Skip a chain of size-prefixed sub-blocks; return the next offset."""
    while True:
        if pos >= len(data):
            return None
        size = data[pos]
        pos += 1
        if size == 0:
            return pos
        pos += size


def _validate_gif(data: bytes) -> Validity:
    if len(data) < 13:
        return Validity.BROKEN
    flags = data[10]
    pos = 13
    if flags & 0x80:
        pos += 3 * (2 << (flags & 0x07))
    while pos < len(data):
        block = data[pos]
        if block == 0x3B:  # trailer
            return Validity.VALIDATED
        if block == 0x21:  # extension: label then sub-blocks
            next_pos = _gif_subblocks(data, pos + 2)
        elif block == 0x2C:  # image descriptor
            if pos + 10 > len(data):
                return Validity.BROKEN
            local_flags = data[pos + 9]
            next_pos = pos + 10
            if local_flags & 0x80:
                next_pos += 3 * (2 << (local_flags & 0x07))
            next_pos += 1  # LZW minimum code size
            next_pos = _gif_subblocks(data, next_pos)
        else:
            return Validity.BROKEN
        if next_pos is None:
            return Validity.BROKEN
        pos = next_pos
    return Validity.BROKEN


def _validate_pdf(data: bytes) -> Validity:
    if b"%%EOF" in data:
        return Validity.VALIDATED
    return Validity.BROKEN


def _validate_zip(data: bytes) -> Validity:
    # End-of-central-directory present anywhere; trailing padding after
    # it is tolerated because carves run to the payload end.
    if b"PK\x05\x06" in data:
        return Validity.VALIDATED
    return Validity.BROKEN


def _validate_sevenzip(data: bytes) -> Validity:
    if len(data) < 32:
        return Validity.BROKEN
    (stored,) = struct.unpack("<I", data[8:12])
    if zlib.crc32(data[12:32]) == stored:
        return Validity.VALIDATED
    return Validity.BROKEN


def _validate_ole_doc(data: bytes) -> Validity:
    if len(data) < 512:
        return Validity.BROKEN
    byte_order = data[28:30]
    (sector_shift,) = struct.unpack("<H", data[30:32])
    if byte_order == b"\xfe\xff" and sector_shift in (9, 12):
        return Validity.VALIDATED
    return Validity.BROKEN


def _validate_mp3(data: bytes) -> Validity:
    if len(data) < 10:
        return Validity.BROKEN
    size_bytes = data[6:10]
    if any(b & 0x80 for b in size_bytes):
        return Validity.BROKEN
    tag_size = 0
    for b in size_bytes:
        tag_size = (tag_size << 7) | b
    tag_end = 10 + tag_size
    if tag_end > len(data):
        return Validity.BROKEN
    # Look for one plausible MPEG audio frame header after the tag.
    for pos in range(tag_end, min(len(data) - 1, tag_end + 4096)):
        if data[pos] != 0xFF or data[pos + 1] & 0xE0 != 0xE0:
            continue
        version = (data[pos + 1] >> 3) & 0x03
        layer = (data[pos + 1] >> 1) & 0x03
        if version == 1 or layer == 0:
            continue
        if pos + 2 < len(data):
            bitrate = data[pos + 2] >> 4
            samplerate = (data[pos + 2] >> 2) & 0x03
            if bitrate != 0x0F and samplerate != 0x03:
                return Validity.VALIDATED
    # A well-formed tag with no audio behind it needs human eyes.
    return Validity.MANUAL_REVIEW


def _validate_isomedia(data: bytes) -> Validity:
    if len(data) < 8 or data[4:8] != b"ftyp":
        return Validity.BROKEN
    (size,) = struct.unpack(">I", data[0:4])
    if size < 8 or size > len(data):
        return Validity.BROKEN
    return Validity.VALIDATED


def _validate_riff(data: bytes, first_chunks: tuple[bytes, ...]) -> Validity:
    if len(data) < 20:
        return Validity.BROKEN
    (riff_size,) = struct.unpack("<I", data[4:8])
    if riff_size < 4 or 8 + riff_size > len(data):
        return Validity.BROKEN
    chunk_id = data[12:16]
    (chunk_size,) = struct.unpack("<I", data[16:20])
    if chunk_id not in first_chunks:
        return Validity.BROKEN
    if 20 + chunk_size > 8 + riff_size:
        return Validity.BROKEN
    return Validity.VALIDATED


def _validate_rar(data: bytes) -> Validity:
    if data[:8] == b"Rar!\x1a\x07\x01\x00":
        # Version 5 block checksums need the full vint walk; flag for a
        # human rather than half-verify.
        return Validity.MANUAL_REVIEW
    block = data[7:]
    if len(block) < 7:
        return Validity.BROKEN
    (head_crc, head_type, _flags, head_size) = struct.unpack("<HBHH", block[:7])
    if head_type != 0x73 or head_size < 13 or head_size > len(block):
        return Validity.BROKEN
    if zlib.crc32(block[2:head_size]) & 0xFFFF != head_crc:
        return Validity.BROKEN
    return Validity.VALIDATED


def _validate_tar(data: bytes) -> Validity:
    if len(data) < 512:
        return Validity.BROKEN
    header = data[:512]
    stored = header[148:156].split(b"\x00")[0].strip()
    try:
        checksum = int(stored, 8)
    except ValueError:
        return Validity.BROKEN
    computed = sum(header[:148]) + sum(header[156:]) + 8 * ord(" ")
    if computed == checksum:
        return Validity.VALIDATED
    return Validity.BROKEN


_VALIDATORS = {
    FileType.PNG: _validate_png,
    FileType.JPEG: _validate_jpeg,
    FileType.GIF: _validate_gif,
    FileType.PDF: _validate_pdf,
    FileType.ZIP: _validate_zip,
    FileType.SEVENZIP: _validate_sevenzip,
    FileType.DOC: _validate_ole_doc,
    FileType.MP3: _validate_mp3,
    FileType.MP4: _validate_isomedia,
    FileType.MOV: _validate_isomedia,
    FileType.WEBP: lambda data: _validate_riff(data, (b"VP8 ", b"VP8L", b"VP8X")),
    FileType.WAV: lambda data: _validate_riff(data, (b"fmt ",)),
    FileType.AVI: lambda data: _validate_riff(data, (b"LIST",)),
    FileType.RAR: _validate_rar,
    FileType.TAR: _validate_tar,
}


def validate(finding: FileFinding) -> FileFinding:
    """Run the structural validator for the finding's type."""
    verdict = _VALIDATORS[finding.file_type](finding.data)
    return replace(finding, valid=verdict)


def reclassify_doc(finding: FileFinding) -> FileFinding:
    """Relabel a validated ZIP as DOC when it packs a word/ document."""
    if finding.file_type is not FileType.ZIP or finding.valid is not Validity.VALIDATED:
        return finding
    try:
        with zipfile.ZipFile(BytesIO(finding.data)) as archive:
            names = archive.namelist()
    except (zipfile.BadZipFile, OSError, ValueError):
        return finding
    if any(name.startswith("word/") for name in names):
        return replace(finding, file_type=FileType.DOC)
    return finding


def _finish(findings: list[FileFinding]) -> list[FileFinding]:
    return [reclassify_doc(validate(f)) for f in findings]


# ---------------------------------------------------------------------------
# per-record scanners

def scan_btc_tx_files(
    tx: BtcTransaction, errors: list[ScriptError] | None = None
) -> list[FileFinding]:
    """Scan one Bitcoin transaction's file-bearing payloads.

    All output scripts are concatenated into one payload so files split
    across consecutive outputs reassemble; each finding is attributed to
    the channel of the output slot its signature starts in.
    """
    findings: list[FileFinding] = []

    output_parts: list[tuple[int, int, InsertionChannel]] = []
    output_bytes = bytearray()
    for slot in tx.outputs:
        try:
            channel = classify_slot(slot, is_input=False)
            data = mutable_bytes(tokenize(slot.script_asm))
        except ScriptError as exc:
            if errors is not None:
                errors.append(exc)
            continue
        if data:
            start = len(output_bytes)
            output_bytes.extend(data)
            output_parts.append((start, len(output_bytes), channel))
    if output_bytes:
        payload = bytes(output_bytes)
        for start, signature in _occurrences(payload):
            channel = next(
                part_channel
                for part_start, part_end, part_channel in output_parts
                if part_start <= start < part_end
            )
            findings.append(
                FileFinding(
                    chain=BITCOIN,
                    tx_hash=tx.hash,
                    block_timestamp=tx.block_timestamp,
                    channel=channel,
                    file_type=signature.file_type,
                    offset=start,
                    insertion_mode=channel.value,
                    data=payload[start:],
                )
            )

    input_buckets: dict[InsertionChannel, list[bytes]] = {}
    for slot in tx.inputs:
        try:
            channel = classify_slot(slot, is_input=True)
            data = mutable_bytes(tokenize(slot.script_asm))
        except ScriptError as exc:
            if errors is not None:
                errors.append(exc)
            continue
        if channel in (
            InsertionChannel.NON_STANDARD_INPUT,
            InsertionChannel.P2SH_INPUT,
        ) and data:
            input_buckets.setdefault(channel, []).append(data)
    for channel, parts in input_buckets.items():
        findings.extend(
            scan_payload(
                b"".join(parts),
                channel,
                chain=BITCOIN,
                tx_hash=tx.hash,
                block_timestamp=tx.block_timestamp,
            )
        )
    return _finish(findings)


def scan_btc_block_files(block: BtcBlock) -> list[FileFinding]:
    """Scan a block's coinbase bytes for file signatures."""
    return _finish(
        scan_payload(
            block.coinbase_bytes(),
            InsertionChannel.COINBASE_INPUT,
            chain=BITCOIN,
            tx_hash=block.hash,
            block_timestamp=block.timestamp,
        )
    )


def scan_eth_tx_files(tx: EthTransaction) -> list[FileFinding]:
    """Scan an Ethereum transaction's input data for file signatures."""
    data = tx.input_bytes()
    if not data:
        return []
    findings = []
    for finding in scan_payload(
        data,
        InsertionChannel.ETH_INPUT,
        chain=ETHEREUM,
        tx_hash=tx.hash,
        block_timestamp=tx.block_timestamp,
    ):
        mode = (
            InsertionMode.EMBEDDED if finding.offset == 0 else InsertionMode.INJECTED
        )
        findings.append(replace(finding, insertion_mode=mode.value))
    return _finish(findings)


def scan_eth_extra_data(
    data: bytes,
    tx_hash: str = "",
    block_timestamp: datetime | None = None,
) -> list[FileFinding]:
    """Scan Ethereum block extra-data.

    The field is capped at 32 bytes by consensus, which is too small to
    hold a recoverable file, so payloads within the cap yield nothing.
    """
    if len(data) <= ETH_EXTRA_DATA_CAP:
        return []
    return _finish(
        scan_payload(
            data,
            InsertionChannel.COINBASE_INPUT,
            chain=ETHEREUM,
            tx_hash=tx_hash,
            block_timestamp=block_timestamp,
        )
    )
