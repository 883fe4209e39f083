import io
import zipfile
from datetime import datetime, timezone

import pytest

from chainsift import filebodies
from chainsift.btcscript import InsertionChannel
from chainsift.filescan import (
    ETH_EXTRA_DATA_CAP,
    FileType,
    InsertionMode,
    Validity,
    scan_btc_block_files,
    scan_btc_tx_files,
    scan_eth_extra_data,
    scan_eth_tx_files,
    scan_payload,
    signature_table,
    validate,
)
from chainsift.ingest import parse_btc_block, parse_btc_tx, parse_eth_tx

from .conftest import TS_STR, btc_tx_record

H64 = "22" * 32

# well-known magic bytes per format, written down independently of
# the scanner's own table so a typo there cannot hide
PUBLISHED_MAGICS = {
    FileType.PNG: bytes.fromhex("89504e470d0a1a0a"),
    FileType.JPEG: bytes.fromhex("ffd8ff"),
    FileType.GIF: b"GIF89a",
    FileType.PDF: b"%PDF",
    FileType.ZIP: bytes.fromhex("504b0304"),
    FileType.SEVENZIP: bytes.fromhex("377abcaf271c"),
    FileType.DOC: bytes.fromhex("d0cf11e0a1b11ae1"),
    FileType.MP3: b"ID3",
    FileType.RAR: bytes.fromhex("526172211a0700"),
    FileType.MOV: b"\x00\x00\x00\x14ftypqt  ",
    FileType.MP4: b"\x00\x00\x00\x18ftypisom",
    FileType.WEBP: b"RIFF\x00\x00\x00\x00WEBP",
    FileType.WAV: b"RIFF\x00\x00\x00\x00WAVE",
    FileType.AVI: b"RIFF\x00\x00\x00\x00AVI ",
}


def eth_tx(data: bytes):
    return parse_eth_tx(
        {
            "hash": "0x" + H64,
            "block_timestamp": TS_STR,
            "from_address": "0x" + "11" * 20,
            "to_address": "0x" + "22" * 20,
            "input": "0x" + data.hex(),
        }
    )


class TestSignatureTable:
    def test_every_published_magic_is_matched(self):
        by_type = {s.file_type: s for s in signature_table()}
        for file_type, magic in PUBLISHED_MAGICS.items():
            signature = by_type[file_type]
            probe = magic + b"\x00" * 16
            match = signature.pattern.search(probe)
            assert match is not None, file_type
            assert match.start() == signature.inner_offset, file_type

    def test_tar_magic_sits_at_257(self):
        by_type = {s.file_type: s for s in signature_table()}
        assert by_type[FileType.TAR].inner_offset == 257
        assert by_type[FileType.TAR].pattern.pattern == b"ustar"

    def test_gif87a_also_matches(self):
        by_type = {s.file_type: s for s in signature_table()}
        assert by_type[FileType.GIF].pattern.match(b"GIF87a")

    def test_rar5_prefix_matches_rar_entry(self):
        by_type = {s.file_type: s for s in signature_table()}
        assert by_type[FileType.RAR].pattern.match(b"Rar!\x1a\x07\x01\x00")

    def test_most_specific_first(self):
        lengths = [s.min_signature_len for s in signature_table()]
        assert lengths == sorted(lengths, reverse=True)

    def test_all_types_covered(self):
        assert {s.file_type for s in signature_table()} == set(FileType)


class TestScanPayload:
    @pytest.mark.parametrize("file_type", list(FileType))
    def test_every_body_found_at_zero(self, file_type):
        body = filebodies.BODIES[file_type]
        findings = scan_payload(body, InsertionChannel.ETH_INPUT)
        starts = {
            (f.offset, f.file_type)
            for f in findings
        }
        # the DOC plant is an OOXML zip: its signature is ZIP until the
        # validator pass re-types it
        expected_type = FileType.ZIP if file_type is FileType.DOC else file_type
        assert (0, expected_type) in starts

    def test_offset_preserved_behind_prefix(self):
        payload = b"\x01\x02\x03" + filebodies.PNG
        (finding,) = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert finding.offset == 3
        assert finding.data == filebodies.PNG

    def test_carve_runs_to_payload_end(self):
        payload = filebodies.PNG + b"trailing junk"
        (finding,) = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert finding.data == payload

    def test_overlapping_occurrences_all_reported(self):
        payload = b"ID3ID3\x00\x00"
        findings = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert [f.offset for f in findings] == [0, 3]

    def test_same_offset_resolved_most_specific(self):
        # a ZIP magic at 0 and a ustar at 257 both claim file start 0;
        # the longer tar signature wins
        payload = b"PK\x03\x04" + b"\x00" * 253 + b"ustar" + b"\x00" * 16
        findings = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert len(findings) == 1
        assert findings[0].file_type is FileType.TAR
        assert findings[0].offset == 0

    def test_inner_offset_requires_room(self):
        # bare "ustar" at position 2: the file would start before the
        # payload, so there is nothing to carve
        assert scan_payload(b"\x00\x00ustar", InsertionChannel.ETH_INPUT) == []


class TestValidators:
    @pytest.mark.parametrize("file_type", list(FileType))
    def test_minimal_bodies_validate(self, file_type):
        body = filebodies.BODIES[file_type]
        channel = InsertionChannel.ETH_INPUT
        findings = scan_payload(body, channel)
        finding = next(f for f in findings if f.offset == 0)
        assert validate(finding).valid is Validity.VALIDATED, file_type

    def test_png_magic_plus_noise_is_broken(self):
        payload = PUBLISHED_MAGICS[FileType.PNG] + b"\x00\x01\x02\x03" * 8
        (finding,) = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.BROKEN

    def test_png_bad_crc_is_broken(self):
        body = bytearray(filebodies.PNG)
        body[-5] ^= 0xFF  # corrupt the IEND crc
        (finding,) = scan_payload(bytes(body), InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.BROKEN

    def test_jpeg_without_end_marker_is_broken(self):
        payload = b"\xff\xd8\xff\xe0\x00\x10" + b"A" * 20
        findings = scan_payload(payload, InsertionChannel.ETH_INPUT)
        finding = next(f for f in findings if f.file_type is FileType.JPEG)
        assert validate(finding).valid is Validity.BROKEN

    def test_zip_without_eocd_is_broken(self):
        payload = b"PK\x03\x04" + b"\x00" * 30
        (finding,) = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.BROKEN

    def test_sevenzip_bad_crc_is_broken(self):
        body = bytearray(filebodies.SEVENZIP)
        body[20] ^= 0x01
        (finding,) = scan_payload(bytes(body), InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.BROKEN

    def test_tar_bad_checksum_is_broken(self):
        body = bytearray(filebodies.TAR)
        body[0] ^= 0x01
        findings = scan_payload(bytes(body), InsertionChannel.ETH_INPUT)
        finding = next(f for f in findings if f.file_type is FileType.TAR)
        assert validate(finding).valid is Validity.BROKEN

    def test_rar5_goes_to_manual_review(self):
        payload = b"Rar!\x1a\x07\x01\x00" + b"\x00" * 24
        (finding,) = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.MANUAL_REVIEW

    def test_rar4_bad_crc_is_broken(self):
        body = bytearray(filebodies.RAR)
        body[9] ^= 0x01  # flip a bit inside the crc-covered header
        (finding,) = scan_payload(bytes(body), InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.BROKEN

    def test_mp3_tag_without_audio_is_manual_review(self):
        # valid syncsafe ID3 header, tag body, nothing after
        payload = b"ID3\x04\x00\x00\x00\x00\x00\x0a" + b"\x00" * 10
        (finding,) = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.MANUAL_REVIEW

    def test_mp3_nonsyncsafe_size_is_broken(self):
        payload = b"ID3\x04\x00\x00\xff\xff\xff\xff" + b"\x00" * 10
        (finding,) = scan_payload(payload, InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.BROKEN

    def test_gif_truncated_is_broken(self):
        (finding,) = scan_payload(filebodies.GIF[:-1], InsertionChannel.ETH_INPUT)
        assert validate(finding).valid is Validity.BROKEN

    def test_doc_reclassified_from_ooxml_zip(self):
        tx = eth_tx(filebodies.DOC)
        # inner zip entries start with the local-file-header magic too,
        # so the archive yields extra offsets; the whole file is at 0
        finding = next(f for f in scan_eth_tx_files(tx) if f.offset == 0)
        assert finding.file_type is FileType.DOC
        assert finding.valid is Validity.VALIDATED
        with zipfile.ZipFile(io.BytesIO(finding.data)) as archive:
            assert any(n.startswith("word/") for n in archive.namelist())

    def test_plain_zip_not_reclassified(self):
        tx = eth_tx(filebodies.ZIP)
        (finding,) = scan_eth_tx_files(tx)
        assert finding.file_type is FileType.ZIP


class TestPillowOracle:
    """Cross-check image handling against an independent library."""

    def test_pillow_png_roundtrip(self):
        from PIL import Image

        buffer = io.BytesIO()
        Image.new("RGB", (3, 2), (200, 10, 10)).save(buffer, format="PNG")
        payload = buffer.getvalue()
        tx = eth_tx(payload)
        findings = scan_eth_tx_files(tx)
        png = next(f for f in findings if f.file_type is FileType.PNG)
        assert png.valid is Validity.VALIDATED
        assert png.offset == 0
        reread = Image.open(io.BytesIO(png.data))
        reread.verify()

    def test_pillow_opens_our_minimal_bodies(self):
        from PIL import Image

        for file_type in (FileType.PNG, FileType.GIF, FileType.WEBP):
            image = Image.open(io.BytesIO(filebodies.BODIES[file_type]))
            image.verify()

    def test_pillow_webp_injected(self):
        from PIL import Image

        buffer = io.BytesIO()
        Image.new("RGB", (2, 2)).save(buffer, format="WEBP", lossless=True)
        payload = b"\xaa" * 10 + buffer.getvalue()
        tx = eth_tx(payload)
        webp = next(
            f for f in scan_eth_tx_files(tx) if f.file_type is FileType.WEBP
        )
        assert webp.offset == 10
        assert webp.insertion_mode == InsertionMode.INJECTED.value


class TestBtcScan:
    def test_file_reassembled_across_outputs(self):
        body = filebodies.PNG
        chunks = [body[i : i + 20] for i in range(0, len(body), 20)]
        outputs = [
            {
                "script_asm": f"OP_DUP OP_HASH160 {chunk.hex()} OP_EQUALVERIFY OP_CHECKSIG",
                "type": "pubkeyhash",
            }
            for chunk in chunks
        ]
        tx = parse_btc_tx(btc_tx_record(H64, outputs=outputs))
        (finding,) = scan_btc_tx_files(tx)
        assert finding.file_type is FileType.PNG
        assert finding.offset == 0
        assert finding.channel is InsertionChannel.STANDARD_OUTPUT
        assert finding.valid is Validity.VALIDATED
        assert finding.data == body

    def test_finding_attributed_to_signature_slot_channel(self):
        # payload starts in an OP_RETURN output and spills into a
        # nonstandard one; the signature sits in the first
        body = filebodies.GIF
        outputs = [
            {"script_asm": "OP_RETURN " + body[:10].hex(), "type": "nulldata"},
            {"script_asm": body[10:].hex() + " OP_DROP", "type": "nonstandard"},
        ]
        tx = parse_btc_tx(btc_tx_record(H64, outputs=outputs))
        (finding,) = scan_btc_tx_files(tx)
        assert finding.channel is InsertionChannel.OP_RETURN_OUTPUT
        assert finding.valid is Validity.VALIDATED

    def test_p2sh_and_nonstandard_inputs_scanned_separately(self):
        tx = parse_btc_tx(
            btc_tx_record(
                H64,
                inputs=[
                    {"script_asm": filebodies.GIF.hex(), "type": "scripthash"},
                    {"script_asm": filebodies.SEVENZIP.hex(), "type": "nonstandard"},
                ],
            )
        )
        findings = scan_btc_tx_files(tx)
        channels = {f.file_type: f.channel for f in findings}
        assert channels[FileType.GIF] is InsertionChannel.P2SH_INPUT
        assert channels[FileType.SEVENZIP] is InsertionChannel.NON_STANDARD_INPUT

    def test_standard_input_not_file_scanned(self):
        tx = parse_btc_tx(
            btc_tx_record(
                H64, inputs=[{"script_asm": filebodies.GIF.hex(), "type": "pubkeyhash"}]
            )
        )
        assert scan_btc_tx_files(tx) == []

    def test_coinbase_scanned(self):
        block = parse_btc_block(
            {"hash": H64, "timestamp": TS_STR, "coinbase_param": filebodies.RAR.hex()}
        )
        (finding,) = scan_btc_block_files(block)
        assert finding.file_type is FileType.RAR
        assert finding.channel is InsertionChannel.COINBASE_INPUT
        assert finding.valid is Validity.VALIDATED


class TestEthScan:
    def test_embedded_at_offset_zero(self):
        (finding,) = scan_eth_tx_files(eth_tx(filebodies.PNG))
        assert finding.insertion_mode == InsertionMode.EMBEDDED.value
        assert finding.offset == 0

    def test_injected_behind_call_data(self):
        payload = bytes.fromhex("a9059cbb") + b"\x00" * 64 + filebodies.PNG
        (finding,) = scan_eth_tx_files(eth_tx(payload))
        assert finding.insertion_mode == InsertionMode.INJECTED.value
        assert finding.offset == 68
        assert finding.data == filebodies.PNG

    def test_empty_input_no_findings(self):
        assert scan_eth_tx_files(eth_tx(b"")) == []


class TestEthExtraData:
    def test_within_cap_never_scanned(self):
        # a consensus-size extra-data field cannot hold a recoverable
        # file even when it starts with a signature
        data = PUBLISHED_MAGICS[FileType.PNG] + b"\x00" * (
            ETH_EXTRA_DATA_CAP - len(PUBLISHED_MAGICS[FileType.PNG])
        )
        assert len(data) == ETH_EXTRA_DATA_CAP
        assert scan_eth_extra_data(data) == []

    def test_oversized_extra_data_scanned(self):
        data = filebodies.PNG  # 67 bytes, over the cap
        ts = datetime(2021, 1, 1, tzinfo=timezone.utc)
        (finding,) = scan_eth_extra_data(data, tx_hash="0xblock", block_timestamp=ts)
        assert finding.file_type is FileType.PNG
        assert finding.valid is Validity.VALIDATED
