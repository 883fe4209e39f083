import re
from pathlib import Path

from chainsift import filebodies
from chainsift.filescan import signature_table
from chainsift.sqlemit import SQL_MAGIC, emit, write_queries

GOLDENS = Path(__file__).parent / "goldens"

# SQL regex literals: r'...' or r"..." with no escapes of the delimiter.
_SQL_REGEX_LITERAL = re.compile(r"r'([^']*)'|r\"([^\"]*)\"")


def _regex_literals(sql: str) -> list[str]:
    return [a or b for a, b in _SQL_REGEX_LITERAL.findall(sql)]


class TestGoldens:
    def test_emit_matches_frozen_queries(self):
        specs = emit()
        assert [s.filename for s in specs] == [
            "text_bitcoin.sql",
            "text_ethereum.sql",
            "url_bitcoin.sql",
            "url_ethereum.sql",
            "file_bitcoin.sql",
            "file_ethereum.sql",
        ]
        for spec in specs:
            frozen = (GOLDENS / spec.filename).read_text(encoding="utf-8")
            assert spec.sql == frozen, spec.filename

    def test_write_queries_round_trips(self, tmp_path):
        paths = write_queries(tmp_path)
        assert sorted(p.name for p in paths) == sorted(
            p.name for p in GOLDENS.glob("*.sql")
        )
        for path in paths:
            assert path.read_text() == (GOLDENS / path.name).read_text()

    def test_every_query_opens_with_a_comment(self):
        for spec in emit():
            assert spec.sql.startswith("--"), spec.filename


class TestTextQueries:
    def test_threshold_literals(self):
        sql = next(s.sql for s in emit() if s.filename == "text_bitcoin.sql")
        assert "0.9" in sql
        assert "1.0" in sql
        assert "standard_output" in sql

    def test_ethereum_has_single_threshold(self):
        sql = next(s.sql for s in emit() if s.filename == "text_ethereum.sql")
        assert "1.0" in sql
        assert "0.9" not in sql


class TestFileQueries:
    def test_magic_literals_present(self):
        sql = next(s.sql for s in emit() if s.filename == "file_bitcoin.sql")
        for literal in ("89504e470d0a1a0a", "ffd8ff", "377abcaf271c", "504b0304"):
            assert literal in sql

    def test_all_types_listed(self):
        sql = next(s.sql for s in emit() if s.filename == "file_bitcoin.sql")
        for file_type in SQL_MAGIC:
            assert f"'{file_type.value}'" in sql


class TestRegexSafety:
    def test_no_capturing_groups_anywhere(self):
        # REGEXP_INSTR and friends reject patterns with capturing groups,
        # so every group in every emitted regex must be (?:...) or (?i).
        for spec in emit():
            for literal in _regex_literals(spec.sql):
                compiled = re.compile(literal)
                assert compiled.groups == 0, (spec.filename, literal)

    def test_regex_literals_found(self):
        found = sum(len(_regex_literals(s.sql)) for s in emit())
        assert found >= 10


def _probe(file_type):
    # The canonical DOC body is an OOXML zip (caught via the ZIP
    # signature and reclassified), so probe its OLE magic directly.
    if file_type.value == "doc":
        return bytes.fromhex("d0cf11e0a1b11ae1") + b"\x00" * 8
    return filebodies.BODIES[file_type]


class TestMagicConsistency:
    def test_sql_magic_matches_each_probe(self):
        # The hex regex must hit the same spot the byte signature hits:
        # an even hex index equal to twice the signature's inner offset.
        table = {sig.file_type: sig for sig in signature_table()}
        assert set(SQL_MAGIC) == set(table)
        for file_type, hex_pattern in SQL_MAGIC.items():
            match = re.search(hex_pattern, _probe(file_type).hex())
            assert match, file_type
            assert match.start() % 2 == 0
            assert match.start() // 2 == table[file_type].inner_offset

    def test_byte_signature_agrees(self):
        for sig in signature_table():
            match = sig.pattern.search(_probe(sig.file_type))
            assert match, sig.file_type
            assert match.start() == sig.inner_offset
