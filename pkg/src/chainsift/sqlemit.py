"""Emit the detector logic as warehouse SQL.

Each (detector, chain) pair renders to one BigQuery Standard SQL file so
the same rules the local scanner applies can run over the public
``crypto_bitcoin`` and ``crypto_ethereum`` datasets.  The thresholds,
regex classes and magic-byte literals are injected from the Python
modules, so the SQL and the scanner cannot drift apart silently.

The queries match bytes through their hex encoding: a payload byte is
one aligned lowercase hex pair, a signature is a regex over hex pairs,
and offsets convert back to bytes by halving.  Every regex keeps to at
most one capturing group (REGEXP_EXTRACT rejects more) and none of the
emitted ones need any.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .filescan import FileType, signature_table
from .textscan import DEFAULT_CONFIG
from .urlscan import MIN_ONION_RUN, MIN_WILDCARD_CHARS

# Printable ASCII as lowercase hex pairs: tab, newline, carriage return
# and the 0x20..0x7e range.
PRINTABLE_HEX_PAIR = "(?:09|0a|0d|2[0-9a-f]|[3-6][0-9a-f]|7[0-9a-e])"

# Text-domain equivalents of the byte matchers in urlscan.
URL_TEXT_REGEX = (
    r"(?i)(?:https?|ipfs)://[A-Za-z0-9\-._~:/?#\[\]@!$&'()*+,;=%]"
    + "{%d,}" % MIN_WILDCARD_CHARS
)
ONION_TEXT_REGEX = r"(?i)[A-Za-z0-9]{%d,}\.onion" % MIN_ONION_RUN


def _hex(data: bytes) -> str:
    return data.hex()


# Hex-pair regex per signature, mirroring filescan's byte patterns.
# Wildcard bytes become [0-9a-f]{2} repeats; alternations stay
# non-capturing.  tests assert these accept exactly what the byte
# patterns accept.
SQL_MAGIC = {
    FileType.WEBP: _hex(b"RIFF") + "[0-9a-f]{8}" + _hex(b"WEBP"),
    FileType.WAV: _hex(b"RIFF") + "[0-9a-f]{8}" + _hex(b"WAVE"),
    FileType.AVI: _hex(b"RIFF") + "[0-9a-f]{8}" + _hex(b"AVI "),
    FileType.MP4: _hex(b"ftyp")
    + "(?:"
    + "|".join(
        _hex(brand)
        for brand in (b"isom", b"iso2", b"mp41", b"mp42", b"avc1", b"dash", b"M4V ")
    )
    + ")",
    FileType.MOV: _hex(b"ftypqt  "),
    FileType.PNG: _hex(b"\x89PNG\r\n\x1a\n"),
    FileType.DOC: _hex(b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1"),
    FileType.RAR: _hex(b"Rar!\x1a\x07") + "(?:" + _hex(b"\x01\x00") + "|" + _hex(b"\x00") + ")",
    FileType.GIF: _hex(b"GIF8") + "(?:" + _hex(b"7") + "|" + _hex(b"9") + ")" + _hex(b"a"),
    FileType.SEVENZIP: _hex(b"7z\xbc\xaf\x27\x1c"),
    FileType.TAR: _hex(b"ustar"),
    FileType.PDF: _hex(b"%PDF"),
    FileType.ZIP: _hex(b"PK\x03\x04"),
    FileType.JPEG: _hex(b"\xff\xd8\xff"),
    FileType.MP3: _hex(b"ID3"),
}

TEXT = "text"
URL = "url"
FILE = "file"
DETECTORS = (TEXT, URL, FILE)
CHAINS = ("bitcoin", "ethereum")


@dataclass(frozen=True)
class QuerySpec:
    detector: str
    chain: str
    filename: str
    sql: str


_HELPERS = """\
-- Drop opcodes from script_asm and keep the pushdata hex, in order.
CREATE TEMP FUNCTION mutable_hex(script_asm STRING) AS (
  LOWER(REGEXP_REPLACE(REGEXP_REPLACE(COALESCE(script_asm, ''), r'OP_[0-9A-Za-z_]+', ''), r'\\s+', ''))
);

-- Fraction of payload bytes whose hex pair is printable ASCII
-- (tab, newline, carriage return, or 0x20..0x7e).
CREATE TEMP FUNCTION printable_ratio(payload_hex STRING) AS (
  SAFE_DIVIDE(
    (SELECT COUNT(*)
     FROM UNNEST(REGEXP_EXTRACT_ALL(payload_hex, r'[0-9a-f]{2}')) AS pair
     WHERE REGEXP_CONTAINS(pair, r'^{printable}$')),
    DIV(LENGTH(payload_hex), 2))
);
""".replace("{printable}", PRINTABLE_HEX_PAIR)


_SIGNATURE_ROW = "  SELECT {name} AS file_type, {magic} AS magic_hex, {inner} AS inner_offset"


def _signatures_cte() -> str:
    rows = []
    for signature in signature_table():
        rows.append(
            _SIGNATURE_ROW.format(
                name=f"'{signature.file_type.value}'",
                magic=f"r'{SQL_MAGIC[signature.file_type]}'",
                inner=signature.inner_offset,
            )
        )
    return "signatures AS (\n" + "\nUNION ALL\n".join(rows) + "\n)"


def _text_bitcoin() -> str:
    config = DEFAULT_CONFIG
    return f"""\
-- Candidate text payloads in Bitcoin scripts and coinbase fields.
-- One row per (transaction, channel); per-channel pushdata is
-- reassembled in slot order before the printable test.
{_HELPERS}
WITH output_payloads AS (
  SELECT
    t.hash AS tx_hash,
    t.block_timestamp,
    CASE
      WHEN o.type = 'nulldata' OR STARTS_WITH(o.script_asm, 'OP_RETURN') THEN 'op_return_output'
      WHEN o.type = 'nonstandard' THEN 'non_standard_output'
      ELSE 'standard_output'
    END AS channel,
    mutable_hex(o.script_asm) AS part_hex,
    slot
  FROM `crypto_bitcoin.transactions` AS t, UNNEST(t.outputs) AS o WITH OFFSET AS slot
),
input_payloads AS (
  SELECT
    t.hash AS tx_hash,
    t.block_timestamp,
    'non_standard_input' AS channel,
    mutable_hex(i.script_asm) AS part_hex,
    slot
  FROM `crypto_bitcoin.transactions` AS t, UNNEST(t.inputs) AS i WITH OFFSET AS slot
  WHERE i.type = 'nonstandard'
),
coinbase_payloads AS (
  SELECT
    b.hash AS tx_hash,
    b.timestamp AS block_timestamp,
    'coinbase_input' AS channel,
    LOWER(b.coinbase_param) AS part_hex,
    0 AS slot
  FROM `crypto_bitcoin.blocks` AS b
),
payloads AS (
  SELECT
    tx_hash,
    block_timestamp,
    channel,
    STRING_AGG(part_hex, '' ORDER BY slot) AS payload_hex
  FROM (
    SELECT * FROM output_payloads
    UNION ALL SELECT * FROM input_payloads
    UNION ALL SELECT * FROM coinbase_payloads
  )
  GROUP BY tx_hash, block_timestamp, channel
)
SELECT
  tx_hash,
  block_timestamp,
  channel,
  payload_hex,
  printable_ratio(payload_hex) AS ratio
FROM payloads
WHERE LENGTH(payload_hex) >= {config.min_text_chars * 2}
  AND printable_ratio(payload_hex) >= CASE
    WHEN channel = 'standard_output' THEN {config.ratio_threshold_standard_output}
    ELSE {config.ratio_threshold_other}
  END
"""


def _text_ethereum() -> str:
    config = DEFAULT_CONFIG
    return f"""\
-- Candidate text payloads in Ethereum call data.
{_HELPERS}
WITH payloads AS (
  SELECT
    t.hash AS tx_hash,
    t.block_timestamp,
    'eth_input' AS channel,
    LOWER(SUBSTR(t.input, 3)) AS payload_hex
  FROM `crypto_ethereum.transactions` AS t
  WHERE t.input IS NOT NULL AND LENGTH(t.input) > 2
)
SELECT
  tx_hash,
  block_timestamp,
  channel,
  payload_hex,
  printable_ratio(payload_hex) AS ratio
FROM payloads
WHERE LENGTH(payload_hex) >= {config.min_text_chars * 2}
  AND printable_ratio(payload_hex) >= {config.ratio_threshold_other}
"""


def _url_bitcoin() -> str:
    return f"""\
-- Bitcoin URL extraction runs over the text-detector output: URL-valid
-- characters are printable ASCII, so any payload carrying a readable
-- URL already passed the text query.  Point this at the materialized
-- results of text_bitcoin.sql.
SELECT
  tx_hash,
  block_timestamp,
  channel,
  REGEXP_EXTRACT(text, r"{URL_TEXT_REGEX}") AS url,
  REGEXP_EXTRACT(text, r"{ONION_TEXT_REGEX}") AS onion_url
FROM `results.bitcoin_texts`
WHERE REGEXP_CONTAINS(text, r"{URL_TEXT_REGEX}")
   OR REGEXP_CONTAINS(text, r"{ONION_TEXT_REGEX}")
"""


def _url_ethereum() -> str:
    return f"""\
-- URLs in Ethereum call data, matched on the decoded byte string.
WITH decoded AS (
  SELECT
    t.hash AS tx_hash,
    t.block_timestamp,
    SAFE_CONVERT_BYTES_TO_STRING(FROM_HEX(SUBSTR(t.input, 3))) AS text
  FROM `crypto_ethereum.transactions` AS t
  WHERE t.input IS NOT NULL AND LENGTH(t.input) > 2
)
SELECT
  tx_hash,
  block_timestamp,
  REGEXP_EXTRACT(text, r"{URL_TEXT_REGEX}") AS url,
  REGEXP_EXTRACT(text, r"{ONION_TEXT_REGEX}") AS onion_url
FROM decoded
WHERE text IS NOT NULL
  AND (REGEXP_CONTAINS(text, r"{URL_TEXT_REGEX}")
       OR REGEXP_CONTAINS(text, r"{ONION_TEXT_REGEX}"))
"""


def _file_bitcoin() -> str:
    return f"""\
-- File signatures in Bitcoin script payloads.  Outputs concatenate
-- across the whole transaction so files split over consecutive outputs
-- reassemble; inputs concatenate per channel; coinbase fields scan
-- as-is.  A match position must be odd (1-based) to sit on a byte
-- boundary; the reported offset is where the file starts.
{_HELPERS}
WITH payloads AS (
  SELECT
    t.hash AS tx_hash,
    t.block_timestamp,
    'outputs' AS bucket,
    STRING_AGG(mutable_hex(o.script_asm), '' ORDER BY slot) AS payload_hex
  FROM `crypto_bitcoin.transactions` AS t, UNNEST(t.outputs) AS o WITH OFFSET AS slot
  GROUP BY tx_hash, block_timestamp
  UNION ALL
  SELECT
    t.hash,
    t.block_timestamp,
    'non_standard_input',
    STRING_AGG(mutable_hex(i.script_asm), '' ORDER BY slot)
  FROM `crypto_bitcoin.transactions` AS t, UNNEST(t.inputs) AS i WITH OFFSET AS slot
  WHERE i.type = 'nonstandard'
  GROUP BY 1, 2
  UNION ALL
  SELECT
    t.hash,
    t.block_timestamp,
    'p2sh_input',
    STRING_AGG(mutable_hex(i.script_asm), '' ORDER BY slot)
  FROM `crypto_bitcoin.transactions` AS t, UNNEST(t.inputs) AS i WITH OFFSET AS slot
  WHERE i.type = 'scripthash'
  GROUP BY 1, 2
  UNION ALL
  SELECT
    b.hash,
    b.timestamp,
    'coinbase_input',
    LOWER(b.coinbase_param)
  FROM `crypto_bitcoin.blocks` AS b
),
{_signatures_cte()}
SELECT
  p.tx_hash,
  p.block_timestamp,
  p.bucket,
  s.file_type,
  DIV(REGEXP_INSTR(p.payload_hex, s.magic_hex) - 1, 2) - s.inner_offset AS file_offset
FROM payloads AS p
CROSS JOIN signatures AS s
WHERE p.payload_hex IS NOT NULL
  AND REGEXP_INSTR(p.payload_hex, s.magic_hex) > 0
  AND MOD(REGEXP_INSTR(p.payload_hex, s.magic_hex), 2) = 1
  AND DIV(REGEXP_INSTR(p.payload_hex, s.magic_hex) - 1, 2) >= s.inner_offset
"""


def _file_ethereum() -> str:
    return f"""\
-- File signatures in Ethereum call data.  A file starting at offset 0
-- is embedded; anything deeper rides inside a contract call and counts
-- as injected.
WITH payloads AS (
  SELECT
    t.hash AS tx_hash,
    t.block_timestamp,
    LOWER(SUBSTR(t.input, 3)) AS payload_hex
  FROM `crypto_ethereum.transactions` AS t
  WHERE t.input IS NOT NULL AND LENGTH(t.input) > 2
),
{_signatures_cte()}
SELECT
  p.tx_hash,
  p.block_timestamp,
  s.file_type,
  DIV(REGEXP_INSTR(p.payload_hex, s.magic_hex) - 1, 2) - s.inner_offset AS file_offset,
  IF(DIV(REGEXP_INSTR(p.payload_hex, s.magic_hex) - 1, 2) - s.inner_offset = 0,
     'embedded', 'injected') AS insertion_mode
FROM payloads AS p
CROSS JOIN signatures AS s
WHERE REGEXP_INSTR(p.payload_hex, s.magic_hex) > 0
  AND MOD(REGEXP_INSTR(p.payload_hex, s.magic_hex), 2) = 1
  AND DIV(REGEXP_INSTR(p.payload_hex, s.magic_hex) - 1, 2) >= s.inner_offset
"""


_BUILDERS = {
    (TEXT, "bitcoin"): _text_bitcoin,
    (TEXT, "ethereum"): _text_ethereum,
    (URL, "bitcoin"): _url_bitcoin,
    (URL, "ethereum"): _url_ethereum,
    (FILE, "bitcoin"): _file_bitcoin,
    (FILE, "ethereum"): _file_ethereum,
}


def emit() -> list[QuerySpec]:
    """Render all six queries, deterministic and order-stable."""
    specs = []
    for detector in DETECTORS:
        for chain in CHAINS:
            sql = _BUILDERS[(detector, chain)]()
            specs.append(
                QuerySpec(
                    detector=detector,
                    chain=chain,
                    filename=f"{detector}_{chain}.sql",
                    sql=sql,
                )
            )
    return specs


def write_queries(out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for spec in emit():
        path = out_dir / spec.filename
        path.write_text(spec.sql, encoding="utf-8")
        paths.append(path)
    return paths
