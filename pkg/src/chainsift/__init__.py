"""Detect and classify non-financial content in blockchain transaction data.

The package reads newline-delimited export records for Bitcoin
transactions, Bitcoin blocks and Ethereum transactions, reconstructs the
byte payloads a sender could choose freely, and runs three detectors
over them: readable text (with shape classes like JSON, URLs or PGP
blocks), URLs by scheme, and embedded files by signature with
per-format structural validation.  A seeded corpus generator produces
inputs with known ground truth, and the detector rules can be emitted
as warehouse SQL.
"""

from .btcscript import InsertionChannel, channel_payloads, classify_slot
from .filescan import FileFinding, FileType, InsertionMode, Validity
from .ingest import BtcBlock, BtcTransaction, EthTransaction
from .pipeline import RunConfig, ScanResult, scan_corpus, scan_directory
from .textscan import DetectorConfig, TextFinding, TextualType, printable_ratio
from .urlscan import SchemeClass, UrlFinding, find_onion, find_url

__version__ = "0.1.0"

__all__ = [
    "BtcBlock",
    "BtcTransaction",
    "DetectorConfig",
    "EthTransaction",
    "FileFinding",
    "FileType",
    "InsertionChannel",
    "InsertionMode",
    "RunConfig",
    "ScanResult",
    "SchemeClass",
    "TextFinding",
    "TextualType",
    "UrlFinding",
    "Validity",
    "channel_payloads",
    "classify_slot",
    "find_onion",
    "find_url",
    "printable_ratio",
    "scan_corpus",
    "scan_directory",
    "__version__",
]
