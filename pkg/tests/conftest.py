import json
from datetime import datetime, timezone
from pathlib import Path

import pytest

from chainsift import corpusgen

TS = datetime(2021, 6, 1, 12, 0, 0, tzinfo=timezone.utc)
TS_STR = "2021-06-01T12:00:00Z"


def btc_tx_record(tx_hash: str, inputs=(), outputs=()) -> dict:
    return {
        "hash": tx_hash,
        "block_timestamp": TS_STR,
        "inputs": list(inputs),
        "outputs": list(outputs),
    }


def write_ndjson(path: Path, records) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")
    return path


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """One shared seed-1 corpus with a little noise."""
    out = tmp_path_factory.mktemp("corpus")
    manifest = corpusgen.generate(out, seed=1, noise=150)
    return out, manifest
