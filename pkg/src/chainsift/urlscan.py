"""URL detection over payload bytes.

Two matchers cover the interesting schemes.  The first looks for
``http://``, ``https://`` or ``ipfs://`` followed by a wildcard part: the
longest coherent run of URL-valid characters, required to be at least
five characters long so lone scheme fragments do not count.  The second
looks for onion addresses as the longest alphanumeric run of at least
sixteen characters directly before ``.onion``.

Both matchers are greedy and deliberately simple.  Only the first match
per payload is reported, so a payload carrying several URLs yields one
finding, and a URL directly followed by more URL-valid characters is
matched past its intended end.  Matching works on raw bytes: every
URL-valid character is printable ASCII, which in UTF-8 never occurs
inside a multi-byte sequence, so byte offsets are exact no matter how
binary the rest of the payload is.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum

log = logging.getLogger(__name__)

# RFC 3986 unreserved + reserved characters, plus the escape character.
URL_CHARS = (
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"
    "-._~:/?#[]@!$&'()*+,;=%"
)

MIN_WILDCARD_CHARS = 5
MIN_ONION_RUN = 16

_URL_CLASS = rb"[A-Za-z0-9\-._~:/?#\[\]@!$&'()*+,;=%]"
SCHEME_PATTERN = re.compile(
    rb"(?:https?|ipfs)://" + _URL_CLASS + rb"{%d,}" % MIN_WILDCARD_CHARS,
    re.IGNORECASE,
)
ONION_PATTERN = re.compile(
    rb"[A-Za-z0-9]{%d,}\.onion" % MIN_ONION_RUN, re.IGNORECASE
)


class SchemeClass(str, Enum):
    """Reporting buckets; https matches are counted under HTTP."""

    HTTP = "http"
    IPFS = "ipfs"
    ONION = "onion"


class LivenessStatus(str, Enum):
    ALIVE = "alive"
    DEAD = "dead"
    RESTRICTED = "restricted"


@dataclass(frozen=True)
class UrlFinding:
    chain: str
    tx_hash: str
    block_timestamp: datetime | None
    url: str
    scheme_class: SchemeClass
    offset: int

    def to_record(self) -> dict:
        from .ingest import format_timestamp

        return {
            "chain": self.chain,
            "tx_hash": self.tx_hash,
            "block_timestamp": (
                format_timestamp(self.block_timestamp)
                if self.block_timestamp
                else None
            ),
            "url": self.url,
            "scheme_class": self.scheme_class.value,
            "offset": self.offset,
        }


def _scheme_class(url: str) -> SchemeClass:
    lowered = url.lower()
    if lowered.startswith("ipfs://"):
        return SchemeClass.IPFS
    if lowered.endswith(".onion") or ".onion/" in lowered:
        return SchemeClass.ONION
    return SchemeClass.HTTP


def find_url(
    payload: bytes,
    chain: str = "",
    tx_hash: str = "",
    block_timestamp: datetime | None = None,
) -> UrlFinding | None:
    """Return the first scheme-prefixed URL in the payload, if any."""
    match = SCHEME_PATTERN.search(payload)
    if match is None:
        return None
    url = match.group().decode("ascii")
    return UrlFinding(
        chain=chain,
        tx_hash=tx_hash,
        block_timestamp=block_timestamp,
        url=url,
        scheme_class=_scheme_class(url),
        offset=match.start(),
    )


def find_onion(
    payload: bytes,
    chain: str = "",
    tx_hash: str = "",
    block_timestamp: datetime | None = None,
) -> UrlFinding | None:
    """Return the first onion address in the payload, if any."""
    match = ONION_PATTERN.search(payload)
    if match is None:
        return None
    return UrlFinding(
        chain=chain,
        tx_hash=tx_hash,
        block_timestamp=block_timestamp,
        url=match.group().decode("ascii"),
        scheme_class=SchemeClass.ONION,
        offset=match.start(),
    )


def drop_reason(url: str) -> str | None:
    """Why a matched URL is syntactically hopeless, or None if it is fine.

    http(s) URLs need a dot somewhere in the authority; ipfs and onion
    matches do not (content ids have no dots).  Characters outside the
    URL alphabet disqualify a match wherever it came from.
    """
    if any(c not in URL_CHARS for c in url):
        return "forbidden_characters"
    lowered = url.lower()
    if lowered.startswith(("http://", "https://")):
        authority = lowered.split("://", 1)[1].split("/", 1)[0]
        if "." not in authority:
            return "no_dot_in_authority"
    return None


def validate_and_classify(
    raw: UrlFinding, drops: Counter[str] | None = None
) -> UrlFinding | None:
    """Re-derive the scheme class and drop hopeless matches.

    Dropped findings are counted by reason in ``drops`` when given.
    """
    reason = drop_reason(raw.url)
    if reason is not None:
        if drops is not None:
            drops[reason] += 1
        log.debug("dropping %r: %s", raw.url, reason)
        return None
    return replace(raw, scheme_class=_scheme_class(raw.url))


def check_liveness(url: str, timeout: float = 10.0) -> LivenessStatus:
    """Fetch a URL and classify the outcome.

    This is the only network-touching call in the package and nothing
    invokes it by default; callers opt in explicitly.  Transport errors
    and timeouts count as dead, success as alive, and the status codes
    that signal blocked access (401, 403, 451) as restricted.
    """
    import requests

    target = url if "://" in url else "http://" + url
    try:
        response = requests.get(
            target,
            timeout=timeout,
            allow_redirects=True,
            headers={"User-Agent": "chainsift-linkcheck/0.1"},
        )
    except requests.RequestException:
        return LivenessStatus.DEAD
    if 200 <= response.status_code < 300:
        return LivenessStatus.ALIVE
    if response.status_code in (401, 403, 451):
        return LivenessStatus.RESTRICTED
    return LivenessStatus.DEAD
