"""Desk-scale client for the EU publications SPARQL endpoint.

Fetches per-act metadata (adoption year, policy area code, legal form) by
CELEX identifier. One query per id keeps the client trivially restartable;
requests may run in parallel but honor a configurable rate limit and results
always come back in request order.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from .corpus import LegalDocument


class NetworkError(RuntimeError):
    pass


class MalformedResponse(RuntimeError):
    pass


QUERY_TEMPLATE = """\
PREFIX cdm: <http://publications.europa.eu/ontology/cdm#>
SELECT ?celex ?date ?policy ?form WHERE {{
  ?work cdm:resource_legal_id_celex ?celex .
  FILTER(STR(?celex) = "{celex}")
  OPTIONAL {{ ?work cdm:work_date_document ?date . }}
  OPTIONAL {{ ?work cdm:resource_legal_is_about_concept_directory-code ?policy . }}
  OPTIONAL {{ ?work cdm:work_has_resource-type ?form . }}
}} LIMIT 1
"""

_FORM_BY_CELEX_LETTER = {"R": "regulation", "L": "directive", "D": "decision"}

# endpoint resource types, with and without the delegated/implementing suffixes
_FORM_BY_RESOURCE_TYPE = {
    "REG": "regulation", "REG_IMPL": "regulation", "REG_DEL": "regulation",
    "DIR": "directive", "DIR_IMPL": "directive", "DIR_DEL": "directive",
    "DEC": "decision", "DEC_IMPL": "decision", "DEC_DEL": "decision",
}


def legal_form_from_celex(celex_id: str) -> str:
    """Derive the legal form from the CELEX sector-3 type letter (R/L/D)."""
    if len(celex_id) >= 6 and celex_id[0] == "3":
        return _FORM_BY_CELEX_LETTER.get(celex_id[5].upper(), "other")
    return "other"


def normalize_legal_form(raw: str | None, celex_id: str) -> str:
    """Map an endpoint resource-type value (possibly a URI) onto the
    regulation/directive/decision/other vocabulary, with the CELEX type
    letter as fallback."""
    if raw:
        token = raw.rstrip("/").rsplit("/", 1)[-1].upper()
        if token in _FORM_BY_RESOURCE_TYPE:
            return _FORM_BY_RESOURCE_TYPE[token]
        lowered = token.lower()
        if lowered in ("regulation", "directive", "decision", "other"):
            return lowered
    return legal_form_from_celex(celex_id)


class _RateLimiter:
    """Enforces a minimum interval between request starts across threads."""

    def __init__(self, min_interval: float):
        self.min_interval = min_interval
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        if self.min_interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self.min_interval
        if delay > 0:
            time.sleep(delay)


@dataclass
class FetchResult:
    records: list[LegalDocument]
    unresolved: list[str]


def _first_binding(payload: dict) -> dict | None:
    try:
        bindings = payload["results"]["bindings"]
    except (KeyError, TypeError) as exc:
        raise MalformedResponse(f"unexpected response shape: {exc}") from exc
    if not bindings:
        return None
    return bindings[0]


def _value(binding: dict, key: str) -> str | None:
    entry = binding.get(key)
    if entry is None:
        return None
    value = entry.get("value")
    if value is None:
        raise MalformedResponse(f"binding {key!r} has no value")
    return value


def fetch_metadata(
    celex_ids: list[str],
    endpoint: str,
    timeout: float = 30.0,
    max_workers: int = 4,
    min_interval: float = 0.2,
    session: requests.Session | None = None,
) -> FetchResult:
    """Resolve CELEX ids to metadata records.

    Unresolvable ids (no binding in the endpoint) are reported in
    FetchResult.unresolved rather than silently dropped. Raises NetworkError
    on transport failures and MalformedResponse on undecodable payloads.
    """
    if not celex_ids:
        return FetchResult([], [])
    own_session = session or requests.Session()
    limiter = _RateLimiter(min_interval)

    def fetch_one(celex: str) -> LegalDocument | None:
        limiter.wait()
        query = QUERY_TEMPLATE.format(celex=celex)
        try:
            resp = own_session.get(
                endpoint,
                params={"query": query, "format": "application/sparql-results+json"},
                timeout=timeout,
            )
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise NetworkError(f"request for {celex} failed: {exc}") from exc
        try:
            payload = resp.json()
        except ValueError as exc:
            raise MalformedResponse(f"response for {celex} is not JSON: {exc}") from exc
        binding = _first_binding(payload)
        if binding is None:
            return None
        date = _value(binding, "date")
        if date is None or len(date) < 4 or not date[:4].isdigit():
            raise MalformedResponse(f"record for {celex} has unusable date {date!r}")
        return LegalDocument(
            celex_id=celex,
            adoption_year=int(date[:4]),
            policy_area=_value(binding, "policy") or "",
            legal_form=normalize_legal_form(_value(binding, "form"), celex),
        )

    try:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(fetch_one, celex_ids))
    finally:
        if session is None:
            own_session.close()

    records = [r for r in results if r is not None]
    unresolved = [cid for cid, r in zip(celex_ids, results) if r is None]
    return FetchResult(records, unresolved)
