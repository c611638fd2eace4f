"""Corpus preparation: section extraction, sentence segmentation, deontic
filtering, and reproducible stratified sampling.

EU legal acts have a fixed macro-structure: an adoption formula ("HAS ADOPTED
THIS REGULATION") opens the enacting terms and a signature formula ("Done at
Brussels") closes them. Everything outside that window (recitals, annexes,
signatures) is discarded before sentence-level processing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class NoStartMarker(ValueError):
    pass


class NoEndMarker(ValueError):
    pass


class MissingMetadata(KeyError):
    pass


LEGAL_FORMS = ("regulation", "directive", "decision", "other")


@dataclass(frozen=True)
class LegalDocument:
    celex_id: str
    adoption_year: int
    policy_area: str
    legal_form: str
    full_text: str = ""

    def __post_init__(self):
        if not self.celex_id:
            raise ValueError("celex_id must be non-empty")
        if not 1952 <= self.adoption_year <= 2100:
            raise ValueError(f"adoption_year {self.adoption_year} out of range [1952, 2100]")
        if self.legal_form not in LEGAL_FORMS:
            raise ValueError(f"legal_form must be one of {LEGAL_FORMS}, got {self.legal_form!r}")


@dataclass(frozen=True)
class CandidateSentence:
    doc_id: str
    index_in_doc: int
    text: str
    deontic_tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.deontic_tokens:
            raise ValueError("a candidate sentence must contain at least one deontic token")


@dataclass
class Stratum:
    year: int
    policy_area: str
    sentences: list[CandidateSentence] = field(default_factory=list)


@dataclass(frozen=True)
class LabeledSentence:
    sentence: CandidateSentence
    label: int  # 1 = regulatory, 0 = non-regulatory

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass
class MarkerDictionary:
    """Start/end phrases bounding the enacting terms of an act."""

    start_phrases: list[str]
    end_phrases: list[str]

    def __post_init__(self):
        if not self.start_phrases or not self.end_phrases:
            raise ValueError("marker dictionary needs at least one start and one end phrase")


def load_phrase_file(path: str) -> list[str]:
    """One phrase per line; ``#`` starts a comment; order preserved, duplicates dropped."""
    phrases: list[str] = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line and line not in seen:
                phrases.append(line)
                seen.add(line)
    return phrases


def load_markers(path: str) -> MarkerDictionary:
    """Marker file with ``[start]`` / ``[end]`` section headers."""
    start: list[str] = []
    end: list[str] = []
    current = start
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower() == "[start]":
                current = start
            elif line.lower() == "[end]":
                current = end
            else:
                current.append(line)
    return MarkerDictionary(start, end)


def extract_regulatory_section(full_text: str, markers: MarkerDictionary) -> str:
    """Return the text strictly between the first start phrase and the
    earliest end phrase after it, whitespace-trimmed.

    Matching is case-sensitive exact substring. A colon directly after the
    start phrase belongs to the adoption formula and is consumed with it.
    """
    best_start = None  # (position, end-of-match)
    for phrase in markers.start_phrases:
        pos = full_text.find(phrase)
        if pos >= 0 and (best_start is None or pos < best_start[0]):
            best_start = (pos, pos + len(phrase))
    if best_start is None:
        raise NoStartMarker("no start phrase found in document")
    section_from = best_start[1]

    best_end = None
    for phrase in markers.end_phrases:
        pos = full_text.find(phrase, section_from)
        if pos >= 0 and (best_end is None or pos < best_end):
            best_end = pos
    if best_end is None:
        raise NoEndMarker("no end phrase found after the start phrase")

    section = full_text[section_from:best_end]
    stripped = section.lstrip()
    if stripped.startswith(":"):
        stripped = stripped[1:].lstrip()
    return stripped.rstrip()


# list markers run "1." to "999."; four digits is a year ending a sentence
_NUMBERED_ITEM = re.compile(r"^\(?\d{1,3}\)?\.$")


def segment_sentences(
    section_text: str,
    abbreviations: list[str] | None = None,
    split_on_semicolon: bool = True,
) -> list[str]:
    """Split text into sentences on '.', '?', '!' (and ';' unless disabled)
    followed by whitespace.

    No split happens when the terminator closes a known abbreviation
    ("Art.", "e.g.") or a numbered-list marker ("1.", "(2)."). Abbreviation
    matching is case-sensitive: "No." is the numbering abbreviation while a
    lower-case "no." legitimately ends a sentence.
    """
    abbrevs = set(abbreviations if abbreviations is not None else DEFAULT_ABBREVIATIONS)
    terminators = ".?!;" if split_on_semicolon else ".?!"
    sentences: list[str] = []
    start = 0
    for i, ch in enumerate(section_text):
        if ch not in terminators:
            continue
        if i + 1 < len(section_text) and not section_text[i + 1].isspace():
            continue
        if ch == ".":
            # word ending at this period, punctuation included
            j = i
            while j > 0 and not section_text[j - 1].isspace():
                j -= 1
            word = section_text[j : i + 1]
            if word in abbrevs:
                continue
            # "1." protects the split only in list-marker position: opening a
            # line or opening the sentence ("Article 1." really ends there)
            if _NUMBERED_ITEM.match(word):
                opens_line = j == 0 or section_text[j - 1] == "\n"
                opens_sentence = section_text[start:j].strip() == ""
                if opens_line or opens_sentence:
                    continue
        chunk = section_text[start : i + 1].strip()
        if chunk:
            sentences.append(chunk)
        start = i + 1
    tail = section_text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


DEFAULT_ABBREVIATIONS = [
    "No.", "Art.", "Arts.", "e.g.", "i.e.", "cf.", "etc.", "p.", "pp.",
    "Vol.", "Dr.", "Mr.", "Mrs.", "Ms.", "St.",
]

DEONTIC_PATTERN = re.compile(r"\b(shall|must)\b", re.IGNORECASE)


def filter_deontic(sentences: list[str], doc_id: str = "") -> list[CandidateSentence]:
    """Keep sentences containing "shall" or "must" as a whole word (any case).

    index_in_doc is the sentence's position in the input list, so candidate
    indices stay aligned with the segmented document.
    """
    kept = []
    for i, text in enumerate(sentences):
        tokens = tuple(m.group(1).lower() for m in DEONTIC_PATTERN.finditer(text))
        if tokens:
            kept.append(CandidateSentence(doc_id=doc_id, index_in_doc=i, text=text, deontic_tokens=tokens))
    return kept


class SplitMix64:
    """Tiny deterministic RNG (SplitMix64) so samples reproduce everywhere.

    The standard library and numpy generators do not promise identical
    streams across versions or implementations; this one is fully specified:
    state advances by the 64-bit golden gamma, output is the standard
    finalizer, and bounded draws use rejection sampling to stay unbiased.
    """

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % n

    def sample(self, population: list, k: int) -> list:
        """k draws without replacement via partial Fisher-Yates."""
        if k > len(population):
            raise ValueError("sample larger than population")
        pool = list(population)
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def stratify_sample(
    candidates: list[CandidateSentence],
    metadata: dict[str, tuple[int, str]],
    per_stratum: int,
    seed: int,
) -> list[CandidateSentence]:
    """Equal-allocation stratified sample over (year, policy_area) strata.

    Strata with fewer than per_stratum members are excluded entirely; from
    each remaining stratum exactly per_stratum sentences are drawn without
    replacement. Output is ordered by (year asc, policy_area asc), then draw
    order, and is identical for identical (candidates, metadata, seed).
    """
    if per_stratum < 1:
        raise ValueError("per_stratum must be >= 1")
    strata: dict[tuple[int, str], list[CandidateSentence]] = {}
    for cand in candidates:
        if cand.doc_id not in metadata:
            raise MissingMetadata(cand.doc_id)
        key = metadata[cand.doc_id]
        strata.setdefault(key, []).append(cand)

    rng = SplitMix64(seed)
    out: list[CandidateSentence] = []
    for key in sorted(strata):
        members = strata[key]
        if len(members) < per_stratum:
            continue
        out.extend(rng.sample(members, per_stratum))
    return out
