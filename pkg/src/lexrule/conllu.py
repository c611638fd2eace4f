"""Reading dependency-parsed sentences from CoNLL-U and normalizing relation labels.

Two label schemes are supported: ``ud_v2`` (Universal Dependencies v2, e.g.
"aux:pass", "obl:agent") and ``legacy_clear`` (ClearNLP-style labels emitted by
older pipelines, e.g. "auxpass", "agent", "prep"/"pobj"). Both are mapped onto
one canonical relation set so the rule engine never sees raw labels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, TextIO


class MalformedConllu(ValueError):
    """Raised for structurally invalid CoNLL-U input; carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Relation(enum.Enum):
    """Canonical dependency relations used by the classification rules."""

    AUX_DEP = "aux_dep"
    PASSIVE_AUX = "passive_aux"
    SUBJ = "subj"
    PASSIVE_SUBJ = "passive_subj"
    AGENT = "agent"
    PREP_OBJ = "prep_obj"
    PREP = "prep"
    COMPOUND = "compound"
    CONJ = "conj"
    OTHER = "other"


SCHEMES = ("ud_v2", "legacy_clear")

# Shared across schemes; scheme-specific labels never collide.
_LABEL_TABLE = {
    "aux": Relation.AUX_DEP,
    "aux:pass": Relation.PASSIVE_AUX,
    "auxpass": Relation.PASSIVE_AUX,
    "nsubj": Relation.SUBJ,
    "nsubj:pass": Relation.PASSIVE_SUBJ,
    "nsubjpass": Relation.PASSIVE_SUBJ,
    "obl:agent": Relation.AGENT,
    "agent": Relation.AGENT,
    "obl": Relation.PREP_OBJ,
    "pobj": Relation.PREP_OBJ,
    "prep": Relation.PREP,
    "case": Relation.PREP,
    "compound": Relation.COMPOUND,
    "flat": Relation.COMPOUND,
    "conj": Relation.CONJ,
}


def map_label(raw_deprel: str, scheme: str = "ud_v2") -> Relation:
    """Map a raw dependency label onto the canonical relation set.

    Total: unknown labels map to ``Relation.OTHER`` (the raw string stays
    available on the token). For ud_v2, unknown subtyped labels fall back to
    their base label ("compound:prt" behaves like "compound").
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown deprel scheme {scheme!r}; expected one of {SCHEMES}")
    label = raw_deprel.strip()
    rel = _LABEL_TABLE.get(label)
    if rel is not None:
        return rel
    if scheme == "ud_v2" and ":" in label:
        rel = _LABEL_TABLE.get(label.split(":", 1)[0])
        if rel is not None:
            return rel
    return Relation.OTHER


@dataclass(frozen=True)
class Token:
    index: int  # 1-based position in the sentence
    form: str
    lemma: str
    upos: str
    head: int  # 0 = root
    deprel: Relation
    raw_deprel: str
    start_char: int  # offset into the sentence text

    def is_nominal(self) -> bool:
        return self.upos in ("NOUN", "PROPN", "PRON")


@dataclass
class ParsedSentence:
    """A dependency tree over one sentence; tokens are 1-indexed via `token(i)`."""

    text: str
    tokens: list[Token] = field(default_factory=list)

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    def children(self, index: int) -> list[Token]:
        return [t for t in self.tokens if t.head == index]

    def neighbors(self, index: int) -> list[Token]:
        """Tree-adjacent tokens (head and dependents), ignoring edge direction."""
        out = self.children(index)
        head = self.token(index).head
        if head != 0:
            out.append(self.token(head))
        return out

    def root(self) -> Token:
        for t in self.tokens:
            if t.head == 0:
                return t
        raise ValueError("sentence has no root token")


def _check_tree(heads: list[int], first_line: int) -> None:
    n = len(heads)
    roots = [i for i, h in enumerate(heads, start=1) if h == 0]
    if len(roots) != 1:
        raise MalformedConllu(first_line, f"expected exactly one root, found {len(roots)}")
    for i, h in enumerate(heads, start=1):
        if h == i:
            raise MalformedConllu(first_line, f"token {i} is its own head")
        if h < 0 or h > n:
            raise MalformedConllu(first_line, f"token {i} has head {h} outside sentence")
    # Reachability from the root; a cycle leaves tokens unvisited.
    children: dict[int, list[int]] = {}
    for i, h in enumerate(heads, start=1):
        children.setdefault(h, []).append(i)
    seen: set[int] = set()
    stack = [roots[0]]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        stack.extend(children.get(node, []))
    if len(seen) != n:
        raise MalformedConllu(first_line, "head links do not form a tree (cycle or disconnected token)")


def _align_offsets(text: str | None, forms: list[str], space_after: list[bool]) -> tuple[str, list[int]]:
    """Compute start_char per token, aligning against the sentence text when given.

    Falls back to text rebuilt from cumulative form lengths (single spaces,
    honoring SpaceAfter=No) when no ``# text`` comment was present or the
    declared text does not actually contain the forms; text and offsets are
    always a consistent pair.
    """
    if text is not None:
        offsets = []
        cursor = 0
        ok = True
        for form in forms:
            pos = text.find(form, cursor)
            if pos < 0:
                ok = False
                break
            offsets.append(pos)
            cursor = pos + len(form)
        if ok:
            return text, offsets
    offsets = []
    cursor = 0
    pieces = []
    for form, glue in zip(forms, space_after):
        offsets.append(cursor)
        pieces.append(form)
        cursor += len(form)
        if glue:
            pieces.append(" ")
            cursor += 1
    return "".join(pieces).rstrip(), offsets


def read_conllu(stream: TextIO | Iterable[str], scheme: str = "ud_v2") -> list[ParsedSentence]:
    """Parse a CoNLL-U stream into ParsedSentences.

    Recognized comments: ``# text = ...`` (sentence text used for offset
    alignment) and ``# scheme = ...`` (overrides the label scheme for the rest
    of the stream). Multiword-token ranges (``i-j``) and empty nodes (``i.j``)
    are skipped. Raises MalformedConllu on wrong column counts or head links
    that do not form a tree.
    """
    sentences: list[ParsedSentence] = []
    rows: list[tuple[int, list[str]]] = []  # (line_no, columns)
    text: str | None = None
    first_line = 0
    active_scheme = scheme

    def flush() -> None:
        nonlocal rows, text
        if not rows:
            text = None
            return
        heads = []
        for line_no, cols in rows:
            try:
                heads.append(int(cols[6]))
            except ValueError:
                raise MalformedConllu(line_no, f"non-integer head {cols[6]!r}") from None
        _check_tree(heads, first_line)
        forms = [cols[1] for _, cols in rows]
        space_after = ["SpaceAfter=No" not in cols[9] for _, cols in rows]
        sent_text, offsets = _align_offsets(text, forms, space_after)
        tokens = [
            Token(
                index=i,
                form=cols[1],
                lemma=cols[2],
                upos=cols[3],
                head=heads[i - 1],
                deprel=map_label(cols[7], active_scheme),
                raw_deprel=cols[7],
                start_char=offsets[i - 1],
            )
            for i, (_, cols) in enumerate(rows, start=1)
        ]
        sentences.append(ParsedSentence(text=sent_text, tokens=tokens))
        rows = []
        text = None

    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            key, eq, value = line[1:].partition("=")
            if eq:
                key, value = key.strip(), value.strip()
                if key == "text":
                    text = value
                elif key == "scheme":
                    if value not in SCHEMES:
                        raise MalformedConllu(line_no, f"unknown scheme {value!r}")
                    active_scheme = value
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise MalformedConllu(line_no, f"expected 10 tab-separated columns, got {len(cols)}")
        token_id = cols[0]
        if "-" in token_id or "." in token_id:
            continue  # multiword ranges and empty nodes carry no tree structure
        if not rows:
            first_line = line_no
        rows.append((line_no, cols))
    flush()
    return sentences


def read_conllu_file(path: str, scheme: str = "ud_v2") -> list[ParsedSentence]:
    with open(path, encoding="utf-8") as fh:
        return read_conllu(fh, scheme=scheme)
