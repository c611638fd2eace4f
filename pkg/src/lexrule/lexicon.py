"""Agent-noun lexicon: loading and agenthood queries against a parsed sentence.

The lexicon is a frozen snapshot of noun lemmas (and short lemma phrases)
denoting entities that can act: "citizen", "operator", "member state". See
scripts/build_agent_lexicon.py for how the shipped snapshot was produced.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .conllu import ParsedSentence, Relation, Token


class EmptyLexicon(UserWarning):
    pass


def _normalize(phrase: str) -> str:
    return " ".join(phrase.lower().split())


@dataclass(frozen=True)
class AgentLexicon:
    """Set of lower-cased, single-spaced lemma phrases (1..4 words).

    Immutable after construction, so instances are safe to share across
    threads; derive variants with `without`.
    """

    entries: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(
            self, "entries", frozenset(_normalize(e) for e in self.entries if e.strip())
        )

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, phrase: str) -> bool:
        return _normalize(phrase) in self.entries

    def without(self, *phrases: str) -> "AgentLexicon":
        dropped = {_normalize(p) for p in phrases}
        return AgentLexicon(self.entries - dropped)


def load_lexicon(path: str) -> AgentLexicon:
    """Load a lexicon file: one phrase per line, ``#`` comments, blank lines ignored."""
    entries: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                entries.add(_normalize(line))
    if not entries:
        warnings.warn(f"lexicon {path} contains no entries", EmptyLexicon)
    return AgentLexicon(frozenset(entries))


def compound_phrase(sentence: ParsedSentence, token_index: int, lemmas: bool = True) -> str:
    """The noun phrase made of a token plus its contiguous compound/flat dependents.

    Only dependents that sit in an unbroken index run ending at the token are
    included ("EU Member States" yields "eu member state" for the "States"
    head, but a compound separated by other material is left out).
    """
    head = sentence.token(token_index)
    parts = {token_index: head}
    for child in sentence.children(token_index):
        if child.deprel is Relation.COMPOUND:
            parts[child.index] = child
    indices = sorted(parts)
    # keep the maximal contiguous run containing the head token
    run = [token_index]
    i = indices.index(token_index)
    for j in range(i - 1, -1, -1):
        if indices[j] == run[0] - 1:
            run.insert(0, indices[j])
        else:
            break
    for j in range(i + 1, len(indices)):
        if indices[j] == run[-1] + 1:
            run.append(indices[j])
        else:
            break
    words = [(parts[k].lemma if lemmas else parts[k].form) for k in run]
    phrase = " ".join(words)
    return _normalize(phrase) if lemmas else phrase


def is_agent_noun(
    token_index: int, sentence: ParsedSentence, lexicon: AgentLexicon
) -> tuple[bool, str | None]:
    """Decide whether a nominal token denotes an agent; returns (verdict, matched phrase).

    Proper nouns count as agents outright. Common nouns match through the
    lexicon, either on the bare lemma or on the compound phrase built from
    contiguous compound/flat dependents. Pronouns never match: without
    coreference resolution their referent is unresolvable.
    """
    token: Token = sentence.token(token_index)
    if token.upos not in ("NOUN", "PROPN", "PRON"):
        raise ValueError(f"token {token_index} ({token.form!r}) is not a nominal")
    if token.upos == "PRON":
        return False, None
    if token.upos == "PROPN":
        return True, compound_phrase(sentence, token_index, lemmas=False)
    lemma = _normalize(token.lemma)
    if lemma in lexicon:
        return True, lemma
    phrase = compound_phrase(sentence, token_index, lemmas=True)
    if phrase != lemma and phrase in lexicon:
        return True, phrase
    return False, None
