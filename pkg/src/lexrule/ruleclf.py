"""Dependency-rule classification of sentences as regulatory or not.

A sentence counts as regulatory when some lexical verb (i) is governed by a
deontic auxiliary, "shall" or "must", and (ii) connects through the dependency
tree to an agent noun naming who is being regulated. The attribute search runs
toward the sentence start for active voice (the subject side) and toward the
end for passive voice (the by-phrase side).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, replace
from typing import NamedTuple

from .classifiers import Classifier
from .conllu import ParsedSentence, Relation, Token
from .lexicon import AgentLexicon, is_agent_noun

DEONTIC_LEMMAS = ("shall", "must")

REGULATORY = "regulatory"
NON_REGULATORY = "non_regulatory"


class Voice(enum.Enum):
    ACTIVE = "active"
    PASSIVE = "passive"


class FailureReason(enum.Enum):
    NO_DEONTIC_VERB = "no_deontic_verb"
    NO_ATTRIBUTE_FOUND = "no_attribute_found"
    PRONOUN_ATTRIBUTE = "pronoun_attribute"
    UNKNOWN_AGENT_NOUN = "unknown_agent_noun"


@dataclass(frozen=True)
class RuleProfile:
    """mode "v1" is the rule set as first calibrated; "refined" additionally
    requires passive-voice attributes to hang off an agent/by relation, which
    removes the known false-positive class of other prepositional phrases."""

    mode: str = "v1"

    def __post_init__(self):
        if self.mode not in ("v1", "refined"):
            raise ValueError(f"unknown profile mode {self.mode!r}")


@dataclass
class Rationale:
    deontic_verb_index: int | None = None
    deontic_aux_lemma: str | None = None
    voice: Voice | None = None
    attribute_token_index: int | None = None
    attribute_phrase: str | None = None
    failure_reason: FailureReason | None = None
    # diagnostics beyond the core record: the nominal that failed the
    # agenthood test (drives hybrid delegation) and the delegation target
    candidate_form: str | None = None
    delegated_to: str | None = None


@dataclass
class ClassificationOutcome:
    label: str
    score: float
    rationale: Rationale

    def __post_init__(self):
        if (self.label == REGULATORY) != (self.score >= 0.5):
            raise ValueError(f"label {self.label!r} inconsistent with score {self.score}")


class AttributeMatch(NamedTuple):
    token_index: int
    phrase: str


@dataclass
class AttributeSearch:
    match: AttributeMatch | None = None
    failure_reason: FailureReason | None = None
    candidate_form: str | None = None


def find_deontic_verbs(sentence: ParsedSentence) -> list[tuple[int, int]]:
    """(verb_index, aux_index) pairs for every lexical verb governed by a
    deontic auxiliary, in verb order.

    Covers both attachment conventions: the auxiliary as an aux/auxpass
    dependent of the verb, and parses hanging the lexical verb under the
    auxiliary. Verbs conjoined to a deontic-bearing verb inherit its deontic
    ("shall monitor and review").
    """
    found: dict[int, int] = {}
    for tok in sentence.tokens:
        if tok.upos != "VERB":
            continue
        for child in sentence.children(tok.index):
            if child.deprel in (Relation.AUX_DEP, Relation.PASSIVE_AUX) and child.lemma.lower() in DEONTIC_LEMMAS:
                found[tok.index] = child.index
                break
        else:
            if tok.head != 0 and tok.deprel in (Relation.AUX_DEP, Relation.PASSIVE_AUX):
                head = sentence.token(tok.head)
                if head.lemma.lower() in DEONTIC_LEMMAS:
                    found[tok.index] = head.index
    # propagate through conj chains
    changed = True
    while changed:
        changed = False
        for tok in sentence.tokens:
            if tok.upos != "VERB" or tok.index in found:
                continue
            if tok.deprel is Relation.CONJ and tok.head in found:
                found[tok.index] = found[tok.head]
                changed = True
    return sorted(found.items())


def detect_voice(verb_index: int, sentence: ParsedSentence) -> Voice:
    """Passive iff the verb carries a passive auxiliary or passive subject."""
    for child in sentence.children(verb_index):
        if child.deprel in (Relation.PASSIVE_AUX, Relation.PASSIVE_SUBJ):
            return Voice.PASSIVE
    return Voice.ACTIVE


def _bfs_from_verb(
    sentence: ParsedSentence, verb_index: int, forward: bool
) -> tuple[list[Token], dict[int, int]]:
    """Level-order traversal of the tree from the verb, restricted to paths
    whose first node lies after (forward) or before (backward) the verb in
    the sentence. Ties within a level break on smaller token index. Returns
    the visit order and parent pointers (for path reconstruction).
    """
    first = [
        t for t in sentence.neighbors(verb_index)
        if (t.index > verb_index) == forward and t.index != verb_index
    ]
    visited = {verb_index}
    parent: dict[int, int] = {}
    frontier = sorted(first, key=lambda t: t.index)
    for t in frontier:
        visited.add(t.index)
        parent[t.index] = verb_index
    order: list[Token] = []
    while frontier:
        nxt: list[Token] = []
        for tok in frontier:
            order.append(tok)
            for nb in sentence.neighbors(tok.index):
                if nb.index not in visited:
                    visited.add(nb.index)
                    parent[nb.index] = tok.index
                    nxt.append(nb)
        frontier = sorted(nxt, key=lambda t: t.index)
    return order, parent


def _edge_relation(sentence: ParsedSentence, a: int, b: int) -> Relation:
    ta, tb = sentence.token(a), sentence.token(b)
    if ta.head == b:
        return ta.deprel
    if tb.head == a:
        return tb.deprel
    raise ValueError(f"tokens {a} and {b} are not tree-adjacent")


def _governing_adposition(sentence: ParsedSentence, index: int) -> Token | None:
    """The adposition introducing a prepositional object, under either label
    scheme (head preposition, or a case-marking child)."""
    tok = sentence.token(index)
    if tok.deprel is not Relation.PREP_OBJ:
        return None
    if tok.head != 0:
        head = sentence.token(tok.head)
        if head.upos == "ADP":
            return head
    for child in sentence.children(index):
        if child.deprel is Relation.PREP and child.upos == "ADP":
            return child
    return None


def _agent_path_ok(sentence: ParsedSentence, parent: dict[int, int], verb_index: int, cand: Token) -> bool:
    """Refined passive constraint: the candidate must hang off an agent
    relation or a by-headed prepositional object; anything else is the known
    false-positive pattern."""
    node = cand.index
    while node != verb_index:
        prev = parent[node]
        if _edge_relation(sentence, node, prev) is Relation.AGENT:
            return True
        node = prev
    adp = _governing_adposition(sentence, cand.index)
    return adp is not None and adp.lemma.lower() == "by"


def _span_phrase(sentence: ParsedSentence, index: int) -> str:
    """Attribute phrase: the token plus its contiguous compound and
    adjectival modifiers, verbatim from the sentence text."""
    keep = {index}
    for child in sentence.children(index):
        if child.deprel is Relation.COMPOUND or child.raw_deprel == "amod":
            keep.add(child.index)
    run = [index]
    while run[0] - 1 in keep:
        run.insert(0, run[0] - 1)
    while run[-1] + 1 in keep:
        run.append(run[-1] + 1)
    first, last = sentence.token(run[0]), sentence.token(run[-1])
    return sentence.text[first.start_char : last.start_char + len(last.form)]


def find_attribute(
    verb_index: int,
    voice: Voice,
    sentence: ParsedSentence,
    lexicon: AgentLexicon,
    profile: RuleProfile = RuleProfile(),
) -> AttributeSearch:
    """Search the tree for the verb's agent-noun attribute.

    Nominals are visited nearest-first (ties toward the sentence start); the
    first one passing the agenthood test wins. On failure the reason reflects
    how far the search got: a pronoun sitting in subject position, a nominal
    that failed the lexicon test, or no usable nominal at all.
    """
    order, parent = _bfs_from_verb(sentence, verb_index, forward=(voice is Voice.PASSIVE))
    nearest_subject: Token | None = None
    lexicon_failure: Token | None = None
    for tok in order:
        if not tok.is_nominal():
            continue
        if nearest_subject is None and tok.deprel in (Relation.SUBJ, Relation.PASSIVE_SUBJ):
            nearest_subject = tok
        ok, _ = is_agent_noun(tok.index, sentence, lexicon)
        if ok:
            if (
                profile.mode == "refined"
                and voice is Voice.PASSIVE
                and not _agent_path_ok(sentence, parent, verb_index, tok)
            ):
                continue
            return AttributeSearch(match=AttributeMatch(tok.index, _span_phrase(sentence, tok.index)))
        if tok.upos == "NOUN" and lexicon_failure is None:
            lexicon_failure = tok
    if nearest_subject is not None and nearest_subject.upos == "PRON":
        return AttributeSearch(
            failure_reason=FailureReason.PRONOUN_ATTRIBUTE, candidate_form=nearest_subject.form
        )
    if lexicon_failure is not None:
        return AttributeSearch(
            failure_reason=FailureReason.UNKNOWN_AGENT_NOUN, candidate_form=lexicon_failure.form
        )
    return AttributeSearch(failure_reason=FailureReason.NO_ATTRIBUTE_FOUND)


def classify_rule(
    sentence: ParsedSentence,
    lexicon: AgentLexicon,
    profile: RuleProfile = RuleProfile(),
) -> ClassificationOutcome:
    """Regulatory iff some deontic verb yields an attribute match.

    The rationale records the first successful verb, or, when every verb
    fails, the attribute-stage failure of the first deontic verb (attribute
    failures always outrank finding no deontic verb at all).
    """
    verbs = find_deontic_verbs(sentence)
    if not verbs:
        return ClassificationOutcome(
            NON_REGULATORY, 0.0, Rationale(failure_reason=FailureReason.NO_DEONTIC_VERB)
        )
    first_failure: Rationale | None = None
    for verb_index, aux_index in verbs:
        voice = detect_voice(verb_index, sentence)
        result = find_attribute(verb_index, voice, sentence, lexicon, profile)
        base = Rationale(
            deontic_verb_index=verb_index,
            deontic_aux_lemma=sentence.token(aux_index).lemma.lower(),
            voice=voice,
        )
        if result.match is not None:
            base.attribute_token_index = result.match.token_index
            base.attribute_phrase = result.match.phrase
            return ClassificationOutcome(REGULATORY, 1.0, base)
        if first_failure is None:
            base.failure_reason = result.failure_reason
            base.candidate_form = result.candidate_form
            first_failure = base
    assert first_failure is not None
    return ClassificationOutcome(NON_REGULATORY, 0.0, first_failure)


ATTRIBUTE_FAILURES = (
    FailureReason.PRONOUN_ATTRIBUTE,
    FailureReason.UNKNOWN_AGENT_NOUN,
    FailureReason.NO_ATTRIBUTE_FOUND,
)


def classify_hybrid(
    sentence: ParsedSentence,
    lexicon: AgentLexicon,
    profile: RuleProfile,
    fallback: Classifier,
    delegate_always: bool = False,
) -> ClassificationOutcome:
    """Rule engine first; the fallback classifier only when attribute
    identification failed.

    By default an unknown-agent-noun failure on a lower-cased common noun is
    kept as a confident non-regulatory verdict (the rules are right about
    those); delegation happens for pronoun subjects and for name-like
    candidates the lexicon cannot know. delegate_always delegates on every
    attribute-stage failure instead.
    """
    base = classify_rule(sentence, lexicon, profile)
    reason = base.rationale.failure_reason
    if base.label == REGULATORY or reason is FailureReason.NO_DEONTIC_VERB:
        return base
    assert reason in ATTRIBUTE_FAILURES
    if not delegate_always and reason is FailureReason.UNKNOWN_AGENT_NOUN:
        form = base.rationale.candidate_form or ""
        if form and not (form.istitle() or form.isupper()):
            return base
    score = float(fallback.classify_batch([sentence.text])[0])
    label = REGULATORY if score >= 0.5 else NON_REGULATORY
    rationale = replace(
        base.rationale,
        delegated_to=fallback.name,
        failure_reason=None if label == REGULATORY else reason,
    )
    return ClassificationOutcome(label, score, rationale)


OUTCOME_CSV_HEADER = ["sentence", "label", "score", "failure_reason", "attribute_phrase"]


def outcome_csv_rows(sentences: list[str], outcomes: list[ClassificationOutcome]):
    """Rows for the outcome export (header in OUTCOME_CSV_HEADER): label as
    1/0, score, failure reason, and attribute phrase."""
    if len(sentences) != len(outcomes):
        raise ValueError("sentences and outcomes must align")
    for text, outcome in zip(sentences, outcomes):
        reason = outcome.rationale.failure_reason
        yield [
            text,
            1 if outcome.label == REGULATORY else 0,
            outcome.score,
            reason.value if reason else "",
            outcome.rationale.attribute_phrase or "",
        ]


def write_outcomes_csv(path: str, sentences: list[str], outcomes: list[ClassificationOutcome]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OUTCOME_CSV_HEADER)
        writer.writerows(outcome_csv_rows(sentences, outcomes))
