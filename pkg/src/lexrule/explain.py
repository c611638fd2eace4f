"""Token-masking attribution for black-box sentence classifiers.

Random subsets of tokens are dropped, the classifier scores every perturbed
variant, and a weighted ridge regression from keep-masks to scores yields one
attribution per token (or per n-gram block). Positive attribution means the
token's presence pushes toward the class the classifier picked for the intact
sentence.
"""

from __future__ import annotations

import json
import statistics
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classifiers import Classifier
from .ruleclf import NON_REGULATORY, REGULATORY


class AlignmentError(ValueError):
    pass


_PUNCT = set(string.punctuation)

OUTCOME_CLASSES = ("TP", "TN", "FP", "FN")


def tokenize(sentence: str) -> list[tuple[str, int]]:
    """Whitespace tokens with leading/trailing punctuation split off as
    their own tokens; offsets index into the original sentence."""
    tokens: list[tuple[str, int]] = []
    pos = 0
    for chunk in sentence.split():
        start = sentence.index(chunk, pos)
        pos = start + len(chunk)
        left, right = 0, len(chunk)
        while left < right and chunk[left] in _PUNCT:
            tokens.append((chunk[left], start + left))
            left += 1
        trailing: list[tuple[str, int]] = []
        while right > left and chunk[right - 1] in _PUNCT:
            right -= 1
            trailing.append((chunk[right], start + right))
        if right > left:
            tokens.append((chunk[left:right], start + left))
        tokens.extend(reversed(trailing))
    return tokens


@dataclass(frozen=True)
class ExplainConfig:
    n_samples: int = 1000
    keep_probability: float = 0.5
    kernel_width: float = 0.75
    ridge_lambda: float = 1.0
    ngram: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 10:
            raise ValueError("n_samples must be >= 10")
        if not 0.0 < self.keep_probability < 1.0:
            raise ValueError("keep_probability must lie strictly between 0 and 1")
        if self.ngram < 1:
            raise ValueError("ngram must be >= 1")
        if self.kernel_width <= 0 or self.ridge_lambda < 0:
            raise ValueError("kernel_width must be positive and ridge_lambda non-negative")


@dataclass
class MaskSample:
    keep_mask: list[bool]
    perturbed_text: str
    model_score: float


@dataclass
class Explanation:
    sentence: str
    tokens: list[tuple[str, int]]  # (text, start_char), one per unit
    attributions: list[float]
    class_scored: str
    n_samples: int
    seed: int
    intercept: float = 0.0
    full_score: float = 0.5


def _units(tokens: list[tuple[str, int]], ngram: int, sentence: str) -> tuple[list[tuple[str, int]], list[list[int]]]:
    """Group tokens into contiguous n-gram blocks (last block may be short).
    Returns the unit surface forms and the token indices behind each unit."""
    if ngram == 1:
        return list(tokens), [[i] for i in range(len(tokens))]
    units: list[tuple[str, int]] = []
    members: list[list[int]] = []
    for i in range(0, len(tokens), ngram):
        block = tokens[i : i + ngram]
        first_text, first_start = block[0]
        last_text, last_start = block[-1]
        units.append((sentence[first_start : last_start + len(last_text)], first_start))
        members.append(list(range(i, min(i + ngram, len(tokens)))))
    return units, members


def _compose(tokens: list[tuple[str, int]], members: list[list[int]], keep: np.ndarray) -> str:
    kept: list[str] = []
    for unit_idx, token_idxs in enumerate(members):
        if keep[unit_idx]:
            kept.extend(tokens[t][0] for t in token_idxs)
    return " ".join(kept)


def _make_masks(cfg: ExplainConfig, n_units: int) -> np.ndarray:
    """The seeded sample set: row 0 keeps everything, the rest keep each
    unit independently with keep_probability."""
    rng = np.random.default_rng(cfg.seed)
    masks = np.ones((cfg.n_samples, n_units), dtype=bool)
    if cfg.n_samples > 1:
        masks[1:] = rng.random((cfg.n_samples - 1, n_units)) < cfg.keep_probability
    return masks


def mask_samples(sentence: str, classifier: Classifier, cfg: ExplainConfig) -> list[MaskSample]:
    """The scored perturbations behind an explanation, for inspection and
    testing; explain_sentence consumes exactly this sample set."""
    tokens = tokenize(sentence)
    if not tokens:
        raise ValueError("sentence has no tokens")
    units, members = _units(tokens, cfg.ngram, sentence)
    masks = _make_masks(cfg, len(units))
    texts = [_compose(tokens, members, masks[i]) for i in range(cfg.n_samples)]
    scores = classifier.classify_batch(texts)
    return [
        MaskSample(keep_mask=[bool(b) for b in masks[i]], perturbed_text=texts[i], model_score=float(scores[i]))
        for i in range(cfg.n_samples)
    ]


def _score_batch(classifier: Classifier, texts: list[str], threads: int) -> list[float]:
    if threads <= 1 or len(texts) < 2:
        return list(classifier.classify_batch(texts))
    chunk = (len(texts) + threads - 1) // threads
    pieces = [texts[i : i + chunk] for i in range(0, len(texts), chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        scored = list(pool.map(classifier.classify_batch, pieces))
    return [s for piece in scored for s in piece]


def explain_sentence(
    sentence: str,
    classifier: Classifier,
    cfg: ExplainConfig,
    scoring_threads: int = 1,
) -> Explanation:
    """Fit a local weighted ridge surrogate and return per-unit attributions.

    The sample set (masks) is fully determined by cfg.seed; scoring_threads
    only parallelizes classifier calls and cannot change the result. The
    first sample is always the unperturbed sentence; its score decides which
    class is explained (scores are flipped to 1-p when the intact sentence
    lands below 0.5, so attributions always explain the predicted class).
    """
    tokens = tokenize(sentence)
    if not tokens:
        raise ValueError("sentence has no tokens")
    units, members = _units(tokens, cfg.ngram, sentence)
    n_units = len(units)

    masks = _make_masks(cfg, n_units)
    texts = [_compose(tokens, members, masks[i]) for i in range(cfg.n_samples)]
    scores = np.asarray(_score_batch(classifier, texts, scoring_threads), dtype=float)
    if scores.shape != (cfg.n_samples,):
        raise ValueError("classifier returned a wrong number of scores")

    full_score = float(scores[0])
    if full_score >= 0.5:
        class_scored = REGULATORY
        y = scores
    else:
        class_scored = NON_REGULATORY
        y = 1.0 - scores

    kept_fraction = masks.sum(axis=1) / n_units
    distance = 1.0 - kept_fraction
    weights = np.exp(-(distance**2) / cfg.kernel_width**2)

    # weighted ridge with unpenalized intercept
    x = np.hstack([np.ones((cfg.n_samples, 1)), masks.astype(float)])
    wx = x * weights[:, None]
    gram = x.T @ wx
    penalty = np.eye(n_units + 1) * cfg.ridge_lambda
    penalty[0, 0] = 0.0
    beta = np.linalg.solve(gram + penalty, wx.T @ y)

    return Explanation(
        sentence=sentence,
        tokens=units,
        attributions=[float(b) for b in beta[1:]],
        class_scored=class_scored,
        n_samples=cfg.n_samples,
        seed=cfg.seed,
        intercept=float(beta[0]),
        full_score=full_score,
    )


def top_k(expl: Explanation, k: int) -> list[tuple[str, float, int]]:
    """The k highest-attribution units, descending; ties go to the earlier
    offset. Returns (text, attribution, start_char) triples."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(
        zip(expl.tokens, expl.attributions),
        key=lambda pair: (-pair[1], pair[0][1]),
    )
    return [(text, attr, start) for (text, start), attr in ranked[:k]]


DEGENERATE_ATTRIBUTION = 1e-9


@dataclass
class StabilityReport:
    runs: int
    top_sets: list[list[tuple[str, int]]]
    pairwise_jaccard: list[float]
    mean_jaccard: float
    degenerate: bool
    unstable: bool
    suggestion: str | None = None


def stability_check(
    sentence: str, classifier: Classifier, cfg: ExplainConfig, runs: int
) -> StabilityReport:
    """Re-run the explainer with consecutive seeds and compare top-3 sets.

    Mean pairwise Jaccard below 2/3 flags instability (suggesting a larger
    sample count). All-zero attributions across runs are reported as
    degenerate instead: there is nothing to rank.
    """
    if runs < 2:
        raise ValueError("runs must be >= 2")
    explanations = [
        explain_sentence(sentence, classifier, ExplainConfig(
            n_samples=cfg.n_samples,
            keep_probability=cfg.keep_probability,
            kernel_width=cfg.kernel_width,
            ridge_lambda=cfg.ridge_lambda,
            ngram=cfg.ngram,
            seed=cfg.seed + offset,
        ))
        for offset in range(runs)
    ]
    degenerate = all(
        all(abs(a) < DEGENERATE_ATTRIBUTION for a in expl.attributions) for expl in explanations
    )
    top_sets = [[(text, start) for text, _, start in top_k(expl, 3)] for expl in explanations]
    jaccards: list[float] = []
    for i in range(runs):
        for j in range(i + 1, runs):
            a, b = set(top_sets[i]), set(top_sets[j])
            jaccards.append(len(a & b) / len(a | b) if a | b else 1.0)
    mean_jaccard = sum(jaccards) / len(jaccards)
    unstable = not degenerate and mean_jaccard < 2 / 3
    return StabilityReport(
        runs=runs,
        top_sets=top_sets,
        pairwise_jaccard=jaccards,
        mean_jaccard=mean_jaccard,
        degenerate=degenerate,
        unstable=unstable,
        suggestion=f"increase n_samples to {2 * cfg.n_samples}" if unstable else None,
    )


def _check_aligned(expls: Sequence[Explanation], outcomes: Sequence[str]) -> None:
    if len(expls) != len(outcomes):
        raise AlignmentError(f"{len(expls)} explanations vs {len(outcomes)} outcomes")
    for outcome in outcomes:
        if outcome not in OUTCOME_CLASSES:
            raise AlignmentError(f"outcome {outcome!r} not one of {OUTCOME_CLASSES}")


def aggregate_influential(
    expls: Sequence[Explanation],
    outcomes: Sequence[str],
    k: int = 3,
    min_freq: int = 5,
) -> dict[str, list[tuple[str, int]]]:
    """How often each word lands in a sentence's top-k attributions.

    Only correctly classified items enter the tables: TPs feed the regulatory
    table, TNs the non-regulatory one. Words are lower-cased; frequencies
    below min_freq are cut; output is sorted by descending frequency, then
    alphabetically.
    """
    _check_aligned(expls, outcomes)
    counts: dict[str, dict[str, int]] = {REGULATORY: {}, NON_REGULATORY: {}}
    for expl, outcome in zip(expls, outcomes):
        if outcome == "TP":
            bucket = counts[REGULATORY]
        elif outcome == "TN":
            bucket = counts[NON_REGULATORY]
        else:
            continue
        for text, _, _ in top_k(expl, k):
            word = text.lower()
            bucket[word] = bucket.get(word, 0) + 1
    return {
        cls: sorted(
            ((w, c) for w, c in bucket.items() if c >= min_freq),
            key=lambda item: (-item[1], item[0]),
        )
        for cls, bucket in counts.items()
    }


@dataclass
class DistributionStats:
    mean: float
    median: float
    stddev: float  # population, not sample


def _stats(values: list[float]) -> DistributionStats:
    return DistributionStats(
        mean=statistics.fmean(values),
        median=float(statistics.median(values)),
        stddev=statistics.pstdev(values),
    )


def word_position_pct(start_char: int, sentence: str) -> float:
    """Relative position of a word: start offset over sentence character
    length, times one hundred."""
    return start_char / len(sentence) * 100.0


def position_stats(
    expls: Sequence[Explanation],
    outcomes: Sequence[str],
    k: int = 3,
) -> dict[str, dict[str, DistributionStats]]:
    """Per class: distribution of top-k word positions (percent into the
    sentence) and of sentence character lengths. TPs count as regulatory,
    TNs as non-regulatory, everything else is dropped."""
    _check_aligned(expls, outcomes)
    positions: dict[str, list[float]] = {REGULATORY: [], NON_REGULATORY: []}
    lengths: dict[str, list[float]] = {REGULATORY: [], NON_REGULATORY: []}
    for expl, outcome in zip(expls, outcomes):
        if outcome == "TP":
            cls = REGULATORY
        elif outcome == "TN":
            cls = NON_REGULATORY
        else:
            continue
        for _, _, start in top_k(expl, k):
            positions[cls].append(word_position_pct(start, expl.sentence))
        lengths[cls].append(float(len(expl.sentence)))
    out: dict[str, dict[str, DistributionStats]] = {}
    for cls in (REGULATORY, NON_REGULATORY):
        if positions[cls]:
            out[cls] = {
                "position_pct": _stats(positions[cls]),
                "sent_chars": _stats(lengths[cls]),
            }
    return out


def explanation_to_json(expl: Explanation) -> str:
    return json.dumps({
        "sentence": expl.sentence,
        "tokens": [[text, start] for text, start in expl.tokens],
        "attributions": expl.attributions,
        "class": expl.class_scored,
        "seed": expl.seed,
        "n_samples": expl.n_samples,
    })
