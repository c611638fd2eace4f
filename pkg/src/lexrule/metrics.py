"""Classification performance metrics and inter-rater agreement.

Positive class is regulatory (= 1) throughout. Metrics that come out 0/0 are
reported as None ("undefined"), never silently as 0.0; small evaluation sets
hit this routinely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence


class LengthMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class DegenerateRatings(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class ClassMetrics:
    precision: float | None
    recall: float | None
    f1: float | None


@dataclass
class MetricsReport:
    n: int
    accuracy: float
    regulatory: ClassMetrics
    non_regulatory: ClassMetrics
    alpha_vs_gold: float | None = None


def confusion(gold: Sequence[int], pred: Sequence[int]) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise LengthMismatch(f"gold has {len(gold)} items, pred has {len(pred)}")
    if not gold:
        raise EmptyInput("no items to evaluate")
    tp = fp = tn = fn = 0
    for g, p in zip(gold, pred):
        if g not in (0, 1) or p not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got gold={g!r} pred={p!r}")
        if g == 1 and p == 1:
            tp += 1
        elif g == 0 and p == 1:
            fp += 1
        elif g == 0 and p == 0:
            tn += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def _f1(p: float | None, r: float | None) -> float | None:
    if p is None or r is None or p + r == 0:
        return None
    return 2 * p * r / (p + r)


def per_class_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy plus precision/recall/F1 for both classes (0 treated as the
    positive class for the non-regulatory block)."""
    if cm.total == 0:
        raise EmptyInput("empty confusion matrix")
    p_reg = _ratio(cm.tp, cm.tp + cm.fp)
    r_reg = _ratio(cm.tp, cm.tp + cm.fn)
    p_non = _ratio(cm.tn, cm.tn + cm.fn)
    r_non = _ratio(cm.tn, cm.tn + cm.fp)
    return MetricsReport(
        n=cm.total,
        accuracy=(cm.tp + cm.tn) / cm.total,
        regulatory=ClassMetrics(p_reg, r_reg, _f1(p_reg, r_reg)),
        non_regulatory=ClassMetrics(p_non, r_non, _f1(p_non, r_non)),
    )


def krippendorff_alpha(ratings_a: Sequence, ratings_b: Sequence) -> float:
    """Two-rater Krippendorff's alpha for nominal data, no missing values.

    Built on the coincidence matrix: each item contributes its value pair in
    both orders, observed disagreement D_o is the off-diagonal mass, expected
    disagreement D_e comes from the value marginals n_c * n_k / (n - 1), and
    alpha = 1 - D_o / D_e. Raises DegenerateRatings when D_e = 0 (both raters
    used one identical value throughout; alpha is undefined there).
    """
    if len(ratings_a) != len(ratings_b):
        raise LengthMismatch(f"{len(ratings_a)} vs {len(ratings_b)} ratings")
    if len(ratings_a) < 2:
        raise EmptyInput("need at least 2 rated items")
    coincidence: dict[tuple, float] = {}
    for a, b in zip(ratings_a, ratings_b):
        coincidence[(a, b)] = coincidence.get((a, b), 0) + 1
        coincidence[(b, a)] = coincidence.get((b, a), 0) + 1
    values = sorted({v for pair in coincidence for v in pair}, key=repr)
    n_c = {c: sum(coincidence.get((c, k), 0) for k in values) for c in values}
    n = sum(n_c.values())
    d_o = sum(coincidence.get((c, k), 0) for c in values for k in values if c != k)
    d_e = sum(n_c[c] * n_c[k] / (n - 1) for c in values for k in values if c != k)
    if d_e == 0:
        raise DegenerateRatings("both raters used a single identical value; alpha undefined")
    return 1.0 - d_o / d_e


@dataclass
class Disagreement:
    index: int
    labels: dict[str, int]  # model name -> label
    gold: int


@dataclass
class ComparisonReport:
    models: dict[str, MetricsReport]
    pairwise_alpha: dict[tuple[str, str], float | None]
    disagreements: dict[tuple[str, str], list[Disagreement]] = field(default_factory=dict)


def compare_models(gold: Sequence[int], preds: dict[str, Sequence[int]]) -> ComparisonReport:
    """Per-model metrics (with alpha against gold) plus pairwise inter-model
    agreement and the items on which each model pair disagrees."""
    reports: dict[str, MetricsReport] = {}
    for name, pred in preds.items():
        report = per_class_metrics(confusion(gold, pred))
        try:
            report.alpha_vs_gold = krippendorff_alpha(gold, pred)
        except DegenerateRatings:
            report.alpha_vs_gold = None
        reports[name] = report
    pairwise: dict[tuple[str, str], float | None] = {}
    disagreements: dict[tuple[str, str], list[Disagreement]] = {}
    names = sorted(preds)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            try:
                pairwise[(a, b)] = krippendorff_alpha(preds[a], preds[b])
            except DegenerateRatings:
                pairwise[(a, b)] = None
            disagreements[(a, b)] = [
                Disagreement(index=j, labels={a: la, b: lb}, gold=g)
                for j, (la, lb, g) in enumerate(zip(preds[a], preds[b], gold))
                if la != lb
            ]
    return ComparisonReport(models=reports, pairwise_alpha=pairwise, disagreements=disagreements)


def _fmt(value: float | None, digits: int = 3) -> str:
    return "undef" if value is None else f"{value:.{digits}f}"


def format_table(report: ComparisonReport) -> str:
    """Aligned plain-text table: one row per model, non-regulatory and
    regulatory metric blocks, alpha against gold."""
    header = (
        f"{'Model':<24} {'Acc':>6} | {'F1':>6} {'Prec':>6} {'Rec':>6} | "
        f"{'F1':>6} {'Prec':>6} {'Rec':>6} | {'Alpha':>6}"
    )
    sub = f"{'':<24} {'':>6} | {'non-regulatory':^20} | {'regulatory':^20} | {'':>6}"
    lines = [sub, header, "-" * len(header)]
    for name, rep in report.models.items():
        lines.append(
            f"{name:<24} {_fmt(rep.accuracy):>6} | "
            f"{_fmt(rep.non_regulatory.f1):>6} {_fmt(rep.non_regulatory.precision):>6} {_fmt(rep.non_regulatory.recall):>6} | "
            f"{_fmt(rep.regulatory.f1):>6} {_fmt(rep.regulatory.precision):>6} {_fmt(rep.regulatory.recall):>6} | "
            f"{_fmt(rep.alpha_vs_gold):>6}"
        )
    if report.pairwise_alpha:
        lines.append("")
        for (a, b), alpha in report.pairwise_alpha.items():
            n_dis = len(report.disagreements.get((a, b), []))
            lines.append(f"inter-model alpha {a} vs {b}: {_fmt(alpha)} ({n_dis} disagreements)")
    return "\n".join(lines)


def report_to_json(report: ComparisonReport) -> str:
    def class_block(cm: ClassMetrics) -> dict:
        return {"precision": cm.precision, "recall": cm.recall, "f1": cm.f1}

    payload = {
        "models": {
            name: {
                "n": rep.n,
                "accuracy": rep.accuracy,
                "regulatory": class_block(rep.regulatory),
                "non_regulatory": class_block(rep.non_regulatory),
                "alpha_vs_gold": rep.alpha_vs_gold,
            }
            for name, rep in report.models.items()
        },
        "pairwise_alpha": [
            {"models": [a, b], "alpha": alpha, "disagreements": [
                {"index": d.index, "labels": d.labels, "gold": d.gold}
                for d in report.disagreements.get((a, b), [])
            ]}
            for (a, b), alpha in report.pairwise_alpha.items()
        ],
    }
    return json.dumps(payload, indent=2)
