"""Training and persistence for the boosted-tree classifier head.

The backbone stays frozen; only the tree ensemble is fit, on a seeded random
80/20 split. Held-out items and their scores are exported alongside the model
so the evaluation tooling can verify the reported metrics independently.
"""

from __future__ import annotations

import json
import pickle
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.ensemble import HistGradientBoostingClassifier

from .features import FeatureMatrix

DEFAULT_PARAMS_PATH = Path(__file__).parent / "data" / "gbt_params.json"


class DegenerateSplit(ValueError):
    pass


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def _f1(p: float | None, r: float | None) -> float | None:
    if p is None or r is None or p + r == 0:
        return None
    return 2 * p * r / (p + r)


def binary_metrics(gold: list[int], pred: list[int]) -> dict:
    """Accuracy plus per-class precision/recall/F1; 0/0 reported as None."""
    tp = sum(1 for g, p in zip(gold, pred) if g == 1 and p == 1)
    fp = sum(1 for g, p in zip(gold, pred) if g == 0 and p == 1)
    tn = sum(1 for g, p in zip(gold, pred) if g == 0 and p == 0)
    fn = sum(1 for g, p in zip(gold, pred) if g == 1 and p == 0)
    p_reg, r_reg = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
    p_non, r_non = _ratio(tn, tn + fn), _ratio(tn, tn + fp)
    return {
        "n": len(gold),
        "accuracy": (tp + tn) / len(gold),
        "regulatory": {"precision": p_reg, "recall": r_reg, "f1": _f1(p_reg, r_reg)},
        "non_regulatory": {"precision": p_non, "recall": r_non, "f1": _f1(p_non, r_non)},
    }


@dataclass
class HeldOut:
    sentences: list[str]
    gold: list[int]
    scores: list[float]


@dataclass
class TrainedModel:
    classifier: HistGradientBoostingClassifier
    backbone_name: str
    split_seed: int
    metrics: dict = field(default_factory=dict)
    feature_dim: int = 0

    def predict_scores(self, rows: np.ndarray) -> list[float]:
        if rows.shape[0] == 0:
            return []
        proba = self.classifier.predict_proba(np.asarray(rows, dtype=np.float32))
        positive = list(self.classifier.classes_).index(1)
        return [float(p) for p in proba[:, positive]]


def load_params(path: str | Path | None = None) -> dict:
    with open(path or DEFAULT_PARAMS_PATH, encoding="utf-8") as fh:
        return json.load(fh)


def train(
    features: FeatureMatrix,
    labels: list[int],
    split_seed: int,
    test_fraction: float = 0.2,
    params: dict | None = None,
) -> tuple[TrainedModel, dict, HeldOut]:
    """Fit the tree ensemble on a seeded random split.

    Returns (model, held-out metrics, held-out items). Raises DegenerateSplit
    when either side of the split lacks one of the two classes.
    """
    x = features.rows
    y = np.asarray(labels, dtype=int)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"{x.shape[0]} feature rows vs {len(labels)} labels")
    if x.shape[0] < 5:
        raise ValueError("need at least 5 labelled sentences")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie strictly between 0 and 1")

    rng = np.random.default_rng(split_seed)
    order = rng.permutation(x.shape[0])
    n_test = max(1, round(x.shape[0] * test_fraction))
    test_idx, train_idx = order[:n_test], order[n_test:]
    for side, idx in (("training", train_idx), ("test", test_idx)):
        if len(set(y[idx].tolist())) < 2:
            raise DegenerateSplit(f"{side} split lacks one of the classes")

    model = HistGradientBoostingClassifier(
        random_state=split_seed, **(params if params is not None else load_params())
    )
    model.fit(x[train_idx], y[train_idx])

    trained = TrainedModel(
        classifier=model,
        backbone_name=features.backbone_name,
        split_seed=split_seed,
        feature_dim=x.shape[1],
    )
    scores = trained.predict_scores(x[test_idx])
    gold = y[test_idx].tolist()
    pred = [1 if s >= 0.5 else 0 for s in scores]
    report = binary_metrics(gold, pred)
    trained.metrics = report
    held_out = HeldOut(
        sentences=[features.sentences[i] for i in test_idx] if features.sentences else [],
        gold=gold,
        scores=scores,
    )
    return trained, report, held_out


def save_model(model: TrainedModel, path: str | Path) -> None:
    payload = {
        "format": "mlclf-model-v1",
        "backbone_name": model.backbone_name,
        "split_seed": model.split_seed,
        "metrics": model.metrics,
        "feature_dim": model.feature_dim,
        "classifier": model.classifier,
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh)


def load_model(path: str | Path) -> TrainedModel:
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    if payload.get("format") != "mlclf-model-v1":
        raise ValueError(f"{path} is not an mlclf model file")
    return TrainedModel(
        classifier=payload["classifier"],
        backbone_name=payload["backbone_name"],
        split_seed=payload["split_seed"],
        metrics=payload["metrics"],
        feature_dim=payload["feature_dim"],
    )
