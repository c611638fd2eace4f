"""Batch scoring into the shared prediction-CSV format (sentence,score)."""

from __future__ import annotations

import csv
from pathlib import Path

from .features import extract_features
from .model import TrainedModel


def predict_csv(model: TrainedModel, sentences_csv: str | Path, out_csv: str | Path) -> int:
    """Score every row of a CSV with a 'sentence' column; returns the row count.

    Output order follows input order and the file conforms to the prediction
    table format consumed by the lexrule evaluate/classify tooling.
    """
    with open(sentences_csv, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "sentence" not in reader.fieldnames:
            raise ValueError(f"{sentences_csv}: expected a CSV with a 'sentence' column")
        sentences = [row["sentence"] for row in reader]
    scores = []
    if sentences:
        matrix = extract_features(sentences, model.backbone_name)
        scores = model.predict_scores(matrix.rows)
    with open(out_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sentence", "score"])
        for sentence, score in zip(sentences, scores):
            writer.writerow([sentence, score])
    return len(sentences)
