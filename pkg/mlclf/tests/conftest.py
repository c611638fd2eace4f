import csv

import pytest

from mlclf.features import extract_features
from mlclf.model import save_model, train

REG_TEMPLATE = "Operators of category {} must submit the declaration to the authority."
NON_TEMPLATE = "The annex table row {} is replaced by the entry set out below."


def synthetic_rows(n_per_class: int = 60):
    rows = []
    for i in range(n_per_class):
        rows.append((REG_TEMPLATE.format(i), 1))
        rows.append((NON_TEMPLATE.format(i), 0))
    return rows


@pytest.fixture(scope="session")
def labelled_rows():
    return synthetic_rows()


@pytest.fixture(scope="session")
def debug_model(tmp_path_factory, labelled_rows):
    """A model trained on the offline hashing backbone, saved to disk."""
    sentences = [s for s, _ in labelled_rows]
    labels = [l for _, l in labelled_rows]
    features = extract_features(sentences, "debug-hash")
    model, report, held_out = train(features, labels, split_seed=7)
    path = tmp_path_factory.mktemp("model") / "debug_model.bin"
    save_model(model, path)
    return {"path": path, "model": model, "report": report, "held_out": held_out}


@pytest.fixture
def sentences_csv(tmp_path, labelled_rows):
    path = tmp_path / "sentences.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sentence", "label"])
        writer.writerows(labelled_rows[:10])
    return path
