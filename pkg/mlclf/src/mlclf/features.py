"""Sentence feature extraction from frozen pretrained backbones.

The three production backbones resolve to public checkpoints; weights stay
frozen and inference runs deterministically, so a sentence always maps to the
same vector. "debug-hash" is an offline stand-in (a signed hashing
bag-of-words) for exercising training and serving where no checkpoint or
network is available; it is not a substitute for the real backbones in
evaluations.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


class ModelLoadError(RuntimeError):
    pass


class TokenizationError(ValueError):
    pass


# Checkpoint revisions are resolved from this table; replace "main" with a
# commit hash to freeze an evaluation (the hub must be reachable to look one
# up, so the defaults track the head of each repository).
BACKBONES: dict[str, dict[str, str]] = {
    "baseline-bert": {"repo": "bert-base-uncased", "revision": "main"},
    "legal-bert": {"repo": "nlpaueb/legal-bert-base-uncased", "revision": "main"},
    "inlegal-bert": {"repo": "law-ai/InLegalBERT", "revision": "main"},
    "debug-hash": {"repo": "", "revision": ""},
}

DEBUG_DIM = 64


@dataclass
class FeatureMatrix:
    rows: np.ndarray  # (n_sentences, dim)
    backbone_name: str
    sentences: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float32)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-d matrix")
        if self.sentences and len(self.sentences) != self.rows.shape[0]:
            raise ValueError("sentence list must align with rows")


def _debug_hash_rows(sentences: list[str]) -> np.ndarray:
    rows = np.zeros((len(sentences), DEBUG_DIM), dtype=np.float32)
    for i, sentence in enumerate(sentences):
        for token in sentence.lower().split():
            digest = hashlib.md5(token.encode("utf-8")).digest()
            slot = int.from_bytes(digest[:4], "little") % DEBUG_DIM
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            rows[i, slot] += sign
        norm = np.linalg.norm(rows[i])
        if norm > 0:
            rows[i] /= norm
    return rows


_BACKBONE_CACHE: dict[tuple[str, str], tuple] = {}


def _load_backbone(repo: str, revision: str):
    """Load (and cache) a frozen tokenizer/model pair; serving would otherwise
    pay the checkpoint load on every request."""
    key = (repo, revision)
    if key in _BACKBONE_CACHE:
        return _BACKBONE_CACHE[key]
    try:
        from transformers import AutoModel, AutoTokenizer
    except ImportError as exc:
        raise ModelLoadError(f"transformers/torch not installed: {exc}") from exc
    try:
        tokenizer = AutoTokenizer.from_pretrained(repo, revision=revision)
        model = AutoModel.from_pretrained(repo, revision=revision)
    except Exception as exc:  # hub failures surface as one error type for callers
        raise ModelLoadError(f"could not load checkpoint {repo}@{revision}: {exc}") from exc
    model.eval()
    _BACKBONE_CACHE[key] = (tokenizer, model)
    return tokenizer, model


def _transformer_rows(sentences: list[str], repo: str, revision: str, batch_size: int = 16) -> np.ndarray:
    tokenizer, model = _load_backbone(repo, revision)
    import torch

    chunks = []
    with torch.no_grad():
        for i in range(0, len(sentences), batch_size):
            batch = sentences[i : i + batch_size]
            encoded = tokenizer(batch, padding=True, truncation=True, max_length=512, return_tensors="pt")
            output = model(**encoded)
            # classification-token vector of the final layer
            chunks.append(output.last_hidden_state[:, 0, :].cpu().numpy())
    return np.vstack(chunks).astype(np.float32)


def extract_features(sentences: list[str], backbone_name: str) -> FeatureMatrix:
    """Embed sentences with a frozen backbone; row order follows input order."""
    if backbone_name not in BACKBONES:
        raise ModelLoadError(f"unknown backbone {backbone_name!r}; choose from {sorted(BACKBONES)}")
    for i, sentence in enumerate(sentences):
        if not sentence.strip():
            raise TokenizationError(f"sentence {i} is empty")
    if not sentences:
        dim = DEBUG_DIM if backbone_name == "debug-hash" else 768
        return FeatureMatrix(np.zeros((0, dim), dtype=np.float32), backbone_name, [])
    if backbone_name == "debug-hash":
        rows = _debug_hash_rows(sentences)
    else:
        spec = BACKBONES[backbone_name]
        rows = _transformer_rows(sentences, spec["repo"], spec["revision"])
    return FeatureMatrix(rows, backbone_name, list(sentences))


def backbone_available(backbone_name: str) -> bool:
    """True when the backbone can actually produce features in this environment."""
    if backbone_name == "debug-hash":
        return True
    try:
        extract_features(["probe sentence"], backbone_name)
        return True
    except Exception:
        return False
