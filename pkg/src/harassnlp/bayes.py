"""Naive Bayes classifiers.

Multinomial NB over sparse count features and diagonal Gaussian NB over
dense document vectors. Both return log-sum-exp normalized posteriors and
break argmax ties toward the lowest category code.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import SparseVector, Vocabulary
from .taxonomy import Category


def _sorted_classes(y: Sequence[Category]) -> tuple[Category, ...]:
    return tuple(sorted(set(y), key=int))


def _log_normalize(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max()
    return shifted - np.log(np.exp(shifted).sum())


def vocab_hash(vocab: Vocabulary) -> str:
    """Stable fingerprint of a vocabulary, stored with trained models."""
    digest = hashlib.sha256("\x00".join(vocab.features).encode("utf-8"))
    return digest.hexdigest()


@dataclass(frozen=True)
class MultinomialNBModel:
    classes: tuple[Category, ...]
    log_prior: np.ndarray  # (C,)
    log_likelihood: np.ndarray  # (C, V)
    alpha: float
    vocab_size: int
    vocab_ref: str | None = None

    def predict_log_proba(self, x: SparseVector) -> np.ndarray:
        """Normalized per-class log posterior for one count vector."""
        scores = self.log_prior.copy()
        for col, count in x.entries.items():
            if not 0 <= col < self.vocab_size:
                raise ValueError(f"feature id {col} out of range")
            scores += count * self.log_likelihood[:, col]
        return _log_normalize(scores)

    def predict(self, x: SparseVector) -> Category:
        log_proba = self.predict_log_proba(x)
        return self.classes[int(np.argmax(log_proba))]

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "mnb",
                "version": 1,
                "classes": [int(c) for c in self.classes],
                "log_prior": self.log_prior.tolist(),
                "log_likelihood": self.log_likelihood.tolist(),
                "alpha": self.alpha,
                "vocab_size": self.vocab_size,
                "vocab_ref": self.vocab_ref,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MultinomialNBModel":
        payload = json.loads(text)
        if payload.get("kind") != "mnb" or payload.get("version") != 1:
            raise ValueError("not a version-1 multinomial NB model file")
        return cls(
            classes=tuple(Category(c) for c in payload["classes"]),
            log_prior=np.asarray(payload["log_prior"], dtype=float),
            log_likelihood=np.asarray(payload["log_likelihood"], dtype=float),
            alpha=float(payload["alpha"]),
            vocab_size=int(payload["vocab_size"]),
            vocab_ref=payload.get("vocab_ref"),
        )


def train_multinomial(
    X: Sequence[SparseVector],
    y: Sequence[Category],
    alpha: float = 1.0,
    vocab_size: int | None = None,
    vocab_ref: str | None = None,
) -> MultinomialNBModel:
    """Fit smoothed count likelihoods and empirical class priors.

    ``vocab_size`` defaults to one past the largest feature id seen; pass
    it explicitly when training data may not touch every column.
    """
    if len(X) != len(y):
        raise ValueError("X and y must have equal length")
    if len(X) == 0:
        raise ValueError("training set is empty")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if vocab_size is None:
        vocab_size = 1 + max(
            (col for vec in X for col in vec.entries), default=-1
        )
    vocab_size = max(vocab_size, 1)

    classes = _sorted_classes(y)
    class_pos = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), vocab_size), dtype=float)
    class_docs = np.zeros(len(classes), dtype=float)
    for vec, label in zip(X, y):
        row = class_pos[label]
        class_docs[row] += 1
        for col, count in vec.entries.items():
            if not 0 <= col < vocab_size:
                raise ValueError(f"feature id {col} out of range")
            counts[row, col] += count

    log_prior = np.log(class_docs / len(X))
    totals = counts.sum(axis=1, keepdims=True)
    log_likelihood = np.log(counts + alpha) - np.log(totals + alpha * vocab_size)
    return MultinomialNBModel(
        classes=classes,
        log_prior=log_prior,
        log_likelihood=log_likelihood,
        alpha=alpha,
        vocab_size=vocab_size,
        vocab_ref=vocab_ref,
    )


@dataclass(frozen=True)
class GaussianNBModel:
    classes: tuple[Category, ...]
    log_prior: np.ndarray  # (C,)
    mean: np.ndarray  # (C, D)
    variance: np.ndarray  # (C, D)
    var_floor: float

    def predict_log_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.mean.shape[1],):
            raise ValueError(
                f"expected vector of dim {self.mean.shape[1]}, got {x.shape}"
            )
        log_density = -0.5 * (
            np.log(2 * np.pi * self.variance) + (x - self.mean) ** 2 / self.variance
        ).sum(axis=1)
        return _log_normalize(self.log_prior + log_density)

    def predict(self, x: np.ndarray) -> Category:
        return self.classes[int(np.argmax(self.predict_log_proba(x)))]

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "gnb",
                "version": 1,
                "classes": [int(c) for c in self.classes],
                "log_prior": self.log_prior.tolist(),
                "mean": self.mean.tolist(),
                "variance": self.variance.tolist(),
                "var_floor": self.var_floor,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "GaussianNBModel":
        payload = json.loads(text)
        if payload.get("kind") != "gnb" or payload.get("version") != 1:
            raise ValueError("not a version-1 Gaussian NB model file")
        return cls(
            classes=tuple(Category(c) for c in payload["classes"]),
            log_prior=np.asarray(payload["log_prior"], dtype=float),
            mean=np.asarray(payload["mean"], dtype=float),
            variance=np.asarray(payload["variance"], dtype=float),
            var_floor=float(payload["var_floor"]),
        )


def train_gaussian(
    X: np.ndarray | Sequence[Sequence[float]],
    y: Sequence[Category],
    var_floor: float = 1e-9,
) -> GaussianNBModel:
    """Fit per-class means and floored population variances."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D array of document vectors")
    if X.shape[0] != len(y):
        raise ValueError("X and y must have equal length")
    if len(y) == 0:
        raise ValueError("training set is empty")
    if var_floor <= 0:
        raise ValueError("var_floor must be > 0")

    classes = _sorted_classes(y)
    labels = np.asarray([int(label) for label in y])
    mean = np.zeros((len(classes), X.shape[1]))
    variance = np.zeros_like(mean)
    prior = np.zeros(len(classes))
    for row, category in enumerate(classes):
        members = X[labels == int(category)]
        prior[row] = len(members) / len(y)
        mean[row] = members.mean(axis=0)
        variance[row] = np.maximum(members.var(axis=0), var_floor)
    return GaussianNBModel(
        classes=classes,
        log_prior=np.log(prior),
        mean=mean,
        variance=variance,
        var_floor=var_floor,
    )
