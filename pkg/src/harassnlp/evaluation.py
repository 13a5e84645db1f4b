"""Stratified cross-validation over the feature x classifier matrix.

Method names cover the standard benchmark rows: word 2/3/4-grams and
character 2/3/4-grams with multinomial NB, their combinations, skip-gram
and document-vector features with Gaussian NB, and the LSTM. Fold
vocabularies are always built from training folds only; each fold's
vocabulary is kept on the result so leakage can be audited.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bayes import train_gaussian, train_multinomial
from .corpus import Corpus, Document
from .features import NgramSpec, Vocabulary, build_vocab, vectorize
from .neural import (
    LstmConfig,
    SgdConfig,
    doc_embed_average,
    infer_doc_vector,
    lstm_train,
    train_pvdbow,
    train_skipgram,
)
from .taxonomy import Category


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[int, ...], ...]
    seed: int
    stratified: bool = True

    def __post_init__(self) -> None:
        flat = [i for fold in self.folds for i in fold]
        if len(flat) != len(set(flat)):
            raise ValueError("folds overlap")

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_indices(self, fold: int) -> tuple[int, ...]:
        return tuple(
            i for f, members in enumerate(self.folds) if f != fold for i in members
        )


def stratified_kfold(
    labels: Sequence[Category], k: int, seed: int = 0
) -> FoldPlan:
    """Partition indices into k folds with per-class counts within 1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > len(labels):
        raise ValueError(f"k={k} exceeds {len(labels)} items")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for category in sorted(set(labels), key=int):
        members = [i for i, label in enumerate(labels) if label == category]
        members = [members[j] for j in rng.permutation(len(members))]
        for pos, idx in enumerate(members):
            folds[(offset + pos) % k].append(idx)
        offset += len(members)
    return FoldPlan(folds=tuple(tuple(f) for f in folds), seed=seed)


def confusion(
    y_true: Sequence[Category], y_pred: Sequence[Category]
) -> np.ndarray:
    """5x5 count matrix; entry (i, j) counts true code i+1 predicted j+1."""
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred must have equal length")
    matrix = np.zeros((5, 5), dtype=int)
    for t, p in zip(y_true, y_pred):
        matrix[int(t) - 1, int(p) - 1] += 1
    return matrix


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: dict[Category, float]
    recall: dict[Category, float]
    f1: dict[Category, float]
    confusion: np.ndarray


def compute_metrics(
    y_true: Sequence[Category], y_pred: Sequence[Category]
) -> Metrics:
    matrix = confusion(y_true, y_pred)
    total = matrix.sum()
    accuracy = float(np.trace(matrix) / total) if total else 0.0
    precision, recall, f1 = {}, {}, {}
    for category in Category:
        row = int(category) - 1
        tp = matrix[row, row]
        predicted = matrix[:, row].sum()
        actual = matrix[row, :].sum()
        p = float(tp / predicted) if predicted else 0.0
        r = float(tp / actual) if actual else 0.0
        precision[category] = p
        recall[category] = r
        f1[category] = 2 * p * r / (p + r) if (p + r) else 0.0
    return Metrics(
        accuracy=accuracy, precision=precision, recall=recall, f1=f1,
        confusion=matrix,
    )


CANONICAL_METHODS = (
    "bigrams",
    "threegrams",
    "fourgrams",
    "char2",
    "char3",
    "char4",
    "all-grams",
    "all-chars",
    "all-chars+grams",
    "word2vec",
    "doc2vec",
    "lstm",
)

DISPLAY_NAMES = {
    "bigrams": "bigrams(BOW)",
    "threegrams": "threegrams(BOW)",
    "fourgrams": "four grams(BOW)",
    "char2": "Two character grams(BOW)",
    "char3": "Three character grams(BOW)",
    "char4": "Four character gram(BOW)",
    "all-grams": "combination of all grams",
    "all-chars": "combination of all character-grams",
    "all-chars+grams": "combination of all character-grams and all the grams",
    "word2vec": "Word2vec",
    "doc2vec": "Doc2vec",
    "lstm": "LSTM",
}

_BOW_SPECS = {
    "bigrams": "w2",
    "threegrams": "w3",
    "fourgrams": "w4",
    "char2": "c2",
    "char3": "c3",
    "char4": "c4",
    "all-grams": "w2+w3+w4",
    "all-chars": "c2+c3+c4",
    "all-chars+grams": "c2+c3+c4+w2+w3+w4",
}


def normalize_method(name: str) -> str:
    """Accept classifier-suffixed aliases like "char3+mnb"."""
    lowered = name.strip().lower()
    for suffix in ("+mnb", "+gnb", "+nb"):
        if lowered.endswith(suffix) and lowered[: -len(suffix)] in CANONICAL_METHODS:
            lowered = lowered[: -len(suffix)]
    if lowered not in CANONICAL_METHODS:
        raise ValueError(
            f"unknown method {name!r}; expected one of {', '.join(CANONICAL_METHODS)}"
        )
    return lowered


@dataclass(frozen=True)
class EvalParams:
    """Knobs for the fold pipelines; defaults favor quick desk-scale runs."""

    min_df: int = 2
    alpha: float = 1.0
    var_floor: float = 1e-9
    dim: int = 32
    sgd: SgdConfig = SgdConfig(epochs=3)
    lstm: LstmConfig = LstmConfig(hidden=32, embed_dim=16, lr=1.0, epochs=40)


@dataclass
class FoldOutcome:
    metrics: Metrics
    vocab: Optional[Vocabulary]
    test_indices: tuple[int, ...]
    train_indices: tuple[int, ...]


@dataclass
class CrossValResult:
    method: str
    folds: tuple[FoldOutcome, ...]

    @property
    def fold_accuracies(self) -> tuple[float, ...]:
        return tuple(f.metrics.accuracy for f in self.folds)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))


def _labels(docs: Sequence[Document]) -> list[Category]:
    missing = [d.id for d in docs if d.label is None]
    if missing:
        raise ValueError(f"unlabeled documents: {missing[:5]}")
    return [d.label for d in docs]  # type: ignore[misc]


def run_fold(
    method: str,
    train_docs: Sequence[Document],
    test_docs: Sequence[Document],
    params: EvalParams,
) -> tuple[list[Category], Optional[Vocabulary]]:
    """Train on the training docs, predict the test docs."""
    y_train = _labels(train_docs)
    if method in _BOW_SPECS:
        spec = NgramSpec.parse(_BOW_SPECS[method])
        vocab = build_vocab(train_docs, spec, min_df=params.min_df)
        X = [vectorize(d, vocab) for d in train_docs]
        model = train_multinomial(
            X, y_train, alpha=params.alpha, vocab_size=max(len(vocab), 1)
        )
        return [model.predict(vectorize(d, vocab)) for d in test_docs], vocab
    if method == "word2vec":
        table = train_skipgram(
            [d.tokens or () for d in train_docs], params.sgd, dim=params.dim
        )
        X = np.array([doc_embed_average(d.tokens or (), table) for d in train_docs])
        model = train_gaussian(X, y_train, var_floor=params.var_floor)
        return [
            model.predict(doc_embed_average(d.tokens or (), table))
            for d in test_docs
        ], None
    if method == "doc2vec":
        table = train_pvdbow(
            [d.tokens or () for d in train_docs], params.sgd, dim=params.dim
        )
        model = train_gaussian(table.doc_vectors, y_train, var_floor=params.var_floor)
        return [
            model.predict(infer_doc_vector(table, d.tokens or (), params.sgd))
            for d in test_docs
        ], None
    if method == "lstm":
        classifier = lstm_train(
            [d.tokens or () for d in train_docs], y_train, params.lstm
        )
        return [classifier.predict(d.tokens or ()) for d in test_docs], None
    raise ValueError(f"unknown method: {method!r}")


def cross_validate(
    method: str,
    corpus: Corpus,
    plan: FoldPlan,
    params: EvalParams | None = None,
) -> CrossValResult:
    """Evaluate one method across every fold of the plan."""
    method = normalize_method(method)
    params = params or EvalParams()
    docs = list(corpus)
    outcomes = []
    for fold in range(plan.k):
        test_idx = plan.folds[fold]
        train_idx = plan.train_indices(fold)
        train_docs = [docs[i] for i in train_idx]
        test_docs = [docs[i] for i in test_idx]
        y_pred, vocab = run_fold(method, train_docs, test_docs, params)
        metrics = compute_metrics(_labels(test_docs), y_pred)
        outcomes.append(
            FoldOutcome(
                metrics=metrics,
                vocab=vocab,
                test_indices=test_idx,
                train_indices=train_idx,
            )
        )
    return CrossValResult(method=method, folds=tuple(outcomes))


@dataclass(frozen=True)
class ResultsRow:
    method: str
    mean_accuracy: float
    fold_accuracies: tuple[float, ...]


@dataclass(frozen=True)
class ResultsTable:
    rows: tuple[ResultsRow, ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise ValueError("results table needs at least one row")

    @classmethod
    def from_results(cls, results: Sequence[CrossValResult]) -> "ResultsTable":
        rows = [
            ResultsRow(
                method=r.method,
                mean_accuracy=r.mean_accuracy,
                fold_accuracies=r.fold_accuracies,
            )
            for r in results
        ]
        return cls(tuple(rows))

    def canonical_order(self) -> "ResultsTable":
        """Known methods in benchmark row order; extensions keep position."""
        known = [r for r in self.rows if r.method in CANONICAL_METHODS]
        known.sort(key=lambda r: CANONICAL_METHODS.index(r.method))
        extra = [r for r in self.rows if r.method not in CANONICAL_METHODS]
        return ResultsTable(tuple(known + extra))

    def _renderable(self) -> list[ResultsRow]:
        return [r for r in self.canonical_order().rows if r.fold_accuracies]

    def to_csv(self) -> str:
        rows = self._renderable()
        if not rows:
            raise ValueError("no renderable rows")
        k = max(len(r.fold_accuracies) for r in rows)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["method", "mean_accuracy"] + [f"fold_{i + 1}" for i in range(k)]
        )
        for row in rows:
            writer.writerow(
                [row.method, repr(row.mean_accuracy)]
                + [repr(a) for a in row.fold_accuracies]
            )
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultsTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header[:2] != ["method", "mean_accuracy"]:
            raise ValueError("bad results CSV header")
        rows = []
        for record in reader:
            if not record:
                continue
            folds = tuple(float(x) for x in record[2:] if x != "")
            rows.append(
                ResultsRow(
                    method=record[0],
                    mean_accuracy=float(record[1]),
                    fold_accuracies=folds,
                )
            )
        return cls(tuple(rows))

    def to_text(self) -> str:
        rows = self._renderable()
        if not rows:
            raise ValueError("no renderable rows")
        labels = [DISPLAY_NAMES.get(r.method, r.method) for r in rows]
        width = max(len(label) for label in labels + ["Methods"])
        lines = [f"{'Methods'.ljust(width)}  Accuracy"]
        for label, row in zip(labels, rows):
            lines.append(f"{label.ljust(width)}  {row.mean_accuracy:.2f}")
        return "\n".join(lines) + "\n"


def emit_table(results: Sequence[CrossValResult]) -> ResultsTable:
    """Results rows in canonical order, ready for text/CSV rendering."""
    return ResultsTable.from_results(results).canonical_order()
