"""Fold plans, metrics, cross-validation pipelines, results tables."""

import collections
import random

import numpy as np
import pytest

from harassnlp.corpus import Corpus, Document, preprocess
from harassnlp.evaluation import (
    CANONICAL_METHODS,
    EvalParams,
    ResultsRow,
    ResultsTable,
    compute_metrics,
    confusion,
    cross_validate,
    emit_table,
    normalize_method,
    run_fold,
    stratified_kfold,
)
from harassnlp.features import build_vocab
from harassnlp.neural import LstmConfig, SgdConfig
from harassnlp.taxonomy import Category


SIGNATURES = {1: "kitchen", 2: "ledger", 3: "damsel", 4: "menus", 5: "weather"}


def labeled_corpus(n, seed=0, noise_words=8):
    """Separable synthetic corpus: one signature keyword per class."""
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        code = (i % 5) + 1
        words = [SIGNATURES[code]]
        words += [
            f"noise{rng.randrange(noise_words)}" for _ in range(rng.randrange(3, 7))
        ]
        rng.shuffle(words)
        docs.append(
            preprocess(
                Document(id=f"d{i}", raw_text=" ".join(words), label=Category(code))
            )
        )
    return Corpus(tuple(docs))


class TestStratifiedKfold:
    def test_two_folds_partition(self):
        labels = [Category((i % 2) + 1) for i in range(10)]
        plan = stratified_kfold(labels, 2, seed=0)
        assert sorted(plan.folds[0] + plan.folds[1]) == list(range(10))
        assert len(plan.folds[0]) == len(plan.folds[1]) == 5

    def test_singleton_class_lands_once(self):
        labels = [Category(1)] * 9 + [Category(2)]
        plan = stratified_kfold(labels, 3, seed=1)
        holders = [fold for fold in plan.folds if 9 in fold]
        assert len(holders) == 1

    def test_per_class_balance_on_random_labels(self):
        rng = random.Random(3)
        labels = [Category(rng.randrange(1, 6)) for _ in range(500)]
        plan = stratified_kfold(labels, 10, seed=7)
        for category in Category:
            per_fold = [
                sum(1 for i in fold if labels[i] == category)
                for fold in plan.folds
            ]
            assert max(per_fold) - min(per_fold) <= 1

    def test_deterministic(self):
        labels = [Category((i % 5) + 1) for i in range(50)]
        assert stratified_kfold(labels, 5, seed=4) == stratified_kfold(
            labels, 5, seed=4
        )

    def test_k_bounds(self):
        labels = [Category(1), Category(2)]
        with pytest.raises(ValueError):
            stratified_kfold(labels, 1, seed=0)
        with pytest.raises(ValueError):
            stratified_kfold(labels, 3, seed=0)


class TestConfusion:
    def test_identical_is_diagonal(self):
        y = [Category((i % 5) + 1) for i in range(20)]
        matrix = confusion(y, y)
        assert (matrix == np.diag([4, 4, 4, 4, 4])).all()

    def test_single_pair(self):
        matrix = confusion([Category(1)], [Category(3)])
        assert matrix[0, 2] == 1
        assert matrix.sum() == 1

    def test_row_sums_equal_true_histogram(self):
        rng = random.Random(9)
        y_true = [Category(rng.randrange(1, 6)) for _ in range(200)]
        y_pred = [Category(rng.randrange(1, 6)) for _ in range(200)]
        matrix = confusion(y_true, y_pred)
        histogram = collections.Counter(int(c) for c in y_true)
        for code in range(1, 6):
            assert matrix[code - 1].sum() == histogram.get(code, 0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion([Category(1)], [])

    def test_accuracy_is_trace_over_total(self):
        rng = random.Random(10)
        y_true = [Category(rng.randrange(1, 6)) for _ in range(100)]
        y_pred = [Category(rng.randrange(1, 6)) for _ in range(100)]
        metrics = compute_metrics(y_true, y_pred)
        assert metrics.accuracy == np.trace(metrics.confusion) / metrics.confusion.sum()


class TestMethodNames:
    def test_aliases(self):
        assert normalize_method("char3+mnb") == "char3"
        assert normalize_method("CHAR3") == "char3"
        assert normalize_method("word2vec+gnb") == "word2vec"

    def test_unknown_rejected(self):
        with pytest.raises(ValueError, match="unknown method"):
            normalize_method("charizard")


class TestCrossValidate:
    def test_true_label_stub_scores_one(self):
        corpus = labeled_corpus(50)
        labels = [d.label for d in corpus]
        plan = stratified_kfold(labels, 5, seed=0)
        # stub pipeline: evaluate the metrics path with perfect predictions
        for fold in range(plan.k):
            y_true = [labels[i] for i in plan.folds[fold]]
            assert compute_metrics(y_true, y_true).accuracy == 1.0

    def test_majority_stub_matches_base_rate(self):
        rng = random.Random(2)
        labels = [Category(1)] * 80 + [Category(2)] * 20
        rng.shuffle(labels)
        plan = stratified_kfold(labels, 5, seed=1)
        accuracies = []
        for fold in range(plan.k):
            y_true = [labels[i] for i in plan.folds[fold]]
            y_pred = [Category(1)] * len(y_true)
            accuracies.append(compute_metrics(y_true, y_pred).accuracy)
        assert np.mean(accuracies) == pytest.approx(0.8, abs=0.05)

    def test_char3_mnb_on_separable_corpus(self):
        corpus = labeled_corpus(200, seed=5)
        labels = [d.label for d in corpus]
        plan = stratified_kfold(labels, 5, seed=3)
        result = cross_validate("char3+mnb", corpus, plan)
        assert result.mean_accuracy >= 0.95
        assert len(result.folds) == 5

    def test_vocab_built_on_training_folds_only(self):
        corpus = labeled_corpus(100, seed=6)
        labels = [d.label for d in corpus]
        plan = stratified_kfold(labels, 4, seed=2)
        result = cross_validate("bigrams", corpus, plan)
        docs = list(corpus)
        for fold, outcome in enumerate(result.folds):
            train_docs = [docs[i] for i in outcome.train_indices]
            rebuilt = build_vocab(train_docs, outcome.vocab.spec, outcome.vocab.min_df)
            assert rebuilt.index == outcome.vocab.index

    def test_embedding_methods_run(self):
        corpus = labeled_corpus(40, seed=8)
        labels = [d.label for d in corpus]
        plan = stratified_kfold(labels, 2, seed=0)
        params = EvalParams(
            dim=8,
            sgd=SgdConfig(epochs=2, seed=0),
            lstm=LstmConfig(hidden=8, embed_dim=4, lr=1.0, epochs=10, seed=0),
        )
        for method in ("word2vec", "doc2vec", "lstm"):
            result = cross_validate(method, corpus, plan, params)
            assert 0.0 <= result.mean_accuracy <= 1.0
            assert all(f.vocab is None for f in result.folds)

    def test_unlabeled_corpus_rejected(self):
        corpus = Corpus((preprocess(Document(id="a", raw_text="hello world")),))
        with pytest.raises(ValueError, match="unlabeled"):
            run_fold("bigrams", list(corpus), list(corpus), EvalParams())


class TestResultsTable:
    def test_single_row_render(self):
        table = ResultsTable((ResultsRow("lstm", 0.91, (0.91,)),))
        text = table.to_text()
        assert "LSTM" in text
        assert "0.91" in text

    def test_empty_accuracy_rows_suppressed(self):
        table = ResultsTable(
            (
                ResultsRow("lstm", 0.5, ()),
                ResultsRow("char3", 0.8, (0.8, 0.8)),
            )
        )
        assert "LSTM" not in table.to_text()
        assert "Three character grams" in table.to_text()

    def test_csv_round_trip(self):
        rng = random.Random(12)
        rows = tuple(
            ResultsRow(
                method,
                rng.random(),
                tuple(rng.random() for _ in range(10)),
            )
            for method in ("char3", "bigrams", "lstm")
        )
        table = ResultsTable(rows).canonical_order()
        parsed = ResultsTable.from_csv(table.to_csv())
        assert parsed == table

    def test_canonical_order_matches_benchmark_rows(self):
        rows = tuple(
            ResultsRow(m, 0.5, (0.5,)) for m in reversed(CANONICAL_METHODS)
        )
        ordered = ResultsTable(rows).canonical_order()
        assert tuple(r.method for r in ordered.rows) == CANONICAL_METHODS

    def test_extensions_follow_known_rows(self):
        table = ResultsTable(
            (
                ResultsRow("my-new-method", 0.4, (0.4,)),
                ResultsRow("bigrams", 0.7, (0.7,)),
            )
        ).canonical_order()
        assert [r.method for r in table.rows] == ["bigrams", "my-new-method"]
