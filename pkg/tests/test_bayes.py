"""Multinomial and Gaussian naive Bayes against enumeration oracles."""

import itertools
import math

import numpy as np
import pytest

from harassnlp.bayes import (
    GaussianNBModel,
    MultinomialNBModel,
    train_gaussian,
    train_multinomial,
)
from harassnlp.features import SparseVector
from harassnlp.taxonomy import Category

A, B, C = Category(1), Category(2), Category(3)


def vec(*counts):
    return SparseVector(entries={i: c for i, c in enumerate(counts) if c})


def oracle_posterior(train, alpha, probe, vocab_size):
    """Direct smoothed-count probability computation, no logs."""
    classes = sorted({label for _, label in train}, key=int)
    scores = []
    for category in classes:
        docs = [x for x, label in train if label == category]
        prior = len(docs) / len(train)
        total = sum(sum(x) for x in docs)
        likelihood = 1.0
        for w in range(vocab_size):
            count_w = sum(x[w] for x in docs)
            p_w = (count_w + alpha) / (total + alpha * vocab_size)
            likelihood *= p_w ** probe[w]
        scores.append(prior * likelihood)
    norm = sum(scores)
    return classes, [s / norm for s in scores]


class TestTrainMultinomial:
    def test_single_class_posterior_one(self):
        model = train_multinomial([vec(1, 0), vec(0, 2)], [A, A], alpha=1.0)
        for probe in (vec(0, 0), vec(3, 1)):
            log_proba = model.predict_log_proba(probe)
            assert np.exp(log_proba).tolist() == [1.0]
            assert model.predict(probe) is A

    def test_hand_worked_smoothing(self):
        # class A = {"x x"}, class B = {"y"}, vocabulary {x, y}, alpha 1
        model = train_multinomial([vec(2, 0), vec(0, 1)], [A, B], alpha=1.0)
        p_x_a = math.exp(model.log_likelihood[0, 0])
        p_x_b = math.exp(model.log_likelihood[1, 0])
        assert p_x_a == pytest.approx((2 + 1) / (2 + 2))
        assert p_x_b == pytest.approx((0 + 1) / (1 + 2))
        # posterior of the document "x" against a direct computation
        _, oracle = oracle_posterior(
            [((2, 0), A), ((0, 1), B)], 1.0, (1, 0), vocab_size=2
        )
        posterior = np.exp(model.predict_log_proba(vec(1, 0)))
        assert posterior == pytest.approx(oracle, abs=1e-12)
        assert model.predict(vec(1, 0)) is A

    def test_relabeling_permutes_rows(self):
        X = [vec(2, 1), vec(0, 3), vec(1, 1)]
        base = train_multinomial(X, [A, B, B], alpha=0.5)
        swapped = train_multinomial(X, [B, A, A], alpha=0.5)
        assert np.allclose(base.log_likelihood[0], swapped.log_likelihood[1])
        assert np.allclose(base.log_likelihood[1], swapped.log_likelihood[0])

    def test_contract_errors(self):
        with pytest.raises(ValueError, match="empty"):
            train_multinomial([], [], alpha=1.0)
        with pytest.raises(ValueError, match="alpha"):
            train_multinomial([vec(1)], [A], alpha=0.0)
        with pytest.raises(ValueError, match="equal length"):
            train_multinomial([vec(1)], [A, B], alpha=1.0)


class TestPredict:
    def test_empty_vector_returns_prior(self):
        model = train_multinomial([vec(1, 0), vec(0, 1), vec(1, 1)], [A, A, B])
        posterior = np.exp(model.predict_log_proba(SparseVector(entries={})))
        assert posterior == pytest.approx([2 / 3, 1 / 3], abs=1e-12)

    def test_posteriors_normalize(self):
        rng = np.random.default_rng(0)
        model = train_multinomial(
            [vec(2, 1, 0), vec(0, 1, 2), vec(1, 0, 1)], [A, B, C]
        )
        for _ in range(200):
            probe = SparseVector(
                entries={
                    int(i): int(rng.integers(1, 5))
                    for i in rng.choice(3, size=rng.integers(0, 4), replace=False)
                }
            )
            total = float(np.exp(model.predict_log_proba(probe)).sum())
            assert abs(total - 1.0) <= 1e-12

    def test_uninformative_feature_cancels(self):
        # feature 2 has identical likelihood in both classes by symmetry
        model = train_multinomial(
            [vec(1, 0, 1), vec(0, 1, 1)], [A, B], alpha=1.0
        )
        base = model.predict_log_proba(vec(1, 0, 0))
        with_extra = model.predict_log_proba(vec(1, 0, 3))
        assert np.allclose(base, with_extra, atol=1e-12)

    def test_tie_goes_to_lowest_code(self):
        model = train_multinomial(
            [vec(1), vec(1), vec(1), vec(1), vec(1)],
            [Category(i) for i in range(1, 6)],
        )
        assert model.predict(vec(4)) is Category.INDIRECT_HARASSMENT

    def test_out_of_range_feature(self):
        model = train_multinomial([vec(1, 1)], [A])
        with pytest.raises(ValueError, match="out of range"):
            model.predict_log_proba(SparseVector(entries={9: 1}))

    def test_scaled_input_keeps_argmax_under_uniform_prior(self):
        rng = np.random.default_rng(3)
        model = train_multinomial(
            [vec(3, 0, 1), vec(0, 2, 2)], [A, B]  # uniform prior: one doc each
        )
        for _ in range(50):
            probe = {int(i): int(rng.integers(1, 4)) for i in range(3)}
            base = model.predict(SparseVector(entries=probe))
            for k in (2, 3, 5):
                scaled = SparseVector(entries={i: k * c for i, c in probe.items()})
                assert model.predict(scaled) == base

    def test_enumerated_corpora_match_oracle(self):
        # spot subset here; the exhaustive sweep lives in the acceptance suite
        space = list(itertools.product(range(3), repeat=3))
        rng = np.random.default_rng(11)
        for _ in range(150):
            n_docs = int(rng.integers(1, 4))
            docs = [space[int(rng.integers(len(space)))] for _ in range(n_docs)]
            labels = [Category(int(rng.integers(1, 3))) for _ in range(n_docs)]
            train = list(zip(docs, labels))
            model = train_multinomial(
                [vec(*d) for d in docs], labels, alpha=1.0, vocab_size=3
            )
            for probe in (space[int(rng.integers(len(space)))], (0, 0, 0)):
                classes, oracle = oracle_posterior(train, 1.0, probe, 3)
                predicted = np.exp(model.predict_log_proba(vec(*probe)))
                assert model.classes == tuple(classes)
                assert predicted == pytest.approx(oracle, abs=1e-12)


class TestGaussian:
    def test_identical_vectors_hit_floor(self):
        X = np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])
        model = train_gaussian(X, [A, A, A], var_floor=1e-9)
        assert (model.variance == 1e-9).all()

    def test_two_separated_classes(self):
        model = train_gaussian(np.array([[0.0], [10.0]]), [A, B], var_floor=1e-9)

        def log_density(x, mu, var):
            return -0.5 * (math.log(2 * math.pi * var) + (x - mu) ** 2 / var)

        # independent calculator for the same decision
        score_a = math.log(0.5) + log_density(1.0, 0.0, 1e-9)
        score_b = math.log(0.5) + log_density(1.0, 10.0, 1e-9)
        assert score_a > score_b
        assert model.predict(np.array([1.0])) is A

    def test_permutation_equivariance(self):
        X = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0], [1.0, 1.0]])
        base = train_gaussian(X, [A, A, B, B])
        swapped = train_gaussian(X, [B, B, A, A])
        assert np.allclose(base.mean[0], swapped.mean[1])
        assert np.allclose(base.variance[0], swapped.variance[1])

    def test_dimension_mismatch(self):
        model = train_gaussian(np.array([[0.0, 1.0]]), [A])
        with pytest.raises(ValueError, match="dim"):
            model.predict_log_proba(np.array([1.0, 2.0, 3.0]))

    def test_posterior_normalizes(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(20, 4))
        y = [Category(int(rng.integers(1, 4))) for _ in range(20)]
        model = train_gaussian(X, y)
        for _ in range(50):
            total = float(np.exp(model.predict_log_proba(rng.normal(size=4))).sum())
            assert abs(total - 1.0) <= 1e-12


class TestSerialization:
    def test_multinomial_round_trip(self):
        model = train_multinomial(
            [vec(2, 0), vec(0, 1)], [A, B], alpha=0.5, vocab_ref="abc123"
        )
        loaded = MultinomialNBModel.from_json(model.to_json())
        assert loaded.classes == model.classes
        assert np.allclose(loaded.log_likelihood, model.log_likelihood)
        assert loaded.vocab_ref == "abc123"
        probe = vec(1, 1)
        assert np.allclose(
            loaded.predict_log_proba(probe), model.predict_log_proba(probe)
        )

    def test_gaussian_round_trip(self):
        model = train_gaussian(np.array([[0.0, 1.0], [1.0, 0.0]]), [A, B])
        loaded = GaussianNBModel.from_json(model.to_json())
        assert loaded.classes == model.classes
        assert np.allclose(loaded.mean, model.mean)
        probe = np.array([0.3, 0.4])
        assert np.allclose(
            loaded.predict_log_proba(probe), model.predict_log_proba(probe)
        )

    def test_kind_checked(self):
        model = train_gaussian(np.array([[0.0]]), [A])
        with pytest.raises(ValueError):
            MultinomialNBModel.from_json(model.to_json())
