"""Acceptance suite: one test per criterion, each timed against its
stated runtime budget and reporting a [PASS]/[FAIL] line (visible with
``pytest -s tests/test_acceptance.py``)."""

import itertools
import json
import math
import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from harassnlp.agreement import (
    RatingMatrix,
    fleiss_kappa,
    merge_categories,
)
from harassnlp.bayes import train_multinomial
from harassnlp.cli import main as cli_main
from harassnlp.corpus import Corpus, Document, preprocess
from harassnlp.crowd import batch_policy
from harassnlp.evaluation import EvalParams, cross_validate, stratified_kfold
from harassnlp.features import SparseVector, build_vocab
from harassnlp.neural import (
    LstmConfig,
    lstm_train,
    negative_sampling_gradients,
    negative_sampling_loss,
)
from harassnlp.neural.lstm import (
    flatten_params,
    init_params,
    lstm_gradients,
    lstm_loss,
    unflatten_params,
)
from harassnlp.service import Study, StudyConfig, create_app
from harassnlp.taxonomy import Category
from harassnlp.topics import fit_lda, top_terms

from helpers import central_difference, max_rel_error

DATA_DIR = Path(__file__).parent / "data"


@contextmanager
def criterion(name, budget_seconds):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.perf_counter() - start
    if elapsed >= budget_seconds:
        print(f"[FAIL] {name}: took {elapsed:.2f}s (budget {budget_seconds}s)")
        raise AssertionError(
            f"{name} exceeded runtime budget: {elapsed:.2f}s >= {budget_seconds}s"
        )
    print(f"[PASS] {name} ({elapsed:.2f}s)")


# ----------------------------------------------------------------------
# kappa
# ----------------------------------------------------------------------


def kappa_oracle(counts):
    """Independent brute-force evaluation of the kappa formula."""
    counts = np.asarray(counts, dtype=float)
    n, _ = counts.shape
    m = counts[0].sum()
    p_i = ((counts**2).sum(axis=1) - m) / (m * (m - 1))
    p_bar = p_i.mean()
    p_j = counts.sum(axis=0) / (n * m)
    p_e = float((p_j**2).sum())
    return (p_bar - p_e) / (1 - p_e), p_bar, p_e


def random_rating_matrix(rng, n_max=6, m_max=5, k_max=5):
    n = rng.randrange(1, n_max + 1)
    m = rng.randrange(2, m_max + 1)
    k = rng.randrange(2, k_max + 1)
    counts = np.zeros((n, k), dtype=int)
    for i in range(n):
        for _ in range(m):
            counts[i, rng.randrange(k)] += 1
    return RatingMatrix(counts=counts, categories=tuple(range(1, k + 1)), m=m)


def test_kappa_oracle_equivalence():
    with criterion("kappa oracle equivalence", 1.0):
        toy = RatingMatrix(
            counts=np.array([[2, 1], [0, 3]]), categories=(1, 2), m=3
        )
        assert fleiss_kappa(toy).kappa == 0.25  # exact, not approximate

        rng = random.Random(2024)
        checked = 0
        while checked < 25:
            matrix = random_rating_matrix(rng)
            expected, p_bar, p_e = kappa_oracle(matrix.counts)
            if p_e == 1.0:
                continue
            result = fleiss_kappa(matrix)
            assert abs(result.kappa - expected) <= 1e-12
            assert abs(result.p_bar - p_bar) <= 1e-12
            assert abs(result.p_e - p_e) <= 1e-12
            checked += 1


def test_merge_monotonicity():
    with criterion("merge monotonicity", 1.0):
        rng = random.Random(77)

        def p_bar_of(matrix):
            counts = matrix.counts.astype(float)
            m = matrix.m
            return float(
                (((counts**2).sum(axis=1) - m) / (m * (m - 1))).mean()
            )

        for _ in range(100):
            matrix = random_rating_matrix(rng)
            k = matrix.n_categories
            n_targets = rng.randrange(2, k + 1)
            mapping = {}
            for j, category in enumerate(matrix.categories):
                mapping[category] = j % n_targets  # every target non-empty
            merged = merge_categories(matrix, mapping)
            assert (merged.counts.sum(axis=1) == matrix.m).all()
            assert p_bar_of(merged) >= p_bar_of(matrix) - 1e-12


# ----------------------------------------------------------------------
# multinomial NB exhaustive oracle
# ----------------------------------------------------------------------


def nb_oracle_posterior(train, alpha, probe, vocab_size):
    """Direct smoothed-count probabilities (no logs, no shared code)."""
    classes = sorted({label for _, label in train}, key=int)
    scores = []
    for category in classes:
        docs = [x for x, label in train if label == category]
        prior = len(docs) / len(train)
        total = sum(sum(x) for x in docs)
        likelihood = 1.0
        for w in range(vocab_size):
            count_w = sum(x[w] for x in docs)
            likelihood *= (
                (count_w + alpha) / (total + alpha * vocab_size)
            ) ** probe[w]
        scores.append(prior * likelihood)
    norm = sum(scores)
    return classes, [s / norm for s in scores]


def test_multinomial_nb_exactness():
    with criterion("NB exactness on all small corpora", 10.0):
        A, B = Category(1), Category(2)
        space = list(itertools.product(range(3), repeat=3))
        pairs = [(v, label) for v in space for label in (A, B)]

        def vec(values):
            return SparseVector(
                entries={i: c for i, c in enumerate(values) if c}
            )

        n_corpora = 0
        for size in (1, 2, 3):
            for combo in itertools.combinations_with_replacement(pairs, size):
                X = [vec(v) for v, _ in combo]
                y = [label for _, label in combo]
                model = train_multinomial(X, y, alpha=1.0, vocab_size=3)
                n_corpora += 1
                probes = {v for v, _ in combo} | {(0, 0, 0), (1, 2, 1)}
                for probe in probes:
                    classes, oracle = nb_oracle_posterior(
                        list(zip([v for v, _ in combo], y)), 1.0, probe, 3
                    )
                    posterior = np.exp(model.predict_log_proba(vec(probe)))
                    assert model.classes == tuple(classes)
                    for got, want in zip(posterior, oracle):
                        assert abs(got - want) <= 1e-12
        assert n_corpora == 29259  # C(54,1..3) multisets with repetition


# ----------------------------------------------------------------------
# gradient checks
# ----------------------------------------------------------------------


def test_gradient_checks():
    with criterion("gradient checks (SGNS, PV-DBOW, LSTM)", 30.0):
        rng = np.random.default_rng(99)

        def ns_check(shape_in, shape_out, samples):
            size_in = int(np.prod(shape_in))

            def unpack(flat):
                return (
                    flat[:size_in].reshape(shape_in),
                    flat[size_in:].reshape(shape_out),
                )

            flat = rng.uniform(-0.8, 0.8, size=size_in + int(np.prod(shape_out)))
            _, g_in, g_out = negative_sampling_gradients(*unpack(flat), samples)
            analytic = np.concatenate([g_in.ravel(), g_out.ravel()])
            numeric = central_difference(
                lambda f: negative_sampling_loss(*unpack(f), samples), flat
            )
            return max_rel_error(analytic, numeric)

        # word vectors: 3-word vocabulary, dim 4
        sgns_err = ns_check(
            (3, 4), (3, 4), [(0, 1, [2, 0]), (1, 2, [0, 0]), (2, 0, [1, 2])]
        )
        assert sgns_err < 1e-4

        # document vectors on the input side, shared word output table
        pvdbow_err = ns_check(
            (2, 4), (3, 4), [(0, 1, [2, 0]), (1, 0, [1]), (0, 2, [2, 1])]
        )
        assert pvdbow_err < 1e-4

        # full LSTM classifier, E=4 H=3, two examples (one padded)
        config = LstmConfig(seq_len=5, hidden=3, embed_dim=4, epochs=1)
        params = init_params(5, config, rng)
        for name in params:
            params[name] = rng.uniform(-0.5, 0.5, size=params[name].shape)
        ids = np.array([[1, 3, 2, 5, 0], [4, 4, 1, 2, 3]])
        targets = np.array([0, 3])
        _, grads = lstm_gradients(params, ids, targets)
        numeric = central_difference(
            lambda f: lstm_loss(unflatten_params(f, params), ids, targets),
            flatten_params(params),
        )
        lstm_err = max_rel_error(flatten_params(grads), numeric)
        assert lstm_err < 1e-4


# ----------------------------------------------------------------------
# LSTM convergence at the published hyperparameters
# ----------------------------------------------------------------------


def test_lstm_convergence():
    with criterion("LSTM convergence (lr 0.001, seq 15, batch 30, H 128)", 120.0):
        docs, labels = [], []
        for i in range(30):  # balanced: six documents per class
            code = (i % 5) + 1
            docs.append([f"a{code}", f"b{code}", f"c{code}"] * 5)
            labels.append(Category(code))
        config = LstmConfig(
            seq_len=15, hidden=128, embed_dim=64, lr=0.001, batch_size=30,
            epochs=200, seed=1,
        )
        model = lstm_train(docs, labels, config)
        assert abs(model.epoch_losses[0] - math.log(5)) < 0.05
        predictions = [model.predict(d) for d in docs]
        accuracy = sum(p == t for p, t in zip(predictions, labels)) / len(labels)
        assert accuracy == 1.0
        for name, value in model.params.items():
            assert np.isfinite(value).all(), f"non-finite parameter: {name}"


# ----------------------------------------------------------------------
# pipeline sanity with leakage audit
# ----------------------------------------------------------------------

SIGNATURES = {1: "kitchen", 2: "ledger", 3: "damsel", 4: "menus", 5: "weather"}


def synthetic_corpus(n=500, seed=0, noise_words=8):
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        code = (i % 5) + 1
        words = [SIGNATURES[code]]
        words += [
            f"noise{rng.randrange(noise_words)}"
            for _ in range(rng.randrange(3, 7))
        ]
        rng.shuffle(words)
        docs.append(
            preprocess(
                Document(
                    id=f"d{i}", raw_text=" ".join(words), label=Category(code)
                )
            )
        )
    return Corpus(tuple(docs))


def test_pipeline_sanity():
    with criterion("pipeline sanity (char3 + multinomial NB, k=10)", 30.0):
        corpus = synthetic_corpus(500, seed=20)
        labels = [d.label for d in corpus]
        plan = stratified_kfold(labels, 10, seed=4)
        result = cross_validate("char3+mnb", corpus, plan, EvalParams())
        assert result.mean_accuracy >= 0.95

        # leakage audit: each fold's vocabulary must be reconstructible
        # from its training documents alone
        docs = list(corpus)
        for outcome in result.folds:
            train_docs = [docs[i] for i in outcome.train_indices]
            rebuilt = build_vocab(
                train_docs, outcome.vocab.spec, outcome.vocab.min_df
            )
            assert rebuilt.index == outcome.vocab.index
            test_only_features = set()
            test_docs = [docs[i] for i in outcome.test_indices]
            from harassnlp.features import extract_features

            train_features = {
                f
                for d in train_docs
                for f in extract_features(d.tokens, outcome.vocab.spec)
            }
            for d in test_docs:
                for f in extract_features(d.tokens, outcome.vocab.spec):
                    if f not in train_features:
                        test_only_features.add(f)
            assert not (test_only_features & set(outcome.vocab.index))


# ----------------------------------------------------------------------
# trust policy
# ----------------------------------------------------------------------


def test_trust_policy():
    with criterion("trust policy ladder", 1.0):
        assert batch_policy(8) == 20
        assert batch_policy(7) == 15
        assert batch_policy(6) == 10
        for score in range(6):
            assert batch_policy(score) == 0


# ----------------------------------------------------------------------
# LDA structure recovery
# ----------------------------------------------------------------------


def test_lda_structure_recovery():
    with criterion("LDA two-block structure recovery", 30.0):
        rng = np.random.default_rng(3)
        blocks = [
            [f"alpha{i}" for i in range(20)],
            [f"beta{i}" for i in range(20)],
        ]
        docs = []
        for words in blocks:
            for _ in range(100):
                docs.append(
                    [words[int(i)] for i in rng.integers(0, len(words), 12)]
                )
        model = fit_lda(
            docs, n_topics=2, alpha=1.0, beta=0.01, iterations=200, seed=42,
            validate_counts=True,  # conservation identities after every sweep
        )
        block_sets = [set(b) for b in blocks]
        for topic in range(2):
            top10 = [term for term, _ in top_terms(model, topic, 10)]
            purity = max(
                sum(1 for t in top10 if t in block) for block in block_sets
            ) / 10
            assert purity >= 0.9


# ----------------------------------------------------------------------
# preprocessing
# ----------------------------------------------------------------------


def random_tweet(rng):
    pieces = []
    for _ in range(rng.randrange(0, 12)):
        kind = rng.randrange(6)
        if kind == 0:
            pieces.append("#" + "".join(rng.choices("ab#", k=rng.randrange(0, 4))))
        elif kind == 1:
            pieces.append(
                rng.choice(["http://t.co/xyz", "https://a.b", "www.spam.com"])
            )
        elif kind == 2:
            pieces.append("".join(rng.choices("xy", k=rng.randrange(1, 3))))
        else:
            pieces.append(
                "".join(rng.choices("abcdefXYZ'!.", k=rng.randrange(1, 9)))
            )
    return " ".join(pieces)


def test_preprocessing():
    with criterion("preprocessing idempotence and golden rules", 5.0):
        rng = random.Random(1234)
        for _ in range(1000):
            doc = Document(id="x", raw_text=random_tweet(rng))
            once = preprocess(doc)
            twice = preprocess(once)
            assert twice.tokens == once.tokens
            assert twice.hashtags == once.hashtags

        golden = json.loads(
            (DATA_DIR / "preprocess_golden.json").read_text(encoding="utf-8")
        )
        assert len(golden) == 20
        for case in golden:
            doc = preprocess(Document(id="x", raw_text=case["raw"]))
            assert list(doc.tokens) == case["tokens"], case["raw"]
            assert list(doc.hashtags) == case["hashtags"], case["raw"]


# ----------------------------------------------------------------------
# annotation service determinism
# ----------------------------------------------------------------------


def test_service_determinism(tmp_path, capsys):
    with criterion("service event-log determinism + kappa cross-check", 30.0):
        corpus_path = tmp_path / "corpus.jsonl"
        rows = [
            {"id": f"g{i}", "text": f"gold tweet {i}"} for i in range(8)
        ] + [{"id": f"w{i}", "text": f"work tweet {i}"} for i in range(30)]
        corpus_path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        gold_path = tmp_path / "gold.csv"
        gold_path.write_text(
            "item_id,category\n"
            + "\n".join(f"g{i},{(i % 5) + 1}" for i in range(8))
            + "\n"
        )
        config = StudyConfig(
            corpus_path=str(corpus_path),
            gold_path=str(gold_path),
            log_path=str(tmp_path / "events.jsonl"),
            seed=11,
        )
        study = Study(config)
        study.replay()
        client = TestClient(create_app(study))

        # scripted 3-rater study: everyone answers gold correctly; the
        # third rater disagrees on the work label
        raters = {}
        for name, work_category in (("ada", 3), ("bea", 3), ("cal", 4)):
            rater_id = client.post("/api/raters", json={"name": name}).json()[
                "rater_id"
            ]
            raters[name] = (rater_id, work_category)
        for name, (rater_id, work_category) in raters.items():
            while True:
                response = client.get(f"/api/raters/{rater_id}/batch")
                if response.status_code != 200:
                    break
                batch = response.json()
                labels = []
                for item in batch["items"]:
                    item_id = item["item_id"]
                    if item_id in study.gold.entries:
                        labels.append(
                            {
                                "item_id": item_id,
                                "category": int(study.gold.entries[item_id]),
                            }
                        )
                    else:
                        labels.append(
                            {"item_id": item_id, "category": work_category}
                        )
                submit = client.post(
                    "/api/labels", json={"rater_id": rater_id, "labels": labels}
                )
                assert submit.status_code == 200

        live_snapshot = study.snapshot()
        live_stats = client.get("/api/stats").json()
        assert live_stats["kappa"] is not None

        # restart: fold the log back into a fresh process
        rebuilt = Study(config)
        rebuilt.replay()
        assert rebuilt.snapshot() == live_snapshot
        rebuilt_client = TestClient(create_app(rebuilt))
        assert rebuilt_client.get("/api/stats").json() == live_stats

        # the CLI kappa over the exported label log must agree to 1e-12
        export_path = tmp_path / "labels.csv"
        export_path.write_text(client.get("/api/export/labels").text)
        out_path = tmp_path / "kappa.json"
        code = cli_main(
            ["kappa", "--labels", str(export_path), "--categories", "5",
             "--output", str(out_path)]
        )
        assert code == 0
        cli_payload = json.loads(out_path.read_text())
        assert abs(cli_payload["kappa"] - live_stats["kappa"]) <= 1e-12
        study.close()
        rebuilt.close()
