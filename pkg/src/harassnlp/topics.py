"""Latent Dirichlet Allocation with a collapsed Gibbs sampler.

Used to surface sub-hashtags for widening tweet collection: hashtags stay
in the vocabulary as ordinary tokens, and each fitted topic can be
reduced to its top-ranked hashtags.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln


@dataclass
class LdaModel:
    """Gibbs state: count tables plus the per-token assignments."""

    n_topics: int
    alpha: float
    beta: float
    vocabulary: tuple[str, ...]
    doc_topic: np.ndarray  # (D, K)
    topic_word: np.ndarray  # (K, V)
    topic_totals: np.ndarray  # (K,)
    assignments: list[np.ndarray]  # per doc, topic id per token
    seed: int
    log_likelihoods: list[float] = field(default_factory=list)

    @property
    def word_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.vocabulary)}

    def check_counts(self, docs_tokens: Sequence[Sequence[str]]) -> None:
        """Verify the three count-conservation identities."""
        for d, tokens in enumerate(docs_tokens):
            if int(self.doc_topic[d].sum()) != len(tokens):
                raise AssertionError(f"doc {d}: doc-topic counts off")
        if not np.array_equal(self.topic_word.sum(axis=1), self.topic_totals):
            raise AssertionError("topic-word totals off")
        total_tokens = sum(len(t) for t in docs_tokens)
        if int(self.topic_totals.sum()) != total_tokens:
            raise AssertionError("grand total off")


def _joint_log_likelihood(model: LdaModel) -> float:
    """log p(w, z | alpha, beta) up to constants in the doc-topic part."""
    K, V = model.topic_word.shape
    beta, alpha = model.beta, model.alpha
    ll = K * (gammaln(V * beta) - V * gammaln(beta))
    ll += gammaln(model.topic_word + beta).sum() - gammaln(
        model.topic_totals + V * beta
    ).sum()
    D = model.doc_topic.shape[0]
    doc_lens = model.doc_topic.sum(axis=1)
    ll += D * (gammaln(K * alpha) - K * gammaln(alpha))
    ll += gammaln(model.doc_topic + alpha).sum() - gammaln(
        doc_lens + K * alpha
    ).sum()
    return float(ll)


def fit_lda(
    docs_tokens: Sequence[Sequence[str]],
    n_topics: int = 10,
    alpha: Optional[float] = None,
    beta: float = 0.01,
    iterations: int = 500,
    seed: int = 0,
    track_loglik: bool = False,
    validate_counts: bool = False,
) -> LdaModel:
    """Run collapsed Gibbs sampling over tokenized documents.

    alpha defaults to 50 / n_topics. Sampling is sequential and seeded,
    so identical inputs give identical assignments. With
    ``validate_counts`` the three conservation identities are re-checked
    after every sweep (raises AssertionError on violation).
    """
    if n_topics < 1:
        raise ValueError("n_topics must be >= 1")
    if alpha is None:
        alpha = 50.0 / n_topics
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be > 0")

    vocabulary = tuple(sorted({t for tokens in docs_tokens for t in tokens}))
    if not vocabulary:
        raise ValueError("empty vocabulary: no tokens in corpus")
    word_id = {w: i for i, w in enumerate(vocabulary)}
    docs = [np.array([word_id[t] for t in tokens], dtype=np.int64) for tokens in docs_tokens]

    K, V = n_topics, len(vocabulary)
    rng = np.random.default_rng(seed)
    doc_topic = np.zeros((len(docs), K), dtype=np.int64)
    topic_word = np.zeros((K, V), dtype=np.int64)
    topic_totals = np.zeros(K, dtype=np.int64)
    assignments: list[np.ndarray] = []
    for d, words in enumerate(docs):
        z = rng.integers(0, K, size=len(words))
        assignments.append(z)
        for w, k in zip(words, z):
            doc_topic[d, k] += 1
            topic_word[k, w] += 1
            topic_totals[k] += 1

    model = LdaModel(
        n_topics=K,
        alpha=alpha,
        beta=beta,
        vocabulary=vocabulary,
        doc_topic=doc_topic,
        topic_word=topic_word,
        topic_totals=topic_totals,
        assignments=assignments,
        seed=seed,
    )

    beta_v = beta * V
    for _ in range(iterations):
        for d, words in enumerate(docs):
            z = assignments[d]
            dt = doc_topic[d]
            for i in range(len(words)):
                w = words[i]
                k_old = z[i]
                dt[k_old] -= 1
                topic_word[k_old, w] -= 1
                topic_totals[k_old] -= 1

                weights = (
                    (dt + alpha)
                    * (topic_word[:, w] + beta)
                    / (topic_totals + beta_v)
                )
                threshold = rng.random() * weights.sum()
                k_new = int(np.searchsorted(np.cumsum(weights), threshold))

                z[i] = k_new
                dt[k_new] += 1
                topic_word[k_new, w] += 1
                topic_totals[k_new] += 1
        if validate_counts:
            model.check_counts(docs_tokens)
        if track_loglik:
            model.log_likelihoods.append(_joint_log_likelihood(model))
    return model


def topic_term_probs(model: LdaModel, topic: int) -> np.ndarray:
    """Smoothed word distribution of one topic."""
    if not 0 <= topic < model.n_topics:
        raise ValueError(f"topic {topic} out of range")
    V = len(model.vocabulary)
    return (model.topic_word[topic] + model.beta) / (
        model.topic_totals[topic] + model.beta * V
    )


def top_terms(model: LdaModel, topic: int, t: int) -> list[tuple[str, float]]:
    """Top ``t`` terms of a topic by probability, ties lexicographic."""
    if t < 1:
        raise ValueError("t must be >= 1")
    probs = topic_term_probs(model, topic)
    ranked = sorted(
        zip(model.vocabulary, probs), key=lambda pair: (-pair[1], pair[0])
    )
    return [(term, float(p)) for term, p in ranked[:t]]


def suggest_hashtags(model: LdaModel, t: int) -> list[list[str]]:
    """Per topic, the top ``t`` hashtag terms (may be empty)."""
    hashtag_list: list[list[str]] = []
    for topic in range(model.n_topics):
        ranked = sorted(
            (
                (term, p)
                for term, p in zip(model.vocabulary, topic_term_probs(model, topic))
                if term.startswith("#")
            ),
            key=lambda pair: (-pair[1], pair[0]),
        )
        hashtag_list.append([term for term, _ in ranked[:t]])
    return hashtag_list
