"""Skip-gram word vectors and distributed bag-of-words document vectors,
both trained with negative sampling and plain SGD.

The two objectives share one loss: an "input" vector (center word or
document) scores a true target word against sampled noise words. Noise
words are drawn from the unigram distribution raised to 0.75.

Document-vector sampling is keyed by the document's content hash, so two
documents with identical tokens receive identical init and identical
sample streams; output-vector updates are applied synchronously at the
end of each epoch, which makes their trajectories equal as well.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NOISE_POWER = 0.75


def loss_curve_csv(epoch_losses: Sequence[float]) -> str:
    """Render a training loss curve as ``epoch,loss`` CSV."""
    lines = ["epoch,loss"]
    lines += [f"{epoch},{loss!r}" for epoch, loss in enumerate(epoch_losses)]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SgdConfig:
    lr: float = 0.05
    epochs: int = 5
    batch_size: int = 1
    seed: int = 0
    negatives: int = 5
    window: int = 5

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.negatives < 1 or self.window < 1:
            raise ValueError("negatives and window must be >= 1")


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _log_sigmoid(x):
    # log sigma(x) = -log(1 + exp(-x)), computed without overflow
    return -np.logaddexp(0.0, -x)


def negative_sampling_loss(
    in_vecs: np.ndarray,
    out_vecs: np.ndarray,
    samples: Sequence[tuple[int, int, Sequence[int]]],
) -> float:
    """Total loss of (input id, target id, negative ids) samples."""
    loss = 0.0
    for input_id, target_id, negatives in samples:
        v = in_vecs[input_id]
        loss -= _log_sigmoid(float(out_vecs[target_id] @ v))
        for neg in negatives:
            loss -= _log_sigmoid(-float(out_vecs[neg] @ v))
    return float(loss)


def negative_sampling_gradients(
    in_vecs: np.ndarray,
    out_vecs: np.ndarray,
    samples: Sequence[tuple[int, int, Sequence[int]]],
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss plus dense gradients w.r.t. both vector tables."""
    g_in = np.zeros_like(in_vecs)
    g_out = np.zeros_like(out_vecs)
    loss = 0.0
    for input_id, target_id, negatives in samples:
        v = in_vecs[input_id]
        u = out_vecs[target_id]
        score = float(u @ v)
        loss -= _log_sigmoid(score)
        coeff = _sigmoid(score) - 1.0
        g_in[input_id] += coeff * u
        g_out[target_id] += coeff * v
        for neg in negatives:
            u_n = out_vecs[neg]
            score_n = float(u_n @ v)
            loss -= _log_sigmoid(-score_n)
            coeff_n = _sigmoid(score_n)
            g_in[input_id] += coeff_n * u_n
            g_out[neg] += coeff_n * v
    return float(loss), g_in, g_out


def _build_word_index(
    docs_tokens: Sequence[Sequence[str]],
) -> tuple[tuple[str, ...], dict[str, int], np.ndarray]:
    counts: dict[str, int] = {}
    for tokens in docs_tokens:
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
    words = tuple(sorted(counts))
    if not words:
        raise ValueError("empty vocabulary: no tokens in corpus")
    index = {w: i for i, w in enumerate(words)}
    freqs = np.array([counts[w] for w in words], dtype=float)
    return words, index, freqs


def _noise_cdf(freqs: np.ndarray) -> np.ndarray:
    weights = freqs**NOISE_POWER
    return np.cumsum(weights / weights.sum())


def _draw_negatives(cdf: np.ndarray, rng: np.random.Generator, k: int) -> list[int]:
    return np.searchsorted(cdf, rng.random(k)).tolist()


@dataclass
class EmbeddingTable:
    """Trained word vectors; ``input_vectors`` are the embeddings used
    downstream, ``output_vectors`` the target-side table."""

    words: tuple[str, ...]
    dim: int
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    seed: int
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}

    def vector(self, word: str) -> np.ndarray | None:
        i = self.index.get(word)
        return None if i is None else self.input_vectors[i]

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "sgns",
                "version": 1,
                "words": list(self.words),
                "dim": self.dim,
                "seed": self.seed,
                "input_vectors": self.input_vectors.ravel().tolist(),
                "output_vectors": self.output_vectors.ravel().tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "EmbeddingTable":
        payload = json.loads(text)
        if payload.get("kind") != "sgns" or payload.get("version") != 1:
            raise ValueError("not a version-1 skip-gram model file")
        shape = (len(payload["words"]), payload["dim"])
        return cls(
            words=tuple(payload["words"]),
            dim=int(payload["dim"]),
            input_vectors=np.asarray(payload["input_vectors"]).reshape(shape),
            output_vectors=np.asarray(payload["output_vectors"]).reshape(shape),
            seed=int(payload["seed"]),
        )


def train_skipgram(
    docs_tokens: Sequence[Sequence[str]],
    config: SgdConfig | None = None,
    dim: int = 64,
) -> EmbeddingTable:
    """Train skip-gram vectors with negative sampling by per-pair SGD."""
    config = config or SgdConfig()
    words, index, freqs = _build_word_index(docs_tokens)
    cdf = _noise_cdf(freqs)
    rng = np.random.default_rng(config.seed)
    V = len(words)
    in_vecs = rng.uniform(-0.5 / dim, 0.5 / dim, size=(V, dim))
    out_vecs = np.zeros((V, dim))

    docs_ids = [
        [index[t] for t in tokens] for tokens in docs_tokens if tokens
    ]
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        total_loss = 0.0
        n_samples = 0
        for ids in docs_ids:
            for i, center in enumerate(ids):
                lo = max(0, i - config.window)
                hi = min(len(ids), i + config.window + 1)
                for j in range(lo, hi):
                    if j == i:
                        continue
                    negatives = _draw_negatives(cdf, rng, config.negatives)
                    sample = [(center, ids[j], negatives)]
                    loss, g_in, g_out = negative_sampling_gradients(
                        in_vecs, out_vecs, sample
                    )
                    total_loss += loss
                    n_samples += 1
                    in_vecs -= config.lr * g_in
                    out_vecs -= config.lr * g_out
        epoch_losses.append(total_loss / max(n_samples, 1))
    return EmbeddingTable(
        words=words,
        dim=dim,
        input_vectors=in_vecs,
        output_vectors=out_vecs,
        seed=config.seed,
        epoch_losses=epoch_losses,
    )


def doc_embed_average(tokens: Iterable[str], table: EmbeddingTable) -> np.ndarray:
    """Mean input vector of in-vocabulary tokens; zeros when none match."""
    if hasattr(tokens, "tokens"):  # accept a Document as well
        tokens = tokens.tokens or ()
    index = table.index
    rows = [index[t] for t in tokens if t in index]
    if not rows:
        return np.zeros(table.dim)
    return table.input_vectors[list(rows)].mean(axis=0)


def _content_key(tokens: Sequence[str]) -> int:
    digest = hashlib.sha256("\x00".join(tokens).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class DocVectorTable:
    """Trained document vectors plus the shared word output table."""

    words: tuple[str, ...]
    dim: int
    doc_vectors: np.ndarray
    output_vectors: np.ndarray
    seed: int
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "pvdbow",
                "version": 1,
                "words": list(self.words),
                "dim": self.dim,
                "seed": self.seed,
                "doc_vectors": self.doc_vectors.ravel().tolist(),
                "n_docs": int(self.doc_vectors.shape[0]),
                "output_vectors": self.output_vectors.ravel().tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "DocVectorTable":
        payload = json.loads(text)
        if payload.get("kind") != "pvdbow" or payload.get("version") != 1:
            raise ValueError("not a version-1 document-vector model file")
        dim = int(payload["dim"])
        return cls(
            words=tuple(payload["words"]),
            dim=dim,
            doc_vectors=np.asarray(payload["doc_vectors"]).reshape(
                payload["n_docs"], dim
            ),
            output_vectors=np.asarray(payload["output_vectors"]).reshape(
                len(payload["words"]), dim
            ),
            seed=int(payload["seed"]),
        )


def _doc_rng(seed: int, epoch: int, content_key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, epoch, content_key]))


def train_pvdbow(
    docs_tokens: Sequence[Sequence[str]],
    config: SgdConfig | None = None,
    dim: int = 64,
) -> DocVectorTable:
    """Train one vector per document to predict its own tokens.

    Document vectors update immediately; output-vector updates are
    accumulated against an epoch-start snapshot and applied at the end of
    the epoch.
    """
    config = config or SgdConfig()
    if not docs_tokens:
        raise ValueError("document list is empty")
    words, index, freqs = _build_word_index(docs_tokens)
    cdf = _noise_cdf(freqs)
    V = len(words)

    keys = [_content_key(tuple(tokens)) for tokens in docs_tokens]
    doc_vecs = np.zeros((len(docs_tokens), dim))
    for d, key in enumerate(keys):
        doc_vecs[d] = _doc_rng(config.seed, 0, key).uniform(
            -0.5 / dim, 0.5 / dim, size=dim
        )
    out_vecs = np.zeros((V, dim))

    docs_ids = [[index[t] for t in tokens] for tokens in docs_tokens]
    epoch_losses: list[float] = []
    for epoch in range(1, config.epochs + 1):
        snapshot = out_vecs.copy()
        out_accum = np.zeros_like(out_vecs)
        total_loss = 0.0
        n_samples = 0
        for d, ids in enumerate(docs_ids):
            if not ids:
                continue
            rng = _doc_rng(config.seed, epoch, keys[d])
            for target in ids:
                negatives = _draw_negatives(cdf, rng, config.negatives)
                v = doc_vecs[d]
                score = float(snapshot[target] @ v)
                loss = -_log_sigmoid(score)
                coeff = _sigmoid(score) - 1.0
                g_v = coeff * snapshot[target]
                out_accum[target] += coeff * v
                for neg in negatives:
                    score_n = float(snapshot[neg] @ v)
                    loss -= _log_sigmoid(-score_n)
                    coeff_n = _sigmoid(score_n)
                    g_v = g_v + coeff_n * snapshot[neg]
                    out_accum[neg] += coeff_n * v
                doc_vecs[d] = v - config.lr * g_v
                total_loss += loss
                n_samples += 1
        out_vecs = snapshot - config.lr * out_accum
        epoch_losses.append(total_loss / max(n_samples, 1))
    return DocVectorTable(
        words=words,
        dim=dim,
        doc_vectors=doc_vecs,
        output_vectors=out_vecs,
        seed=config.seed,
        epoch_losses=epoch_losses,
    )


def infer_doc_vector(
    table: DocVectorTable,
    tokens: Sequence[str],
    config: SgdConfig | None = None,
) -> np.ndarray:
    """Fit a vector for an unseen document against frozen output vectors."""
    config = config or SgdConfig()
    index = table.index
    ids = [index[t] for t in tokens if t in index]
    if not ids:
        return np.zeros(table.dim)
    key = _content_key(tuple(tokens))
    v = _doc_rng(table.seed, 0, key).uniform(
        -0.5 / table.dim, 0.5 / table.dim, size=table.dim
    )
    # Uniform noise draw: held-out docs should not depend on corpus
    # frequencies beyond what the frozen output table already encodes.
    V = len(table.words)
    for epoch in range(1, config.epochs + 1):
        rng = _doc_rng(table.seed, epoch, key)
        for target in ids:
            negatives = rng.integers(0, V, size=config.negatives).tolist()
            coeff = _sigmoid(float(table.output_vectors[target] @ v)) - 1.0
            g_v = coeff * table.output_vectors[target]
            for neg in negatives:
                coeff_n = _sigmoid(float(table.output_vectors[neg] @ v))
                g_v = g_v + coeff_n * table.output_vectors[neg]
            v = v - config.lr * g_v
    return v
