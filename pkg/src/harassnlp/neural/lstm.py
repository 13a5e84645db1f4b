"""LSTM text classifier trained from scratch with BPTT and plain SGD.

Token id 0 is the pad id; pad steps are masked, meaning the hidden and
cell states carry through unchanged, so right-padding never changes the
output. The final hidden state feeds an affine layer and a softmax over
the five categories.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..taxonomy import Category

logger = logging.getLogger(__name__)

PAD_ID = 0
N_CLASSES = 5


@dataclass(frozen=True)
class LstmConfig:
    seq_len: int = 15
    hidden: int = 128
    embed_dim: int = 64
    lr: float = 0.001
    batch_size: int = 30
    epochs: int = 50
    seed: int = 0
    batches_per_epoch: Optional[int] = None
    clip_norm: Optional[float] = None

    def __post_init__(self) -> None:
        if self.seq_len < 1 or self.hidden < 1 or self.embed_dim < 1:
            raise ValueError("seq_len, hidden and embed_dim must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")


def pad_or_truncate(ids: Sequence[int], seq_len: int = 15) -> list[int]:
    """First ``seq_len`` ids, padded after with the pad id 0."""
    if seq_len < 1:
        raise ValueError("seq_len must be >= 1")
    clipped = list(ids[:seq_len])
    return clipped + [PAD_ID] * (seq_len - len(clipped))


def init_params(
    vocab_size: int, config: LstmConfig, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Uniform(-0.1, 0.1) recurrent/embedding init, forget-gate bias +1,
    zero output layer (so untrained logits are exactly zero and small
    learning rates can still move the argmax)."""
    E, H = config.embed_dim, config.hidden

    def u(*shape):
        return rng.uniform(-0.1, 0.1, size=shape)

    params = {
        "emb": u(vocab_size + 1, E),  # row 0 is the pad row (masked out)
        "W": u(4 * H, E),
        "U": u(4 * H, H),
        "b": u(4 * H),
        "W_out": np.zeros((N_CLASSES, H)),
        "b_out": np.zeros(N_CLASSES),
    }
    params["b"][H : 2 * H] += 1.0
    return params


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def lstm_forward(
    params: dict[str, np.ndarray], ids: np.ndarray
) -> tuple[np.ndarray, dict]:
    """Class probabilities for a (B, T) id batch, plus cached activations."""
    ids = np.asarray(ids)
    if ids.ndim == 1:
        ids = ids[None, :]
    vocab_rows = params["emb"].shape[0]
    if ids.min() < 0 or ids.max() >= vocab_rows:
        raise ValueError(
            f"token id out of range: got {int(ids.max())}, have {vocab_rows} rows"
        )
    B, T = ids.shape
    H = params["U"].shape[1]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    steps = []
    for t in range(T):
        x = params["emb"][ids[:, t]]
        mask = (ids[:, t] != PAD_ID).astype(float)[:, None]
        a = x @ params["W"].T + h @ params["U"].T + params["b"]
        i = _sigmoid(a[:, 0 * H : 1 * H])
        f = _sigmoid(a[:, 1 * H : 2 * H])
        g = np.tanh(a[:, 2 * H : 3 * H])
        o = _sigmoid(a[:, 3 * H : 4 * H])
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        h_new = o * tanh_c
        steps.append(
            {
                "ids": ids[:, t],
                "x": x,
                "mask": mask,
                "h_prev": h,
                "c_prev": c,
                "i": i,
                "f": f,
                "g": g,
                "o": o,
                "tanh_c": tanh_c,
            }
        )
        h = mask * h_new + (1.0 - mask) * h
        c = mask * c_new + (1.0 - mask) * c
    logits = h @ params["W_out"].T + params["b_out"]
    probs = _softmax(logits)
    cache = {"steps": steps, "h_final": h, "probs": probs, "ids": ids}
    return probs, cache


def lstm_loss(
    params: dict[str, np.ndarray], ids: np.ndarray, targets: np.ndarray
) -> float:
    """Mean cross-entropy of the batch; targets are class indices 0..4."""
    probs, _ = lstm_forward(params, ids)
    rows = np.arange(len(targets))
    return float(-np.log(probs[rows, targets]).mean())


def lstm_gradients(
    params: dict[str, np.ndarray], ids: np.ndarray, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy loss and its gradients via BPTT."""
    probs, cache = lstm_forward(params, ids)
    ids = cache["ids"]
    B, T = ids.shape
    H = params["U"].shape[1]
    rows = np.arange(B)
    loss = float(-np.log(probs[rows, targets]).mean())

    grads = {name: np.zeros_like(value) for name, value in params.items()}
    d_logits = probs.copy()
    d_logits[rows, targets] -= 1.0
    d_logits /= B
    grads["W_out"] = d_logits.T @ cache["h_final"]
    grads["b_out"] = d_logits.sum(axis=0)

    dh = d_logits @ params["W_out"]
    dc = np.zeros((B, H))
    for t in reversed(range(T)):
        step = cache["steps"][t]
        mask = step["mask"]
        i, f, g, o = step["i"], step["f"], step["g"], step["o"]
        tanh_c = step["tanh_c"]

        dh_live = dh * mask
        dc_live = dc * mask
        do = dh_live * tanh_c
        dc_inner = dc_live + dh_live * o * (1.0 - tanh_c**2)
        di = dc_inner * g
        df = dc_inner * step["c_prev"]
        dg = dc_inner * i

        da = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g**2),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        grads["W"] += da.T @ step["x"]
        grads["U"] += da.T @ step["h_prev"]
        grads["b"] += da.sum(axis=0)
        dx = da @ params["W"]
        np.add.at(grads["emb"], step["ids"], dx * mask)

        dh = da @ params["U"] + (1.0 - mask) * dh
        dc = dc_inner * f * mask + (1.0 - mask) * dc
    return loss, grads


def flatten_params(params: dict[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([params[name].ravel() for name in sorted(params)])


def unflatten_params(
    flat: np.ndarray, template: dict[str, np.ndarray]
) -> dict[str, np.ndarray]:
    out = {}
    cursor = 0
    for name in sorted(template):
        size = template[name].size
        out[name] = flat[cursor : cursor + size].reshape(template[name].shape)
        cursor += size
    return out


def _clip(grads: dict[str, np.ndarray], max_norm: float) -> None:
    total = np.sqrt(sum(float((g**2).sum()) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale


@dataclass
class LstmClassifier:
    """Vocabulary plus trained parameters; prediction pads to seq_len."""

    words: tuple[str, ...]
    config: LstmConfig
    params: dict[str, np.ndarray]
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def index(self) -> dict[str, int]:
        # pad is 0, real tokens start at 1
        return {w: i + 1 for i, w in enumerate(self.words)}

    def encode(self, tokens: Sequence[str]) -> list[int]:
        index = self.index
        ids = [index[t] for t in tokens if t in index]
        return pad_or_truncate(ids, self.config.seq_len)

    def predict_proba(self, tokens: Sequence[str]) -> np.ndarray:
        probs, _ = lstm_forward(self.params, np.array([self.encode(tokens)]))
        return probs[0]

    def predict(self, tokens: Sequence[str]) -> Category:
        probs = self.predict_proba(tokens)
        return Category(int(np.argmax(probs)) + 1)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "lstm",
                "version": 1,
                "words": list(self.words),
                "config": asdict(self.config),
                "shapes": {n: list(p.shape) for n, p in self.params.items()},
                "params": {n: p.ravel().tolist() for n, p in self.params.items()},
                "epoch_losses": self.epoch_losses,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "LstmClassifier":
        payload = json.loads(text)
        if payload.get("kind") != "lstm" or payload.get("version") != 1:
            raise ValueError("not a version-1 LSTM model file")
        params = {
            name: np.asarray(values).reshape(payload["shapes"][name])
            for name, values in payload["params"].items()
        }
        return cls(
            words=tuple(payload["words"]),
            config=LstmConfig(**payload["config"]),
            params=params,
            epoch_losses=list(payload["epoch_losses"]),
        )


def lstm_train(
    docs_tokens: Sequence[Sequence[str]],
    labels: Sequence[Category],
    config: LstmConfig | None = None,
) -> LstmClassifier:
    """Train the classifier; returns the model with its loss curve.

    The loss curve records each epoch's mean pre-update batch loss, so
    entry 0 reflects the freshly initialized model.
    """
    config = config or LstmConfig()
    if len(docs_tokens) != len(labels):
        raise ValueError("documents and labels must have equal length")
    if not docs_tokens:
        raise ValueError("training set is empty")
    present = {Category(label) for label in labels}
    absent = [c.name for c in Category if c not in present]
    if absent:
        logger.warning("classes absent from training data: %s", ", ".join(absent))

    words = tuple(sorted({t for tokens in docs_tokens for t in tokens}))
    index = {w: i + 1 for i, w in enumerate(words)}
    encoded = np.array(
        [
            pad_or_truncate([index[t] for t in tokens], config.seq_len)
            for tokens in docs_tokens
        ],
        dtype=np.int64,
    )
    targets = np.array([int(label) - 1 for label in labels], dtype=np.int64)

    rng = np.random.default_rng(config.seed)
    params = init_params(len(words), config, rng)

    epoch_losses: list[float] = []
    N = len(encoded)
    for _ in range(config.epochs):
        order = rng.permutation(N)
        batch_losses = []
        starts = range(0, N, config.batch_size)
        if config.batches_per_epoch is not None:
            starts = list(starts)[: config.batches_per_epoch]
        for start in starts:
            rows = order[start : start + config.batch_size]
            loss, grads = lstm_gradients(params, encoded[rows], targets[rows])
            if config.clip_norm is not None:
                _clip(grads, config.clip_norm)
            for name in params:
                params[name] -= config.lr * grads[name]
            batch_losses.append(loss)
        epoch_losses.append(float(np.mean(batch_losses)))
    return LstmClassifier(
        words=words, config=config, params=params, epoch_losses=epoch_losses
    )
