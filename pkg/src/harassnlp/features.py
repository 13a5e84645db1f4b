"""N-gram feature extraction and sparse count vectors.

Word n-grams slide over the token sequence; character n-grams slide over
the space-joined token text so they cross token boundaries. Features are
namespaced ("w2:", "c3:") so word and character grams with the same
surface form never collide in one vocabulary.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Document


@dataclass(frozen=True)
class NgramPart:
    """One feature family: ``unit`` is "word" or "char", ``n`` >= 1."""

    unit: str
    n: int

    def __post_init__(self) -> None:
        if self.unit not in ("word", "char"):
            raise ValueError(f"unknown ngram unit: {self.unit!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def prefix(self) -> str:
        return f"{'w' if self.unit == 'word' else 'c'}{self.n}:"

    @property
    def short(self) -> str:
        return f"{'w' if self.unit == 'word' else 'c'}{self.n}"

    @classmethod
    def parse(cls, short: str) -> "NgramPart":
        """Parse "w2" or "c3" style names."""
        if len(short) < 2 or short[0] not in ("w", "c"):
            raise ValueError(f"bad ngram part: {short!r}")
        unit = "word" if short[0] == "w" else "char"
        try:
            n = int(short[1:])
        except ValueError as exc:
            raise ValueError(f"bad ngram part: {short!r}") from exc
        return cls(unit, n)


@dataclass(frozen=True)
class NgramSpec:
    """An ordered set of ngram parts extracted together."""

    parts: tuple[NgramPart, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("ngram spec must have at least one part")
        if len(set(self.parts)) != len(self.parts):
            raise ValueError("duplicate (unit, n) in ngram spec")

    @classmethod
    def parse(cls, text: str) -> "NgramSpec":
        """Parse "w2+c3" style spec strings."""
        return cls(tuple(NgramPart.parse(p) for p in text.split("+")))

    @property
    def short(self) -> str:
        return "+".join(p.short for p in self.parts)


def word_ngrams(tokens: Sequence[str], n: int) -> list[str]:
    """Space-joined sliding windows over the token sequence."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def char_ngrams(text: str, n: int) -> list[str]:
    """Sliding character windows; spaces count as characters."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [text[i : i + n] for i in range(len(text) - n + 1)]


def extract_features(tokens: Sequence[str], spec: NgramSpec) -> list[str]:
    """All namespaced feature occurrences of a token sequence."""
    features: list[str] = []
    joined = None
    for part in spec.parts:
        if part.unit == "word":
            grams = word_ngrams(tokens, part.n)
        else:
            if joined is None:
                joined = " ".join(tokens)
            grams = char_ngrams(joined, part.n)
        features.extend(part.prefix + g for g in grams)
    return features


def _doc_tokens(doc: Document) -> Sequence[str]:
    if not doc.preprocessed:
        raise ValueError(f"document {doc.id!r} is not preprocessed")
    return doc.tokens or ()


@dataclass(frozen=True)
class Vocabulary:
    """Frozen feature-string -> column-id map with contiguous ids."""

    index: dict[str, int]
    spec: NgramSpec
    min_df: int
    frozen: bool = True

    def __post_init__(self) -> None:
        ids = sorted(self.index.values())
        if ids != list(range(len(ids))):
            raise ValueError("vocabulary ids must be contiguous from 0")

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, feature: str) -> bool:
        return feature in self.index

    @property
    def features(self) -> list[str]:
        """Feature strings in column order."""
        ordered = [""] * len(self.index)
        for feature, col in self.index.items():
            ordered[col] = feature
        return ordered

    def to_json(self) -> str:
        payload = {
            "spec": [p.short for p in self.spec.parts],
            "min_df": self.min_df,
            "features": self.features,
        }
        return json.dumps(payload, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        payload = json.loads(text)
        spec = NgramSpec(tuple(NgramPart.parse(p) for p in payload["spec"]))
        index = {feature: col for col, feature in enumerate(payload["features"])}
        return cls(index=index, spec=spec, min_df=int(payload["min_df"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class SparseVector:
    """Column-id -> positive count map."""

    entries: dict[int, int]

    def __post_init__(self) -> None:
        for col, count in self.entries.items():
            if count < 1:
                raise ValueError(f"count for column {col} must be >= 1")

    def total(self) -> int:
        return sum(self.entries.values())


def build_vocab(
    documents: Iterable[Document], spec: NgramSpec, min_df: int = 2
) -> Vocabulary:
    """Collect features occurring in at least ``min_df`` documents.

    Columns are assigned in lexicographic feature order so identical
    inputs always produce the identical index map.
    """
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    doc_freq: dict[str, int] = {}
    for doc in documents:
        for feature in set(extract_features(_doc_tokens(doc), spec)):
            doc_freq[feature] = doc_freq.get(feature, 0) + 1
    selected = sorted(f for f, df in doc_freq.items() if df >= min_df)
    return Vocabulary(
        index={feature: col for col, feature in enumerate(selected)},
        spec=spec,
        min_df=min_df,
    )


def vectorize(doc: Document, vocab: Vocabulary, spec: NgramSpec | None = None) -> SparseVector:
    """Count in-vocabulary features; unknown features are dropped."""
    if not vocab.frozen:
        raise ValueError("vocabulary must be frozen before vectorizing")
    spec = spec or vocab.spec
    counts: dict[int, int] = {}
    for feature in extract_features(_doc_tokens(doc), spec):
        col = vocab.index.get(feature)
        if col is not None:
            counts[col] = counts.get(col, 0) + 1
    return SparseVector(entries=counts)
