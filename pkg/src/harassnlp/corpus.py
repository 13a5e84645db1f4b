"""Tweet corpus data model, file ingestion, and preprocessing.

Corpus files are JSONL (one object per line with ``id``, ``text`` and
optional ``label``, ``legacy_label``, ``user_id``) or CSV with the same
columns. Preprocessing lowercases, drops link tokens and tokens shorter
than three characters, and keeps every hashtag regardless of length.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .exceptions import IngestError
from .taxonomy import Category, Gender, LegacyCategory, remap_legacy

URL_PREFIXES = ("http://", "https://", "www.")
MIN_TOKEN_LEN = 3


@dataclass(frozen=True)
class Document:
    """One tweet-like text, optionally labeled.

    ``tokens`` is None until the document has been preprocessed; an empty
    tuple is a legal preprocessing result.
    """

    id: str
    raw_text: str
    tokens: Optional[tuple[str, ...]] = None
    hashtags: tuple[str, ...] = ()
    label: Optional[Category] = None
    legacy_label: Optional[LegacyCategory] = None
    author_gender: Gender = Gender.UNKNOWN
    user_id: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be non-empty")
        if self.tokens is not None:
            missing = set(self.hashtags) - set(self.tokens)
            if missing:
                raise ValueError(f"hashtags not among tokens: {sorted(missing)}")
        if self.label is not None and self.legacy_label is not None:
            if remap_legacy(self.legacy_label) != self.label:
                raise ValueError(
                    f"label {self.label} inconsistent with legacy label "
                    f"{self.legacy_label}"
                )

    @property
    def preprocessed(self) -> bool:
        return self.tokens is not None


@dataclass(frozen=True)
class Corpus:
    """Ordered, id-unique collection of documents."""

    documents: tuple[Document, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, i: int) -> Document:
        return self.documents[i]

    def by_id(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)


@dataclass(frozen=True)
class PreprocessConfig:
    """Optional corpus-level filters; both are off by default.

    ``english_only`` drops documents whose stopword coverage (fraction of
    raw lowercased non-link tokens found in the bundled English stopword
    list) falls below ``english_min_coverage``. ``max_hashtag_ratio``
    drops documents whose preprocessed tokens are mostly hashtags, a
    conservative spam heuristic.
    """

    english_only: bool = False
    english_min_coverage: float = 0.1
    max_hashtag_ratio: Optional[float] = None


@dataclass(frozen=True)
class GenderLexicon:
    """Signed token weights for author-gender scoring.

    ``positive_pole`` is the gender assigned to positive total scores;
    negative totals get the opposite pole.
    """

    weights: dict[str, float]
    positive_pole: Gender = Gender.FEMALE

    def __post_init__(self) -> None:
        if self.positive_pole not in (Gender.FEMALE, Gender.MALE):
            raise ValueError("positive_pole must be FEMALE or MALE")
        for token, weight in self.weights.items():
            if not token:
                raise ValueError("lexicon tokens must be non-empty")
            if weight != weight or weight in (float("inf"), float("-inf")):
                raise ValueError(f"non-finite weight for token {token!r}")


def _parse_label(value, line_no: int) -> Optional[Category]:
    if value is None or value == "":
        return None
    try:
        return Category(int(value))
    except (TypeError, ValueError) as exc:
        raise IngestError(f"line {line_no}: bad label {value!r}") from exc


def _parse_legacy(value, line_no: int) -> Optional[LegacyCategory]:
    if value is None or value == "":
        return None
    try:
        return LegacyCategory(int(value))
    except (TypeError, ValueError) as exc:
        raise IngestError(f"line {line_no}: bad legacy_label {value!r}") from exc


def _record_to_document(record: dict, line_no: int) -> Document:
    doc_id = record.get("id")
    text = record.get("text")
    if not doc_id or not isinstance(doc_id, str):
        raise IngestError(f"line {line_no}: missing or empty 'id'")
    if text is None or not isinstance(text, str):
        raise IngestError(f"line {line_no}: missing 'text'")
    tokens = record.get("tokens")
    hashtags = record.get("hashtags") or ()
    try:
        return Document(
            id=doc_id,
            raw_text=text,
            tokens=tuple(tokens) if tokens is not None else None,
            hashtags=tuple(hashtags),
            label=_parse_label(record.get("label"), line_no),
            legacy_label=_parse_legacy(record.get("legacy_label"), line_no),
            user_id=record.get("user_id") or None,
        )
    except ValueError as exc:
        raise IngestError(f"line {line_no}: {exc}") from exc


def _iter_jsonl(path: Path) -> Iterator[tuple[dict, int]]:
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"line {line_no}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise IngestError(f"line {line_no}: expected a JSON object")
            yield record, line_no


def _iter_csv(path: Path) -> Iterator[tuple[dict, int]]:
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise IngestError("line 1: CSV header must include 'id' and 'text'")
        for row in reader:
            if None in row:
                raise IngestError(f"line {reader.line_num}: too many fields")
            yield row, reader.line_num


def ingest(path: str | Path, format: Optional[str] = None) -> Corpus:
    """Read a corpus file into raw (unpreprocessed) documents.

    ``format`` is "jsonl" or "csv"; when omitted it is inferred from the
    file suffix.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unknown corpus format: {format!r}")
    if not path.exists():
        raise IngestError(f"no such file: {path}")

    rows = _iter_csv(path) if format == "csv" else _iter_jsonl(path)
    documents: list[Document] = []
    seen: set[str] = set()
    for record, line_no in rows:
        doc = _record_to_document(record, line_no)
        if doc.id in seen:
            raise IngestError(f"line {line_no}: duplicate id {doc.id!r}")
        seen.add(doc.id)
        documents.append(doc)
    return Corpus(tuple(documents))


def write_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out as JSONL, keeping tokens when present."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for doc in corpus:
            handle.write(json.dumps(document_to_record(doc), ensure_ascii=False))
            handle.write("\n")


def document_to_record(doc: Document) -> dict:
    record: dict = {"id": doc.id, "text": doc.raw_text}
    if doc.label is not None:
        record["label"] = int(doc.label)
    if doc.legacy_label is not None:
        record["legacy_label"] = int(doc.legacy_label)
    if doc.user_id is not None:
        record["user_id"] = doc.user_id
    if doc.tokens is not None:
        record["tokens"] = list(doc.tokens)
        record["hashtags"] = list(doc.hashtags)
    return record


def _is_link(token: str) -> bool:
    return token.startswith(URL_PREFIXES)


def clean_tokens(raw_tokens: Iterable[str]) -> list[str]:
    """Apply the token pipeline: lowercase, drop links, drop short words.

    Hashtag tokens are exempt from the length filter. The pipeline is
    idempotent: feeding its output back in changes nothing.
    """
    kept = []
    for raw in raw_tokens:
        token = raw.lower()
        if _is_link(token):
            continue
        if not token.startswith("#") and len(token) < MIN_TOKEN_LEN:
            continue
        kept.append(token)
    return kept


def preprocess(doc: Document, config: PreprocessConfig | None = None) -> Document:
    """Tokenize one document from its raw text.

    ``config`` is accepted for signature symmetry with
    :func:`preprocess_corpus`; the per-document pipeline itself has no
    options.
    """
    del config
    tokens = clean_tokens(doc.raw_text.split())
    hashtags = tuple(t for t in tokens if t.startswith("#"))
    return replace(doc, tokens=tuple(tokens), hashtags=hashtags)


def _load_stopwords() -> frozenset[str]:
    text = (
        resources.files("harassnlp").joinpath("data/english_stopwords.txt").read_text()
    )
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


_STOPWORDS: Optional[frozenset[str]] = None


def english_stopwords() -> frozenset[str]:
    global _STOPWORDS
    if _STOPWORDS is None:
        _STOPWORDS = _load_stopwords()
    return _STOPWORDS


def stopword_coverage(doc: Document) -> float:
    """Fraction of raw lowercased non-link tokens that are English stopwords."""
    stopwords = english_stopwords()
    tokens = [t.lower() for t in doc.raw_text.split() if not _is_link(t.lower())]
    if not tokens:
        return 0.0
    hits = sum(1 for t in tokens if t in stopwords)
    return hits / len(tokens)


def preprocess_corpus(
    corpus: Corpus, config: PreprocessConfig | None = None
) -> Corpus:
    """Preprocess every document, applying the optional corpus filters."""
    config = config or PreprocessConfig()
    kept: list[Document] = []
    for doc in corpus:
        if config.english_only and stopword_coverage(doc) < config.english_min_coverage:
            continue
        processed = preprocess(doc)
        if config.max_hashtag_ratio is not None and processed.tokens:
            ratio = len([t for t in processed.tokens if t.startswith("#")]) / len(
                processed.tokens
            )
            if ratio > config.max_hashtag_ratio:
                continue
        kept.append(processed)
    return Corpus(tuple(kept))


def dedupe(corpus: Corpus) -> Corpus:
    """Drop documents whose token sequence repeats an earlier document's."""
    for doc in corpus:
        if not doc.preprocessed:
            raise ValueError(f"document {doc.id!r} is not preprocessed")
    seen: set[tuple[str, ...]] = set()
    kept = []
    for doc in corpus:
        if doc.tokens in seen:
            continue
        seen.add(doc.tokens)  # type: ignore[arg-type]
        kept.append(doc)
    return Corpus(tuple(kept))


def load_gender_lexicon(
    path: str | Path, positive_pole: Gender = Gender.FEMALE
) -> GenderLexicon:
    """Read a header-less ``token,weight`` CSV lexicon."""
    weights: dict[str, float] = {}
    with Path(path).open(encoding="utf-8", newline="") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise IngestError(f"line {line_no}: expected 'token,weight'")
            token, raw_weight = row[0], row[1]
            try:
                weight = float(raw_weight)
            except ValueError as exc:
                raise IngestError(
                    f"line {line_no}: bad weight {raw_weight!r}"
                ) from exc
            weights[token] = weight
    return GenderLexicon(weights=weights, positive_pole=positive_pole)


def infer_gender(doc: Document, lexicon: GenderLexicon) -> tuple[Gender, float]:
    """Score a preprocessed document against the lexicon.

    The score is the sum of weights over all token occurrences found in
    the lexicon. Positive scores map to the lexicon's positive pole,
    negative to the opposite pole, and zero (including no matches at all)
    to UNKNOWN.
    """
    if not doc.preprocessed:
        raise ValueError(f"document {doc.id!r} is not preprocessed")
    score = 0.0
    matched = False
    for token in doc.tokens or ():
        if token in lexicon.weights:
            matched = True
            score += lexicon.weights[token]
    if not matched or score == 0.0:
        return Gender.UNKNOWN, score
    if score > 0:
        return lexicon.positive_pole, score
    opposite = (
        Gender.MALE if lexicon.positive_pole is Gender.FEMALE else Gender.FEMALE
    )
    return opposite, score


def class_histogram(corpus: Corpus) -> dict[Category, int]:
    """Count labeled documents per category."""
    counts = {category: 0 for category in Category}
    for doc in corpus:
        if doc.label is not None:
            counts[doc.label] += 1
    return counts
