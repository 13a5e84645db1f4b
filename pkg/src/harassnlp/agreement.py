"""Fleiss' kappa agreement over a fixed rater panel.

Counts are integers, so the kappa components are computed with exact
rational arithmetic and converted to float at the end; simple textbook
matrices then come out bit-exact (for example 0.25 instead of
0.2499999...).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

from .exceptions import IngestError, UndefinedKappaError


@dataclass(frozen=True)
class RatingMatrix:
    """Item x category rating counts with a constant ``m`` raters per item."""

    counts: np.ndarray  # (n, k) non-negative ints
    categories: tuple[Hashable, ...]
    m: int

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.ndim != 2:
            raise ValueError("counts must be a 2-D matrix")
        if counts.shape[1] != len(self.categories):
            raise ValueError("one column per category required")
        if counts.shape[1] < 2:
            raise ValueError("at least 2 categories required")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        if self.m < 2:
            raise ValueError("at least 2 raters per item required")
        row_sums = counts.sum(axis=1)
        if not (row_sums == self.m).all():
            bad = np.nonzero(row_sums != self.m)[0].tolist()
            raise ValueError(f"rows {bad} do not sum to m={self.m}")

    @property
    def n_items(self) -> int:
        return int(self.counts.shape[0])

    @property
    def n_categories(self) -> int:
        return int(self.counts.shape[1])


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    p_bar: float
    p_e: float
    per_item: tuple[float, ...]


def load_label_records(path: str | Path) -> list[tuple[str, str, int]]:
    """Read an ``item_id,rater_id,category`` CSV (with header)."""
    records: list[tuple[str, str, int]] = []
    with Path(path).open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        needed = {"item_id", "rater_id", "category"}
        if reader.fieldnames is None or set(reader.fieldnames) < needed:
            raise IngestError(
                "label CSV needs an 'item_id,rater_id,category' header"
            )
        for row in reader:
            try:
                category = int(row["category"])
            except (TypeError, ValueError) as exc:
                raise IngestError(
                    f"line {reader.line_num}: bad category {row['category']!r}"
                ) from exc
            records.append((row["item_id"], row["rater_id"], category))
    return records


def label_records_csv(records: Iterable[tuple[str, str, int]]) -> str:
    lines = ["item_id,rater_id,category"]
    lines += [f"{item},{rater},{int(category)}" for item, rater, category in records]
    return "\n".join(lines) + "\n"


def from_labels(
    records: Iterable[tuple[Hashable, Hashable, Hashable]],
    categories: Sequence[Hashable] | None = None,
) -> RatingMatrix:
    """Build a rating matrix from (item, rater, category) records.

    Every item must be rated by the same number of raters and no rater
    may rate an item twice. ``categories`` fixes the column set; by
    default the sorted distinct observed categories are used.
    """
    by_item: dict[Hashable, dict[Hashable, Hashable]] = {}
    for item, rater, category in records:
        ratings = by_item.setdefault(item, {})
        if rater in ratings:
            raise IngestError(f"duplicate rating for item {item!r} by {rater!r}")
        ratings[rater] = category
    if not by_item:
        raise IngestError("no rating records")

    rater_counts = {item: len(ratings) for item, ratings in by_item.items()}
    m = max(rater_counts.values())
    short = sorted((str(i) for i, c in rater_counts.items() if c != m))
    if short:
        raise IngestError(
            f"items with fewer than {m} raters: {', '.join(short)}"
        )

    if categories is None:
        observed = {c for ratings in by_item.values() for c in ratings.values()}
        categories = sorted(observed)  # type: ignore[type-var]
    col = {category: j for j, category in enumerate(categories)}
    counts = np.zeros((len(by_item), len(categories)), dtype=int)
    for i, item in enumerate(by_item):
        for category in by_item[item].values():
            if category not in col:
                raise IngestError(f"category {category!r} not in category set")
            counts[i, col[category]] += 1
    return RatingMatrix(counts=counts, categories=tuple(categories), m=m)


def fleiss_kappa(matrix: RatingMatrix) -> KappaResult:
    """Chance-corrected agreement for the fixed-panel rating matrix.

    Per item, agreement is the fraction of concordant rater pairs; chance
    agreement is the sum of squared category shares.
    """
    counts = np.asarray(matrix.counts, dtype=object)
    n, _ = counts.shape
    m = matrix.m

    per_item = [
        Fraction(int((row * row).sum()) - m, m * (m - 1)) for row in counts
    ]
    p_bar = sum(per_item, Fraction(0)) / n
    totals = counts.sum(axis=0)
    p_e = sum(
        (Fraction(int(t), n * m) ** 2 for t in totals), Fraction(0)
    )

    per_item_f = tuple(float(p) for p in per_item)
    if p_e == 1:
        raise UndefinedKappaError(float(p_bar), float(p_e), per_item_f)
    kappa = (p_bar - p_e) / (1 - p_e)
    return KappaResult(
        kappa=float(kappa),
        p_bar=float(p_bar),
        p_e=float(p_e),
        per_item=per_item_f,
    )


def merge_categories(
    matrix: RatingMatrix, mapping: dict[Hashable, Hashable]
) -> RatingMatrix:
    """Collapse categories by a total old -> new map; row sums are kept."""
    missing = [c for c in matrix.categories if c not in mapping]
    if missing:
        raise ValueError(f"mapping is missing categories: {missing}")
    new_categories = sorted(set(mapping[c] for c in matrix.categories))  # type: ignore[type-var]
    new_col = {category: j for j, category in enumerate(new_categories)}
    counts = np.zeros((matrix.n_items, len(new_categories)), dtype=int)
    for j, old in enumerate(matrix.categories):
        counts[:, new_col[mapping[old]]] += np.asarray(matrix.counts)[:, j]
    return RatingMatrix(
        counts=counts, categories=tuple(new_categories), m=matrix.m
    )
