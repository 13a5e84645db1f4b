"""Gold-question trust scoring and trust-weighted label aggregation.

Raters qualify on gold questions: the most recent 8 gold answers set the
batch size (8 correct -> 20, 7 -> 15, 6 -> 10, 5 or fewer -> excluded).
The reported trust score is the lifetime fraction of correct gold
answers. Aggregated labels carry a confidence equal to the winning
category's share of the total trust mass.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus
from .exceptions import IngestError, ToolkitError
from .taxonomy import Category

GOLD_WINDOW = 8
PROBATION_BATCH = 10
DEFAULT_GOLD_RATIO = 0.08


@dataclass(frozen=True)
class GoldSet:
    """Items with known true labels, used to score raters."""

    entries: dict[str, Category]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("gold set must be non-empty")

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def load_gold_csv(path: str | Path) -> GoldSet:
    """Read an ``item_id,category`` CSV (with header) into a gold set."""
    entries: dict[str, Category] = {}
    with Path(path).open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or set(reader.fieldnames) < {
            "item_id",
            "category",
        }:
            raise IngestError("gold CSV needs an 'item_id,category' header")
        for row in reader:
            item_id = row["item_id"]
            if item_id in entries:
                raise IngestError(f"line {reader.line_num}: duplicate gold item {item_id!r}")
            try:
                entries[item_id] = Category(int(row["category"]))
            except (TypeError, ValueError) as exc:
                raise IngestError(
                    f"line {reader.line_num}: bad category {row['category']!r}"
                ) from exc
    return GoldSet(entries=entries)


def gold_count_for(batch_size: int, gold_ratio: float = DEFAULT_GOLD_RATIO) -> int:
    """Gold questions interleaved into a batch: round(size * ratio), >= 1."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if not 0 < gold_ratio < 1:
        raise ValueError("gold ratio must be in (0, 1)")
    return max(1, int(np.floor(batch_size * gold_ratio + 0.5)))


def batch_policy(gold_correct_of_8: int) -> int:
    """Batch size earned by the last-8 gold window; 0 means excluded."""
    if not 0 <= gold_correct_of_8 <= GOLD_WINDOW:
        raise ValueError("gold_correct_of_8 must be between 0 and 8")
    if gold_correct_of_8 == 8:
        return 20
    if gold_correct_of_8 == 7:
        return 15
    if gold_correct_of_8 == 6:
        return 10
    return 0


@dataclass(frozen=True)
class RaterState:
    """Gold bookkeeping for one rater.

    ``recent`` is the rolling window of the last 8 gold outcomes. Until 8
    gold questions have been answered the rater stays in probation
    (batch size 10) and cannot be excluded.
    """

    rater_id: str
    gold_answered: int = 0
    gold_correct: int = 0
    recent: tuple[bool, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.gold_correct > self.gold_answered:
            raise ValueError("gold_correct cannot exceed gold_answered")
        if len(self.recent) > GOLD_WINDOW:
            raise ValueError(f"recent window cannot exceed {GOLD_WINDOW}")

    @property
    def trust(self) -> Optional[float]:
        """Lifetime gold accuracy; None before any gold answer."""
        if self.gold_answered == 0:
            return None
        return self.gold_correct / self.gold_answered

    @property
    def batch_size(self) -> int:
        if len(self.recent) < GOLD_WINDOW:
            return PROBATION_BATCH
        return batch_policy(sum(self.recent))

    @property
    def excluded(self) -> bool:
        return self.batch_size == 0


def update_trust(
    state: RaterState,
    answers: Sequence[tuple[str, Category]],
    gold: GoldSet,
) -> RaterState:
    """Score a rater's gold answers and return the updated state."""
    outcomes = []
    for item_id, category in answers:
        if item_id not in gold:
            raise ToolkitError(f"item {item_id!r} is not a gold question")
        outcomes.append(gold.entries[item_id] == Category(category))
    recent = (state.recent + tuple(outcomes))[-GOLD_WINDOW:]
    return replace(
        state,
        gold_answered=state.gold_answered + len(outcomes),
        gold_correct=state.gold_correct + sum(outcomes),
        recent=recent,
    )


@dataclass(frozen=True)
class AggregatedLabel:
    item_id: str
    category: Category
    confidence: float
    votes: dict[Category, float]


def aggregate(
    item_id: str,
    labels: Iterable[tuple[Hashable, Category]],
    trusts: Mapping[Hashable, float],
) -> AggregatedLabel:
    """Trust-weighted majority vote for one item.

    Raters missing from ``trusts`` are treated as excluded and skipped.
    The winner is the category with the largest trust mass (ties go to
    the lowest code); confidence is its share of the total mass.
    """
    votes: dict[Category, float] = {}
    total = 0.0
    for rater, category in labels:
        trust = trusts.get(rater)
        if trust is None:
            continue
        category = Category(category)
        votes[category] = votes.get(category, 0.0) + trust
        total += trust
    if not votes or total <= 0.0:
        raise ToolkitError(
            f"item {item_id!r} has no labels from trusted raters"
        )
    winner = min(
        votes, key=lambda category: (-votes[category], int(category))
    )
    return AggregatedLabel(
        item_id=item_id,
        category=winner,
        confidence=votes[winner] / total,
        votes=votes,
    )


@dataclass(frozen=True)
class StudyOutcome:
    """Everything a simulated labeling run produces."""

    labels: tuple[AggregatedLabel, ...]
    rater_states: tuple[RaterState, ...]
    histogram: dict[Category, tuple[int, float]]  # count, mean confidence
    raw_labels: tuple[tuple[str, str, Category], ...]  # item, rater, category


def _histogram(labels: Sequence[AggregatedLabel]) -> dict[Category, tuple[int, float]]:
    table: dict[Category, tuple[int, float]] = {}
    for category in Category:
        members = [lab.confidence for lab in labels if lab.category == category]
        mean_conf = float(np.mean(members)) if members else 0.0
        table[category] = (len(members), mean_conf)
    return table


def simulate_study(
    corpus: Corpus,
    gold: GoldSet,
    rater_profiles: Sequence[tuple[float, int]],
    seed: int,
    raters_per_item: int = 3,
    gold_ratio: float = DEFAULT_GOLD_RATIO,
) -> StudyOutcome:
    """Run a synthetic labeling study end to end.

    Each (accuracy, count) profile spawns ``count`` raters who answer any
    item correctly with probability ``accuracy`` and otherwise pick a
    uniform wrong category. Raters first answer 8 gold questions to
    establish trust, then label non-gold items until every item has
    ``raters_per_item`` labels (or all raters are excluded). Gold
    questions are interleaved into working batches at ``gold_ratio``.
    Every labeled document needs a true ``label`` to simulate against.
    """
    if not 0 < gold_ratio < 1:
        raise ValueError("gold ratio must be in (0, 1)")
    missing_gold = [g for g in gold.entries if g not in {d.id for d in corpus}]
    if missing_gold:
        raise ValueError(f"gold items not in corpus: {missing_gold[:5]}")

    rng = np.random.default_rng(seed)
    categories = list(Category)

    def answer(true_label: Category, accuracy: float) -> Category:
        if rng.random() < accuracy:
            return true_label
        wrong = [c for c in categories if c != true_label]
        return wrong[int(rng.integers(len(wrong)))]

    raters: list[tuple[str, float]] = []
    for profile_no, (accuracy, count) in enumerate(rater_profiles):
        for i in range(count):
            raters.append((f"sim-{profile_no}-{i}", accuracy))

    states = {rid: RaterState(rater_id=rid) for rid, _ in raters}
    gold_ids = sorted(gold.entries)
    work_items = [d for d in corpus if d.id not in gold and d.label is not None]
    needed = {d.id: raters_per_item for d in work_items}
    labels_by_item: dict[str, list[tuple[str, Category]]] = {
        d.id: [] for d in work_items
    }
    raw: list[tuple[str, str, Category]] = []
    true_label = {d.id: d.label for d in corpus if d.label is not None}

    labeled_by: dict[str, set[str]] = {rid: set() for rid, _ in raters}

    # Qualification round: 8 gold questions each.
    for rid, accuracy in raters:
        picks = rng.choice(
            len(gold_ids), size=min(GOLD_WINDOW, len(gold_ids)), replace=False
        )
        quiz = [gold_ids[int(i)] for i in picks]
        labeled_by[rid].update(quiz)
        answers = [(g, answer(gold.entries[g], accuracy)) for g in quiz]
        states[rid] = update_trust(states[rid], answers, gold)

    # Work rounds: deal batches until items are covered or raters run out.
    progress = True
    while progress and any(n > 0 for n in needed.values()):
        progress = False
        for rid, accuracy in raters:
            state = states[rid]
            if state.excluded or state.batch_size == 0:
                continue
            pending = [
                d
                for d in work_items
                if needed[d.id] > 0 and d.id not in labeled_by[rid]
            ]
            if not pending:
                continue
            size = state.batch_size
            gold_needed = gold_count_for(size, gold_ratio)
            gold_pool = [g for g in gold_ids if g not in labeled_by[rid]]
            batch_gold = gold_pool[:gold_needed]
            batch_work = pending[: size - len(batch_gold)]
            gold_answers = []
            for g in batch_gold:
                labeled_by[rid].add(g)
                gold_answers.append((g, answer(gold.entries[g], accuracy)))
            for doc in batch_work:
                labeled_by[rid].add(doc.id)
                vote = answer(true_label[doc.id], accuracy)
                labels_by_item[doc.id].append((rid, vote))
                raw.append((doc.id, rid, vote))
                needed[doc.id] -= 1
            if gold_answers:
                states[rid] = update_trust(states[rid], gold_answers, gold)
            progress = progress or bool(batch_work)

    trusts = {
        rid: state.trust
        for rid, state in states.items()
        if state.trust is not None and not state.excluded
    }
    aggregated = []
    for doc in work_items:
        votes = [(r, c) for r, c in labels_by_item[doc.id] if r in trusts]
        if votes:
            aggregated.append(aggregate(doc.id, votes, trusts))

    return StudyOutcome(
        labels=tuple(aggregated),
        rater_states=tuple(states[rid] for rid, _ in raters),
        histogram=_histogram(aggregated),
        raw_labels=tuple(raw),
    )
