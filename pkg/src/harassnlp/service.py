"""HTTP/JSON annotation service for running a labeling study.

State is an in-memory fold over a single append-only JSONL event log
(rater registrations, batch assignments, label events). The same apply()
path handles live requests and log replay, so a restarted server
reconstructs exactly the state it had. Batch composition is seeded by
(study seed, rater index, batch ordinal), gold questions are interleaved
at the configured ratio, and gold identity never appears in a batch
payload.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import agreement, crowd
from .corpus import Corpus, ingest
from .exceptions import ToolkitError, UndefinedKappaError
from .instructions import INSTRUCTIONS
from .taxonomy import Category


@dataclass(frozen=True)
class StudyConfig:
    """Study setup; ``instructions`` defaults to the five-category text."""

    corpus_path: str
    gold_path: str
    log_path: str
    gold_ratio: float = crowd.DEFAULT_GOLD_RATIO
    probation_batch: int = crowd.PROBATION_BATCH
    seed: int = 0
    target_raters_per_item: int = 3

    @classmethod
    def from_file(cls, path: str | Path) -> "StudyConfig":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {
            "corpus": "corpus_path",
            "gold": "gold_path",
            "log": "log_path",
            "gold_ratio": "gold_ratio",
            "probation_batch": "probation_batch",
            "seed": "seed",
            "target_raters_per_item": "target_raters_per_item",
        }
        unknown = set(payload) - set(known)
        if unknown:
            raise ToolkitError(f"unknown study config keys: {sorted(unknown)}")
        kwargs = {known[k]: v for k, v in payload.items()}
        missing = {"corpus_path", "gold_path", "log_path"} - set(kwargs)
        if missing:
            raise ToolkitError(f"study config missing keys: {sorted(missing)}")
        return cls(**kwargs)


@dataclass
class RaterRecord:
    rater_id: str
    name: str
    index: int
    state: crowd.RaterState
    batch_index: int = 0
    completed: dict[str, Category] = field(default_factory=dict)
    progress: dict[str, Category] = field(default_factory=dict)
    outstanding: Optional[tuple[str, ...]] = None

    @property
    def labeled(self) -> set[str]:
        return set(self.completed) | set(self.progress)


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class Study:
    """Event-sourced study state. All mutations flow through apply()."""

    def __init__(self, config: StudyConfig):
        self.config = config
        self.corpus: Corpus = ingest(config.corpus_path)
        self.gold = crowd.load_gold_csv(config.gold_path)
        missing = [g for g in self.gold.entries if g not in {d.id for d in self.corpus}]
        if missing:
            raise ToolkitError(f"gold items not in corpus: {missing[:5]}")
        self.text_of = {d.id: d.raw_text for d in self.corpus}
        self.work_ids = [d.id for d in self.corpus if d.id not in self.gold]
        self.gold_ids = [d.id for d in self.corpus if d.id in self.gold]
        self.raters: dict[str, RaterRecord] = {}
        self.lock = threading.RLock()
        self.log_path = Path(config.log_path)
        self._log_handle = None

    # ------------------------------------------------------------------
    # event log plumbing
    # ------------------------------------------------------------------

    def replay(self) -> int:
        """Fold an existing log into state; returns the event count."""
        count = 0
        if self.log_path.exists():
            with self.log_path.open(encoding="utf-8") as handle:
                for line in handle:
                    if line.strip():
                        self.apply(json.loads(line))
                        count += 1
        return count

    def _append(self, event: dict) -> None:
        if self._log_handle is None:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_handle = self.log_path.open("a", encoding="utf-8")
        self._log_handle.write(json.dumps(event, ensure_ascii=False) + "\n")
        self._log_handle.flush()

    def record(self, event: dict) -> dict:
        """Apply an event to state and persist it."""
        result = self.apply(event)
        self._append(event)
        return result

    # ------------------------------------------------------------------
    # state transitions
    # ------------------------------------------------------------------

    def apply(self, event: dict) -> dict:
        kind = event.get("event")
        if kind == "register":
            return self._apply_register(event)
        if kind == "batch":
            return self._apply_batch(event)
        if kind == "label":
            return self._apply_label(event)
        raise ToolkitError(f"unknown event kind: {kind!r}")

    def _apply_register(self, event: dict) -> dict:
        rater_id = event["rater_id"]
        self.raters[rater_id] = RaterRecord(
            rater_id=rater_id,
            name=event["name"],
            index=len(self.raters),
            state=crowd.RaterState(rater_id=rater_id),
        )
        return {"rater_id": rater_id}

    def _apply_batch(self, event: dict) -> dict:
        rater = self.raters[event["rater_id"]]
        rater.outstanding = tuple(event["items"])
        return {"items": event["items"]}

    def _apply_label(self, event: dict) -> dict:
        rater = self.raters[event["rater_id"]]
        item_id = event["item_id"]
        rater.progress[item_id] = Category(event["category"])
        outcome: dict = {"batch_complete": False, "gold_results": None}
        if rater.outstanding and set(rater.outstanding) <= rater.labeled:
            outcome = self._complete_batch(rater)
        return outcome

    def _complete_batch(self, rater: RaterRecord) -> dict:
        gold_answers = [
            (item, category)
            for item, category in rater.progress.items()
            if item in self.gold
        ]
        gold_results = [
            {
                "item_id": item,
                "category": int(category),
                "correct": self.gold.entries[item] == category,
                "true_category": int(self.gold.entries[item]),
            }
            for item, category in gold_answers
        ]
        if gold_answers:
            rater.state = crowd.update_trust(rater.state, gold_answers, self.gold)
        rater.completed.update(rater.progress)
        rater.progress = {}
        rater.outstanding = None
        rater.batch_index += 1
        return {"batch_complete": True, "gold_results": gold_results}

    # ------------------------------------------------------------------
    # request handlers (validation + event construction)
    # ------------------------------------------------------------------

    def register(self, name: str) -> dict:
        with self.lock:
            if not name or not name.strip():
                raise ApiError(400, "rater name must be non-empty")
            rater_id = f"r{len(self.raters) + 1}"
            return self.record(
                {
                    "event": "register",
                    "ts": time.time(),
                    "rater_id": rater_id,
                    "name": name.strip(),
                }
            )

    def _label_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rater in self.raters.values():
            for item in rater.completed:
                counts[item] = counts.get(item, 0) + 1
        return counts

    def _compose_batch(self, rater: RaterRecord) -> Optional[list[str]]:
        """Seeded batch: unseen work items plus interleaved unseen gold."""
        size = rater.state.batch_size
        labeled = rater.labeled
        counts = self._label_counts()
        work_pool = [
            i
            for i in self.work_ids
            if i not in labeled and counts.get(i, 0) < self.config.target_raters_per_item
        ]
        if not work_pool:
            return None
        gold_pool = [g for g in self.gold_ids if g not in labeled]
        gold_n = min(
            crowd.gold_count_for(size, self.config.gold_ratio), len(gold_pool)
        )
        rng = np.random.default_rng(
            np.random.SeedSequence(
                [self.config.seed, rater.index, rater.batch_index]
            )
        )
        picks = rng.permutation(len(gold_pool))[:gold_n]
        chosen_gold = [gold_pool[int(i)] for i in picks]
        items = work_pool[: size - gold_n]
        for gold_item in chosen_gold:
            position = int(rng.integers(0, len(items) + 1))
            items.insert(position, gold_item)
        return items

    def get_batch(self, rater_id: str) -> dict:
        with self.lock:
            rater = self.raters.get(rater_id)
            if rater is None:
                raise ApiError(404, f"unknown rater: {rater_id}")
            if rater.state.excluded:
                raise ApiError(403, "rater is excluded from the study")
            if rater.outstanding is None:
                items = self._compose_batch(rater)
                if items is None:
                    raise ApiError(204, "corpus exhausted")
                self.record(
                    {
                        "event": "batch",
                        "ts": time.time(),
                        "rater_id": rater_id,
                        "batch_index": rater.batch_index,
                        "items": items,
                    }
                )
            pending = [i for i in rater.outstanding if i not in rater.progress]
            return {
                "batch_id": f"{rater_id}-b{rater.batch_index}",
                "rater_id": rater_id,
                "items": [
                    {"item_id": i, "text": self.text_of[i]} for i in pending
                ],
                "batch_size": len(rater.outstanding),
            }

    def submit_labels(self, rater_id: str, labels: list[dict]) -> dict:
        with self.lock:
            rater = self.raters.get(rater_id)
            if rater is None:
                raise ApiError(404, f"unknown rater: {rater_id}")
            if not labels:
                raise ApiError(400, "no labels submitted")
            seen: set[str] = set()
            for label in labels:
                item_id = label.get("item_id")
                try:
                    Category(int(label.get("category")))
                except (TypeError, ValueError):
                    raise ApiError(
                        400, f"unknown category code: {label.get('category')!r}"
                    )
                if item_id in rater.labeled or item_id in seen:
                    raise ApiError(409, f"item already labeled: {item_id}")
                if rater.outstanding is None or item_id not in rater.outstanding:
                    raise ApiError(
                        400, f"item not in the outstanding batch: {item_id}"
                    )
                seen.add(item_id)
            outcome: dict = {"batch_complete": False, "gold_results": None}
            for label in labels:
                outcome = self.record(
                    {
                        "event": "label",
                        "ts": time.time(),
                        "rater_id": rater_id,
                        "item_id": label["item_id"],
                        "category": int(label["category"]),
                        "was_gold": label["item_id"] in self.gold,
                        "correct": (
                            self.gold.entries[label["item_id"]]
                            == Category(int(label["category"]))
                            if label["item_id"] in self.gold
                            else None
                        ),
                    }
                )
            return {**self.trust_summary(rater), **outcome}

    def trust_summary(self, rater: RaterRecord) -> dict:
        state = rater.state
        return {
            "rater_id": rater.rater_id,
            "name": rater.name,
            "trust": state.trust,
            "gold_answered": state.gold_answered,
            "gold_correct": state.gold_correct,
            "batch_size": state.batch_size,
            "excluded": state.excluded,
        }

    # ------------------------------------------------------------------
    # read models
    # ------------------------------------------------------------------

    def instructions_payload(self) -> dict:
        return {
            "categories": [
                {
                    "code": card.code,
                    "name": card.name,
                    "definition": card.definition,
                    "hint": card.hint,
                    "examples": list(card.examples),
                }
                for card in INSTRUCTIONS.values()
            ]
        }

    def _trusted_label_records(self) -> list[tuple[str, str, Category]]:
        records = []
        for rater in self.raters.values():
            if rater.state.excluded or rater.state.trust is None:
                continue
            for item, category in rater.completed.items():
                records.append((item, rater.rater_id, category))
        return records

    def kappa_subset(
        self,
    ) -> tuple[list[tuple[str, str, Category]], Optional[int]]:
        """Label records restricted to items with the modal rater count >= 2."""
        records = self._trusted_label_records()
        per_item: dict[str, int] = {}
        for item, _, _ in records:
            per_item[item] = per_item.get(item, 0) + 1
        eligible_counts = [c for c in per_item.values() if c >= 2]
        if not eligible_counts:
            return [], None
        freq: dict[int, int] = {}
        for c in eligible_counts:
            freq[c] = freq.get(c, 0) + 1
        modal = max(freq, key=lambda c: (freq[c], c))
        subset = [r for r in records if per_item[r[0]] == modal]
        return subset, modal

    def stats(self) -> dict:
        with self.lock:
            records = self._trusted_label_records()
            # zero-trust raters stay in the study (and in kappa) but carry
            # no weight, so they cannot anchor an aggregated label
            trusts = {
                r.rater_id: r.state.trust
                for r in self.raters.values()
                if not r.state.excluded
                and r.state.trust is not None
                and r.state.trust > 0
            }
            by_item: dict[str, list[tuple[str, Category]]] = {}
            for item, rater_id, category in records:
                if item in self.gold:
                    continue  # gold labels score raters, not the dataset
                by_item.setdefault(item, []).append((rater_id, category))
            aggregated = [
                crowd.aggregate(item, votes, trusts)
                for item, votes in by_item.items()
                if any(rater in trusts for rater, _ in votes)
            ]
            histogram = []
            for category in Category:
                member_confidences = [
                    a.confidence for a in aggregated if a.category == category
                ]
                histogram.append(
                    {
                        "category": int(category),
                        "name": INSTRUCTIONS[category].name,
                        "count": len(member_confidences),
                        "mean_confidence": (
                            float(np.mean(member_confidences))
                            if member_confidences
                            else None
                        ),
                    }
                )
            subset, modal = self.kappa_subset()
            kappa_value = None
            if subset:
                matrix = agreement.from_labels(
                    [(i, r, int(c)) for i, r, c in subset],
                    categories=tuple(int(c) for c in Category),
                )
                try:
                    kappa_value = agreement.fleiss_kappa(matrix).kappa
                except UndefinedKappaError:
                    kappa_value = None
            return {
                "histogram": histogram,
                "raters": [
                    self.trust_summary(r) for r in self.raters.values()
                ],
                "kappa": kappa_value,
                "kappa_m": modal,
                "kappa_items": len({i for i, _, _ in subset}),
                "total_labels": len(records),
            }

    def export_labels_csv(self, subset: str = "kappa") -> str:
        with self.lock:
            if subset == "kappa":
                records, _ = self.kappa_subset()
            elif subset == "all":
                records = self._trusted_label_records()
            else:
                raise ApiError(400, f"unknown subset: {subset!r}")
            return agreement.label_records_csv(
                (item, rater, int(category)) for item, rater, category in records
            )

    def snapshot(self) -> dict:
        """Comparable view of the full mutable state (for restart checks)."""
        with self.lock:
            return {
                "raters": {
                    rid: {
                        "name": r.name,
                        "index": r.index,
                        "batch_index": r.batch_index,
                        "gold_answered": r.state.gold_answered,
                        "gold_correct": r.state.gold_correct,
                        "recent": list(r.state.recent),
                        "completed": {k: int(v) for k, v in r.completed.items()},
                        "progress": {k: int(v) for k, v in r.progress.items()},
                        "outstanding": (
                            list(r.outstanding) if r.outstanding else None
                        ),
                    }
                    for rid, r in self.raters.items()
                }
            }

    def close(self) -> None:
        if self._log_handle is not None:
            self._log_handle.close()
            self._log_handle = None


class RegisterBody(BaseModel):
    name: str = ""


class LabelItem(BaseModel):
    item_id: str
    category: int


class LabelsBody(BaseModel):
    rater_id: str
    labels: list[LabelItem]


def create_app(study: Study, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="annotation service")
    app.state.study = study

    @app.exception_handler(ApiError)
    async def api_error_handler(_, exc: ApiError):
        if exc.status == 204:
            return Response(status_code=204)
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.post("/api/raters", status_code=201)
    def register(body: RegisterBody):
        return study.register(body.name)

    @app.get("/api/instructions")
    def instructions():
        return study.instructions_payload()

    @app.get("/api/raters/{rater_id}/batch")
    def batch(rater_id: str):
        return study.get_batch(rater_id)

    @app.post("/api/labels")
    def labels(body: LabelsBody):
        return study.submit_labels(
            body.rater_id,
            [{"item_id": l.item_id, "category": l.category} for l in body.labels],
        )

    @app.get("/api/stats")
    def stats():
        return study.stats()

    @app.get("/api/export/labels")
    def export(subset: str = "kappa"):
        return Response(
            content=study.export_labels_csv(subset), media_type="text/csv"
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def load_study(config_path: str | Path) -> Study:
    """Build a study from a config file, replaying any existing log."""
    study = Study(StudyConfig.from_file(config_path))
    study.replay()
    return study
