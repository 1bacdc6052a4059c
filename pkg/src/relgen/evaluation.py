"""Relation aggregation and mean-recall evaluation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from relgen.corpus import RelationRegistry, SceneGraphAnnotation

MAX = "max"
SUM = "sum"
TOP_K = 3


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class PredictionRecord:
    image_id: str
    relations: tuple[tuple[int, float], ...] = ()
    shortfall: bool = False

    @property
    def relation_ids(self) -> frozenset:
        return frozenset(r for r, _ in self.relations)

    def to_json(self) -> str:
        return json.dumps(
            {
                "image_id": self.image_id,
                "relations": [[r, p] for r, p in self.relations],
                "shortfall": self.shortfall,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "PredictionRecord":
        obj = json.loads(line)
        rels = tuple((int(r), float(p)) for r, p in obj["relations"])
        return cls(str(obj["image_id"]), rels, bool(obj["shortfall"]))


def aggregate_relations(
    image_id: str,
    sequences: Iterable,
    triple_relations: Sequence[int],
    relations: RelationRegistry | None = None,
    k: int = TOP_K,
    method: str = MAX,
) -> PredictionRecord:
    """Collapse scored sequences into the top-``k`` distinct relations.

    Every sequence contributes ``exp(logprob)`` to the relation of its
    triple. Under ``max`` a relation scores its best sequence; under ``sum``
    contributions add up and are capped at 1.
    """
    if method not in (MAX, SUM):
        raise ValueError(f"unknown aggregation {method!r}")
    scores: dict[int, float] = {}
    for seq in sequences:
        if seq.triple_id is None:
            raise EvaluationError("cannot aggregate a sequence outside the trie language")
        rel = triple_relations[seq.triple_id]
        if relations is not None and relations.is_excluded(rel):
            raise EvaluationError(f"excluded relation {relations.name(rel)!r} in predictions")
        p = math.exp(seq.logprob)
        if p <= 0:
            continue
        if method == MAX:
            scores[rel] = max(scores.get(rel, 0.0), p)
        else:
            scores[rel] = min(1.0, scores.get(rel, 0.0) + p)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    return PredictionRecord(image_id, tuple(ranked), len(ranked) < k)


@dataclass(frozen=True)
class EvalReport:
    per_class: Mapping[int, float]
    mean_recall: float
    num_images: int
    num_classes: int
    class_names: Mapping[int, str] = field(default_factory=dict)

    @property
    def mean_recall_pct(self) -> float:
        return 100.0 * self.mean_recall

    def to_dict(self) -> dict:
        per_class = {
            self.class_names.get(r, str(r)): recall for r, recall in sorted(self.per_class.items())
        }
        return {
            "mean_recall": round(self.mean_recall_pct, 2),
            "mean_recall_exact": self.mean_recall,
            "per_class_recall": per_class,
            "num_images": self.num_images,
            "num_classes": self.num_classes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def mean_recall(
    predictions: Iterable[PredictionRecord],
    annotations: Iterable[SceneGraphAnnotation],
    relations: RelationRegistry | None = None,
) -> EvalReport:
    """Macro-averaged per-class recall of ground-truth relations in the predictions.

    A class counts only if it occurs in at least one ground-truth set.
    Images without a prediction count as empty predictions.
    """
    gt = {a.image_id: a.ground_truth_relations for a in annotations}
    predicted: dict[str, frozenset] = {}
    for rec in predictions:
        if rec.image_id not in gt:
            raise EvaluationError(f"prediction for unknown image {rec.image_id!r}")
        if rec.image_id in predicted:
            raise EvaluationError(f"duplicate prediction for image {rec.image_id!r}")
        predicted[rec.image_id] = rec.relation_ids

    occurrences: dict[int, int] = {}
    hits: dict[int, int] = {}
    for image_id, rels in gt.items():
        pred = predicted.get(image_id, frozenset())
        for r in rels:
            if relations is not None and relations.is_excluded(r):
                continue
            occurrences[r] = occurrences.get(r, 0) + 1
            if r in pred:
                hits[r] = hits.get(r, 0) + 1
    per_class = {r: hits.get(r, 0) / n for r, n in sorted(occurrences.items())}
    mean = sum(per_class.values()) / len(per_class) if per_class else 0.0
    names = {r: relations.name(r) for r in per_class} if relations is not None else {}
    return EvalReport(per_class, mean, len(gt), len(per_class), names)
