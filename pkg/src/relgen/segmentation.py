"""Panoptic segment maps: RLE ingestion, per-segment areas, subject selection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

ALL = "all"
DEFAULT_TOP_K = 5


class SegmapFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentMap:
    """Per-pixel (class id, instance id) raster; instance 0 is unlabeled."""

    class_ids: np.ndarray
    instance_ids: np.ndarray

    def __post_init__(self):
        if self.class_ids.shape != self.instance_ids.shape or self.class_ids.ndim != 2:
            raise SegmapFormatError("class and instance rasters must be equal 2-D arrays")
        inst = self.instance_ids.ravel()
        cls = self.class_ids.ravel()
        labeled = inst != 0
        pairs = np.unique(np.stack([inst[labeled], cls[labeled]]), axis=1)
        ids, counts = np.unique(pairs[0], return_counts=True)
        if np.any(counts > 1):
            bad = int(ids[counts > 1][0])
            raise SegmapFormatError(f"instance {bad} carries more than one class id")

    @property
    def height(self) -> int:
        return self.class_ids.shape[0]

    @property
    def width(self) -> int:
        return self.class_ids.shape[1]

    def mask(self, instance_id: int) -> np.ndarray:
        return self.instance_ids == instance_id

    def __eq__(self, other):
        if not isinstance(other, SegmentMap):
            return NotImplemented
        return np.array_equal(self.class_ids, other.class_ids) and np.array_equal(
            self.instance_ids, other.instance_ids
        )

    __hash__ = None


def decode_runs(width: int, height: int, runs: Sequence[Sequence[int]]) -> SegmentMap:
    runs = np.asarray(runs, dtype=np.int64).reshape(-1, 3)
    if width < 1 or height < 1:
        raise SegmapFormatError("width and height must be positive")
    if np.any(runs[:, 0] < 1):
        raise SegmapFormatError("run lengths must be positive")
    if np.any(runs[:, 1:] < 0):
        raise SegmapFormatError("class and instance ids must be non-negative")
    total = int(runs[:, 0].sum())
    if total != width * height:
        raise SegmapFormatError(f"runs cover {total} pixels, expected {width * height}")
    cls = np.repeat(runs[:, 1], runs[:, 0]).reshape(height, width)
    inst = np.repeat(runs[:, 2], runs[:, 0]).reshape(height, width)
    return SegmentMap(cls, inst)


def encode_runs(segmap: SegmentMap) -> list[list[int]]:
    """Row-major [length, class_id, instance_id] runs, adjacent equal pairs merged."""
    cls = segmap.class_ids.ravel()
    inst = segmap.instance_ids.ravel()
    change = np.flatnonzero((cls[1:] != cls[:-1]) | (inst[1:] != inst[:-1])) + 1
    starts = np.concatenate([[0], change])
    lengths = np.diff(np.concatenate([starts, [cls.size]]))
    return [[int(n), int(cls[s]), int(inst[s])] for s, n in zip(starts, lengths)]


def load_segmap(path) -> SegmentMap:
    """Read ``{"width", "height", "runs": [[len, class_id, instance_id], ...]}``."""
    try:
        data = json.loads(Path(path).read_text())
        width, height, runs = data["width"], data["height"], data["runs"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SegmapFormatError(f"{path}: not a segment-map file ({exc})") from exc
    return decode_runs(int(width), int(height), runs)


def segmap_to_json(segmap: SegmentMap) -> str:
    return json.dumps(
        {"width": segmap.width, "height": segmap.height, "runs": encode_runs(segmap)},
        separators=(",", ":"),
    )


def save_segmap(segmap: SegmentMap, path) -> None:
    Path(path).write_text(segmap_to_json(segmap))


@dataclass(frozen=True)
class Segment:
    instance_id: int
    class_id: int
    pixel_count: int
    area_ratio: float


def extract_segments(segmap: SegmentMap) -> list[Segment]:
    """One segment per labeled instance, ascending instance id."""
    inst = segmap.instance_ids.ravel()
    cls = segmap.class_ids.ravel()
    total = inst.size
    ids, first, counts = np.unique(inst, return_index=True, return_counts=True)
    return [
        Segment(int(i), int(cls[f]), int(n), int(n) / total)
        for i, f, n in zip(ids, first, counts)
        if i != 0
    ]


def select_subjects(segments: Sequence[Segment], k: int | str = DEFAULT_TOP_K) -> list[Segment]:
    """Largest segments first (ties: lower instance id), truncated to ``k``."""
    ranked = sorted(segments, key=lambda s: (-s.pixel_count, s.instance_id))
    if k == ALL:
        return ranked
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer or {ALL!r}, got {k!r}")
    return ranked[:k]


def candidate_pairs(
    subjects: Sequence[Segment],
    segments: Sequence[Segment],
    objects_from_subjects: bool = False,
) -> list[tuple[Segment, Segment]]:
    """Directed (subject, object) pairs, ordered by subject rank then object id.

    Objects range over every segment, or only over the selected subjects when
    ``objects_from_subjects`` is set.
    """
    pool = subjects if objects_from_subjects else segments
    objects = sorted(pool, key=lambda s: s.instance_id)
    return [
        (subj, obj)
        for subj in subjects
        for obj in objects
        if obj.instance_id != subj.instance_id
    ]
