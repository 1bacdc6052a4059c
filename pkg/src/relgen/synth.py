"""Seeded synthetic scene dataset.

Every image is a row of vertical strips (one panoptic segment each, distinct
widths, so area ranking has no ties) over an unlabeled remainder. Ground-truth
subjects are always among the three largest segments. Pair-level triple
weights put most mass on the ground-truth triples, so the restricted pipeline
with the weight scorer recovers every ground-truth relation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from relgen.corpus import EXCLUDED_RELATIONS, build_corpus
from relgen.highlight import RgbImage, save_ppm
from relgen.scoring import pair_key
from relgen.segmentation import SegmentMap, save_segmap

OBJECTS = (
    "person", "dog", "cat", "horse", "skateboard", "pizza", "table", "chair",
    "baseball bat", "frisbee", "car", "train", "bench", "umbrella", "tree",
    "road", "grass", "water",
)
RELATIONS = (
    "holding", "riding", "eating", "looking at", "sitting on", "standing on",
    "driving on", "walking on", "playing", "carrying", "parked on", "lying on",
    "hanging from", "throwing", "kicking", "feeding",
)

WIDTH = 48
HEIGHT = 24
GT_WEIGHT = 8.0
DISTRACTOR_WEIGHT = 1.0


@dataclass(frozen=True)
class SynthSizes:
    images: int = 32
    min_segments: int = 4
    max_segments: int = 7
    distractor_triples: int = 40
    distractors_per_pair: int = 3


def _class_colour(class_id: int) -> np.ndarray:
    # spread hues deterministically; keeps strips visually distinct
    r = (class_id * 97 + 40) % 256
    g = (class_id * 57 + 90) % 256
    b = (class_id * 31 + 150) % 256
    return np.array([r, g, b], dtype=np.int64)


def _strip_widths(rng: np.random.Generator, n: int) -> list[int]:
    while True:
        widths = rng.choice(np.arange(2, 13), size=n, replace=False)
        if widths.sum() <= WIDTH:
            return [int(w) for w in widths]


def _make_scene(rng: np.random.Generator, sizes: SynthSizes):
    n = int(rng.integers(sizes.min_segments, sizes.max_segments + 1))
    widths = _strip_widths(rng, n)
    classes = [int(c) for c in rng.integers(0, len(OBJECTS), size=n)]
    instance_ids = [int(i) for i in rng.permutation(np.arange(1, n + 1))]
    order = rng.permutation(n)

    class_raster = np.zeros((HEIGHT, WIDTH), dtype=np.int64)
    inst_raster = np.zeros((HEIGHT, WIDTH), dtype=np.int64)
    pixels = np.full((HEIGHT, WIDTH, 3), 128, dtype=np.int64)
    x = 0
    for j in order:
        w = widths[j]
        class_raster[:, x : x + w] = classes[j] + 1  # class 0 reserved for unlabeled
        inst_raster[:, x : x + w] = instance_ids[j]
        pixels[:, x : x + w] = _class_colour(classes[j])
        x += w
    pixels += rng.integers(-24, 25, size=pixels.shape)
    image = RgbImage(np.clip(pixels, 0, 255).astype(np.uint8))
    segmap = SegmentMap(class_raster, inst_raster)

    # rank by width (= area); widths are distinct
    ranked = sorted(range(n), key=lambda j: -widths[j])
    n_gt = int(rng.integers(1, 4))
    relations = [int(r) for r in rng.choice(len(RELATIONS), size=n_gt, replace=False)]
    gt = []
    for rel in relations:
        subj = ranked[int(rng.integers(0, 3))]
        obj = int(rng.choice([j for j in range(n) if j != subj]))
        gt.append((subj, rel, obj))
    segs = [(instance_ids[j], classes[j]) for j in range(n)]
    return image, segmap, segs, gt


def generate(out_dir, seed: int = 42, sizes: SynthSizes = SynthSizes()) -> dict:
    """Write a synthetic dataset under ``out_dir``; returns a summary dict."""
    if sizes.images < 1:
        raise ValueError("empty dataset: images must be >= 1")
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "segmaps").mkdir(parents=True, exist_ok=True)
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(1,))
    rng = np.random.default_rng(seq)

    scenes = []
    triple_lines: list[tuple[str, str, str]] = []
    for i in range(sizes.images):
        image_id = f"img_{i:03d}"
        image, segmap, segs, gt = _make_scene(rng, sizes)
        save_ppm(image, out / "images" / f"{image_id}.ppm")
        save_segmap(segmap, out / "segmaps" / f"{image_id}.json")
        gt_named = []
        for subj, rel, obj in gt:
            (s_iid, s_cls), (o_iid, o_cls) = segs[subj], segs[obj]
            triple_lines.append((OBJECTS[s_cls], RELATIONS[rel], OBJECTS[o_cls]))
            gt_named.append((s_iid, RELATIONS[rel], o_iid, OBJECTS[s_cls], OBJECTS[o_cls]))
        scenes.append((image_id, gt_named))

    for _ in range(sizes.distractor_triples):
        h, t = rng.integers(0, len(OBJECTS), size=2)
        r = rng.integers(0, len(RELATIONS))
        triple_lines.append((OBJECTS[h], RELATIONS[r], OBJECTS[t]))
    # a couple of ambiguous-relation lines; the loader drops them
    triple_lines.append(("person", EXCLUDED_RELATIONS[3], "table"))
    triple_lines.append(("dog", EXCLUDED_RELATIONS[1], "car"))

    corpus = build_corpus(triple_lines)
    ids = {corpus.text(t): t.triple_id for t in corpus.triples}

    weights: dict[str, dict[str, float]] = {}
    manifest = []
    for image_id, gt_named in scenes:
        pairs: dict[tuple[int, int], set[int]] = {}
        for s_iid, rel, o_iid, s_name, o_name in gt_named:
            pairs.setdefault((s_iid, o_iid), set()).add(ids[f"{s_name} {rel} {o_name}"])
        for (s_iid, o_iid), gt_ids in sorted(pairs.items()):
            table = {str(t): GT_WEIGHT for t in sorted(gt_ids)}
            others = [t for t in range(len(corpus.triples)) if t not in gt_ids]
            for t in rng.choice(others, size=sizes.distractors_per_pair, replace=False):
                table[str(int(t))] = DISTRACTOR_WEIGHT
            weights[pair_key(image_id, s_iid, o_iid)] = dict(sorted(table.items(), key=lambda kv: int(kv[0])))
        manifest.append({
            "image_id": image_id,
            "image": f"images/{image_id}.ppm",
            "segmap": f"segmaps/{image_id}.json",
            "gt_relations": sorted({g[1] for g in gt_named}),
            "gt_triples": [[s, r, o] for s, r, o, _, _ in gt_named],
        })

    (out / "triples.jsonl").write_text(
        "".join(json.dumps({"head": h, "relation": r, "tail": t}) + "\n" for h, r, t in triple_lines)
    )
    (out / "dataset.jsonl").write_text("".join(json.dumps(m) + "\n" for m in manifest))
    (out / "weights.json").write_text(json.dumps(weights, indent=1, sort_keys=True) + "\n")
    (out / "relgen.cfg").write_text(
        "# generated by relgen synth\n"
        "dataset = dataset.jsonl\n"
        "triples = triples.jsonl\n"
        "weights = weights.json\n"
        f"seed = {seed}\n"
    )
    return {
        "out": str(out),
        "seed": seed,
        "images": sizes.images,
        "triples": len(corpus.triples),
        "dropped": corpus.dropped,
        "weighted_pairs": len(weights),
    }
