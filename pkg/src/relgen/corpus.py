"""Registries, triples and dataset ingestion.

Everything on disk is JSON-lines keyed by *names*; integer ids are assigned
at load time in first-seen order so that corpora stay hand-editable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

TRIPLE_KEYS = frozenset({"head", "relation", "tail"})
DATASET_KEYS = frozenset({"image_id", "image", "segmap", "gt_relations", "gt_triples"})


class CorpusError(ValueError):
    """Malformed corpus, manifest or annotation."""


def canonical_name(name: str) -> str:
    return " ".join(name.lower().split())


def default_excluded_relations() -> tuple[str, ...]:
    text = resources.files("relgen").joinpath("data/excluded_relations.txt").read_text()
    names = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.append(canonical_name(line))
    return tuple(names)


EXCLUDED_RELATIONS = default_excluded_relations()


@dataclass(frozen=True)
class Registry:
    """Dense id <-> name map."""

    names: tuple[str, ...] = ()
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for i, name in enumerate(self.names):
            if not name:
                raise CorpusError("empty class name")
            if name in index:
                raise CorpusError(f"duplicate class name {name!r}")
            index[name] = i
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self._index

    def id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise CorpusError(f"unknown name {name!r}") from None

    def name(self, idx: int) -> str:
        return self.names[idx]

    def extended(self, names: Iterable[str]) -> "Registry":
        new = list(self.names)
        for name in names:
            if name not in self._index and name not in new:
                new.append(name)
        return type(self)(tuple(new))

    def to_json(self):
        return list(self.names)


@dataclass(frozen=True)
class RelationRegistry(Registry):
    """Relation names plus the set flagged as excluded from the task.

    The excluded relations always occupy the first ids, mirroring the
    56-class list where the ambiguous six come first.
    """

    excluded: frozenset = frozenset()

    @classmethod
    def seeded(cls, excluded: Sequence[str] = EXCLUDED_RELATIONS) -> "RelationRegistry":
        names = tuple(canonical_name(n) for n in excluded)
        return cls(names, excluded=frozenset(names))

    def is_excluded(self, idx: int) -> bool:
        return self.names[idx] in self.excluded

    def extended(self, names: Iterable[str]) -> "RelationRegistry":
        new = list(self.names)
        for name in names:
            if name not in self._index and name not in new:
                new.append(name)
        return RelationRegistry(tuple(new), excluded=self.excluded)

    def to_json(self):
        return [{"name": n, "excluded": n in self.excluded} for n in self.names]

    @classmethod
    def from_json(cls, data) -> "RelationRegistry":
        names = tuple(d["name"] for d in data)
        return cls(names, excluded=frozenset(d["name"] for d in data if d["excluded"]))


@dataclass(frozen=True)
class Triple:
    head: int
    relation: int
    tail: int
    triple_id: int


@dataclass(frozen=True)
class Corpus:
    objects: Registry
    relations: RelationRegistry
    triples: tuple[Triple, ...]
    dropped: int = 0

    def text(self, triple: Triple) -> str:
        return " ".join((
            self.objects.name(triple.head),
            self.relations.name(triple.relation),
            self.objects.name(triple.tail),
        ))

    def texts(self) -> list[str]:
        return [self.text(t) for t in self.triples]

    def relation_of(self) -> list[int]:
        """Relation id per triple id."""
        return [t.relation for t in self.triples]

    def registries_json(self) -> str:
        return json.dumps(
            {"objects": self.objects.to_json(), "relations": self.relations.to_json()},
            indent=2,
        )


def registries_from_json(text: str) -> tuple[Registry, RelationRegistry]:
    data = json.loads(text)
    return Registry(tuple(data["objects"])), RelationRegistry.from_json(data["relations"])


def _read_jsonl(path: Path, required: frozenset, optional: frozenset = frozenset()):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            unknown = set(obj) - required - optional
            if unknown:
                raise CorpusError(f"{path}:{lineno}: unknown key(s) {sorted(unknown)}")
            missing = required - set(obj)
            if missing:
                raise CorpusError(f"{path}:{lineno}: missing key(s) {sorted(missing)}")
            yield lineno, obj


def build_corpus(
    lines: Iterable[tuple[str, str, str]],
    excluded: Sequence[str] = EXCLUDED_RELATIONS,
) -> Corpus:
    """Assign ids to (head, relation, tail) name triples, dropping excluded ones."""
    relations = RelationRegistry.seeded(excluded)
    obj_names: list[str] = []
    rel_names: list[str] = list(relations.names)
    seen: dict[tuple[str, str, str], int] = {}
    dropped = 0
    for head, rel, tail in lines:
        head, rel, tail = canonical_name(head), canonical_name(rel), canonical_name(tail)
        if not (head and rel and tail):
            raise CorpusError(f"empty name in triple {(head, rel, tail)!r}")
        if rel in relations.excluded:
            dropped += 1
            continue
        key = (head, rel, tail)
        if key in seen:
            continue
        seen[key] = len(seen)
        for name in (head, tail):
            if name not in obj_names:
                obj_names.append(name)
        if rel not in rel_names:
            rel_names.append(rel)
    if dropped:
        logger.warning("dropped %d triple(s) with excluded relations", dropped)
    objects = Registry(tuple(obj_names))
    relations = RelationRegistry(tuple(rel_names), excluded=relations.excluded)
    triples = tuple(
        Triple(objects.id(h), relations.id(r), objects.id(t), i)
        for (h, r, t), i in seen.items()
    )
    return Corpus(objects, relations, triples, dropped)


def load_corpus(path, excluded: Sequence[str] = EXCLUDED_RELATIONS) -> Corpus:
    """Load ``triples.jsonl``: one ``{"head", "relation", "tail"}`` object per line."""
    path = Path(path)
    lines = []
    for lineno, obj in _read_jsonl(path, TRIPLE_KEYS):
        vals = (obj["head"], obj["relation"], obj["tail"])
        if not all(isinstance(v, str) for v in vals):
            raise CorpusError(f"{path}:{lineno}: names must be strings")
        lines.append(vals)
    return build_corpus(lines, excluded)


@dataclass(frozen=True)
class SceneGraphAnnotation:
    image_id: str
    ground_truth_relations: frozenset
    ground_truth_triples: tuple[tuple[int, int, int], ...] = ()


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    image: Path
    segmap: Path
    annotation: SceneGraphAnnotation


def dataset_relation_names(path) -> list[str]:
    """Every relation name referenced by a manifest, in first-seen order."""
    names: list[str] = []
    for _, obj in _read_jsonl(Path(path), DATASET_KEYS):
        for name in list(obj["gt_relations"]) + [t[1] for t in obj["gt_triples"]]:
            name = canonical_name(name)
            if name not in names:
                names.append(name)
    return names


def load_dataset(path, relations: RelationRegistry) -> list[ImageRecord]:
    """Load ``dataset.jsonl`` and check every referenced file.

    Relative image/segmap paths resolve against the manifest's directory.
    Excluded relations are removed from ground truth as well.
    """
    # imported here: both modules are leaves, but keep corpus import-light
    from relgen.highlight import read_ppm_header
    from relgen.segmentation import load_segmap

    path = Path(path)
    root = path.parent
    records = []
    seen_ids = set()
    for lineno, obj in _read_jsonl(path, DATASET_KEYS):
        image_id = str(obj["image_id"])
        if image_id in seen_ids:
            raise CorpusError(f"{path}:{lineno}: duplicate image_id {image_id!r}")
        seen_ids.add(image_id)
        image = root / obj["image"]
        segmap = root / obj["segmap"]
        for f in (image, segmap):
            if not f.is_file():
                raise CorpusError(f"image {image_id!r}: missing file {f}")
        width, height = read_ppm_header(image)
        smap = load_segmap(segmap)
        if (smap.width, smap.height) != (width, height):
            raise CorpusError(
                f"image {image_id!r}: image is {width}x{height} "
                f"but segmap is {smap.width}x{smap.height}"
            )
        rels = set()
        for name in obj["gt_relations"]:
            rid = relations.id(canonical_name(name))
            if not relations.is_excluded(rid):
                rels.add(rid)
        gt_triples = []
        for head, name, tail in obj["gt_triples"]:
            rid = relations.id(canonical_name(name))
            if not relations.is_excluded(rid):
                gt_triples.append((int(head), rid, int(tail)))
        ann = SceneGraphAnnotation(image_id, frozenset(rels), tuple(gt_triples))
        records.append(ImageRecord(image_id, image, segmap, ann))
    records.sort(key=lambda r: r.image_id)
    return records
