import json

import pytest
from hypothesis import given, strategies as st

from conftest import write_jsonl
from relgen.corpus import (
    EXCLUDED_RELATIONS,
    CorpusError,
    RelationRegistry,
    Registry,
    build_corpus,
    load_corpus,
    load_dataset,
    registries_from_json,
)
from relgen.highlight import RgbImage, save_ppm
from relgen.segmentation import decode_runs, save_segmap

import numpy as np


def test_excluded_list_matches_the_six_ambiguous_relations():
    assert EXCLUDED_RELATIONS == ("over", "in front of", "beside", "on", "in", "attached to")


def test_identical_lines_dedup(tmp_path):
    path = write_jsonl(tmp_path / "t.jsonl", [
        {"head": "person", "relation": "holding", "tail": "skateboard"},
        {"head": "person", "relation": "holding", "tail": "skateboard"},
    ])
    corpus = load_corpus(path)
    assert len(corpus.triples) == 1


def test_excluded_relation_dropped(tmp_path):
    path = write_jsonl(tmp_path / "t.jsonl", [
        {"head": "zebra", "relation": "in front of", "tail": "elephant"},
        {"head": "person", "relation": "holding", "tail": "skateboard"},
    ])
    corpus = load_corpus(path)
    assert corpus.dropped == 1
    assert [corpus.text(t) for t in corpus.triples] == ["person holding skateboard"]


def test_dense_ids_first_seen(tmp_path):
    path = write_jsonl(tmp_path / "t.jsonl", [
        {"head": "person", "relation": "holding", "tail": "skateboard"},
        {"head": "dog", "relation": "chasing", "tail": "cat"},
        {"head": "cat", "relation": "holding", "tail": "person"},
    ])
    corpus = load_corpus(path)
    assert len(corpus.objects) == 4
    assert corpus.objects.names == ("person", "skateboard", "dog", "cat")
    assert [t.triple_id for t in corpus.triples] == [0, 1, 2]
    # excluded relations occupy the leading ids and stay flagged
    assert corpus.relations.names[6:] == ("holding", "chasing")
    assert [corpus.relations.is_excluded(i) for i in range(8)] == [True] * 6 + [False] * 2


def test_names_are_canonicalised():
    corpus = build_corpus([("Baseball  Bat", "LYING on", "grass")])
    assert corpus.texts() == ["baseball bat lying on grass"]


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text('{"head": "a", "relation": "r", "tail": "b"}\n{oops\n')
    with pytest.raises(CorpusError, match=":2:"):
        load_corpus(path)


def test_unknown_key_rejected(tmp_path):
    path = write_jsonl(tmp_path / "t.jsonl", [{"head": "a", "relation": "r", "tail": "b", "weight": 2}])
    with pytest.raises(CorpusError, match="unknown key"):
        load_corpus(path)


def test_missing_key_rejected(tmp_path):
    path = write_jsonl(tmp_path / "t.jsonl", [{"head": "a", "relation": "r"}])
    with pytest.raises(CorpusError, match="missing key"):
        load_corpus(path)


def test_registry_rejects_duplicates():
    with pytest.raises(CorpusError):
        Registry(("a", "a"))


def test_custom_excluded_list():
    corpus = build_corpus([("a", "on", "b"), ("a", "near", "b")], excluded=("near",))
    assert corpus.texts() == ["a on b"]
    assert corpus.dropped == 1


name = st.text(alphabet="abcde ", min_size=1, max_size=8).filter(lambda s: s.strip())
rel = st.sampled_from(["holding", "on", "in front of", "riding", "eating", "beside"])
lines = st.lists(st.tuples(name, rel, name), min_size=1, max_size=20)


@given(lines)
def test_registry_round_trip(lines):
    corpus = build_corpus(lines)
    objects, relations = registries_from_json(corpus.registries_json())
    assert objects == corpus.objects
    assert relations == corpus.relations
    assert relations.excluded == corpus.relations.excluded


@given(lines)
def test_no_excluded_relation_survives(lines):
    corpus = build_corpus(lines)
    for t in corpus.triples:
        assert not corpus.relations.is_excluded(t.relation)
        assert corpus.relations.name(t.relation) not in EXCLUDED_RELATIONS


@given(lines, st.randoms())
def test_registries_order_independent_after_canonical_sort(lines, rnd):
    shuffled = list(lines)
    rnd.shuffle(shuffled)
    a = build_corpus(sorted(lines))
    b = build_corpus(sorted(shuffled))
    assert a.objects == b.objects and a.relations == b.relations


def _write_image(tmp_path, image_id, w, h, runs):
    save_ppm(RgbImage(np.zeros((h, w, 3), dtype=np.uint8)), tmp_path / f"{image_id}.ppm")
    save_segmap(decode_runs(w, h, runs), tmp_path / f"{image_id}.json")


def _manifest_row(image_id, rels, triples=()):
    return {"image_id": image_id, "image": f"{image_id}.ppm", "segmap": f"{image_id}.json",
            "gt_relations": rels, "gt_triples": [list(t) for t in triples]}


def test_load_dataset_sorted_and_resolved(tmp_path):
    for iid in ("b", "a"):
        _write_image(tmp_path, iid, 2, 2, [[2, 1, 1], [2, 2, 2]])
    manifest = write_jsonl(tmp_path / "dataset.jsonl", [
        _manifest_row("b", ["holding", "on"], [(1, "holding", 2), (2, "on", 1)]),
        _manifest_row("a", ["riding"]),
    ])
    relations = RelationRegistry.seeded().extended(["holding", "riding"])
    records = load_dataset(manifest, relations)
    assert [r.image_id for r in records] == ["a", "b"]
    ann = records[1].annotation
    # "on" is excluded from ground truth as well
    assert ann.ground_truth_relations == {relations.id("holding")}
    assert ann.ground_truth_triples == ((1, relations.id("holding"), 2),)


def test_load_dataset_missing_file(tmp_path):
    manifest = write_jsonl(tmp_path / "dataset.jsonl", [_manifest_row("ghost", [])])
    with pytest.raises(CorpusError, match="ghost"):
        load_dataset(manifest, RelationRegistry.seeded())


def test_load_dataset_dimension_mismatch(tmp_path):
    save_ppm(RgbImage(np.zeros((2, 3, 3), dtype=np.uint8)), tmp_path / "x.ppm")
    save_segmap(decode_runs(2, 2, [[4, 1, 1]]), tmp_path / "x.json")
    manifest = write_jsonl(tmp_path / "dataset.jsonl", [_manifest_row("x", [])])
    with pytest.raises(CorpusError, match="3x2"):
        load_dataset(manifest, RelationRegistry.seeded())
