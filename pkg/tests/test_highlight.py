import numpy as np
import pytest
from hypothesis import given, strategies as st

import golden_fixture as gf
from oracles import highlight_oracle, lcg_colours, pixel_blend, pixel_grey
from relgen.highlight import (
    MODES,
    PpmFormatError,
    RgbImage,
    apply_highlight,
    decode_ppm,
    encode_ppm,
    load_ppm,
    random_tints,
    save_ppm,
)
from relgen.segmentation import SegmentMap, decode_runs


def fixture_inputs():
    pixels, instances, classes = gf.fixture()
    image = RgbImage(np.array(pixels, dtype=np.uint8))
    smap = SegmentMap(np.array(classes), np.array(instances))
    return image, smap


def test_hand_derived_pixels():
    assert pixel_grey((100, 150, 200)) == (141, 141, 141)
    assert pixel_blend((100, 150, 200), (255, 0, 0)) == (178, 75, 100)


def test_input_golden_matches_fixture():
    image, _ = fixture_inputs()
    assert load_ppm(gf.GOLDEN_DIR / "input.ppm") == image


@pytest.mark.parametrize("mode", MODES)
def test_goldens(mode):
    image, smap = fixture_inputs()
    out = apply_highlight(image, smap, gf.SUBJECT, gf.OBJECT, mode, seed=gf.RANDOM_SEED)
    assert encode_ppm(out) == (gf.GOLDEN_DIR / f"{mode}.ppm").read_bytes()


def test_probe_pixels():
    image, smap = fixture_inputs()
    bx, by = gf.BACKGROUND_PROBE
    sx, sy = gf.SUBJECT_PROBE
    grey = apply_highlight(image, smap, gf.SUBJECT, gf.OBJECT, "grey")
    tinted = apply_highlight(image, smap, gf.SUBJECT, gf.OBJECT, "specific")
    assert tuple(grey.pixels[by, bx]) == (141, 141, 141)
    assert tuple(tinted.pixels[by, bx]) == (141, 141, 141)
    assert tuple(tinted.pixels[sy, sx]) == (178, 75, 100)
    assert tuple(grey.pixels[sy, sx]) == (100, 150, 200)


def test_none_is_identity():
    image, smap = fixture_inputs()
    out = apply_highlight(image, smap, gf.SUBJECT, gf.OBJECT, "none")
    assert out == image and out.pixels is not image.pixels


def test_lcg_reference():
    assert list(random_tints(gf.RANDOM_SEED)) == lcg_colours(gf.RANDOM_SEED)
    assert random_tints(1) != random_tints(2)


def test_random_seed_matters():
    image, smap = fixture_inputs()
    a = apply_highlight(image, smap, 1, 2, "random", seed=1)
    b = apply_highlight(image, smap, 1, 2, "random", seed=1)
    c = apply_highlight(image, smap, 1, 2, "random", seed=2)
    assert a == b and a != c
    with pytest.raises(ValueError):
        apply_highlight(image, smap, 1, 2, "random")


def test_errors():
    image, smap = fixture_inputs()
    with pytest.raises(ValueError, match="instance 9"):
        apply_highlight(image, smap, 1, 9, "specific")
    with pytest.raises(ValueError):
        apply_highlight(image, smap, 1, 1, "specific")
    with pytest.raises(ValueError):
        apply_highlight(image, smap, 1, 2, "sepia")
    small = decode_runs(2, 2, [[2, 1, 1], [2, 1, 2]])
    with pytest.raises(ValueError, match="segmap is 2x2"):
        apply_highlight(image, small, 1, 2, "grey")


@st.composite
def scenes(draw):
    w = draw(st.integers(2, 6))
    h = draw(st.integers(1, 6))
    inst = draw(st.lists(st.integers(0, 3), min_size=w * h, max_size=w * h))
    inst[0], inst[1] = 1, 2
    px = draw(st.lists(st.tuples(*[st.integers(0, 255)] * 3), min_size=w * h, max_size=w * h))
    pixels = [px[y * w : (y + 1) * w] for y in range(h)]
    instances = [inst[y * w : (y + 1) * w] for y in range(h)]
    return pixels, instances


@given(scenes(), st.sampled_from(MODES), st.integers(0, 2**64 - 1))
def test_matches_pixel_oracle(scene, mode, seed):
    pixels, instances = scene
    image = RgbImage(np.array(pixels, dtype=np.uint8).reshape(len(pixels), len(pixels[0]), 3))
    smap = SegmentMap(np.array(instances), np.array(instances))
    tints = {"specific": [(255, 0, 0), (0, 0, 255)], "random": lcg_colours(seed)}.get(mode)
    expected = highlight_oracle(pixels, instances, 1, 2, mode, tints)
    out = apply_highlight(image, smap, 1, 2, mode, seed=seed)
    assert out.pixels.tolist() == [[list(p) for p in row] for row in expected]


@given(st.lists(st.integers(0, 255), min_size=1, max_size=30))
def test_grey_idempotent_on_grey(values):
    px = np.array([[v, v, v] for v in values], dtype=np.uint8).reshape(1, -1, 3)
    inst = np.zeros((1, len(values) + 2), dtype=int)
    inst[0, -2], inst[0, -1] = 1, 2
    px = np.concatenate([px, np.zeros((1, 2, 3), dtype=np.uint8)], axis=1)
    image = RgbImage(px)
    out = apply_highlight(image, SegmentMap(inst, inst), 1, 2, "grey")
    assert out == image


def test_specific_independent_of_instance_numbering():
    image, smap = fixture_inputs()
    relabel = {0: 0, 1: 7, 2: 5, 3: 9}
    inst = np.vectorize(relabel.get)(smap.instance_ids)
    renamed = SegmentMap(smap.class_ids, inst)
    a = apply_highlight(image, smap, 1, 2, "specific")
    b = apply_highlight(image, renamed, 7, 5, "specific")
    assert a == b


def test_ppm_round_trip(tmp_path):
    image, _ = fixture_inputs()
    save_ppm(image, tmp_path / "x.ppm")
    assert load_ppm(tmp_path / "x.ppm") == image
    assert (tmp_path / "x.ppm").read_bytes() == encode_ppm(image)


def test_ppm_one_pixel():
    img = decode_ppm(b"P6\n1 1\n255\n\x00\x00\x00")
    assert img.pixels.tolist() == [[[0, 0, 0]]]


def test_ppm_header_comments():
    img = decode_ppm(b"P6 # made by hand\n2 1\n# maxval next\n255\n\x01\x02\x03\x04\x05\x06")
    assert img.pixels.tolist() == [[[1, 2, 3], [4, 5, 6]]]


@pytest.mark.parametrize("data, match", [
    (b"P3\n1 1\n255\n0 0 0", "magic"),
    (b"P6\n1 1\n65535\n\x00" * 2, "maxval"),
    (b"P6\n2 2\n255\n\x00\x00\x00", "truncated"),
    (b"P6\n2", "truncated"),
])
def test_ppm_errors(data, match):
    with pytest.raises(PpmFormatError, match=match):
        decode_ppm(data)
