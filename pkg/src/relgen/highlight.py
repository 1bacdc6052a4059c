"""Model-input image variants and a minimal binary PPM codec.

Pixel rules (integer arithmetic, rounding half up):

* grey:  luma = round(0.299 R + 0.587 G + 0.114 B), copied to all channels
* tint:  channel = round((orig + tint) / 2)

Random tint colours come from a 64-bit linear congruential generator
(Knuth's MMIX constants): ``state = (A * state + C) mod 2**64``, one
advance per channel, taking the top 8 bits of the new state; the subject
colour is drawn before the object colour.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from relgen.segmentation import SegmentMap

NONE = "none"
GREY = "grey"
RANDOM = "random"
SPECIFIC = "specific"
MODES = (NONE, GREY, RANDOM, SPECIFIC)

RED = (255, 0, 0)
BLUE = (0, 0, 255)

LCG_A = 6364136223846793005
LCG_C = 1442695040888963407
_MASK64 = (1 << 64) - 1


class PpmFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RgbImage:
    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3 or self.pixels.dtype != np.uint8:
            raise ValueError("expected a (height, width, 3) uint8 array")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    __hash__ = None


class Lcg64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_byte(self) -> int:
        self.state = (LCG_A * self.state + LCG_C) & _MASK64
        return self.state >> 56

    def colour(self) -> tuple[int, int, int]:
        return (self.next_byte(), self.next_byte(), self.next_byte())


def random_tints(seed: int) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    gen = Lcg64(seed)
    subject = gen.colour()
    return subject, gen.colour()


def grayscale(pixels: np.ndarray) -> np.ndarray:
    rgb = pixels.astype(np.int64)
    luma = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return np.repeat(np.clip(luma, 0, 255)[..., None], 3, axis=-1).astype(np.uint8)


def blend(pixels: np.ndarray, tint) -> np.ndarray:
    mixed = (pixels.astype(np.int64) + np.asarray(tint, dtype=np.int64) + 1) // 2
    return np.clip(mixed, 0, 255).astype(np.uint8)


def apply_highlight(
    image: RgbImage,
    segmap: SegmentMap,
    subject: int,
    obj: int,
    mode: str = SPECIFIC,
    seed: int | None = None,
) -> RgbImage:
    """Render the (subject, object) view of ``image`` under ``mode``."""
    if mode not in MODES:
        raise ValueError(f"unknown highlight mode {mode!r}")
    if (image.width, image.height) != (segmap.width, segmap.height):
        raise ValueError(
            f"image is {image.width}x{image.height}, segmap is {segmap.width}x{segmap.height}"
        )
    if subject == obj:
        raise ValueError("subject and object must differ")
    subj_mask = segmap.mask(subject)
    obj_mask = segmap.mask(obj)
    for iid, mask in ((subject, subj_mask), (obj, obj_mask)):
        if iid == 0 or not mask.any():
            raise ValueError(f"instance {iid} not present in segment map")

    src = image.pixels
    if mode == NONE:
        return RgbImage(src.copy())
    out = grayscale(src)
    if mode == GREY:
        out[subj_mask] = src[subj_mask]
        out[obj_mask] = src[obj_mask]
        return RgbImage(out)
    if mode == SPECIFIC:
        subj_tint, obj_tint = RED, BLUE
    else:
        if seed is None:
            raise ValueError("random highlight needs a seed")
        subj_tint, obj_tint = random_tints(seed)
    out[subj_mask] = blend(src[subj_mask], subj_tint)
    out[obj_mask] = blend(src[obj_mask], obj_tint)
    return RgbImage(out)


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        if data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif data[pos : pos + 1].isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PpmFormatError("truncated PPM header")
    return data[start:pos], pos


def _parse_header(data: bytes) -> tuple[int, int, int]:
    magic, pos = _read_token(data, 0)
    if magic != b"P6":
        raise PpmFormatError(f"not a binary PPM (magic {magic[:8]!r})")
    fields = []
    for _ in range(3):
        tok, pos = _read_token(data, pos)
        if not tok.isdigit():
            raise PpmFormatError(f"bad PPM header field {tok[:16]!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise PpmFormatError(f"unsupported maxval {maxval}")
    if width < 1 or height < 1:
        raise PpmFormatError("PPM dimensions must be positive")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PpmFormatError("truncated PPM header")
    return width, height, pos + 1


def read_ppm_header(path) -> tuple[int, int]:
    with open(path, "rb") as fh:
        head = fh.read(512)
    width, height, _ = _parse_header(head)
    return width, height


def decode_ppm(data: bytes) -> RgbImage:
    width, height, offset = _parse_header(data)
    expected = width * height * 3
    payload = data[offset:]
    if len(payload) < expected:
        raise PpmFormatError(f"truncated PPM payload: {len(payload)} of {expected} bytes")
    pixels = np.frombuffer(payload[:expected], dtype=np.uint8).reshape(height, width, 3)
    return RgbImage(pixels.copy())


def encode_ppm(image: RgbImage) -> bytes:
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(image.pixels).tobytes()


def load_ppm(path) -> RgbImage:
    return decode_ppm(Path(path).read_bytes())


def save_ppm(image: RgbImage, path) -> None:
    Path(path).write_bytes(encode_ppm(image))
