"""The 16x16 highlight fixture, as plain nested lists.

Run as a script to regenerate the checked-in goldens from the per-pixel
oracle (never from the library's own highlighter).
"""

from pathlib import Path

SIZE = 16
SUBJECT = 1
OBJECT = 2
RANDOM_SEED = 7
BACKGROUND_PROBE = (0, 0)  # (x, y)
SUBJECT_PROBE = (4, 4)
PROBE_RGB = (100, 150, 200)
GOLDEN_DIR = Path(__file__).parent / "data" / "golden"


def fixture():
    pixels = []
    instances = []
    for y in range(SIZE):
        row_px, row_inst = [], []
        for x in range(SIZE):
            rgb = ((x * 16 + y * 3) % 256, (y * 16 + x * 5) % 256, (x * y * 7) % 256)
            if (x, y) in (BACKGROUND_PROBE, SUBJECT_PROBE):
                rgb = PROBE_RGB
            if 2 <= x <= 7 and 2 <= y <= 7:
                inst = SUBJECT
            elif 9 <= x <= 13 and 8 <= y <= 13:
                inst = OBJECT
            elif y >= 14:
                inst = 3
            else:
                inst = 0
            row_px.append(rgb)
            row_inst.append(inst)
        pixels.append(row_px)
        instances.append(row_inst)
    classes = [[{0: 0, 1: 11, 2: 12, 3: 13}[i] for i in row] for row in instances]
    return pixels, instances, classes


def ppm_bytes(pixels):
    body = bytes(c for row in pixels for rgb in row for c in rgb)
    return f"P6\n{len(pixels[0])} {len(pixels)}\n255\n".encode() + body


if __name__ == "__main__":
    from oracles import highlight_oracle, lcg_colours

    pixels, instances, _ = fixture()
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    (GOLDEN_DIR / "input.ppm").write_bytes(ppm_bytes(pixels))
    tints = {
        "none": None,
        "grey": None,
        "specific": [(255, 0, 0), (0, 0, 255)],
        "random": lcg_colours(RANDOM_SEED),
    }
    for mode, tint in tints.items():
        out = highlight_oracle(pixels, instances, SUBJECT, OBJECT, mode, tint)
        (GOLDEN_DIR / f"{mode}.ppm").write_bytes(ppm_bytes(out))
        print(mode, out[0][0], out[4][4])
