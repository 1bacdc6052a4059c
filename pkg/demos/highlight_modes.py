"""Render the four highlight modes for one subject/object pair.

Writes PPM files next to a synthetic scene so they can be opened in any
image viewer. Pass an output directory as the first argument.
"""

import sys
from pathlib import Path

from relgen import apply_highlight, extract_segments, load_ppm, load_segmap, select_subjects
from relgen.highlight import MODES, save_ppm
from relgen.synth import SynthSizes, generate

out = Path(sys.argv[1] if len(sys.argv) > 1 else "highlight_demo")
generate(out / "scene", seed=3, sizes=SynthSizes(images=1))

image = load_ppm(out / "scene" / "images" / "img_000.ppm")
segmap = load_segmap(out / "scene" / "segmaps" / "img_000.json")
subject, obj = select_subjects(extract_segments(segmap), 2)
print(f"subject instance {subject.instance_id} ({subject.area_ratio:.0%} of pixels), "
      f"object instance {obj.instance_id} ({obj.area_ratio:.0%})")

for mode in MODES:
    result = apply_highlight(image, segmap, subject.instance_id, obj.instance_id, mode, seed=7)
    path = out / f"{mode}.ppm"
    save_ppm(result, path)
    y, x = divmod(int(segmap.mask(subject.instance_id).argmax()), segmap.width)
    print(f"{mode:>8}: {path}  first subject pixel {tuple(int(v) for v in result.pixels[y, x])}")
