"""How many subjects to keep: the plateau behind top-k selection.

Ground-truth subjects in the synthetic data always sit among the three
largest segments, so recall climbs from k=1 to k=3 and then stays flat.
"""

import tempfile
from pathlib import Path

from relgen import ALL, RunConfig, extract_segments, load_segmap, select_subjects
from relgen.pipeline import Experiment, run_pipeline
from relgen.synth import generate

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    generate(root, seed=42)
    exp = Experiment.load(root / "triples.jsonl", root / "dataset.jsonl", root / "weights.json")

    first = exp.records[0]
    segs = extract_segments(load_segmap(first.segmap))
    print(f"{first.image_id}: segments by area")
    for s in select_subjects(segs, ALL):
        print(f"  instance {s.instance_id}  class {s.class_id:>2}  {s.pixel_count:>4} px")

    print("\nmean recall@3 by subject budget")
    for k in (1, 2, 3, 5, 7, ALL):
        cfg = RunConfig(os_k=k, seed=42)
        _, report = run_pipeline(exp, exp.make_scorer(cfg), cfg)
        print(f"  k={k!s:>3}: {report.mean_recall_pct:6.2f}")
