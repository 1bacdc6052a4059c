"""End-to-end runs: subject selection -> pairs -> highlight -> decode -> aggregate -> evaluate."""

from __future__ import annotations

import dataclasses
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from relgen import highlight
from relgen.corpus import Corpus, ImageRecord, dataset_relation_names, load_corpus, load_dataset
from relgen.decoder import RESTRICTED, UNRESTRICTED, DecoderConfig, beam_search, sample_sequences
from relgen.evaluation import MAX, SUM, EvalReport, PredictionRecord, aggregate_relations, mean_recall
from relgen.scoring import BigramScorer, ImageContext, TripleWeightScorer, UniformScorer, load_weights
from relgen.segmentation import ALL, candidate_pairs, extract_segments, load_segmap, select_subjects
from relgen.tokenizer import Vocabulary, build_vocab
from relgen.trie import PrefixTrie, trie_from_corpus, validate_sequence

logger = logging.getLogger(__name__)

# named random sub-streams; each consumer derives its own seed from the run seed
STREAM_SYNTH = 1
STREAM_HIGHLIGHT = 2
STREAM_SAMPLING = 3

BEAM = "beam"
SAMPLE = "sample"
SCORERS = ("auto", "weights", "bigram", "uniform")


class ConfigError(ValueError):
    pass


def substream_seed(seed: int, stream: int, *indices: int) -> int:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(stream, *indices))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def parse_os_k(value) -> int | str:
    if isinstance(value, int):
        return value
    text = str(value).strip().lower()
    if text == ALL:
        return ALL
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"os_k must be an integer or 'all', got {value!r}") from None


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


@dataclass(frozen=True)
class RunConfig:
    dataset: str | None = None
    triples: str | None = None
    weights: str | None = None
    oh_mode: str = highlight.SPECIFIC
    os_k: int | str = 5
    rtg_mode: str = RESTRICTED
    beam_width: int = 3
    aggregation: str = MAX
    renormalize_after_mask: bool = False
    decode: str = BEAM
    pairing: str = "all"
    scorer: str = "auto"
    alpha: float = 0.1
    seed: int | None = None
    jobs: int = 1
    out: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "os_k", parse_os_k(self.os_k))

    def validate(self) -> "RunConfig":
        if self.oh_mode not in highlight.MODES:
            raise ConfigError(f"oh_mode must be one of {highlight.MODES}, got {self.oh_mode!r}")
        if self.os_k != ALL and self.os_k < 1:
            raise ConfigError("os_k must be >= 1 or 'all'")
        if self.rtg_mode not in (RESTRICTED, UNRESTRICTED):
            raise ConfigError(f"rtg_mode must be restricted or unrestricted, got {self.rtg_mode!r}")
        if self.beam_width < 1:
            raise ConfigError("beam_width must be >= 1")
        if self.aggregation not in (MAX, SUM):
            raise ConfigError(f"aggregation must be max or sum, got {self.aggregation!r}")
        if self.decode not in (BEAM, SAMPLE):
            raise ConfigError(f"decode must be beam or sample, got {self.decode!r}")
        if self.decode == SAMPLE and self.rtg_mode != RESTRICTED:
            raise ConfigError("sampling is only defined for restricted decoding")
        if self.pairing not in ("all", "selected"):
            raise ConfigError(f"pairing must be all or selected, got {self.pairing!r}")
        if self.scorer not in SCORERS:
            raise ConfigError(f"scorer must be one of {SCORERS}, got {self.scorer!r}")
        if self.scorer == "weights" and not self.weights:
            raise ConfigError("scorer=weights needs a weights file")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.seed is None and (self.oh_mode == highlight.RANDOM or self.decode == SAMPLE):
            raise ConfigError("a seed is required for random highlighting and sampling")
        return self

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def coerce_config_values(raw: dict[str, Any]) -> dict[str, Any]:
    out = {}
    for key, value in raw.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        kind = _FIELD_TYPES[key]
        if value is None:
            out[key] = None
        elif key == "os_k":
            out[key] = parse_os_k(value)
        elif kind == "bool":
            out[key] = _parse_bool(value)
        elif kind in ("int", "int | None"):
            try:
                out[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from None
        elif kind == "float":
            try:
                out[key] = float(value)
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {value!r}") from None
        else:
            out[key] = str(value)
    return out


def read_config_file(path) -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key.replace("-", "_")] = value
    try:
        return coerce_config_values(raw)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def resolve_config(file_values: dict | None = None, flag_values: dict | None = None) -> RunConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    merged = {}
    merged.update(file_values or {})
    merged.update({k: v for k, v in (flag_values or {}).items() if v is not None})
    return RunConfig(**coerce_config_values(merged)).validate()


@dataclass
class Experiment:
    corpus: Corpus
    vocab: Vocabulary
    trie: PrefixTrie
    records: list[ImageRecord]
    weights: dict | None = None

    @classmethod
    def load(cls, triples, dataset=None, weights=None) -> "Experiment":
        corpus = load_corpus(triples)
        records = []
        if dataset is not None:
            # ground truth may name relations the corpus never uses; those stay unreachable
            relations = corpus.relations.extended(dataset_relation_names(dataset))
            corpus = dataclasses.replace(corpus, relations=relations)
            records = load_dataset(dataset, relations)
        vocab = build_vocab(corpus)
        trie = trie_from_corpus(corpus, vocab)
        table = load_weights(weights) if weights else None
        return cls(corpus, vocab, trie, records, table)

    def sequences(self) -> list[tuple[int, ...]]:
        return [self.vocab.tokenize(t) for t in self.corpus.texts()]

    def make_scorer(self, cfg: RunConfig):
        kind = cfg.scorer
        if kind == "auto":
            if cfg.rtg_mode == RESTRICTED and self.weights is not None:
                kind = "weights"
            else:
                kind = "bigram"
        if kind == "weights":
            if self.weights is None:
                raise ConfigError("scorer=weights needs a weights file")
            return TripleWeightScorer(self.trie, len(self.vocab), self.weights)
        if kind == "bigram":
            return BigramScorer(self.sequences(), len(self.vocab), cfg.alpha)
        return UniformScorer(len(self.vocab))


def predict_image(index: int, record: ImageRecord, exp: Experiment, scorer, cfg: RunConfig) -> PredictionRecord:
    image = highlight.load_ppm(record.image)
    segmap = load_segmap(record.segmap)
    segments = extract_segments(segmap)
    subjects = select_subjects(segments, cfg.os_k)
    pairs = candidate_pairs(subjects, segments, objects_from_subjects=cfg.pairing == "selected")
    dcfg = DecoderConfig(
        beam_width=cfg.beam_width,
        mode=cfg.rtg_mode,
        renormalize_after_mask=cfg.renormalize_after_mask,
        seed=cfg.seed or 0,
    )
    relation_of = exp.corpus.relation_of()
    sequences = []
    for pair_index, (subj, obj) in enumerate(pairs):
        seed = None
        if cfg.oh_mode == highlight.RANDOM:
            seed = substream_seed(cfg.seed, STREAM_HIGHLIGHT, index, pair_index)
        view = highlight.apply_highlight(image, segmap, subj.instance_id, obj.instance_id, cfg.oh_mode, seed)
        ctx = ImageContext(
            record.image_id,
            subj.instance_id,
            obj.instance_id,
            tags=(f"class:{subj.class_id}", f"class:{obj.class_id}"),
            image=view,
        )
        if cfg.decode == SAMPLE:
            rng = np.random.default_rng(substream_seed(cfg.seed, STREAM_SAMPLING, index, pair_index))
            result = sample_sequences(scorer, ctx, exp.trie, dcfg, relation_of, k=3, rng=rng)
            sequences.extend(result.sequences)
            continue
        for seq in beam_search(scorer, ctx, exp.trie, dcfg):
            if seq.triple_id is None:
                # unrestricted output only counts when it spells a real triple
                if not validate_sequence(exp.trie, seq.tokens):
                    continue
                seq = dataclasses.replace(seq, triple_id=exp.trie.resolve(seq.tokens))
            sequences.append(seq)
    return aggregate_relations(
        record.image_id, sequences, relation_of, exp.corpus.relations, method=cfg.aggregation
    )


def run_pipeline(exp: Experiment, scorer, cfg: RunConfig) -> tuple[list[PredictionRecord], EvalReport]:
    """Predict every image, then evaluate. Output order never depends on ``cfg.jobs``."""
    cfg.validate()

    def work(item):
        index, record = item
        try:
            return predict_image(index, record, exp, scorer, cfg)
        except Exception as exc:
            raise RuntimeError(f"image {record.image_id!r}: {exc}") from exc

    items = list(enumerate(exp.records))
    if cfg.jobs == 1:
        predictions = [work(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            predictions = list(pool.map(work, items))
    report = mean_recall(predictions, [r.annotation for r in exp.records], exp.corpus.relations)
    return predictions, report


def write_predictions(predictions: Iterable[PredictionRecord], path) -> None:
    Path(path).write_text("".join(p.to_json() + "\n" for p in predictions))


def read_predictions(path) -> list[PredictionRecord]:
    lines = Path(path).read_text().splitlines()
    return [PredictionRecord.from_json(line) for line in lines if line.strip()]


# Ablation layout: each row varies one axis away from the best configuration.
ABLATION_ROWS = (
    ("RTG", "Unrestricted Model", {"rtg_mode": UNRESTRICTED}),
    ("RTG", "Restricted Model", {"rtg_mode": RESTRICTED}),
    ("OH", "Without Processing", {"oh_mode": highlight.NONE}),
    ("OH", "Grey Processing", {"oh_mode": highlight.GREY}),
    ("OH", "Random Colour Highlight", {"oh_mode": highlight.RANDOM}),
    ("OH", "Specific Colour Highlight", {"oh_mode": highlight.SPECIFIC}),
    ("OS", "Select Top 1 Subject", {"os_k": 1}),
    ("OS", "Select Top 3 Subjects", {"os_k": 3}),
    ("OS", "Select Top 5 Subjects", {"os_k": 5}),
    ("OS", "Select Top 7 Subjects", {"os_k": 7}),
    ("OS", "Select All Subjects", {"os_k": ALL}),
)
ABLATION_BASE = {"rtg_mode": RESTRICTED, "oh_mode": highlight.SPECIFIC, "os_k": 5}


def ablation_grid(axes: Iterable[str] | None = None, rows: Iterable[str] | None = None):
    """Select Table-2 rows by axis name (RTG/OH/OS) and/or row name."""
    axes = {a.upper() for a in axes} if axes else None
    rows = {r.lower() for r in rows} if rows else None
    picked = [
        row for row in ABLATION_ROWS
        if (axes is None or row[0] in axes) and (rows is None or row[1].lower() in rows)
    ]
    if rows is not None:
        known = {r[1].lower() for r in ABLATION_ROWS}
        unknown = rows - known
        if unknown:
            raise ConfigError(f"unknown ablation row(s): {sorted(unknown)}")
    if axes is not None and axes - {"RTG", "OH", "OS"}:
        raise ConfigError(f"unknown ablation axis: {sorted(axes - {'RTG', 'OH', 'OS'})}")
    return picked


def run_ablation(exp: Experiment, base: RunConfig, grid=ABLATION_ROWS) -> list[dict]:
    results = []
    cache: dict[RunConfig, EvalReport] = {}
    for axis, name, overrides in grid:
        cfg = base.replace(**{**ABLATION_BASE, **overrides}).validate()
        if cfg not in cache:
            _, cache[cfg] = run_pipeline(exp, exp.make_scorer(cfg), cfg)
        report = cache[cfg]
        results.append({"type": axis, "name": name, "mean_recall": round(report.mean_recall_pct, 2)})
    return results


def format_ablation(rows: list[dict]) -> str:
    lines = ["| Type | Name | Mean Recall (%) |", "|------|------|-----------------|"]
    lines += [f"| {r['type']} | {r['name']} | {r['mean_recall']:.2f} |" for r in rows]
    return "\n".join(lines) + "\n"


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
