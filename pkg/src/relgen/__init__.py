"""Restricted autoregressive relation generation for scene images."""

from relgen.corpus import (
    Corpus,
    ImageRecord,
    Registry,
    RelationRegistry,
    SceneGraphAnnotation,
    Triple,
    load_corpus,
    load_dataset,
)
from relgen.tokenizer import BOS, EOS, Vocabulary, build_vocab
from relgen.trie import PrefixTrie, build_trie
from relgen.scoring import (
    BigramScorer,
    ImageContext,
    TripleWeightScorer,
    UniformScorer,
)
from relgen.decoder import (
    DecoderConfig,
    ScoredSequence,
    beam_search,
    sample_sequences,
    validate_sequence,
)
from relgen.segmentation import (
    ALL,
    Segment,
    SegmentMap,
    candidate_pairs,
    extract_segments,
    load_segmap,
    select_subjects,
)
from relgen.highlight import RgbImage, apply_highlight, load_ppm, save_ppm
from relgen.evaluation import (
    EvalReport,
    PredictionRecord,
    aggregate_relations,
    mean_recall,
)
from relgen.pipeline import RunConfig, run_pipeline

__version__ = "0.1.0"
