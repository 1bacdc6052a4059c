"""``relgen`` command line: build-trie, decode, highlight, run, eval, ablate, synth.

Every command prints one JSON document on stdout. Errors go to stderr as
``{"error": ...}`` with exit status 1; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from relgen import highlight, synth
from relgen.corpus import CorpusError, load_corpus
from relgen.decoder import RESTRICTED, UNRESTRICTED, DecoderConfig, beam_search, sample_sequences
from relgen.evaluation import mean_recall
from relgen.pipeline import (
    ConfigError,
    Experiment,
    RunConfig,
    ablation_grid,
    dump_json,
    format_ablation,
    read_config_file,
    read_predictions,
    resolve_config,
    run_ablation,
    run_pipeline,
    write_predictions,
)
from relgen.scoring import ImageContext
from relgen.segmentation import load_segmap
from relgen.tokenizer import build_vocab
from relgen.trie import trie_from_corpus

PATH_KEYS = ("dataset", "triples", "weights", "out")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--jobs", type=int, help="parallel images (default 1)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")


def _run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset")
    parser.add_argument("--triples")
    parser.add_argument("--weights")
    parser.add_argument("--oh-mode", dest="oh_mode", choices=highlight.MODES)
    parser.add_argument("--os-k", dest="os_k", help="subjects per image: integer or 'all'")
    parser.add_argument("--rtg-mode", dest="rtg_mode", choices=(RESTRICTED, UNRESTRICTED))
    parser.add_argument("--beam", dest="beam_width", type=int)
    parser.add_argument("--aggregation", choices=("max", "sum"))
    parser.add_argument("--renorm", dest="renormalize_after_mask", action="store_const", const=True)
    parser.add_argument("--decode", choices=("beam", "sample"))
    parser.add_argument("--pairing", choices=("all", "selected"))
    parser.add_argument("--scorer", choices=("auto", "weights", "bigram", "uniform"))
    parser.add_argument("--alpha", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relgen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-trie", help="build vocabulary and prefix tree from a triple corpus")
    _common(p)
    p.add_argument("--triples", required=True)
    p.add_argument("--dump", action="store_true", help="write the trie as JSON adjacency")

    p = sub.add_parser("decode", help="decode one (image, subject, object) context")
    _common(p)
    p.add_argument("--triples", required=True)
    p.add_argument("--weights")
    p.add_argument("--scorer", choices=("auto", "weights", "bigram", "uniform"), default="auto")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--image", required=True, help="image id")
    p.add_argument("--subject", type=int, required=True)
    p.add_argument("--object", type=int, required=True)
    p.add_argument("--beam", type=int, default=3)
    p.add_argument("--max-len", type=int)
    p.add_argument("--unrestricted", action="store_true")
    p.add_argument("--renorm", action="store_true")
    p.add_argument("--sample", type=int, metavar="K", help="sample until K distinct relations")

    p = sub.add_parser("highlight", help="render a subject/object view of an image")
    _common(p)
    p.add_argument("--image", required=True, help="P6 PPM path")
    p.add_argument("--segmap", required=True)
    p.add_argument("--subject", type=int, required=True)
    p.add_argument("--object", type=int, required=True)
    p.add_argument("--mode", choices=("none", "grey", "random", "specific"), default="specific")

    p = sub.add_parser("run", help="run the full pipeline and evaluate")
    _common(p)
    _run_flags(p)

    p = sub.add_parser("eval", help="score a predictions.jsonl file")
    _common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--triples", required=True)

    p = sub.add_parser("ablate", help="run the RTG / OH / OS ablation grid")
    _common(p)
    _run_flags(p)
    p.add_argument("--axis", action="append", help="RTG, OH or OS (repeatable)")
    p.add_argument("--row", action="append", help="row name, e.g. 'Select Top 3 Subjects'")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    _common(p)
    p.add_argument("--images", type=int, default=32)
    p.add_argument("--distractors", type=int, default=40)
    return parser


def _out_dir(args, default=None) -> Path | None:
    out = args.out or default
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_run_config(args):
    file_values = {}
    if args.config:
        file_values = read_config_file(args.config)
        base = Path(args.config).parent
        for key in PATH_KEYS:
            if file_values.get(key):
                file_values[key] = str(base / file_values[key])
    flags = {
        key: getattr(args, key, None)
        for key in (
            "dataset", "triples", "weights", "oh_mode", "os_k", "rtg_mode", "beam_width",
            "aggregation", "renormalize_after_mask", "decode", "pairing", "scorer", "alpha",
            "seed", "jobs", "out",
        )
    }
    cfg = resolve_config(file_values, flags)
    if not cfg.dataset or not cfg.triples:
        raise ConfigError("dataset and triples are required")
    return cfg


def cmd_build_trie(args) -> dict:
    corpus = load_corpus(args.triples)
    vocab = build_vocab(corpus)
    trie = trie_from_corpus(corpus, vocab)
    result = {
        "triples": len(corpus.triples),
        "dropped": corpus.dropped,
        "objects": len(corpus.objects),
        "relations": len(corpus.relations),
        "vocab_size": len(vocab),
        "trie_nodes": len(trie.nodes),
        "terminals": len(trie),
    }
    out = _out_dir(args)
    if out is not None:
        (out / "vocab.json").write_text(vocab.to_json() + "\n")
        (out / "registries.json").write_text(corpus.registries_json() + "\n")
        if args.dump:
            (out / "trie.json").write_text(trie.dumps(vocab) + "\n")
    elif args.dump:
        result["trie"] = trie.dump(vocab)
    return result


def cmd_decode(args) -> dict:
    exp = Experiment.load(args.triples, weights=args.weights)
    mode = UNRESTRICTED if args.unrestricted else RESTRICTED
    rcfg = RunConfig(rtg_mode=mode, scorer=args.scorer, alpha=args.alpha, weights=args.weights)
    scorer = exp.make_scorer(rcfg)
    dcfg = DecoderConfig(args.beam, args.max_len, mode, args.renorm, args.seed or 0)
    ctx = ImageContext(args.image, args.subject, args.object)
    if args.sample is not None:
        if args.seed is None:
            raise ConfigError("--sample needs --seed")
        result = sample_sequences(scorer, ctx, exp.trie, dcfg, exp.corpus.relation_of(), k=args.sample)
        seqs = result.sequences
        extra = {"shortfall": result.shortfall, "draws": result.draws,
                 "relations": [exp.corpus.relations.name(r) for r in result.relations]}
    else:
        seqs = beam_search(scorer, ctx, exp.trie, dcfg)
        extra = {}
    rows = []
    for seq in seqs:
        row = seq.to_json(exp.vocab)
        row["valid"] = exp.trie.is_terminal(seq.tokens)
        rows.append(row)
    return {"image_id": args.image, "subject": args.subject, "object": args.object,
            "mode": mode, "sequences": rows, **extra}


def cmd_highlight(args) -> dict:
    image = highlight.load_ppm(args.image)
    segmap = load_segmap(args.segmap)
    mode = args.mode
    if mode == highlight.RANDOM and args.seed is None:
        raise ConfigError("--mode random needs --seed")
    view = highlight.apply_highlight(image, segmap, args.subject, args.object, mode, args.seed)
    out = _out_dir(args, ".")
    target = out / f"{Path(args.image).stem}_{args.subject}_{args.object}_{mode}.ppm"
    highlight.save_ppm(view, target)
    return {"output": str(target), "mode": mode, "width": view.width, "height": view.height}


def cmd_run(args) -> dict:
    cfg = _load_run_config(args)
    exp = Experiment.load(cfg.triples, cfg.dataset, cfg.weights)
    predictions, report = run_pipeline(exp, exp.make_scorer(cfg), cfg)
    out = _out_dir(args, cfg.out)
    if out is not None:
        write_predictions(predictions, out / "predictions.jsonl")
        (out / "report.json").write_text(report.to_json() + "\n")
    return report.to_dict()


def cmd_eval(args) -> dict:
    exp = Experiment.load(args.triples, args.dataset)
    predictions = read_predictions(args.predictions)
    report = mean_recall(predictions, [r.annotation for r in exp.records], exp.corpus.relations)
    out = _out_dir(args)
    if out is not None:
        (out / "report.json").write_text(report.to_json() + "\n")
    return report.to_dict()


def cmd_ablate(args) -> dict:
    if args.seed is None and not args.config:
        args.seed = 42
    grid = ablation_grid(args.axis, args.row)
    cfg = _load_run_config(args)
    if cfg.seed is None:
        cfg = cfg.replace(seed=42)
    exp = Experiment.load(cfg.triples, cfg.dataset, cfg.weights)
    rows = run_ablation(exp, cfg, grid)
    out = _out_dir(args, cfg.out)
    if out is not None:
        (out / "ablation.json").write_text(dump_json(rows))
        (out / "ablation.md").write_text(format_ablation(rows))
    return {"rows": rows, "table": format_ablation(rows)}


def cmd_synth(args) -> dict:
    if not args.out:
        raise ConfigError("--out is required")
    seed = 42 if args.seed is None else args.seed
    sizes = synth.SynthSizes(images=args.images, distractor_triples=args.distractors)
    return synth.generate(args.out, seed, sizes)


COMMANDS = {
    "build-trie": cmd_build_trie,
    "decode": cmd_decode,
    "highlight": cmd_highlight,
    "run": cmd_run,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
    except (ConfigError, CorpusError, ValueError, KeyError, OSError, RuntimeError) as exc:
        print(json.dumps({"error": str(exc), "command": args.command}), file=sys.stderr)
        return 1
    sys.stdout.write(dump_json(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
