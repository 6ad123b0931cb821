"""Command-line driver: ``stx <command> [options]``.

Commands: synth, prepare, thesaurus, expand, train, evaluate, sweep,
grid-search. Pipeline settings come from defaults, then an optional JSON
``--config`` file, then flags (flags win). ``STX_SEED`` replaces the default
seed. Exit codes: 0 ok, 1 runtime error, 2 usage error, 3 data error.

Every command writes ``manifest.json`` next to its outputs. Primary outputs
are deterministic given the manifest; timestamps go to ``run.log`` only.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
import time
from collections import Counter
from dataclasses import replace
from pathlib import Path

from . import __version__
from .corpus import filter_corpus, ingest, read_documents
from .errors import StxError
from .evaluation import cross_validate, grid_search, score
from .expansion import (ExpansionConfig, build_category_thesaurus, build_hashtag_thesaurus,
                        expand_corpus, load_thesaurus)
from .features import Vocabulary, count_matrix, tfidf
from .learners import load_model, predict
from .pipeline import PipelineConfig, fit_pipeline
from .synth import make_world
from .taxonomy import load_taxonomy, resolve_all
from .textprep import load_stop_lists, normalize_record

logger = logging.getLogger("stx")

SWEEP_AXES = ("keep_fraction", "expansion_n", "class_weight", "C")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- file output

def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=1) + "\n"


def _jsonl(items) -> str:
    return "".join(json.dumps(i.to_json() if hasattr(i, "to_json") else i,
                              sort_keys=True, ensure_ascii=False) + "\n" for i in items)


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Collects the manifest for one command and writes it with the outputs."""

    def __init__(self, command: str, out_dir, config: dict, inputs: dict):
        self.out_dir = Path(out_dir)
        self.manifest = {
            "command": command,
            "version": __version__,
            "config": config,
            "inputs": {k: (file_hash(v) if v else None) for k, v in sorted(inputs.items())},
        }
        self.hash = hashlib.sha256(_dumps(self.manifest).encode()).hexdigest()
        self.outputs = []

    def write(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        write_atomic(path, text)
        self.outputs.append(name)
        return path

    def write_json(self, name: str, obj: dict) -> Path:
        obj = dict(obj, manifest_hash=self.hash)
        return self.write(name, _dumps(obj))

    def finish(self) -> None:
        manifest = dict(self.manifest, manifest_hash=self.hash, outputs=sorted(self.outputs))
        write_atomic(self.out_dir / "manifest.json", _dumps(manifest))
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with open(self.out_dir / "run.log", "a", encoding="utf-8") as fh:
            fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {self.manifest['command']} "
                     f"manifest={self.hash} outputs={','.join(sorted(self.outputs))}\n")


# ---------------------------------------------------------------- config

def default_seed() -> int:
    raw = os.environ.get("STX_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"STX_SEED must be an integer, got {raw!r}") from None


def _parse_class_weights(items):
    out = {}
    for item in items or ():
        cls, sep, w = item.rpartition("=")
        if not sep or not cls:
            raise UsageError(f"--class-weight expects CLASS=WEIGHT, got {item!r}")
        out[cls] = float(w)
    return out


PIPELINE_FLAGS = {
    "ngram_max": "ngram_max", "min_df": "min_df", "keep_fraction": "keep_fraction",
    "learner": "learner", "C": "C", "majority_weight": "majority_weight", "epochs": "epochs",
    "alpha": "alpha", "expansion": "expansion", "expansion_side": "expansion_side",
    "expansion_n": "expansion_n", "category_weighting": "category_weighting",
    "thesaurus_depth": "thesaurus_depth",
}


def resolve_settings(args) -> tuple:
    """Merge defaults < config file < flags into ``(PipelineConfig, protocol)``."""
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
    pipe = dict(file_cfg.get("pipeline", {}))
    proto = {"folds": 5, "test_fraction": 0.25, "seed": default_seed()}
    proto.update(file_cfg.get("protocol", {}))
    for attr, key in PIPELINE_FLAGS.items():
        val = getattr(args, attr, None)
        if val is not None:
            pipe[key] = val
    if getattr(args, "nb_counts", False):
        pipe["nb_counts"] = True
    cw = _parse_class_weights(getattr(args, "class_weight", None))
    if cw:
        pipe["class_weights"] = {**pipe.get("class_weights", {}), **cw}
    for key in ("folds", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            proto[key] = val
    pipe["seed"] = proto["seed"]
    try:
        config = PipelineConfig.from_json(pipe)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    paths = dict(file_cfg.get("paths", {}))
    return config, proto, paths


def _stops(args):
    return load_stop_lists(getattr(args, "stop_general", None), getattr(args, "stop_twitter", None))


def _require_file(path, flag):
    if not path:
        raise UsageError(f"{flag} is required")
    if not os.path.isfile(path):
        raise UsageError(f"{flag}: no such file {path!r}")
    return path


def _path(args, paths, attr, key, flag, required=True):
    val = getattr(args, attr, None) or paths.get(key)
    if val is None and not required:
        return None
    return _require_file(val, flag)


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    if args.seed is None:
        args.seed = int(os.environ.get("STX_SEED", 42))
    world = make_world(args.classes, args.vocab_size, args.noise, hashtags_per_class=args.hashtags,
                       hashtag_rate=args.hashtag_rate, seed=args.seed)
    cfg = {k: getattr(args, k) for k in ("classes", "docs_per_class", "vocab_size", "noise", "hashtags",
                                         "hashtag_rate", "retweet_rate", "unlabeled", "seed")}
    run = Run("synth", args.out, cfg, {})
    run.write("corpus.jsonl", _jsonl(world.labeled_records(args.docs_per_class, args.retweet_rate)))
    run.write("taxonomy.jsonl", _jsonl(world.taxonomy_lines()))
    if args.unlabeled:
        run.write("unlabeled.jsonl", _jsonl(world.unlabeled_records(args.unlabeled)))
    run.finish()
    print(f"wrote synthetic corpus to {args.out}")
    return 0


def _distribution_csv(docs, names, top=3) -> str:
    words = {}
    for d in docs:
        words.setdefault(d.label, Counter()).update(t for t in d.tokens if not t.startswith("#"))
    counts = Counter(d.label for d in docs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["category", "name", "count", "top_keywords"])
    for cat, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        kws = [t for t, _ in sorted(words[cat].items(), key=lambda kv: (-kv[1], kv[0]))[:top]]
        w.writerow([cat, names.get(cat, cat), n, " ".join(kws)])
    return buf.getvalue()


def cmd_prepare(args) -> int:
    _, proto, paths = resolve_settings(args)
    corpus_path = _path(args, paths, "corpus", "corpus", "--corpus")
    tax_path = _path(args, paths, "taxonomy", "taxonomy", "--taxonomy")
    stops = _stops(args)
    stream = ingest(corpus_path, args.source)
    records = list(stream)
    graph = load_taxonomy(tax_path)
    nodes = [r.label_node for r in records if r.label_node is not None]
    report = resolve_all(graph, nodes, proto["seed"])
    labels = {r.id: report.resolved[r.label_node] for r in records
              if r.label_node is not None and r.label_node in report.resolved}
    corpus = filter_corpus(records, labels, args.min_class_size)
    docs = [normalize_record(r, stops, args.stemmer) for r in corpus]
    cfg = {"min_class_size": args.min_class_size, "stemmer": args.stemmer, "source": args.source,
           "seed": proto["seed"], "stop_lists": stops.hashes}
    run = Run("prepare", args.out, cfg, {"corpus": corpus_path, "taxonomy": tax_path})
    run.write("labeled.jsonl", _jsonl(docs))
    run.write("distribution.csv", _distribution_csv(docs, graph.names))
    run.write_json("resolution.json", dict(report.to_json(), ingest={
        "read": stream.summary.read, "skipped": stream.summary.skipped}))
    run.finish()
    print(f"{len(docs)} documents in {len(corpus.class_counts)} classes "
          f"({stream.summary.skipped} lines skipped, {len(report.errors)} unresolved nodes)")
    return 0


def cmd_thesaurus(args) -> int:
    inp = _require_file(args.input, "--input")
    stops = _stops(args)
    docs = read_documents(inp, stops, args.stemmer)
    if args.kind == "hashtag":
        th = build_hashtag_thesaurus(docs, stops, args.max_depth, args.min_support)
    else:
        th = build_category_thesaurus(docs, args.weighting, args.max_depth, stops)
    cfg = {"kind": args.kind, "weighting": args.weighting, "max_depth": args.max_depth,
           "min_support": args.min_support, "stop_lists": stops.hashes}
    out = Path(args.out)
    run = Run("thesaurus", out.parent, cfg, {"input": inp})
    run.write_json(out.name, th.to_json())
    run.finish()
    print(f"{len(th)} keys written to {out}")
    return 0


def cmd_expand(args) -> int:
    inp = _require_file(args.corpus, "--corpus")
    th = load_thesaurus(_require_file(args.thesaurus, "--thesaurus"))
    seed = args.seed if args.seed is not None else default_seed()
    config = ExpansionConfig(args.n, seed, args.side)
    docs = read_documents(inp, _stops(args), args.stemmer)
    expanded, stats = expand_corpus(docs, th, config, args.split)
    out = Path(args.out)
    cfg = {"n": args.n, "seed": seed, "side": args.side, "split": args.split}
    run = Run("expand", out.parent, cfg, {"corpus": inp, "thesaurus": args.thesaurus})
    run.write(out.name, _jsonl(expanded))
    run.write_json(out.stem + ".stats.json", stats.to_json())
    run.finish()
    print(f"documents touched: {stats.documents_touched}, words added: {stats.words_added}")
    return 0


def _load_training(args, paths):
    corpus_path = _path(args, paths, "corpus", "corpus", "--corpus")
    docs = read_documents(corpus_path, _stops(args), getattr(args, "stemmer", "suffix"))
    if any(d.label is None for d in docs):
        raise UsageError(f"{corpus_path}: every document needs a root_category")
    th_path = _path(args, paths, "hashtag_thesaurus", "hashtag_thesaurus", "--hashtag-thesaurus",
                    required=False)
    th = load_thesaurus(th_path) if th_path else None
    inputs = {"corpus": corpus_path, "hashtag_thesaurus": th_path}
    return docs, th, inputs


def cmd_train(args) -> int:
    config, proto, paths = resolve_settings(args)
    docs, th, inputs = _load_training(args, paths)
    fitted = fit_pipeline(docs, config, th)
    model = fitted.model_snapshot()
    run = Run("train", args.out, {"pipeline": config.to_json(), "protocol": proto}, inputs)
    run.write_json("model.json", model.to_json())
    run.finish()
    print(f"trained {model.kind} on {len(docs)} documents, {model.n_features} features")
    return 0


def _write_report(run: Run, report, fmt: str, extra=None) -> None:
    if fmt in ("json", "both"):
        obj = report.to_json()
        if extra:
            obj.update(extra)
        run.write_json("metrics.json", obj)
    if fmt in ("csv", "both"):
        run.write("metrics.csv", report.to_csv())


def cmd_evaluate(args) -> int:
    config, proto, paths = resolve_settings(args)
    if args.model:
        model_path = _require_file(args.model, "--model")
        corpus_path = _path(args, paths, "corpus", "corpus", "--corpus")
        model = load_model(model_path)
        docs = read_documents(corpus_path, _stops(args), args.stemmer)
        vocab = Vocabulary.from_json(model.vocabulary)
        pipe_cfg = PipelineConfig.from_json(model.config.get("pipeline", config.to_json()))
        X = count_matrix(docs, vocab) if (pipe_cfg.learner == "nb" and pipe_cfg.nb_counts) else tfidf(docs, vocab)
        X = X.select_columns(model.feature_mask)
        report = score(predict(model, X), [d.label for d in docs], {"model": model_path})
        run = Run("evaluate", args.out, {"mode": "holdout"}, {"model": model_path, "corpus": corpus_path})
        _write_report(run, report, args.format)
    else:
        docs, th, inputs = _load_training(args, paths)
        result = cross_validate(config, docs, proto["folds"], proto["seed"], th)
        report = result.mean
        run = Run("evaluate", args.out, {"pipeline": config.to_json(), "protocol": proto}, inputs)
        _write_report(run, report, args.format, {"folds": [f.to_json() for f in result.folds]})
    run.finish()
    m = report.macro
    print(f"macro P={m['precision']:.4f} R={m['recall']:.4f} F1={m['f1']:.4f}")
    return 0


def _sweep_config(config: PipelineConfig, axis: str, value: float):
    if axis == "keep_fraction":
        return replace(config, keep_fraction=float(value))
    if axis == "C":
        return replace(config, C=float(value))
    if axis == "expansion_n":
        if float(value) != int(value):
            raise UsageError("expansion_n values must be integers")
        return replace(config, expansion_n=int(value), expansion=config.expansion or "hashtag")
    if axis == "class_weight":
        return replace(config, majority_weight=float(value))
    raise UsageError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def cmd_sweep(args) -> int:
    config, proto, paths = resolve_settings(args)
    if args.axis not in SWEEP_AXES:
        raise UsageError(f"unknown sweep axis {args.axis!r}; choose from {SWEEP_AXES}")
    docs, th, inputs = _load_training(args, paths)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([args.axis, "macro_f1", "macro_precision", "macro_recall"])
    for value in args.values:
        cfg = _sweep_config(config, args.axis, value)
        res = cross_validate(cfg, docs, proto["folds"], proto["seed"], th)
        m = res.mean.macro
        w.writerow([repr(value), repr(m["f1"]), repr(m["precision"]), repr(m["recall"])])
        logger.info("%s=%s macro-F1=%.4f", args.axis, value, m["f1"])
    out = Path(args.out)
    run = Run("sweep", out.parent, {"pipeline": config.to_json(), "protocol": proto,
                                    "axis": args.axis, "values": args.values}, inputs)
    run.write(out.name, buf.getvalue())
    run.finish()
    print(buf.getvalue(), end="")
    return 0


def cmd_grid_search(args) -> int:
    config, proto, paths = resolve_settings(args)
    docs, th, inputs = _load_training(args, paths)
    result = grid_search(config, docs, args.candidates, proto["folds"], proto["seed"], th)
    run = Run("grid-search", args.out, {"pipeline": config.to_json(), "protocol": proto}, inputs)
    run.write_json("grid.json", result.to_json())
    run.finish()
    for c, s in zip(result.candidates, result.scores):
        print(f"C={c:g} macro-F1={s:.4f}")
    print(f"chosen C={result.chosen:g}")
    return 0


# ---------------------------------------------------------------- parser

def _add_text_opts(p):
    p.add_argument("--stop-general", help="general stop-word file (default: bundled list)")
    p.add_argument("--stop-twitter", help="platform stop-word file (default: bundled list)")
    p.add_argument("--stemmer", choices=("none", "suffix"), default="suffix")


def _add_pipeline_opts(p):
    p.add_argument("--config", help="JSON config with 'paths', 'pipeline', 'protocol' sections")
    p.add_argument("--corpus", help="labeled corpus (JSON Lines, from 'prepare')")
    p.add_argument("--hashtag-thesaurus", dest="hashtag_thesaurus")
    p.add_argument("--ngram-max", dest="ngram_max", type=int, choices=(1, 2))
    p.add_argument("--min-df", dest="min_df", type=int)
    p.add_argument("--keep-fraction", dest="keep_fraction", type=float)
    p.add_argument("--learner", choices=("nb", "logreg", "svm"))
    p.add_argument("--C", dest="C", type=float)
    p.add_argument("--class-weight", dest="class_weight", action="append", metavar="CLASS=W")
    p.add_argument("--majority-weight", dest="majority_weight", type=float,
                   help="class weight for the largest training class")
    p.add_argument("--epochs", type=int)
    p.add_argument("--alpha", type=float, help="naive Bayes smoothing")
    p.add_argument("--nb-counts", dest="nb_counts", action="store_true",
                   help="feed raw counts (not TF-IDF) to naive Bayes")
    p.add_argument("--expansion", choices=("hashtag", "category"))
    p.add_argument("--expansion-side", dest="expansion_side", choices=("document", "query", "both"))
    p.add_argument("--expansion-n", dest="expansion_n", type=int)
    p.add_argument("--category-weighting", dest="category_weighting", choices=("tfidf", "frequency"))
    p.add_argument("--thesaurus-depth", dest="thesaurus_depth", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    _add_text_opts(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stx", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus, taxonomy and unlabeled stream")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=6)
    p.add_argument("--docs-per-class", dest="docs_per_class", type=int, default=200)
    p.add_argument("--vocab-size", dest="vocab_size", type=int, default=30)
    p.add_argument("--noise", type=float, default=0.2)
    p.add_argument("--hashtags", type=int, default=3, help="hashtags per class")
    p.add_argument("--hashtag-rate", dest="hashtag_rate", type=float, default=0.5)
    p.add_argument("--retweet-rate", dest="retweet_rate", type=float, default=0.1)
    p.add_argument("--unlabeled", type=int, default=5000)
    p.add_argument("--seed", type=int, help="default: $STX_SEED, else 42")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prepare", help="ingest, resolve roots, filter and normalize")
    p.add_argument("--config")
    p.add_argument("--corpus")
    p.add_argument("--taxonomy")
    p.add_argument("--out", required=True)
    p.add_argument("--source", choices=("twitter", "amazon"), default="twitter")
    p.add_argument("--min-class-size", dest="min_class_size", type=int, default=5)
    p.add_argument("--seed", type=int)
    _add_text_opts(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("thesaurus", help="build a hashtag or category thesaurus")
    p.add_argument("--kind", choices=("hashtag", "category"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--weighting", choices=("tfidf", "frequency"), default="tfidf")
    p.add_argument("--max-depth", dest="max_depth", type=int, default=20)
    p.add_argument("--min-support", dest="min_support", type=int, default=2)
    _add_text_opts(p)
    p.set_defaults(func=cmd_thesaurus)

    p = sub.add_parser("expand", help="expand a corpus with a thesaurus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--thesaurus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--side", choices=("document", "query", "both"), default="both")
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.add_argument("--seed", type=int)
    _add_text_opts(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("train", help="fit a pipeline and write model.json")
    _add_pipeline_opts(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validate, or score a saved model with --model")
    _add_pipeline_opts(p)
    p.add_argument("--model")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="cross-validate over a list of values for one setting")
    _add_pipeline_opts(p)
    p.add_argument("--axis", required=True, help=f"one of {', '.join(SWEEP_AXES)}")
    p.add_argument("--values", type=float, nargs="+", required=True)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grid-search", help="choose the SVM's C by cross-validated macro-F1")
    _add_pipeline_opts(p)
    p.add_argument("--candidates", type=float, nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"stx: error: {exc}", file=sys.stderr)
        return 2
    except StxError as exc:
        print(f"stx: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"stx: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
