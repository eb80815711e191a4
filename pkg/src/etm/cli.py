"""Command-line pipeline: preprocess -> cluster -> train -> report, plus synth.

Every stage reads and writes flat files in ``--out-dir``:

    corpus.json       tokenized corpus, vocabulary, gold labels (preprocess)
    assignment.tsv    ``text_id<TAB>pseudo_id`` per text (cluster)
    model.json        model dump, see ``etm.model_io`` (train)
    topics.tsv        topic id, then ``word:phi`` cells (report)
    text_topics.tsv   ``text_id<TAB>topic`` per text (report)
    nmi.txt           NMI summary (report)
"""
from __future__ import annotations

import argparse
import logging
import statistics
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .clustering import cluster_distances, default_L, load_assignment, save_assignment
from .corpus import EmptyCorpusError, load_corpus, preprocess, read_labels, read_lines, read_stopwords, save_corpus
from .embeddings import EmbeddingLoadError, load_embeddings
from .evaluation import export_topics, nmi
from .inference import ModelParams, assign_short_text, build_neighbors, estimate, run_gibbs, top_words
from .model_io import load_model, save_model
from .pipeline import distances_for, nmi_over_runs
from .synthetic import planted_short_texts, write_dataset

logger = logging.getLogger("etm")

EXIT_ERROR = 1
EXIT_MISSING = 2
EXIT_EMPTY = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


def _existing(path: str | None, what: str, hint: str = "") -> Path | None:
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{what} not found: {p}{hint}", EXIT_MISSING)
    return p


def _params(args) -> ModelParams:
    try:
        return ModelParams(
            K=args.num_topics,
            alpha=args.alpha,
            beta=args.beta,
            lam=args.lam,
            corr_threshold=args.corr_threshold,
            iterations=args.iterations,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _corpus(out_dir: Path):
    path = _existing(str(out_dir / "corpus.json"), "corpus artifact", "; run `etm preprocess` first")
    return load_corpus(path)


def _embeddings(args, corpus):
    path = _existing(args.embeddings, "embeddings file")
    try:
        return load_embeddings(path, restrict_vocab=corpus.vocabulary)
    except EmbeddingLoadError as exc:
        raise CliError(str(exc)) from None


def cmd_preprocess(args) -> None:
    corpus_path = _existing(args.corpus, "corpus file")
    stop_path = _existing(args.stopwords, "stopwords file")
    labels_path = _existing(args.labels, "labels file")
    lines = read_lines(corpus_path)
    stopwords = read_stopwords(stop_path) if stop_path else set()
    labels = read_labels(labels_path) if labels_path else None
    try:
        corpus = preprocess(lines, stopwords, args.min_len, args.max_len, args.min_freq, labels=labels)
    except EmptyCorpusError as exc:
        raise CliError(str(exc), EXIT_EMPTY) from None
    args.out_dir.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, args.out_dir / "corpus.json")
    print(f"texts: {corpus.n}")
    print(f"vocabulary: {corpus.V}")
    print(f"dropped: {len(corpus.dropped_lines)}")


def cmd_cluster(args) -> None:
    corpus = _corpus(args.out_dir)
    table = _embeddings(args, corpus)
    if args.num_pseudo is None:
        L = default_L(corpus.n)
        logger.info("using L = max(1, n/50) = %d pseudo-texts for n = %d", L, corpus.n)
    else:
        L = args.num_pseudo
    if not 1 <= L <= corpus.n:
        raise CliError(f"--num-pseudo must lie in 1..{corpus.n}, got {L}")
    pseudo = cluster_distances(distances_for(corpus, table, args.exact), L, args.cluster_max_iters, args.seed)
    save_assignment(pseudo, args.out_dir / "assignment.tsv")
    sizes = sorted((len(m) for m in pseudo.members), reverse=True)
    print(f"pseudo-texts: {L}")
    print(f"largest: {sizes[0]}  smallest: {sizes[-1]}")


def cmd_train(args) -> None:
    corpus = _corpus(args.out_dir)
    assignment_path = _existing(
        str(args.out_dir / "assignment.tsv"), "assignment file", "; run `etm cluster` first"
    )
    pseudo = load_assignment(assignment_path)
    if len(pseudo) != corpus.n:
        raise CliError(f"assignment covers {len(pseudo)} texts but the corpus has {corpus.n}; rerun `etm cluster`")
    table = _embeddings(args, corpus) if args.embeddings else None
    params = _params(args)
    if table is None and params.lam > 0:
        logger.warning("no --embeddings given: correlation graph is empty, sampling plain LDA")
    neighbors = build_neighbors(pseudo, corpus, table, params.corr_threshold)
    logger.info("correlation edges: %d", int(neighbors.edge_counts.sum()))
    state = run_gibbs(pseudo, corpus, neighbors, params)
    est = estimate(state, params, corpus.vocabulary)
    save_model(args.out_dir / "model.json", params, state, est, pseudo, corpus.vocabulary)
    print(f"model written to {args.out_dir / 'model.json'}")


def cmd_report(args) -> None:
    corpus = _corpus(args.out_dir)
    model_path = _existing(str(args.out_dir / "model.json"), "model dump", "; run `etm train` first")
    dump = load_model(model_path)
    est = dump.estimates
    export_topics(est, args.out_dir / "topics.tsv", args.n_words)
    index = {w: i for i, w in enumerate(dump.vocabulary)}
    preds = []
    with (args.out_dir / "text_topics.tsv").open("w", encoding="utf-8") as fh:
        for text in corpus.texts:
            ids = [index.get(corpus.vocabulary[t]) for t in text.tokens]
            k = assign_short_text(ids, est)[0]
            preds.append(k)
            fh.write(f"{text.id}\t{k}\n")
    for k in range(est.K):
        print(f"topic {k}: " + " ".join(top_words(est, k, args.n_words)))
    gold = corpus.gold_labels()
    if gold is None:
        line = "NMI: n/a"
    else:
        if args.embeddings:
            table = _embeddings(args, corpus)
            params = dump.params
            if args.seed is not None:
                params = replace(params, seed=args.seed)
            scores = nmi_over_runs(corpus, table, params, args.runs, L=dump.pseudo_texts.L,
                                   cluster_max_iters=args.cluster_max_iters)
        else:
            scores = [nmi(preds, gold)]
        std = statistics.pstdev(scores) if len(scores) > 1 else 0.0
        line = f"NMI: {statistics.fmean(scores):.4f} ± {std:.4f} over {len(scores)} run(s)"
    (args.out_dir / "nmi.txt").write_text(line + "\n", encoding="utf-8")
    print(line)


def cmd_synth(args) -> None:
    data = planted_short_texts(
        n=args.num_texts, K=args.num_topics, words_per_topic=args.words_per_topic,
        max_len=args.max_text_len, seed=args.seed,
    )
    paths = write_dataset(data, args.out_dir)
    for name, path in paths.items():
        print(f"{name}: {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", type=Path, required=True, help="artifact directory")

    seed = argparse.ArgumentParser(add_help=False)
    seed.add_argument("--seed", type=int, default=0)

    emb = argparse.ArgumentParser(add_help=False)
    emb.add_argument("--embeddings", help="text embedding file: word v1 ... vd per line")

    clus = argparse.ArgumentParser(add_help=False)
    clus.add_argument("--cluster-max-iters", type=int, default=100)

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--num-topics", "-K", type=int, required=True)
    model.add_argument("--alpha", type=float, default=0.1)
    model.add_argument("--beta", type=float, default=0.1)
    model.add_argument("--lambda", dest="lam", type=float, default=1.0)
    model.add_argument("--corr-threshold", type=float, default=0.4)
    model.add_argument("--iterations", type=int, default=1000)

    p = sub.add_parser("preprocess", parents=[common], help="clean raw texts and build the vocabulary")
    p.add_argument("--corpus", required=True, help="raw texts, one per line")
    p.add_argument("--stopwords", help="stopword file, whitespace-separated")
    p.add_argument("--labels", help="integer label per line, aligned with --corpus")
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--max-len", type=int, default=20)
    p.add_argument("--min-freq", type=int, default=3)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("cluster", parents=[common, emb, seed, clus], help="aggregate texts into pseudo-texts")
    p.add_argument("--num-pseudo", type=int, help="number of pseudo-texts (default n/50)")
    p.add_argument("--exact", action="store_true", help="exact WMD instead of the relaxed bound")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("train", parents=[common, emb, seed, model], help="fit topics on the pseudo-texts")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("report", parents=[common, emb, clus], help="topic report, text topics, NMI")
    p.add_argument("--n-words", type=int, default=10)
    p.add_argument("--runs", type=int, default=1, help="end-to-end runs for NMI mean/std")
    p.add_argument("--seed", type=int, default=None, help="base seed for NMI runs (default: model's)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", parents=[common, seed], help="write a planted short-text dataset")
    p.add_argument("--num-texts", type=int, default=1000)
    p.add_argument("--num-topics", type=int, default=5)
    p.add_argument("--words-per-topic", type=int, default=100)
    p.add_argument("--max-text-len", type=int, default=10)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
