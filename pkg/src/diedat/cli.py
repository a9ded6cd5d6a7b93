"""Command-line entry point: preprocess, synth, embed, train, eval, predict.

Every command is deterministic given its seed flags, exits 0 on success and
nonzero with a one-line diagnostic on failure. Input text must already be
tokenized (whitespace tokens); no tokenizer is bundled.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from diedat import corpus, embedding, evaluation, kernels, model as model_mod, train as train_mod
from diedat.errors import ConfigError, DiedatError


def _add_preprocess(sub):
    p = sub.add_parser("preprocess", help="mask, window and split a corpus into dataset TSVs")
    p.add_argument("--in", dest="infile", required=True, help="corpus file")
    p.add_argument("--format", choices=("plain", "tagged"), default="plain")
    p.add_argument("--mode", choices=corpus.WINDOW_MODES, default="windowed_no_boundaries")
    p.add_argument("--radius", type=int, default=5, help="tokens kept on each side of the mask")
    p.add_argument("--out", required=True, help="dataset TSV with every sample")
    p.add_argument("--splits", help="directory for train/validation/test TSVs")
    p.add_argument("--seed", type=int, default=0, help="split shuffle seed")


def _add_synth(sub):
    p = sub.add_parser("synth", help="generate a synthetic labeled corpus (tagged format)")
    p.add_argument("--n", type=int, required=True, help="number of sentences")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lexicon", help="lexicon JSON; omit to use the built-in one")
    p.add_argument("--cross-fraction", type=float, default=0.25,
                   help="fraction of two-sentence documents with a cross-sentence antecedent")
    p.add_argument("--out", required=True)


def _add_embed(sub):
    p = sub.add_parser("embed", help="train skip-gram word embeddings")
    p.add_argument("--in", dest="infile", required=True, help="corpus file")
    p.add_argument("--format", choices=("plain", "tagged"), default="plain")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--out", required=True, help="vectors file (word2vec text format)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--min-count", type=int, default=1)


def _add_train(sub):
    p = sub.add_parser("train", help="train a classifier and write a checkpoint")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--arch", choices=model_mod.ARCHITECTURES,
                   help="overrides the config's architecture")
    p.add_argument("--train", dest="train_path", help="training split TSV")
    p.add_argument("--val", dest="val_path", help="validation split TSV")
    p.add_argument("--embeddings", dest="embeddings_path",
                   help="pretrained vectors (word2vec text format)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--threads", type=int, help="reserved; training is sequential")
    p.add_argument("--out", required=True, help="checkpoint directory")


def _add_eval(sub):
    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset TSV")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--task", choices=("diedat", "pos", "both"), default="diedat")
    p.add_argument("--tsv", help="also write the metrics as TSV to this path")


def _add_predict(sub):
    p = sub.add_parser("predict", help="flag and correct die/dat in tokenized text")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", dest="infile", required=True, help="tokenized text, plain format")
    p.add_argument("--out", help="report TSV; stdout when omitted")


def _cmd_preprocess(args) -> int:
    docs = corpus.ingest(args.infile, args.format)
    samples = []
    for doc in docs:
        samples.extend(corpus.mask_occurrences(doc, args.mode, args.radius))
    corpus.write_dataset_tsv(samples, args.out)
    if args.splits:
        splits_dir = Path(args.splits)
        splits_dir.mkdir(parents=True, exist_ok=True)
        ds = corpus.split(samples, args.seed)
        corpus.write_dataset_tsv(ds.train, splits_dir / "train.tsv")
        corpus.write_dataset_tsv(ds.validation, splits_dir / "validation.tsv")
        corpus.write_dataset_tsv(ds.test, splits_dir / "test.tsv")
    print(corpus.format_stats(corpus.stats(samples)))
    return 0


def _cmd_synth(args) -> int:
    lexicon = corpus.Lexicon.from_json(args.lexicon) if args.lexicon else None
    docs = corpus.generate_synthetic(args.n, args.seed, lexicon, args.cross_fraction)
    corpus.write_tagged(docs, args.out)
    print(f"wrote {len(docs)} documents to {args.out}")
    return 0


def _cmd_embed(args) -> int:
    docs = corpus.ingest(args.infile, args.format)
    table = embedding.train_skipgram(
        docs, args.dim, window=args.window, negatives=args.negatives,
        epochs=args.epochs, lr=args.lr, seed=args.seed, min_count=args.min_count)
    embedding.save_word2vec(table, args.out)
    print(f"wrote {len(table.vocab)} vectors of dim {table.dim} to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = train_mod.TrainConfig()
    if args.config:
        cfg = train_mod.config_from_mapping(train_mod.parse_config_file(args.config), cfg)
    overrides = {}
    for key in ("arch", "train_path", "val_path", "embeddings_path",
                "epochs", "batch_size", "layers", "threads"):
        value = getattr(args, key, None)
        if value is not None:
            overrides["architecture" if key == "arch" else key] = str(value)
    cfg = train_mod.config_from_mapping(overrides, cfg)
    if not cfg.train_path or not cfg.val_path:
        raise ConfigError("train needs --train and --val dataset TSVs (or config keys)")
    train_samples = corpus.read_dataset_tsv(cfg.train_path)
    val_samples = corpus.read_dataset_tsv(cfg.val_path)
    if cfg.architecture != "binary" and all(s.pos_label is None for s in train_samples):
        raise ConfigError(
            "multitask training needs POS labels; preprocess a tagged corpus "
            "or train --arch binary")
    embeddings = None
    vocab = None
    if cfg.embeddings_path:
        embeddings = embedding.load_word2vec(cfg.embeddings_path)
    else:
        vocab = embedding.build_vocab_from_windows(
            (s.window_tokens for s in train_samples), cfg.min_count)
    model, history = train_mod.train(cfg, train_samples, val_samples, vocab, embeddings)
    out_dir = Path(args.out)
    model_mod.save_checkpoint(model, out_dir, extra_hyper={
        "window_mode": cfg.window_mode, "radius": cfg.radius})
    train_mod.write_history_tsv(history, out_dir / "history.tsv")
    picked = history.epochs[history.selected_epoch]
    print(f"backend: {kernels.BACKEND}")
    print(f"selected epoch {picked.epoch}: validation accuracy {picked.val_accuracy:.4f}, "
          f"balanced accuracy {picked.val_balanced_accuracy:.4f}")
    return 0


def _cmd_eval(args) -> int:
    loaded, _ = model_mod.load_checkpoint(args.ckpt)
    samples = corpus.read_dataset_tsv(args.data)
    reports = evaluation.evaluate(loaded, samples, args.task)
    titles = {"diedat": "die/dat prediction", "pos": "POS prediction"}
    blocks = [evaluation.format_report(rep, titles[task]) for task, rep in reports.items()]
    print("\n\n".join(blocks))
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            for task, rep in reports.items():
                fh.write(evaluation.report_tsv(rep, task) + "\n")
    return 0


def _cmd_predict(args) -> int:
    loaded, hyper = model_mod.load_checkpoint(args.ckpt)
    mode = hyper.get("window_mode", "windowed_no_boundaries")
    radius = hyper.get("radius", 5)
    docs = corpus.ingest(args.infile, "plain")
    rows = ["location\twritten\tpredicted\tprobability"
            + ("\tpos" if loaded.is_multitask else "") + "\tflag"]
    for doc in docs:
        for sample in corpus.mask_occurrences(doc, mode, radius):
            doc_id, s_i, t_i = sample.provenance
            written = doc.sentences[s_i].tokens[t_i].surface
            if loaded.is_multitask:
                p_dd, p_pos, _ = loaded.forward(sample.window_tokens)
                pos = corpus.POS_NAMES[int(np.argmax(p_pos))]
            else:
                p_dd, _ = loaded.forward(sample.window_tokens)
                pos = None
            pred = int(np.argmax(p_dd))
            predicted = corpus.TARGET_NAMES[pred]
            flag = "correction" if predicted != written.lower() else "-"
            row = (f"{doc_id}:{s_i}:{t_i}\t{written}\t{predicted}\t{p_dd[pred]:.4f}")
            if pos is not None:
                row += f"\t{pos}"
            rows.append(row + f"\t{flag}")
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "preprocess": _cmd_preprocess,
    "synth": _cmd_synth,
    "embed": _cmd_embed,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "predict": _cmd_predict,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diedat",
        description="Dutch die/dat prediction: preprocessing, embeddings, "
                    "BiLSTM classifiers, evaluation and correction.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_preprocess(sub)
    _add_synth(sub)
    _add_embed(sub)
    _add_train(sub)
    _add_eval(sub)
    _add_predict(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DiedatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
