"""Command-line interface.

Every subcommand accepts --seed and --config; every command that writes
files also writes a manifest (config snapshot, seed, versions) next to its
outputs so a run can be reproduced from the manifest alone.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import experiments, synth
from .baselines import BaselineStrategy, apply_baseline
from .char_lm import CharLmConfig, CharLstmModel, char_lstm_ppl, train_char_lstm
from .corpus import (
    CleaningConfig,
    Corpus,
    FormatConfig,
    Lang,
    build_vocab,
    clean,
    corpus_stats,
    load_corpus,
    save_corpus,
)
from .experiments import (
    RunConfig,
    load_run_config,
    run_config_text,
    run_experiment,
    write_manifest,
    write_table,
)
from .gan import CodeSwitchGan
from .lexicon import load_lexicon, load_pos_lexicon, load_tag_inventory, realize, save_lexicon
from .metrics import MetricReport, metric_report
from .ngram_lm import KNTrigramModel, ngram_ppl, train_kn


def _fmt(args) -> FormatConfig:
    return FormatConfig(tagged=getattr(args, "tagged", False))


def _load_config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _load_pos(args):
    if not getattr(args, "pos_lexicon", None):
        return None
    if not getattr(args, "tags", None):
        raise SystemExit("--pos-lexicon requires --tags")
    with open(args.tags, encoding="utf-8") as f:
        inventory, nouns = load_tag_inventory(f)
    with open(args.pos_lexicon, encoding="utf-8") as f:
        return load_pos_lexicon(f, inventory, nouns)


def _manifest_for(path, command: str, cfg: RunConfig, outputs: list[str]) -> None:
    write_manifest(
        path,
        command=command,
        seed=cfg.seed,
        cfg_text=run_config_text(cfg),
        outputs=outputs,
    )


def cmd_ingest(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(args.corpus, _fmt(args), role=args.role)
    save_corpus(args.out, corpus, tagged=True)
    _manifest_for(args.out + ".manifest.txt", "ingest", cfg, [args.out])
    print(f"ingested {len(corpus)} sentences -> {args.out}")
    return 0


def cmd_stats(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(args.corpus, _fmt(args))
    report = corpus_stats(corpus)
    for name, value in report.as_rows():
        print(f"{name} = {value}")
    if args.csv:
        write_table(args.csv, "name,value", [f"{n},{v}" for n, v in report.as_rows()])
        _manifest_for(args.csv + ".manifest.txt", "stats", cfg, [args.csv])
    return 0


def cmd_clean(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(args.corpus, _fmt(args))
    cleaned, report = clean(
        corpus,
        CleaningConfig(tuple(args.drop_pattern), args.drop_threshold),
    )
    save_corpus(args.out, cleaned, tagged=args.tagged)
    _manifest_for(args.out + ".manifest.txt", "clean", cfg, [args.out])
    print(
        f"removed_tokens = {report.removed_tokens}\n"
        f"dropped_utterances = {report.dropped_utterances}\n"
        f"kept_utterances = {len(cleaned)}"
    )
    return 0


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    rule = experiments.rule_from_settings(cfg.synth)
    sample = synth.synth_corpus(rule, args.n, cfg.seed, split=args.split)
    os.makedirs(args.out_dir, exist_ok=True)
    paths = {
        "host": os.path.join(args.out_dir, "host.txt"),
        "cs": os.path.join(args.out_dir, "cs.txt"),
        "refs": os.path.join(args.out_dir, "refs.tsv"),
        "lexicon": os.path.join(args.out_dir, "lexicon.tsv"),
        "pos_lexicon": os.path.join(args.out_dir, "pos_lexicon.tsv"),
        "tags": os.path.join(args.out_dir, "tags.txt"),
    }
    save_corpus(paths["host"], sample.host, tagged=False)
    save_corpus(paths["cs"], sample.cs, tagged=False)
    synth.save_refs(paths["refs"], list(sample.host), list(sample.masks))
    save_lexicon(paths["lexicon"], rule.lexicon())
    with open(paths["pos_lexicon"], "w", encoding="utf-8") as f:
        for word in rule.words:
            f.write(f"{word}\t{rule.pos[word]}\n")
    with open(paths["tags"], "w", encoding="utf-8") as f:
        for tag in synth.TAG_INVENTORY:
            prefix = "noun:" if tag in rule.noun_tags else ""
            f.write(prefix + tag + "\n")
    _manifest_for(
        os.path.join(args.out_dir, "manifest.txt"),
        "synth",
        cfg,
        sorted(os.path.basename(p) for p in paths.values()),
    )
    print(f"wrote {args.n} sentence pairs to {args.out_dir}")
    return 0


def cmd_train_gan(args) -> int:
    cfg = _load_config(args)
    world = experiments.build_world(cfg)
    model, history = experiments.train_gan_variant(world, cfg, use_pos=args.use_pos)
    model.save(args.out_dir)
    from .gan import history_csv

    history_path = os.path.join(args.out_dir, "history.csv")
    with open(history_path, "w", encoding="utf-8") as f:
        f.write(history_csv(history))
    _manifest_for(
        os.path.join(args.out_dir, "manifest.txt"),
        "train-gan" + (" --use-pos" if args.use_pos else ""),
        cfg,
        ["gan.npz", "vocab.txt", "history.csv"],
    )
    print(f"trained {cfg.train.epochs} epochs -> {args.out_dir}")
    return 0


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    with open(args.lexicon, encoding="utf-8") as f:
        lexicon, _ = load_lexicon(f)
    pos_lexicon = _load_pos(args)
    model = CodeSwitchGan.load(args.model_dir, lexicon, pos_lexicon)
    hosts = load_corpus(args.host, _fmt(args))
    rng = np.random.default_rng(cfg.seed)
    generated = [model.generate(x, args.mode, rng).sentence for x in hosts]
    save_corpus(args.out, Corpus(tuple(generated)), tagged=False)
    _manifest_for(args.out + ".manifest.txt", f"generate --mode {args.mode}", cfg, [args.out])
    print(f"generated {len(generated)} sentences -> {args.out}")
    return 0


def cmd_baseline(args) -> int:
    cfg = _load_config(args)
    with open(args.lexicon, encoding="utf-8") as f:
        lexicon, _ = load_lexicon(f)
    pos_lexicon = _load_pos(args)
    hosts = load_corpus(args.host, _fmt(args))
    strategy = BaselineStrategy(args.baseline, p=args.p)
    rng = np.random.default_rng(cfg.seed)
    out_sentences = []
    uncovered = 0
    for x in hosts:
        result = apply_baseline(strategy, x, lexicon, pos_lexicon, rng)
        out_sentences.append(result.sentence)
        uncovered += result.uncovered
    save_corpus(args.out, Corpus(tuple(out_sentences)), tagged=False)
    _manifest_for(
        args.out + ".manifest.txt", f"baseline --baseline {args.baseline}", cfg, [args.out]
    )
    print(f"uncovered_tokens = {uncovered}")
    return 0


def cmd_train_lm(args) -> int:
    cfg = _load_config(args)
    train_corpus = load_corpus(args.train, _fmt(args))
    if args.kind == "ngram":
        vocab = build_vocab(train_corpus, cfg.model.vocab_max)
        model = train_kn(train_corpus, vocab)
        model.save(args.out)
    else:
        dev = load_corpus(args.dev, _fmt(args)) if args.dev else None
        model = train_char_lstm(train_corpus, experiments.make_charlm_config(cfg), dev)
        model.save(args.out)
    _manifest_for(args.out + ".manifest.txt", f"train-lm --kind {args.kind}", cfg, [args.out])
    print(f"trained {args.kind} model -> {args.out}")
    return 0


def cmd_ppl(args) -> int:
    corpus = load_corpus(args.corpus, _fmt(args))
    if args.kind == "ngram":
        model = KNTrigramModel.load(args.model)
        report = ngram_ppl(model, corpus)
    else:
        model = CharLstmModel.load(args.model)
        report = char_lstm_ppl(model, corpus)
    print(f"log_likelihood = {report.log_likelihood:.6f}")
    print(f"count = {report.count}")
    print(f"ppl = {report.ppl:.6f}")
    print(f"oov_count = {report.oov_count}")
    if args.csv:
        write_table(args.csv, report.CSV_HEADER, [report.csv_row()])
    return 0


def cmd_eval_csp(args) -> int:
    with open(args.lexicon, encoding="utf-8") as f:
        lexicon, _ = load_lexicon(f)
    refs_x, refs_masks = synth.load_refs(args.refs)
    refs_y = [realize(x, m, lexicon) for x, m in zip(refs_x, refs_masks)]
    hyps = list(load_corpus(args.hyps, _fmt(args)))
    if len(hyps) != len(refs_x):
        raise SystemExit(
            f"{len(refs_x)} references but {len(hyps)} hypothesis sentences"
        )
    hyp_masks = [tuple(t.lang is Lang.GUEST for t in h) for h in hyps]
    report = metric_report(refs_y, refs_masks, hyps, hyp_masks)
    print(MetricReport.CSV_HEADER)
    print(report.csv_row())
    return 0


def cmd_augment(args) -> int:
    cfg = _load_config(args)
    with open(args.lexicon, encoding="utf-8") as f:
        lexicon, _ = load_lexicon(f)
    pos_lexicon = _load_pos(args)
    train_corpus = load_corpus(args.train, _fmt(args))
    hosts = load_corpus(args.host, _fmt(args))
    rng = np.random.default_rng(cfg.seed)
    if args.strategy == "gan":
        if not args.model_dir:
            raise SystemExit("--strategy gan requires --model-dir")
        model = CodeSwitchGan.load(args.model_dir, lexicon, pos_lexicon)
        generate_fn = lambda x: model.generate(x, "sample", rng).sentence
    else:
        strategy = BaselineStrategy(args.strategy, p=args.p)
        generate_fn = lambda x: apply_baseline(
            strategy, x, lexicon, pos_lexicon, rng
        ).sentence
    augmented, report = experiments.augment(
        train_corpus, hosts, generate_fn, multiplier=args.multiplier
    )
    save_corpus(args.out, augmented, tagged=False)
    write_table(
        args.out + ".report.csv",
        "strategy,seed,n_original,n_generated",
        [f"{args.strategy},{cfg.seed},{report['n_original']},{report['n_generated']}"],
    )
    _manifest_for(
        args.out + ".manifest.txt",
        f"augment --strategy {args.strategy}",
        cfg,
        [args.out, args.out + ".report.csv"],
    )
    print(f"augmented corpus: {len(augmented)} sentences -> {args.out}")
    return 0


def cmd_experiment(args) -> int:
    cfg = _load_config(args)
    run_experiment(args.exp, cfg, args.out_dir)
    print(f"experiment {args.exp} -> {args.out_dir}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--config", default=None, help="run config (ini)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csgen",
        description="generate and evaluate intra-sentential code-switched text",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, validate and re-serialize a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tagged", action="store_true", help="input carries |h/|g tags")
    p.add_argument("--role", default="unspecified")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="corpus statistics incl. cs-rate")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tagged", action="store_true")
    p.add_argument("--csv", default=None, help="also write a machine-readable table")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("clean", help="remove marker tokens / drop noisy utterances")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tagged", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--drop-pattern", action="append", default=[], metavar="REGEX")
    p.add_argument("--drop-threshold", type=float, default=0.3)
    _add_common(p)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("synth", help="generate a planted-rule synthetic corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, required=True, help="number of sentence pairs")
    p.add_argument("--split", choices=("train", "test"), default="train")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-gan", help="train the switch-point generator")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--use-pos", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_train_gan)

    p = sub.add_parser("generate", help="transform host sentences with a trained model")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--host", required=True)
    p.add_argument("--tagged", action="store_true")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--pos-lexicon", default=None)
    p.add_argument("--tags", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("sample", "threshold"), default="sample")
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("baseline", help="apply a rule-based generator")
    p.add_argument("--baseline", choices=("zh", "en", "random", "noun"), required=True)
    p.add_argument("--p", type=float, default=0.0, help="switch probability for random")
    p.add_argument("--host", required=True)
    p.add_argument("--tagged", action="store_true")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--pos-lexicon", default=None)
    p.add_argument("--tags", default=None)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("train-lm", help="train a language model")
    p.add_argument("--kind", choices=("ngram", "char"), required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", default=None)
    p.add_argument("--tagged", action="store_true")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("ppl", help="score a corpus with a trained model")
    p.add_argument("--kind", choices=("ngram", "char"), required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--tagged", action="store_true")
    p.add_argument("--csv", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_ppl)

    p = sub.add_parser("eval-csp", help="switch-point metrics against gold masks")
    p.add_argument("--refs", required=True, help="reference (sentence, mask) tsv")
    p.add_argument("--hyps", required=True, help="hypothesis corpus")
    p.add_argument("--tagged", action="store_true")
    p.add_argument("--lexicon", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_eval_csp)

    p = sub.add_parser("augment", help="combine training text with generated text")
    p.add_argument("--train", required=True)
    p.add_argument("--host", required=True)
    p.add_argument("--tagged", action="store_true")
    p.add_argument("--strategy", choices=("zh", "en", "random", "noun", "gan"), required=True)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--model-dir", default=None)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--pos-lexicon", default=None)
    p.add_argument("--tags", default=None)
    p.add_argument("--multiplier", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("experiment", help="run one of the three experiment harnesses")
    p.add_argument("--exp", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        return args.func(args)
    except (SystemExit,) as e:
        raise
    except Exception as e:  # structured error to the diagnostics stream
        print(f"csgen: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
