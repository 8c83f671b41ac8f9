"""Experiment harnesses: switch-point prediction, generated-text quality,
and language-model augmentation, plus run configuration and manifests.

All three experiments run on synthetic planted-rule corpora by default;
file paths for real corpora can be supplied through the config but no
corpus is bundled. Every run writes a manifest (config snapshot, seed,
versions) next to its outputs, and report tables are byte-identical across
reruns with the same config and seed.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import os
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__, kernels
from .baselines import BaselineStrategy, apply_baseline
from .char_lm import CharLmConfig, char_lstm_ppl, train_char_lstm
from .corpus import (
    Corpus,
    FormatConfig,
    Sentence,
    Vocabulary,
    build_vocab,
    cs_rate,
    load_corpus,
)
from .gan import CodeSwitchGan, ModelConfig, TrainConfig, train
from .lexicon import (
    PosLexicon,
    TranslationLexicon,
    load_lexicon,
    load_pos_lexicon,
    load_tag_inventory,
    realize,
)
from .metrics import MetricReport, metric_report
from .ngram_lm import ngram_ppl, train_kn
from .synth import (
    PlantedRule,
    collect_cs_utterances,
    default_rule,
    load_refs,
    synth_corpus,
)


class ExperimentError(Exception):
    pass


class MissingInputError(ExperimentError):
    """A table row cannot be produced because an input is absent."""


@dataclass(frozen=True)
class SynthSettings:
    n_triggers: int = 5
    n_common_nouns: int = 10
    n_rare_nouns: int = 8
    n_other: int = 27
    p_high: float = 0.9
    p_low: float = 0.05
    len_min: int = 5
    len_max: int = 12
    rare_train_weight: float = 0.02
    n_train: int = 2000
    n_dev: int = 200
    n_test: int = 400
    n_refs: int = 50


@dataclass(frozen=True)
class PathSettings:
    """Real-corpus inputs; any unset path falls back to synthetic data."""

    cs_train: str = ""
    host_train: str = ""
    dev: str = ""
    test_cs: str = ""
    test_host: str = ""
    refs: str = ""
    lexicon: str = ""
    pos_lexicon: str = ""
    tags: str = ""


@dataclass(frozen=True)
class ModelSettings:
    vocab_max: int = 8200
    emb_dim: int = 112
    hidden_dim: int = 64
    fc_dim: int = 64
    noise_dim: int = 10
    pos_emb_dim: int = 20
    head_dropout: float = 0.3
    pooling: str = "mean"
    noise_mode: str = "sentence"


@dataclass(frozen=True)
class TrainSettings:
    epochs: int = 60
    batch_size: int = 32
    d_steps: int = 1
    g_steps: int = 1
    g_samples: int = 3
    d_step_size: float = 5e-3
    g_step_size: float = 1e-3
    reward: str = "log-d"
    baseline_decay: float = 0.9
    clip_norm: float = 5.0
    rate_init: bool = True
    freeze_head_bias: bool = True
    encoder_lr_scale: float = 1.0
    param_ema_decay: float = 0.998


@dataclass(frozen=True)
class CharLmSettings:
    hidden_dim: int = 32
    dropout: float = 0.7
    step_size: float = 0.01
    epochs: int = 10
    batch_size: int = 16
    patience: int = 3


@dataclass(frozen=True)
class ExperimentSettings:
    random_p: float = -1.0  # < 0 means "use the training corpus cs-rate"
    lm_train_source: str = "cs"  # "cs" | "cs+host"
    augment_multiplier: int = 1
    generation_mode: str = "threshold"  # for metric rows


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    synth: SynthSettings = field(default_factory=SynthSettings)
    paths: PathSettings = field(default_factory=PathSettings)
    model: ModelSettings = field(default_factory=ModelSettings)
    train: TrainSettings = field(default_factory=TrainSettings)
    charlm: CharLmSettings = field(default_factory=CharLmSettings)
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)


_SECTIONS = {
    "synth": SynthSettings,
    "paths": PathSettings,
    "model": ModelSettings,
    "train": TrainSettings,
    "charlm": CharLmSettings,
    "experiment": ExperimentSettings,
}


def _coerce(raw: str, target_type):
    if target_type is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    return target_type(raw)


def load_run_config(path) -> RunConfig:
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as f:
        parser.read_file(f)
    kwargs = {}
    if parser.has_option("run", "seed"):
        kwargs["seed"] = parser.getint("run", "seed")
    for section, cls in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        values = {}
        known = {f.name: f.type for f in fields(cls)}
        for key, raw in parser.items(section):
            if key not in known:
                raise ExperimentError(f"unknown config key [{section}] {key}")
            default = getattr(cls(), key)
            values[key] = _coerce(raw, type(default))
        kwargs[section] = cls(**values)
    return RunConfig(**kwargs)


def run_config_text(cfg: RunConfig) -> str:
    """Flat key/value rendering of the full config (manifest snapshot)."""
    parser = configparser.ConfigParser()
    parser["run"] = {"seed": str(cfg.seed)}
    for section, cls in _SECTIONS.items():
        obj = getattr(cfg, section)
        parser[section] = {
            f.name: str(getattr(obj, f.name)) for f in fields(cls)
        }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def write_manifest(
    path,
    command: str,
    seed: int,
    cfg_text: str = "",
    inputs: dict[str, str] | None = None,
    outputs: list[str] | None = None,
) -> None:
    import numba

    lines = [
        "manifest_version = 1",
        f"command = {command}",
        f"seed = {seed}",
        f"csgen_version = {__version__}",
        f"numpy_version = {np.__version__}",
        f"numba_version = {numba.__version__ if kernels.HAS_NUMBA else 'absent'}",
        f"kernels_backend = {kernels.BACKEND}",
    ]
    for key, value in sorted((inputs or {}).items()):
        lines.append(f"input.{key} = {value}")
    for out in outputs or []:
        lines.append(f"output = {out}")
    text = "\n".join(lines) + "\n"
    if cfg_text:
        text += "[config-snapshot]\n" + cfg_text
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def write_table(path, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(row + "\n")


# ---------------------------------------------------------------------------
# World construction: either synthetic (default) or loaded from paths.
# ---------------------------------------------------------------------------


@dataclass
class World:
    d_cs: Corpus
    d_zh: Corpus
    dev: Corpus
    test_cs: Corpus
    test_host: Corpus
    refs_x: list[Sentence]
    refs_masks: list[tuple[bool, ...]]
    refs_y: list[Sentence]
    lexicon: TranslationLexicon
    pos_lexicon: PosLexicon | None
    cs_rate: float


def rule_from_settings(s: SynthSettings) -> PlantedRule:
    return default_rule(
        n_triggers=s.n_triggers,
        n_common_nouns=s.n_common_nouns,
        n_rare_nouns=s.n_rare_nouns,
        n_other=s.n_other,
        p_high=s.p_high,
        p_low=s.p_low,
        len_range=(s.len_min, s.len_max),
        rare_train_weight=s.rare_train_weight,
    )


def build_synthetic_world(cfg: RunConfig) -> World:
    s = cfg.synth
    rule = rule_from_settings(s)
    lex = rule.lexicon()
    seed = cfg.seed
    _, cs_train, _ = collect_cs_utterances(rule, s.n_train, seed + 1)
    d_cs = Corpus(tuple(cs_train), role="cs-training")
    d_zh = synth_corpus(rule, s.n_train, seed + 2, "train").host
    _, dev_cs, _ = collect_cs_utterances(rule, s.n_dev, seed + 3)
    dev = Corpus(tuple(dev_cs), role="dev")
    refs_x, refs_y, refs_masks = collect_cs_utterances(rule, s.n_refs, seed + 4, "test")
    test_host = synth_corpus(rule, s.n_test, seed + 5, "test").host
    _, test_cs, _ = collect_cs_utterances(rule, s.n_test, seed + 6, "test")
    return World(
        d_cs=d_cs,
        d_zh=d_zh,
        dev=dev,
        test_cs=Corpus(tuple(test_cs), role="test"),
        test_host=test_host,
        refs_x=refs_x,
        refs_masks=refs_masks,
        refs_y=refs_y,
        lexicon=lex,
        pos_lexicon=rule.pos_lexicon(),
        cs_rate=cs_rate(d_cs),
    )


def load_pos_inputs(paths: PathSettings) -> PosLexicon | None:
    if not paths.pos_lexicon or not paths.tags:
        return None
    with open(paths.tags, encoding="utf-8") as f:
        inventory, nouns = load_tag_inventory(f)
    with open(paths.pos_lexicon, encoding="utf-8") as f:
        return load_pos_lexicon(f, inventory, nouns)


def build_world_from_paths(cfg: RunConfig) -> World:
    p = cfg.paths
    for required in ("cs_train", "host_train", "lexicon"):
        if not getattr(p, required):
            raise ExperimentError(f"paths.{required} is required for real-corpus runs")
    fmt = FormatConfig(tagged=True)
    d_cs = load_corpus(p.cs_train, fmt, role="cs-training")
    d_zh = load_corpus(p.host_train, fmt, role="host-monolingual")
    with open(p.lexicon, encoding="utf-8") as f:
        lexicon, _ = load_lexicon(f)
    pos_lexicon = load_pos_inputs(p)
    dev = load_corpus(p.dev, fmt, role="dev") if p.dev else d_cs
    test_cs = load_corpus(p.test_cs, fmt, role="test") if p.test_cs else dev
    test_host = load_corpus(p.test_host, fmt, role="host-monolingual") if p.test_host else d_zh
    if p.refs:
        refs_x, refs_masks = load_refs(p.refs)
        refs_y = [realize(x, m, lexicon) for x, m in zip(refs_x, refs_masks)]
    else:
        refs_x, refs_masks, refs_y = [], [], []
    return World(
        d_cs=d_cs,
        d_zh=d_zh,
        dev=dev,
        test_cs=test_cs,
        test_host=test_host,
        refs_x=refs_x,
        refs_masks=refs_masks,
        refs_y=refs_y,
        lexicon=lexicon,
        pos_lexicon=pos_lexicon,
        cs_rate=cs_rate(d_cs),
    )


def build_world(cfg: RunConfig) -> World:
    if cfg.paths.cs_train:
        return build_world_from_paths(cfg)
    return build_synthetic_world(cfg)


# ---------------------------------------------------------------------------
# Shared building blocks.
# ---------------------------------------------------------------------------


def build_gan_vocab(world: World, cfg: RunConfig) -> Vocabulary:
    combined = Corpus(world.d_cs.sentences + world.d_zh.sentences)
    return build_vocab(
        combined, cfg.model.vocab_max, extra_surfaces=world.lexicon.all_realized()
    )


def make_model_config(cfg: RunConfig, vocab: Vocabulary, use_pos: bool) -> ModelConfig:
    m = cfg.model
    return ModelConfig(
        vocab_size=len(vocab),
        emb_dim=m.emb_dim,
        hidden_dim=m.hidden_dim,
        fc_dim=m.fc_dim,
        noise_dim=m.noise_dim,
        use_pos=use_pos,
        pos_emb_dim=m.pos_emb_dim,
        head_dropout=m.head_dropout,
        pooling=m.pooling,
        noise_mode=m.noise_mode,
    )


def make_train_config(cfg: RunConfig, epochs: int | None = None) -> TrainConfig:
    t = cfg.train
    return TrainConfig(
        epochs=t.epochs if epochs is None else epochs,
        batch_size=t.batch_size,
        d_steps=t.d_steps,
        g_steps=t.g_steps,
        g_samples=t.g_samples,
        d_step_size=t.d_step_size,
        g_step_size=t.g_step_size,
        reward=t.reward,
        baseline_decay=t.baseline_decay,
        clip_norm=t.clip_norm,
        freeze_head_bias=t.freeze_head_bias,
        encoder_lr_scale=t.encoder_lr_scale,
        param_ema_decay=t.param_ema_decay,
        seed=cfg.seed,
    )


def make_charlm_config(cfg: RunConfig, seed: int | None = None) -> CharLmConfig:
    c = cfg.charlm
    return CharLmConfig(
        hidden_dim=c.hidden_dim,
        dropout=c.dropout,
        step_size=c.step_size,
        epochs=c.epochs,
        batch_size=c.batch_size,
        patience=c.patience,
        seed=cfg.seed if seed is None else seed,
    )


def train_gan_variant(world: World, cfg: RunConfig, use_pos: bool) -> tuple[CodeSwitchGan, list[dict]]:
    if use_pos and world.pos_lexicon is None:
        raise MissingInputError("POS lexicon required for the POS-conditioned variant")
    vocab = build_gan_vocab(world, cfg)
    model = CodeSwitchGan(
        make_model_config(cfg, vocab, use_pos),
        vocab,
        world.lexicon,
        world.pos_lexicon if use_pos else None,
        seed=cfg.seed,
    )
    if cfg.train.rate_init:
        model.set_initial_switch_rate(world.cs_rate)
    history = train(model, world.d_cs, world.d_zh, make_train_config(cfg))
    return model, history


def random_p(world: World, cfg: RunConfig) -> float:
    if cfg.experiment.random_p >= 0.0:
        return cfg.experiment.random_p
    return world.cs_rate


SYSTEMS = ("zh", "en", "random", "noun", "proposed", "proposed_pos")


def system_generate_fn(
    system: str,
    world: World,
    cfg: RunConfig,
    models: dict[str, CodeSwitchGan],
    rng: np.random.Generator,
    mode: str | None = None,
):
    """A Sentence -> (Sentence, mask) closure for one table row."""
    mode = mode or cfg.experiment.generation_mode
    if system in ("zh", "en", "random", "noun"):
        if system == "noun" and world.pos_lexicon is None:
            raise MissingInputError("noun baseline requires a POS lexicon")
        strategy = BaselineStrategy(
            system, p=random_p(world, cfg) if system == "random" else 0.0
        )

        def generate(x: Sentence):
            result = apply_baseline(strategy, x, world.lexicon, world.pos_lexicon, rng)
            return result.sentence, result.mask

    elif system in ("proposed", "proposed_pos"):
        if system not in models:
            raise MissingInputError(f"no trained model for {system}")
        model = models[system]

        def generate(x: Sentence):
            out = model.generate(x, mode, rng)
            return out.sentence, out.mask

    else:
        raise ExperimentError(f"unknown system {system!r}")
    return generate


def system_outputs(
    system: str,
    hosts: list[Sentence],
    world: World,
    cfg: RunConfig,
    models: dict[str, CodeSwitchGan],
    rng: np.random.Generator,
    mode: str | None = None,
) -> tuple[list[Sentence], list[tuple[bool, ...]]]:
    """Generate hypotheses (and masks) for one table row."""
    generate = system_generate_fn(system, world, cfg, models, rng, mode)
    sentences = []
    masks = []
    for x in hosts:
        sentence, mask = generate(x)
        sentences.append(sentence)
        masks.append(mask)
    return sentences, masks


# ---------------------------------------------------------------------------
# Experiment 1: switch-point prediction against gold masks.
# ---------------------------------------------------------------------------


def run_experiment_1(cfg: RunConfig, out_dir) -> dict[str, MetricReport | None]:
    os.makedirs(out_dir, exist_ok=True)
    world = build_world(cfg)
    if not world.refs_x:
        raise ExperimentError("experiment 1 needs reference (sentence, mask) pairs")
    models: dict[str, CodeSwitchGan] = {}
    histories: dict[str, list[dict]] = {}
    models["proposed"], histories["proposed"] = train_gan_variant(world, cfg, use_pos=False)
    if world.pos_lexicon is not None:
        models["proposed_pos"], histories["proposed_pos"] = train_gan_variant(
            world, cfg, use_pos=True
        )
    reports: dict[str, MetricReport | None] = {}
    rows = []
    for system in SYSTEMS:
        rng = np.random.default_rng(cfg.seed + 100)
        try:
            hyps, hyp_masks = system_outputs(system, world.refs_x, world, cfg, models, rng)
        except MissingInputError:
            reports[system] = None
            rows.append(f"{system},skipped,skipped,skipped,skipped,skipped,skipped,skipped")
            continue
        report = metric_report(world.refs_y, world.refs_masks, hyps, hyp_masks)
        reports[system] = report
        rows.append(f"{system},{report.csv_row()}")
    table_path = os.path.join(out_dir, "exp1_metrics.csv")
    write_table(table_path, "system," + MetricReport.CSV_HEADER, rows)
    from .gan import history_csv

    for name, history in histories.items():
        with open(os.path.join(out_dir, f"history_{name}.csv"), "w", encoding="utf-8") as f:
            f.write(history_csv(history))
    write_manifest(
        os.path.join(out_dir, "manifest.txt"),
        command="experiment --exp 1",
        seed=cfg.seed,
        cfg_text=run_config_text(cfg),
        outputs=["exp1_metrics.csv"] + [f"history_{n}.csv" for n in histories],
    )
    return reports


# ---------------------------------------------------------------------------
# Experiment 2: perplexity of generated text under LMs trained on real text.
# ---------------------------------------------------------------------------

EXP2_SYSTEMS = ("random", "noun", "proposed", "proposed_pos")


def run_experiment_2(cfg: RunConfig, out_dir) -> dict[str, dict[str, float | None]]:
    os.makedirs(out_dir, exist_ok=True)
    world = build_world(cfg)
    lm_train = world.d_cs
    if cfg.experiment.lm_train_source == "cs+host":
        lm_train = Corpus(world.d_cs.sentences + world.d_zh.sentences, role="cs-training")
    vocab = build_vocab(lm_train, cfg.model.vocab_max)
    kn = train_kn(lm_train, vocab)
    charlm = train_char_lstm(lm_train, make_charlm_config(cfg), world.dev)
    models: dict[str, CodeSwitchGan] = {}
    models["proposed"], _ = train_gan_variant(world, cfg, use_pos=False)
    if world.pos_lexicon is not None:
        models["proposed_pos"], _ = train_gan_variant(world, cfg, use_pos=True)
    hosts = list(world.test_host)
    results: dict[str, dict[str, float | None]] = {"ngram": {}, "rnnlm": {}}
    for system in EXP2_SYSTEMS:
        rng = np.random.default_rng(cfg.seed + 200)
        try:
            hyps, _ = system_outputs(system, hosts, world, cfg, models, rng, mode="sample")
        except MissingInputError:
            results["ngram"][system] = None
            results["rnnlm"][system] = None
            continue
        generated = Corpus(tuple(hyps), role="test")
        results["ngram"][system] = ngram_ppl(kn, generated).ppl
        results["rnnlm"][system] = char_lstm_ppl(charlm, generated).ppl
    rows = []
    for model_name in ("ngram", "rnnlm"):
        cells = [
            "skipped" if results[model_name][s] is None else f"{results[model_name][s]:.3f}"
            for s in EXP2_SYSTEMS
        ]
        rows.append(model_name + "," + ",".join(cells))
    table_path = os.path.join(out_dir, "exp2_ppl.csv")
    write_table(table_path, "model," + ",".join(EXP2_SYSTEMS), rows)
    write_manifest(
        os.path.join(out_dir, "manifest.txt"),
        command="experiment --exp 2",
        seed=cfg.seed,
        cfg_text=run_config_text(cfg),
        outputs=["exp2_ppl.csv"],
    )
    return results


# ---------------------------------------------------------------------------
# Experiment 3: does augmentation help character-level language modeling?
# ---------------------------------------------------------------------------


def augment(
    train_cs: Corpus,
    host_sentences: Corpus,
    generate_fn,
    multiplier: int = 1,
) -> tuple[Corpus, dict]:
    """Original training sentences first, then generated ones.

    ``generate_fn`` maps a host Sentence to a generated Sentence; it is
    applied ``multiplier`` times per host sentence (0 disables
    augmentation).
    """
    generated = []
    for _ in range(multiplier):
        for x in host_sentences:
            generated.append(generate_fn(x))
    combined = Corpus(train_cs.sentences + tuple(generated), role=train_cs.role)
    report = {"n_original": len(train_cs), "n_generated": len(generated)}
    return combined, report


EXP3_COLUMNS = ("train", "random", "noun", "proposed", "proposed_pos")


def run_experiment_3(cfg: RunConfig, out_dir) -> dict[str, dict[str, float | None]]:
    os.makedirs(out_dir, exist_ok=True)
    world = build_world(cfg)
    models: dict[str, CodeSwitchGan] = {}
    models["proposed"], _ = train_gan_variant(world, cfg, use_pos=False)
    if world.pos_lexicon is not None:
        models["proposed_pos"], _ = train_gan_variant(world, cfg, use_pos=True)
    results: dict[str, dict[str, float | None]] = {"dev": {}, "test": {}}
    sidecar = []
    for column in EXP3_COLUMNS:
        if column == "train":
            augmented = world.d_cs
            sidecar.append("train,none,0")
        else:
            rng = np.random.default_rng(cfg.seed + 300)
            try:
                generate = system_generate_fn(
                    column, world, cfg, models, rng, mode="sample"
                )
            except MissingInputError:
                results["dev"][column] = None
                results["test"][column] = None
                sidecar.append(f"{column},skipped,0")
                continue
            augmented, report = augment(
                world.d_cs,
                world.d_zh,
                lambda x: generate(x)[0],
                multiplier=cfg.experiment.augment_multiplier,
            )
            sidecar.append(f"{column},seed={cfg.seed + 300},{report['n_generated']}")
        lm = train_char_lstm(augmented, make_charlm_config(cfg), world.dev)
        results["dev"][column] = char_lstm_ppl(lm, world.dev).ppl
        results["test"][column] = char_lstm_ppl(lm, world.test_cs).ppl
    rows = []
    for split in ("dev", "test"):
        cells = [
            "skipped" if results[split][c] is None else f"{results[split][c]:.3f}"
            for c in EXP3_COLUMNS
        ]
        rows.append(split + "," + ",".join(cells))
    table_path = os.path.join(out_dir, "exp3_ppl.csv")
    write_table(table_path, "split," + ",".join(EXP3_COLUMNS), rows)
    write_table(
        os.path.join(out_dir, "exp3_augmentation.csv"),
        "strategy,generation,n_generated",
        sidecar,
    )
    write_manifest(
        os.path.join(out_dir, "manifest.txt"),
        command="experiment --exp 3",
        seed=cfg.seed,
        cfg_text=run_config_text(cfg),
        outputs=["exp3_ppl.csv", "exp3_augmentation.csv"],
    )
    return results


def run_experiment(exp: int, cfg: RunConfig, out_dir) -> None:
    if exp == 1:
        run_experiment_1(cfg, out_dir)
    elif exp == 2:
        run_experiment_2(cfg, out_dir)
    elif exp == 3:
        run_experiment_3(cfg, out_dir)
    else:
        raise ExperimentError(f"unknown experiment {exp}")
