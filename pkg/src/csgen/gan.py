"""Switch-probability generator and sentence discriminator over a shared
encoder, trained adversarially with REINFORCE updates.

The generator reads a monolingual host sentence and emits one switch
probability per token; a binary mask sampled from those probabilities is
realized into a code-switched sentence through the translation lexicon.
The discriminator scores sentences as real-vs-generated. Both share the
embedding + BLSTM encoder, which is updated only during generator steps.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, asdict, field

import numpy as np

from . import neural
from .corpus import Corpus, Lang, Sentence, Vocabulary
from .lexicon import (
    PosLexicon,
    TranslationLexicon,
    realize,
    switchable_positions,
    tag_pos,
)
from .neural import AdamState, ParamBlock, Tape


class GanError(Exception):
    pass


@dataclass(frozen=True)
class ModelConfig:
    """Architecture sizes. Defaults follow the reference setup (150-dim
    word embeddings, 64x20 POS embeddings, 10-dim noise, 0.3 dropout).

    fc_dim > 0 inserts a tanh FC layer before each sigmoid output (the
    heads read "FC layer ... ends in a one-dimension vector with
    sigmoid"); fc_dim = 0 collapses both heads to a single affine+sigmoid
    layer."""

    vocab_size: int
    emb_dim: int = 150
    hidden_dim: int = 64
    noise_dim: int = 10
    fc_dim: int = 64
    use_pos: bool = False
    pos_slots: int = 64
    pos_emb_dim: int = 20
    head_dropout: float = 0.3
    pooling: str = "finals"  # "finals" | "mean"
    noise_mode: str = "sentence"  # "sentence" | "step"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    d_steps: int = 1
    g_steps: int = 1
    g_samples: int = 1  # masks sampled per sentence; > 1 enables the
    # leave-one-out per-sentence baseline (sharper positional credit)
    d_step_size: float = 1e-3
    g_step_size: float = 1e-3
    # "log-d" matches the generator loss; "raw-d" is the literal
    # score-as-reward reading; "logit-d" (log D - log(1-D)) cannot saturate,
    # so per-mask reward differences survive even when D is confident.
    reward: str = "log-d"
    baseline_decay: float = 0.9
    clip_norm: float = 5.0
    prob_clamp: float = 1e-7
    seed: int = 0
    # Keep the generator head bias fixed (normally at the rate set by
    # set_initial_switch_rate). The bias is a single global switch-rate
    # knob; under adversarial feedback Adam walks it coherently and the
    # rate limit-cycles, so pinning it stabilizes training. Position
    # preferences live in the head weights and stay fully trainable.
    freeze_head_bias: bool = False
    # Step-size multiplier for the shared encoder during generator steps.
    # The discriminator's head probes the encoder's features; slowing the
    # encoder keeps those features near-stationary so the probe stays
    # calibrated instead of chasing drift.
    encoder_lr_scale: float = 1.0
    # Per-iteration Polyak decay for an exponential moving average of the
    # generator-side parameters; the averaged weights replace the last
    # iterate when training ends. Adversarial training oscillates, and the
    # average is a far better final model than whichever iterate the last
    # epoch happened to land on. 0 disables averaging.
    param_ema_decay: float = 0.0

    def __post_init__(self):
        if (self.epochs < 0 or self.batch_size < 1 or self.d_steps < 1
                or self.g_steps < 1 or self.g_samples < 1):
            raise ValueError("epoch/batch/step/sample counts out of range")
        if self.reward not in ("log-d", "raw-d", "logit-d"):
            raise ValueError(f"unknown reward form {self.reward!r}")


class RewardBaseline:
    """Exponential moving average of generator rewards (variance reduction)."""

    def __init__(self, decay: float = 0.9):
        self.decay = decay
        self.value = 0.0

    def update(self, reward: float) -> None:
        self.value = self.decay * self.value + (1.0 - self.decay) * reward


@dataclass(frozen=True)
class GeneratorOutput:
    probs: np.ndarray
    mask: tuple[bool, ...]
    sentence: Sentence
    logprob: float


def sample_switch_bits(
    probs: np.ndarray, switchable: list[bool], rng: np.random.Generator,
    clamp: float = 1e-7,
) -> tuple[tuple[bool, ...], float]:
    """Independent Bernoulli draw per switchable position.

    Unswitchable positions are forced false and excluded from the returned
    log-probability.
    """
    u = rng.random(len(probs))
    mask = []
    logp = 0.0
    for n, (p, ok) in enumerate(zip(probs, switchable)):
        if not ok:
            mask.append(False)
            continue
        bit = bool(u[n] < p)
        mask.append(bit)
        pc = min(max(p, clamp), 1.0 - clamp)
        logp += math.log(pc) if bit else math.log(1.0 - pc)
    return tuple(mask), logp


def sample_mask(
    probs: np.ndarray,
    lex: TranslationLexicon,
    x: Sentence,
    rng: np.random.Generator,
) -> tuple[tuple[bool, ...], float]:
    if len(probs) != len(x):
        raise GanError(f"got {len(probs)} probabilities for {len(x)} tokens")
    return sample_switch_bits(probs, switchable_positions(x, lex), rng)


def mask_logprob_grad(
    probs: np.ndarray, mask: tuple[bool, ...], switchable: list[bool],
    clamp: float = 1e-7,
) -> np.ndarray:
    """d log p(mask) / d probs; zero at unswitchable positions."""
    grad = np.zeros(len(probs))
    for n, (p, bit, ok) in enumerate(zip(probs, mask, switchable)):
        if not ok:
            continue
        pc = min(max(p, clamp), 1.0 - clamp)
        grad[n] = 1.0 / pc if bit else -1.0 / (1.0 - pc)
    return grad


class CodeSwitchGan:
    """Parameter container plus forward passes for G and D.

    All parameters live in one block with namespaced keys; ``enc.*`` is the
    shared encoder, ``gen.*`` the generator head, ``disc.*`` the
    discriminator head.
    """

    def __init__(
        self,
        cfg: ModelConfig,
        vocab: Vocabulary,
        lexicon: TranslationLexicon,
        pos_lexicon: PosLexicon | None = None,
        seed: int = 0,
    ):
        if cfg.use_pos and pos_lexicon is None:
            raise GanError("use_pos requires a POS lexicon")
        self.cfg = cfg
        self.vocab = vocab
        self.lexicon = lexicon
        self.pos_lexicon = pos_lexicon
        rng = np.random.default_rng(seed)
        enc_in = cfg.emb_dim + (cfg.pos_emb_dim if cfg.use_pos else 0)
        arrays: dict[str, np.ndarray] = {}
        arrays["enc.emb"] = neural.init_embedding(rng, cfg.vocab_size, cfg.emb_dim)
        if cfg.use_pos:
            arrays["enc.pos"] = neural.init_embedding(rng, cfg.pos_slots, cfg.pos_emb_dim)
        for direction in ("fwd", "bwd"):
            lstm = neural.init_lstm(rng, enc_in, cfg.hidden_dim)
            for k, v in lstm.items():
                arrays[f"enc.blstm.{direction}.{k}"] = v
        gen_in = 2 * cfg.hidden_dim + cfg.noise_dim
        disc_in = 2 * cfg.hidden_dim
        if cfg.fc_dim > 0:
            gen_fc = neural.init_dense(rng, cfg.fc_dim, gen_in)
            arrays["gen.fc.W"] = gen_fc["W"]
            arrays["gen.fc.b"] = gen_fc["b"]
            disc_fc = neural.init_dense(rng, cfg.fc_dim, disc_in)
            arrays["disc.fc.W"] = disc_fc["W"]
            arrays["disc.fc.b"] = disc_fc["b"]
            gen_in = disc_in = cfg.fc_dim
        gen_head = neural.init_dense(rng, 1, gen_in)
        arrays["gen.head.W"] = gen_head["W"]
        arrays["gen.head.b"] = gen_head["b"]
        disc_head = neural.init_dense(rng, 1, disc_in)
        arrays["disc.head.W"] = disc_head["W"]
        arrays["disc.head.b"] = disc_head["b"]
        self.params = ParamBlock(arrays)

    def set_initial_switch_rate(self, rate: float) -> None:
        """Bias the untrained generator head so switch probabilities start
        near ``rate`` (e.g. the training corpus cs-rate) instead of 0.5.

        Starting at the empirical rate removes the violent rate-correction
        phase at the beginning of adversarial training, leaving the reward
        signal to teach switch positions.
        """
        if not 0.0 < rate < 1.0:
            raise GanError("initial switch rate must be in (0, 1)")
        b = self.params["gen.head.b"].copy()
        b[:] = math.log(rate / (1.0 - rate))
        self.params["gen.head.b"] = b

    # --- parameter grouping ------------------------------------------------
    def encoder_names(self) -> list[str]:
        return [n for n in self.params.names() if n.startswith("enc.")]

    def generator_names(self) -> list[str]:
        return [n for n in self.params.names() if n.startswith(("enc.", "gen."))]

    def discriminator_names(self) -> list[str]:
        return [n for n in self.params.names() if n.startswith("disc.")]

    # --- input conversion ---------------------------------------------------
    def _word_ids(self, sentence: Sentence) -> list[int]:
        return self.vocab.ids(sentence.surfaces())

    def _pos_ids(self, sentence: Sentence) -> list[int] | None:
        if not self.cfg.use_pos:
            return None
        tagged = tag_pos(self.pos_lexicon, sentence)
        return [self.pos_lexicon.tag_id(t.pos) for t in tagged]

    def _encode(self, sentence: Sentence, tape: Tape | None) -> np.ndarray:
        word_ids = self._word_ids(sentence)
        if self.cfg.use_pos:
            emb = neural.embed_pair_forward(
                self.params, "enc.emb", "enc.pos", word_ids, self._pos_ids(sentence), tape
            )
        else:
            emb = neural.embed_forward(self.params, "enc.emb", word_ids, tape)
        return neural.blstm_forward(self.params, "enc.blstm", emb, tape)

    # --- generator ----------------------------------------------------------
    def draw_noise(self, n_steps: int, rng: np.random.Generator) -> np.ndarray:
        if self.cfg.noise_mode == "step":
            return rng.standard_normal((n_steps, self.cfg.noise_dim))
        return rng.standard_normal(self.cfg.noise_dim)

    def zero_noise(self) -> np.ndarray:
        return np.zeros(self.cfg.noise_dim)

    def generator_probs(
        self, x: Sentence, z: np.ndarray, tape: Tape | None = None
    ) -> np.ndarray:
        """Per-token switch probabilities, deterministic given (params, x, z)."""
        if len(x) == 0:
            raise GanError("empty sentence")
        hs = self._encode(x, tape)
        h_aug = neural.append_const_cols(hs, z, tape)
        if self.cfg.fc_dim > 0:
            h_aug = neural.dense_forward(self.params, "gen.fc", h_aug, tape, "tanh")
        s = neural.dense_forward(self.params, "gen.head", h_aug, tape, "sigmoid")
        return np.atleast_1d(s)

    def generate(
        self,
        x: Sentence,
        mode: str = "sample",
        rng: np.random.Generator | None = None,
    ) -> GeneratorOutput:
        """Transform a host sentence. ``sample`` draws noise and a mask;
        ``threshold`` is deterministic (zero noise, switch where s > 0.5)."""
        if not x.is_host_monolingual():
            raise GanError("generator input must be monolingual host")
        switchable = switchable_positions(x, self.lexicon)
        if mode == "threshold":
            s = self.generator_probs(x, self.zero_noise())
            mask = tuple(bool(p > 0.5) and ok for p, ok in zip(s, switchable))
            logp = 0.0
        elif mode == "sample":
            if rng is None:
                raise GanError("sample mode needs an rng")
            s = self.generator_probs(x, self.draw_noise(len(x), rng))
            mask, logp = sample_switch_bits(s, switchable, rng)
        else:
            raise GanError(f"unknown generation mode {mode!r}")
        return GeneratorOutput(s, mask, realize(x, mask, self.lexicon), logp)

    # --- discriminator --------------------------------------------------------
    def discriminator_score(
        self,
        y: Sentence,
        mode: str = "eval",
        rng: np.random.Generator | None = None,
        head_tape: Tape | None = None,
    ) -> float:
        """D(y) in (0, 1). Only the private head is ever recorded on the
        tape; the shared encoder runs untracked so discriminator training
        cannot touch it."""
        if len(y) == 0:
            raise GanError("empty sentence")
        hs = self._encode(y, None)
        if self.cfg.pooling == "mean":
            pooled = neural.mean_pool(hs, head_tape)
        else:
            pooled = neural.pool_finals(hs, head_tape)
        if self.cfg.fc_dim > 0:
            pooled = neural.dense_forward(self.params, "disc.fc", pooled, head_tape, "tanh")
        dropped = neural.dropout_forward(
            pooled, self.cfg.head_dropout, rng, mode, head_tape
        )
        score = neural.dense_forward(self.params, "disc.head", dropped, head_tape, "sigmoid")
        return float(score)

    # --- checkpointing ---------------------------------------------------------
    def save(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        neural.save_params(
            os.path.join(directory, "gan.npz"),
            self.params,
            meta={"model_config": self.cfg.to_json()},
        )
        self.vocab.save(os.path.join(directory, "vocab.txt"))

    @classmethod
    def load(
        cls,
        directory,
        lexicon: TranslationLexicon,
        pos_lexicon: PosLexicon | None = None,
    ) -> "CodeSwitchGan":
        params, meta = neural.load_params(os.path.join(directory, "gan.npz"))
        cfg = ModelConfig.from_json(meta["model_config"])
        vocab = Vocabulary.load(os.path.join(directory, "vocab.txt"))
        model = cls(cfg, vocab, lexicon, pos_lexicon, seed=0)
        model.params = params
        return model


def _clamp(p: float, eps: float) -> float:
    return min(max(p, eps), 1.0 - eps)


def discriminator_step(
    model: CodeSwitchGan,
    real_batch: list[Sentence],
    fake_batch: list[Sentence],
    state: AdamState,
    rng: np.random.Generator,
    cfg: TrainConfig,
) -> float:
    """One minimization step of -(E log D(real) + E log(1 - D(fake))).

    Gradients flow only into the discriminator head; the shared encoder is
    frozen here by construction.
    """
    if not real_batch or not fake_batch:
        raise GanError("discriminator batches must be non-empty")
    grads: dict[str, np.ndarray] = {}
    loss = 0.0
    for y in real_batch:
        tape = Tape()
        d = _clamp(
            model.discriminator_score(y, "train", rng, head_tape=tape), cfg.prob_clamp
        )
        loss += -math.log(d) / len(real_batch)
        g, _ = tape.backward(np.float64(-1.0 / (d * len(real_batch))))
        for k, v in g.items():
            grads[k] = grads.get(k, 0.0) + v
    for y_hat in fake_batch:
        tape = Tape()
        d = _clamp(
            model.discriminator_score(y_hat, "train", rng, head_tape=tape), cfg.prob_clamp
        )
        loss += -math.log(1.0 - d) / len(fake_batch)
        g, _ = tape.backward(np.float64(1.0 / ((1.0 - d) * len(fake_batch))))
        for k, v in g.items():
            grads[k] = grads.get(k, 0.0) + v
    if not math.isfinite(loss):
        raise GanError("non-finite discriminator loss")
    neural.clip_global_norm(grads, cfg.clip_norm)
    neural.adam_step(model.params, grads, state)
    return loss


def generator_step(
    model: CodeSwitchGan,
    host_batch: list[Sentence],
    state: AdamState,
    baseline: RewardBaseline,
    rng: np.random.Generator,
    cfg: TrainConfig,
) -> tuple[float, float, float]:
    """One REINFORCE step on the generator (head + shared encoder).

    For each host sentence: draw noise, sample cfg.g_samples switch masks,
    realize and score each with D in eval mode, and weight the
    log-probability gradients by centered rewards. With one sample the
    center is the EMA baseline; with several it is the leave-one-out mean
    over the sentence's own samples, which assigns credit to the positions
    where the masks differ. Returns (loss estimate, mean reward, mean s).
    """
    if not host_batch:
        raise GanError("generator batch must be non-empty")
    grads: dict[str, np.ndarray] = {}
    rewards = []
    mean_s = []
    for x in host_batch:
        z = model.draw_noise(len(x), rng)
        tape = Tape()
        s = model.generator_probs(x, z, tape)
        switchable = switchable_positions(x, model.lexicon)
        masks = []
        sample_rewards = []
        for _ in range(cfg.g_samples):
            mask, _ = sample_switch_bits(s, switchable, rng, cfg.prob_clamp)
            y_hat = realize(x, mask, model.lexicon)
            d = _clamp(model.discriminator_score(y_hat, "eval"), cfg.prob_clamp)
            if cfg.reward == "log-d":
                r = math.log(d)
            elif cfg.reward == "logit-d":
                r = math.log(d) - math.log(1.0 - d)
            else:
                r = d
            sample_rewards.append(r)
            masks.append(mask)
        rewards.extend(sample_rewards)
        mean_s.append(float(np.mean(s)))
        k = cfg.g_samples
        total = sum(sample_rewards)
        ds = np.zeros(len(x))
        for mask, r in zip(masks, sample_rewards):
            if k > 1:
                center = (total - r) / (k - 1)
            else:
                center = baseline.value
            advantage = r - center
            ds -= advantage * mask_logprob_grad(s, mask, switchable, cfg.prob_clamp)
        g, _ = tape.backward(ds / k)
        for key, v in g.items():
            grads[key] = grads.get(key, 0.0) + v
    for key in grads:
        grads[key] = grads[key] / len(host_batch)
    neural.clip_global_norm(grads, cfg.clip_norm)
    neural.adam_step(model.params, grads, state)
    mean_reward = float(np.mean(rewards))
    baseline.update(mean_reward)
    return -mean_reward, mean_reward, float(np.mean(mean_s))


class _BatchCycler:
    """Endless shuffled batches over a sentence list, reshuffling per pass."""

    def __init__(self, sentences: tuple[Sentence, ...], batch_size: int,
                 rng: np.random.Generator):
        self.sentences = sentences
        self.batch_size = batch_size
        self.rng = rng
        self._order: list[int] = []
        self._cursor = 0

    def next_batch(self) -> list[Sentence]:
        batch = []
        while len(batch) < self.batch_size:
            if self._cursor >= len(self._order):
                self._order = list(self.rng.permutation(len(self.sentences)))
                self._cursor = 0
            batch.append(self.sentences[self._order[self._cursor]])
            self._cursor += 1
        return batch


def train(
    model: CodeSwitchGan,
    d_cs: Corpus,
    d_zh: Corpus,
    cfg: TrainConfig,
) -> list[dict]:
    """Alternate discriminator and generator steps for cfg.epochs epochs.

    Real batches come from the code-switching corpus, fake batches are
    generated on the fly from host sentences. Deterministic under a fixed
    seed. Returns the per-epoch history.
    """
    from .lexicon import coverage

    if not any(s.has_guest() for s in d_cs):
        raise GanError("code-switching training corpus has no guest tokens")
    if any(not s.is_host_monolingual() for s in d_zh):
        raise GanError("host corpus must be monolingual")
    if coverage(model.lexicon, d_zh) == 0.0:
        raise GanError(
            "lexicon covers no host token of the monolingual corpus; nothing can be switched"
        )
    rng = np.random.default_rng(cfg.seed)
    g_names = model.generator_names()
    if cfg.freeze_head_bias:
        g_names = [n for n in g_names if n != "gen.head.b"]
    g_scales = None
    if cfg.encoder_lr_scale != 1.0:
        g_scales = {n: cfg.encoder_lr_scale for n in g_names if n.startswith("enc.")}
    g_state = AdamState.for_params(model.params, g_names,
                                   step_size=cfg.g_step_size, scales=g_scales)
    d_state = AdamState.for_params(model.params, model.discriminator_names(),
                                   step_size=cfg.d_step_size)
    baseline = RewardBaseline(cfg.baseline_decay)
    cs_batches = _BatchCycler(d_cs.sentences, cfg.batch_size, rng)
    zh_batches = _BatchCycler(d_zh.sentences, cfg.batch_size, rng)
    ema: dict[str, np.ndarray] | None = None
    if cfg.param_ema_decay > 0.0:
        ema = {n: model.params[n].copy() for n in model.generator_names()}
    history: list[dict] = []
    iters = max(1, math.ceil(len(d_zh) / cfg.batch_size))
    for epoch in range(cfg.epochs):
        d_losses = []
        g_losses = []
        g_rewards = []
        g_probs = []
        for _ in range(iters):
            for _ in range(cfg.d_steps):
                real = cs_batches.next_batch()
                fake = [
                    model.generate(x, "sample", rng).sentence
                    for x in zh_batches.next_batch()
                ]
                d_losses.append(
                    discriminator_step(model, real, fake, d_state, rng, cfg)
                )
            for _ in range(cfg.g_steps):
                host = zh_batches.next_batch()
                loss_g, reward, mean_s = generator_step(
                    model, host, g_state, baseline, rng, cfg
                )
                g_losses.append(loss_g)
                g_rewards.append(reward)
                g_probs.append(mean_s)
            if ema is not None:
                d = cfg.param_ema_decay
                for n in ema:
                    ema[n] = d * ema[n] + (1.0 - d) * model.params[n]
        history.append(
            {
                "epoch": epoch,
                "loss_d": float(np.mean(d_losses)),
                "loss_g": float(np.mean(g_losses)),
                "mean_reward": float(np.mean(g_rewards)),
                "mean_switch_prob": float(np.mean(g_probs)),
            }
        )
    if ema is not None and cfg.epochs > 0:
        for n, value in ema.items():
            model.params[n] = value
    return history


def history_csv(history: list[dict]) -> str:
    lines = ["epoch,loss_d,loss_g,mean_reward,mean_switch_prob"]
    for row in history:
        lines.append(
            f"{row['epoch']},{row['loss_d']:.6f},{row['loss_g']:.6f},"
            f"{row['mean_reward']:.6f},{row['mean_switch_prob']:.6f}"
        )
    return "\n".join(lines) + "\n"
