"""Instrumented GAN training runs for hyperparameter exploration."""
import sys
import time

import numpy as np

from csgen.corpus import Corpus, build_vocab, cs_rate
from csgen.gan import CodeSwitchGan, ModelConfig, TrainConfig, train
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.metrics import csp_metrics
from csgen.synth import collect_cs_utterances, default_rule, synth_corpus


def heldout_f(model, refs_x, refs_masks, mode="threshold", rng=None):
    hyp_masks = []
    for x in refs_x:
        out = model.generate(x, mode, rng)
        hyp_masks.append(out.mask)
    return csp_metrics(refs_masks, hyp_masks)


def main(n_train=600, epochs=30, g_lr=2e-3, d_lr=2e-3, hidden=32, emb=32,
         use_pos=False, seed=0, eval_every=5, reward="log-d"):
    rule = default_rule()
    _, cs_train, _ = collect_cs_utterances(rule, n_train, seed + 1)
    d_cs = Corpus(tuple(cs_train), role="cs-training")
    d_zh = synth_corpus(rule, n_train, seed + 2, "train").host
    refs_x, _, refs_masks = collect_cs_utterances(rule, 50, seed + 4, "test")
    lex = rule.lexicon()
    vocab = build_vocab(Corpus(d_cs.sentences + d_zh.sentences), 8200,
                        extra_surfaces=lex.all_realized())
    rate = cs_rate(d_cs)
    rng = np.random.default_rng(seed + 9)
    rand_masks = [apply_baseline(BaselineStrategy("random", p=rate), x, lex, rng=rng).mask
                  for x in refs_x]
    rp, rr, rf = csp_metrics(refs_masks, rand_masks)
    print(f"cs_rate={rate:.3f} random baseline F={rf:.3f} (P={rp:.3f} R={rr:.3f})")

    cfg = ModelConfig(vocab_size=len(vocab), emb_dim=emb, hidden_dim=hidden,
                      noise_dim=10, use_pos=use_pos, pos_emb_dim=8, head_dropout=0.3)
    model = CodeSwitchGan(cfg, vocab, lex, rule.pos_lexicon() if use_pos else None, seed=seed)
    tcfg = TrainConfig(epochs=eval_every, batch_size=32, g_step_size=g_lr,
                       d_step_size=d_lr, seed=seed, reward=reward)
    t0 = time.time()
    for block in range(0, epochs, eval_every):
        hist = train(model, d_cs, d_zh, tcfg)
        p, r, f = heldout_f(model, refs_x, refs_masks)
        last = hist[-1]
        print(f"epoch {block+eval_every:3d} loss_d={last['loss_d']:.3f} "
              f"loss_g={last['loss_g']:.3f} reward={last['mean_reward']:.3f} "
              f"mean_s={last['mean_switch_prob']:.3f} | F={f:.3f} P={p:.3f} R={r:.3f} "
              f"({time.time()-t0:.0f}s)")
    return model


if __name__ == "__main__":
    kwargs = {}
    for arg in sys.argv[1:]:
        k, v = arg.split("=")
        kwargs[k] = float(v) if "." in v or "e" in v else (v if k=="reward" else int(v))
    main(**kwargs)
