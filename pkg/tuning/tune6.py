import sys, time
import numpy as np
from csgen.corpus import Corpus, build_vocab, cs_rate
from csgen.gan import CodeSwitchGan, ModelConfig, TrainConfig, train
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.metrics import csp_metrics
from csgen.synth import collect_cs_utterances, default_rule, synth_corpus

def run(tag, n_train=1000, epochs=60, eval_every=10, seed=0, use_pos=False,
        pooling="mean", head_dropout=0.3, hidden=64, emb=150, fc_dim=64, rate_init=True, **tkw):
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
    _, _, rf = csp_metrics(refs_masks, rand_masks)
    cfg = ModelConfig(vocab_size=len(vocab), emb_dim=emb, hidden_dim=hidden,
                      noise_dim=10, use_pos=use_pos, pos_emb_dim=20, fc_dim=fc_dim,
                      head_dropout=head_dropout, pooling=pooling)
    model = CodeSwitchGan(cfg, vocab, lex, rule.pos_lexicon() if use_pos else None, seed=seed)
    if rate_init:
        model.set_initial_switch_rate(rate)
    tcfg = TrainConfig(epochs=eval_every, batch_size=32, seed=seed, **tkw)
    t0 = time.time()
    print(f"--- {tag} (random F={rf:.3f}, cs_rate={rate:.3f})", flush=True)
    for block in range(0, epochs, eval_every):
        hist = train(model, d_cs, d_zh, tcfg)
        hyp_t = [model.generate(x, "threshold").mask for x in refs_x]
        pt, rt, ft = csp_metrics(refs_masks, hyp_t)
        srng = np.random.default_rng(77)
        hyp_s = [model.generate(x, "sample", srng).mask for x in refs_x]
        ps, rs, fs = csp_metrics(refs_masks, hyp_s)
        last = hist[-1]
        print(f"  ep{block+eval_every:3d} Ld={last['loss_d']:.3f} s={last['mean_switch_prob']:.3f} "
              f"| thr F={ft:.3f} (P={pt:.2f} R={rt:.2f}) smp F={fs:.3f} ({time.time()-t0:.0f}s)",
              flush=True)

def variant(which):
    if which.startswith("ema"):
        # emaN -> seed N with MLP heads + Polyak averaging (single train call)
        n = int(which[3:])
        run(f"K3 mlp ema seed{n}", g_samples=3, emb=112, seed=n, epochs=60,
            eval_every=60, g_step_size=1e-3, d_step_size=5e-3,
            freeze_head_bias=True, param_ema_decay=0.998)
        return
    if which.startswith("mlp"):
        # mlpN -> seed N with MLP heads
        n = int(which[3:])
        run(f"K3 mlp seed{n}", g_samples=3, emb=112, seed=n,
            g_step_size=1e-3, d_step_size=5e-3, freeze_head_bias=True)
        return
    if which.startswith("enc"):
        # encN_S -> seed N, encoder scale S
        _, n, s = which.split("_")
        run(f"K3 encscale{s} seed{n}", g_samples=3, emb=112, seed=int(n),
            g_step_size=1e-3, d_step_size=5e-3, freeze_head_bias=True,
            encoder_lr_scale=float(s))
        return
    if which == "fb0":
        run("K3 fbias seed0", g_samples=3, emb=112, g_step_size=1e-3,
            d_step_size=5e-3, freeze_head_bias=True)
    elif which == "fb1":
        run("K3 fbias seed1", g_samples=3, emb=112, seed=1, g_step_size=1e-3,
            d_step_size=5e-3, freeze_head_bias=True)
    elif which == "fb2":
        run("K3 fbias seed2", g_samples=3, emb=112, seed=2, g_step_size=1e-3,
            d_step_size=5e-3, freeze_head_bias=True)
    elif which == "fbpos":
        run("K3 fbias pos seed0", g_samples=3, emb=112, use_pos=True,
            g_step_size=1e-3, d_step_size=5e-3, freeze_head_bias=True)
    elif which == "k3":
        run("K3 emb112 logd", g_samples=3, emb=112, g_step_size=1e-3, d_step_size=5e-3)
    elif which == "k4s1":
        run("K4 emb112 logd seed1", g_samples=4, emb=112, seed=1, g_step_size=1e-3, d_step_size=5e-3)
    elif which == "k4pos":
        run("K4 emb112 logd pos", g_samples=4, emb=112, use_pos=True, g_step_size=1e-3, d_step_size=5e-3)


if __name__ == "__main__":
    which = sys.argv[1]
    if which.startswith("lgt"):
        variant2(which); sys.exit(0)
    if which.startswith(("k", "fb", "enc", "mlp", "ema")):
        variant(which); sys.exit(0)
    if which == "a":
        run("K4 logd g1e-3 d5e-3", g_samples=4, g_step_size=1e-3, d_step_size=5e-3)
    elif which == "b":
        run("K4 rawd g1e-3 d5e-3", g_samples=4, g_step_size=1e-3, d_step_size=5e-3, reward="raw-d")


def variant2(which):
    # lgt_SEED_DLR[_step]
    parts = which.split("_")
    seed = int(parts[1]); dlr = float(parts[2])
    noise = "step" if len(parts) > 3 and parts[3] == "step" else "sentence"
    run(f"logit seed{seed} dlr{dlr} {noise}", n_train=2000, epochs=30, eval_every=10,
        g_samples=3, emb=112, seed=seed, g_step_size=1e-3, d_step_size=dlr,
        freeze_head_bias=True, param_ema_decay=0.998, reward="logit-d")
