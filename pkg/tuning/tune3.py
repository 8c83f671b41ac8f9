import time
import numpy as np
from csgen.corpus import Corpus, build_vocab, cs_rate
from csgen.gan import CodeSwitchGan, ModelConfig, TrainConfig, train
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.metrics import csp_metrics
from csgen.synth import collect_cs_utterances, default_rule, synth_corpus

def run(tag, n_train=600, epochs=40, eval_every=10, seed=0, use_pos=False,
        pooling="finals", head_dropout=0.3, hidden=32, **tkw):
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
    cfg = ModelConfig(vocab_size=len(vocab), emb_dim=32, hidden_dim=hidden,
                      noise_dim=10, use_pos=use_pos, pos_emb_dim=8,
                      head_dropout=head_dropout, pooling=pooling)
    model = CodeSwitchGan(cfg, vocab, lex, rule.pos_lexicon() if use_pos else None, seed=seed)
    tcfg = TrainConfig(epochs=eval_every, batch_size=32, seed=seed, **tkw)
    t0 = time.time()
    print(f"--- {tag} (random F={rf:.3f})")
    for block in range(0, epochs, eval_every):
        hist = train(model, d_cs, d_zh, tcfg)
        hyp_t = [model.generate(x, "threshold").mask for x in refs_x]
        _, _, ft = csp_metrics(refs_masks, hyp_t)
        srng = np.random.default_rng(77)
        hyp_s = [model.generate(x, "sample", srng).mask for x in refs_x]
        _, _, fs = csp_metrics(refs_masks, hyp_s)
        last = hist[-1]
        print(f"  ep{block+eval_every:3d} Ld={last['loss_d']:.3f} s={last['mean_switch_prob']:.3f} "
              f"| F_thr={ft:.3f} F_smp={fs:.3f} ({time.time()-t0:.0f}s)")

run("mean pool d_lr=5e-3", pooling="mean", d_step_size=5e-3, g_step_size=2e-3)
run("mean pool + drop0.1", pooling="mean", head_dropout=0.1, d_step_size=5e-3, g_step_size=2e-3)
run("mean pool hidden64", pooling="mean", hidden=64, d_step_size=5e-3, g_step_size=2e-3)
