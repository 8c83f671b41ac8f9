"""Can a logistic head on frozen random-encoder features separate
rule-switched from rate-matched randomly-switched sentences?"""
import numpy as np
from csgen.corpus import Corpus, build_vocab, cs_rate
from csgen.gan import CodeSwitchGan, ModelConfig, TrainConfig, discriminator_step
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.neural import AdamState
from csgen.synth import collect_cs_utterances, default_rule, synth_corpus

rule = default_rule()
hosts, cs_train, _ = collect_cs_utterances(rule, 800, 1)
d_cs = Corpus(tuple(cs_train))
d_zh = synth_corpus(rule, 800, 2, "train").host
lex = rule.lexicon()
vocab = build_vocab(Corpus(d_cs.sentences + d_zh.sentences), 8200,
                    extra_surfaces=lex.all_realized())
rate = cs_rate(d_cs)
rng = np.random.default_rng(3)
# rate-matched random fakes (worst-case generator)
fakes = [apply_baseline(BaselineStrategy("random", p=rate), x, lex, rng=rng).sentence
         for x in d_zh]

for pooling in ("finals", "mean"):
    for hidden in (32, 64):
        for rec_scale in (1.0, 4.0):
            cfg = ModelConfig(vocab_size=len(vocab), emb_dim=32, hidden_dim=hidden,
                              noise_dim=10, head_dropout=0.0, pooling=pooling)
            model = CodeSwitchGan(cfg, vocab, lex, seed=0)
            if rec_scale != 1.0:
                for name in model.params.names():
                    if ".Wh" in name or ".Wx" in name:
                        model.params[name] = model.params[name] * rec_scale
            state = AdamState.for_params(model.params, model.discriminator_names(),
                                         step_size=5e-3)
            tcfg = TrainConfig(epochs=1, batch_size=32)
            order = np.random.default_rng(5)
            for step in range(150):
                ridx = order.integers(0, len(cs_train), 32)
                fidx = order.integers(0, len(fakes), 32)
                loss = discriminator_step(model, [cs_train[i] for i in ridx],
                                          [fakes[i] for i in fidx], state, order, tcfg)
            # held-out accuracy
            correct = 0; total = 0
            for s in cs_train[600:700]:
                correct += model.discriminator_score(s) > 0.5; total += 1
            for s in fakes[600:700]:
                correct += model.discriminator_score(s) < 0.5; total += 1
            print(f"pool={pooling} H={hidden} rec_scale={rec_scale}: "
                  f"final loss={loss:.3f} heldout acc={correct/total:.3f}")
