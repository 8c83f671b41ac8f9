import time
import numpy as np
from csgen.char_lm import CharLmConfig, char_lstm_ppl, train_char_lstm
from csgen.corpus import Corpus, cs_rate
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.experiments import RunConfig, SynthSettings, augment, build_world

cfg = RunConfig(seed=0, synth=SynthSettings(n_train=2000, n_dev=200, n_test=400, n_refs=50))
world = build_world(cfg)
print(f"|train|={len(world.d_cs)} |dev|={len(world.dev)} cs_rate={world.cs_rate:.3f}", flush=True)

def charlm(corpus, seed, **kw):
    base = dict(hidden_dim=32, dropout=0.7, step_size=0.01, epochs=8,
                batch_size=16, patience=3, seed=seed)
    base.update(kw)
    t0 = time.time()
    model = train_char_lstm(corpus, CharLmConfig(**base), world.dev)
    ppl = char_lstm_ppl(model, world.dev).ppl
    return ppl, time.time() - t0, len(model.history)

for seed in (0, 1, 2):
    base_ppl, t_base, n_ep = charlm(world.d_cs, seed)
    rng = np.random.default_rng(seed + 300)
    strategy = BaselineStrategy("random", p=world.cs_rate)
    aug, _ = augment(world.d_cs, world.d_zh,
                     lambda x: apply_baseline(strategy, x, world.lexicon, rng=rng).sentence)
    aug_ppl, t_aug, n_ep2 = charlm(aug, seed)
    ok = aug_ppl <= base_ppl
    print(f"seed {seed}: base={base_ppl:.3f} ({t_base:.0f}s/{n_ep}ep) "
          f"+random={aug_ppl:.3f} ({t_aug:.0f}s/{n_ep2}ep) {'OK' if ok else 'WORSE'}", flush=True)
