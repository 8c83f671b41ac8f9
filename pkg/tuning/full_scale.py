"""Full acceptance-scale check for the planted-rule criterion."""
import sys, time
import numpy as np
from csgen.corpus import Corpus, build_vocab, cs_rate
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.metrics import csp_metrics
from csgen.experiments import RunConfig, SynthSettings, TrainSettings, build_world, train_gan_variant

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 60
cfg = RunConfig(seed=seed,
                synth=SynthSettings(n_train=2000, n_dev=200, n_test=400, n_refs=50),
                train=TrainSettings(epochs=epochs))
world = build_world(cfg)
rng = np.random.default_rng(seed + 9)
rand_masks = [apply_baseline(BaselineStrategy("random", p=world.cs_rate),
                             x, world.lexicon, rng=rng).mask for x in world.refs_x]
_, _, rand_f = csp_metrics(world.refs_masks, rand_masks)
print(f"seed={seed} cs_rate={world.cs_rate:.3f} random F={rand_f:.3f} bar={rand_f+0.15:.3f}", flush=True)

for use_pos, name in ((False, "plain"), (True, "pos")):
    t0 = time.time()
    model, _ = train_gan_variant(world, cfg, use_pos=use_pos)
    hyp = [model.generate(x, "threshold").mask for x in world.refs_x]
    p, r, f = csp_metrics(world.refs_masks, hyp)
    srng = np.random.default_rng(77)
    hyp_s = [model.generate(x, "sample", srng).mask for x in world.refs_x]
    _, _, fs = csp_metrics(world.refs_masks, hyp_s)
    print(f"  {name}: thr F={f:.3f} (P={p:.2f} R={r:.2f}) smp F={fs:.3f} "
          f"[{time.time()-t0:.0f}s]", flush=True)
