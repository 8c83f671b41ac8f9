import time
import numpy as np
from csgen.corpus import Corpus, build_vocab, cs_rate
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.synth import collect_cs_utterances, default_rule, synth_corpus
from csgen import neural
from csgen.neural import ParamBlock, Tape

rule = default_rule()
hosts, cs_train, _ = collect_cs_utterances(rule, 1500, 1)
d_zh = synth_corpus(rule, 1500, 2, "train").host
lex = rule.lexicon()
vocab = build_vocab(Corpus(tuple(cs_train) + d_zh.sentences), 8200,
                    extra_surfaces=lex.all_realized())
rate = cs_rate(Corpus(tuple(cs_train)))
rng = np.random.default_rng(3)
fakes = [apply_baseline(BaselineStrategy("random", p=rate), x, lex, rng=rng).sentence
         for x in d_zh]

def fit(X, y, Xte, yte, steps=8000, lr=0.1):
    w = np.zeros(X.shape[1]); b = 0.0
    r = np.random.default_rng(0)
    for k in range(steps):
        idx = r.integers(0, len(y), 128)
        p = 1/(1+np.exp(-(X[idx] @ w + b)))
        g = p - y[idx]
        step = lr / (1 + k/2000)
        w -= step * (X[idx].T @ g / 128)
        b -= step * g.mean()
    return np.mean(((Xte @ w + b) > 0) == yte)

for emb_dim, H in ((96, 48), (112, 48), (112, 64), (96, 64)):
    r = np.random.default_rng(0)
    arrays = {"emb": neural.init_embedding(r, len(vocab), emb_dim)}
    for d in ("fwd", "bwd"):
        for k, v in neural.init_lstm(r, emb_dim, H).items():
            arrays[f"blstm.{d}.{k}"] = v
    params = ParamBlock(arrays)
    def feats(sent):
        ids = vocab.ids(sent.surfaces())
        e = neural.embed_forward(params, "emb", ids, None)
        hs = neural.blstm_forward(params, "blstm", e, None)
        return hs.mean(axis=0)
    t0 = time.time()
    Xr = np.array([feats(s) for s in cs_train])
    enc_time = time.time() - t0
    Xf = np.array([feats(s) for s in fakes])
    X = np.vstack([Xr[:1100], Xf[:1100]]); y = np.array([1]*1100+[0]*1100)
    Xte = np.vstack([Xr[1100:], Xf[1100:]]); yte = np.array([1]*400+[0]*400)
    mu, sd = X.mean(0), X.std(0)+1e-8
    acc = fit((X-mu)/sd, y, (Xte-mu)/sd, yte)
    print(f"emb={emb_dim} H={H}: acc={acc:.3f} (1500 fwd encodes: {enc_time:.1f}s)")
