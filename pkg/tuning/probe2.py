"""Probe separability of pooled random-encoder features, by pooling kind."""
import numpy as np
from csgen.corpus import Corpus, build_vocab, cs_rate
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.synth import collect_cs_utterances, default_rule, synth_corpus
from csgen import neural
from csgen.neural import ParamBlock

rule = default_rule()
hosts, cs_train, _ = collect_cs_utterances(rule, 700, 1)
d_zh = synth_corpus(rule, 700, 2, "train").host
lex = rule.lexicon()
vocab = build_vocab(Corpus(tuple(cs_train) + d_zh.sentences), 8200,
                    extra_surfaces=lex.all_realized())
rate = cs_rate(Corpus(tuple(cs_train)))
rng = np.random.default_rng(3)
fakes = [apply_baseline(BaselineStrategy("random", p=rate), x, lex, rng=rng).sentence
         for x in d_zh]

def encode_all(H, rec_scale, emb_dim=32, seed=0):
    r = np.random.default_rng(seed)
    arrays = {"emb": neural.init_embedding(r, len(vocab), emb_dim)}
    for d in ("fwd", "bwd"):
        for k, v in neural.init_lstm(r, emb_dim, H).items():
            arrays[f"blstm.{d}.{k}"] = v
    if rec_scale != 1.0:
        for n in arrays:
            if ".Wx" in n or ".Wh" in n:
                arrays[n] = arrays[n] * rec_scale
    params = ParamBlock(arrays)
    def feats(sent):
        ids = vocab.ids(sent.surfaces())
        e = neural.embed_forward(params, "emb", ids, None)
        hs = neural.blstm_forward(params, "blstm", e, None)
        finals = np.concatenate([hs[-1, :H], hs[0, H:]])
        return {
            "finals": finals,
            "mean": hs.mean(axis=0),
            "mean+max": np.concatenate([hs.mean(axis=0), hs.max(axis=0)]),
            "rich": np.concatenate([finals, hs.mean(axis=0), hs.max(axis=0)]),
        }
    return feats

def logreg_acc(X, y, Xte, yte, steps=400, lr=0.05):
    w = np.zeros(X.shape[1]); b = 0.0
    n = len(y)
    r = np.random.default_rng(0)
    for _ in range(steps):
        idx = r.integers(0, n, 64)
        z = X[idx] @ w + b
        p = 1/(1+np.exp(-z))
        g = p - y[idx]
        w -= lr * (X[idx].T @ g / 64 + 1e-4 * w)
        b -= lr * g.mean()
    acc = np.mean(((Xte @ w + b) > 0) == yte)
    return acc

for H, scale in ((64, 1.0), (64, 2.0), (128, 2.0)):
    feats = encode_all(H, scale)
    cache_real = [feats(s) for s in cs_train[:700]]
    cache_fake = [feats(s) for s in fakes[:700]]
    for kind in ("finals", "mean", "mean+max", "rich"):
        Xr = np.array([c[kind] for c in cache_real])
        Xf = np.array([c[kind] for c in cache_fake])
        X = np.vstack([Xr[:500], Xf[:500]]); y = np.array([1]*500 + [0]*500)
        Xte = np.vstack([Xr[500:], Xf[500:]]); yte = np.array([1]*200 + [0]*200)
        mu, sd = X.mean(0), X.std(0) + 1e-8
        acc = logreg_acc((X-mu)/sd, y, (Xte-mu)/sd, yte)
        print(f"H={H} scale={scale} {kind:9s}: acc={acc:.3f} dim={X.shape[1]}")
