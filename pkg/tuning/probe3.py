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

def logreg_acc(X, y, Xte, yte, steps=600, lr=0.05):
    w = np.zeros(X.shape[1]); b = 0.0
    r = np.random.default_rng(0)
    for _ in range(steps):
        idx = r.integers(0, len(y), 64)
        z = X[idx] @ w + b
        p = 1/(1+np.exp(-z))
        g = p - y[idx]
        w -= lr * (X[idx].T @ g / 64 + 1e-4 * w)
        b -= lr * g.mean()
    return np.mean(((Xte @ w + b) > 0) == yte)

def test(emb_dim, H, kind, seed=0):
    r = np.random.default_rng(seed)
    arrays = {"emb": neural.init_embedding(r, len(vocab), emb_dim)}
    for d in ("fwd", "bwd"):
        for k, v in neural.init_lstm(r, emb_dim, H).items():
            arrays[f"blstm.{d}.{k}"] = v
    params = ParamBlock(arrays)
    def feats(sent):
        ids = vocab.ids(sent.surfaces())
        e = neural.embed_forward(params, "emb", ids, None)
        hs = neural.blstm_forward(params, "blstm", e, None)
        if kind == "mean_h":
            return hs.mean(axis=0)
        if kind == "mean_emb":
            return e.mean(axis=0)
        if kind == "mean_h+mean_emb":
            return np.concatenate([hs.mean(axis=0), e.mean(axis=0)])
    Xr = np.array([feats(s) for s in cs_train[:700]])
    Xf = np.array([feats(s) for s in fakes[:700]])
    X = np.vstack([Xr[:500], Xf[:500]]); y = np.array([1]*500 + [0]*500)
    Xte = np.vstack([Xr[500:], Xf[500:]]); yte = np.array([1]*200 + [0]*200)
    mu, sd = X.mean(0), X.std(0) + 1e-8
    acc = logreg_acc((X-mu)/sd, y, (Xte-mu)/sd, yte)
    print(f"emb={emb_dim} H={H} {kind:16s}: acc={acc:.3f}")

test(32, 64, "mean_h")
test(96, 64, "mean_h")
test(128, 64, "mean_h")
test(96, 64, "mean_emb")
test(96, 64, "mean_h+mean_emb")
test(32, 64, "mean_emb")
