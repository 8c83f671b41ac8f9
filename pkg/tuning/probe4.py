import numpy as np
from csgen.corpus import Corpus, build_vocab, cs_rate, Lang
from csgen.baselines import BaselineStrategy, apply_baseline
from csgen.synth import collect_cs_utterances, default_rule, synth_corpus

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
print("zero-switch fakes:", np.mean([not s.has_guest() for s in fakes]).round(3))

V = len(vocab)
def bow(sent):
    v = np.zeros(V)
    for t in sent:
        v[vocab.id(t.surface)] += 1
    return v

def bigram_feats(sent):
    # counts of (prev-is-trigger, cur-is-guest) style indicator features
    trg = rule.triggers
    f = np.zeros(4)
    for i, t in enumerate(sent.tokens):
        guest = t.lang is Lang.GUEST
        prev_trigger = i > 0 and sent.tokens[i-1].surface in trg
        f[0] += guest
        f[1] += guest and prev_trigger
        f[2] += (not guest) and prev_trigger
        f[3] += 1
    return f

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

for name, feat in (("bow", bow), ("oracle-bigram", bigram_feats)):
    Xr = np.array([feat(s) for s in cs_train])
    Xf = np.array([feat(s) for s in fakes])
    X = np.vstack([Xr[:1100], Xf[:1100]]); y = np.array([1]*1100+[0]*1100)
    Xte = np.vstack([Xr[1100:], Xf[1100:]]); yte = np.array([1]*400+[0]*400)
    mu, sd = X.mean(0), X.std(0)+1e-8
    print(name, "acc:", fit((X-mu)/sd, y, (Xte-mu)/sd, yte).round(3))
