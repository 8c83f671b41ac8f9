"""Word-level interpolated Kneser-Ney trigram language model.

Absolute discounts are estimated per order as D = n1/(n1 + 2*n2) from
count-of-count statistics (falling back to 0.75 with a warning when n1 or
n2 is zero). Lower orders use continuation counts. Every sentence is
padded with two start markers and one end marker; start markers are never
predicted, so the event space is the vocabulary minus the start marker.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass

from .corpus import Corpus, Sentence, Vocabulary
from .lm_base import PerplexityReport


class NgramError(Exception):
    pass


def _discount(values, order_name: str, fallbacks: list[str]) -> float:
    counts = Counter(values)
    n1 = counts.get(1, 0)
    n2 = counts.get(2, 0)
    if n1 == 0 or n2 == 0:
        fallbacks.append(order_name)
        warnings.warn(
            f"count-of-counts degenerate at {order_name} order; using discount 0.75"
        )
        return 0.75
    return n1 / (n1 + 2.0 * n2)


class KNTrigramModel:
    """Counts plus derived continuation tables; immutable once built."""

    def __init__(self, vocab: Vocabulary, trigram_counts: dict[tuple[int, int, int], int],
                 discounts: tuple[float, float, float] | None = None):
        self.vocab = vocab
        self.c3 = dict(trigram_counts)
        self.fallbacks: list[str] = []

        self.ctx3: Counter = Counter()
        self.after3: Counter = Counter()  # distinct continuations of (u, v)
        self.cont2: Counter = Counter()  # N1+(. v w)
        for (u, v, w), c in self.c3.items():
            self.ctx3[(u, v)] += c
            self.after3[(u, v)] += 1
            self.cont2[(v, w)] += 1
        self.ctx2: Counter = Counter()
        self.after2: Counter = Counter()  # distinct continuations of v
        self.cont1: Counter = Counter()  # N1+(. w)
        for (v, w), c in self.cont2.items():
            self.ctx2[v] += c
            self.after2[v] += 1
            self.cont1[w] += 1
        self.tot1 = sum(self.cont1.values())  # number of distinct bigram types
        self.uni_types = len(self.cont1)
        # Start marker is context-only, never an event.
        self.n_events = len(vocab) - 1

        if discounts is not None:
            self.d3, self.d2, self.d1 = discounts
        else:
            self.d3 = _discount(self.c3.values(), "trigram", self.fallbacks)
            self.d2 = _discount(self.cont2.values(), "bigram", self.fallbacks)
            self.d1 = _discount(self.cont1.values(), "unigram", self.fallbacks)

    # --- probabilities -----------------------------------------------------
    def prob_uni(self, w: int) -> float:
        if self.tot1 == 0:
            return 1.0 / self.n_events
        base = max(self.cont1.get(w, 0) - self.d1, 0.0) / self.tot1
        lam = self.d1 * self.uni_types / self.tot1
        return base + lam / self.n_events

    def prob_bi(self, v: int, w: int) -> float:
        ctx = self.ctx2.get(v, 0)
        if ctx == 0:
            return self.prob_uni(w)
        base = max(self.cont2.get((v, w), 0) - self.d2, 0.0) / ctx
        lam = self.d2 * self.after2[v] / ctx
        return base + lam * self.prob_uni(w)

    def prob(self, u: int, v: int, w: int) -> float:
        """Interpolated p(w | u, v). ``w`` must be an event (not <s>)."""
        if w == self.vocab.bos_id:
            raise NgramError("start marker cannot be predicted")
        ctx = self.ctx3.get((u, v), 0)
        if ctx == 0:
            return self.prob_bi(v, w)
        base = max(self.c3.get((u, v, w), 0) - self.d3, 0.0) / ctx
        lam = self.d3 * self.after3[(u, v)] / ctx
        return base + lam * self.prob_bi(v, w)

    # --- scoring -------------------------------------------------------------
    def padded_ids(self, sentence: Sentence) -> list[int]:
        v = self.vocab
        return [v.bos_id, v.bos_id] + v.ids(sentence.surfaces()) + [v.eos_id]

    def sentence_logprob(self, sentence: Sentence) -> tuple[float, int, int]:
        """(natural-log probability, scored-word count, oov count)."""
        ids = self.padded_ids(sentence)
        ll = 0.0
        for i in range(2, len(ids)):
            ll += math.log(self.prob(ids[i - 2], ids[i - 1], ids[i]))
        oov = sum(1 for t in sentence.surfaces() if t not in self.vocab)
        return ll, len(ids) - 2, oov

    # --- plain-text count-table dump ------------------------------------------
    DUMP_VERSION = 1

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"kn3 {self.DUMP_VERSION}\n")
            f.write(f"discounts {self.d3!r} {self.d2!r} {self.d1!r}\n")
            f.write(f"vocab {len(self.vocab)}\n")
            for i in range(len(self.vocab)):
                f.write(self.vocab.surface(i) + "\n")
            f.write(f"trigrams {len(self.c3)}\n")
            for (u, v, w), c in sorted(self.c3.items()):
                f.write(f"{u} {v} {w} {c}\n")

    @classmethod
    def load(cls, path) -> "KNTrigramModel":
        with open(path, encoding="utf-8") as f:
            header = f.readline().split()
            if header[:1] != ["kn3"] or int(header[1]) != cls.DUMP_VERSION:
                raise NgramError(f"unsupported count-table format: {header}")
            disc = f.readline().split()
            discounts = (float(disc[1]), float(disc[2]), float(disc[3]))
            n_vocab = int(f.readline().split()[1])
            surfaces = [f.readline().rstrip("\n") for _ in range(n_vocab)]
            vocab = Vocabulary(surfaces[3:])
            n_tri = int(f.readline().split()[1])
            c3 = {}
            for _ in range(n_tri):
                u, v, w, c = f.readline().split()
                c3[(int(u), int(v), int(w))] = int(c)
        return cls(vocab, c3, discounts=discounts)


def train_kn(corpus: Corpus, vocab: Vocabulary) -> KNTrigramModel:
    """Count trigrams over the corpus (OOV mapped to the unknown marker)."""
    if len(corpus) == 0:
        raise NgramError("empty training corpus")
    c3: Counter = Counter()
    for sentence in corpus:
        ids = [vocab.bos_id, vocab.bos_id] + vocab.ids(sentence.surfaces()) + [vocab.eos_id]
        for i in range(2, len(ids)):
            c3[(ids[i - 2], ids[i - 1], ids[i])] += 1
    return KNTrigramModel(vocab, dict(c3))


def ngram_ppl(model: KNTrigramModel, corpus: Corpus) -> PerplexityReport:
    """exp(-mean ln p) over real words plus one end marker per sentence."""
    ll = 0.0
    count = 0
    oov = 0
    for sentence in corpus:
        s_ll, s_count, s_oov = model.sentence_logprob(sentence)
        ll += s_ll
        count += s_count
        oov += s_oov
    return PerplexityReport.from_ll(ll, count, oov)
