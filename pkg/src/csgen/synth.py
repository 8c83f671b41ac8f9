"""Synthetic planted-rule corpora.

Stands in for licensed speech corpora: host sentences are sampled from a
small CJK-script vocabulary and paired with code-switched versions whose
switch bits follow a known probabilistic rule (high probability on nouns
that follow a trigger word, low probability elsewhere). The gold masks
make end-to-end switch-point evaluation possible.

Rare nouns are down-weighted in the train split and boosted in the test
split, so POS-aware generators have a genuine generalization edge, the
same way domain terminology behaves in real lecture data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Lang, Sentence, Token
from .lexicon import PosLexicon, TranslationLexicon, realize


class SynthError(Exception):
    pass


_SYLLABLES = ("ba", "de", "ki", "lo", "mu", "na", "po", "ra", "su", "ti")

TAG_INVENTORY = ("x", "nn", "v", "d", "eng")
NOUN_TAGS = frozenset({"nn"})


@dataclass(frozen=True)
class PlantedRule:
    words: tuple[str, ...]
    pos: dict[str, str]
    translations: dict[str, tuple[str, ...]]
    triggers: frozenset[str]
    noun_tags: frozenset[str]
    p_high: float = 0.9
    p_low: float = 0.05
    len_range: tuple[int, int] = (5, 12)
    train_weights: tuple[float, ...] = ()
    test_weights: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.p_high > self.p_low:
            raise SynthError("p_high must exceed p_low")
        missing = [w for w in self.words if w not in self.translations]
        if missing:
            raise SynthError(f"words without lexicon entries: {missing[:5]}")

    def lexicon(self) -> TranslationLexicon:
        return TranslationLexicon(dict(self.translations))

    def pos_lexicon(self) -> PosLexicon:
        return PosLexicon(dict(self.pos), TAG_INVENTORY, self.noun_tags)

    def rule_positions(self, surfaces: tuple[str, ...]) -> list[bool]:
        """True where the planted rule applies: a noun right after a trigger."""
        out = []
        for i, w in enumerate(surfaces):
            out.append(
                i > 0
                and self.pos.get(w) in self.noun_tags
                and surfaces[i - 1] in self.triggers
            )
        return out

    def weights(self, split: str) -> np.ndarray:
        if split == "train":
            w = np.array(self.train_weights)
        elif split == "test":
            w = np.array(self.test_weights)
        else:
            raise SynthError(f"unknown split {split!r}")
        return w / w.sum()


def _host_surface(i: int) -> str:
    # Two CJK codepoints per word keeps surfaces distinct and host-script.
    return chr(0x4E00 + 2 * i) + chr(0x4E01 + 2 * i)


def _guest_translation(i: int) -> tuple[str, ...]:
    word = _SYLLABLES[i % 10] + _SYLLABLES[(i // 10) % 10]
    if i % 7 == 3:  # a few multiword translations exercise hyphen joining
        return (word, _SYLLABLES[(i + 1) % 10])
    return (word + str(i),) if i >= 10 else (word,)


def default_rule(
    n_triggers: int = 5,
    n_common_nouns: int = 10,
    n_rare_nouns: int = 8,
    n_other: int = 27,
    p_high: float = 0.9,
    p_low: float = 0.05,
    len_range: tuple[int, int] = (4, 9),
    rare_train_weight: float = 0.02,
) -> PlantedRule:
    """A ~50-word vocabulary with triggers, nouns and filler words."""
    n_total = n_triggers + n_common_nouns + n_rare_nouns + n_other
    words = tuple(_host_surface(i) for i in range(n_total))
    triggers = frozenset(words[:n_triggers])
    common = words[n_triggers : n_triggers + n_common_nouns]
    rare = words[n_triggers + n_common_nouns : n_triggers + n_common_nouns + n_rare_nouns]
    other = words[n_triggers + n_common_nouns + n_rare_nouns :]
    pos = {}
    for w in triggers:
        pos[w] = "d"
    for w in common + rare:
        pos[w] = "nn"
    for j, w in enumerate(other):
        pos[w] = "v" if j % 2 == 0 else "x"
    translations = {w: _guest_translation(i) for i, w in enumerate(words)}

    def class_weights(trigger_w, common_w, rare_w, other_w):
        weights = []
        for w in words:
            if w in triggers:
                weights.append(trigger_w / n_triggers)
            elif w in common:
                weights.append(common_w / n_common_nouns)
            elif w in rare:
                weights.append(rare_w / n_rare_nouns)
            else:
                weights.append(other_w / n_other)
        return tuple(weights)

    return PlantedRule(
        words=words,
        pos=pos,
        translations=translations,
        triggers=frozenset(triggers),
        noun_tags=NOUN_TAGS,
        p_high=p_high,
        p_low=p_low,
        len_range=len_range,
        train_weights=class_weights(0.25, 0.35, rare_train_weight, 0.38),
        test_weights=class_weights(0.25, 0.20, 0.22, 0.33),
    )


@dataclass(frozen=True)
class SynthSample:
    host: Corpus
    cs: Corpus
    masks: tuple[tuple[bool, ...], ...]


def synth_corpus(
    rule: PlantedRule, n_sentences: int, seed: int, split: str = "train"
) -> SynthSample:
    """Paired host/code-switched corpora with gold switch masks.

    Each position's bit is sampled independently from p_high or p_low
    according to the rule; switch-bit statistics are therefore exactly
    product-Bernoulli. Deterministic per seed.
    """
    if n_sentences < 1:
        raise SynthError("need at least one sentence")
    rng = np.random.default_rng(seed)
    weights = rule.weights(split)
    lex = rule.lexicon()
    lo, hi = rule.len_range
    hosts = []
    cs = []
    masks = []
    for _ in range(n_sentences):
        length = int(rng.integers(lo, hi + 1))
        idxs = rng.choice(len(rule.words), size=length, p=weights)
        surfaces = tuple(rule.words[i] for i in idxs)
        sent = Sentence(tuple(Token(w, Lang.HOST) for w in surfaces))
        flags = rule.rule_positions(surfaces)
        draws = rng.random(length)
        mask = tuple(
            bool(d < (rule.p_high if f else rule.p_low))
            for d, f in zip(draws, flags)
        )
        hosts.append(sent)
        masks.append(mask)
        cs.append(realize(sent, mask, lex))
    return SynthSample(
        host=Corpus(tuple(hosts), role="host-monolingual"),
        cs=Corpus(tuple(cs), role="cs-training"),
        masks=tuple(masks),
    )


def collect_cs_utterances(
    rule: PlantedRule, n: int, seed: int, split: str = "train",
    max_chunks: int = 200,
) -> tuple[list[Sentence], list[Sentence], list[tuple[bool, ...]]]:
    """Generate until n pairs whose gold mask has at least one switch.

    Mirrors the role split of transcribed corpora: utterances whose
    realized version contains no guest token are host-monolingual, not
    code-switching, so they cannot serve as real examples for the
    discriminator. Returns (host sentences, cs sentences, masks).
    """
    hosts: list[Sentence] = []
    cs: list[Sentence] = []
    masks: list[tuple[bool, ...]] = []
    rng = np.random.default_rng(seed)
    for _ in range(max_chunks):
        if len(cs) >= n:
            break
        chunk_seed = int(rng.integers(0, 2**31 - 1))
        sample = synth_corpus(rule, max(n, 64), chunk_seed, split)
        for host, sent, mask in zip(sample.host, sample.cs, sample.masks):
            if any(mask):
                hosts.append(host)
                cs.append(sent)
                masks.append(mask)
                if len(cs) >= n:
                    break
    if len(cs) < n:
        raise SynthError(f"could not collect {n} code-switched sentences")
    return hosts, cs, masks


# Reference files pair a host sentence with its gold switch mask, one pair
# per line: space-separated tokens, a tab, then space-separated 0/1 bits.
def save_refs(path, hosts: list[Sentence], masks: list[tuple[bool, ...]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for sent, mask in zip(hosts, masks):
            bits = " ".join("1" if b else "0" for b in mask)
            f.write(" ".join(sent.surfaces()) + "\t" + bits + "\n")


def load_refs(path) -> tuple[list[Sentence], list[tuple[bool, ...]]]:
    hosts = []
    masks = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                continue
            if "\t" not in stripped:
                raise SynthError(f"refs line {line_no}: missing tab separator")
            tokens_part, bits_part = stripped.split("\t", 1)
            tokens = tuple(Token(w, Lang.HOST) for w in tokens_part.split())
            bits = tuple(b == "1" for b in bits_part.split())
            if len(tokens) != len(bits):
                raise SynthError(f"refs line {line_no}: token/bit count mismatch")
            hosts.append(Sentence(tokens, source_line=line_no))
            masks.append(bits)
    return hosts, masks
