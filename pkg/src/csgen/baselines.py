"""Rule-based comparison generators: zh, en, random, noun."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Sentence
from .lexicon import PosLexicon, TranslationLexicon, realize, tag_pos


class BaselineError(Exception):
    pass


STRATEGIES = ("zh", "en", "random", "noun")


@dataclass(frozen=True)
class BaselineStrategy:
    kind: str
    p: float = 0.0  # switch probability for "random"

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise BaselineError(f"unknown baseline {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise BaselineError("random switch probability must be in [0, 1]")


@dataclass(frozen=True)
class BaselineResult:
    sentence: Sentence
    mask: tuple[bool, ...]
    uncovered: int  # switch-eligible tokens skipped for lack of a lexicon entry


def apply_baseline(
    strategy: BaselineStrategy,
    x: Sentence,
    lex: TranslationLexicon,
    pos_lex: PosLexicon | None = None,
    rng: np.random.Generator | None = None,
) -> BaselineResult:
    """Apply one of the four rule generators to a host sentence.

    zh copies the input; en translates every covered token; random switches
    each covered token independently with probability p (conventionally the
    corpus cs-rate); noun switches covered tokens whose POS tag is in the
    noun set.
    """
    if not x.is_host_monolingual():
        raise BaselineError("baseline input must be monolingual host")
    n = len(x)
    uncovered = 0
    if strategy.kind == "zh":
        mask = [False] * n
    elif strategy.kind == "en":
        mask = []
        for tok in x:
            if tok.surface in lex:
                mask.append(True)
            else:
                mask.append(False)
                uncovered += 1
    elif strategy.kind == "random":
        if rng is None:
            raise BaselineError("random baseline needs an rng")
        draws = rng.random(n) < strategy.p
        mask = [bool(d) and tok.surface in lex for d, tok in zip(draws, x)]
    else:  # noun
        if pos_lex is None:
            raise BaselineError("noun baseline needs a POS lexicon")
        tagged = tag_pos(pos_lex, x)
        mask = []
        for tok in tagged:
            if pos_lex.is_noun(tok.pos):
                if tok.surface in lex:
                    mask.append(True)
                else:
                    mask.append(False)
                    uncovered += 1
            else:
                mask.append(False)
    return BaselineResult(realize(x, mask, lex), tuple(mask), uncovered)
