import numpy as np
import pytest

from csgen.corpus import Corpus, Lang, Sentence, Token
from csgen.lexicon import PosLexicon, TranslationLexicon


def host(surface, pos=None):
    return Token(surface, Lang.HOST, pos)


def guest(surface, pos=None):
    return Token(surface, Lang.GUEST, pos)


def sent(*tokens):
    return Sentence(tuple(tokens))


def host_sent(*surfaces):
    return sent(*(host(s) for s in surfaces))


@pytest.fixture
def tiny_lexicon():
    return TranslationLexicon(
        {
            "介紹": ("introduce",),
            "輸出": ("output",),
            "在任意時間": ("at", "any", "time"),
            "取決於": ("depend", "on"),
            "輸入": ("input",),
            "訊號": ("signal",),
        }
    )


@pytest.fixture
def tiny_pos_lexicon():
    inventory = ("x", "nn", "v", "d", "eng")
    return PosLexicon(
        {"訊號": "nn", "輸出": "nn", "輸入": "nn", "介紹": "v", "這個": "d"},
        inventory,
        frozenset({"nn"}),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
