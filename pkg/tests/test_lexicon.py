import pytest
from hypothesis import given
from hypothesis import strategies as st

from csgen.corpus import Corpus, Lang
from csgen.lexicon import (
    LexiconError,
    PosLexicon,
    RealizationError,
    TranslationLexicon,
    coverage,
    load_lexicon,
    load_pos_lexicon,
    load_tag_inventory,
    realize,
    switchable_positions,
    tag_pos,
)
from conftest import guest, host, host_sent, sent


class TestLoadLexicon:
    def test_single_word(self):
        lex, warnings = load_lexicon(["輸出\toutput"])
        assert lex.translation("輸出") == ("output",)
        assert warnings == 0

    def test_multiword_translation(self):
        lex, _ = load_lexicon(["在任意時間\tat any time"])
        assert lex.translation("在任意時間") == ("at", "any", "time")
        assert lex.realized("在任意時間") == "at-any-time"

    def test_duplicate_last_wins_with_warning(self):
        lex, warnings = load_lexicon(["一\tone", "一\tuno"])
        assert lex.translation("一") == ("uno",)
        assert warnings == 1

    def test_missing_tab_reports_line(self):
        with pytest.raises(LexiconError, match="line 2"):
            load_lexicon(["一\tone", "二 two"])


class TestTagInventory:
    def test_noun_prefix(self):
        inventory, nouns = load_tag_inventory(["noun:nn", "noun:nr", "v", "x", "eng"])
        assert inventory == ("nn", "nr", "v", "x", "eng")
        assert nouns == frozenset({"nn", "nr"})

    def test_oversized_inventory_rejected(self):
        tags = tuple(f"t{i}" for i in range(63)) + ("x", "eng")
        with pytest.raises(LexiconError):
            PosLexicon({}, tags, frozenset())

    def test_missing_reserved_tags_rejected(self):
        with pytest.raises(LexiconError):
            PosLexicon({}, ("nn",), frozenset())


class TestTagPos:
    def test_lookup_and_eng(self, tiny_pos_lexicon):
        s = sent(host("訊號"), guest("output"))
        tagged = tag_pos(tiny_pos_lexicon, s)
        assert [t.pos for t in tagged] == ["nn", "eng"]

    def test_default_tag(self, tiny_pos_lexicon):
        tagged = tag_pos(tiny_pos_lexicon, host_sent("未知"))
        assert tagged.tokens[0].pos == "x"

    def test_idempotent(self, tiny_pos_lexicon):
        s = sent(host("訊號"), guest("output"))
        once = tag_pos(tiny_pos_lexicon, s)
        assert tag_pos(tiny_pos_lexicon, once) == once


class TestRealize:
    def test_single_substitution(self, tiny_lexicon):
        x = host_sent("我", "要", "介紹")
        y = realize(x, [False, False, True], tiny_lexicon)
        assert y.surfaces() == ("我", "要", "introduce")
        assert [t.lang for t in y] == [Lang.HOST, Lang.HOST, Lang.GUEST]

    def test_all_false_is_identity(self, tiny_lexicon):
        x = host_sent("我", "要", "介紹")
        assert realize(x, [False] * 3, tiny_lexicon).surfaces() == x.surfaces()

    def test_multiword_hyphen_join(self, tiny_lexicon):
        x = host_sent("輸出", "在任意時間", "只", "取決於", "輸入")
        y = realize(x, [True, True, False, True, False], tiny_lexicon)
        assert y.surfaces() == ("output", "at-any-time", "只", "depend-on", "輸入")

    def test_uncovered_true_bit_raises(self, tiny_lexicon):
        with pytest.raises(RealizationError, match="沒有"):
            realize(host_sent("沒有"), [True], tiny_lexicon)

    def test_length_mismatch_raises(self, tiny_lexicon):
        with pytest.raises(RealizationError):
            realize(host_sent("我"), [True, False], tiny_lexicon)


_keys = ["介紹", "輸出", "輸入", "訊號"]


@given(
    st.lists(st.sampled_from(_keys + ["這個", "我"]), min_size=1, max_size=8),
    st.data(),
)
def test_realize_properties(surfaces, data):
    lex = TranslationLexicon({k: (f"t{i}",) for i, k in enumerate(_keys)})
    x = host_sent(*surfaces)
    legal = switchable_positions(x, lex)
    mask = [data.draw(st.booleans()) and ok for ok in legal]
    y = realize(x, mask, lex)
    assert len(y) == len(x)
    for tok_x, tok_y, bit in zip(x, y, mask):
        if bit:
            assert tok_y.lang is Lang.GUEST
        else:
            assert tok_y.surface == tok_x.surface
            assert tok_y.lang is Lang.HOST


class TestCoverage:
    def test_full(self, tiny_lexicon):
        corpus = Corpus((host_sent("介紹", "輸出"),))
        assert coverage(tiny_lexicon, corpus) == 1.0

    def test_empty_lexicon(self):
        lex = TranslationLexicon({})
        assert coverage(lex, Corpus((host_sent("一", "二"),))) == 0.0

    def test_half(self):
        lex = TranslationLexicon({"一": ("one",)})
        assert coverage(lex, Corpus((host_sent("一", "二"),))) == 0.5

    def test_guest_tokens_excluded_from_denominator(self, tiny_lexicon):
        corpus = Corpus((sent(host("介紹"), guest("already")),))
        assert coverage(tiny_lexicon, corpus) == 1.0
