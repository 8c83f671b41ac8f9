import numpy as np
import pytest

from csgen.baselines import BaselineError, BaselineStrategy, apply_baseline
from csgen.corpus import Lang
from csgen.lexicon import TranslationLexicon
from conftest import host_sent


class TestZh:
    def test_identity(self, tiny_lexicon, rng):
        x = host_sent("我", "要", "介紹")
        result = apply_baseline(BaselineStrategy("zh"), x, tiny_lexicon, rng=rng)
        assert result.sentence.surfaces() == x.surfaces()
        assert not any(result.mask)


class TestEn:
    def test_translates_all_covered(self, tiny_lexicon, rng):
        x = host_sent("輸出", "在任意時間", "輸入")
        result = apply_baseline(BaselineStrategy("en"), x, tiny_lexicon, rng=rng)
        assert result.sentence.surfaces() == ("output", "at-any-time", "input")
        assert result.uncovered == 0

    def test_uncovered_kept_and_counted(self, tiny_lexicon, rng):
        x = host_sent("輸出", "沒有")
        result = apply_baseline(BaselineStrategy("en"), x, tiny_lexicon, rng=rng)
        assert result.sentence.surfaces() == ("output", "沒有")
        assert result.uncovered == 1


class TestRandom:
    def test_p_zero_identity(self, tiny_lexicon, rng):
        x = host_sent("輸出", "輸入")
        result = apply_baseline(BaselineStrategy("random", p=0.0), x, tiny_lexicon, rng=rng)
        assert result.sentence.surfaces() == x.surfaces()

    def test_p_one_equals_en_on_covered(self, tiny_lexicon, rng):
        x = host_sent("輸出", "沒有", "輸入")
        random_result = apply_baseline(
            BaselineStrategy("random", p=1.0), x, tiny_lexicon, rng=rng
        )
        en_result = apply_baseline(BaselineStrategy("en"), x, tiny_lexicon, rng=rng)
        assert random_result.sentence.surfaces() == en_result.sentence.surfaces()

    def test_needs_rng(self, tiny_lexicon):
        with pytest.raises(BaselineError):
            apply_baseline(BaselineStrategy("random", p=0.5), host_sent("輸出"), tiny_lexicon)

    def test_calibration(self, rng):
        lex = TranslationLexicon({"一一": ("one",)})
        x = host_sent(*(["一一"] * 1000))
        switched = 0
        total = 0
        for _ in range(100):
            result = apply_baseline(BaselineStrategy("random", p=0.2), x, lex, rng=rng)
            switched += sum(result.mask)
            total += len(result.mask)
        assert total == 100_000
        assert abs(switched / total - 0.2) < 0.005

    def test_bad_p_rejected(self):
        with pytest.raises(BaselineError):
            BaselineStrategy("random", p=1.5)


class TestNoun:
    def test_switches_exactly_covered_nouns(self, tiny_lexicon, tiny_pos_lexicon, rng):
        x = host_sent("訊號", "介紹", "輸出", "這個")
        result = apply_baseline(
            BaselineStrategy("noun"), x, tiny_lexicon, tiny_pos_lexicon, rng
        )
        # 訊號/輸出 are nouns with entries; 介紹 is a verb; 這個 is not a noun
        assert result.sentence.surfaces() == ("signal", "介紹", "output", "這個")
        assert result.mask == (True, False, True, False)

    def test_uncovered_noun_kept(self, tiny_lexicon, tiny_pos_lexicon, rng):
        lex = TranslationLexicon({"訊號": ("signal",)})
        x = host_sent("訊號", "輸出")  # both nouns, only one covered
        result = apply_baseline(BaselineStrategy("noun"), x, lex, tiny_pos_lexicon, rng)
        assert result.sentence.surfaces() == ("signal", "輸出")
        assert result.uncovered == 1

    def test_requires_pos_lexicon(self, tiny_lexicon, rng):
        with pytest.raises(BaselineError):
            apply_baseline(BaselineStrategy("noun"), host_sent("訊號"), tiny_lexicon, None, rng)


class TestStructuralMetrics:
    def test_zh_row_structural_zeros(self, tiny_lexicon, rng):
        from csgen.metrics import csp_metrics, restricted_wer
        from csgen.lexicon import realize

        hosts = [host_sent("輸出", "只", "輸入"), host_sent("訊號", "介紹")]
        ref_masks = [(True, False, True), (True, False)]
        refs = [realize(x, m, tiny_lexicon) for x, m in zip(hosts, ref_masks)]
        zh = [apply_baseline(BaselineStrategy("zh"), x, tiny_lexicon, rng=rng) for x in hosts]
        hyps = [r.sentence for r in zh]
        precision, recall, f = csp_metrics(ref_masks, [r.mask for r in zh])
        assert (precision, recall, f) == (0.0, 0.0, 0.0)
        assert restricted_wer(refs, hyps, Lang.GUEST) == 1.0  # 100%
        assert restricted_wer(refs, hyps, Lang.HOST) == 0.0

    def test_en_recall_one_under_full_coverage(self, tiny_lexicon, rng):
        from csgen.metrics import csp_metrics

        hosts = [host_sent("輸出", "輸入"), host_sent("介紹", "訊號")]
        ref_masks = [(True, False), (False, True)]
        en = [apply_baseline(BaselineStrategy("en"), x, tiny_lexicon, rng=rng) for x in hosts]
        _, recall, _ = csp_metrics(ref_masks, [r.mask for r in en])
        assert recall == 1.0
