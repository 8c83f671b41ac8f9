import numpy as np
import pytest

from csgen.corpus import Lang, corpus_stats, cs_rate
from csgen.lexicon import coverage
from csgen.synth import (
    PlantedRule,
    SynthError,
    collect_cs_utterances,
    default_rule,
    load_refs,
    save_refs,
    synth_corpus,
)


class TestRule:
    def test_every_word_has_lexicon_entry(self):
        rule = default_rule()
        lex = rule.lexicon()
        assert all(w in lex for w in rule.words)

    def test_p_ordering_enforced(self):
        rule = default_rule()
        with pytest.raises(SynthError):
            PlantedRule(
                words=rule.words,
                pos=rule.pos,
                translations=rule.translations,
                triggers=rule.triggers,
                noun_tags=rule.noun_tags,
                p_high=0.1,
                p_low=0.5,
                train_weights=rule.train_weights,
                test_weights=rule.test_weights,
            )

    def test_rule_positions(self):
        rule = default_rule()
        trigger = next(iter(rule.triggers))
        noun = next(w for w in rule.words if rule.pos[w] == "nn")
        other = next(w for w in rule.words if rule.pos[w] == "v")
        flags = rule.rule_positions((trigger, noun, other, noun))
        assert flags == [False, True, False, False]

    def test_pos_lexicon_valid(self):
        rule = default_rule()
        pos_lex = rule.pos_lexicon()
        assert pos_lex.is_noun("nn")


class TestSynthCorpus:
    def test_deterministic(self):
        rule = default_rule()
        a = synth_corpus(rule, 50, seed=7)
        b = synth_corpus(rule, 50, seed=7)
        assert [s.surfaces() for s in a.host] == [s.surfaces() for s in b.host]
        assert a.masks == b.masks

    def test_host_is_monolingual_and_covered(self):
        rule = default_rule()
        sample = synth_corpus(rule, 30, seed=1)
        assert all(s.is_host_monolingual() for s in sample.host)
        assert coverage(rule.lexicon(), sample.host) == 1.0

    def test_degenerate_probs_give_rule_indicator(self):
        rule = default_rule(p_high=1.0 - 1e-12, p_low=0.0)
        sample = synth_corpus(rule, 100, seed=3)
        for host, mask in zip(sample.host, sample.masks):
            assert list(mask) == rule.rule_positions(host.surfaces())

    def test_low_probability_calibration(self):
        rule = default_rule(p_low=0.05)
        sample = synth_corpus(rule, 1500, seed=5)
        switched = 0
        total = 0
        for host, mask in zip(sample.host, sample.masks):
            flags = rule.rule_positions(host.surfaces())
            for bit, flag in zip(mask, flags):
                if not flag:
                    total += 1
                    switched += bit
        assert total >= 10_000
        assert abs(switched / total - 0.05) < 0.01

    def test_cs_sentences_align_with_masks(self):
        rule = default_rule()
        sample = synth_corpus(rule, 30, seed=9)
        for host, cs, mask in zip(sample.host, sample.cs, sample.masks):
            assert len(cs) == len(host)
            for tok, bit in zip(cs, mask):
                assert (tok.lang is Lang.GUEST) == bit

    def test_tuned_cs_rate_near_twenty_percent(self):
        # reproduces the 20% cs-rate figure on a tuned synthetic corpus
        rule = default_rule(p_high=0.9, p_low=0.12, n_common_nouns=14)
        _, cs, _ = collect_cs_utterances(rule, 1500, seed=11)
        from csgen.corpus import Corpus

        rate = cs_rate(Corpus(tuple(cs)))
        assert abs(rate - 0.20) < 0.04


class TestCollect:
    def test_every_sentence_code_switched(self):
        rule = default_rule()
        hosts, cs, masks = collect_cs_utterances(rule, 200, seed=2)
        assert len(cs) == 200
        assert all(any(m) for m in masks)
        assert all(s.has_guest() for s in cs)

    def test_pairs_aligned(self):
        rule = default_rule()
        hosts, cs, masks = collect_cs_utterances(rule, 50, seed=4)
        for host, sent, mask in zip(hosts, cs, masks):
            assert len(host) == len(sent) == len(mask)


class TestRefsFile:
    def test_round_trip(self, tmp_path):
        rule = default_rule()
        sample = synth_corpus(rule, 20, seed=6)
        path = tmp_path / "refs.tsv"
        save_refs(path, list(sample.host), list(sample.masks))
        hosts, masks = load_refs(path)
        assert [s.surfaces() for s in hosts] == [s.surfaces() for s in sample.host]
        assert tuple(masks) == sample.masks

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "refs.tsv"
        path.write_text("一一 二二 no-tab-here\n", encoding="utf-8")
        with pytest.raises(SynthError, match="line 1"):
            load_refs(path)
