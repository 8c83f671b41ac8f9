import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csgen.corpus import (
    CleaningConfig,
    Corpus,
    EmptyCorpusError,
    FormatConfig,
    Lang,
    ParseError,
    Sentence,
    Token,
    UnclassifiableTokenError,
    UndefinedRateError,
    Vocabulary,
    build_vocab,
    clean,
    corpus_stats,
    cs_rate,
    infer_language,
    parse_corpus,
    serialize_corpus,
)
from conftest import guest, host, host_sent, sent


class TestInferLanguage:
    def test_cjk_is_host(self):
        assert infer_language("訊號") is Lang.HOST

    def test_latin_is_guest_hyphen_ignored(self):
        assert infer_language("depend-on") is Lang.GUEST

    def test_digits_unclassifiable(self):
        with pytest.raises(UnclassifiableTokenError):
            infer_language("123")

    def test_leading_punctuation_skipped(self):
        assert infer_language("'cause") is Lang.GUEST


class TestParse:
    def test_script_inference(self):
        corpus = parse_corpus(["我 要 introduce 這個"])
        langs = [t.lang for t in corpus.sentences[0]]
        assert langs == [Lang.HOST, Lang.HOST, Lang.GUEST, Lang.HOST]

    def test_explicit_tags(self):
        corpus = parse_corpus(["a|g b|h"], FormatConfig(tagged=True))
        langs = [t.lang for t in corpus.sentences[0]]
        assert langs == [Lang.GUEST, Lang.HOST]

    def test_blank_line_skipped(self):
        corpus = parse_corpus(["   ", "我"])
        assert len(corpus) == 1

    def test_comment_skipped(self):
        corpus = parse_corpus(["# header", "我"])
        assert len(corpus) == 1

    def test_malformed_tag_reports_line(self):
        with pytest.raises(ParseError) as exc:
            parse_corpus(["我|h", "我|x"], FormatConfig(tagged=True))
        assert exc.value.line == 2

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            parse_corpus(["  ", "# nothing"])

    def test_unclassifiable_skip_policy(self):
        corpus = parse_corpus(
            ["我 123 要"], FormatConfig(on_unclassifiable="skip")
        )
        assert corpus.sentences[0].surfaces() == ("我", "要")

    def test_unclassifiable_error_policy_reports_line(self):
        with pytest.raises(ParseError):
            parse_corpus(["我 123"])


class TestCsRate:
    def test_hand_count(self):
        corpus = Corpus((sent(host("一"), guest("a"), host("二")), host_sent("一", "二")))
        assert cs_rate(corpus) == pytest.approx(1 / 3)

    def test_all_guest_utterances(self):
        corpus = Corpus((sent(guest("a"), guest("b")),))
        assert cs_rate(corpus) == 1.0

    def test_undefined_without_cs_utterance(self):
        with pytest.raises(UndefinedRateError):
            cs_rate(Corpus((host_sent("一"),)))

    def test_host_only_utterance_does_not_change_rate(self):
        base = Corpus((sent(host("一"), guest("a")),))
        extended = Corpus(base.sentences + (host_sent("二", "三"),))
        assert cs_rate(base) == cs_rate(extended)


class TestStats:
    def test_hand_count(self):
        corpus = Corpus((sent(host("一"), guest("a"), host("二")),))
        report = corpus_stats(corpus)
        assert report.total_utterances == 1
        assert report.cs_utterances == 1
        assert report.total_words == 3
        assert report.host_words == 2
        assert report.guest_words == 1

    def test_monolingual(self):
        report = corpus_stats(Corpus((host_sent("一", "二"),)))
        assert report.cs_utterances == 0
        assert report.guest_words == 0
        assert report.cs_rate is None


# random corpora over a tiny bilingual vocabulary
_host_words = st.sampled_from(["一", "二", "三", "四"])
_guest_words = st.sampled_from(["a", "b", "c"])
_tokens = st.one_of(
    _host_words.map(lambda s: Token(s, Lang.HOST)),
    _guest_words.map(lambda s: Token(s, Lang.GUEST)),
)
_sentences = st.lists(_tokens, min_size=1, max_size=8).map(
    lambda ts: Sentence(tuple(ts))
)
_corpora = st.lists(_sentences, min_size=1, max_size=12).map(
    lambda ss: Corpus(tuple(ss))
)


@given(_corpora)
def test_stats_consistency(corpus):
    report = corpus_stats(corpus)
    assert report.host_words + report.guest_words == report.total_words
    assert report.cs_utterances <= report.total_utterances
    if report.cs_rate is not None:
        assert 0.0 <= report.cs_rate <= 1.0


@given(_corpora)
def test_parse_serialize_round_trip(corpus):
    text = serialize_corpus(corpus)
    parsed = parse_corpus(text.splitlines(), FormatConfig(tagged=True))
    assert [s.surfaces() for s in parsed] == [s.surfaces() for s in corpus]
    assert [[t.lang for t in s] for s in parsed] == [[t.lang for t in s] for s in corpus]


class TestClean:
    CFG = CleaningConfig(drop_patterns=(r"<[^>]*>",), drop_threshold=0.5)

    def test_marker_removed(self):
        corpus = Corpus((sent(host("一"), host("<noise>"), host("二")),))
        cleaned, report = clean(corpus, self.CFG)
        assert cleaned.sentences[0].surfaces() == ("一", "二")
        assert report.removed_tokens == 1

    def test_drop_threshold(self):
        noisy = sent(*(host("<n>"), host("<m>"), host("<k>"), host("一"), host("<j>")))
        cleaned, report = clean(Corpus((noisy, host_sent("一"))), self.CFG)
        assert len(cleaned) == 1
        assert report.dropped_utterances == 1

    def test_no_filters_is_identity(self):
        corpus = Corpus((host_sent("一", "二"),))
        cleaned, report = clean(corpus, CleaningConfig())
        assert cleaned is corpus
        assert report.removed_tokens == 0

    @given(_corpora)
    def test_idempotent(self, corpus):
        cfg = CleaningConfig(drop_patterns=("a",), drop_threshold=0.4)
        once, _ = clean(corpus, cfg)
        if len(once) == 0:
            return
        twice, report = clean(once, cfg)
        assert [s.surfaces() for s in twice] == [s.surfaces() for s in once]
        assert report.removed_tokens == 0 and report.dropped_utterances == 0


class TestVocabulary:
    def test_reserved_and_frequency(self):
        corpus = Corpus((host_sent("a", "a", "b"),))
        vocab = build_vocab(corpus, max_size=3 + 2)
        assert len(vocab) == 5
        assert vocab.id("a") != vocab.unk_id
        assert vocab.id("b") != vocab.unk_id

    def test_lexicographic_tie_break_at_cutoff(self):
        corpus = Corpus((host_sent("b", "a"),))
        vocab = build_vocab(corpus, max_size=4)  # room for exactly one word
        assert "a" in vocab
        assert "b" not in vocab

    def test_unknown_lookup(self):
        vocab = build_vocab(Corpus((host_sent("a"),)), max_size=4)
        assert vocab.id("zzz") == vocab.unk_id

    def test_ids_dense_bijection(self):
        vocab = build_vocab(Corpus((host_sent("a", "b", "c"),)), max_size=10)
        for i in range(len(vocab)):
            assert vocab.id(vocab.surface(i)) == i

    def test_round_trip_file(self, tmp_path):
        vocab = build_vocab(Corpus((host_sent("a", "b"),)), max_size=8)
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert [loaded.surface(i) for i in range(len(loaded))] == [
            vocab.surface(i) for i in range(len(vocab))
        ]

    def test_min_size_guard(self):
        with pytest.raises(ValueError):
            build_vocab(Corpus((host_sent("a"),)), max_size=2)
