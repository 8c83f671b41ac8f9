"""Bilingual corpus model: parsing, cleaning, statistics, vocabulary.

File format: UTF-8, one utterance per line, tokens separated by spaces.
Lines starting with ``#`` are comments. Token language is either inferred
from the script of the surface form (CJK -> host, Latin -> guest) or given
explicitly with a ``|h`` / ``|g`` suffix, depending on the format config.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence


class CorpusError(Exception):
    """Base class for corpus-level failures."""


class ParseError(CorpusError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnclassifiableTokenError(CorpusError):
    """Surface form contains no letter in either configured script range."""


class EmptyCorpusError(CorpusError):
    """Parsing produced zero usable sentences."""


class UndefinedRateError(CorpusError):
    """CS-rate requested on a corpus without any code-switched utterance."""


class Lang(Enum):
    HOST = "h"
    GUEST = "g"


@dataclass(frozen=True)
class Token:
    surface: str
    lang: Lang
    pos: str | None = None

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"bad token surface: {self.surface!r}")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    source_line: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise ValueError("a sentence must contain at least one token")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    def is_host_monolingual(self) -> bool:
        return all(t.lang is Lang.HOST for t in self.tokens)

    def has_guest(self) -> bool:
        return any(t.lang is Lang.GUEST for t in self.tokens)


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    role: str = "unspecified"

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)


# Default script ranges: CJK unified ideographs (+ ext A) for the host
# language, Latin letters for the guest language. Override for other pairs.
@dataclass(frozen=True)
class ScriptConfig:
    host_ranges: tuple[tuple[int, int], ...] = ((0x4E00, 0x9FFF), (0x3400, 0x4DBF))
    guest_ranges: tuple[tuple[int, int], ...] = (
        (0x41, 0x5A),
        (0x61, 0x7A),
        (0xC0, 0x24F),
    )


DEFAULT_SCRIPT = ScriptConfig()


def _in_ranges(cp: int, ranges: Sequence[tuple[int, int]]) -> bool:
    return any(lo <= cp <= hi for lo, hi in ranges)


def infer_language(surface: str, script: ScriptConfig = DEFAULT_SCRIPT) -> Lang:
    """Classify a surface form by the first letter-category character.

    Hyphens, apostrophes and other non-letters never affect the decision.
    Raises UnclassifiableTokenError when no character falls in either range.
    """
    if not surface:
        raise ValueError("empty surface")
    for ch in surface:
        if not unicodedata.category(ch).startswith("L"):
            continue
        cp = ord(ch)
        if _in_ranges(cp, script.host_ranges):
            return Lang.HOST
        if _in_ranges(cp, script.guest_ranges):
            return Lang.GUEST
    raise UnclassifiableTokenError(surface)


@dataclass(frozen=True)
class FormatConfig:
    """How token language is determined when parsing.

    tagged=True expects every token to carry a ``|h``/``|g`` suffix;
    tagged=False infers language from the script. ``on_unclassifiable``
    is "error" or "skip" (drop the token) for script mode.
    """

    tagged: bool = False
    script: ScriptConfig = DEFAULT_SCRIPT
    on_unclassifiable: str = "error"


def _parse_token(raw: str, fmt: FormatConfig, line_no: int) -> Token | None:
    if fmt.tagged:
        if len(raw) < 3 or raw[-2] != "|" or raw[-1] not in ("h", "g"):
            raise ParseError(f"malformed language tag suffix on token {raw!r}", line_no)
        surface = raw[:-2]
        if not surface:
            raise ParseError(f"empty surface before tag in {raw!r}", line_no)
        return Token(surface, Lang.HOST if raw[-1] == "h" else Lang.GUEST)
    try:
        return Token(raw, infer_language(raw, fmt.script))
    except UnclassifiableTokenError:
        if fmt.on_unclassifiable == "skip":
            return None
        raise ParseError(f"unclassifiable token {raw!r}", line_no)


def parse_corpus(
    lines: Iterable[str],
    fmt: FormatConfig = FormatConfig(),
    role: str = "unspecified",
) -> Corpus:
    """Parse line-oriented text into a Corpus.

    Empty lines and ``#`` comments are skipped. Every error carries the
    1-based source line number.
    """
    sentences = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = []
        for raw in stripped.split():
            tok = _parse_token(raw, fmt, line_no)
            if tok is not None:
                tokens.append(tok)
        if tokens:
            sentences.append(Sentence(tuple(tokens), source_line=line_no))
    if not sentences:
        raise EmptyCorpusError("no usable sentences in input")
    return Corpus(tuple(sentences), role=role)


def serialize_corpus(corpus: Corpus, tagged: bool = True) -> str:
    """Render a corpus one utterance per line.

    Tagged output (the default) round-trips exactly through parse_corpus;
    plain output relies on script inference when read back.
    """
    out = []
    for sent in corpus:
        if tagged:
            out.append(" ".join(f"{t.surface}|{t.lang.value}" for t in sent))
        else:
            out.append(" ".join(t.surface for t in sent))
    return "\n".join(out) + "\n"


def load_corpus(path, fmt: FormatConfig = FormatConfig(), role: str = "unspecified") -> Corpus:
    with open(path, encoding="utf-8") as f:
        return parse_corpus(f, fmt, role)


def save_corpus(path, corpus: Corpus, tagged: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_corpus(corpus, tagged))


def cs_rate(corpus: Corpus) -> float:
    """Guest words per total words, over code-switched utterances only.

    An utterance counts as code-switched iff it contains at least one guest
    token; purely host utterances enter neither numerator nor denominator.
    """
    guest = 0
    total = 0
    for sent in corpus:
        if not sent.has_guest():
            continue
        total += len(sent)
        guest += sum(1 for t in sent if t.lang is Lang.GUEST)
    if total == 0:
        raise UndefinedRateError("corpus has no code-switched utterances")
    return guest / total


@dataclass(frozen=True)
class StatsReport:
    total_utterances: int
    host_utterances: int
    cs_utterances: int
    total_words: int
    host_words: int
    guest_words: int
    cs_rate: float | None

    ROW_NAMES = (
        "total_utterances",
        "host_utterances",
        "cs_utterances",
        "total_words",
        "host_words",
        "guest_words",
        "cs_rate",
    )

    def as_rows(self) -> list[tuple[str, str]]:
        rows = []
        for name in self.ROW_NAMES:
            value = getattr(self, name)
            if value is None:
                rows.append((name, "undefined"))
            elif isinstance(value, float):
                rows.append((name, f"{value:.6f}"))
            else:
                rows.append((name, str(value)))
        return rows


def corpus_stats(corpus: Corpus) -> StatsReport:
    total_utt = len(corpus)
    cs_utt = sum(1 for s in corpus if s.has_guest())
    total_words = sum(len(s) for s in corpus)
    guest_words = sum(1 for s in corpus for t in s if t.lang is Lang.GUEST)
    try:
        rate = cs_rate(corpus)
    except UndefinedRateError:
        rate = None
    return StatsReport(
        total_utterances=total_utt,
        host_utterances=total_utt - cs_utt,
        cs_utterances=cs_utt,
        total_words=total_words,
        host_words=total_words - guest_words,
        guest_words=guest_words,
        cs_rate=rate,
    )


@dataclass(frozen=True)
class CleaningConfig:
    """Removable token classes (regexes matched against full surfaces) and
    the removed-token fraction above which the whole utterance is dropped."""

    drop_patterns: tuple[str, ...] = ()
    drop_threshold: float = 0.3


@dataclass(frozen=True)
class CleanReport:
    removed_tokens: int
    dropped_utterances: int


def clean(corpus: Corpus, cfg: CleaningConfig) -> tuple[Corpus, CleanReport]:
    """Remove matching tokens; drop utterances where removals exceed the
    configured fraction of tokens (or nothing survives)."""
    if not cfg.drop_patterns:
        return corpus, CleanReport(0, 0)
    patterns = [re.compile(p) for p in cfg.drop_patterns]
    kept_sentences = []
    removed = 0
    dropped = 0
    for sent in corpus:
        keep = [t for t in sent if not any(p.fullmatch(t.surface) for p in patterns)]
        n_removed = len(sent) - len(keep)
        removed += n_removed
        if not keep or n_removed / len(sent) > cfg.drop_threshold:
            dropped += 1
            continue
        if n_removed == 0:
            kept_sentences.append(sent)
        else:
            kept_sentences.append(Sentence(tuple(keep), source_line=sent.source_line))
    return Corpus(tuple(kept_sentences), role=corpus.role), CleanReport(removed, dropped)


UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
_RESERVED = (UNK, BOS, EOS)


class Vocabulary:
    """Dense id<->surface bijection with reserved unknown/boundary markers.

    Reserved ids are 0 (<unk>), 1 (<s>), 2 (</s>). Lookups of unseen
    surfaces return the unknown id.
    """

    def __init__(self, surfaces: Sequence[str]):
        self._surfaces = list(_RESERVED) + [s for s in surfaces if s not in _RESERVED]
        self._ids = {s: i for i, s in enumerate(self._surfaces)}
        if len(self._ids) != len(self._surfaces):
            raise ValueError("duplicate surfaces in vocabulary")

    def __len__(self) -> int:
        return len(self._surfaces)

    def __contains__(self, surface: str) -> bool:
        return surface in self._ids

    @property
    def unk_id(self) -> int:
        return 0

    @property
    def bos_id(self) -> int:
        return 1

    @property
    def eos_id(self) -> int:
        return 2

    def id(self, surface: str) -> int:
        return self._ids.get(surface, 0)

    def surface(self, idx: int) -> str:
        return self._surfaces[idx]

    def ids(self, surfaces: Iterable[str]) -> list[int]:
        return [self.id(s) for s in surfaces]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for i, s in enumerate(self._surfaces):
                f.write(f"{i}\t{s}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        surfaces = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                _, s = line.rstrip("\n").split("\t", 1)
                surfaces.append(s)
        if tuple(surfaces[:3]) != _RESERVED:
            raise CorpusError("vocabulary file missing reserved markers")
        return cls(surfaces[3:])


def build_vocab(
    corpus: Corpus, max_size: int, extra_surfaces: Iterable[str] = ()
) -> Vocabulary:
    """Keep the most frequent surfaces, ties broken lexicographically.

    max_size includes the three reserved ids. Host and guest surfaces share
    one table. ``extra_surfaces`` (e.g. lexicon translations) are counted
    once each so generated tokens stay in-vocabulary.
    """
    if max_size < 3:
        raise ValueError("max_size must leave room for the reserved ids")
    counts = Counter(t.surface for s in corpus for t in s)
    for surface in extra_surfaces:
        counts[surface] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = [surface for surface, _ in ranked[: max_size - len(_RESERVED)]]
    return Vocabulary(keep)
