"""Translation mapping table, POS lexicon, and switch-mask realization.

The translator is a plain lookup table (host surface -> guest words). A
multiword translation is realized as one hyphen-joined token so that masks,
token counts and WER tokenization stay aligned with the host sentence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, Lang, Sentence, Token

ENG_TAG = "eng"
DEFAULT_TAG = "x"
MAX_TAGS = 64


class LexiconError(Exception):
    pass


class RealizationError(LexiconError):
    """A switch bit was set on a token without a lexicon entry."""


@dataclass(frozen=True)
class TranslationLexicon:
    entries: Mapping[str, tuple[str, ...]]

    def __contains__(self, surface: str) -> bool:
        return surface in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def translation(self, surface: str) -> tuple[str, ...]:
        return self.entries[surface]

    def realized(self, surface: str) -> str:
        """The single-token (hyphen-joined) form of the translation."""
        return "-".join(self.entries[surface])

    def all_realized(self) -> list[str]:
        return ["-".join(words) for words in self.entries.values()]


def load_lexicon(lines: Iterable[str]) -> tuple[TranslationLexicon, int]:
    """Load tab-separated ``host<TAB>translation`` records.

    Later duplicate keys override earlier ones; the override count is
    returned as a warning count.
    """
    entries: dict[str, tuple[str, ...]] = {}
    warnings = 0
    for line_no, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n")
        if not stripped.strip() or stripped.startswith("#"):
            continue
        if "\t" not in stripped:
            raise LexiconError(f"line {line_no}: record without tab separator")
        host, translation = stripped.split("\t", 1)
        host = host.strip()
        words = tuple(translation.split())
        if not host or not words:
            raise LexiconError(f"line {line_no}: empty key or translation")
        if host in entries:
            warnings += 1
        entries[host] = words
    return TranslationLexicon(entries), warnings


def save_lexicon(path, lex: TranslationLexicon) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for host, words in lex.entries.items():
            f.write(f"{host}\t{' '.join(words)}\n")


@dataclass(frozen=True)
class PosLexicon:
    """Host surface -> POS tag over a closed inventory of at most 64 tags.

    Unknown host surfaces map to the reserved default tag; guest tokens are
    always tagged ``eng``.
    """

    tags: Mapping[str, str]
    inventory: tuple[str, ...]
    noun_tags: frozenset[str]

    def __post_init__(self):
        if len(self.inventory) > MAX_TAGS:
            raise LexiconError(f"tag inventory exceeds {MAX_TAGS} tags")
        required = {DEFAULT_TAG, ENG_TAG}
        missing = required - set(self.inventory)
        if missing:
            raise LexiconError(f"tag inventory missing reserved tags: {missing}")
        for surface, tag in self.tags.items():
            if tag not in self.inventory:
                raise LexiconError(f"{surface!r} tagged with unlisted tag {tag!r}")

    def tag_of(self, surface: str) -> str:
        return self.tags.get(surface, DEFAULT_TAG)

    def tag_id(self, tag: str) -> int:
        return self.inventory.index(tag)

    def is_noun(self, tag: str) -> bool:
        return tag in self.noun_tags


def load_tag_inventory(lines: Iterable[str]) -> tuple[tuple[str, ...], frozenset[str]]:
    """One tag per line; a ``noun:`` prefix marks members of the noun set."""
    inventory = []
    nouns = set()
    for line in lines:
        name = line.strip()
        if not name or name.startswith("#"):
            continue
        if name.startswith("noun:"):
            name = name[len("noun:") :]
            nouns.add(name)
        inventory.append(name)
    return tuple(inventory), frozenset(nouns)


def load_pos_lexicon(
    lines: Iterable[str],
    inventory: tuple[str, ...],
    noun_tags: frozenset[str],
) -> PosLexicon:
    """Load ``host<TAB>tag`` records against a fixed tag inventory."""
    tags: dict[str, str] = {}
    for line_no, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n")
        if not stripped.strip() or stripped.startswith("#"):
            continue
        if "\t" not in stripped:
            raise LexiconError(f"line {line_no}: record without tab separator")
        surface, tag = stripped.split("\t", 1)
        tags[surface.strip()] = tag.strip()
    return PosLexicon(tags, inventory, noun_tags)


def tag_pos(lex: PosLexicon, sentence: Sentence) -> Sentence:
    """Tag host tokens by table lookup (default tag when absent) and guest
    tokens as ``eng``. Idempotent."""
    tokens = []
    for tok in sentence:
        if tok.lang is Lang.GUEST:
            tag = ENG_TAG
        else:
            tag = lex.tag_of(tok.surface)
        tokens.append(Token(tok.surface, tok.lang, tag))
    return Sentence(tuple(tokens), source_line=sentence.source_line)


def switchable_positions(sentence: Sentence, lex: TranslationLexicon) -> list[bool]:
    """Positions where a switch is legal: host tokens with a lexicon entry."""
    return [t.lang is Lang.HOST and t.surface in lex for t in sentence]


def realize(
    x: Sentence, mask: Sequence[bool], lex: TranslationLexicon
) -> Sentence:
    """Apply a switch mask to a host sentence.

    Tokens with a false bit are copied unchanged; true bits are replaced by
    the hyphen-joined translation as a single guest token. Output length
    equals input length.
    """
    if len(mask) != len(x):
        raise RealizationError(
            f"mask length {len(mask)} != sentence length {len(x)}"
        )
    tokens = []
    for tok, bit in zip(x.tokens, mask):
        if not bit:
            tokens.append(tok)
            continue
        if tok.surface not in lex:
            raise RealizationError(f"no lexicon entry for switched token {tok.surface!r}")
        tokens.append(Token(lex.realized(tok.surface), Lang.GUEST, ENG_TAG))
    return Sentence(tuple(tokens), source_line=x.source_line)


def coverage(lex: TranslationLexicon, corpus: Corpus) -> float:
    """Fraction of host token occurrences with a lexicon entry."""
    host = 0
    covered = 0
    for sent in corpus:
        for tok in sent:
            if tok.lang is Lang.HOST:
                host += 1
                if tok.surface in lex:
                    covered += 1
    if host == 0:
        return 1.0
    return covered / host
