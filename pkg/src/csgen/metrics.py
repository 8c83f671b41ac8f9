"""Switch-point prediction metrics, BLEU-1, and word error rates.

WER is total token edit distance over total reference words, so values
above 1 are possible. Restricted WER applies the same computation to the
subsequence of tokens in one language, normalized by the reference token
count of that language.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import exp
from typing import Sequence

from .corpus import Lang, Sentence
from .kernels import levenshtein_tokens


class MetricError(Exception):
    pass


@dataclass(frozen=True)
class MetricReport:
    precision: float
    recall: float
    f_measure: float
    bleu1: float
    wer_total: float
    wer_guest: float | None
    wer_host: float | None

    CSV_HEADER = "precision,recall,f_measure,bleu1,wer,wer_guest,wer_host"

    def csv_row(self) -> str:
        def fmt(v):
            return "undefined" if v is None else f"{v:.6f}"

        return ",".join(
            fmt(v)
            for v in (
                self.precision,
                self.recall,
                self.f_measure,
                self.bleu1,
                self.wer_total,
                self.wer_guest,
                self.wer_host,
            )
        )


def csp_metrics(
    ref_masks: Sequence[Sequence[bool]], hyp_masks: Sequence[Sequence[bool]]
) -> tuple[float, float, float]:
    """Micro-averaged precision/recall/F over all mask positions.

    Zero-denominator conventions: precision 0 with no predicted positives,
    recall 0 with no reference positives, F 0 when P + R = 0.
    """
    if len(ref_masks) != len(hyp_masks):
        raise MetricError(
            f"{len(ref_masks)} references vs {len(hyp_masks)} hypotheses"
        )
    tp = pred = pos = 0
    for i, (ref, hyp) in enumerate(zip(ref_masks, hyp_masks)):
        if len(ref) != len(hyp):
            raise MetricError(f"mask length mismatch at sentence {i}")
        for r, h in zip(ref, hyp):
            if h:
                pred += 1
            if r:
                pos += 1
            if r and h:
                tp += 1
    precision = tp / pred if pred else 0.0
    recall = tp / pos if pos else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f


def _clipped_unigram_hits(ref: Sequence[str], hyp: Sequence[str]) -> int:
    ref_counts = Counter(ref)
    hits = 0
    for tok, count in Counter(hyp).items():
        hits += min(count, ref_counts.get(tok, 0))
    return hits


def _bp(ref_len: int, hyp_len: int) -> float:
    return exp(min(0.0, 1.0 - ref_len / hyp_len))


def bleu1(reference: Sentence, hypothesis: Sentence) -> float:
    """Clipped unigram precision times brevity penalty."""
    ref = reference.surfaces()
    hyp = hypothesis.surfaces()
    hits = _clipped_unigram_hits(ref, hyp)
    if hits == 0:
        return 0.0
    return (hits / len(hyp)) * _bp(len(ref), len(hyp))


def corpus_bleu1(
    references: Sequence[Sentence], hypotheses: Sequence[Sentence]
) -> float:
    """Corpus-level BLEU-1: clip counts and lengths are pooled first."""
    if len(references) != len(hypotheses):
        raise MetricError("reference/hypothesis count mismatch")
    hits = 0
    hyp_len = 0
    ref_len = 0
    for ref, hyp in zip(references, hypotheses):
        hits += _clipped_unigram_hits(ref.surfaces(), hyp.surfaces())
        hyp_len += len(hyp)
        ref_len += len(ref)
    if hits == 0 or hyp_len == 0:
        return 0.0
    return (hits / hyp_len) * _bp(ref_len, hyp_len)


def wer(refs: Sequence[Sentence], hyps: Sequence[Sentence]) -> float:
    """Sum of per-pair token edit distances over total reference words."""
    if not refs:
        raise MetricError("empty reference list")
    if len(refs) != len(hyps):
        raise MetricError("reference/hypothesis count mismatch")
    dist = 0
    total = 0
    for ref, hyp in zip(refs, hyps):
        dist += levenshtein_tokens(ref.surfaces(), hyp.surfaces())
        total += len(ref)
    return dist / total


def restricted_wer(
    refs: Sequence[Sentence], hyps: Sequence[Sentence], lang: Lang
) -> float | None:
    """WER restricted to the reference's tokens in one language.

    Sentences are position-aligned (every generator here preserves token
    count), so the restriction selects the positions where the REFERENCE
    token carries the given language tag, takes the tokens at those
    positions from both sides, and computes token Levenshtein between the
    two extracted sequences, normalized by the reference token count of
    that language. A copy-the-input hypothesis therefore scores 0 on the
    host side and 100% on the guest side.

    Returns None (undefined-metric marker) when the references contain no
    token of that language.
    """
    if not refs:
        raise MetricError("empty reference list")
    if len(refs) != len(hyps):
        raise MetricError("reference/hypothesis count mismatch")
    dist = 0
    total = 0
    for i, (ref, hyp) in enumerate(zip(refs, hyps)):
        if len(ref) != len(hyp):
            raise MetricError(f"length mismatch at sentence {i}")
        positions = [k for k, t in enumerate(ref.tokens) if t.lang is lang]
        ref_sub = [ref.tokens[k].surface for k in positions]
        hyp_sub = [hyp.tokens[k].surface for k in positions]
        dist += levenshtein_tokens(ref_sub, hyp_sub)
        total += len(ref_sub)
    if total == 0:
        return None
    return dist / total


def metric_report(
    refs: Sequence[Sentence],
    ref_masks: Sequence[Sequence[bool]],
    hyps: Sequence[Sentence],
    hyp_masks: Sequence[Sequence[bool]],
) -> MetricReport:
    precision, recall, f = csp_metrics(ref_masks, hyp_masks)
    return MetricReport(
        precision=precision,
        recall=recall,
        f_measure=f,
        bleu1=corpus_bleu1(refs, hyps),
        wer_total=wer(refs, hyps),
        wer_guest=restricted_wer(refs, hyps, Lang.GUEST),
        wer_host=restricted_wer(refs, hyps, Lang.HOST),
    )
