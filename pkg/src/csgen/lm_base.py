"""Shared perplexity report for the two language models.

Convention used everywhere: natural-log likelihoods and
PPL = exp(-LL / count). The scored unit count includes one end-of-sentence
marker per sentence and never includes start markers.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp


@dataclass(frozen=True)
class PerplexityReport:
    log_likelihood: float
    count: int
    ppl: float
    oov_count: int

    CSV_HEADER = "log_likelihood,count,ppl,oov_count"

    def csv_row(self) -> str:
        return f"{self.log_likelihood:.6f},{self.count},{self.ppl:.6f},{self.oov_count}"

    @classmethod
    def from_ll(cls, log_likelihood: float, count: int, oov_count: int) -> "PerplexityReport":
        if count <= 0:
            raise ValueError("perplexity needs at least one scored unit")
        return cls(log_likelihood, count, exp(-log_likelihood / count), oov_count)
