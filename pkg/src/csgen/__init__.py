"""Toolkit for generating and evaluating intra-sentential code-switched text.

Pipeline pieces: bilingual corpus handling, a lookup-table translator, an
adversarially trained switch-point generator with rule-based baselines,
n-gram and character-LSTM language models, and the metric suite tying them
together. Hot numeric kernels are numba-compiled with a pure-numpy
fallback (see csgen.kernels).
"""

__version__ = "0.1.0"
