"""
Corpus BLEU from clipped n-gram statistics.

Tokenization is a fixed rule set (TOKENIZER_VERSION): every character that
is neither a word character nor whitespace is split off, then the line is
split on whitespace. Scores are comparable only within one tokenizer version.
"""

import math
import re
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

from nltk.util import ngrams

from lib.errors import MetricError

TOKENIZER_VERSION = "punct-split-v1"
MAX_NGRAM = 4
SMOOTH_EPSILON = 0.1

Smoothing = Literal["none", "floor", "exp"]

_PUNCT_RE = re.compile(r"([^\w\s])")


def tokenize(line: str) -> list[str]:
    return _PUNCT_RE.sub(r" \1 ", line).split()


def extract_ngrams(tokens: Sequence[str], max_order: int = MAX_NGRAM) -> Counter[tuple[str, ...]]:
    counts: Counter[tuple[str, ...]] = Counter()
    for n in range(1, max_order + 1):
        counts.update(ngrams(tokens, n))
    return counts


@dataclass
class BleuStats:
    """Sufficient statistics of a corpus: per-order matches and totals, plus lengths."""

    max_order: int = MAX_NGRAM
    correct: list[int] = field(default_factory=list)
    total: list[int] = field(default_factory=list)
    sys_len: int = 0
    ref_len: int = 0

    def __post_init__(self) -> None:
        self.correct = self.correct or [0] * self.max_order
        self.total = self.total or [0] * self.max_order

    def add(self, hyp_tokens: Sequence[str], ref_tokens: Sequence[str]) -> None:
        self.sys_len += len(hyp_tokens)
        self.ref_len += len(ref_tokens)
        hyp_ngrams = extract_ngrams(hyp_tokens, self.max_order)
        ref_ngrams = extract_ngrams(ref_tokens, self.max_order)
        for gram, count in hyp_ngrams.items():
            n = len(gram)
            self.total[n - 1] += count
            self.correct[n - 1] += min(count, ref_ngrams.get(gram, 0))


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    sys_len: int
    ref_len: int
    smoothing: str
    tokenizer: str = TOKENIZER_VERSION

    def params(self) -> dict:
        return {"smoothing": self.smoothing, "max_ngram": len(self.precisions), "tokenizer": self.tokenizer}


def compute_bleu(stats: BleuStats, smoothing: Smoothing = "exp", epsilon: float = SMOOTH_EPSILON) -> BleuScore:
    """
    BLEU on 0-100 from sufficient statistics. Orders with no hypothesis n-grams
    are left out of the geometric mean. Zero matches are smoothed:
    exp (default) -> 1 / (2^k * total) for the k-th zero order,
    floor -> epsilon / total, none -> the score collapses to 0.
    """
    precisions: list[float] = []
    exp_factor = 1.0
    for correct, total in zip(stats.correct, stats.total):
        if total == 0:
            break
        if correct > 0:
            precisions.append(correct / total)
        elif smoothing == "floor":
            precisions.append(epsilon / total)
        elif smoothing == "exp":
            exp_factor *= 2
            precisions.append(1.0 / (exp_factor * total))
        else:
            precisions.append(0.0)

    if stats.sys_len == 0 and stats.ref_len == 0:
        return BleuScore(100.0, tuple(precisions), 1.0, 0, 0, smoothing)

    if stats.sys_len >= stats.ref_len:
        bp = 1.0
    else:
        bp = math.exp(1 - stats.ref_len / stats.sys_len) if stats.sys_len > 0 else 0.0

    if not precisions or min(precisions) == 0.0:
        score = 0.0
    else:
        score = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / len(precisions))
    return BleuScore(min(100.0, score), tuple(precisions), bp, stats.sys_len, stats.ref_len, smoothing)


def check_corpus(hyps: Sequence[str], refs: Sequence[str]) -> None:
    if len(hyps) != len(refs):
        raise MetricError(f"{len(hyps)} hypotheses for {len(refs)} references")
    if not hyps:
        raise MetricError("empty corpus")


def corpus_bleu(
    hyps: Sequence[str],
    refs: Sequence[str],
    max_ngram: int = MAX_NGRAM,
    smoothing: Smoothing = "exp",
    epsilon: float = SMOOTH_EPSILON,
) -> BleuScore:
    check_corpus(hyps, refs)
    if smoothing not in ("none", "floor", "exp"):
        raise MetricError(f"unknown BLEU smoothing '{smoothing}'")
    if max_ngram < 1:
        raise MetricError("max_ngram must be >= 1")
    stats = BleuStats(max_order=max_ngram)
    for hyp, ref in zip(hyps, refs):
        stats.add(tokenize(hyp), tokenize(ref))
    return compute_bleu(stats, smoothing, epsilon)


def score_bleu(hyps: Sequence[str], refs: Sequence[str], **params) -> float:
    return corpus_bleu(hyps, refs, **params).score
