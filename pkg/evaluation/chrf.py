"""
Corpus chrF: character n-gram precision and recall, averaged over the orders
both sides have n-grams for, combined into an F-beta score. Whitespace is
removed before character n-grams are extracted. Word n-grams (chrF++ style)
are off unless word_ngram > 0.
"""

import re
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from nltk.util import ngrams

from evaluation.bleu import check_corpus
from lib.errors import MetricError

CHAR_ORDER = 6
WORD_ORDER = 0
BETA = 2

_WS_RE = re.compile(r"\s+")


def delete_whitespace(text: str) -> str:
    return _WS_RE.sub("", text)


def _count(items: Sequence[str], n: int) -> Counter:
    return Counter(ngrams(items, n))


def _side_stats(hyp_items: Sequence[str], ref_items: Sequence[str], order: int) -> list[tuple[int, int, int]]:
    stats = []
    for n in range(1, order + 1):
        hyp_ngrams, ref_ngrams = _count(hyp_items, n), _count(ref_items, n)
        stats.append((sum(hyp_ngrams.values()), sum(ref_ngrams.values()), sum((hyp_ngrams & ref_ngrams).values())))
    return stats


@dataclass(frozen=True)
class ChrfScore:
    score: float
    precision: float
    recall: float
    effective_order: int
    char_order: int
    word_order: int
    beta: float

    def params(self) -> dict:
        return {"char_ngram": self.char_order, "word_ngram": self.word_order, "beta": self.beta}


def _sum_stats(per_line: Iterable[list[tuple[int, int, int]]], order: int) -> list[list[int]]:
    totals = [[0, 0, 0] for _ in range(order)]
    for stats in per_line:
        for i, triple in enumerate(stats):
            for j in range(3):
                totals[i][j] += triple[j]
    return totals


def corpus_chrf(
    hyps: Sequence[str],
    refs: Sequence[str],
    char_ngram: int = CHAR_ORDER,
    word_ngram: int = WORD_ORDER,
    beta: float = BETA,
) -> ChrfScore:
    check_corpus(hyps, refs)
    if char_ngram < 1 or word_ngram < 0 or beta <= 0:
        raise MetricError("chrF needs char_ngram >= 1, word_ngram >= 0 and beta > 0")

    char_totals = _sum_stats(
        (_side_stats(list(delete_whitespace(h)), list(delete_whitespace(r)), char_ngram) for h, r in zip(hyps, refs)),
        char_ngram,
    )
    word_totals = _sum_stats((_side_stats(h.split(), r.split(), word_ngram) for h, r in zip(hyps, refs)), word_ngram)

    precision = recall = 0.0
    effective = 0
    for n_hyp, n_ref, n_match in char_totals + word_totals:
        if n_hyp > 0 and n_ref > 0:
            precision += n_match / n_hyp
            recall += n_match / n_ref
            effective += 1

    if effective == 0:
        # Nothing to compare on either side: both empty is a perfect match.
        both_empty = all(t[0] == 0 and t[1] == 0 for t in char_totals)
        score = 100.0 if both_empty else 0.0
        return ChrfScore(score, 0.0, 0.0, 0, char_ngram, word_ngram, beta)

    precision /= effective
    recall /= effective
    if precision + recall == 0:
        f_score = 0.0
    else:
        beta2 = beta**2
        f_score = (1 + beta2) * precision * recall / (beta2 * precision + recall)
    return ChrfScore(min(100.0, 100.0 * f_score), precision, recall, effective, char_ngram, word_ngram, beta)


def score_chrf(hyps: Sequence[str], refs: Sequence[str], **params) -> float:
    return corpus_chrf(hyps, refs, **params).score
