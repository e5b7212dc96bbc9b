"""
Unigram language-model segmentation: Viterbi decoding, forward-backward EM
and loss-based pruning of a seed vocabulary of frequent substrings.
"""

import logging
import math
from collections import Counter, defaultdict
from collections.abc import Callable

import numpy as np

from lib.settings import SubwordOptions
from subword.pretokenize import alphabet_runs
from subword.vocabulary import is_storable

logger = logging.getLogger("Unigram")

# Expected-count floor keeping single-symbol pieces at a finite log-probability.
_MIN_COUNT = 1e-3


def viterbi(
    text: str,
    pieces: dict[str, float],
    max_len: int,
    fallback: Callable[[str], float] | None = None,
) -> tuple[list[str], float]:
    """
    Max log-probability segmentation of `text`. Symbols with no piece use
    `fallback(symbol)` as their score; without a fallback they are unreachable.
    """
    n = len(text)
    if n == 0:
        return [], 0.0
    best = [-math.inf] * (n + 1)
    back = [0] * (n + 1)
    best[0] = 0.0
    for i in range(1, n + 1):
        for j in range(max(0, i - max_len), i):
            if best[j] == -math.inf:
                continue
            logprob = pieces.get(text[j:i])
            if logprob is None:
                if i - j != 1 or fallback is None:
                    continue
                logprob = fallback(text[j:i])
            score = best[j] + logprob
            if score > best[i]:
                best[i] = score
                back[i] = j
    if best[n] == -math.inf:
        return [], -math.inf

    segments = []
    i = n
    while i > 0:
        j = back[i]
        segments.append(text[j:i])
        i = j
    segments.reverse()
    return segments, best[n]


def _forward_backward(unit: str, pieces: dict[str, float], max_len: int, freq: int, counts: dict[str, float]) -> float:
    n = len(unit)
    alpha = np.full(n + 1, -np.inf)
    alpha[0] = 0.0
    for i in range(1, n + 1):
        for j in range(max(0, i - max_len), i):
            logprob = pieces.get(unit[j:i])
            if logprob is not None:
                alpha[i] = np.logaddexp(alpha[i], alpha[j] + logprob)
    beta = np.full(n + 1, -np.inf)
    beta[n] = 0.0
    for j in range(n - 1, -1, -1):
        for i in range(j + 1, min(n, j + max_len) + 1):
            logprob = pieces.get(unit[j:i])
            if logprob is not None:
                beta[j] = np.logaddexp(beta[j], beta[i] + logprob)

    z = alpha[n]
    for j in range(n):
        for i in range(j + 1, min(n, j + max_len) + 1):
            piece = unit[j:i]
            logprob = pieces.get(piece)
            if logprob is not None:
                counts[piece] += freq * math.exp(alpha[j] + logprob + beta[i] - z)
    return float(z) * freq


def em_step(units: Counter[str], pieces: dict[str, float], required: set[str]) -> dict[str, float]:
    """One expectation-maximization round. Unused multi-symbol pieces are dropped."""
    max_len = max(len(p) for p in pieces)
    counts: dict[str, float] = defaultdict(float)
    loglik = 0.0
    for unit, freq in units.items():
        loglik += _forward_backward(unit, pieces, max_len, freq, counts)

    kept = {}
    for piece in pieces:
        count = counts.get(piece, 0.0)
        if piece in required:
            kept[piece] = max(count, _MIN_COUNT)
        elif count > 0.0:
            kept[piece] = count
    total = sum(kept.values())
    logger.debug(f"EM: {len(kept)} pieces, log-likelihood {loglik:.2f}")
    return {piece: math.log(count / total) for piece, count in kept.items()}


def pruning_losses(units: Counter[str], pieces: dict[str, float], required: set[str]) -> dict[str, float]:
    """
    Likelihood lost when a piece is removed: its Viterbi usage times the gap
    between its own log-prob and the best segmentation without it.
    """
    max_len = max(len(p) for p in pieces)
    usage: Counter[str] = Counter()
    for unit, freq in units.items():
        segments, _ = viterbi(unit, pieces, max_len)
        for segment in segments:
            usage[segment] += freq

    losses = {}
    for piece, logprob in pieces.items():
        if piece in required:
            continue
        if usage[piece] == 0:
            losses[piece] = 0.0
            continue
        others = {p: lp for p, lp in pieces.items() if p != piece}
        _, alternative = viterbi(piece, others, max_len)
        losses[piece] = usage[piece] * (logprob - alternative)
    return losses


def seed_pieces(units: Counter[str], alphabet: set[str], options: SubwordOptions) -> dict[str, int]:
    """Frequent substrings of length >= 2 plus every alphabet symbol, with their frequencies."""
    substrings: Counter[str] = Counter()
    symbols: Counter[str] = Counter()
    for unit, freq in units.items():
        for run in alphabet_runs(unit, alphabet):
            for ch in run:
                symbols[ch] += freq
            for start in range(len(run)):
                for end in range(start + 2, min(len(run), start + options.unigram_max_piece_len) + 1):
                    substrings[run[start:end]] += freq

    frequent = [
        (piece, count) for piece, count in substrings.items()
        if count >= options.unigram_seed_min_freq and is_storable(piece)
    ]
    frequent.sort(key=lambda pc: (-pc[1], pc[0]))
    seed = dict(frequent[:options.unigram_seed_max_pieces])
    for ch in alphabet:
        seed[ch] = max(symbols.get(ch, 0), 1)
    return seed


def train_unigram(
    units: Counter[str],
    alphabet: set[str],
    target: int,
    options: SubwordOptions,
) -> dict[str, float]:
    """
    Returns piece -> log-probability with at most `target` pieces. Alphabet
    symbols are never pruned; the caller guarantees len(alphabet) <= target.
    """
    runs: Counter[str] = Counter()
    for unit, freq in units.items():
        for run in alphabet_runs(unit, alphabet):
            runs[run] += freq

    seed = seed_pieces(units, alphabet, options)
    total = sum(seed.values())
    pieces = {piece: math.log(count / total) for piece, count in seed.items()}
    required = set(alphabet)
    logger.info(f"Unigram seed: {len(pieces)} pieces, target {target}")

    while True:
        for _ in range(options.unigram_em_rounds):
            pieces = em_step(runs, pieces, required)
        if len(pieces) <= target:
            break
        prunable = len(pieces) - len(required)
        n_remove = min(len(pieces) - target, max(1, int(prunable * options.unigram_prune_fraction)))
        losses = pruning_losses(runs, pieces, required)
        for piece in sorted(losses, key=lambda p: (losses[p], p))[:n_remove]:
            del pieces[piece]
        logger.debug(f"Pruned {n_remove} pieces, {len(pieces)} left")
    return pieces
