"""Byte-pair merge learning within word units, and greedy merge application."""

import logging
from collections import Counter

from subword.pretokenize import alphabet_runs
from subword.vocabulary import is_storable

logger = logging.getLogger("BPE")

Pair = tuple[str, str]


def merge_pair(symbols: tuple[str, ...] | list[str], pair: Pair) -> tuple[str, ...]:
    """Merges non-overlapping occurrences of `pair`, left to right."""
    out: list[str] = []
    i, n = 0, len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(pair[0] + pair[1])
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def count_pairs(words: dict[tuple[str, ...], int]) -> Counter[Pair]:
    pairs: Counter[Pair] = Counter()
    for symbols, count in words.items():
        for pair in zip(symbols, symbols[1:]):
            pairs[pair] += count
    return pairs


def learn_merges(
    unit_counts: Counter[str],
    alphabet: set[str],
    budget: int,
    min_pair_count: int = 2,
) -> list[Pair]:
    """
    Greedy merge learning. Each step merges the most frequent adjacent pair,
    ties broken by lexicographic pair order. Stops when `budget` new tokens
    have been added or no pair reaches `min_pair_count`.
    """
    words: Counter[tuple[str, ...]] = Counter()
    for unit, count in unit_counts.items():
        for run in alphabet_runs(unit, alphabet):
            if len(run) > 1:
                words[tuple(run)] += count

    merges: list[Pair] = []
    known = set(alphabet)
    blocked: set[Pair] = set()
    while budget > 0:
        pairs = count_pairs(words)
        candidates = [(-c, p) for p, c in pairs.items() if c >= min_pair_count and p not in blocked]
        if not candidates:
            break
        _, best = min(candidates)
        merged = best[0] + best[1]
        if not is_storable(merged):
            blocked.add(best)
            continue
        merges.append(best)
        if merged not in known:
            known.add(merged)
            budget -= 1
        next_words: Counter[tuple[str, ...]] = Counter()
        for symbols, count in words.items():
            next_words[merge_pair(symbols, best)] += count
        words = next_words

    logger.debug(f"Learned {len(merges)} merges")
    return merges


def apply_merges(symbols: list[str], ranks: dict[Pair, int]) -> list[str]:
    """Repeatedly merges the lowest-ranked adjacent pair until none is ranked."""
    current = tuple(symbols)
    while len(current) > 1:
        ranked = [(ranks[p], p) for p in zip(current, current[1:]) if p in ranks]
        if not ranked:
            break
        _, best = min(ranked)
        current = merge_pair(current, best)
    return list(current)
