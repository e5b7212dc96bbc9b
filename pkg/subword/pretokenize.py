"""
Whitespace pre-splitting shared by the subword trainers and encoders.

Text splits on single spaces, which keeps runs of spaces recoverable. The
last segment of every word gets the end-of-word marker; a literal marker
in the input separates segments and is reported as None.
"""

from collections import Counter
from collections.abc import Iterable, Iterator

from subword.vocabulary import WORD_MARKER


def split_words(text: str) -> list[str]:
    return text.split(" ") if text else []


def word_units(text: str) -> list[str | None]:
    """Units with the marker appended to each word's final segment; None marks a literal marker."""
    out: list[str | None] = []
    for word in split_words(text):
        segments = word.split(WORD_MARKER)
        last = len(segments) - 1
        for k, segment in enumerate(segments):
            if k:
                out.append(None)
            if k == last:
                segment += WORD_MARKER
            if segment:
                out.append(segment)
    return out


def count_units(lines: Iterable[str]) -> Counter[str]:
    counts: Counter[str] = Counter()
    for line in lines:
        counts.update(u for u in word_units(line) if u is not None)
    return counts


def count_symbols(unit_counts: Counter[str]) -> Counter[str]:
    chars: Counter[str] = Counter()
    for unit, count in unit_counts.items():
        for ch in unit:
            chars[ch] += count
    return chars


def alphabet_runs(unit: str, alphabet: set[str] | frozenset[str]) -> Iterator[str]:
    """Maximal substrings made only of alphabet symbols; other symbols act as barriers."""
    start = 0
    for i, ch in enumerate(unit):
        if ch not in alphabet:
            if i > start:
                yield unit[start:i]
            start = i + 1
    if start < len(unit):
        yield unit[start:]
