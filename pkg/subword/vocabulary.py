"""
Vocabulary: dense id <-> token map with the four special tokens pinned to ids 0-3.

File format (UTF-8): a "#specials" header line, then one `token<TAB>score`
per line in id order, specials first.
"""

import re
from collections.abc import Iterator, Sequence
from pathlib import Path

from lib.atomic_io import read_lines, write_lines
from lib.errors import TokenizerError

UNK, PAD, BOS, EOS = "<unk>", "<pad>", "<s>", "</s>"
SPECIAL_TOKENS = (UNK, PAD, BOS, EOS)
UNK_ID, PAD_ID, BOS_ID, EOS_ID = range(len(SPECIAL_TOKENS))

WORD_MARKER = "\u2581"
BYTE_TOKENS = tuple(f"<0x{b:02X}>" for b in range(256))

_BYTE_RE = re.compile(r"<0x([0-9A-F]{2})>")
# Line and field separators of the vocab file; such symbols go through fallback.
_UNSTORABLE = frozenset("\t\n\r\x0b\x0c\x1c\x1d\x1e\x85\u2028\u2029")
_HEADER = "#specials"


def byte_token(value: int) -> str:
    return BYTE_TOKENS[value]


def parse_byte_token(token: str) -> int | None:
    m = _BYTE_RE.fullmatch(token)
    return int(m.group(1), 16) if m else None


def byte_tokens_for(text: str) -> list[str]:
    return [BYTE_TOKENS[b] for b in text.encode("utf-8")]


def is_storable(token: str) -> bool:
    """A learned token may not collide with a special or byte token, nor hold a separator."""
    if not token or token in SPECIAL_TOKENS or _BYTE_RE.fullmatch(token):
        return False
    return not any(ch in _UNSTORABLE for ch in token)


class Vocabulary:
    """Immutable once built. `tokens` excludes the specials, which are always prepended."""

    def __init__(self, tokens: Sequence[str], max_size: int | None = None, scores: Sequence[float] | None = None):
        entries = list(SPECIAL_TOKENS) + list(tokens)
        if scores is not None and len(scores) != len(tokens):
            raise TokenizerError(f"{len(scores)} scores for {len(tokens)} tokens")
        ids: dict[str, int] = {}
        for idx, token in enumerate(entries):
            if token in ids:
                raise TokenizerError(f"duplicate vocabulary token {token!r}")
            ids[token] = idx
        if max_size is not None and len(entries) > max_size:
            raise TokenizerError(f"vocabulary has {len(entries)} entries, max_size is {max_size}")

        self._tokens = tuple(entries)
        self._ids = ids
        self.scores = (0.0,) * len(SPECIAL_TOKENS) + tuple(float(s) for s in (scores or [0.0] * len(tokens)))
        self.max_size = max_size if max_size is not None else len(entries)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._ids

    def __iter__(self) -> Iterator[str]:
        return iter(self._tokens)

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    def id_of(self, token: str) -> int | None:
        return self._ids.get(token)

    def token_of(self, idx: int) -> str:
        if not 0 <= idx < len(self._tokens):
            raise TokenizerError(f"token id {idx} is out of range [0, {len(self._tokens)})")
        return self._tokens[idx]

    def save(self, path: str | Path) -> Path:
        header = "\t".join([_HEADER, *(f"{t}={i}" for i, t in enumerate(SPECIAL_TOKENS)), f"max_size={self.max_size}"])
        body = [f"{token}\t{score!r}" for token, score in zip(self._tokens, self.scores)]
        return write_lines(path, [header, *body])

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = read_lines(path)
        if not lines or not lines[0].startswith(_HEADER):
            raise TokenizerError(f"{path}: missing '{_HEADER}' header")
        max_size = None
        for field in lines[0].split("\t")[1:]:
            key, _, value = field.partition("=")
            if key == "max_size":
                max_size = int(value)
        tokens, scores = [], []
        for line in lines[1:]:
            token, sep, score = line.rpartition("\t")
            if not sep:
                raise TokenizerError(f"{path}: malformed line {line!r}")
            tokens.append(token)
            scores.append(float(score))
        if tuple(tokens[:len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            raise TokenizerError(f"{path}: specials must come first, in order {SPECIAL_TOKENS}")
        n = len(SPECIAL_TOKENS)
        return cls(tokens[n:], max_size=max_size, scores=scores[n:])
