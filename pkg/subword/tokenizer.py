"""
TokenizerModel: the ten tokenization schemes behind one encode/decode surface.

    bytes        UTF-8 bytes, fixed 260-entry vocabulary
    chars        symbols by frequency, capped by vocab size
    bpe          greedy merges within word units
    unigram      Viterbi over learned piece log-probabilities
    words        whole whitespace tokens by frequency
    "+bytes"     out-of-vocabulary symbols become <0xHH> pieces instead of <unk>
    none         normalization only; encode/decode are rejected
"""

import logging
from collections import Counter
from collections.abc import Sequence
from functools import lru_cache
from pathlib import Path
from typing import Any

from builder.schemas import NUM_SPECIALS, SubwordModel, VariantSpec
from lib.atomic_io import read_json, write_json_atomic
from lib.errors import TokenizerError, UnsupportedOperationError
from lib.settings import SubwordOptions
from subword.bpe import Pair, apply_merges, learn_merges
from subword.pretokenize import count_symbols, count_units, split_words, word_units
from subword.unigram import train_unigram, viterbi
from subword.vocabulary import (
    BOS,
    BYTE_TOKENS,
    EOS,
    PAD,
    UNK,
    UNK_ID,
    WORD_MARKER,
    Vocabulary,
    byte_token,
    byte_tokens_for,
    is_storable,
    parse_byte_token,
)

logger = logging.getLogger("SubwordTrainer")

MODEL_FORMAT_VERSION = 1
_DROPPED = frozenset((PAD, BOS, EOS))
_SPACE_BYTE = byte_token(0x20)


class TokenizerModel:
    """Trained and immutable; encode/decode are pure and safe to share across threads."""

    def __init__(
        self,
        scheme: SubwordModel,
        vocab: Vocabulary,
        merges: Sequence[Pair] = (),
        pieces: dict[str, float] | None = None,
        byte_logprob: float | None = None,
    ):
        self.scheme = scheme
        self.vocab = vocab
        self.merges: tuple[Pair, ...] = tuple(tuple(m) for m in merges)  # type: ignore[misc]
        self.pieces = dict(pieces or {})
        self.byte_logprob = byte_logprob
        self._ranks = {pair: rank for rank, pair in enumerate(self.merges)}
        self._max_piece_len = max((len(p) for p in self.pieces), default=1)
        self._segment = lru_cache(maxsize=1 << 16)(self._segment_unit)

    @property
    def byte_fallback(self) -> bool:
        return self.scheme.byte_fallback

    # --- encoding --------------------------------------------------------

    def tokenize(self, text: str) -> list[str]:
        """Token strings for `text`."""
        match self.scheme.base:
            case "none":
                raise UnsupportedOperationError("scheme 'none' does not encode; tokenization happens downstream")
            case "bytes":
                return byte_tokens_for(text)
            case "words":
                return self._tokenize_words(text)
        out: list[str] = []
        for unit in word_units(text):
            if unit is None:
                out.extend(self._fallback(WORD_MARKER))
                continue
            for symbol in self._segment(unit):
                if symbol in self.vocab:
                    out.append(symbol)
                else:
                    out.extend(self._fallback(symbol))
        return out

    def encode(self, text: str) -> list[int]:
        ids = [self.vocab.id_of(token) for token in self.tokenize(text)]
        encoded = [UNK_ID if i is None else i for i in ids]
        if text and not encoded:
            return [UNK_ID]
        return encoded

    def _fallback(self, symbol: str) -> list[str]:
        return byte_tokens_for(symbol) if self.byte_fallback else [UNK]

    def _fallback_score(self, symbol: str) -> float:
        assert self.byte_logprob is not None
        if self.byte_fallback:
            return self.byte_logprob * len(symbol.encode("utf-8"))
        return self.byte_logprob

    def _segment_unit(self, unit: str) -> tuple[str, ...]:
        match self.scheme.base:
            case "bpe":
                return tuple(apply_merges(list(unit), self._ranks))
            case "unigram":
                segments, _ = self.viterbi(unit)
                return tuple(segments)
        return tuple(unit)

    def viterbi(self, text: str) -> tuple[list[str], float]:
        """Best unigram segmentation of a raw string and its log-probability."""
        if self.scheme.base != "unigram":
            raise UnsupportedOperationError(f"viterbi needs a unigram model, not '{self.scheme.value}'")
        return viterbi(text, self.pieces, self._max_piece_len, self._fallback_score)

    def _tokenize_words(self, text: str) -> list[str]:
        # Adjacent in-vocabulary words share one implicit space; every other space is explicit.
        out: list[str] = []
        prev_word = False
        for k, part in enumerate(split_words(text)):
            is_word = bool(part) and part in self.vocab
            if k and not (prev_word and is_word) and self.byte_fallback:
                out.append(_SPACE_BYTE)
            if is_word:
                out.append(part)
            elif part:
                out.extend(self._fallback(part))
            prev_word = is_word
        return out

    # --- decoding --------------------------------------------------------

    def decode(self, ids: Sequence[int]) -> str:
        if self.scheme is SubwordModel.NONE:
            raise UnsupportedOperationError("scheme 'none' does not decode")
        return self.detokenize([self.vocab.token_of(int(i)) for i in ids])

    def detokenize(self, tokens: Sequence[str]) -> str:
        """Text from token strings. Specials are dropped; byte runs decode as UTF-8."""
        if self.scheme is SubwordModel.NONE:
            return " ".join(tokens)
        words = self.scheme.base == "words"
        out: list[str] = []
        pending = bytearray()
        prev_word = False

        def flush() -> None:
            if pending:
                out.append(pending.decode("utf-8", errors="replace"))
                pending.clear()

        for token in tokens:
            value = parse_byte_token(token)
            if value is not None:
                pending.append(value)
                prev_word = False
                continue
            if token in _DROPPED:
                continue
            flush()
            text = "" if token == UNK else token
            if words:
                if prev_word:
                    out.append(" ")
                out.append(text)
                prev_word = True
            else:
                out.append(text.replace(WORD_MARKER, " "))
        flush()

        decoded = "".join(out)
        if not words and self.scheme.base != "bytes" and decoded.endswith(" "):
            decoded = decoded[:-1]
        return decoded

    # --- persistence -----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": MODEL_FORMAT_VERSION,
            "scheme": self.scheme.value,
            "byte_fallback": self.byte_fallback,
            "max_size": self.vocab.max_size,
            "tokens": list(self.vocab.tokens[NUM_SPECIALS:]),
            "scores": list(self.vocab.scores[NUM_SPECIALS:]),
            "merges": [list(m) for m in self.merges],
            "pieces": [[p, lp] for p, lp in self.pieces.items()],
            "byte_logprob": self.byte_logprob,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TokenizerModel":
        if data.get("version") != MODEL_FORMAT_VERSION:
            raise TokenizerError(f"unsupported tokenizer model version {data.get('version')!r}")
        try:
            vocab = Vocabulary(data["tokens"], max_size=data["max_size"], scores=data["scores"])
            return cls(
                scheme=SubwordModel(data["scheme"]),
                vocab=vocab,
                merges=[tuple(m) for m in data["merges"]],
                pieces={p: float(lp) for p, lp in data["pieces"]},
                byte_logprob=data.get("byte_logprob"),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise TokenizerError(f"malformed tokenizer model: {e}") from e

    def save(self, model_path: str | Path, vocab_path: str | Path | None = None) -> None:
        write_json_atomic(model_path, self.to_dict())
        if vocab_path is not None:
            self.vocab.save(vocab_path)


def load_tokenizer(model_path: str | Path) -> TokenizerModel:
    try:
        return TokenizerModel.from_dict(read_json(model_path))
    except FileNotFoundError as e:
        raise TokenizerError(f"tokenizer model not found: {model_path}") from e


# --- training ----------------------------------------------------------------

def _alphabet(symbols: Counter[str], capacity: int, capped: bool, vocab_size: int) -> list[str]:
    """The marker first, then symbols by frequency (ties lexicographic)."""
    ranked = sorted((s for s in symbols if s != WORD_MARKER and is_storable(s)), key=lambda s: (-symbols[s], s))
    alphabet = [WORD_MARKER, *ranked]
    if len(alphabet) > capacity:
        if not capped:
            raise TokenizerError(
                f"vocab_size {vocab_size} is smaller than {NUM_SPECIALS} specials + {len(alphabet)} base symbols"
            )
        alphabet = alphabet[:capacity]
    return alphabet


def _reserved(scheme: SubwordModel, vocab_size: int) -> list[str]:
    """Fixed entries after the specials: the 256 byte pieces under byte fallback."""
    if not scheme.byte_fallback:
        return []
    minimum = NUM_SPECIALS + len(BYTE_TOKENS) + (0 if scheme.base == "words" else 1)
    if vocab_size < minimum:
        raise TokenizerError(f"vocab_size {vocab_size} is below the {minimum} entries '{scheme.value}' always needs")
    return list(BYTE_TOKENS)


def _train_words(lines: Sequence[str], scheme: SubwordModel, vocab_size: int) -> TokenizerModel:
    reserved = _reserved(scheme, vocab_size)
    counts: Counter[str] = Counter()
    for line in lines:
        counts.update(w for w in split_words(line) if w)
    room = vocab_size - NUM_SPECIALS - len(reserved)
    ranked = sorted((w for w in counts if is_storable(w)), key=lambda w: (-counts[w], w))[:room]
    scores = [0.0] * len(reserved) + [float(counts[w]) for w in ranked]
    return TokenizerModel(scheme, Vocabulary(reserved + ranked, max_size=vocab_size, scores=scores))


def _train_chars(lines: Sequence[str], scheme: SubwordModel, vocab_size: int) -> TokenizerModel:
    reserved = _reserved(scheme, vocab_size)
    symbols = count_symbols(count_units(lines))
    alphabet = _alphabet(symbols, vocab_size - NUM_SPECIALS - len(reserved), capped=True, vocab_size=vocab_size)
    scores = [0.0] * len(reserved) + [float(symbols[s]) for s in alphabet]
    return TokenizerModel(scheme, Vocabulary(reserved + alphabet, max_size=vocab_size, scores=scores))


def _train_bpe(lines: Sequence[str], scheme: SubwordModel, vocab_size: int, options: SubwordOptions) -> TokenizerModel:
    reserved = _reserved(scheme, vocab_size)
    units = count_units(lines)
    capacity = vocab_size - NUM_SPECIALS - len(reserved)
    alphabet = _alphabet(count_symbols(units), capacity, capped=scheme.byte_fallback, vocab_size=vocab_size)
    merges = learn_merges(units, set(alphabet), capacity - len(alphabet), options.bpe_min_pair_count)

    tokens = list(alphabet)
    seen = set(tokens)
    for a, b in merges:
        if a + b not in seen:
            seen.add(a + b)
            tokens.append(a + b)
    # Base symbols score 0; merged tokens score minus their merge rank.
    scores = [0.0] * (len(reserved) + len(alphabet)) + [-float(r + 1) for r in range(len(tokens) - len(alphabet))]
    return TokenizerModel(scheme, Vocabulary(reserved + tokens, max_size=vocab_size, scores=scores), merges=merges)


def _train_unigram(lines: Sequence[str], scheme: SubwordModel, vocab_size: int, options: SubwordOptions) -> TokenizerModel:
    reserved = _reserved(scheme, vocab_size)
    units = count_units(lines)
    capacity = vocab_size - NUM_SPECIALS - len(reserved)
    alphabet = _alphabet(count_symbols(units), capacity, capped=scheme.byte_fallback, vocab_size=vocab_size)
    pieces = train_unigram(units, set(alphabet), capacity, options)

    byte_logprob = min(pieces.values()) - 1.0
    ranked = sorted(pieces, key=lambda p: (-pieces[p], p))
    scores = [byte_logprob] * len(reserved) + [pieces[p] for p in ranked]
    return TokenizerModel(
        scheme,
        Vocabulary(reserved + ranked, max_size=vocab_size, scores=scores),
        pieces={p: pieces[p] for p in ranked},
        byte_logprob=byte_logprob,
    )


def train_tokenizer(
    variant: VariantSpec,
    train_corpus: Sequence[str],
    options: SubwordOptions | None = None,
) -> TokenizerModel:
    """Trains the variant's scheme on normalized training lines."""
    options = options or SubwordOptions()
    scheme = variant.subword_model
    lines = list(train_corpus)
    if not lines:
        raise TokenizerError(f"empty training corpus for {variant.label}")

    match scheme.base:
        case "none":
            return TokenizerModel(scheme, Vocabulary([]))
        case "bytes":
            return TokenizerModel(scheme, Vocabulary(BYTE_TOKENS, max_size=NUM_SPECIALS + len(BYTE_TOKENS)))

    if not any(lines):
        raise TokenizerError(f"training corpus for {variant.label} has only empty lines")
    assert variant.vocab_size is not None
    match scheme.base:
        case "words":
            model = _train_words(lines, scheme, variant.vocab_size)
        case "chars":
            model = _train_chars(lines, scheme, variant.vocab_size)
        case "bpe":
            model = _train_bpe(lines, scheme, variant.vocab_size, options)
        case _:
            model = _train_unigram(lines, scheme, variant.vocab_size, options)
    logger.info(f"Trained {scheme.value} tokenizer for {variant.label}: {len(model.vocab)} entries")
    return model


def encode(model: TokenizerModel, text: str) -> list[int]:
    return model.encode(text)


def decode(model: TokenizerModel, ids: Sequence[int]) -> str:
    return model.decode(ids)
