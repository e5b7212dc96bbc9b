"""
Text normalization pipeline applied before tokenizer training and encoding.
Steps run strictly in declared order; an empty pipeline is the identity.
"""

import logging
import re
import unicodedata
from collections.abc import Callable, Iterable, Sequence
from functools import partial

from pydantic import ValidationError

from builder.schemas import NormalizationKind, NormalizationStep
from lib.errors import NormalizationError

logger = logging.getLogger("Normalization")


def strip_accents(text: str) -> str:
    """NFD, drop combining marks (category Mn), recompose with NFC."""
    decomposed = unicodedata.normalize("NFD", text)
    kept = "".join(ch for ch in decomposed if unicodedata.category(ch) != "Mn")
    return unicodedata.normalize("NFC", kept)


def _literal_replace(pattern: str, replacement: str, text: str) -> str:
    return text.replace(pattern, replacement)


def _regex_replace(compiled: re.Pattern[str], replacement: str, text: str) -> str:
    return compiled.sub(replacement, text)


def _compile_step(step: NormalizationStep) -> Callable[[str], str]:
    match step.kind:
        case NormalizationKind.NFD | NormalizationKind.NFC | NormalizationKind.NFKD | NormalizationKind.NFKC:
            return partial(unicodedata.normalize, step.kind.value.upper())
        case NormalizationKind.STRIP:
            return str.strip
        case NormalizationKind.STRIP_ACCENTS:
            return strip_accents
        case NormalizationKind.LOWERCASE:
            return str.lower
        case NormalizationKind.REPLACE:
            assert step.pattern
            if not step.regex:
                return partial(_literal_replace, step.pattern, step.replacement)
            try:
                compiled = re.compile(step.pattern)
            except re.error as e:
                raise NormalizationError(f"invalid replace pattern {step.pattern!r}: {e}") from e
            return partial(_regex_replace, compiled, step.replacement)
    raise NormalizationError(f"unknown normalization step '{step.kind}'")


class NormalizationPipeline:
    """Compiled, immutable sequence of steps. Safe to share across threads."""

    def __init__(self, steps: Sequence[NormalizationStep | str | dict] = ()):
        try:
            self.steps: tuple[NormalizationStep, ...] = tuple(
                s if isinstance(s, NormalizationStep) else NormalizationStep.model_validate(NormalizationStep.coerce(s))
                for s in steps
            )
        except ValidationError as e:
            raise NormalizationError(f"invalid normalization step: {e}") from e
        # Bad regexes surface here, at build time, never per line.
        self._funcs = tuple(_compile_step(s) for s in self.steps)

    def __call__(self, text: str) -> str:
        for func in self._funcs:
            text = func(text)
        return text

    def apply_all(self, lines: Iterable[str]) -> list[str]:
        return [self(line) for line in lines]

    def describe(self) -> list[dict]:
        return [s.model_dump(mode="json", exclude_defaults=True) | {"kind": s.kind.value} for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


def normalize(steps: Sequence[NormalizationStep | str | dict], text: str) -> str:
    return NormalizationPipeline(steps)(text)
