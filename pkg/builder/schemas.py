from enum import Enum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

NUM_SPECIALS = 4
ORIGINAL_SIZE = "original"
SPLIT_NAMES = ("train", "val", "test")


class SubwordModel(str, Enum):
    BYTES = "bytes"
    CHARS = "chars"
    CHARS_BYTES = "chars+bytes"
    UNIGRAM = "unigram"
    UNIGRAM_BYTES = "unigram+bytes"
    BPE = "bpe"
    BPE_BYTES = "bpe+bytes"
    WORDS = "words"
    WORDS_BYTES = "words+bytes"
    NONE = "none"

    @property
    def byte_fallback(self) -> bool:
        return self.value.endswith("+bytes")

    @property
    def base(self) -> str:
        """The scheme without its "+bytes" suffix."""
        return self.value.split("+")[0]

    @property
    def needs_vocab_size(self) -> bool:
        return self not in (SubwordModel.BYTES, SubwordModel.NONE)


class NormalizationKind(str, Enum):
    NFD = "nfd"
    NFC = "nfc"
    NFKD = "nfkd"
    NFKC = "nfkc"
    STRIP = "strip"
    STRIP_ACCENTS = "strip_accents"
    LOWERCASE = "lowercase"
    REPLACE = "replace"


class NormalizationStep(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: NormalizationKind
    pattern: str | None = Field(default=None, description="Substring (or regex when regex=true) for replace.")
    replacement: str = ""
    regex: bool = Field(default=False, description="Treat pattern as a regular expression.")

    @model_validator(mode="after")
    def _check_replace(self) -> "NormalizationStep":
        if self.kind is NormalizationKind.REPLACE and not self.pattern:
            raise ValueError("replace step needs a non-empty pattern")
        if self.kind is not NormalizationKind.REPLACE and (self.pattern is not None or self.regex):
            raise ValueError(f"step '{self.kind.value}' takes no pattern")
        return self

    @classmethod
    def coerce(cls, value: object) -> object:
        """Config files may name a bare step ("lowercase") instead of a table."""
        if isinstance(value, str):
            return {"kind": value}
        return value


class DatasetRef(BaseModel):
    """Identity of one corpus: name x language pair x training-size label."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1)
    src: str = Field(min_length=1, description="Source language code.")
    trg: str = Field(min_length=1, description="Target language code.")
    size_label: str = Field(default=ORIGINAL_SIZE, min_length=1)
    base_path: Path
    allow_same_language: bool = False

    @model_validator(mode="after")
    def _check_pair(self) -> "DatasetRef":
        if self.src == self.trg and not self.allow_same_language:
            raise ValueError(f"dataset '{self.name}': source and target language are both '{self.src}'")
        for part in (self.name, self.size_label):
            if "/" in part or part in (".", ".."):
                raise ValueError(f"invalid path component '{part}'")
        return self

    @property
    def language_pair(self) -> tuple[str, str]:
        return (self.src, self.trg)

    @property
    def pair_label(self) -> str:
        return f"{self.src}-{self.trg}"

    @property
    def root(self) -> Path:
        return self.base_path / self.name / self.pair_label / self.size_label

    @property
    def label(self) -> str:
        return f"{self.name}_{self.pair_label}_{self.size_label}"

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.name, self.src, self.trg, self.size_label)


class ParallelCorpus(BaseModel):
    """Aligned source/target lines plus optional per-line metadata columns."""

    model_config = ConfigDict(frozen=True)

    src: tuple[str, ...] = ()
    trg: tuple[str, ...] = ()
    metadata: dict[str, tuple[str, ...]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_alignment(self) -> "ParallelCorpus":
        if len(self.src) != len(self.trg):
            raise ValueError(f"misaligned corpus: {len(self.src)} source vs {len(self.trg)} target lines")
        for column, values in self.metadata.items():
            if len(values) != len(self.src):
                raise ValueError(f"metadata column '{column}' has {len(values)} lines, expected {len(self.src)}")
        return self

    def __len__(self) -> int:
        return len(self.src)

    def select(self, indices: list[int]) -> "ParallelCorpus":
        return ParallelCorpus(
            src=tuple(self.src[i] for i in indices),
            trg=tuple(self.trg[i] for i in indices),
            metadata={k: tuple(v[i] for i in indices) for k, v in self.metadata.items()},
        )

    def head(self, n: int) -> "ParallelCorpus":
        return ParallelCorpus(
            src=self.src[:n],
            trg=self.trg[:n],
            metadata={k: v[:n] for k, v in self.metadata.items()},
        )


class SplitSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    train: ParallelCorpus
    val: ParallelCorpus = Field(default_factory=ParallelCorpus)
    test: ParallelCorpus = Field(default_factory=ParallelCorpus)
    provenance: Literal["given_splits", "derived_from_raw"] = "given_splits"
    seed: int | None = None

    def split(self, name: str) -> ParallelCorpus:
        if name not in SPLIT_NAMES:
            raise KeyError(name)
        return getattr(self, name)


class SplitPolicy(BaseModel):
    """Absolute validation/test sizes taken from a seeded shuffle of the raw corpus."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    val_size: int = Field(default=1000, ge=0)
    test_size: int = Field(default=1000, ge=0)
    seed: int = 1234


class PairFilter(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["language", "domain", "leading_tag"]
    value: str = Field(min_length=1)
    column: str | None = Field(default=None, description="Metadata column; defaults to 'lang' or 'domain'.")
    strip_tag: bool = Field(default=False, description="leading_tag only: remove the tag from kept lines.")

    @property
    def metadata_column(self) -> str | None:
        if self.kind == "leading_tag":
            return None
        return self.column or ("lang" if self.kind == "language" else "domain")


class VariantSpec(BaseModel):
    """One preprocessing configuration of a dataset."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset: DatasetRef
    normalization: tuple[NormalizationStep, ...] = ()
    subword_model: SubwordModel
    vocab_size: int | None = Field(default=None, gt=NUM_SPECIALS)
    train_limit: int | None = Field(default=None, ge=1)

    @field_validator("normalization", mode="before")
    @classmethod
    def _coerce_steps(cls, value: object) -> object:
        if isinstance(value, (list, tuple)):
            return tuple(NormalizationStep.coerce(v) for v in value)
        return value

    @model_validator(mode="after")
    def _check_vocab(self) -> "VariantSpec":
        if self.subword_model.needs_vocab_size and self.vocab_size is None:
            raise ValueError(f"subword model '{self.subword_model.value}' needs a vocab size")
        if not self.subword_model.needs_vocab_size and self.vocab_size is not None:
            raise ValueError(f"subword model '{self.subword_model.value}' takes no vocab size")
        return self

    @property
    def key(self) -> tuple:
        return (self.dataset.key, self.subword_model.value, self.vocab_size, self.train_limit)

    @property
    def variant_dir(self) -> str:
        if self.vocab_size is None:
            return self.subword_model.value
        return f"{self.subword_model.value}_{self.vocab_size}"

    @property
    def label(self) -> str:
        return f"{self.dataset.label}/{self.variant_dir}"
