"""
Experiment configuration: one TOML document drives every CLI stage.

Validated with pydantic (unknown keys rejected). SEQSURF_BASE_PATH and
SEQSURF_LOG_LEVEL, from the environment or a .env file, override the file.
"""

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from builder.schemas import (
    NUM_SPECIALS,
    ORIGINAL_SIZE,
    NormalizationStep,
    PairFilter,
    SplitPolicy,
    SubwordModel,
)
from lib.errors import ConfigError

logger = logging.getLogger("Settings")

BASE_PATH_ENV = "SEQSURF_BASE_PATH"
LOG_LEVEL_ENV = "SEQSURF_LOG_LEVEL"

BUILTIN_TRANSLATORS = ("identity", "lexicon")
# Translator names become directory names inside run ids.
TRANSLATOR_NAME_PATTERN = r"^[\w.+-]+$"
NATIVE_METRICS = ("bleu", "chrf")
REPORT_DIMENSIONS = (
    "run_id", "train_dataset", "eval_dataset", "translator", "subword_model",
    "vocab_size", "train_limit", "metric", "beam",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SizeSpec(_Strict):
    label: str = Field(min_length=1)
    limit: int | None = Field(default=None, ge=1, description="Training sentences kept; absent for 'original'.")

    @model_validator(mode="after")
    def _check(self) -> "SizeSpec":
        if self.label == ORIGINAL_SIZE and self.limit is not None:
            raise ValueError("size 'original' takes no limit")
        if self.label != ORIGINAL_SIZE and self.limit is None:
            raise ValueError(f"size '{self.label}' needs a limit")
        return self


class DatasetConfig(_Strict):
    name: str = Field(min_length=1)
    language_pairs: list[str] = Field(min_length=1, description='Pairs written "src-trg", e.g. "de-en".')
    sizes: list[SizeSpec] = Field(default_factory=lambda: [SizeSpec(label=ORIGINAL_SIZE)])
    split: SplitPolicy = Field(default_factory=SplitPolicy)
    filter: PairFilter | None = None
    allow_same_language: bool = False

    @field_validator("language_pairs")
    @classmethod
    def _check_pairs(cls, pairs: list[str]) -> list[str]:
        for pair in pairs:
            parts = pair.split("-")
            if len(parts) != 2 or not all(parts):
                raise ValueError(f"language pair '{pair}' must look like 'de-en'")
        return pairs

    def pairs(self) -> list[tuple[str, str]]:
        return [tuple(p.split("-")) for p in self.language_pairs]  # type: ignore[misc]

    def limit_for(self, label: str) -> int | None:
        for size in self.sizes:
            if size.label == label:
                return size.limit
        raise KeyError(label)


class SubwordOptions(_Strict):
    bpe_min_pair_count: int = Field(default=2, ge=1)
    unigram_max_piece_len: int = Field(default=6, ge=1)
    unigram_seed_min_freq: int = Field(default=2, ge=1)
    unigram_seed_max_pieces: int = Field(default=100_000, ge=1)
    unigram_em_rounds: int = Field(default=2, ge=1)
    unigram_prune_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)


class TranslatorConfig(_Strict):
    name: str = Field(min_length=1, pattern=TRANSLATOR_NAME_PATTERN)
    manifest: Path | None = Field(default=None, description="Adapter manifest JSON for external toolkits.")

    @model_validator(mode="after")
    def _check(self) -> "TranslatorConfig":
        if self.manifest is None and self.name not in BUILTIN_TRANSLATORS:
            raise ValueError(f"translator '{self.name}' is not built in; give an adapter manifest")
        return self


class TrainConfig(_Strict):
    epochs: int = Field(default=1, ge=1)
    batch_size: int = Field(default=32, ge=1)
    seed: int = 1234
    extra: dict[str, Any] = Field(default_factory=dict, description="Adapter-specific options, passed through.")


class MetricConfig(_Strict):
    name: str = Field(min_length=1)
    params: dict[str, Any] = Field(default_factory=dict)
    adapter: Path | None = Field(default=None, description="Manifest with a 'score' stage for external metrics.")

    @model_validator(mode="after")
    def _check(self) -> "MetricConfig":
        if self.adapter is None and self.name not in NATIVE_METRICS:
            raise ValueError(f"metric '{self.name}' is not native; give an adapter manifest")
        return self


class DecodeSettings(_Strict):
    beams: list[int] = Field(default_factory=lambda: [5], min_length=1)
    max_output_length: int = Field(default=256, ge=1)

    @field_validator("beams")
    @classmethod
    def _check_beams(cls, beams: list[int]) -> list[int]:
        if any(b < 1 for b in beams):
            raise ValueError("beam widths must be >= 1")
        if len(set(beams)) != len(beams):
            raise ValueError("duplicate beam widths")
        return beams


class YSeriesConfig(_Strict):
    variable: str
    axis: Literal["primary", "secondary"] = "primary"


class ReportConfig(_Strict):
    name: str = Field(min_length=1)
    kind: Literal["metric", "cross_dataset", "multivariable", "comparison"]
    metrics: list[str] = Field(default_factory=lambda: ["bleu"])
    group_by: list[str] = Field(default_factory=lambda: ["run_id"])
    x: str = "vocab_size"
    y: list[YSeriesConfig] = Field(default_factory=list)
    series_by: str = "train_dataset"
    system_a: str | None = None
    system_b: str | None = None
    beam: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "ReportConfig":
        if self.kind == "comparison" and (not self.system_a or not self.system_b):
            raise ValueError(f"comparison report '{self.name}' needs system_a and system_b")
        if self.kind == "multivariable" and not self.y:
            raise ValueError(f"multivariable report '{self.name}' needs at least one y series")
        return self


class LoggingConfig(_Strict):
    level: str = "INFO"
    jsonl: bool = True


class ExperimentConfig(_Strict):
    base_path: Path
    interactive: bool = True
    datasets: list[DatasetConfig] = Field(default_factory=list)
    normalization: list[NormalizationStep] = Field(default_factory=list)
    subword: dict[SubwordModel, list[int]] = Field(default_factory=dict)
    subword_options: SubwordOptions = Field(default_factory=SubwordOptions)
    translators: list[TranslatorConfig] = Field(default_factory=lambda: [TranslatorConfig(name="lexicon")])
    train: TrainConfig = Field(default_factory=TrainConfig)
    metrics: list[MetricConfig] = Field(
        default_factory=lambda: [MetricConfig(name="bleu"), MetricConfig(name="chrf")]
    )
    decode: DecodeSettings = Field(default_factory=DecodeSettings)
    reports: list[ReportConfig] = Field(default_factory=list)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @field_validator("normalization", mode="before")
    @classmethod
    def _coerce_steps(cls, value: object) -> object:
        if isinstance(value, list):
            return [NormalizationStep.coerce(v) for v in value]
        return value

    @field_validator("subword")
    @classmethod
    def _check_plan(cls, plan: dict[SubwordModel, list[int]]) -> dict[SubwordModel, list[int]]:
        for model, sizes in plan.items():
            if model.needs_vocab_size and not sizes:
                raise ValueError(f"subword model '{model.value}' needs at least one vocab size")
            if not model.needs_vocab_size and sizes:
                raise ValueError(f"subword model '{model.value}' takes no vocab sizes")
            for size in sizes:
                if size <= NUM_SPECIALS:
                    raise ValueError(f"vocab size {size} for '{model.value}' leaves no room beyond the specials")
        return plan

    @model_validator(mode="after")
    def _check_names(self) -> "ExperimentConfig":
        report_names = [r.name for r in self.reports]
        if len(set(report_names)) != len(report_names):
            raise ValueError("report names must be unique")
        translator_names = [t.name for t in self.translators]
        if len(set(translator_names)) != len(translator_names):
            raise ValueError("translator names must be unique")
        return self

    def vocab_plan(self) -> list[tuple[SubwordModel, int | None]]:
        """(model, vocab size) pairs in the fixed model order, sizes descending."""
        plan: list[tuple[SubwordModel, int | None]] = []
        for model in SubwordModel:
            if model not in self.subword:
                continue
            sizes = self.subword[model]
            if not sizes:
                plan.append((model, None))
            else:
                plan.extend((model, size) for size in sorted(sizes, reverse=True))
        return plan

    def report(self, name: str) -> ReportConfig:
        for report in self.reports:
            if report.name == name:
                return report
        raise ConfigError(f"undefined report '{name}'; defined: {[r.name for r in self.reports]}")


def _resolve(path: Path | None, root: Path) -> Path | None:
    if path is None or path.is_absolute():
        return path
    return (root / path).resolve()


def parse_config(data: dict[str, Any], config_dir: Path | None = None) -> ExperimentConfig:
    """Validates a config mapping; relative paths resolve against config_dir."""
    data = dict(data)
    env_base = os.getenv(BASE_PATH_ENV)
    if env_base:
        data["base_path"] = env_base
    env_level = os.getenv(LOG_LEVEL_ENV)
    if env_level:
        data["logging"] = dict(data.get("logging", {})) | {"level": env_level}
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config:\n{e}") from e

    if config_dir is None:
        return config
    return config.model_copy(update={
        "base_path": _resolve(config.base_path, config_dir),
        "translators": [
            t.model_copy(update={"manifest": _resolve(t.manifest, config_dir)}) for t in config.translators
        ],
        "metrics": [m.model_copy(update={"adapter": _resolve(m.adapter, config_dir)}) for m in config.metrics],
    })


def load_config(path: str | Path) -> ExperimentConfig:
    load_dotenv()
    path = Path(path)
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config file {path} is not valid TOML: {e}") from e
    config = parse_config(data, config_dir=path.parent.resolve())
    logger.debug(f"Loaded config {path} (base_path={config.base_path})")
    return config


def config_schema() -> dict[str, Any]:
    return ExperimentConfig.model_json_schema()
