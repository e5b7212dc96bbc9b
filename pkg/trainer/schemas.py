import re
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from builder.schemas import VariantSpec
from lib import __version__
from lib.settings import TRANSLATOR_NAME_PATTERN, TrainConfig

PLACEHOLDERS = (
    "TRAIN_SRC", "TRAIN_TRG", "VAL_SRC", "VAL_TRG", "VOCAB_SRC", "VOCAB_TRG",
    "MODEL_DIR", "INPUT", "OUTPUT", "BEAM", "SEED",
)
PLACEHOLDER_RE = re.compile(r"\{([A-Z_][A-Z0-9_]*)\}")


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class Stage(str, Enum):
    PREPROCESS = "preprocess"
    TRAIN = "train"
    TRANSLATE = "translate"
    SCORE = "score"


class CommandTemplate(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    stage: Stage
    argv: list[str] = Field(min_length=1, description="Argument vector; {PLACEHOLDER} fields are substituted, no shell.")
    outputs: list[str] = Field(default_factory=list, description="Path templates that must exist after success.")

    @model_validator(mode="after")
    def _check_placeholders(self) -> "CommandTemplate":
        used = self.placeholders()
        unknown = sorted(used - set(PLACEHOLDERS))
        if unknown:
            raise ValueError(f"unknown placeholders in {self.stage.value} template: {unknown}")
        if self.stage in (Stage.TRANSLATE, Stage.SCORE) and "OUTPUT" not in used:
            raise ValueError(f"{self.stage.value} template must use {{OUTPUT}}")
        return self

    def placeholders(self) -> set[str]:
        return {m for part in [*self.argv, *self.outputs] for m in PLACEHOLDER_RE.findall(part)}


class Capabilities(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    supports_beam: bool = False
    resumable: bool = Field(default=False, description="Train may resume from MODEL_DIR instead of restarting.")


class AdapterManifest(BaseModel):
    """JSON file describing an external toolkit (or metric) as command templates."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1, pattern=TRANSLATOR_NAME_PATTERN)
    version: str = "0"
    capabilities: Capabilities = Field(default_factory=Capabilities)
    env: dict[str, str] = Field(default_factory=dict)
    output_format: Literal["tokens", "text"] = Field(
        default="tokens", description="tokens: hypotheses are subword tokens, detokenized with the target model."
    )
    timeout_seconds: float | None = Field(default=None, gt=0)
    commands: list[CommandTemplate] = Field(min_length=1)
    base_dir: Path | None = Field(default=None, description="Working directory for commands; the manifest's own directory.")

    @field_validator("commands")
    @classmethod
    def _unique_stages(cls, commands: list[CommandTemplate]) -> list[CommandTemplate]:
        stages = [c.stage for c in commands]
        if len(set(stages)) != len(stages):
            raise ValueError("each stage may be declared once")
        return commands

    def template(self, stage: Stage) -> CommandTemplate | None:
        return next((c for c in self.commands if c.stage is stage), None)


class TranslatorIdentity(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    version: str


class DecodeConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    beam_width: int = Field(default=5, ge=1)
    max_output_length: int = Field(default=256, ge=1)


class RunStatus(str, Enum):
    PREPARED = "prepared"
    TRAINED = "trained"
    FAILED = "failed"


class RunFailure(BaseModel):
    stage: str
    exit_code: int | None = None
    log_tail: str = ""
    message: str = ""


class RunRecord(BaseModel):
    run_id: str
    variant: VariantSpec
    translator: TranslatorIdentity
    manifest: Path | None = None
    train_config: TrainConfig = Field(default_factory=TrainConfig)
    artifacts: dict[str, str] = Field(default_factory=dict)
    status: RunStatus = RunStatus.PREPARED
    failure: RunFailure | None = None
    created_at: str = Field(default_factory=utc_now)
    updated_at: str = Field(default_factory=utc_now)
    library_version: str = __version__

    @property
    def run_dir(self) -> Path:
        return self.variant.dataset.root / "models" / self.run_id
