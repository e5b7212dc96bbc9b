"""
The translator contract every toolkit plugs into: preprocess, train, translate.
translate must return exactly one hypothesis per source line.
"""

from abc import ABC, abstractmethod
from collections.abc import Sequence
from pathlib import Path
from typing import Literal

from builder.schemas import VariantSpec
from lib.settings import TrainConfig
from trainer.schemas import DecodeConfig, TranslatorIdentity


class BaseTranslator(ABC):
    name: str = "base"
    version: str = "1"
    supports_beam: bool = False
    resumable: bool = False
    # "text": consumes and produces normalized text. "tokens": subword token strings.
    output_format: Literal["text", "tokens"] = "text"
    manifest_path: Path | None = None

    @property
    def identity(self) -> TranslatorIdentity:
        return TranslatorIdentity(kind=self.name, version=self.version)

    @abstractmethod
    def preprocess(self, variant: VariantSpec, run_dir: Path) -> dict[str, Path]:
        """Returns the prepared input paths (train/val files, vocabularies)."""

    @abstractmethod
    def train(self, prepared: dict[str, Path], train_config: TrainConfig, model_dir: Path) -> dict[str, Path]:
        """Trains into model_dir and returns the artifact paths."""

    @abstractmethod
    def translate(
        self,
        artifacts: dict[str, Path],
        source: Sequence[str],
        decode: DecodeConfig,
        work_dir: Path,
    ) -> list[str]:
        """One hypothesis line per source line."""
