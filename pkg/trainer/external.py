"""
External-command adapter: drives a third-party toolkit through the command
templates of its manifest. Commands run without a shell; stdout/stderr go
to models/<run_id>/logs/<stage>.log.
"""

import json
import logging
import tempfile
from collections.abc import Mapping, Sequence
from pathlib import Path

from pydantic import ValidationError

from builder.dataset_registry import encoded_dir
from builder.materialize import model_paths
from builder.schemas import VariantSpec
from lib.atomic_io import read_json, read_lines, write_lines
from lib.errors import ConfigError, ContractViolationError, StageFailedError, TemplateError
from lib.process_runner import execute_command
from lib.settings import TrainConfig
from trainer.contract import BaseTranslator
from trainer.schemas import PLACEHOLDER_RE, AdapterManifest, CommandTemplate, DecodeConfig, Stage

logger = logging.getLogger("MetaTrainer")


def render_command(template: CommandTemplate, bindings: Mapping[str, object]) -> list[str]:
    """Pure textual substitution of {PLACEHOLDER} fields; the argv is never shell-interpreted."""

    def substitute(part: str) -> str:
        def replace(match) -> str:
            name = match.group(1)
            if name not in bindings:
                raise TemplateError(f"{name} unbound in {template.stage.value} template")
            return str(bindings[name])

        return PLACEHOLDER_RE.sub(replace, part)

    return [substitute(part) for part in template.argv]


def render_outputs(template: CommandTemplate, bindings: Mapping[str, object]) -> list[Path]:
    rendered = render_command(template.model_copy(update={"argv": template.outputs or ["-"]}), bindings)
    return [Path(p) for p in rendered] if template.outputs else []


def load_manifest(path: str | Path) -> AdapterManifest:
    path = Path(path)
    try:
        data = read_json(path)
    except FileNotFoundError as e:
        raise ConfigError(f"adapter manifest not found: {path}") from e
    except ValueError as e:
        raise ConfigError(f"adapter manifest {path} is not valid UTF-8 JSON: {e}") from e
    data.setdefault("base_dir", str(path.parent.resolve()))
    try:
        return AdapterManifest.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid adapter manifest {path}:\n{e}") from e


def run_stage(
    manifest: AdapterManifest,
    stage: Stage,
    bindings: Mapping[str, object],
    log_dir: Path,
    extra_env: Mapping[str, str] | None = None,
) -> str:
    """Runs one stage; returns stdout. Raises StageFailedError on non-zero exit or missing outputs."""
    template = manifest.template(stage)
    if template is None:
        raise StageFailedError(stage.value, None, "", f"adapter '{manifest.name}' declares no {stage.value} stage")
    argv = render_command(template, bindings)
    env = dict(manifest.env) | dict(extra_env or {})
    logger.info(f"{manifest.name}: running {stage.value}", extra={"stage": stage.value})
    result = execute_command(
        argv, cwd=manifest.base_dir, env=env, timeout=manifest.timeout_seconds,
        log_path=log_dir / f"{stage.value}.log",
    )
    if result.exit_code != 0:
        raise StageFailedError(stage.value, result.exit_code, result.tail())
    missing = [str(p) for p in render_outputs(template, bindings) if not p.exists()]
    if missing:
        raise StageFailedError(stage.value, 0, result.tail(), f"stage '{stage.value}' did not produce {missing}")
    return result.stdout


class ExternalTranslator(BaseTranslator):
    """A toolkit described by an AdapterManifest. Consumes the variant's encoded splits."""

    def __init__(self, manifest: AdapterManifest, manifest_path: Path | None = None):
        self.manifest = manifest
        self.manifest_path = manifest_path
        self.name = manifest.name
        self.version = manifest.version
        self.supports_beam = manifest.capabilities.supports_beam
        self.resumable = manifest.capabilities.resumable
        self.output_format = manifest.output_format

    @classmethod
    def from_manifest(cls, path: str | Path) -> "ExternalTranslator":
        return cls(load_manifest(path), Path(path))

    def preprocess(self, variant: VariantSpec, run_dir: Path) -> dict[str, Path]:
        ref = variant.dataset
        data = encoded_dir(variant)
        prepared = {
            "TRAIN_SRC": data / f"train.{ref.src}",
            "TRAIN_TRG": data / f"train.{ref.trg}",
            "VAL_SRC": data / f"val.{ref.src}",
            "VAL_TRG": data / f"val.{ref.trg}",
            "VOCAB_SRC": model_paths(variant, ref.src)[1],
            "VOCAB_TRG": model_paths(variant, ref.trg)[1],
        }
        if self.manifest.template(Stage.PREPROCESS) is not None:
            bindings = {**prepared, "MODEL_DIR": run_dir / "model"}
            run_stage(self.manifest, Stage.PREPROCESS, bindings, run_dir / "logs")
        return prepared

    def train(self, prepared: dict[str, Path], train_config: TrainConfig, model_dir: Path) -> dict[str, Path]:
        model_dir.mkdir(parents=True, exist_ok=True)
        bindings = {**prepared, "MODEL_DIR": model_dir, "SEED": train_config.seed}
        env = {
            "SEQSURF_EPOCHS": str(train_config.epochs),
            "SEQSURF_BATCH_SIZE": str(train_config.batch_size),
            "SEQSURF_TRAIN_EXTRA": json.dumps(train_config.extra, sort_keys=True),
        }
        run_stage(self.manifest, Stage.TRAIN, bindings, model_dir.parent / "logs", env)
        template = self.manifest.template(Stage.TRAIN)
        artifacts = {"model_dir": model_dir}
        assert template is not None
        for k, path in enumerate(render_outputs(template, bindings)):
            artifacts[f"output_{k}"] = path
        return artifacts

    def translate(self, artifacts: dict[str, Path], source: Sequence[str], decode: DecodeConfig, work_dir: Path) -> list[str]:
        work_dir.mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryDirectory(dir=work_dir, prefix="translate.") as tmp:
            input_path, output_path = Path(tmp) / "input.txt", Path(tmp) / "output.txt"
            write_lines(input_path, source)
            bindings = {
                "MODEL_DIR": artifacts["model_dir"],
                "INPUT": input_path,
                "OUTPUT": output_path,
                "BEAM": decode.beam_width,
            }
            run_stage(self.manifest, Stage.TRANSLATE, bindings, work_dir.parent / "logs")
            if not output_path.exists():
                raise StageFailedError("translate", 0, "", f"adapter '{self.name}' wrote no output file")
            hypotheses = read_lines(output_path)
        if len(hypotheses) != len(source):
            raise ContractViolationError(self.name, len(source), len(hypotheses))
        return hypotheses
