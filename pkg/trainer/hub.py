"""
MetaTrainer hub: resolves translators, fits them on materialized variants,
persists RunRecords and translates through trained runs.
"""

import logging
import re
import shutil
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Generic, TypeVar

from pydantic import ValidationError

from builder.dataset_registry import models_dir
from builder.materialize import encode_lines, is_materialized, load_variant_tokenizers
from builder.normalization import NormalizationPipeline
from builder.schemas import VariantSpec
from lib.atomic_io import read_json, write_json_atomic
from lib.errors import (
    ConfigError,
    ContractViolationError,
    SeqSurfError,
    StageFailedError,
    VariantNotMaterializedError,
)
from lib.logging_setup import run_log
from lib.settings import TRANSLATOR_NAME_PATTERN, TrainConfig, TranslatorConfig
from trainer.builtin import BUILTIN_REGISTRY
from trainer.contract import BaseTranslator
from trainer.external import ExternalTranslator
from trainer.schemas import DecodeConfig, RunFailure, RunRecord, RunStatus, utc_now

logger = logging.getLogger("MetaTrainer")

RUN_FILE = "run.json"
MODEL_SUBDIR = "model"

T = TypeVar("T")


def make_run_id(variant: VariantSpec, translator_name: str) -> str:
    if not re.fullmatch(TRANSLATOR_NAME_PATTERN, translator_name):
        raise ConfigError(f"translator name '{translator_name}' may only hold letters, digits and . _ + -")
    return f"{variant.dataset.label}_{variant.variant_dir}_{translator_name}"


def load_translator(config: TranslatorConfig) -> BaseTranslator:
    if config.manifest is not None:
        translator = ExternalTranslator.from_manifest(config.manifest)
        if translator.name != config.name:
            logger.warning(f"Translator '{config.name}' uses manifest named '{translator.name}'")
        return translator
    try:
        return BUILTIN_REGISTRY[config.name]()
    except KeyError as e:
        raise ConfigError(f"unknown built-in translator '{config.name}'; known: {sorted(BUILTIN_REGISTRY)}") from e


def translator_for_run(run: RunRecord) -> BaseTranslator:
    """Rebuilds the translator a run was trained with."""
    if run.manifest is not None:
        return ExternalTranslator.from_manifest(run.manifest)
    return load_translator(TranslatorConfig(name=run.translator.kind))


def run_path(run_dir: Path) -> Path:
    return run_dir / RUN_FILE


def save_run(record: RunRecord) -> Path:
    record.updated_at = utc_now()
    return write_json_atomic(run_path(record.run_dir), record.model_dump(mode="json"))


def load_run(path: str | Path) -> RunRecord:
    """Accepts a run directory or its run.json."""
    path = Path(path)
    if path.is_dir():
        path = run_path(path)
    try:
        return RunRecord.model_validate(read_json(path))
    except FileNotFoundError as e:
        raise SeqSurfError(f"no run record at {path}", module="trainer_hub") from e
    except (ValueError, ValidationError) as e:
        raise SeqSurfError(f"unreadable run record {path}: {e}", module="trainer_hub") from e


def fit(
    translator: BaseTranslator,
    variant: VariantSpec,
    train_config: TrainConfig | None = None,
    force: bool = False,
) -> RunRecord:
    """
    Runs preprocess then train for one (variant, translator). A trained run is
    returned unchanged unless force is set. Stage failures produce a failed
    RunRecord instead of raising.
    """
    if not is_materialized(variant):
        raise VariantNotMaterializedError(f"variant {variant.label} is not materialized; run build first")
    train_config = train_config or TrainConfig()
    run_id = make_run_id(variant, translator.name)
    run_dir = models_dir(variant.dataset) / run_id

    if run_path(run_dir).is_file() and not force:
        existing = load_run(run_dir)
        if existing.status is RunStatus.TRAINED:
            logger.info(f"Run {run_id} already trained, skipping", extra={"run_id": run_id})
            return existing
    if force and not translator.resumable:
        shutil.rmtree(run_dir / MODEL_SUBDIR, ignore_errors=True)

    record = RunRecord(
        run_id=run_id,
        variant=variant,
        translator=translator.identity,
        manifest=translator.manifest_path,
        train_config=train_config,
    )
    run_dir.mkdir(parents=True, exist_ok=True)
    save_run(record)

    stage = "preprocess"
    with run_log(run_id, run_dir / "logs" / "run.jsonl"):
        logger.info(f"Fitting {translator.name} on {variant.label}", extra={"run_id": run_id})
        try:
            prepared = translator.preprocess(variant, run_dir)
            stage = "train"
            artifacts = translator.train(prepared, train_config, run_dir / MODEL_SUBDIR)
            missing = [str(p) for p in artifacts.values() if not Path(p).exists()]
            if missing:
                raise StageFailedError("train", 0, "", f"artifacts missing after training: {missing}")
            record.artifacts = {k: str(v) for k, v in artifacts.items()}
            record.status = RunStatus.TRAINED
            record.failure = None
            logger.info(f"Run {run_id} trained", extra={"run_id": run_id, "stage": stage})
        except StageFailedError as e:
            record.status = RunStatus.FAILED
            record.failure = RunFailure(stage=e.stage, exit_code=e.exit_code, log_tail=e.log_tail, message=str(e))
            logger.error(f"Run {run_id} failed: {e}", extra={"run_id": run_id, "stage": e.stage})
        except SeqSurfError as e:
            record.status = RunStatus.FAILED
            record.failure = RunFailure(stage=stage, message=str(e))
            logger.error(f"Run {run_id} failed: {e}", extra={"run_id": run_id, "stage": stage})
    save_run(record)
    return record


def _truncate(line: str, limit: int) -> str:
    tokens = line.split(" ")
    return line if len(tokens) <= limit else " ".join(tokens[:limit])


def translate(
    run: RunRecord,
    source: Sequence[str],
    decode: DecodeConfig | None = None,
    translator: BaseTranslator | None = None,
) -> list[str]:
    """
    Plain-text hypotheses for plain-text source lines, one per line.
    Sources are normalized with the run's pipeline; token-level toolkits get
    subword-encoded input and their output is detokenized with the target model.
    """
    if run.status is not RunStatus.TRAINED:
        raise SeqSurfError(f"run {run.run_id} is {run.status.value}, not trained", module="trainer_hub")
    decode = decode or DecodeConfig()
    translator = translator or translator_for_run(run)
    if decode.beam_width > 1 and not translator.supports_beam:
        logger.warning(
            f"{translator.name} does not support beam search; beam width {decode.beam_width} ignored",
            extra={"run_id": run.run_id},
        )

    lines = NormalizationPipeline(run.variant.normalization).apply_all(source)
    artifacts = {k: Path(v) for k, v in run.artifacts.items()}
    work_dir = run.run_dir / "work"

    if translator.output_format == "tokens":
        src_model, trg_model = load_variant_tokenizers(run.variant)
        outputs = translator.translate(artifacts, encode_lines(src_model, lines), decode, work_dir)
        if len(outputs) != len(lines):
            raise ContractViolationError(translator.name, len(lines), len(outputs))
        return [
            trg_model.detokenize([t for t in _truncate(h, decode.max_output_length).split(" ") if t]) for h in outputs
        ]

    outputs = translator.translate(artifacts, lines, decode, work_dir)
    if len(outputs) != len(lines):
        raise ContractViolationError(translator.name, len(lines), len(outputs))
    return [_truncate(h, decode.max_output_length) for h in outputs]


@dataclass
class JobOutcome(Generic[T]):
    key: str
    result: T | None = None
    error: SeqSurfError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


class JobRunner:
    """Bounded worker pool; a failing job is captured in its outcome and never stops the batch."""

    def __init__(self, jobs: int = 1):
        self.jobs = max(1, jobs)

    def _run_one(self, key: str, job: Callable[[], T]) -> JobOutcome[T]:
        try:
            return JobOutcome(key, result=job())
        except SeqSurfError as e:
            logger.error(f"{key}: {e}")
            return JobOutcome(key, error=e)

    def run(self, jobs: Sequence[tuple[str, Callable[[], T]]]) -> list[JobOutcome[T]]:
        """Outcomes come back in submission order."""
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(lambda kj: self._run_one(*kj), jobs))


def fit_all(
    translators: Sequence[BaseTranslator],
    variants: Sequence[VariantSpec],
    train_config: TrainConfig | None = None,
    jobs: int = 1,
    force: bool = False,
) -> list[JobOutcome[RunRecord]]:
    """Every (variant, translator) combination, variants outermost."""
    names = [t.name for t in translators]
    if len(set(names)) != len(names):
        raise ConfigError(f"translators share a run name: {sorted(n for n in set(names) if names.count(n) > 1)}")
    work = [
        (make_run_id(v, t.name), (lambda v=v, t=t: fit(t, v, train_config, force)))
        for v in variants
        for t in translators
    ]
    return JobRunner(jobs).run(work)
