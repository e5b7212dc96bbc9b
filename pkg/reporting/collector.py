"""Walks a base path and joins evaluation results with their runs and variant stats."""

import logging
from pathlib import Path

from pydantic import ValidationError

from builder.materialize import variant_meta
from builder.schemas import VariantSpec
from evaluation.schemas import EvaluationResult
from lib.atomic_io import read_json
from reporting.table import ReportRow, ReportTable
from trainer.schemas import RunRecord

logger = logging.getLogger("Reporting")

RUN_GLOB = "*/*/*/models/*/run.json"


def _tokens_per_sentence(variant: VariantSpec, cache: dict[tuple, float | None]) -> float | None:
    if variant.key not in cache:
        try:
            cache[variant.key] = variant_meta(variant).get("tokens_per_sentence")
        except (OSError, ValueError):
            cache[variant.key] = None
    return cache[variant.key]


def collect(root: str | Path) -> ReportTable:
    """
    One row per successful EvaluationResult under root. Files that cannot be
    parsed are skipped and named in table.warnings.
    """
    root = Path(root)
    rows: list[ReportRow] = []
    warnings: list[str] = []
    stats_cache: dict[tuple, float | None] = {}

    for run_file in sorted(root.glob(RUN_GLOB)):
        try:
            run = RunRecord.model_validate(read_json(run_file))
        except (OSError, ValueError, ValidationError) as e:
            warnings.append(f"{run_file}: {type(e).__name__}")
            continue
        for eval_file in sorted((run_file.parent / "eval").glob("*/beam*/*.json")):
            try:
                result = EvaluationResult.model_validate(read_json(eval_file))
            except (OSError, ValueError, ValidationError) as e:
                warnings.append(f"{eval_file}: {type(e).__name__}")
                continue
            if not result.ok or result.score is None:
                logger.debug(f"Skipping errored result {eval_file}")
                continue
            rows.append(ReportRow(
                run_id=result.run_id,
                train_dataset=result.train_dataset,
                eval_dataset=result.eval_dataset.label,
                translator=run.translator.kind,
                subword_model=result.subword_model,
                vocab_size=result.vocab_size,
                train_limit=result.train_limit,
                metric=result.metric,
                beam=result.decode.beam_width,
                score=result.score,
                tokens_per_sentence=_tokens_per_sentence(run.variant, stats_cache),
            ))

    for warning in warnings:
        logger.warning(f"Skipped unreadable file {warning}")
    return ReportTable.from_rows(rows, warnings)
