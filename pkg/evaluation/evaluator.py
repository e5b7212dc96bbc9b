"""
Evaluator: translates test sets through trained runs and scores them with
native or external metrics. Results land next to the run and in the
base-level evaluations.csv.
"""

import csv
import io
import logging
import threading
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path

from builder.dataset_registry import filter_pairs, has_splits, read_splits
from builder.normalization import NormalizationPipeline
from builder.schemas import DatasetRef, PairFilter
from evaluation.bleu import corpus_bleu
from evaluation.chrf import corpus_chrf
from evaluation.external_metric import external_metric
from evaluation.schemas import (
    EVALUATION_COLUMNS,
    EVALUATIONS_CSV,
    EvaluationFailure,
    EvaluationResult,
    RunEvaluation,
)
from lib.atomic_io import read_json, write_json_atomic, write_lines, write_text_atomic
from lib.errors import MetricError, SeqSurfError
from lib.settings import MetricConfig
from trainer.contract import BaseTranslator
from trainer.hub import JobRunner, translate, translator_for_run
from trainer.schemas import DecodeConfig, RunRecord, RunStatus

logger = logging.getLogger("Evaluator")

# name -> scorer returning an object with .score and .params()
NATIVE_METRICS: dict[str, Callable] = {
    "bleu": corpus_bleu,
    "chrf": corpus_chrf,
}

_csv_lock = threading.Lock()


def compatible_datasets(run: RunRecord, registry: Sequence[DatasetRef]) -> list[DatasetRef]:
    """The run's own dataset first, then every other dataset with the same language pair, sorted."""
    own = run.variant.dataset
    others = {
        ref.key: ref for ref in registry
        if ref.language_pair == own.language_pair and ref.key != own.key
    }
    return [own] + [others[k] for k in sorted(others)]


def eval_dir(run: RunRecord, dataset: DatasetRef, beam: int) -> Path:
    return run.run_dir / "eval" / dataset.label / f"beam{beam}"


def load_test_split(dataset: DatasetRef, pair_filter: PairFilter | None = None):
    if not has_splits(dataset):
        raise SeqSurfError(f"no splits for {dataset.label}", module="evaluation")
    splits = read_splits(dataset)
    if pair_filter is not None:
        splits = filter_pairs(splits, pair_filter)
    if len(splits.test) == 0:
        raise SeqSurfError(f"{dataset.label} has an empty test split", module="evaluation")
    return splits.test


def score_native(name: str, hyps: Sequence[str], refs: Sequence[str], params: Mapping) -> tuple[float, dict]:
    scorer = NATIVE_METRICS.get(name)
    if scorer is None:
        raise MetricError(f"unknown native metric '{name}'; known: {sorted(NATIVE_METRICS)}")
    try:
        result = scorer(hyps, refs, **params)
    except TypeError as e:
        raise MetricError(f"bad parameters for {name}: {e}") from e
    return result.score, result.params()


def _load_existing(run: RunRecord, dataset: DatasetRef, metrics: Sequence[MetricConfig], beam: int):
    directory = eval_dir(run, dataset, beam)
    results = []
    for metric in metrics:
        path = directory / f"{metric.name}.json"
        if not path.is_file():
            return None
        try:
            result = EvaluationResult.model_validate(read_json(path))
        except ValueError:
            return None
        if not result.ok:
            return None
        results.append(result)
    return results


def _evaluate_dataset(
    run: RunRecord,
    dataset: DatasetRef,
    metrics: Sequence[MetricConfig],
    decode: DecodeConfig,
    translator: BaseTranslator,
    pair_filter: PairFilter | None,
    force: bool,
) -> RunEvaluation:
    beam = decode.beam_width
    if not force and (existing := _load_existing(run, dataset, metrics, beam)) is not None:
        logger.info(f"{run.run_id} on {dataset.label} (beam {beam}) already evaluated", extra={"run_id": run.run_id})
        return RunEvaluation(results=existing)

    directory = eval_dir(run, dataset, beam)
    try:
        test = load_test_split(dataset, pair_filter)
        hyps = translate(run, test.src, decode, translator)
    except SeqSurfError as e:
        logger.error(f"{run.run_id} on {dataset.label}: {e}", extra={"run_id": run.run_id})
        return RunEvaluation(failures=[EvaluationFailure(run.run_id, dataset.label, beam, str(e))])

    refs = NormalizationPipeline(run.variant.normalization).apply_all(test.trg)
    hyp_path = write_lines(directory / "hyp.txt", hyps)
    ref_path = write_lines(directory / "ref.txt", refs)

    variant = run.variant
    results = []
    for metric in metrics:
        base = dict(
            run_id=run.run_id,
            train_dataset=variant.dataset.label,
            eval_dataset=dataset,
            translator=run.translator.kind,
            subword_model=variant.subword_model.value,
            vocab_size=variant.vocab_size,
            train_limit=variant.train_limit,
            metric=metric.name,
            params=dict(metric.params),
            decode=decode,
            hyp_path=str(hyp_path),
            ref_path=str(ref_path),
        )
        try:
            if metric.adapter is not None:
                score = external_metric(metric.adapter, hyp_path, ref_path, directory / "logs" / metric.name)
            else:
                score, params = score_native(metric.name, hyps, refs, metric.params)
                base["params"] = params
            result = EvaluationResult(**base, score=score)
        except MetricError as e:
            logger.error(f"{run.run_id} {metric.name} on {dataset.label}: {e}", extra={"run_id": run.run_id})
            result = EvaluationResult(**base, status="errored", error=str(e), raw_output=e.raw_output)
        write_json_atomic(directory / f"{metric.name}.json", result.model_dump(mode="json"))
        results.append(result)
    return RunEvaluation(results=results)


def evaluate_run(
    run: RunRecord,
    datasets: Sequence[DatasetRef],
    metrics: Sequence[MetricConfig],
    decode: DecodeConfig | Sequence[DecodeConfig] = DecodeConfig(),
    pair_filters: Mapping[str, PairFilter] | None = None,
    jobs: int = 1,
    translator: BaseTranslator | None = None,
    force: bool = False,
) -> RunEvaluation:
    """
    Every (dataset x beam x metric) for one trained run. A dataset whose
    translation fails is recorded in `failures`; the other datasets proceed.
    pair_filters maps dataset names to the filter their splits need.
    """
    if run.status is not RunStatus.TRAINED:
        raise SeqSurfError(f"run {run.run_id} is {run.status.value}, not trained", module="evaluation")
    decodes = [decode] if isinstance(decode, DecodeConfig) else list(decode)
    translator = translator or translator_for_run(run)
    pair_filters = pair_filters or {}

    combos = [(ds, d) for ds in datasets for d in decodes]
    work = [
        (
            f"{run.run_id} on {ds.label} beam {d.beam_width}",
            lambda ds=ds, d=d: _evaluate_dataset(run, ds, metrics, d, translator, pair_filters.get(ds.name), force),
        )
        for ds, d in combos
    ]
    evaluation = RunEvaluation()
    for (ds, d), outcome in zip(combos, JobRunner(jobs).run(work)):
        if outcome.result is not None:
            evaluation.extend(outcome.result)
        elif outcome.error is not None:
            evaluation.failures.append(EvaluationFailure(run.run_id, ds.label, d.beam_width, str(outcome.error)))

    upsert_evaluations(run.variant.dataset.base_path / EVALUATIONS_CSV, [r for r in evaluation.results if r.ok])
    return evaluation


def read_evaluations(path: Path) -> list[dict[str, str]]:
    if not path.is_file():
        return []
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def upsert_evaluations(path: Path, results: Sequence[EvaluationResult]) -> Path:
    """Replaces rows with the same (run_id, eval_dataset, metric, beam) key; rows stay sorted by key."""
    with _csv_lock:
        rows = {(r["run_id"], r["eval_dataset"], r["metric"], r["beam"]): r for r in read_evaluations(path)}
        for result in results:
            row = result.csv_row()
            rows[(row["run_id"], row["eval_dataset"], row["metric"], row["beam"])] = row
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=EVALUATION_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for key in sorted(rows, key=lambda k: (k[0], k[1], k[2], int(k[3]))):
            writer.writerow(rows[key])
        return write_text_atomic(path, buffer.getvalue())
