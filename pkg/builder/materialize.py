"""
Variant materialization: splits -> pair filter -> normalization -> tokenizer
training -> encoded splits -> stats. The `build` entry point drives the
whole DatasetBuilder workflow for a config.
"""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from analyzers.corpus_stats import compute_stats, emit_stats
from builder.dataset_registry import (
    dataset_config,
    declared_refs,
    encoded_dir,
    enumerate_variants,
    ensure_layouts,
    filter_pairs,
    has_splits,
    normalized_dir,
    prepare_splits,
    read_splits,
    stats_dir,
    vocab_dir,
    write_corpus,
)
from builder.normalization import NormalizationPipeline
from builder.schemas import SPLIT_NAMES, ParallelCorpus, SplitSet, SubwordModel, VariantSpec
from lib import __version__
from lib.atomic_io import read_json, write_json_atomic
from lib.errors import SeqSurfError
from lib.settings import ExperimentConfig
from subword.tokenizer import TokenizerModel, load_tokenizer, train_tokenizer

logger = logging.getLogger("DatasetBuilder")

VARIANT_META = "meta.json"
NORMALIZATION_NOTE = "normalized after split derivation, at variant materialization"


@dataclass
class VariantOutcome:
    variant: VariantSpec
    status: str  # "new" | "existing" | "failed" | "missing"
    error: str | None = None


@dataclass
class BuildSummary:
    outcomes: list[VariantOutcome] = field(default_factory=list)
    created_dirs: list[Path] = field(default_factory=list)
    missing_datasets: list[str] = field(default_factory=list)

    def count(self, status: str) -> int:
        return sum(1 for o in self.outcomes if o.status == status)

    @property
    def ok(self) -> bool:
        return self.count("failed") == 0

    def line(self) -> str:
        return (
            f"{len(self.outcomes)} variants enumerated, {self.count('new')} new variants, "
            f"{self.count('existing')} existing, {self.count('failed')} failed, "
            f"{self.count('missing')} without data"
        )


def model_paths(variant: VariantSpec, lang: str) -> tuple[Path, Path]:
    """(model JSON, vocab file) for one side of a variant."""
    directory = vocab_dir(variant)
    return directory / f"{lang}.model.json", directory / f"{lang}.vocab"


def is_materialized(variant: VariantSpec) -> bool:
    if not (encoded_dir(variant) / VARIANT_META).is_file():
        return False
    return all(model_paths(variant, lang)[0].is_file() for lang in variant.dataset.language_pair)


def load_variant_tokenizers(variant: VariantSpec) -> tuple[TokenizerModel, TokenizerModel]:
    src, trg = variant.dataset.language_pair
    return load_tokenizer(model_paths(variant, src)[0]), load_tokenizer(model_paths(variant, trg)[0])


def variant_meta(variant: VariantSpec) -> dict:
    return read_json(encoded_dir(variant) / VARIANT_META)


def _normalize_splits(splits: SplitSet, pipeline: NormalizationPipeline) -> SplitSet:
    updates = {}
    for name in SPLIT_NAMES:
        corpus = splits.split(name)
        updates[name] = ParallelCorpus(
            src=tuple(pipeline.apply_all(corpus.src)),
            trg=tuple(pipeline.apply_all(corpus.trg)),
            metadata=corpus.metadata,
        )
    return splits.model_copy(update=updates)


def encode_lines(model: TokenizerModel, lines: Sequence[str]) -> list[str]:
    if model.scheme is SubwordModel.NONE:
        return list(lines)
    return [" ".join(model.tokenize(line)) for line in lines]


def prepared_splits(variant: VariantSpec, config: ExperimentConfig) -> SplitSet:
    """The variant's splits after the dataset's pair filter and the normalization pipeline."""
    splits = read_splits(variant.dataset)
    ds = dataset_config(config, variant.dataset.name)
    if ds.filter is not None:
        splits = filter_pairs(splits, ds.filter)
    return _normalize_splits(splits, NormalizationPipeline(variant.normalization))


def materialize_variant(variant: VariantSpec, config: ExperimentConfig, force: bool = False) -> str:
    """Returns "existing" when already built (and not forced), else "new"."""
    if is_materialized(variant) and not force:
        return "existing"

    ref = variant.dataset
    splits = prepared_splits(variant, config)
    if len(splits.train) == 0:
        raise SeqSurfError(f"{variant.label}: training split is empty after filtering", module="dataset_registry")

    # Same config normalization for every variant of a dataset.
    for name in SPLIT_NAMES:
        write_corpus(normalized_dir(ref), name, ref.src, ref.trg, splits.split(name))

    models = {}
    for lang, lines in ((ref.src, splits.train.src), (ref.trg, splits.train.trg)):
        model = train_tokenizer(variant, lines, config.subword_options)
        model_path, vocab_path = model_paths(variant, lang)
        model.save(model_path, vocab_path)
        models[lang] = model

    out_dir = encoded_dir(variant)
    for name in SPLIT_NAMES:
        corpus = splits.split(name)
        write_corpus(out_dir, name, ref.src, ref.trg, ParallelCorpus(
            src=tuple(encode_lines(models[ref.src], corpus.src)),
            trg=tuple(encode_lines(models[ref.trg], corpus.trg)),
        ))

    stats = compute_stats(splits, models[ref.src], models[ref.trg], dataset=ref.label, variant=variant.variant_dir)
    emit_stats(stats, stats_dir(variant))

    write_json_atomic(out_dir / VARIANT_META, {
        "variant": variant.model_dump(mode="json"),
        "variant_dir": variant.variant_dir,
        "normalization": NormalizationPipeline(variant.normalization).describe(),
        "normalization_note": NORMALIZATION_NOTE,
        "filter": None if (f := dataset_config(config, ref.name).filter) is None else f.model_dump(mode="json"),
        "counts": {name: len(splits.split(name)) for name in SPLIT_NAMES},
        "vocab_sizes": {lang: len(m.vocab) for lang, m in models.items()},
        "tokenizers": {
            lang: {"model": str(model_paths(variant, lang)[0]), "vocab": str(model_paths(variant, lang)[1])}
            for lang in ref.language_pair
        },
        "tokens_per_sentence": stats.splits["train"].trg.mean_length,
        "library_version": __version__,
    })
    logger.info(f"Materialized {variant.label}", extra={"variant": variant.label})
    return "new"


def _materialize_safely(variant: VariantSpec, config: ExperimentConfig, force: bool) -> VariantOutcome:
    if not has_splits(variant.dataset):
        return VariantOutcome(variant, "missing", "no splits on disk")
    try:
        return VariantOutcome(variant, materialize_variant(variant, config, force))
    except SeqSurfError as e:
        logger.error(f"Variant {variant.label} failed: {e}", extra={"variant": variant.label})
        return VariantOutcome(variant, "failed", str(e))


def build(
    config: ExperimentConfig,
    jobs: int = 1,
    force: bool = False,
    interactive: bool | None = None,
    confirm: Callable[[str], bool] | None = None,
) -> BuildSummary:
    """Layout, splits, then every variant of the config. Per-variant failures are recorded, not raised."""
    interactive = config.interactive if interactive is None else interactive
    refs = declared_refs(config)
    summary = BuildSummary()
    summary.created_dirs = ensure_layouts(refs, interactive=interactive, confirm=confirm)

    # Originals first: sized datasets are prefixes of their original splits.
    for ref in sorted(refs, key=lambda r: r.size_label != "original"):
        try:
            status = prepare_splits(ref, config, force=force)
        except SeqSurfError as e:
            logger.error(f"Splits for {ref.label} failed: {e}", extra={"dataset": ref.label})
            status = "missing"
        if status == "missing":
            summary.missing_datasets.append(ref.label)
            logger.warning(f"No raw data or splits for {ref.label}", extra={"dataset": ref.label})

    variants = enumerate_variants(config, refs)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        summary.outcomes = list(pool.map(lambda v: _materialize_safely(v, config, force), variants))
    logger.info(summary.line())
    return summary
