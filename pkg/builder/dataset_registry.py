"""
Dataset registry: canonical layout, indexing, splits, size subsets,
variant enumeration and pair filtering.

Layout under <base>/<name>/<src>-<trg>/<size_label>/:
    data/raw/  data/splits/  data/normalized/  data/encoded/
    vocabs/  models/  stats/  reports/
"""

import logging
import os
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from builder.schemas import (
    ORIGINAL_SIZE,
    SPLIT_NAMES,
    DatasetRef,
    PairFilter,
    ParallelCorpus,
    SplitPolicy,
    SplitSet,
    VariantSpec,
)
from lib.atomic_io import read_json, read_lines, write_json_atomic, write_lines
from lib.errors import DatasetError, DuplicateVariantError, LayoutDeclined, LayoutError, SplitError
from lib.settings import DatasetConfig, ExperimentConfig

logger = logging.getLogger("DatasetRegistry")

LAYOUT_DIRS = (
    "data/raw",
    "data/splits",
    "data/normalized",
    "data/encoded",
    "vocabs",
    "models",
    "stats",
    "reports",
)
RAW_STEM = "data"
META_SUFFIX = ".meta"
SPLITS_META = "meta.json"


@dataclass
class DatasetIndex:
    refs: list[DatasetRef] = field(default_factory=list)
    missing: list[DatasetRef] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.refs)


# --- Paths -------------------------------------------------------------------

def splits_dir(ref: DatasetRef) -> Path:
    return ref.root / "data" / "splits"


def raw_dir(ref: DatasetRef) -> Path:
    return ref.root / "data" / "raw"


def normalized_dir(ref: DatasetRef) -> Path:
    return ref.root / "data" / "normalized"


def encoded_dir(variant: VariantSpec) -> Path:
    return variant.dataset.root / "data" / "encoded" / variant.variant_dir


def vocab_dir(variant: VariantSpec) -> Path:
    return variant.dataset.root / "vocabs" / variant.variant_dir


def stats_dir(variant: VariantSpec) -> Path:
    return variant.dataset.root / "stats" / variant.variant_dir


def models_dir(ref: DatasetRef) -> Path:
    return ref.root / "models"


def split_file(ref: DatasetRef, split: str, lang: str) -> Path:
    return splits_dir(ref) / f"{split}.{lang}"


# --- Declared datasets ---------------------------------------------------------

def declared_refs(config: ExperimentConfig, base_path: Path | None = None) -> list[DatasetRef]:
    """Every (name x language pair x size label) the config declares, in config order."""
    base = base_path or config.base_path
    refs = []
    for ds in config.datasets:
        for src, trg in ds.pairs():
            for size in ds.sizes:
                refs.append(DatasetRef(
                    name=ds.name, src=src, trg=trg, size_label=size.label,
                    base_path=base, allow_same_language=ds.allow_same_language,
                ))
    return refs


def dataset_config(config: ExperimentConfig, name: str) -> DatasetConfig:
    for ds in config.datasets:
        if ds.name == name:
            return ds
    raise DatasetError(f"dataset '{name}' is not declared in the config")


def train_limit_for(config: ExperimentConfig, ref: DatasetRef) -> int | None:
    try:
        return dataset_config(config, ref.name).limit_for(ref.size_label)
    except KeyError:
        raise DatasetError(f"size label '{ref.size_label}' is not declared for dataset '{ref.name}'") from None


# --- Layout ------------------------------------------------------------------

def missing_layout(ref: DatasetRef) -> list[Path]:
    return [ref.root / d for d in LAYOUT_DIRS if not (ref.root / d).is_dir()]


def ensure_layouts(
    refs: list[DatasetRef],
    interactive: bool = False,
    confirm: Callable[[str], bool] | None = None,
) -> list[Path]:
    """
    Creates the canonical directories for every ref; returns the ones created.
    In interactive mode every directory is confirmed first and nothing is
    created unless all are accepted.
    """
    needed = [path for ref in refs for path in missing_layout(ref)]
    if not needed:
        return []

    if interactive:
        if confirm is None:
            from ui.console import confirm as console_confirm
            confirm = console_confirm
        for path in needed:
            if not confirm(f"Create directory {path}?"):
                logger.warning(f"Layout creation declined at {path}")
                raise LayoutDeclined(f"user declined creating {path}; nothing was created")

    created = []
    for path in needed:
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise LayoutError(f"cannot create {path}: {e}") from e
        created.append(path)
    logger.info(f"Created {len(created)} directories")
    return created


def ensure_layout(
    ref: DatasetRef,
    interactive: bool = False,
    confirm: Callable[[str], bool] | None = None,
) -> list[Path]:
    return ensure_layouts([ref], interactive, confirm)


# --- Reading / writing corpora -----------------------------------------------

def _read_metadata(directory: Path, stem: str) -> dict[str, tuple[str, ...]]:
    metadata = {}
    for path in sorted(directory.glob(f"{stem}.*{META_SUFFIX}")):
        column = path.name[len(stem) + 1:-len(META_SUFFIX)]
        if column:
            metadata[column] = tuple(read_lines(path))
    return metadata


def read_corpus(directory: Path, stem: str, src: str, trg: str) -> ParallelCorpus:
    src_path, trg_path = directory / f"{stem}.{src}", directory / f"{stem}.{trg}"
    try:
        return ParallelCorpus(
            src=tuple(read_lines(src_path)),
            trg=tuple(read_lines(trg_path)),
            metadata=_read_metadata(directory, stem),
        )
    except ValueError as e:
        raise DatasetError(f"{directory}: {e}") from e


def write_corpus(directory: Path, stem: str, src: str, trg: str, corpus: ParallelCorpus) -> None:
    write_lines(directory / f"{stem}.{src}", corpus.src)
    write_lines(directory / f"{stem}.{trg}", corpus.trg)
    for column, values in corpus.metadata.items():
        write_lines(directory / f"{stem}.{column}{META_SUFFIX}", values)


def has_raw(ref: DatasetRef) -> bool:
    return all((raw_dir(ref) / f"{RAW_STEM}.{lang}").is_file() for lang in ref.language_pair)


def has_splits(ref: DatasetRef) -> bool:
    return all(split_file(ref, s, lang).is_file() for s in SPLIT_NAMES for lang in ref.language_pair)


def read_raw(ref: DatasetRef) -> ParallelCorpus:
    return read_corpus(raw_dir(ref), RAW_STEM, ref.src, ref.trg)


def read_splits(ref: DatasetRef) -> SplitSet:
    directory = splits_dir(ref)
    meta_path = directory / SPLITS_META
    meta = read_json(meta_path) if meta_path.is_file() else {}
    return SplitSet(
        train=read_corpus(directory, "train", ref.src, ref.trg),
        val=read_corpus(directory, "val", ref.src, ref.trg),
        test=read_corpus(directory, "test", ref.src, ref.trg),
        provenance=meta.get("provenance", "given_splits"),
        seed=meta.get("seed"),
    )


def write_splits(ref: DatasetRef, splits: SplitSet, **extra_meta: object) -> None:
    directory = splits_dir(ref)
    for name in SPLIT_NAMES:
        write_corpus(directory, name, ref.src, ref.trg, splits.split(name))
    write_json_atomic(directory / SPLITS_META, {
        "provenance": splits.provenance,
        "seed": splits.seed,
        "counts": {name: len(splits.split(name)) for name in SPLIT_NAMES},
        **extra_meta,
    })


# --- Indexing ----------------------------------------------------------------

def _check_split_layout(ref: DatasetRef) -> None:
    present = [split_file(ref, s, lang).is_file() for s in SPLIT_NAMES for lang in ref.language_pair]
    if not all(present):
        raise DatasetError(f"{splits_dir(ref)} is incomplete: expected train/val/test for {ref.pair_label}")
    for split in SPLIT_NAMES:
        with open(split_file(ref, split, ref.src), "rb") as f_src, open(split_file(ref, split, ref.trg), "rb") as f_trg:
            n_src, n_trg = sum(1 for _ in f_src), sum(1 for _ in f_trg)
        if n_src != n_trg:
            raise DatasetError(f"{split} split of {ref.label} is misaligned ({n_src} vs {n_trg} lines)")


def index_datasets(base_path: str | Path, config: ExperimentConfig) -> DatasetIndex:
    """
    One DatasetRef per declared (name x pair x size) whose split files exist.
    Missing datasets and per-dataset layout errors are reported separately.
    """
    base = Path(base_path)
    if not base.is_dir() or not os.access(base, os.R_OK | os.X_OK):
        raise DatasetError(f"base path {base} is not a readable directory")

    index = DatasetIndex()
    for ref in declared_refs(config, base):
        split_dir = splits_dir(ref)
        if not split_dir.is_dir() or not any(split_dir.iterdir()):
            index.missing.append(ref)
            continue
        try:
            _check_split_layout(ref)
        except DatasetError as e:
            logger.error(str(e))
            index.errors[ref.label] = str(e)
            continue
        index.refs.append(ref)
    logger.info(f"Indexed {len(index.refs)} datasets ({len(index.missing)} missing, {len(index.errors)} with errors)")
    return index


# --- Splits and subsets ------------------------------------------------------

def make_splits(raw: ParallelCorpus, policy: SplitPolicy) -> SplitSet:
    """
    Deterministic partition: val and test come from the tail of a seeded
    shuffle; train is the remainder. Every split keeps raw corpus order.
    """
    held_out = policy.val_size + policy.test_size
    if len(raw) <= held_out:
        raise SplitError(
            f"corpus too small: {len(raw)} pairs, need at least {held_out + 1} "
            f"for val={policy.val_size} and test={policy.test_size}"
        )
    order = np.random.default_rng(policy.seed).permutation(len(raw))
    n_train = len(raw) - held_out
    train_idx = sorted(int(i) for i in order[:n_train])
    val_idx = sorted(int(i) for i in order[n_train:n_train + policy.val_size])
    test_idx = sorted(int(i) for i in order[n_train + policy.val_size:])
    return SplitSet(
        train=raw.select(train_idx),
        val=raw.select(val_idx),
        test=raw.select(test_idx),
        provenance="derived_from_raw",
        seed=policy.seed,
    )


def subset_training(splits: SplitSet, limit: int) -> SplitSet:
    """Keeps the first `limit` training pairs; val and test are untouched."""
    if limit < 1:
        raise SplitError(f"training limit must be >= 1, got {limit}")
    return splits.model_copy(update={"train": splits.train.head(limit)})


def prepare_splits(ref: DatasetRef, config: ExperimentConfig, force: bool = False) -> str:
    """
    Materializes data/splits for a declared ref when they are missing.
    Returns "present" (already on disk), "derived", "subset" or "missing".
    """
    if has_splits(ref) and not force:
        return "present"
    ds = dataset_config(config, ref.name)
    if ref.size_label == ORIGINAL_SIZE:
        if not has_raw(ref):
            return "present" if has_splits(ref) else "missing"
        splits = make_splits(read_raw(ref), ds.split)
        write_splits(ref, splits)
        logger.info(f"Derived splits for {ref.label}: " + ", ".join(f"{n}={len(splits.split(n))}" for n in SPLIT_NAMES))
        return "derived"

    source = ref.model_copy(update={"size_label": ORIGINAL_SIZE})
    if not has_splits(source):
        if has_raw(source):
            prepare_splits(source, config)
        elif has_raw(ref):
            # Raw data placed directly under the sized dataset.
            splits = make_splits(read_raw(ref), ds.split)
            write_splits(ref, subset_training(splits, ds.limit_for(ref.size_label) or len(splits.train)))
            return "derived"
        else:
            return "missing"
    limit = ds.limit_for(ref.size_label)
    assert limit is not None
    splits = subset_training(read_splits(source), limit)
    write_splits(ref, splits, source_size_label=ORIGINAL_SIZE, train_limit=limit)
    logger.info(f"Subset {ref.label}: first {len(splits.train)} training pairs of {source.label}")
    return "subset"


# --- Variants ----------------------------------------------------------------

def enumerate_variants(config: ExperimentConfig, refs: list[DatasetRef] | None = None) -> list[VariantSpec]:
    """
    Cross product of datasets and (subword model, vocab size) pairs, ordered
    by dataset, then model, then descending vocab size.
    """
    refs = declared_refs(config) if refs is None else refs
    plan = config.vocab_plan()
    variants = []
    for ref in refs:
        limit = train_limit_for(config, ref)
        for model, vocab_size in plan:
            variants.append(VariantSpec(
                dataset=ref,
                normalization=tuple(config.normalization),
                subword_model=model,
                vocab_size=vocab_size,
                train_limit=limit,
            ))

    counts = Counter(v.key for v in variants)
    duplicates = sorted({v.label for v in variants if counts[v.key] > 1})
    if duplicates:
        raise DuplicateVariantError(duplicates)
    return variants


# --- Filtering ---------------------------------------------------------------

def _leading_token(line: str) -> str:
    parts = line.split(maxsplit=1)
    return parts[0] if parts else ""


def _strip_leading(line: str, tag: str) -> str:
    if _leading_token(line) != tag:
        return line
    return line.lstrip()[len(tag):].lstrip()


def _filter_corpus(corpus: ParallelCorpus, predicate: PairFilter) -> ParallelCorpus:
    column = predicate.metadata_column
    if column is not None:
        if column not in corpus.metadata:
            if len(corpus) == 0:
                return corpus
            raise DatasetError(f"pair filter '{predicate.kind}' needs metadata column '{column}'")
        values = corpus.metadata[column]
        keep = [i for i, v in enumerate(values) if v.strip() == predicate.value]
        return corpus.select(keep)

    keep = [i for i, line in enumerate(corpus.src) if _leading_token(line) == predicate.value]
    kept = corpus.select(keep)
    if not predicate.strip_tag:
        return kept
    return ParallelCorpus(
        src=tuple(_strip_leading(line, predicate.value) for line in kept.src),
        trg=tuple(_strip_leading(line, predicate.value) for line in kept.trg),
        metadata=kept.metadata,
    )


def filter_pairs(splits: SplitSet, predicate: PairFilter) -> SplitSet:
    """Keeps the pairs matching `predicate` in every split, alignment intact."""
    return splits.model_copy(update={
        name: _filter_corpus(splits.split(name), predicate) for name in SPLIT_NAMES
    })
