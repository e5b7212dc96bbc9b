"""
Deterministic built-in translators. Both work on normalized text and need
no external toolkit: identity copies the source, lexicon translates word by
word with a co-occurrence lexicon.
"""

import logging
from collections import Counter, defaultdict
from collections.abc import Sequence
from pathlib import Path

from builder.dataset_registry import normalized_dir, read_corpus
from builder.schemas import ParallelCorpus, VariantSpec
from lib.atomic_io import read_json, write_json_atomic
from lib.errors import StageFailedError
from lib.settings import TrainConfig
from trainer.contract import BaseTranslator
from trainer.schemas import DecodeConfig

logger = logging.getLogger("MetaTrainer")

LEXICON_FILE = "lexicon.json"
IDENTITY_FILE = "identity.json"


def learn_lexicon(train: ParallelCorpus) -> dict[str, str]:
    """
    For each source word, the target word co-occurring with it in the most
    aligned pairs; ties go to the lexicographically smallest target word.
    """
    cooccurrence: dict[str, Counter[str]] = defaultdict(Counter)
    for src, trg in zip(train.src, train.trg):
        trg_words = set(trg.split())
        for word in set(src.split()):
            cooccurrence[word].update(trg_words)

    lexicon = {}
    for word, counts in cooccurrence.items():
        if counts:
            lexicon[word] = min(counts, key=lambda t: (-counts[t], t))
    return dict(sorted(lexicon.items()))


def translate_with_lexicon(lexicon: dict[str, str], line: str) -> str:
    """Unseen source words map to themselves."""
    return " ".join(lexicon.get(word, word) for word in line.split())


class _NormalizedTextTranslator(BaseTranslator):
    output_format = "text"

    def preprocess(self, variant: VariantSpec, run_dir: Path) -> dict[str, Path]:
        ref = variant.dataset
        directory = normalized_dir(ref)
        prepared = {
            "TRAIN_SRC": directory / f"train.{ref.src}",
            "TRAIN_TRG": directory / f"train.{ref.trg}",
            "VAL_SRC": directory / f"val.{ref.src}",
            "VAL_TRG": directory / f"val.{ref.trg}",
        }
        missing = [str(p) for p in prepared.values() if not p.is_file()]
        if missing:
            raise StageFailedError("preprocess", None, "", f"normalized splits missing: {missing}")
        return prepared


class IdentityTranslator(_NormalizedTextTranslator):
    name = "identity"

    def train(self, prepared: dict[str, Path], train_config: TrainConfig, model_dir: Path) -> dict[str, Path]:
        path = write_json_atomic(model_dir / IDENTITY_FILE, {"kind": self.name, "version": self.version})
        return {"model": path}

    def translate(self, artifacts: dict[str, Path], source: Sequence[str], decode: DecodeConfig, work_dir: Path) -> list[str]:
        return list(source)


class LexiconTranslator(_NormalizedTextTranslator):
    name = "lexicon"

    def train(self, prepared: dict[str, Path], train_config: TrainConfig, model_dir: Path) -> dict[str, Path]:
        src_path, trg_path = prepared["TRAIN_SRC"], prepared["TRAIN_TRG"]
        # read_corpus wants <dir>/<stem>.<lang>
        corpus = read_corpus(src_path.parent, "train", src_path.suffix[1:], trg_path.suffix[1:])
        lexicon = learn_lexicon(corpus)
        path = write_json_atomic(model_dir / LEXICON_FILE, lexicon)
        logger.info(f"Lexicon with {len(lexicon)} entries written to {path}")
        return {"model": path}

    def translate(self, artifacts: dict[str, Path], source: Sequence[str], decode: DecodeConfig, work_dir: Path) -> list[str]:
        lexicon = read_json(artifacts["model"])
        return [translate_with_lexicon(lexicon, line) for line in source]


BUILTIN_REGISTRY: dict[str, type[BaseTranslator]] = {
    IdentityTranslator.name: IdentityTranslator,
    LexiconTranslator.name: LexiconTranslator,
}
