"""Workspace helpers shared by the test modules: configs, synthetic corpora, mock adapters."""

import json
import os
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO_ROOT))

from lib.settings import ExperimentConfig, parse_config  # noqa: E402
from scripts.synthetic_corpus import write_dataset  # noqa: E402

MOCK_TOOLKIT = REPO_ROOT / "tests" / "data" / "mock_toolkit.py"


def make_config(base_path: Path, **overrides) -> ExperimentConfig:
    """A small non-interactive config: one dataset, chars/bpe/bytes tokenizers, lexicon translator."""
    data = {
        "base_path": str(base_path),
        "interactive": False,
        "datasets": [{
            "name": "toy",
            "language_pairs": ["de-en"],
            "split": {"val_size": 5, "test_size": 5, "seed": 7},
        }],
        "normalization": ["strip", "lowercase"],
        "subword": {"bytes": [], "chars": [40], "bpe": [60]},
        "translators": [{"name": "lexicon"}],
        "decode": {"beams": [1]},
        "logging": {"level": "WARNING", "jsonl": False},
    }
    data.update(overrides)
    return parse_config(data)


def write_toy_corpus(base_path: Path, name: str = "toy", pair: str = "de-en", n_pairs: int = 60, **kwargs) -> Path:
    src, trg = pair.split("-")
    return write_dataset(base_path, name, src, trg, n_pairs, **kwargs)


def write_mock_manifest(directory: Path, name: str = "mock-copy", **flags: list[str]) -> Path:
    """
    An adapter manifest that runs tests/data/mock_toolkit.py with this interpreter.
    `flags` maps a stage name to extra argv items, e.g. train=["--fail"].
    """
    tool = [sys.executable, str(MOCK_TOOLKIT)]
    manifest = {
        "name": name,
        "version": "1",
        "capabilities": {"supports_beam": True, "resumable": False},
        "output_format": "tokens",
        "commands": [
            {"stage": "preprocess", "argv": [*tool, "preprocess", "--src", "{TRAIN_SRC}", "--trg", "{TRAIN_TRG}",
                                             "--model-dir", "{MODEL_DIR}", *flags.get("preprocess", [])]},
            {"stage": "train", "argv": [*tool, "train", "--model-dir", "{MODEL_DIR}", "--seed", "{SEED}",
                                        *flags.get("train", [])],
             "outputs": ["{MODEL_DIR}/checkpoint.txt"]},
            {"stage": "translate", "argv": [*tool, "translate", "--model-dir", "{MODEL_DIR}", "--input", "{INPUT}",
                                            "--output", "{OUTPUT}", "--beam", "{BEAM}", *flags.get("translate", [])],
             "outputs": ["{OUTPUT}"]},
        ],
    }
    path = directory / f"{name}.json"
    directory.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest), encoding="utf-8")
    return path


def write_metric_manifest(directory: Path, name: str = "line_match", extra: list[str] | None = None) -> Path:
    manifest = {
        "name": name,
        "commands": [{
            "stage": "score",
            "argv": [sys.executable, str(MOCK_TOOLKIT), "score", "--hyps", "{INPUT}", "--refs", "{OUTPUT}",
                     *(extra or [])],
        }],
    }
    path = directory / f"{name}.json"
    directory.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest), encoding="utf-8")
    return path


def clear_env() -> dict[str, str]:
    """Environment without the SEQSURF_* overrides, for patch.dict(os.environ, ..., clear=True)."""
    return {k: v for k, v in os.environ.items() if not k.startswith("SEQSURF_")}
