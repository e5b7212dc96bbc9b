import unittest
from unittest.mock import patch
import sys
import os
import csv
import io
import json
import tempfile
from pathlib import Path
from xml.etree import ElementTree

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tests.fixtures import clear_env, write_mock_manifest, write_toy_corpus
from builder.dataset_registry import enumerate_variants, read_splits
from builder.normalization import NormalizationPipeline
from builder.schemas import ParallelCorpus
from evaluation.bleu import score_bleu
from evaluation.evaluator import read_evaluations
from lib.settings import ExperimentConfig, load_config
from trainer.builtin import learn_lexicon, translate_with_lexicon
from main import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, main


DEFAULT_DATASETS = """[[datasets]]
name = "toy"
language_pairs = ["de-en"]
split = { val_size = 5, test_size = 5, seed = 7 }"""

TWO_DATASETS = """[[datasets]]
name = "toy"
language_pairs = ["de-en"]
split = { val_size = 50, test_size = 100, seed = 7 }

[[datasets]]
name = "bio"
language_pairs = ["de-en"]
split = { val_size = 20, test_size = 60, seed = 7 }"""


def _lexicon_bleu_oracle(config: ExperimentConfig, train: str, test: str) -> float:
    """BLEU of a lexicon learned directly from `train`'s normalized training split on `test`'s test split."""
    variants = {v.dataset.name: v for v in enumerate_variants(config)}
    pipeline = NormalizationPipeline(variants[train].normalization)
    train_split = read_splits(variants[train].dataset).train
    lexicon = learn_lexicon(ParallelCorpus(
        src=tuple(pipeline.apply_all(train_split.src)), trg=tuple(pipeline.apply_all(train_split.trg)),
    ))
    test_split = read_splits(variants[test].dataset).test
    hyps = [translate_with_lexicon(lexicon, line) for line in pipeline.apply_all(test_split.src)]
    return score_bleu(hyps, pipeline.apply_all(test_split.trg))


def _config_text(manifest: Path, datasets: str = DEFAULT_DATASETS, reports: bool = True) -> str:
    text = f"""
base_path = "datasets"
interactive = false
normalization = ["strip", "lowercase"]

{datasets}

[subword]
"bytes" = []
"chars" = [40]

[[translators]]
name = "lexicon"

[[translators]]
name = "mock-copy"
manifest = {json.dumps(str(manifest))}

[[metrics]]
name = "bleu"

[[metrics]]
name = "chrf"

[decode]
beams = [1]

[logging]
level = "WARNING"
jsonl = true
"""
    if reports:
        text += """
[[reports]]
name = "by_model"
kind = "metric"
group_by = ["subword_model"]
metrics = ["bleu", "chrf"]

[[reports]]
name = "matrix"
kind = "cross_dataset"

[[reports]]
name = "copy_vs_lexicon"
kind = "comparison"
system_a = "mock-copy"
system_b = "lexicon"

[[reports]]
name = "bleu_and_length"
kind = "multivariable"
x = "vocab_size"
series_by = "translator"
y = [{ variable = "bleu" }, { variable = "tokens_per_sentence", axis = "secondary" }]
"""
    return text


class TestCli(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.base = self.root / "datasets"
        self.base.mkdir()
        self.manifest = write_mock_manifest(self.root / "adapters", "mock-copy")
        self.config = self.root / "seqsurf.toml"
        self.env = patch.dict(os.environ, clear_env(), clear=True)
        self.env.start()

    def tearDown(self):
        self.env.stop()
        self.tmp.cleanup()

    def _run(self, *args: str) -> int:
        return main([args[0], "--config", str(self.config), *args[1:]])

    def test_full_workflow(self):
        """Test build, stats, fit, evaluate and report end to end on two same-pair synthetic corpora."""
        write_toy_corpus(self.base, n_pairs=1000)
        write_toy_corpus(self.base, name="bio", n_pairs=300, seed=99, domain="bio")
        self.config.write_text(_config_text(self.manifest, datasets=TWO_DATASETS), encoding="utf-8")

        self.assertEqual(self._run("build"), EXIT_OK)
        dataset_root = self.base / "toy" / "de-en" / "original"
        self.assertTrue((dataset_root / "data" / "encoded" / "chars_40" / "meta.json").is_file())
        self.assertTrue((dataset_root / "vocabs" / "bytes" / "de.vocab").is_file())

        self.assertEqual(self._run("stats"), EXIT_OK)
        self.assertTrue((dataset_root / "stats" / "splits" / "stats.json").is_file())
        self.assertTrue((dataset_root / "stats" / "chars_40" / "plot_lengths.svg").is_file())

        self.assertEqual(self._run("fit", "--jobs", "2"), EXIT_OK)
        runs = sorted(p.name for p in (dataset_root / "models").iterdir())
        self.assertEqual(runs, [
            "toy_de-en_original_bytes_lexicon", "toy_de-en_original_bytes_mock-copy",
            "toy_de-en_original_chars_40_lexicon", "toy_de-en_original_chars_40_mock-copy",
        ])
        self.assertEqual(len(list((self.base / "bio" / "de-en" / "original" / "models").iterdir())), 4)

        # 8 runs x 2 metrics on their own test set, then again on the other dataset
        self.assertEqual(self._run("evaluate", "--scope", "own"), EXIT_OK)
        self.assertEqual(len(read_evaluations(self.base / "evaluations.csv")), 16)
        self.assertEqual(self._run("evaluate", "--scope", "compatible"), EXIT_OK)
        rows = read_evaluations(self.base / "evaluations.csv")
        self.assertEqual(len(rows), 32)

        config = load_config(self.config)
        lexicon_rows = [r for r in rows if r["metric"] == "bleu" and r["run_id"].endswith("_lexicon")]
        self.assertEqual(len(lexicon_rows), 8)
        for row in lexicon_rows:
            train, test = row["train_dataset"].split("_")[0], row["eval_dataset"].split("_")[0]
            with self.subTest(run=row["run_id"], eval=test):
                self.assertAlmostEqual(float(row["score"]), _lexicon_bleu_oracle(config, train, test), delta=0.01)
        copy_score = next(
            float(r["score"]) for r in rows
            if r["run_id"] == "toy_de-en_original_bytes_mock-copy" and r["metric"] == "bleu"
            and r["eval_dataset"] == "toy_de-en_original"
        )
        self.assertGreater(_lexicon_bleu_oracle(config, "toy", "toy"), copy_score)

        self.assertEqual(self._run("report"), EXIT_OK)
        reports = self.base / "reports"
        self.assertTrue((reports / "collected.csv").is_file())
        for name in ("by_model", "matrix", "copy_vs_lexicon", "bleu_and_length"):
            self.assertTrue((reports / name / "report.csv").is_file(), name)
        summary = json.loads((reports / "copy_vs_lexicon" / "report.json").read_text(encoding="utf-8"))
        # (train dataset, eval dataset, subword model, vocab size) keys
        self.assertEqual(summary["summary"]["pairs"], 8)
        self.assertTrue((self.base / "logs").is_dir())
        self._assert_outputs_parse(self.base)

    def _assert_outputs_parse(self, root: Path) -> None:
        seen = {".csv": 0, ".json": 0, ".jsonl": 0, ".svg": 0}
        for path in sorted(root.rglob("*")):
            if path.suffix not in seen:
                continue
            seen[path.suffix] += 1
            with self.subTest(path=str(path.relative_to(root))):
                if path.suffix == ".csv":
                    with open(path, newline="", encoding="utf-8") as f:
                        table = list(csv.reader(f))
                    self.assertTrue(table)
                    self.assertEqual({len(r) for r in table}, {len(table[0])})
                elif path.suffix == ".json":
                    json.loads(path.read_text(encoding="utf-8"))
                elif path.suffix == ".jsonl":
                    for line in path.read_text(encoding="utf-8").splitlines():
                        if line.strip():
                            json.loads(line)
                else:
                    self.assertEqual(ElementTree.parse(path).getroot().tag, "{http://www.w3.org/2000/svg}svg")
        for suffix in (".csv", ".json", ".svg"):
            self.assertGreater(seen[suffix], 0, suffix)

    def test_selectors_narrow_the_work(self):
        write_toy_corpus(self.base, n_pairs=40)
        self.config.write_text(_config_text(self.manifest, reports=False), encoding="utf-8")
        self.assertEqual(self._run("build"), EXIT_OK)
        self.assertEqual(self._run("fit", "--variant", "bytes", "--translator", "lexicon"), EXIT_OK)
        runs = [p.name for p in (self.base / "toy" / "de-en" / "original" / "models").iterdir()]
        self.assertEqual(runs, ["toy_de-en_original_bytes_lexicon"])
        self.assertEqual(self._run("fit", "--translator", "nope"), EXIT_FATAL)

    def test_fit_without_data_is_partial(self):
        """Test that a declared dataset without data builds cleanly but cannot be fitted."""
        self.config.write_text(_config_text(self.manifest, reports=False), encoding="utf-8")
        self.assertEqual(self._run("build"), EXIT_OK)
        self.assertEqual(self._run("fit", "--translator", "lexicon"), EXIT_PARTIAL)

    def test_duplicate_variants_are_fatal(self):
        datasets = """[[datasets]]
name = "toy"
language_pairs = ["de-en"]

[[datasets]]
name = "toy"
language_pairs = ["de-en"]"""
        self.config.write_text(_config_text(self.manifest, datasets=datasets, reports=False), encoding="utf-8")
        self.assertEqual(self._run("build"), EXIT_FATAL)

    def test_undefined_report_is_fatal(self):
        self.config.write_text(_config_text(self.manifest), encoding="utf-8")
        self.assertEqual(self._run("report", "--name", "nope"), EXIT_FATAL)

    def test_bad_config(self):
        self.assertEqual(self._run("build"), EXIT_FATAL)
        self.config.write_text('base_path = "datasets"\nunknown_key = 1\n', encoding="utf-8")
        self.assertEqual(self._run("build"), EXIT_FATAL)

    def test_schema_prints_json(self):
        with patch("sys.stdout", new_callable=io.StringIO) as out:
            self.assertEqual(main(["schema"]), EXIT_OK)
        schema = json.loads(out.getvalue())
        self.assertIn("base_path", schema["properties"])

    def test_base_path_from_environment(self):
        other = self.root / "elsewhere"
        other.mkdir()
        write_toy_corpus(other, n_pairs=40)
        self.config.write_text(_config_text(self.manifest, reports=False), encoding="utf-8")
        with patch.dict(os.environ, {"SEQSURF_BASE_PATH": str(other)}):
            self.assertEqual(self._run("build"), EXIT_OK)
        self.assertTrue((other / "toy" / "de-en" / "original" / "data" / "splits" / "train.de").is_file())


if __name__ == '__main__':
    unittest.main()
