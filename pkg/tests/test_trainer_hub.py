import unittest
from unittest.mock import patch
import sys
import os
import json
import tempfile
from pathlib import Path

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tests.fixtures import make_config, write_mock_manifest, write_toy_corpus
from builder.dataset_registry import enumerate_variants, read_splits
from builder.materialize import build
from builder.normalization import NormalizationPipeline
from builder.schemas import ParallelCorpus
from lib.errors import ConfigError, ContractViolationError, SeqSurfError, TemplateError, VariantNotMaterializedError
from lib.settings import TranslatorConfig
from trainer import JobRunner, fit, fit_all, load_run, load_translator, make_run_id, render_command, translate
from trainer.builtin import learn_lexicon, translate_with_lexicon
from trainer.schemas import CommandTemplate, DecodeConfig, RunStatus, Stage


class TestRenderCommand(unittest.TestCase):

    def test_substitutes_placeholders_without_a_shell(self):
        template = CommandTemplate(stage=Stage.TRANSLATE, argv=["tool", "--in", "{INPUT}", "--out={OUTPUT}", "-b", "{BEAM}"])
        argv = render_command(template, {"INPUT": "a b; rm -rf /", "OUTPUT": Path("/o.txt"), "BEAM": 5})
        self.assertEqual(argv, ["tool", "--in", "a b; rm -rf /", "--out=/o.txt", "-b", "5"])

    def test_unbound_placeholder(self):
        template = CommandTemplate(stage=Stage.TRAIN, argv=["tool", "{MODEL_DIR}", "{SEED}"])
        with self.assertRaises(TemplateError) as ctx:
            render_command(template, {"MODEL_DIR": "/m"})
        self.assertIn("SEED unbound in train template", str(ctx.exception))

    def test_unknown_placeholder_is_rejected_by_the_manifest(self):
        with self.assertRaises(ValueError):
            CommandTemplate(stage=Stage.TRAIN, argv=["tool", "{EPOCHS}"])
        with self.assertRaises(ValueError):
            CommandTemplate(stage=Stage.TRANSLATE, argv=["tool", "{INPUT}"])


class TestLexicon(unittest.TestCase):

    def test_learns_the_most_frequent_cooccurrence(self):
        train = ParallelCorpus(src=("a b", "a c", "b"), trg=("x y", "x z", "y"))
        lexicon = learn_lexicon(train)
        self.assertEqual(lexicon, {"a": "x", "b": "y", "c": "x"})
        self.assertEqual(translate_with_lexicon(lexicon, "a q b"), "x q y")


class TestJobRunner(unittest.TestCase):

    def test_failures_are_captured_in_order(self):
        def boom():
            raise SeqSurfError("boom")

        outcomes = JobRunner(jobs=3).run([("one", lambda: 1), ("two", boom), ("three", lambda: 3)])
        self.assertEqual([o.key for o in outcomes], ["one", "two", "three"])
        self.assertEqual([o.ok for o in outcomes], [True, False, True])
        self.assertEqual(outcomes[2].result, 3)
        self.assertIn("boom", str(outcomes[1].error))


class TestTrainerHub(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.base = Path(cls.tmp.name) / "datasets"
        cls.base.mkdir()
        write_toy_corpus(cls.base, n_pairs=60)
        cls.config = make_config(cls.base)
        summary = build(cls.config)
        assert summary.ok, summary.line()
        cls.variants = {v.variant_dir: v for v in enumerate_variants(cls.config)}
        cls.adapters = Path(cls.tmp.name) / "adapters"

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_lexicon_fit_and_translate(self):
        """Test that a built-in run trains, persists its record and translates line for line."""
        variant = self.variants["chars_40"]
        translator = load_translator(TranslatorConfig(name="lexicon"))
        record = fit(translator, variant, self.config.train)

        self.assertEqual(record.status, RunStatus.TRAINED)
        self.assertEqual(record.run_id, make_run_id(variant, "lexicon"))
        self.assertTrue((record.run_dir / "run.json").is_file())
        self.assertEqual(load_run(record.run_dir).status, RunStatus.TRAINED)

        source = read_splits(variant.dataset).test.src
        hyps = translate(record, source, DecodeConfig(beam_width=1))
        self.assertEqual(len(hyps), len(source))

    def test_trained_run_is_reused_unless_forced(self):
        variant = self.variants["bytes"]
        translator = load_translator(TranslatorConfig(name="identity"))
        first = fit(translator, variant)
        with patch.object(translator, "train", wraps=translator.train) as train:
            again = fit(translator, variant)
            self.assertEqual(again.created_at, first.created_at)
            train.assert_not_called()
            forced = fit(translator, variant, force=True)
            train.assert_called_once()
        self.assertEqual(forced.status, RunStatus.TRAINED)

    def test_external_adapter_roundtrip(self):
        """Test that token output from a copying toolkit detokenizes back to the normalized source."""
        manifest = write_mock_manifest(self.adapters, "mock-copy")
        translator = load_translator(TranslatorConfig(name="mock-copy", manifest=manifest))
        variant = self.variants["bytes"]
        record = fit(translator, variant, self.config.train)

        self.assertEqual(record.status, RunStatus.TRAINED, record.failure)
        self.assertTrue((record.run_dir / "model" / "prepared.txt").is_file())
        self.assertTrue(Path(record.artifacts["output_0"]).is_file())
        self.assertTrue((record.run_dir / "logs" / "train.log").is_file())

        source = read_splits(variant.dataset).test.src
        hyps = translate(record, source, DecodeConfig(beam_width=5))
        self.assertEqual(hyps, NormalizationPipeline(variant.normalization).apply_all(source))

    def test_failing_train_produces_a_failed_record(self):
        manifest = write_mock_manifest(self.adapters, "mock-fail", train=["--fail"])
        translator = load_translator(TranslatorConfig(name="mock-fail", manifest=manifest))
        record = fit(translator, self.variants["bytes"])

        self.assertEqual(record.status, RunStatus.FAILED)
        self.assertEqual(record.failure.stage, "train")
        self.assertEqual(record.failure.exit_code, 1)
        self.assertIn("training diverged", record.failure.log_tail)
        entries = [json.loads(line) for line in (record.run_dir / "logs" / "run.jsonl").read_text().splitlines()]
        self.assertTrue(any(e.get("run_id") == record.run_id and e["level"] == "ERROR" for e in entries))
        with self.assertRaises(SeqSurfError):
            translate(record, ["a"])

    def test_short_output_violates_the_contract(self):
        """Test that an adapter returning N-1 lines for N inputs is rejected."""
        manifest = write_mock_manifest(self.adapters, "mock-short", translate=["--drop-last"])
        translator = load_translator(TranslatorConfig(name="mock-short", manifest=manifest))
        record = fit(translator, self.variants["bytes"])
        self.assertEqual(record.status, RunStatus.TRAINED)
        with self.assertRaises(ContractViolationError) as ctx:
            translate(record, ["a b", "c d", "e f"], translator=translator)
        self.assertEqual((ctx.exception.expected, ctx.exception.got), (3, 2))

    def test_unmaterialized_variant(self):
        variant = self.variants["bpe_60"].model_copy(update={"vocab_size": 70})
        with self.assertRaises(VariantNotMaterializedError):
            fit(load_translator(TranslatorConfig(name="identity")), variant)

    def test_beam_warning_for_unsupported_translator(self):
        translator = load_translator(TranslatorConfig(name="identity"))
        record = fit(translator, self.variants["bpe_60"])
        with self.assertLogs("MetaTrainer", level="WARNING") as logs:
            hyps = translate(record, ["A b "], DecodeConfig(beam_width=4), translator=translator)
        self.assertEqual(hyps, ["a b"])
        self.assertTrue(any("does not support beam search" in m for m in logs.output))

    def test_fit_all_keeps_going_after_a_failure(self):
        ok = load_translator(TranslatorConfig(name="identity"))
        missing = self.variants["chars_40"].model_copy(update={"vocab_size": 41})
        outcomes = fit_all([ok], [self.variants["chars_40"], missing], jobs=2)
        self.assertTrue(outcomes[0].ok)
        self.assertIsInstance(outcomes[1].error, VariantNotMaterializedError)

    def test_translator_needs_a_manifest_or_builtin(self):
        with self.assertRaises(ValueError):
            TranslatorConfig(name="fairseq")

    def test_translator_names_must_be_path_safe(self):
        manifest = write_mock_manifest(self.adapters, "mock-copy")
        for name in ("mock/copy", "mock copy", "mock:copy", ""):
            with self.subTest(name=name), self.assertRaises(ValueError):
                TranslatorConfig(name=name, manifest=manifest)

        variant = self.variants["bytes"]
        self.assertEqual(make_run_id(variant, "mock-copy"), f"{variant.dataset.label}_bytes_mock-copy")
        self.assertNotEqual(make_run_id(variant, "mock_copy"), make_run_id(variant, "mock-copy"))
        with self.assertRaises(ConfigError):
            make_run_id(variant, "mock/copy")

    def test_manifest_name_must_be_path_safe(self):
        data = json.loads(write_mock_manifest(self.adapters, "mock-copy").read_text(encoding="utf-8"))
        data["name"] = "mock/copy"
        path = self.adapters / "slashed.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with self.assertRaises(ConfigError):
            load_translator(TranslatorConfig(name="slashed", manifest=path))

    def test_manifest_that_is_not_utf8_is_a_config_error(self):
        path = self.adapters / "latin1.json"
        self.adapters.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b'{"name": "caf\xe9"}')
        with self.assertRaises(ConfigError) as ctx:
            load_translator(TranslatorConfig(name="latin1", manifest=path))
        self.assertIn("not valid UTF-8 JSON", str(ctx.exception))

    def test_fit_all_rejects_translators_sharing_a_run_name(self):
        manifest = write_mock_manifest(self.adapters, "mock-copy")
        first = load_translator(TranslatorConfig(name="copy-a", manifest=manifest))
        second = load_translator(TranslatorConfig(name="copy-b", manifest=manifest))
        with self.assertRaises(ConfigError) as ctx:
            fit_all([first, second], [self.variants["bytes"]])
        self.assertIn("mock-copy", str(ctx.exception))


if __name__ == '__main__':
    unittest.main()
