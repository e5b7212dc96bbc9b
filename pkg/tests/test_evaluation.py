import unittest
from unittest.mock import patch
import sys
import os
import json
import tempfile
from pathlib import Path

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tests.fixtures import make_config, write_metric_manifest, write_toy_corpus
from builder.dataset_registry import enumerate_variants, read_splits
from builder.materialize import build
from builder.normalization import NormalizationPipeline
from builder.schemas import DatasetRef, ParallelCorpus, SubwordModel, VariantSpec
from evaluation import compatible_datasets, evaluate_run, external_metric
from evaluation.bleu import score_bleu
from evaluation.evaluator import read_evaluations, upsert_evaluations
from evaluation.external_metric import parse_score
from evaluation.schemas import EVALUATIONS_CSV
from lib.errors import MetricError
from lib.settings import MetricConfig, TranslatorConfig
from trainer import fit, load_translator
from trainer.builtin import learn_lexicon, translate_with_lexicon
from trainer.schemas import DecodeConfig, RunRecord, TranslatorIdentity


def _ref(base: Path, name: str, pair: str = "de-en", size: str = "original") -> DatasetRef:
    src, trg = pair.split("-")
    return DatasetRef(name=name, src=src, trg=trg, size_label=size, base_path=base)


class TestCompatibleDatasets(unittest.TestCase):

    def test_own_dataset_first_then_same_pair_sorted(self):
        base = Path("/tmp/unused")
        own = _ref(base, "multi30k")
        variant = VariantSpec(dataset=own, subword_model=SubwordModel.BYTES)
        run = RunRecord(run_id="r", variant=variant, translator=TranslatorIdentity(kind="identity", version="1"))
        registry = [
            _ref(base, "europarl", "cs-en"),
            _ref(base, "zeta"),
            own,
            _ref(base, "europarl", size="100k"),
            _ref(base, "multi30k", size="10k"),
        ]
        labels = [ref.label for ref in compatible_datasets(run, registry)]
        self.assertEqual(labels, [
            "multi30k_de-en_original", "europarl_de-en_100k", "multi30k_de-en_10k", "zeta_de-en_original",
        ])


class TestExternalMetric(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.hyps = self.dir / "hyp.txt"
        self.refs = self.dir / "ref.txt"
        self.hyps.write_text("a\nb\nc\nd\n", encoding="utf-8")
        self.refs.write_text("a\nx\n", encoding="utf-8")

    def tearDown(self):
        self.tmp.cleanup()

    def test_numeric_output(self):
        manifest = write_metric_manifest(self.dir, extra=["--print", "42.0"])
        self.assertEqual(external_metric(manifest, self.hyps, self.refs, self.dir / "logs"), 42.0)
        self.assertTrue((self.dir / "logs" / "score.log").is_file())

    def test_scores_files_in_order(self):
        """Test that INPUT is bound to hypotheses and OUTPUT to references."""
        manifest = write_metric_manifest(self.dir)
        self.assertEqual(external_metric(manifest, self.hyps, self.refs, self.dir / "logs"), 50.0)

    def test_nonzero_exit(self):
        manifest = write_metric_manifest(self.dir, extra=["--print", "42.0", "--exit", "2"])
        with self.assertRaises(MetricError) as ctx:
            external_metric(manifest, self.hyps, self.refs, self.dir / "logs")
        self.assertIn("42.0", ctx.exception.raw_output)

    def test_non_numeric_output(self):
        manifest = write_metric_manifest(self.dir, extra=["--print", "n/a"])
        with self.assertRaises(MetricError) as ctx:
            external_metric(manifest, self.hyps, self.refs, self.dir / "logs")
        self.assertEqual(ctx.exception.raw_output.strip(), "n/a")

    def test_parse_score(self):
        self.assertEqual(parse_score("\n  17.5 \n\n"), 17.5)
        with self.assertRaises(MetricError):
            parse_score("1\n2\n")
        with self.assertRaises(MetricError):
            parse_score("")


class TestEvaluateRun(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.base = Path(cls.tmp.name) / "datasets"
        cls.base.mkdir()
        write_toy_corpus(cls.base, n_pairs=1000)
        cls.config = make_config(cls.base, subword={"bytes": []})
        summary = build(cls.config)
        assert summary.ok, summary.line()
        cls.variant = enumerate_variants(cls.config)[0]
        cls.dataset = cls.variant.dataset
        cls.metrics = [MetricConfig(name="bleu"), MetricConfig(name="chrf")]
        cls.identity = fit(load_translator(TranslatorConfig(name="identity")), cls.variant)
        cls.lexicon = fit(load_translator(TranslatorConfig(name="lexicon")), cls.variant)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def _scores(self, evaluation) -> dict[str, float]:
        return {r.metric: r.score for r in evaluation.results}

    def test_scores_files_and_csv(self):
        """Test that every metric gets a JSON file next to hyp.txt/ref.txt and a row in evaluations.csv."""
        evaluation = evaluate_run(self.identity, [self.dataset], self.metrics, DecodeConfig(beam_width=1), force=True)
        self.assertTrue(evaluation.ok)
        self.assertEqual(sorted(self._scores(evaluation)), ["bleu", "chrf"])
        for score in self._scores(evaluation).values():
            self.assertGreaterEqual(score, 0.0)
            self.assertLessEqual(score, 100.0)

        out = self.identity.run_dir / "eval" / self.dataset.label / "beam1"
        test = read_splits(self.dataset).test
        self.assertEqual(len((out / "hyp.txt").read_text(encoding="utf-8").splitlines()), len(test))
        stored = json.loads((out / "bleu.json").read_text(encoding="utf-8"))
        self.assertEqual(stored["status"], "ok")
        self.assertEqual(stored["params"]["tokenizer"], "punct-split-v1")

        rows = [r for r in read_evaluations(self.base / EVALUATIONS_CSV) if r["run_id"] == self.identity.run_id]
        self.assertEqual({(r["metric"], r["beam"]) for r in rows}, {("bleu", "1"), ("chrf", "1")})

    def test_lexicon_beats_identity(self):
        """Test that the learned word lexicon outscores copying on a word-substitution corpus."""
        identity = self._scores(evaluate_run(self.identity, [self.dataset], self.metrics, DecodeConfig(beam_width=1)))
        lexicon = self._scores(evaluate_run(self.lexicon, [self.dataset], self.metrics, DecodeConfig(beam_width=1)))
        self.assertGreater(lexicon["bleu"], identity["bleu"])
        self.assertGreater(lexicon["chrf"], identity["chrf"])

    def test_lexicon_bleu_equals_score_on_pregenerated_hypotheses(self):
        """Test the lexicon run's BLEU against hypotheses produced outside the pipeline."""
        pipeline = NormalizationPipeline(self.variant.normalization)
        splits = read_splits(self.dataset)
        lexicon = learn_lexicon(ParallelCorpus(
            src=tuple(pipeline.apply_all(splits.train.src)), trg=tuple(pipeline.apply_all(splits.train.trg)),
        ))
        hyps = [translate_with_lexicon(lexicon, line) for line in pipeline.apply_all(splits.test.src)]
        expected = score_bleu(hyps, pipeline.apply_all(splits.test.trg))

        evaluation = evaluate_run(self.lexicon, [self.dataset], self.metrics, DecodeConfig(beam_width=1), force=True)
        self.assertEqual(self._scores(evaluation)["bleu"], expected)
        out = self.lexicon.run_dir / "eval" / self.dataset.label / "beam1"
        self.assertEqual((out / "hyp.txt").read_text(encoding="utf-8").splitlines(), hyps)

    def test_complete_evaluation_is_skipped(self):
        evaluate_run(self.lexicon, [self.dataset], self.metrics, DecodeConfig(beam_width=2))
        with patch("evaluation.evaluator.translate") as translate:
            again = evaluate_run(self.lexicon, [self.dataset], self.metrics, DecodeConfig(beam_width=2))
            translate.assert_not_called()
        self.assertEqual(len(again.results), 2)

    def test_metric_error_is_recorded_and_kept_out_of_the_csv(self):
        adapter = write_metric_manifest(Path(self.tmp.name) / "adapters", "failing", extra=["--exit", "3"])
        metrics = [MetricConfig(name="bleu"), MetricConfig(name="failing", adapter=adapter)]
        evaluation = evaluate_run(self.identity, [self.dataset], metrics, DecodeConfig(beam_width=3))

        self.assertFalse(evaluation.ok)
        statuses = {r.metric: r.status for r in evaluation.results}
        self.assertEqual(statuses, {"bleu": "ok", "failing": "errored"})
        rows = read_evaluations(self.base / EVALUATIONS_CSV)
        self.assertFalse(any(r["metric"] == "failing" for r in rows))

    def test_untranslatable_dataset_is_a_failure_not_a_result(self):
        ghost = _ref(self.base, "ghost")
        evaluation = evaluate_run(
            self.identity, [self.dataset, ghost], [MetricConfig(name="bleu")], DecodeConfig(beam_width=4), jobs=2,
        )
        self.assertEqual([f.eval_dataset for f in evaluation.failures], [ghost.label])
        self.assertEqual([r.eval_dataset.label for r in evaluation.results], [self.dataset.label])

    def test_upsert_replaces_by_key(self):
        path = Path(self.tmp.name) / "upsert.csv"
        evaluation = evaluate_run(self.identity, [self.dataset], [MetricConfig(name="chrf")], DecodeConfig(beam_width=6))
        result = evaluation.results[0]
        upsert_evaluations(path, [result])
        upsert_evaluations(path, [result.model_copy(update={"score": 1.5})])
        rows = read_evaluations(path)
        self.assertEqual(len(rows), 1)
        self.assertEqual(float(rows[0]["score"]), 1.5)


if __name__ == '__main__':
    unittest.main()
