import unittest
import sys
import os
import math

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from evaluation.bleu import TOKENIZER_VERSION, corpus_bleu, score_bleu, tokenize
from evaluation.chrf import corpus_chrf, score_chrf
from lib.errors import MetricError


class TestBleu(unittest.TestCase):

    def test_tokenizer_splits_punctuation(self):
        self.assertEqual(tokenize("Hello, world!"), ["Hello", ",", "world", "!"])
        self.assertEqual(tokenize("  a   b "), ["a", "b"])

    def test_identical_corpus_scores_100(self):
        lines = ["the cat sat on the mat", "a dog barked loudly today"]
        self.assertAlmostEqual(score_bleu(lines, lines), 100.0)

    def test_floor_smoothing_hand_computed(self):
        """Test one unigram match out of five with floor-smoothed higher orders."""
        result = corpus_bleu(["the the the the the"], ["the cat sat down here"], smoothing="floor")
        expected = 100 * math.exp((math.log(1 / 5) + math.log(0.1 / 4) + math.log(0.1 / 3) + math.log(0.1 / 2)) / 4)
        self.assertAlmostEqual(result.score, expected, places=9)
        self.assertAlmostEqual(result.score, 5.3728, delta=0.001)
        self.assertEqual(result.brevity_penalty, 1.0)

    def test_exp_smoothing_halves_each_zero_order(self):
        """Test that the default smoothing gives the k-th zero order 1 / (2^k * total)."""
        result = corpus_bleu(["the the the the the"], ["the cat sat down here"])
        expected = 100 * math.exp((math.log(1 / 5) + math.log(1 / 8) + math.log(1 / 12) + math.log(1 / 16)) / 4)
        self.assertAlmostEqual(result.score, expected, places=9)
        self.assertAlmostEqual(result.score, 10.6822, delta=0.001)
        self.assertEqual(result.smoothing, "exp")
        self.assertEqual(score_bleu(["the the the the the"], ["the cat sat down here"], smoothing="exp"), result.score)

    def test_no_smoothing_zeroes_the_score(self):
        self.assertEqual(score_bleu(["the the the the the"], ["the cat sat down here"], smoothing="none"), 0.0)

    def test_brevity_penalty_and_effective_order(self):
        """Test that a 3-token hypothesis only uses orders 1-3 and pays exp(1 - 6/3)."""
        result = corpus_bleu(["a b c"], ["a b c d e f"])
        self.assertEqual(len(result.precisions), 3)
        self.assertAlmostEqual(result.brevity_penalty, math.exp(-1))
        self.assertAlmostEqual(result.score, 100 * math.exp(-1))

    def test_empty_hypothesis(self):
        self.assertEqual(score_bleu([""], ["a b"]), 0.0)
        self.assertEqual(score_bleu([""], [""]), 100.0)

    def test_clipping(self):
        """Test that repeated hypothesis words only match as often as the reference has them."""
        result = corpus_bleu(["a a a a"], ["a b c d"], max_ngram=1)
        self.assertAlmostEqual(result.precisions[0], 0.25)

    def test_params_name_the_tokenizer(self):
        params = corpus_bleu(["a"], ["a"]).params()
        self.assertEqual(params["tokenizer"], TOKENIZER_VERSION)
        self.assertEqual(params["smoothing"], "exp")

    def test_invalid_input(self):
        with self.assertRaises(MetricError):
            corpus_bleu(["a"], ["a", "b"])
        with self.assertRaises(MetricError):
            corpus_bleu([], [])
        with self.assertRaises(MetricError):
            corpus_bleu(["a"], ["a"], smoothing="add-one")

    def test_score_range_on_random_corpora(self):
        rng = np.random.default_rng(5)
        words = ["a", "b", "c", "d", "e", "f,", "g."]
        for _ in range(30):
            hyps = [" ".join(rng.choice(words, int(rng.integers(0, 8)))) for _ in range(4)]
            refs = [" ".join(rng.choice(words, int(rng.integers(1, 8)))) for _ in range(4)]
            score = score_bleu(hyps, refs)
            self.assertGreaterEqual(score, 0.0)
            self.assertLessEqual(score, 100.0)


class TestChrf(unittest.TestCase):

    def test_hand_computed_value(self):
        """Test abcd vs abce: orders 1-4 have n-grams on both sides, P = R = 0.479."""
        result = corpus_chrf(["abcd"], ["abce"])
        self.assertEqual(result.effective_order, 4)
        self.assertAlmostEqual(result.score, 100 * (0.75 + 2 / 3 + 0.5 + 0.0) / 4, places=9)
        self.assertAlmostEqual(result.score, 47.92, delta=0.005)

    def test_identical_and_empty(self):
        self.assertAlmostEqual(score_chrf(["abc def"], ["abc def"]), 100.0)
        self.assertEqual(score_chrf([""], [""]), 100.0)
        self.assertEqual(score_chrf([""], ["abc"]), 0.0)

    def test_whitespace_is_ignored(self):
        self.assertAlmostEqual(score_chrf(["a b c"], ["abc"]), 100.0)

    def test_recall_weighs_more_than_precision(self):
        """Test that beta=2 favours a long hypothesis over a short one with the same overlap."""
        short = score_chrf(["ab"], ["abcd"])
        long = score_chrf(["abcd"], ["ab"])
        self.assertAlmostEqual(short, 100 * 5 * (5 / 12) / (4 + 5 / 12), places=9)
        self.assertGreater(long, short)

    def test_word_ngrams(self):
        result = corpus_chrf(["the cat"], ["the cat"], word_ngram=2)
        self.assertAlmostEqual(result.score, 100.0)
        self.assertEqual(result.params()["word_ngram"], 2)

    def test_invalid_input(self):
        with self.assertRaises(MetricError):
            corpus_chrf(["a"], [])
        with self.assertRaises(MetricError):
            corpus_chrf(["a"], ["a"], char_ngram=0)


HYP_WORDS = ["the", "cat", "sat", "on", "mat", "über", "naïve", "dog"]
REF_WORDS = ["a", "bird", "flew", "past", "zwei", "crème", "brûlée", "yak"]
HYP_LETTERS = "abcdefg"
REF_LETTERS = "hijklmn"


def _line(rng: np.random.Generator, words: list[str], length: int) -> str:
    return " ".join(str(w) for w in rng.choice(words, length))


def _corpus(rng: np.random.Generator, words: list[str], min_len: int = 1, max_len: int = 12) -> list[str]:
    return [_line(rng, words, int(rng.integers(min_len, max_len + 1))) for _ in range(int(rng.integers(1, 9)))]


class TestMetricProperties(unittest.TestCase):
    """Properties checked over 200 seeded random corpora each."""

    CORPORA = 200

    def test_identical_corpora_score_100(self):
        rng = np.random.default_rng(17)
        for _ in range(self.CORPORA):
            lines = _corpus(rng, HYP_WORDS + REF_WORDS)
            self.assertAlmostEqual(score_bleu(lines, lines), 100.0, places=9)
            self.assertAlmostEqual(score_chrf(lines, lines), 100.0, places=9)

    def test_disjoint_corpora_score_zero(self):
        """Test disjoint tokens under unsmoothed BLEU and disjoint characters under chrF."""
        rng = np.random.default_rng(23)
        letters_hyp = ["".join(HYP_LETTERS[int(i)] for i in rng.integers(0, 7, 4)) for _ in range(20)]
        letters_ref = ["".join(REF_LETTERS[int(i)] for i in rng.integers(0, 7, 4)) for _ in range(20)]
        for _ in range(self.CORPORA):
            refs = _corpus(rng, REF_WORDS)
            hyps = [_line(rng, HYP_WORDS, int(rng.integers(1, 12))) for _ in refs]
            self.assertEqual(score_bleu(hyps, refs, smoothing="none"), 0.0)

            refs = _corpus(rng, letters_ref)
            hyps = [_line(rng, letters_hyp, int(rng.integers(1, 12))) for _ in refs]
            self.assertEqual(score_chrf(hyps, refs), 0.0)

    def test_corrupting_lines_strictly_lowers_bleu(self):
        """Test that each line swapped for a disjoint one of equal length lowers corpus BLEU."""
        rng = np.random.default_rng(31)
        for _ in range(self.CORPORA):
            refs = [_line(rng, HYP_WORDS, int(rng.integers(4, 12))) for _ in range(int(rng.integers(3, 9)))]
            first, second = (int(i) for i in rng.choice(len(refs), 2, replace=False))
            once = list(refs)
            once[first] = _line(rng, REF_WORDS, len(refs[first].split()))
            twice = list(once)
            twice[second] = _line(rng, REF_WORDS, len(refs[second].split()))
            for smoothing in ("exp", "floor", "none"):
                with self.subTest(smoothing=smoothing):
                    perfect = score_bleu(refs, refs, smoothing=smoothing)
                    damaged = score_bleu(once, refs, smoothing=smoothing)
                    self.assertLess(damaged, perfect)
                    self.assertLess(score_bleu(twice, refs, smoothing=smoothing), damaged)

    def test_scores_stay_in_range(self):
        rng = np.random.default_rng(41)
        words = HYP_WORDS[:4] + REF_WORDS[:4] + ["x,", "y."]
        for _ in range(self.CORPORA):
            refs = _corpus(rng, words)
            hyps = [_line(rng, words, int(rng.integers(0, 14))) for _ in refs]
            scores = [score_bleu(hyps, refs, smoothing=s) for s in ("exp", "floor", "none")]
            scores.append(score_chrf(hyps, refs))
            scores.append(score_chrf(hyps, refs, word_ngram=2))
            for score in scores:
                self.assertGreaterEqual(score, 0.0)
                self.assertLessEqual(score, 100.0)


if __name__ == '__main__':
    unittest.main()
