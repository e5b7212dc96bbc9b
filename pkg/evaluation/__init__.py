from evaluation.bleu import corpus_bleu, score_bleu
from evaluation.chrf import corpus_chrf, score_chrf
from evaluation.evaluator import compatible_datasets, evaluate_run
from evaluation.external_metric import external_metric
from evaluation.schemas import EvaluationResult, RunEvaluation

__all__ = [
    "EvaluationResult",
    "RunEvaluation",
    "compatible_datasets",
    "corpus_bleu",
    "corpus_chrf",
    "evaluate_run",
    "external_metric",
    "score_bleu",
    "score_chrf",
]
