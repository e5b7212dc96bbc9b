from dataclasses import dataclass, field
from typing import Any, Literal

from pydantic import BaseModel, Field

from builder.schemas import DatasetRef
from lib import __version__
from trainer.schemas import DecodeConfig, utc_now

EVALUATIONS_CSV = "evaluations.csv"
EVALUATION_COLUMNS = (
    "run_id", "train_dataset", "eval_dataset", "subword_model", "vocab_size", "metric", "beam", "score",
)


class EvaluationResult(BaseModel):
    """One (run, eval dataset, metric, beam) score, stored as eval/<dataset>/beam<k>/<metric>.json."""

    run_id: str
    train_dataset: str
    eval_dataset: DatasetRef
    translator: str
    subword_model: str
    vocab_size: int | None = None
    train_limit: int | None = None
    metric: str
    params: dict[str, Any] = Field(default_factory=dict)
    decode: DecodeConfig
    status: Literal["ok", "errored"] = "ok"
    score: float | None = Field(default=None, description="Metric-scaled; BLEU and chrF lie in [0, 100].")
    error: str | None = None
    raw_output: str | None = None
    hyp_path: str
    ref_path: str
    created_at: str = Field(default_factory=utc_now)
    library_version: str = __version__

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def key(self) -> tuple[str, str, str, int]:
        return (self.run_id, self.eval_dataset.label, self.metric, self.decode.beam_width)

    def csv_row(self) -> dict[str, str]:
        return {
            "run_id": self.run_id,
            "train_dataset": self.train_dataset,
            "eval_dataset": self.eval_dataset.label,
            "subword_model": self.subword_model,
            "vocab_size": "" if self.vocab_size is None else str(self.vocab_size),
            "metric": self.metric,
            "beam": str(self.decode.beam_width),
            "score": repr(self.score),
        }


@dataclass
class EvaluationFailure:
    """A dataset whose translation failed; no results exist for it."""

    run_id: str
    eval_dataset: str
    beam: int
    message: str


@dataclass
class RunEvaluation:
    results: list[EvaluationResult] = field(default_factory=list)
    failures: list[EvaluationFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and all(r.ok for r in self.results)

    def extend(self, other: "RunEvaluation") -> None:
        self.results.extend(other.results)
        self.failures.extend(other.failures)
