"""
Exception hierarchy shared by every SeqSurf package.

Each error carries the name of the module it is attributed to so the CLI
can print "<module>: <message>" and pick an exit code.
"""

from typing import Any


class SeqSurfError(Exception):
    """Base class. `module` names the component the failure belongs to."""

    module: str = "seqsurf"

    def __init__(self, message: str, *, module: str | None = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self) -> str:
        return f"{self.module}: {super().__str__()}"


class ConfigError(SeqSurfError):
    module = "config"


class LayoutError(SeqSurfError):
    module = "dataset_registry"


class LayoutDeclined(LayoutError):
    """The user answered "no" at an interactive layout prompt."""

    status = "declined"


class DatasetError(SeqSurfError):
    module = "dataset_registry"


class SplitError(DatasetError):
    pass


class DuplicateVariantError(DatasetError):
    def __init__(self, duplicates: list[str]):
        self.duplicates = duplicates
        super().__init__("duplicate variant keys: " + ", ".join(duplicates))


class NormalizationError(SeqSurfError):
    module = "normalization"


class TokenizerError(SeqSurfError):
    module = "subword"


class UnsupportedOperationError(TokenizerError):
    pass


class TemplateError(SeqSurfError):
    module = "trainer_hub"


class VariantNotMaterializedError(SeqSurfError):
    module = "trainer_hub"


class StageFailedError(SeqSurfError):
    """An adapter stage exited non-zero or did not produce its outputs."""

    module = "trainer_hub"

    def __init__(self, stage: str, exit_code: int | None, log_tail: str, message: str | None = None):
        self.stage = stage
        self.exit_code = exit_code
        self.log_tail = log_tail
        super().__init__(message or f"stage '{stage}' failed with exit code {exit_code}")


class ContractViolationError(SeqSurfError):
    """A translator broke the one-hypothesis-per-source-line contract."""

    module = "trainer_hub"

    def __init__(self, adapter: str, expected: int, got: int):
        self.adapter = adapter
        self.expected = expected
        self.got = got
        super().__init__(f"adapter '{adapter}' returned {got} lines for {expected} source lines")


class MetricError(SeqSurfError):
    module = "evaluation"

    def __init__(self, message: str, raw_output: str | None = None, **kwargs: Any):
        self.raw_output = raw_output
        super().__init__(message, **kwargs)


class ReportError(SeqSurfError):
    module = "reporting"


class ComparisonError(ReportError):
    def __init__(self, unmatched: list[str]):
        self.unmatched = unmatched
        super().__init__("unmatched comparison keys: " + "; ".join(unmatched))


class StatsError(SeqSurfError):
    module = "corpus_stats"
