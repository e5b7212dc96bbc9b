"""
Metrics provided by an external program. The adapter manifest declares a
`score` stage with {INPUT} bound to the hypotheses file and {OUTPUT} to the
references file; the program prints a single numeric line on stdout.
"""

import logging
from pathlib import Path

from lib.errors import MetricError, StageFailedError, TemplateError
from trainer.external import load_manifest, run_stage
from trainer.schemas import AdapterManifest, Stage

logger = logging.getLogger("Evaluator")


def parse_score(stdout: str) -> float:
    lines = [line.strip() for line in stdout.splitlines() if line.strip()]
    if len(lines) != 1:
        raise MetricError(f"expected one numeric line on stdout, got {len(lines)}", raw_output=stdout)
    try:
        return float(lines[0])
    except ValueError as e:
        raise MetricError(f"non-numeric metric output '{lines[0]}'", raw_output=stdout) from e


def external_metric(
    adapter: AdapterManifest | str | Path,
    hyps_path: Path,
    refs_path: Path,
    log_dir: Path,
) -> float:
    """Runs the adapter's score stage. Failures raise MetricError carrying the raw output."""
    manifest = adapter if isinstance(adapter, AdapterManifest) else load_manifest(adapter)
    if manifest.template(Stage.SCORE) is None:
        raise MetricError(f"adapter '{manifest.name}' declares no score stage")
    bindings = {"INPUT": hyps_path, "OUTPUT": refs_path}
    try:
        stdout = run_stage(manifest, Stage.SCORE, bindings, log_dir)
    except StageFailedError as e:
        raise MetricError(f"{manifest.name}: {e.args[0]}", raw_output=e.log_tail) from e
    except TemplateError as e:
        raise MetricError(f"{manifest.name}: {e.args[0]}") from e
    score = parse_score(stdout)
    logger.debug(f"{manifest.name} scored {score}")
    return score
