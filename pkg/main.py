"""
seqsurf: one config file drives the whole workflow.

    build     index datasets, derive splits and subsets, materialize variants
    stats     recompute corpus statistics without rebuilding
    fit       train every selected (variant, translator)
    evaluate  translate and score test sets (own or all compatible datasets)
    report    collect results and write the configured reports
    schema    print the config JSON schema

Exit codes: 0 all ok, 1 configuration or fatal error, 2 some items failed.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence

from dotenv import load_dotenv

from analyzers.corpus_stats import compute_stats, emit_stats
from builder.dataset_registry import (
    declared_refs,
    enumerate_variants,
    has_splits,
    index_datasets,
    models_dir,
    read_splits,
    stats_dir,
)
from builder.materialize import build, is_materialized, load_variant_tokenizers, prepared_splits
from builder.schemas import VariantSpec
from evaluation.evaluator import compatible_datasets, evaluate_run
from lib.errors import ConfigError, SeqSurfError
from lib.logging_setup import configure_logging
from lib.settings import ExperimentConfig, config_schema, load_config
from reporting.collector import collect
from reporting.reports import generate_report
from trainer.hub import fit_all, load_run, load_translator, make_run_id, run_path
from trainer.schemas import DecodeConfig, RunStatus
from ui.console import print_error, print_line, print_table

logger = logging.getLogger("SeqSurf")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2
DEFAULT_CONFIG = "seqsurf.toml"


def _select_variants(config: ExperimentConfig, args: argparse.Namespace) -> list[VariantSpec]:
    variants = enumerate_variants(config)
    if args.dataset:
        variants = [v for v in variants if v.dataset.name in args.dataset]
    if args.pair:
        variants = [v for v in variants if v.dataset.pair_label in args.pair]
    if args.variant:
        variants = [v for v in variants if v.variant_dir in args.variant]
    return variants


def _select_translators(config: ExperimentConfig, args: argparse.Namespace):
    translators = config.translators
    if args.translator:
        unknown = sorted(set(args.translator) - {t.name for t in translators})
        if unknown:
            raise ConfigError(f"translators not in the config: {unknown}")
        translators = [t for t in translators if t.name in args.translator]
    return [load_translator(t) for t in translators]


def cmd_build(config: ExperimentConfig, args: argparse.Namespace) -> int:
    summary = build(config, jobs=args.jobs, force=args.force, interactive=config.interactive and not args.non_interactive)
    rows = [(o.variant.label, o.status, o.error or "") for o in summary.outcomes]
    print_table("Variants", ("variant", "status", "error"), rows, status_column=1)
    for label in summary.missing_datasets:
        print_line(f"No data for {label}", style="yellow")
    print_line(summary.line(), style="bold")
    return EXIT_OK if summary.ok else EXIT_PARTIAL


def cmd_stats(config: ExperimentConfig, args: argparse.Namespace) -> int:
    rows = []
    failed = 0
    for ref in declared_refs(config):
        if has_splits(ref):
            stats = compute_stats(read_splits(ref), dataset=ref.label)
            emit_stats(stats, ref.root / "stats" / "splits")
            rows.append((ref.label, "splits (whitespace)", "ok"))
    for variant in _select_variants(config, args):
        if not is_materialized(variant):
            rows.append((variant.dataset.label, variant.variant_dir, "missing"))
            continue
        try:
            src_model, trg_model = load_variant_tokenizers(variant)
            stats = compute_stats(
                prepared_splits(variant, config), src_model, trg_model,
                dataset=variant.dataset.label, variant=variant.variant_dir,
            )
            emit_stats(stats, stats_dir(variant))
            rows.append((variant.dataset.label, variant.variant_dir, "ok"))
        except SeqSurfError as e:
            failed += 1
            rows.append((variant.dataset.label, variant.variant_dir, "failed"))
            logger.error(str(e), extra={"variant": variant.label})
    print_table("Statistics", ("dataset", "tokenization", "status"), rows, status_column=2)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_fit(config: ExperimentConfig, args: argparse.Namespace) -> int:
    translators = _select_translators(config, args)
    variants = _select_variants(config, args)
    outcomes = fit_all(translators, variants, config.train, jobs=args.jobs, force=args.force)
    rows = []
    for outcome in outcomes:
        if outcome.result is not None:
            record = outcome.result
            detail = record.failure.message if record.failure else ""
            rows.append((outcome.key, record.status.value, detail))
        else:
            rows.append((outcome.key, "failed", str(outcome.error)))
    print_table("Runs", ("run_id", "status", "detail"), rows, status_column=1)
    trained = sum(1 for _, status, _ in rows if status == RunStatus.TRAINED.value)
    print_line(f"{len(rows)} runs, {trained} trained, {len(rows) - trained} failed", style="bold")
    return EXIT_OK if trained == len(rows) else EXIT_PARTIAL


def cmd_evaluate(config: ExperimentConfig, args: argparse.Namespace) -> int:
    registry = index_datasets(config.base_path, config).refs
    pair_filters = {ds.name: ds.filter for ds in config.datasets if ds.filter is not None}
    decodes = [DecodeConfig(beam_width=b, max_output_length=config.decode.max_output_length) for b in config.decode.beams]
    translators = _select_translators(config, args)

    rows = []
    failed = 0
    for variant in _select_variants(config, args):
        for translator in translators:
            run_id = make_run_id(variant, translator.name)
            run_dir = models_dir(variant.dataset) / run_id
            if not run_path(run_dir).is_file():
                continue
            run = load_run(run_dir)
            if run.status is not RunStatus.TRAINED:
                rows.append((run_id, "", "", "", None, run.status.value))
                failed += 1
                continue
            datasets = [run.variant.dataset] if args.scope == "own" else compatible_datasets(run, registry)
            evaluation = evaluate_run(
                run, datasets, config.metrics, decodes,
                pair_filters=pair_filters, jobs=args.jobs, translator=translator, force=args.force,
            )
            for r in evaluation.results:
                rows.append((run_id, r.eval_dataset.label, r.metric, r.decode.beam_width, r.score, r.status))
            for f in evaluation.failures:
                rows.append((run_id, f.eval_dataset, "", f.beam, None, "failed"))
            failed += 0 if evaluation.ok else 1
    if not rows:
        print_line("No trained runs match the selection; run fit first", style="yellow")
    print_table("Evaluations", ("run_id", "eval_dataset", "metric", "beam", "score", "status"), rows, status_column=5)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_report(config: ExperimentConfig, args: argparse.Namespace) -> int:
    reports = [config.report(name) for name in args.name] if args.name else list(config.reports)
    table = collect(config.base_path)
    out_root = config.base_path / "reports"
    table.save(out_root / "collected.csv")
    for warning in table.warnings:
        print_line(f"Skipped {warning}", style="yellow")

    rows = []
    failed = 0
    for report in reports:
        try:
            output = generate_report(report, table)
            output.write(out_root / report.name)
            rows.append((report.name, report.kind, len(output.rows), "ok"))
        except SeqSurfError as e:
            failed += 1
            logger.error(str(e))
            rows.append((report.name, report.kind, 0, "failed"))
    print_table("Reports", ("report", "kind", "rows", "status"), rows, status_column=3)
    return EXIT_PARTIAL if failed else EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "stats": cmd_stats,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqsurf", description="Config-driven seq2seq research pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=DEFAULT_CONFIG, help="Experiment TOML file.")
    common.add_argument("--jobs", type=int, default=1, help="Worker bound for parallel stages.")
    common.add_argument("--force", action="store_true", help="Redo work that is already complete.")

    selectors = argparse.ArgumentParser(add_help=False)
    selectors.add_argument("--dataset", action="append", help="Only this dataset name (repeatable).")
    selectors.add_argument("--pair", action="append", help='Only this language pair, e.g. "de-en" (repeatable).')
    selectors.add_argument("--variant", action="append", help='Only this variant dir, e.g. "bpe_8000" (repeatable).')

    translators = argparse.ArgumentParser(add_help=False)
    translators.add_argument("--translator", action="append", help="Only this translator (repeatable).")

    build_cmd = sub.add_parser("build", parents=[common], help="Build datasets and variants.")
    build_cmd.add_argument("--non-interactive", action="store_true", help="Create directories without asking.")
    sub.add_parser("stats", parents=[common, selectors], help="Recompute corpus statistics.")
    sub.add_parser("fit", parents=[common, selectors, translators], help="Train runs.")
    evaluate_cmd = sub.add_parser("evaluate", parents=[common, selectors, translators], help="Score trained runs.")
    evaluate_cmd.add_argument("--scope", choices=("own", "compatible"), default="own")
    report_cmd = sub.add_parser("report", parents=[common], help="Generate reports.")
    report_cmd.add_argument("--name", action="append", help="Only this report (repeatable).")
    sub.add_parser("schema", help="Print the config JSON schema.")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(json.dumps(config_schema(), indent=2))
        return EXIT_OK

    try:
        config = load_config(args.config)
        configure_logging(config.logging.level, config.base_path / "logs" / f"{args.command}.jsonl"
                          if config.logging.jsonl and config.base_path.is_dir() else None)
        logger.info(f"seqsurf {args.command} with {args.config}", extra={"command": args.command})
        return COMMANDS[args.command](config, args)
    except SeqSurfError as e:
        print_error(str(e))
        logger.debug("fatal", exc_info=True)
        return EXIT_FATAL
    except KeyboardInterrupt:
        print_error("interrupted")
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
