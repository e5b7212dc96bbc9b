from trainer.contract import BaseTranslator
from trainer.external import ExternalTranslator, render_command
from trainer.hub import JobRunner, fit, fit_all, load_run, load_translator, make_run_id, translate

__all__ = [
    "BaseTranslator",
    "ExternalTranslator",
    "JobRunner",
    "fit",
    "fit_all",
    "load_run",
    "load_translator",
    "make_run_id",
    "render_command",
    "translate",
]
