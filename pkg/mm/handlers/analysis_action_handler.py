# mm/handlers/analysis_action_handler.py
from pathlib import Path
from typing import Optional

from loguru import logger

from ..core.app_core import AppCore
from ..core.constants import EXIT_OK
from ..ui import report_writer


class AnalysisActionHandler:
    """Handles the analyze and suggest commands."""

    def __init__(self, core: AppCore):
        self._core = core

    def handle_analyze(self, facts_path: Path, out_path: Optional[Path], fmt: str) -> int:
        model, deps = self._core.load(facts_path)
        report = self._core.analyze(model, deps)
        if fmt == "text":
            text = report_writer.analyze_text(model, report)
        else:
            text = report_writer.dumps_canonical(report_writer.analyze_document(model, report))
        report_writer.write_output(text, out_path)
        logger.info(f"AnalysisActionHandler: {model.n_methods} methods, {len(report.similarity)} similar pairs, "
                    f"n_total={report.workload.n_total if report.workload else 0}")
        return EXIT_OK

    def handle_suggest(self, facts_path: Path, out_path: Optional[Path], fmt: str) -> int:
        model, deps = self._core.load(facts_path)
        _, thresholds, suggestions = self._core.suggest(model, deps)
        config = self._core.config
        if fmt == "text":
            text = report_writer.suggest_text(model, suggestions, thresholds)
        else:
            text = report_writer.dumps_canonical(report_writer.suggest_document(
                model, suggestions, thresholds, config["criteria"], config["combine"],
                verbose=config["verbose_candidates"]))
        report_writer.write_output(text, out_path)
        return EXIT_OK
