# mm/handlers/facts_action_handler.py
from pathlib import Path
from typing import Optional

from loguru import logger

from ..core.app_core import AppCore
from ..core.constants import EXIT_OK, EXIT_VALIDATION_ERROR, REFERENCE_SYSTEMS_BY_NAME
from ..core.errors import FactsValidationError, UsageError
from ..core.facts_model import ValidationResult
from ..core.ingest import dumps_facts, save_facts
from ..ui import report_writer


def apply_preset(config: dict, preset: Optional[str]) -> dict:
    """Copies a reference system's class/attribute/method counts into a generator config."""
    if preset is None:
        return config
    system = REFERENCE_SYSTEMS_BY_NAME.get(preset.lower())
    if system is None:
        raise UsageError(f"Unknown preset '{preset}'; choose from {sorted(REFERENCE_SYSTEMS_BY_NAME)}")
    return {**config, "classes": system.classes, "attributes": system.attributes, "methods": system.methods}


class FactsActionHandler:
    """Handles the generate and validate commands."""

    def __init__(self, core: AppCore):
        self._core = core

    def handle_generate(self, out_path: Optional[Path]) -> int:
        model, deps = self._core.generate()
        if out_path is None:
            report_writer.write_output(dumps_facts(model, deps), None)
        else:
            save_facts(model, deps, out_path)
        return EXIT_OK

    def handle_validate(self, facts_path: Path, out_path: Optional[Path], fmt: str) -> int:
        """Parse errors propagate (exit 2); invariant violations are reported, then exit 3."""
        try:
            self._core.load(facts_path)
            result = ValidationResult()
        except FactsValidationError as e:
            logger.error(f"FactsActionHandler: {facts_path} has {len(e.violations)} violation(s).")
            result = ValidationResult(e.violations)
        if fmt == "text":
            text = report_writer.validate_text(result)
        else:
            text = report_writer.dumps_canonical(report_writer.validate_document(result))
        report_writer.write_output(text, out_path)
        return EXIT_OK if result.ok else EXIT_VALIDATION_ERROR
