# mm/core/project_config.py
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from loguru import logger

from .constants import CONFIG_FILE_NAME
from .errors import FactsIOError, UsageError

ENGINES = ("sequential", "parallel")
EXECUTORS = ("process", "thread")
CRITERIA = ("similarity", "cohesion", "coupling")
COMBINE_MODES = ("union", "intersection")
FORMATS = ("json", "text")
THRESHOLD_MODES = ("mean", "mean_with_zeros", "explicit")

DEFAULT_CONFIG: Dict[str, Any] = {
    # Engine
    "engine": "parallel",
    "workers": 0,  # 0 -> detected core count
    "executor": "process",
    "checked_compaction": False,

    # Proponent
    "criteria": list(CRITERIA),
    "combine": "union",
    "threshold_mode": "mean",
    "threshold_similarity": 0.0,  # only used in explicit mode unless overridden
    "threshold_lcom": 0.0,
    "threshold_cbo": 0.0,
    "verbose_candidates": False,
    "max_moves_per_class": 0,  # 0 -> unlimited

    # Output
    "format": "json",
    "log_level": "INFO",
    "log_to_file": False,

    # Generator
    "seed": 42,
    "classes": 10,
    "methods": 100,
    "attributes": 100,
    "kmax_calls": 4,
    "kmax_accesses": 3,
    "intra_bias": 0.5,
    "allow_empty_classes": False,

    # Bench
    "bench_methods": [1000],
    "bench_repeats": 1,
}

_CHOICES: Dict[str, Tuple[str, ...]] = {
    "engine": ENGINES,
    "executor": EXECUTORS,
    "combine": COMBINE_MODES,
    "format": FORMATS,
    "threshold_mode": THRESHOLD_MODES,
}

_NON_NEGATIVE_INT_KEYS = ("workers", "max_moves_per_class", "kmax_calls", "kmax_accesses")
_POSITIVE_INT_KEYS = ("classes", "methods", "attributes", "bench_repeats")
_NON_NEGATIVE_FLOAT_KEYS = ("threshold_similarity", "threshold_lcom", "threshold_cbo")


def detected_workers() -> int:
    return os.cpu_count() or 1


def effective_workers(config: Dict[str, Any]) -> int:
    workers = int(config.get("workers", 0))
    return workers if workers > 0 else detected_workers()


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Coerces value to the type of default, raising ValueError/TypeError if impossible."""
    expected_type = type(default)
    if isinstance(value, expected_type) and not (expected_type is int and isinstance(value, bool)):
        return value
    if expected_type is bool:
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        if isinstance(value, int) and value in (0, 1):
            return bool(value)
        raise ValueError("Invalid boolean value")
    if expected_type is int and isinstance(value, (float, str)) and not isinstance(value, bool):
        as_float = float(value)
        if not as_float.is_integer():
            raise ValueError("Expected an integer")
        return int(as_float)
    if expected_type is float and isinstance(value, (int, str)) and not isinstance(value, bool):
        return float(value)
    if expected_type is str:
        return str(value)
    if expected_type is list and isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    raise TypeError(f"Incompatible type {type(value).__name__}")


def _validate_config(config: Dict[str, Any]) -> Tuple[Dict[str, Any], bool]:
    """Validates config dict against DEFAULT_CONFIG, ensures types, applies defaults."""
    validated: Dict[str, Any] = {}
    corrections_made = False
    for key, default_value in DEFAULT_CONFIG.items():
        if key not in config:
            validated[key] = list(default_value) if isinstance(default_value, list) else default_value
            continue
        try:
            validated[key] = _coerce(key, config[key], default_value)
            if validated[key] is not config[key]:
                logger.warning(f"Config: Corrected type for '{key}' ({type(config[key]).__name__} -> {type(default_value).__name__}).")
                corrections_made = True
        except (ValueError, TypeError) as e:
            logger.warning(f"Config: Invalid value for '{key}': {config[key]!r} ({e}). Using default {default_value!r}.")
            validated[key] = default_value
            corrections_made = True

    for key, allowed in _CHOICES.items():
        if validated[key] not in allowed:
            logger.warning(f"Config: '{key}'={validated[key]!r} not in {allowed}. Using default {DEFAULT_CONFIG[key]!r}.")
            validated[key] = DEFAULT_CONFIG[key]
            corrections_made = True

    criteria = [str(c) for c in validated["criteria"]]
    unknown = [c for c in criteria if c not in CRITERIA]
    if unknown or not criteria:
        logger.warning(f"Config: Invalid criteria {criteria!r}. Using all criteria.")
        criteria = list(CRITERIA)
        corrections_made = True
    # Keep canonical order, drop duplicates
    validated["criteria"] = [c for c in CRITERIA if c in criteria]

    try:
        validated["bench_methods"] = [int(m) for m in validated["bench_methods"]]
        if not validated["bench_methods"] or any(m <= 0 for m in validated["bench_methods"]):
            raise ValueError("bench sizes must be positive")
    except (TypeError, ValueError) as e:
        logger.warning(f"Config: Invalid bench_methods ({e}). Using default.")
        validated["bench_methods"] = list(DEFAULT_CONFIG["bench_methods"])
        corrections_made = True

    for key in _NON_NEGATIVE_INT_KEYS + _NON_NEGATIVE_FLOAT_KEYS:
        if validated[key] < 0:
            logger.warning(f"Config: '{key}' must be non-negative, got {validated[key]}. Using default.")
            validated[key] = DEFAULT_CONFIG[key]
            corrections_made = True
    for key in _POSITIVE_INT_KEYS:
        if validated[key] <= 0:
            logger.warning(f"Config: '{key}' must be positive, got {validated[key]}. Using default.")
            validated[key] = DEFAULT_CONFIG[key]
            corrections_made = True
    if not (0.0 <= validated["intra_bias"] <= 1.0):
        logger.warning(f"Config: intra_bias {validated['intra_bias']} out of range. Clamping to [0,1].")
        validated["intra_bias"] = max(0.0, min(1.0, validated["intra_bias"]))
        corrections_made = True

    ignored_keys = set(config.keys()) - set(DEFAULT_CONFIG.keys())
    if ignored_keys:
        logger.warning(f"Config: Ignored unknown keys: {sorted(ignored_keys)}")
        corrections_made = True
    return validated, corrections_made


def load_project_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """Loads defaults merged with a config file.

    With an explicit path the file must exist and parse; without one,
    `.modmetrics.json` in the working directory is used when present.
    """
    explicit = path is not None
    cfg_path = Path(path) if explicit else Path.cwd() / CONFIG_FILE_NAME
    loaded: Dict[str, Any] = {}

    if cfg_path.is_file():
        try:
            with open(cfg_path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
            logger.info(f"Config: Loaded {cfg_path}")
        except json.JSONDecodeError as e:
            raise UsageError(f"Invalid JSON in config file {cfg_path}: {e}") from e
        except OSError as e:
            raise FactsIOError(f"Failed to read config file {cfg_path}: {e}") from e
        if not isinstance(loaded, dict):
            raise UsageError(f"Config file {cfg_path} must contain a JSON object")
    elif explicit:
        raise UsageError(f"Config file not found: {cfg_path}")
    else:
        logger.debug(f"Config: No {CONFIG_FILE_NAME} in {cfg_path.parent}. Using defaults.")

    config, corrections = _validate_config(loaded)
    if corrections:
        logger.warning("Config: Some values were corrected; see warnings above.")
    return config


def merge_overrides(config: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Applies CLI overrides (None means 'not given') and re-validates."""
    merged = dict(config)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    validated, _ = _validate_config(merged)
    return validated


def save_project_config(path: Path, cfg: Dict[str, Any]) -> None:
    cfg_to_save = {k: cfg.get(k, v) for k, v in DEFAULT_CONFIG.items()}
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(cfg_to_save, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")
        logger.info(f"Config: Saved {path}")
    except OSError as e:
        raise FactsIOError(f"Failed to save config {path}: {e}") from e
