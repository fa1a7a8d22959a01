# mm/core/app_core.py
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from loguru import logger

from .facts_model import DependencyTable, SystemModel
from .ingest import GeneratorConfig, generate, load_facts
from .metrics_engine import MetricsReport, full_report
from .parallel_engine import ParallelRunStats, parallel_full_report
from .project_config import DEFAULT_CONFIG, _validate_config, effective_workers
from .proponent import MoveSuggestion, Thresholds, compute_thresholds, suggest_all, suggest_by_cohesion
from .task_manager import BackgroundTaskManager


@dataclass
class ImproveCohesionResult:
    report: MetricsReport
    thresholds: Thresholds
    suggestions: List[MoveSuggestion]
    stats: Optional[ParallelRunStats] = None
    stage_seconds: Dict[str, float] = field(default_factory=dict)


class AppCore:
    """
    Holds the effective configuration and runs the pipeline stages:
    facts -> metrics (sequential or parallel engine) -> move suggestions.
    Command handlers talk to this object only.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None,
                 threshold_overrides: Optional[Dict[str, Optional[float]]] = None):
        self.config, _ = _validate_config(config if config is not None else dict(DEFAULT_CONFIG))
        # Command-line thresholds win over computed ones in every mode.
        self.threshold_overrides = dict(threshold_overrides or {})
        self.last_stats: Optional[ParallelRunStats] = None
        logger.debug(f"AppCore: engine={self.engine} workers={self.workers} executor={self.executor}")

    # --- Effective settings ---
    @property
    def engine(self) -> str: return self.config["engine"]
    @property
    def executor(self) -> str: return self.config["executor"]
    @property
    def workers(self) -> int: return effective_workers(self.config)
    @property
    def engine_label(self) -> str:
        return "sequential" if self.engine == "sequential" else f"parallel[{self.workers} {self.executor}]"

    def generator_config(self) -> GeneratorConfig:
        return GeneratorConfig(
            n_classes=self.config["classes"],
            n_methods=self.config["methods"],
            n_attributes=self.config["attributes"],
            max_calls_per_method=self.config["kmax_calls"],
            max_accesses_per_method=self.config["kmax_accesses"],
            intra_class_bias=self.config["intra_bias"],
            seed=self.config["seed"],
            allow_empty_classes=self.config["allow_empty_classes"],
        )

    # --- Stages ---
    def load(self, facts_path: Path) -> Tuple[SystemModel, DependencyTable]:
        return load_facts(facts_path)

    def generate(self) -> Tuple[SystemModel, DependencyTable]:
        return generate(self.generator_config())

    def analyze(self, model: SystemModel, deps: DependencyTable, engine: Optional[str] = None) -> MetricsReport:
        engine = engine or self.engine
        started = time.perf_counter()
        if engine == "sequential":
            report = full_report(model, deps)
            self.last_stats = None
        else:
            report, self.last_stats = parallel_full_report(
                model, deps, self.workers, self.executor, checked=self.config["checked_compaction"])
        label = "sequential" if engine == "sequential" else self.engine_label
        logger.info(f"AppCore: Analysis with {label} engine "
                    f"took {time.perf_counter() - started:.3f}s")
        return report

    def thresholds(self, report: MetricsReport) -> Thresholds:
        mode = self.config["threshold_mode"]

        def pick(name: str) -> Optional[float]:
            value = self.threshold_overrides.get(name)
            if value is None and mode == "explicit":
                value = self.config[f"threshold_{name}"]
            return value

        return compute_thresholds(report, mode, similarity=pick("similarity"), lcom=pick("lcom"), cbo=pick("cbo"))

    def suggest(self, model: SystemModel, deps: DependencyTable,
                report: Optional[MetricsReport] = None) -> Tuple[MetricsReport, Thresholds, List[MoveSuggestion]]:
        report = report if report is not None else self.analyze(model, deps)
        thresholds = self.thresholds(report)
        logger.info(f"AppCore: Thresholds similarity={thresholds.similarity_threshold:.6g} "
                    f"lcom={thresholds.lcom_threshold:.6g} cbo={thresholds.cbo_threshold:.6g} ({thresholds.mode})")
        parallel = self.engine == "parallel"
        suggestions = suggest_all(
            model, deps, report, thresholds,
            criteria=self.config["criteria"],
            combine=self.config["combine"],
            verbose=self.config["verbose_candidates"],
            max_moves_per_class=self.config["max_moves_per_class"],
            n_workers=self.workers if parallel else 1,
            executor=self.executor,
        )
        return report, thresholds, suggestions

    def improve_cohesion(self, model: SystemModel, deps: DependencyTable, engine: Optional[str] = None,
                         workers: Optional[int] = None) -> ImproveCohesionResult:
        """Similarity, class metrics and cohesion what-if evaluation: the benchmarked workload."""
        engine = engine or self.engine
        stages: Dict[str, float] = {}
        started = time.perf_counter()
        if engine == "sequential":
            report = full_report(model, deps)
            stages["metrics"] = time.perf_counter() - started
            thresholds = compute_thresholds(report, "mean")
            suggestions = suggest_by_cohesion(model, deps, report, thresholds)
            stats = None
        else:
            n_workers = workers or self.workers
            with BackgroundTaskManager(n_workers, self.executor) as pool:
                report, stats = parallel_full_report(
                    model, deps, n_workers, self.executor, self.config["checked_compaction"], manager=pool)
                stages["metrics"] = time.perf_counter() - started
                thresholds = compute_thresholds(report, "mean")
                suggestions = suggest_by_cohesion(model, deps, report, thresholds,
                                                  n_workers=n_workers, executor=self.executor, manager=pool)
        stages["total"] = time.perf_counter() - started
        stages["what_if"] = stages["total"] - stages["metrics"]
        logger.debug(f"AppCore: ImproveCohesion ({engine}) m={model.n_methods} "
                     f"-> {len(suggestions)} moves in {stages['total']:.3f}s")
        return ImproveCohesionResult(report, thresholds, suggestions, stats, stages)
