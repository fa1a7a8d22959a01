# mm/handlers/bench_action_handler.py
import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from loguru import logger

from ..core.app_core import AppCore
from ..core.constants import EXIT_OK, REFERENCE_SYSTEMS, REFERENCE_SYSTEMS_BY_NAME
from ..core.errors import UsageError
from ..core.ingest import GeneratorConfig, generate
from ..core.metrics_engine import estimate_workload
from ..core.project_config import detected_workers
from ..ui import report_writer
from ..ui.bench_plot import write_bench_plot
from ..ui.report_writer import BenchRow

# (methods, classes, attributes)
BenchSize = Tuple[int, int, int]


def _broadcast(values: Optional[Sequence[int]], count: int, name: str) -> Optional[List[int]]:
    if not values:
        return None
    if len(values) == 1:
        return list(values) * count
    if len(values) != count:
        raise UsageError(f"--{name} takes one value or one per --methods size ({count}), got {len(values)}")
    return list(values)


def default_csv_path(out_path: Optional[Path]) -> Path:
    """<out>.csv next to the report, or <stem>.bench.csv when the report itself is a .csv file."""
    if out_path is None:
        return Path("bench.csv")
    if out_path.suffix.lower() == ".csv":
        return out_path.with_name(f"{out_path.stem}.bench.csv")
    return out_path.with_suffix(".csv")


def bench_sizes(methods: Sequence[int], classes: Optional[Sequence[int]] = None,
                attributes: Optional[Sequence[int]] = None, preset: Optional[str] = None) -> List[BenchSize]:
    """Sizes to benchmark. Without --classes a class holds ten methods; without --attributes
    there is one attribute per two methods."""
    if preset is not None:
        if preset.lower() == "all":
            return [(s.methods, s.classes, s.attributes) for s in REFERENCE_SYSTEMS]
        system = REFERENCE_SYSTEMS_BY_NAME.get(preset.lower())
        if system is None:
            raise UsageError(f"Unknown preset '{preset}'; choose 'all' or one of {sorted(REFERENCE_SYSTEMS_BY_NAME)}")
        return [(system.methods, system.classes, system.attributes)]
    class_counts = _broadcast(classes, len(methods), "classes") or [max(1, m // 10) for m in methods]
    attribute_counts = _broadcast(attributes, len(methods), "attributes") or [max(1, m // 2) for m in methods]
    return list(zip(methods, class_counts, attribute_counts))


class BenchActionHandler:
    """Times the ImproveCohesion workload on generated systems, sequential vs parallel."""

    def __init__(self, core: AppCore):
        self._core = core

    def _time(self, engine: str, workers: int, model, deps, repeats: int):
        best, result = float("inf"), None
        for _ in range(repeats):
            started = time.perf_counter()
            result = self._core.improve_cohesion(model, deps, engine=engine, workers=workers)
            best = min(best, time.perf_counter() - started)
        return best, result

    def run(self, sizes: Sequence[BenchSize], workers: Sequence[int], repeats: int) -> List[BenchRow]:
        config = self._core.config
        rows: List[BenchRow] = []
        for m, c, a in sizes:
            model, deps = generate(GeneratorConfig(
                n_classes=c, n_methods=m, n_attributes=a,
                max_calls_per_method=config["kmax_calls"], max_accesses_per_method=config["kmax_accesses"],
                intra_class_bias=config["intra_bias"], seed=config["seed"],
                allow_empty_classes=config["allow_empty_classes"],
            ))
            n_total = estimate_workload(model, deps).n_total
            sequential_seconds, sequential = self._time("sequential", 1, model, deps, repeats)
            rows.append(BenchRow(m, c, n_total, "sequential", 1, sequential_seconds, 1.0,
                                 len(sequential.suggestions)))
            logger.info(f"Bench: m={m} c={c} sequential {sequential_seconds:.3f}s")
            for n_workers in workers:
                seconds, result = self._time("parallel", n_workers, model, deps, repeats)
                rows.append(BenchRow(m, c, n_total, "parallel", n_workers, seconds,
                                     sequential_seconds / seconds if seconds > 0 else 0.0,
                                     len(result.suggestions),
                                     result.stats.imbalance if result.stats else None))
                logger.info(f"Bench: m={m} c={c} parallel x{n_workers} {seconds:.3f}s "
                            f"(speedup {rows[-1].speedup:.2f})")
        return rows

    def handle_bench(self, sizes: Sequence[BenchSize], workers: Sequence[int], repeats: int,
                     out_path: Optional[Path], csv_path: Optional[Path], plot_path: Optional[Path],
                     fmt: str) -> int:
        csv_path = default_csv_path(out_path) if csv_path is None else csv_path
        if out_path is not None and csv_path.resolve() == out_path.resolve():
            raise UsageError(f"--csv {csv_path} would overwrite the bench report")

        rows = self.run(sizes, workers, repeats)
        cpu_count = detected_workers()
        executor = self._core.executor
        if fmt == "text":
            text = report_writer.bench_text(rows, cpu_count, executor)
        else:
            text = report_writer.dumps_canonical(report_writer.bench_document(rows, cpu_count, executor))
        report_writer.write_output(text, out_path)
        report_writer.write_output(report_writer.bench_csv(rows), csv_path)
        if plot_path is not None:
            write_bench_plot(rows, plot_path)
        return EXIT_OK
