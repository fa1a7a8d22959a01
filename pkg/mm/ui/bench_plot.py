# mm/ui/bench_plot.py
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from loguru import logger

from .report_writer import BenchRow


def write_bench_plot(rows: Sequence[BenchRow], path: Path) -> bool:
    """Wall time vs n_total per engine, and parallel speedups. Returns False when matplotlib is missing."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("BenchPlot: matplotlib not installed (install the 'plot' extra); skipping figure.")
        return False

    series: Dict[str, List[Tuple[int, float]]] = {}
    for row in rows:
        label = row.engine if row.engine == "sequential" else f"{row.engine} x{row.workers}"
        series.setdefault(label, []).append((row.n_total, row.wall_seconds))
    parallel = [row for row in rows if row.engine != "sequential"]

    fig, (ax_time, ax_speedup) = plt.subplots(1, 2, figsize=(10, 4))
    for label, points in sorted(series.items()):
        points.sort()
        ax_time.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=label)
    ax_time.set_xlabel("values to compute (n_total)")
    ax_time.set_ylabel("wall time [s]")
    ax_time.set_xscale("log")
    ax_time.set_yscale("log")
    ax_time.legend(frameon=False)

    ax_speedup.bar(range(len(parallel)), [row.speedup for row in parallel], color="tab:orange")
    ax_speedup.set_xticks(range(len(parallel)))
    ax_speedup.set_xticklabels([f"m={row.m}\nx{row.workers}" for row in parallel], fontsize=8)
    ax_speedup.axhline(1.0, color="grey", linewidth=0.8, linestyle="--")
    ax_speedup.set_ylabel("speedup vs sequential")

    fig.tight_layout()
    try:
        fig.savefig(str(path), dpi=150, bbox_inches="tight")
    finally:
        plt.close(fig)
    logger.info(f"BenchPlot: Wrote {path}")
    return True
