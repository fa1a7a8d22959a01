# mm/ui/report_writer.py
"""Report bodies (canonical JSON, aligned text, bench CSV) and output plumbing.

Canonical JSON: sorted keys, two-space indent, LF line endings, floats
rounded to 12 significant digits, object lists ordered by id. Engine and
worker count are never part of an analysis body.
"""
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from loguru import logger

from ..core.constants import BENCH_CSV_COLUMNS, FLOAT_SIGNIFICANT_DIGITS, REPORT_SCHEMA_VERSION
from ..core.errors import FactsIOError
from ..core.facts_model import SystemModel, ValidationResult
from ..core.metrics_engine import MetricsReport
from ..core.proponent import MoveSuggestion, Thresholds


def canonical_float(value: float) -> float:
    return float(f"{value:.{FLOAT_SIGNIFICANT_DIGITS}g}")


def canonicalize(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return canonical_float(obj)
    if isinstance(obj, dict):
        return {str(k): canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(v) for v in obj]
    return obj


def dumps_canonical(document: Dict[str, Any]) -> str:
    return json.dumps(canonicalize(document), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_output(text: str, out_path: Optional[Path]) -> None:
    """Writes to `out_path` with LF endings, or to stdout when no path is given."""
    if out_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out_path = Path(out_path)
    try:
        with open(out_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise FactsIOError(f"Failed to write {out_path}: {e}") from e
    logger.info(f"Report: Wrote {out_path}")


# --- analyze ---

def analyze_document(model: SystemModel, report: MetricsReport) -> Dict[str, Any]:
    workload = asdict(report.workload) if report.workload is not None else {}
    if report.workload is not None:
        workload["n_total_millions"] = report.workload.n_total_millions
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "workload": workload,
        "methods": [
            {
                "id": mid,
                "name": model.method_name(mid),
                "class_id": model.owner_of_method(mid),
                "fan_in": report.fan_in[mid],
                "fan_out": report.fan_out[mid],
            }
            for mid in sorted(report.fan_out)
        ],
        "classes": [
            {
                "id": cid,
                "name": model.class_record(cid).name,
                "lcom": report.lcom[cid],
                "lcom_ck": report.lcom_ck[cid],
                "cbo": report.cbo[cid],
                "degenerate": cid in report.degenerate,
            }
            for cid in sorted(report.lcom)
        ],
        "similarity": [[e.i, e.j, e.value] for e in report.similarity],
    }


def _table(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> List[str]:
    cells = [[str(h) for h in headers]] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(headers))]
    lines = ["  ".join(cell.rjust(widths[k]) for k, cell in enumerate(row)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return lines


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else ""
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def analyze_text(model: SystemModel, report: MetricsReport) -> str:
    w = report.workload
    lines = []
    if w is not None:
        lines += [
            "Workload",
            f"  m={w.m} c={w.c} k_m={w.k_m} k_a={w.k_a}",
            f"  n_fan={w.n_fan} n_sim={w.n_sim} n_lcom={w.n_lcom} n_cbo={w.n_cbo}",
            f"  n_total={w.n_total} ({w.n_total_millions}M)",
            "",
        ]
    lines.append("Classes")
    lines += _table(("id", "name", "lcom", "lcom_ck", "cbo", "degenerate"), (
        (cid, model.class_record(cid).name, report.lcom[cid], report.lcom_ck[cid], report.cbo[cid],
         cid in report.degenerate)
        for cid in sorted(report.lcom)))
    lines += ["", "Methods"]
    lines += _table(("id", "name", "class", "fan_in", "fan_out"), (
        (mid, model.method_name(mid), model.owner_of_method(mid), report.fan_in[mid], report.fan_out[mid])
        for mid in sorted(report.fan_out)))
    lines += ["", f"Similarity ({len(report.similarity)} nonzero pairs)"]
    lines += _table(("i", "j", "value"), ((e.i, e.j, e.value) for e in report.similarity))
    return "\n".join(lines) + "\n"


# --- suggest ---

def suggestion_entry(model: SystemModel, s: MoveSuggestion, verbose: bool) -> Dict[str, Any]:
    entry = {
        "method": s.method,
        "method_name": model.method_name(s.method),
        "origin": s.origin,
        "destination": s.destination,
        "criteria": list(s.criteria),
        "lcom_origin_before": s.lcom_origin_before,
        "lcom_origin_after": s.lcom_origin_after,
        "lcom_dest_before": s.lcom_dest_before,
        "lcom_dest_after": s.lcom_dest_after,
        "cbo_origin_before": s.cbo_origin_before,
        "cbo_origin_after": s.cbo_origin_after,
        "cbo_dest_before": s.cbo_dest_before,
        "cbo_dest_after": s.cbo_dest_after,
    }
    if verbose:
        entry["alternatives"] = list(s.alternatives)
    return entry


def suggest_document(model: SystemModel, suggestions: Sequence[MoveSuggestion], thresholds: Thresholds,
                     criteria: Sequence[str], combine: str, verbose: bool = False) -> Dict[str, Any]:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "criteria": list(criteria),
        "combine": combine,
        "thresholds": {
            "mode": thresholds.mode,
            "similarity": thresholds.similarity_threshold,
            "lcom": thresholds.lcom_threshold,
            "cbo": thresholds.cbo_threshold,
        },
        "suggestions": [suggestion_entry(model, s, verbose) for s in suggestions],
    }


def suggest_text(model: SystemModel, suggestions: Sequence[MoveSuggestion], thresholds: Thresholds) -> str:
    lines = [
        f"Thresholds ({thresholds.mode}): similarity={thresholds.similarity_threshold:.4f} "
        f"lcom={thresholds.lcom_threshold:.4f} cbo={thresholds.cbo_threshold:.4f}",
        f"{len(suggestions)} suggested move(s)",
    ]
    if suggestions:
        lines += _table(
            ("method", "name", "from", "to", "criteria", "lcom from", "lcom to", "cbo from", "cbo to", "note"),
            (
                (s.method, model.method_name(s.method), s.origin, s.destination, "+".join(s.criteria),
                 f"{s.lcom_origin_before:.4f}->{s.lcom_origin_after:.4f}",
                 f"{s.lcom_dest_before:.4f}->{s.lcom_dest_after:.4f}",
                 f"{s.cbo_origin_before}->{s.cbo_origin_after}",
                 f"{s.cbo_dest_before}->{s.cbo_dest_after}",
                 "lowers origin cbo" if "cohesion" in s.criteria and s.lowers_origin_cbo else "")
                for s in suggestions
            ),
        )
    return "\n".join(lines) + "\n"


# --- validate ---

def validate_document(result: ValidationResult) -> Dict[str, Any]:
    return {
        "valid": result.ok,
        "violations": [
            {"kind": v.kind.value, "entity": v.entity, "id": v.id, "detail": v.detail}
            for v in result.violations
        ],
    }


def validate_text(result: ValidationResult) -> str:
    if result.ok:
        return "valid\n"
    return "invalid\n" + "".join(f"  {v}\n" for v in result.violations)


# --- bench ---

@dataclass(frozen=True)
class BenchRow:
    m: int
    c: int
    n_total: int
    engine: str
    workers: int
    wall_seconds: float
    speedup: float
    n_suggestions: int = 0
    imbalance: Optional[float] = None


def bench_document(rows: Sequence[BenchRow], cpu_count: int, executor: str) -> Dict[str, Any]:
    return {
        "environment": {"cpu_count": cpu_count, "executor": executor},
        "rows": [asdict(row) for row in rows],
    }


def bench_csv(rows: Sequence[BenchRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(BENCH_CSV_COLUMNS)
    for row in rows:
        writer.writerow([
            row.m, row.c, row.n_total, row.engine, row.workers,
            f"{row.wall_seconds:.6f}", f"{row.speedup:.4f}",
        ])
    return buffer.getvalue()


def bench_text(rows: Sequence[BenchRow], cpu_count: int, executor: str) -> str:
    lines = [f"cpu_count={cpu_count} executor={executor}"]
    lines += _table(BENCH_CSV_COLUMNS + ("imbalance",), (
        (r.m, r.c, r.n_total, r.engine, r.workers, f"{r.wall_seconds:.4f}", f"{r.speedup:.2f}",
         "" if r.imbalance is None else f"{r.imbalance:.2f}")
        for r in rows))
    return "\n".join(lines) + "\n"
