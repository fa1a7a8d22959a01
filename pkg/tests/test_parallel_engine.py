import numpy as np
import pytest

from mm.core.background_tasks import (
    LocalBuffer, PropertyIndex, fan_range_task, pairs_in_rows, similarity_range_task,
)
from mm.core.errors import ContractViolation
from mm.core.ingest import GeneratorConfig, generate
from mm.core.metrics_engine import all_similarities, class_metrics, fan_in, fan_out, full_report
from mm.core.parallel_engine import (
    AtomicCursor, GlobalOutput, call_matrix, compact, parallel_class_metrics, parallel_class_report,
    parallel_fan_metrics, parallel_full_report, parallel_similarities, plan_partition, run_parallel_similarities,
)
from mm.core.task_manager import BackgroundTaskManager
from tests.oracles import build_system


# --- partitioning ---

def test_even_split():
    assert plan_partition(10, 2).assignments == ((0, 5), (5, 10))


def test_balanced_split():
    plan = plan_partition(10, 3)
    assert plan.assignments == ((0, 4), (4, 7), (7, 10))
    assert sorted(plan.sizes()) == [3, 3, 4]


def test_more_workers_than_items():
    plan = plan_partition(3, 8)
    assert plan.sizes() == [1, 1, 1, 0, 0, 0, 0, 0]
    assert [r for _, r in plan.busy()] == [(0, 1), (1, 2), (2, 3)]


def test_zero_workers_is_a_contract_violation():
    with pytest.raises(ContractViolation):
        plan_partition(10, 0)


@pytest.mark.parametrize("n_items", [0, 1, 7, 100, 1001])
@pytest.mark.parametrize("n_workers", [1, 2, 3, 8, 13])
def test_partition_covers_range_without_overlap(n_items, n_workers):
    plan = plan_partition(n_items, n_workers)
    assert len(plan.assignments) == n_workers
    covered = [i for start, end in plan.assignments for i in range(start, end)]
    assert covered == list(range(n_items))
    assert max(plan.sizes()) - min(plan.sizes()) <= 1


# --- compaction ---

def _buffer(owner, pairs):
    buffer = LocalBuffer(owner=owner)
    if pairs:
        i, j, v = zip(*pairs)
        buffer.append(np.array(i, dtype=np.int64), np.array(j, dtype=np.int64), np.array(v, dtype=np.float64))
    return buffer


def test_atomic_cursor_fetch_add():
    cursor = AtomicCursor()
    assert cursor.fetch_add(3) == 0
    assert cursor.fetch_add(0) == 3
    assert cursor.fetch_add(2) == 3
    assert cursor.value == 5


def test_compaction_collects_every_buffer_and_sorts():
    buffers = [_buffer(0, [(0, 3, 0.5), (0, 1, 1.0)]), _buffer(1, []), _buffer(2, [(4, 5, 0.25)])]
    output = compact(buffers, checked=True)
    assert output.cursor.value == 3
    assert [tuple(e) for e in output.sorted_entries()] == [(0, 1, 1.0), (0, 3, 0.5), (4, 5, 0.25)]


def test_checked_output_rejects_unreserved_write():
    output = GlobalOutput(4, checked=True)
    start = output.reserve(0, 2)
    with pytest.raises(ContractViolation):
        output.write(1, start, _buffer(1, [(0, 1, 0.5), (0, 2, 0.5)]))
    with pytest.raises(ContractViolation):
        output.write(0, start + 1, _buffer(0, [(0, 1, 0.5), (0, 2, 0.5)]))
    output.write(0, start, _buffer(0, [(0, 1, 0.5), (0, 2, 0.5)]))


def test_reservation_beyond_capacity_fails():
    output = GlobalOutput(1)
    with pytest.raises(ContractViolation):
        output.reserve(0, 2)


# --- kernels ---

def test_pairs_in_rows_sums_upper_triangle():
    m = 11
    for start, end in [(0, 11), (0, 4), (4, 11), (10, 11), (3, 3)]:
        assert pairs_in_rows(m, start, end) == sum(m - 1 - i for i in range(start, end))


def test_similarity_kernel_respects_its_range(generated_small):
    model, deps = generated_small
    index = PropertyIndex.build(model, deps)
    buffer = similarity_range_task(index, 10, 20, owner=1)
    i, j, _ = buffer.columns()
    assert ((i >= 10) & (i < 20)).all()
    assert (j > i).all()
    expected = [e for e in all_similarities(model, deps) if 10 <= e.i < 20]
    assert len(buffer) == len(expected)


# --- equivalence with the sequential engine ---

@pytest.mark.parametrize("workers", [1, 2, 4, 8])
def test_similarities_identical_across_worker_counts(generated_small, workers):
    model, deps = generated_small
    assert parallel_similarities(model, deps, workers, executor="thread") == all_similarities(model, deps)


def test_single_worker_output_is_identical():
    model, deps = generate(GeneratorConfig(n_classes=12, n_methods=300, n_attributes=150,
                                           max_calls_per_method=4, max_accesses_per_method=3, seed=11))
    assert parallel_similarities(model, deps, 1, executor="thread") == all_similarities(model, deps)


def test_no_overlaps_leave_cursor_at_zero():
    model, deps = build_system([([0, 1], {0: ([], [0]), 1: ([], [1]), 2: ([], [])})])
    entries, stats = run_parallel_similarities(model, deps, 3, executor="thread", checked=True)
    assert entries == ()
    assert stats.cursor_final == 0


def test_run_stats_report_owned_pairs(generated_small):
    model, deps = generated_small
    entries, stats = run_parallel_similarities(model, deps, 4, executor="thread", checked=True)
    m = model.n_methods
    assert stats.total_pairs_owned == m * (m - 1) // 2
    assert stats.cursor_final == len(entries) == sum(stats.buffer_lengths)
    assert stats.pairs_owned[0] > stats.pairs_owned[-1]  # triangular load
    assert stats.imbalance >= 1.0


@pytest.mark.parametrize("workers", [1, 3, 4, 7])
def test_worker_buffers_partition_the_nonzero_pairs(generated_small, workers):
    model, deps = generated_small
    index = PropertyIndex.build(model, deps)
    plan = plan_partition(model.n_methods, workers)
    keys_per_worker = []
    for w, (start, end) in plan.busy():
        i, j, _ = similarity_range_task(index, start, end, owner=w).columns()
        keys_per_worker.append(set(zip(i.tolist(), j.tolist())))
    union = set().union(*keys_per_worker)
    assert sum(len(keys) for keys in keys_per_worker) == len(union)
    assert union == {(e.i, e.j) for e in all_similarities(model, deps)}


def test_no_dependencies_produce_no_candidates():
    model, deps = generate(GeneratorConfig(n_classes=3, n_methods=30, n_attributes=6,
                                           max_calls_per_method=0, max_accesses_per_method=0, seed=5))
    entries, stats = run_parallel_similarities(model, deps, 4, executor="thread", checked=True)
    assert entries == ()
    assert stats.buffer_lengths == [0, 0, 0, 0]
    assert stats.cursor_final == 0


def test_property_index_rows_match_property_sets(generated_small):
    model, deps = generated_small
    index = PropertyIndex.build(model, deps)
    m = model.n_methods
    assert index.incidence.shape == (m, m + model.n_attributes)
    for mid in range(m):
        expected = sorted(deps.calls_of(mid)) + [m + a for a in sorted(deps.accesses_of(mid))]
        assert sorted(index.incidence[mid].indices.tolist()) == expected
        assert index.degree[mid] == len(expected)


def test_fan_kernel_on_call_matrix(generated_small):
    model, deps = generated_small
    calls = call_matrix(model, deps)
    start, part_in, part_out = fan_range_task(calls, 5, 17)
    assert start == 5
    expected_in, expected_out = fan_in(model, deps), fan_out(model, deps)
    assert part_in.tolist() == [expected_in[mid] for mid in range(5, 17)]
    assert part_out.tolist() == [expected_out[mid] for mid in range(5, 17)]


@pytest.mark.parametrize("workers", [1, 4])
def test_class_metrics_match_on_seed_7(workers):
    model, deps = generate(GeneratorConfig(n_classes=100, n_methods=600, n_attributes=300,
                                           max_calls_per_method=4, max_accesses_per_method=3, seed=7))
    lcom, _, cbo_values, _ = class_metrics(model, deps)
    assert parallel_class_metrics(model, deps, workers, executor="thread") == (lcom, cbo_values)


def test_one_class_many_workers():
    model, deps = build_system([([0, 1], {0: ([1], [0]), 1: ([], [1])})])
    report = parallel_class_report(model, deps, 8, executor="thread")
    assert report == class_metrics(model, deps)


def test_fan_metrics_chain():
    model, deps = build_system([([], {0: ([1], []), 1: ([2], []), 2: ([], [])})])
    assert parallel_fan_metrics(model, deps, 2, executor="thread") == ({0: 0, 1: 1, 2: 1}, {0: 1, 1: 1, 2: 0})


def test_fan_metrics_single_method():
    model, deps = build_system([([], {0: ([], [])})])
    assert parallel_fan_metrics(model, deps, 4, executor="thread") == ({0: 0}, {0: 0})


@pytest.mark.parametrize("workers", [1, 3, 5])
def test_fan_metrics_independent_of_workers(generated_small, workers):
    model, deps = generated_small
    assert parallel_fan_metrics(model, deps, workers, executor="thread") == (fan_in(model, deps), fan_out(model, deps))


def test_full_report_through_process_pool(generated_small):
    model, deps = generated_small
    report, stats = parallel_full_report(model, deps, 2, executor="process", checked=True)
    assert report == full_report(model, deps)
    assert stats.executor == "process"


def test_shared_pool_across_phases(generated_small):
    model, deps = generated_small
    with BackgroundTaskManager(3, "thread") as pool:
        report, _ = parallel_full_report(model, deps, 3, executor="thread", manager=pool)
    assert report == full_report(model, deps)


def test_empty_system():
    model, deps = build_system([])
    report, stats = parallel_full_report(model, deps, 4, executor="thread")
    assert report.similarity == () and report.fan_in == {} and report.lcom == {}
    assert stats.cursor_final == 0
