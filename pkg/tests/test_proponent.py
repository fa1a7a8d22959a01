import pytest

from mm.core.errors import ContractViolation, OwnershipError
from mm.core.ingest import GeneratorConfig, generate
from mm.core.metrics_engine import MetricsReport, SimilarityEntry, full_report
from mm.core.proponent import (
    Thresholds, compute_thresholds, suggest_all, suggest_by_cohesion, suggest_by_coupling, suggest_by_similarity,
    what_if_move,
)
from tests.oracles import build_system, oracle_moves, reassign


def _moves(suggestions):
    return [(s.method, s.origin, s.destination) for s in suggestions]


# --- thresholds ---

def _report_with(similarities, m=3, lcom=None, cbo=None):
    return MetricsReport(
        fan_out={mid: 0 for mid in range(m)},
        similarity=tuple(SimilarityEntry(*s) for s in similarities),
        lcom=lcom or {}, cbo=cbo or {},
    )


def test_mean_similarity_threshold():
    report = _report_with([(0, 1, 0.5), (0, 2, 1.0)], lcom={0: 0.2, 1: 0.4}, cbo={0: 1, 1: 4})
    thresholds = compute_thresholds(report)
    assert thresholds.similarity_threshold == 0.75
    assert thresholds.lcom_threshold == pytest.approx(0.3)
    assert thresholds.cbo_threshold == 2.5


def test_mean_with_zeros_spreads_over_all_pairs():
    report = _report_with([(0, 1, 0.5), (0, 2, 1.0)], m=3)
    assert compute_thresholds(report, "mean_with_zeros").similarity_threshold == 0.5


def test_empty_collections_give_zero_thresholds():
    thresholds = compute_thresholds(_report_with([], m=0))
    assert (thresholds.similarity_threshold, thresholds.lcom_threshold, thresholds.cbo_threshold) == (0, 0, 0)
    assert compute_thresholds(_report_with([], m=0), "mean_with_zeros").similarity_threshold == 0.0


def test_explicit_values_pass_through():
    report = _report_with([(0, 1, 0.5)])
    thresholds = compute_thresholds(report, "explicit", similarity=0.9, lcom=0.1, cbo=3)
    assert (thresholds.similarity_threshold, thresholds.lcom_threshold, thresholds.cbo_threshold) == (0.9, 0.1, 3)


def test_override_wins_in_mean_mode():
    report = _report_with([(0, 1, 0.5), (0, 2, 1.0)])
    assert compute_thresholds(report, "mean", similarity=0.1).similarity_threshold == 0.1


def test_negative_threshold_rejected():
    with pytest.raises(ContractViolation):
        Thresholds(similarity_threshold=-0.1)


# --- what-if ---

def test_what_if_values(envy_system):
    model, deps = envy_system
    result = what_if_move(1, 0, 1, model, deps)
    assert (result.lcom_origin_before, result.lcom_origin_after) == (0.5, 0.0)
    assert result.lcom_dest_before == 0.25
    assert result.lcom_dest_after == 1.0 - (1.0 + 1.0 + 0.5) / 3
    assert (result.cbo_origin_before, result.cbo_origin_after) == (1, 0)
    assert (result.cbo_dest_before, result.cbo_dest_after) == (0, 0)


def test_what_if_does_not_mutate(envy_system):
    model, deps = envy_system
    before = full_report(model, deps)
    what_if_move(1, 0, 1, model, deps)
    assert model.owner_of_method(1) == 0
    assert full_report(model, deps) == before


def test_moving_out_the_only_method_leaves_degenerate_origin():
    model, deps = build_system([([0], {0: ([], [])}), ([1], {1: ([], [1])})])
    result = what_if_move(0, 0, 1, model, deps)
    assert result.lcom_origin_after == 0.0
    assert result.origin_degenerate_after


def test_move_and_reverse_swap_roles(envy_system):
    model, deps = envy_system
    forward = what_if_move(1, 0, 1, model, deps)
    backward = what_if_move(1, 1, 0, reassign(model, 1, 1), deps)
    assert (backward.lcom_origin_before, backward.lcom_origin_after) == (forward.lcom_dest_after, forward.lcom_dest_before)
    assert (backward.lcom_dest_before, backward.lcom_dest_after) == (forward.lcom_origin_after, forward.lcom_origin_before)
    assert (backward.cbo_origin_before, backward.cbo_origin_after) == (forward.cbo_dest_after, forward.cbo_dest_before)
    assert (backward.cbo_dest_before, backward.cbo_dest_after) == (forward.cbo_origin_after, forward.cbo_origin_before)


def test_what_if_matches_rebuilt_model(generated_small):
    model, deps = generated_small
    report = full_report(model, deps)
    uncalled = [mid for mid, count in report.fan_in.items() if count == 0]
    assert uncalled
    method = uncalled[0]
    origin = model.owner_of_method(method)
    destination = (origin + 1) % model.n_classes
    result = what_if_move(method, origin, destination, model, deps)
    moved = full_report(reassign(model, method, destination), deps)
    assert (result.lcom_origin_after, result.lcom_dest_after) == (moved.lcom[origin], moved.lcom[destination])
    assert (result.cbo_origin_after, result.cbo_dest_after) == (moved.cbo[origin], moved.cbo[destination])


def test_what_if_rejects_wrong_owner(envy_system):
    model, deps = envy_system
    with pytest.raises(OwnershipError):
        what_if_move(1, 1, 0, model, deps)
    with pytest.raises(OwnershipError):
        what_if_move(1, 0, 0, model, deps)


# --- criteria ---

def test_similarity_criterion_moves_envious_method(envy_system):
    model, deps = envy_system
    report = full_report(model, deps)
    suggestions = suggest_by_similarity(model, deps, report, compute_thresholds(report))
    assert _moves(suggestions) == [(1, 0, 1)]
    assert suggestions[0].criteria == ("similarity",)


def test_similarity_pairs_on_one_class_give_nothing():
    model, deps = build_system([([0], {0: ([], [0]), 1: ([], [0])}), ([1], {2: ([], [1])})])
    report = full_report(model, deps)
    assert suggest_by_similarity(model, deps, report, Thresholds()) == []


def test_similarity_below_threshold_gives_nothing(envy_system):
    model, deps = envy_system
    report = full_report(model, deps)
    assert suggest_by_similarity(model, deps, report, Thresholds(similarity_threshold=1.0)) == []


def test_cohesion_criterion(envy_system):
    model, deps = envy_system
    report = full_report(model, deps)
    suggestions = suggest_by_cohesion(model, deps, report, compute_thresholds(report))
    assert _moves(suggestions) == [(1, 0, 1)]
    s = suggestions[0]
    assert s.lcom_origin_after < s.lcom_origin_before and s.lcom_dest_after < s.lcom_dest_before
    assert s.lowers_origin_cbo


def test_cohesive_system_gives_no_cohesion_moves(cohesive_system):
    model, deps = cohesive_system
    report = full_report(model, deps)
    assert suggest_by_cohesion(model, deps, report, compute_thresholds(report)) == []


def test_method_without_dependencies_never_moves():
    model, deps = build_system([([0, 1], {0: ([], []), 1: ([], [0])}), ([2], {2: ([], [2])})])
    report = full_report(model, deps)
    suggestions = suggest_by_cohesion(model, deps, report, Thresholds())
    assert 0 not in [s.method for s in suggestions]


def test_coupling_criterion(coupling_system):
    model, deps = coupling_system
    report = full_report(model, deps)
    suggestions = suggest_by_coupling(model, deps, report, compute_thresholds(report), verbose=True)
    assert _moves(suggestions) == [(0, 0, 1)]
    s = suggestions[0]
    assert (s.cbo_origin_before, s.cbo_origin_after, s.cbo_dest_before, s.cbo_dest_after) == (2, 0, 1, 1)
    # moving to class 2 would raise its CBO from 0 to 1
    assert s.alternatives == ()


def test_zero_cbo_class_is_never_a_source(coupling_system):
    model, deps = coupling_system
    report = full_report(model, deps)
    suggestions = suggest_by_coupling(model, deps, report, Thresholds(cbo_threshold=0.0))
    assert all(report.cbo[s.origin] > 0 for s in suggestions)
    assert 3 not in [s.method for s in suggestions]


def test_max_moves_per_class_takes_methods_in_order():
    # class 0: m0 -> a0, m1 and m2 -> class 1's attributes
    model, deps = build_system([
        ([0], {0: ([], [0]), 1: ([], [1, 2]), 2: ([], [1, 2])}),
        ([1, 2], {3: ([], [1])}),
    ])
    report = full_report(model, deps)
    thresholds = compute_thresholds(report)
    assert _moves(suggest_by_cohesion(model, deps, report, thresholds)) == [(1, 0, 1), (2, 0, 1)]
    assert _moves(suggest_by_cohesion(model, deps, report, thresholds, max_moves_per_class=1)) == [(1, 0, 1)]


# --- combination ---

def test_single_criterion_equals_its_list(envy_system):
    model, deps = envy_system
    report = full_report(model, deps)
    thresholds = compute_thresholds(report)
    assert suggest_all(model, deps, report, thresholds, criteria=["cohesion"]) == \
        suggest_by_cohesion(model, deps, report, thresholds)


def test_union_merges_tags(envy_system):
    model, deps = envy_system
    report = full_report(model, deps)
    suggestions = suggest_all(model, deps, report, compute_thresholds(report))
    assert _moves(suggestions) == [(1, 0, 1)]
    assert suggestions[0].criteria == ("similarity", "cohesion", "coupling")


def test_intersection_keeps_moves_of_all_criteria(envy_system):
    model, deps = envy_system
    report = full_report(model, deps)
    suggestions = suggest_all(model, deps, report, compute_thresholds(report),
                              criteria=["cohesion", "coupling"], combine="intersection")
    assert _moves(suggestions) == [(1, 0, 1)]
    assert suggestions[0].criteria == ("cohesion", "coupling")


def test_intersection_of_disjoint_sets_is_empty(coupling_system):
    model, deps = coupling_system
    report = full_report(model, deps)
    thresholds = compute_thresholds(report)
    assert suggest_by_coupling(model, deps, report, thresholds)
    assert suggest_all(model, deps, report, thresholds, criteria=["cohesion", "coupling"],
                       combine="intersection") == []


def test_unknown_criterion_rejected(envy_system):
    model, deps = envy_system
    report = full_report(model, deps)
    with pytest.raises(ContractViolation):
        suggest_all(model, deps, report, Thresholds(), criteria=["size"])


def test_parallel_cohesion_matches_sequential():
    model, deps = generate(GeneratorConfig(n_classes=20, n_methods=200, n_attributes=100,
                                           max_calls_per_method=4, max_accesses_per_method=3, seed=3))
    report = full_report(model, deps)
    thresholds = compute_thresholds(report)
    sequential = suggest_by_cohesion(model, deps, report, thresholds)
    for workers in (2, 5):
        assert suggest_by_cohesion(model, deps, report, thresholds, n_workers=workers, executor="thread") == sequential


@pytest.mark.parametrize("criterion", ["similarity", "cohesion", "coupling"])
@pytest.mark.parametrize("seed", range(8))
def test_suggestions_match_oracle(seed, criterion):
    model, deps = generate(GeneratorConfig(n_classes=4, n_methods=16, n_attributes=8,
                                           max_calls_per_method=3, max_accesses_per_method=3, seed=seed))
    report = full_report(model, deps)
    t = compute_thresholds(report)
    suggestions = suggest_all(model, deps, report, t, criteria=[criterion])
    expected = oracle_moves(model, deps, criterion, t.similarity_threshold, t.lcom_threshold, t.cbo_threshold)
    assert {s.method: s.destination for s in suggestions} == expected
