from datetime import datetime, timezone

import numpy as np
import pytest

from seglab.errors import ValidationError
from seglab.label import (
    UNSEGMENTED,
    LabelSpec,
    OverrideScope,
    assign_labels,
    cluster_level_labels,
    known_label_names,
    label_cost,
    make_override,
    relabel_cluster,
    resolve_effective_labels,
    solve_assignment,
)

from oracles import assignment_reference


def ts(minute):
    return datetime(2026, 1, 1, 12, minute, tzinfo=timezone.utc)


class TestLabelCost:
    def test_exact_target_match_costs_zero(self):
        spec = LabelSpec("Strategic", {"profit": "very_high", "volume_tons": "high"})
        cost = label_cost({"profit": 1.28, "volume_tons": 0.52}, spec)
        assert cost == 0.0

    def test_worked_example(self):
        spec = LabelSpec("Strategic", {"profit": "very_high", "volume_tons": "high"})
        cost = label_cost({"profit": 1.2, "volume_tons": 0.8}, spec)
        assert cost == pytest.approx(0.36, abs=1e-9)

    def test_empty_levels_cost_zero_everywhere(self):
        spec = LabelSpec("Anything", {})
        for z in (-3.0, 0.0, 2.5):
            assert label_cost({"profit": z}, spec) == 0.0

    def test_unknown_feature_is_validation_error(self):
        spec = LabelSpec("X", {"growth": "high"})
        with pytest.raises(ValidationError, match="growth"):
            label_cost({"profit": 0.0}, spec)

    def test_unmentioned_features_carry_no_weight(self):
        spec = LabelSpec("X", {"profit": "moderate"})
        a = label_cost({"profit": 0.3, "volume_tons": 99.0}, spec)
        b = label_cost({"profit": 0.3, "volume_tons": -99.0}, spec)
        assert a == b == pytest.approx(0.3, abs=1e-12)

    def test_translation_consistency_per_feature(self):
        # Shifting a target and the centroid z by the same delta leaves the
        # feature's |target - z| term unchanged.
        for delta in (-2.0, 0.5, 10.0):
            for target, z in ((1.28, 0.4), (-0.52, -1.0), (0.0, 0.25)):
                assert abs((target + delta) - (z + delta)) == pytest.approx(
                    abs(target - z), abs=1e-12
                )

    def test_level_validation(self):
        with pytest.raises(ValidationError):
            LabelSpec("X", {"profit": "enormous"})
        with pytest.raises(ValidationError):
            LabelSpec("", {"profit": "high"})

    def test_vector_form_needs_feature_ids(self):
        spec = LabelSpec("X", {"profit": "high"})
        assert label_cost([0.52], spec, feature_ids=["profit"]) == 0.0
        with pytest.raises(ValidationError):
            label_cost([0.52], spec)


class TestAssignLabels:
    def two_specs(self):
        return [LabelSpec("L0", {}), LabelSpec("L1", {})]

    def test_zero_diagonal(self):
        out = assign_labels([], self.two_specs(), cost_matrix=[[0.0, 1.0], [1.0, 0.0]])
        assert out.mapping == {0: "L0", 1: "L1"}
        assert out.total_cost == 0.0

    def test_diagonal_assignment(self):
        out = assign_labels([], self.two_specs(), cost_matrix=[[1.0, 2.0], [2.0, 1.0]])
        assert out.mapping == {0: "L0", 1: "L1"}
        assert out.total_cost == 2.0

    def test_three_by_three_worked_example(self):
        specs = [LabelSpec(n, {}) for n in ("L0", "L1", "L2")]
        cost = [[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]]
        out = assign_labels([], specs, cost_matrix=cost)
        assert out.mapping == {0: "L1", 1: "L0", 2: "L2"}
        assert out.total_cost == pytest.approx(5.0, abs=1e-12)
        assert out.per_cluster_cost == {0: 1.0, 1: 2.0, 2: 2.0}

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_enumeration_on_random_matrices(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 8))
        cost = rng.random((n, n))
        names = [f"label{i}" for i in range(n)]
        specs = [LabelSpec(name, {}) for name in names]
        out = assign_labels([], specs, cost_matrix=cost)
        expected_cols, expected_total = assignment_reference(cost, names)
        assert out.total_cost == pytest.approx(expected_total, abs=1e-9)
        assert [out.mapping[i] for i in range(n)] == [names[j] for j in expected_cols]

    def test_tie_break_is_lexicographic(self):
        names = ["beta", "alpha", "gamma"]
        specs = [LabelSpec(n, {}) for n in names]
        cost = np.zeros((3, 3))
        out = assign_labels([], specs, cost_matrix=cost)
        assert [out.mapping[i] for i in range(3)] == ["alpha", "beta", "gamma"]
        assert out.mapping == dict(
            enumerate(
                [names[j] for j in assignment_reference(cost, names)[0]]
            )
        )

    def test_scaling_costs_keeps_bijection(self):
        rng = np.random.default_rng(17)
        cost = rng.random((5, 5))
        specs = [LabelSpec(f"L{i}", {}) for i in range(5)]
        base = assign_labels([], specs, cost_matrix=cost)
        scaled = assign_labels([], specs, cost_matrix=cost * 37.5)
        assert base.mapping == scaled.mapping

    def test_count_mismatch_names_the_problem(self):
        centroids = np.zeros((3, 1))
        specs = [LabelSpec("A", {}), LabelSpec("B", {})]
        with pytest.raises(ValidationError, match="add or remove"):
            assign_labels(centroids, specs, feature_ids=["profit"])

    def test_duplicate_names_rejected(self):
        specs = [LabelSpec("A", {}), LabelSpec("A", {})]
        with pytest.raises(ValidationError, match="distinct"):
            assign_labels(np.zeros((2, 1)), specs, feature_ids=["profit"])

    def test_from_centroids_end_to_end(self):
        centroids = np.array([[1.28, 0.52], [0.0, 0.0]])
        specs = [
            LabelSpec("Developing", {"profit": "moderate", "volume_tons": "moderate"}),
            LabelSpec("Strategic", {"profit": "very_high", "volume_tons": "high"}),
        ]
        out = assign_labels(centroids, specs, feature_ids=["profit", "volume_tons"])
        assert out.mapping == {0: "Strategic", 1: "Developing"}
        assert out.total_cost == pytest.approx(0.0, abs=1e-12)

    def test_solver_handles_negative_costs(self):
        cost = np.array([[-5.0, 0.0], [0.0, -5.0]])
        cols, total = solve_assignment(cost)
        assert cols == [0, 1]
        assert total == -10.0


class TestOverrides:
    def setup_assignment(self):
        specs = [LabelSpec("Promising", {}), LabelSpec("Stable", {})]
        assignment = assign_labels([], specs, cost_matrix=[[0.0, 1.0], [1.0, 0.0]])
        customers = {"C1": 0, "C2": 1, "C3": 1}
        return assignment, customers

    def test_instance_override_changes_effective_label_only(self):
        assignment, customers = self.setup_assignment()
        record = make_override(
            OverrideScope.instance("C2"),
            "Promising",
            known_customers=customers,
            known_labels=["Promising", "Stable"],
            n_clusters=2,
            timestamp=ts(0),
        )
        effective = resolve_effective_labels(customers, assignment, [record], 2)
        assert effective == {"C1": "Promising", "C2": "Promising", "C3": "Stable"}
        assert customers["C2"] == 1  # cluster membership untouched

    def test_group_then_instance_last_writer_wins(self):
        assignment, customers = self.setup_assignment()
        group = make_override(
            OverrideScope.group({"C2", "C3"}),
            "Promising",
            customers,
            ["Promising", "Stable"],
            2,
            timestamp=ts(0),
        )
        instance = make_override(
            OverrideScope.instance("C3"),
            "Stable",
            customers,
            ["Promising", "Stable"],
            2,
            timestamp=ts(1),
        )
        effective = resolve_effective_labels(customers, assignment, [group, instance], 2)
        assert effective == {"C1": "Promising", "C2": "Promising", "C3": "Stable"}

    def test_unknown_targets_and_customers_rejected(self):
        assignment, customers = self.setup_assignment()
        with pytest.raises(ValidationError, match="unknown target label"):
            make_override(
                OverrideScope.instance("C1"), "Imaginary", customers, ["Promising"], 2
            )
        with pytest.raises(ValidationError, match="unknown customer"):
            make_override(
                OverrideScope.instance("C9"), "Promising", customers, ["Promising"], 2
            )
        with pytest.raises(ValidationError, match="unknown customer"):
            make_override(
                OverrideScope.group({"C1", "C9"}), "Promising", customers, ["Promising"], 2
            )

    def test_replay_reproduces_effective_labels(self):
        assignment, customers = self.setup_assignment()
        records = [
            make_override(
                OverrideScope.for_cluster(1),
                "Promising",
                customers,
                ["Promising", "Stable"],
                2,
                timestamp=ts(0),
            ),
            make_override(
                OverrideScope.group({"C1", "C2"}),
                "Stable",
                customers,
                ["Promising", "Stable"],
                2,
                timestamp=ts(1),
            ),
            make_override(
                OverrideScope.instance("C1"),
                "Promising",
                customers,
                ["Promising", "Stable"],
                2,
                timestamp=ts(2),
            ),
        ]
        full = resolve_effective_labels(customers, assignment, records, 2)
        replayed = resolve_effective_labels(customers, assignment, list(records), 2)
        assert full == replayed
        assert full == {"C1": "Promising", "C2": "Stable", "C3": "Promising"}

    def test_noise_customers_carry_reserved_label(self):
        assignment, _ = self.setup_assignment()
        customers = {"C1": 0, "C2": 1, "N1": -1}
        effective = resolve_effective_labels(customers, assignment, [], 2)
        assert effective["N1"] == UNSEGMENTED

    def test_noise_customer_can_be_rescued_by_override(self):
        assignment, _ = self.setup_assignment()
        customers = {"C1": 0, "C2": 1, "N1": -1}
        record = make_override(
            OverrideScope.instance("N1"), "Stable", customers, ["Promising", "Stable"], 2
        )
        effective = resolve_effective_labels(customers, assignment, [record], 2)
        assert effective["N1"] == "Stable"


class TestRelabel:
    def setup_assignment(self):
        specs = [LabelSpec("Promising", {}), LabelSpec("Stable", {})]
        return assign_labels([], specs, cost_matrix=[[0.0, 1.0], [1.0, 0.0]])

    def test_rename_cluster_changes_all_members(self):
        assignment = self.setup_assignment()
        customers = {"C1": 0, "C2": 0, "C3": 1}
        record = relabel_cluster([], assignment, 2, 0, "Strategic", timestamp=ts(0))
        effective = resolve_effective_labels(customers, assignment, [record], 2)
        assert effective == {"C1": "Strategic", "C2": "Strategic", "C3": "Stable"}
        # The optimal assignment itself is retained in history.
        assert assignment.mapping[0] == "Promising"

    def test_rename_to_existing_other_label_rejected(self):
        assignment = self.setup_assignment()
        with pytest.raises(ValidationError, match="already in use"):
            relabel_cluster([], assignment, 2, 0, "Stable")

    def test_rename_then_rename_back_restores_original(self):
        assignment = self.setup_assignment()
        customers = {"C1": 0, "C3": 1}
        first = relabel_cluster([], assignment, 2, 0, "Strategic", timestamp=ts(0))
        second = relabel_cluster([first], assignment, 2, 0, "Promising", timestamp=ts(1))
        effective = resolve_effective_labels(customers, assignment, [first, second], 2)
        assert effective == resolve_effective_labels(customers, assignment, [], 2)

    def test_empty_name_rejected(self):
        assignment = self.setup_assignment()
        with pytest.raises(ValidationError, match="non-empty"):
            relabel_cluster([], assignment, 2, 0, "")

    def test_current_labels_follow_renames(self):
        assignment = self.setup_assignment()
        record = relabel_cluster([], assignment, 2, 0, "Strategic", timestamp=ts(0))
        assert cluster_level_labels(assignment, 2, [record]) == {0: "Strategic", 1: "Stable"}
        assert known_label_names(assignment, 2, [record], has_noise=True) == {
            "Strategic",
            "Stable",
            UNSEGMENTED,
        }
