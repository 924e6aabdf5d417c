import json
from datetime import date

import numpy as np
import pytest

from seglab import pipeline
from seglab.errors import (
    NotFoundError,
    SourceHashMismatchError,
    StorageError,
    UndefinedMetricError,
    ValidationError,
)
from seglab.ingest import FilterSpec
from seglab.label import LabelSpec, OverrideScope, make_override
from seglab.store import (
    BuildConfig,
    Workspace,
    adjusted_rand_index,
    compare_versions,
    version_from_doc,
    version_to_doc,
)

from conftest import T1_CSV
from oracles import ari_reference


@pytest.fixture
def workspace(tmp_path):
    return Workspace(tmp_path / "ws")


@pytest.fixture
def t1_dataset(workspace):
    return workspace.register_dataset(T1_CSV)["dataset_id"]


def t1_config(dataset_id, seed=7, k=2, regions=None):
    return BuildConfig(
        dataset_id=dataset_id,
        filter=FilterSpec(date(2024, 1, 1), date(2024, 3, 10), regions=regions),
        features=["profit", "volume_tons", "frequency"],
        algorithm="kmeans",
        params={"k": k, "seed": seed},
        label_specs=[
            LabelSpec("Strategic", {"profit": "very_high", "volume_tons": "high"}),
            LabelSpec("Developing", {"profit": "moderate", "volume_tons": "moderate"}),
        ][:k]
        if k == 2
        else [LabelSpec(f"L{i}", {}) for i in range(k)],
    )


class TestWorkspace:
    def test_save_then_load_round_trips_every_field(self, workspace, t1_dataset):
        version = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        loaded = workspace.load_version(version.version_id)
        assert version_to_doc(loaded) == version_to_doc(version)
        assert loaded.config.filter == version.config.filter
        assert loaded.model.assignment == version.model.assignment
        assert np.array_equal(loaded.model.centroids, version.model.centroids)
        assert loaded.metrics == version.metrics

    def test_version_ids_strictly_increase(self, workspace, t1_dataset):
        first = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        second = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        assert second.version_id > first.version_id
        assert workspace.list_version_ids() == [first.version_id, second.version_id]

    def test_unknown_version_not_found(self, workspace):
        with pytest.raises(NotFoundError):
            workspace.load_version(999)

    def test_document_has_contract_keys(self, workspace, t1_dataset):
        version = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        raw = json.loads(
            (workspace.root / "versions" / f"version_{version.version_id:06d}.json").read_text()
        )
        for key in ("config", "model", "labels", "overrides", "stats", "metrics", "source_hash"):
            assert key in raw

    def test_hash_mismatch_fails_loudly(self, workspace, t1_dataset):
        version = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        index_path = workspace.root / "datasets" / "index.json"
        index = json.loads(index_path.read_text())
        index["datasets"][t1_dataset]["sha256"] = "sha256:" + "0" * 64
        index_path.write_text(json.dumps(index))
        with pytest.raises(SourceHashMismatchError):
            workspace.load_version(version.version_id)

    def test_raw_transactions_not_copied_into_version(self, workspace, t1_dataset):
        version = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        doc = version_to_doc(version)
        assert "C1,2024-01-01" not in json.dumps(doc)
        assert doc["source_hash"].startswith("sha256:")

    def test_write_failure_is_retryable_storage_error(self, workspace, t1_dataset, monkeypatch):
        import seglab.store as store_mod

        def boom(src, dst):
            raise OSError("disk full")

        monkeypatch.setattr(store_mod.os, "replace", boom)
        with pytest.raises(StorageError) as info:
            pipeline.build_and_save(workspace, t1_config(t1_dataset))
        assert info.value.retryable

    def test_fresh_rebuild_has_empty_override_layer(self, workspace, t1_dataset):
        version = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        record = make_override(
            OverrideScope.instance("C2"),
            "Strategic",
            version.model.customer_ids,
            ["Strategic", "Developing"],
            2,
        )
        workspace.append_override(version.version_id, record)
        rebuilt = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        assert workspace.load_version(version.version_id).overrides
        assert rebuilt.overrides == []

    def test_set_labels_is_one_time(self, workspace, t1_dataset):
        config = BuildConfig(
            dataset_id=t1_dataset,
            filter=FilterSpec(date(2024, 1, 1), date(2024, 3, 10)),
            features=["profit", "volume_tons"],
            algorithm="dbscan",
            params={"eps": 5.0, "min_pts": 1},
            label_specs=None,
        )
        version = pipeline.build_and_save(workspace, config)
        assert version.labels is None
        specs = [LabelSpec(f"L{i}", {}) for i in range(version.model.n_clusters)]
        updated = pipeline.complete_labels(workspace, version.version_id, specs)
        assert updated.labels is not None
        with pytest.raises(ValidationError, match="already has"):
            pipeline.complete_labels(workspace, version.version_id, specs)


class TestARI:
    def test_self_comparison_is_exactly_one(self):
        labels = [0, 0, 1, 2, 1, 0]
        assert adjusted_rand_index(labels, list(labels)) == 1.0

    def test_crossed_partitions_give_minus_half(self):
        a = [0, 0, 1, 1]  # {a,b} {c,d}
        b = [0, 1, 0, 1]  # {a,c} {b,d}
        assert adjusted_rand_index(a, b) == pytest.approx(-0.5, abs=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_pair_counting_oracle(self, seed):
        rng = np.random.default_rng(400 + seed)
        a = rng.integers(0, 4, size=10).tolist()
        b = rng.integers(0, 3, size=10).tolist()
        assert adjusted_rand_index(a, b) == pytest.approx(ari_reference(a, b), abs=1e-12)

    def test_trivial_identical_partitions(self):
        assert adjusted_rand_index([0, 0, 0], [5, 5, 5]) == 1.0
        assert adjusted_rand_index([0, 1, 2], [2, 1, 0]) == 1.0


class TestCompareVersions:
    def test_version_vs_itself(self, workspace, t1_dataset):
        version = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        report = compare_versions(workspace, version.version_id, version.version_id)
        assert report.ari == 1.0
        assert report.shared_customers == 3
        assert report.moved == []
        for label_a, row in report.transitions.items():
            assert list(row) == [label_a]

    def test_symmetry_and_transposition(self, workspace, t1_dataset):
        va = pipeline.build_and_save(workspace, t1_config(t1_dataset, seed=1))
        vb = pipeline.build_and_save(workspace, t1_config(t1_dataset, seed=2))
        ab = compare_versions(workspace, va.version_id, vb.version_id)
        ba = compare_versions(workspace, vb.version_id, va.version_id)
        assert ab.ari == ba.ari
        transposed = {}
        for la, row in ab.transitions.items():
            for lb, count in row.items():
                transposed.setdefault(lb, {})[la] = count
        assert transposed == ba.transitions

    def test_transition_cells_sum_to_shared_count(self, workspace, t1_dataset):
        va = pipeline.build_and_save(workspace, t1_config(t1_dataset, seed=1))
        vb = pipeline.build_and_save(workspace, t1_config(t1_dataset, seed=5))
        report = compare_versions(workspace, va.version_id, vb.version_id)
        assert (
            sum(count for row in report.transitions.values() for count in row.values())
            == report.shared_customers
        )

    def test_overrides_feed_transition_matrix(self, workspace, t1_dataset):
        va = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        vb = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        record = make_override(
            OverrideScope.instance("C2"),
            "Strategic" if va.effective_labels()["C2"] != "Strategic" else "Developing",
            va.model.customer_ids,
            ["Strategic", "Developing"],
            2,
        )
        workspace.append_override(vb.version_id, record)
        report = compare_versions(workspace, va.version_id, vb.version_id)
        assert len(report.moved) == 1
        assert report.moved[0]["customer_id"] == "C2"
        assert report.ari == 1.0  # cluster partitions unchanged by overrides

    def test_disjoint_customers_comparison_undefined(self, workspace):
        csv_a = T1_CSV
        csv_b = T1_CSV.replace("C1", "X1").replace("C2", "X2").replace("C3", "X3")
        ds_a = workspace.register_dataset(csv_a)["dataset_id"]
        ds_b = workspace.register_dataset(csv_b)["dataset_id"]
        va = pipeline.build_and_save(workspace, t1_config(ds_a))
        vb = pipeline.build_and_save(workspace, t1_config(ds_b))
        with pytest.raises(UndefinedMetricError):
            compare_versions(workspace, va.version_id, vb.version_id)


class TestEndToEndDeterminism:
    def test_replaying_stored_config_reproduces_model_sections(self, workspace, t1_dataset):
        version = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        stored = workspace.load_version(version.version_id)
        rebuilt = pipeline.build_version(workspace, stored.config)
        original_doc = version_to_doc(stored)
        rebuilt_doc = version_to_doc(rebuilt)
        for section in ("model", "labels", "stats", "metrics", "config"):
            assert json.dumps(original_doc[section], sort_keys=True) == json.dumps(
                rebuilt_doc[section], sort_keys=True
            )

    def test_doc_round_trip_preserves_floats(self, workspace, t1_dataset):
        version = pipeline.build_and_save(workspace, t1_config(t1_dataset))
        doc = version_to_doc(version)
        clone = version_from_doc(json.loads(json.dumps(doc)))
        assert version_to_doc(clone) == doc
