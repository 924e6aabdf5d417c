"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` to see every line. All
tolerances and runtime budgets are pinned here; the oracles live in
tests/oracles.py and are independent of the implementation they check.
"""

import json
import time
from datetime import date

import numpy as np
import pytest

from seglab import pipeline
from seglab.cluster import ClusterModel, dbscan, kmeans
from seglab.explain import ExplainConfig, explain_instance
from seglab.features import FEATURE_IDS, derive_features
from seglab.ingest import FilterSpec, parse_transactions
from seglab.label import (
    LabelSpec,
    OverrideScope,
    assign_labels,
    label_cost,
    make_override,
    resolve_effective_labels,
)
from seglab.store import BuildConfig, Workspace, adjusted_rand_index, version_to_doc

from conftest import T1_CSV, T1_EXPECTED, make_standardized_matrix
from oracles import (
    ari_reference,
    assignment_reference,
    best_partition_wcss,
    dbscan_reference,
)


def report(number: int, passed: bool, detail: str) -> None:
    print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number:02d}: {detail}")
    assert passed, f"criterion {number} failed: {detail}"


def test_criterion_01_feature_oracle():
    started = time.monotonic()
    parsed = parse_transactions(T1_CSV)
    window = FilterSpec(date(2024, 1, 1), date(2024, 3, 10))
    matrix = derive_features(parsed.transactions, list(FEATURE_IDS), window)
    mismatches = []
    for i, cid in enumerate(matrix.customer_ids):
        for j, feature in enumerate(matrix.feature_ids):
            expected = T1_EXPECTED[cid][feature]
            actual = matrix.raw[i, j]
            exact = expected == actual if float(expected).is_integer() else abs(expected - actual) <= 1e-9
            if not exact:
                mismatches.append((cid, feature, expected, actual))
    elapsed = time.monotonic() - started
    report(
        1,
        not mismatches and elapsed < 1.0,
        f"derive_features matches the hand-computed T1 table "
        f"({len(mismatches)} mismatches, {elapsed:.3f}s < 1s)",
    )


def test_criterion_02_kmeans_optimality_at_desk_scale():
    started = time.monotonic()
    rng = np.random.default_rng(2024)
    failures = 0
    for trial in range(20):
        n = int(rng.integers(4, 9))
        k = int(rng.integers(2, 4))
        matrix = make_standardized_matrix(rng.normal(size=(n, 2)))
        model = kmeans(matrix, k=k, seed=trial)
        if model.wcss > best_partition_wcss(matrix.standardized, k) + 1e-9:
            failures += 1
    elapsed = time.monotonic() - started
    report(
        2,
        failures == 0 and elapsed < 10.0,
        f"k-means reached the exhaustive-enumeration optimum on 20/20 random "
        f"instances (n<=8, k<=3) in {elapsed:.2f}s < 10s",
    )


def test_criterion_03_kmeans_invariants():
    rng = np.random.default_rng(3)
    monotone_violations = 0
    determinism_violations = 0
    for trial in range(100):
        n = int(rng.integers(5, 30))
        d = int(rng.integers(1, 5))
        k = int(rng.integers(2, min(n, 6)))
        matrix = make_standardized_matrix(rng.normal(size=(n, d)))
        model = kmeans(matrix, k=k, seed=trial)
        for earlier, later in zip(model.wcss_trace, model.wcss_trace[1:]):
            if later > earlier + 1e-9 * max(1.0, earlier):
                monotone_violations += 1
        again = kmeans(matrix, k=k, seed=trial)
        if not (
            np.array_equal(model.labels, again.labels)
            and np.array_equal(model.centroids, again.centroids)
        ):
            determinism_violations += 1
    report(
        3,
        monotone_violations == 0 and determinism_violations == 0,
        f"wcss non-increasing per iteration and bit-identical reruns on 100 "
        f"random instances ({monotone_violations} monotonicity / "
        f"{determinism_violations} determinism violations)",
    )


def test_criterion_04_dbscan_oracle():
    started = time.monotonic()
    rng = np.random.default_rng(4)
    failures = 0
    for trial in range(50):
        n = int(rng.integers(5, 21))
        X = rng.normal(size=(n, 2)) * rng.uniform(0.5, 2.0)
        eps = float(rng.uniform(0.3, 1.5))
        min_pts = int(rng.integers(2, 5))
        model = dbscan(make_standardized_matrix(X), eps=eps, min_pts=min_pts)
        if not np.array_equal(model.labels, dbscan_reference(X, eps, min_pts)):
            failures += 1
    elapsed = time.monotonic() - started
    report(
        4,
        failures == 0 and elapsed < 5.0,
        f"DBSCAN matches the transitive-closure density-connectivity oracle on "
        f"50/50 random instances (n<=20) in {elapsed:.2f}s < 5s",
    )


def test_criterion_05_assignment_solver_oracle():
    started = time.monotonic()
    rng = np.random.default_rng(5)
    failures = 0
    for trial in range(100):
        n = int(rng.integers(1, 8))
        cost = rng.random((n, n))
        names = [f"label{i}" for i in range(n)]
        out = assign_labels([], [LabelSpec(nm, {}) for nm in names], cost_matrix=cost)
        expected_cols, expected_total = assignment_reference(cost, names)
        if abs(out.total_cost - expected_total) > 1e-9:
            failures += 1
        elif [out.mapping[i] for i in range(n)] != [names[j] for j in expected_cols]:
            failures += 1
    # Worked 3x3 example: minimum cost 5 via {0->1, 1->0, 2->2}.
    worked = assign_labels(
        [],
        [LabelSpec(nm, {}) for nm in ("L0", "L1", "L2")],
        cost_matrix=[[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]],
    )
    worked_ok = worked.mapping == {0: "L1", 1: "L0", 2: "L2"} and worked.total_cost == 5.0
    elapsed = time.monotonic() - started
    report(
        5,
        failures == 0 and worked_ok and elapsed < 5.0,
        f"assignment solver matches permutation enumeration on 100/100 random "
        f"matrices (n<=7) plus the worked cost-5 case in {elapsed:.2f}s < 5s",
    )


def test_criterion_06_label_cost_exactness():
    spec = LabelSpec("Strategic", {"profit": "very_high", "volume_tons": "high"})
    worked = label_cost({"profit": 1.2, "volume_tons": 0.8}, spec)
    exact = label_cost({"profit": 1.28, "volume_tons": 0.52}, spec)
    ok = abs(worked - 0.36) <= 1e-9 and exact == 0.0
    report(
        6,
        ok,
        f"label cost worked example = {worked!r} (0.36 +- 1e-9), "
        f"exact-target case = {exact!r} (0)",
    )


def test_criterion_07_explanation_construction():
    # Axis-separated 2-D fixture: centroids (-2,0) and (+2,0), membership
    # decided only by feature 0; the explained instance sits in cluster 1
    # near the boundary, where the surrogate is most informative.
    points = np.array(
        [
            [-2.0, 0.5],
            [-2.0, -0.5],
            [-2.0, 0.0],
            [2.0, 0.5],
            [2.0, -0.5],
            [3.9, 0.0],
            [0.1, 0.0],
        ]
    )
    labels = np.array([0, 0, 0, 1, 1, 1, 1], dtype=np.int64)
    matrix = make_standardized_matrix(points)
    centroids = np.array([[-2.0, 0.0], [2.0, 0.0]])
    model = ClusterModel(
        algorithm="kmeans",
        params={"k": 2, "seed": 0},
        customer_ids=list(matrix.customer_ids),
        labels=labels,
        centroids=centroids,
        feature_ids=list(matrix.feature_ids),
        iterations_run=1,
        converged=True,
        wcss=float(((points - centroids[labels]) ** 2).sum()),
    )
    first = explain_instance(model, matrix, "P006", ExplainConfig(seed=7))
    second = explain_instance(model, matrix, "P006", ExplainConfig(seed=7))

    dominant = first.coefficients["f0"]
    minor = first.coefficients["f1"]
    sign_ok = dominant > 0
    dominance_ok = abs(dominant) > 3 * abs(minor)
    deterministic = (
        first.coefficients == second.coefficients and first.fidelity == second.fidelity
    )
    fidelity_ok = first.fidelity >= 0.8
    fidelity_note = (
        ">= 0.8"
        if fidelity_ok
        else "< 0.8 (weighted R^2 of a binary-target linear surrogate is capped "
        "near 2/pi; see decisions ledger)"
    )
    report(
        7,
        sign_ok and dominance_ok and deterministic and fidelity_ok,
        f"dominant coef feature 0 ({dominant:+.3f}, sign {'ok' if sign_ok else 'WRONG'}), "
        f"dominance {abs(dominant) / max(abs(minor), 1e-12):.1f}x "
        f"({'ok' if dominance_ok else 'WRONG'}), seeded determinism "
        f"{'ok' if deterministic else 'WRONG'}, fidelity {first.fidelity:.3f} "
        f"{fidelity_note}",
    )


def test_criterion_08_ari_identities():
    self_labels = [0, 0, 1, 2, 2, 1, 0]
    self_ok = adjusted_rand_index(self_labels, list(self_labels)) == 1.0
    crossed = adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1])
    crossed_ok = abs(crossed - (-0.5)) <= 1e-9
    rng = np.random.default_rng(8)
    random_failures = 0
    for _ in range(50):
        n = int(rng.integers(3, 15))
        a = rng.integers(0, 4, size=n).tolist()
        b = rng.integers(0, 4, size=n).tolist()
        if abs(adjusted_rand_index(a, b) - ari_reference(a, b)) > 1e-12:
            random_failures += 1
    report(
        8,
        self_ok and crossed_ok and random_failures == 0,
        f"ARI self-comparison = 1.0 exactly, crossed 4-customer case = {crossed} "
        f"(-0.5 +- 1e-9), 50/50 random pairs match direct pair counting",
    )


def test_criterion_09_end_to_end_determinism(tmp_path):
    workspace = Workspace(tmp_path / "ws")
    dataset_id = workspace.register_dataset(T1_CSV)["dataset_id"]
    config = BuildConfig(
        dataset_id=dataset_id,
        filter=FilterSpec(date(2024, 1, 1), date(2024, 3, 10)),
        features=["profit", "volume_tons", "frequency", "recency_days"],
        algorithm="kmeans",
        params={"k": 2, "seed": 11},
        label_specs=[
            LabelSpec("Strategic", {"profit": "very_high", "volume_tons": "high"}),
            LabelSpec("Developing", {"profit": "moderate", "volume_tons": "moderate"}),
        ],
    )
    built = pipeline.build_and_save(workspace, config)
    reloaded = workspace.load_version(built.version_id)
    rebuilt = pipeline.build_version(workspace, reloaded.config)
    byte_equal = all(
        json.dumps(version_to_doc(reloaded)[section]).encode()
        == json.dumps(version_to_doc(rebuilt)[section]).encode()
        for section in ("config", "model", "labels", "stats", "metrics")
    )
    report(
        9,
        byte_equal,
        "build -> save -> reload config -> rebuild reproduces byte-equal "
        "config/model/labels/stats/metrics sections",
    )


def test_criterion_10_override_semantics():
    specs = [LabelSpec("Promising", {}), LabelSpec("Stable", {})]
    assignment = assign_labels([], specs, cost_matrix=[[0.0, 1.0], [1.0, 0.0]])
    customers = {"C1": 0, "C2": 1, "C3": 1}
    labels_pool = ["Promising", "Stable"]

    instance = make_override(
        OverrideScope.instance("C2"), "Promising", customers, labels_pool, 2
    )
    effective_1 = resolve_effective_labels(customers, assignment, [instance], 2)
    example_1 = effective_1["C2"] == "Promising" and customers["C2"] == 1

    group = make_override(
        OverrideScope.group({"C2", "C3"}), "Promising", customers, labels_pool, 2
    )
    late_instance = make_override(
        OverrideScope.instance("C3"), "Stable", customers, labels_pool, 2
    )
    effective_2 = resolve_effective_labels(
        customers, assignment, [group, late_instance], 2
    )
    example_2 = effective_2["C3"] == "Stable" and effective_2["C2"] == "Promising"

    # A fresh build of the same config has an empty override layer.
    example_3 = resolve_effective_labels(customers, assignment, [], 2) == {
        "C1": "Promising",
        "C2": "Stable",
        "C3": "Stable",
    }

    replay = resolve_effective_labels(
        customers, assignment, [instance, group, late_instance], 2
    ) == resolve_effective_labels(
        customers, assignment, list([instance, group, late_instance]), 2
    )
    report(
        10,
        example_1 and example_2 and example_3 and replay,
        "override examples hold (instance, group-then-instance, fresh layer) "
        "and effective labels replay from the log",
    )


def test_criterion_11_api_contract(tmp_path):
    from fastapi.testclient import TestClient

    from seglab.service import create_app
    from seglab.service.schemas import (
        ClustersDoc,
        CompareDoc,
        DatasetSummaryDoc,
        ExplanationDoc,
        HistoryDoc,
        JobDoc,
        ScatterDoc,
        VersionDetailDoc,
    )

    started = time.monotonic()
    app = create_app(tmp_path / "ws")
    request = {
        "filter": {"date_start": "2024-01-01", "date_end": "2024-03-10"},
        "features": ["profit", "volume_tons", "frequency"],
        "algorithm": "kmeans",
        "params": {"k": 2, "seed": 7},
        "label_specs": [
            {"label_name": "Strategic", "levels": {"profit": "very_high"}},
            {"label_name": "Developing", "levels": {"profit": "moderate"}},
        ],
    }
    with TestClient(app) as client:
        dataset_id = client.post(
            "/api/v1/datasets?name=t1", content=T1_CSV.encode()
        ).json()["dataset_id"]
        job = client.post(
            "/api/v1/models", json={**request, "dataset_id": dataset_id}
        ).json()
        deadline = time.monotonic() + 5
        while job["state"] not in ("ready", "failed") and time.monotonic() < deadline:
            time.sleep(0.01)
            job = client.get(f"/api/v1/jobs/{job['job_id']}").json()
        ready = JobDoc.model_validate(job).state == "ready"
        version_id = job["version_id"]

        schema_valid = True
        try:
            DatasetSummaryDoc.model_validate(
                client.get(f"/api/v1/datasets/{dataset_id}/summary").json()
            )
            VersionDetailDoc.model_validate(
                client.get(f"/api/v1/models/{version_id}").json()
            )
            ClustersDoc.model_validate(
                client.get(f"/api/v1/models/{version_id}/clusters").json()
            )
            ScatterDoc.model_validate(
                client.get(
                    f"/api/v1/models/{version_id}/scatter",
                    params={"x": "profit", "y": "volume_tons"},
                ).json()
            )
            ExplanationDoc.model_validate(
                client.get(f"/api/v1/models/{version_id}/explain/C1").json()
            )
            HistoryDoc.model_validate(
                client.get(
                    "/api/v1/customers/C3/history", params={"dataset": dataset_id}
                ).json()
            )
            CompareDoc.model_validate(
                client.get(
                    "/api/v1/compare", params={"a": version_id, "b": version_id}
                ).json()
            )
        except Exception:
            schema_valid = False

        mismatch_job = client.post(
            "/api/v1/models",
            json={
                **request,
                "dataset_id": dataset_id,
                "label_specs": request["label_specs"] + [{"label_name": "X", "levels": {}}],
            },
        ).json()
        mismatch_ok = mismatch_job["state"] == "failed" and any(
            f["field"] == "label_specs" and "mismatch" in f["message"]
            for f in mismatch_job["error"]["fields"]
        )
    elapsed = time.monotonic() - started
    report(
        11,
        ready and schema_valid and mismatch_ok and elapsed < 5.0,
        f"happy-path build ready, every read endpoint schema-valid, "
        f"count-mismatch fails with field message ({elapsed:.2f}s < 5s)",
    )
