"""Cross-backend equivalence: the compiled kernels and the NumPy fallback
must produce identical partitions and matching numbers."""

import numpy as np
import pytest

from seglab import kernels

pytestmark = pytest.mark.skipif(
    "c" not in kernels.available_backends(),
    reason="compiled kernel backend not built",
)

BACKENDS = [kernels.get_backend("c"), kernels.get_backend("python")]


def random_points(seed, n=40, d=5):
    rng = np.random.default_rng(seed)
    return np.ascontiguousarray(rng.normal(size=(n, d)))


def test_compiled_backend_is_default():
    assert kernels.BACKEND == "c"


@pytest.mark.parametrize("seed", range(5))
def test_sq_dists_bitwise_equal(seed):
    X = random_points(seed)
    p = np.ascontiguousarray(X[3])
    c, py = (k.sq_dists_to_point(X, p) for k in BACKENDS)
    assert np.array_equal(c, py)


@pytest.mark.parametrize("seed", range(5))
def test_assignment_identical(seed):
    X = random_points(seed)
    C = np.ascontiguousarray(X[:4])
    (lab_c, best_c), (lab_py, best_py) = (k.assign_to_centroids(X, C) for k in BACKENDS)
    assert np.array_equal(lab_c, lab_py)
    assert np.array_equal(best_c, best_py)


@pytest.mark.parametrize("seed", range(5))
def test_accumulate_bitwise_equal(seed):
    X = random_points(seed)
    labels = np.random.default_rng(seed).integers(0, 3, size=X.shape[0]).astype(np.int64)
    (s_c, n_c), (s_py, n_py) = (k.accumulate_clusters(X, labels, 3) for k in BACKENDS)
    assert np.array_equal(s_c, s_py)
    assert np.array_equal(n_c, n_py)


@pytest.mark.parametrize("seed", range(8))
def test_dbscan_labels_identical(seed):
    X = random_points(seed, n=60, d=3)
    c, py = (k.dbscan_labels(X, 0.9, 4) for k in BACKENDS)
    assert np.array_equal(c, py)


@pytest.mark.parametrize("seed", range(5))
def test_pair_distance_sums_close(seed):
    X = random_points(seed, n=30, d=4)
    labels = np.random.default_rng(seed + 1).integers(-1, 3, size=30).astype(np.int64)
    (s_c, n_c), (s_py, n_py) = (k.cluster_pair_distance_sums(X, labels, 3) for k in BACKENDS)
    assert np.array_equal(n_c, n_py)
    assert np.allclose(s_c, s_py, atol=1e-9, rtol=0)


def test_forced_python_backend(monkeypatch):
    import importlib

    monkeypatch.setenv("SEGLAB_PURE_PYTHON", "1")
    reloaded = importlib.reload(kernels)
    try:
        assert reloaded.BACKEND == "python"
    finally:
        monkeypatch.delenv("SEGLAB_PURE_PYTHON")
        importlib.reload(kernels)
