from datetime import date

import numpy as np
import pytest

from seglab.features import FEATURE_IDS, FeatureMatrix, derive_features, standardize
from seglab.ingest import FilterSpec, parse_transactions

# Fixture T1: three customers, six transactions, window 2024-01-01..2024-03-10.
T1_CSV = """customer_id,order_date,revenue,cost,volume_tons,product_group,region
C1,2024-01-01,100,60,10,pulp,EU
C1,2024-03-01,200,120,20,pulp,EU
C2,2024-02-15,50,40,5,paper,NA
C3,2024-01-10,10,5,1,paper,EU
C3,2024-02-10,10,5,1,paper,EU
C3,2024-03-10,10,5,1,pulp,NA
"""

# Hand-computed feature table for T1 (reference date 2024-03-10, 69 window days).
T1_EXPECTED = {
    "C1": {
        "recency_days": 9.0,
        "frequency": 2.0,
        "monetary_revenue": 300.0,
        "profit": 120.0,
        "volume_tons": 30.0,
        "interpurchase_interval_days": 60.0,
        "avg_profit_per_ton": 4.0,
    },
    "C2": {
        "recency_days": 24.0,
        "frequency": 1.0,
        "monetary_revenue": 50.0,
        "profit": 10.0,
        "volume_tons": 5.0,
        "interpurchase_interval_days": 69.0,
        "avg_profit_per_ton": 2.0,
    },
    "C3": {
        "recency_days": 0.0,
        "frequency": 3.0,
        "monetary_revenue": 30.0,
        "profit": 15.0,
        "volume_tons": 3.0,
        "interpurchase_interval_days": 30.0,
        "avg_profit_per_ton": 5.0,
    },
}


@pytest.fixture
def t1_transactions():
    result = parse_transactions(T1_CSV)
    assert not result.rejects
    return result.transactions


@pytest.fixture
def t1_window():
    return FilterSpec(date_start=date(2024, 1, 1), date_end=date(2024, 3, 10))


@pytest.fixture
def t1_matrix(t1_transactions, t1_window):
    return standardize(derive_features(t1_transactions, list(FEATURE_IDS), t1_window))


def make_standardized_matrix(points, feature_ids=None, customer_ids=None) -> FeatureMatrix:
    """Inject a grid directly as standardized space (synthetic test data)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n, d = points.shape
    ids = customer_ids if customer_ids is not None else [f"P{i:03d}" for i in range(n)]
    features = feature_ids if feature_ids is not None else [f"f{j}" for j in range(d)]
    return FeatureMatrix(
        customer_ids=list(ids),
        feature_ids=list(features),
        raw=points.copy(),
        reference_date=date(2024, 3, 10),
        window_days=69,
        standardized=np.ascontiguousarray(points),
        feature_means=np.zeros(d),
        feature_stds=np.ones(d),
    )
