"""Per-customer feature derivation and standardization.

Customers become rows of a feature matrix built from their transactions
inside a filter window: classic recency/frequency/monetary columns plus the
extended B2B columns (profit, volume, inter-purchase interval, average
profit per ton). Standardization to z-scores makes the columns commensurable
for Euclidean clustering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .ingest import FilterSpec, Transaction

#: Canonical feature identifiers, in canonical order. These exact strings
#: appear in API payloads, label specs and the UI.
FEATURE_IDS = (
    "recency_days",
    "frequency",
    "monetary_revenue",
    "profit",
    "volume_tons",
    "interpurchase_interval_days",
    "avg_profit_per_ton",
)


def validate_selection(selection: Sequence[str]) -> list[str]:
    """Check a feature selection: known ids, no duplicates, at least two."""
    selection = list(selection)
    unknown = [f for f in selection if f not in FEATURE_IDS]
    if unknown:
        raise ValidationError(f"unknown feature id(s): {', '.join(unknown)}", field="features")
    if len(set(selection)) != len(selection):
        raise ValidationError("duplicate feature ids in selection", field="features")
    if len(selection) < 2:
        raise ValidationError("select at least 2 features", field="features")
    return selection


@dataclass
class FeatureMatrix:
    """Per-customer feature grid, raw and (optionally) standardized.

    ``raw`` is |customers| x |features|. After :func:`standardize`,
    ``standardized`` holds z-scores and ``feature_means``/``feature_stds``
    the population statistics used, so raw-space values can be recovered and
    ordinal label targets scored. Constant columns standardize to all-zero
    and are listed in ``warnings``.
    """

    customer_ids: list[str]
    feature_ids: list[str]
    raw: np.ndarray
    reference_date: date
    window_days: int
    standardized: np.ndarray | None = None
    feature_means: np.ndarray | None = None
    feature_stds: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.raw = np.ascontiguousarray(self.raw, dtype=np.float64)
        if self.raw.shape != (len(self.customer_ids), len(self.feature_ids)):
            raise ValidationError("raw grid shape does not match customers x features")

    @property
    def n_customers(self) -> int:
        return len(self.customer_ids)

    @property
    def n_features(self) -> int:
        return len(self.feature_ids)

    def customer_index(self, customer_id: str) -> int:
        try:
            return self.customer_ids.index(customer_id)
        except ValueError:
            raise KeyError(customer_id) from None

    def feature_index(self, feature_id: str) -> int:
        try:
            return self.feature_ids.index(feature_id)
        except ValueError:
            raise KeyError(feature_id) from None

    def raw_column(self, feature_id: str) -> np.ndarray:
        return self.raw[:, self.feature_index(feature_id)]

    def require_standardized(self) -> np.ndarray:
        if self.standardized is None:
            raise ValidationError("matrix is not standardized yet")
        return self.standardized


def _mean_gap_days(dates: list[date]) -> float:
    gaps = [(b - a).days for a, b in zip(dates, dates[1:])]
    return sum(gaps) / len(gaps)


def derive_features(
    transactions: Sequence[Transaction],
    selection: Sequence[str],
    window: FilterSpec,
) -> FeatureMatrix:
    """Aggregate transactions into one row per distinct customer.

    ``transactions`` are expected to be pre-filtered by ``window``. The
    reference date for recency is the window end. Customers with fewer than
    two orders fall back to the window length for the inter-purchase
    interval; zero-volume customers get an average profit per ton of 0.
    """
    selection = validate_selection(selection)
    if not transactions:
        raise ValidationError("no customers in window")

    by_customer: dict[str, list[Transaction]] = {}
    for t in transactions:
        by_customer.setdefault(t.customer_id, []).append(t)
    customer_ids = sorted(by_customer)

    reference = window.date_end
    window_days = window.window_days

    rows = []
    for cid in customer_ids:
        txns = by_customer[cid]
        order_dates = sorted(t.order_date for t in txns)
        revenue = sum(t.revenue for t in txns)
        profit = sum(t.profit for t in txns)
        volume = sum(t.volume_tons for t in txns)
        values = {
            "recency_days": float((reference - order_dates[-1]).days),
            "frequency": float(len(txns)),
            "monetary_revenue": revenue,
            "profit": profit,
            "volume_tons": volume,
            "interpurchase_interval_days": (
                _mean_gap_days(order_dates) if len(order_dates) >= 2 else float(window_days)
            ),
            "avg_profit_per_ton": profit / volume if volume != 0 else 0.0,
        }
        rows.append([values[f] for f in selection])

    return FeatureMatrix(
        customer_ids=customer_ids,
        feature_ids=selection,
        raw=np.array(rows, dtype=np.float64),
        reference_date=reference,
        window_days=window_days,
    )


def standardize(matrix: FeatureMatrix) -> FeatureMatrix:
    """Fill the standardized grid: ``z = (x - mean) / population_std``.

    Constant columns (population std 0) map to all-zero and are reported in
    the returned matrix's ``warnings``. The input matrix is not mutated.
    """
    raw = matrix.raw
    means = raw.mean(axis=0)
    stds = np.sqrt(((raw - means) ** 2).mean(axis=0))
    warnings = []
    z = np.zeros_like(raw)
    for j, feature in enumerate(matrix.feature_ids):
        if stds[j] == 0.0:
            warnings.append(f"feature '{feature}' is constant; standardized to all zeros")
        else:
            z[:, j] = (raw[:, j] - means[j]) / stds[j]
    return FeatureMatrix(
        customer_ids=list(matrix.customer_ids),
        feature_ids=list(matrix.feature_ids),
        raw=raw.copy(),
        reference_date=matrix.reference_date,
        window_days=matrix.window_days,
        standardized=z,
        feature_means=means,
        feature_stds=stds,
        warnings=warnings,
    )
