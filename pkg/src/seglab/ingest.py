"""Transaction ingestion: parsing, filtering, per-customer history, outlier flags.

The input format is delimiter-separated text with a header row. Dates are
ISO-8601 (``YYYY-MM-DD``), decimals use ``.`` and no thousands separators.
Bad rows never abort a batch; they are collected into a reject report so
large real-world exports can be loaded as-is.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping, Sequence, TYPE_CHECKING

from .errors import SchemaError, ValidationError

if TYPE_CHECKING:  # pragma: no cover
    from .features import FeatureMatrix

# Canonical column names; a custom schema maps file headers onto these.
TRANSACTION_FIELDS = (
    "customer_id",
    "order_date",
    "revenue",
    "cost",
    "volume_tons",
    "product_group",
    "region",
)

DEFAULT_SCHEMA: dict[str, str] = {name: name for name in TRANSACTION_FIELDS}


@dataclass(frozen=True)
class Transaction:
    """One sales line item."""

    customer_id: str
    order_date: date
    revenue: float
    cost: float
    volume_tons: float
    product_group: str
    region: str

    @property
    def profit(self) -> float:
        return self.revenue - self.cost


@dataclass(frozen=True)
class RejectedRow:
    row_number: int  # 1-based position among data rows (header excluded)
    reason: str


@dataclass
class ParseResult:
    transactions: list[Transaction]
    rejects: list[RejectedRow]


@dataclass(frozen=True)
class FilterSpec:
    """Timeframe plus optional dimension filters applied before modeling.

    Empty or ``None`` optional sets mean "no restriction".
    """

    date_start: date
    date_end: date
    regions: frozenset[str] | None = None
    product_groups: frozenset[str] | None = None
    excluded_customers: frozenset[str] | None = None

    def __post_init__(self):
        if self.date_start > self.date_end:
            raise ValidationError("date_start must be <= date_end", field="date_start")
        for name in ("regions", "product_groups", "excluded_customers"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, frozenset):
                object.__setattr__(self, name, frozenset(value))

    @property
    def window_days(self) -> int:
        return (self.date_end - self.date_start).days


@dataclass(frozen=True)
class MonthlyRollup:
    month: str  # "YYYY-MM"
    revenue: float
    profit: float
    volume_tons: float


@dataclass
class CustomerHistory:
    customer_id: str
    transactions: list[Transaction]  # ascending by order_date
    monthly: list[MonthlyRollup]


@dataclass(frozen=True)
class OutlierFlag:
    customer_id: str
    feature: str
    z_value: float


def _parse_date(text: str) -> date:
    return date.fromisoformat(text.strip())


def _parse_decimal(text: str) -> float:
    value = float(text.strip())
    if not math.isfinite(value):
        raise ValueError("non-finite")
    return value


def parse_transactions(
    source: bytes | str | io.IOBase,
    schema: Mapping[str, str] | None = None,
    delimiter: str = ",",
) -> ParseResult:
    """Parse delimiter-separated transaction rows.

    ``schema`` maps header names in the file to canonical transaction fields;
    by default headers are expected to carry the canonical names themselves.
    Well-formed rows are returned in file order; malformed rows land in the
    reject list with a reason and never abort the batch.

    Raises :class:`SchemaError` when a mandatory column is missing from the
    header. An empty file yields an empty result.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    schema = dict(schema) if schema is not None else dict(DEFAULT_SCHEMA)
    unknown = set(schema.values()) - set(TRANSACTION_FIELDS)
    if unknown:
        raise SchemaError(f"schema maps to unknown fields: {sorted(unknown)}")

    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        return ParseResult([], [])
    header = [h.strip() for h in header]

    # Column index per canonical field, via the schema.
    positions: dict[str, int] = {}
    for column, fieldname in schema.items():
        if column in header:
            positions[fieldname] = header.index(column)
    missing = [f for f in TRANSACTION_FIELDS if f not in positions]
    if missing:
        raise SchemaError(f"missing mandatory column(s): {', '.join(missing)}")

    transactions: list[Transaction] = []
    rejects: list[RejectedRow] = []
    width = max(positions.values()) + 1
    for row_number, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue  # skip blank lines silently
        if len(row) < width:
            rejects.append(RejectedRow(row_number, f"short row: expected at least {width} columns"))
            continue
        raw = {f: row[i] for f, i in positions.items()}
        customer_id = raw["customer_id"].strip()
        if not customer_id:
            rejects.append(RejectedRow(row_number, "missing customer_id"))
            continue
        try:
            order_date = _parse_date(raw["order_date"])
        except ValueError:
            rejects.append(RejectedRow(row_number, f"invalid date: {raw['order_date']!r}"))
            continue
        numbers = {}
        bad_number = None
        for fieldname in ("revenue", "cost", "volume_tons"):
            try:
                numbers[fieldname] = _parse_decimal(raw[fieldname])
            except ValueError:
                bad_number = fieldname
                break
        if bad_number is not None:
            rejects.append(RejectedRow(row_number, f"invalid number in {bad_number}: {raw[bad_number]!r}"))
            continue
        if numbers["volume_tons"] < 0:
            rejects.append(RejectedRow(row_number, f"negative volume_tons: {raw['volume_tons']!r}"))
            continue
        transactions.append(
            Transaction(
                customer_id=customer_id,
                order_date=order_date,
                revenue=numbers["revenue"],
                cost=numbers["cost"],
                volume_tons=numbers["volume_tons"],
                product_group=raw["product_group"].strip(),
                region=raw["region"].strip(),
            )
        )
    return ParseResult(transactions, rejects)


def serialize_transactions(transactions: Iterable[Transaction], delimiter: str = ",") -> str:
    """Write transactions back to the canonical delimiter-separated format.

    ``repr``-based float formatting makes parse -> serialize -> parse a
    bit-exact round trip on field values.
    """
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(TRANSACTION_FIELDS)
    for t in transactions:
        writer.writerow(
            [
                t.customer_id,
                t.order_date.isoformat(),
                repr(t.revenue),
                repr(t.cost),
                repr(t.volume_tons),
                t.product_group,
                t.region,
            ]
        )
    return out.getvalue()


def filter_transactions(transactions: Sequence[Transaction], spec: FilterSpec) -> list[Transaction]:
    """Apply a :class:`FilterSpec`; keeps input order, may be empty."""

    def keep(t: Transaction) -> bool:
        if not (spec.date_start <= t.order_date <= spec.date_end):
            return False
        if spec.regions and t.region not in spec.regions:
            return False
        if spec.product_groups and t.product_group not in spec.product_groups:
            return False
        if spec.excluded_customers and t.customer_id in spec.excluded_customers:
            return False
        return True

    return [t for t in transactions if keep(t)]


def customer_history(transactions: Sequence[Transaction], customer_id: str) -> CustomerHistory:
    """All transactions of one customer, date-ascending, with monthly rollups."""
    # Stable sort: same-day transactions keep their input order.
    mine = sorted(
        (t for t in transactions if t.customer_id == customer_id),
        key=lambda t: t.order_date,
    )
    buckets: dict[str, list[float]] = {}
    for t in mine:
        key = f"{t.order_date.year:04d}-{t.order_date.month:02d}"
        acc = buckets.setdefault(key, [0.0, 0.0, 0.0])
        acc[0] += t.revenue
        acc[1] += t.profit
        acc[2] += t.volume_tons
    monthly = [MonthlyRollup(month, *vals) for month, vals in sorted(buckets.items())]
    return CustomerHistory(customer_id, mine, monthly)


def flag_outliers(matrix: "FeatureMatrix", z_threshold: float) -> list[OutlierFlag]:
    """Report every standardized cell with ``|z| > z_threshold``.

    Sorted by ``|z|`` descending. Purely advisory: callers decide whether to
    put flagged customers on a filter exclusion list; nothing is removed here.
    """
    if z_threshold <= 0:
        raise ValidationError("z_threshold must be > 0", field="z_threshold")
    if matrix.standardized is None:
        raise ValidationError("matrix must be standardized before outlier flagging")
    flags: list[OutlierFlag] = []
    grid = matrix.standardized
    for i, customer in enumerate(matrix.customer_ids):
        for j, feature in enumerate(matrix.feature_ids):
            z = float(grid[i, j])
            if abs(z) > z_threshold:
                flags.append(OutlierFlag(customer, feature, z))
    flags.sort(key=lambda f: -abs(f.z_value))
    return flags


def dataset_summary(transactions: Sequence[Transaction]) -> dict:
    """Row count, customer count, date range, and dimension inventories."""
    customers = {t.customer_id for t in transactions}
    dates = [t.order_date for t in transactions]
    return {
        "transactions": len(transactions),
        "customers": len(customers),
        "date_range": {
            "start": min(dates).isoformat() if dates else None,
            "end": max(dates).isoformat() if dates else None,
        },
        "regions": sorted({t.region for t in transactions}),
        "product_groups": sorted({t.product_group for t in transactions}),
    }


def filter_spec_to_doc(spec: FilterSpec) -> dict:
    return {
        "date_start": spec.date_start.isoformat(),
        "date_end": spec.date_end.isoformat(),
        "regions": sorted(spec.regions) if spec.regions is not None else None,
        "product_groups": sorted(spec.product_groups) if spec.product_groups is not None else None,
        "excluded_customers": sorted(spec.excluded_customers)
        if spec.excluded_customers is not None
        else None,
    }


def filter_spec_from_doc(doc: Mapping) -> FilterSpec:
    def as_set(value):
        return frozenset(value) if value is not None else None

    return FilterSpec(
        date_start=date.fromisoformat(doc["date_start"]),
        date_end=date.fromisoformat(doc["date_end"]),
        regions=as_set(doc.get("regions")),
        product_groups=as_set(doc.get("product_groups")),
        excluded_customers=as_set(doc.get("excluded_customers")),
    )
