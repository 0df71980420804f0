"""Bilateral trade flows: parsing, mirror reconciliation, and derived series.

Flow files are CSV with header ``year,reporter,partner,product,direction,value_usd``.
Each flow may be declared twice (by the exporter and by the importer); the
reconciliation step merges the two declarations into a single tensor entry.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
import pandas as pd

from .catalog import HS_VINTAGES, SupplyChainCatalog
from .regions import RegionDefinition

_ISO3 = re.compile(r"^[A-Z]{3}$")
_HS6 = re.compile(r"^\d{6}$")

CSV_HEADER = ["year", "reporter", "partner", "product", "direction", "value_usd"]


class FlowParseError(ValueError):
    """Malformed trade-flow row; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NegativeValueError(FlowParseError):
    pass


class UnknownCodeError(FlowParseError):
    """Country or product token that does not match its code format."""

    def __init__(self, token: str, line: int):
        super().__init__(f"unknown code {token!r}", line)
        self.token = token


class VintageConversionError(ValueError):
    """Codes present in the tensor with no concordance entry."""

    def __init__(self, codes: list[str], from_vintage: int):
        super().__init__(f"no HS{from_vintage} concordance entry for codes: {sorted(codes)}")
        self.codes = sorted(codes)


@dataclass(frozen=True)
class TradeFlowRecord:
    year: int
    reporter: str
    partner: str
    product: str
    direction: str  # "export" | "import"
    value: float


@dataclass
class TradeTensor:
    """Sparse (year, exporter, importer, product) -> USD map, one entry per key."""

    entries: dict[tuple[int, str, str, str], float]
    vintage: int = 2007

    def years(self) -> list[int]:
        return sorted({k[0] for k in self.entries})

    def products(self) -> list[str]:
        return sorted({k[3] for k in self.entries})

    def countries(self) -> list[str]:
        return sorted({k[1] for k in self.entries} | {k[2] for k in self.entries})

    def total_value(self) -> float:
        return float(sum(self.entries.values()))

    def restrict_products(self, codes: Iterable[str]) -> "TradeTensor":
        keep = set(codes)
        return TradeTensor(
            entries={k: v for k, v in self.entries.items() if k[3] in keep},
            vintage=self.vintage,
        )

    def region_import_suppliers(self, region: RegionDefinition, product: str, year: int) -> dict[str, float]:
        """Total imports of the region's members for a product-year, keyed by exporter."""
        out: dict[str, float] = {}
        for (y, exp, imp, prod), v in self.entries.items():
            if y == year and prod == product and imp in region and exp not in region:
                out[exp] = out.get(exp, 0.0) + v
        return out

    def region_intra_imports(self, region: RegionDefinition, product: str, year: int) -> float:
        total = 0.0
        for (y, exp, imp, prod), v in self.entries.items():
            if y == year and prod == product and imp in region and exp in region:
                total += v
        return total


def parse_flows(path: str | Path, format: str = "csv") -> list[TradeFlowRecord]:
    """Parse a trade-flow file into records, preserving row order."""
    if format != "csv":
        raise ValueError(f"unsupported format {format!r}")
    records: list[TradeFlowRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        if [h.strip() for h in header] != CSV_HEADER:
            raise FlowParseError(f"expected header {','.join(CSV_HEADER)}, got {','.join(header)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            records.append(_parse_row(row, lineno))
    return records


def _parse_row(row: list[str], lineno: int) -> TradeFlowRecord:
    if len(row) != len(CSV_HEADER):
        raise FlowParseError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", lineno)
    year_s, reporter, partner, product, direction, value_s = (c.strip() for c in row)
    try:
        year = int(year_s)
    except ValueError:
        raise FlowParseError(f"bad year {year_s!r}", lineno) from None
    for token in (reporter, partner):
        if not _ISO3.match(token):
            raise UnknownCodeError(token, lineno)
    if not _HS6.match(product):
        raise UnknownCodeError(product, lineno)
    if direction not in ("export", "import"):
        raise FlowParseError(f"bad direction {direction!r}", lineno)
    try:
        value = float(value_s)
    except ValueError:
        raise FlowParseError(f"bad value {value_s!r}", lineno) from None
    if value < 0:
        raise NegativeValueError(f"negative value {value_s}", lineno)
    if reporter == partner:
        raise FlowParseError(f"reporter equals partner ({reporter})", lineno)
    return TradeFlowRecord(year, reporter, partner, product, direction, value)


# --- mirror-flow reconciliation -------------------------------------------------
#
# A strategy merges the exporter's and the importer's declaration of the same
# flow. Any callable (export_value, import_value) -> value plugs in here; the
# builtins below cover the priority rules and the convex combination.

ReconciliationStrategy = Callable[[float, float], float]


def exporter_priority(export_value: float, import_value: float) -> float:
    return export_value


def importer_priority(export_value: float, import_value: float) -> float:
    return import_value


def weighted_average(w: float) -> ReconciliationStrategy:
    """Convex mix with weight ``w`` on the exporter's declaration."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"weight must be in [0, 1], got {w}")

    def merge(export_value: float, import_value: float) -> float:
        return w * export_value + (1.0 - w) * import_value

    merge.__name__ = f"weighted_average_{w}"
    return merge


def reconciliation_strategy(spec: str) -> ReconciliationStrategy:
    """Resolve a strategy from its config spelling, e.g. ``weighted_average:0.5``."""
    name, _, arg = spec.partition(":")
    if name == "exporter_priority":
        return exporter_priority
    if name == "importer_priority":
        return importer_priority
    if name == "weighted_average":
        return weighted_average(float(arg) if arg else 0.5)
    raise ValueError(f"unknown reconciliation strategy {spec!r}")


def reconcile_mirror_flows(
    records: Iterable[TradeFlowRecord],
    strategy: ReconciliationStrategy | None = None,
    vintage: int = 2007,
) -> TradeTensor:
    """Merge mirrored declarations into one tensor entry per flow key.

    Repeated declarations on the same side are summed before merging; flows
    reported only once pass through unchanged.
    """
    if strategy is None:
        strategy = weighted_average(0.5)
    if vintage not in HS_VINTAGES:
        raise ValueError(f"unknown HS vintage {vintage}")
    exports: dict[tuple[int, str, str, str], float] = {}
    imports: dict[tuple[int, str, str, str], float] = {}
    for rec in records:
        if rec.direction == "export":
            key = (rec.year, rec.reporter, rec.partner, rec.product)
            exports[key] = exports.get(key, 0.0) + rec.value
        else:
            key = (rec.year, rec.partner, rec.reporter, rec.product)
            imports[key] = imports.get(key, 0.0) + rec.value
    entries: dict[tuple[int, str, str, str], float] = {}
    for key in sorted(set(exports) | set(imports)):
        if key in exports and key in imports:
            entries[key] = float(strategy(exports[key], imports[key]))
        elif key in exports:
            entries[key] = exports[key]
        else:
            entries[key] = imports[key]
    return TradeTensor(entries=entries, vintage=vintage)


def aggregate_exports(tensor: TradeTensor, year: int) -> pd.DataFrame:
    """Country x product export matrix W for one year (summed over importers)."""
    if year not in set(tensor.years()):
        raise KeyError(f"year {year} not present in tensor")
    sums: dict[tuple[str, str], float] = {}
    for (y, exp, _imp, prod), v in tensor.entries.items():
        if y == year:
            sums[(exp, prod)] = sums.get((exp, prod), 0.0) + v
    countries = sorted({c for c, _ in sums})
    products = sorted({p for _, p in sums})
    w = pd.DataFrame(0.0, index=countries, columns=products)
    for (c, p), v in sums.items():
        w.at[c, p] = v
    return w


def convert_vintage(tensor: TradeTensor, catalog: SupplyChainCatalog, to_vintage: int) -> TradeTensor:
    """Map the tensor onto another HS vintage through the catalogue concordance.

    One-to-many splits distribute value equally across targets, so totals per
    (year, exporter, importer) are conserved.
    """
    if to_vintage not in HS_VINTAGES:
        raise ValueError(f"unknown HS vintage {to_vintage}")
    if to_vintage < tensor.vintage:
        raise ValueError(f"cannot convert backward from HS{tensor.vintage} to HS{to_vintage}")
    current = tensor
    while current.vintage != to_vintage:
        current = _convert_one_hop(current, catalog)
    return current


def _convert_one_hop(tensor: TradeTensor, catalog: SupplyChainCatalog) -> TradeTensor:
    missing = sorted({k[3] for k in tensor.entries if not catalog.targets(k[3], tensor.vintage)})
    if missing:
        raise VintageConversionError(missing, tensor.vintage)
    entries: dict[tuple[int, str, str, str], float] = {}
    next_vintage = None
    for (y, exp, imp, prod), v in tensor.entries.items():
        targets = catalog.targets(prod, tensor.vintage)
        next_vintage = targets[0][1]
        share = v / len(targets)
        for to_code, _tv in targets:
            key = (y, exp, imp, to_code)
            entries[key] = entries.get(key, 0.0) + share
    return TradeTensor(entries=entries, vintage=int(next_vintage))


def category_series(
    tensor: TradeTensor,
    catalog: SupplyChainCatalog,
    region: RegionDefinition,
    direction: str,
    years: Iterable[int],
) -> dict[tuple[str, int, str], float]:
    """Extra-region trade by (category, year, partner) for the region.

    Imports sum flows from non-members into members; exports sum flows from
    members to non-members. Intra-region flows never enter the aggregate.
    """
    if direction not in ("export", "import"):
        raise ValueError(f"bad direction {direction!r}")
    year_set = set(years)
    categories = catalog.category_map(tensor.vintage)
    out: dict[tuple[str, int, str], float] = {}
    for (y, exp, imp, prod), v in tensor.entries.items():
        if y not in year_set or prod not in categories:
            continue
        if direction == "import":
            if imp not in region or exp in region:
                continue
            partner = exp
        else:
            if exp not in region or imp in region:
                continue
            partner = imp
        key = (categories[prod], y, partner)
        out[key] = out.get(key, 0.0) + v
    return out


def product_series(
    tensor: TradeTensor,
    products: Iterable[str],
    region: RegionDefinition,
    direction: str,
    years: Iterable[int],
) -> dict[tuple[str, int, str], float]:
    """As category_series but keyed by individual product code."""
    if direction not in ("export", "import"):
        raise ValueError(f"bad direction {direction!r}")
    year_set = set(years)
    wanted = set(products)
    out: dict[tuple[str, int, str], float] = {}
    for (y, exp, imp, prod), v in tensor.entries.items():
        if y not in year_set or prod not in wanted:
            continue
        if direction == "import":
            if imp not in region or exp in region:
                continue
            partner = exp
        else:
            if exp not in region or imp in region:
                continue
            partner = imp
        key = (prod, y, partner)
        out[key] = out.get(key, 0.0) + v
    return out


# Reference value from the full 2007-2022 trade data: the average import growth
# over all products imported by the EU27. Desk-scale fixtures will not and need
# not reproduce it; it is shipped so report consumers can draw the same
# reference line against their own rankings.
FULL_DATA_AVERAGE_IMPORT_GROWTH_2007_2022 = 0.918


@dataclass
class GrowthRanking:
    """Per-product extra-region import growth between two years."""

    ranked: list[tuple[str, float]]
    new_products: list[str] = field(default_factory=list)  # zero baseline, positive later
    untraded: list[str] = field(default_factory=list)  # zero in both years
    average_growth: float | None = None  # over all products in the tensor


def import_growth_ranking(
    tensor: TradeTensor,
    catalog: SupplyChainCatalog,
    region: RegionDefinition,
    y0: int,
    y1: int,
    products: Iterable[str] | None = None,
) -> GrowthRanking:
    """Rank catalogue products by extra-region import growth (v1 - v0) / v0.

    Products with no baseline import are flagged instead of ranked, keeping
    the ranking finite. The all-products average uses every product in the
    tensor, matching the reference line of the growth chart.
    """
    present = set(tensor.years())
    for y in (y0, y1):
        if y not in present:
            raise KeyError(f"year {y} not present in tensor")
    if products is None:
        products = catalog.intermediates(tensor.vintage)
    products = sorted(set(products))

    def extra_imports(year: int) -> dict[str, float]:
        out: dict[str, float] = {}
        for (y, exp, imp, prod), v in tensor.entries.items():
            if y == year and imp in region and exp not in region:
                out[prod] = out.get(prod, 0.0) + v
        return out

    v0_all, v1_all = extra_imports(y0), extra_imports(y1)
    ranked, new_products, untraded = [], [], []
    for p in products:
        v0, v1 = v0_all.get(p, 0.0), v1_all.get(p, 0.0)
        if v0 > 0:
            ranked.append((p, (v1 - v0) / v0))
        elif v1 > 0:
            new_products.append(p)
        else:
            untraded.append(p)
    ranked.sort(key=lambda t: (-t[1], t[0]))

    growths = [(v1_all.get(p, 0.0) - v0) / v0 for p, v0 in v0_all.items() if v0 > 0]
    average = float(np.mean(growths)) if growths else None
    return GrowthRanking(ranked=ranked, new_products=new_products, untraded=untraded, average_growth=average)
