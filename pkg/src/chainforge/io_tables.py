"""Inter-country input-output tables and supplier-share decompositions.

Tables load from long-format CSV (origin_country, origin_sector,
dest_country, dest_sector, value_usd), one file per year. Shares describe
where an aggregated region-sector buys its inputs, with small suppliers
merged into an Other bucket by a threshold rule.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import pandas as pd

from .regions import RegionDefinition

IO_CSV_HEADER = ["origin_country", "origin_sector", "dest_country", "dest_sector", "value_usd"]

SCOPES = ("same_sector", "other_sectors")
THRESHOLD_DENOMINATORS = ("all_inputs", "extra_region")


class IOTableError(ValueError):
    pass


@dataclass
class IOTable:
    year: int
    entries: dict[tuple[str, str, str, str], float]
    sectors: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.sectors:
            secs = {k[1] for k in self.entries} | {k[3] for k in self.entries}
            self.sectors = frozenset(secs)


def load_io_table(path: str | Path, year: int) -> IOTable:
    entries: dict[tuple[str, str, str, str], float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != IO_CSV_HEADER:
            raise IOTableError(f"{path}: expected header {','.join(IO_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise IOTableError(f"{path} line {lineno}: expected 5 fields")
            oc, os_, dc, ds = (c.strip() for c in row[:4])
            try:
                value = float(row[4])
            except ValueError:
                raise IOTableError(f"{path} line {lineno}: bad value {row[4]!r}") from None
            if value < 0:
                raise IOTableError(f"{path} line {lineno}: negative value")
            key = (oc, os_, dc, ds)
            entries[key] = entries.get(key, 0.0) + value
    return IOTable(year=year, entries=entries)


def aggregate_region_sector(
    io: IOTable,
    region: RegionDefinition,
    sector: str,
) -> dict[tuple[str, str], float]:
    """Input purchases of the aggregated region-sector, by (origin country, origin sector)."""
    if sector not in io.sectors:
        raise KeyError(f"sector {sector!r} not in IO table for {io.year}")
    out: dict[tuple[str, str], float] = {}
    for (oc, os_, dc, ds), v in io.entries.items():
        if ds == sector and dc in region:
            key = (oc, os_)
            out[key] = out.get(key, 0.0) + v
    return out


@dataclass
class SupplierShareTable:
    """Named suppliers above threshold plus an Other bucket; shares sum to 1."""

    table: pd.DataFrame  # columns: year, key, share, level_usd, is_other
    threshold: float
    threshold_denominator: str
    scope: str | None = None
    year: int | None = None

    @property
    def other_bucket(self) -> float:
        rows = self.table[self.table["is_other"]]
        return float(rows["share"].sum()) if len(rows) else 0.0


def _share_table(levels: dict[str, float], threshold: float, denominator_total: float,
                 threshold_denominator: str, scope, year) -> SupplierShareTable:
    extra_total = sum(levels.values())
    rows = []
    if extra_total > 0:
        named, other_level = [], 0.0
        for key in sorted(levels):
            level = levels[key]
            frac = level / denominator_total if denominator_total > 0 else 0.0
            if frac >= threshold:
                named.append((key, level))
            else:
                other_level += level
        named.sort(key=lambda t: (-t[1], t[0]))
        for key, level in named:
            rows.append({"year": year, "key": key, "share": level / extra_total,
                         "level_usd": level, "is_other": False})
        rows.append({"year": year, "key": "Other", "share": other_level / extra_total,
                     "level_usd": other_level, "is_other": True})
    table = pd.DataFrame(rows, columns=["year", "key", "share", "level_usd", "is_other"])
    return SupplierShareTable(table=table, threshold=threshold,
                              threshold_denominator=threshold_denominator, scope=scope, year=year)


def partner_shares(
    inputs: Mapping[tuple[str, str], float],
    region: RegionDefinition,
    sector: str,
    scope: str,
    threshold: float = 0.05,
    threshold_denominator: str = "all_inputs",
    year: int | None = None,
) -> SupplierShareTable:
    """Extra-region supplier countries of the aggregated inputs, bucketed by threshold.

    ``same_sector`` keeps inputs originating in the target sector itself,
    ``other_sectors`` keeps the complement. The threshold can be taken against
    all inputs (intra- plus extra-region, the headline convention) or against
    the extra-region total only; reported shares are always of the extra-region
    total so the table sums to one.
    """
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if threshold_denominator not in THRESHOLD_DENOMINATORS:
        raise ValueError(f"threshold_denominator must be one of {THRESHOLD_DENOMINATORS}")

    def in_scope(os_: str) -> bool:
        return (os_ == sector) if scope == "same_sector" else (os_ != sector)

    levels: dict[str, float] = {}
    all_total = 0.0
    for (oc, os_), v in inputs.items():
        if not in_scope(os_):
            continue
        all_total += v
        if oc not in region:
            levels[oc] = levels.get(oc, 0.0) + v
    extra_total = sum(levels.values())
    denom = all_total if threshold_denominator == "all_inputs" else extra_total
    return _share_table(levels, threshold, denom, threshold_denominator, scope, year)


def sector_input_shares(
    inputs: Mapping[tuple[str, str], float],
    region: RegionDefinition,
    threshold: float = 0.05,
    threshold_denominator: str = "extra_region",
    year: int | None = None,
) -> SupplierShareTable:
    """Extra-region inputs grouped by supplying industry, bucketed by threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if threshold_denominator not in THRESHOLD_DENOMINATORS:
        raise ValueError(f"threshold_denominator must be one of {THRESHOLD_DENOMINATORS}")
    levels: dict[str, float] = {}
    all_total = 0.0
    for (oc, os_), v in inputs.items():
        all_total += v
        if oc not in region:
            levels[os_] = levels.get(os_, 0.0) + v
    extra_total = sum(levels.values())
    denom = all_total if threshold_denominator == "all_inputs" else extra_total
    return _share_table(levels, threshold, denom, threshold_denominator, None, year)


def import_level_series(
    io_by_year: Mapping[int, IOTable],
    region: RegionDefinition,
    sector: str,
    scope: str,
) -> dict[int, float]:
    """Total extra-region input purchases of the region-sector, per year."""
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}")
    if not io_by_year:
        raise ValueError("need at least one IO table")
    out: dict[int, float] = {}
    for year in sorted(io_by_year):
        inputs = aggregate_region_sector(io_by_year[year], region, sector)
        total = 0.0
        for (oc, os_), v in inputs.items():
            if oc in region:
                continue
            if scope == "same_sector" and os_ != sector:
                continue
            if scope == "other_sectors" and os_ == sector:
                continue
            total += v
        out[year] = total
    return out
