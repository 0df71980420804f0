"""Product-level vulnerability indicators for a region's supply chain.

Each catalogue input gets a net-exposure ratio (extra- over intra-region
imports), an import-concentration index over its extra-region suppliers, and
the region's mean progression probability, joined into one table with
quadrant labels for the scatter analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .catalog import SupplyChainCatalog
from .progression import ProgressionForecast
from .regions import RegionDefinition
from .trade import TradeTensor

P_FLOOR = 1e-6


class NoExternalSupplyError(ValueError):
    """Concentration is undefined without any extra-region import."""


@dataclass
class NetExposure:
    value: float | None
    status: str  # "ok" | "fully_external" | "untraded"


def net_exposure(tensor: TradeTensor, region: RegionDefinition, product: str, year: int) -> NetExposure:
    """Extra-region over intra-region imports of a product for the region.

    A product imported only from outside is flagged fully_external rather than
    given an infinite ratio; a product the region does not import is untraded.
    """
    extra = sum(tensor.region_import_suppliers(region, product, year).values())
    intra = tensor.region_intra_imports(region, product, year)
    if intra > 0:
        return NetExposure(value=extra / intra, status="ok")
    if extra > 0:
        return NetExposure(value=None, status="fully_external")
    return NetExposure(value=None, status="untraded")


def hhi_m(tensor: TradeTensor, region: RegionDefinition, product: str, year: int) -> float:
    """Sum of squared extra-region supplier shares of the product's imports."""
    suppliers = tensor.region_import_suppliers(region, product, year)
    total = sum(suppliers.values())
    if total <= 0:
        raise NoExternalSupplyError(f"no extra-region import of {product} in {year}")
    return float(sum((v / total) ** 2 for v in suppliers.values()))


@dataclass
class VulnerabilityRecord:
    product: str
    description: str
    category: str
    net_exposure: float
    hhi_m: float
    progression_probability: float
    size_metric: float  # ln(1 / probability), floored probability
    quadrant: str
    year: int


def region_progression_probability(
    forecast: ProgressionForecast,
    region: RegionDefinition,
    product: str,
) -> float | None:
    """Region mean of the forecast over member countries that are candidates."""
    if product not in forecast.probabilities.columns:
        raise KeyError(f"product {product} not in forecast universe")
    col = forecast.probabilities[product]
    vals = [float(col[c]) for c in col.index if c in region and not np.isnan(col[c])]
    if not vals:
        return None
    return float(np.mean(vals))


def build_vulnerability_table(
    tensor: TradeTensor,
    region: RegionDefinition,
    catalog: SupplyChainCatalog,
    forecast: ProgressionForecast,
    year: int,
    cut_points: tuple[float, float] | None = None,
    p_floor: float = P_FLOOR,
) -> tuple[list[VulnerabilityRecord], list[tuple[str, str]]]:
    """One record per catalogue input with both indicators defined.

    Inputs whose ratio or concentration is undefined are returned separately
    with the reason instead of a record. Quadrants split at the given
    (hhi, exposure) cut points, defaulting to the medians of each axis.
    """
    products = catalog.intermediates(tensor.vintage)
    rows = []
    skipped: list[tuple[str, str]] = []
    for product in products:
        exposure = net_exposure(tensor, region, product, year)
        if exposure.status != "ok":
            skipped.append((product, exposure.status))
            continue
        try:
            concentration = hhi_m(tensor, region, product, year)
        except NoExternalSupplyError:
            skipped.append((product, "no_external_supply"))
            continue
        prob = region_progression_probability(forecast, region, product)
        prob = 0.0 if prob is None else prob
        size = math.log(1.0 / max(prob, p_floor))
        rows.append({
            "product": product,
            "description": catalog.description_of(product, tensor.vintage),
            "category": catalog.category_of(product, tensor.vintage),
            "net_exposure": exposure.value,
            "hhi_m": concentration,
            "progression_probability": prob,
            "size_metric": size,
        })

    if not rows:
        return [], skipped
    if cut_points is None:
        hhi_cut = float(np.median([r["hhi_m"] for r in rows]))
        exp_cut = float(np.median([r["net_exposure"] for r in rows]))
    else:
        hhi_cut, exp_cut = cut_points

    records = []
    for r in rows:
        low_h, low_e = r["hhi_m"] < hhi_cut, r["net_exposure"] < exp_cut
        quadrant = "low/low" if (low_h and low_e) else "high/high" if not (low_h or low_e) else "mixed"
        records.append(VulnerabilityRecord(quadrant=quadrant, year=year, **r))
    return records, skipped


def vulnerability_frame(records: list[VulnerabilityRecord]) -> pd.DataFrame:
    """Flat table in the output-CSV column order."""
    return pd.DataFrame(
        [{
            "product": r.product,
            "description": r.description,
            "category": r.category,
            "net_exposure": r.net_exposure,
            "hhi_m": r.hhi_m,
            "progression_probability": r.progression_probability,
            "size_metric": r.size_metric,
            "quadrant": r.quadrant,
        } for r in records],
        columns=["product", "description", "category", "net_exposure", "hhi_m",
                 "progression_probability", "size_metric", "quadrant"],
    )
