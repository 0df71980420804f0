"""Supply-chain product catalogue across HS classification vintages.

The shipped automotive catalogue lists every product once per vintage in
which its row was declared; carried-forward entries for later vintages are
materialized through the concordance. Concordance files hold triples
(code, from_vintage, to_code), where the target vintage is the next one in
the 2007 -> 2012 -> 2017 chain.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

HS_VINTAGES = (2007, 2012, 2017)

CATEGORIES = (
    "RubberMetalParts",
    "MiscellaneousParts",
    "EnginesAndParts",
    "ElectricalElectricParts",
    "Vehicles",
    "HybridVehicles",
    "ElectricVehicles",
)
VEHICLE_CATEGORIES = frozenset({"Vehicles", "HybridVehicles", "ElectricVehicles"})


class CatalogError(ValueError):
    """Raised when a catalogue file violates its invariants."""


@dataclass(frozen=True)
class CatalogProduct:
    code: str
    vintage: int
    category: str
    description: str


@dataclass
class SupplyChainCatalog:
    """Product list with categories plus the cross-vintage concordance."""

    products: list[CatalogProduct]
    concordance: dict[tuple[str, int], tuple[tuple[str, int], ...]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self._by_vintage: dict[int, dict[str, CatalogProduct]] = {}
        for prod in self.products:
            per = self._by_vintage.setdefault(prod.vintage, {})
            if prod.code in per and per[prod.code].category != prod.category:
                raise CatalogError(
                    f"code {prod.code} (HS{prod.vintage}) appears in two categories: "
                    f"{per[prod.code].category} and {prod.category}"
                )
            per[prod.code] = prod

    def vintages(self) -> list[int]:
        return sorted(self._by_vintage)

    def codes(self, vintage: int) -> list[str]:
        return sorted(self._by_vintage.get(vintage, {}))

    def intermediates(self, vintage: int) -> list[str]:
        """Catalogue input products: every code outside the vehicle categories."""
        per = self._by_vintage.get(vintage, {})
        return sorted(c for c, p in per.items() if p.category not in VEHICLE_CATEGORIES)

    def vehicles(self, vintage: int) -> list[str]:
        per = self._by_vintage.get(vintage, {})
        return sorted(c for c, p in per.items() if p.category in VEHICLE_CATEGORIES)

    def category_of(self, code: str, vintage: int) -> str:
        try:
            return self._by_vintage[vintage][code].category
        except KeyError:
            raise KeyError(f"code {code} not in catalogue for HS{vintage}") from None

    def description_of(self, code: str, vintage: int) -> str:
        return self._by_vintage[vintage][code].description

    def category_map(self, vintage: int) -> dict[str, str]:
        return {c: p.category for c, p in self._by_vintage.get(vintage, {}).items()}

    def codes_in_category(self, category: str, vintage: int) -> list[str]:
        if category not in CATEGORIES:
            raise KeyError(f"unknown category {category!r}")
        per = self._by_vintage.get(vintage, {})
        return sorted(c for c, p in per.items() if p.category == category)

    def targets(self, code: str, from_vintage: int) -> tuple[tuple[str, int], ...]:
        """Concordance image of (code, from_vintage) in the next vintage."""
        return self.concordance.get((code, from_vintage), ())


def _next_vintage(vintage: int) -> int:
    idx = HS_VINTAGES.index(vintage)
    if idx + 1 >= len(HS_VINTAGES):
        raise CatalogError(f"no vintage follows HS{vintage}")
    return HS_VINTAGES[idx + 1]


def load_catalog(path: str | Path, concordance_path: str | Path | None = None) -> SupplyChainCatalog:
    """Load a catalogue JSON file and (optionally) a concordance triple file.

    Entries for later vintages that are not re-declared in the file are
    materialized by pushing each product through the concordance; explicit
    declarations win over inherited category/description.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    declared = [
        CatalogProduct(
            code=str(p["code"]),
            vintage=int(p["vintage"]),
            category=str(p["category"]),
            description=str(p.get("description", "")),
        )
        for p in raw["products"]
    ]
    seen: dict[tuple[str, int], str] = {}
    for prod in declared:
        if len(prod.code) != 6 or not prod.code.isdigit():
            raise CatalogError(f"product code {prod.code!r} is not a 6-digit string")
        if prod.category not in CATEGORIES:
            raise CatalogError(f"product {prod.code}: unknown category {prod.category!r}")
        if prod.vintage not in HS_VINTAGES:
            raise CatalogError(f"product {prod.code}: unknown HS vintage {prod.vintage}")
        key = (prod.code, prod.vintage)
        if seen.setdefault(key, prod.category) != prod.category:
            raise CatalogError(
                f"code {prod.code} (HS{prod.vintage}) appears in two categories: "
                f"{seen[key]} and {prod.category}"
            )

    concordance: dict[tuple[str, int], tuple[tuple[str, int], ...]] = {}
    if concordance_path is not None:
        rows: dict[tuple[str, int], list[tuple[str, int]]] = {}
        with open(concordance_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                code, from_v = str(row["code"]), int(row["from_vintage"])
                rows.setdefault((code, from_v), []).append((str(row["to_code"]), _next_vintage(from_v)))
        concordance = {k: tuple(sorted(v)) for k, v in rows.items()}

    products = _materialize(declared, concordance)
    catalog = SupplyChainCatalog(products=products, concordance=concordance, name=raw.get("name", ""))
    _check_concordance_total(catalog)
    return catalog


def _materialize(declared: list[CatalogProduct], concordance) -> list[CatalogProduct]:
    by_vintage: dict[int, dict[str, CatalogProduct]] = {}
    for p in declared:
        by_vintage.setdefault(p.vintage, {})[p.code] = p
    for vintage in HS_VINTAGES[:-1]:
        nxt = _next_vintage(vintage)
        nxt_map = by_vintage.setdefault(nxt, {})
        for code, prod in sorted(by_vintage.get(vintage, {}).items()):
            for to_code, to_v in concordance.get((code, vintage), ()):
                if to_code not in nxt_map:
                    nxt_map[to_code] = CatalogProduct(
                        code=to_code, vintage=to_v,
                        category=prod.category, description=prod.description,
                    )
    out = []
    for vintage in sorted(by_vintage):
        out.extend(by_vintage[vintage][c] for c in sorted(by_vintage[vintage]))
    return out


def _check_concordance_total(catalog: SupplyChainCatalog) -> None:
    """Every catalogue code must map forward for each shipped vintage pair."""
    if not catalog.concordance:
        return
    missing = []
    for vintage in HS_VINTAGES[:-1]:
        if vintage not in catalog._by_vintage:
            continue
        for code in catalog.codes(vintage):
            if not catalog.targets(code, vintage):
                missing.append((code, vintage))
    if missing:
        raise CatalogError(f"concordance not total; missing sources: {missing}")


def accumulator_codes(catalog: SupplyChainCatalog, vintage: int) -> list[str]:
    """Electric-accumulator codes (HS heading 8507) in the catalogue vintage."""
    return [c for c in catalog.codes(vintage) if c.startswith("8507")]


def resolve_catalog(
    catalog_file: str | Path | None = None,
    concordance_file: str | Path | None = None,
) -> SupplyChainCatalog:
    """Load the catalogue, allowing either file to fall back to the shipped one."""
    if catalog_file is None and concordance_file is None:
        return builtin_catalog()
    data = resources.files("chainforge.data")
    with resources.as_file(data.joinpath("catalog_automotive.json")) as builtin_cat, \
            resources.as_file(data.joinpath("concordance_automotive.csv")) as builtin_conc:
        return load_catalog(
            catalog_file if catalog_file is not None else builtin_cat,
            concordance_file if concordance_file is not None else builtin_conc,
        )


def builtin_catalog() -> SupplyChainCatalog:
    """The automotive supply-chain catalogue shipped with the package.

    Its HS2007 layer carries exactly 63 intermediate products plus the
    vehicle codes; the HS2012 layer splits the generic accumulator code
    into the finer battery types.
    """
    data = resources.files("chainforge.data")
    with resources.as_file(data.joinpath("catalog_automotive.json")) as cat_path, \
            resources.as_file(data.joinpath("concordance_automotive.csv")) as conc_path:
        catalog = load_catalog(cat_path, conc_path)
    n_inter = len(catalog.intermediates(2007))
    if n_inter != 63:
        raise CatalogError(f"shipped HS2007 catalogue must have 63 inputs, found {n_inter}")
    return catalog
