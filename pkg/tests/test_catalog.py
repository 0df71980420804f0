import json

import pytest

from chainforge.catalog import (
    CatalogError,
    VEHICLE_CATEGORIES,
    accumulator_codes,
    load_catalog,
    resolve_catalog,
)
from chainforge.regions import RegionDefinition, builtin_eu27, load_region


class TestBuiltinCatalog:
    def test_hs2007_has_63_inputs_plus_vehicles(self, catalog):
        assert len(catalog.intermediates(2007)) == 63
        assert len(catalog.vehicles(2007)) == 8

    def test_hs2012_accumulator_split_gives_65_inputs(self, catalog):
        inputs = catalog.intermediates(2012)
        assert len(inputs) == 65
        for code in ("850710", "850750", "850760", "850780"):
            assert code in inputs

    def test_hs2017_adds_hybrid_and_electric_vehicles(self, catalog):
        assert catalog.category_of("870380", 2017) == "ElectricVehicles"
        for code in ("870340", "870350", "870360", "870370"):
            assert catalog.category_of(code, 2017) == "HybridVehicles"
        assert len(catalog.vehicles(2017)) == 13

    def test_every_code_in_exactly_one_category(self, catalog):
        for vintage in catalog.vintages():
            seen = {}
            for code in catalog.codes(vintage):
                category = catalog.category_of(code, vintage)
                assert seen.setdefault(code, category) == category

    def test_concordance_total_over_catalogue(self, catalog):
        for vintage in (2007, 2012):
            for code in catalog.codes(vintage):
                assert catalog.targets(code, vintage), (code, vintage)

    def test_accumulator_codes(self, catalog):
        assert accumulator_codes(catalog, 2007) == ["850710", "850780"]
        assert accumulator_codes(catalog, 2012) == ["850710", "850750", "850760", "850780"]

    def test_categories_inherited_through_split(self, catalog):
        assert catalog.category_of("850760", 2012) == "ElectricalElectricParts"
        assert catalog.category_of("401110", 2017) == "RubberMetalParts"

    def test_vehicle_categories_disjoint_from_inputs(self, catalog):
        for vintage in catalog.vintages():
            inputs = set(catalog.intermediates(vintage))
            for code in catalog.vehicles(vintage):
                assert code not in inputs
                assert catalog.category_of(code, vintage) in VEHICLE_CATEGORIES


class TestCatalogLoading:
    def test_conflicting_category_rejected(self, tmp_path):
        payload = {"products": [
            {"code": "401110", "vintage": 2007, "category": "RubberMetalParts", "description": "x"},
            {"code": "401110", "vintage": 2007, "category": "Vehicles", "description": "x"},
        ]}
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(CatalogError):
            load_catalog(path)

    def test_bad_code_rejected(self, tmp_path):
        payload = {"products": [{"code": "9999", "vintage": 2007, "category": "Vehicles", "description": "x"}]}
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(CatalogError):
            load_catalog(path)

    def test_resolve_with_fixture_concordance(self, fixtures_dir):
        catalog = resolve_catalog(None, fixtures_dir / "concordance_fixture.csv")
        assert catalog.targets("100110", 2007) == (("100110", 2012),)
        assert len(catalog.intermediates(2007)) == 63


class TestRegions:
    def test_builtin_eu27(self):
        region = builtin_eu27()
        assert len(region.members) == 27
        assert "DEU" in region and "GBR" not in region

    def test_region_file_round_trip(self, tmp_path):
        path = tmp_path / "region.json"
        path.write_text(json.dumps({"name": "PAIR", "members": ["DEU", "FRA"]}))
        region = load_region(path)
        assert region.name == "PAIR" and region.members == frozenset({"DEU", "FRA"})

    def test_duplicates_rejected(self, tmp_path):
        path = tmp_path / "region.json"
        path.write_text(json.dumps({"name": "PAIR", "members": ["DEU", "DEU"]}))
        with pytest.raises(ValueError):
            load_region(path)

    def test_empty_region_rejected(self):
        with pytest.raises(ValueError):
            RegionDefinition(name="EMPTY", members=frozenset())

    def test_bad_code_rejected(self):
        with pytest.raises(ValueError):
            RegionDefinition(name="X", members=frozenset({"Germany"}))
