import numpy as np
import pytest

from chainforge.io_tables import (
    IOTable,
    IOTableError,
    aggregate_region_sector,
    import_level_series,
    load_io_table,
    partner_shares,
    sector_input_shares,
)
from chainforge.regions import RegionDefinition

REGION = RegionDefinition(name="PAIR", members=frozenset({"DEU", "FRA"}))


def table(entries, year=2020):
    return IOTable(year=year, entries=dict(entries))


class TestAggregate:
    def test_sums_over_members(self):
        io = table({
            ("CHN", "C29", "DEU", "C29"): 5.0,
            ("CHN", "C29", "FRA", "C29"): 5.0,
        })
        agg = aggregate_region_sector(io, REGION, "C29")
        assert agg[("CHN", "C29")] == 10.0

    def test_single_member_identity(self):
        solo = RegionDefinition(name="SOLO", members=frozenset({"DEU"}))
        io = table({("CHN", "C29", "DEU", "C29"): 7.0})
        assert aggregate_region_sector(io, solo, "C29") == {("CHN", "C29"): 7.0}

    def test_three_origin_hand_sums(self):
        io = table({
            ("CHN", "C29", "DEU", "C29"): 2.0,
            ("CHN", "C27", "DEU", "C29"): 3.0,
            ("USA", "C29", "FRA", "C29"): 4.0,
            ("DEU", "C29", "FRA", "C29"): 5.0,
            ("CHN", "C29", "DEU", "C27"): 99.0,  # other destination sector, excluded
        })
        agg = aggregate_region_sector(io, REGION, "C29")
        assert agg == {("CHN", "C29"): 2.0, ("CHN", "C27"): 3.0, ("USA", "C29"): 4.0, ("DEU", "C29"): 5.0}

    def test_unknown_sector_rejected(self):
        io = table({("CHN", "C29", "DEU", "C29"): 1.0})
        with pytest.raises(KeyError):
            aggregate_region_sector(io, REGION, "C99")

    def test_additive_over_region_partition(self):
        io = table({
            ("CHN", "C29", "DEU", "C29"): 2.0,
            ("USA", "C29", "FRA", "C29"): 3.0,
            ("CHN", "C27", "FRA", "C29"): 4.0,
        })
        whole = aggregate_region_sector(io, REGION, "C29")
        d = aggregate_region_sector(io, RegionDefinition("D", frozenset({"DEU"})), "C29")
        f = aggregate_region_sector(io, RegionDefinition("F", frozenset({"FRA"})), "C29")
        for key in whole:
            assert whole[key] == pytest.approx(d.get(key, 0.0) + f.get(key, 0.0))


SAMPLE_INPUTS = {
    ("CHN", "C29"): 50.0,
    ("USA", "C29"): 46.0,
    ("KOR", "C29"): 4.0,
    ("CHN", "C27"): 30.0,
    ("DEU", "C29"): 100.0,  # intra-region
}


class TestPartnerShares:
    def test_threshold_rule_names_two_buckets_small(self):
        inputs = {("CHN", "C29"): 50.0, ("USA", "C29"): 46.0, ("KOR", "C29"): 4.0}
        shares = partner_shares(inputs, REGION, "C29", "same_sector", 0.05, "extra_region")
        named = shares.table[~shares.table["is_other"]]
        assert named["key"].tolist() == ["CHN", "USA"]
        assert shares.other_bucket == pytest.approx(0.04)

    def test_single_partner_full_share(self):
        shares = partner_shares({("CHN", "C29"): 9.0}, REGION, "C29", "same_sector", 0.05)
        assert shares.table.iloc[0]["share"] == 1.0
        assert shares.other_bucket == 0.0

    def test_shares_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            inputs = {(f"A{i:02d}"[:3], "C29"): float(v) for i, v in enumerate(rng.random(8) * 100)}
            shares = partner_shares(inputs, REGION, "C29", "same_sector", 0.1)
            assert shares.table["share"].sum() == pytest.approx(1.0, abs=1e-9)

    def test_scope_filters_origin_sector(self):
        same = partner_shares(SAMPLE_INPUTS, REGION, "C29", "same_sector", 0.05, "extra_region")
        other = partner_shares(SAMPLE_INPUTS, REGION, "C29", "other_sectors", 0.05, "extra_region")
        assert same.table["level_usd"].sum() == pytest.approx(100.0)  # extra-region C29 only
        assert other.table["level_usd"].sum() == pytest.approx(30.0)

    def test_all_inputs_denominator_is_stricter(self):
        # KOR is 4% of the extra-region total but 2% of all inputs
        shares_all = partner_shares(SAMPLE_INPUTS, REGION, "C29", "same_sector", 0.04, "all_inputs")
        shares_extra = partner_shares(SAMPLE_INPUTS, REGION, "C29", "same_sector", 0.04, "extra_region")
        named_all = set(shares_all.table[~shares_all.table["is_other"]]["key"])
        named_extra = set(shares_extra.table[~shares_extra.table["is_other"]]["key"])
        assert "KOR" in named_extra and "KOR" not in named_all

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(2)
        inputs = {(f"A{i:02d}"[:3], "C29"): float(v) for i, v in enumerate(rng.random(10) * 100)}
        previous = -1.0
        for threshold in (0.01, 0.05, 0.1, 0.2, 0.4):
            shares = partner_shares(inputs, REGION, "C29", "same_sector", threshold, "extra_region")
            assert shares.other_bucket >= previous - 1e-12
            previous = shares.other_bucket

    def test_scale_invariance(self):
        base = partner_shares(SAMPLE_INPUTS, REGION, "C29", "same_sector", 0.05)
        scaled_inputs = {k: 7.3 * v for k, v in SAMPLE_INPUTS.items()}
        scaled = partner_shares(scaled_inputs, REGION, "C29", "same_sector", 0.05)
        assert np.allclose(base.table["share"].to_numpy(), scaled.table["share"].to_numpy())
        assert base.table["key"].tolist() == scaled.table["key"].tolist()

    def test_bad_parameters_rejected(self):
        with pytest.raises(ValueError):
            partner_shares(SAMPLE_INPUTS, REGION, "C29", "everything")
        with pytest.raises(ValueError):
            partner_shares(SAMPLE_INPUTS, REGION, "C29", "same_sector", 1.5)
        with pytest.raises(ValueError):
            partner_shares(SAMPLE_INPUTS, REGION, "C29", "same_sector", 0.05, "per_capita")


class TestSectorShares:
    def test_single_sector_full_share(self):
        shares = sector_input_shares({("CHN", "C29"): 5.0, ("DEU", "C29"): 50.0}, REGION, 0.05)
        named = shares.table[~shares.table["is_other"]]
        assert named["key"].tolist() == ["C29"]
        assert named.iloc[0]["share"] == 1.0

    def test_dominant_sector_ranked_first(self):
        inputs = {("CHN", "C29"): 60.0, ("CHN", "C27"): 25.0, ("USA", "C22"): 15.0}
        shares = sector_input_shares(inputs, REGION, 0.05)
        named = shares.table[~shares.table["is_other"]]
        assert named["key"].tolist() == ["C29", "C27", "C22"]

    def test_small_sectors_merged_into_other(self):
        inputs = {("CHN", "C29"): 96.0, ("CHN", "C27"): 2.0, ("USA", "C22"): 2.0}
        shares = sector_input_shares(inputs, REGION, 0.05)
        assert shares.other_bucket == pytest.approx(0.04)


class TestLevels:
    def test_single_year_equals_aggregate_total(self):
        io = table({("CHN", "C29", "DEU", "C29"): 5.0, ("DEU", "C29", "FRA", "C29"): 9.0})
        series = import_level_series({2020: io}, REGION, "C29", "same_sector")
        assert series == {2020: 5.0}

    def test_doubled_entries_double_totals(self):
        io1 = table({("CHN", "C29", "DEU", "C29"): 5.0}, year=2019)
        io2 = table({("CHN", "C29", "DEU", "C29"): 10.0}, year=2020)
        series = import_level_series({2019: io1, 2020: io2}, REGION, "C29", "same_sector")
        assert series[2020] == 2 * series[2019]

    def test_monotone_fixture_gives_monotone_series(self):
        tables = {
            year: table({("CHN", "C29", "DEU", "C29"): float(10 + i)}, year=year)
            for i, year in enumerate(range(2015, 2020))
        }
        series = import_level_series(tables, REGION, "C29", "same_sector")
        values = [series[y] for y in sorted(series)]
        assert values == sorted(values)


class TestLoadIoTable:
    def test_load_and_shape(self, tmp_path):
        path = tmp_path / "io.csv"
        path.write_text(
            "origin_country,origin_sector,dest_country,dest_sector,value_usd\n"
            "CHN,C29,DEU,C29,5.0\nCHN,C29,DEU,C29,2.0\n"
        )
        io = load_io_table(path, 2020)
        assert io.entries[("CHN", "C29", "DEU", "C29")] == 7.0  # duplicates summed
        assert io.sectors == frozenset({"C29"})

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "io.csv"
        path.write_text("a,b,c,d,e\n1,2,3,4,5\n")
        with pytest.raises(IOTableError):
            load_io_table(path, 2020)

    def test_negative_value_rejected(self, tmp_path):
        path = tmp_path / "io.csv"
        path.write_text(
            "origin_country,origin_sector,dest_country,dest_sector,value_usd\nCHN,C29,DEU,C29,-5\n"
        )
        with pytest.raises(IOTableError):
            load_io_table(path, 2020)
