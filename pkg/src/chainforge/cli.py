"""The ``forge`` command line: pipeline stages from ingestion to vulnerability.

Each subcommand reads the shared config file, validates its inputs, and
writes tables (plus figures) under the output directory. Intermediates carry
a content hash of their inputs, so an up-to-date artifact is not recomputed.
Exit codes: 0 success, 1 validation error, 2 computation error.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd

from . import __version__, figures
from .artifacts import inputs_digest, is_fresh, read_meta, read_table, write_json, write_table
from .catalog import CatalogError, SupplyChainCatalog, accumulator_codes, resolve_catalog
from .config import ConfigError, PipelineConfig, UpstreamMissingError, load_config
from .fitness import fitness_complexity, fitness_ranking_series
from .io_tables import (
    IOTableError,
    aggregate_region_sector,
    import_level_series,
    load_io_table,
    partner_shares,
    sector_input_shares,
)
from .progression import (
    ProgressionForecast,
    ProgressionParams,
    country_progression_stats,
    predict_progression,
    save_models,
    train_progression_models,
)
from .regions import RegionDefinition, builtin_eu27, load_region
from .specialization import binarize, compute_rca, read_matrix, write_matrix
from .trade import (
    FlowParseError,
    TradeTensor,
    aggregate_exports,
    category_series,
    convert_vintage,
    import_growth_ranking,
    parse_flows,
    product_series,
    reconcile_mirror_flows,
    reconciliation_strategy,
)
from .vulnerability import build_vulnerability_table, vulnerability_frame

VALIDATION_ERRORS = (ConfigError, FlowParseError, IOTableError, CatalogError, FileNotFoundError)


class Stage:
    """Shared state for one command invocation."""

    def __init__(self, config_path: str, year: int | None, seed: int | None, out: str | None):
        self.cfg: PipelineConfig = load_config(config_path)
        if seed is not None:
            self.cfg.seed = seed
        if out is not None:
            self.cfg.out_dir = Path(out)
        self.year_override = year
        self.out: Path = self.cfg.out_dir
        self.out.mkdir(parents=True, exist_ok=True)

    @functools.cached_property
    def catalog(self) -> SupplyChainCatalog:
        return resolve_catalog(self.cfg.catalog_file, self.cfg.concordance_file)

    @functools.cached_property
    def region(self) -> RegionDefinition:
        if self.cfg.region_file is not None:
            return load_region(self.cfg.region_file)
        return builtin_eu27()

    # --- artifact paths ---------------------------------------------------------
    def tensor_path(self) -> Path:
        return self.out / "tensor.csv"

    def forecast_path(self, vintage: int, base_year: int) -> Path:
        return self.out / f"forecast_hs{vintage}_{base_year}.csv"

    def require_artifact(self, path: Path, command: str) -> Path:
        if not path.exists():
            raise UpstreamMissingError(path, command)
        return path

    def load_tensor(self) -> TradeTensor:
        path = self.require_artifact(self.tensor_path(), "ingest")
        frame = read_table(path, dtype={"product": str})
        entries = {
            (int(r.year), str(r.exporter), str(r.importer), str(r.product)): float(r.value_usd)
            for r in frame.itertuples()
        }
        vintage = int(read_meta(path).get("vintage", self.cfg.vintage))
        return TradeTensor(entries=entries, vintage=vintage)

    def load_forecast(self, vintage: int, base_year: int) -> ProgressionForecast:
        path = self.require_artifact(self.forecast_path(vintage, base_year), "progression")
        frame = read_table(path, dtype={"product": str})
        probs = frame.pivot(index="country", columns="product", values="probability").sort_index()
        mask = (
            frame.pivot(index="country", columns="product", values="candidate_flag")
            .sort_index()
            .astype(bool)
        )
        meta = read_meta(path)
        return ProgressionForecast(
            probabilities=probs.sort_index(axis=1),
            candidate_mask=mask.sort_index(axis=1),
            horizon_years=int(meta.get("horizon", self.cfg.horizon)),
            base_year=base_year,
        )


def stage_options(fn):
    @click.option("--config", "config_path", required=True, type=click.Path(), help="pipeline config file")
    @click.option("--year", type=int, default=None, help="restrict the command to one year")
    @click.option("--seed", type=int, default=None, help="override the config seed")
    @click.option("--out", type=click.Path(), default=None, help="override the output directory")
    @functools.wraps(fn)
    def wrapper(config_path, year, seed, out, **kwargs):
        try:
            stage = Stage(config_path, year, seed, out)
            fn(stage, **kwargs)
        except VALIDATION_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except Exception as exc:
            click.echo(f"computation error: {exc}", err=True)
            sys.exit(2)

    return wrapper


@click.group()
def main():
    """Supply-chain competitiveness and vulnerability pipeline."""


# --- ingest -----------------------------------------------------------------------


@main.command()
@stage_options
def ingest(stage: Stage):
    """Parse trade files, reconcile mirrored declarations, persist the tensor."""
    cfg = stage.cfg
    trade_files = cfg.require("trade_files")
    digest = inputs_digest(trade_files, {"reconciliation": cfg.reconciliation, "vintage": cfg.vintage})
    out_path = stage.tensor_path()
    if is_fresh(out_path, digest):
        click.echo(f"cached: {out_path}")
        return
    strategy = reconciliation_strategy(cfg.reconciliation)
    records = []
    for path in trade_files:
        records.extend(parse_flows(path))
    tensor = reconcile_mirror_flows(records, strategy, vintage=cfg.vintage)
    rows = [
        {"year": k[0], "exporter": k[1], "importer": k[2], "product": k[3], "value_usd": v}
        for k, v in sorted(tensor.entries.items())
    ]
    frame = pd.DataFrame(rows, columns=["year", "exporter", "importer", "product", "value_usd"])
    write_table(frame, out_path, digest, cfg.seed, extra={"vintage": tensor.vintage})
    click.echo(f"wrote {out_path} ({len(frame)} flows, {len(tensor.years())} years)")


# --- rca --------------------------------------------------------------------------


@main.command()
@stage_options
def rca(stage: Stage):
    """Yearly RCA and binary specialization matrices from the tensor store."""
    cfg = stage.cfg
    tensor_path = stage.require_artifact(stage.tensor_path(), "ingest")
    years = [stage.year_override] if stage.year_override else cfg.require("years")
    digest = inputs_digest([tensor_path], {"years": years, "rca_threshold": cfg.rca_threshold})
    tensor = stage.load_tensor()
    available = set(tensor.years())
    for year in years:
        if year not in available:
            raise ConfigError(f"year {year} not present in tensor store")
        rca_path = stage.out / f"rca_{year}.csv"
        m_path = stage.out / f"m_{year}.csv"
        if is_fresh(rca_path, digest) and is_fresh(m_path, digest):
            click.echo(f"cached: {rca_path}")
            continue
        w = aggregate_exports(tensor, year)
        rca_matrix = compute_rca(w, year=year)
        m = binarize(rca_matrix, cfg.rca_threshold)
        header = [f"inputs_sha256={digest}", f"seed={cfg.seed}", f"year={year}"]
        write_matrix(rca_matrix.values, rca_path, header)
        write_matrix(m.m, m_path, header)
        click.echo(f"wrote {rca_path} and {m_path}")


def _load_m(stage: Stage, year: int):
    from .specialization import SpecializationMatrix

    path = stage.require_artifact(stage.out / f"m_{year}.csv", "rca")
    return path, SpecializationMatrix(m=read_matrix(path).astype(int), threshold=stage.cfg.rca_threshold, year=year)


# --- fitness ----------------------------------------------------------------------


@main.command()
@stage_options
def fitness(stage: Stage):
    """Fitness-complexity per year plus the sector-fitness ranking series."""
    cfg = stage.cfg
    years = [stage.year_override] if stage.year_override else cfg.require("years")
    m_paths, matrices = {}, {}
    for year in years:
        path, m = _load_m(stage, year)
        m_paths[year] = path
        matrices[year] = m
    digest = inputs_digest(
        sorted(m_paths.values()),
        {"anchor": cfg.anchor, "tol": cfg.tol, "max_iter": cfg.max_iter, "vintage": cfg.vintage},
    )
    sector_path = stage.out / "sector_fitness.csv"
    year_paths = {y: (stage.out / f"fitness_{y}.csv", stage.out / f"complexity_{y}.csv") for y in years}
    outputs = [sector_path] + [p for pair in year_paths.values() for p in pair]
    if all(is_fresh(p, digest) for p in outputs):
        click.echo("cached: fitness artifacts")
        return

    results = []
    for year in years:
        efc = fitness_complexity(
            matrices[year], anchor=cfg.anchor, tol=cfg.tol, max_iter=cfg.max_iter, year=year,
        )
        results.append(efc)
        fit_path, comp_path = year_paths[year]
        write_table(_ranked_frame(efc.fitness, year), fit_path, digest, cfg.seed,
                    extra={"converged": efc.converged, "iterations": efc.iterations})
        write_table(_ranked_frame(efc.complexity, year), comp_path, digest, cfg.seed)
        if cfg.trace:
            trace = [
                {"n": t.n, "f_change": t.f_change, "q_change": t.q_change, "dummy_fitness": t.dummy_fitness}
                for t in efc.trace
            ]
            write_json({"year": year, "trace": trace}, stage.out / f"fitness_trace_{year}.json", digest, cfg.seed)

    present = set(matrices[years[0]].m.columns)
    for year in years[1:]:
        present &= set(matrices[year].m.columns)
    subset = [p for p in stage.catalog.intermediates(cfg.vintage) if p in present]
    if not subset:
        raise ConfigError(f"no catalogue HS{cfg.vintage} products present in the trade data")
    series = fitness_ranking_series(results, matrices, subset, normalization="by_max")
    rows = []
    for country in series.values.index:
        for year in series.values.columns:
            rows.append({
                "country": country, "year": year,
                "value": series.values.at[country, year],
                "rank": series.ranks.at[country, year],
            })
    write_table(pd.DataFrame(rows), sector_path, digest, cfg.seed,
                extra={"normalization": "by_max", "n_products": len(subset)})
    click.echo(f"wrote fitness artifacts for {len(years)} years")

    if cfg.figures:
        members = [c for c in series.values.index if c in stage.region]
        shown = series.values.loc[members] if members else series.values
        figures.bump_chart(shown, stage.out / "fig_fitness_bump.png",
                           f"Sector fitness (by-max) on {len(subset)} inputs")


def _ranked_frame(values: pd.Series, year: int) -> pd.DataFrame:
    order = sorted(values.index, key=lambda c: (-values[c], c))
    rank = {c: i for i, c in enumerate(order, start=1)}
    return pd.DataFrame({
        "entity": list(values.index),
        "year": year,
        "value": [values[c] for c in values.index],
        "rank": [rank[c] for c in values.index],
    })


# --- progression ------------------------------------------------------------------


def _aligned_export_matrices(tensor: TradeTensor, years: list[int]) -> dict[int, pd.DataFrame]:
    """Per-year W matrices on the union universe, absent flows as zeros."""
    frames = {year: aggregate_exports(tensor, year) for year in years}
    countries = sorted(set().union(*[f.index for f in frames.values()]))
    products = sorted(set().union(*[f.columns for f in frames.values()]))
    return {
        year: frame.reindex(index=countries, columns=products, fill_value=0.0)
        for year, frame in frames.items()
    }


def _progression_block(stage: Stage, tensor: TradeTensor, t0: int, t1: int, base_year: int,
                       digest: str, vintage: int):
    """Train on the t0 -> t1 transition and forecast from base_year."""
    cfg = stage.cfg
    aligned = _aligned_export_matrices(tensor, sorted({t0, t1, base_year}))
    rca_t0 = compute_rca(aligned[t0], year=t0)
    m_t0 = binarize(rca_t0, cfg.rca_threshold)
    m_t1 = binarize(compute_rca(aligned[t1], year=t1), cfg.rca_threshold)
    params = ProgressionParams(
        horizon_years=t1 - t0, n_trees=cfg.n_trees, max_depth=cfg.max_depth, seed=cfg.seed,
    )
    models = train_progression_models(m_t0, m_t1, rca_t0, params)
    rca_base = compute_rca(aligned[base_year], year=base_year)
    m_base = binarize(rca_base, cfg.rca_threshold)
    forecast = predict_progression(models, m_base, rca_base)

    rows = []
    for country in forecast.probabilities.index:
        for product in forecast.probabilities.columns:
            candidate = bool(forecast.candidate_mask.at[country, product])
            prob = forecast.probabilities.at[country, product]
            rows.append({
                "country": country, "product": product,
                "probability": prob if candidate else np.nan,
                "candidate_flag": int(candidate),
            })
    frame = pd.DataFrame(rows, columns=["country", "product", "probability", "candidate_flag"])
    out_path = stage.forecast_path(vintage, base_year)
    write_table(frame, out_path, digest, cfg.seed,
                extra={"horizon": params.horizon_years, "base_year": base_year,
                       "fallback_products": ";".join(models.fallback_products)})
    save_models(models, stage.out / f"models_hs{vintage}",
                meta={"inputs_sha256": digest, "seed": cfg.seed, "version": __version__})
    return forecast, out_path


@main.command()
@stage_options
def progression(stage: Stage):
    """Train per-product ensembles and emit progression forecasts and rankings."""
    cfg = stage.cfg
    tensor_path = stage.require_artifact(stage.tensor_path(), "ingest")
    t0, t1 = cfg.require("train_year0", "train_year1")
    base_year = stage.year_override or cfg.require("base_year")
    params = {"t0": t0, "t1": t1, "base": base_year, "seed": cfg.seed,
              "n_trees": cfg.n_trees, "max_depth": cfg.max_depth,
              "rca_threshold": cfg.rca_threshold, "vv": cfg.vulnerability_vintage}
    digest = inputs_digest([tensor_path], params)
    main_forecast_path = stage.forecast_path(cfg.vintage, base_year)
    stats_path = stage.out / f"progression_stats_hs{cfg.vintage}_{base_year}.csv"
    if is_fresh(main_forecast_path, digest) and is_fresh(stats_path, digest):
        click.echo("cached: progression artifacts")
        return

    tensor = stage.load_tensor()
    forecast, _ = _progression_block(stage, tensor, t0, t1, base_year, digest, cfg.vintage)
    subset = [p for p in stage.catalog.intermediates(cfg.vintage) if p in forecast.probabilities.columns]
    if not subset:
        raise ConfigError(f"no catalogue HS{cfg.vintage} products present in the forecast")
    stats, average = country_progression_stats(forecast, subset)
    members = [c for c in stats["country"] if c in stage.region] if len(stats) else []
    write_table(stats, stats_path, digest, cfg.seed, extra={"region_average": average})
    click.echo(f"wrote {stats_path} (region average {average:.4f})")
    if cfg.figures:
        block = forecast.probabilities[subset]
        samples = {}
        for country in (members or stats["country"]):
            vals = block.loc[country].dropna()
            if len(vals):
                samples[country] = [float(v) for v in vals]
        figures.progression_boxes(samples, average, stage.out / "fig_prog_box.png",
                                  f"Progression probabilities, base {base_year}")

    # second block on the vulnerability vintage for the accumulator analyses
    if cfg.vulnerability_year is not None:
        vy = cfg.vulnerability_year
        vv = cfg.vulnerability_vintage
        tensor_v = convert_vintage(tensor, stage.catalog, vv) if vv != tensor.vintage else tensor
        fc_v, fc_path = _progression_block(stage, tensor_v, vy - cfg.horizon, vy, vy, digest, vv)
        acc = [p for p in accumulator_codes(stage.catalog, vv) if p in fc_v.probabilities.columns]
        if acc:
            acc_stats, acc_avg = country_progression_stats(fc_v, acc)
            write_table(acc_stats, stage.out / f"progression_stats_acc_{vy}.csv", digest, cfg.seed,
                        extra={"region_average": acc_avg})
            if cfg.figures:
                block = fc_v.probabilities[acc]
                members = [c for c in block.index if c in stage.region]
                figures.progression_bars(block.loc[members] if members else block, acc_avg,
                                         stage.out / "fig_prog_acc.png",
                                         f"Accumulator progression, base {vy} (HS{vv})")
        click.echo(f"wrote {fc_path}")


# --- io-shares --------------------------------------------------------------------


@main.command("io-shares")
@stage_options
def io_shares(stage: Stage):
    """Supplier- and sector-share tables from the input-output files."""
    cfg = stage.cfg
    io_files = cfg.io_files()
    if stage.year_override:
        if stage.year_override not in io_files:
            raise ConfigError(f"year {stage.year_override} not in io_years")
        io_files = {stage.year_override: io_files[stage.year_override]}
    digest = inputs_digest(io_files.values(), {"sector": cfg.io_sector, "threshold": cfg.threshold})
    outputs = {
        "same": stage.out / "io_partner_shares_same_sector.csv",
        "other": stage.out / "io_partner_shares_other_sectors.csv",
        "sector": stage.out / "io_sector_shares.csv",
        "levels": stage.out / "io_import_levels.csv",
    }
    if all(is_fresh(p, digest) for p in outputs.values()):
        click.echo("cached: io-shares artifacts")
        return

    tables = {year: load_io_table(path, year) for year, path in io_files.items()}
    same_rows, other_rows, sector_rows = [], [], []
    for year in sorted(tables):
        inputs = aggregate_region_sector(tables[year], stage.region, cfg.io_sector)
        same = partner_shares(inputs, stage.region, cfg.io_sector, "same_sector",
                              cfg.threshold, "all_inputs", year=year)
        other = partner_shares(inputs, stage.region, cfg.io_sector, "other_sectors",
                               cfg.threshold, "all_inputs", year=year)
        sector = sector_input_shares(inputs, stage.region, cfg.threshold, "extra_region", year=year)
        same_rows.append(same.table)
        other_rows.append(other.table)
        sector_rows.append(sector.table)
    same_all = pd.concat(same_rows, ignore_index=True)
    other_all = pd.concat(other_rows, ignore_index=True)
    sector_all = pd.concat(sector_rows, ignore_index=True)
    write_table(same_all, outputs["same"], digest, cfg.seed, extra={"threshold": cfg.threshold})
    write_table(other_all, outputs["other"], digest, cfg.seed, extra={"threshold": cfg.threshold})
    write_table(sector_all, outputs["sector"], digest, cfg.seed, extra={"threshold": cfg.threshold})

    levels = []
    for scope, label in (("same_sector", "sector_inputs"), ("other_sectors", "other_inputs")):
        series = import_level_series(tables, stage.region, cfg.io_sector, scope)
        levels.extend({"group": label, "year": y, "value": v} for y, v in series.items())
    levels_frame = pd.DataFrame(levels, columns=["group", "year", "value"])
    write_table(levels_frame, outputs["levels"], digest, cfg.seed)
    click.echo(f"wrote io-shares artifacts for {len(tables)} years")

    if cfg.figures:
        figures.share_bars(same_all, stage.out / "fig_io_auto.png",
                           f"Extra-region suppliers of {cfg.io_sector} inputs")
        figures.share_bars(other_all, stage.out / "fig_io_nonauto.png",
                           f"Extra-region suppliers of non-{cfg.io_sector} inputs")
        figures.share_bars(sector_all, stage.out / "fig_io_sector.png",
                           "Extra-region supplying industries")
        figures.level_lines(levels_frame, stage.out / "fig_io_levels.png",
                            "Extra-region input imports", ylabel="USD")


# --- trends -----------------------------------------------------------------------


@main.command()
@stage_options
def trends(stage: Stage):
    """Category import series, growth ranking, and the EV/accumulator trends."""
    cfg = stage.cfg
    tensor_path = stage.require_artifact(stage.tensor_path(), "ingest")
    cat_years = cfg.require("category_years")
    y0, y1 = cfg.require("growth_year0", "growth_year1")
    params = {"cat_years": cat_years, "y0": y0, "y1": y1, "ev_years": cfg.ev_years,
              "ev_vintage": cfg.ev_vintage, "ev_compare": cfg.ev_compare}
    digest = inputs_digest([tensor_path], params)
    category_path = stage.out / "comtrade_category.csv"
    growth_path = stage.out / "comtrade_growth.csv"
    outputs = [category_path, growth_path]
    ev_paths = {}
    if cfg.ev_years:
        ev_paths = {"cars": stage.out / "exp_cars.csv", "acc": stage.out / "exp_acc.csv",
                    "imp": stage.out / "imp_acc.csv"}
        outputs += list(ev_paths.values())
    if all(is_fresh(p, digest) for p in outputs):
        click.echo("cached: trends artifacts")
        return

    tensor = stage.load_tensor()
    catalog = stage.catalog

    series = category_series(tensor, catalog, stage.region, "import", cat_years)
    cat_frame = pd.DataFrame(
        [{"category": c, "year": y, "partner": p, "value_usd": v} for (c, y, p), v in sorted(series.items())],
        columns=["category", "year", "partner", "value_usd"],
    )
    write_table(cat_frame, category_path, digest, cfg.seed)

    ranking = import_growth_ranking(tensor, catalog, stage.region, y0, y1)
    rows = [
        {"rank": i, "product": p, "category": catalog.category_of(p, tensor.vintage),
         "growth": g, "status": "ranked"}
        for i, (p, g) in enumerate(ranking.ranked, start=1)
    ]
    rows += [{"rank": np.nan, "product": p, "category": catalog.category_of(p, tensor.vintage),
              "growth": np.nan, "status": "new_product"} for p in ranking.new_products]
    rows += [{"rank": np.nan, "product": p, "category": catalog.category_of(p, tensor.vintage),
              "growth": np.nan, "status": "untraded"} for p in ranking.untraded]
    growth_frame = pd.DataFrame(rows, columns=["rank", "product", "category", "growth", "status"])
    avg = ranking.average_growth
    write_table(growth_frame, growth_path, digest, cfg.seed,
                extra={"average_growth": "" if avg is None else avg, "year0": y0, "year1": y1})
    click.echo(f"wrote {category_path} and {growth_path}")

    if cfg.figures:
        figures.category_import_bars(cat_frame, cat_years, stage.out / "fig_category_imports.png",
                                     "Extra-region imports by category and supplier")
        ranked_only = growth_frame[growth_frame["status"] == "ranked"]
        figures.growth_ranking_bars(ranked_only, avg, stage.out / "fig_import_growth.png",
                                    f"Import growth {y0}-{y1} by product")

    if cfg.ev_years:
        _ev_trends(stage, tensor, digest, ev_paths)


def _ev_trends(stage: Stage, tensor: TradeTensor, digest: str, ev_paths: dict[str, Path]):
    """Vehicle and accumulator series on the EV-detail vintage."""
    cfg = stage.cfg
    catalog = stage.catalog
    restricted = tensor.restrict_products(set(catalog.codes(tensor.vintage)))
    ev_tensor = (convert_vintage(restricted, catalog, cfg.ev_vintage)
                 if cfg.ev_vintage != tensor.vintage else restricted)
    groups: list[tuple[str, RegionDefinition]] = [(stage.region.name, stage.region)]
    for code in [c.strip() for c in cfg.ev_compare.split(",") if c.strip()]:
        groups.append((code, RegionDefinition(name=code, members=frozenset([code]))))

    vehicle_cats = ("Vehicles", "HybridVehicles", "ElectricVehicles")
    rows = []
    for name, group in groups:
        series = category_series(ev_tensor, catalog, group, "export", cfg.ev_years)
        totals: dict[tuple[str, int], float] = {}
        for (cat, year, _partner), v in series.items():
            if cat in vehicle_cats:
                totals[(cat, year)] = totals.get((cat, year), 0.0) + v
        rows.extend(
            {"group": name, "category": cat, "year": year, "value_usd": v}
            for (cat, year), v in sorted(totals.items())
        )
    cars = pd.DataFrame(rows, columns=["group", "category", "year", "value_usd"])
    write_table(cars, ev_paths["cars"], digest, cfg.seed)

    acc_codes = accumulator_codes(catalog, cfg.ev_vintage)
    rows = []
    for name, group in groups:
        series = product_series(ev_tensor, acc_codes, group, "export", cfg.ev_years)
        totals = {}
        for (prod, year, _partner), v in series.items():
            totals[(prod, year)] = totals.get((prod, year), 0.0) + v
        rows.extend(
            {"group": name, "product": prod, "year": year, "value_usd": v}
            for (prod, year), v in sorted(totals.items())
        )
    acc = pd.DataFrame(rows, columns=["group", "product", "year", "value_usd"])
    write_table(acc, ev_paths["acc"], digest, cfg.seed)

    imports = product_series(ev_tensor, acc_codes, stage.region, "import", cfg.ev_years)
    imp = pd.DataFrame(
        [{"product": p, "year": y, "partner": c, "value_usd": v} for (p, y, c), v in sorted(imports.items())],
        columns=["product", "year", "partner", "value_usd"],
    )
    write_table(imp, ev_paths["imp"], digest, cfg.seed)
    click.echo("wrote EV trend artifacts")

    if cfg.figures:
        cars_lines = cars.assign(group=cars["group"] + " " + cars["category"], value=cars["value_usd"])
        figures.level_lines(cars_lines[["group", "year", "value"]],
                            stage.out / "fig_exp_cars.png", "Vehicle exports by propulsion")
        acc_lines = acc.assign(group=acc["group"] + " " + acc["product"], value=acc["value_usd"])
        figures.level_lines(acc_lines[["group", "year", "value"]],
                            stage.out / "fig_exp_acc.png", "Accumulator exports by type")
        imp_fig = imp.rename(columns={"product": "category"})
        figures.category_import_bars(imp_fig, cfg.ev_years, stage.out / "fig_imp_acc.png",
                                     "Accumulator imports by type and supplier")


# --- vulnerability ------------------------------------------------------------------


@main.command()
@stage_options
def vulnerability(stage: Stage):
    """Join exposure, concentration, and progression into the vulnerability table."""
    cfg = stage.cfg
    tensor_path = stage.require_artifact(stage.tensor_path(), "ingest")
    year = stage.year_override or cfg.require("vulnerability_year")
    vv = cfg.vulnerability_vintage
    forecast_path = stage.require_artifact(stage.forecast_path(vv, year), "progression")
    digest = inputs_digest([tensor_path, forecast_path], {"year": year, "vintage": vv})
    table_path = stage.out / "vulnerability.csv"
    skipped_path = stage.out / "vulnerability_skipped.csv"
    if is_fresh(table_path, digest) and is_fresh(skipped_path, digest):
        click.echo("cached: vulnerability artifacts")
        return

    tensor = stage.load_tensor()
    restricted = tensor.restrict_products(set(stage.catalog.codes(tensor.vintage)))
    tensor_v = convert_vintage(restricted, stage.catalog, vv) if vv != tensor.vintage else restricted
    forecast = stage.load_forecast(vv, year)
    records, skipped = build_vulnerability_table(tensor_v, stage.region, stage.catalog, forecast, year)
    frame = vulnerability_frame(records)
    write_table(frame, table_path, digest, cfg.seed, extra={"year": year, "vintage": vv})
    write_table(pd.DataFrame(skipped, columns=["product", "reason"]), skipped_path, digest, cfg.seed)
    click.echo(f"wrote {table_path} ({len(records)} products, {len(skipped)} skipped)")

    if cfg.figures and len(frame):
        cuts = (float(frame["hhi_m"].median()), float(frame["net_exposure"].median()))
        figures.vulnerability_scatter(frame, cuts, stage.out / "fig_vulnerability.png",
                                      f"Input vulnerability, {year} (HS{vv})")


if __name__ == "__main__":
    main()
