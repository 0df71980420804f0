"""Product relatedness and progression forecasting.

Two routes to the probability that a country gains comparative advantage in
a product after a fixed horizon: a co-occurrence density baseline, and one
seeded tree ensemble per product trained on the historical transition
(features: the country's full RCA vector; training pool: countries not yet
specialised in the product).
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd

from .specialization import RcaMatrix, SpecializationMatrix
from .trees import CartTree, ForestParams, forest_predict, grow_forest

MODEL_FORMAT_VERSION = 1


class UniverseMismatchError(ValueError):
    pass


@dataclass
class RelatednessMatrix:
    values: pd.DataFrame  # products x products in [0, 1]
    method: str = "cooccurrence"


def cooccurrence_relatedness(m_history: list[SpecializationMatrix]) -> RelatednessMatrix:
    """Shared-exporter counts normalized by the larger ubiquity, pooled over years.

    rel[p, q] = #(country-year with M=1 in both p and q) / max(ubiquity_p, ubiquity_q)
    """
    if not m_history:
        raise ValueError("need at least one specialization matrix")
    products = list(m_history[0].m.columns)
    for m in m_history[1:]:
        if list(m.m.columns) != products:
            raise UniverseMismatchError("specialization matrices cover different product sets")
    co = np.zeros((len(products), len(products)))
    ub = np.zeros(len(products))
    for m in m_history:
        mat = m.m.to_numpy().astype(float)
        co += mat.T @ mat
        ub += mat.sum(axis=0)
    denom = np.maximum(ub[:, None], ub[None, :])
    rel = np.divide(co, denom, out=np.zeros_like(co), where=denom > 0)
    return RelatednessMatrix(values=pd.DataFrame(rel, index=products, columns=products))


def density(m: SpecializationMatrix, rel: RelatednessMatrix) -> pd.DataFrame:
    """How close each country sits to each product, weighted by relatedness.

    density[c, p] = sum_q M_cq * rel_pq / sum_q rel_pq, with 0/0 -> 0.
    """
    if list(m.m.columns) != list(rel.values.columns):
        raise UniverseMismatchError("matrix and relatedness cover different product sets")
    mat = m.m.to_numpy().astype(float)
    rv = rel.values.to_numpy()
    num = mat @ rv.T
    den = rv.sum(axis=1)
    vals = np.divide(num, den[None, :], out=np.zeros_like(num), where=den[None, :] > 0)
    return pd.DataFrame(vals, index=m.m.index, columns=m.m.columns)


@dataclass
class ProgressionParams:
    horizon_years: int = 5
    n_trees: int = 100
    max_depth: int = 6
    neg_pos_cap: int = 10  # negatives subsampled to at most cap x positives
    seed: int = 0


@dataclass
class TreeEnsembleModel:
    """Per-product model: either a tree ensemble or the density fallback."""

    product: str
    kind: str  # "forest" | "density_fallback"
    prior: float
    trees: list[CartTree] = field(default_factory=list)
    seed: int = 0
    n_trees: int = 0
    max_depth: int = 0

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.kind != "forest":
            raise RuntimeError(f"model for {self.product} is a fallback; use density")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if all(len(t.nodes) == 1 for t in self.trees):
            # nothing was learnable (e.g. constant features): answer the prior
            return np.full(X.shape[0], self.prior)
        return forest_predict(self.trees, X)


@dataclass
class ProgressionModels:
    models: dict[str, TreeEnsembleModel]
    feature_products: list[str]
    relatedness: RelatednessMatrix
    params: ProgressionParams
    train_year: int | None = None

    @property
    def fallback_products(self) -> list[str]:
        return sorted(p for p, m in self.models.items() if m.kind == "density_fallback")


def _product_seed(run_seed: int, product: str) -> np.random.Generator:
    # stable per-product stream, independent of training order
    return np.random.default_rng([run_seed, zlib.crc32(product.encode("utf-8"))])


def train_progression_models(
    m_t0: SpecializationMatrix,
    m_t1: SpecializationMatrix,
    rca_t0: RcaMatrix,
    params: ProgressionParams | None = None,
) -> ProgressionModels:
    """Fit one ensemble per product on the t0 -> t1 adoption transition.

    For each product the training pool is the countries without advantage at
    t0, labelled by whether they hold it at t1. Products with a single-class
    pool fall back to the density baseline and are flagged.
    """
    params = params or ProgressionParams()
    if list(m_t0.m.index) != list(m_t1.m.index) or list(m_t0.m.columns) != list(m_t1.m.columns):
        raise UniverseMismatchError("t0 and t1 matrices cover different universes")
    if list(rca_t0.values.index) != list(m_t0.m.index) or list(rca_t0.values.columns) != list(m_t0.m.columns):
        raise UniverseMismatchError("RCA matrix does not match the specialization universe")

    products = [str(p) for p in m_t0.m.columns]
    X_all = rca_t0.values.to_numpy().astype(float)
    m0 = m_t0.m.to_numpy().astype(int)
    m1 = m_t1.m.to_numpy().astype(int)
    relatedness = cooccurrence_relatedness([m_t0])

    models: dict[str, TreeEnsembleModel] = {}
    for j, product in enumerate(products):
        pool = np.flatnonzero(m0[:, j] == 0)
        labels = m1[pool, j].astype(float)
        prior = float(labels.mean()) if len(labels) else 0.0
        rng = _product_seed(params.seed, product)
        n_pos = int(labels.sum())
        n_neg = len(labels) - n_pos
        if n_pos == 0 or n_neg == 0:
            models[product] = TreeEnsembleModel(product=product, kind="density_fallback", prior=prior)
            continue
        keep = pool
        if n_neg > params.neg_pos_cap * n_pos:
            neg_idx = pool[labels == 0]
            pos_idx = pool[labels == 1]
            sampled = rng.choice(neg_idx, size=params.neg_pos_cap * n_pos, replace=False)
            keep = np.sort(np.concatenate([pos_idx, sampled]))
            labels = m1[keep, j].astype(float)
        trees = grow_forest(
            X_all[keep], labels, rng,
            ForestParams(n_trees=params.n_trees, max_depth=params.max_depth),
        )
        models[product] = TreeEnsembleModel(
            product=product, kind="forest", prior=prior, trees=trees,
            seed=params.seed, n_trees=params.n_trees, max_depth=params.max_depth,
        )
    return ProgressionModels(
        models=models,
        feature_products=products,
        relatedness=relatedness,
        params=params,
        train_year=m_t0.year,
    )


@dataclass
class ProgressionForecast:
    probabilities: pd.DataFrame  # countries x products, NaN outside the candidate mask
    candidate_mask: pd.DataFrame  # True iff RCA < 1 at the base year
    horizon_years: int = 5
    base_year: int | None = None


def predict_progression(
    models: ProgressionModels,
    m_base: SpecializationMatrix,
    rca_base: RcaMatrix,
) -> ProgressionForecast:
    """Probability of gaining advantage per (country, product), candidates only.

    Candidates are the pairs with base-year RCA below 1; pairs already
    specialised get no forecast. Fallback products use the density baseline.
    """
    if list(rca_base.values.columns) != models.feature_products:
        raise UniverseMismatchError("RCA matrix does not match the trained product universe")
    if list(m_base.m.columns) != models.feature_products:
        raise UniverseMismatchError("base matrix does not match the trained product universe")

    countries = [str(c) for c in rca_base.values.index]
    products = models.feature_products
    X = rca_base.values.to_numpy().astype(float)
    candidate = rca_base.values.to_numpy() < 1.0
    dens = density(m_base, models.relatedness).to_numpy()

    probs = np.full((len(countries), len(products)), np.nan)
    for j, product in enumerate(products):
        rows = np.flatnonzero(candidate[:, j])
        if rows.size == 0:
            continue
        model = models.models[product]
        if model.kind == "forest":
            probs[rows, j] = model.predict(X[rows])
        else:
            probs[rows, j] = np.clip(dens[rows, j], 0.0, 1.0)
    return ProgressionForecast(
        probabilities=pd.DataFrame(probs, index=countries, columns=products),
        candidate_mask=pd.DataFrame(candidate, index=countries, columns=products),
        horizon_years=models.params.horizon_years,
        base_year=rca_base.year,
    )


def country_progression_stats(
    forecast: ProgressionForecast,
    subset: Iterable[str],
) -> tuple[pd.DataFrame, float]:
    """Rank countries by mean forecast probability over a product subset.

    Returns the ranked per-country summary (mean and quartiles over candidate
    products) and the pooled average over every candidate pair, which is the
    reference-line value of the ranking charts.
    """
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("subset is empty")
    unknown = [p for p in subset if p not in forecast.probabilities.columns]
    if unknown:
        raise KeyError(f"products not in forecast: {unknown}")
    block = forecast.probabilities[subset]
    rows = []
    pooled: list[float] = []
    for country in block.index:
        vals = block.loc[country].dropna()
        if vals.empty:
            continue
        pooled.extend(float(v) for v in vals)
        rows.append({
            "country": country,
            "mean": float(vals.mean()),
            "q1": float(vals.quantile(0.25)),
            "median": float(vals.quantile(0.5)),
            "q3": float(vals.quantile(0.75)),
            "n_products": int(vals.size),
        })
    table = pd.DataFrame(rows, columns=["country", "mean", "q1", "median", "q3", "n_products"])
    if not table.empty:
        table = table.sort_values(["mean", "country"], ascending=[False, True], kind="mergesort")
        table = table.reset_index(drop=True)
        table.insert(0, "rank", np.arange(1, len(table) + 1))
    average = float(np.mean(pooled)) if pooled else float("nan")
    return table, average


# --- model store ----------------------------------------------------------------
#
# One JSON file per product plus a manifest; trees serialize as flat node rows
# (feature, threshold, left, right, value) so the store stays text-only.

def save_models(models: ProgressionModels, directory: str | Path, meta: dict | None = None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "_meta": dict(meta or {}),
        "format_version": MODEL_FORMAT_VERSION,
        "feature_products": models.feature_products,
        "train_year": models.train_year,
        "params": {
            "horizon_years": models.params.horizon_years,
            "n_trees": models.params.n_trees,
            "max_depth": models.params.max_depth,
            "neg_pos_cap": models.params.neg_pos_cap,
            "seed": models.params.seed,
        },
        "relatedness": {
            "products": list(models.relatedness.values.columns),
            "values": [[float(v) for v in row] for row in models.relatedness.values.to_numpy()],
            "method": models.relatedness.method,
        },
    }
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for product in sorted(models.models):
        model = models.models[product]
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "product": model.product,
            "kind": model.kind,
            "prior": model.prior,
            "seed": model.seed,
            "n_trees": model.n_trees,
            "max_depth": model.max_depth,
            "trees": [t.to_jsonable() for t in model.trees],
        }
        with open(directory / f"model_{product}.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")


def load_models(directory: str | Path) -> ProgressionModels:
    directory = Path(directory)
    with open(directory / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest["format_version"] != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model store version {manifest['format_version']}")
    rel_products = manifest["relatedness"]["products"]
    relatedness = RelatednessMatrix(
        values=pd.DataFrame(manifest["relatedness"]["values"], index=rel_products, columns=rel_products),
        method=manifest["relatedness"]["method"],
    )
    params = ProgressionParams(**manifest["params"])
    models: dict[str, TreeEnsembleModel] = {}
    for product in manifest["feature_products"]:
        with open(directory / f"model_{product}.json", encoding="utf-8") as fh:
            payload = json.load(fh)
        models[product] = TreeEnsembleModel(
            product=payload["product"],
            kind=payload["kind"],
            prior=payload["prior"],
            trees=[CartTree.from_jsonable(t) for t in payload["trees"]],
            seed=payload["seed"],
            n_trees=payload["n_trees"],
            max_depth=payload["max_depth"],
        )
    return ProgressionModels(
        models=models,
        feature_products=list(manifest["feature_products"]),
        relatedness=relatedness,
        params=params,
        train_year=manifest.get("train_year"),
    )
