"""Matplotlib renderings of the report tables, written next to the CSVs.

Every function takes already-computed frames and a target path; nothing here
recomputes analytics. The Agg backend keeps rendering headless and the PNGs
byte-stable for a given input, so figures participate in the deterministic
output tree.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

DPI = 150

CATEGORY_COLORS = {
    "RubberMetalParts": "tab:green",
    "MiscellaneousParts": "tab:olive",
    "EnginesAndParts": "tab:blue",
    "ElectricalElectricParts": "tab:red",
    "Vehicles": "tab:gray",
    "HybridVehicles": "tab:purple",
    "ElectricVehicles": "tab:cyan",
}


def _save(fig, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def bump_chart(values: pd.DataFrame, path: Path, title: str) -> None:
    """Normalized sector-fitness lines per country across years."""
    fig, ax = plt.subplots(figsize=(9, 5))
    for country in values.index:
        ax.plot(values.columns, values.loc[country], marker="o", ms=3, lw=1.2, label=str(country))
    ax.set_xlabel("year")
    ax.set_ylabel("sector fitness / yearly max")
    ax.set_title(title)
    ax.legend(fontsize=7, ncol=2, loc="center left", bbox_to_anchor=(1.0, 0.5))
    fig.tight_layout()
    _save(fig, path)


def progression_boxes(samples: dict[str, list[float]], reference: float, path: Path, title: str) -> None:
    """One box per country over its candidate-product probabilities."""
    countries = list(samples)
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(countries)), 5))
    if countries:
        ax.boxplot([samples[c] for c in countries], tick_labels=countries, whis=(5, 95))
    if np.isfinite(reference):
        ax.axhline(reference, color="black", lw=1, label=f"region average {reference:.3f}")
        ax.legend(fontsize=8)
    ax.set_ylabel("progression probability")
    ax.set_title(title)
    ax.tick_params(axis="x", rotation=90, labelsize=7)
    fig.tight_layout()
    _save(fig, path)


def progression_bars(probs: pd.DataFrame, reference: float, path: Path, title: str) -> None:
    """Stacked per-product progression bars per country, highest total first."""
    totals = probs.fillna(0.0).sum(axis=1).sort_values(ascending=False, kind="mergesort")
    probs = probs.loc[totals.index]
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(probs)), 5))
    bottom = np.zeros(len(probs))
    for product in probs.columns:
        vals = probs[product].fillna(0.0).to_numpy()
        ax.bar(range(len(probs)), vals, bottom=bottom, label=str(product))
        bottom += vals
    if np.isfinite(reference):
        ax.axhline(reference, color="black", lw=1)
    ax.set_xticks(range(len(probs)))
    ax.set_xticklabels(probs.index, rotation=90, fontsize=7)
    ax.set_ylabel("progression probability")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, path)


def share_bars(table: pd.DataFrame, path: Path, title: str) -> None:
    """Stacked supplier shares per year; expects (year, key, share) rows."""
    years = sorted(table["year"].unique())
    keys = list(dict.fromkeys(table["key"]))
    fig, ax = plt.subplots(figsize=(9, 5))
    bottom = np.zeros(len(years))
    for key in keys:
        vals = []
        for y in years:
            row = table[(table["year"] == y) & (table["key"] == key)]
            vals.append(float(row["share"].iloc[0]) if len(row) else 0.0)
        vals = np.array(vals)
        ax.bar([str(y) for y in years], vals, bottom=bottom, label=str(key))
        bottom += vals
    ax.set_ylabel("share of extra-region inputs")
    ax.set_title(title)
    ax.tick_params(axis="x", rotation=90, labelsize=7)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    _save(fig, path)


def level_lines(series: pd.DataFrame, path: Path, title: str, ylabel: str = "USD") -> None:
    """Line per group: expects columns (group, year, value)."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for group in dict.fromkeys(series["group"]):
        sub = series[series["group"] == group].sort_values("year")
        ax.plot(sub["year"], sub["value"], marker="o", ms=3, label=str(group))
    ax.set_xlabel("year")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def category_import_bars(series: pd.DataFrame, years: list[int], path: Path, title: str) -> None:
    """Per-category subplot of import levels by supplier for selected years."""
    categories = sorted(series["category"].unique())
    fig, axes = plt.subplots(1, max(1, len(categories)), figsize=(4.2 * max(1, len(categories)), 4.5), squeeze=False)
    for ax, category in zip(axes[0], categories):
        sub = series[series["category"] == category]
        partners = list(dict.fromkeys(sub.sort_values("value_usd", ascending=False)["partner"]))
        bottom = np.zeros(len(years))
        for partner in partners:
            vals = np.array([
                float(sub[(sub["year"] == y) & (sub["partner"] == partner)]["value_usd"].sum())
                for y in years
            ])
            ax.bar([str(y) for y in years], vals, bottom=bottom, label=str(partner))
            bottom += vals
        ax.set_title(category, fontsize=9)
        ax.tick_params(labelsize=7)
        ax.legend(fontsize=6)
    fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def growth_ranking_bars(table: pd.DataFrame, average: float | None, path: Path, title: str) -> None:
    """Import-growth bars colored by category with the all-products average line."""
    fig, ax = plt.subplots(figsize=(max(8, 0.2 * len(table)), 5))
    colors = [CATEGORY_COLORS.get(c, "tab:brown") for c in table["category"]]
    ax.bar(range(len(table)), table["growth"] * 100.0, color=colors)
    if average is not None:
        ax.axhline(average * 100.0, color="black", lw=1.2, label=f"all-products average {average * 100:.1f}%")
        ax.legend(fontsize=8)
    ax.set_xticks(range(len(table)))
    ax.set_xticklabels(table["product"], rotation=90, fontsize=6)
    ax.set_ylabel("import growth (%)")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def vulnerability_scatter(frame: pd.DataFrame, cuts: tuple[float, float], path: Path, title: str) -> None:
    """Concentration vs net exposure, marker area from the size metric."""
    fig, ax = plt.subplots(figsize=(8, 6))
    for category in sorted(frame["category"].unique()):
        sub = frame[frame["category"] == category]
        ax.scatter(
            sub["hhi_m"], sub["net_exposure"],
            s=12 + 18 * sub["size_metric"],
            color=CATEGORY_COLORS.get(category, "tab:brown"),
            alpha=0.7, label=category, edgecolors="none",
        )
    hhi_cut, exp_cut = cuts
    ax.axvline(hhi_cut, color="gray", lw=0.8, ls="--")
    ax.axhline(exp_cut, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("import concentration (HHI-M)")
    ax.set_ylabel("extra / intra region import ratio")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, path)
