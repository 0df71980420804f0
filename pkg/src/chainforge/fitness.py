"""Fitness-complexity fixed point with optional dummy-country anchoring.

The recursion rewards diversified countries and penalizes products exported
by weak countries:

    F~_c = sum_p M_cp * Q_p          F_c = F~_c / norm(F~)
    Q~_p = 1 / sum_c M_cp / F_c      Q_p = Q~_p / mean(Q~)

starting from all ones. Without an anchor, F is normalized by its mean
(arithmetic by default, geometric optionally). With the dummy anchor a
synthetic country specialised in every product is appended and the fitness
vector is normalized by its score each step, pinning the dummy at exactly 1.
The dummy is an idealized yardstick, not a competitor: it stays out of the
complexity denominators, so anchoring rescales fitness without disturbing
the fixed point, rank order matches the unanchored run, and scores become
comparable across years through the fixed reference point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from .specialization import SpecializationMatrix

DUMMY_COUNTRY = "DUMMY"
ANCHORS = ("none", "dummy_country")

COMPLEXITY_FLOOR = 1e-300


class UnknownProductError(KeyError):
    def __init__(self, codes: Iterable[str]):
        self.codes = sorted(codes)
        super().__init__(f"products not in matrix: {self.codes}")


@dataclass
class IterationStats:
    n: int
    f_change: float
    q_change: float
    dummy_fitness: float | None = None


@dataclass
class EfcResult:
    fitness: pd.Series
    complexity: pd.Series
    iterations: int
    converged: bool
    anchor: str = "none"
    year: int | None = None
    trace: list[IterationStats] = field(default_factory=list)
    rank_stable_at: int | None = None
    floored_products: list[str] = field(default_factory=list)
    dropped_countries: list[str] = field(default_factory=list)
    dropped_products: list[str] = field(default_factory=list)


def _as_matrix(m) -> pd.DataFrame:
    if isinstance(m, SpecializationMatrix):
        return m.m.astype(float)
    if isinstance(m, pd.DataFrame):
        return m.astype(float)
    arr = np.asarray(m, dtype=float)
    return pd.DataFrame(arr)


def fitness_complexity(
    m,
    anchor: str = "none",
    tol: float = 1e-10,
    max_iter: int = 1000,
    fitness_mean: str = "arithmetic",
    year: int | None = None,
    keep_trace: bool = True,
) -> EfcResult:
    """Iterate the fitness-complexity map on a binary matrix to its fixed point.

    Countries with empty rows (and, unanchored, products with empty columns)
    cannot carry mass and are dropped before iterating; they are listed on the
    result. Products whose complexity underflows the floating-point range are
    floored at zero and flagged.
    """
    if anchor not in ANCHORS:
        raise ValueError(f"anchor must be one of {ANCHORS}, got {anchor!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if fitness_mean not in ("arithmetic", "geometric"):
        raise ValueError(f"unknown fitness_mean {fitness_mean!r}")

    frame = _as_matrix(m)
    if frame.size == 0 or not (frame.to_numpy() > 0).any():
        raise ValueError("specialization matrix is empty")
    if anchor == "dummy_country":
        if DUMMY_COUNTRY in frame.index:
            raise ValueError(f"matrix already contains a row named {DUMMY_COUNTRY}")
        frame = pd.concat([frame, pd.DataFrame([np.ones(frame.shape[1])], index=[DUMMY_COUNTRY], columns=frame.columns)])

    mat = (frame.to_numpy() > 0).astype(float)
    real_rows = np.array([c != DUMMY_COUNTRY for c in frame.index])
    row_ok = mat.sum(axis=1) > 0
    col_ok = mat[real_rows].sum(axis=0) > 0  # a product only the dummy exports has no real signal
    dropped_countries = [str(c) for c in frame.index[~row_ok]]
    dropped_products = [str(p) for p in frame.columns[~col_ok]]
    mat = mat[np.ix_(row_ok, col_ok)]
    countries = [str(c) for c in frame.index[row_ok]]
    products = [str(p) for p in frame.columns[col_ok]]
    dummy_idx = countries.index(DUMMY_COUNTRY) if anchor == "dummy_country" else None

    f = np.ones(mat.shape[0])
    q = np.ones(mat.shape[1])
    trace: list[IterationStats] = []
    converged = False
    iterations = 0
    rank_stable_at = None
    rank_streak = 0
    prev_ranks = None

    for n in range(1, max_iter + 1):
        f_new, q_new = _step(mat, f, q, dummy_idx, fitness_mean)
        f_change = _max_rel_change(f_new, f)
        q_change = _max_rel_change(q_new, q)
        f, q = f_new, q_new
        iterations = n
        if keep_trace:
            trace.append(IterationStats(
                n=n, f_change=f_change, q_change=q_change,
                dummy_fitness=float(f[dummy_idx]) if dummy_idx is not None else None,
            ))
        ranks = (np.argsort(np.argsort(-f)), np.argsort(np.argsort(-q)))
        if prev_ranks is not None and np.array_equal(ranks[0], prev_ranks[0]) and np.array_equal(ranks[1], prev_ranks[1]):
            rank_streak += 1
            if rank_streak >= 10 and rank_stable_at is None:
                rank_stable_at = n
        else:
            rank_streak = 0
        prev_ranks = ranks
        if f_change < tol and q_change < tol:
            converged = True
            break

    floored = [products[j] for j in np.flatnonzero(q <= 0)]
    return EfcResult(
        fitness=pd.Series(f, index=countries, name="fitness"),
        complexity=pd.Series(q, index=products, name="complexity"),
        iterations=iterations,
        converged=converged,
        anchor=anchor,
        year=year,
        trace=trace,
        rank_stable_at=rank_stable_at,
        floored_products=floored,
        dropped_countries=dropped_countries,
        dropped_products=dropped_products,
    )


def _step(mat, f, q, dummy_idx, fitness_mean):
    f_tilde = mat @ q
    if dummy_idx is not None:
        f_new = f_tilde / f_tilde[dummy_idx]
    elif fitness_mean == "geometric":
        pos = f_tilde[f_tilde > 0]
        f_new = f_tilde / np.exp(np.mean(np.log(pos)))
    else:
        f_new = f_tilde / f_tilde.mean()
    inv_f = np.zeros_like(f_new)
    pos = f_new > 0
    inv_f[pos] = 1.0 / f_new[pos]
    real = np.ones(len(f_new), dtype=bool)
    if dummy_idx is not None:
        real[dummy_idx] = False  # the yardstick does not weigh on products
    denom = inv_f[real] @ mat[real]
    with np.errstate(divide="ignore"):
        q_tilde = np.where(denom > 0, 1.0 / np.where(denom > 0, denom, 1.0), 0.0)
    # a zero-fitness country exporting p forces Q_p to zero
    dead = real & ~pos
    if dead.any():
        q_tilde[mat[dead].sum(axis=0) > 0] = 0.0
    q_tilde[q_tilde < COMPLEXITY_FLOOR] = 0.0
    q_new = q_tilde / q_tilde.mean()
    return f_new, q_new


def _max_rel_change(new, old):
    return float(np.max(np.abs(new - old) / np.maximum(np.abs(old), 1e-30)))


def sector_fitness(efc: EfcResult, m: SpecializationMatrix, subset: Iterable[str]) -> pd.Series:
    """Sum of global complexity over the subset products a country is specialised in.

    The complexities must come from a run over the full product universe; the
    subset only selects which scores are summed.
    """
    subset = sorted(set(subset))
    known = set(m.products)
    unknown = [p for p in subset if p not in known]
    if unknown:
        raise UnknownProductError(unknown)
    q = efc.complexity.reindex(subset).fillna(0.0)
    block = m.m[subset].astype(float)
    values = block.to_numpy() @ q.to_numpy()
    return pd.Series(values, index=m.m.index, name="sector_fitness")


@dataclass
class SectorFitnessSeries:
    values: pd.DataFrame  # countries x years
    subset: frozenset
    normalization: str = "raw"
    ranks: pd.DataFrame | None = None  # 1 = highest raw value


def fitness_ranking_series(
    results: list[EfcResult],
    matrices: Mapping[int, SpecializationMatrix],
    subset: Iterable[str],
    normalization: str = "by_max",
) -> SectorFitnessSeries:
    """Cross-year sector-fitness table, normalized per year by its maximum.

    Ranks break ties lexicographically by country code so reruns are stable.
    """
    if normalization not in ("raw", "by_max"):
        raise ValueError(f"unknown normalization {normalization!r}")
    if not results:
        raise ValueError("need at least one yearly result")
    subset = sorted(set(subset))
    columns = {}
    for efc in results:
        if efc.year is None:
            raise ValueError("yearly results must carry their year")
        columns[efc.year] = sector_fitness(efc, matrices[efc.year], subset)
    values = pd.DataFrame(columns).sort_index(axis=1)
    values = values.sort_index()
    values = values.fillna(0.0)  # a country absent from a year's trade holds no advantage

    ranks = pd.DataFrame(index=values.index, columns=values.columns, dtype=int)
    for year in values.columns:
        order = sorted(values.index, key=lambda c: (-values.at[c, year], c))
        for pos, c in enumerate(order, start=1):
            ranks.at[c, year] = pos

    if normalization == "by_max":
        peak = values.max(axis=0)
        safe = peak.replace(0.0, 1.0)
        values = values.divide(safe, axis=1)
    return SectorFitnessSeries(values=values, subset=frozenset(subset), normalization=normalization, ranks=ranks)
