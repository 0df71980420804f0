"""Balassa specialization: RCA ratios and the binary country x product matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd


class EmptyTradeError(ValueError):
    """Export matrix with no positive entry."""


@dataclass
class RcaMatrix:
    values: pd.DataFrame  # countries x products, non-negative ratios
    year: int | None = None

    @property
    def countries(self) -> list[str]:
        return list(self.values.index)

    @property
    def products(self) -> list[str]:
        return list(self.values.columns)


@dataclass
class SpecializationMatrix:
    m: pd.DataFrame  # binary countries x products
    threshold: float = 1.0
    year: int | None = None

    @property
    def countries(self) -> list[str]:
        return list(self.m.index)

    @property
    def products(self) -> list[str]:
        return list(self.m.columns)


def _as_frame(w) -> pd.DataFrame:
    if isinstance(w, pd.DataFrame):
        return w.astype(float)
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    return pd.DataFrame(arr)


def compute_rca(w, year: int | None = None) -> RcaMatrix:
    """Ratio of a country's share in a product's trade to its share of all trade.

    Rows or columns whose marginal total is zero get RCA 0 throughout, which
    keeps the downstream binarization total.
    """
    frame = _as_frame(w)
    values = frame.to_numpy()
    if (values < 0).any():
        raise ValueError("export matrix has negative entries")
    total = values.sum()
    if total <= 0:
        raise EmptyTradeError("export matrix is all zeros")
    col_tot = values.sum(axis=0)  # world trade per product
    row_tot = values.sum(axis=1)  # country totals
    product_share = np.divide(values, col_tot, out=np.zeros_like(values), where=col_tot > 0)
    country_share = row_tot / total
    rca = np.divide(
        product_share,
        country_share[:, None],
        out=np.zeros_like(product_share),
        where=country_share[:, None] > 0,
    )
    return RcaMatrix(values=pd.DataFrame(rca, index=frame.index, columns=frame.columns), year=year)


def binarize(rca: RcaMatrix, threshold: float = 1.0) -> SpecializationMatrix:
    """Elementwise indicator RCA >= threshold (inclusive boundary)."""
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    m = (rca.values >= threshold).astype(np.int8)
    return SpecializationMatrix(m=m, threshold=threshold, year=rca.year)


def diversification(m: SpecializationMatrix) -> pd.Series:
    """Number of products each country is specialised in (row sums)."""
    return m.m.sum(axis=1)


def ubiquity(m: SpecializationMatrix) -> pd.Series:
    """Number of countries specialised in each product (column sums)."""
    return m.m.sum(axis=0)


def write_matrix(frame: pd.DataFrame, path, header_lines: list[str] | None = None) -> None:
    """Write a labelled matrix as CSV (country rows, product columns)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_lines or []:
            fh.write(f"# {line}\n")
        frame.to_csv(fh, index_label="country")


def read_matrix(path) -> pd.DataFrame:
    """Read back a matrix written by write_matrix; values round-trip exactly."""
    frame = pd.read_csv(path, comment="#", index_col="country", float_precision="round_trip")
    frame.columns = [str(c) for c in frame.columns]
    frame.index = [str(c) for c in frame.index]
    return frame
