"""Independent reference implementations used as test oracles.

Everything here is written with plain Python loops, separately from the
package's vectorized code paths, so agreement between the two is meaningful.
"""

from __future__ import annotations

import numpy as np


def rca_by_hand(w):
    """Balassa ratio via explicit marginal sums."""
    w = [list(map(float, row)) for row in w]
    n_c, n_p = len(w), len(w[0])
    col = [sum(w[c][p] for c in range(n_c)) for p in range(n_p)]
    row = [sum(w[c][p] for p in range(n_p)) for c in range(n_c)]
    total = sum(row)
    out = [[0.0] * n_p for _ in range(n_c)]
    for c in range(n_c):
        for p in range(n_p):
            if col[p] > 0 and row[c] > 0:
                out[c][p] = (w[c][p] / col[p]) / (row[c] / total)
    return out


def fitness_complexity_by_hand(m, anchor="none", tol=1e-10, max_iter=1000):
    """Loop version of the fixed point; dummy anchor normalizes fitness by the
    all-ones reference row, which stays out of the complexity denominators."""
    rows = [list(map(float, r)) for r in m]
    n_real = len(rows)
    if anchor == "dummy_country":
        rows = rows + [[1.0] * len(rows[0])]
    n_c, n_p = len(rows), len(rows[0])
    keep_c = [c for c in range(n_c) if sum(rows[c]) > 0]
    keep_p = [p for p in range(n_p) if sum(rows[c][p] for c in range(n_real)) > 0]
    rows = [[rows[c][p] for p in keep_p] for c in keep_c]
    n_c, n_p = len(rows), len(rows[0])
    dummy = n_c - 1 if anchor == "dummy_country" else None

    f = [1.0] * n_c
    q = [1.0] * n_p
    iterations = 0
    converged = False
    for n in range(1, max_iter + 1):
        f_tilde = [sum(rows[c][p] * q[p] for p in range(n_p)) for c in range(n_c)]
        norm = f_tilde[dummy] if dummy is not None else sum(f_tilde) / n_c
        f_new = [x / norm for x in f_tilde]
        q_tilde = []
        for p in range(n_p):
            s = 0.0
            for c in range(n_c):
                if c == dummy:
                    continue
                if rows[c][p]:
                    s += rows[c][p] / f_new[c]
            q_tilde.append(1.0 / s)
        q_mean = sum(q_tilde) / n_p
        q_new = [x / q_mean for x in q_tilde]
        f_change = max(abs(a - b) / max(abs(b), 1e-30) for a, b in zip(f_new, f))
        q_change = max(abs(a - b) / max(abs(b), 1e-30) for a, b in zip(q_new, q))
        f, q = f_new, q_new
        iterations = n
        if f_change < tol and q_change < tol:
            converged = True
            break
    return np.array(f), np.array(q), iterations, converged


def spearman(x, y):
    """Rank correlation with average ranks for ties."""

    def ranks(v):
        v = np.asarray(v, dtype=float)
        order = np.argsort(v, kind="mergesort")
        r = np.empty(len(v))
        r[order] = np.arange(len(v), dtype=float)
        out = r.copy()
        for u in np.unique(v):
            mask = v == u
            out[mask] = r[mask].mean()
        return out

    rx, ry = ranks(x), ranks(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float((rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)))


def auc_rank_statistic(scores, labels):
    """Mann-Whitney AUC: P(score_pos > score_neg) with ties counted half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("AUC needs both classes")
    wins = 0.0
    for s in pos:
        wins += np.sum(s > neg) + 0.5 * np.sum(s == neg)
    return float(wins / (len(pos) * len(neg)))


def random_binary_matrices(n=25, max_side=10, seed=20240614):
    """The fixed random fixture family used for oracle-equivalence checks."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        n_c = int(rng.integers(3, max_side + 1))
        n_p = int(rng.integers(3, max_side + 1))
        m = (rng.random((n_c, n_p)) < 0.45).astype(int)
        m[rng.integers(0, n_c), :] = 1  # one fully diversified row keeps M connected
        out.append(m)
    return out


def nested_growth_dataset(n_countries=50, n_products=40, seed=99):
    """Synthetic adoption process where gaining a product is monotone in density.

    Countries hold nested baskets; the t1 matrix adds products drawn with
    probability increasing in co-occurrence density. Returns (rca0, m0, m1)
    as plain arrays plus the density matrix used by the generator.
    """
    rng = np.random.default_rng(seed)
    m0 = np.zeros((n_countries, n_products), dtype=int)
    widths = np.sort(rng.integers(3, n_products - 4, size=n_countries))[::-1]
    for c in range(n_countries):
        m0[c, : widths[c]] = 1
        for _ in range(2):  # light noise off the perfect triangle
            j = int(rng.integers(0, n_products))
            m0[c, j] = 1 - m0[c, j]
    m0[0, :] = 1  # keep every product exported by someone
    m0[:, 0] = 1

    co = m0.T @ m0
    ub = m0.sum(axis=0)
    denom = np.maximum(ub[:, None], ub[None, :])
    rel = np.divide(co, denom, out=np.zeros_like(co, dtype=float), where=denom > 0)
    dens = (m0 @ rel.T) / np.where(rel.sum(axis=1) > 0, rel.sum(axis=1), 1.0)[None, :]

    adopt_p = 0.05 + 0.9 * dens
    m1 = m0.copy()
    zeros = np.argwhere(m0 == 0)
    for c, p in zeros:
        if rng.random() < adopt_p[c, p]:
            m1[c, p] = 1

    # RCA consistent with m0: above one where specialised, below one otherwise
    rca0 = np.where(m0 == 1, 1.0 + 2.0 * rng.random(m0.shape), 0.99 * rng.random(m0.shape))
    return rca0, m0, m1, dens
