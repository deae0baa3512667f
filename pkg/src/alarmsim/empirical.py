"""Empirical Pearson and Jaccard similarity between alarm sequences."""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from .ingest import TimeGrid
from .matrix import (
    NO_DEFINED_LAG,
    ZERO_DENOMINATOR,
    ZERO_VARIANCE,
    SimilarityMatrix,
    Undefined,
    matrix_distance,
)
from .sequences import BinarySequence, MultivaluedSequence, shift

__all__ = [
    "pearson",
    "jaccard",
    "contingency_pearson",
    "lag_scan",
    "similarity_matrix",
    "matrix_distance",
    "SimilarityMatrix",
]


def _values(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x))


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    a, b = _values(x), _values(y)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return a, b


def pearson(x, y) -> float:
    """Sample Pearson correlation; :class:`Undefined` if either is constant."""
    a, b = _pair(x, y)
    if len(a) < 2:
        raise ValueError("pearson needs at least two samples")
    a = a.astype(float)
    b = b.astype(float)
    if a.min() == a.max() or b.min() == b.max():
        return Undefined(ZERO_VARIANCE)
    da = a - a.mean()
    db = b - b.mean()
    r = float(np.dot(da, db) / math.sqrt(np.dot(da, da) * np.dot(db, db)))
    return min(1.0, max(-1.0, r))


def contingency_pearson(x, y) -> float:
    """Pearson correlation of two 0/1 series from their 2x2 table.

    ``(p11 - p1 q1) / sqrt(p1 (1 - p1) q1 (1 - q1))`` with ``p1``/``q1`` the
    fractions of ones and ``p11`` the fraction of common ones.
    """
    a, b = _pair(x, y)
    n = len(a)
    n1 = int(np.count_nonzero(a))
    m1 = int(np.count_nonzero(b))
    n11 = int(np.count_nonzero(a & b))
    p1, q1, p11 = n1 / n, m1 / n, n11 / n
    denom = p1 * (1 - p1) * q1 * (1 - q1)
    if denom == 0:
        return Undefined(ZERO_VARIANCE)
    return (p11 - p1 * q1) / math.sqrt(denom)


def jaccard(x, y) -> float:
    """Matching ones over positions where either series is one."""
    a, b = _pair(x, y)
    a = a.astype(bool)
    b = b.astype(bool)
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return Undefined(ZERO_DENOMINATOR)
    return int(np.count_nonzero(a & b)) / union


MEASURE_FUNCS: dict[str, Callable] = {
    "pearson": pearson,
    "pearson-binary": pearson,
    "pearson-multivalued": pearson,
    "pearson-pv": pearson,
    "jaccard": jaccard,
}


def _as_sequence(x):
    if isinstance(x, (BinarySequence, MultivaluedSequence)):
        return x
    values = np.asarray(x)
    grid = TimeGrid(0, 1000, len(values))
    if np.all((values == 0) | (values == 1)):
        return BinarySequence("", grid, values)
    return MultivaluedSequence("", grid, values)


def lag_scan(x, y, max_lag: int, measure: str = "pearson") -> tuple[int, float]:
    """Best lag ``k`` in ``[-max_lag, max_lag]`` for ``measure(x, shift(y, k))``.

    Ties go to the smallest ``|k|``, then to the negative lag. If the measure
    is undefined at every lag the result is ``(0, Undefined)``.
    """
    fn = MEASURE_FUNCS[measure]
    ys = _as_sequence(y)
    if not 0 <= max_lag < len(ys):
        raise ValueError(f"max_lag must lie in [0, {len(ys) - 1}]")
    best_lag, best = 0, None
    for k in sorted(range(-max_lag, max_lag + 1), key=lambda k: (abs(k), k > 0)):
        v = fn(x, shift(ys, k))
        if math.isnan(v):
            continue
        if best is None or v > best:
            best_lag, best = k, v
    if best is None:
        return 0, Undefined(NO_DEFINED_LAG)
    return best_lag, best


def _kind_of(seqs: Sequence) -> str:
    if all(isinstance(s, BinarySequence) for s in seqs):
        return "binary"
    if all(isinstance(s, MultivaluedSequence) for s in seqs):
        return "multivalued"
    return "numeric"


def _check_compatible(seqs: Sequence, measure: str) -> None:
    kind = _kind_of(seqs)
    if measure in ("jaccard", "pearson-binary"):
        if kind == "numeric" and all(np.isin(_values(s), (0, 1)).all() for s in seqs):
            return
        if kind != "binary":
            raise ValueError(f"{measure} requires binary sequences")
    elif measure == "pearson-multivalued" and kind == "binary":
        raise ValueError("pearson-multivalued requires multivalued sequences")


def _gram_pearson(data: np.ndarray) -> np.ndarray:
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered
    norms = np.sqrt(np.diag(cov))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = cov / np.outer(norms, norms)
    constant = data.min(axis=0) == data.max(axis=0)
    r[constant, :] = np.nan
    r[:, constant] = np.nan
    np.fill_diagonal(r, np.where(constant, np.nan, 1.0))
    return np.clip(r, -1.0, 1.0)


def _gram_jaccard(data: np.ndarray) -> np.ndarray:
    ones = data.astype(np.float64)
    both = ones.T @ ones
    counts = np.diag(both)
    union = counts[:, None] + counts[None, :] - both
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(union > 0, both / union, np.nan)


def similarity_matrix(
    seqs: Sequence,
    measure: str,
    max_lag: Optional[int] = None,
    tag_ids: Optional[Sequence[str]] = None,
) -> SimilarityMatrix:
    """Pairwise similarity of sequences that share one grid.

    Without ``max_lag`` the matrix is computed in one pass from the Gram
    matrix of the stacked sequences. With ``max_lag`` every pair ``i < j`` is
    scanned and ``lag_matrix[i, j]`` is the lag applied to sequence ``j``.
    """
    if measure not in ("pearson-binary", "pearson-multivalued", "jaccard", "pearson-pv"):
        raise ValueError(f"unknown measure {measure!r}")
    if not seqs:
        raise ValueError("no sequences")
    _check_compatible(seqs, measure)
    if tag_ids is None:
        tag_ids = [getattr(s, "tag_id", str(i)) for i, s in enumerate(seqs)]
    arrays = [_values(s) for s in seqs]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValueError("sequences have different lengths")
    grids = {getattr(s, "grid", None) for s in seqs}
    if len(grids) > 1:
        raise ValueError("sequences are on different grids")
    n = len(seqs)
    data = np.column_stack(arrays)
    reason = ZERO_DENOMINATOR if measure == "jaccard" else ZERO_VARIANCE

    if not max_lag:
        values = _gram_jaccard(data) if measure == "jaccard" else _gram_pearson(data.astype(float))
        lags = None if max_lag is None else np.zeros((n, n), dtype=int)
        return SimilarityMatrix.from_array(tag_ids, values, measure, lags, reason)

    fn = MEASURE_FUNCS[measure]
    values = np.full((n, n), np.nan)
    lags = np.zeros((n, n), dtype=int)
    undefined: dict[tuple[int, int], str] = {}
    for i in range(n):
        d = fn(seqs[i], seqs[i])
        values[i, i] = d
        if math.isnan(d):
            undefined[(i, i)] = d.reason
        for j in range(i + 1, n):
            k, v = lag_scan(seqs[i], seqs[j], max_lag, measure)
            values[i, j] = values[j, i] = v
            lags[i, j], lags[j, i] = k, -k
            if math.isnan(v):
                undefined[(i, j)] = undefined[(j, i)] = v.reason
    return SimilarityMatrix(tuple(tag_ids), values, measure, lags, undefined)
