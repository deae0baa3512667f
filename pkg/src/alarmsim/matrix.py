"""Similarity matrices, undefined values and matrix comparison."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

MEASURES = ("pearson-binary", "pearson-multivalued", "jaccard", "pearson-pv")

# reason codes carried by undefined results
ZERO_VARIANCE = "zero-variance"
DEGENERATE_THRESHOLD = "degenerate-threshold"
ZERO_DENOMINATOR = "zero-denominator"
NO_DEFINED_LAG = "no-defined-lag"


class Undefined(float):
    """A NaN that remembers why a similarity could not be computed.

    Behaves as ``float('nan')`` in arithmetic and ``math.isnan`` checks, so
    it can be stored directly in numpy arrays (the reason is dropped there).
    """

    reason: str

    def __new__(cls, reason: str) -> "Undefined":
        obj = super().__new__(cls, "nan")
        obj.reason = reason
        return obj

    def __repr__(self) -> str:
        return f"Undefined({self.reason!r})"

    def __reduce__(self):
        return (Undefined, (self.reason,))


def is_undefined(value: float) -> bool:
    return isinstance(value, float) and math.isnan(value)


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric pairwise similarity values over an ordered set of tags.

    Undefined cells hold NaN in ``values`` and their reason code in
    ``undefined`` keyed by ``(i, j)``.
    """

    tag_ids: tuple[str, ...]
    values: np.ndarray
    measure: str
    lag_matrix: Optional[np.ndarray] = None
    undefined: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.tag_ids)
        if self.values.shape != (n, n):
            raise ValueError(f"values shape {self.values.shape} does not match {n} tags")
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        if self.lag_matrix is not None and self.lag_matrix.shape != (n, n):
            raise ValueError("lag_matrix shape does not match values")

    @property
    def size(self) -> int:
        return len(self.tag_ids)

    def __getitem__(self, key: tuple[int, int]) -> float:
        i, j = key
        if (i, j) in self.undefined:
            return Undefined(self.undefined[(i, j)])
        return float(self.values[i, j])

    def pairs(self) -> list[tuple[str, str, float]]:
        """Defined upper-triangle entries as ``(tag_i, tag_j, value)``."""
        out = []
        for i in range(self.size):
            for j in range(i + 1, self.size):
                v = self.values[i, j]
                if not math.isnan(v):
                    out.append((self.tag_ids[i], self.tag_ids[j], float(v)))
        return out

    def top_pairs(self, k: int = 20) -> list[tuple[str, str, float]]:
        # stable sort keeps matrix order among equal values
        return sorted(self.pairs(), key=lambda p: -p[2])[:k]

    @classmethod
    def from_array(
        cls,
        tag_ids: Sequence[str],
        values: np.ndarray,
        measure: str,
        lag_matrix: Optional[np.ndarray] = None,
        reason: str = ZERO_VARIANCE,
    ) -> "SimilarityMatrix":
        values = np.asarray(values, dtype=float)
        undefined = {
            (int(i), int(j)): reason for i, j in zip(*np.nonzero(np.isnan(values)))
        }
        return cls(tuple(tag_ids), values, measure, lag_matrix, undefined)


def matrix_distance(a: SimilarityMatrix, b: SimilarityMatrix) -> float:
    """Root-mean-square difference over off-diagonal cells defined in both."""
    if a.tag_ids != b.tag_ids:
        raise ValueError("matrices have different tag ordering or size")
    n = a.size
    off = ~np.eye(n, dtype=bool)
    diff = a.values - b.values
    mask = off & ~np.isnan(diff)
    count = int(mask.sum())
    if count == 0:
        raise ValueError("no comparable entries")
    return float(np.sqrt(np.sum(diff[mask] ** 2) / count))


def format_value(v: float) -> str:
    # repr is the shortest string that round-trips exactly
    return "" if math.isnan(v) else repr(float(v))


def matrix_to_csv(m: SimilarityMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([m.measure, *m.tag_ids])
    for tag, row in zip(m.tag_ids, m.values):
        w.writerow([tag, *(format_value(v) for v in row)])
    return buf.getvalue()


def write_matrix_csv(m: SimilarityMatrix, path: str | Path) -> None:
    Path(path).write_text(matrix_to_csv(m), encoding="utf-8")


def read_matrix_csv(path: str | Path) -> SimilarityMatrix:
    """Read a matrix written by :func:`write_matrix_csv`.

    The top-left header cell names the measure; empty cells are undefined.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    measure, *tags = rows[0]
    if len(rows) - 1 != len(tags):
        raise ValueError(f"{path}: expected {len(tags)} rows, found {len(rows) - 1}")
    values = np.full((len(tags), len(tags)), np.nan)
    for i, row in enumerate(rows[1:]):
        if row[0] != tags[i] or len(row) != len(tags) + 1:
            raise ValueError(f"{path}:{i + 2}: row does not match header")
        for j, cell in enumerate(row[1:]):
            if cell != "":
                values[i, j] = float(cell)
    return SimilarityMatrix.from_array(tags, values, measure)
