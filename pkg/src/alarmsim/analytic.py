"""Closed-form similarity of alarms raised on correlated Gaussian PVs.

Each PV ``X ~ N(mu, sigma)`` is standardized, so every probability below is
a standard normal interval probability or a standard bivariate normal
rectangle probability. Correlations of exactly +1 or -1 collapse the joint
distribution onto a line and are evaluated with univariate intervals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gaussian import bvn_rect, phi_interval
from .matrix import (
    DEGENERATE_THRESHOLD,
    ZERO_DENOMINATOR,
    ZERO_VARIANCE,
    SimilarityMatrix,
    Undefined,
)

INF = math.inf
THRESHOLD_NAMES = ("ll", "l", "h", "hh")
CLAMP_TOLERANCE = 1e-7

# thresholds each measure needs on every PV
REQUIRED_THRESHOLDS = {
    "pearson-binary": ("h",),
    "jaccard": ("h",),
    "pearson-multivalued": THRESHOLD_NAMES,
    "pearson-pv": (),
}


class ClampWarning(UserWarning):
    """A result landed outside its mathematical range by more than rounding."""


@dataclass(frozen=True)
class GaussianPVSpec:
    """A Gaussian process variable and its (optional) alarm limits."""

    pv_id: str
    mu: float
    sigma: float
    ll: Optional[float] = None
    l: Optional[float] = None  # noqa: E741
    h: Optional[float] = None
    hh: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise ValueError(f"{self.pv_id}: sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise ValueError(f"{self.pv_id}: mu must be finite")
        present = [(n, getattr(self, n)) for n in THRESHOLD_NAMES if getattr(self, n) is not None]
        for (n1, v1), (n2, v2) in zip(present, present[1:]):
            if not v1 < v2:
                raise ValueError(f"{self.pv_id}: thresholds must satisfy {n1} < {n2} ({v1} >= {v2})")

    @property
    def thresholds(self) -> dict[str, float]:
        return {n: getattr(self, n) for n in THRESHOLD_NAMES if getattr(self, n) is not None}

    def standardize(self, value: float) -> float:
        return (value - self.mu) / self.sigma

    def z(self, name: str) -> float:
        """Standardized threshold ``name``; ``KeyError`` if absent."""
        value = getattr(self, name)
        if value is None:
            raise KeyError(f"{self.pv_id}: threshold {name!r} not set")
        return self.standardize(value)

    def code_grid(self) -> tuple[float, ...]:
        """Standardized bounds of the five code intervals, codes -2..2."""
        return (-INF, self.z("ll"), self.z("l"), self.z("h"), self.z("hh"), INF)

    def missing(self, names: Sequence[str]) -> list[str]:
        return [n for n in names if getattr(self, n) is None]


def _clamp(value: float, lo: float, hi: float) -> float:
    if value < lo - CLAMP_TOLERANCE or value > hi + CLAMP_TOLERANCE:
        warnings.warn(f"result {value!r} clamped to [{lo}, {hi}]", ClampWarning, stacklevel=3)
    return min(hi, max(lo, value))


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if math.isnan(rho) or abs(rho) > 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    return rho


def joint_rect(x_a: float, x_b: float, y_a: float, y_b: float, rho: float) -> float:
    """Rectangle probability for standard normals with correlation ``rho``,
    including the degenerate cases ``rho = +-1``.

    With ``rho = 1`` both variates coincide, so the rectangle reduces to the
    overlap of the two intervals; with ``rho = -1`` the second variate is the
    negation of the first.
    """
    rho = _check_rho(rho)
    if rho == 1.0:
        return phi_interval(max(x_a, y_a), min(x_b, y_b))
    if rho == -1.0:
        return phi_interval(max(x_a, -y_b), min(x_b, -y_a))
    return bvn_rect(x_a, x_b, y_a, y_b, rho)


def _bernoulli(spec: GaussianPVSpec) -> tuple[float, float]:
    p = phi_interval(spec.z("h"), INF)
    return p, p * (1.0 - p)


def analytic_pearson_binary(spec_i: GaussianPVSpec, spec_j: GaussianPVSpec, rho: float) -> float:
    """Pearson correlation of the HI-alarm binary sequences of two PVs."""
    rho = _check_rho(rho)
    a, b = spec_i.z("h"), spec_j.z("h")
    p_i, var_i = _bernoulli(spec_i)
    p_j, var_j = _bernoulli(spec_j)
    if var_i == 0.0 or var_j == 0.0:
        return Undefined(DEGENERATE_THRESHOLD)
    both = joint_rect(a, INF, b, INF, rho)
    return _clamp((both - p_i * p_j) / math.sqrt(var_i * var_j), -1.0, 1.0)


def _code_moments(spec: GaussianPVSpec) -> tuple[float, float]:
    s = spec.code_grid()
    probs = [phi_interval(s[k], s[k + 1]) for k in range(5)]
    mean = sum(r * p for r, p in zip(range(-2, 3), probs))
    second = sum(r * r * p for r, p in zip(range(-2, 3), probs))
    return mean, second - mean * mean


def multivalued_moments(spec: GaussianPVSpec) -> tuple[float, float]:
    """Mean and variance of the multivalued code sequence of one PV."""
    return _code_moments(spec)


def analytic_pearson_multivalued(spec_i: GaussianPVSpec, spec_j: GaussianPVSpec, rho: float) -> float:
    """Pearson correlation of the multivalued (-2..2) sequences of two PVs."""
    rho = _check_rho(rho)
    si, sj = spec_i.code_grid(), spec_j.code_grid()
    mu_i, var_i = _code_moments(spec_i)
    mu_j, var_j = _code_moments(spec_j)
    if var_i <= 0.0 or var_j <= 0.0:
        return Undefined(ZERO_VARIANCE)
    cross = 0.0
    for r in (-2, -1, 1, 2):
        for t in (-2, -1, 1, 2):
            cross += r * t * joint_rect(si[r + 2], si[r + 3], sj[t + 2], sj[t + 3], rho)
    return _clamp((cross - mu_i * mu_j) / math.sqrt(var_i * var_j), -1.0, 1.0)


def analytic_jaccard(spec_i: GaussianPVSpec, spec_j: GaussianPVSpec, rho: float) -> float:
    """Expected Jaccard index of the HI-alarm binary sequences of two PVs."""
    rho = _check_rho(rho)
    a, b = spec_i.z("h"), spec_j.z("h")
    both = joint_rect(a, INF, b, INF, rho)
    neither = joint_rect(-INF, a, -INF, b, rho)
    union = 1.0 - neither
    if union <= 0.0:
        return Undefined(ZERO_DENOMINATOR)
    return _clamp(both / union, 0.0, 1.0)


_ANALYTIC = {
    "pearson-binary": analytic_pearson_binary,
    "pearson-multivalued": analytic_pearson_multivalued,
    "jaccard": analytic_jaccard,
}


def validate_correlation(R: np.ndarray, n: Optional[int] = None, atol: float = 1e-12) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("correlation matrix must be square")
    if n is not None and R.shape[0] != n:
        raise ValueError(f"correlation matrix is {R.shape[0]}x{R.shape[0]}, expected {n}x{n}")
    if not np.all(np.isfinite(R)):
        raise ValueError("correlation matrix has non-finite entries")
    if not np.allclose(R, R.T, rtol=0.0, atol=atol):
        raise ValueError("correlation matrix is not symmetric")
    if not np.allclose(np.diag(R), 1.0, rtol=0.0, atol=atol):
        raise ValueError("correlation matrix must have a unit diagonal")
    if np.any(np.abs(R) > 1.0 + atol):
        raise ValueError("correlation entries must lie in [-1, 1]")
    return R


def check_thresholds(specs: Sequence[GaussianPVSpec], measure: str) -> None:
    for spec in specs:
        missing = spec.missing(REQUIRED_THRESHOLDS[measure])
        if missing:
            raise ValueError(f"{spec.pv_id}: {measure} requires threshold(s) {', '.join(missing)}")


def analytic_matrix(specs: Sequence[GaussianPVSpec], R: np.ndarray, measure: str) -> SimilarityMatrix:
    """Analytic similarity for every PV pair; the diagonal uses ``rho = 1``."""
    n = len(specs)
    R = validate_correlation(R, n)
    ids = [s.pv_id for s in specs]
    if measure == "pearson-pv":
        return SimilarityMatrix.from_array(ids, R.copy(), measure)
    if measure not in _ANALYTIC:
        raise ValueError(f"unknown measure {measure!r}")
    check_thresholds(specs, measure)
    fn = _ANALYTIC[measure]
    values = np.empty((n, n))
    undefined: dict[tuple[int, int], str] = {}
    for i in range(n):
        for j in range(i, n):
            rho = 1.0 if i == j else min(1.0, max(-1.0, R[i, j]))
            v = fn(specs[i], specs[j], rho)
            values[i, j] = values[j, i] = v
            if isinstance(v, Undefined):
                undefined[(i, j)] = undefined[(j, i)] = v.reason
    return SimilarityMatrix(tuple(ids), values, measure, None, undefined)
