"""Correlated Gaussian PV generation and the analytic-vs-empirical study.

Samples come from numpy's PCG64 bit generator (seeded with the scenario
seed) through ``Generator.standard_normal``, which uses the ziggurat method.
Correlation is imposed with a lower-triangular factor of the target matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .analytic import GaussianPVSpec, analytic_matrix, check_thresholds, validate_correlation
from .empirical import similarity_matrix
from .matrix import SimilarityMatrix, matrix_distance, write_matrix_csv
from .sequences import combine_ca_binary, pad, threshold_pv
from .specfile import SpecDocument, format_spec_file, read_spec_file

ALARM_MEASURES = ("pearson-binary", "pearson-multivalued", "jaccard")
DEFAULT_N_SAMPLES = 1_000_000
PIVOT_TOLERANCE = 1e-10
REFERENCE_SCENARIO = "reference_scenario.txt"


@dataclass(frozen=True)
class ScenarioSpec:
    specs: tuple[GaussianPVSpec, ...]
    R: np.ndarray
    n_samples: int = DEFAULT_N_SAMPLES
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "R", validate_correlation(self.R, len(self.specs), atol=1e-9))
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        ids = [s.pv_id for s in self.specs]
        if len(set(ids)) != len(ids):
            raise ValueError("pv ids must be unique")

    @property
    def pv_ids(self) -> tuple[str, ...]:
        return tuple(s.pv_id for s in self.specs)

    @classmethod
    def from_document(cls, doc: SpecDocument) -> "ScenarioSpec":
        return cls(
            tuple(doc.specs),
            doc.R,
            doc.n_samples if doc.n_samples is not None else DEFAULT_N_SAMPLES,
            doc.seed if doc.seed is not None else 0,
        )


def load_scenario(path: str | Path) -> ScenarioSpec:
    return ScenarioSpec.from_document(read_spec_file(path))


def reference_scenario_path() -> Path:
    return Path(str(resources.files("alarmsim") / "data" / REFERENCE_SCENARIO))


def cholesky_factor(R: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == R`` for a PSD correlation matrix.

    Rank-deficient matrices are accepted: pivots within ``1e-10`` of zero are
    set to 0 and their column is left empty. A clearly negative pivot means
    ``R`` is indefinite and raises ``ValueError`` naming it.
    """
    R = validate_correlation(R, atol=1e-9)
    n = R.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        pivot = R[j, j] - L[j, :j] @ L[j, :j]
        if pivot < -PIVOT_TOLERANCE:
            raise ValueError(f"correlation matrix is not positive semidefinite (pivot {j} = {pivot:.3g})")
        resid = R[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]
        if pivot <= PIVOT_TOLERANCE:
            if np.any(np.abs(resid) > 1e-8):
                raise ValueError(f"correlation matrix is not positive semidefinite (pivot {j} = {pivot:.3g})")
            continue
        d = math.sqrt(pivot)
        L[j, j] = d
        L[j + 1 :, j] = resid / d
    return L


def generate_pvs(scenario: ScenarioSpec) -> np.ndarray:
    """``n_samples x n_pvs`` matrix of white, correlated Gaussian samples."""
    L = cholesky_factor(scenario.R)
    rng = np.random.Generator(np.random.PCG64(scenario.seed))
    z = rng.standard_normal((scenario.n_samples, len(scenario.specs)))
    mu = np.array([s.mu for s in scenario.specs])
    sigma = np.array([s.sigma for s in scenario.specs])
    return (z @ L.T) * sigma + mu


@dataclass(frozen=True)
class MeasureResult:
    measure: str
    empirical: SimilarityMatrix
    analytic: SimilarityMatrix
    empirical_vs_analytic: float
    empirical_vs_R: float
    analytic_vs_R: float

    @property
    def max_abs_difference(self) -> float:
        diff = np.abs(self.empirical.values - self.analytic.values)
        return float(np.nanmax(diff)) if np.any(~np.isnan(diff)) else math.nan


@dataclass(frozen=True)
class StudyReport:
    scenario: ScenarioSpec
    pv_analytic: SimilarityMatrix
    pv_empirical: SimilarityMatrix
    results: dict[str, MeasureResult] = field(default_factory=dict)
    padding: Optional[int] = None
    max_lag: Optional[int] = None

    def distances_to_R(self, kind: str = "empirical") -> dict[str, float]:
        attr = "empirical_vs_R" if kind == "empirical" else "analytic_vs_R"
        return {m: getattr(r, attr) for m, r in self.results.items()}

    def ranking(self, kind: str = "empirical") -> list[str]:
        """Measures ordered from closest to farthest from the PV correlation."""
        d = self.distances_to_R(kind)
        return sorted(d, key=lambda m: d[m])

    def summary(self) -> dict[str, str]:
        out = {
            "n_pvs": str(len(self.scenario.specs)),
            "n_samples": str(self.scenario.n_samples),
            "seed": str(self.scenario.seed),
            "padding": str(self.padding or 0),
            "max_lag": str(self.max_lag or 0),
            "pearson-pv.empirical_vs_analytic": repr(matrix_distance(self.pv_empirical, self.pv_analytic)),
        }
        for m, r in self.results.items():
            out[f"{m}.empirical_vs_analytic"] = repr(r.empirical_vs_analytic)
            out[f"{m}.max_abs_difference"] = repr(r.max_abs_difference)
            out[f"{m}.empirical_vs_R"] = repr(r.empirical_vs_R)
            out[f"{m}.analytic_vs_R"] = repr(r.analytic_vs_R)
        for kind in ("empirical", "analytic"):
            out[f"ranking.{kind}"] = " < ".join(self.ranking(kind))
        d = self.distances_to_R()
        if "pearson-multivalued" in d and "pearson-binary" in d:
            out["multivalued_closer_than_binary"] = str(d["pearson-multivalued"] < d["pearson-binary"]).lower()
        if "pearson-binary" in d and "jaccard" in d:
            out["binary_closer_than_jaccard"] = str(d["pearson-binary"] < d["jaccard"]).lower()
        return out

    def summary_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.summary().items())

    def matrices(self) -> dict[str, SimilarityMatrix]:
        """All matrices keyed by their output file stem."""
        out = {"pearson-pv.analytic": self.pv_analytic, "pearson-pv.empirical": self.pv_empirical}
        for m, r in self.results.items():
            out[f"{m}.empirical"] = r.empirical
            out[f"{m}.analytic"] = r.analytic
        return out

    def write(self, out_dir: str | Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for stem, m in self.matrices().items():
            path = out_dir / f"{stem}.csv"
            write_matrix_csv(m, path)
            written.append(path)
        path = out_dir / "summary.txt"
        path.write_text(self.summary_text(), encoding="utf-8")
        written.append(path)
        return written


def read_summary(path: str | Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, value = line.split(" = ", 1)
            out[key] = value
    return out


def alarm_sequences(samples: np.ndarray, specs: Sequence[GaussianPVSpec], padding: Optional[int] = None):
    """HI-exceedance binary and multivalued sequences for every PV column."""
    binary, multi = [], []
    for k, spec in enumerate(specs):
        mv, ia = threshold_pv(samples[:, k], spec)
        b = combine_ca_binary([ia["HI"], ia["HH"]], spec.pv_id)
        if padding:
            b = pad(b, padding)
        binary.append(b)
        multi.append(mv)
    return binary, multi


def run_study(
    scenario: ScenarioSpec,
    measures: Iterable[str] = ALARM_MEASURES,
    padding: Optional[int] = None,
    lag: Optional[int] = None,
) -> StudyReport:
    """Generate the scenario's PVs, threshold them and compare every measure's
    empirical matrix with its analytic prediction and with ``R``."""
    measures = list(dict.fromkeys(measures))
    for m in measures:
        if m not in ALARM_MEASURES:
            raise ValueError(f"unknown alarm measure {m!r}")
        check_thresholds(scenario.specs, m)

    ids = scenario.pv_ids
    samples = generate_pvs(scenario)
    pv_analytic = analytic_matrix(scenario.specs, scenario.R, "pearson-pv")
    pv_empirical = similarity_matrix(list(samples.T), "pearson-pv", tag_ids=ids)

    need_binary = any(m in ("pearson-binary", "jaccard") for m in measures)
    binary: list = []
    multi: list = []
    if need_binary or "pearson-multivalued" in measures:
        binary, multi = alarm_sequences(samples, scenario.specs, padding)
    del samples

    results = {}
    for m in measures:
        seqs = multi if m == "pearson-multivalued" else binary
        emp = similarity_matrix(seqs, m, max_lag=lag, tag_ids=ids)
        ana = analytic_matrix(scenario.specs, scenario.R, m)
        results[m] = MeasureResult(
            m,
            emp,
            ana,
            matrix_distance(emp, ana),
            matrix_distance(emp, pv_analytic),
            matrix_distance(ana, pv_analytic),
        )
    return StudyReport(scenario, pv_analytic, pv_empirical, results, padding, lag)


def nearest_correlation(A: np.ndarray, min_eig: float = 1e-3, max_iter: int = 500, tol: float = 1e-12) -> np.ndarray:
    """Nearest correlation matrix by alternating projections (Higham 2002),
    with eigenvalues floored at ``min_eig`` and the diagonal renormalized."""
    A = np.asarray(A, dtype=float)
    Y = A.copy()
    dS = np.zeros_like(A)
    for _ in range(max_iter):
        Rk = Y - dS
        w, V = np.linalg.eigh((Rk + Rk.T) / 2)
        X = (V * np.maximum(w, min_eig)) @ V.T
        dS = X - Rk
        Y_new = X.copy()
        np.fill_diagonal(Y_new, 1.0)
        done = np.linalg.norm(Y_new - Y, "fro") < tol * max(1.0, np.linalg.norm(Y, "fro"))
        Y = Y_new
        if done:
            break
    w, V = np.linalg.eigh((Y + Y.T) / 2)
    X = (V * np.maximum(w, min_eig)) @ V.T
    d = np.sqrt(np.diag(X))
    X = X / np.outer(d, d)
    np.fill_diagonal(X, 1.0)
    return (X + X.T) / 2


def build_reference_scenario(seed: int = 2021, n_pvs: int = 15, clusters: int = 3) -> ScenarioSpec:
    """The shipped 15-PV study scenario.

    PVs fall in ``clusters`` groups. Within a group pairwise correlations are
    drawn from {0.4, 0.6, 0.8}, across groups from {0, 0.2}; the matrix is
    then projected onto the correlation matrices and rounded to 4 decimals.
    Limits sit at 1 and 2 standard deviations either side of the mean.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    group = np.arange(n_pvs) * clusters // n_pvs
    A = np.eye(n_pvs)
    for i in range(n_pvs):
        for j in range(i + 1, n_pvs):
            pool = (0.4, 0.6, 0.8) if group[i] == group[j] else (0.0, 0.2)
            A[i, j] = A[j, i] = rng.choice(pool)
    R = np.round(nearest_correlation(A, min_eig=0.02), 4)
    cholesky_factor(R)
    specs = []
    for k in range(n_pvs):
        mu = float(np.round(rng.uniform(10.0, 100.0), 2))
        sigma = float(np.round(rng.uniform(0.5, 10.0), 2))
        specs.append(
            GaussianPVSpec(
                f"PV{k + 1:02d}",
                mu,
                sigma,
                ll=round(mu - 2 * sigma, 6),
                l=round(mu - sigma, 6),
                h=round(mu + sigma, 6),
                hh=round(mu + 2 * sigma, 6),
            )
        )
    return ScenarioSpec(tuple(specs), R, DEFAULT_N_SAMPLES, seed)


def reference_scenario_text() -> str:
    sc = build_reference_scenario()
    return format_spec_file(
        sc.specs,
        sc.R,
        sc.n_samples,
        sc.seed,
        header="Reference scenario: 15 correlated Gaussian PVs in three clusters.\n"
        "Regenerate with: python -m alarmsim.synthetic > src/alarmsim/data/reference_scenario.txt",
    )


if __name__ == "__main__":
    print(reference_scenario_text(), end="")
