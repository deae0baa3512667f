"""Alarm similarity: sequences from alarm logs, empirical and analytic
Pearson/Jaccard similarity, and a Monte-Carlo validation harness."""

__version__ = "0.1.0"

from .analytic import (
    GaussianPVSpec,
    analytic_jaccard,
    analytic_matrix,
    analytic_pearson_binary,
    analytic_pearson_multivalued,
)
from .empirical import jaccard, lag_scan, pearson, similarity_matrix
from .gaussian import bvn_rect, phi_interval
from .ingest import AlarmEvent, TagLog, TimeGrid, group_by_tag, infer_grid, parse_alarm_log
from .matrix import SimilarityMatrix, Undefined, matrix_distance
from .sequences import (
    BinarySequence,
    MultivaluedSequence,
    binarize_ia,
    build_multivalued,
    combine_ca_binary,
    pad,
    shift,
    threshold_pv,
)
from .synthetic import ScenarioSpec, cholesky_factor, generate_pvs, run_study
