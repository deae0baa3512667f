"""Binary and multivalued alarm sequences on a time grid.

Sequences are immutable wrappers around small-integer numpy arrays. The
multivalued code of a collective tag is 2/1/0/-1/-2 for HH/HI/none/LO/LL.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .analytic import GaussianPVSpec
from .ingest import KINDS, Mode, TagLog, TimeGrid

# padding at 1 s resolution, from the ISA-18.2 delay-timer guidance
DEFAULT_PAD_SECONDS = {"temperature": 60, "level": 60, "flow": 15, "pressure": 15}

CODE_OF_KIND = {"HH": 2, "HI": 1, "LO": -1, "LL": -2}


class PrecedenceWarning(UserWarning):
    """More than one individual alarm of a tag was active in one sample."""


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=np.int8)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class BinarySequence:
    tag_id: str
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = _frozen(self.values)
        if v.ndim != 1 or len(v) != self.grid.length:
            raise ValueError(f"{self.tag_id}: expected {self.grid.length} values, got {v.shape}")
        if np.any((v != 0) & (v != 1)):
            raise ValueError(f"{self.tag_id}: binary sequence values must be 0 or 1")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)

    def __str__(self) -> str:
        return "".join(map(str, self.values.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinarySequence):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_string(cls, bits: str, tag_id: str = "", grid: Optional[TimeGrid] = None) -> "BinarySequence":
        values = [int(c) for c in bits]
        return cls(tag_id, grid or TimeGrid(0, 1000, len(values)), values)


@dataclass(frozen=True, eq=False)
class MultivaluedSequence:
    tag_id: str
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = _frozen(self.values)
        if v.ndim != 1 or len(v) != self.grid.length:
            raise ValueError(f"{self.tag_id}: expected {self.grid.length} values, got {v.shape}")
        if np.any(np.abs(v) > 2):
            raise ValueError(f"{self.tag_id}: multivalued codes must lie in -2..2")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultivaluedSequence):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


AlarmSequence = Union[BinarySequence, MultivaluedSequence]


def binarize_ia(log: TagLog, kind: str, grid: TimeGrid) -> BinarySequence:
    """Binary sequence of one individual alarm (``kind``) of a tag.

    Point-based logs mark only the samples holding an ALM. Interval-based
    logs mark ``[ALM, RTN)``; an ALM whose RTN falls in the same sample
    still marks that sample, and an ALM never returned stays active to the
    end of the grid.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown alarm kind {kind!r}")
    values = np.zeros(grid.length, dtype=np.int8)
    events = [e for e in log.events if e.kind == kind]
    if log.mode is Mode.POINT:
        for e in events:
            if e.event_type == "ALM":
                values[grid.index_of(e.timestamp_ms)] = 1
    else:
        start = None
        for e in events:
            idx = grid.index_of(e.timestamp_ms)
            if e.event_type == "ALM":
                if start is None:
                    start = idx
            elif start is not None:
                values[start:max(idx, start + 1)] = 1
                start = None
        if start is not None:
            values[start:] = 1
    return BinarySequence(f"{log.tag_id}.{kind}", grid, values)


def _same_grid(seqs: Sequence[AlarmSequence]) -> TimeGrid:
    if not seqs:
        raise ValueError("need at least one sequence")
    grid = seqs[0].grid
    for s in seqs[1:]:
        if s.grid != grid:
            raise ValueError(f"sequence {s.tag_id!r} is on a different grid")
    return grid


def combine_ca_binary(ia_seqs: Sequence[BinarySequence], tag_id: Optional[str] = None) -> BinarySequence:
    """Collective-tag sequence: 1 wherever any individual alarm is active."""
    if len(ia_seqs) > 4:
        raise ValueError("a collective tag has at most four individual alarms")
    grid = _same_grid(ia_seqs)
    values = np.zeros(grid.length, dtype=np.int8)
    for s in ia_seqs:
        values |= s.values
    if tag_id is None:
        tag_id = ia_seqs[0].tag_id.split(".")[0]
    return BinarySequence(tag_id, grid, values)


def pad(seq: BinarySequence, r: int) -> BinarySequence:
    """Dilate every 1 by ``r`` samples on both sides (clamped to the grid)."""
    if r < 0:
        raise ValueError("padding must be non-negative")
    if r == 0:
        return seq
    n = len(seq)
    r = min(r, n)
    # ones in window [l-r, l+r] via prefix sums
    csum = np.concatenate(([0], np.cumsum(seq.values, dtype=np.int64)))
    idx = np.arange(n)
    hi = np.minimum(idx + r + 1, n)
    lo = np.maximum(idx - r, 0)
    return BinarySequence(seq.tag_id, seq.grid, (csum[hi] - csum[lo]) > 0)


def padding_for(tag_class: str, resolution: float = 1.0) -> int:
    """Default padding in samples for a tag class such as ``"flow"``."""
    try:
        seconds = DEFAULT_PAD_SECONDS[tag_class]
    except KeyError:
        raise ValueError(f"unknown tag class {tag_class!r}") from None
    return max(0, round(seconds / resolution))


def build_multivalued(
    hh: BinarySequence,
    hi: BinarySequence,
    lo: BinarySequence,
    ll: BinarySequence,
    tag_id: Optional[str] = None,
) -> MultivaluedSequence:
    """Merge the four individual alarms of a tag into one code sequence.

    Simultaneous actives are resolved HH over HI, LL over LO and the high
    side over the low side; a :class:`PrecedenceWarning` reports them.
    """
    grid = _same_grid([hh, hi, lo, ll])
    stacked = np.stack([hh.values, hi.values, lo.values, ll.values])
    clashes = int(np.count_nonzero(stacked.sum(axis=0) > 1))
    if clashes:
        warnings.warn(
            f"{tag_id or hh.tag_id}: {clashes} samples with more than one active alarm",
            PrecedenceWarning,
            stacklevel=2,
        )
    codes = np.zeros(grid.length, dtype=np.int8)
    # lowest priority first so later assignments win
    codes[lo.values == 1] = -1
    codes[ll.values == 1] = -2
    codes[hi.values == 1] = 1
    codes[hh.values == 1] = 2
    if tag_id is None:
        tag_id = hh.tag_id.split(".")[0]
    return MultivaluedSequence(tag_id, grid, codes)


def threshold_pv(
    samples: np.ndarray,
    spec: GaussianPVSpec,
    grid: Optional[TimeGrid] = None,
) -> tuple[MultivaluedSequence, dict[str, BinarySequence]]:
    """Alarm sequences of a sampled PV against its limits.

    Codes: 2 if ``x > hh``; 1 if ``h < x <= hh``; -1 if ``ll <= x < l``;
    -2 if ``x < ll``; else 0. Missing limits never fire. The four returned
    binary sequences (keyed HH/HI/LO/LL) are disjoint, so the code equals
    ``2*HH + HI - LO - 2*LL`` sample by sample.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    if grid is None:
        grid = TimeGrid(0, 1000, len(x))
    elif grid.length != len(x):
        raise ValueError(f"{len(x)} samples do not fit a grid of {grid.length}")
    inf = np.inf
    hh = spec.hh if spec.hh is not None else inf
    h = spec.h if spec.h is not None else inf
    l = spec.l if spec.l is not None else -inf  # noqa: E741
    ll = spec.ll if spec.ll is not None else -inf
    b_hh = x > hh
    b_hi = (x > h) & ~b_hh
    b_ll = x < ll
    b_lo = (x < l) & ~b_ll
    tid = spec.pv_id
    binaries = {
        "HH": BinarySequence(f"{tid}.HH", grid, b_hh),
        "HI": BinarySequence(f"{tid}.HI", grid, b_hi),
        "LO": BinarySequence(f"{tid}.LO", grid, b_lo),
        "LL": BinarySequence(f"{tid}.LL", grid, b_ll),
    }
    codes = 2 * b_hh.astype(np.int8) + b_hi - b_lo - 2 * b_ll.astype(np.int8)
    return MultivaluedSequence(tid, grid, codes), binaries


def shift(seq: AlarmSequence, lag: int) -> AlarmSequence:
    """Move values ``lag`` samples later (earlier if negative), zero-filling."""
    n = len(seq)
    if abs(lag) >= n:
        raise ValueError(f"|lag| = {abs(lag)} must be smaller than the sequence length {n}")
    if lag == 0:
        return seq
    out = np.zeros(n, dtype=np.int8)
    if lag > 0:
        out[lag:] = seq.values[:-lag]
    else:
        out[:lag] = seq.values[-lag:]
    return type(seq)(seq.tag_id, seq.grid, out)


def tag_sequences(
    logs: Mapping[str, TagLog], grid: TimeGrid
) -> tuple[dict[str, dict[str, BinarySequence]], dict[str, BinarySequence], dict[str, MultivaluedSequence]]:
    """Individual, collective-binary and multivalued sequences for every tag."""
    ia: dict[str, dict[str, BinarySequence]] = {}
    ca: dict[str, BinarySequence] = {}
    mv: dict[str, MultivaluedSequence] = {}
    for tag, log in logs.items():
        per_kind = {k: binarize_ia(log, k, grid) for k in KINDS}
        ia[tag] = per_kind
        ca[tag] = combine_ca_binary(list(per_kind.values()), tag)
        mv[tag] = build_multivalued(per_kind["HH"], per_kind["HI"], per_kind["LO"], per_kind["LL"], tag)
    return ia, ca, mv


def sequence_to_csv(seq: AlarmSequence) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "time", "value"])
    for i, v in enumerate(seq.values.tolist()):
        w.writerow([i, repr(seq.grid.time_of(i)), v])
    return buf.getvalue()


def write_sequence_csv(seq: AlarmSequence, path: str | Path) -> None:
    Path(path).write_text(sequence_to_csv(seq), encoding="utf-8")


def read_sequence_csv(path: str | Path, tag_id: str = "") -> AlarmSequence:
    """Read a sequence written by :func:`write_sequence_csv`.

    The grid is rebuilt from the first two time stamps; sequences with any
    value outside {0, 1} come back as multivalued.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no samples")
    times = [float(r["time"]) for r in rows]
    values = [int(r["value"]) for r in rows]
    res = times[1] - times[0] if len(times) > 1 else 1.0
    grid = TimeGrid.from_seconds(times[0], res, len(rows))
    cls = BinarySequence if set(values) <= {0, 1} else MultivaluedSequence
    return cls(tag_id, grid, values)
