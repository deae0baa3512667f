"""Reader and writer for PV spec files.

Grammar (one statement per line, ``#`` starts a comment)::

    n_samples = 1000000          # optional, scenarios only
    seed = 42                    # optional, scenarios only

    [pv FI101]                   # one section per PV, in matrix order
    mu = 50.0
    sigma = 4.0
    ll = 42.0                    # any subset of ll, l, h, hh
    l = 46.0
    h = 54.0
    hh = 58.0

    [correlation]                # optional; identity when absent
    FI101  1.0  0.6              # row form: PV id followed by a full row
    TI102  0.6  1.0
    # or pair form, unspecified pairs are 0:
    # FI101 TI102 0.6

Every error carries the file name and line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analytic import REQUIRED_THRESHOLDS, THRESHOLD_NAMES, GaussianPVSpec, validate_correlation

PV_KEYS = ("mu", "sigma", *THRESHOLD_NAMES)
TOP_KEYS = ("n_samples", "seed")


class SpecFileError(ValueError):
    def __init__(self, source: str, line: Optional[int], message: str):
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass
class SpecDocument:
    specs: list[GaussianPVSpec]
    R: np.ndarray
    n_samples: Optional[int] = None
    seed: Optional[int] = None
    source: str = "<spec>"
    pv_lines: dict[str, int] = field(default_factory=dict)
    correlation_line: Optional[int] = None

    def require(self, measure: str) -> None:
        """Raise a line-anchored error if a PV lacks a threshold ``measure`` needs."""
        if measure not in REQUIRED_THRESHOLDS:
            raise SpecFileError(self.source, None, f"unknown measure {measure!r}")
        for spec in self.specs:
            missing = spec.missing(REQUIRED_THRESHOLDS[measure])
            if missing:
                raise SpecFileError(
                    self.source,
                    self.pv_lines.get(spec.pv_id),
                    f"pv {spec.pv_id!r} lacks threshold(s) {', '.join(missing)} required by {measure}",
                )


def _number(source: str, line: int, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SpecFileError(source, line, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise SpecFileError(source, line, f"value must be finite: {text!r}")
    return value


def _integer(source: str, line: int, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        value = _number(source, line, text)
        if value != int(value):
            raise SpecFileError(source, line, f"not an integer: {text!r}") from None
        return int(value)


def parse_spec_text(text: str, source: str = "<spec>") -> SpecDocument:
    top: dict[str, int] = {}
    pvs: list[tuple[str, int, dict[str, float]]] = []
    corr_rows: list[tuple[int, list[str]]] = []
    section = None
    corr_line = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise SpecFileError(source, lineno, "unterminated section header")
            head = line[1:-1].split()
            if len(head) == 2 and head[0] == "pv":
                pv_id = head[1]
                if any(p[0] == pv_id for p in pvs):
                    raise SpecFileError(source, lineno, f"duplicate pv {pv_id!r}")
                pvs.append((pv_id, lineno, {}))
                section = "pv"
            elif head == ["correlation"]:
                if corr_line is not None:
                    raise SpecFileError(source, lineno, "duplicate [correlation] section")
                corr_line = lineno
                section = "correlation"
            else:
                raise SpecFileError(source, lineno, f"unknown section {line!r}")
            continue

        if section == "correlation":
            corr_rows.append((lineno, line.split()))
            continue
        if "=" not in line:
            raise SpecFileError(source, lineno, f"expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if section is None:
            if key not in TOP_KEYS:
                raise SpecFileError(source, lineno, f"unknown key {key!r}")
            top[key] = _integer(source, lineno, value)
        else:
            fields = pvs[-1][2]
            if key not in PV_KEYS:
                raise SpecFileError(source, lineno, f"unknown pv key {key!r}")
            if key in fields:
                raise SpecFileError(source, lineno, f"duplicate key {key!r}")
            fields[key] = _number(source, lineno, value)

    if not pvs:
        raise SpecFileError(source, None, "no [pv ...] sections")

    specs = []
    for pv_id, lineno, fields in pvs:
        for key in ("mu", "sigma"):
            if key not in fields:
                raise SpecFileError(source, lineno, f"pv {pv_id!r} is missing {key!r}")
        try:
            specs.append(GaussianPVSpec(pv_id, **fields))
        except ValueError as exc:
            raise SpecFileError(source, lineno, str(exc)) from None

    ids = [s.pv_id for s in specs]
    R = _correlation(source, ids, corr_rows, corr_line)
    if "n_samples" in top and top["n_samples"] < 2:
        raise SpecFileError(source, None, "n_samples must be at least 2")
    return SpecDocument(
        specs,
        R,
        top.get("n_samples"),
        top.get("seed"),
        source,
        {pv_id: lineno for pv_id, lineno, _ in pvs},
        corr_line,
    )


def _correlation(source: str, ids: list[str], rows: list[tuple[int, list[str]]], corr_line) -> np.ndarray:
    n = len(ids)
    index = {pv: i for i, pv in enumerate(ids)}
    R = np.eye(n)
    seen_rows: set[int] = set()
    for lineno, tokens in rows:
        if len(tokens) == 3 and tokens[0] in index and tokens[1] in index:
            i, j = index[tokens[0]], index[tokens[1]]
            value = _number(source, lineno, tokens[2])
            if i == j and value != 1.0:
                raise SpecFileError(source, lineno, "diagonal entries must be 1")
            R[i, j] = R[j, i] = value
            continue
        if tokens[0] not in index:
            raise SpecFileError(source, lineno, f"unknown pv {tokens[0]!r} in correlation block")
        if len(tokens) != n + 1:
            raise SpecFileError(source, lineno, f"expected {n} values, got {len(tokens) - 1}")
        i = index[tokens[0]]
        if i in seen_rows:
            raise SpecFileError(source, lineno, f"duplicate row for {tokens[0]!r}")
        seen_rows.add(i)
        R[i] = [_number(source, lineno, t) for t in tokens[1:]]
    if seen_rows and len(seen_rows) != n:
        raise SpecFileError(source, corr_line, "correlation block must list every pv row")
    try:
        return validate_correlation(R, n, atol=1e-9)
    except ValueError as exc:
        raise SpecFileError(source, corr_line, str(exc)) from None


def read_spec_file(path: str | Path) -> SpecDocument:
    path = Path(path)
    return parse_spec_text(path.read_text(encoding="utf-8"), str(path))


def format_spec_file(
    specs: Sequence[GaussianPVSpec],
    R: Optional[np.ndarray] = None,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    header: str = "",
) -> str:
    lines = [f"# {h}" if h else "#" for h in header.splitlines()]
    if n_samples is not None:
        lines.append(f"n_samples = {n_samples}")
    if seed is not None:
        lines.append(f"seed = {seed}")
    for spec in specs:
        lines += ["", f"[pv {spec.pv_id}]", f"mu = {spec.mu!r}", f"sigma = {spec.sigma!r}"]
        lines += [f"{k} = {v!r}" for k, v in spec.thresholds.items()]
    if R is not None:
        width = max(len(s.pv_id) for s in specs)
        lines += ["", "[correlation]"]
        for spec, row in zip(specs, np.asarray(R)):
            lines.append(spec.pv_id.ljust(width) + "  " + "  ".join(f"{float(v)!r}" for v in row))
    return "\n".join(lines).lstrip("\n") + "\n"
