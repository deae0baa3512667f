"""``alarmsim`` command line.

Every option can also be set through an ``ALARMSIM_<OPTION>`` environment
variable (e.g. ``ALARMSIM_RESOLUTION=5``).
"""

from __future__ import annotations

import shutil
import sys
import tempfile
import warnings
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import click

from . import __version__
from .analytic import analytic_matrix
from .empirical import similarity_matrix
from .heatmap import render_heatmap
from .ingest import KINDS, AlarmLogError, group_by_tag, infer_grid, print_diagnostics, read_alarm_log
from .matrix import SimilarityMatrix, write_matrix_csv
from .sequences import pad, tag_sequences, write_sequence_csv
from .specfile import read_spec_file
from .synthetic import ALARM_MEASURES, ScenarioSpec, reference_scenario_path, run_study

USAGE_ERROR = 2
RUNTIME_ERROR = 1
CA_MEASURES = ("jaccard", "pearson-binary", "pearson-multivalued")
IA_MEASURES = ("jaccard", "pearson-binary")


class InputError(Exception):
    """Bad input; exits with status 2."""


def _measures(text: Optional[str], allowed: tuple[str, ...], default: tuple[str, ...]) -> list[str]:
    if not text:
        return list(default)
    out = [m.strip() for m in text.split(",") if m.strip()]
    for m in out:
        if m not in allowed:
            raise InputError(f"unsupported measure {m!r} (choose from {', '.join(allowed)})")
    return list(dict.fromkeys(out))


@contextmanager
def staged_output(out: Path) -> Iterator[Path]:
    """Write into a scratch directory and move the files into ``out`` only
    if the block succeeds, so failed runs leave no partial artifacts."""
    out = Path(out)
    parent = out.parent if out.parent.exists() else Path.cwd()
    stage = Path(tempfile.mkdtemp(prefix=".alarmsim-", dir=parent))
    try:
        yield stage
        out.mkdir(parents=True, exist_ok=True)
        for item in sorted(stage.rglob("*")):
            target = out / item.relative_to(stage)
            if item.is_dir():
                target.mkdir(parents=True, exist_ok=True)
            else:
                shutil.move(str(item), str(target))
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def _fail(message: str, status: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(status)


@contextmanager
def _guard() -> Iterator[None]:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            yield
    except (InputError, AlarmLogError, ValueError, KeyError) as exc:
        _fail(str(exc).strip("'\""), USAGE_ERROR)
    except OSError as exc:
        _fail(str(exc), RUNTIME_ERROR)


def _emit(m: SimilarityMatrix, stem: str, stage: Path, title: Optional[str] = None) -> None:
    write_matrix_csv(m, stage / f"{stem}.csv")
    render_heatmap(m, stage / f"{stem}.svg", title or stem)


def _print_top(m: SimilarityMatrix, k: int) -> None:
    click.echo(f"\n{m.measure}: top {k} pairs")
    index = {t: i for i, t in enumerate(m.tag_ids)}
    for a, b, v in m.top_pairs(k):
        lag = ""
        if m.lag_matrix is not None:
            lag = f"  lag {int(m.lag_matrix[index[a], index[b]]):+d}"
        click.echo(f"  {a:<16} {b:<16} {v: .4f}{lag}")
    if m.undefined:
        n = sum(1 for i, j in m.undefined if i < j)
        click.echo(f"  ({n} undefined pairs omitted)")


@click.group(context_settings={"auto_envvar_prefix": "ALARMSIM", "show_default": True})
@click.version_option(__version__)
def main() -> None:
    """Alarm similarity analysis: empirical, analytic and Monte-Carlo."""


@main.command()
@click.option("--log", "log_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, envvar="ALARMSIM_LOG")
@click.option("--resolution", type=float, default=1.0, envvar="ALARMSIM_RESOLUTION", help="Grid resolution in seconds.")
@click.option("--pad", "padding", type=click.IntRange(min=0), default=0, envvar="ALARMSIM_PAD", help="Padding in samples (binary measures).")
@click.option("--lag", "max_lag", type=click.IntRange(min=0), default=0, envvar="ALARMSIM_LAG", help="Maximum lag scanned, in samples; 0 disables.")
@click.option("--measures", default=None, envvar="ALARMSIM_MEASURES", help="Comma-separated measures.")
@click.option("--level", type=click.Choice(["ca", "ia"]), default="ca", envvar="ALARMSIM_LEVEL", help="Collective (per tag) or individual (per tag and kind) alarms.")
@click.option("--top", type=click.IntRange(min=1), default=20, envvar="ALARMSIM_TOP")
@click.option("--export-sequences", is_flag=True, envvar="ALARMSIM_EXPORT_SEQUENCES", help="Also write every sequence as CSV.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True, envvar="ALARMSIM_OUT")
def similarity(log_path, resolution, padding, max_lag, measures, level, top, export_sequences, out):
    """Similarity matrices and heatmaps from an alarm log."""
    with _guard():
        allowed = CA_MEASURES if level == "ca" else IA_MEASURES
        chosen = _measures(measures, allowed, allowed)
        events, diags = read_alarm_log(log_path)
        logs, more = group_by_tag(events)
        print_diagnostics(diags + more)
        grid = infer_grid(logs.values(), resolution)
        ia, ca, mv = tag_sequences(logs, grid)
        if level == "ca":
            binary = [pad(s, padding) for s in ca.values()]
            multi = list(mv.values())
        else:
            binary = [
                pad(seq, padding)
                for tag in ia
                for kind, seq in ia[tag].items()
                if any(e.kind == kind for e in logs[tag].events)
            ]
            multi = []
        if len(binary) < 2:
            click.echo("warning: nothing to compare (fewer than two tags)", err=True)
        if max_lag and max_lag >= grid.length:
            raise InputError(f"--lag must be smaller than the grid length {grid.length}")
        click.echo(f"{len(logs)} tags, {len(events)} events, grid of {grid.length} samples at {grid.resolution:g}s")
        with staged_output(out) as stage:
            for m in chosen:
                seqs = multi if m == "pearson-multivalued" else binary
                sm = similarity_matrix(seqs, m, max_lag=max_lag or None)
                _emit(sm, m, stage)
                _print_top(sm, top)
            if export_sequences:
                (stage / "sequences").mkdir()
                for s in binary:
                    write_sequence_csv(s, stage / "sequences" / f"{s.tag_id}.binary.csv")
                for s in multi:
                    write_sequence_csv(s, stage / "sequences" / f"{s.tag_id}.multivalued.csv")


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, envvar="ALARMSIM_SPEC")
@click.option("--measures", default=None, envvar="ALARMSIM_MEASURES", help="Comma-separated measures.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True, envvar="ALARMSIM_OUT")
def analytic(spec_path, measures, out):
    """Analytic similarity matrices for Gaussian PVs."""
    with _guard():
        allowed = (*ALARM_MEASURES, "pearson-pv")
        chosen = _measures(measures, allowed, ALARM_MEASURES)
        doc = read_spec_file(spec_path)
        for m in chosen:
            doc.require(m)
        with staged_output(out) as stage:
            for m in chosen:
                sm = analytic_matrix(doc.specs, doc.R, m)
                _emit(sm, m, stage, f"{m} (analytic)")
                click.echo(f"{m}: wrote {m}.csv, {m}.svg")


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, envvar="ALARMSIM_SCENARIO", help="Scenario spec file; the shipped 15-PV reference if omitted.")
@click.option("--n-samples", type=int, default=None, envvar="ALARMSIM_N_SAMPLES", help="Override the scenario's sample count.")
@click.option("--seed", type=int, default=None, envvar="ALARMSIM_SEED", help="Override the scenario's seed.")
@click.option("--measures", default=None, envvar="ALARMSIM_MEASURES", help="Comma-separated measures.")
@click.option("--pad", "padding", type=click.IntRange(min=0), default=0, envvar="ALARMSIM_PAD")
@click.option("--lag", "max_lag", type=click.IntRange(min=0), default=0, envvar="ALARMSIM_LAG")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True, envvar="ALARMSIM_OUT")
def simulate(scenario_path, n_samples, seed, measures, padding, max_lag, out):
    """Monte-Carlo study: empirical vs analytic color maps."""
    with _guard():
        chosen = _measures(measures, ALARM_MEASURES, ALARM_MEASURES)
        doc = read_spec_file(scenario_path or reference_scenario_path())
        for m in chosen:
            doc.require(m)
        if n_samples is not None:
            doc.n_samples = n_samples
        if seed is not None:
            doc.seed = seed
        if doc.n_samples is not None and doc.n_samples < 2:
            raise InputError("n_samples must be at least 2")
        scenario = ScenarioSpec.from_document(doc)
        report = run_study(scenario, chosen, padding or None, max_lag or None)
        with staged_output(out) as stage:
            report.write(stage)
            for stem, m in report.matrices().items():
                render_heatmap(m, stage / f"{stem}.svg", stem)
        click.echo(report.summary_text(), nl=False)


@main.command()
@click.option("--log", "log_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, envvar="ALARMSIM_LOG")
@click.option("--resolution", type=float, default=1.0, envvar="ALARMSIM_RESOLUTION")
def inspect(log_path, resolution):
    """Tag and event statistics of an alarm log."""
    with _guard():
        events, diags = read_alarm_log(log_path)
        logs, more = group_by_tag(events)
        print_diagnostics(diags + more)
        click.echo(f"{len(events)} events, {len(logs)} tags, {len(diags)} bad rows")
        if logs and any(log.events for log in logs.values()):
            grid = infer_grid(logs.values(), resolution)
            click.echo(f"grid: start {grid.start:g}s, {grid.length} samples at {grid.resolution:g}s")
        header = f"{'tag':<16} {'mode':<15}" + "".join(f"{k:>5}" for k in KINDS) + f"{'RTN':>6}"
        click.echo(header)
        for tag, log in sorted(logs.items()):
            alm = {k: sum(1 for e in log.events if e.kind == k and e.event_type == "ALM") for k in KINDS}
            rtn = sum(1 for e in log.events if e.event_type == "RTN")
            click.echo(f"{tag:<16} {log.mode.value:<15}" + "".join(f"{alm[k]:>5}" for k in KINDS) + f"{rtn:>6}")


if __name__ == "__main__":
    main()
