"""Command-line front end: ``gausspt <command> [options]``.

Commands: ``spectrum``, ``evolve``, ``sweep``, ``figure``, ``verify``.
Options may also come from a ``key = value`` file given with ``--config``;
flags on the command line win.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle
from .dynamics import (TrajectoryGrid, propagate_closed_form, propagate_rk4, tmsv_initial)
from .observables import antibunching, evolve_observables, log_negativity, mode_moments
from .params import SystemParams
from .reductions import death_time, max_entanglement, period_estimate
from .spectrum import SPECTRUM_COLUMNS, drift_matrix, noise_matrix, spectrum_sweep
from .tables import SweepTable

log = logging.getLogger("gausspt")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGED = 3
EXIT_VERIFY = 4

COMMANDS = ("spectrum", "evolve", "sweep", "figure", "verify")
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")
REDUCTIONS = ("full_series", "death_time", "max_en", "period_estimate")
AXES = {"G": "coupling_G", "s": "s", "r": "squeeze_r", "n_th": "n_th"}
DEFAULT_SWEEP_CAP = 1_000_000
STEP = 0.005


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config

@dataclass
class SweepSpec:
    axes: list[tuple[str, float, float, int]] = field(default_factory=list)
    reduction: str = "death_time"
    cap: int = DEFAULT_SWEEP_CAP

    def __post_init__(self):
        if not self.axes:
            raise UsageError("sweep needs at least one --axis")
        if len(self.axes) > 3:
            raise UsageError("at most three sweep axes")
        names = [a[0] for a in self.axes]
        if len(set(names)) != len(names):
            raise UsageError("repeated sweep axis")
        for name, start, stop, count in self.axes:
            if name not in AXES:
                raise UsageError(f"unknown sweep axis {name!r}; choose from {sorted(AXES)}")
            if count < 1 or start > stop:
                raise UsageError(f"bad range for axis {name}: {start}:{stop}:{count}")
        if self.reduction not in REDUCTIONS:
            raise UsageError(f"unknown reduction {self.reduction!r}")
        if self.n_points > self.cap:
            raise UsageError(f"sweep has {self.n_points} points, above the cap of {self.cap}")

    @property
    def n_points(self) -> int:
        return math.prod(a[3] for a in self.axes)

    def values(self, name_index: int) -> np.ndarray:
        _, start, stop, count = self.axes[name_index]
        return np.linspace(start, stop, count)

    def points(self):
        """Grid points in row-major order of the axes as given."""
        return itertools.product(*(self.values(i) for i in range(len(self.axes))))


@dataclass
class RunConfig:
    command: str
    params: SystemParams
    grid: TrajectoryGrid
    output_path: str = "-"
    format: str = "csv"
    figure_id: str | None = None
    emit_plot_script: bool = False
    threads: int = 1
    seed: int = 20240611
    noise_scale: float = 1.0
    sweep: SweepSpec | None = None
    g_range: tuple[float, float, int] = (0.0, 3.0, 301)
    n_traj: int = 20000

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if (self.figure_id is not None) != (self.command == "figure"):
            raise UsageError("a figure id is required for, and only for, the figure command")
        if self.figure_id is not None and self.figure_id not in FIGURES:
            raise UsageError(f"unknown figure {self.figure_id!r}; choose from {', '.join(FIGURES)}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")


def read_config_file(path) -> dict[str, str]:
    """``key = value`` per line, ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _default_threads() -> int:
    env = os.environ.get("GAUSSPT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"GAUSSPT_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _parse_axis(text: str) -> tuple[str, float, float, int]:
    try:
        name, rng = text.split("=", 1)
        start, stop, count = rng.split(":")
        return name.strip(), float(start), float(stop), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"axis must look like NAME=start:stop:count, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gausspt", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("target", nargs="?", help="figure id for the figure command")
    ap.add_argument("--config", help="key = value parameter file")
    ap.add_argument("--kappa", type=float, default=1.0)
    ap.add_argument("--s", type=float, default=1.0, help="gain-to-loss ratio")
    ap.add_argument("--coupling", type=float, default=1.5, help="effective coupling G")
    ap.add_argument("--nth", type=float, default=0.0, help="thermal phonon occupancy")
    ap.add_argument("--r", type=float, default=1.0, help="initial squeezing parameter")
    ap.add_argument("--t0", type=float, default=0.0)
    ap.add_argument("--t-end", type=float, default=None)
    ap.add_argument("--steps", type=int, default=None)
    ap.add_argument("--out", default=None)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--figure", default=None)
    ap.add_argument("--plot-script", action="store_true", help="also write a gnuplot script")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--noise-scale", type=float, default=1.0)
    ap.add_argument("--axis", action="append", type=_parse_axis, default=None,
                    help="sweep axis NAME=start:stop:count with NAME in G, s, r, n_th")
    ap.add_argument("--reduction", choices=REDUCTIONS, default="death_time")
    ap.add_argument("--max-points", type=int, default=DEFAULT_SWEEP_CAP)
    ap.add_argument("--g-range", default="0:3:301", help="spectrum G/kappa start:stop:count")
    ap.add_argument("--n-traj", type=int, default=20000, help="trajectories for verify")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


_FILE_KEYS = {"kappa", "s", "coupling", "nth", "r", "t0", "t_end", "steps", "out", "format",
              "figure", "threads", "seed", "noise_scale", "reduction", "max_points", "g_range",
              "n_traj", "plot_script"}


def parse_config(argv) -> RunConfig:
    ap = build_parser()
    pre_ap = argparse.ArgumentParser(add_help=False)
    pre_ap.add_argument("--config")
    pre, _ = pre_ap.parse_known_args(argv)
    if pre.config:
        try:
            values = read_config_file(pre.config)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}")
        unknown = set(values) - _FILE_KEYS - {"axis"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        defaults = {}
        for action in ap._actions:
            if action.dest in values:
                raw = values[action.dest]
                if action.dest == "plot_script":
                    defaults["plot_script"] = raw.lower() in ("1", "true", "yes", "on")
                elif action.type is not None:
                    try:
                        defaults[action.dest] = action.type(raw)
                    except (ValueError, argparse.ArgumentTypeError) as exc:
                        raise UsageError(f"config key {action.dest}: {exc}")
                else:
                    defaults[action.dest] = raw
        if "axis" in values:
            defaults["axis"] = [_parse_axis(a) for a in values["axis"].split(";") if a.strip()]
        ap.set_defaults(**defaults)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    figure_id = args.figure or args.target
    if args.command != "figure" and args.target is not None:
        raise UsageError(f"unexpected argument {args.target!r}")
    try:
        params = SystemParams(kappa=args.kappa, s=args.s, coupling_G=args.coupling,
                              n_th=args.nth, squeeze_r=args.r)
    except ValueError as exc:
        raise UsageError(str(exc))
    balanced = params.s == 1.0
    t_end = args.t_end if args.t_end is not None else (20.0 if balanced else 10.0)
    steps = args.steps if args.steps is not None else int(round((t_end - args.t0) / STEP))
    try:
        grid = TrajectoryGrid(args.t0, t_end, steps)
    except ValueError as exc:
        raise UsageError(str(exc))
    try:
        g0, g1, gn = args.g_range.split(":")
        g_range = (float(g0), float(g1), int(gn))
    except ValueError:
        raise UsageError(f"--g-range must be start:stop:count, got {args.g_range!r}")
    if g_range[2] < 1 or g_range[0] < 0 or g_range[1] < g_range[0]:
        raise UsageError(f"bad --g-range {args.g_range!r}")
    threads = args.threads if args.threads is not None else _default_threads()
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    if args.noise_scale < 0:
        raise UsageError("--noise-scale must be >= 0")
    sweep = None
    if args.command == "sweep":
        sweep = SweepSpec(args.axis or [], args.reduction, args.max_points)
    out = args.out if args.out is not None else ("." if args.command == "figure" else "-")
    return RunConfig(args.command, params, grid, out, args.format, figure_id,
                     args.plot_script, threads, args.seed, args.noise_scale, sweep,
                     g_range, args.n_traj)


# ---------------------------------------------------------------- output

def _emit(table: SweepTable, path: str, fmt: str) -> None:
    if path == "-":
        sys.stdout.write(table.to_csv() if fmt == "csv" else table.to_json())
        return
    table.write(path, fmt)


def _subtable(table: SweepTable, columns) -> SweepTable:
    idx = [table.columns.index(c) for c in columns]
    return SweepTable(tuple(columns), [tuple(row[i] for i in idx) for row in table.rows])


def plot_script(data_file: str, columns, title: str) -> str:
    """Standalone gnuplot script plotting every column against the first."""
    lines = [
        f"# {title}",
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{columns[0]}'",
        f"set title '{title}'",
        "set terminal pngcairo size 900,600",
        f"set output '{Path(data_file).stem}.png'",
    ]
    series = [f"'{Path(data_file).name}' using 1:{k + 1} with linespoints"
              for k in range(1, len(columns))]
    lines.append("plot " + ", \\\n     ".join(series))
    return "\n".join(lines) + "\n"


def _write_plot_script(path: Path, columns, title: str) -> None:
    with open(path.with_suffix(".gp"), "w", newline="") as fh:
        fh.write(plot_script(str(path), columns, title))


# ---------------------------------------------------------------- commands

def cmd_spectrum(cfg: RunConfig) -> int:
    g0, g1, gn = cfg.g_range
    table = spectrum_sweep(cfg.params, np.linspace(g0, g1, gn), threads=cfg.threads)
    _emit(table, cfg.output_path, cfg.format)
    if cfg.emit_plot_script and cfg.output_path != "-":
        _write_plot_script(Path(cfg.output_path), table.columns, "supermode spectrum")
    return EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    series = evolve_observables(cfg.params, cfg.grid, noise_scale=cfg.noise_scale)
    table = series.to_table()
    _emit(table, cfg.output_path, cfg.format)
    if cfg.emit_plot_script and cfg.output_path != "-":
        _write_plot_script(Path(cfg.output_path), table.columns, "observables")
    if series.diverged_at is not None:
        print(f"gausspt: divergence at step {series.diverged_at} "
              f"(t={cfg.grid.t0 + series.diverged_at * cfg.grid.step:g}); output truncated",
              file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _reduce(cfg: RunConfig, sweep: SweepSpec, point) -> list[tuple]:
    changes = {AXES[a[0]]: float(v) for a, v in zip(sweep.axes, point)}
    if "coupling_G" in changes:
        # the G axis is given in units of kappa
        changes["coupling_G"] *= cfg.params.kappa
    p = cfg.params.with_(**changes)
    series = evolve_observables(p, cfg.grid, noise_scale=cfg.noise_scale)
    diverged = series.diverged_at is not None
    head = tuple(float(v) for v in point)
    if sweep.reduction == "full_series":
        return [head + (s.t, s.e_n, s.antibunch, s.n_p, s.n_s, diverged) for s in series]
    if sweep.reduction == "death_time":
        value = death_time(series)
    elif sweep.reduction == "max_en":
        value = max_entanglement(series)
    else:
        value = period_estimate(series)
    return [head + (value, diverged)]


def run_sweep(cfg: RunConfig) -> SweepTable:
    sweep = cfg.sweep
    names = tuple(a[0] for a in sweep.axes)
    if sweep.reduction == "full_series":
        columns = names + ("t", "e_n", "antibunching", "n_p", "n_s", "diverged")
    else:
        columns = names + (sweep.reduction, "diverged")
    points = list(sweep.points())
    if cfg.threads > 1 and len(points) > 1:
        # map() returns results in submission order whatever the completion order
        with ProcessPoolExecutor(min(cfg.threads, len(points))) as pool:
            chunks = list(pool.map(partial(_reduce, cfg, sweep), points))
    else:
        chunks = [_reduce(cfg, sweep, pt) for pt in points]
    table = SweepTable(columns)
    for chunk in chunks:
        for row in chunk:
            table.append(row)
    return table


def cmd_sweep(cfg: RunConfig) -> int:
    table = run_sweep(cfg)
    _emit(table, cfg.output_path, cfg.format)
    flagged = sum(1 for row in table.rows if row[-1])
    if flagged:
        print(f"gausspt: {flagged} row(s) flagged as diverged", file=sys.stderr)
    return EXIT_OK


# figure presets: id -> (s, r, couplings) or (s, G/kappa range)
_EVOLVE_PRESETS = {
    "fig3": (1.0, 1.0, (1.5, 0.7)),
    "fig5": (2.0, 1.0, (2.3, 1.3)),
    "fig6": (1.0, 2.0, (1.5, 0.7)),
    "fig7": (2.0, 2.0, (2.3, 1.3)),
}
_SPECTRUM_PRESETS = {
    "fig2": (1.0, (0.0, 1.5, 301)),
    "fig4": (2.0, (0.0, 3.0, 301)),
}
_FIG8 = ((1.0, (1.5, 0.7)), (2.0, (2.3, 1.3)))


@dataclass(frozen=True)
class FigureJob:
    """One data file of a figure preset and its equivalent plain invocation."""

    filename: str
    kind: str  # "spectrum" or "evolve"
    params: SystemParams
    grid: TrajectoryGrid | None
    columns: tuple[str, ...]
    g_range: tuple[float, float, int] | None = None

    def invocation(self) -> str:
        p = self.params
        base = (f"gausspt {self.kind} --kappa {p.kappa:g} --s {p.s:g} --nth {p.n_th:g} "
                f"--r {p.squeeze_r:g}")
        if self.kind == "spectrum":
            g0, g1, gn = self.g_range
            return f"{base} --g-range {g0:g}:{g1:g}:{gn}"
        return (f"{base} --coupling {p.coupling_G:g} --t0 {self.grid.t0:g} "
                f"--t-end {self.grid.t_end:g} --steps {self.grid.n_steps}")


def _default_grid(s: float) -> TrajectoryGrid:
    t_end = 20.0 if s == 1.0 else 10.0
    return TrajectoryGrid(0.0, t_end, int(round(t_end / STEP)))


def figure_jobs(figure_id: str, ext: str = "csv", base: SystemParams | None = None) -> list[FigureJob]:
    base = base or SystemParams()
    base = base.with_(n_th=0.0)
    if figure_id in _SPECTRUM_PRESETS:
        s, g_range = _SPECTRUM_PRESETS[figure_id]
        return [FigureJob(f"{figure_id}.{ext}", "spectrum", base.with_(s=s, squeeze_r=0.0),
                          None, SPECTRUM_COLUMNS, g_range)]
    if figure_id in _EVOLVE_PRESETS:
        s, r, couplings = _EVOLVE_PRESETS[figure_id]
        jobs = []
        for panel_en, panel_n, G in zip("ab", "cd", couplings):
            p = base.with_(s=s, squeeze_r=r, coupling_G=G)
            grid = _default_grid(s)
            jobs.append(FigureJob(f"{figure_id}{panel_en}_G{G:g}_entanglement.{ext}", "evolve",
                                  p, grid, ("t", "e_n", "antibunching")))
            jobs.append(FigureJob(f"{figure_id}{panel_n}_G{G:g}_numbers.{ext}", "evolve",
                                  p, grid, ("t", "n_p", "n_s")))
        return jobs
    if figure_id == "fig8":
        jobs = []
        for panel, (s, couplings) in zip("ab", _FIG8):
            for G in couplings:
                p = base.with_(s=s, squeeze_r=0.1, coupling_G=G)
                jobs.append(FigureJob(f"fig8{panel}_s{s:g}_G{G:g}_entanglement.{ext}", "evolve",
                                      p, _default_grid(s), ("t", "e_n")))
        return jobs
    raise UsageError(f"unknown figure {figure_id!r}")


def cmd_figure(cfg: RunConfig) -> int:
    outdir = Path(cfg.output_path)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory: {exc}")
    jobs = figure_jobs(cfg.figure_id, cfg.format)
    cache = {}
    status = EXIT_OK
    for job in jobs:
        key = (job.kind, job.params, job.grid)
        if key not in cache:
            if job.kind == "spectrum":
                g0, g1, gn = job.g_range
                cache[key] = (spectrum_sweep(job.params, np.linspace(g0, g1, gn)), None)
            else:
                series = evolve_observables(job.params, job.grid, noise_scale=cfg.noise_scale)
                cache[key] = (series.to_table(), series.diverged_at)
        table, diverged_at = cache[key]
        path = outdir / job.filename
        _subtable(table, job.columns).write(path, cfg.format)
        if cfg.emit_plot_script:
            _write_plot_script(path, job.columns, f"{cfg.figure_id} {job.filename}")
        print(f"{path}: {job.invocation()}")
        if diverged_at is not None:
            status = EXIT_DIVERGED
    return status


def run_verify(n_traj: int, seed: int, threads: int = 1) -> list[tuple[str, bool, str]]:
    """Oracle comparisons; returns ``(name, passed, detail)`` per check."""
    results = []
    for r in (0.1, 0.5, 1.0, 2.0):
        w = tmsv_initial(r)
        fock = oracle.fock_tmsv_moments(r)
        m = mode_moments(w)
        err = max(abs(m.n_p - fock.n), abs(abs(m.m_bc) - fock.m_bc),
                  abs(antibunching(w) - fock.antibunching),
                  abs(log_negativity(w) - 2 * r))
        results.append((f"fock_tmsv r={r:g}", err <= 1e-9, f"max deviation {err:.3g}"))

    for s, G in ((1.0, 1.5), (2.0, 2.3)):
        p = SystemParams(s=s, coupling_G=G, squeeze_r=1.0)
        a, z = drift_matrix(p), noise_matrix(p)
        w0 = tmsv_initial(1.0)
        exact = propagate_closed_form(w0, a, z, 2.0).w
        rk = propagate_rk4(w0, a, z, TrajectoryGrid(0.0, 2.0, 400)).states[-1].w
        err = np.max(np.abs(rk - exact)) / np.max(np.abs(exact))
        results.append((f"rk4_vs_exact s={s:g} G={G:g}", err <= 1e-8, f"relative deviation {err:.3g}"))

    p = SystemParams(s=1.0, coupling_G=1.5, squeeze_r=1.0)
    grid = TrajectoryGrid(0.0, 1.0, 10)
    est = oracle.sde_ensemble(p, grid, n_traj, seed, threads=threads)
    a, z = drift_matrix(p), noise_matrix(p)
    ref = np.array([propagate_closed_form(tmsv_initial(1.0), a, z, t).w for t in grid.times])
    frac = oracle.fraction_within(est, ref, skip_first=True)
    results.append(("sde_ensemble s=1 G=1.5", frac >= 0.99,
                    f"{100 * frac:.1f}% of entries within 3 std_err (n_traj={n_traj}, seed={seed})"))
    return results


def cmd_verify(cfg: RunConfig) -> int:
    results = run_verify(cfg.n_traj, cfg.seed, cfg.threads)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failed = sum(1 for _, ok, _ in results if not ok)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


HANDLERS = {"spectrum": cmd_spectrum, "evolve": cmd_evolve, "sweep": cmd_sweep,
            "figure": cmd_figure, "verify": cmd_verify}


def run(cfg: RunConfig) -> int:
    try:
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"gausspt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gausspt: error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"gausspt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse
        return int(exc.code) if exc.code is not None else EXIT_OK
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
