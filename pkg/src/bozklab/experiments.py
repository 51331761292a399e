"""Experiment orchestration: runs one validated config end to end, writing
the diagnostic series (CSV + JSON), checkpoints, a run manifest with enough
information to re-execute exactly, and a plot script consuming the CSV.

Exit codes mirror the CLI contract: 0 success, 2 validation failure
(raised as ConfigError before any run starts), 3 numerical blow-up
(partial results are flushed first), 4 wrap contamination above the
configured threshold.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .commutators import (
    inequality_ratio,
    make_grid1d,
    make_gv_expansion,
    build_pn,
    operator_norm,
    verify_remainder_bound,
)
from .config import ConfigError, s_alpha
from .cutoffs import check_properties, make_family, smoothstep
from .datum import datum_refinement_report, make_datum
from .diagnostics import (
    decay_fit,
    lp_norm_2d,
    observe_channel,
    observe_conserved,
    observe_half_space,
    observe_norms,
    observe_windowed,
    observe_wrap,
    observe_kato,
    wrap_fractions,
)
from .evolve import BlowUpError, SimState, SolverConfig, simulate
from .fourier import default_bump, dispersion_rate
from .grid import Field, load_field, make_grid, save_field

__all__ = ["RunReport", "run", "run_sweep", "cutoff_check_report", "EXIT_OK", "EXIT_VALIDATION", "EXIT_BLOWUP", "EXIT_WRAP"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BLOWUP = 3
EXIT_WRAP = 4


@dataclass
class RunReport:
    manifest: dict
    exit_code: int
    out_dir: str


def _set_threads(requested):
    if requested is None:
        return {"requested": None, "applied": False}
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=int(requested))
        return {"requested": int(requested), "applied": True}
    except Exception:
        return {"requested": int(requested), "applied": False}


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return str(path)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if obj == np.inf:
        return "inf"
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _base_manifest(config, out_dir, threads):
    return {
        "package_version": __version__,
        "kind": config.kind,
        "title": config.title,
        "seed": config.seed,
        "threads": threads,
        "config_text": config.raw_text,
        "out_dir": str(out_dir),
        "artifacts": {},
        "results": {},
    }


def _check_wrap(manifest, config, wrap_max):
    manifest["results"]["wrap_max"] = wrap_max
    axes = config.wrap.axes
    checked = []
    if axes in ("xy", "x"):
        checked.append(wrap_max["x"])
    if axes in ("xy", "y"):
        checked.append(wrap_max["y"])
    exceeded = bool(checked and max(checked) > config.wrap.threshold)
    manifest["results"]["wrap_exceeded"] = exceeded
    return EXIT_WRAP if exceeded else EXIT_OK


def _save_checkpoint(out_dir, state, config):
    path = Path(out_dir) / "checkpoint.field"
    save_field(state.field, path, timestamp=state.t)
    _write_json(Path(out_dir) / "checkpoint_state.json", {
        "t": state.t,
        "step_count": state.step_count,
        "config_text": config.raw_text,
    })
    return str(path)


def load_checkpoint(out_dir):
    """(field, t, step_count) of a checkpoint written by a previous run."""
    field, t = load_field(Path(out_dir) / "checkpoint.field")
    with open(Path(out_dir) / "checkpoint_state.json") as fh:
        state = json.load(fh)
    return field, float(state["t"]), int(state["step_count"])


def _series_wrap_max(series):
    xs = series.column("wrap_x") if "wrap_x" in series.labels() else np.zeros(1)
    ys = series.column("wrap_y") if "wrap_y" in series.labels() else np.zeros(1)
    return {"x": float(np.max(xs)), "y": float(np.max(ys))}


# ---------------------------------------------------------------------------
# plot script emission (generated artifact; never executed by the runner)

_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Render the standard figures for this run from series.csv."""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path="series.csv"):
    rows = [r for r in open(path) if not r.startswith("#")]
    reader = csv.DictReader(rows)
    data = {{name: [] for name in reader.fieldnames}}
    for row in reader:
        for key, val in row.items():
            data[key].append(float(val))
    return data


def main():
    data = load(sys.argv[1] if len(sys.argv) > 1 else "series.csv")
    t = data.pop("t")
    groups = {{}}
    for name, series in data.items():
        prefix = name.split(":", 1)[0]
        groups.setdefault(prefix, []).append((name, series))
    for prefix, members in sorted(groups.items()):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for name, series in members:
            ax.plot(t, series, label=name)
        ax.set_xlabel("t")
        ax.set_title({title!r})
        ax.legend(fontsize=7)
        {scale}
        fig.tight_layout()
        fig.savefig(f"plot_{{prefix}}.png", dpi=130)
        plt.close(fig)


if __name__ == "__main__":
    main()
'''


def _emit_plot_script(out_dir, title, logscale=False):
    scale = 'ax.set_yscale("log")' if logscale else "pass"
    path = Path(out_dir) / "plot_series.py"
    with open(path, "w") as fh:
        fh.write(_PLOT_TEMPLATE.format(title=title, scale=scale))
    return str(path)


# ---------------------------------------------------------------------------
# h profiles for the commutator experiments

def h_profile_values(grid, spec):
    """Multiplier-function profiles: 'gaussian:WIDTH[:CENTER]' or
    'plateau:HALFWIDTH:RAMP[:CENTER]'.  Both are periodic-smooth with
    compactly-concentrated derivative."""
    name, _, rest = str(spec).partition(":")
    args = [float(tok) for tok in rest.split(":") if tok] if rest else []
    x = grid.x()
    if name == "gaussian":
        width = args[0] if args else 3.0
        center = args[1] if len(args) > 1 else 0.0
        if width <= 0:
            raise ConfigError([f"h_profile gaussian width must be positive, got {width}"])
        return np.exp(-(((x - center) / width) ** 2))
    if name == "plateau":
        halfwidth = args[0] if args else grid.l / 8.0
        ramp = args[1] if len(args) > 1 else grid.l / 8.0
        center = args[2] if len(args) > 2 else 0.0
        lo, hi = center - halfwidth - ramp, center + halfwidth + ramp
        if lo <= -grid.l / 2 or hi >= grid.l / 2:
            raise ConfigError([f"h_profile plateau support [{lo:g}, {hi:g}] reaches the box seam"])
        return smoothstep((x - lo) / ramp) * smoothstep((hi - x) / ramp)
    raise ConfigError([f"unknown h_profile {spec!r}; expected gaussian:... or plateau:..."])


# ---------------------------------------------------------------------------
# kind handlers

def cutoff_check_report(eps, b, samples=10_000, tol=1e-10):
    """Property-by-property table for one cutoff family."""
    family = make_family(eps, b, validate=False)
    checks = check_properties(family, samples=samples, tol=tol)
    return family, checks


def _run_cutoff_check(config, out_dir, manifest):
    window = config.window
    family, checks = cutoff_check_report(window.eps, window.b)
    rows = [{"property": c.name, "passed": c.passed, "worst_residual": c.worst, "description": c.description} for c in checks]
    manifest["results"]["checks"] = rows
    manifest["results"]["all_passed"] = all(c.passed for c in checks)
    manifest["artifacts"]["checks"] = _write_json(Path(out_dir) / "cutoff_checks.json", rows)
    return EXIT_OK if manifest["results"]["all_passed"] else 1


def _run_inequality(config, out_dir, manifest):
    ineq = config.inequality
    params = {"s": ineq.s, "p": ineq.p, "l": ineq.l, "m": ineq.m}
    grid = make_grid1d(ineq.grid_n, ineq.box)
    sweep = inequality_ratio(ineq.kind, params, ineq.trials, seed=config.seed, grid=grid)
    csv_path = Path(out_dir) / "ratios.csv"
    with open(csv_path, "w") as fh:
        fh.write("trial,ratio\n")
        for i, r in enumerate(sweep.ratios):
            fh.write(f"{i},{r!r}\n")
    summary = {
        "kind": sweep.kind,
        "params": {k: (str(v) if v == np.inf else v) for k, v in sweep.params.items()},
        "trials": ineq.trials,
        "skipped": sweep.skipped,
        "max_ratio": sweep.max_ratio,
        "grid_n": sweep.grid_n,
        "seed": sweep.seed,
    }
    manifest["results"].update(summary)
    manifest["artifacts"]["ratios"] = str(csv_path)
    manifest["artifacts"]["summary"] = _write_json(Path(out_dir) / "summary.json", summary)
    return EXIT_OK


def _run_commutator_norms(config, out_dir, manifest):
    comm = config.commutator
    rows = []
    for n1d in comm.grid_ns:
        grid = make_grid1d(n1d, comm.box)
        h = h_profile_values(grid, comm.h_profile)
        bound = verify_remainder_bound(comm.a, comm.b, comm.n, grid, h, iters=comm.iters, seed=config.seed)
        pn = build_pn(make_gv_expansion(comm.a, comm.n, grid, h))
        pn_norm = operator_norm(pn, iters=comm.iters, seed=config.seed)
        rows.append({
            "n1d": n1d,
            "c_emp": bound.c_emp,
            "op_norm": bound.op_norm,
            "l1_norm": bound.l1_norm,
            "pn_norm": pn_norm.value,
            "converged": bound.converged and pn_norm.converged,
            "degenerate": bound.degenerate,
        })
    csv_path = Path(out_dir) / "norms.csv"
    with open(csv_path, "w") as fh:
        fh.write("n1d,c_emp,op_norm,l1_norm,pn_norm,converged\n")
        for r in rows:
            fh.write(f"{r['n1d']},{r['c_emp']!r},{r['op_norm']!r},{r['l1_norm']!r},{r['pn_norm']!r},{int(r['converged'])}\n")
    c_vals = [r["c_emp"] for r in rows if not r["degenerate"]]
    summary = {
        "a": comm.a,
        "b": comm.b,
        "n": comm.n,
        "h_profile": comm.h_profile,
        "rows": rows,
        "stability_factor": (max(c_vals) / min(c_vals)) if c_vals and min(c_vals) > 0 else None,
    }
    manifest["results"].update(summary)
    manifest["artifacts"]["norms"] = str(csv_path)
    manifest["artifacts"]["summary"] = _write_json(Path(out_dir) / "summary.json", summary)
    return EXIT_OK


def _common_observers(config):
    observers = [observe_conserved(config.solver.alpha), observe_norms(), observe_wrap()]
    if config.window is not None:
        family = make_family(config.window.eps, config.window.b)
        s = config.regularity_s
        for v in config.window.v_values:
            observers.append(observe_half_space(s, config.window.x0 + config.window.eps, v=v))
            observers.append(observe_windowed(s, family, v))
    return observers


def _solver_config(config):
    return SolverConfig(
        grid=config.grid,
        alpha=config.solver.alpha,
        dt=config.solver.dt,
        t_end=config.solver.t_end,
        dealias=config.solver.dealias,
        observer_stride=config.solver.observer_stride,
        blowup_factor=config.solver.blowup_factor,
    )


def _flush_series(series, out_dir, manifest, logscale=False):
    manifest["artifacts"]["series_csv"] = series.to_csv(Path(out_dir) / "series.csv")
    manifest["artifacts"]["series_json"] = series.to_json(Path(out_dir) / "series.json")
    manifest["artifacts"]["plot_script"] = _emit_plot_script(out_dir, manifest.get("title") or manifest["kind"], logscale)


def _run_simulation_kind(config, out_dir, manifest, observers, resume=None):
    solver = _solver_config(config)
    manifest["results"]["stability_number"] = solver.stability_number()
    if resume:
        u0, t0, step0 = load_checkpoint(resume)
        if u0.grid != config.grid:
            raise ConfigError([f"resume checkpoint grid {u0.grid} does not match config grid"])
        manifest["results"]["resumed_from"] = {"path": str(resume), "t": t0, "step_count": step0}
    else:
        u0 = make_datum(config.datum, config.grid)
        t0, step0 = 0.0, 0
    try:
        series, final = simulate(u0, solver, observers, start_t=t0, start_step=step0)
    except BlowUpError as exc:
        if exc.series is not None and exc.series.records:
            _flush_series(exc.series, out_dir, manifest)
        manifest["results"]["blowup"] = {"t": exc.t, "step": exc.step_count, "reason": exc.reason}
        return EXIT_BLOWUP, None, None
    _flush_series(series, out_dir, manifest)
    manifest["artifacts"]["checkpoint"] = _save_checkpoint(out_dir, final, config)
    return EXIT_OK, series, final


def _run_simulate(config, out_dir, manifest, resume=None):
    code, series, _ = _run_simulation_kind(config, out_dir, manifest, _common_observers(config), resume)
    if code != EXIT_OK:
        return code
    first, last = series.records[0], series.records[-1]
    manifest["results"]["conservation"] = {
        label: {
            "initial": first.entries[label],
            "final": last.entries[label],
            "relative_drift": abs(last.entries[label] - first.entries[label])
            / max(abs(first.entries[label]), 1e-300),
        }
        for label in ("I", "M", "E")
    }
    return _check_wrap(manifest, config, _series_wrap_max(series))


def _run_propagation(config, out_dir, manifest):
    window = config.window
    s = config.regularity_s
    family = make_family(window.eps, window.b)
    r_grid = [s * k / 4.0 for k in range(1, 5)]
    observers = [observe_conserved(config.solver.alpha), observe_norms(), observe_wrap()]
    for v in window.v_values:
        for r in r_grid:
            observers.append(observe_half_space(r, window.x0 + window.eps, v=v, label=f"hs:r={r:g}:v={v:g}"))
        observers.append(observe_windowed(s, family, v))
        observers.append(observe_channel(s, config.solver.alpha, family, v))
    manifest["results"]["r_grid"] = r_grid
    manifest["results"]["s_alpha"] = s_alpha(config.solver.alpha)
    manifest["results"]["datum_refinement"] = datum_refinement_report(
        config.datum, config.grid, s, window.x0
    )
    code, series, _ = _run_simulation_kind(config, out_dir, manifest, observers)
    if code != EXIT_OK:
        return code
    integrals = {}
    for v in window.v_values:
        for part in ("ch_dx", "ch_dy"):
            label = f"{part}:s={s:g}:v={v:g}"
            integrals[label] = series.trapezoid(label)
    manifest["results"]["channel_time_integrals"] = integrals
    return _check_wrap(manifest, config, _series_wrap_max(series))


def _run_kato(config, out_dir, manifest):
    kato = config.kato
    observers = [
        observe_conserved(config.solver.alpha),
        observe_norms(),
        observe_wrap(),
        observe_kato(kato.r, config.solver.alpha, kato.radius, kato.operators),
    ]
    code, series, _ = _run_simulation_kind(config, out_dir, manifest, observers)
    if code != EXIT_OK:
        return code
    integrals = {
        f"kato:{tag}:r={kato.r:g}:R={kato.radius:g}": series.trapezoid(
            f"kato:{tag}:r={kato.r:g}:R={kato.radius:g}"
        )
        for tag in kato.operators
    }
    manifest["results"]["kato_time_integrals"] = integrals
    return _check_wrap(manifest, config, _series_wrap_max(series))


def _run_linear_decay(config, out_dir, manifest):
    decay = config.decay
    alpha = config.solver.alpha
    datum = make_datum(config.datum, config.grid)
    times = np.geomspace(decay.t_min, decay.t_max, decay.num_times)
    fit = decay_fit(datum, alpha, decay.j, decay.p, times, mode=decay.mode)

    # wrap contamination of the projected evolved field at each sample time
    g = config.grid
    xi = g.xi()[:, None]
    eta = g.eta()[None, :]
    bump = default_bump()
    base = (bump.rho0(2.0 ** (-decay.j) * xi) + 0.0 * eta) * datum.coeffs
    rate = dispersion_rate(xi, eta, alpha)
    wrap_max = {"x": 0.0, "y": 0.0}
    rows = []
    for t, norm in zip(fit.times, fit.norms):
        evolved = Field.from_coeffs(g, np.exp(1j * t * rate) * base)
        fx, fy = wrap_fractions(evolved)
        wrap_max["x"] = max(wrap_max["x"], fx)
        wrap_max["y"] = max(wrap_max["y"], fy)
        rows.append((t, norm, fx, fy))
    csv_path = Path(out_dir) / "decay.csv"
    with open(csv_path, "w") as fh:
        fh.write("t,norm,wrap_x,wrap_y\n")
        for t, norm, fx, fy in rows:
            fh.write(f"{t!r},{norm!r},{fx!r},{fy!r}\n")
    manifest["artifacts"]["decay_csv"] = str(csv_path)
    manifest["artifacts"]["plot_script"] = _emit_plot_script(out_dir, "linear decay", logscale=True)
    manifest["results"]["fit"] = {
        "slope": fit.slope,
        "prefactor": fit.prefactor,
        "target_slope": fit.target_slope,
        "mode": decay.mode,
        "j": decay.j,
        "p": "inf" if decay.p == np.inf else decay.p,
        "slope_error": abs(fit.slope - fit.target_slope),
    }
    return _check_wrap(manifest, config, wrap_max)


_HANDLERS = {
    "cutoff-check": _run_cutoff_check,
    "inequality": _run_inequality,
    "commutator-norms": _run_commutator_norms,
    "simulate": _run_simulate,
    "propagation": _run_propagation,
    "kato": _run_kato,
    "linear-decay": _run_linear_decay,
}


def run(config, out_dir=None, threads=None, resume=None):
    """Execute one validated experiment config; returns a RunReport."""
    out_dir = Path(out_dir or config.output_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    threads_info = _set_threads(threads)
    manifest = _base_manifest(config, out_dir, threads_info)
    start = time.time()
    handler = _HANDLERS[config.kind]
    if config.kind == "simulate":
        exit_code = handler(config, out_dir, manifest, resume=resume)
    else:
        exit_code = handler(config, out_dir, manifest)
    manifest["wall_time_s"] = time.time() - start
    manifest["exit_code"] = exit_code
    _write_json(out_dir / "manifest.json", manifest)
    return RunReport(manifest, exit_code, str(out_dir))


def run_sweep(configs, out_dir, threads=None, jobs=1):
    """Dispatch independent runs, each into its own subdirectory.

    ``configs`` is a list of (name, ExperimentConfig).  Returns the list of
    RunReports; the aggregate exit code is the maximum of the individual
    ones.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(run, config, out_dir / name, threads) for name, config in configs
            ]
            reports = [f.result() for f in futures]
    else:
        for name, config in configs:
            reports.append(run(config, out_dir / name, threads))
    return reports
