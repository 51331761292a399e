"""Experiment configuration: flat sectioned key/value files (INI syntax),
typed scalars, documented defaults, total validation.

Every invariant violation is reported with its key path; unknown sections
and keys are rejected.  No config reaches a runner with a violated
invariant.

Sections and defaults (keys marked * are required when the section is used)::

    [experiment]  kind*(simulate|propagation|linear-decay|kato|
                        commutator-norms|inequality|cutoff-check)
                  seed=0  title=""
    [grid]        nx* ny* lx* ly*
    [solver]      alpha=0.5 dt=1e-3 t_end=1.0 dealias=true
                  observer_stride=10 blowup_factor=1e8
    [regularity]  s=2.0            (s_alpha = (17-2*alpha)/12 is derived)
    [window]      x0=0.0 eps=1.0 b=5.0 tau=5.0 v_values=0,1,5
    [datum]       kind* + recipe parameters (amplitude, width_x, width_y,
                  center_x, center_y, seed, kmin, kmax, xi0, eta0, sigma_xi,
                  sigma_eta, x1, gamma, smooth_delta, k_index)
    [wrap]        threshold=1e-10 axes=xy   (axes in {xy, x, y, none})
    [decay]       j=0 p=inf mode=sharp t_min=1.0 t_max=100.0 num_times=12
    [kato]        r=1.0 radius=5.0 operators=Dhalf:J,Dhalf:Dx
    [commutator]  a* b=0.0 n=0 grid_ns=256,512,1024 box=40.0
                  h_profile=gaussian:3 iters=200
    [inequality]  kind* s=1.0 p=2 trials=100 grid_n=256 box=20.0 l=1 m=0
    [output]      dir=""
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .commutators import INEQUALITY_KINDS
from .datum import DATUM_KINDS, DatumRecipe
from .diagnostics import KATO_FAMILIES, KATO_SMOOTHERS
from .grid import GridError, make_grid

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "SolverParams",
    "WindowParams",
    "parse_config",
    "load_config",
    "s_alpha",
    "EXPERIMENT_KINDS",
]

EXPERIMENT_KINDS = (
    "simulate",
    "propagation",
    "linear-decay",
    "kato",
    "commutator-norms",
    "inequality",
    "cutoff-check",
)


def s_alpha(alpha):
    """Well-posedness threshold (17 - 2*alpha)/12."""
    return (17.0 - 2.0 * alpha) / 12.0


class ConfigError(ValueError):
    """One or more configuration violations; ``violations`` lists them all."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations))


@dataclass(frozen=True)
class SolverParams:
    alpha: float = 0.5
    dt: float = 1e-3
    t_end: float = 1.0
    dealias: bool = True
    observer_stride: int = 10
    blowup_factor: float = 1e8


@dataclass(frozen=True)
class WindowParams:
    x0: float = 0.0
    eps: float = 1.0
    b: float = 5.0
    tau: float = 5.0
    v_values: tuple = (0.0, 1.0, 5.0)


@dataclass(frozen=True)
class WrapParams:
    threshold: float = 1e-10
    axes: str = "xy"


@dataclass(frozen=True)
class DecayParams:
    j: int = 0
    p: float = np.inf
    mode: str = "sharp"
    t_min: float = 1.0
    t_max: float = 100.0
    num_times: int = 12


@dataclass(frozen=True)
class KatoParams:
    r: float = 1.0
    radius: float = 5.0
    operators: tuple = ("Dhalf:J", "Dhalf:Dx")


@dataclass(frozen=True)
class CommutatorParams:
    a: float = 2.0
    b: float = 0.0
    n: int = 0
    grid_ns: tuple = (256, 512, 1024)
    box: float = 40.0
    h_profile: str = "gaussian:3"
    iters: int = 200


@dataclass(frozen=True)
class InequalityParams:
    kind: str = "kato_ponce"
    s: float = 1.0
    p: float = 2.0
    trials: int = 100
    grid_n: int = 256
    box: float = 20.0
    l: float = 1.0
    m: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    title: str = ""
    grid: object = None
    solver: SolverParams = SolverParams()
    regularity_s: float = 2.0
    window: WindowParams = None
    datum: DatumRecipe = None
    wrap: WrapParams = WrapParams()
    decay: DecayParams = None
    kato: KatoParams = None
    commutator: CommutatorParams = None
    inequality: InequalityParams = None
    output_dir: str = ""
    raw_text: str = ""

    @property
    def s_alpha(self):
        return s_alpha(self.solver.alpha)


_DATUM_KEYS = {
    "kind": str,
    "amplitude": float,
    "width_x": float,
    "width_y": float,
    "center_x": float,
    "center_y": float,
    "seed": int,
    "kmin": int,
    "kmax": int,
    "xi0": float,
    "eta0": float,
    "sigma_xi": float,
    "sigma_eta": float,
    "xi_lo": float,
    "xi_hi": float,
    "eta_lo": float,
    "eta_hi": float,
    "ramp": float,
    "x1": float,
    "gamma": float,
    "smooth_delta": float,
    "profile": str,
    "k_index": int,
}

_SCHEMA = {
    "experiment": {"kind": str, "seed": int, "title": str},
    "grid": {"nx": int, "ny": int, "lx": float, "ly": float},
    "solver": {
        "alpha": float,
        "dt": float,
        "t_end": float,
        "dealias": bool,
        "observer_stride": int,
        "blowup_factor": float,
    },
    "regularity": {"s": float},
    "window": {"x0": float, "eps": float, "b": float, "tau": float, "v_values": "floats"},
    "datum": _DATUM_KEYS,
    "wrap": {"threshold": float, "axes": str},
    "decay": {"j": int, "p": "pvalue", "mode": str, "t_min": float, "t_max": float, "num_times": int},
    "kato": {"r": float, "radius": float, "operators": "strings"},
    "commutator": {
        "a": float,
        "b": float,
        "n": int,
        "grid_ns": "ints",
        "box": float,
        "h_profile": str,
        "iters": int,
    },
    "inequality": {
        "kind": str,
        "s": float,
        "p": "pvalue",
        "trials": int,
        "grid_n": int,
        "box": float,
        "l": float,
        "m": int,
    },
    "output": {"dir": str},
}

_BOOL_STRINGS = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def _convert(kind_spec, raw, path, violations):
    raw = raw.strip()
    try:
        if kind_spec is str:
            return raw
        if kind_spec is int:
            return int(raw)
        if kind_spec is float:
            return float(raw)
        if kind_spec is bool:
            if raw.lower() not in _BOOL_STRINGS:
                raise ValueError(f"expected a boolean, got {raw!r}")
            return _BOOL_STRINGS[raw.lower()]
        if kind_spec == "pvalue":
            return np.inf if raw.lower() in ("inf", "infinity") else float(raw)
        if kind_spec == "floats":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        if kind_spec == "ints":
            return tuple(int(tok) for tok in raw.split(",") if tok.strip())
        if kind_spec == "strings":
            return tuple(tok.strip() for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        violations.append(f"{path}: {exc}")
        return None
    raise AssertionError(f"unknown schema type {kind_spec!r}")


def parse_config(text):
    """Parse and validate a config; raises ConfigError listing every violation."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc

    violations = []
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            violations.append(f"{section}: unknown section")
            continue
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                violations.append(f"{section}.{key}: unknown key")
                continue
            converted = _convert(_SCHEMA[section][key], raw, f"{section}.{key}", violations)
            if converted is not None:
                values[section][key] = converted

    def section(name):
        return values.get(name, {})

    kind = section("experiment").get("kind")
    if kind is None:
        violations.append("experiment.kind: required")
    elif kind not in EXPERIMENT_KINDS:
        violations.append(f"experiment.kind: unknown kind {kind!r}; expected one of {EXPERIMENT_KINDS}")

    solver = SolverParams(**section("solver"))
    if not 0.0 <= solver.alpha <= 1.0:
        violations.append(f"solver.alpha: must lie in [0, 1], got {solver.alpha}")
    if solver.dt <= 0:
        violations.append(f"solver.dt: must be positive, got {solver.dt}")
    if solver.t_end < 0:
        violations.append(f"solver.t_end: must be nonnegative, got {solver.t_end}")
    if solver.observer_stride < 1:
        violations.append(f"solver.observer_stride: must be >= 1, got {solver.observer_stride}")

    grid = None
    if "grid" in values:
        g = section("grid")
        missing = [k for k in ("nx", "ny", "lx", "ly") if k not in g]
        if missing:
            violations.append(f"grid: missing keys {missing}")
        else:
            try:
                grid = make_grid(g["nx"], g["ny"], g["lx"], g["ly"])
            except GridError as exc:
                violations.append(f"grid: {exc}")

    window = None
    if "window" in values:
        window = WindowParams(**section("window"))
        if window.eps <= 0:
            violations.append(f"window.eps: must be positive, got {window.eps}")
        elif window.b < 5.0 * window.eps:
            violations.append(f"window.b: must satisfy b >= 5*eps, got b={window.b}, eps={window.eps}")
        if window.eps > 0 and window.tau < 5.0 * window.eps:
            violations.append(
                f"window.tau: must satisfy tau >= 5*eps (channel hypothesis), "
                f"got tau={window.tau}, eps={window.eps}"
            )
        if any(v < 0 for v in window.v_values):
            violations.append(f"window.v_values: speeds must be >= 0, got {window.v_values}")
        if not window.v_values:
            violations.append("window.v_values: at least one speed required")

    datum = None
    if "datum" in values:
        d = dict(section("datum"))
        dkind = d.pop("kind", None)
        if dkind is None:
            violations.append("datum.kind: required")
        elif dkind not in DATUM_KINDS:
            violations.append(f"datum.kind: unknown kind {dkind!r}; expected one of {DATUM_KINDS}")
        else:
            datum = DatumRecipe(dkind, d)
            if dkind == "one_sided" and d.get("gamma", 1.2) <= 0:
                violations.append(f"datum.gamma: must be positive, got {d.get('gamma')}")

    regularity_s = section("regularity").get("s", 2.0)

    wrap = WrapParams(**section("wrap"))
    if wrap.axes not in ("xy", "x", "y", "none"):
        violations.append(f"wrap.axes: must be one of xy, x, y, none; got {wrap.axes!r}")
    if wrap.threshold <= 0:
        violations.append(f"wrap.threshold: must be positive, got {wrap.threshold}")

    decay = DecayParams(**section("decay")) if "decay" in values else None
    if decay is not None:
        if decay.mode not in ("sharp", "rough"):
            violations.append(f"decay.mode: must be 'sharp' or 'rough', got {decay.mode!r}")
        if decay.p != np.inf and decay.p < 2:
            violations.append(f"decay.p: must be >= 2 or inf, got {decay.p}")
        if decay.t_min <= 0 or decay.t_max <= decay.t_min:
            violations.append(f"decay: need 0 < t_min < t_max, got ({decay.t_min}, {decay.t_max})")
        if decay.num_times < 3:
            violations.append(f"decay.num_times: must be >= 3, got {decay.num_times}")

    kato = KatoParams(**section("kato")) if "kato" in values else None
    if kato is not None:
        if kato.r < 0:
            violations.append(f"kato.r: must be >= 0, got {kato.r}")
        if kato.radius <= 0:
            violations.append(f"kato.radius: must be positive, got {kato.radius}")
        for tag in kato.operators:
            smoother, _, family = tag.partition(":")
            if smoother not in KATO_SMOOTHERS or family not in KATO_FAMILIES:
                violations.append(
                    f"kato.operators: bad tag {tag!r}; expected <smoother>:<family> with "
                    f"smoother in {KATO_SMOOTHERS} and family in {KATO_FAMILIES}"
                )

    commutator = CommutatorParams(**section("commutator")) if "commutator" in values else None
    if commutator is not None:
        total = commutator.a + 2.0 * commutator.b
        if commutator.a < 1:
            violations.append(f"commutator.a: must be >= 1, got {commutator.a}")
        if not (2 * commutator.n + 1 <= total <= 2 * commutator.n + 3):
            violations.append(
                f"commutator: (a, b, n) must satisfy 2n+1 <= a+2b <= 2n+3, got a+2b={total:g}"
            )

    inequality = InequalityParams(**section("inequality")) if "inequality" in values else None
    if inequality is not None:
        if inequality.kind not in INEQUALITY_KINDS:
            violations.append(
                f"inequality.kind: unknown kind {inequality.kind!r}; expected one of {INEQUALITY_KINDS}"
            )
        if inequality.trials < 10:
            violations.append(f"inequality.trials: must be >= 10, got {inequality.trials}")

    # kind-specific requirements
    needs_grid = {"simulate", "propagation", "linear-decay", "kato"}
    if kind in needs_grid and grid is None and "grid" not in values:
        violations.append(f"grid: section required for kind {kind!r}")
    if kind in needs_grid and datum is None and "datum" not in values:
        violations.append(f"datum: section required for kind {kind!r}")
    if kind == "propagation":
        if window is None:
            window = WindowParams()
        if regularity_s <= s_alpha(solver.alpha):
            violations.append(
                f"regularity.s: propagation requires s > s_alpha = {s_alpha(solver.alpha):.6g}, "
                f"got s={regularity_s}"
            )
        if datum is not None and datum.kind == "one_sided":
            x1 = float(datum.get("x1", -5.0))
            if x1 >= window.x0:
                violations.append(
                    f"datum.x1: the reduced-regularity point must lie strictly left of "
                    f"window.x0, got x1={x1}, x0={window.x0}"
                )
    if kind in ("propagation", "kato") and solver.t_end > 0:
        if solver.dt * solver.observer_stride > 0.01 * solver.t_end + 1e-12:
            violations.append(
                "solver.observer_stride: time-integrated smoothing requires "
                f"dt*stride <= 0.01*t_end, got {solver.dt * solver.observer_stride:g} "
                f"vs {0.01 * solver.t_end:g}"
            )
    if kind == "linear-decay" and decay is None:
        decay = DecayParams()
    if kind == "kato" and kato is None:
        kato = KatoParams()
    if kind == "commutator-norms" and commutator is None:
        commutator = CommutatorParams()
    if kind == "inequality" and inequality is None:
        violations.append("inequality: section required for kind 'inequality'")
    if kind == "cutoff-check" and window is None:
        window = WindowParams()

    if violations:
        raise ConfigError(violations)

    return ExperimentConfig(
        kind=kind,
        seed=section("experiment").get("seed", 0),
        title=section("experiment").get("title", ""),
        grid=grid,
        solver=solver,
        regularity_s=regularity_s,
        window=window,
        datum=datum,
        wrap=wrap,
        decay=decay,
        kato=kato,
        commutator=commutator,
        inequality=inequality,
        output_dir=section("output").get("dir", ""),
        raw_text=text,
    )


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
