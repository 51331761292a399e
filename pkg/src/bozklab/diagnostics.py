"""Diagnostic functionals: conserved quantities, half-space and windowed
Sobolev norms, channel-smoothing and Kato-smoothing integrands, linear
decay-rate fits, and the time-stamped series container they are collected in.

Quadrature conventions: integrals are grid sums times the cell area; L^p
norms use the grid max for p = infinity.  Half-space integrals use the sharp
indicator on grid points (smooth-window versions are available separately
via :func:`windowed_norm`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .cutoffs import eval_shifted
from .grid import Field

__all__ = [
    "DiagnosticRecord",
    "DiagnosticSeries",
    "DiagnosticsError",
    "DecayFit",
    "conserved_quantities",
    "half_space_norm",
    "windowed_norm",
    "channel_smoothing_increment",
    "kato_quantities",
    "decay_fit",
    "lp_norm_2d",
    "wrap_fractions",
    "KATO_SMOOTHERS",
    "KATO_FAMILIES",
    "observe_conserved",
    "observe_norms",
    "observe_wrap",
    "observe_half_space",
    "observe_windowed",
    "observe_channel",
    "observe_kato",
]


class DiagnosticsError(ValueError):
    """Invalid diagnostic request."""


@dataclass(frozen=True)
class DiagnosticRecord:
    """One time stamp worth of labelled diagnostic values."""

    t: float
    entries: dict

    def __post_init__(self):
        for label, value in self.entries.items():
            if not np.isfinite(value):
                raise DiagnosticsError(f"non-finite diagnostic {label!r} = {value!r} at t={self.t}")


@dataclass
class DiagnosticSeries:
    """Time-ordered diagnostic records plus run metadata.

    CSV layout: comment lines carrying the metadata, then one header row
    (``t`` followed by the sorted labels) and one row per record.  Floats
    are written with ``repr`` so identical runs produce identical bytes.
    """

    records: list = dataclass_field(default_factory=list)
    meta: dict = dataclass_field(default_factory=dict)

    def add(self, record):
        if self.records and record.t <= self.records[-1].t:
            raise DiagnosticsError(
                f"records must be strictly increasing in t: {record.t} after {self.records[-1].t}"
            )
        self.records.append(record)

    def labels(self):
        seen = {}
        for rec in self.records:
            for label in rec.entries:
                seen[label] = True
        return sorted(seen)

    def times(self):
        return np.array([rec.t for rec in self.records])

    def column(self, label):
        return np.array([rec.entries[label] for rec in self.records])

    def trapezoid(self, label):
        """Trapezoid-rule time integral of one labelled column."""
        if len(self.records) < 2:
            return 0.0
        return float(np.trapezoid(self.column(label), self.times()))

    def to_csv(self, path):
        labels = self.labels()
        lines = ["# bozklab-series-v1"]
        if self.meta:
            lines.append("# meta: " + json.dumps(self.meta, sort_keys=True))
        lines.append(",".join(["t"] + labels))
        for rec in self.records:
            row = [repr(float(rec.t))]
            row += [repr(float(rec.entries[label])) for label in labels]
            lines.append(",".join(row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        return str(path)

    def to_json(self, path):
        payload = {
            "format": "bozklab-series-v1",
            "meta": self.meta,
            "records": [{"t": rec.t, "entries": rec.entries} for rec in self.records],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return str(path)


# ---------------------------------------------------------------------------
# pointwise helpers

def _jx_coeffs(field, s):
    xi = field.grid.xi()[:, None]
    return (1.0 + xi**2) ** (s / 2.0) * field.coeffs


def _values_of(field, coeffs):
    g = field.grid
    return np.fft.ifft2(coeffs).real * ((g.nx * g.ny) / np.sqrt(g.area))


def lp_norm_2d(field, p):
    """Grid L^p norm of the field values; p = inf uses the grid max."""
    a = np.abs(field.values)
    if p == np.inf or p == "inf":
        return float(a.max())
    p = float(p)
    if p < 1:
        raise DiagnosticsError(f"p must be >= 1 or inf, got {p}")
    return float((np.sum(a**p) * field.grid.cell_area) ** (1.0 / p))


def wrap_fractions(field):
    """Fraction of the L2 mass within lx/8 (ly/8) of the periodic seam."""
    g = field.grid
    u2 = field.values**2
    total = float(u2.sum())
    if total == 0.0:
        return 0.0, 0.0
    x = np.abs(g.x())
    y = np.abs(g.y())
    fx = float(u2[x > 3.0 * g.lx / 8.0, :].sum() / total)
    fy = float(u2[:, y > 3.0 * g.ly / 8.0].sum() / total)
    return fx, fy


# ---------------------------------------------------------------------------
# functionals

def conserved_quantities(field, alpha):
    """(I, M, E): integral, mass and energy of the field.

    E = 1/2 int |Dx^((alpha+1)/2) u|^2 + |u_y|^2 - u^3/3; the derivative
    terms are summed spectrally (exact Parseval in the package convention).
    """
    g = field.grid
    area = g.cell_area
    i_val = float(np.sum(field.values) * area)
    m_val = float(np.sum(field.values**2) * area)
    xi = g.xi()[:, None]
    eta = g.eta()[None, :]
    c2 = np.abs(field.coeffs) ** 2
    grad_part = float(np.sum((np.abs(xi) ** (alpha + 1.0) + eta**2) * c2))
    cubic = float(np.sum(field.values**3) * area)
    return i_val, m_val, 0.5 * (grad_part - cubic / 3.0)


def half_space_norm(field, s, x0):
    """int_{x >= x0} (Jx^s u)^2 dx dy with the sharp indicator."""
    if s < 0:
        raise DiagnosticsError(f"s must be >= 0, got {s}")
    w = _values_of(field, _jx_coeffs(field, s))
    mask = field.grid.x() >= x0
    return float(np.sum(w[mask, :] ** 2) * field.grid.cell_area)


def windowed_norm(field, s, family, v, t):
    """int (Jx^s u)^2 chi^2(x + v t) dx dy."""
    if s < 0:
        raise DiagnosticsError(f"s must be >= 0, got {s}")
    w = _values_of(field, _jx_coeffs(field, s))
    chi2 = eval_shifted(family, "chi", field.grid.x(), v, t) ** 2
    return float(np.sum(w**2 * chi2[:, None]) * field.grid.cell_area)


def channel_smoothing_increment(field, s, alpha, family, v, t):
    """The two chi*chi'-weighted smoothing integrands at one time.

    Returns (dx_part, dy_part) =
    (int (Dx^((alpha+1)/2) Jx^s u)^2 w, int (d_y Jx^s u)^2 w) with
    w = chi(x+vt) chi'(x+vt); the caller integrates in time by trapezoid.
    """
    if s < 0:
        raise DiagnosticsError(f"s must be >= 0, got {s}")
    g = field.grid
    x = g.x()
    w = eval_shifted(family, "chi", x, v, t) * eval_shifted(family, "chi_prime", x, v, t)
    jx = _jx_coeffs(field, s)
    xi = g.xi()[:, None]
    eta = g.eta()[None, :]
    dx_vals = _values_of(field, np.abs(xi) ** ((alpha + 1.0) / 2.0) * jx)
    dy_vals = _values_of(field, 1j * eta * jx)
    area = g.cell_area
    dx_part = float(np.sum(dx_vals**2 * w[:, None]) * area)
    dy_part = float(np.sum(dy_vals**2 * w[:, None]) * area)
    return dx_part, dy_part


KATO_SMOOTHERS = ("Dhalf", "HDhalf", "dy")
KATO_FAMILIES = ("J", "Jx", "Jy", "D", "Dx", "Dy")


def _family_weights(grid, family, r):
    xi = grid.xi()[:, None]
    eta = grid.eta()[None, :]
    if r == 0:
        return np.ones((grid.nx, grid.ny))
    if family == "J":
        return (1.0 + xi**2 + eta**2) ** (r / 2.0)
    if family == "Jx":
        return (1.0 + xi**2) ** (r / 2.0) + 0.0 * eta
    if family == "Jy":
        return (1.0 + eta**2) ** (r / 2.0) + 0.0 * xi
    if family == "D":
        return (xi**2 + eta**2) ** (r / 2.0)
    if family == "Dx":
        return np.abs(xi) ** r + 0.0 * eta
    if family == "Dy":
        return np.abs(eta) ** r + 0.0 * xi
    raise DiagnosticsError(f"unknown operator family {family!r}; expected one of {KATO_FAMILIES}")


def kato_quantities(field, r, alpha, radius, operator_tag):
    """Squared local-smoothing quantity over the strip |x| < radius.

    ``operator_tag`` is "<smoother>:<family>" with smoother one of
    Dhalf (Dx^((alpha+1)/2)), HDhalf (Hx Dx^((alpha+1)/2)) or dy, and
    family selecting A^r among J, Jx, Jy, D, Dx, Dy.
    """
    if r < 0:
        raise DiagnosticsError(f"r must be >= 0, got {r}")
    if radius <= 0:
        raise DiagnosticsError(f"radius must be positive, got {radius}")
    smoother, _, family = str(operator_tag).partition(":")
    if smoother not in KATO_SMOOTHERS:
        raise DiagnosticsError(f"unknown smoother {smoother!r}; expected one of {KATO_SMOOTHERS}")
    g = field.grid
    coeffs = _family_weights(g, family, r) * field.coeffs
    xi = g.xi()[:, None]
    eta = g.eta()[None, :]
    half = (alpha + 1.0) / 2.0
    if smoother == "Dhalf":
        coeffs = np.abs(xi) ** half * coeffs
    elif smoother == "HDhalf":
        coeffs = (-1j * np.sign(xi)) * np.abs(xi) ** half * coeffs
    else:
        coeffs = 1j * eta * coeffs
    vals = _values_of(field, coeffs)
    mask = np.abs(g.x()) < radius
    return float(np.sum(vals[mask, :] ** 2) * g.cell_area)


@dataclass(frozen=True)
class DecayFit:
    slope: float
    prefactor: float
    target_slope: float
    times: np.ndarray
    norms: np.ndarray


def decay_fit(datum, alpha, j, p, times, mode="sharp", bump=None):
    """Log-log fit of || P_j^x S(t) datum ||_p against t.

    ``mode`` selects the reference exponent only: "sharp" targets
    -(5/6)(1 - 2/p) and "rough" targets -(1/2)(1 - 2/p).  p = 2 is admitted
    as the trivial unitary case (slope 0).
    """
    from .fourier import default_bump, dispersion_rate  # local to avoid cycle

    times = np.asarray(times, dtype=float)
    if times.size < 3 or np.any(times <= 0):
        raise DiagnosticsError("times must be positive and at least 3 values")
    if times.max() / times.min() < 10.0:
        raise DiagnosticsError("times must span at least one decade")
    if p != np.inf and p != "inf" and float(p) < 2:
        raise DiagnosticsError(f"p must be >= 2 or inf, got {p}")
    if mode not in ("sharp", "rough"):
        raise DiagnosticsError(f"mode must be 'sharp' or 'rough', got {mode!r}")
    bump = bump if bump is not None else default_bump()
    g = datum.grid
    xi = g.xi()[:, None]
    eta = g.eta()[None, :]
    proj = bump.rho0(2.0 ** (-float(j)) * xi) + 0.0 * eta
    rate = dispersion_rate(xi, eta, alpha)
    base = proj * datum.coeffs
    norms = np.empty_like(times)
    for i, t in enumerate(times):
        evolved = Field.from_coeffs(g, np.exp(1j * t * rate) * base)
        norms[i] = lp_norm_2d(evolved, p)
    if np.all(norms < 1e-14):
        raise DiagnosticsError("degenerate fit: all projected norms below 1e-14")
    slope, intercept = np.polyfit(np.log(times), np.log(norms), 1)
    frac = 1.0 if (p == np.inf or p == "inf") else 1.0 - 2.0 / float(p)
    target = -(5.0 / 6.0) * frac if mode == "sharp" else -0.5 * frac
    return DecayFit(float(slope), float(np.exp(intercept)), target, times, norms)


# ---------------------------------------------------------------------------
# observers for the simulation loop (callables field, t -> dict)

def observe_conserved(alpha):
    def obs(field, t):
        i_val, m_val, e_val = conserved_quantities(field, alpha)
        return {"I": i_val, "M": m_val, "E": e_val}

    return obs


def observe_norms():
    def obs(field, t):
        return {"l2": field.l2(), "linf": field.linf()}

    return obs


def observe_wrap():
    def obs(field, t):
        fx, fy = wrap_fractions(field)
        return {"wrap_x": fx, "wrap_y": fy}

    return obs


def observe_half_space(s, x0, v=0.0, label=None):
    """Half-space norm with the moving threshold x0 - v*t."""
    label = label or f"hs:s={s:g}:x0={x0:g}:v={v:g}"

    def obs(field, t):
        return {label: half_space_norm(field, s, x0 - v * t)}

    return obs


def observe_windowed(s, family, v, label=None):
    label = label or f"win:s={s:g}:v={v:g}"

    def obs(field, t):
        return {label: windowed_norm(field, s, family, v, t)}

    return obs


def observe_channel(s, alpha, family, v, prefix=None):
    prefix = prefix or f"s={s:g}:v={v:g}"

    def obs(field, t):
        dx_part, dy_part = channel_smoothing_increment(field, s, alpha, family, v, t)
        return {f"ch_dx:{prefix}": dx_part, f"ch_dy:{prefix}": dy_part}

    return obs


def observe_kato(r, alpha, radius, tags):
    tags = tuple(tags)

    def obs(field, t):
        return {
            f"kato:{tag}:r={r:g}:R={radius:g}": kato_quantities(field, r, alpha, radius, tag)
            for tag in tags
        }

    return obs
