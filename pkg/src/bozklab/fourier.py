"""Fourier-multiplier operators: fractional derivatives, Bessel potentials,
the x-Hilbert transform, Littlewood-Paley projectors and the exact linear
propagator.

Conventions fixed once for the whole package:

* ``Dx^s`` is the pure ``|xi|^s`` multiplier (the normalizing constant is 1);
  at ``xi = 0`` with ``s > 0`` the symbol evaluates to 0.  Negative-order
  homogeneous multipliers are rejected; smoothing is provided by the Bessel
  family ``J^-s`` only.
* The Hilbert transform uses ``-i*sign(xi)`` with ``sign(0) = 0``, so the
  x-mean is annihilated.
* The propagator multiplies coefficients by ``exp(i*t*(xi*|xi|^(alpha+1)
  + xi*eta^2))``, which is unimodular, hence exactly L2-preserving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field

__all__ = [
    "MultiplierSymbol",
    "BumpProfile",
    "MultiplierError",
    "default_bump",
    "apply_multiplier",
    "hilbert_x",
    "lp_project_x",
    "linear_propagate",
    "bessel_inverse",
    "identity",
    "riesz_x",
    "riesz_y",
    "riesz",
    "bessel",
    "bessel_x",
    "bessel_y",
    "hilbert_symbol",
    "lp_x",
    "propagator",
    "parse_symbol",
    "dispersion_rate",
]


class MultiplierError(ValueError):
    """Symbol undefined or singular on the wavenumber lattice."""


@dataclass(frozen=True)
class MultiplierSymbol:
    """A Fourier multiplier m(xi, eta) with a declared growth order.

    ``evaluator`` must accept broadcastable (xi, eta) arrays and return the
    symbol values.  ``order`` is the growth exponent m in
    ``|m(xi, eta)| <= C (1 + |xi| + |eta|)^order``; the constant C is checked
    to be finite on the lattice at application time.
    """

    label: str
    order: float
    evaluator: object  # callable (xi, eta) -> array

    def on_grid(self, grid):
        """Evaluate on the grid's wavenumber lattice (FFT layout)."""
        xi, eta = grid.wavenumber_mesh()
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.asarray(self.evaluator(xi, eta), dtype=complex)
        m = np.broadcast_to(m, (grid.nx, grid.ny))
        if not np.all(np.isfinite(m)):
            raise MultiplierError(
                f"symbol '{self.label}' is singular/undefined at a lattice point"
            )
        # growth-constant sanity check: C finite on the lattice
        weight = (1.0 + np.abs(xi) + np.abs(eta)) ** self.order
        c = np.max(np.abs(m) / weight)
        if not np.isfinite(c):
            raise MultiplierError(f"symbol '{self.label}' violates its growth order")
        return m


@dataclass(frozen=True)
class BumpProfile:
    """Radial profile rho with rho=1 on |xi|<=1, rho=0 on |xi|>=2, monotone between."""

    evaluator: object  # callable (xi,) -> array in [0, 1]

    def __call__(self, xi):
        return self.evaluator(xi)

    def rho0(self, xi):
        """Annulus profile rho0(xi) = rho(xi) - rho(2*xi), supported на 1/2<=|xi|<=2."""
        return self.evaluator(xi) - self.evaluator(2.0 * xi)


def _default_bump_evaluator(xi):
    r = np.abs(np.asarray(xi, dtype=float)) - 1.0
    out = np.ones_like(r)
    out[r >= 1.0] = 0.0
    mid = (r > 0.0) & (r < 1.0)
    rm = r[mid]
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - rm**2))
    return out


def default_bump():
    """The package default: 1 on |xi|<=1, exp(1 - 1/(1-r^2)) with r=|xi|-1, 0 beyond."""
    return BumpProfile(_default_bump_evaluator)


def apply_multiplier(field, symbol):
    """Multiply the field's coefficients pointwise by the symbol."""
    m = symbol.on_grid(field.grid)
    return Field.from_coeffs(field.grid, m * field.coeffs)


def identity():
    return MultiplierSymbol("I", 0.0, lambda xi, eta: np.ones_like(xi + eta))


def riesz_x(s):
    """Dx^s, the homogeneous x-derivative |xi|^s (s >= 0)."""
    if s < 0:
        raise MultiplierError("negative-order homogeneous multipliers are not allowed; use bessel(-s)")
    return MultiplierSymbol(f"Dx:{s:g}", float(s), lambda xi, eta: np.abs(xi) ** s + 0.0 * eta)


def riesz_y(s):
    if s < 0:
        raise MultiplierError("negative-order homogeneous multipliers are not allowed; use bessel(-s)")
    return MultiplierSymbol(f"Dy:{s:g}", float(s), lambda xi, eta: np.abs(eta) ** s + 0.0 * xi)


def riesz(s):
    """D^s = (xi^2 + eta^2)^(s/2) (s >= 0)."""
    if s < 0:
        raise MultiplierError("negative-order homogeneous multipliers are not allowed; use bessel(-s)")

    def ev(xi, eta):
        r2 = xi**2 + eta**2
        if s == 0:
            return np.ones_like(r2)
        return r2 ** (s / 2.0)

    return MultiplierSymbol(f"D:{s:g}", float(s), ev)


def bessel(s):
    """J^s = (1 + xi^2 + eta^2)^(s/2), any real s."""
    return MultiplierSymbol(f"J:{s:g}", float(s), lambda xi, eta: (1.0 + xi**2 + eta**2) ** (s / 2.0))


def bessel_x(s):
    return MultiplierSymbol(f"Jx:{s:g}", max(float(s), 0.0), lambda xi, eta: (1.0 + xi**2) ** (s / 2.0) + 0.0 * eta)


def bessel_y(s):
    return MultiplierSymbol(f"Jy:{s:g}", max(float(s), 0.0), lambda xi, eta: (1.0 + eta**2) ** (s / 2.0) + 0.0 * xi)


def hilbert_symbol():
    """-i*sign(xi) with sign(0) = 0."""
    return MultiplierSymbol("Hx", 0.0, lambda xi, eta: -1j * np.sign(xi) + 0.0 * eta)


def lp_x(j, bump=None):
    """Littlewood-Paley x-projector P_j^x: multiply by rho0(2^-j * xi)."""
    bump = bump if bump is not None else default_bump()
    scale = 2.0 ** (-float(j))
    return MultiplierSymbol(f"LPx:{j}", 0.0, lambda xi, eta: bump.rho0(scale * xi) + 0.0 * eta)


def propagator(t, alpha):
    """Unimodular symbol of the linear group, exp(i*t*(xi|xi|^(alpha+1) + xi*eta^2))."""
    if not 0.0 <= alpha <= 1.0:
        raise MultiplierError(f"alpha must lie in [0, 1], got {alpha}")
    return MultiplierSymbol(
        f"S:{t:g},{alpha:g}",
        0.0,
        lambda xi, eta: np.exp(1j * t * (xi * np.abs(xi) ** (alpha + 1.0) + xi * eta**2)),
    )


def dispersion_rate(xi, eta, alpha):
    """Phase rate xi|xi|^(alpha+1) + xi*eta^2 of the linear group."""
    return xi * np.abs(xi) ** (alpha + 1.0) + xi * eta**2


def hilbert_x(field):
    """x-Hilbert transform; the x-mean mode is annihilated (sign(0)=0)."""
    return apply_multiplier(field, hilbert_symbol())


def lp_project_x(field, j, bump=None):
    return apply_multiplier(field, lp_x(j, bump))


def linear_propagate(field, t, alpha):
    """Exact solution of the linearized equation after time t."""
    return apply_multiplier(field, propagator(t, alpha))


def bessel_inverse(field, s):
    """J^-s smoothing, s > 0; contracts the L2 norm."""
    if s <= 0:
        raise MultiplierError(f"bessel_inverse requires s > 0, got {s}")
    return apply_multiplier(field, bessel(-s))


_REGISTRY_HELP = "Dx:S, Dy:S, D:S, Jx:S, Jy:S, J:S, Hx, LPx:J, S:T,ALPHA, I"


def parse_symbol(text):
    """Build a registry symbol from a string spec, e.g. 'Jx:1.5' or 'S:2.0,0.5'."""
    name, _, arg = text.strip().partition(":")
    try:
        if name == "Dx":
            return riesz_x(float(arg))
        if name == "Dy":
            return riesz_y(float(arg))
        if name == "D":
            return riesz(float(arg))
        if name == "Jx":
            return bessel_x(float(arg))
        if name == "Jy":
            return bessel_y(float(arg))
        if name == "J":
            return bessel(float(arg))
        if name == "Hx":
            return hilbert_symbol()
        if name == "I":
            return identity()
        if name == "LPx":
            return lp_x(int(arg))
        if name == "S":
            t_str, alpha_str = arg.split(",")
            return propagator(float(t_str), float(alpha_str))
    except MultiplierError:
        raise
    except Exception as exc:
        raise MultiplierError(f"bad symbol spec {text!r}: {exc}") from exc
    raise MultiplierError(f"unknown symbol {text!r}; expected one of {_REGISTRY_HELP}")
