"""Initial-data recipes.

Four named constructors:

* ``gaussian`` - a smooth separable Gaussian bump.
* ``band_limited_random`` - seeded Hermitian white noise restricted to a
  radial band of integer modes; bit-identical across runs for a fixed seed.
* ``wave_packet`` - a modulated Gaussian packet with prescribed carrier
  frequencies (Gaussian spectrum centered at (xi0, eta0)); the reference
  datum for the sharp dispersive-decay fit.
* ``one_sided`` - the reference datum for the propagation experiments: a
  profile whose x-dependence is |x - x1|^gamma to the right of the kink and
  a smooth continuation ((d^2 + delta^2)^(gamma/2) - delta^gamma) to the
  left, times Gaussian envelopes.  The one-sided kink at x1 has Sobolev
  order gamma + 1/2 (minus epsilon): the full-plane Jx^s norm grows without
  bound under grid refinement for s > gamma + 1/2 while half-space norms to
  the right of the kink stay finite.
* ``carrier`` - a single exact x-mode times a Gaussian y-envelope; the
  x-direction is exactly periodic (no box truncation in x), leaving the pure
  Schrodinger-in-y dispersion measured by the rough decay fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .diagnostics import half_space_norm
from .grid import Field, make_grid

__all__ = ["DatumRecipe", "DatumError", "make_datum", "datum_refinement_report", "DATUM_KINDS"]

DATUM_KINDS = ("gaussian", "band_limited_random", "wave_packet", "band_window", "one_sided", "carrier")


class DatumError(ValueError):
    """Invalid datum recipe."""


@dataclass(frozen=True)
class DatumRecipe:
    kind: str
    params: dict = dataclass_field(default_factory=dict)

    def get(self, key, default=None):
        return self.params.get(key, default)


def _gaussian(grid, p):
    amplitude = float(p.get("amplitude", 1.0))
    wx = float(p.get("width_x", 1.0))
    wy = float(p.get("width_y", 1.0))
    cx = float(p.get("center_x", 0.0))
    cy = float(p.get("center_y", 0.0))
    if wx <= 0 or wy <= 0:
        raise DatumError("gaussian widths must be positive")
    x = grid.x()[:, None]
    y = grid.y()[None, :]
    return amplitude * np.exp(-(((x - cx) / wx) ** 2) - ((y - cy) / wy) ** 2)


def _band_limited_random(grid, p):
    seed = int(p.get("seed", 0))
    kmin = int(p.get("kmin", 1))
    kmax = int(p.get("kmax", min(grid.nx, grid.ny) // 4))
    amplitude = float(p.get("amplitude", 1.0))
    if not 0 <= kmin <= kmax:
        raise DatumError(f"need 0 <= kmin <= kmax, got ({kmin}, {kmax})")
    if kmax >= min(grid.nx, grid.ny) // 2:
        raise DatumError(f"kmax = {kmax} exceeds the representable band")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((grid.nx, grid.ny))
    kx, ky = grid.index_mesh()
    radial = np.sqrt(kx.astype(float) ** 2 + ky.astype(float) ** 2)
    mask = (radial >= kmin) & (radial <= kmax)
    spec = np.fft.fft2(noise) * mask
    values = np.fft.ifft2(spec).real
    peak = np.max(np.abs(values))
    if peak == 0.0:
        raise DatumError("empty band produced a zero field")
    return amplitude * values / peak


def _wave_packet(grid, p):
    amplitude = float(p.get("amplitude", 1.0))
    xi0 = float(p.get("xi0", 1.0))
    eta0 = float(p.get("eta0", 1.0))
    sigma_xi = float(p.get("sigma_xi", 0.25))
    sigma_eta = float(p.get("sigma_eta", 0.25))
    cx = float(p.get("center_x", 0.0))
    cy = float(p.get("center_y", 0.0))
    if sigma_xi <= 0 or sigma_eta <= 0:
        raise DatumError("wave_packet spectral widths must be positive")
    x = grid.x()[:, None] - cx
    y = grid.y()[None, :] - cy
    envelope = np.exp(-(x**2) * sigma_xi**2 / 4.0 - y**2 * sigma_eta**2 / 4.0)
    return amplitude * envelope * np.cos(xi0 * x + eta0 * y)


def _one_sided(grid, p):
    x1 = float(p.get("x1", -5.0))
    gamma = float(p.get("gamma", 1.2))
    if gamma <= 0:
        raise DatumError(f"gamma must be positive, got {gamma}")
    amplitude = float(p.get("amplitude", 1.0))
    wx = float(p.get("width_x", 1.0))
    wy = float(p.get("width_y", 1.0))
    cx = float(p.get("center_x", 0.0))
    cy = float(p.get("center_y", 0.0))
    delta = float(p.get("smooth_delta", 0.5))
    profile = str(p.get("profile", "power"))
    if wx <= 0 or wy <= 0 or delta <= 0:
        raise DatumError("widths and smooth_delta must be positive")
    x = grid.x()[:, None]
    y = grid.y()[None, :]
    if profile == "power":
        d = x - x1
        kink = np.where(d >= 0.0, np.abs(d) ** gamma, (d**2 + delta**2) ** (gamma / 2.0) - delta**gamma)
        envelope = np.exp(-(((x - cx) / wx) ** 2)) * np.exp(-(((y - cy) / wy) ** 2))
        return amplitude * kink * envelope
    if profile == "bessel":
        # Bessel-kernel kink: the x-profile has lattice spectrum exactly
        # <xi>^-(gamma+1), i.e. the pure power law the kink's Sobolev order
        # corresponds to, with no transition bump and exponential spatial
        # decay.  Same |x - x1|^gamma singularity at x1; the Jx^s content
        # grows under refinement at the clean rate 2^(2s - 2*gamma - 1).
        xi = grid.xi()
        xs = grid.x()
        shift = np.exp(-1j * xi * (x1 - xs[0]))
        spec = (1.0 + xi**2) ** (-(gamma + 1.0) / 2.0) * shift
        # continuum normalization f(x) = (1/lx) * sum spec * e(ix xi), so the
        # sampled profile converges pointwise under refinement
        fx = np.fft.ifft(spec).real * (grid.nx / grid.lx)
        return amplitude * fx[:, None] * np.exp(-(((y - cy) / wy) ** 2))
    raise DatumError(f"unknown one_sided profile {profile!r}; expected 'power' or 'bessel'")


def _band_window(grid, p):
    """Deterministic band-limited datum: a smooth compactly-supported
    spectral window on the (xi > 0, eta) quarter plus its Hermitian mirror.
    The flat spectral amplitude across the window makes it the natural datum
    for dispersive-decay measurements (kernel-like within the band)."""
    from .cutoffs import smoothstep

    amplitude = float(p.get("amplitude", 1.0))
    xi_lo = float(p.get("xi_lo", 0.4))
    xi_hi = float(p.get("xi_hi", 2.4))
    eta_lo = float(p.get("eta_lo", 0.2))
    eta_hi = float(p.get("eta_hi", 2.8))
    ramp = float(p.get("ramp", 0.3))
    if ramp <= 0 or xi_lo < ramp / 4 or xi_hi <= xi_lo or eta_hi <= eta_lo:
        raise DatumError("band_window needs 0 < ramp, ramp/4 <= xi_lo < xi_hi, eta_lo < eta_hi")
    xi = grid.xi()[:, None]
    eta = grid.eta()[None, :]
    spec = (
        smoothstep((xi - xi_lo) / ramp)
        * smoothstep((xi_hi - xi) / ramp)
        * smoothstep((eta - eta_lo) / ramp)
        * smoothstep((eta_hi - eta) / ramp)
    )
    mirror = np.zeros_like(spec)
    mirror[1:, 1:] = spec[1:, 1:][::-1, ::-1]
    mirror[0, 1:] = spec[0, 1:][::-1]
    mirror[1:, 0] = spec[1:, 0][::-1]
    mirror[0, 0] = spec[0, 0]
    values = np.fft.ifft2(spec + mirror).real  # window is real: mirror needs no conj
    peak = np.max(np.abs(values))
    if peak == 0.0:
        raise DatumError("band_window contains no lattice modes")
    # the inverse transform peaks at grid index 0 (the box corner); roll the
    # packet to the requested center on the lattice
    cx = float(p.get("center_x", 0.0))
    cy = float(p.get("center_y", 0.0))
    ix = int(np.rint((cx - grid.x()[0]) / grid.dx)) % grid.nx
    iy = int(np.rint((cy - grid.y()[0]) / grid.dy)) % grid.ny
    values = np.roll(values, (ix, iy), axis=(0, 1))
    return amplitude * values / peak


def _carrier(grid, p):
    k_index = int(p.get("k_index", 1))
    amplitude = float(p.get("amplitude", 1.0))
    wy = float(p.get("width_y", 1.0))
    cy = float(p.get("center_y", 0.0))
    if not 1 <= k_index < grid.nx // 2:
        raise DatumError(f"k_index must lie in [1, nx/2), got {k_index}")
    if wy <= 0:
        raise DatumError("width_y must be positive")
    x = grid.x()[:, None]
    y = grid.y()[None, :]
    return amplitude * np.cos(2.0 * np.pi * k_index * x / grid.lx) * np.exp(-(((y - cy) / wy) ** 2))


_BUILDERS = {
    "gaussian": _gaussian,
    "band_limited_random": _band_limited_random,
    "wave_packet": _wave_packet,
    "band_window": _band_window,
    "one_sided": _one_sided,
    "carrier": _carrier,
}


def make_datum(recipe, grid):
    """Materialize a recipe on a grid."""
    if recipe.kind not in _BUILDERS:
        raise DatumError(f"unknown datum kind {recipe.kind!r}; expected one of {DATUM_KINDS}")
    values = _BUILDERS[recipe.kind](grid, dict(recipe.params))
    if not np.all(np.isfinite(values)):
        raise DatumError(f"datum {recipe.kind!r} produced non-finite values")
    return Field.from_values(grid, values)


def datum_refinement_report(recipe, grid, s, x0):
    """Measured resolution-growth of the Jx^s content on each half-space.

    Builds the datum on the grid and on its 2x refinement and reports the
    full-plane and right-half-space squared Jx^s norms plus their growth
    ratios.  Recorded in run manifests for the one-sided reference datum.
    """
    fine = make_grid(2 * grid.nx, 2 * grid.ny, grid.lx, grid.ly)
    u_coarse = make_datum(recipe, grid)
    u_fine = make_datum(recipe, fine)
    full_c = half_space_norm(u_coarse, s, -np.inf)
    full_f = half_space_norm(u_fine, s, -np.inf)
    right_c = half_space_norm(u_coarse, s, x0)
    right_f = half_space_norm(u_fine, s, x0)
    return {
        "s": float(s),
        "x0": float(x0),
        "full_plane_sq": {"coarse": full_c, "fine": full_f, "growth": full_f / max(full_c, 1e-300)},
        "right_half_sq": {"coarse": right_c, "fine": right_f, "growth": right_f / max(right_c, 1e-300)},
    }
