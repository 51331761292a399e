"""Periodic grid and the real/spectral representation of fields.

The domain is a centered periodic box ``[-lx/2, lx/2) x [-ly/2, ly/2)``
standing in for the plane.  The discrete transform uses the unitary-in-L2
convention

    coeffs = fft2(values) * sqrt(lx*ly) / (nx*ny),

so that ``sum |values|^2 dx dy == sum |coeffs|^2`` (Parseval at grid level).
All Fourier-multiplier symbols in the package are defined against this
convention; multipliers act diagonally on ``coeffs``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "GridError",
    "FieldError",
    "make_grid",
    "to_spectral",
    "to_physical",
    "field_norms",
    "parseval_gap",
    "save_field",
    "load_field",
]

_HEADER_MAGIC = b"BOZKFLD1"
_HEADER_FMT = "<qqddd"  # nx, ny, lx, ly, timestamp


class GridError(ValueError):
    """Invalid grid construction parameters."""


class FieldError(ValueError):
    """Malformed field data."""


@dataclass(frozen=True)
class Grid:
    """Discretization of a periodic box with its wavenumber lattice.

    Wavenumbers follow the FFT ordering, ``xi_k = 2*pi*k/lx`` for
    ``k in {-nx/2, ..., nx/2 - 1}`` and analogously ``eta``.
    """

    nx: int
    ny: int
    lx: float
    ly: float

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def area(self):
        return self.lx * self.ly

    def x(self):
        """Physical x coordinates, centered box [-lx/2, lx/2)."""
        return -0.5 * self.lx + self.dx * np.arange(self.nx)

    def y(self):
        return -0.5 * self.ly + self.dy * np.arange(self.ny)

    def xi(self):
        """x-wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    def eta(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)

    def wavenumber_mesh(self):
        """(xi, eta) broadcastable over coefficient arrays."""
        return self.xi()[:, None], self.eta()[None, :]

    def index_mesh(self):
        """Integer mode indices (k, l) broadcastable over coefficients."""
        kx = np.rint(np.fft.fftfreq(self.nx) * self.nx).astype(int)
        ky = np.rint(np.fft.fftfreq(self.ny) * self.ny).astype(int)
        return kx[:, None], ky[None, :]


def make_grid(nx, ny, lx, ly):
    """Build a grid, rejecting odd or undersized dimensions."""
    for name, n in (("nx", nx), ("ny", ny)):
        if int(n) != n or n < 8:
            raise GridError(f"{name} must be an even integer >= 8, got {n!r}")
        if n % 2 != 0:
            raise GridError(f"{name} must be even, got {n}")
    for name, l in (("lx", lx), ("ly", ly)):
        if not np.isfinite(l) or l <= 0:
            raise GridError(f"{name} must be positive, got {l!r}")
    return Grid(int(nx), int(ny), float(lx), float(ly))


def _forward(grid, values):
    return np.fft.fft2(values) * (np.sqrt(grid.area) / (grid.nx * grid.ny))


def _inverse(grid, coeffs):
    return np.fft.ifft2(coeffs) * ((grid.nx * grid.ny) / np.sqrt(grid.area))


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Field:
    """Real samples on a grid together with their Fourier coefficients.

    Immutable; both views are kept consistent at construction.  Use the
    ``from_values``/``from_coeffs`` constructors.
    """

    grid: Grid
    values: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def from_values(cls, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.nx, grid.ny):
            raise FieldError(
                f"values shape {values.shape} does not match grid ({grid.nx}, {grid.ny})"
            )
        coeffs = _forward(grid, values)
        return cls(grid, _freeze(values), _freeze(coeffs))

    @classmethod
    def from_coeffs(cls, grid, coeffs, imag_tol=None):
        """Build from coefficients; values are the real part of the inverse.

        Fields are real by contract, so callers must supply (numerically)
        Hermitian-symmetric coefficients; pass ``imag_tol`` to enforce that
        strictly (meaningless for roundoff-level fields, hence opt-in).
        """
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (grid.nx, grid.ny):
            raise FieldError(
                f"coeffs shape {coeffs.shape} does not match grid ({grid.nx}, {grid.ny})"
            )
        z = _inverse(grid, coeffs)
        scale = np.max(np.abs(z))
        if imag_tol is not None and scale > 0 and np.max(np.abs(z.imag)) > imag_tol * scale:
            raise FieldError(
                "coefficients are not Hermitian-symmetric: "
                f"imaginary part {np.max(np.abs(z.imag)) / scale:.3e} of field scale"
            )
        return cls(grid, _freeze(z.real), _freeze(coeffs))

    def l2(self):
        """Quadrature L2 norm, sqrt(sum |u|^2 dx dy)."""
        return float(np.sqrt(np.sum(self.values**2) * self.grid.cell_area))

    def linf(self):
        return float(np.max(np.abs(self.values)))


def to_spectral(field):
    """Rebuild the field from its spectral view (coeffs are authoritative)."""
    return Field.from_coeffs(field.grid, field.coeffs)


def to_physical(field):
    """Rebuild the field from its physical view (values are authoritative)."""
    return Field.from_values(field.grid, field.values)


def field_norms(field):
    """(l2, linf) quadrature norms of a field."""
    return field.l2(), field.linf()


def parseval_gap(field):
    """Relative mismatch between physical and spectral quadratic sums."""
    phys = np.sum(field.values**2) * field.grid.cell_area
    spec = np.sum(np.abs(field.coeffs) ** 2)
    denom = max(phys, spec, 1e-300)
    return abs(phys - spec) / denom


def save_field(field, path, timestamp=0.0, extra_meta=None):
    """Write a field to a flat binary file plus a JSON sidecar.

    Layout: 8-byte magic, packed header (nx, ny, lx, ly, timestamp), then
    the row-major float64 values.  Reload is bit-exact.
    """
    path = str(path)
    g = field.grid
    header = _HEADER_MAGIC + struct.pack(_HEADER_FMT, g.nx, g.ny, g.lx, g.ly, float(timestamp))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    meta = {
        "format": "bozklab-field-v1",
        "nx": g.nx,
        "ny": g.ny,
        "lx": g.lx,
        "ly": g.ly,
        "timestamp": float(timestamp),
    }
    if extra_meta:
        meta.update(extra_meta)
    with open(path + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_field(path):
    """Read a field written by :func:`save_field`; returns (field, timestamp)."""
    path = str(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(_HEADER_MAGIC))
        if magic != _HEADER_MAGIC:
            raise FieldError(f"{path}: not a field file (bad magic {magic!r})")
        nx, ny, lx, ly, timestamp = struct.unpack(_HEADER_FMT, fh.read(struct.calcsize(_HEADER_FMT)))
        raw = fh.read(8 * nx * ny)
    values = np.frombuffer(raw, dtype="<f8").reshape(nx, ny).copy()
    grid = make_grid(nx, ny, lx, ly)
    return Field.from_values(grid, values), timestamp
