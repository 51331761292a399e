"""Weighted cutoff family chi, phi, phi_tilde, psi used by the localized
energy identities, with quantitative lower bounds and two exact partitions
of unity.

Construction
------------
chi rises from 0 to 1 across [eps, b] with a *linear plateau* in the middle:
its derivative is ``p * S((x-eps)/eps)`` on [eps, 2eps], the constant ``p``
on [2eps, b-2eps] and ``p * S((b-x)/(2eps))`` on [b-2eps, b], where S is the
standard exp-based smoothstep.  The plateau makes the lower bounds

    chi'(x) >= 1/(10(b-eps))      on [2eps, b-2eps],
    chi(x)  >= eps/(2(b-3eps))    on (3eps, infinity)

hold with wide margins for every b >= 5 eps (p = 1/(b - 4eps + 3eps*T1) with
T1 = integral of S over [0,1] ~ 1/2, so p > 1/(b-eps) > 1/(10(b-eps)), and
chi(3eps) = p*eps*(T1+1) ~ 1.5 eps/(b-2.5eps)).

psi is a descending smoothstep equal to 1 on (-inf, eps/4] and 0 beyond
eps/2.  phi := 1 - chi - psi and phi_tilde := sqrt(max(0, 1 - chi^2 - psi)),
which makes both partition identities exact by construction.  phi_tilde is
continuous but its smoothness is not asserted (square roots of smooth
nonnegative functions need not be smooth); only support, range and the
identities are claimed, which is all the weighted estimates consume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field

__all__ = [
    "CutoffFamily",
    "CutoffError",
    "PropertyCheck",
    "make_family",
    "eval_shifted",
    "weight_field",
    "check_properties",
    "smoothstep",
]

SELECTORS = ("chi", "chi_prime", "phi", "phi_tilde", "psi")


class CutoffError(ValueError):
    """Invalid parameters or failed post-construction validation."""


def smoothstep(u):
    """C-infinity monotone step: 0 for u<=0, 1 for u>=1."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    out[u <= 0.0] = 0.0
    out[u >= 1.0] = 1.0
    mid = (u > 0.0) & (u < 1.0)
    um = u[mid]
    with np.errstate(over="ignore"):
        e1 = np.exp(-1.0 / um)
        e2 = np.exp(-1.0 / (1.0 - um))
    out[mid] = e1 / (e1 + e2)
    return out


_TABLE_CELLS = 8192
_table_u = None
_table_T = None


def _smoothstep_antiderivative_table():
    """Cumulative integral of the smoothstep on [0, 1], Gauss-Legendre per cell."""
    global _table_u, _table_T
    if _table_u is None:
        nodes, weights = np.polynomial.legendre.leggauss(12)
        edges = np.linspace(0.0, 1.0, _TABLE_CELLS + 1)
        h = edges[1] - edges[0]
        mid = 0.5 * (edges[:-1] + edges[1:])
        pts = mid[:, None] + 0.5 * h * nodes[None, :]
        cell = 0.5 * h * np.sum(smoothstep(pts) * weights[None, :], axis=1)
        _table_u = edges
        _table_T = np.concatenate(([0.0], np.cumsum(cell)))
    return _table_u, _table_T


def _smoothstep_integral(u):
    """T(u) = int_0^u S, evaluated by cubic Hermite interpolation (T' = S)."""
    u = np.asarray(u, dtype=float)
    grid_u, grid_T = _smoothstep_antiderivative_table()
    t1 = grid_T[-1]
    uc = np.clip(u, 0.0, 1.0)
    h = 1.0 / _TABLE_CELLS
    idx = np.minimum((uc / h).astype(int), _TABLE_CELLS - 1)
    s = (uc - grid_u[idx]) / h
    y0 = grid_T[idx]
    y1 = grid_T[idx + 1]
    d0 = smoothstep(grid_u[idx]) * h
    d1 = smoothstep(grid_u[idx + 1]) * h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s**2 * (3 - 2 * s)
    h11 = s**2 * (s - 1)
    out = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
    out = np.where(u <= 0.0, 0.0, np.where(u >= 1.0, t1, out))
    return out


@dataclass(frozen=True)
class CutoffFamily:
    """The cutoff functions for one (eps, b) pair with b >= 5*eps."""

    eps: float
    b: float
    slope: float  # plateau value p of chi'
    t1: float     # integral of the smoothstep over [0, 1]

    def chi(self, x):
        x = np.asarray(x, dtype=float)
        e, b, p = self.eps, self.b, self.slope
        out = np.zeros_like(x)
        out[x >= b] = 1.0
        ramp_lo = (x > e) & (x < 2 * e)
        out[ramp_lo] = p * e * _smoothstep_integral((x[ramp_lo] - e) / e)
        plateau = (x >= 2 * e) & (x <= b - 2 * e)
        out[plateau] = p * e * self.t1 + p * (x[plateau] - 2 * e)
        ramp_hi = (x > b - 2 * e) & (x < b)
        out[ramp_hi] = 1.0 - 2 * p * e * _smoothstep_integral((b - x[ramp_hi]) / (2 * e))
        return out

    def chi_prime(self, x):
        x = np.asarray(x, dtype=float)
        e, b, p = self.eps, self.b, self.slope
        out = np.zeros_like(x)
        ramp_lo = (x > e) & (x < 2 * e)
        out[ramp_lo] = p * smoothstep((x[ramp_lo] - e) / e)
        plateau = (x >= 2 * e) & (x <= b - 2 * e)
        out[plateau] = p
        ramp_hi = (x > b - 2 * e) & (x < b)
        out[ramp_hi] = p * smoothstep((b - x[ramp_hi]) / (2 * e))
        return out

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        e = self.eps
        return smoothstep((0.5 * e - x) / (0.25 * e))

    def phi(self, x):
        return 1.0 - self.chi(x) - self.psi(x)

    def phi_tilde(self, x):
        return np.sqrt(np.clip(1.0 - self.chi(x) ** 2 - self.psi(x), 0.0, None))

    def eval(self, which, x):
        if which not in SELECTORS:
            raise CutoffError(f"unknown selector {which!r}; expected one of {SELECTORS}")
        return getattr(self, which)(x)


def make_family(eps, b, validate=True):
    """Construct the family for eps > 0, b >= 5*eps, validating all properties."""
    if not (np.isfinite(eps) and eps > 0):
        raise CutoffError(f"eps must be positive, got {eps!r}")
    if not (np.isfinite(b) and b >= 5 * eps):
        raise CutoffError(f"b must satisfy b >= 5*eps, got b={b!r}, eps={eps!r}")
    grid_u, grid_T = _smoothstep_antiderivative_table()
    t1 = float(grid_T[-1])
    p = 1.0 / ((b - 4.0 * eps) + 3.0 * eps * t1)
    family = CutoffFamily(float(eps), float(b), p, t1)
    if validate:
        failures = [c for c in check_properties(family) if not c.passed]
        if failures:
            names = ", ".join(f"{c.name} (residual {c.worst:.3e})" for c in failures)
            raise CutoffError(f"cutoff construction failed validation: {names}")
    return family


def eval_shifted(family, which, x, v, t):
    """Evaluate the selected cutoff at the traveling argument x + v*t."""
    if v < 0 or t < 0:
        raise CutoffError(f"need v >= 0 and t >= 0, got v={v}, t={t}")
    return family.eval(which, np.asarray(x, dtype=float) + v * t)


def weight_field(field, family, which, v, t, power=1):
    """Pointwise product with the shifted cutoff^power; the weight is y-independent."""
    if power not in (1, 2):
        raise CutoffError(f"power must be 1 or 2, got {power}")
    w = eval_shifted(family, which, field.grid.x(), v, t) ** power
    return Field.from_values(field.grid, field.values * w[:, None])


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    worst: float
    description: str


def check_properties(family, samples=10_000, tol=1e-10):
    """Dense-sampling verification of all family properties.

    Samples [-b, 2b]; returns one record per property with the worst
    residual observed (0 means exactly satisfied at every sample).
    """
    e, b = family.eps, family.b
    x = np.linspace(-b, 2 * b, samples)
    chi = family.chi(x)
    chip = family.chi_prime(x)
    phi = family.phi(x)
    phit = family.phi_tilde(x)
    psi = family.psi(x)

    checks = []

    def record(name, residual, description):
        residual = float(residual)
        checks.append(PropertyCheck(name, residual <= tol, residual, description))

    record("i_monotone", max(0.0, -chip.min()), "chi' >= 0")
    left = np.abs(chi[x <= e]).max() if np.any(x <= e) else 0.0
    right = np.abs(chi[x >= b] - 1.0).max() if np.any(x >= b) else 0.0
    record("ii_values", max(left, right), "chi = 0 left of eps, 1 right of b")
    core = (x >= 2 * e) & (x <= b - 2 * e)
    bound3 = 1.0 / (10.0 * (b - e))
    record("iii_derivative_lower", max(0.0, (bound3 - chip[core]).max()), "chi' >= 1/(10(b-eps)) on [2eps, b-2eps]")
    tail = x > 3 * e
    bound4 = 0.5 * e / (b - 3 * e)
    record("iv_value_lower", max(0.0, (bound4 - chi[tail]).max()), "chi >= eps/(2(b-3eps)) right of 3eps")
    outside = (x < e) | (x > b)
    record("v_support_chi_prime", np.abs(chip[outside]).max(), "supp(chi') in [eps, b]")
    outside_pf = (x < e / 4) | (x > b)
    record(
        "vi_support_phi",
        max(np.abs(phi[outside_pf]).max(), np.abs(phit[outside_pf]).max()),
        "supp(phi), supp(phi_tilde) in [eps/4, b]",
    )
    plat = (x >= e / 2) & (x <= e)
    record(
        "vii_phi_one",
        max(np.abs(phi[plat] - 1.0).max(), np.abs(phit[plat] - 1.0).max()),
        "phi = phi_tilde = 1 on [eps/2, eps]",
    )
    record("viii_support_psi", np.abs(psi[x > e / 2]).max(), "supp(psi) in (-inf, eps/2]")
    record("ix_partition", np.abs(chi + phi + psi - 1.0).max(), "chi + phi + psi = 1")
    record("ix_partition_sq", np.abs(chi**2 + phit**2 + psi - 1.0).max(), "chi^2 + phi_tilde^2 + psi = 1")
    # support separation used by the weighted estimates
    prod = chi * chip
    psi_support = x[np.abs(psi) > tol]
    prod_support = x[np.abs(prod) > tol]
    if psi_support.size and prod_support.size:
        gap = prod_support.min() - psi_support.max()
        record("separation", max(0.0, e / 2 - gap), "dist(supp(chi*chi'), supp(psi)) >= eps/2")
    else:
        record("separation", 0.0, "dist(supp(chi*chi'), supp(psi)) >= eps/2")
    return checks
