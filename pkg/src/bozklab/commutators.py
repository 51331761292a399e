"""Commutator laboratory: the Ginibre-Velo sandwich expansion of
``[H Dx^a, h]`` as dense one-dimensional grid operators, power-iteration
operator norms, and randomized harnesses for the commutator / fractional
Leibniz inequalities and the support-separation localization bounds.

All operators here act in one spatial variable.  Dense matrices are used
throughout (norms and symmetry checks are the point; O(n^2) storage is fine
at desk scale, capped at n = 4096).

Sign conventions: ``H = -Hx`` has symbol ``+i*sign(xi)``, so ``H Dx`` is
exactly ``d/dx``.  The expansion reads

    [H Dx^a, h] = (1/2) (P_n(a) - H P_n(a) H) + R_n(a),
    P_n(a) = a * sum_j c_{2j+1} (-1)^j Dx^(mu-j) h^(2j+1) Dx^(mu-j),

with ``a = 2*mu + 1``, ``h^(2j+1)`` the odd derivatives of the multiplier
function h (computed spectrally; profiles must be periodic-smooth on the
box), and ``c_1 = 1``, ``c_{2j+1} = (1/(2j+1)!) prod_{k<=j} (a^2-(2k+1)^2)``.

The dense operators are restricted to the resolved band |k| <= n//3 on both
sides.  Multiplication by h on the lattice is a mod-n convolution, so the
raw physical-space matrices couple the two Nyquist ends of the spectrum
through O(1) weights ``hat(h)(small)`` while the symbol difference there is
O(Nyquist^a); that seam coupling is a discretization artifact (absent on the
line) growing like n^a, and band projection removes it.  Projected
operators are resolution-consistent: the 2n-grid build restricted to
n-grid band-limited inputs matches the n-grid build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cutoffs import smoothstep

__all__ = [
    "Grid1D",
    "GVExpansion",
    "CommutatorLabError",
    "OperatorNormResult",
    "RemainderBound",
    "InequalitySweep",
    "LocalizationResult",
    "make_grid1d",
    "gv_coefficients",
    "make_gv_expansion",
    "build_pn",
    "build_rn",
    "multiplier_matrix",
    "operator_norm",
    "weighted_fourier_l1",
    "verify_remainder_bound",
    "random_band_field",
    "smooth_window",
    "apply_symbol_1d",
    "lp_norm_1d",
    "inequality_ratio",
    "localization_check",
    "INEQUALITY_KINDS",
]

MAX_DENSE_N = 4096


class CommutatorLabError(ValueError):
    """Invalid parameters for the commutator laboratory."""


@dataclass(frozen=True)
class Grid1D:
    """One-dimensional periodic grid, centered box [-l/2, l/2)."""

    n: int
    l: float

    @property
    def dx(self):
        return self.l / self.n

    def x(self):
        return -0.5 * self.l + self.dx * np.arange(self.n)

    def xi(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


def make_grid1d(n, l):
    if int(n) != n or n < 8 or n % 2 != 0:
        raise CommutatorLabError(f"n must be an even integer >= 8, got {n!r}")
    if n > MAX_DENSE_N:
        raise CommutatorLabError(f"dense operators are capped at n <= {MAX_DENSE_N}, got {n}")
    if not np.isfinite(l) or l <= 0:
        raise CommutatorLabError(f"l must be positive, got {l!r}")
    return Grid1D(int(n), float(l))


# ---------------------------------------------------------------------------
# spectral helpers (1D)

def apply_symbol_1d(grid, values, symbol):
    """Apply a Fourier multiplier; ``symbol`` maps xi-array to symbol values."""
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.asarray(symbol(grid.xi()), dtype=complex)
    if not np.all(np.isfinite(m)):
        raise CommutatorLabError("multiplier is singular on the lattice")
    return np.fft.ifft(m * np.fft.fft(values)).real


def derivative_1d(grid, values, order=1):
    """Spectral derivative of integer order."""
    return apply_symbol_1d(grid, values, lambda xi: (1j * xi) ** order)


def bessel_1d(grid, values, s):
    return apply_symbol_1d(grid, values, lambda xi: (1.0 + xi**2) ** (s / 2.0))


def riesz_1d(grid, values, s):
    if s < 0:
        raise CommutatorLabError("negative homogeneous orders are not allowed on the lattice")
    return apply_symbol_1d(grid, values, lambda xi: np.abs(xi) ** s)


def hilbert_1d(grid, values):
    """The x-Hilbert transform Hx with symbol -i*sign(xi)."""
    return apply_symbol_1d(grid, values, lambda xi: -1j * np.sign(xi))


def lp_norm_1d(grid, values, p):
    """Grid L^p norm; p = inf uses the grid max."""
    a = np.abs(np.asarray(values, dtype=float))
    if p == np.inf or p == "inf":
        return float(a.max())
    p = float(p)
    if p < 1:
        raise CommutatorLabError(f"p must be >= 1 or inf, got {p}")
    return float((np.sum(a**p) * grid.dx) ** (1.0 / p))


def multiplier_matrix(grid, symbol):
    """Dense real matrix of a Hermitian-symmetric Fourier multiplier."""
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.asarray(symbol(grid.xi()), dtype=complex)
    if not np.all(np.isfinite(m)):
        raise CommutatorLabError("multiplier is singular on the lattice")
    eye = np.eye(grid.n)
    cols = np.fft.ifft(m[:, None] * np.fft.fft(eye, axis=0), axis=0)
    return np.ascontiguousarray(cols.real)


# ---------------------------------------------------------------------------
# Ginibre-Velo expansion

def gv_coefficients(a, n):
    """Coefficients c_1..c_{2n+1}: c_1 = 1, then the factorial-product formula."""
    if a < 1:
        raise CommutatorLabError(f"order a must satisfy a >= 1, got {a}")
    if int(n) != n or n < 0:
        raise CommutatorLabError(f"truncation n must be a nonnegative integer, got {n!r}")
    coeffs = [1.0]
    for j in range(1, int(n) + 1):
        prod = 1.0
        for k in range(0, j + 1):
            prod *= a * a - (2 * k + 1) ** 2
        coeffs.append(prod / math.factorial(2 * j + 1))
    return coeffs


@dataclass(frozen=True)
class GVExpansion:
    """Truncated expansion data for [H Dx^a, h] on a 1-D grid."""

    a: float
    n: int
    grid: Grid1D
    h: np.ndarray
    coeffs: list = field(default_factory=list)

    @property
    def mu(self):
        return (self.a - 1.0) / 2.0


def make_gv_expansion(a, n, grid, h):
    h = np.asarray(h, dtype=float)
    if h.shape != (grid.n,):
        raise CommutatorLabError(f"h shape {h.shape} does not match grid n={grid.n}")
    return GVExpansion(float(a), int(n), grid, h, gv_coefficients(a, n))


def _check_orders(exp):
    if exp.mu - exp.n < -1e-12:
        raise CommutatorLabError(
            f"mu - n = {exp.mu - exp.n:.3g} < 0: negative homogeneous orders "
            "hit the xi=0 singularity on the lattice and are rejected"
        )


def band_projector(grid, kmax=None):
    """Dense projector onto the resolved band |k| <= kmax (default n//3)."""
    kmax = grid.n // 3 if kmax is None else int(kmax)
    k = np.rint(np.fft.fftfreq(grid.n) * grid.n).astype(int)
    return multiplier_matrix(grid, lambda xi: (np.abs(k) <= kmax).astype(float))


def _project(grid, op, project):
    if not project:
        return op
    b = band_projector(grid)
    return b @ op @ b


def build_pn(exp, project=True):
    """Dense matrix of P_n(a) = a * sum_j c_{2j+1} (-1)^j D^(mu-j) h^(2j+1) D^(mu-j)."""
    _check_orders(exp)
    grid = exp.grid
    out = np.zeros((grid.n, grid.n))
    for j, c in enumerate(exp.coeffs):
        if c == 0.0:
            continue
        beta = max(exp.mu - j, 0.0)
        dmat = multiplier_matrix(grid, lambda xi, b=beta: np.abs(xi) ** b)
        hder = derivative_1d(grid, exp.h, 2 * j + 1)
        out += c * (-1.0) ** j * (dmat * hder[None, :]) @ dmat
    return _project(grid, exp.a * out, project)


def build_rn(exp, project=True):
    """Dense matrix of the remainder R_n(a) = [H Dx^a, h] - (P_n - H P_n H)/2."""
    _check_orders(exp)
    grid = exp.grid
    hda = multiplier_matrix(grid, lambda xi: 1j * np.sign(xi) * np.abs(xi) ** exp.a)
    comm = hda * exp.h[None, :] - exp.h[:, None] * hda
    pn = build_pn(exp, project=False)
    hmat = multiplier_matrix(grid, lambda xi: 1j * np.sign(xi))
    return _project(grid, comm - 0.5 * (pn - hmat @ pn @ hmat), project)


@dataclass(frozen=True)
class OperatorNormResult:
    value: float
    converged: bool
    iterations: int


def operator_norm(op, iters=200, tol=1e-8, seed=0):
    """Largest singular value by power iteration on op^T op.

    Terminates when the relative increment drops below ``tol``; otherwise
    reports non-convergence with the last iterate.
    """
    op = np.asarray(op, dtype=float)
    if iters < 20:
        raise CommutatorLabError(f"iters must be >= 20, got {iters}")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for it in range(1, iters + 1):
        w = op.T @ (op @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return OperatorNormResult(0.0, True, it)
        v = w / norm_w
        sigma_new = float(np.linalg.norm(op @ v))
        if sigma_new > 0 and abs(sigma_new - sigma) <= tol * sigma_new:
            return OperatorNormResult(sigma_new, True, it)
        sigma = sigma_new
    return OperatorNormResult(sigma, False, iters)


def weighted_fourier_l1(grid, values, s, tail_tol=1e-10):
    """Wavenumber-quadrature L1 norm of |xi|^s * hat(h).

    Uses the continuum transform estimate hat(h)(xi_k) = dx * DFT(h)_k and
    rectangle-rule quadrature with spacing 2*pi/l.  The top-octave tail must
    stay below ``tail_tol`` of the sum (the box must be large enough).
    """
    xi = grid.xi()
    hhat = np.abs(grid.dx * np.fft.fft(np.asarray(values, dtype=float)))
    # DFT roundoff floor would masquerade as a tail once weighted by |xi|^s
    hhat[hhat < 1e-13 * hhat.max()] = 0.0
    integrand = np.abs(xi) ** s * hhat
    dxi = 2.0 * np.pi / grid.l
    total = float(np.sum(integrand) * dxi)
    if total > 0.0:
        top = np.abs(xi) >= 0.5 * np.max(np.abs(xi))
        tail = float(np.sum(integrand[top]) * dxi)
        if tail > tail_tol * total:
            raise CommutatorLabError(
                f"spectral tail of |xi|^{s:g} hat(h) is {tail / total:.2e} of the sum; "
                "enlarge the box or refine the grid"
            )
    return total


@dataclass(frozen=True)
class RemainderBound:
    c_emp: float
    op_norm: float
    l1_norm: float
    converged: bool
    degenerate: bool


def verify_remainder_bound(a, b_exp, n, grid, h, iters=200, seed=0, alt_inner=False):
    """Empirical constant of || Dx^b R_n(a) Dx^b f || <= C ||hat(Dx^(a+2b) h)||_L1 ||f||.

    Requires the admissibility window 2n+1 <= a+2b <= 2n+3.  With
    ``alt_inner=True`` the right factor is Dx^a instead of Dx^b (the
    alternative reading of the statement); no boundedness is claimed for it,
    the constant is returned for inspection only.
    """
    total = a + 2.0 * b_exp
    if not (2 * n + 1 - 1e-12 <= total <= 2 * n + 3 + 1e-12):
        raise CommutatorLabError(
            f"(a, b, n) = ({a}, {b_exp}, {n}) violates 2n+1 <= a+2b <= 2n+3 "
            f"(a+2b = {total:g})"
        )
    if b_exp < 0:
        raise CommutatorLabError(f"b must be >= 0, got {b_exp}")
    exp = make_gv_expansion(a, n, grid, h)
    rn = build_rn(exp)
    left = multiplier_matrix(grid, lambda xi: np.abs(xi) ** b_exp)
    right_order = a if alt_inner else b_exp
    right = multiplier_matrix(grid, lambda xi: np.abs(xi) ** right_order)
    op = left @ rn @ right
    norm = operator_norm(op, iters=iters, seed=seed)
    l1 = weighted_fourier_l1(grid, h, total)
    if l1 < 1e-14:
        return RemainderBound(float("nan"), norm.value, l1, norm.converged, True)
    return RemainderBound(norm.value / l1, norm.value, l1, norm.converged, False)


# ---------------------------------------------------------------------------
# randomized test functions and windows

def random_band_field(grid, rng, decay=2.0, kmax=None, zero_mean=False):
    """Band-limited Gaussian-random field with <xi>^-decay spectral weights.

    Band-limited to |k| <= kmax (default n//3) so that pointwise products of
    two such fields are alias-free on the grid.  Normalized to unit L2 norm.
    """
    n = grid.n
    kmax = n // 3 if kmax is None else int(kmax)
    if not 1 <= kmax <= n // 2 - 1:
        raise CommutatorLabError(f"kmax must lie in [1, n/2-1], got {kmax}")
    k = np.rint(np.fft.fftfreq(n) * n).astype(int)
    xi = grid.xi()
    weights = (1.0 + xi**2) ** (-decay / 2.0)
    spec = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * weights
    spec[np.abs(k) > kmax] = 0.0
    if zero_mean:
        spec[0] = 0.0
    values = np.fft.ifft(spec).real
    norm = np.sqrt(np.sum(values**2) * grid.dx)
    if norm == 0.0:
        raise CommutatorLabError("degenerate random field")
    return values / norm


def smooth_window(grid, center, halfwidth, ramp):
    """Smooth plateau window: 1 on [c-hw, c+hw], 0 outside [c-hw-ramp, c+hw+ramp].

    The support must sit inside the box, away from the periodic seam.
    """
    if halfwidth <= 0 or ramp <= 0:
        raise CommutatorLabError("halfwidth and ramp must be positive")
    lo, hi = center - halfwidth - ramp, center + halfwidth + ramp
    if lo <= -grid.l / 2 or hi >= grid.l / 2:
        raise CommutatorLabError(
            f"window support [{lo:g}, {hi:g}] reaches the periodic seam of the box"
        )
    x = grid.x()
    return smoothstep((x - lo) / ramp) * smoothstep((hi - x) / ramp)


def _support_separation(grid, mask_a, mask_b):
    """Minimum periodic distance between two sampled support sets."""
    xa = grid.x()[mask_a]
    xb = grid.x()[mask_b]
    if xa.size == 0 or xb.size == 0:
        return float("inf")
    diff = np.abs(xa[:, None] - xb[None, :])
    diff = np.minimum(diff, grid.l - diff)
    return float(diff.min())


# ---------------------------------------------------------------------------
# inequality harnesses

INEQUALITY_KINDS = (
    "kato_ponce",
    "d_li",
    "frac_leibniz_d",
    "frac_leibniz_j",
    "j_phi",
    "calderon",
)


@dataclass(frozen=True)
class InequalitySweep:
    kind: str
    params: dict
    max_ratio: float
    ratios: np.ndarray
    skipped: int
    seed: int
    grid_n: int


def _trial_ratio(kind, params, grid, rng):
    p = params.get("p", 2)
    if kind == "kato_ponce":
        s = params["s"]
        f = random_band_field(grid, rng)
        g = random_band_field(grid, rng)
        lhs = lp_norm_1d(grid, bessel_1d(grid, f * g, s) - f * bessel_1d(grid, g, s), p)
        rhs = lp_norm_1d(grid, derivative_1d(grid, f), np.inf) * lp_norm_1d(
            grid, bessel_1d(grid, g, s - 1), p
        ) + lp_norm_1d(grid, bessel_1d(grid, f, s), p) * lp_norm_1d(grid, g, np.inf)
        return lhs, rhs
    if kind == "d_li":
        s = params["s"]
        p1, p2 = params.get("p1", 4), params.get("p2", 4)
        f = random_band_field(grid, rng)
        g = random_band_field(grid, rng)
        lhs = lp_norm_1d(grid, riesz_1d(grid, f * g, s) - f * riesz_1d(grid, g, s), p)
        # D^(s-1) d/dx combined into the single symbol i*sign(xi)|xi|^s
        dgrad_f = apply_symbol_1d(grid, f, lambda xi: 1j * np.sign(xi) * np.abs(xi) ** s)
        rhs = lp_norm_1d(grid, dgrad_f, p1) * lp_norm_1d(grid, g, p2)
        if s > 1:
            p3, p4 = params.get("p3", 4), params.get("p4", 4)
            rhs += lp_norm_1d(grid, derivative_1d(grid, f), p3) * lp_norm_1d(
                grid, riesz_1d(grid, g, s - 1), p4
            )
        return lhs, rhs
    if kind in ("frac_leibniz_d", "frac_leibniz_j"):
        s = params["s"]
        p1, q1 = params.get("p1", 4), params.get("q1", 4)
        p2, q2 = params.get("p2", 4), params.get("q2", 4)
        op = riesz_1d if kind == "frac_leibniz_d" else bessel_1d
        f = random_band_field(grid, rng)
        g = random_band_field(grid, rng)
        lhs = lp_norm_1d(grid, op(grid, f * g, s), 2)
        rhs = lp_norm_1d(grid, op(grid, f, s), p1) * lp_norm_1d(grid, g, q1) + lp_norm_1d(
            grid, f, p2
        ) * lp_norm_1d(grid, op(grid, g, s), q2)
        return lhs, rhs
    if kind == "j_phi":
        s = params["s"]
        l_index = params.get("l", abs(s - 1) + 1.0)
        phi = smooth_window(grid, 0.0, grid.l / 8.0, grid.l / 8.0)
        f = random_band_field(grid, rng)
        lhs = lp_norm_1d(grid, bessel_1d(grid, phi * f, s) - phi * bessel_1d(grid, f, s), 2)
        fx = derivative_1d(grid, f)
        lhs += lp_norm_1d(
            grid, bessel_1d(grid, phi * fx, s - 1) - phi * bessel_1d(grid, fx, s - 1), 2
        )
        phi_prime = derivative_1d(grid, phi)
        rhs = lp_norm_1d(grid, bessel_1d(grid, phi_prime, l_index), 2) * lp_norm_1d(
            grid, bessel_1d(grid, f, s - 1), 2
        )
        return lhs, rhs
    if kind == "calderon":
        l_order = int(params.get("l", 1))
        m_order = int(params.get("m", 0))
        if l_order < 0 or m_order < 0 or l_order + m_order < 1:
            raise CommutatorLabError("calderon requires l, m >= 0 integers with l + m >= 1")
        g = smooth_window(grid, 0.0, grid.l / 8.0, grid.l / 8.0)
        f = random_band_field(grid, rng)
        w = derivative_1d(grid, f, m_order) if m_order else f
        comm = hilbert_1d(grid, g * w) - g * hilbert_1d(grid, w)
        lhs_field = derivative_1d(grid, comm, l_order) if l_order else comm
        lhs = lp_norm_1d(grid, lhs_field, p)
        rhs = lp_norm_1d(grid, derivative_1d(grid, g, l_order + m_order), np.inf) * lp_norm_1d(
            grid, f, p
        )
        return lhs, rhs
    raise CommutatorLabError(f"unknown inequality kind {kind!r}; expected one of {INEQUALITY_KINDS}")


def inequality_ratio(kind, params, trials, seed=0, grid=None):
    """Maximum left/right ratio over seeded randomized trials.

    Trials whose right side falls below 1e-14 are skipped and counted.
    """
    if trials < 10:
        raise CommutatorLabError(f"trials must be >= 10, got {trials}")
    grid = grid if grid is not None else make_grid1d(256, 20.0)
    rng = np.random.default_rng(seed)
    ratios = []
    skipped = 0
    for _ in range(trials):
        lhs, rhs = _trial_ratio(kind, dict(params), grid, rng)
        if rhs < 1e-14:
            skipped += 1
            continue
        ratios.append(lhs / rhs)
    ratios = np.asarray(ratios)
    max_ratio = float(ratios.max()) if ratios.size else 0.0
    return InequalitySweep(kind, dict(params), max_ratio, ratios, skipped, seed, grid.n)


# ---------------------------------------------------------------------------
# localization formulas (separated supports)

@dataclass(frozen=True)
class LocalizationResult:
    part: str
    lhs: float
    rhs_terms: tuple
    separation: float

    @property
    def rhs_total(self):
        return float(sum(self.rhs_terms))

    @property
    def ratio(self):
        rhs = self.rhs_total
        return self.lhs / rhs if rhs > 0 else float("inf")


def localization_check(part, s_or_beta, m, theta1, theta2, f, grid, r=None, min_separation=1e-8):
    """Both sides of the localized-regularity inequalities (I)-(IV).

    ``theta1`` must equal 1 on a neighborhood of supp(theta2):
    dist(supp(1-theta1), supp(theta2)) >= delta > 0 is verified by sampling.
    Returns the left-hand norm and the tuple of right-hand ingredient norms;
    the caller asserts lhs <= C * sum(rhs).
    """
    part = str(part).upper()
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    f = np.asarray(f, dtype=float)
    if int(m) != m or m < 0:
        raise CommutatorLabError(f"m must be a nonnegative integer, got {m!r}")
    sep = _support_separation(grid, (1.0 - theta1) > 1e-12, theta2 > 1e-12)
    if not sep > min_separation:
        raise CommutatorLabError(
            f"support separation violated: dist(supp(1-theta1), supp(theta2)) = {sep:g}"
        )
    low = lp_norm_1d(grid, bessel_1d(grid, f, -float(m)), 2)
    if part == "I":
        beta = float(s_or_beta)
        if not 0.0 <= beta < 2.0:
            raise CommutatorLabError(f"part (I) requires beta in [0, 2), got {beta}")
        lhs = lp_norm_1d(grid, theta2 * bessel_1d(grid, f, beta), 2)
        rhs = (
            lp_norm_1d(grid, theta1 * f, 2),
            lp_norm_1d(grid, theta1 * riesz_1d(grid, f, beta), 2),
            low,
        )
    elif part == "II":
        beta = float(s_or_beta)
        if not 0.0 <= beta < 2.0:
            raise CommutatorLabError(f"part (II) requires beta in [0, 2), got {beta}")
        lhs = lp_norm_1d(grid, theta2 * f, 2) + lp_norm_1d(grid, theta2 * riesz_1d(grid, f, beta), 2)
        rhs = (lp_norm_1d(grid, theta1 * bessel_1d(grid, f, beta), 2), low)
    elif part == "III":
        s = float(s_or_beta)
        if s <= 0:
            raise CommutatorLabError(f"part (III) requires s > 0, got {s}")
        r = s if r is None else float(r)
        if not 0.0 <= r <= s:
            raise CommutatorLabError(f"part (III) requires 0 <= r <= s, got r={r}")
        lhs = lp_norm_1d(grid, theta2 * bessel_1d(grid, f, r), 2)
        rhs = (lp_norm_1d(grid, theta1 * bessel_1d(grid, f, s), 2), low)
    elif part == "IV":
        s = float(s_or_beta)
        if s <= 0:
            raise CommutatorLabError(f"part (IV) requires s > 0, got {s}")
        lhs = lp_norm_1d(grid, bessel_1d(grid, theta2 * f, s), 2)
        rhs = (lp_norm_1d(grid, theta1 * bessel_1d(grid, f, s), 2), low)
    else:
        raise CommutatorLabError(f"unknown part {part!r}; expected I, II, III or IV")
    return LocalizationResult(part, lhs, rhs, sep)
