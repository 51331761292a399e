"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
(run with ``pytest tests/test_acceptance.py -s`` to see them live).

Two sub-criteria are known to fail on a periodic box and are asserted
anyway, at their stated tolerances, so the failures stay visible:

* the sharp dispersive-decay slope fitted over t in [1, 100] lands near
  -0.70 rather than -5/6: the sup-norm decay is governed by the fold
  caustic of the group-velocity map, whose -5/6 rate is reached only for
  t of a few hundred (measured local slope -0.81 at t ~ 10^3); the window
  [1, 100] straddles the transient.
* the propagation experiment's half-space and channel refinement bounds:
  grid refinement adds kink modes above the previous Nyquist band whose
  group velocity is leftward and large; on a torus they recirculate and
  re-enter the right half-space and the channel (wrap_x ~ 0.5% of the mass
  during the run), so the refined quantities grow by the added tail mass
  instead of converging.  The full-plane growth check (b), which measures
  exactly that added tail, passes.
"""

import numpy as np
import pytest

import bozklab as bz
from bozklab import commutators as cl
from bozklab import diagnostics as dg
from bozklab import experiments as ex
from bozklab.datum import DatumRecipe, make_datum

from .reference import gv_coefficients_exact

pytestmark = pytest.mark.acceptance


def report(criterion, passed, detail):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    return passed


# ---------------------------------------------------------------------------
# 1. unitarity of the linear propagator


def test_criterion_1_unitarity():
    grid = bz.make_grid(128, 128, 40.0, 40.0)
    rng = np.random.default_rng(100)
    worst = 0.0
    for _ in range(20):
        noise = rng.standard_normal((128, 128))
        kx, ky = grid.index_mesh()
        mask = (np.abs(kx) <= 20) & (np.abs(ky) <= 20)
        phi = bz.Field.from_values(grid, np.fft.ifft2(np.fft.fft2(noise) * mask).real)
        for alpha in (0.0, 0.5, 1.0):
            for t in (0.1, 1.0, 10.0):
                ratio = bz.linear_propagate(phi, t, alpha).l2() / phi.l2()
                worst = max(worst, abs(ratio - 1.0))
    ok = worst <= 1e-12
    assert report(1, ok, f"max |ratio - 1| = {worst:.3e} (tol 1e-12)")


# ---------------------------------------------------------------------------
# 2. conservation drifts and their dt^4 signature

CONSERVATION_CFG = """
[experiment]
kind = simulate
seed = 0

[grid]
nx = 256
ny = 256
lx = 36.0
ly = 36.0

[solver]
alpha = 0.5
dt = {dt}
t_end = 5.0
observer_stride = {stride}

[datum]
kind = gaussian
amplitude = 10.0
width_x = 0.8366600265340756
width_y = 0.8366600265340756

[wrap]
axes = none
"""


@pytest.mark.slow
def test_criterion_2_conservation(tmp_path):
    drifts = {}
    for dt, stride in ((1e-3, 250), (5e-4, 500)):
        cfg = bz.parse_config(CONSERVATION_CFG.format(dt=dt, stride=stride))
        rep = ex.run(cfg, out_dir=tmp_path / f"dt{dt:g}")
        assert rep.exit_code == 0
        series_csv = rep.manifest["artifacts"]["series_csv"]
        rows = [r for r in open(series_csv) if not r.startswith("#")]
        header = rows[0].strip().split(",")
        cols = {name: np.array([float(r.split(",")[i]) for r in rows[1:]]) for i, name in enumerate(header)}
        drifts[dt] = (
            np.max(np.abs(cols["M"] / cols["M"][0] - 1.0)),
            np.max(np.abs(cols["E"] / cols["E"][0] - 1.0)),
        )
    m1, e1 = drifts[1e-3]
    m2, e2 = drifts[5e-4]
    ok = m1 < 1e-6 and e1 < 1e-4 and m1 / m2 >= 12.0 and e1 / e2 >= 12.0
    assert report(
        2,
        ok,
        f"M drift {m1:.2e} (<1e-6), E drift {e1:.2e} (<1e-4), "
        f"shrink M x{m1 / m2:.1f}, E x{e1 / e2:.1f} (>=12)",
    )


# ---------------------------------------------------------------------------
# 3. linear dispersive decay fits

SHARP_DECAY_CFG = """
[experiment]
kind = linear-decay
seed = 0

[grid]
nx = 4096
ny = 2560
lx = 5600.0
ly = 2600.0

[solver]
alpha = 1.0

[datum]
kind = band_window
xi_lo = 0.4
xi_hi = 2.4
eta_lo = 0.2
eta_hi = 2.8
ramp = 0.3
center_x = 500.0
center_y = 500.0

[decay]
j = 0
p = inf
mode = sharp
t_min = 1.0
t_max = 100.0
num_times = 12

[wrap]
axes = xy
threshold = 1e-10
"""

ROUGH_DECAY_CFG = """
[experiment]
kind = linear-decay
seed = 0

[grid]
nx = 16
ny = 2560
lx = 6.283185307179586
ly = 1800.0

[solver]
alpha = 0.5

[datum]
kind = carrier
k_index = 1
width_y = 2.0

[decay]
j = 0
p = inf
mode = rough
t_min = 1.0
t_max = 100.0
num_times = 12

[wrap]
axes = y
threshold = 1e-10
"""


@pytest.mark.slow
def test_criterion_3_sharp_decay(tmp_path):
    rep = ex.run(bz.parse_config(SHARP_DECAY_CFG), out_dir=tmp_path)
    fit = rep.manifest["results"]["fit"]
    wrap = rep.manifest["results"]["wrap_max"]
    wrap_ok = max(wrap["x"], wrap["y"]) < 1e-10
    slope_ok = abs(fit["slope"] - (-5.0 / 6.0)) <= 0.1
    ok = wrap_ok and slope_ok
    report(
        "3 (sharp)",
        ok,
        f"slope {fit['slope']:.4f} vs -5/6 +- 0.1, wrap {max(wrap['x'], wrap['y']):.2e} (<1e-10)",
    )
    assert wrap_ok
    assert slope_ok  # known red: [1, 100] straddles the fold-caustic transient


def test_criterion_3_rough_decay(tmp_path):
    rep = ex.run(bz.parse_config(ROUGH_DECAY_CFG), out_dir=tmp_path)
    fit = rep.manifest["results"]["fit"]
    wrap_y = rep.manifest["results"]["wrap_max"]["y"]
    ok = abs(fit["slope"] - (-0.5)) <= 0.1 and wrap_y < 1e-10
    assert report(
        "3 (rough)", ok, f"slope {fit['slope']:.4f} vs -1/2 +- 0.1, wrap_y {wrap_y:.2e}"
    )


# ---------------------------------------------------------------------------
# 4. expansion coefficients against exact rational arithmetic


def test_criterion_4_gv_coefficients():
    exact_ok = True
    for a_num, a_den in ((1, 1), (3, 2), (2, 1), (5, 2), (3, 1)):
        exact = gv_coefficients_exact(a_num, a_den, 6)
        computed = cl.gv_coefficients(a_num / a_den, 6)
        exact_ok &= all(c == float(e) for c, e in zip(computed, exact))
    c3_zero = cl.gv_coefficients(3.0, 1)[1] == 0.0
    grid = cl.make_grid1d(256, 40.0)
    h = np.exp(-((grid.x() / 3.0) ** 2))
    p0 = cl.build_pn(cl.make_gv_expansion(3.0, 0, grid, h))
    p1 = cl.build_pn(cl.make_gv_expansion(3.0, 1, grid, h))
    gap = float(np.max(np.abs(p1 - p0)))
    ok = exact_ok and c3_zero and gap < 1e-12
    assert report(
        4, ok, f"rational match {exact_ok}, c3(3) == 0 {c3_zero}, |P1(3)-P0(3)| = {gap:.2e}"
    )


# ---------------------------------------------------------------------------
# 5. remainder-bound empirical constants across resolutions


@pytest.mark.slow
def test_criterion_5_remainder_bound():
    details = []
    ok = True
    for a, b_exp in ((2.0, 0.0), (2.5, 0.25)):
        values = []
        for n1d in (256, 512, 1024):
            grid = cl.make_grid1d(n1d, 40.0)
            h = np.exp(-((grid.x() / 3.0) ** 2))
            # parity pairs the top singular values almost exactly, so the
            # power iteration needs depth to settle its last digits
            res = cl.verify_remainder_bound(a, b_exp, 0, grid, h, iters=5000)
            assert res.converged and not res.degenerate
            values.append(res.c_emp)
        spread = max(values) / min(values)
        ok &= np.all(np.isfinite(values)) and spread < 2.0
        details.append(f"(a={a}, b={b_exp}): C_emp {values[0]:.4f}..{values[2]:.4f} spread x{spread:.3f}")
    assert report(5, ok, "; ".join(details))


# ---------------------------------------------------------------------------
# 6. cutoff family properties


def test_criterion_6_cutoff_family():
    rng = np.random.default_rng(60)
    worst_partition = 0.0
    all_props = True
    for _ in range(20):
        eps = rng.uniform(0.05, 2.0)
        b = eps * rng.uniform(5.0, 50.0)
        fam = bz.make_family(eps, b, validate=False)
        checks = bz.check_properties(fam, samples=10_000, tol=1e-10)
        all_props &= all(c.passed for c in checks)
        x = np.linspace(-b, 2 * b, 10_000)
        worst_partition = max(
            worst_partition,
            np.max(np.abs(fam.chi(x) + fam.phi(x) + fam.psi(x) - 1.0)),
            np.max(np.abs(fam.chi(x) ** 2 + fam.phi_tilde(x) ** 2 + fam.psi(x) - 1.0)),
        )
    ok = all_props and worst_partition < 1e-10
    assert report(6, ok, f"all properties {all_props}, worst partition residual {worst_partition:.2e}")


# ---------------------------------------------------------------------------
# 7. inequality harnesses stable under grid doubling

INEQUALITY_CELLS = [
    ("kato_ponce", {"s": 1.0, "p": 2}),
    ("kato_ponce", {"s": 2.5, "p": 4}),
    ("d_li", {"s": 0.5, "p": 2}),
    ("d_li", {"s": 1.5, "p": 2}),
    ("frac_leibniz_d", {"s": 0.75}),
    ("frac_leibniz_j", {"s": 0.75}),
    ("j_phi", {"s": 1.5, "l": 1.5}),
    ("calderon", {"l": 1, "m": 0, "p": 2}),
]


@pytest.mark.slow
def test_criterion_7_inequality_harnesses():
    ok = True
    details = []
    for kind, params in INEQUALITY_CELLS:
        coarse = cl.inequality_ratio(kind, params, trials=100, seed=7)
        fine = cl.inequality_ratio(
            kind, params, trials=100, seed=7, grid=cl.make_grid1d(512, 20.0)
        )
        factor = fine.max_ratio / coarse.max_ratio
        cell_ok = np.isfinite(coarse.max_ratio) and coarse.max_ratio > 0 and 0.5 < factor < 2.0
        ok &= cell_ok
        details.append(f"{kind}[{params.get('s', params.get('l'))}] x{factor:.2f}")
    # localization parts I-IV across resolution and separations
    for part, s_or_beta in (("I", 1.5), ("II", 1.5), ("III", 2.0), ("IV", 1.5)):
        ratios = []
        for n in (256, 512):
            grid = cl.make_grid1d(n, 40.0)
            f = cl.random_band_field(grid, np.random.default_rng(70), kmax=80)
            for delta in (0.5, 1.0, 2.0):
                theta2 = cl.smooth_window(grid, 0.0, 3.0, 1.0)
                theta1 = cl.smooth_window(grid, 0.0, 4.0 + delta, 1.0)
                res = cl.localization_check(part, s_or_beta, 1, theta1, theta2, f, grid)
                ratios.append(res.ratio)
        spread = max(ratios) / min(ratios)
        part_ok = np.all(np.isfinite(ratios)) and spread < 2.0
        ok &= part_ok
        details.append(f"loc({part}) x{spread:.2f}")
    assert report(7, ok, ", ".join(details))


# ---------------------------------------------------------------------------
# 8. propagation of regularity (property form)

PROPAGATION_CFG = """
[experiment]
kind = propagation
seed = 0

[grid]
nx = {n}
ny = {n}
lx = 48.0
ly = 48.0

[solver]
alpha = 0.5
dt = 1e-3
t_end = 1.0
observer_stride = 10

[regularity]
s = 2.0

[window]
x0 = 0.0
eps = 1.0
b = 5.0
tau = 5.0
v_values = 0, 1

[datum]
kind = one_sided
profile = bessel
x1 = -5.0
gamma = 1.2
amplitude = 2.0
width_y = 2.0

[wrap]
axes = none
"""


@pytest.fixture(scope="module")
def propagation_runs(tmp_path_factory):
    out = {}
    for n in (256, 512):
        root = tmp_path_factory.mktemp(f"prop{n}")
        rep = ex.run(bz.parse_config(PROPAGATION_CFG.format(n=n)), out_dir=root)
        assert rep.exit_code == 0
        rows = [r for r in open(rep.manifest["artifacts"]["series_csv"]) if not r.startswith("#")]
        header = rows[0].strip().split(",")
        cols = {
            name: np.array([float(r.split(",")[i]) for r in rows[1:]])
            for i, name in enumerate(header)
        }
        out[n] = {"manifest": rep.manifest, "cols": cols}
    return out


@pytest.mark.slow
def test_criterion_8b_datum_growth(propagation_runs):
    growth = propagation_runs[256]["manifest"]["results"]["datum_refinement"]["full_plane_sq"]["growth"]
    ok = growth >= 1.5
    assert report("8b", ok, f"full-plane Jx^2 growth per refinement x{growth:.4f} (>=1.5)")


@pytest.mark.slow
def test_criterion_8a_half_space_stability(propagation_runs):
    ratios = []
    for v in (0, 1):
        label = f"hs:r=2:v={v:g}"
        for n in (256, 512):
            assert label in propagation_runs[n]["cols"]
        ts = propagation_runs[256]["cols"]["t"]
        coarse = propagation_runs[256]["cols"][label]
        fine = propagation_runs[512]["cols"][label]
        for t_probe in (0.5, 1.0):
            i = int(np.argmin(np.abs(ts - t_probe)))
            ratios.append(fine[i] / coarse[i])
    worst = max(max(ratios), 1.0 / min(ratios))
    ok = worst <= 1.25
    report("8a", ok, f"half-space refinement change x{worst:.3f} (tol x1.25)")
    # known red: refinement-added kink modes recirculate on the torus and
    # flood the half-space; see the module docstring
    assert ok


@pytest.mark.slow
def test_criterion_8c_channel_stability(propagation_runs):
    coarse = propagation_runs[256]["manifest"]["results"]["channel_time_integrals"]
    fine = propagation_runs[512]["manifest"]["results"]["channel_time_integrals"]
    changes = {key: abs(fine[key] / coarse[key] - 1.0) for key in coarse}
    worst = max(changes.values())
    ok = worst <= 0.10
    report("8c", ok, f"worst channel-integral change {worst * 100:.1f}% (tol 10%)")
    assert ok  # known red: same torus recirculation as 8a


# ---------------------------------------------------------------------------
# 9. Kato smoothing refine-stability

KATO_CFG = """
[experiment]
kind = kato
seed = 0

[grid]
nx = {n}
ny = {n}
lx = 40.0
ly = 40.0

[solver]
alpha = 0.5
dt = 1e-3
t_end = 1.0
observer_stride = 10

[datum]
kind = gaussian
amplitude = 1.0
width_x = 1.5
width_y = 1.5

[kato]
r = 1.0
radius = 5.0
operators = Dhalf:J, Dhalf:Dx

[wrap]
axes = none
"""


@pytest.mark.slow
def test_criterion_9_kato_smoothing(tmp_path):
    integrals = {}
    for n in (128, 256):
        rep = ex.run(bz.parse_config(KATO_CFG.format(n=n)), out_dir=tmp_path / str(n))
        assert rep.exit_code == 0
        integrals[n] = rep.manifest["results"]["kato_time_integrals"]
    ok = True
    details = []
    for key in integrals[128]:
        change = abs(integrals[256][key] / integrals[128][key] - 1.0)
        ok &= np.isfinite(integrals[128][key]) and change < 0.10
        tag = ":".join(key.split(":")[1:3])
        details.append(f"{tag}: {integrals[128][key]:.4f} ({change * 100:.2f}%)")
    assert report(9, ok, "; ".join(details))


# ---------------------------------------------------------------------------
# 10. byte-identical reproducibility

REPRO_CFG = """
[experiment]
kind = simulate
seed = 31

[grid]
nx = 64
ny = 64
lx = 20.0
ly = 20.0

[solver]
alpha = 0.5
dt = 0.005
t_end = 0.2
observer_stride = 8

[datum]
kind = band_limited_random
seed = 31
kmin = 1
kmax = 10

[wrap]
axes = none
"""


def test_criterion_10_reproducibility(tmp_path):
    paths = []
    for name in ("one", "two"):
        rep = ex.run(bz.parse_config(REPRO_CFG), out_dir=tmp_path / name)
        assert rep.exit_code == 0
        paths.append(rep.manifest["artifacts"]["series_csv"])
    same_series = open(paths[0], "rb").read() == open(paths[1], "rb").read()
    sweeps = []
    for name in ("a", "b"):
        rep = ex.run(
            bz.parse_config(
                "[experiment]\nkind = inequality\nseed = 9\n\n[inequality]\nkind = kato_ponce\ns = 1.0\ntrials = 25\n"
            ),
            out_dir=tmp_path / name,
        )
        sweeps.append(open(tmp_path / name / "ratios.csv", "rb").read())
    same_ratios = sweeps[0] == sweeps[1]
    ok = same_series and same_ratios
    assert report(10, ok, f"series bytes identical: {same_series}, ratio bytes identical: {same_ratios}")
