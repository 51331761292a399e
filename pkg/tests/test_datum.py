import numpy as np
import pytest

from bozklab import DatumError, DatumRecipe, make_datum, make_grid
from bozklab.datum import datum_refinement_report
from bozklab.diagnostics import half_space_norm


@pytest.fixture
def grid48():
    return make_grid(128, 128, 48.0, 48.0)


class TestGaussian:
    def test_zero_amplitude(self, grid48):
        f = make_datum(DatumRecipe("gaussian", {"amplitude": 0.0}), grid48)
        assert f.linf() == 0.0

    def test_peak_and_center(self, grid48):
        f = make_datum(
            DatumRecipe("gaussian", {"amplitude": 2.0, "width_x": 3.0, "width_y": 2.0, "center_x": 6.0}),
            grid48,
        )
        assert np.isclose(f.linf(), 2.0, rtol=1e-6)
        i, j = np.unravel_index(np.argmax(f.values), f.values.shape)
        assert abs(grid48.x()[i] - 6.0) <= grid48.dx

    def test_bad_widths(self, grid48):
        with pytest.raises(DatumError):
            make_datum(DatumRecipe("gaussian", {"width_x": -1.0}), grid48)


class TestBandLimitedRandom:
    def test_deterministic_across_runs(self, grid48):
        rec = DatumRecipe("band_limited_random", {"seed": 42, "kmin": 2, "kmax": 10})
        a = make_datum(rec, grid48)
        b = make_datum(rec, grid48)
        assert np.array_equal(a.values, b.values)

    def test_band_respected(self, grid48):
        f = make_datum(DatumRecipe("band_limited_random", {"seed": 1, "kmin": 3, "kmax": 8}), grid48)
        kx, ky = grid48.index_mesh()
        radial = np.sqrt(kx.astype(float) ** 2 + ky.astype(float) ** 2)
        outside = (radial < 3) | (radial > 8)
        assert np.max(np.abs(f.coeffs[outside])) < 1e-12 * np.max(np.abs(f.coeffs))

    def test_band_bounds_checked(self, grid48):
        with pytest.raises(DatumError):
            make_datum(DatumRecipe("band_limited_random", {"kmin": 5, "kmax": 2}), grid48)
        with pytest.raises(DatumError):
            make_datum(DatumRecipe("band_limited_random", {"kmax": 70}), grid48)


class TestOneSided:
    def test_gamma_positive_required(self, grid48):
        with pytest.raises(DatumError):
            make_datum(DatumRecipe("one_sided", {"gamma": -0.5}), grid48)

    def test_power_profile_matches_formula_and_is_one_sided(self):
        g = make_grid(512, 16, 48.0, 8.0)
        rec = DatumRecipe(
            "one_sided",
            {"x1": -5.0, "gamma": 1.2, "width_x": 3.0, "width_y": 2.0, "center_x": -5.0,
             "smooth_delta": 0.5},
        )
        f = make_datum(rec, g)
        x = g.x()[:, None]
        y = g.y()[None, :]
        d = x + 5.0
        kink = np.where(d >= 0, np.abs(d) ** 1.2, (d**2 + 0.25) ** 0.6 - 0.5**1.2)
        expected = kink * np.exp(-((d / 3.0) ** 2)) * np.exp(-((y / 2.0) ** 2))
        assert np.max(np.abs(f.values - expected)) < 1e-12
        # one-sided kink: the second difference of the bare profile blows up
        # approaching x1 from the right (like delta^(gamma-2)) and stays
        # bounded from the left
        def second_diff(side, delta):
            pts = np.array([-5.0 + side * delta * k for k in (1, 2, 3)])
            k = np.where(pts + 5.0 >= 0, np.abs(pts + 5.0) ** 1.2,
                         ((pts + 5.0) ** 2 + 0.25) ** 0.6 - 0.5**1.2)
            return abs(k[0] - 2 * k[1] + k[2]) / delta**2
        right = [second_diff(+1, d) for d in (1e-2, 1e-3, 1e-4)]
        left = [second_diff(-1, d) for d in (1e-2, 1e-3, 1e-4)]
        assert right[2] > 5 * right[0]
        assert left[2] < 2 * left[0] + 1.0

    def test_bessel_profile_growth_rate(self):
        # full-plane Jx^2 content grows ~ 2^(2s - 2 gamma - 1) = 2^0.6 per
        # refinement for gamma = 1.2, s = 2
        rec = DatumRecipe("one_sided", {"x1": -5.0, "gamma": 1.2, "width_y": 2.0, "profile": "bessel"})
        norms = {}
        for n in (128, 256, 512):
            g = make_grid(n, n, 48.0, 48.0)
            norms[n] = half_space_norm(make_datum(rec, g), 2.0, -np.inf)
        assert norms[256] / norms[128] > 1.5
        assert norms[512] / norms[256] > 1.5

    def test_unknown_profile(self, grid48):
        with pytest.raises(DatumError):
            make_datum(DatumRecipe("one_sided", {"profile": "cubic"}), grid48)

    def test_refinement_report(self):
        g = make_grid(128, 128, 48.0, 48.0)
        rec = DatumRecipe("one_sided", {"x1": -5.0, "gamma": 1.2, "width_y": 2.0, "profile": "bessel"})
        report = datum_refinement_report(rec, g, 2.0, 0.0)
        assert report["full_plane_sq"]["growth"] > 1.5
        assert report["right_half_sq"]["growth"] < 1.5


class TestCarrier:
    def test_single_exact_mode(self, grid48):
        f = make_datum(DatumRecipe("carrier", {"k_index": 3, "width_y": 2.0}), grid48)
        kx, _ = grid48.index_mesh()
        mass = np.abs(f.coeffs) ** 2
        on = mass[np.abs(kx[:, 0]) == 3, :].sum()
        assert on > 0.999 * mass.sum()

    def test_k_index_range(self, grid48):
        with pytest.raises(DatumError):
            make_datum(DatumRecipe("carrier", {"k_index": 0}), grid48)
        with pytest.raises(DatumError):
            make_datum(DatumRecipe("carrier", {"k_index": 64}), grid48)


class TestWavePacket:
    def test_carrier_frequency_content(self, grid48):
        f = make_datum(
            DatumRecipe("wave_packet", {"xi0": 1.0, "eta0": 1.0, "sigma_xi": 0.3, "sigma_eta": 0.3}),
            grid48,
        )
        xi = grid48.xi()[:, None]
        eta = grid48.eta()[None, :]
        power = np.abs(f.coeffs) ** 2
        # spectral mass concentrated near (+-1, +-1)
        near = ((np.abs(np.abs(xi) - 1.0) < 0.9) & (np.abs(np.abs(eta) - 1.0) < 0.9)) + (0 * power > 1)
        assert power[near].sum() > 0.99 * power.sum()

    def test_unknown_kind(self, grid48):
        with pytest.raises(DatumError):
            make_datum(DatumRecipe("solitary", {}), grid48)
