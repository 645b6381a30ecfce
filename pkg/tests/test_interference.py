import math

import numpy as np
import pytest

from twinbeam.aggregate import build_twinbeam
from twinbeam.errors import ResolutionError
from twinbeam.features import two_scale_features
from twinbeam.interference import (TimeGrid, _lag_correlations, default_time_grid,
                                   extract_features, hom_from_state,
                                   hom_profiles, mode_overlap_g, photon_flux,
                                   sfg_from_state, sfg_profile, temporal_modes)
from twinbeam.schmidt import FrequencyGrid, build_spectral_modes


@pytest.fixture(scope="module")
def modes():
    grid = FrequencyGrid(center=40.0, half_span=12.0, n_points=161)
    return build_spectral_modes(grid, 1.0, 5)


class TestTemporalModes:
    def test_gaussian_fourier_pair(self, modes):
        tg = default_time_grid(modes, n_points=1024)
        tm = temporal_modes(modes, tg, flux_weighted=False)
        t = tg.times
        sigma = 1.0
        expected = (sigma / math.sqrt(math.pi)) ** 0.5 * np.exp(
            -0.5 * sigma**2 * t**2)
        assert np.max(np.abs(np.abs(tm.values[0]) - expected)) < 1e-8

    def test_parseval(self, modes):
        tg = default_time_grid(modes, n_points=1024)
        tm = temporal_modes(modes, tg, flux_weighted=True)
        w = modes.grid.omegas
        freq_norm = np.sum((w / modes.grid.center) * np.abs(modes.values) ** 2,
                           axis=1) * modes.grid.step
        time_norm = np.sum(np.abs(tm.values) ** 2, axis=1) * tg.step
        assert np.max(np.abs(time_norm - freq_norm)) < 1e-6

    def test_direct_quadrature_oracle(self, modes, rng):
        tg = default_time_grid(modes, n_points=1024)
        tm = temporal_modes(modes, tg, flux_weighted=True)
        w = modes.grid.omegas
        det = modes.grid.detunings
        for _ in range(10):
            k = int(rng.integers(0, tg.n_points))
            t = tg.times[k]
            direct = np.sum(
                np.sqrt(w / modes.grid.center) * modes.values * np.exp(-1j * det * t),
                axis=1) * modes.grid.step / math.sqrt(2 * math.pi)
            assert np.max(np.abs(direct - tm.values[:, k])) < 1e-8

    def test_aliasing_guard(self):
        from twinbeam.schmidt import SpectralModeSet
        grid = FrequencyGrid(center=0.0, half_span=2.5, n_points=64)
        x = grid.detunings
        off = np.exp(-((x - 2.3) ** 2) / (2 * 0.4**2))  # mass at the edge
        off = off / grid.norm(off)
        shifted = SpectralModeSet(grid=grid, values=off[None, :],
                                  width_sigma=0.4)
        with pytest.raises(ResolutionError):
            temporal_modes(shifted, TimeGrid(step=0.1, n_points=512))


class TestLagCorrelations:
    def test_against_direct_shift_sum(self, rng):
        n = 64
        u = rng.normal(size=n) + 1j * rng.normal(size=n)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        dt = 0.37
        got = _lag_correlations(u, v, dt)
        lags = np.arange(-(n - 1), n)
        for k in (-n + 1, -17, -1, 0, 1, 23, n - 1):
            lo, hi = max(0, -k), min(n, n - k)
            direct = np.sum(u[lo + k:hi + k] * v[lo:hi]) * dt
            idx = np.where(lags == k)[0][0]
            assert got[idx] == pytest.approx(direct, rel=1e-12, abs=1e-12)


class TestPhotonFlux:
    def test_single_mode_profile(self, small_basis, small_cfg):
        tb = build_twinbeam(small_basis, 0.05, 0.0)
        tg = default_time_grid(small_basis.signal, n_points=1024)
        tm = temporal_modes(small_basis.signal, tg, flux_weighted=True)
        times, flux = photon_flux(tb, tm)
        per_q = tb.per_ml_q(tb.ensemble.b[:, 0]).sum(axis=0)
        expected = per_q @ (np.abs(tm.values) ** 2)
        assert np.allclose(flux["s"], expected)

    def test_flux_integral_equals_total_photons(self, small_basis):
        tb = build_twinbeam(small_basis, 0.1, 1.0)
        tg = default_time_grid(small_basis.signal, n_points=1024)
        tm = temporal_modes(small_basis.signal, tg, flux_weighted=True)
        times, flux = photon_flux(tb, tm)
        total = np.sum(flux["s"]) * tg.step
        expected = float(np.sum(tb.ensemble.b[:, 0]))
        # the sqrt(w/w0) flux factor shifts the norm by < 1e-3 relative
        assert total == pytest.approx(expected, rel=2e-3)
        tm_plain = temporal_modes(small_basis.signal, tg, flux_weighted=False)
        _, flux_plain = photon_flux(tb, tm_plain)
        assert np.sum(flux_plain["s"]) * tg.step == pytest.approx(expected, rel=1e-6)


class TestModeOverlap:
    def test_identity_at_zero_delay(self, modes):
        g = mode_overlap_g(modes, modes, 0.0)[:, :, 0]
        assert np.max(np.abs(g - np.eye(modes.count))) < 1e-8

    def test_cauchy_schwarz_bound(self, modes, rng):
        taus = rng.uniform(-4.0, 4.0, size=21)
        g = mode_overlap_g(modes, modes, taus)
        assert np.max(np.abs(g)) <= 1.0 + 1e-9

    def test_fine_grid_quadrature_oracle(self, default_basis):
        spec_s, spec_i = default_basis.signal, default_basis.idler
        taus = np.array([-3e-13, 0.0, 1.7e-13])
        g = mode_overlap_g(spec_s, spec_i, taus)
        fine_grid = FrequencyGrid(spec_s.grid.center, spec_s.grid.half_span,
                                  4 * (spec_s.grid.n_points - 1) + 1)
        fine_s = build_spectral_modes(fine_grid, spec_s.width_sigma, spec_s.count)
        from twinbeam.schmidt import SpectralModeSet
        fine_i = SpectralModeSet(grid=fine_grid,
                                 values=fine_s.values[:, ::-1].copy(),
                                 width_sigma=spec_s.width_sigma)
        g_fine = mode_overlap_g(fine_s, fine_i, taus)
        assert np.max(np.abs(g - g_fine)) < 1e-8

    def test_lag_overlap_matches_direct(self, small_basis):
        from twinbeam.interference import _overlap_lags
        tg = default_time_grid(small_basis.signal, n_points=1024)
        tm_s = temporal_modes(small_basis.signal, tg, flux_weighted=False)
        tm_i = temporal_modes(small_basis.idler, tg, flux_weighted=False)
        g = _overlap_lags(tm_s, tm_i)
        for k in (0, 11, -40):
            idx = (tg.n_points - 1) + k
            direct = mode_overlap_g(small_basis.signal, small_basis.idler,
                                    k * tg.step)[:, :, 0]
            assert np.max(np.abs(g[:, :, idx] - direct)) < 1e-6


class TestSFG:
    def test_far_delay_only_background_survives(self, small_basis):
        tb = build_twinbeam(small_basis, 0.1, 1.0)
        prof = sfg_from_state(tb, n_time=1024)
        k = int(0.25 * len(prof.tau))  # well outside the overlap region
        tot = abs(prof.values).max()
        assert abs(prof.terms["pair"][k]) < 1e-6 * tot
        assert abs(prof.terms["coherent"][k]) < 1e-6 * tot

    def test_term_bookkeeping(self, small_basis):
        tb = build_twinbeam(small_basis, 0.1, 0.5)
        prof = sfg_from_state(tb, n_time=1024)
        total = sum(prof.terms.values())
        clipped = np.clip(total, 0.0, None)
        assert np.max(np.abs(clipped - prof.values)) < 1e-10 * np.max(prof.values)

    def test_nonnegative(self, small_basis):
        for g in (0.0, 1.0):
            tb = build_twinbeam(small_basis, 0.2, g)
            prof = sfg_from_state(tb, n_time=1024)
            assert np.all(prof.values >= 0.0)

    def test_normalization(self, small_basis):
        tb = build_twinbeam(small_basis, 0.1, 0.0)
        prof = sfg_from_state(tb, n_time=1024, normalized=True)
        assert np.trapezoid(prof.values, prof.tau) == pytest.approx(1.0, rel=1e-9)


class TestHOM:
    def test_far_delay_asymptote(self, small_basis):
        tb = build_twinbeam(small_basis, 0.1, 0.5)
        hom = hom_from_state(tb, n_time=1024)
        for prof in (hom["R_n"], hom["R_n_delta"]):
            assert abs(prof[0] - 1.0) < 1e-3
            assert abs(prof[-1] - 1.0) < 1e-3

    def test_pair_only_balanced_has_full_dip(self, small_basis):
        tb = build_twinbeam(small_basis, 0.15, 0.0)
        hom = hom_from_state(tb, n_time=1024)
        rnd = hom["R_n_delta"]
        k0 = len(rnd) // 2
        assert rnd[k0] == pytest.approx(0.0, abs=1e-10)
        vis = (rnd.max() - rnd.min()) / rnd.max()
        assert vis == pytest.approx(1.0, abs=1e-6)

    def test_term_decomposition_sums(self, small_basis):
        tb = build_twinbeam(small_basis, 0.15, 1.0)
        hom = hom_from_state(tb, n_time=1024)
        total = sum(hom["rho_terms"].values())
        assert np.max(np.abs(total - hom["rho"])) < 1e-10 * max(1.0, np.max(np.abs(hom["rho"])))

    def test_pair_term_gives_dip_coherent_term_peak(self, small_basis):
        # sign structure: pair (chaotic) contribution dips, coherent peaks
        tb = build_twinbeam(small_basis, 0.15, 1.0)
        hom = hom_from_state(tb, n_time=1024)
        k0 = len(hom["tau"]) // 2
        assert hom["rho_terms"]["pair"][k0] > 0          # dip in R
        assert hom["rho_terms"]["coherent"][k0] < 0      # peak in R

    def test_unbalanced_splitter_allowed(self, small_basis):
        tb = build_twinbeam(small_basis, 0.1, 0.0)
        r = 0.8
        t = math.sqrt(1 - r**2)
        hom = hom_from_state(tb, n_time=1024, r=r, t=t)
        rnd = hom["R_n_delta"]
        k0 = len(rnd) // 2
        assert rnd[k0] > 0.0  # unbalanced splitter does not reach zero


class TestFeatureExtraction:
    def test_pure_gaussian_fwhm(self):
        x = np.linspace(-10, 10, 4001)
        sigma = 1.3
        y = np.exp(-x**2 / (2 * sigma**2))
        width = extract_features(x, y).broad_fwhm
        assert width == pytest.approx(2 * math.sqrt(2 * math.log(2)) * sigma,
                                      rel=0.005)

    def test_two_gaussian_visibility_recovery(self):
        x = np.linspace(-10, 10, 8001)
        broad = 1.0 * np.exp(-x**2 / (2 * 2.0**2))
        narrow = 0.35 * np.exp(-x**2 / (2 * 0.12**2))
        f = two_scale_features(x, broad + narrow)
        expected = 0.35 / (0.35 + 1.0)
        assert f.visibility == pytest.approx(expected, rel=0.01)
        assert f.narrow_fwhm == pytest.approx(
            2 * math.sqrt(2 * math.log(2)) * 0.12, rel=0.05)
        assert f.broad_fwhm == pytest.approx(
            2 * math.sqrt(2 * math.log(2)) * 2.0, rel=0.05)

    def test_symmetric_profile_centered(self):
        x = np.linspace(-5, 5, 2001)
        y = np.exp(-x**2) + 0.2 * np.exp(-x**2 / 0.01)
        f = two_scale_features(x, y)
        k0 = np.argmax(f.narrow)
        assert abs(x[k0]) < 0.05

    def test_no_narrow_feature_reports_nan(self):
        x = np.linspace(-5, 5, 2001)
        y = np.exp(-x**2 / 8.0)
        f = two_scale_features(x, y)
        assert f.narrow_sign == 0 or abs(f.narrow_height) < 1e-6
