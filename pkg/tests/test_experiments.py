"""Study harness: rate fits, serialization, study verdicts and determinism."""

import numpy as np
import pytest

from torus4nls.dynamics import CoefficientSet, SolverConfig, integrate
from torus4nls.exact import integrable_coefficients, standing_wave
from torus4nls.experiments import (
    RateFit,
    StudyResult,
    bona_smith_rate_study,
    conservation_study,
    continuity_study,
    eps_convergence_study,
    inequality_sweeps,
    riccati_study,
    write_study,
)
from torus4nls.functionals import certify_cm
from torus4nls.mollifier import mollify
from torus4nls.sampling import (
    decay_field,
    mode_pair_field,
    random_field,
    rng_for,
)
from torus4nls.spectral import GridSpec, sobolev_distance, zero_field


class TestRateFit:
    def test_exact_power_law(self):
        xs = [0.5**k for k in range(1, 7)]
        ys = [3.7 * x**2.5 for x in xs]
        fit = RateFit.fit(xs, ys)
        assert fit.slope == pytest.approx(2.5, rel=1e-12)
        assert fit.intercept == pytest.approx(np.log(3.7), rel=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_noise_lowers_r_squared(self):
        rng = np.random.default_rng(1)
        xs = [0.5**k for k in range(1, 9)]
        ys = [x * np.exp(rng.normal(0, 0.3)) for x in xs]
        fit = RateFit.fit(xs, ys)
        assert fit.r_squared < 1.0

    @pytest.mark.parametrize("xs,ys", [([1.0], [2.0]), ([1, 2], [0.0, 1.0]), ([1, -1], [1, 1])])
    def test_rejects_bad_data(self, xs, ys):
        with pytest.raises(ValueError):
            RateFit.fit(xs, ys)


class TestWriteStudy:
    def make_result(self):
        return StudyResult(
            name="demo",
            parameters={"alpha": 1.5, "labels": [1, 2]},
            thresholds={"tol": 1e-6},
            tables={"main": {"param": [1.0, 2.0], "value": [0.25, 0.125]}},
            verdict="pass",
        )

    def test_files_and_determinism(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        paths_a = write_study(self.make_result(), a)
        write_study(self.make_result(), b)
        for pa in paths_a:
            pb = b / pa.name
            assert pa.read_bytes() == pb.read_bytes()

    def test_csv_shape(self, tmp_path):
        write_study(self.make_result(), tmp_path)
        text = (tmp_path / "demo__main.csv").read_text()
        lines = text.splitlines()
        assert lines[0] == "param,value"
        assert len(lines) == 3
        assert text.endswith("\n") and "\r" not in text

    def test_rejects_bad_first_column(self, tmp_path):
        res = self.make_result()
        res.tables = {"bad": {"value": [1.0]}}
        with pytest.raises(ValueError):
            write_study(res, tmp_path)

    def test_rejects_ragged_table(self, tmp_path):
        res = self.make_result()
        res.tables = {"bad": {"param": [1.0, 2.0], "value": [1.0]}}
        with pytest.raises(ValueError):
            write_study(res, tmp_path)


class TestConservationStudy:
    def test_zero_data_passes_with_zero_drift(self):
        grid = GridSpec(32)
        cfg = SolverConfig(dt=2e-3, sobolev_index_m=4)
        res = conservation_study(zero_field(grid), 1.0, 0.02, cfg)
        assert res.verdict == "pass"
        assert all(d == 0.0 for d in res.tables["drifts"]["drift_coarse"])

    def test_standing_wave_near_steady(self):
        grid = GridSpec(32)
        coeffs = integrable_coefficients(1.0)
        psi0, _ = standing_wave(grid, 0.3, 1, coeffs)
        cfg = SolverConfig(dt=1e-3, sobolev_index_m=4)
        res = conservation_study(psi0, 1.0, 0.05, cfg)
        assert max(res.tables["drifts"]["drift_coarse"]) <= 1e-10

    def test_requires_unregularized(self):
        grid = GridSpec(32)
        cfg = SolverConfig(dt=1e-3, epsilon=0.1, sobolev_index_m=4)
        with pytest.raises(ValueError):
            conservation_study(zero_field(grid), 1.0, 0.01, cfg)

    def test_verdict_consistent_with_thresholds(self):
        grid = GridSpec(64)
        data = random_field(grid, rng_for(42), decay=2.0, hm_norm=0.4, m=4, max_mode=4)
        cfg = SolverConfig(dt=2e-3, sobolev_index_m=4)
        res = conservation_study(data, 1.0, 0.1, cfg)
        drifts = res.tables["drifts"]["drift_coarse"]
        gains = res.tables["drifts"]["gain"]
        tol = res.thresholds["drift_tol"]
        floor = res.thresholds["drift_floor"]
        min_gain = res.thresholds["min_gain"]
        expect_pass = all(d <= tol for d in drifts) and all(
            d <= floor or g >= min_gain for d, g in zip(drifts, gains)
        )
        assert (res.verdict == "pass") == expect_pass


class TestBonaSmithStudy:
    def test_critical_data_passes(self):
        res = bona_smith_rate_study(4, [0, 1, 2], num_modes=1024)
        assert res.verdict == "pass"
        slopes = dict(zip(res.tables["fits"]["param"], res.tables["fits"]["slope"]))
        assert 0.85 <= slopes[1.0] <= 1.15
        assert 1.7 <= slopes[2.0] <= 2.3

    def test_band_limited_superconvergence_inconclusive(self):
        # mollifying far below the band leaves machine-zero errors
        grid = GridSpec(256)
        data = random_field(grid, rng_for(3), decay=1.0, l2_mass=1.0, max_mode=4)
        res = bona_smith_rate_study(
            4, [1], data=data, eps_ladder=[2.0**-k for k in range(6, 12)]
        )
        assert res.verdict == "inconclusive"

    def test_rejects_bad_l(self):
        with pytest.raises(ValueError):
            bona_smith_rate_study(2, [3])


class TestEpsConvergenceStudy:
    def test_single_point_ladder_inconclusive(self):
        grid = GridSpec(32)
        data = decay_field(grid, 5.0, amp=0.05)
        cfg = SolverConfig(dt=1e-3, sobolev_index_m=4)
        res = eps_convergence_study(data, 4, integrable_coefficients(1.0), 0.01,
                                    [0.125], cfg)
        assert res.verdict == "inconclusive"

    def test_linear_case_matches_closed_form(self):
        # lambda = 0: the run is exactly W_eps(t) applied to mollified data
        grid = GridSpec(64)
        data = decay_field(grid, 6.0, amp=0.5)
        coeffs = CoefficientSet(nu=1.0)
        cfg = SolverConfig(dt=1e-3, sobolev_index_m=4)
        ladder = [2.0**-k for k in range(3, 7)]
        t_end = 0.02
        res = eps_convergence_study(data, 4, coeffs, t_end, ladder, cfg)
        eps_ref = min(ladder) / 4.0
        from torus4nls.dynamics import semigroup_apply

        ref = semigroup_apply(mollify(data, eps_ref), t_end, eps_ref, 1.0)
        for eps, h1 in zip(res.tables["differences"]["param"],
                           res.tables["differences"]["h1_diff"]):
            state = semigroup_apply(mollify(data, eps), t_end, eps, 1.0)
            assert h1 == pytest.approx(sobolev_distance(state, ref, 1), rel=1e-6)
        assert res.verdict == "pass"
        assert res.tables["fits"]["slope"][0] >= 1.0

    def test_rejects_small_m(self):
        grid = GridSpec(32)
        cfg = SolverConfig(dt=1e-3, sobolev_index_m=3)
        with pytest.raises(ValueError):
            eps_convergence_study(zero_field(grid), 3, integrable_coefficients(1.0),
                                  0.01, [0.1, 0.05], cfg)


class TestRiccatiStudy:
    def test_single_mode_family_quotients_tiny(self):
        # one populated mode: every growth integrand vanishes, energies are
        # steady up to stepper round-off
        grid = GridSpec(64)
        coeffs = integrable_coefficients(1.0)
        from torus4nls.exact import plane_wave

        family = [plane_wave(grid, 0.3 / (1 + n**2) ** 2, n) for n in (2, 4, 8)]
        cfg = SolverConfig(dt=1e-4, sobolev_index_m=4)
        res = riccati_study(family, 4, coeffs, cfg, 2e-3, c_m=10.0)
        assert max(res.tables["quotients"]["q_modified"]) < 1e-3
        assert max(res.tables["quotients"]["q_raw"]) < 1e-3

    def test_no_corrections_means_equal_quotients(self):
        # lambda3..6 = 0 and c_m = 0 make the corrected energy identical to
        # the plain one
        grid = GridSpec(64)
        coeffs = CoefficientSet(nu=1.0, lambda1=-0.5, lambda2=-0.375)
        family = [mode_pair_field(grid, k, 1.0, 4) for k in (4, 8)]
        cfg = SolverConfig(dt=1e-5, sobolev_index_m=4)
        res = riccati_study(family, 4, coeffs, cfg, 2e-4, c_m=0.0,
                            raw_growth_min=0.0, spread_max=np.inf)
        q = res.tables["quotients"]
        assert np.allclose(q["q_modified"], q["q_raw"], rtol=1e-10)

    def test_contrast_on_pair_family(self):
        grid = GridSpec(256)
        coeffs = integrable_coefficients(1.0)
        cert = certify_cm(4, coeffs, 1.0, trials=40, rng_seed=2024, target="sobolev")
        family = [mode_pair_field(grid, k, 2.0, 4) for k in (4, 8, 16, 32)]
        cfg = SolverConfig(dt=1e-6, sobolev_index_m=4)
        res = riccati_study(family, 4, coeffs, cfg, 2e-4, cert.c_m)
        assert res.verdict == "pass"
        q = res.tables["quotients"]
        assert max(q["q_modified"]) / min(q["q_modified"]) <= 2.0
        assert q["q_raw"][-1] / q["q_raw"][0] >= 4.0


class TestContinuityStudy:
    def test_same_data_same_trajectory(self):
        # delta = 0 perturbation: bitwise-identical runs (uniqueness in the
        # deterministic sense)
        grid = GridSpec(32)
        data = decay_field(grid, 5.0, amp=0.2)
        coeffs = integrable_coefficients(1.0)
        cfg = SolverConfig(dt=1e-3, sobolev_index_m=4)
        a = integrate(data, 0.02, cfg, coeffs)
        b = integrate(data, 0.02, cfg, coeffs)
        for sa, sb in zip(a, b):
            assert np.array_equal(sa.state.coeffs, sb.state.coeffs)

    def test_gauge_rotation_commutes_with_flow(self, generic_coeffs):
        grid = GridSpec(32)
        data = decay_field(grid, 5.0, amp=0.2)
        cfg = SolverConfig(dt=1e-3, sobolev_index_m=4)
        theta = 1.234
        a = integrate(np.exp(1j * theta) * data, 0.02, cfg, generic_coeffs)
        b = integrate(data, 0.02, cfg, generic_coeffs)
        for sa, sb in zip(a, b):
            assert np.allclose(
                sa.state.coeffs, np.exp(1j * theta) * sb.state.coeffs, atol=1e-13
            )

    def test_linear_scaling_verdict(self):
        grid = GridSpec(64)
        data = random_field(grid, rng_for(11), decay=6.0, hm_norm=0.4, m=4)
        coeffs = integrable_coefficients(1.0)
        cfg = SolverConfig(dt=1e-3, sobolev_index_m=4)
        res = continuity_study(data, [1e-2, 1e-3, 1e-4, 1e-5], 4, coeffs, 0.05,
                               cfg, rng_seed=7)
        assert res.verdict == "pass"
        assert 0.85 <= res.tables["fits"]["slope"][0] <= 1.15
        q = res.tables["scaling"]["gronwall_quotient"]
        assert max(q) / min(q) <= 2.0


class TestInequalitySweeps:
    def test_sweep_passes(self):
        # enough trials for the empirical sup to saturate across resolutions
        res = inequality_sweeps(123, 200)
        assert res.verdict == "pass"
        assert res.parameters["failures"] == []

    def test_deterministic_given_seed(self):
        a = inequality_sweeps(5, 30)
        b = inequality_sweeps(5, 30)
        assert a.tables == b.tables

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            inequality_sweeps(1, 0)
