"""Local-time estimators and the occupation-time identity."""

import numpy as np
import pytest

from ltsurf import (ConfigError, SdeSpec, constant_surface,
                    local_time_mollifier, local_time_occupation,
                    local_time_tanaka_residual, occupation_formula_check,
                    simulate_jump_diffusion, two_point)
from ltsurf.localtime import DEFAULT_MOLLIFIER


def _brownian_bundle(seed=5, n_steps=4000):
    return simulate_jump_diffusion(SdeSpec(sigma=1.0), 1.0, n_steps, seed)


def _drift_bundle(mu=1.0, x0=-0.5, n_steps=1000):
    return simulate_jump_diffusion(SdeSpec(mu_x=mu, x0=x0), 1.0, n_steps, 0)


class TestKernel:
    def test_unit_mass_closed_form(self):
        z = np.linspace(0, 1, 100001)
        mass = np.trapezoid(DEFAULT_MOLLIFIER.evaluate(z), z) if hasattr(
            np, "trapezoid") else np.trapz(DEFAULT_MOLLIFIER.evaluate(z), z)
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_support_and_sign(self):
        z = np.linspace(-1, 2, 301)
        vals = DEFAULT_MOLLIFIER.evaluate(z)
        assert np.all(vals >= 0)
        assert np.all(vals[(z < 0) | (z > 1)] == 0)


class TestOccupation:
    def test_zero_qv_gives_zero(self):
        # X_s = s crosses the level but has no continuous quadratic variation
        b = _drift_bundle(mu=1.0, x0=0.0)
        lt = local_time_occupation(b, 0.5, eps=0.01)
        assert np.all(lt.values == 0.0)

    def test_path_away_from_level_gives_zero(self):
        b = _brownian_bundle()
        level = float(b.x_path.min()) - 1.0
        lt = local_time_occupation(b, level, eps=0.5)
        assert np.all(lt.values == 0.0)

    def test_nondecreasing_and_starts_at_zero(self):
        b = _brownian_bundle()
        for side in ("right", "symmetric"):
            lt = local_time_occupation(b, 0.0, eps=0.05, side=side)
            assert lt.values[0] == 0.0
            assert np.all(np.diff(lt.values) >= 0)

    def test_support_property(self):
        b = _brownian_bundle()
        eps = 0.05
        lt = local_time_occupation(b, 0.0, eps=eps)
        inc = np.diff(lt.values)
        far = np.abs(b.x_pre[:-1]) > eps
        assert np.all(inc[far] == 0.0)

    def test_bad_args(self):
        b = _brownian_bundle(n_steps=10)
        with pytest.raises(ConfigError):
            local_time_occupation(b, 0.0, eps=0.0)
        with pytest.raises(ConfigError):
            local_time_occupation(b, 0.0, eps=0.1, side="left")


class TestMollifier:
    def test_pure_drift_plus_jumps_gives_zero(self):
        spec = SdeSpec(mu_x=1.0, lambda_x=1.0, rate_y=3.0,
                       jump_law_y=two_point(-0.5, 0.5), x0=-0.5)
        b = simulate_jump_diffusion(spec, 1.0, 500, 2)
        lt = local_time_mollifier(b, 0.0, n=10)
        assert np.all(lt.values == 0.0)

    def test_agrees_with_occupation_within_ten_percent(self):
        # per-path median over an ensemble, n = 100 vs eps = 1/n
        diffs = []
        for seed in range(60):
            b = simulate_jump_diffusion(SdeSpec(sigma=1.0), 1.0, 10000, seed)
            mol = local_time_mollifier(b, 0.0, n=100).final
            occ = local_time_occupation(b, 0.0, eps=0.01).final
            denom = max(occ, 1e-12)
            diffs.append(abs(mol - occ) / denom)
        assert np.median(diffs) < 0.10

    def test_surface_argument(self):
        b = _brownian_bundle()
        via_level = local_time_mollifier(b, 0.0, n=50).values
        via_surface = local_time_mollifier(b, constant_surface(0.0), n=50).values
        np.testing.assert_allclose(via_level, via_surface)

    def test_n_validation(self):
        with pytest.raises(ConfigError):
            local_time_mollifier(_brownian_bundle(n_steps=10), 0.0, n=0)


class TestTanakaResidual:
    def test_deterministic_crossing_error_bounded_by_grid(self):
        # X_s = s - 0.5 crossing level 0: the rearranged series picks up a
        # single O(dt) term at the crossing step and is zero elsewhere
        b = _drift_bundle(mu=1.0, x0=-0.5, n_steps=1000)
        dt = 1.0 / 1000
        lt = local_time_tanaka_residual(b, 0.0)
        assert lt.final <= 2 * dt + 1e-15
        # one genuine increment at the crossing; everything else is fp dust
        inc = np.diff(lt.values)
        assert np.count_nonzero(np.abs(inc) > 1e-12) <= 1

    def test_level_far_below_path_gives_zero(self):
        b = _brownian_bundle()
        lt = local_time_tanaka_residual(b, float(b.x_path.min()) - 1.0)
        np.testing.assert_allclose(lt.values, 0.0, atol=1e-12)

    def test_jump_only_path_gives_zero(self):
        spec = SdeSpec(mu_x=1.0, lambda_x=1.0, rate_y=3.0,
                       jump_law_y=two_point(0.4, 0.7), x0=0.5)
        b = simulate_jump_diffusion(spec, 1.0, 300, 4)
        lt = local_time_tanaka_residual(b, 0.0)  # path stays above 0
        np.testing.assert_allclose(lt.values, 0.0, atol=1e-12)


class TestOccupationFormula:
    def test_g_zero_trivial(self):
        b = _brownian_bundle()
        lhs, rhs, rel = occupation_formula_check(
            b, lambda x: np.zeros_like(x), np.linspace(-3, 3, 50), eps=0.05)
        assert lhs == 0.0 and rhs == 0.0

    def test_warning_when_grid_misses_path_range(self):
        b = _brownian_bundle()
        with pytest.warns(UserWarning):
            occupation_formula_check(b, lambda x: np.ones_like(x),
                                     np.linspace(-0.01, 0.01, 5), eps=0.05)

    def test_gaussian_bump_cross_consistency(self):
        g = lambda x: np.exp(-0.5 * (x / 0.3) ** 2)
        rels = []
        for seed in range(40):
            b = simulate_jump_diffusion(SdeSpec(sigma=1.0), 1.0, 10000, seed)
            lo, hi = b.x_path.min() - 0.05, b.x_path.max() + 0.05
            lhs, rhs, rel = occupation_formula_check(
                b, g, np.linspace(lo, hi, 200), eps=0.01)
            rels.append(rel)
        assert np.mean(rels) < 0.05
