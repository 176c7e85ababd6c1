"""Pathwise integral evaluators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltsurf import (LEBESGUE, ConfigError, MeasureSpec, SdeSpec,
                    continuous_qv_measure, ito_integral, jump_sum,
                    measure_integral, simulate_jump_diffusion,
                    stieltjes_integral, two_point)
from ltsurf.calculus import iter_jumps, local_time_time_integral


def _bundle(seed=3, sigma=0.5, rate=2.0):
    spec = SdeSpec(mu_x=0.1, sigma=sigma, lambda_x=1.0,
                   rate_y=rate, jump_law_y=two_point(-0.4, 0.6), x0=0.3)
    return simulate_jump_diffusion(spec, 1.0, 200, seed)


class TestStieltjes:
    def test_linear_exact(self):
        t = np.linspace(0, 1, 11)
        # int of 1 against g(t) = 2t is 2
        assert stieltjes_integral(np.ones_like(t), 2 * t) == pytest.approx(2.0)

    def test_misaligned_rejected(self):
        with pytest.raises(ConfigError):
            stieltjes_integral([1.0, 2.0], [0.0, 1.0, 2.0])

    @given(st.integers(min_value=2, max_value=40), st.floats(-5, 5),
           st.floats(-5, 5))
    @settings(max_examples=60, deadline=None)
    def test_linearity_in_integrand(self, n, c1, c2):
        rng = np.random.default_rng(n)
        f, h, g = rng.normal(size=(3, n))
        lhs = stieltjes_integral(c1 * f + c2 * h, g)
        rhs = c1 * stieltjes_integral(f, g) + c2 * stieltjes_integral(h, g)
        assert lhs == pytest.approx(rhs, abs=1e-9)


class TestItoIntegral:
    def test_continuous_only_drops_jump_steps(self):
        b = _bundle()
        flags = b.grid.jump_flags
        full = ito_integral(np.ones_like(b.x_path), b.x_path, flags)
        cont = ito_integral(np.ones_like(b.x_path), b.x_path, flags,
                            continuous_only=True)
        dropped = np.sum(np.diff(b.x_path)[flags[1:]])
        assert full - cont == pytest.approx(dropped)

    def test_requires_flags_when_continuous_only(self):
        with pytest.raises(ConfigError):
            ito_integral([1.0, 1.0], [0.0, 1.0], continuous_only=True)


class TestQvMeasure:
    def test_analytic_constant_sigma(self):
        b = _bundle(sigma=0.5)
        qv = continuous_qv_measure(b, qv_mode="analytic")
        assert np.sum(qv) == pytest.approx(0.25 * 1.0)

    def test_realized_excludes_jumps(self):
        b = _bundle()
        qv = continuous_qv_measure(b, qv_mode="realized")
        np.testing.assert_array_equal(qv, np.square(b.diffusion_increments()))

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            continuous_qv_measure(_bundle(), qv_mode="exotic")


class TestJumpSum:
    def test_sums_jump_increments(self):
        b = _bundle()
        total = jump_sum(b, lambda ctx: ctx.dx)
        assert total == pytest.approx(np.sum(b.k_jump_increments))

    def test_contexts_expose_left_limits(self):
        b = _bundle()
        for ctx in iter_jumps(b):
            assert ctx.x == pytest.approx(ctx.x_pre + ctx.dx)
            assert ctx.dm == 0.0


class TestMeasureIntegral:
    def test_lebesgue_of_one_is_t(self):
        b = _bundle()
        val = measure_integral(np.ones_like(b.times), LEBESGUE, b.grid)
        assert val == pytest.approx(1.0)

    def test_on_grid_atom(self):
        b = _bundle(rate=0.0)
        mu = MeasureSpec(density=None, atoms=((0.5, 2.0),))
        f = b.times.copy()
        assert measure_integral(f, mu, b.grid) == pytest.approx(1.0)

    def test_off_grid_atom_warns_and_snaps_right(self):
        b = _bundle(rate=0.0)  # uniform grid, 200 steps
        mu = MeasureSpec(density=None, atoms=((0.50001, 1.0),))
        with pytest.warns(UserWarning):
            val = measure_integral(b.times, mu, b.grid)
        assert val == pytest.approx(0.505)

    def test_atom_outside_range_rejected(self):
        b = _bundle(rate=0.0)
        mu = MeasureSpec(atoms=((1.5, 1.0),))
        with pytest.raises(ConfigError):
            measure_integral(b.times, mu, b.grid)


def test_local_time_time_integral_matches_stieltjes():
    values = np.array([0.0, 0.0, 0.5, 0.5, 1.25])
    f = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    assert local_time_time_integral(f, values) == pytest.approx(
        2.0 * 0.5 + 4.0 * 0.75)
