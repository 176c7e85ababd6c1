"""Surfaces, Moreau envelopes and pathwise variation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltsurf import (ConfigError, Surface, build_grid, constant_surface,
                    envelope_path, moreau_envelope, pathwise_variation)

BOX = ((-2.0, 2.0), (-2.0, 2.0))
ABS = Surface(lambda t, a: np.abs(np.asarray(a, float)), None, "abs")


class TestMoreauEnvelope:
    def test_never_exceeds_b(self):
        for a in np.linspace(-1.5, 1.5, 11):
            env = moreau_envelope(ABS, 5.0, (0.0, float(a)), BOX)
            assert env <= abs(a) + 1e-12

    def test_closed_form_for_abs(self):
        # for |a| >= 1/m the envelope of |a| is |a| - 1/(2m)
        m = 50.0
        for a in (0.5, -0.8, 1.2):
            env = moreau_envelope(ABS, m, (0.0, a), BOX)
            assert abs(env - (abs(a) - 1.0 / (2 * m))) < 1e-6

    def test_monotone_in_m(self):
        for a in np.linspace(-1, 1, 7):
            vals = [moreau_envelope(ABS, m, (0.0, float(a)), BOX)
                    for m in (1.0, 10.0, 100.0, 1000.0)]
            assert all(x <= y for x, y in zip(vals, vals[1:]))

    def test_constant_surface_is_its_own_envelope(self):
        surf = constant_surface(2.5)
        assert moreau_envelope(surf, 1.0, (0.0, 0.0), BOX) == pytest.approx(2.5)

    def test_input_validation(self):
        with pytest.raises(ConfigError):
            moreau_envelope(ABS, -1.0, (0.0, 0.0), BOX)
        with pytest.raises(ConfigError):
            moreau_envelope(ABS, 1.0, (5.0, 0.0), BOX)  # query outside box
        with pytest.raises(ConfigError):
            moreau_envelope(ABS, 1.0, (0.0, 0.0), ((1.0, -1.0), (-1.0, 1.0)))


class TestEnvelopePath:
    def test_lipschitz_surface_returned_directly(self):
        surf = Surface(lambda t, a: 1.0 + 0.5 * np.asarray(a, float), 0.5)
        grid = build_grid(1.0, 10)
        a_path = np.linspace(-1, 1, 11)
        np.testing.assert_array_equal(
            envelope_path(surf, 100.0, a_path, grid), 1.0 + 0.5 * a_path)

    def test_non_lipschitz_surface_below_b(self):
        grid = build_grid(1.0, 5)
        a_path = np.linspace(0.1, 1.0, 6)
        env = envelope_path(ABS, 10.0, a_path, grid)
        assert np.all(env <= np.abs(a_path) + 1e-12)


class TestPathwiseVariation:
    def test_monotone_series(self):
        s = np.array([0.0, 1.0, 2.5, 3.0])
        assert pathwise_variation(s) == pytest.approx(3.0)

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            pathwise_variation([])

    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=2,
                    max_size=30))
    @settings(max_examples=100, deadline=None)
    def test_at_least_net_change(self, vals):
        s = np.asarray(vals)
        assert pathwise_variation(s) >= abs(s[-1] - s[0]) - 1e-9 * max(
            1.0, abs(s[-1] - s[0]))

    @given(st.lists(st.floats(min_value=-100, max_value=100), min_size=2,
                    max_size=20))
    @settings(max_examples=100, deadline=None)
    def test_scaling(self, vals):
        s = np.asarray(vals)
        assert pathwise_variation(2.0 * s) == pytest.approx(
            2.0 * pathwise_variation(s))
