import math

import numpy as np
import pytest

from heatlab import geometry, potential
from heatlab.errors import ConfigurationError, DomainError
from heatlab.potential import DecayProfile, Potential


class TestProfiles:
    def test_inverse_square_value(self):
        prof = DecayProfile("inverse-square", 10.0)
        assert potential.eval_profile(prof, 0.1) == pytest.approx(1000.0)

    def test_power_value(self):
        prof = DecayProfile("power", 1.0, exponent=1.0)
        assert potential.eval_profile(prof, 0.5) == pytest.approx(2.0)

    def test_log_value_and_clamp(self):
        prof = DecayProfile("log", 1.0)
        assert potential.eval_profile(prof, math.exp(-1.0)) == pytest.approx(1.0)
        assert potential.eval_profile(prof, 1.5) == 0.0

    def test_profiles_nonincreasing(self, rng):
        rs = np.sort(rng.uniform(1e-3, 2.0, size=200))
        for prof in (DecayProfile("inverse-square", 3.0),
                     DecayProfile("power", 2.0, exponent=1.5),
                     DecayProfile("log", 0.7)):
            vals = potential.eval_profile(prof, rs)
            assert np.all(np.diff(vals) <= 1e-12)

    def test_domain_error_at_zero(self):
        with pytest.raises(DomainError):
            potential.eval_profile(DecayProfile("inverse-square", 1.0), 0.0)

    def test_inverse_square_flatness_constant(self, rng):
        prof = DecayProfile("inverse-square", 4.5)
        rs = rng.uniform(1e-4, 1.0, size=100)
        assert np.allclose(rs * rs * potential.eval_profile(prof, rs), 4.5)

    def test_bad_family(self):
        with pytest.raises(ConfigurationError):
            DecayProfile("gaussian", 1.0)


class TestEvalH:
    def test_zero_on_curve(self, straight_curve):
        pot = Potential(DecayProfile("inverse-square", 10.0), "parabolic",
                        curve=straight_curve)
        assert pot.evaluate((np.array([0.5]), 0.5)) == 0.0

    def test_inverse_square_at_unit_distance(self, straight_curve):
        pot = Potential(DecayProfile("inverse-square", 10.0), "parabolic",
                        curve=straight_curve)
        val = pot.evaluate((np.array([2.0]), 1.0))  # distance 1 (oracle)
        assert val == pytest.approx(math.exp(-10.0), rel=1e-6)

    def test_constant_floor(self):
        pot = Potential(None, "constant-floor", floor=1.0)
        assert pot.evaluate((np.array([3.0]), 0.2)) == 1.0

    def test_monotone_in_distance(self, rng):
        prof = DecayProfile("power", 2.0, exponent=1.0)
        pot = Potential(prof, "anisotropic")
        pts = [(0.0, np.array([r]), 0.0) for r in np.sort(rng.uniform(0.01, 2, 50))]
        vals = [pot.evaluate(p) for p in pts]
        assert np.all(np.diff(vals) >= -1e-15)

    def test_underflow_counted(self, straight_curve):
        pot = Potential(DecayProfile("inverse-square", 50.0), "parabolic",
                        curve=straight_curve)
        pts = np.linspace(0.01, 0.2, 32)[:, None]  # tiny distances off-curve
        vals, n_under = pot.evaluate_grid(pts, 0.0)
        assert n_under == pts.size
        assert np.all(vals == 0.0)

    def test_grid_matches_pointwise(self, straight_curve):
        pot = Potential(DecayProfile("inverse-square", 2.0), "parabolic",
                        curve=straight_curve)
        pts = np.array([[1.5], [2.0], [-0.7]])
        vals, _ = pot.evaluate_grid(pts, 0.8)
        for p, v in zip(pts, vals):
            assert v == pytest.approx(
                math.exp(-2.0 / geometry.parabolic_distance(
                    (p, 0.8), straight_curve, refine=False) ** 2), rel=1e-12)


class TestSplit:
    def setup_method(self):
        self.pot = Potential(DecayProfile("inverse-square", 8.0), "anisotropic")

    def test_gamma_zero_degenerates(self):
        pt = (0.2, np.array([0.3]), 0.01)
        w, e = potential.split_h(self.pot, 0.0, pt)
        assert w == 1.0
        assert e == pytest.approx(self.pot.evaluate(pt), rel=1e-12)

    def test_product_identity_bulk(self, rng):
        # the split must reassemble h to 1e-12 relative on 1e4 random points
        gamma = 2.5
        for _ in range(10_000):
            pt = (rng.uniform(-3, 3), np.array([rng.uniform(0.05, 1.5)]),
                  rng.uniform(0.0, 1.0))
            w, e = potential.split_h(self.pot, gamma, pt)
            h = self.pot.evaluate(pt)
            if h > 0:
                assert w * e == pytest.approx(h, rel=1e-12)

    def test_supercritical_gate(self):
        pt = (0.0, np.array([0.4]), 0.01)
        # N=2, p=3: requires gamma > 2
        w, e = potential.split_h(self.pot, 2.5, pt, p=3.0, n_dim=2)
        assert w > 0
        with pytest.raises(ConfigurationError):
            potential.split_h(self.pot, 2.0, pt, p=3.0, n_dim=2)

    def test_needs_anisotropic_distance(self, straight_curve):
        pot = Potential(DecayProfile("inverse-square", 8.0), "parabolic",
                        curve=straight_curve)
        with pytest.raises(ConfigurationError):
            potential.split_h(pot, 1.0, (np.array([0.3]), 0.2))

    def test_shifted_profile_matches_split(self):
        s = 0.37
        gamma = 1.2
        prof = self.pot.profile
        lt = potential.shifted_profile(prof, gamma, s)
        pt = (0.0, np.array([s]), 0.0)
        _, e = potential.split_h(self.pot, gamma, pt)
        assert e == pytest.approx(math.exp(-lt), rel=1e-12)
