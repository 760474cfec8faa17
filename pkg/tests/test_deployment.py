"""
Tests for scenario parameters, HPPP sampling, the active-BS density law and
the simulation window radius
"""

import math
import unittest

import numpy as np
from pydantic import ValidationError
from scipy import stats

from core.channel import three_gpp_case
from core.deployment import (
    NetworkParams,
    active_bs_density,
    dbm_to_mw,
    distance_3d,
    mean_bs_spacing,
    radius_floor,
    required_sim_radius,
    sample_hppp,
)
from core.errors import DomainError
from scheduler.pool import trial_rng


class TestNetworkParams(unittest.TestCase):

    def test_external_units(self):
        params = NetworkParams.from_external(lambda_per_km2=1e4, rho_per_km2=300.0)
        self.assertAlmostEqual(params.height_km, 0.0085)
        self.assertAlmostEqual(params.tx_power_mw, 251.18864315, places=6)
        self.assertAlmostEqual(params.noise_power_mw, 10 ** -9.5)
        self.assertEqual(params.gamma0, 1.0)
        self.assertEqual(params.idle_exponent, 3.5)

    def test_external_round_trip(self):
        params = NetworkParams.from_external(2e3, 600.0, height_m=3.5, gamma0_db=3.0)
        ext = params.external()
        self.assertAlmostEqual(ext["height_m"], 3.5)
        self.assertAlmostEqual(ext["gamma0_db"], 3.0)
        self.assertAlmostEqual(ext["tx_power_dbm"], 24.0)

    def test_validation(self):
        with self.assertRaises(ValidationError):
            NetworkParams(bs_density=0.0, ue_density=300.0)
        with self.assertRaises(ValidationError):
            NetworkParams(bs_density=1e3, ue_density=300.0, height_km=-0.001)
        with self.assertRaises(ValidationError):
            NetworkParams(bs_density=1e3, ue_density=300.0, epsilon=1.0)

    def test_infinite_densities_allowed(self):
        params = NetworkParams(bs_density=math.inf, ue_density=math.inf)
        self.assertTrue(math.isinf(params.replace(ue_density=300.0).bs_density))

    def test_unit_helpers(self):
        self.assertAlmostEqual(dbm_to_mw(0.0), 1.0)
        self.assertAlmostEqual(distance_3d(0.003, 0.004), 0.005)
        self.assertAlmostEqual(mean_bs_spacing(1e4), 0.01)
        with self.assertRaises(DomainError):
            distance_3d(-1.0, 0.0085)


class TestActiveDensity(unittest.TestCase):

    def test_bounds_on_grid(self):
        for lam in np.geomspace(1.0, 1e7, 20):
            for rho in np.geomspace(1.0, 1e5, 20):
                active = active_bs_density(float(lam), float(rho))
                self.assertGreater(active, 0.0)
                self.assertLessEqual(active, min(lam, rho) * (1 + 1e-12))

    def test_monotone_in_lambda(self):
        values = [active_bs_density(float(lam), 300.0) for lam in np.geomspace(10.0, 1e8, 60)]
        self.assertTrue(all(b >= a for a, b in zip(values[:-1], values[1:])))

    def test_monotone_in_rho(self):
        for lam in (1e2, 1e4, 1e6):
            values = [active_bs_density(lam, float(rho)) for rho in np.geomspace(1.0, 1e6, 60)]
            self.assertTrue(all(b > a for a, b in zip(values[:-1], values[1:])))

    def test_monotone_on_grid(self):
        lams = np.geomspace(10.0, 1e7, 25)
        rhos = np.geomspace(10.0, 1e5, 25)
        table = np.array([[active_bs_density(float(lam), float(rho)) for rho in rhos] for lam in lams])
        self.assertTrue(np.all(np.diff(table, axis=0) >= 0.0))
        self.assertTrue(np.all(np.diff(table, axis=1) >= 0.0))

    def test_dense_limit(self):
        self.assertAlmostEqual(active_bs_density(1e9, 300.0) / 300.0, 1.0, places=4)
        self.assertEqual(active_bs_density(math.inf, 300.0), 300.0)
        self.assertEqual(active_bs_density(1e3, math.inf), 1e3)

    def test_known_value(self):
        # 1e3 * (1 - (1 + 300/3500)^-3.5)
        self.assertAlmostEqual(active_bs_density(1e3, 300.0), 1e3 * (1 - (1 + 300 / 3500) ** -3.5), places=9)

    def test_idle_exponent(self):
        self.assertLess(active_bs_density(1e3, 300.0, q=1.0), active_bs_density(1e3, 300.0, q=3.5))

    def test_rejects_non_positive(self):
        for args in [(0.0, 300.0), (1e3, 0.0), (1e3, 300.0, 0.0), (-1.0, 1.0)]:
            with self.assertRaises(DomainError):
                active_bs_density(*args)


class TestSampling(unittest.TestCase):

    def test_poisson_count(self):
        counts = [sample_hppp(100.0, 1.0, trial_rng(11, t)).count for t in range(400)]
        expected = 100.0 * math.pi
        self.assertAlmostEqual(np.mean(counts) / expected, 1.0, delta=0.02)
        self.assertAlmostEqual(np.var(counts) / expected, 1.0, delta=0.2)

    def test_points_inside_window(self):
        points = sample_hppp(500.0, 0.3, trial_rng(4, 0))
        self.assertTrue(np.all(points.radii <= 0.3))
        self.assertEqual(points.points.shape, (points.count, 2))

    def test_uniform_in_area(self):
        radii = np.concatenate([sample_hppp(1000.0, 1.0, trial_rng(5, t)).radii for t in range(20)])
        # Half of the points lie inside radius 1/sqrt(2).
        self.assertAlmostEqual(np.mean(radii < 1.0 / math.sqrt(2.0)), 0.5, delta=0.02)

    def test_uniform_over_equal_area_annuli(self):
        n_bins = 20
        points = sample_hppp(1e5 / math.pi, 1.0, trial_rng(21, 0))
        self.assertGreater(points.count, 9e4)
        edges = np.sqrt(np.linspace(0.0, 1.0, n_bins + 1))
        counts, _ = np.histogram(points.radii, bins=edges)
        self.assertGreater(stats.chisquare(counts).pvalue, 1e-3)
        angles = np.arctan2(points.points[:, 1], points.points[:, 0])
        sectors, _ = np.histogram(angles, bins=np.linspace(-math.pi, math.pi, n_bins + 1))
        self.assertGreater(stats.chisquare(sectors).pvalue, 1e-3)

    def test_same_rng_same_points(self):
        a = sample_hppp(200.0, 0.5, trial_rng(9, 3))
        b = sample_hppp(200.0, 0.5, trial_rng(9, 3))
        np.testing.assert_array_equal(a.points, b.points)

    def test_empty_density(self):
        self.assertEqual(sample_hppp(0.0, 1.0, trial_rng(0, 0)).count, 0)

    def test_rejects_bad_inputs(self):
        with self.assertRaises(DomainError):
            sample_hppp(math.inf, 1.0, trial_rng(0, 0))
        with self.assertRaises(DomainError):
            sample_hppp(10.0, 0.0, trial_rng(0, 0))


class TestSimRadius(unittest.TestCase):

    def setUp(self):
        self.model = three_gpp_case()

    def test_floor(self):
        params = NetworkParams.from_external(1e3, 300.0)
        self.assertAlmostEqual(radius_floor(params), 10.0 / math.sqrt(1e3))
        self.assertGreaterEqual(required_sim_radius(params, self.model), radius_floor(params))

    def test_smaller_tail_needs_larger_window(self):
        params = NetworkParams.from_external(1e6, 300.0)
        loose = required_sim_radius(params, self.model, tail_fraction=1e-2)
        tight = required_sim_radius(params, self.model, tail_fraction=1e-4)
        self.assertGreater(tight, loose)
        self.assertGreaterEqual(loose, radius_floor(params))

    def test_zero_height(self):
        params = NetworkParams.from_external(1e4, 300.0, height_m=0.0)
        self.assertGreaterEqual(required_sim_radius(params, self.model), radius_floor(params))

    def test_rejects_bad_tail_fraction(self):
        params = NetworkParams.from_external(1e3, 300.0)
        for fraction in (0.0, 1.0):
            with self.assertRaises(DomainError):
                required_sim_radius(params, self.model, tail_fraction=fraction)


if __name__ == '__main__':
    unittest.main()
