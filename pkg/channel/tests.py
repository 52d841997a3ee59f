import math

import numpy as np
from django.test import SimpleTestCase

from domain.services import reference_scenario, validate_scenario
from domain.types import MobileOperator, MOKind
from .layout import (
    DistrictLayout, LayoutError, apportion, build_layout, demand_based_counts, generate_layout, label_static,
    spatial_order, ue_based_counts,
)
from .propagation import (
    Association, ChannelError, ChannelParams, PowerAllocation, UePlacement, build_rate_matrix, dbm_to_watts,
    draw_shadowing, draw_slot_shadowing, gain_from_loss_db, path_loss_db, place_ues, shannon_rate,
)


def _single_site():
    return DistrictLayout(radius_km=35.0, sites=np.array([[0.0, 0.0]]))


def _stacked_ues(n, x_km=1.0):
    """n UEs of one MO at the same point, all served by site 0."""
    return UePlacement(
        positions=(np.tile([x_km, 0.0], (n, 1)),),
        association=(np.zeros(n, dtype=np.int64),),
    )


# ---------------------------------------------------------------------------
# Layout
# ---------------------------------------------------------------------------
class GenerateLayoutTests(SimpleTestCase):
    def test_one_site_sits_at_origin(self):
        layout = generate_layout(1, 35.0, 11.0)
        np.testing.assert_allclose(layout.sites, [[0.0, 0.0]], atol=1e-12)

    def test_seven_sites_form_the_first_ring(self):
        layout = generate_layout(7, 35.0, 11.0)
        radii = np.hypot(layout.sites[:, 0], layout.sites[:, 1])
        self.assertAlmostEqual(radii[0], 0.0)
        np.testing.assert_allclose(radii[1:], [11.0] * 6, rtol=1e-12)

    def test_thirty_one_sites_fit_the_district(self):
        layout = generate_layout(31, 35.0, 11.0, strict=True)
        self.assertEqual(layout.n_sites, 31)
        radii = np.hypot(layout.sites[:, 0], layout.sites[:, 1])
        self.assertLessEqual(radii.max(), 35.0)
        self.assertAlmostEqual(radii.max(), math.sqrt(7) * 11.0, places=9)
        self.assertEqual(len({(round(x, 6), round(y, 6)) for x, y in layout.sites}), 31)

    def test_strict_layout_rejects_overflow(self):
        with self.assertRaises(LayoutError):
            generate_layout(31, 20.0, 11.0, strict=True)
        self.assertEqual(generate_layout(31, 20.0, 11.0).n_sites, 31)

    def test_rejects_empty_layout(self):
        with self.assertRaises(LayoutError):
            generate_layout(0, 35.0, 11.0)

    def test_spatial_order_runs_outwards(self):
        layout = generate_layout(19, 35.0, 11.0)
        order = spatial_order(layout)
        radii = [math.hypot(*layout.sites[k]) for k in order]
        self.assertEqual(radii, sorted(radii))


class StaticLabelTests(SimpleTestCase):
    def test_two_sites_two_mos(self):
        layout = generate_layout(2, 35.0, 11.0)
        self.assertEqual(label_static(layout, (1, 1)), (0, 1))

    def test_reference_counts_are_exact(self):
        layout = generate_layout(31, 35.0, 11.0)
        for counts in ((12, 18, 1), (9, 16, 6)):
            with self.subTest(counts=counts):
                labels = label_static(layout, counts)
                self.assertEqual(tuple(np.bincount(labels, minlength=3)), counts)

    def test_counts_must_cover_the_layout(self):
        layout = generate_layout(31, 35.0, 11.0)
        with self.assertRaises(LayoutError):
            label_static(layout, (12, 18, 2))
        with self.assertRaises(LayoutError):
            label_static(layout, (-1, 31, 1))

    def test_apportioned_counts_for_reference_scenario(self):
        scenario = reference_scenario()
        self.assertEqual(demand_based_counts(scenario, 31), (12, 18, 1))
        self.assertEqual(ue_based_counts(scenario, 31), (9, 16, 6))

    def test_apportion_largest_remainder(self):
        self.assertEqual(apportion(10, [1, 1, 1]), (4, 3, 3))
        self.assertEqual(apportion(5, [0, 0]), (3, 2))
        self.assertEqual(sum(apportion(31, [3, 5, 2])), 31)

    def test_build_layout_attaches_both_labelings(self):
        layout = build_layout(reference_scenario(), 11.0)
        self.assertEqual(tuple(np.bincount(layout.static_labels_demand)), (12, 18, 1))
        self.assertEqual(tuple(np.bincount(layout.static_labels_ue)), (9, 16, 6))

    def test_explicit_counts_must_match_mo_count(self):
        with self.assertRaises(LayoutError):
            build_layout(reference_scenario(), 11.0, demand_counts=(15, 16))


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------
class PathLossTests(SimpleTestCase):
    def test_reference_distances(self):
        self.assertAlmostEqual(path_loss_db(1.0), 128.0)
        self.assertAlmostEqual(path_loss_db(10.0), 165.6)
        self.assertAlmostEqual(path_loss_db(35.0), 186.06, delta=0.01)

    def test_shadowing_adds_in_db(self):
        self.assertAlmostEqual(path_loss_db(1.0, 4.5), 132.5)

    def test_non_positive_distance_is_rejected(self):
        with self.assertRaises(ChannelError):
            path_loss_db(0.0)


class ShadowingTests(SimpleTestCase):
    def test_zero_sigma_is_always_zero(self):
        rng = np.random.default_rng(0)
        self.assertEqual(draw_shadowing(rng, 0.0), 0.0)
        self.assertFalse(draw_shadowing(rng, 0.0, size=5).any())

    def test_moments(self):
        sample = draw_shadowing(np.random.default_rng(11), 8.0, size=1_000_000)
        self.assertLess(abs(sample.mean()), 0.05)
        self.assertLess(abs(sample.std() - 8.0), 0.05)

    def test_fixed_seed_reproduces(self):
        a = draw_shadowing(np.random.default_rng(5), 8.0, size=10)
        b = draw_shadowing(np.random.default_rng(5), 8.0, size=10)
        np.testing.assert_array_equal(a, b)

    def test_negative_sigma_is_rejected(self):
        with self.assertRaises(ChannelError):
            draw_shadowing(np.random.default_rng(0), -1.0)


class ShannonRateTests(SimpleTestCase):
    def test_unit_snr(self):
        n0 = 1e-20
        self.assertAlmostEqual(shannon_rate(5e6, n0 * 5e6, 1.0, n0), 5e6, delta=1e-3)

    def test_zero_gain(self):
        self.assertEqual(shannon_rate(5e6, 40.0, 0.0, 1e-20), 0.0)

    def test_thirty_db_worked_example(self):
        rate = shannon_rate(5e6, dbm_to_watts(46.0), gain_from_loss_db(128.0), dbm_to_watts(-179.0))
        self.assertAlmostEqual(rate / 49.84e6, 1.0, delta=1e-3)

    def test_rejects_bad_bandwidth_and_noise(self):
        with self.assertRaises(ChannelError):
            shannon_rate(0.0, 1.0, 1.0, 1e-20)
        with self.assertRaises(ChannelError):
            shannon_rate(5e6, 1.0, 1.0, 0.0)


class PlaceUesTests(SimpleTestCase):
    def _one_mo(self, ue_count, radius):
        return validate_scenario([MobileOperator(0, MOKind.BEST_EFFORT, ue_count=ue_count)], 1, radius)

    def test_uniform_disk_mean_radius(self):
        scenario = self._one_mo(100_000, 35.0)
        placement = place_ues(scenario, generate_layout(31, 35.0, 11.0), np.random.default_rng(3))
        radii = np.hypot(*placement.all_positions.T)
        self.assertAlmostEqual(radii.mean() / (2.0 / 3.0 * 35.0), 1.0, delta=0.01)
        self.assertLessEqual(radii.max(), 35.0)

    def test_zero_radius_puts_ue_at_origin(self):
        placement = place_ues(self._one_mo(1, 0.0), generate_layout(1, 0.0, 11.0), np.random.default_rng(0))
        np.testing.assert_allclose(placement.all_positions, [[0.0, 0.0]], atol=1e-12)

    def test_fixed_seed_reproduces_and_associates_to_nearest(self):
        scenario = reference_scenario()
        layout = generate_layout(31, 35.0, 11.0)
        a = place_ues(scenario, layout, np.random.default_rng(9))
        b = place_ues(scenario, layout, np.random.default_rng(9))
        np.testing.assert_array_equal(a.all_positions, b.all_positions)
        self.assertEqual(a.n_ues, 1000)
        points = a.all_positions
        d = np.hypot(points[:, None, 0] - layout.sites[None, :, 0], points[:, None, 1] - layout.sites[None, :, 1])
        np.testing.assert_array_equal(a.all_association, d.argmin(axis=1))


class RateMatrixTests(SimpleTestCase):
    def test_single_ue_full_power(self):
        R = build_rate_matrix(_single_site(), _stacked_ues(1), np.zeros((1, 1)), ChannelParams())
        self.assertEqual(R.shape, (1, 1))
        self.assertAlmostEqual(R[0, 0] / 0.04984, 1.0, delta=1e-3)

    def test_site_without_ues_contributes_nothing(self):
        layout = DistrictLayout(radius_km=35.0, sites=np.array([[0.0, 0.0], [11.0, 0.0]]))
        R = build_rate_matrix(layout, _stacked_ues(3), np.zeros((3, 2)), ChannelParams())
        self.assertGreater(R[0, 0], 0.0)
        self.assertEqual(R[0, 1], 0.0)

    def test_site_power_split_is_concave_in_ue_count(self):
        params = ChannelParams(power_allocation=PowerAllocation.PER_SITE)
        shadow = 0.0
        r_n = build_rate_matrix(_single_site(), _stacked_ues(4), shadow, params)[0, 0]
        r_2n = build_rate_matrix(_single_site(), _stacked_ues(8), shadow, params)[0, 0]
        self.assertGreater(r_2n, r_n)
        self.assertLess(r_2n, 2.0 * r_n)

    def test_per_ue_power_is_linear_in_ue_count(self):
        params = ChannelParams(power_allocation=PowerAllocation.PER_UE)
        r_n = build_rate_matrix(_single_site(), _stacked_ues(4), 0.0, params)[0, 0]
        r_2n = build_rate_matrix(_single_site(), _stacked_ues(8), 0.0, params)[0, 0]
        self.assertAlmostEqual(r_2n / r_n, 2.0, places=12)

    def test_ue_on_top_of_site_is_clamped(self):
        R = build_rate_matrix(_single_site(), _stacked_ues(1, x_km=0.0), 0.0, ChannelParams())
        self.assertTrue(np.isfinite(R).all())

    def test_reference_scenario_slot(self):
        scenario = reference_scenario()
        layout = build_layout(scenario, 11.0)
        rng = np.random.default_rng(1)
        placement = place_ues(scenario, layout, rng)
        params = ChannelParams()
        R = build_rate_matrix(layout, placement, draw_slot_shadowing(rng, placement, layout, params), params, 3)
        self.assertEqual(R.shape, (3, 31))
        self.assertTrue((R >= 0).all())
        self.assertTrue(np.isfinite(R).all())

    def test_mo_count_mismatch(self):
        with self.assertRaises(ChannelError):
            build_rate_matrix(_single_site(), _stacked_ues(1), 0.0, ChannelParams(), mo_count=2)

    def test_defaults_serve_full_power_from_best_server(self):
        params = ChannelParams()
        self.assertEqual(params.power_allocation, PowerAllocation.PER_UE)
        self.assertEqual(params.association, Association.BEST_SERVER)


class AssociationTests(SimpleTestCase):
    def setUp(self):
        self.layout = DistrictLayout(radius_km=35.0, sites=np.array([[0.0, 0.0], [11.0, 0.0]]))
        # 1 km from site 0, 10 km from site 1; site 0 is shadowed by 40 dB.
        self.shadow = np.array([[40.0, 0.0]])

    def test_best_server_follows_shadowing(self):
        R = build_rate_matrix(self.layout, _stacked_ues(1), self.shadow, ChannelParams())
        self.assertEqual(R[0, 0], 0.0)
        expected = shannon_rate(5e6, dbm_to_watts(46.0), gain_from_loss_db(165.6), dbm_to_watts(-179.0))
        self.assertAlmostEqual(R[0, 1] / (expected / 1e9), 1.0, places=9)

    def test_nearest_keeps_the_placement_site(self):
        params = ChannelParams(association=Association.NEAREST)
        R = build_rate_matrix(self.layout, _stacked_ues(1), self.shadow, params)
        self.assertGreater(R[0, 0], 0.0)
        self.assertEqual(R[0, 1], 0.0)

    def test_best_server_without_shadowing_is_nearest(self):
        best = build_rate_matrix(self.layout, _stacked_ues(3), np.zeros((3, 2)), ChannelParams())
        nearest = build_rate_matrix(
            self.layout, _stacked_ues(3), np.zeros((3, 2)), ChannelParams(association=Association.NEAREST),
        )
        np.testing.assert_allclose(best, nearest, rtol=1e-12)


class UeOrderTests(SimpleTestCase):
    """R depends on which UEs an MO has, not on the order they are listed in."""

    def _permuted(self, placement, shadowing, rng):
        positions, association, rows = [], [], []
        offset = 0
        for points, serving in zip(placement.positions, placement.association):
            order = rng.permutation(len(points))
            positions.append(points[order])
            association.append(serving[order])
            rows.append(offset + order)
            offset += len(points)
        permuted = UePlacement(positions=tuple(positions), association=tuple(association))
        return permuted, shadowing[np.concatenate(rows)]

    def test_permuting_ues_within_each_mo_keeps_rates(self):
        scenario = reference_scenario()
        layout = build_layout(scenario, 11.0)
        rng = np.random.default_rng(21)
        placement = place_ues(scenario, layout, rng)
        shadowing = draw_slot_shadowing(rng, placement, layout, ChannelParams())
        permuted, permuted_shadowing = self._permuted(placement, shadowing, np.random.default_rng(22))
        for association in Association:
            for power in PowerAllocation:
                with self.subTest(association=association, power=power):
                    params = ChannelParams(power_allocation=power, association=association)
                    np.testing.assert_allclose(
                        build_rate_matrix(layout, permuted, permuted_shadowing, params, 3),
                        build_rate_matrix(layout, placement, shadowing, params, 3),
                        rtol=1e-9,
                    )
