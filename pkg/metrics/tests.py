import math
import random

import numpy as np
from django.test import SimpleTestCase

from domain.types import UNASSIGNED, demand_vector
from .evaluation import (
    MetricError, SlotRecord, aggregate, jain_fairness, per_mo_rate, replication_means, satisfied_ratio,
    site_counts,
)

R_2X2 = np.array([[3.0, 1.0], [2.0, 5.0]])
OMEGA = demand_vector([4, 12, None])


def _record(slot, fairness, rates=(1.0, 1.0), satisfied=None):
    return SlotRecord(
        slot=slot, per_mo_rate=tuple(rates), omega=(1.0, math.nan), assigned_sites=(1, 1),
        fairness=fairness, satisfied_ratio=satisfied,
    )


class PerMoRateTests(SimpleTestCase):
    def test_hand_sum(self):
        np.testing.assert_array_equal(per_mo_rate([0, 1], R_2X2), [3.0, 5.0])

    def test_single_owner(self):
        np.testing.assert_array_equal(per_mo_rate([0, 0], R_2X2), [4.0, 0.0])

    def test_unassigned_columns(self):
        np.testing.assert_array_equal(per_mo_rate([UNASSIGNED, UNASSIGNED], R_2X2), [0.0, 0.0])
        np.testing.assert_array_equal(site_counts([UNASSIGNED, 1, 1], 3), [0, 2, 0])


class JainFairnessTests(SimpleTestCase):
    def test_reference_values(self):
        self.assertEqual(jain_fairness([1, 1, 1]), 1.0)
        self.assertAlmostEqual(jain_fairness([1, 0, 0]), 1.0 / 3.0)
        self.assertAlmostEqual(jain_fairness([1, 2, 3]), 36.0 / 42.0)

    def test_all_zero_counts_as_fair(self):
        self.assertEqual(jain_fairness([0.0, 0.0]), 1.0)

    def test_scale_and_permutation_invariance(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            rates = rng.random(5) * 10.0
            base = jain_fairness(rates)
            self.assertEqual(jain_fairness(rates * 2.0), base)
            self.assertEqual(jain_fairness(rates * 0.5), base)
            self.assertEqual(jain_fairness(rng.permutation(rates)), base)

    def test_empty_input(self):
        with self.assertRaises(MetricError):
            jain_fairness([])


class SatisfiedRatioTests(SimpleTestCase):
    def test_reference_values(self):
        self.assertEqual(satisfied_ratio([5, 13, 2], OMEGA, [0, 1]), 1.0)
        self.assertEqual(satisfied_ratio([3, 13, 2], OMEGA, [0, 1]), 0.5)
        self.assertEqual(satisfied_ratio([0, 0, 9], OMEGA, [0, 1]), 0.0)

    def test_no_qos_operators(self):
        with self.assertRaises(MetricError):
            satisfied_ratio([1.0], demand_vector([None]), [])

    def test_monotone_in_rates_and_demands(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            rates = rng.uniform(0.0, 10.0, size=3)
            omega = demand_vector([rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0), None])
            base = satisfied_ratio(rates, omega, [0, 1])
            self.assertGreaterEqual(satisfied_ratio(rates + rng.uniform(0.0, 2.0, size=3), omega, [0, 1]), base)
            raised = omega.copy()
            raised[:2] += rng.uniform(0.0, 2.0, size=2)
            self.assertLessEqual(satisfied_ratio(rates, raised, [0, 1]), base)


class AggregateTests(SimpleTestCase):
    def test_single_record(self):
        summary = aggregate([[_record(0, 0.7, rates=(2.0, 3.0), satisfied=0.5)]])
        self.assertEqual(summary.replications, 1)
        self.assertEqual(summary.fairness_mean, 0.7)
        self.assertEqual(summary.fairness_std, 0.0)
        self.assertEqual(summary.rate_gbps_mean, 5.0)
        self.assertEqual(summary.satisfied_mean, 0.5)

    def test_two_replications(self):
        summary = aggregate([[_record(0, 0.8)], [_record(0, 0.9)]])
        self.assertAlmostEqual(summary.fairness_mean, 0.85)
        self.assertAlmostEqual(summary.fairness_std, 0.05)

    def test_undefined_satisfied_ratio_is_excluded(self):
        summary = aggregate([[_record(0, 1.0), _record(1, 1.0)]])
        self.assertIsNone(summary.satisfied_mean)
        self.assertIsNone(summary.satisfied_std)
        _, _, satisfied = replication_means([_record(0, 1.0), _record(1, 1.0, satisfied=1.0)])
        self.assertEqual(satisfied, 1.0)

    def test_order_independent(self):
        rng = random.Random(3)
        replications = [
            [_record(s, rng.random(), rates=(rng.random(), rng.random()), satisfied=rng.random()) for s in range(20)]
            for _ in range(10)
        ]
        shuffled = [rng.sample(records, len(records)) for records in replications]
        rng.shuffle(shuffled)
        self.assertEqual(aggregate(replications), aggregate(shuffled))

    def test_nothing_to_aggregate(self):
        with self.assertRaises(MetricError):
            aggregate([])
        with self.assertRaises(MetricError):
            aggregate([[]])
