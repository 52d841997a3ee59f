from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from domain.services import reference_scenario, validate_scenario
from domain.types import MobileOperator, MOKind, ScenarioError
from metrics.evaluation import replication_means
from schedulers.scoring import SchedulerConfig, SchedulerKind
from .engine import SimConfig, draw_demands, run_monte_carlo, run_replication
from .seeding import STREAMS, derive_seed, replication_streams


def _config(kind=SchedulerKind.MMF, **changes):
    config = SimConfig(
        scenario=reference_scenario(),
        scheduler=SchedulerConfig(kind),
        n_replications=2,
        n_slots=6,
        demand_period=3,
        master_seed=7,
    )
    return replace(config, **changes)


def _fingerprint(result):
    return [(r.per_mo_rate, r.assigned_sites, r.fairness, r.satisfied_ratio) for r in result.records]


class SeedingTests(SimpleTestCase):
    def test_same_inputs_same_seed(self):
        self.assertEqual(derive_seed(0, 0), derive_seed(0, 0))
        self.assertNotEqual(derive_seed(0, 0), derive_seed(0, 1))

    def test_no_duplicates_under_one_master_seed(self):
        seeds = {derive_seed(12345, i) for i in range(1_000_001)}
        self.assertEqual(len(seeds), 1_000_001)

    def test_master_seeds_do_not_collide(self):
        seeds = {derive_seed(master, 5) for master in range(10_000)}
        self.assertEqual(len(seeds), 10_000)

    def test_seeds_fit_in_64_bits(self):
        self.assertTrue(all(0 <= derive_seed(m, i) < 2 ** 64 for m in (0, 2 ** 64 - 1) for i in range(100)))

    def test_streams_are_reproducible_and_distinct(self):
        a, b = replication_streams(99), replication_streams(99)
        self.assertEqual(tuple(a), STREAMS)
        draws = {name: a[name].random() for name in STREAMS}
        self.assertEqual(draws, {name: b[name].random() for name in STREAMS})
        self.assertEqual(len(set(draws.values())), len(STREAMS))


class SimConfigTests(SimpleTestCase):
    def test_rejects_bad_scale(self):
        for field in ("n_replications", "n_slots", "demand_period"):
            with self.subTest(field=field):
                with self.assertRaises(ScenarioError):
                    _config(**{field: 0})

    def test_with_scheduler(self):
        config = _config().with_scheduler("rg")
        self.assertEqual(config.scheduler.kind, SchedulerKind.RG)
        self.assertEqual(config.master_seed, 7)


class DrawDemandsTests(SimpleTestCase):
    def test_demands_within_ranges(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            omega = draw_demands(reference_scenario(), rng)
            self.assertTrue(0.0 <= omega[0] < 8.0)
            self.assertTrue(0.0 <= omega[1] < 12.0)
            self.assertTrue(np.isnan(omega[2]))


class RunReplicationTests(SimpleTestCase):
    def test_records_one_per_slot(self):
        result = run_replication(_config(), 0)
        self.assertEqual(len(result.records), 6)
        self.assertEqual([r.slot for r in result.records], list(range(6)))
        self.assertEqual(result.seed, derive_seed(7, 0))
        for record in result.records:
            self.assertEqual(sum(record.assigned_sites), 31)
            self.assertTrue(0.0 < record.fairness <= 1.0)

    def test_demands_redrawn_on_period(self):
        records = run_replication(_config(), 0).records
        self.assertEqual(records[0].omega[:2], records[2].omega[:2])
        self.assertNotEqual(records[2].omega[:2], records[3].omega[:2])

    def test_deterministic(self):
        self.assertEqual(_fingerprint(run_replication(_config(), 1)), _fingerprint(run_replication(_config(), 1)))

    def test_best_effort_only_has_no_satisfied_ratio(self):
        scenario = validate_scenario([MobileOperator(0, MOKind.BEST_EFFORT, ue_count=20)], 7, 35.0)
        config = _config(scenario=scenario, n_slots=1, n_replications=1)
        result = run_replication(config, 0)
        self.assertEqual(len(result.records), 1)
        self.assertIsNone(result.records[0].satisfied_ratio)
        self.assertIsNone(run_monte_carlo(config).summary.satisfied_mean)

    def test_static_assignment_never_changes(self):
        result = run_replication(_config(SchedulerKind.STATIC_DEMAND, keep_trace=True), 0)
        self.assertEqual(len(set(result.trace)), 1)
        self.assertEqual(tuple(np.bincount(result.trace[0])), (12, 18, 1))

    def test_max_throughput_dominates_every_slot(self):
        totals = {
            kind: [r.total_rate for r in run_replication(_config(kind), 0).records]
            for kind in SchedulerKind.ordered()
        }
        for kind, series in totals.items():
            for mt, other in zip(totals[SchedulerKind.MT], series):
                with self.subTest(kind=kind):
                    self.assertGreaterEqual(mt, other - 1e-12)


class RunMonteCarloTests(SimpleTestCase):
    def test_single_replication_matches_its_time_means(self):
        config = _config(n_replications=1)
        result = run_monte_carlo(config)
        fairness, rate, satisfied = replication_means(result.replications[0].records)
        self.assertEqual(result.summary.fairness_mean, fairness)
        self.assertEqual(result.summary.rate_gbps_mean, rate)
        self.assertEqual(result.summary.satisfied_mean, satisfied)
        self.assertEqual(result.summary.fairness_std, 0.0)

    def test_repeat_runs_are_identical(self):
        a, b = run_monte_carlo(_config()), run_monte_carlo(_config())
        self.assertEqual(a.summary, b.summary)
        for x, y in zip(a.replications, b.replications):
            self.assertEqual(_fingerprint(x), _fingerprint(y))

    def test_serial_and_parallel_agree(self):
        config = _config(SchedulerKind.PF, n_replications=4, n_slots=4)
        serial = run_monte_carlo(config, max_workers=1).summary
        parallel = run_monte_carlo(config, max_workers=2).summary
        for name in ("fairness_mean", "fairness_std", "rate_gbps_mean", "rate_gbps_std", "satisfied_mean"):
            a, b = getattr(serial, name), getattr(parallel, name)
            with self.subTest(metric=name):
                self.assertLessEqual(abs(a - b), 1e-9 * max(abs(a), 1e-300))

    def test_records_can_be_dropped(self):
        result = run_monte_carlo(_config(), keep_records=False)
        self.assertEqual([r.records for r in result.replications], [(), ()])
        self.assertEqual(result.summary, run_monte_carlo(_config()).summary)


class ReferenceStandingTests(SimpleTestCase):
    """Relative standing of the schedulers on the reference district, at a reduced scale."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        config = _config(n_replications=16, n_slots=30, demand_period=3, master_seed=2024)
        cls.results = {
            kind: run_monte_carlo(config.with_scheduler(kind), max_workers=1) for kind in SchedulerKind.ordered()
        }

    def _summary(self, kind, name):
        return getattr(self.results[kind].summary, name)

    def test_total_rate_ordering(self):
        ranked = [
            SchedulerKind.MT, SchedulerKind.STATIC_DEMAND, SchedulerKind.STATIC_UE, SchedulerKind.RR,
            SchedulerKind.BET,
        ]
        rates = [self._summary(kind, "rate_gbps_mean") for kind in ranked]
        self.assertEqual(rates, sorted(rates, reverse=True), dict(zip(ranked, rates)))
        self.assertEqual(len(set(rates)), len(rates))

    def test_fairness_ordering(self):
        self.assertGreater(
            self._summary(SchedulerKind.BET, "fairness_mean"), self._summary(SchedulerKind.RR, "fairness_mean"),
        )
        self.assertGreater(
            self._summary(SchedulerKind.STATIC_UE, "fairness_mean"),
            self._summary(SchedulerKind.STATIC_DEMAND, "fairness_mean"),
        )

    def test_mmf_satisfies_the_most(self):
        mmf = self._summary(SchedulerKind.MMF, "satisfied_mean")
        for kind in SchedulerKind.ordered():
            with self.subTest(kind=kind):
                self.assertGreaterEqual(mmf, self._summary(kind, "satisfied_mean"))

    def test_every_site_is_assigned_outside_mmf(self):
        for kind in SchedulerKind.ordered():
            if kind == SchedulerKind.MMF:
                continue
            counts = {
                sum(record.assigned_sites)
                for replication in self.results[kind].replications
                for record in replication.records
            }
            with self.subTest(kind=kind):
                self.assertEqual(counts, {31})
