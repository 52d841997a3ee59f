import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from channel.layout import build_layout
from domain.services import reference_scenario, validate_scenario
from domain.types import UNASSIGNED, MobileOperator, MOKind, SchedulerState, demand_vector
from metrics.evaluation import per_mo_rate
from .assignment import assign_argmax, assign_mmf, assign_static, qos_split
from .controller import VirtualizationController
from .scoring import (
    RefreshPolicy, SchedulerConfig, SchedulerKind, SchedulingError, compute_metric, rg_marginal_utility,
)
from .state import advance_rr, update_avg_rate

R_2X2 = np.array([[3.0, 1.0], [2.0, 5.0]])


def _state(lam, tau=50.0):
    return SchedulerState(lam=np.asarray(lam, dtype=float), tau=tau)


def _rg_utility(lam, omega, beta):
    return omega * (math.log(lam) + 1.0 - math.exp(-beta * (lam - omega) / omega))


def _greedy_cover(R, omega, order):
    """Serve MOs in order from the full pool, each taking its best sites until covered."""
    free = set(range(R.shape[1]))
    covered = set()
    for i in order:
        rate = 0.0
        while rate < omega[i] and free:
            k = max(free, key=lambda k: (R[i, k], -k))
            rate += R[i, k]
            free.remove(k)
        if rate >= omega[i]:
            covered.add(i)
    return covered, R.shape[1] - len(free)


class SchedulerKindTests(SimpleTestCase):
    def test_report_order_and_classification(self):
        self.assertEqual(
            [k.value for k in SchedulerKind.ordered()],
            ["rr", "bet", "mt", "pf", "mmf", "rg", "static-demand", "static-ue"],
        )
        self.assertEqual(len(SchedulerKind.dynamic()), 6)
        self.assertFalse(SchedulerKind.RR.channel_aware)
        self.assertTrue(SchedulerKind.PF.channel_aware)
        self.assertFalse(SchedulerKind.PF.qos_aware)
        self.assertTrue(SchedulerKind.RG.qos_aware)
        self.assertTrue(SchedulerKind.STATIC_UE.is_static)
        self.assertEqual(
            [k.category for k in SchedulerKind.ordered()],
            ["channel-blind", "channel-blind", "channel-aware", "channel-aware", "qos-aware", "qos-aware",
             "static", "static"],
        )

    def test_config_rejects_small_tau(self):
        with self.assertRaises(SchedulingError):
            SchedulerConfig(SchedulerKind.PF, tau=1.0)


class MetricTests(SimpleTestCase):
    def test_mt_metric_is_the_rate_matrix(self):
        metric = compute_metric(SchedulerConfig(SchedulerKind.MT), R_2X2, _state([1.0, 1.0]))
        np.testing.assert_array_equal(metric, R_2X2)

    def test_pf_metric(self):
        config = SchedulerConfig(SchedulerKind.PF, alpha=1.0, gamma=0.8)
        metric = compute_metric(config, np.full((1, 1), 10.0), _state([2.0]))
        self.assertAlmostEqual(metric[0, 0], 5.7435, places=4)

    def test_bet_metric_favours_lowest_average(self):
        metric = compute_metric(SchedulerConfig(SchedulerKind.BET), np.ones((2, 3)), _state([10.0, 2.0]))
        np.testing.assert_allclose(metric[:, 0], [0.1, 0.5])
        np.testing.assert_array_equal(assign_argmax(metric), [1, 1, 1])

    def test_rr_metric_rotates_with_offset(self):
        config = SchedulerConfig(SchedulerKind.RR)
        state = _state([1.0, 1.0, 1.0]).evolve(rr_offset=1)
        phi = assign_argmax(compute_metric(config, np.ones((3, 5)), state))
        np.testing.assert_array_equal(phi, [1, 2, 0, 1, 2])

    def test_rg_needs_scenario_and_demands(self):
        with self.assertRaises(SchedulingError):
            compute_metric(SchedulerConfig(SchedulerKind.RG), R_2X2, _state([1.0, 1.0]))

    def test_rejects_nan_rates(self):
        with self.assertRaises(SchedulingError):
            compute_metric(SchedulerConfig(SchedulerKind.MT), np.array([[np.nan]]), _state([1.0]))


class RgMarginalUtilityTests(SimpleTestCase):
    def test_at_demand(self):
        self.assertAlmostEqual(rg_marginal_utility(4.0, 4.0, 10.0), 11.0)
        self.assertAlmostEqual(rg_marginal_utility(4.0, 4.0, 0.0), 1.0)

    def test_zero_beta_is_proportional_fair(self):
        self.assertAlmostEqual(rg_marginal_utility(8.0, 4.0, 0.0), 0.5)

    def test_strictly_decreasing_above_demand(self):
        lam = np.linspace(4.0, 40.0, 200)
        values = rg_marginal_utility(lam, 4.0, 10.0)
        self.assertTrue((np.diff(values) < 0).all())
        self.assertLess(values[-1], 0.11)

    def test_matches_finite_differences_of_utility(self):
        omega = 4.0
        for beta in (0.0, 9.5, 10.0):
            for lam in np.linspace(0.1 * omega, 10.0 * omega, 25):
                h = 1e-5 * lam
                numeric = (_rg_utility(lam + h, omega, beta) - _rg_utility(lam - h, omega, beta)) / (2 * h)
                exact = rg_marginal_utility(lam, omega, beta)
                with self.subTest(beta=beta, lam=lam):
                    self.assertLess(abs(numeric - exact) / abs(exact), 1e-6)

    def test_rejects_non_positive_inputs(self):
        with self.assertRaises(SchedulingError):
            rg_marginal_utility(0.0, 1.0, 1.0)
        with self.assertRaises(SchedulingError):
            rg_marginal_utility(1.0, 0.0, 1.0)


class AverageRateTests(SimpleTestCase):
    def test_single_update(self):
        state = update_avg_rate(_state([10.0]), np.array([[20.0]]), np.array([0]))
        self.assertAlmostEqual(state.lam[0], 10.2)
        np.testing.assert_array_equal(state.delta, [[1]])

    def test_no_allocation_decays(self):
        state = update_avg_rate(_state([10.0, 5.0]), np.array([[1.0], [20.0]]), np.array([1]))
        self.assertAlmostEqual(state.lam[0], 9.8)

    def test_recursion_matches_closed_form(self):
        tau, lam0, r = 50.0, 0.001, 7.5
        state = _state([lam0], tau)
        for n in range(1, 301):
            state = update_avg_rate(state, np.array([[r]]), np.array([0]))
            closed = r + (lam0 - r) * (1.0 - 1.0 / tau) ** n
            self.assertLess(abs(state.lam[0] - closed) / closed, 1e-9)
        self.assertLess(abs(state.lam[0] - r) / r, 0.01)

    def test_rr_offset_cycles(self):
        state = _state([1.0, 1.0, 1.0])
        offsets = []
        for _ in range(4):
            offsets.append(state.rr_offset)
            state = advance_rr(state)
        self.assertEqual(offsets, [0, 1, 2, 0])


class AssignArgmaxTests(SimpleTestCase):
    def test_columnwise_argmax(self):
        np.testing.assert_array_equal(assign_argmax(R_2X2), [0, 1])

    def test_ties_go_to_lowest_index(self):
        np.testing.assert_array_equal(assign_argmax(np.ones((3, 4))), [0, 0, 0, 0])

    def test_matches_per_column_search(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            metric = rng.random((3, 5))
            expected = [max(range(3), key=lambda i: (metric[i, k], -i)) for k in range(5)]
            np.testing.assert_array_equal(assign_argmax(metric), expected)

    def test_mt_maximises_total_rate(self):
        rng = np.random.default_rng(4)
        config = SchedulerConfig(SchedulerKind.MT, refresh=RefreshPolicy.PER_INTERVAL)
        for _ in range(1000):
            n_sites = int(rng.integers(1, 7))
            R = rng.random((3, n_sites)) * 10.0
            phi = assign_argmax(compute_metric(config, R, _state([1.0] * 3)))
            best = max(
                sum(R[owner, k] for k, owner in enumerate(candidate))
                for candidate in itertools.product(range(3), repeat=n_sites)
            )
            self.assertAlmostEqual(per_mo_rate(phi, R).sum(), best, places=9)

    def test_per_assignment_refresh_spreads_bet(self):
        R = np.ones((2, 4))
        config = SchedulerConfig(SchedulerKind.BET)
        state = _state([1.0, 1.0], tau=2.0)
        metric = compute_metric(config, R, state)
        phi = assign_argmax(
            metric, refresh=RefreshPolicy.PER_ASSIGNMENT, rates=R, state=state,
            recompute=lambda lam: compute_metric(config, R, state, lam=lam),
        )
        np.testing.assert_array_equal(phi, [0, 1, 0, 1])
        np.testing.assert_array_equal(assign_argmax(metric), [0, 0, 0, 0])

    def test_first_column_agrees_across_refresh_policies(self):
        rng = np.random.default_rng(8)
        config = SchedulerConfig(SchedulerKind.PF)
        R = rng.random((3, 6))
        state = _state(rng.random(3) + 0.1)
        metric = compute_metric(config, R, state)
        refreshed = assign_argmax(
            metric, refresh=RefreshPolicy.PER_ASSIGNMENT, rates=R, state=state,
            recompute=lambda lam: compute_metric(config, R, state, lam=lam),
        )
        self.assertEqual(refreshed[0], assign_argmax(metric)[0])

    def test_provisional_average_matches_the_interval_update(self):
        rng = np.random.default_rng(12)
        config = SchedulerConfig(SchedulerKind.PF, tau=4.0)
        R = rng.random((3, 5))
        state = _state(rng.random(3) + 0.5, tau=4.0)
        seen = []

        def recompute(lam):
            seen.append(np.array(lam, dtype=float))
            return compute_metric(config, R, state, lam=lam)

        phi = assign_argmax(
            compute_metric(config, R, state), refresh=RefreshPolicy.PER_ASSIGNMENT, rates=R, state=state,
            recompute=recompute,
        )
        self.assertEqual(len(seen), 4)
        for e, lam in enumerate(seen):
            granted_so_far = np.full(5, UNASSIGNED, dtype=np.int64)
            granted_so_far[: e + 1] = phi[: e + 1]
            np.testing.assert_allclose(lam, update_avg_rate(state, R, granted_so_far).lam, rtol=1e-12)

    def test_rejects_non_finite_metric(self):
        with self.assertRaises(SchedulingError):
            assign_argmax(np.array([[np.inf, 1.0]]))


class AssignMmfTests(SimpleTestCase):
    def test_smaller_demand_served_first(self):
        phi = assign_mmf(np.full((3, 2), 2.0), demand_vector([3, 1, None]), [0, 1], [2])
        np.testing.assert_array_equal(phi, [1, 0])

    def test_leftover_goes_to_best_effort(self):
        phi = assign_mmf(np.full((3, 3), 2.0), demand_vector([1, 1, None]), [0, 1], [2])
        np.testing.assert_array_equal(np.bincount(phi, minlength=3), [1, 1, 1])

    def test_single_best_effort_takes_everything(self):
        R = np.random.default_rng(0).random((1, 5))
        np.testing.assert_array_equal(assign_mmf(R, demand_vector([None]), [], [0]), [0] * 5)

    def test_without_best_effort_leftovers_stay_unassigned(self):
        phi = assign_mmf(np.full((2, 4), 2.0), demand_vector([1, 1]), [0, 1], [])
        self.assertEqual(list(phi).count(UNASSIGNED), 2)

    def test_satisfied_operator_keeps_its_sites(self):
        R = np.ones((3, 6))
        phi = assign_mmf(R, demand_vector([3, 5, None]), [0, 1], [2])
        np.testing.assert_array_equal(per_mo_rate(phi, R), [3.0, 3.0, 0.0])
        np.testing.assert_array_equal(phi, [0, 0, 0, 1, 1, 1])

    def test_satisfied_count_is_maximal_on_uniform_site_rates(self):
        rng = np.random.default_rng(21)
        for _ in range(500):
            n_qos = int(rng.integers(2, 4))
            n_sites = int(rng.integers(1, 7))
            # Multiples of 1/4 keep every rate sum exact.
            per_site = int(rng.integers(1, 9)) / 4.0
            omega = demand_vector([int(rng.integers(0, 41)) / 4.0 for _ in range(n_qos)] + [None])
            R = np.full((n_qos + 1, n_sites), per_site)
            phi = assign_mmf(R, omega, list(range(n_qos)), [n_qos])

            counts = np.bincount(phi[phi != UNASSIGNED], minlength=n_qos + 1)[:n_qos]
            satisfied = [i for i in range(n_qos) if counts[i] * per_site >= omega[i]]
            best = max(
                sum(c * per_site >= omega[i] for i, c in enumerate(split))
                for split in itertools.product(range(n_sites + 1), repeat=n_qos)
                if sum(split) <= n_sites
            )
            by_demand = sorted(range(n_qos), key=lambda i: (omega[i], i))
            hungry = [counts[i] for i in range(n_qos) if i not in satisfied]
            with self.subTest(per_site=per_site, omega=omega[:n_qos], n_sites=n_sites):
                self.assertNotIn(UNASSIGNED, phi)
                self.assertEqual(len(satisfied), best)
                self.assertEqual(sorted(satisfied), sorted(by_demand[:best]))
                if hungry:
                    self.assertLessEqual(max(hungry) - min(hungry), 1)

    def test_two_operator_coverage_cases(self):
        rng = np.random.default_rng(17)
        for _ in range(500):
            R = rng.uniform(0.1, 3.0, size=(3, 6))
            omega = demand_vector([rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0), None])
            small, large = (0, 1) if omega[0] <= omega[1] else (1, 0)
            covered, used = _greedy_cover(R, omega, (small, large))
            phi = assign_mmf(R, omega, [0, 1], [2])
            rates = per_mo_rate(phi, R)
            satisfied = {i for i in (0, 1) if rates[i] >= omega[i]}
            with self.subTest(omega=omega[:2]):
                self.assertNotIn(UNASSIGNED, phi)
                if covered == {small, large}:
                    self.assertEqual(satisfied, {0, 1})
                    if used < 6:
                        self.assertGreater(rates[2], 0.0)
                elif small in covered:
                    self.assertEqual(satisfied, {small})
                    self.assertEqual(rates[2], 0.0)
                else:
                    self.assertLessEqual(len(satisfied), 1)

    def test_overlapping_sets_are_rejected(self):
        with self.assertRaises(SchedulingError):
            assign_mmf(np.ones((2, 2)), demand_vector([1, None]), [0], [0, 1])

    def test_qos_split_treats_missing_demand_as_best_effort(self):
        qos, be = qos_split(reference_scenario(), demand_vector([2, None, None]))
        self.assertEqual((qos, be), ([0], [1, 2]))


class StaticAndRoundRobinTests(SimpleTestCase):
    def setUp(self):
        self.scenario = reference_scenario()
        self.layout = build_layout(self.scenario, 11.0)

    def test_static_counts(self):
        demand = assign_static(SchedulerKind.STATIC_DEMAND, self.layout)
        ue = assign_static(SchedulerKind.STATIC_UE, self.layout)
        self.assertEqual(tuple(np.bincount(demand)), (12, 18, 1))
        self.assertEqual(tuple(np.bincount(ue)), (9, 16, 6))
        np.testing.assert_array_equal(demand, assign_static(SchedulerKind.STATIC_DEMAND, self.layout))

    def test_static_rejects_dynamic_kind(self):
        with self.assertRaises(SchedulingError):
            assign_static(SchedulerKind.MT, self.layout)

    def test_round_robin_rotation_over_31_sites(self):
        controller = VirtualizationController(SchedulerConfig(SchedulerKind.RR), self.scenario, self.layout)
        R = np.ones((3, 31))
        state = SchedulerState.initial(3, 50.0)
        totals = np.zeros(3, dtype=int)
        for _ in range(3):
            phi = controller.assign(R, demand_vector([1, 1, None]), state)
            counts = np.bincount(phi, minlength=3)
            self.assertEqual(sorted(counts.tolist()), [10, 10, 11])
            totals += counts
            state = controller.advance(state, R, phi)
        self.assertEqual(totals.tolist(), [31, 31, 31])


class ControllerTests(SimpleTestCase):
    def test_static_kind_needs_layout(self):
        with self.assertRaises(SchedulingError):
            VirtualizationController(SchedulerConfig(SchedulerKind.STATIC_UE), reference_scenario())

    def test_rg_prefers_the_starved_qos_operator(self):
        scenario = validate_scenario(
            [
                MobileOperator(0, MOKind.QOS_AWARE, ue_count=1, beta=10.0, demand_range=(0.0, 8.0)),
                MobileOperator(1, MOKind.QOS_AWARE, ue_count=1, beta=10.0, demand_range=(0.0, 8.0)),
            ],
            1, 1.0,
        )
        controller = VirtualizationController(
            SchedulerConfig(SchedulerKind.RG, refresh=RefreshPolicy.PER_INTERVAL), scenario,
        )
        phi = controller.assign(np.ones((2, 1)), demand_vector([4, 4]), _state([8.0, 1.0]))
        np.testing.assert_array_equal(phi, [1])

    def test_advance_updates_average_and_rr_cursor(self):
        controller = VirtualizationController(SchedulerConfig(SchedulerKind.RR), reference_scenario())
        state = SchedulerState.initial(3, 50.0)
        nxt = controller.advance(state, np.ones((3, 2)), np.array([0, 1]))
        self.assertEqual(nxt.rr_offset, 1)
        self.assertGreater(nxt.lam[0], state.lam[0])
        self.assertLess(nxt.lam[2], state.lam[2])

    def test_bet_evens_out_long_run_rates_better_than_mt(self):
        scenario = reference_scenario()
        rng = np.random.default_rng(6)
        R = rng.uniform(0.5, 1.5, size=(3, 31)) * np.array([[1.0], [2.0], [3.0]])
        omega = demand_vector([4, 6, None])
        tau = 50.0

        def long_run_cv(kind):
            controller = VirtualizationController(SchedulerConfig(kind, tau=tau), scenario)
            state = SchedulerState.initial(3, tau)
            received = np.zeros(3)
            for _ in range(int(10 * tau)):
                phi = controller.assign(R, omega, state)
                received += per_mo_rate(phi, R)
                state = controller.advance(state, R, phi)
            return received.std() / received.mean()

        bet, mt = long_run_cv(SchedulerKind.BET), long_run_cv(SchedulerKind.MT)
        self.assertLess(bet, 0.25)
        self.assertLess(bet, mt)

    def test_qos_aware_kinds_need_demands(self):
        controller = VirtualizationController(SchedulerConfig(SchedulerKind.MMF), reference_scenario())
        with self.assertRaises(SchedulingError):
            controller.assign(np.ones((3, 2)), None, SchedulerState.initial(3, 50.0))
