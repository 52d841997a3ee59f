import math

import numpy as np
from django.test import SimpleTestCase

from .services import REFERENCE_ENODEBS, REFERENCE_MOS, REFERENCE_RADIUS_KM, reference_scenario, validate_scenario
from .types import (
    LAMBDA_INIT_GBPS, UNASSIGNED, MobileOperator, MOKind, ScenarioError, SchedulerState, delta_matrix,
    demand_vector, has_demand,
)


class ValidateScenarioTests(SimpleTestCase):
    def test_reference_scenario_is_valid(self):
        scenario = reference_scenario()
        self.assertEqual(scenario.mo_count, 3)
        self.assertEqual(scenario.ue_counts, (300, 500, 200))
        self.assertEqual(scenario.n_enodebs, REFERENCE_ENODEBS)
        self.assertEqual(scenario.radius_km, REFERENCE_RADIUS_KM)
        self.assertEqual(scenario.qos_indices, (0, 1))
        self.assertEqual(scenario.be_indices, (2,))
        self.assertEqual([mo.beta for mo in scenario.mos], [10.0, 9.5, 0.0])

    def test_single_best_effort_mo_on_one_site(self):
        scenario = validate_scenario([MobileOperator(0, MOKind.BEST_EFFORT, ue_count=1)], 1, 35.0)
        self.assertEqual(scenario.qos_indices, ())

    def test_inverted_demand_range_is_rejected(self):
        mo = MobileOperator(0, MOKind.QOS_AWARE, ue_count=10, demand_range=(5.0, 2.0))
        with self.assertRaisesMessage(ScenarioError, "low < high"):
            validate_scenario([mo], 1, 35.0)

    def test_rejects_inconsistent_inputs(self):
        cases = [
            ([], 1, 35.0),
            (REFERENCE_MOS, 0, 35.0),
            (REFERENCE_MOS, 31, -1.0),
            ([MobileOperator(1, MOKind.BEST_EFFORT, ue_count=1)], 1, 1.0),
            ([MobileOperator(0, MOKind.BEST_EFFORT, ue_count=0)], 1, 1.0),
            ([MobileOperator(0, MOKind.QOS_AWARE, ue_count=1)], 1, 1.0),
            ([MobileOperator(0, MOKind.QOS_AWARE, ue_count=1, demand_range=(-1.0, 2.0))], 1, 1.0),
            ([MobileOperator(0, MOKind.QOS_AWARE, ue_count=1, beta=-1.0, demand_range=(0, 2))], 1, 1.0),
        ]
        for mos, n_enodebs, radius in cases:
            with self.subTest(mos=mos, n_enodebs=n_enodebs, radius=radius):
                with self.assertRaises(ScenarioError):
                    validate_scenario(mos, n_enodebs, radius)

    def test_mean_demand(self):
        self.assertEqual(REFERENCE_MOS[0].mean_demand, 4.0)
        self.assertEqual(REFERENCE_MOS[1].mean_demand, 6.0)
        self.assertEqual(REFERENCE_MOS[2].mean_demand, 0.0)
        self.assertEqual(REFERENCE_MOS[1].label, "MO-2")


class TypeHelperTests(SimpleTestCase):
    def test_demand_vector_marks_best_effort(self):
        omega = demand_vector([3, 1, None])
        self.assertEqual(omega[:2].tolist(), [3.0, 1.0])
        self.assertTrue(math.isnan(omega[2]))
        self.assertTrue(has_demand(omega, 0))
        self.assertFalse(has_demand(omega, 2))

    def test_delta_matrix_ignores_unassigned_columns(self):
        delta = delta_matrix([1, UNASSIGNED, 0, 1], 3)
        np.testing.assert_array_equal(delta, [[0, 0, 1, 0], [1, 0, 0, 1], [0, 0, 0, 0]])

    def test_initial_state(self):
        state = SchedulerState.initial(3, 50)
        np.testing.assert_array_equal(state.lam, [LAMBDA_INIT_GBPS] * 3)
        self.assertEqual(state.rr_offset, 0)
        self.assertIsNone(state.delta)
        self.assertEqual(state.evolve(rr_offset=2).rr_offset, 2)

    def test_state_rejects_bad_tau_and_offset(self):
        with self.assertRaises(ScenarioError):
            SchedulerState.initial(3, 1.0)
        with self.assertRaises(ScenarioError):
            SchedulerState.initial(3, 50).evolve(rr_offset=-1)
