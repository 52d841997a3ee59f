import importlib.util
import io
import math
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from channel.propagation import Association, PowerAllocation
from domain.services import REFERENCE_ENODEBS, REFERENCE_MOS, REFERENCE_RADIUS_KM
from domain.types import UNASSIGNED, MOKind, demand_vector
from runlog.models import RunEntry
from schedulers.scoring import RefreshPolicy, SchedulerKind
from . import csvio
from .config import ConfigError, config_from_bindings, default_config, parse_config, read_bindings
from .presets import PRESETS, PresetMetric, get_preset
from .services import assignment_scenario, resolve_schedulers


def _bindings(text):
    return read_bindings(io.StringIO(text))


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding="utf-8")
        return path


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------
class ParseConfigTests(TempDirMixin, SimpleTestCase):
    def test_empty_file_is_the_reference_experiment(self):
        config = parse_config(self.write("empty.conf", ""))
        self.assertEqual(config, default_config())
        self.assertEqual(config.scenario.mos, REFERENCE_MOS)
        self.assertEqual(config.scenario.n_enodebs, REFERENCE_ENODEBS)
        self.assertEqual(config.scenario.radius_km, REFERENCE_RADIUS_KM)
        self.assertEqual(config.channel.bandwidth_per_ue_hz, 5e6)
        self.assertEqual(config.channel.tx_power_dbm, 46.0)
        self.assertEqual(config.channel.noise_psd_dbm_hz, -179.0)
        self.assertEqual(config.channel.shadow_sigma_db, 8.0)
        self.assertEqual(config.channel.power_allocation, PowerAllocation.PER_UE)
        self.assertEqual(config.channel.association, Association.BEST_SERVER)
        self.assertEqual((config.n_replications, config.n_slots, config.demand_period), (1000, 1000, 50))
        self.assertEqual(config.scheduler.kind, SchedulerKind.MMF)
        self.assertEqual(config.scheduler.refresh, RefreshPolicy.PER_ASSIGNMENT)

    def test_single_override(self):
        config = parse_config(self.write("slots.conf", "# short run\nsim.slots=100\n"))
        self.assertEqual(config, replace(default_config(), n_slots=100))

    def test_unknown_key_is_named(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(self.write("typo.conf", "sim.slots=10\nshed.kind=rg\n"))
        self.assertEqual(ctx.exception.key, "shed.kind")
        self.assertEqual(ctx.exception.line, 2)
        self.assertIn("shed.kind", str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            parse_config(self.tmp / "absent.conf")

    def test_statement_without_value(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_bindings(_bindings("sim.seed=1\nsim.slots\n"))
        self.assertEqual(ctx.exception.line, 2)

    def test_line_numbers_count_blank_lines(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_bindings(_bindings("sim.seed=1\n\n\n# note\n\nshed.kind=rg\n"))
        self.assertEqual(ctx.exception.line, 6)

    def test_malformed_statement(self):
        with self.assertRaises(ConfigError) as ctx:
            _bindings('sim.seed=1\nsim.slots="100\n')
        self.assertEqual(ctx.exception.line, 2)

    def test_bad_values(self):
        for text, key in (
            ("sim.slots=abc", "sim.slots"),
            ("sim.replications=0", "sim.replications"),
            ("sched.kind=fifo", "sched.kind"),
            ("sched.tau=1", "sched.tau"),
            ("district.strict=maybe", "district.strict"),
        ):
            with self.subTest(text=text):
                with self.assertRaises(ConfigError) as ctx:
                    config_from_bindings(_bindings(text))
                self.assertEqual(ctx.exception.key, key)
                self.assertEqual(ctx.exception.line, 1)

    def test_typed_values(self):
        config = config_from_bindings(_bindings(
            "sched.kind=RG\n"
            "sched.refresh=per-interval\n"
            "channel.power_allocation=per-site\n"
            "channel.association=nearest\n"
            "channel.bandwidth_per_ue_mhz=10\n"
            "district.intersite_km=10\n"
            "sim.trace=yes\n"
            "sim.seed=42\n"
        ))
        self.assertEqual(config.scheduler.kind, SchedulerKind.RG)
        self.assertEqual(config.scheduler.refresh, RefreshPolicy.PER_INTERVAL)
        self.assertEqual(config.channel.power_allocation, PowerAllocation.PER_SITE)
        self.assertEqual(config.channel.association, Association.NEAREST)
        self.assertEqual(config.channel.bandwidth_per_ue_hz, 10e6)
        self.assertEqual(config.intersite_km, 10.0)
        self.assertTrue(config.keep_trace)
        self.assertEqual(config.master_seed, 42)

    def test_mo_overrides_layer_on_defaults(self):
        config = config_from_bindings(_bindings("mos.2.demand_high_gbps=20\nmos.1.beta=3\n"))
        self.assertEqual(config.scenario.mos[1].demand_range, (0.0, 20.0))
        self.assertEqual(config.scenario.mos[1].ue_count, 500)
        self.assertEqual(config.scenario.mos[0].beta, 3.0)

    def test_extra_operator(self):
        config = config_from_bindings(_bindings(
            "mos.4.ue_count=50\nmos.4.demand_low_gbps=1\nmos.4.demand_high_gbps=2\n"
        ))
        self.assertEqual(config.scenario.mo_count, 4)
        self.assertEqual(config.scenario.mos[3].kind, MOKind.QOS_AWARE)
        self.assertEqual(config.scenario.mos[3].demand_range, (1.0, 2.0))

    def test_extra_operator_needs_ue_count(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_bindings(_bindings("mos.4.beta=1\n"))
        self.assertEqual(ctx.exception.key, "mos.4.ue_count")

    def test_mo_count_truncates(self):
        config = config_from_bindings(_bindings("mos.count=2\n"))
        self.assertEqual(config.scenario.mo_count, 2)
        self.assertEqual(config.scenario.be_indices, ())

    def test_override_beyond_mo_count(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_bindings(_bindings("mos.count=2\nmos.3.beta=1\n"))
        self.assertEqual(ctx.exception.key, "mos.count")

    def test_inverted_demand_range_reports_line(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_bindings(_bindings("sim.seed=3\nmos.1.demand_low_gbps=9\n"))
        self.assertEqual(ctx.exception.line, 2)
        self.assertIn("low < high", str(ctx.exception))

    def test_static_counts_must_match_operators(self):
        with self.assertRaises(ConfigError):
            config_from_bindings(_bindings("enodebs.demand_counts=15,16\n"))
        config = config_from_bindings(_bindings("enodebs.ue_counts=10,11,10\n"))
        self.assertEqual(tuple(np.bincount(config.layout().static_labels_ue)), (10, 11, 10))

    def test_static_counts_error_names_key_and_line(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_bindings(_bindings("sim.seed=3\nenodebs.demand_counts=15,16\n"))
        self.assertEqual(ctx.exception.key, "enodebs.demand_counts")
        self.assertEqual(ctx.exception.line, 2)
        self.assertIn("do not match 3 MOs", str(ctx.exception))

    def test_strict_district(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_bindings(_bindings("district.strict=true\ndistrict.radius_km=20\n"))
        self.assertEqual((ctx.exception.key, ctx.exception.line), ("district.radius_km", 2))

    def test_strict_overflow_blames_site_count(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_bindings(_bindings("district.strict=true\n\nenodebs.count=40\n"))
        self.assertEqual((ctx.exception.key, ctx.exception.line), ("enodebs.count", 3))
        self.assertIn("beyond the 35.0 km district", str(ctx.exception))


# ---------------------------------------------------------------------------
# CSV files
# ---------------------------------------------------------------------------
class CsvRoundTripTests(TempDirMixin, SimpleTestCase):
    def test_assignment_with_unassigned_site(self):
        path = self.tmp / "phi.csv"
        csvio.write_assignment(path, np.array([1, UNASSIGNED, 0]))
        self.assertEqual(path.read_text(encoding="utf-8"), "enodeb_id,mo_id\n1,2\n2,none\n3,1\n")
        np.testing.assert_array_equal(csvio.read_assignment(path), [1, UNASSIGNED, 0])

    def test_demands_with_best_effort(self):
        path = self.tmp / "omega.csv"
        csvio.write_demands(path, demand_vector([3.25, None]))
        self.assertEqual(path.read_text(encoding="utf-8"), "mo_id,demand_gbps\n1,3.25\n2,BE\n")
        omega = csvio.read_demands(path)
        self.assertEqual(omega[0], 3.25)
        self.assertTrue(math.isnan(omega[1]))

    def test_rate_matrix(self):
        path = self.tmp / "rates.csv"
        R = np.array([[0.1, 1 / 3], [2.0, 5.0]])
        csvio.write_rate_matrix(path, R)
        np.testing.assert_array_equal(csvio.read_rate_matrix(path), R)

    def test_rate_matrix_shape_errors(self):
        for text in ("mo_id,1,2\n1,3,1\n2,2\n", "mo_id,1\n2,3\n", "mo_id,1\n1,-3\n", "mo_id\n", ""):
            with self.subTest(text=text):
                with self.assertRaises(csvio.CsvFormatError):
                    csvio.read_rate_matrix(self.write("bad.csv", text))

    def test_demands_wrong_header(self):
        with self.assertRaises(csvio.CsvFormatError):
            csvio.read_demands(self.write("bad.csv", "mo,demand\n1,3\n"))

    def test_figure_bars_with_undefined_metric(self):
        path = self.tmp / "fig.csv"
        csvio.write_figure_bars(path, [("mmf", 0.75, 0.1), ("rr", None, None)])
        self.assertEqual(csvio.read_figure_bars(path), [("mmf", 0.75, 0.1), ("rr", None, None)])


class AssignmentScenarioTests(SimpleTestCase):
    def test_kinds_and_betas(self):
        scenario = assignment_scenario(demand_vector([3, 1, None]), 2)
        self.assertEqual(scenario.qos_indices, (0, 1))
        self.assertEqual([mo.beta for mo in scenario.mos], [10.0, 9.5, 0.0])
        scenario = assignment_scenario(demand_vector([3, 1]), 2, betas=[1.0, 2.0])
        self.assertEqual([mo.beta for mo in scenario.mos], [1.0, 2.0])

    def test_rejects_negative_demand(self):
        with self.assertRaises(ValueError):
            assignment_scenario(demand_vector([-1]), 1)


class PresetTests(SimpleTestCase):
    def test_presets(self):
        self.assertEqual(sorted(PRESETS), ["fig4", "fig5", "fig6", "fig7"])
        self.assertEqual(get_preset("fig4").metric, PresetMetric.FAIRNESS)
        self.assertEqual(len(get_preset("fig6").schedulers), 8)
        self.assertEqual(get_preset("fig7").schedulers, (SchedulerKind.MMF,))
        with self.assertRaises(ValueError):
            get_preset("fig8")

    @override_settings(PRESET_RUNS=200, PRESET_SLOTS=1000)
    def test_scale(self):
        self.assertEqual(get_preset("fig5").scale(), (200, 1000))
        self.assertEqual(get_preset("fig5").scale(runs=50), (50, 1000))
        self.assertEqual(get_preset("fig7").scale(runs=50, slots=10), (1, 10))

    def test_without_drops_named_schedulers(self):
        preset = get_preset("fig6").without(["rr", "bet"])
        self.assertEqual(len(preset.schedulers), 6)
        self.assertNotIn(SchedulerKind.RR, preset.schedulers)
        self.assertNotIn(SchedulerKind.BET, preset.schedulers)
        self.assertEqual(len(get_preset("fig6").schedulers), 8)
        self.assertIs(get_preset("fig6").without([]), get_preset("fig6"))

    def test_without_rejects_bad_lists(self):
        with self.assertRaises(ValueError):
            get_preset("fig6").without(["fifo"])
        with self.assertRaises(ValueError):
            get_preset("fig7").without(["mmf"])
        with self.assertRaises(ValueError):
            get_preset("fig4").without([k.value for k in SchedulerKind.ordered()])

    def test_resolve_schedulers(self):
        self.assertEqual(len(resolve_schedulers("all")), 8)
        self.assertEqual(resolve_schedulers("pf"), [SchedulerKind.PF])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def _run(*args):
    out = io.StringIO()
    call_command(*args, stdout=out, stderr=io.StringIO())
    return out.getvalue()


@override_settings(SLICE_SCHED_THREADS=1)
class AssignCommandTests(TempDirMixin, TestCase):
    def _assign(self, rates, demands, scheduler, *extra):
        rates_path = self.tmp / "rates.csv"
        demands_path = self.tmp / "demands.csv"
        out = self.tmp / "phi.csv"
        csvio.write_rate_matrix(rates_path, np.array(rates, dtype=float))
        csvio.write_demands(demands_path, demand_vector(demands))
        _run("assign", "--rates", str(rates_path), "--demands", str(demands_path),
             "--scheduler", scheduler, "--out", str(out), *extra)
        return out.read_text(encoding="utf-8")

    def test_max_throughput(self):
        self.assertEqual(self._assign([[3, 1], [2, 5]], [None, None], "mt"), "enodeb_id,mo_id\n1,1\n2,2\n")

    def test_round_robin_cycles(self):
        text = self._assign(np.ones((2, 4)), [None, None], "rr")
        self.assertEqual(text, "enodeb_id,mo_id\n1,1\n2,2\n3,1\n4,2\n")

    def test_max_min_fair(self):
        text = self._assign(np.full((3, 2), 2.0), [3, 1, None], "mmf")
        self.assertEqual(text, "enodeb_id,mo_id\n1,2\n2,1\n")

    def test_dimension_mismatch(self):
        rates = self.write("rates.csv", "mo_id,1,2\n1,1,1\n2,1,1\n3,1,1\n")
        demands = self.write("demands.csv", "mo_id,demand_gbps\n1,1\n2,BE\n")
        with self.assertRaises(CommandError) as ctx:
            _run("assign", "--rates", str(rates), "--demands", str(demands),
                 "--scheduler", "mt", "--out", str(self.tmp / "phi.csv"))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("3x2", str(ctx.exception))
        self.assertIn("2 entries", str(ctx.exception))

    def test_static_baselines_are_rejected(self):
        with self.assertRaises(CommandError) as ctx:
            self._assign([[1.0]], [None], "static-ue")
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_input_is_io_error(self):
        with self.assertRaises(CommandError) as ctx:
            _run("assign", "--rates", str(self.tmp / "none.csv"), "--demands", str(self.tmp / "none.csv"),
                 "--scheduler", "mt", "--out", str(self.tmp / "phi.csv"))
        self.assertEqual(ctx.exception.returncode, 2)


@override_settings(SLICE_SCHED_THREADS=1, RUN_LEDGER_ENABLED=True)
class SimulateCommandTests(TempDirMixin, TestCase):
    def _simulate(self, out_dir, *extra):
        _run("simulate", "--runs", "2", "--slots", "10", "--seed", "7", "--out-dir", str(out_dir), *extra)
        return out_dir / "summary.csv"

    def test_smoke_run(self):
        summary = self._simulate(self.tmp / "a", "--scheduler", "mmf")
        rows = csvio.read_summary(summary)
        self.assertEqual([r["scheduler"] for r in rows], ["mmf"])
        self.assertTrue(0.0 < rows[0]["fairness_mean"] <= 1.0)
        self.assertIsNotNone(rows[0]["satisfied_mean"])
        entry = RunEntry.objects.get()
        self.assertEqual((entry.command, entry.schedulers, entry.seed), ("simulate", "mmf", 7))

    def test_byte_identical_reruns(self):
        a = self._simulate(self.tmp / "a", "--scheduler", "mmf")
        b = self._simulate(self.tmp / "b", "--scheduler", "mmf")
        self.assertEqual(a.read_bytes(), b.read_bytes())

    def test_all_schedulers(self):
        _run("simulate", "--scheduler", "all", "--runs", "1", "--slots", "3", "--out-dir", str(self.tmp))
        rows = csvio.read_summary(self.tmp / "summary.csv")
        self.assertEqual(
            [r["scheduler"] for r in rows],
            ["rr", "bet", "mt", "pf", "mmf", "rg", "static-demand", "static-ue"],
        )

    def test_slot_dump(self):
        self._simulate(self.tmp, "--scheduler", "pf", "--dump-slots")
        rows = csvio.read_slot_dump(self.tmp / "slots.csv")
        self.assertEqual(len(rows), 2 * 10 * 3)
        self.assertTrue(all(math.isnan(r["demand_gbps"]) for r in rows if r["mo"] == 3))
        self.assertEqual({r["replication"] for r in rows}, {0, 1})

    def test_config_file_sets_scheduler(self):
        config = self.write("exp.conf", "sched.kind=bet\nsim.replications=1\nsim.slots=2\n")
        _run("simulate", "--config", str(config), "--out-dir", str(self.tmp))
        self.assertEqual([r["scheduler"] for r in csvio.read_summary(self.tmp / "summary.csv")], ["bet"])

    def test_config_errors_exit_1(self):
        config = self.write("typo.conf", "shed.kind=rg\n")
        with self.assertRaises(CommandError) as ctx:
            _run("simulate", "--config", str(config), "--out-dir", str(self.tmp))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("shed.kind", str(ctx.exception))

    def test_bad_run_count_exits_1(self):
        with self.assertRaises(CommandError) as ctx:
            _run("simulate", "--runs", "0", "--out-dir", str(self.tmp))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_config_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            _run("simulate", "--config", str(self.tmp / "absent.conf"))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unwritable_output_exits_2(self):
        blocker = self.write("blocker", "")
        with self.assertRaises(CommandError) as ctx:
            _run("simulate", "--runs", "1", "--slots", "1", "--out-dir", str(blocker / "sub"))
        self.assertEqual(ctx.exception.returncode, 2)


@override_settings(SLICE_SCHED_THREADS=1, PLOTTING_ENABLED=False, RUN_LEDGER_ENABLED=True)
class FigureCommandTests(TempDirMixin, TestCase):
    def test_fig7_time_series(self):
        _run("figure", "fig7", "--slots", "1000", "--seed", "3", "--out-dir", str(self.tmp))
        rows = csvio.read_timeseries(self.tmp / "fig7.csv")
        self.assertEqual(len(rows), 3000)
        self.assertEqual({r["mo"] for r in rows}, {1, 2, 3})
        self.assertTrue(all(math.isnan(r["demand_gbps"]) for r in rows if r["mo"] == 3))

    def test_fig4_bars(self):
        _run("figure", "fig4", "--runs", "50", "--slots", "2", "--out-dir", str(self.tmp))
        bars = csvio.read_figure_bars(self.tmp / "fig4.csv")
        self.assertEqual(len(bars), 8)
        self.assertTrue(all(0.0 < mean <= 1.0 for _, mean, _ in bars))
        self.assertEqual(RunEntry.objects.get().runs, 50)

    def test_fig6_includes_every_scheduler(self):
        _run("figure", "fig6", "--runs", "1", "--slots", "2", "--out-dir", str(self.tmp))
        bars = csvio.read_figure_bars(self.tmp / "fig6.csv")
        self.assertEqual([b[0] for b in bars], [k.value for k in SchedulerKind.ordered()])

    def test_fig6_exclude_leaves_six_rows(self):
        _run("figure", "fig6", "--runs", "1", "--slots", "2", "--exclude", "rr,bet", "--out-dir", str(self.tmp))
        bars = csvio.read_figure_bars(self.tmp / "fig6.csv")
        self.assertEqual(len(bars), 6)
        self.assertEqual([b[0] for b in bars], ["mt", "pf", "mmf", "rg", "static-demand", "static-ue"])
        self.assertEqual(RunEntry.objects.get().schedulers.split(","), [b[0] for b in bars])

    def test_unknown_exclude_exits_1(self):
        with self.assertRaises(CommandError) as ctx:
            _run("figure", "fig6", "--exclude", "fifo", "--out-dir", str(self.tmp))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_plot_skipped_when_disabled(self):
        _run("figure", "fig5", "--runs", "1", "--slots", "2", "--out-dir", str(self.tmp), "--plot")
        self.assertTrue((self.tmp / "fig5.csv").exists())
        self.assertFalse((self.tmp / "fig5.png").exists())

    @override_settings(PLOTTING_ENABLED=True)
    def test_plot_rendered(self):
        if importlib.util.find_spec("matplotlib") is None:
            self.skipTest("matplotlib not installed")
        _run("figure", "fig7", "--slots", "20", "--out-dir", str(self.tmp), "--plot")
        self.assertGreater((self.tmp / "fig7.png").stat().st_size, 0)

    @override_settings(PLOTTING_ENABLED=True)
    def test_bar_plot_rendered(self):
        if importlib.util.find_spec("matplotlib") is None:
            self.skipTest("matplotlib not installed")
        _run("figure", "fig5", "--runs", "1", "--slots", "2", "--out-dir", str(self.tmp), "--plot")
        self.assertGreater((self.tmp / "fig5.png").stat().st_size, 0)


class ExportLayoutCommandTests(TempDirMixin, SimpleTestCase):
    def test_reference_layout(self):
        out = self.tmp / "layout.csv"
        _run("export_layout", "--out", str(out))
        rows = csvio.read_layout(out)
        self.assertEqual([r["site_id"] for r in rows], list(range(1, 32)))
        self.assertEqual(np.bincount([r["label_demand"] for r in rows])[1:].tolist(), [12, 18, 1])
        self.assertEqual(np.bincount([r["label_ue"] for r in rows])[1:].tolist(), [9, 16, 6])
        self.assertTrue(all(math.hypot(r["x_km"], r["y_km"]) <= 35.0 for r in rows))


class ListRunsCommandTests(TestCase):
    def test_empty_ledger(self):
        self.assertIn("No runs recorded.", _run("list_runs"))

    def test_lists_entries(self):
        RunEntry.objects.create(
            command=RunEntry.Command.FIGURE, schedulers="mmf", seed=3, runs=1, slots=10,
            out_dir="results", detail="fig7\nmmf: fairness=0.9",
        )
        text = _run("list_runs", "--detail")
        self.assertIn("figure", text)
        self.assertIn("seed=3", text)
        self.assertIn("mmf: fairness=0.9", text)
        self.assertIn("No runs recorded.", _run("list_runs", "--command", "simulate"))
