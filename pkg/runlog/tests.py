from types import SimpleNamespace
from unittest import mock

from django.db import DatabaseError
from django.test import TestCase, override_settings

from metrics.evaluation import Aggregate
from .models import RunEntry
from .services import log_run, recent_runs, summary_detail


def _result(name, satisfied):
    return SimpleNamespace(
        scheduler=name,
        summary=Aggregate(2, 0.9, 0.01, 3.5, 0.2, satisfied, None if satisfied is None else 0.0),
    )


@override_settings(RUN_LEDGER_ENABLED=True)
class LogRunTests(TestCase):
    def test_creates_entry(self):
        entry = log_run(RunEntry.Command.SIMULATE, ["mmf", "rg"], 7, 2, 10, "out", "detail")
        self.assertEqual(RunEntry.objects.get(), entry)
        self.assertEqual(entry.schedulers, "mmf,rg")
        self.assertEqual(recent_runs(command="simulate"), [entry])
        self.assertEqual(recent_runs(command="figure"), [])

    @override_settings(RUN_LEDGER_ENABLED=False)
    def test_disabled(self):
        self.assertIsNone(log_run(RunEntry.Command.SIMULATE, ["mmf"], 7, 2, 10, "out"))
        self.assertFalse(RunEntry.objects.exists())

    def test_database_failure_is_logged_not_raised(self):
        with mock.patch.object(RunEntry.objects, "create", side_effect=DatabaseError("no such table")):
            with self.assertLogs("slicesched.runlog", level="WARNING") as logs:
                self.assertIsNone(log_run(RunEntry.Command.FIGURE, ["mt"], 0, 1, 1, "out"))
        self.assertIn("no such table", logs.output[0])

    def test_summary_detail(self):
        text = summary_detail([_result("mmf", 0.75), _result("mt", None)])
        self.assertEqual(
            text.splitlines(),
            ["mmf: fairness=0.9000 rate=3.5000 satisfied=0.7500", "mt: fairness=0.9000 rate=3.5000 satisfied=n/a"],
        )
