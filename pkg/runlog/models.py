"""Run ledger: one row per simulate/figure invocation."""
import uuid

from django.db import models


class RunEntry(models.Model):
    """Immutable record of an experiment run and where its CSVs went."""

    class Command(models.TextChoices):
        SIMULATE = "simulate", "Simulate"
        FIGURE = "figure", "Figure"

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    timestamp = models.DateTimeField(auto_now_add=True, db_index=True)
    command = models.CharField(max_length=20, choices=Command.choices, db_index=True)
    schedulers = models.CharField(max_length=200)
    seed = models.PositiveBigIntegerField()
    runs = models.PositiveIntegerField()
    slots = models.PositiveIntegerField()
    out_dir = models.TextField()
    detail = models.TextField(blank=True, default="")

    class Meta:
        app_label = "runlog"
        db_table = "run_log"
        ordering = ["-timestamp"]
        indexes = [
            models.Index(fields=["command", "timestamp"], name="idx_runlog_cmd_ts"),
        ]

    def __str__(self):
        return f"{self.timestamp} [{self.command}] {self.schedulers} seed={self.seed}"
