"""Figure presets: which schedulers run, which metric is reported, at what scale."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from django.conf import settings
from django.db import models

from schedulers.scoring import SchedulerKind


class PresetMetric(models.TextChoices):
    FAIRNESS = "fairness", "Jain fairness index"
    RATE = "rate_gbps", "Total data rate (Gbps)"
    SATISFIED = "satisfied", "Satisfied-MO ratio"
    TIMESERIES = "timeseries", "Per-MO data rate over time"


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    metric: PresetMetric
    schedulers: tuple[SchedulerKind, ...]
    title: str
    # None means "use the project-wide preset scale".
    runs: Optional[int] = None
    slots: Optional[int] = None

    @property
    def is_timeseries(self):
        return self.metric == PresetMetric.TIMESERIES

    def scale(self, runs=None, slots=None):
        """(replications, slots) after command-line overrides."""
        if self.is_timeseries:
            return 1, slots or self.slots or settings.PRESET_SLOTS
        return (
            runs or self.runs or settings.PRESET_RUNS,
            slots or self.slots or settings.PRESET_SLOTS,
        )

    def without(self, names):
        """A copy of the preset with the named schedulers left out."""
        if not names:
            return self
        if self.is_timeseries:
            raise ValueError(f"preset {self.name} runs a single scheduler; nothing to exclude")
        try:
            excluded = {SchedulerKind(name) for name in names}
        except ValueError:
            raise ValueError(
                f"unknown scheduler in exclude list: {','.join(names)}"
            ) from None
        kept = tuple(kind for kind in self.schedulers if kind not in excluded)
        if not kept:
            raise ValueError(f"excluding {','.join(names)} leaves preset {self.name} empty")
        return replace(self, schedulers=kept)

    def bar(self, summary):
        """(mean, std) of this preset's metric from an Aggregate."""
        if self.metric == PresetMetric.FAIRNESS:
            return summary.fairness_mean, summary.fairness_std
        if self.metric == PresetMetric.RATE:
            return summary.rate_gbps_mean, summary.rate_gbps_std
        if self.metric == PresetMetric.SATISFIED:
            return summary.satisfied_mean, summary.satisfied_std
        raise ValueError(f"preset {self.name} has no bar metric")


PRESETS = {
    "fig4": ExperimentPreset(
        "fig4", PresetMetric.FAIRNESS, tuple(SchedulerKind.ordered()), "Fairness performances",
    ),
    "fig5": ExperimentPreset(
        "fig5", PresetMetric.RATE, tuple(SchedulerKind.ordered()), "Data rate performances",
    ),
    "fig6": ExperimentPreset(
        "fig6", PresetMetric.SATISFIED, tuple(SchedulerKind.ordered()), "Satisfied-MO-ratio performances",
    ),
    # A single MMF replication, traced slot by slot.
    "fig7": ExperimentPreset(
        "fig7", PresetMetric.TIMESERIES, (SchedulerKind.MMF,), "Evolution of obtained data rates", runs=1,
    ),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset '{name}' (choose from {', '.join(PRESETS)})") from None
