"""
Monte-Carlo engine: the per-replication slot loop and the parallel driver.

Each replication places UEs once, then every slot redraws shadowing,
rebuilds R, redraws demands on the demand period (slot 0 included), asks the
controller for Φ, records the slot and folds the served rates into λ.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import repeat
from typing import Optional

import numpy as np

from channel.layout import build_layout
from channel.propagation import ChannelParams, build_rate_matrix, draw_slot_shadowing, place_ues
from domain.types import NO_DEMAND, Scenario, SchedulerState, ScenarioError
from metrics.evaluation import (
    Aggregate, SlotRecord, aggregate_means, jain_fairness, per_mo_rate, replication_means, satisfied_ratio,
    site_counts,
)
from schedulers.controller import VirtualizationController
from schedulers.scoring import SchedulerConfig, SchedulerKind
from .seeding import derive_seed, replication_streams

logger = logging.getLogger("slicesched.sim")

DEFAULT_INTERSITE_KM = 11.0
DEFAULT_DEMAND_PERIOD = 50


@dataclass(frozen=True)
class SimConfig:
    scenario: Scenario
    scheduler: SchedulerConfig
    channel: ChannelParams = field(default_factory=ChannelParams)
    intersite_km: float = DEFAULT_INTERSITE_KM
    strict_layout: bool = False
    demand_counts: Optional[tuple[int, ...]] = None
    ue_counts: Optional[tuple[int, ...]] = None
    n_replications: int = 1000
    n_slots: int = 1000
    demand_period: int = DEFAULT_DEMAND_PERIOD
    master_seed: int = 0
    keep_trace: bool = False

    def __post_init__(self):
        if self.n_replications < 1:
            raise ScenarioError(f"n_replications must be >= 1, got {self.n_replications}")
        if self.n_slots < 1:
            raise ScenarioError(f"n_slots must be >= 1, got {self.n_slots}")
        if self.demand_period < 1:
            raise ScenarioError(f"demand_period must be >= 1, got {self.demand_period}")

    def with_scheduler(self, kind):
        return replace(self, scheduler=replace(self.scheduler, kind=SchedulerKind(kind)))

    def layout(self):
        return build_layout(
            self.scenario,
            self.intersite_km,
            demand_counts=self.demand_counts,
            ue_counts=self.ue_counts,
            strict=self.strict_layout,
        )


@dataclass(frozen=True)
class ReplicationResult:
    replication: int
    seed: int
    records: tuple[SlotRecord, ...]
    trace: Optional[tuple[tuple[int, ...], ...]] = None


@dataclass(frozen=True)
class MonteCarloResult:
    scheduler: str
    summary: Aggregate
    replications: tuple[ReplicationResult, ...]


def draw_demands(scenario, rng):
    """Ω for the next demand period: uniform over each QoS MO's range."""
    omega = np.full(scenario.mo_count, NO_DEMAND)
    for mo in scenario.mos:
        if mo.is_qos:
            low, high = mo.demand_range
            omega[mo.index] = rng.uniform(low, high)
    return omega


def run_replication(config, replication_index):
    seed = derive_seed(config.master_seed, replication_index)
    streams = replication_streams(seed)
    scenario = config.scenario
    layout = config.layout()
    controller = VirtualizationController(config.scheduler, scenario, layout)
    qos = scenario.qos_indices

    placement = place_ues(scenario, layout, streams["placement"])
    state = SchedulerState.initial(scenario.mo_count, config.scheduler.tau)
    omega = None
    records, trace = [], []
    logger.debug("Replication %d (%s) seed=%d", replication_index, config.scheduler.label, seed)

    for slot in range(config.n_slots):
        shadowing = draw_slot_shadowing(streams["shadowing"], placement, layout, config.channel)
        R = build_rate_matrix(layout, placement, shadowing, config.channel, scenario.mo_count)
        if slot % config.demand_period == 0:
            omega = draw_demands(scenario, streams["demand"])

        phi = controller.assign(R, omega, state)
        rates = per_mo_rate(phi, R)
        records.append(SlotRecord(
            slot=slot,
            per_mo_rate=tuple(float(r) for r in rates),
            omega=tuple(float(w) for w in omega),
            assigned_sites=tuple(int(c) for c in site_counts(phi, scenario.mo_count)),
            fairness=jain_fairness(rates),
            satisfied_ratio=satisfied_ratio(rates, omega, qos) if qos else None,
        ))
        if config.keep_trace:
            trace.append(tuple(int(v) for v in phi))
        state = controller.advance(state, R, phi)

    logger.debug("Replication %d (%s) finished %d slots", replication_index, config.scheduler.label, config.n_slots)
    return ReplicationResult(
        replication=replication_index,
        seed=seed,
        records=tuple(records),
        trace=tuple(trace) if config.keep_trace else None,
    )


def run_monte_carlo(config, max_workers=1, keep_records=True):
    """
    Run every replication and aggregate them. Replications are independent,
    so with max_workers > 1 they fan out over a process pool; results come
    back in replication order either way. With keep_records=False each
    replication is folded into its time means as it arrives and only its
    seed is kept.
    """
    indices = range(config.n_replications)
    logger.info(
        "Monte-Carlo %s: %d replications x %d slots on %d worker(s)",
        config.scheduler.label, config.n_replications, config.n_slots, max_workers,
    )
    means, kept = [], []

    def collect(results):
        for result in results:
            means.append(replication_means(result.records))
            kept.append(result if keep_records else replace(result, records=(), trace=None))

    if max_workers > 1 and config.n_replications > 1:
        with ProcessPoolExecutor(max_workers=min(max_workers, config.n_replications)) as pool:
            collect(pool.map(run_replication, repeat(config), indices))
    else:
        collect(run_replication(config, i) for i in indices)

    summary = aggregate_means(means)
    logger.info(
        "Monte-Carlo %s done: fairness=%.4f rate=%.4f Gbps",
        config.scheduler.label, summary.fairness_mean, summary.rate_gbps_mean,
    )
    return MonteCarloResult(scheduler=config.scheduler.label, summary=summary, replications=tuple(kept))
