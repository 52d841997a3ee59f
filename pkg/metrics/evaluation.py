"""
Evaluation quantities: per-MO rate, Jain's fairness index, satisfied-MO
ratio, and their Monte-Carlo aggregation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from domain.types import UNASSIGNED

logger = logging.getLogger("slicesched.metrics")


class MetricError(ValueError):
    """Metric requested on input it is undefined for."""


@dataclass(frozen=True)
class SlotRecord:
    """What one allocation interval produced. satisfied_ratio is None without QoS MOs."""
    slot: int
    per_mo_rate: tuple[float, ...]
    omega: tuple[float, ...]
    assigned_sites: tuple[int, ...]
    fairness: float
    satisfied_ratio: Optional[float]

    @property
    def total_rate(self):
        return math.fsum(self.per_mo_rate)


@dataclass(frozen=True)
class Aggregate:
    replications: int
    fairness_mean: float
    fairness_std: float
    rate_gbps_mean: float
    rate_gbps_std: float
    satisfied_mean: Optional[float]
    satisfied_std: Optional[float]


def per_mo_rate(phi, R):
    """rate_i = Σ_{k: Φ(k)=i} R(i,k); UNASSIGNED columns count for nobody."""
    R = np.asarray(R, dtype=float)
    phi = np.asarray(phi, dtype=np.int64)
    rates = np.zeros(R.shape[0])
    held = np.flatnonzero(phi != UNASSIGNED)
    np.add.at(rates, phi[held], R[phi[held], held])
    return rates


def site_counts(phi, mo_count):
    phi = np.asarray(phi, dtype=np.int64)
    return np.bincount(phi[phi != UNASSIGNED], minlength=mo_count)


def jain_fairness(rates):
    """(Σr)² / (M·Σr²); an all-zero vector counts as perfectly fair."""
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0:
        raise MetricError("fairness needs at least one MO")
    square_sum = math.fsum(rates * rates)
    if square_sum == 0:
        logger.debug("Degenerate fairness input: all %d rates are zero", rates.size)
        return 1.0
    # Rounding can push near-equal inputs a hair above 1.
    return min(1.0, math.fsum(rates) ** 2 / (rates.size * square_sum))


def satisfied_ratio(rates, omega, qos_set):
    """Share of QoS-aware MOs whose rate meets their demand."""
    qos_set = list(qos_set)
    if not qos_set:
        raise MetricError("satisfied ratio needs at least one QoS-aware MO")
    met = sum(1 for i in qos_set if rates[i] >= omega[i])
    return met / len(qos_set)


def _population_std(values, mean):
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def _mean_and_std(values):
    mean = math.fsum(values) / len(values)
    return mean, _population_std(values, mean)


def replication_means(records):
    """Time means of (fairness, total rate, satisfied ratio) for one replication."""
    if not records:
        raise MetricError("replication has no slot records")
    fairness = math.fsum(r.fairness for r in records) / len(records)
    rate = math.fsum(r.total_rate for r in records) / len(records)
    satisfied = [r.satisfied_ratio for r in records if r.satisfied_ratio is not None]
    satisfied_mean = math.fsum(satisfied) / len(satisfied) if satisfied else None
    return fairness, rate, satisfied_mean


def aggregate(replications):
    """
    Time-then-replication means and replication-level population standard
    deviations. Sums go through math.fsum, so the result does not depend on
    replication or record order.
    """
    return aggregate_means([replication_means(list(records)) for records in replications])


def aggregate_means(means):
    """aggregate() over precomputed replication_means() triples."""
    means = list(means)
    if not means:
        raise MetricError("nothing to aggregate")

    fairness_mean, fairness_std = _mean_and_std(sorted(m[0] for m in means))
    rate_mean, rate_std = _mean_and_std(sorted(m[1] for m in means))
    satisfied = sorted(m[2] for m in means if m[2] is not None)
    satisfied_mean, satisfied_std = _mean_and_std(satisfied) if satisfied else (None, None)

    return Aggregate(
        replications=len(means),
        fairness_mean=fairness_mean,
        fairness_std=fairness_std,
        rate_gbps_mean=rate_mean,
        rate_gbps_std=rate_std,
        satisfied_mean=satisfied_mean,
        satisfied_std=satisfied_std,
    )
