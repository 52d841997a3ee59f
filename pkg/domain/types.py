"""
Core value types shared by every app.

Matrices and vectors are numpy arrays; the aliases below name what each
array holds. Rows are indexed by MO (0-based), columns by eNodeB.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import numpy.typing as npt
from django.db import models

# R(i,k) in Gbps: rate MO i obtains if eNodeB k is granted to it.
RateMatrix = npt.NDArray[np.float64]
# m(i,k): scheduler metric, same shape as RateMatrix.
MetricMatrix = npt.NDArray[np.float64]
# Ω(i) in Gbps, NO_DEMAND for best-effort MOs.
DemandVector = npt.NDArray[np.float64]
# Φ(k): owning MO index per eNodeB, UNASSIGNED when nobody holds it.
AssignmentVector = npt.NDArray[np.int64]

NO_DEMAND = math.nan
UNASSIGNED = -1

# λ_i(0); keeps 1/λ and R/λ^γ finite in the first slot.
LAMBDA_INIT_GBPS = 0.001


class ScenarioError(ValueError):
    """Inconsistent MO set or district description."""


class MOKind(models.TextChoices):
    QOS_AWARE = "qos", "QoS-aware"
    BEST_EFFORT = "be", "Best-effort"


@dataclass(frozen=True)
class MobileOperator:
    """A tenant competing for eNodeBs."""
    index: int
    kind: MOKind
    ue_count: int
    beta: float = 0.0
    demand_range: Optional[tuple[float, float]] = None

    @property
    def is_qos(self):
        return self.kind == MOKind.QOS_AWARE

    @property
    def label(self):
        return f"MO-{self.index + 1}"

    @property
    def mean_demand(self):
        if self.demand_range is None:
            return 0.0
        low, high = self.demand_range
        return (low + high) / 2.0


@dataclass(frozen=True)
class Scenario:
    """Validated MO set plus district size; build it with validate_scenario."""
    mos: tuple[MobileOperator, ...]
    n_enodebs: int
    radius_km: float

    @property
    def mo_count(self):
        return len(self.mos)

    @property
    def qos_indices(self):
        return tuple(mo.index for mo in self.mos if mo.is_qos)

    @property
    def be_indices(self):
        return tuple(mo.index for mo in self.mos if not mo.is_qos)

    @property
    def ue_counts(self):
        return tuple(mo.ue_count for mo in self.mos)


def demand_vector(values):
    """Build a DemandVector; None marks a best-effort entry."""
    return np.array(
        [NO_DEMAND if v is None else float(v) for v in values], dtype=float
    )


def has_demand(omega, i):
    return not math.isnan(omega[i])


def delta_matrix(phi, mo_count):
    """δ_{i,k}: 1 where Φ(k) = i. UNASSIGNED columns stay all-zero."""
    phi = np.asarray(phi, dtype=np.int64)
    delta = np.zeros((mo_count, phi.size), dtype=np.int8)
    held = phi != UNASSIGNED
    delta[phi[held], np.flatnonzero(held)] = 1
    return delta


@dataclass(frozen=True, eq=False)
class SchedulerState:
    """
    Per-replication scheduler memory.

    lam is the smoothed average rate λ (Gbps), tau the filter time constant
    in slots, rr_offset the round-robin cursor and delta the δ matrix of the
    last completed interval (None before the first assignment).
    """
    lam: np.ndarray
    tau: float
    rr_offset: int = 0
    delta: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.tau > 1:
            raise ScenarioError(f"tau must be > 1, got {self.tau}")
        if self.rr_offset < 0:
            raise ScenarioError("rr_offset must be non-negative")

    @classmethod
    def initial(cls, mo_count, tau, lam0=LAMBDA_INIT_GBPS):
        return cls(lam=np.full(mo_count, lam0, dtype=float), tau=float(tau))

    @property
    def mo_count(self):
        return self.lam.size

    def evolve(self, **changes):
        return replace(self, **changes)
