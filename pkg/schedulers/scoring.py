"""
Scheduler kinds and their per-(MO, eNodeB) metrics.

Every dynamic scheduler reduces to a metric matrix M; the controller then
gives eNodeB k to argmax_i m(i,k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from django.db import models

from domain.types import has_demand

# Best-effort MOs under RG: U'(λ) = Ω_nominal / λ with β = 0.
BE_NOMINAL_DEMAND_GBPS = 1.0
# QoS demands are clamped to this before entering U'.
DEMAND_FLOOR_GBPS = 1e-6

DEFAULT_TAU = 50.0
DEFAULT_PF_ALPHA = 1.0
DEFAULT_PF_GAMMA = 0.8


class SchedulingError(ValueError):
    """Scheduler input that violates a metric or assignment precondition."""


class SchedulerKind(models.TextChoices):
    RR = "rr", "Round robin"
    BET = "bet", "Blind equal throughput"
    MT = "mt", "Maximum throughput"
    PF = "pf", "Proportional fair"
    MMF = "mmf", "Max-min fair"
    RG = "rg", "Rate guarantee"
    STATIC_DEMAND = "static-demand", "Static demand-based"
    STATIC_UE = "static-ue", "Static UE-based"

    @classmethod
    def ordered(cls):
        return [cls.RR, cls.BET, cls.MT, cls.PF, cls.MMF, cls.RG, cls.STATIC_DEMAND, cls.STATIC_UE]

    @classmethod
    def dynamic(cls):
        return [cls.RR, cls.BET, cls.MT, cls.PF, cls.MMF, cls.RG]

    @property
    def is_static(self):
        return self in (SchedulerKind.STATIC_DEMAND, SchedulerKind.STATIC_UE)

    @property
    def channel_aware(self):
        return self in (SchedulerKind.MT, SchedulerKind.PF, SchedulerKind.MMF, SchedulerKind.RG)

    @property
    def qos_aware(self):
        return self in (SchedulerKind.MMF, SchedulerKind.RG)

    @property
    def category(self):
        """Coarse family used to group schedulers in plots."""
        if self.is_static:
            return "static"
        if self.qos_aware:
            return "qos-aware"
        if self.channel_aware:
            return "channel-aware"
        return "channel-blind"

    @property
    def uses_average_rate(self):
        return self in (SchedulerKind.BET, SchedulerKind.PF, SchedulerKind.RG)


class RefreshPolicy(models.TextChoices):
    PER_ASSIGNMENT = "per-assignment", "Recompute metrics after every granted eNodeB"
    PER_INTERVAL = "per-interval", "Compute metrics once per interval"


@dataclass(frozen=True)
class SchedulerConfig:
    kind: SchedulerKind
    refresh: RefreshPolicy = RefreshPolicy.PER_ASSIGNMENT
    tau: float = DEFAULT_TAU
    alpha: float = DEFAULT_PF_ALPHA
    gamma: float = DEFAULT_PF_GAMMA

    def __post_init__(self):
        if not self.tau > 1:
            raise SchedulingError(f"tau must be > 1, got {self.tau}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.gamma)):
            raise SchedulingError("PF alpha and gamma must be finite")

    @property
    def label(self):
        return self.kind.value


def rg_marginal_utility(lambda_i, omega_i, beta_i):
    """
    U'(λ) = Ω/λ + β·exp(-β(λ-Ω)/Ω), the derivative of the RG utility
    U(λ) = Ω·(log λ + 1 - exp(-β(λ-Ω)/Ω)).
    """
    lam = np.asarray(lambda_i, dtype=float)
    omega = np.asarray(omega_i, dtype=float)
    if np.any(lam <= 0):
        raise SchedulingError("average rate must be positive")
    if np.any(omega <= 0):
        raise SchedulingError("demand must be positive")
    value = omega / lam + beta_i * np.exp(-beta_i * (lam - omega) / omega)
    return float(value) if np.ndim(value) == 0 else value


def rg_weights(lam, omega, scenario):
    """Per-MO U'(λ_i) column used by the RG metric."""
    weights = np.empty(scenario.mo_count)
    for mo in scenario.mos:
        i = mo.index
        if mo.is_qos and has_demand(omega, i):
            demand = max(float(omega[i]), DEMAND_FLOOR_GBPS)
            weights[i] = rg_marginal_utility(lam[i], demand, mo.beta)
        else:
            weights[i] = rg_marginal_utility(lam[i], BE_NOMINAL_DEMAND_GBPS, 0.0)
    return weights


def compute_metric(config, R, state, omega=None, scenario=None, lam=None):
    """
    Metric matrix for one dynamic scheduler.

    lam overrides state.lam; the controller passes a provisional λ when it
    refreshes metrics between grants.
    """
    R = np.asarray(R, dtype=float)
    if np.isnan(R).any():
        raise SchedulingError("rate matrix contains NaN")
    lam = state.lam if lam is None else lam
    if np.any(lam <= 0):
        raise SchedulingError("average rates must be positive")
    n_mos, n_sites = R.shape
    kind = config.kind

    if kind == SchedulerKind.MT:
        return R.copy()
    if kind == SchedulerKind.BET:
        return np.repeat((1.0 / lam)[:, None], n_sites, axis=1)
    if kind == SchedulerKind.PF:
        return R ** config.alpha / (lam ** config.gamma)[:, None]
    if kind == SchedulerKind.RG:
        if scenario is None or omega is None:
            raise SchedulingError("RG needs the scenario and the demand vector")
        return R * rg_weights(lam, omega, scenario)[:, None]
    if kind == SchedulerKind.RR:
        metric = np.zeros((n_mos, n_sites))
        owners = (np.arange(n_sites) + state.rr_offset) % n_mos
        metric[owners, np.arange(n_sites)] = 1.0
        return metric
    raise SchedulingError(f"{kind} has no metric matrix")
