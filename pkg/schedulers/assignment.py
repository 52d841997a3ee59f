"""
eNodeB-to-MO assignment rules: the argmax loop over metric columns, the
max-min fair procedure and the two static baselines.
"""
from __future__ import annotations

import numpy as np

from domain.types import UNASSIGNED, has_demand
from .scoring import RefreshPolicy, SchedulerKind, SchedulingError


def assign_argmax(metric, refresh=RefreshPolicy.PER_INTERVAL, rates=None, state=None, recompute=None):
    """
    Φ(e) = argmax_v m(v, e) for every eNodeB column e, lowest MO index on ties.

    Under PER_ASSIGNMENT with a recompute callable, the metric is rebuilt
    after every grant from the provisional (1 - 1/τ)·λ + granted/τ, where
    granted accumulates R(Φ(e), e) over the columns already handed out. Once
    every column is granted this equals the λ update_avg_rate produces.
    """
    metric = np.asarray(metric, dtype=float)
    if metric.ndim != 2 or metric.size == 0:
        raise SchedulingError("metric matrix is empty")
    if not np.isfinite(metric).all():
        raise SchedulingError("metric matrix has non-finite entries")

    if refresh == RefreshPolicy.PER_INTERVAL or recompute is None:
        return np.argmax(metric, axis=0).astype(np.int64)

    if rates is None or state is None:
        raise SchedulingError("per-assignment refresh needs the rate matrix and the scheduler state")
    n_mos, n_sites = metric.shape
    phi = np.empty(n_sites, dtype=np.int64)
    granted = np.zeros(n_mos)
    decayed = (1.0 - 1.0 / state.tau) * state.lam
    current = metric
    for e in range(n_sites):
        winner = int(np.argmax(current[:, e]))
        phi[e] = winner
        granted[winner] += rates[winner, e]
        if e + 1 < n_sites:
            current = np.asarray(recompute(decayed + granted / state.tau), dtype=float)
            if not np.isfinite(current[:, e + 1:]).all():
                raise SchedulingError("refreshed metric has non-finite entries")
    return phi


def _best_site(R, i, free):
    """Free site with the highest R(i, .), lowest index on ties."""
    return max(free, key=lambda k: (R[i, k], -k))


def assign_mmf(R, omega, qos_set, be_set):
    """
    Max-min fair assignment of whole eNodeBs.

    QoS MOs are served in ascending demand order (ties by index), each
    greedily taking its best free site until its demand is met. When the
    pool runs dry with MOs still unsatisfied, the satisfied ones keep their
    sites and the unsatisfied ones hand theirs back; those sites are then
    dealt round-robin over the unsatisfied MOs, each taking its best
    remaining site per pass and dropping out once satisfied. Sites left once
    every QoS MO is satisfied go round-robin to the best-effort MOs; with no
    best-effort MO they stay UNASSIGNED.
    """
    R = np.asarray(R, dtype=float)
    n_sites = R.shape[1]
    qos = sorted(qos_set, key=lambda i: (float(omega[i]), i))
    be = sorted(be_set)
    if set(qos) & set(be):
        raise SchedulingError("an MO cannot be both QoS-aware and best-effort")

    phi = np.full(n_sites, UNASSIGNED, dtype=np.int64)
    rate = np.zeros(R.shape[0])
    free = list(range(n_sites))

    def grant(i, k):
        phi[k] = i
        rate[i] += R[i, k]
        free.remove(k)

    for i in qos:
        while rate[i] < omega[i] and free:
            grant(i, _best_site(R, i, free))

    hungry = [i for i in qos if rate[i] < omega[i]]
    if hungry:
        released = np.isin(phi, hungry)
        phi[released] = UNASSIGNED
        rate[hungry] = 0.0
        free = sorted(free + np.flatnonzero(released).tolist())
        while free and hungry:
            for i in list(hungry):
                if not free:
                    break
                grant(i, _best_site(R, i, free))
                if rate[i] >= omega[i]:
                    hungry.remove(i)

    while free and be:
        for i in be:
            if not free:
                break
            grant(i, _best_site(R, i, free))
    return phi


def assign_static(kind, layout):
    """The layout's precomputed labels for the requested baseline."""
    if kind == SchedulerKind.STATIC_DEMAND:
        labels = layout.static_labels_demand
    elif kind == SchedulerKind.STATIC_UE:
        labels = layout.static_labels_ue
    else:
        raise SchedulingError(f"{kind} is not a static baseline")
    if labels is None:
        raise SchedulingError(f"layout carries no labels for {kind}")
    return np.array(labels, dtype=np.int64)


def qos_split(scenario, omega):
    """(qos_set, be_set) for the MMF call; a QoS MO without a drawn demand counts as BE."""
    qos = [i for i in scenario.qos_indices if has_demand(omega, i)]
    be = [i for i in range(scenario.mo_count) if i not in qos]
    return qos, be
