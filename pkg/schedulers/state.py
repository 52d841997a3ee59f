"""Interval-to-interval scheduler memory: the λ smoothing filter and the RR cursor."""
import numpy as np

from domain.types import delta_matrix


def update_avg_rate(state, R, phi):
    """λ_i ← (1 - 1/τ)·λ_i + Σ_k δ_{i,k}·R_{i,k} / τ for the interval just served."""
    delta = delta_matrix(phi, state.mo_count)
    received = (delta * np.asarray(R, dtype=float)).sum(axis=1)
    lam = (1.0 - 1.0 / state.tau) * state.lam + received / state.tau
    return state.evolve(lam=lam, delta=delta)


def advance_rr(state):
    return state.evolve(rr_offset=(state.rr_offset + 1) % state.mo_count)
