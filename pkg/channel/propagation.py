"""
Macro-cell channel: UE placement, path loss with log-normal shadowing,
Shannon capacity and the per-slot rate matrix R.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from django.db import models

# UEs closer than this to a site are evaluated at this distance.
MIN_DISTANCE_KM = 0.001

BPS_PER_GBPS = 1e9


class ChannelError(ValueError):
    """Invalid channel input."""


class PowerAllocation(models.TextChoices):
    PER_SITE = "per-site", "Site budget split over served UEs"
    PER_UE = "per-ue", "Full budget per UE"


class Association(models.TextChoices):
    NEAREST = "nearest", "Nearest site, fixed at placement"
    BEST_SERVER = "best-server", "Lowest shadowed path loss, per slot"


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    carrier_ghz: float = 2.0
    bandwidth_per_ue_hz: float = 5e6
    tx_power_dbm: float = 46.0
    noise_psd_dbm_hz: float = -179.0
    shadow_sigma_db: float = 8.0
    power_allocation: PowerAllocation = PowerAllocation.PER_UE
    association: Association = Association.BEST_SERVER

    def __post_init__(self):
        if not self.bandwidth_per_ue_hz > 0:
            raise ChannelError(f"bandwidth must be > 0, got {self.bandwidth_per_ue_hz}")
        if self.shadow_sigma_db < 0:
            raise ChannelError(f"shadow sigma must be >= 0, got {self.shadow_sigma_db}")

    @property
    def tx_power_w(self):
        return float(dbm_to_watts(self.tx_power_dbm))

    @property
    def noise_psd_w_hz(self):
        return float(dbm_to_watts(self.noise_psd_dbm_hz))


@dataclass(frozen=True, eq=False)
class UePlacement:
    """
    UE positions and serving sites, one array pair per MO.

    The flat views (mo_of_ue, all_positions, all_association) list the UEs of
    MO 0 first, then MO 1, and so on.
    """
    positions: tuple[np.ndarray, ...]
    association: tuple[np.ndarray, ...]

    @property
    def mo_of_ue(self):
        return np.concatenate(
            [np.full(len(p), i, dtype=np.int64) for i, p in enumerate(self.positions)]
        )

    @property
    def all_positions(self):
        return np.concatenate(self.positions).reshape(-1, 2)

    @property
    def all_association(self):
        return np.concatenate(self.association).astype(np.int64)

    @property
    def n_ues(self):
        return sum(len(p) for p in self.positions)


def path_loss_db(d_km, shadow_db=0.0):
    """128 + 37.6*log10(d) + ψ, d in km."""
    d_km = np.asarray(d_km, dtype=float)
    if np.any(d_km <= 0):
        raise ChannelError("distance must be positive")
    loss = 128.0 + 37.6 * np.log10(d_km) + shadow_db
    return float(loss) if np.ndim(loss) == 0 else loss


def draw_shadowing(rng, sigma_db, size=None):
    """Zero-mean Gaussian shadowing in dB (log-normal in linear scale)."""
    if sigma_db < 0:
        raise ChannelError(f"shadow sigma must be >= 0, got {sigma_db}")
    if sigma_db == 0:
        return 0.0 if size is None else np.zeros(size)
    sample = rng.normal(0.0, sigma_db, size=size)
    return float(sample) if size is None else sample


def gain_from_loss_db(loss_db):
    return 10.0 ** (-np.asarray(loss_db, dtype=float) / 10.0)


def shannon_rate(bandwidth_hz, tx_power_w, gain_linear, noise_psd_w_hz):
    """B * log2(1 + P*g / (N0*B)) in bps."""
    if np.any(np.asarray(bandwidth_hz) <= 0):
        raise ChannelError("bandwidth must be positive")
    if np.any(np.asarray(noise_psd_w_hz) <= 0):
        raise ChannelError("noise PSD must be positive")
    snr = np.asarray(tx_power_w, dtype=float) * np.asarray(gain_linear, dtype=float) / (
        noise_psd_w_hz * bandwidth_hz
    )
    rate = bandwidth_hz * np.log1p(snr) / math.log(2.0)
    return float(rate) if np.ndim(rate) == 0 else rate


def _distances(points, sites):
    diff = points[:, None, :] - sites[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def place_ues(scenario, layout, rng):
    """
    Drop every MO's UEs uniformly over the district disk and attach each to
    the site with the highest mean gain, i.e. the nearest one. The attachment
    is what NEAREST association serves from.
    """
    radius = layout.radius_km
    positions, association = [], []
    for mo in scenario.mos:
        r = radius * np.sqrt(rng.random(mo.ue_count))
        theta = rng.uniform(0.0, 2.0 * math.pi, mo.ue_count)
        points = np.column_stack((r * np.cos(theta), r * np.sin(theta)))
        positions.append(points)
        association.append(np.argmin(_distances(points, layout.sites), axis=1))
    return UePlacement(positions=tuple(positions), association=tuple(association))


def draw_slot_shadowing(rng, placement, layout, params):
    """Fresh ψ for every UE-site pair, shape (n_ues, n_sites)."""
    return draw_shadowing(rng, params.shadow_sigma_db, size=(placement.n_ues, layout.n_sites))


def build_rate_matrix(layout, placement, shadowing, params, mo_count=None):
    """
    R(i,k) in Gbps: sum of Shannon rates of MO i's UEs served by site k.

    shadowing is the (n_ues, n_sites) ψ realization of the slot. Under
    NEAREST only the placement's serving-site column of each UE enters R;
    under BEST_SERVER each UE is served this slot by the site with the lowest
    path loss including ψ (lowest index on ties).
    """
    mo_count = mo_count if mo_count is not None else len(placement.positions)
    if len(placement.positions) != mo_count:
        raise ChannelError(
            f"placement holds {len(placement.positions)} MOs, expected {mo_count}"
        )
    n_sites = layout.n_sites
    n_ues = placement.n_ues
    shadowing = np.broadcast_to(np.asarray(shadowing, dtype=float), (n_ues, n_sites))
    if n_ues == 0:
        return np.zeros((mo_count, n_sites))

    points = placement.all_positions
    if params.association == Association.BEST_SERVER:
        d_km = np.maximum(_distances(points, layout.sites), MIN_DISTANCE_KM)
        all_loss_db = path_loss_db(d_km, shadowing)
        serving = np.argmin(all_loss_db, axis=1)
        loss_db = all_loss_db[np.arange(n_ues), serving]
    else:
        serving = placement.all_association
        if serving.max() >= n_sites:
            raise ChannelError(f"association refers to site {serving.max()}, layout has {n_sites}")
        d_km = np.maximum(np.hypot(*(points - layout.sites[serving]).T), MIN_DISTANCE_KM)
        loss_db = path_loss_db(d_km, shadowing[np.arange(n_ues), serving])

    if params.power_allocation == PowerAllocation.PER_UE:
        power_w = np.full(n_ues, params.tx_power_w)
    else:
        served = np.bincount(serving, minlength=n_sites)
        power_w = params.tx_power_w / served[serving]

    rates_bps = shannon_rate(
        params.bandwidth_per_ue_hz, power_w, gain_from_loss_db(loss_db), params.noise_psd_w_hz
    )
    cell = placement.mo_of_ue * n_sites + serving
    R = np.bincount(cell, weights=np.atleast_1d(rates_bps), minlength=mo_count * n_sites)
    return R.reshape(mo_count, n_sites) / BPS_PER_GBPS
