"""
District geometry: hexagonal eNodeB layout and static MO labelings.

Coordinates are km, centred on the district; the lattice has one axis
along +x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT3_2 = math.sqrt(3.0) / 2.0


class LayoutError(ValueError):
    """Bad layout request or static labeling input."""


@dataclass(frozen=True, eq=False)
class DistrictLayout:
    radius_km: float
    sites: np.ndarray
    static_labels_demand: tuple[int, ...] | None = None
    static_labels_ue: tuple[int, ...] | None = None

    @property
    def n_sites(self):
        return len(self.sites)

    def with_labels(self, demand_labels, ue_labels):
        return DistrictLayout(
            radius_km=self.radius_km,
            sites=self.sites,
            static_labels_demand=tuple(int(v) for v in demand_labels),
            static_labels_ue=tuple(int(v) for v in ue_labels),
        )


def _polar_angle(x, y):
    return math.atan2(y, x) % (2.0 * math.pi)


def generate_layout(n_sites, radius_km, intersite_km, strict=False):
    """
    Return the n_sites hexagonal-lattice points nearest the district centre.

    Lattice point (i, j) sits at intersite_km * (i + j/2, j*sqrt(3)/2), so its
    squared distance is intersite_km**2 * (i*i + i*j + j*j); sorting on that
    integer norm makes equal-distance ties exact. Ties fall to polar angle in
    [0, 2*pi), then to generation order.
    """
    if n_sites < 1:
        raise LayoutError(f"n_sites must be >= 1, got {n_sites}")

    # Ring r of the lattice holds 6r points at hex distance r; every point
    # of Euclidean rank <= n_sites lies within twice the covering ring.
    rings = 0
    while 1 + 3 * rings * (rings + 1) < n_sites:
        rings += 1
    span = 2 * rings + 1

    candidates = []
    order = 0
    for i in range(-span, span + 1):
        for j in range(-span, span + 1):
            x = intersite_km * (i + j / 2.0)
            y = intersite_km * j * SQRT3_2
            candidates.append((i * i + i * j + j * j, _polar_angle(x, y), order, x, y))
            order += 1
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))

    sites = np.array([(c[3], c[4]) for c in candidates[:n_sites]], dtype=float)
    if strict:
        far = np.hypot(sites[:, 0], sites[:, 1]).max()
        if far > radius_km + 1e-9:
            raise LayoutError(
                f"{n_sites} sites at {intersite_km} km spacing reach {far:.2f} km, "
                f"beyond the {radius_km} km district"
            )
    return DistrictLayout(radius_km=float(radius_km), sites=sites)


def spatial_order(layout):
    """Site indices sorted by (distance from centre, polar angle, index)."""
    keys = [
        (round(math.hypot(x, y), 9), round(_polar_angle(x, y), 9), k)
        for k, (x, y) in enumerate(layout.sites)
    ]
    return [k for _, _, k in sorted(keys)]


def label_static(layout, counts):
    """
    Spread per-MO site counts over the layout by smooth weighted round-robin.

    Walking the sites from the centre outwards, each step credits every MO
    with its count and hands the site to the largest credit (lowest index on
    ties), which is then debited the total. Each MO ends with exactly its
    count and its sites interleave with the others.
    """
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise LayoutError(f"Static counts must be non-negative: {counts}")
    total = sum(counts)
    if total != layout.n_sites:
        raise LayoutError(f"Static counts {counts} sum to {total}, layout has {layout.n_sites} sites")

    labels = [0] * layout.n_sites
    credit = [0] * len(counts)
    for site in spatial_order(layout):
        for mo, weight in enumerate(counts):
            credit[mo] += weight
        winner = max(range(len(counts)), key=lambda mo: (credit[mo], -mo))
        credit[winner] -= total
        labels[site] = winner
    return tuple(labels)


def apportion(total, weights):
    """Largest-remainder split of total by weights; ties go to the lower index."""
    weights = [float(w) for w in weights]
    if total < 0:
        raise LayoutError("Cannot apportion a negative total")
    mass = sum(weights)
    if mass <= 0:
        weights = [1.0] * len(weights)
        mass = float(len(weights))
    quotas = [total * w / mass for w in weights]
    counts = [int(math.floor(q)) for q in quotas]
    short = total - sum(counts)
    by_remainder = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in by_remainder[:short]:
        counts[i] += 1
    return tuple(counts)


def ue_based_counts(scenario, n_sites):
    return apportion(n_sites, scenario.ue_counts)


def demand_based_counts(scenario, n_sites):
    """One site per best-effort MO, the rest in proportion to mean demand."""
    counts = [0] * scenario.mo_count
    qos = scenario.qos_indices
    if not qos:
        return apportion(n_sites, [1] * scenario.mo_count)

    remaining = n_sites
    for i in scenario.be_indices:
        if remaining > len(qos):
            counts[i] = 1
            remaining -= 1
    share = apportion(remaining, [scenario.mos[i].mean_demand for i in qos])
    for i, c in zip(qos, share):
        counts[i] = c
    return tuple(counts)


def build_layout(scenario, intersite_km, demand_counts=None, ue_counts=None, strict=False):
    """Layout for a scenario with both static labelings attached."""
    layout = generate_layout(scenario.n_enodebs, scenario.radius_km, intersite_km, strict=strict)
    demand_counts = demand_counts or demand_based_counts(scenario, layout.n_sites)
    ue_counts = ue_counts or ue_based_counts(scenario, layout.n_sites)
    for name, counts in (("demand", demand_counts), ("ue", ue_counts)):
        if len(counts) != scenario.mo_count:
            raise LayoutError(
                f"{name}-based counts {tuple(counts)} do not match {scenario.mo_count} MOs"
            )
    return layout.with_labels(label_static(layout, demand_counts), label_static(layout, ue_counts))
