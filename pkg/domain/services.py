"""Scenario construction and validation."""
from .types import MobileOperator, MOKind, Scenario, ScenarioError

# District and MO set of the reference experiment.
REFERENCE_ENODEBS = 31
REFERENCE_RADIUS_KM = 35.0
REFERENCE_MOS = (
    MobileOperator(0, MOKind.QOS_AWARE, ue_count=300, beta=10.0, demand_range=(0.0, 8.0)),
    MobileOperator(1, MOKind.QOS_AWARE, ue_count=500, beta=9.5, demand_range=(0.0, 12.0)),
    MobileOperator(2, MOKind.BEST_EFFORT, ue_count=200, beta=0.0),
)


def validate_scenario(mos, n_enodebs, radius_km):
    """Check an MO set against the district and freeze it into a Scenario."""
    mos = tuple(mos)
    if not mos:
        raise ScenarioError("At least one mobile operator is required.")
    if n_enodebs < 1:
        raise ScenarioError(f"At least one eNodeB is required, got {n_enodebs}.")
    if radius_km < 0:
        raise ScenarioError(f"District radius must be non-negative, got {radius_km}.")

    for position, mo in enumerate(mos):
        if mo.index != position:
            raise ScenarioError(f"{mo.label}: index {mo.index} does not match position {position}.")
        if mo.ue_count <= 0:
            raise ScenarioError(f"{mo.label}: ue_count must be positive, got {mo.ue_count}.")
        if mo.beta < 0:
            raise ScenarioError(f"{mo.label}: beta must be non-negative, got {mo.beta}.")
        if mo.is_qos and mo.demand_range is None:
            raise ScenarioError(f"{mo.label}: QoS-aware operator needs a demand range.")
        if mo.demand_range is not None:
            low, high = mo.demand_range
            if low < 0:
                raise ScenarioError(f"{mo.label}: demand low must be >= 0, got {low}.")
            if not low < high:
                raise ScenarioError(f"{mo.label}: demand range ({low}, {high}) needs low < high.")

    return Scenario(mos=mos, n_enodebs=int(n_enodebs), radius_km=float(radius_km))


def reference_scenario():
    return validate_scenario(REFERENCE_MOS, REFERENCE_ENODEBS, REFERENCE_RADIUS_KM)
