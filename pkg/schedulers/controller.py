"""
The virtualization controller: one scheduler invocation per allocation
interval, plus the state bookkeeping between intervals.
"""
from functools import partial

from .assignment import assign_argmax, assign_mmf, assign_static, qos_split
from .scoring import RefreshPolicy, SchedulerKind, SchedulingError, compute_metric
from .state import advance_rr, update_avg_rate


class VirtualizationController:
    """Turns (R, Ω, state) into Φ for the configured scheduler."""

    def __init__(self, config, scenario, layout=None):
        self.config = config
        self.scenario = scenario
        self.layout = layout
        if config.kind.is_static and layout is None:
            raise SchedulingError(f"{config.kind} needs a district layout")

    def assign(self, R, omega, state):
        kind = self.config.kind
        if kind.qos_aware and omega is None:
            raise SchedulingError(f"{kind} needs the demand vector")
        if kind.is_static:
            return assign_static(kind, self.layout)
        if kind == SchedulerKind.MMF:
            qos, be = qos_split(self.scenario, omega)
            return assign_mmf(R, omega, qos, be)

        metric_for = partial(compute_metric, self.config, R, state, omega, self.scenario)
        refresh = self.config.refresh if kind.uses_average_rate else RefreshPolicy.PER_INTERVAL
        return assign_argmax(
            metric_for(),
            refresh=refresh,
            rates=R,
            state=state,
            recompute=lambda lam: metric_for(lam=lam),
        )

    def advance(self, state, R, phi):
        """Close the interval: fold the served rates into λ and rotate RR."""
        state = update_avg_rate(state, R, phi)
        if self.config.kind == SchedulerKind.RR:
            state = advance_rr(state)
        return state
