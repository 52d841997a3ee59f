"""
Experiment configuration files.

A config file is a list of ``key=value`` statements read with python-dotenv's
statement parser, so comments, quoting and blank lines behave as in a .env
file. Every key has a default taken from the reference experiment; an empty
file yields that experiment. Unknown keys are errors.

    mos.2.demand_high_gbps=12
    sched.kind=rg
    sim.slots=100
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import partial
from pathlib import Path

from dotenv.parser import parse_stream

from channel.layout import LayoutError, build_layout, generate_layout
from channel.propagation import Association, ChannelError, ChannelParams, PowerAllocation
from domain.services import REFERENCE_ENODEBS, REFERENCE_MOS, REFERENCE_RADIUS_KM, validate_scenario
from domain.types import MobileOperator, MOKind, ScenarioError
from schedulers.scoring import (
    DEFAULT_PF_ALPHA, DEFAULT_PF_GAMMA, DEFAULT_TAU, RefreshPolicy, SchedulerConfig, SchedulerKind,
    SchedulingError,
)
from sim.engine import DEFAULT_DEMAND_PERIOD, DEFAULT_INTERSITE_KM, SimConfig

MO_KEY = re.compile(r"^mos\.(\d+)\.(ue_count|demand_low_gbps|demand_high_gbps|beta|kind)$")


class ConfigError(ValueError):
    """Config problem, located by key and line when known."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass
class _Value:
    value: object
    line: int | None = None


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------
def _int(raw):
    return int(raw)


def _float(raw):
    return float(raw)


def _bool(raw):
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _int_list(raw):
    return tuple(int(part) for part in raw.split(",") if part.strip())


def _choice(choices):
    def parse(raw):
        return choices(raw.strip().lower())
    return parse


def _at_least(minimum):
    def check(value):
        if value < minimum:
            raise ValueError(f"must be >= {minimum}")
    return check


def _above(minimum):
    def check(value):
        if not value > minimum:
            raise ValueError(f"must be > {minimum}")
    return check


# key -> (parser, default, check)
SCALAR_KEYS = {
    "mos.count": (_int, len(REFERENCE_MOS), _at_least(1)),
    "enodebs.count": (_int, REFERENCE_ENODEBS, _at_least(1)),
    "enodebs.demand_counts": (_int_list, None, None),
    "enodebs.ue_counts": (_int_list, None, None),
    "district.radius_km": (_float, REFERENCE_RADIUS_KM, _at_least(0)),
    "district.intersite_km": (_float, DEFAULT_INTERSITE_KM, _above(0)),
    "district.strict": (_bool, False, None),
    "channel.carrier_ghz": (_float, 2.0, _above(0)),
    "channel.bandwidth_per_ue_mhz": (_float, 5.0, _above(0)),
    "channel.tx_power_dbm": (_float, 46.0, None),
    "channel.noise_psd_dbm_hz": (_float, -179.0, None),
    "channel.shadow_sigma_db": (_float, 8.0, _at_least(0)),
    "channel.power_allocation": (_choice(PowerAllocation), PowerAllocation.PER_UE, None),
    "channel.association": (_choice(Association), Association.BEST_SERVER, None),
    "sched.kind": (_choice(SchedulerKind), SchedulerKind.MMF, None),
    "sched.refresh": (_choice(RefreshPolicy), RefreshPolicy.PER_ASSIGNMENT, None),
    "sched.tau": (_float, DEFAULT_TAU, _above(1)),
    "sched.alpha": (_float, DEFAULT_PF_ALPHA, None),
    "sched.gamma": (_float, DEFAULT_PF_GAMMA, None),
    "sim.replications": (_int, 1000, _at_least(1)),
    "sim.slots": (_int, 1000, _at_least(1)),
    "sim.demand_period": (_int, DEFAULT_DEMAND_PERIOD, _at_least(1)),
    "sim.seed": (_int, 0, _at_least(0)),
    "sim.trace": (_bool, False, None),
}

MO_FIELDS = {
    "ue_count": (_int, _at_least(1)),
    "demand_low_gbps": (_float, _at_least(0)),
    "demand_high_gbps": (_float, _at_least(0)),
    "beta": (_float, _at_least(0)),
    "kind": (_choice(MOKind), None),
}


def _parse_value(key, raw, parser, check, line):
    try:
        value = parser(raw)
        if check is not None:
            check(value)
    except ValueError as exc:
        raise ConfigError(f"invalid value {raw!r} ({exc})", key=key, line=line) from None
    return value


def read_bindings(stream):
    """Raw (key, value, line) triples; malformed statements raise ConfigError."""
    bindings = []
    for binding in parse_stream(stream):
        text = binding.original.string
        # The parser folds preceding blank lines into the statement.
        line = binding.original.line + text[: len(text) - len(text.lstrip())].count("\n")
        if binding.error:
            raise ConfigError(f"malformed line {binding.original.string.strip()!r}", line=line)
        if binding.key is None:
            continue
        if binding.value is None:
            raise ConfigError("expected key=value", key=binding.key, line=line)
        bindings.append((binding.key.strip(), binding.value.strip(), line))
    return bindings


def _located(scalars, keys):
    """(key, line) of the first of keys set in the file, else (keys[0], None)."""
    for key in keys:
        if scalars[key].line is not None:
            return key, scalars[key].line
    return keys[0], None


def _default_mo_fields(index):
    if index < len(REFERENCE_MOS):
        mo = REFERENCE_MOS[index]
        fields = {"ue_count": _Value(mo.ue_count), "beta": _Value(mo.beta), "kind": _Value(mo.kind)}
        if mo.demand_range is not None:
            fields["demand_low_gbps"] = _Value(mo.demand_range[0])
            fields["demand_high_gbps"] = _Value(mo.demand_range[1])
        return fields
    return {"beta": _Value(0.0)}


def _build_mo(index, fields):
    label = f"mos.{index + 1}"
    if "ue_count" not in fields:
        raise ConfigError("ue_count is required for an operator beyond the defaults", key=f"{label}.ue_count")

    has_demand = "demand_low_gbps" in fields or "demand_high_gbps" in fields
    kind = fields["kind"].value if "kind" in fields else (MOKind.QOS_AWARE if has_demand else MOKind.BEST_EFFORT)
    demand_range = None
    if kind == MOKind.QOS_AWARE:
        for part in ("demand_low_gbps", "demand_high_gbps"):
            if part not in fields:
                raise ConfigError("QoS-aware operator needs a demand range", key=f"{label}.{part}")
        low, high = fields["demand_low_gbps"], fields["demand_high_gbps"]
        if not low.value < high.value:
            key, line = (f"{label}.demand_high_gbps", high.line) if high.line else (f"{label}.demand_low_gbps", low.line)
            raise ConfigError(f"demand range ({low.value}, {high.value}) needs low < high", key=key, line=line)
        demand_range = (float(low.value), float(high.value))

    return MobileOperator(
        index=index,
        kind=MOKind(kind),
        ue_count=int(fields["ue_count"].value),
        beta=float(fields["beta"].value),
        demand_range=demand_range,
    )


def config_from_bindings(bindings):
    """Turn parsed bindings into a SimConfig, layering them over the defaults."""
    scalars = {key: _Value(default) for key, (_, default, _) in SCALAR_KEYS.items()}
    mo_overrides = {}

    for key, raw, line in bindings:
        if key in SCALAR_KEYS:
            parser, _, check = SCALAR_KEYS[key]
            scalars[key] = _Value(_parse_value(key, raw, parser, check, line), line)
            continue
        match = MO_KEY.match(key)
        if match is None:
            raise ConfigError("unknown key", key=key, line=line)
        number, field_name = int(match.group(1)), match.group(2)
        if number < 1:
            raise ConfigError("MO numbers start at 1", key=key, line=line)
        parser, check = MO_FIELDS[field_name]
        mo_overrides.setdefault(number - 1, {})[field_name] = _Value(
            _parse_value(key, raw, parser, check, line), line
        )

    mo_count = scalars["mos.count"].value
    for index in mo_overrides:
        if index >= mo_count:
            if scalars["mos.count"].line is not None:
                raise ConfigError(
                    f"mos.{index + 1} is beyond mos.count={mo_count}",
                    key="mos.count", line=scalars["mos.count"].line,
                )
            mo_count = index + 1

    mos = []
    for index in range(mo_count):
        fields = _default_mo_fields(index)
        fields.update(mo_overrides.get(index, {}))
        mos.append(_build_mo(index, fields))

    def value(key):
        return scalars[key].value

    def stage(keys, build):
        """Run one construction step; its errors are blamed on the first of keys set in the file."""
        try:
            return build()
        except (ScenarioError, ChannelError, SchedulingError, LayoutError) as exc:
            key, line = _located(scalars, keys)
            raise ConfigError(str(exc), key=key, line=line) from None

    scenario = stage(
        ("enodebs.count", "district.radius_km", "mos.count"),
        lambda: validate_scenario(mos, value("enodebs.count"), value("district.radius_km")),
    )
    channel = stage(
        tuple(key for key in SCALAR_KEYS if key.startswith("channel.")),
        lambda: ChannelParams(
            carrier_ghz=value("channel.carrier_ghz"),
            bandwidth_per_ue_hz=value("channel.bandwidth_per_ue_mhz") * 1e6,
            tx_power_dbm=value("channel.tx_power_dbm"),
            noise_psd_dbm_hz=value("channel.noise_psd_dbm_hz"),
            shadow_sigma_db=value("channel.shadow_sigma_db"),
            power_allocation=value("channel.power_allocation"),
            association=value("channel.association"),
        ),
    )
    scheduler = stage(
        ("sched.tau", "sched.alpha", "sched.gamma", "sched.kind"),
        lambda: SchedulerConfig(
            kind=value("sched.kind"),
            refresh=value("sched.refresh"),
            tau=value("sched.tau"),
            alpha=value("sched.alpha"),
            gamma=value("sched.gamma"),
        ),
    )
    config = stage(
        ("sim.replications", "sim.slots", "sim.demand_period"),
        lambda: SimConfig(
            scenario=scenario,
            scheduler=scheduler,
            channel=channel,
            intersite_km=value("district.intersite_km"),
            strict_layout=value("district.strict"),
            demand_counts=value("enodebs.demand_counts"),
            ue_counts=value("enodebs.ue_counts"),
            n_replications=value("sim.replications"),
            n_slots=value("sim.slots"),
            demand_period=value("sim.demand_period"),
            master_seed=value("sim.seed"),
            keep_trace=value("sim.trace"),
        ),
    )

    stage(
        ("enodebs.count", "district.intersite_km", "district.radius_km", "district.strict"),
        lambda: generate_layout(
            scenario.n_enodebs, scenario.radius_km, config.intersite_km, strict=config.strict_layout,
        ),
    )
    for counts_key, argument in (("enodebs.demand_counts", "demand_counts"), ("enodebs.ue_counts", "ue_counts")):
        counts = value(counts_key)
        if counts is not None:
            stage((counts_key,), partial(
                build_layout, scenario, config.intersite_km, strict=config.strict_layout, **{argument: counts},
            ))
    return config


def parse_config(path):
    """Read a config file; FileNotFoundError propagates for a missing path."""
    with Path(path).open(encoding="utf-8") as stream:
        return config_from_bindings(read_bindings(stream))


def default_config():
    return config_from_bindings([])
