"""
Experiment services shared by the management commands: scheduler sweeps,
CSV emission and optional figure rendering.
"""
from __future__ import annotations

import logging
import math
from pathlib import Path

from django.conf import settings

from domain.services import REFERENCE_MOS, validate_scenario
from domain.types import MobileOperator, MOKind, ScenarioError
from schedulers.scoring import DEMAND_FLOOR_GBPS, SchedulerKind
from sim.engine import run_monte_carlo
from . import csvio

logger = logging.getLogger("slicesched.experiments")

ALL_SCHEDULERS = "all"
SUMMARY_FILE = "summary.csv"
SLOTS_FILE = "slots.csv"
CATEGORY_COLORS = {
    "channel-blind": "tab:gray",
    "channel-aware": "tab:blue",
    "qos-aware": "tab:green",
    "static": "tab:orange",
}


def scheduler_choices():
    return [ALL_SCHEDULERS] + [kind.value for kind in SchedulerKind.ordered()]


def resolve_schedulers(name):
    """'all' expands to every scheduler in report order."""
    if name == ALL_SCHEDULERS:
        return SchedulerKind.ordered()
    return [SchedulerKind(name)]


def worker_count():
    return max(1, int(settings.SLICE_SCHED_THREADS))


def prepare_out_dir(path):
    """Create the output directory; OSError propagates to the caller."""
    out_dir = Path(path)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def run_schedulers(config, kinds, keep_records=False, max_workers=None):
    """One Monte-Carlo result per scheduler, all on the same seeds."""
    workers = worker_count() if max_workers is None else max_workers
    return [
        run_monte_carlo(config.with_scheduler(kind), max_workers=workers, keep_records=keep_records)
        for kind in kinds
    ]


def assignment_scenario(omega, n_enodebs, betas=None):
    """
    A scenario wrapping a bare demand vector for one-shot assignment: an MO
    with a demand is QoS-aware, "BE" entries are best-effort. Betas default
    to the reference operators' values and 0 beyond them.
    """
    if betas is not None and len(betas) != len(omega):
        raise ScenarioError(f"--betas has {len(betas)} entries for {len(omega)} MOs")
    mos = []
    for i, demand in enumerate(omega):
        if betas is not None:
            beta = betas[i]
        else:
            beta = REFERENCE_MOS[i].beta if i < len(REFERENCE_MOS) else 0.0
        if math.isnan(demand):
            mos.append(MobileOperator(i, MOKind.BEST_EFFORT, ue_count=1, beta=0.0))
            continue
        if demand < 0:
            raise ScenarioError(f"MO-{i + 1}: demand must be non-negative, got {demand}")
        mos.append(MobileOperator(
            i, MOKind.QOS_AWARE, ue_count=1, beta=beta,
            demand_range=(0.0, max(float(demand), DEMAND_FLOOR_GBPS)),
        ))
    return validate_scenario(mos, n_enodebs, radius_km=0.0)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------
def simulate(config, kinds, out_dir, dump_slots=False, max_workers=None):
    """Run the sweep and write summary.csv (and slots.csv). Returns (results, paths)."""
    out_dir = prepare_out_dir(out_dir)
    results = run_schedulers(config, kinds, keep_records=dump_slots, max_workers=max_workers)
    paths = [out_dir / SUMMARY_FILE]
    csvio.write_summary(paths[0], results)
    if dump_slots:
        paths.append(out_dir / SLOTS_FILE)
        csvio.write_slot_dump(paths[1], results)
    return results, paths


# ---------------------------------------------------------------------------
# figure
# ---------------------------------------------------------------------------
def figure(preset, config, out_dir, plot=False, max_workers=None):
    """
    Run a preset and write <preset>.csv; with plot=True and plotting
    enabled, also <preset>.png. Returns (results, paths).
    """
    out_dir = prepare_out_dir(out_dir)
    csv_path = out_dir / f"{preset.name}.csv"
    results = run_schedulers(
        config, preset.schedulers, keep_records=preset.is_timeseries, max_workers=max_workers,
    )
    if preset.is_timeseries:
        records = results[0].replications[0].records
        csvio.write_timeseries(csv_path, records)
    else:
        csvio.write_figure_bars(csv_path, [(r.scheduler, *preset.bar(r.summary)) for r in results])

    paths = [csv_path]
    if plot:
        png_path = render_plot(preset, csv_path, out_dir / f"{preset.name}.png")
        if png_path is not None:
            paths.append(png_path)
    return results, paths


def render_plot(preset, csv_path, png_path):
    """Draw the preset's CSV with matplotlib; None when plotting is unavailable."""
    if not settings.PLOTTING_ENABLED:
        logger.warning("Plotting disabled; %s written without a figure", csv_path)
        return None
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib is not installed; %s written without a figure", csv_path)
        return None

    fig, ax = plt.subplots(figsize=(8, 4.5))
    if preset.is_timeseries:
        rows = csvio.read_timeseries(csv_path)
        for mo in sorted({r["mo"] for r in rows}):
            series = [r for r in rows if r["mo"] == mo]
            slots = [r["slot"] for r in series]
            line, = ax.plot(slots, [r["rate_gbps"] for r in series], label=f"MO-{mo} rate")
            demands = [r["demand_gbps"] for r in series]
            if any(not math.isnan(d) for d in demands):
                ax.step(slots, demands, where="post", linestyle="--", color=line.get_color(),
                        label=f"MO-{mo} demand")
        ax.set_xlabel("Allocation interval")
        ax.set_ylabel("Data rate (Gbps)")
        ax.legend(loc="upper right", fontsize="small")
    else:
        bars = [(name, mean, std) for name, mean, std in csvio.read_figure_bars(csv_path) if mean is not None]
        names = [b[0] for b in bars]
        colors = [CATEGORY_COLORS[SchedulerKind(name).category] for name in names]
        ax.bar(names, [b[1] for b in bars], yerr=[b[2] for b in bars], capsize=4, color=colors)
        ax.set_ylabel(preset.metric.label)
    ax.set_title(preset.title)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path
