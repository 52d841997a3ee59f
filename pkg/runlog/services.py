"""Run ledger helper. Call from commands after their CSVs are written."""
import logging

from django.conf import settings
from django.db import DatabaseError

from .models import RunEntry

logger = logging.getLogger("slicesched.runlog")


def summary_detail(results):
    """One line per scheduler: label and headline means."""
    lines = []
    for result in results:
        s = result.summary
        satisfied = "n/a" if s.satisfied_mean is None else f"{s.satisfied_mean:.4f}"
        lines.append(
            f"{result.scheduler}: fairness={s.fairness_mean:.4f} "
            f"rate={s.rate_gbps_mean:.4f} satisfied={satisfied}"
        )
    return "\n".join(lines)


def log_run(command, schedulers, seed, runs, slots, out_dir, detail=""):
    """
    Create a ledger entry. Returns the entry, or None when the ledger is
    disabled or the database refuses the write; a ledger problem never
    fails the run that produced the results.
    """
    if not settings.RUN_LEDGER_ENABLED:
        return None
    try:
        return RunEntry.objects.create(
            command=command,
            schedulers=",".join(str(s) for s in schedulers),
            seed=seed,
            runs=runs,
            slots=slots,
            out_dir=str(out_dir),
            detail=str(detail),
        )
    except DatabaseError as exc:
        logger.warning("Run ledger write failed (%s); run %s not recorded", exc, command)
        return None


def recent_runs(limit=20, command=None):
    entries = RunEntry.objects.all()
    if command:
        entries = entries.filter(command=command)
    return list(entries[:limit])
