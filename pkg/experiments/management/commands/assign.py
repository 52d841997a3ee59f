"""
Management command for one scheduler invocation on a given R and Ω.

Usage:
    python manage.py assign \\
        --rates rates.csv \\
        --demands demands.csv \\
        --scheduler mmf \\
        --out assignment.csv

rates.csv has the header ``mo_id,1,2,...,K`` and one row of Gbps rates per
MO; demands.csv has ``mo_id,demand_gbps`` with "BE" for best-effort MOs.
λ starts from its initial value, so BET/PF/RG see a fresh scheduler.
"""
import numpy as np
from django.core.management.base import BaseCommand

from domain.types import SchedulerState
from experiments.csvio import read_demands, read_rate_matrix, write_assignment
from experiments.services import assignment_scenario
from schedulers.controller import VirtualizationController
from schedulers.scoring import (
    DEFAULT_PF_ALPHA, DEFAULT_PF_GAMMA, DEFAULT_TAU, RefreshPolicy, SchedulerConfig, SchedulerKind,
)
from ._common import VALIDATION_ERRORS, invalid, io_failure


def _betas(raw):
    return [float(part) for part in raw.split(",") if part.strip()]


class Command(BaseCommand):
    help = "Assign eNodeBs to MOs once from a rate matrix and a demand vector."

    def add_arguments(self, parser):
        parser.add_argument("--rates", required=True, help="Rate matrix CSV (Gbps)")
        parser.add_argument("--demands", required=True, help="Demand CSV (Gbps or BE)")
        parser.add_argument(
            "--scheduler", required=True, choices=[k.value for k in SchedulerKind.ordered()],
            help="Scheduler (static baselines need a district and are not accepted)",
        )
        parser.add_argument("--out", required=True, help="Assignment CSV to write")
        parser.add_argument(
            "--refresh", choices=[p.value for p in RefreshPolicy], default=RefreshPolicy.PER_ASSIGNMENT.value,
        )
        parser.add_argument("--tau", type=float, default=DEFAULT_TAU)
        parser.add_argument("--alpha", type=float, default=DEFAULT_PF_ALPHA)
        parser.add_argument("--gamma", type=float, default=DEFAULT_PF_GAMMA)
        parser.add_argument("--betas", type=_betas, help="Comma-separated RG beta per MO")
        parser.add_argument("--rr-offset", type=int, default=0, help="Round-robin cursor")

    def handle(self, *args, **options):
        kind = SchedulerKind(options["scheduler"])
        if kind not in SchedulerKind.dynamic():
            raise invalid(f"{kind.value} labels come from a district layout; use simulate instead")

        try:
            R = read_rate_matrix(options["rates"])
            omega = read_demands(options["demands"])
        except OSError as exc:
            raise io_failure(f"Cannot read {exc.filename}: {exc.strerror or exc}")
        except ValueError as exc:
            raise invalid(str(exc))

        if R.shape[0] != omega.shape[0]:
            raise invalid(
                f"Dimension mismatch: rates are {R.shape[0]}x{R.shape[1]} (MOs x eNodeBs) "
                f"but demands have {omega.shape[0]} entries"
            )

        try:
            scenario = assignment_scenario(omega, R.shape[1], options.get("betas"))
            config = SchedulerConfig(
                kind=kind,
                refresh=RefreshPolicy(options["refresh"]),
                tau=options["tau"],
                alpha=options["alpha"],
                gamma=options["gamma"],
            )
            state = SchedulerState.initial(scenario.mo_count, config.tau).evolve(rr_offset=options["rr_offset"])
            phi = VirtualizationController(config, scenario).assign(R, omega, state)
        except VALIDATION_ERRORS as exc:
            raise invalid(str(exc))

        try:
            write_assignment(options["out"], phi)
        except OSError as exc:
            raise io_failure(f"Cannot write {options['out']}: {exc.strerror or exc}")

        owners = ", ".join("none" if int(v) < 0 else str(int(v) + 1) for v in np.asarray(phi))
        self.stdout.write(self.style.SUCCESS(f"Φ = ({owners}) written to {options['out']}"))
