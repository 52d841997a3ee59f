"""
Management command to run the Monte-Carlo simulation.

Usage:
    python manage.py simulate \\
        --config experiment.conf \\
        --scheduler all \\
        --runs 200 \\
        --slots 1000 \\
        --seed 7 \\
        --out-dir results/ \\
        --dump-slots

This will:
1. Read the config (reference defaults when --config is omitted)
2. Run every requested scheduler on the same replication seeds
3. Write summary.csv, plus slots.csv with --dump-slots
4. Record the run in the run ledger
"""
from django.core.management.base import BaseCommand

from experiments.services import resolve_schedulers, scheduler_choices, simulate
from runlog.models import RunEntry
from runlog.services import log_run, summary_detail
from ._common import (
    VALIDATION_ERRORS, add_run_arguments, apply_overrides, invalid, io_failure, load_config, out_dir_option,
)


class Command(BaseCommand):
    help = "Run the Monte-Carlo eNodeB assignment simulation and write summary CSVs."

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Key/value experiment config file")
        parser.add_argument(
            "--scheduler", choices=scheduler_choices(),
            help="Scheduler to run, or 'all' (default: the config's sched.kind)",
        )
        add_run_arguments(parser)
        parser.add_argument("--dump-slots", action="store_true", help="Also write the per-slot CSV")

    def handle(self, *args, **options):
        config = apply_overrides(
            load_config(options.get("config")),
            runs=options.get("runs"), slots=options.get("slots"), seed=options.get("seed"),
        )
        kinds = resolve_schedulers(options.get("scheduler") or config.scheduler.kind.value)
        out_dir = out_dir_option(options)

        self.stdout.write(
            f"Simulating {', '.join(k.value for k in kinds)}: "
            f"{config.n_replications} runs x {config.n_slots} slots, seed {config.master_seed}..."
        )
        try:
            results, paths = simulate(config, kinds, out_dir, dump_slots=options["dump_slots"])
        except VALIDATION_ERRORS as exc:
            raise invalid(str(exc))
        except OSError as exc:
            raise io_failure(f"Cannot write results to {out_dir}: {exc.strerror or exc}")

        log_run(
            RunEntry.Command.SIMULATE, [k.value for k in kinds], config.master_seed,
            config.n_replications, config.n_slots, out_dir, summary_detail(results),
        )
        for path in paths:
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
