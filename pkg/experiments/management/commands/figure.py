"""
Management command to produce the data behind one evaluation figure.

Usage:
    python manage.py figure fig4 --runs 200 --slots 1000 --seed 0 --out-dir results/ --plot
    python manage.py figure fig6 --exclude rr,bet

Presets:
    fig4  fairness index per scheduler (mean, std)
    fig5  total data rate per scheduler (mean, std)
    fig6  satisfied-MO ratio per scheduler (mean, std)
    fig7  per-MO rate and demand over time, one MMF replication
"""
from django.core.management.base import BaseCommand

from experiments.presets import PRESETS, get_preset
from experiments.services import figure
from runlog.models import RunEntry
from runlog.services import log_run, summary_detail
from ._common import (
    VALIDATION_ERRORS, add_run_arguments, apply_overrides, invalid, io_failure, load_config, out_dir_option,
)


def _names(raw):
    return [part.strip() for part in raw.split(",") if part.strip()]


class Command(BaseCommand):
    help = "Run a figure preset (fig4-fig7) and write its CSV, optionally with a PNG."

    def add_arguments(self, parser):
        parser.add_argument("preset", choices=sorted(PRESETS), help="Figure preset")
        parser.add_argument("--config", help="Key/value experiment config file")
        add_run_arguments(parser)
        parser.add_argument("--plot", action="store_true", help="Also render <preset>.png")
        parser.add_argument(
            "--exclude", type=_names, default=[], help="Comma-separated schedulers to leave out, e.g. rr,bet",
        )

    def handle(self, *args, **options):
        try:
            preset = get_preset(options["preset"]).without(options["exclude"])
        except ValueError as exc:
            raise invalid(str(exc))
        runs, slots = preset.scale(options.get("runs"), options.get("slots"))
        config = apply_overrides(
            load_config(options.get("config")), runs=runs, slots=slots, seed=options.get("seed"),
        )
        out_dir = out_dir_option(options)

        self.stdout.write(
            f"Figure {preset.name} ({preset.title}): "
            f"{config.n_replications} runs x {config.n_slots} slots, seed {config.master_seed}..."
        )
        try:
            results, paths = figure(preset, config, out_dir, plot=options["plot"])
        except VALIDATION_ERRORS as exc:
            raise invalid(str(exc))
        except OSError as exc:
            raise io_failure(f"Cannot write results to {out_dir}: {exc.strerror or exc}")

        log_run(
            RunEntry.Command.FIGURE, [k.value for k in preset.schedulers], config.master_seed,
            config.n_replications, config.n_slots, out_dir, f"{preset.name}\n{summary_detail(results)}",
        )
        for path in paths:
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
