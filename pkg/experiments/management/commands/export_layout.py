"""
Management command to write the district layout and static labels.

Usage:
    python manage.py export_layout --config experiment.conf --out layout.csv

Columns: site_id, x_km, y_km, label_demand, label_ue (all ids 1-based).
"""
from pathlib import Path

from django.core.management.base import BaseCommand

from experiments.csvio import write_layout
from ._common import VALIDATION_ERRORS, invalid, io_failure, load_config, out_dir_option


class Command(BaseCommand):
    help = "Write the eNodeB layout with its demand- and UE-based static labels as CSV."

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Key/value experiment config file")
        parser.add_argument("--out", help="Layout CSV (default: <results dir>/layout.csv)")

    def handle(self, *args, **options):
        config = load_config(options.get("config"))
        out = Path(options.get("out") or Path(out_dir_option(options)) / "layout.csv")
        try:
            layout = config.layout()
        except VALIDATION_ERRORS as exc:
            raise invalid(str(exc))

        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            write_layout(out, layout)
        except OSError as exc:
            raise io_failure(f"Cannot write {out}: {exc.strerror or exc}")

        self.stdout.write(self.style.SUCCESS(
            f"{layout.n_sites} sites within {layout.radius_km:g} km written to {out}"
        ))
