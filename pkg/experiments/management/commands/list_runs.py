"""
Management command to show recent run ledger entries.

Usage:
    python manage.py list_runs --limit 10 --command figure
"""
from django.core.management.base import BaseCommand
from django.db import DatabaseError

from runlog.models import RunEntry
from runlog.services import recent_runs
from ._common import io_failure


class Command(BaseCommand):
    help = "List the most recent simulate/figure runs recorded in the run ledger."

    def add_arguments(self, parser):
        parser.add_argument("--limit", type=int, default=20, help="Entries to show")
        parser.add_argument("--command", choices=RunEntry.Command.values, help="Only this command")
        parser.add_argument("--detail", action="store_true", help="Include the per-scheduler summary")

    def handle(self, *args, **options):
        try:
            entries = recent_runs(limit=options["limit"], command=options.get("command"))
        except DatabaseError as exc:
            raise io_failure(f"Run ledger unavailable ({exc}); run 'python manage.py migrate' first")

        if not entries:
            self.stdout.write("No runs recorded.")
            return
        for entry in entries:
            self.stdout.write(
                f"{entry.timestamp:%Y-%m-%d %H:%M:%S} {entry.command:<8} "
                f"seed={entry.seed} runs={entry.runs} slots={entry.slots} "
                f"[{entry.schedulers}] -> {entry.out_dir}"
            )
            if options["detail"] and entry.detail:
                for line in entry.detail.splitlines():
                    self.stdout.write(f"    {line}")
