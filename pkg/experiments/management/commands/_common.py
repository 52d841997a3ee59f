"""Config loading and error translation shared by the experiment commands."""
from dataclasses import replace

from django.conf import settings
from django.core.management.base import CommandError

from channel.layout import LayoutError
from channel.propagation import ChannelError
from domain.types import ScenarioError
from experiments.config import ConfigError, default_config, parse_config
from experiments.csvio import CsvFormatError
from metrics.evaluation import MetricError
from schedulers.scoring import SchedulingError

# Exit codes.
EXIT_INVALID = 1
EXIT_IO = 2

VALIDATION_ERRORS = (
    ConfigError, CsvFormatError, ScenarioError, ChannelError, LayoutError, SchedulingError, MetricError,
)


def invalid(message):
    return CommandError(message, returncode=EXIT_INVALID)


def io_failure(message):
    return CommandError(message, returncode=EXIT_IO)


def load_config(path):
    """The file's SimConfig, or the reference defaults without --config."""
    if not path:
        return default_config()
    try:
        return parse_config(path)
    except ConfigError as exc:
        raise invalid(f"Config error in {path}: {exc}")
    except OSError as exc:
        raise io_failure(f"Cannot read config {path}: {exc.strerror or exc}")


def apply_overrides(config, runs=None, slots=None, seed=None):
    """Command-line scale and seed overrides on top of the file's values."""
    changes = {}
    if runs is not None:
        changes["n_replications"] = runs
    if slots is not None:
        changes["n_slots"] = slots
    if seed is not None:
        if seed < 0:
            raise invalid(f"--seed must be non-negative, got {seed}")
        changes["master_seed"] = seed
    try:
        return replace(config, **changes) if changes else config
    except ScenarioError as exc:
        raise invalid(str(exc))


def add_run_arguments(parser):
    parser.add_argument("--runs", type=int, help="Monte-Carlo replications")
    parser.add_argument("--slots", type=int, help="Allocation intervals per replication")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument(
        "--out-dir", default=None, help=f"Output directory (default: {settings.RESULTS_DIR})",
    )


def out_dir_option(options):
    return options.get("out_dir") or settings.RESULTS_DIR
