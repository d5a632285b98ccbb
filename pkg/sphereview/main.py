# sphereview/main.py
import logging
from typing import Optional

import click

from sphereview import __version__
from sphereview.cli.commands import evaluate, savt, stats, transform, viewport
from sphereview.core.config import LOG_LEVEL_NAMES, settings
from sphereview.core.logging_config import setup_logging

logger = logging.getLogger(__name__)


@click.group(name="sphereview", context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVEL_NAMES, case_sensitive=False),
    default=None,
    help="Overrides SPHEREVIEW_LOG_LEVEL.",
)
@click.version_option(version=__version__, prog_name="sphereview")
def cli(log_level: Optional[str]):
    """Spherical view transforms, panoramic saliency statistics and evaluation."""
    # Setup logging first
    setup_logging(log_level)
    logger.debug(f"{settings.PROJECT_NAME} starting (jobs default {settings.JOBS}).")


# --- Register subcommands ---
cli.add_command(transform.transform)
cli.add_command(viewport.viewport)
cli.add_command(stats.stats)
cli.add_command(evaluate.evaluate)
cli.add_command(savt.savt)
