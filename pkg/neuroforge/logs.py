"""Provides the logging setup for the application."""

##############################################################################
# Python imports.
import logging
from os     import environ
from typing import Final

##############################################################################
# Rich imports.
from rich.console import Console
from rich.logging import RichHandler

##############################################################################
# Local imports.
from .errors import ConfigError

##############################################################################
LOG_ENV: Final = "NEUROFORGE_LOG"
"""The name of the environment variable that controls the log level."""

LEVELS: Final = {
    "error": logging.ERROR,
    "info":  logging.INFO,
    "debug": logging.DEBUG
}
"""Map of the permitted log level names to logging levels."""

##############################################################################
def log_level( value: str | None = None ) -> int:
    """Work out the log level to use.

    Args:
        value: The level name; if `None` it is taken from the environment.

    Returns:
        The logging level.

    Raises:
        ConfigError: If the level name isn't one we know about.
    """
    name = ( environ.get( LOG_ENV, "info" ) if value is None else value ).strip().lower()
    try:
        return LEVELS[ name ]
    except KeyError:
        raise ConfigError(
            f"{LOG_ENV} must be one of {', '.join( LEVELS )}, not {name!r}"
        ) from None

def setup_logging( level: str | None = None ) -> None:
    """Configure logging for the application.

    Args:
        level: The level name to use; defaults to the environment setting.
    """
    root = logging.getLogger( "neuroforge" )
    root.handlers.clear()
    root.addHandler( RichHandler(
        console=Console( stderr=True ), show_path=False, rich_tracebacks=True
    ) )
    root.setLevel( log_level( level ) )
    root.propagate = False

### logs.py ends here
