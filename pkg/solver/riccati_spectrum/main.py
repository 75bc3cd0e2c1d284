# solver/riccati_spectrum/main.py

import logging
import sys
from typing import List, Optional

import click

from .cli.routes import app
from .core.logging_config import setup_logging

# Setup logging ASAP
setup_logging()
logger = logging.getLogger(__name__)


def run(argv: Optional[List[str]] = None) -> int:
    """
    Runs the CLI and returns its exit code.

    Usage and parse errors exit 1; solver errors carry their own code.
    """
    try:
        result = app(args=argv, prog_name="riccati-spectrum", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        logger.warning("Aborted.")
        return 1
    except Exception as e:
        logger.critical(f"Unhandled exception: {e}", exc_info=True)
        return 4
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
