"""
ncdir.src.main

Entry point for the ncdir command line.

Exit codes: 0 success, 2 invalid input, 3 series non-convergence,
130 interrupted, 1 anything else.
"""

import logging
import sys
from typing import Optional, Sequence

from pandera.errors import SchemaError

from config.settings import RunSettings
from src.cli import run
from src.errors import DomainError, NonConvergent


EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INVALID = 2
EXIT_NONCONVERGENT = 3
EXIT_INTERRUPTED = 130

logger = logging.getLogger(__name__)


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s | %(levelname)-8s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and map its outcome to an exit code."""
    try:
        run(argv)
        return EXIT_OK
    except DomainError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID
    except SchemaError as e:
        logger.error(f"Output failed validation: {e}")
        return EXIT_INVALID
    except NonConvergent as e:
        logger.error(f"Series did not converge: {e}")
        for key, value in e.diagnostics.items():
            logger.error(f"  {key}: {value}")
        return EXIT_NONCONVERGENT
    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.exception(f"Run failed: {e}")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    configure_logging(RunSettings.from_env().LOG_LEVEL)
    sys.exit(main())
