"""Main application entry point."""

import sys
from typing import Optional, Sequence

from src.presentation.cli import run


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point."""
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
