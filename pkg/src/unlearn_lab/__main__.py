##############################################################################
#
# Name: __main__.py
#
# Function:
#       Entry point for the unlearn-lab CLI (python -m unlearn_lab)
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import sys
from collections.abc import Sequence


def main(argv: Sequence[str] | None = None) -> int:
    """Build the App for ``argv`` (default: sys.argv[1:]) and run it."""
    from unlearn_lab.app import EXIT_INTERRUPTED, App

    try:
        return App(argv).run()
    except KeyboardInterrupt:
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
