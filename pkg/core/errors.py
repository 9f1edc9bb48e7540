"Harness-level failures."

from __future__ import annotations

EXIT_USAGE = 64


class UsageError(Exception):
    """Bad command line or configuration, detected before any computation."""

    exit_code = EXIT_USAGE
