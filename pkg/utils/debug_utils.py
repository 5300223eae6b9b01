"""
Debug logging helpers

Output goes to stderr so that stdout stays machine readable.
"""

import os
import sys


def is_debug_mode() -> bool:
    return os.getenv("DEBUG_MODE", "false").lower() == "true"


def debug_log(message: str):
    """Function to output debug logs"""
    if is_debug_mode():
        print(f"[DEBUG] {message}", file=sys.stderr)


def progress(message: str):
    """Print a user-facing progress line"""
    print(message, file=sys.stderr)
