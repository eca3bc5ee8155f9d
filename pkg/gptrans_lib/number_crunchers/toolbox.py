import os
import sys
import datetime
from typing import Any, Optional, TextIO

# Where tprint writes. None means "whatever sys.stdout is at call time".
LOG_STREAM: Optional[TextIO] = None


def tprint(*args: Any, **kwargs: Any) -> None:
    """
    Prints the provided arguments with a prefixed UTC timestamp.

    Output goes to `LOG_STREAM`, resolved at call time, unless an explicit
    `file=` keyword is given.

    Parameters:
        *args: Values to print.
        **kwargs: Keyword arguments for the built-in print function.

    Example:
        >>> tprint("Catalog built.")
        [10-17-2026 12:34:56 UTC] Catalog built.
    """
    timestamp = datetime.datetime.now(tz=datetime.timezone.utc).strftime("[%m-%d-%Y %H:%M:%S UTC]")
    kwargs.setdefault("file", LOG_STREAM if LOG_STREAM is not None else sys.stdout)
    print(timestamp, *args, **kwargs)


def cpu_pct_to_cores(pct: float) -> int:
    """
    Converts a fraction of the machine's CPUs into a core count (at least 1).

    Raises:
      ValueError: If pct is outside [0, 1].

    Example:
      >>> cpu_pct_to_cores(0.0)
      1
    """
    if pct < 0.0 or pct > 1.0:
        raise ValueError("Percentage must be a value between 0.0 and 1.0 for determining core count")

    return int(max(pct * (os.cpu_count() or 1), 1))


def relative_error(observed: float, expected: float, floor: float = 1e-300) -> float:
    """
    |observed - expected| / max(|expected|, floor).

    The absolute error when expected is exactly zero.
    """
    diff = abs(observed - expected)
    if expected == 0.0:
        return diff
    return diff / max(abs(expected), floor)
