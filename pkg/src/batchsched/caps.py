"""Size caps for dense oracles and exhaustive enumeration.

Explicit arguments take precedence, then the BATCHSCHED_ORACLE_CAP
environment variable, then the defaults below.
"""

from __future__ import annotations

import os

from .errors import InvalidArgument

DENSE_CAP_DEFAULT = 400
ENUMERATION_CAP_DEFAULT = 2_000_000
CAP_ENV_VAR = "BATCHSCHED_ORACLE_CAP"


def _env_cap() -> int | None:
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgument(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from None


def dense_cap(explicit: int | None = None) -> int:
    """Largest stacked dimension n*K allowed for dense-matrix computations."""
    if explicit is not None:
        return explicit
    env = _env_cap()
    return env if env is not None else DENSE_CAP_DEFAULT


def enumeration_cap(explicit: int | None = None) -> int:
    """Largest number of feasible schedules allowed for exhaustive search."""
    if explicit is not None:
        return explicit
    env = _env_cap()
    return env if env is not None else ENUMERATION_CAP_DEFAULT
