from __future__ import annotations

import os

ENV_VAR = "NONLOCAL_VRP_THREADS"


def max_workers(requested: int | None = None) -> int:
    """Worker count: ``requested`` (or the CPU count), capped by NONLOCAL_VRP_THREADS."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(ENV_VAR)
    if cap:
        try:
            n = min(n, int(cap))
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {cap!r}") from None
    return max(1, n)
