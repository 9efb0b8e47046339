import os

ENV_VAR = "EXCLUSION_BOUNDS_THREADS"


def thread_count() -> int:
    """Worker threads for sweeps and verification; ``EXCLUSION_BOUNDS_THREADS`` caps it."""
    raw = os.environ.get(ENV_VAR)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1
