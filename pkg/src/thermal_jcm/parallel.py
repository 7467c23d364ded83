"""Thread-count policy shared by the parallel sweeps."""
import os


def thread_count(default: int = 4) -> int:
    """Worker cap from THERMAL_JCM_THREADS, else min(default, cpu count)."""
    env = os.environ.get("THERMAL_JCM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(default, os.cpu_count() or 1))
