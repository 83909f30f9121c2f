import time

import numpy as np
import psutil

from plugins.config import Config

# Live Monte Carlo progress, keyed by run label. Written by the harness as
# chunks finish, read by the CLI progress printer.
MC_PROGRESS: dict[str, dict] = {}


def worker_count() -> int:
    """Return the worker-pool size: REDUCESIM_THREADS if set, else available parallelism."""
    if Config.THREADS > 0:
        return Config.THREADS
    return psutil.cpu_count(logical=True) or 1


def make_rng(seed: int) -> np.random.Generator:
    """The pinned generator: Philox-4x64 keyed through SeedSequence, platform independent."""
    return np.random.Generator(np.random.Philox(seed))


def fmt(x: float) -> str:
    """Fixed 12-significant-digit formatting used by every artifact."""
    return f"{float(x) + 0.0:.{Config.SIG_DIGITS}g}"


def time_formatter(seconds: float) -> str:
    minutes, sec = divmod(int(seconds), 60)
    hours, minutes = divmod(minutes, 60)
    if hours:
        return f"{hours}h {minutes}m {sec}s"
    elif minutes:
        return f"{minutes}m {sec}s"
    return f"{sec}s"


def progress_bar(current: int, total: int, length: int = 12) -> str:
    filled = int(length * current / total) if total else 0
    bar = "█" * filled + "░" * (length - filled)
    percent = current / total * 100 if total else 0
    return f"[{bar}] {percent:.1f}%"


def update_progress(label: str, done: int, total: int, started: float) -> None:
    MC_PROGRESS[label] = {
        "done": done,
        "total": total,
        "elapsed": time_formatter(time.time() - started),
        "bar": progress_bar(done, total),
        "_last_update": time.time(),
    }
