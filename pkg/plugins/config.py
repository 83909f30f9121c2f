import os
import logging

from dotenv import load_dotenv

load_dotenv()

logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler()],
    level=os.environ.get("REDUCESIM_LOG_LEVEL", "INFO").upper(),
)


class Config:
    # ── Worker pool ───────────────────────────────────
    THREADS: int = int(os.environ.get("REDUCESIM_THREADS", 0))   # 0 → available parallelism
    CHUNK_SIZE: int = int(os.environ.get("REDUCESIM_CHUNK_SIZE", 2000))  # seeds per worker task

    # ── Schedule defaults for built-in scenarios ──────
    DT: float = float(os.environ.get("REDUCESIM_DT", 1e-3))
    T_MAX: float = float(os.environ.get("REDUCESIM_T_MAX", 5.0))

    # ── Reduction ─────────────────────────────────────
    TRIGGER_LAW: str = os.environ.get("REDUCESIM_TRIGGER_LAW", "current").lower()
    RNG_NAME: str = "numpy.random.Philox (4x64, SeedSequence-seeded)"

    # ── Artifacts ─────────────────────────────────────
    HIST_BINS: int = int(os.environ.get("REDUCESIM_HIST_BINS", 100))
    STRIDE: int = int(os.environ.get("REDUCESIM_STRIDE", 10))
    SIG_DIGITS: int = 12

    # ── Tolerances ────────────────────────────────────
    WEIGHT_TIE_TOL: float = 1e-9        # max-weight consciousness rule
    NEGATIVE_WEIGHT_TOL: float = 1e-12  # below this a step has failed
    NORMALIZATION_TOL: float = 1e-9     # scenario weights must sum to 1 within this

    # ── Misc ──────────────────────────────────────────
    LOGGER = logging.getLogger("reducesim")
