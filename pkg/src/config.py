"""
HJF — Configuration

Field table for the nine class-number-one imaginary quadratic fields and the
runtime knobs of the toolkit. Everything tunable is read from the environment
(a local .env file is honoured), so scripted runs can change caps and
tolerances without touching code.
"""
import os

from dotenv import load_dotenv

load_dotenv()

# ── Runtime settings ────────────────────────────────────────────────
NUM_THREADS = int(os.environ.get("HJF_NUM_THREADS", "1"))
CHARACTER_CAP = int(os.environ.get("HJF_CHARACTER_CAP", "200"))
LCM_CAP = int(os.environ.get("HJF_LCM_CAP", str(10**6)))
SLOPE_TOLERANCE = float(os.environ.get("HJF_SLOPE_TOLERANCE", "0.10"))
SHELL_BOUND = int(os.environ.get("HJF_SHELL_BOUND", "200"))
MOMENT_DRIFT = float(os.environ.get("HJF_MOMENT_DRIFT", "0.05"))

# ── Square-free sieve constants ─────────────────────────────────────
SIEVE_PRIMES_BELOW = 87
SIEVE_TRUNCATION = 10**6

# ── Exit codes ──────────────────────────────────────────────────────
EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_NOT_FOUND = 3

# ── Field table ─────────────────────────────────────────────────────
# ramified: generator of the prime above p_K in (a, b) coordinates of a + b*w,
# with w = sqrt(D)/2 for even D and w = (1 + sqrt(D))/2 for odd D.
FIELD_DB = {
    -3: {"p_K": 3, "w": 6, "euclidean": True, "label": "Q(sqrt(-3))", "ramified": (-1, 2)},
    -4: {"p_K": 2, "w": 4, "euclidean": True, "label": "Q(i)", "ramified": (1, 1)},
    -7: {"p_K": 7, "w": 2, "euclidean": True, "label": "Q(sqrt(-7))", "ramified": (-1, 2)},
    -8: {"p_K": 2, "w": 2, "euclidean": True, "label": "Q(sqrt(-2))", "ramified": (0, 1)},
    -11: {"p_K": 11, "w": 2, "euclidean": True, "label": "Q(sqrt(-11))", "ramified": (-1, 2)},
    -19: {"p_K": 19, "w": 2, "euclidean": False, "label": "Q(sqrt(-19))", "ramified": (-1, 2)},
    -43: {"p_K": 43, "w": 2, "euclidean": False, "label": "Q(sqrt(-43))", "ramified": (-1, 2)},
    -67: {"p_K": 67, "w": 2, "euclidean": False, "label": "Q(sqrt(-67))", "ramified": (-1, 2)},
    -163: {"p_K": 163, "w": 2, "euclidean": False, "label": "Q(sqrt(-163))", "ramified": (-1, 2)},
}


def supported_discriminants() -> list[int]:
    """The nine discriminants, largest first (-3, -4, ..., -163)."""
    return sorted(FIELD_DB, reverse=True)


def get_field_row(D: int) -> dict:
    """Look up a field row; unknown D raises PreconditionError."""
    if D not in FIELD_DB:
        from src.errors import PreconditionError
        raise PreconditionError(
            f"unsupported discriminant {D}; expected one of {supported_discriminants()}"
        )
    return FIELD_DB[D]
