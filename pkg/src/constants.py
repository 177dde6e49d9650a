# constants.py
# Limits and fixed numbers shared by the counting kernels, the engine, the CLI and the tests.
# The exhaustive routines (subgroup enumeration, naive progression counts, the maximum
# free-set search) blow up combinatorially, so each one is guarded by a cap kept here.
# A cap can be lifted from the environment without touching the code, e.g.
#   Z4ROTH_SUBGROUP_M_CAP=6 python app.py regularize ...
import os
from fractions import Fraction


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer, got '{raw}'")


# Exhaustive caps
SUBGROUP_M_CAP = _env_int("Z4ROTH_SUBGROUP_M_CAP", 5)  # 374 subspaces of F_2^5
NAIVE_COUNT_N_CAP = _env_int("Z4ROTH_NAIVE_N_CAP", 8)  # naive count walks |A| * 4^n pairs
SEARCH_N_CAP = _env_int("Z4ROTH_SEARCH_N_CAP", 3)  # max free-set search in Z_4^n
ENUMERATION_N_CAP = 3  # brute-force (x, y, z) enumerations
QUADRUPLE_RECOUNT_M_CAP = 5  # certificates are recounted directly up to |H| = 2^5

# Fixed-point surrogates for logarithms and square roots
FIXED_POINT_BITS = 8
LN2_LOWER = Fraction(693147180559945309, 10**18)
LN2_UPPER = Fraction(693147180559945310, 10**18)

# numpy int64 is used for transforms while every intermediate stays below this bound,
# object arrays of Python ints otherwise
INT64_SAFE_BOUND = 2**62

# File formats
Z4_HEADER = "z4"
Z2_HEADER = "z2"
FAMILY_HEADER = "family"
TRACE_SCHEMA_VERSION = 1

# CLI exit codes
EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_FALSIFIED = 2  # reserved for a proof step whose guaranteed inequality failed
