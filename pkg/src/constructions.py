"""
Large proper-progression-free sets in Z_4^n: the 16-element set A_0 in Z_4^3, products,
Moser sets and an exact search for the maximum in small dimension.

The search rests on the fibre criterion: A is free exactly when, for every h and every
a != a' in A_h, the fibre A_{h+a+a'} is empty. Fixing the support E = {h : A_h != {}},
each fibre only has to avoid the differences (h + E) \\ {0}, independently of the other
fibres, so the maximum is the best sum of independence numbers of Cayley graphs of Z_2^n
over the possible supports. Supports are taken up to translation and coordinate
permutation, which both preserve that sum.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product as cartesian
from math import comb
from typing import FrozenSet, List, Optional, Tuple

import numpy as np

from src.constants import SEARCH_N_CAP
from src.counting import free_via_fibres, has_proper_progression
from src.exceptions import CapExceededError
from src.group_core import Z4Set, fibre_decompose, format_set, join_parts
from src.utils import log2_bounds

ORIGINS = ("A0", "product", "moser", "search")

A0_ELEMENTS = (
    (0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 2),
    (0, 2, 1), (0, 2, 2), (1, 0, 0), (1, 0, 2),
    (1, 2, 0), (1, 2, 2), (2, 0, 1), (2, 0, 2),
    (2, 1, 0), (2, 1, 2), (2, 2, 0), (2, 2, 1),
)


@dataclass
class ConstructionRecord:
    set: Z4Set
    origin: str
    verified_free: bool
    size: int
    proven_maximum: bool = False
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"Unknown construction origin '{self.origin}'.")

    @classmethod
    def of(cls, A: Z4Set, origin: str, proven_maximum: bool = False, notes=None) -> "ConstructionRecord":
        return cls(A, origin, has_proper_progression(A) is None, A.size, proven_maximum, list(notes or []))

    def to_dict(self) -> dict:
        return {
            "origin": self.origin,
            "n": self.set.ambient_n,
            "size": self.size,
            "verified_free": self.verified_free,
            "proven_maximum": self.proven_maximum,
            "notes": self.notes,
            "set": format_set(self.set),
        }


def a0() -> Z4Set:
    return Z4Set.from_digits(3, A0_ELEMENTS)


def product(A: Z4Set, B: Z4Set) -> Z4Set:
    """Cartesian product in Z_4^{a+b}, coordinates of A first."""
    shift = 2 * B.ambient_n
    return Z4Set(A.ambient_n + B.ambient_n, ((x << shift) | y for x in A.members for y in B.members))


def moser_size(n: int) -> int:
    k = n // 3
    return comb(n, k) * 2 ** (n - k)


def moser(n: int) -> Z4Set:
    """Points of {0,1,2}^n with exactly floor(n/3) coordinates equal to 1."""
    if n < 1:
        raise ValueError("moser(n) needs n >= 1.")
    k = n // 3
    rows = []
    for ones in combinations(range(n), k):
        rest = [i for i in range(n) if i not in ones]
        for values in cartesian((0, 2), repeat=len(rest)):
            row = [1] * n
            for i, v in zip(rest, values):
                row[i] = v
            rows.append(row)
    return Z4Set.from_digits(n, rows)


def is_free(A: Z4Set) -> bool:
    return free_via_fibres(fibre_decompose(A))


def is_maximal_free(A: Z4Set) -> bool:
    """Free, and no single element can be added without creating a proper progression."""
    if not is_free(A):
        return False
    n = A.ambient_n
    members = set(A.members)
    for x in range(4**n):
        if x not in members and is_free(Z4Set(n, members | {x})):
            return False
    return True


def random_set(n: int, size: int, seed: int = 0) -> Z4Set:
    if not 0 <= size <= 4**n:
        raise ValueError(f"Size {size} does not fit in Z_4^{n}.")
    rng = np.random.default_rng(seed)
    return Z4Set(n, rng.choice(4**n, size=size, replace=False).tolist())


def random_free_set(n: int, seed: int = 0) -> Z4Set:
    """Greedy free set built from a seeded random order of Z_4^n."""
    rng = np.random.default_rng(seed)
    members: set = set()
    for x in rng.permutation(4**n).tolist():
        if is_free(Z4Set(n, members | {x})):
            members.add(x)
    return Z4Set(n, members)


# ---------------------------------------------------------------------------
# Exact maximum
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def max_independent(n: int, differences: FrozenSet[int]) -> Tuple[int, ...]:
    """
    Lexicographically first maximum subset of Z_2^n with no two members differing by
    an element of `differences`.
    """
    size = 2**n
    best: Tuple[int, ...] = ()
    chosen: List[int] = []

    def extend(start: int):
        nonlocal best
        if len(chosen) > len(best):
            best = tuple(chosen)
        if len(chosen) + (size - start) <= len(best):
            return
        for v in range(start, size):
            if all((v ^ u) not in differences for u in chosen):
                chosen.append(v)
                extend(v + 1)
                chosen.pop()

    extend(0)
    return best


def _permute_bits(x: int, perm: Tuple[int, ...]) -> int:
    out = 0
    for src, dst in enumerate(perm):
        if (x >> src) & 1:
            out |= 1 << dst
    return out


def canonical_support(support: Tuple[int, ...], n: int) -> Tuple[int, ...]:
    """Least sorted image of a support under translations and coordinate permutations."""
    best = None
    for perm in permutations(range(n)):
        moved = [_permute_bits(h, perm) for h in support]
        for t in moved:
            image = tuple(sorted(h ^ t for h in moved))
            if best is None or image < best:
                best = image
    return best


def _fill_support(support: Tuple[int, ...], n: int) -> Z4Set:
    members = []
    support_set = set(support)
    for h in support:
        differences = frozenset(h ^ e for e in support_set) - {0}
        members.extend(join_parts(h, a, n) for a in max_independent(n, differences))
    return Z4Set(n, members)


def max_free_search(n: int, cap: Optional[int] = None, workers: Optional[int] = None) -> ConstructionRecord:
    """
    Largest proper-progression-free set in Z_4^n, proven maximal by exhausting the
    supports up to symmetry. Among maximum sets the one with the least member tuple
    wins, so the result is deterministic.
    """
    cap = SEARCH_N_CAP if cap is None else cap
    if n < 1:
        raise ValueError("max_free_search needs n >= 1.")
    if n > cap:
        raise CapExceededError(f"Exhaustive search in Z_4^{n} exceeds the cap n <= {cap}.")
    # supports through 0 cover every translation class
    supports = set()
    rest = list(range(1, 2**n))
    for k in range(len(rest) + 1):
        for extra in combinations(rest, k):
            supports.add(canonical_support((0,) + extra, n))
    roots = sorted(supports)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        candidates = list(pool.map(lambda s: _fill_support(s, n), roots))
    best = max(candidates, key=lambda A: (A.size, tuple(-x for x in A.members)))
    notes = [f"{len(roots)} supports up to symmetry"]
    return ConstructionRecord.of(best, "search", proven_maximum=True, notes=notes)


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

def a0_record() -> ConstructionRecord:
    A = a0()
    notes = [f"moser(3) has {moser_size(3)} elements while A0 has {A.size}; the two sets differ"]
    return ConstructionRecord.of(A, "A0", notes=notes)


def moser_record(n: int) -> ConstructionRecord:
    return ConstructionRecord.of(moser(n), "moser")


def product_record(A: Z4Set, B: Z4Set) -> ConstructionRecord:
    return ConstructionRecord.of(product(A, B), "product")


def log3_over_log4_bounds(bits: int = 16) -> Tuple[Fraction, Fraction]:
    """log 3 / log 4 = log2(3) / 2, enclosed with the exact fixed-point log2 bounds."""
    lower, upper = log2_bounds(Fraction(3), bits)
    return lower / 2, upper / 2
