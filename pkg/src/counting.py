"""
Progression and energy counts. Every count has two independent computation paths and
the paths are compared before a result is returned.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from src.constants import ENUMERATION_N_CAP, NAIVE_COUNT_N_CAP
from src.exceptions import CapExceededError, InternalConsistencyError
from src.group_core import Family, Z2Set, Z4Set, add4, fibre_decompose, low_mask, neg4, two
from src.harmonic import (
    RealFn2,
    _exact,
    dft4,
    fwht,
    indicator_transform,
    sup_nontrivial,
    wht,
)
from src.utils import fraction_to_json

METHODS = ("naive", "fourier", "fibre")


@dataclass(frozen=True)
class LambdaReport:
    lambda_value: Fraction
    raw_count: int
    normalizer: int  # |G|^2 for sets in Z_4^n, |H|^4 for families on H
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"Unknown counting method '{self.method}'.")
        if self.lambda_value * self.normalizer != self.raw_count:
            raise InternalConsistencyError(
                f"Lambda {self.lambda_value} does not match raw count {self.raw_count}/{self.normalizer}."
            )

    @classmethod
    def from_raw(cls, raw_count: int, normalizer: int, method: str) -> "LambdaReport":
        return cls(Fraction(raw_count, normalizer), int(raw_count), int(normalizer), method)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "lambda": fraction_to_json(self.lambda_value),
            "raw_count": self.raw_count,
            "normalizer": self.normalizer,
        }


def lambda_naive(A: Z4Set, cap: Optional[int] = None) -> LambdaReport:
    """Count pairs (x, d) with x, x+d, x+2d in A, walking x over A only."""
    cap = NAIVE_COUNT_N_CAP if cap is None else cap
    n = A.ambient_n
    if n > cap:
        raise CapExceededError(f"Naive counting in Z_4^{n} exceeds the cap n <= {cap}.")
    mask = A.mask
    ds = np.arange(4**n, dtype=np.int64)
    ds2 = two(ds, n)
    raw = 0
    for x in A.members:
        raw += int(np.count_nonzero(mask[add4(x, ds, n)] & mask[add4(x, ds2, n)]))
    return LambdaReport.from_raw(raw, 16**n, "naive")


def lambda_fourier(A: Z4Set) -> LambdaReport:
    """Lambda(A) = sum_r \\hat1_A(r)^2 \\hat1_A(2r), in exact Gaussian integers."""
    n = A.ambient_n
    s = dft4(A)
    idx2 = s.doubled_index()
    total_re, total_im = 0, 0
    for r in range(4**n):
        a, b = int(s.re[r]), int(s.im[r])
        c, d = int(s.re[idx2[r]]), int(s.im[idx2[r]])
        sq_re, sq_im = a * a - b * b, 2 * a * b
        total_re += sq_re * c - sq_im * d
        total_im += sq_re * d + sq_im * c
    if total_im != 0:
        raise InternalConsistencyError(f"Fourier count has imaginary part {total_im}.")
    # Lambda = total / 4^{3n} and raw = 16^n Lambda
    raw, rem = divmod(total_re, 4**n)
    if rem:
        raise InternalConsistencyError("Fourier count is not an integer multiple of 4^n.")
    return LambdaReport.from_raw(raw, 16**n, "fourier")


def family_raw_count_quadruple(F: Family) -> int:
    """#{(a, a', y, h): a, a' in A_h, y in A_{a+a'+h}} = |H|^4 Lambda(F)."""
    sizes = F.sizes
    raw = 0
    for h, fibre in enumerate(F.fibres):
        if not fibre:
            continue
        a = fibre.as_array()
        raw += int(sizes[a[:, None] ^ a[None, :] ^ h].sum())
    return raw


def family_raw_count_wht(F: Family) -> int:
    """
    |H|^4 Lambda(F) through sum_h <tau_h(1_{A_h} * 1_{A_h}), f> written in transforms:
    2^{-m} sum_g W_f(g) sum_h W_h(g)^2 (-1)^{g.h}, with W the unnormalized transforms.
    """
    m = F.ambient_m
    W = fwht(F.fibre_matrix, axis=1)
    peak = max((abs(int(v)) for v in W.flat), default=0)
    squared = _exact(W, peak + 1) * W
    inner = np.diagonal(fwht(squared, axis=0))
    Wf = fwht(F.sizes)
    total = sum(int(a) * int(b) for a, b in zip(Wf, inner))
    raw, rem = divmod(total, 2**m)
    if rem:
        raise InternalConsistencyError("Transform count is not an integer multiple of 2^m.")
    return raw


def lambda_family(F: Family) -> LambdaReport:
    quadruple = family_raw_count_quadruple(F)
    spectral = family_raw_count_wht(F)
    if quadruple != spectral:
        raise InternalConsistencyError(
            f"Family count mismatch: quadruple path {quadruple}, transform path {spectral}."
        )
    return LambdaReport.from_raw(quadruple, F.group_order**4, "fibre")


def lambda_report(A: Z4Set, method: str) -> LambdaReport:
    if method == "naive":
        return lambda_naive(A)
    if method == "fourier":
        return lambda_fourier(A)
    if method == "fibre":
        return lambda_family(fibre_decompose(A))
    raise ValueError(f"Unknown counting method '{method}'; choose from {', '.join(METHODS)}.")


def trivial_count(n: int) -> int:
    """#{(x, d) : 2d = 0} = 4^n 2^n = |G|^{3/2}."""
    if n < 0:
        raise ValueError("n must be non-negative.")
    return 8**n


def trivial_count_enumerated(n: int) -> int:
    if n > ENUMERATION_N_CAP:
        raise CapExceededError(f"Enumeration in Z_4^{n} exceeds the cap n <= {ENUMERATION_N_CAP}.")
    x = np.arange(4**n, dtype=np.int64)[:, None]
    d = np.arange(4**n, dtype=np.int64)[None, :]
    # x, x+d, x+2d is not proper exactly when it closes up: x + 2d = x
    closes = add4(x, two(d, n), n) == x
    return int(np.count_nonzero(closes))


def trivial_triple_count(n: int) -> int:
    """Triples (x, y, z) with x + z = 2y and x = z, x = y or y = z, by enumeration."""
    if n > ENUMERATION_N_CAP:
        raise CapExceededError(f"Enumeration in Z_4^{n} exceeds the cap n <= {ENUMERATION_N_CAP}.")
    size = 4**n
    x = np.arange(size, dtype=np.int64)[:, None]
    y = np.arange(size, dtype=np.int64)[None, :]
    # z is forced by x and y
    z = add4(two(y, n), neg4(x, n), n)
    degenerate = (x == z) | (x == y) | (y == z)
    return int(np.count_nonzero(degenerate))


def trivial_progression_count(A: Z4Set) -> int:
    """#{(x, d) : 2d = 0, x in A, x + d in A} = sum_h |A_h|^2."""
    sizes = fibre_decompose(A).sizes
    return int((sizes.astype(object) ** 2).sum()) if len(sizes) else 0


def ker2_pair_count(A: Z4Set) -> int:
    """#{(a, b) in A^2 : a - b in ker 2}, by direct comparison of parities."""
    xs = A.as_array()
    lo = low_mask(A.ambient_n)
    return int(np.count_nonzero((xs[:, None] & lo) == (xs[None, :] & lo)))


def has_proper_progression(A: Z4Set) -> Optional[Tuple[int, int]]:
    """First (x, d) in lexicographic order with 2d != 0 and x, x+d, x+2d in A."""
    n = A.ambient_n
    mask = A.mask
    ds = np.arange(4**n, dtype=np.int64)
    ds2 = two(ds, n)
    proper = ds2 != 0
    for x in A.members:
        hits = proper & mask[add4(x, ds, n)] & mask[add4(x, ds2, n)]
        found = np.flatnonzero(hits)
        if len(found):
            return x, int(found[0])
    return None


def free_via_fibres(F: Family) -> bool:
    """
    A set is proper-progression free iff no fibre A_h holds a != a' with A_{h+a+a'}
    nonempty: x, z in the same coset with halves a, a' are the ends of a proper
    progression whose middle can be any element of the coset h + a + a'.
    """
    nonempty = F.sizes > 0
    for h, fibre in enumerate(F.fibres):
        if fibre.size < 2:
            continue
        a = fibre.as_array()
        targets = a[:, None] ^ a[None, :] ^ h
        off_diagonal = ~np.eye(len(a), dtype=bool)
        if np.any(nonempty[targets] & off_diagonal):
            return False
    return True


def energy(B: Z2Set) -> Fraction:
    """
    ||1_B * 1_B||_2^2 = sum_g \\hat1_B(g)^4 = E(B) / |H|^3 with E(B) the additive energy.
    """
    m = B.ambient_m
    W = indicator_transform(B)
    fourth = sum(int(w) ** 4 for w in W)
    # direct path: r(x) = #{(a, b) in B^2 : a + b = x}, E(B) = sum r(x)^2
    a = B.as_array()
    r = np.bincount((a[:, None] ^ a[None, :]).ravel(), minlength=2**m) if B.size else np.zeros(2**m, dtype=np.int64)
    direct = sum(int(v) * int(v) for v in r)
    if fourth != direct * 2**m:
        raise InternalConsistencyError(
            f"Energy mismatch: transform path {fourth}, direct path {direct} * 2^{m}."
        )
    return Fraction(direct, 2 ** (3 * m))


@dataclass(frozen=True)
class Diagnostics:
    alpha: Fraction
    K: Fraction
    sup_f_hat: Fraction
    witness: int
    mean_square: Fraction

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "K": self.K,
            "sup_f_hat": self.sup_f_hat,
            "witness": self.witness,
            "mean_square": self.mean_square,
        }


def density_function(F: Family) -> RealFn2:
    return RealFn2(F.ambient_m, F.sizes, F.group_order)


def diagnostics(F: Family) -> Diagnostics:
    alpha = F.density
    if alpha == 0:
        raise ValueError("Diagnostics need a family of positive density.")
    f = density_function(F)
    mean_square = f.mean_square()
    if F.ambient_m >= 1:
        witness, sup = sup_nontrivial(wht(f))
    else:
        witness, sup = 0, Fraction(0)
    return Diagnostics(alpha, mean_square / alpha**2, sup, witness, mean_square)


@dataclass(frozen=True)
class LevReport:
    lhs: Fraction  # sum over 2r = 0 of \hat1_A(r)^2
    rhs: Fraction  # alpha^2

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs


def lev_positivity(A: Z4Set) -> LevReport:
    n = A.ambient_n
    s = dft4(A)
    torsion = (np.arange(4**n, dtype=np.int64) & low_mask(n)) == 0
    for r in np.flatnonzero(torsion):
        if int(s.im[r]) != 0:
            raise InternalConsistencyError(f"Real character {r} has a non-real coefficient.")
    lhs = sum(int(s.re[r]) ** 2 for r in np.flatnonzero(torsion))
    return LevReport(Fraction(lhs, 16**n), A.density**2)
