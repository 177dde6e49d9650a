"""
Element encodings and set containers for Z_4^n and Z_2^m.

An element of Z_4^n is an int whose base-4 digits are its coordinates, the first
coordinate being the most significant digit. Digit k occupies bits 2k (low bit) and
2k+1 (high bit), so parity and halving are bit masks and addition is a few XOR/AND
operations. An element of Z_2^m is an int whose bits are its coordinates, again most
significant first. Every helper accepts either a Python int or a numpy integer array.

The fibre decomposition identifies ker 2 = Im 2 = {0,2}^n with Z_2^n by 2 -> 1. An
element x splits into its parity vector h (x mod 2, which fixes the coset of ker 2)
and its halved remainder a = (x - t_h) / 2 with t_h the digitwise section, giving the
family (A_h) with A_h = {a : t_h + 2a in A}.
"""
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.constants import FAMILY_HEADER, SUBGROUP_M_CAP, Z2_HEADER, Z4_HEADER
from src.exceptions import CapExceededError, SetFileError


# ---------------------------------------------------------------------------
# Encodings
# ---------------------------------------------------------------------------

def low_mask(n: int) -> int:
    """Mask of the low bit of every base-4 digit: 0b0101...01 with n pairs."""
    return (4**n - 1) // 3


def add4(x, y, n: int):
    lo = low_mask(n)
    xl, yl = x & lo, y & lo
    xh, yh = (x >> 1) & lo, (y >> 1) & lo
    return (xl ^ yl) | ((xh ^ yh ^ (xl & yl)) << 1)


def neg4(x, n: int):
    lo = low_mask(n)
    xl, xh = x & lo, (x >> 1) & lo
    return xl | ((xh ^ xl) << 1)


def sub4(x, y, n: int):
    return add4(x, neg4(y, n), n)


def two(x, n: int):
    """The doubling map x -> 2.x; its image and kernel are both {0,2}^n."""
    return (x & low_mask(n)) << 1


def in_image_of_two(y, n: int):
    return (y & low_mask(n)) == 0


def section_t(y: int, n: int) -> int:
    """Canonical t with 2.t = y, halving each digit (2 -> 1, 0 -> 0)."""
    if y < 0 or y >= 4**n:
        raise ValueError(f"Element {y} is outside Z_4^{n}.")
    if not in_image_of_two(y, n):
        raise ValueError(f"Element {format_z4(y, n)} has an odd digit and is not in Im 2.")
    return (y >> 1) & low_mask(n)


def spread(h, n: int):
    """Move bit k of a Z_2^n element to bit 2k (the low bit of digit k)."""
    out = h & 0 if isinstance(h, np.ndarray) else 0
    for k in range(n):
        out = out | (((h >> k) & 1) << (2 * k))
    return out


def compress(x, n: int):
    """Inverse of spread on words supported on the low digit bits."""
    out = x & 0 if isinstance(x, np.ndarray) else 0
    for k in range(n):
        out = out | (((x >> (2 * k)) & 1) << k)
    return out


def parity_part(x, n: int):
    """h in Z_2^n: the coset of ker 2 containing x."""
    return compress(x & low_mask(n), n)


def halved_part(x, n: int):
    """a in Z_2^n with x = t_h + 2a."""
    return compress((x >> 1) & low_mask(n), n)


def join_parts(h, a, n: int):
    return spread(h, n) | (spread(a, n) << 1)


def dot2(r, x):
    """Parity of the F_2 dot product r.x (int or array)."""
    if isinstance(r, np.ndarray) or isinstance(x, np.ndarray):
        return np.bitwise_count(np.asarray(r & x, dtype=np.uint64)).astype(np.int64) & 1
    return (int(r) & int(x)).bit_count() & 1


def digits4(x: int, n: int) -> Tuple[int, ...]:
    return tuple((x >> (2 * (n - 1 - k))) & 3 for k in range(n))


def from_digits4(digits: Sequence[int]) -> int:
    x = 0
    for d in digits:
        if d not in (0, 1, 2, 3):
            raise ValueError(f"Digit {d} is not in Z_4.")
        x = (x << 2) | d
    return x


def format_z4(x: int, n: int) -> str:
    return "".join(str(d) for d in digits4(x, n))


def format_z2(x: int, m: int) -> str:
    return format(x, f"0{m}b") if m else ""


def parse_z4(text: str, n: int) -> int:
    text = text.strip()
    if len(text) != n or any(c not in "0123" for c in text):
        raise ValueError(f"'{text}' is not an element of Z_4^{n}.")
    return int(text, 4) if n else 0


def parse_z2(text: str, m: int) -> int:
    text = text.strip()
    if len(text) != m or any(c not in "01" for c in text):
        raise ValueError(f"'{text}' is not an element of Z_2^{m}.")
    return int(text, 2) if m else 0


# ---------------------------------------------------------------------------
# Sets
# ---------------------------------------------------------------------------

class _FiniteSet:
    _order: int = 1

    def __init__(self, dimension: int, members: Iterable[int]):
        if int(dimension) < 0:
            raise ValueError("Ambient dimension must be non-negative.")
        size = self._order ** int(dimension)
        values = [int(v) for v in members]
        for v in values:
            if not 0 <= v < size:
                raise ValueError(f"Member {v} is outside a group of order {size}.")
        ordered = tuple(sorted(values))
        if len(set(ordered)) != len(ordered):
            raise ValueError("Duplicate members are not allowed.")
        self._dimension = int(dimension)
        self.members = ordered

    @property
    def group_order(self) -> int:
        return self._order**self._dimension

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def density(self) -> Fraction:
        return Fraction(self.size, self.group_order)

    @cached_property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.group_order, dtype=bool)
        if self.members:
            out[np.fromiter(self.members, dtype=np.int64)] = True
        return out

    def as_array(self) -> np.ndarray:
        return np.fromiter(self.members, dtype=np.int64, count=len(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, x) -> bool:
        x = int(x)
        return 0 <= x < self.group_order and bool(self.mask[x])

    def __bool__(self) -> bool:
        return bool(self.members)

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and self._dimension == other._dimension
            and self.members == other.members
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._dimension, self.members))


class Z4Set(_FiniteSet):
    _order = 4

    def __init__(self, ambient_n: int, members: Iterable[int]):
        super().__init__(ambient_n, members)

    @property
    def ambient_n(self) -> int:
        return self._dimension

    @classmethod
    def full(cls, n: int) -> "Z4Set":
        return cls(n, range(4**n))

    @classmethod
    def from_digits(cls, n: int, rows: Iterable[Sequence[int]]) -> "Z4Set":
        rows = [tuple(r) for r in rows]
        for r in rows:
            if len(r) != n:
                raise ValueError(f"Element {r} does not have {n} coordinates.")
        return cls(n, (from_digits4(r) for r in rows))

    def digit_rows(self) -> List[Tuple[int, ...]]:
        return [digits4(x, self.ambient_n) for x in self.members]

    def __repr__(self) -> str:
        return f"Z4Set(n={self.ambient_n}, size={self.size})"


class Z2Set(_FiniteSet):
    _order = 2

    def __init__(self, ambient_m: int, members: Iterable[int]):
        super().__init__(ambient_m, members)

    @property
    def ambient_m(self) -> int:
        return self._dimension

    @classmethod
    def full(cls, m: int) -> "Z2Set":
        return cls(m, range(2**m))

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "Z2Set":
        m = int(len(mask)).bit_length() - 1
        if 2**m != len(mask):
            raise ValueError("Mask length must be a power of two.")
        return cls(m, np.flatnonzero(mask).tolist())

    def __repr__(self) -> str:
        return f"Z2Set(m={self.ambient_m}, size={self.size})"


# ---------------------------------------------------------------------------
# Subspaces of F_2^m
# ---------------------------------------------------------------------------

def gf2_rref(vectors: Iterable[int]) -> List[int]:
    """Reduced row echelon basis, pivot = highest set bit, rows by descending pivot."""
    pivots: Dict[int, int] = {}
    for v in vectors:
        v = int(v)
        for p in sorted(pivots, reverse=True):
            if (v >> p) & 1:
                v ^= pivots[p]
        if not v:
            continue
        p = v.bit_length() - 1
        for q in pivots:
            if (pivots[q] >> p) & 1:
                pivots[q] ^= v
        pivots[p] = v
    return [pivots[p] for p in sorted(pivots, reverse=True)]


def gf2_complement(vectors: Iterable[int], m: int) -> List[int]:
    """RREF basis of {x : v.x = 0 for every v}."""
    rows = gf2_rref(vectors)
    pivots = [r.bit_length() - 1 for r in rows]
    pivot_set = set(pivots)
    basis = []
    for free in range(m):
        if free in pivot_set:
            continue
        x = 1 << free
        for r, p in zip(rows, pivots):
            if (r >> free) & 1:
                x |= 1 << p
        basis.append(x)
    return gf2_rref(basis)


class Subgroup2:
    """
    A subspace H' of F_2^m held as an RREF basis together with an RREF basis of its
    annihilator. Coordinates with respect to the basis give an order-preserving
    isomorphism H' -> Z_2^dim, which is how sets inside H' are re-expressed as sets in
    a smaller ambient group.
    """

    def __init__(self, ambient_m: int, basis: Sequence[int], annihilator: Sequence[int]):
        self.ambient_m = int(ambient_m)
        self.basis = tuple(gf2_rref(basis))
        self.annihilator = tuple(gf2_rref(annihilator))
        limit = 2**self.ambient_m
        if any(v >= limit for v in self.basis + self.annihilator):
            raise ValueError(f"Vector outside F_2^{self.ambient_m}.")
        if len(self.basis) + len(self.annihilator) != self.ambient_m:
            raise ValueError("Basis and annihilator dimensions must add up to m.")
        for b in self.basis:
            for r in self.annihilator:
                if dot2(b, r):
                    raise ValueError("Basis and annihilator are not orthogonal.")
        self._pivots = tuple(b.bit_length() - 1 for b in self.basis)

    @classmethod
    def from_basis(cls, m: int, vectors: Iterable[int]) -> "Subgroup2":
        vectors = list(vectors)
        return cls(m, gf2_rref(vectors), gf2_complement(vectors, m))

    @classmethod
    def from_annihilator(cls, m: int, characters: Iterable[int]) -> "Subgroup2":
        characters = list(characters)
        return cls(m, gf2_complement(characters, m), gf2_rref(characters))

    @classmethod
    def whole(cls, m: int) -> "Subgroup2":
        return cls(m, [1 << k for k in range(m)], [])

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return 2**self.dimension

    @property
    def index(self) -> int:
        return 2 ** (self.ambient_m - self.dimension)

    @property
    def density(self) -> Fraction:
        return Fraction(1, self.index)

    def contains(self, x) -> Union[bool, np.ndarray]:
        if isinstance(x, np.ndarray):
            ok = np.ones(x.shape, dtype=bool)
            for r in self.annihilator:
                ok &= dot2(r, x) == 0
            return ok
        return all(dot2(r, x) == 0 for r in self.annihilator)

    def __contains__(self, x) -> bool:
        return bool(self.contains(int(x)))

    def syndrome(self, x: int) -> int:
        """Which coset of H' contains x, as the bits r_j . x."""
        s = 0
        for r in self.annihilator:
            s = (s << 1) | dot2(r, x)
        return s

    def embed(self, c: int) -> int:
        """Element of H' with coordinates c (row i of the basis is bit dim-1-i)."""
        d = self.dimension
        x = 0
        for i, b in enumerate(self.basis):
            if (c >> (d - 1 - i)) & 1:
                x ^= b
        return x

    def coordinates(self, x: int) -> int:
        if not self.contains(int(x)):
            raise ValueError(f"{x} is not in the subgroup.")
        d = self.dimension
        c = 0
        for i, p in enumerate(self._pivots):
            if (x >> p) & 1:
                c |= 1 << (d - 1 - i)
        return c

    def members(self) -> np.ndarray:
        return np.array([self.embed(c) for c in range(self.size)], dtype=np.int64)

    def coset_representatives(self) -> Dict[int, int]:
        """Least element of each coset, keyed by syndrome."""
        reps: Dict[int, int] = {}
        for x in range(2**self.ambient_m):
            reps.setdefault(self.syndrome(x), x)
        return reps

    def restrict(self, B: Z2Set, shift: int = 0) -> Z2Set:
        """(B - shift) intersected with H', in coordinates of H'."""
        return Z2Set(
            self.dimension,
            [self.coordinates(b ^ shift) for b in B.members if self.contains(b ^ shift)],
        )

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.dimension, self.basis)

    def to_dict(self) -> dict:
        return {
            "m": self.ambient_m,
            "basis": [format_z2(b, self.ambient_m) for b in self.basis],
            "annihilator": [format_z2(r, self.ambient_m) for r in self.annihilator],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Subgroup2":
        m = int(data["m"])
        return cls(
            m,
            [parse_z2(v, m) for v in data["basis"]],
            [parse_z2(v, m) for v in data["annihilator"]],
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subgroup2)
            and self.ambient_m == other.ambient_m
            and self.basis == other.basis
        )

    def __hash__(self) -> int:
        return hash((self.ambient_m, self.basis))

    def __repr__(self) -> str:
        return f"Subgroup2(m={self.ambient_m}, dim={self.dimension}, basis={self.basis})"


def subgroup_from_character(gamma: int, m: int) -> Subgroup2:
    """The index-2 subgroup {gamma}^perp."""
    if gamma == 0:
        raise ValueError("The trivial character has no index-2 kernel.")
    if not 0 < gamma < 2**m:
        raise ValueError(f"Character {gamma} is outside the dual of Z_2^{m}.")
    return Subgroup2.from_annihilator(m, [gamma])


def least_outside(gamma: int) -> int:
    """h0: the least element with gamma . h0 = 1."""
    return gamma & -gamma


def enumerate_subgroups(m: int, cap: Optional[int] = None) -> List[Subgroup2]:
    """
    Every subspace of F_2^m exactly once, ordered by dimension and then by RREF basis.

    A subspace is generated from a choice of pivot columns and a filling of the
    non-pivot positions below each pivot.
    """
    cap = SUBGROUP_M_CAP if cap is None else cap
    if m > cap:
        raise CapExceededError(f"Subgroup enumeration for m={m} exceeds the cap {cap}.")
    if m < 0:
        raise ValueError("m must be non-negative.")
    found: List[Subgroup2] = []
    for k in range(m + 1):
        for pivots in combinations(range(m - 1, -1, -1), k):
            pivot_set = set(pivots)
            free_slots = [[q for q in range(p) if q not in pivot_set] for p in pivots]
            fillings = [product((0, 1), repeat=len(slots)) for slots in free_slots]
            for choice in product(*fillings):
                rows = []
                for p, slots, bits in zip(pivots, free_slots, choice):
                    row = 1 << p
                    for q, bit in zip(slots, bits):
                        if bit:
                            row |= 1 << q
                    rows.append(row)
                found.append(Subgroup2(m, rows, gf2_complement(rows, m)))
    found.sort(key=Subgroup2.sort_key)
    return found


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

class Family:
    """A vector (A_h) of subsets of Z_2^m indexed by h in Z_2^m."""

    def __init__(self, ambient_m: int, fibres: Sequence[Union[Z2Set, Iterable[int]]]):
        self.ambient_m = int(ambient_m)
        fibres = list(fibres)
        if len(fibres) != 2**self.ambient_m:
            raise ValueError(
                f"A family on Z_2^{self.ambient_m} needs {2**self.ambient_m} fibres, got {len(fibres)}."
            )
        built = []
        for f in fibres:
            if isinstance(f, Z2Set):
                if f.ambient_m != self.ambient_m:
                    raise ValueError("Fibre lives in the wrong ambient group.")
                built.append(f)
            else:
                built.append(Z2Set(self.ambient_m, f))
        self.fibres: Tuple[Z2Set, ...] = tuple(built)

    @classmethod
    def from_mapping(cls, m: int, mapping: Mapping[int, Iterable[int]]) -> "Family":
        fibres = [[] for _ in range(2**m)]
        for h, members in mapping.items():
            if not 0 <= int(h) < 2**m:
                raise ValueError(f"Fibre index {h} is outside Z_2^{m}.")
            fibres[int(h)] = list(members)
        return cls(m, fibres)

    @classmethod
    def empty(cls, m: int) -> "Family":
        return cls(m, [[] for _ in range(2**m)])

    @classmethod
    def full(cls, m: int) -> "Family":
        full = Z2Set.full(m)
        return cls(m, [full] * 2**m)

    @property
    def group_order(self) -> int:
        return 2**self.ambient_m

    def fibre(self, h: int) -> Z2Set:
        return self.fibres[h]

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([f.size for f in self.fibres], dtype=np.int64)

    @cached_property
    def fibre_matrix(self) -> np.ndarray:
        """Row h is the indicator of A_h."""
        return np.array([f.mask for f in self.fibres], dtype=np.int64).reshape(
            self.group_order, self.group_order
        )

    def density_fn(self, h: int) -> Fraction:
        return Fraction(int(self.sizes[h]), self.group_order)

    def density_values(self) -> List[Fraction]:
        return [Fraction(int(s), self.group_order) for s in self.sizes]

    @property
    def total(self) -> int:
        return int(self.sizes.sum())

    @property
    def density(self) -> Fraction:
        return Fraction(self.total, self.group_order**2)

    def support(self) -> Z2Set:
        return Z2Set(self.ambient_m, np.flatnonzero(self.sizes).tolist())

    def to_z4set(self) -> Z4Set:
        """The set of Z_4^m whose fibre decomposition is this family."""
        n = self.ambient_m
        members = []
        for h, fibre in enumerate(self.fibres):
            if fibre:
                members.extend(join_parts(h, fibre.as_array(), n).tolist())
        return Z4Set(n, members)

    def to_dict(self) -> dict:
        m = self.ambient_m
        return {
            "m": m,
            "fibres": {
                format_z2(h, m): [format_z2(a, m) for a in f.members]
                for h, f in enumerate(self.fibres)
                if f
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Family":
        m = int(data["m"])
        mapping = {
            parse_z2(h, m): [parse_z2(a, m) for a in members]
            for h, members in dict(data.get("fibres") or {}).items()
        }
        return cls.from_mapping(m, mapping)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Family)
            and self.ambient_m == other.ambient_m
            and self.fibres == other.fibres
        )

    def __hash__(self) -> int:
        return hash((self.ambient_m, self.fibres))

    def __repr__(self) -> str:
        return f"Family(m={self.ambient_m}, total={self.total}, density={self.density})"


def fibre_decompose(A: Z4Set) -> Family:
    n = A.ambient_n
    fibres: List[List[int]] = [[] for _ in range(2**n)]
    if A.members:
        xs = A.as_array()
        hs = parity_part(xs, n)
        as_ = halved_part(xs, n)
        for h, a in zip(hs.tolist(), as_.tolist()):
            fibres[h].append(a)
    return Family(n, fibres)


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def _content_lines(text: str) -> List[str]:
    return [line.strip() for line in text.splitlines() if line.strip() and not line.strip().startswith("#")]


def _header_dimension(header: str, key: str) -> int:
    parts = header.split()
    if len(parts) != 2 or not parts[1].startswith(f"{key}="):
        raise SetFileError(f"Malformed header '{header}'.")
    try:
        dim = int(parts[1][len(key) + 1:])
    except ValueError:
        raise SetFileError(f"Malformed dimension in header '{header}'.")
    if dim < 0:
        raise SetFileError(f"Negative dimension in header '{header}'.")
    return dim


def parse_set_text(text: str) -> Union[Z4Set, Z2Set]:
    lines = _content_lines(text)
    if not lines:
        raise SetFileError("Set file is empty.")
    kind = lines[0].split()[0]
    if kind == Z4_HEADER:
        n = _header_dimension(lines[0], "n")
        parse, cls = (lambda s: parse_z4(s, n)), Z4Set
    elif kind == Z2_HEADER:
        n = _header_dimension(lines[0], "m")
        parse, cls = (lambda s: parse_z2(s, n)), Z2Set
    else:
        raise SetFileError(f"Unknown set header '{lines[0]}' (expected '{Z4_HEADER} n=..' or '{Z2_HEADER} m=..').")
    seen = set()
    members = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            x = parse(line)
        except ValueError as e:
            raise SetFileError(f"Line {lineno}: {e}")
        if x in seen:
            raise SetFileError(f"Line {lineno}: duplicate element '{line}'.")
        seen.add(x)
        members.append(x)
    return cls(n, members)


def format_set(A: Union[Z4Set, Z2Set]) -> str:
    if isinstance(A, Z4Set):
        lines = [f"{Z4_HEADER} n={A.ambient_n}"]
        lines += [format_z4(x, A.ambient_n) for x in A.members]
    else:
        lines = [f"{Z2_HEADER} m={A.ambient_m}"]
        lines += [format_z2(x, A.ambient_m) for x in A.members]
    return "\n".join(lines) + "\n"


def parse_family_text(text: str) -> Family:
    lines = _content_lines(text)
    if not lines or lines[0].split()[0] != FAMILY_HEADER:
        raise SetFileError(f"Family file must start with '{FAMILY_HEADER} m=<m>'.")
    m = _header_dimension(lines[0], "m")
    mapping: Dict[int, List[int]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        head, sep, rest = line.partition(":")
        if not sep:
            raise SetFileError(f"Line {lineno}: expected '<h>: <members>'.")
        try:
            h = parse_z2(head, m)
            members = [parse_z2(tok, m) for tok in rest.split()]
        except ValueError as e:
            raise SetFileError(f"Line {lineno}: {e}")
        if h in mapping:
            raise SetFileError(f"Line {lineno}: fibre {head.strip()} given twice.")
        if len(set(members)) != len(members):
            raise SetFileError(f"Line {lineno}: duplicate member in fibre {head.strip()}.")
        mapping[h] = members
    return Family.from_mapping(m, mapping)


def format_family(F: Family) -> str:
    m = F.ambient_m
    lines = [f"{FAMILY_HEADER} m={m}"]
    for h, fibre in enumerate(F.fibres):
        if fibre:
            lines.append(f"{format_z2(h, m)}: " + " ".join(format_z2(a, m) for a in fibre.members))
    return "\n".join(lines) + "\n"


def read_input_file(path: str) -> Union[Z4Set, Z2Set, Family]:
    """Read a set or family file, dispatching on its header."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise SetFileError(f"{path} is not UTF-8 text: {e}")
    lines = _content_lines(text)
    if lines and lines[0].split()[0] == FAMILY_HEADER:
        return parse_family_text(text)
    return parse_set_text(text)


def write_text_file(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
