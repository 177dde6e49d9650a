"""
Density-increment steps on families, each returning a certificate that can be checked
again from the two families it connects.

Every step here has the same shape: pick an index-2^d subgroup H' of H, translate a
piece of each fibre into H' by some x_h, and relabel the fibres along a coset h1 + H'.
The map (a, a', y, h') -> (a + x_g, a' + x_g, y + x_g', g) with g = h1 + h' then
injects the quadruples of the new family into those of the old one, so the raw
counts satisfy |H|^4 Lambda(A) >= |H'|^4 Lambda(A').
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.constants import FIXED_POINT_BITS, QUADRUPLE_RECOUNT_M_CAP
from src.counting import density_function, family_raw_count_quadruple, lambda_family
from src.event_logger import EventLogger
from src.exceptions import CertificateError, InternalConsistencyError, TheoremFalsificationError
from src.group_core import (
    Family,
    Subgroup2,
    Z2Set,
    dot2,
    format_z2,
    least_outside,
    parse_z2,
    subgroup_from_character,
)
from src.harmonic import RealFn2, indicator_transform, sup_nontrivial, wht
from src.utils import ceil_log2, jsonable, ln_upper, to_fraction

logger = logging.getLogger(__name__)

CERTIFICATE_KINDS = (
    "linf",
    "fibre_simultaneous",
    "density_fn",
    "large_l2_step",
    "energy_regroup",
    "dyadic_trim",
)


@dataclass(frozen=True)
class FamilySummary:
    ambient_m: int
    density: Fraction
    raw_count: int

    @property
    def group_order(self) -> int:
        return 2**self.ambient_m

    @property
    def lambda_value(self) -> Fraction:
        return Fraction(self.raw_count, self.group_order**4)

    @classmethod
    def of(cls, F: Family) -> "FamilySummary":
        return cls(F.ambient_m, F.density, family_raw_count_quadruple(F))

    def to_dict(self) -> dict:
        return {"m": self.ambient_m, "density": self.density, "raw_count": self.raw_count}

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySummary":
        return cls(int(data["m"]), to_fraction(data["density"]), int(data["raw_count"]))


@dataclass
class IncrementCertificate:
    kind: str
    subgroup: Subgroup2
    shift_table: Dict[int, int]
    h1: int
    before: FamilySummary
    after: FamilySummary
    claimed_gain: Optional[Fraction]
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def codimension(self) -> int:
        return self.before.ambient_m - self.after.ambient_m

    def check(self) -> List[str]:
        """Stored inequalities that fail; empty when the certificate is internally sound."""
        failures = []
        if self.kind not in CERTIFICATE_KINDS:
            failures.append(f"unknown kind '{self.kind}'")
        if self.subgroup.ambient_m != self.before.ambient_m:
            failures.append("subgroup does not live in the starting group")
        if self.subgroup.dimension != self.after.ambient_m:
            failures.append("new family is not indexed by the subgroup")
        if self.claimed_gain is not None:
            if self.claimed_gain < 0:
                failures.append("negative claimed gain")
            if self.after.density < self.before.density + self.claimed_gain:
                failures.append(
                    f"density {self.after.density} < {self.before.density} + {self.claimed_gain}"
                )
        # |H|^4 Lambda(A) >= |H'|^4 Lambda(A')
        if self.before.raw_count < self.after.raw_count:
            failures.append(f"raw count {self.before.raw_count} < {self.after.raw_count}")
        return failures

    def verify(self, before: Family, after: Family) -> None:
        """
        Recount both families from scratch (both counting paths for |H| <= 2^5), compare
        against the stored summaries and confirm every member of the new family comes
        from the old one through the recorded shift and relabelling.
        """
        for label, family, stored in (("before", before, self.before), ("after", after, self.after)):
            if family.ambient_m <= QUADRUPLE_RECOUNT_M_CAP:
                raw = lambda_family(family).raw_count
            else:
                raw = family_raw_count_quadruple(family)
            recount = FamilySummary(family.ambient_m, family.density, raw)
            if recount != stored:
                raise CertificateError(f"{self.kind}: stored {label} summary {stored} != recount {recount}")
        for h_new, fibre in enumerate(after.fibres):
            if not fibre:
                continue
            g = self.h1 ^ self.subgroup.embed(h_new)
            x = self.shift_table.get(g, 0)
            source = before.fibre(g)
            for a in fibre.members:
                if (self.subgroup.embed(a) ^ x) not in source:
                    raise CertificateError(
                        f"{self.kind}: member {format_z2(a, after.ambient_m)} of fibre "
                        f"{format_z2(h_new, after.ambient_m)} does not come from fibre "
                        f"{format_z2(g, before.ambient_m)}"
                    )
        failures = self.check()
        if failures:
            raise CertificateError(f"{self.kind}: " + "; ".join(failures))

    def to_dict(self) -> dict:
        m = self.before.ambient_m
        return {
            "kind": self.kind,
            "subgroup": self.subgroup.to_dict(),
            "shift_table": {format_z2(h, m): format_z2(x, m) for h, x in sorted(self.shift_table.items())},
            "h1": format_z2(self.h1, m),
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "claimed_gain": self.claimed_gain,
            "extras": jsonable(self.extras),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IncrementCertificate":
        try:
            before = FamilySummary.from_dict(data["before"])
            m = before.ambient_m
            gain = data.get("claimed_gain")
            return cls(
                kind=str(data["kind"]),
                subgroup=Subgroup2.from_dict(data["subgroup"]),
                shift_table={parse_z2(h, m): parse_z2(x, m) for h, x in dict(data["shift_table"]).items()},
                h1=parse_z2(data["h1"], m),
                before=before,
                after=FamilySummary.from_dict(data["after"]),
                claimed_gain=None if gain is None else to_fraction(gain),
                extras=dict(data.get("extras") or {}),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CertificateError(f"Malformed certificate: {e}")


@dataclass(frozen=True)
class ChainBound:
    initial: FamilySummary
    final: FamilySummary
    links: int

    @property
    def codimension(self) -> int:
        return self.initial.ambient_m - self.final.ambient_m

    @property
    def holds(self) -> bool:
        return self.initial.raw_count >= self.final.raw_count

    def lift(self, floor: Fraction) -> Fraction:
        """A floor for Lambda of the final family, read back on the initial one."""
        return Fraction(floor) / 16**self.codimension


def compose_chain(
    certificates: Sequence[IncrementCertificate], initial: Optional[FamilySummary] = None
) -> ChainBound:
    """
    Check that consecutive certificates meet and reduce the chain to the single integer
    inequality |H_0|^4 Lambda(A_0) >= |H_k|^4 Lambda(A_k).
    """
    if not certificates:
        if initial is None:
            raise ValueError("An empty chain needs its starting summary.")
        return ChainBound(initial, initial, 0)
    if initial is not None and certificates[0].before != initial:
        raise CertificateError("link 0: chain does not start at the given family")
    for i, cert in enumerate(certificates):
        failures = cert.check()
        if failures:
            raise CertificateError(f"link {i} ({cert.kind}): " + "; ".join(failures))
        if i and certificates[i - 1].after != cert.before:
            raise CertificateError(f"link {i} ({cert.kind}): does not start where link {i - 1} ended")
    bound = ChainBound(certificates[0].before, certificates[-1].after, len(certificates))
    if not bound.holds:
        raise CertificateError("chain: initial raw count is below the final one")
    return bound


def _validate_character(gamma: int, m: int):
    if gamma == 0:
        raise ValueError("gamma must be a nontrivial character.")
    if not 0 < gamma < 2**m:
        raise ValueError(f"Character {gamma} is outside the dual of Z_2^{m}.")


def _sides(members: np.ndarray, gamma: int) -> np.ndarray:
    return dot2(gamma, members) if len(members) else np.zeros(0, dtype=np.int64)


# ---------------------------------------------------------------------------
# L-infinity increment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinfIncrement:
    subgroup: Subgroup2
    coset: int  # 0 for H' itself, h0 for the other coset
    new_density: Fraction
    gain: Fraction


def linf_increment(f: RealFn2, gamma: int) -> LinfIncrement:
    """
    The larger coset average of f over {gamma}^perp, which equals E f + |\\hat f(gamma)|.
    """
    m = f.ambient_m
    _validate_character(gamma, m)
    nums = [int(v) for v in f.numerators]
    if any(v < 0 or v > f.denominator for v in nums):
        raise ValueError("linf_increment needs a function with values in [0, 1].")
    H_prime = subgroup_from_character(gamma, m)
    h0 = least_outside(gamma)
    sides = _sides(np.arange(2**m, dtype=np.int64), gamma)
    inside = sum(v for v, s in zip(nums, sides) if s == 0)
    outside = sum(nums) - inside
    half = f.denominator * 2 ** (m - 1)
    avg0, avg1 = Fraction(inside, half), Fraction(outside, half)
    coset, best = (0, avg0) if avg0 >= avg1 else (h0, avg1)
    coefficient = abs(wht(f).coeff(gamma))
    if best != f.mean() + coefficient:
        raise InternalConsistencyError(
            f"Coset average {best} differs from E f + |f^(gamma)| = {f.mean() + coefficient}."
        )
    return LinfIncrement(H_prime, coset, best, coefficient)


# ---------------------------------------------------------------------------
# Family increments
# ---------------------------------------------------------------------------

def relabel_fibres(
    F: Family, H_prime: Subgroup2, h1: int, pieces: Dict[int, np.ndarray]
) -> Family:
    """New family on H' (in coordinates): fibre h' is pieces[h1 + h'] re-expressed in H'."""
    fibres = []
    for c in range(H_prime.size):
        g = h1 ^ H_prime.embed(c)
        members = pieces.get(g)
        if members is None or not len(members):
            fibres.append([])
        else:
            fibres.append([H_prime.coordinates(int(b)) for b in members])
    return Family(H_prime.dimension, fibres)


def fibre_increment(F: Family, gamma: int) -> Tuple[Family, IncrementCertificate]:
    """
    Simultaneous increment of every fibre along gamma. Each fibre keeps its larger half
    with respect to {gamma}^perp, translated into {gamma}^perp, and the fibres are then
    relabelled along the coset of H' where these halves are densest on average.
    """
    m = F.ambient_m
    _validate_character(gamma, m)
    H_prime = subgroup_from_character(gamma, m)
    h0 = least_outside(gamma)

    shifts: Dict[int, int] = {}
    pieces: Dict[int, np.ndarray] = {}
    gain_num = 0
    for h, fibre in enumerate(F.fibres):
        members = fibre.as_array()
        sides = _sides(members, gamma)
        n1 = int(sides.sum())
        n0 = len(members) - n1
        gain_num += abs(n0 - n1)
        x_h, side = (0, 0) if n0 >= n1 else (h0, 1)
        if len(members):
            shifts[h] = x_h
        pieces[h] = members[sides == side] ^ x_h

    piece_sizes = np.array([len(pieces[h]) for h in range(2**m)], dtype=np.int64)
    h_sides = _sides(np.arange(2**m, dtype=np.int64), gamma)
    in_coset0 = int(piece_sizes[h_sides == 0].sum())
    in_coset1 = int(piece_sizes[h_sides == 1].sum())
    h1 = 0 if in_coset0 >= in_coset1 else h0

    new_family = relabel_fibres(F, H_prime, h1, pieces)
    certificate = IncrementCertificate(
        kind="fibre_simultaneous",
        subgroup=H_prime,
        shift_table=shifts,
        h1=h1,
        before=FamilySummary.of(F),
        after=FamilySummary.of(new_family),
        claimed_gain=Fraction(gain_num, 4**m),  # E_h |\hat 1_{A_h}(gamma)|
        extras={"gamma": format_z2(gamma, m)},
    )
    return new_family, certificate


def mean_fibre_coefficients(F: Family) -> List[Fraction]:
    """E_h |\\hat 1_{A_h}(gamma)| for every gamma."""
    W = np.abs(np.stack([indicator_transform(fibre) for fibre in F.fibres]))
    totals = W.sum(axis=0)
    return [Fraction(int(t), 4**F.ambient_m) for t in totals]


def density_fn_increment(F: Family, gamma: int) -> Tuple[Family, IncrementCertificate]:
    """
    Increment driven by a large coefficient of the density function: relabel along the
    coset h1 + H' where f is densest, and keep the larger of A_g ∩ H' and
    A_g ∩ (h0 + H') in each fibre, translated into H'.
    """
    m = F.ambient_m
    _validate_character(gamma, m)
    H_prime = subgroup_from_character(gamma, m)
    h0 = least_outside(gamma)

    h_sides = _sides(np.arange(2**m, dtype=np.int64), gamma)
    in_coset0 = int(F.sizes[h_sides == 0].sum())
    in_coset1 = int(F.sizes[h_sides == 1].sum())
    h1 = 0 if in_coset0 >= in_coset1 else h0

    shifts: Dict[int, int] = {}
    pieces: Dict[int, np.ndarray] = {}
    for c in range(H_prime.size):
        g = h1 ^ H_prime.embed(c)
        members = F.fibre(g).as_array()
        if not len(members):
            continue
        sides = _sides(members, gamma)
        n1 = int(sides.sum())
        n0 = len(members) - n1
        x_g, side = (0, 0) if n0 >= n1 else (h0, 1)
        shifts[g] = x_g
        pieces[g] = members[sides == side] ^ x_g

    new_family = relabel_fibres(F, H_prime, h1, pieces)
    certificate = IncrementCertificate(
        kind="density_fn",
        subgroup=H_prime,
        shift_table=shifts,
        h1=h1,
        before=FamilySummary.of(F),
        after=FamilySummary.of(new_family),
        claimed_gain=Fraction(abs(in_coset0 - in_coset1), 4**m),  # |\hat f(gamma)|
        extras={"gamma": format_z2(gamma, m)},
    )
    return new_family, certificate


# ---------------------------------------------------------------------------
# Families of the form f = delta 1_S
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LargeL2Floor:
    lambda_floor: Fraction  # the exact Lambda of the family
    bound: Fraction  # delta^3 sigma^2 / 2
    delta: Fraction
    sigma: Fraction

    def to_dict(self) -> dict:
        return {
            "lambda_floor": self.lambda_floor,
            "bound": self.bound,
            "delta": self.delta,
            "sigma": self.sigma,
        }


def flat_profile(F: Family) -> Tuple[Fraction, Z2Set]:
    """(delta, S) with f = delta 1_S; raises when f takes two distinct nonzero values."""
    nonzero = set(int(s) for s in F.sizes if s)
    if len(nonzero) > 1:
        raise ValueError(
            f"Family density function takes several nonzero values {sorted(nonzero)}; expected delta 1_S."
        )
    size = nonzero.pop() if nonzero else 0
    return Fraction(size, F.group_order), F.support()


def large_l2_step(F: Family) -> Union[LargeL2Floor, Tuple[Family, IncrementCertificate]]:
    """
    One step for f = delta 1_S: either Lambda >= delta^3 sigma^2 / 2, or a character
    with |\\hat 1_S(gamma)| >= delta sigma / 2 moves the family to an index-2 subgroup
    where the support has relative density at least sigma (1 + delta / 2).
    """
    m = F.ambient_m
    delta, S = flat_profile(F)
    sigma = S.density
    lam = lambda_family(F).lambda_value
    bound = delta**3 * sigma**2 / 2
    if lam >= bound:
        return LargeL2Floor(lam, bound, delta, sigma)

    state = {"m": m, "delta": delta, "sigma": sigma, "lambda": lam, "bound": bound}
    if m == 0:
        raise TheoremFalsificationError("Lambda is below the floor on the trivial group.", state)
    gamma, coefficient = sup_nontrivial(wht(RealFn2.indicator(S)))
    state.update({"gamma": gamma, "coefficient": coefficient})
    if coefficient < delta * sigma / 2:
        raise TheoremFalsificationError(
            "Lambda is below delta^3 sigma^2 / 2 but the support has no coefficient of size delta sigma / 2.",
            state,
        )

    H_prime = subgroup_from_character(gamma, m)
    h0 = least_outside(gamma)
    h_sides = _sides(S.as_array(), gamma)
    h1 = 0 if int((h_sides == 0).sum()) >= int((h_sides == 1).sum()) else h0

    size = int(delta * F.group_order)
    target = (size + 1) // 2  # ceil(delta |H'|)
    shifts: Dict[int, int] = {}
    pieces: Dict[int, np.ndarray] = {}
    for c in range(H_prime.size):
        g = h1 ^ H_prime.embed(c)
        members = F.fibre(g).as_array()
        if not len(members):
            continue
        sides = _sides(members, gamma)
        n1 = int(sides.sum())
        n0 = len(members) - n1
        x_g, side = (0, 0) if n0 >= n1 else (h0, 1)
        shifts[g] = x_g
        # coordinates in H' are order preserving, so the least elements stay least
        pieces[g] = np.sort(members[sides == side] ^ x_g)[:target]

    new_family = relabel_fibres(F, H_prime, h1, pieces)
    new_delta, new_S = flat_profile(new_family)
    new_sigma = new_S.density
    state.update({"delta_after": new_delta, "sigma_after": new_sigma})
    if new_sigma < sigma * (1 + delta / 2) or new_delta < delta:
        raise TheoremFalsificationError("Support did not grow by the factor 1 + delta / 2.", state)

    certificate = IncrementCertificate(
        kind="large_l2_step",
        subgroup=H_prime,
        shift_table=shifts,
        h1=h1,
        before=FamilySummary.of(F),
        after=FamilySummary.of(new_family),
        claimed_gain=delta * delta * sigma / 2,
        extras={
            "gamma": format_z2(gamma, m),
            "coefficient": coefficient,
            "delta": delta,
            "sigma": sigma,
            "delta_after": new_delta,
            "sigma_after": new_sigma,
        },
    )
    return new_family, certificate


def large_l2_step_bound(delta: Fraction, sigma: Fraction, bits: int = FIXED_POINT_BITS) -> int:
    """ceil(2 delta^{-1} ln sigma^{-1}) + 1, with the logarithm rounded up."""
    if sigma == 0 or sigma == 1:
        return 1
    value = 2 * ln_upper(1 / sigma, bits) / delta
    return -(-value.numerator // value.denominator) + 1


@dataclass
class LargeL2Drive:
    final_family: Family
    certificates: List[IncrementCertificate]
    terminal: LargeL2Floor
    step_bound: int
    chain: ChainBound

    @property
    def steps(self) -> int:
        return len(self.certificates)

    @property
    def certified_floor(self) -> Fraction:
        return self.chain.lift(self.terminal.lambda_floor)


def large_l2_drive(
    F: Family,
    event_logger: Optional[EventLogger] = None,
    bits: int = FIXED_POINT_BITS,
) -> LargeL2Drive:
    """Iterate large_l2_step until the floor branch fires."""
    delta, S = flat_profile(F)
    bound = large_l2_step_bound(delta, S.density, bits)
    certificates: List[IncrementCertificate] = []
    current = F
    while True:
        outcome = large_l2_step(current)
        if isinstance(outcome, LargeL2Floor):
            if event_logger is not None:
                event_logger.log_event("large_l2_floor", **outcome.to_dict(), m=current.ambient_m)
            break
        current, certificate = outcome
        certificates.append(certificate)
        if event_logger is not None:
            event_logger.log_event("large_l2_increment", certificate=certificate.to_dict())
        if len(certificates) > bound:
            raise TheoremFalsificationError(
                f"large_l2_drive took more than {bound} steps.",
                {"delta": delta, "sigma": S.density, "steps": len(certificates)},
            )
    chain = compose_chain(certificates, FamilySummary.of(F))
    return LargeL2Drive(current, certificates, outcome, bound, chain)


# ---------------------------------------------------------------------------
# Dyadic level selection
# ---------------------------------------------------------------------------

@dataclass
class DyadicSelection:
    level: int
    members: Z2Set
    delta: Fraction
    subfamily: Family
    q: int
    K: Fraction
    level_densities: List[Fraction]
    averaging_holds: bool
    stated_bound_holds: bool
    certificate: IncrementCertificate

    @property
    def epsilon(self) -> Fraction:
        return Fraction(1, self.q)

    @property
    def trimmed_delta(self) -> Fraction:
        return flat_profile(self.subfamily)[0]

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "delta": self.delta,
            "trimmed_delta": self.trimmed_delta,
            "q": self.q,
            "K": self.K,
            "level_densities": self.level_densities,
            "averaging_holds": self.averaging_holds,
            "stated_bound_holds": self.stated_bound_holds,
        }


def epsilon_denominator(K: Fraction) -> int:
    """q with epsilon = 1/q = 1 / (1 + bitlength(ceil K)), a rational stand-in for 1/(1 + ln K)."""
    ceil_K = -(-K.numerator // K.denominator)
    return 1 + ceil_K.bit_length()


def dyadic_select(
    F: Family,
    q: Optional[int] = None,
    event_logger: Optional[EventLogger] = None,
    verbose: bool = False,
) -> DyadicSelection:
    """
    Split the support of f into the levels S_i = {2^{-(i+1)} <= f <= 2^{-i}},
    i <= ceil(log2 1/alpha), keep the level maximizing 2^{-(2+eps) i} P(S_i) and cut each
    of its fibres down to ceil(2^{-(i+1)} |H|) least elements.

    Parameters:
    - F (Family): family of positive density
    - q (int): optional override of 1/epsilon
    - event_logger (EventLogger): receives a warning event when K < 2

    Returns:
    - DyadicSelection: the level, the trimmed subfamily and the averaging checks
    """
    m = F.ambient_m
    alpha = F.density
    if alpha == 0:
        raise ValueError("dyadic_select needs a family of positive density.")
    f_values = F.density_values()
    mean_square = density_function(F).mean_square()
    K = mean_square / alpha**2
    if K < 2:
        logger.warning("dyadic_select: K = %s is below 2", K)
        if event_logger is not None:
            event_logger.log_event("dyadic_warning", K=K)
        if verbose:
            print(f"[dyadic_select] warning: K = {K} < 2")
    q = epsilon_denominator(K) if q is None else int(q)
    if q < 1:
        raise ValueError("q must be a positive integer.")

    top = ceil_log2(1 / alpha)
    levels: List[List[int]] = []
    for i in range(top + 1):
        lo, hi = Fraction(1, 2 ** (i + 1)), Fraction(1, 2**i)
        levels.append([h for h, v in enumerate(f_values) if lo <= v <= hi])
    densities = [Fraction(len(level), 2**m) for level in levels]
    scores = [P**q / 2 ** ((2 * q + 1) * i) for i, P in enumerate(densities)]
    level = max(range(len(scores)), key=lambda i: (scores[i], -i))
    P = densities[level]

    # sum_j 2^{eps j} <= 6 eps^{-1} alpha^{-eps} for j <= ceil(log2 1/alpha), so
    # (6q)^q alpha^{-1} 2^{-(2q+1)i} P^q >= (||f||^2 / 2)^q
    averaging_holds = (6 * q) ** q * scores[level] / alpha >= (mean_square / 2) ** q
    stated_bound_holds = (2 * q) ** q * scores[level] / alpha >= (3 * mean_square / 4) ** q
    if not averaging_holds:
        raise TheoremFalsificationError(
            "Dyadic averaging inequality failed.",
            {"level": level, "q": q, "alpha": alpha, "mean_square": mean_square, "densities": densities},
        )

    target = 2 ** (m - level - 1) if level < m else 1  # ceil(2^{-(i+1)} |H|)
    chosen = set(levels[level])
    subfamily = Family(m, [fibre.members[:target] if h in chosen else [] for h, fibre in enumerate(F.fibres)])
    before, after = FamilySummary.of(F), FamilySummary.of(subfamily)
    if after.raw_count > before.raw_count:
        raise InternalConsistencyError("Trimmed subfamily has more progressions than the family.")
    certificate = IncrementCertificate(
        kind="dyadic_trim",
        subgroup=Subgroup2.whole(m),
        shift_table={},
        h1=0,
        before=before,
        after=after,
        claimed_gain=None,
        extras={"level": level, "q": q, "target": target},
    )
    return DyadicSelection(
        level=level,
        members=Z2Set(m, levels[level]),
        delta=Fraction(1, 2 ** (level + 1)),
        subfamily=subfamily,
        q=q,
        K=K,
        level_densities=densities,
        averaging_holds=averaging_holds,
        stated_bound_holds=stated_bound_holds,
        certificate=certificate,
    )
