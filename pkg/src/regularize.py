"""
Finding a subgroup on which a set is dense and Fourier-uniform.

bsg_oracle stands in for the structural step that turns large additive energy into a
dense coset: at this scale every subspace of F_2^m can simply be tried. uniformize then
follows the density-increment loop that passes to index-2 subgroups until no
nontrivial coefficient of the restricted set exceeds epsilon times its density.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from src.constants import FIXED_POINT_BITS
from src.exceptions import TheoremFalsificationError
from src.group_core import Subgroup2, Z2Set, enumerate_subgroups, format_z2
from src.harmonic import RealFn2, sup_nontrivial, wht
from src.increment import linf_increment
from src.utils import ln_upper


@dataclass(frozen=True)
class UniformizeStep:
    character: int  # in coordinates of the subgroup before the step
    density_before: Fraction
    density_after: Fraction

    def to_dict(self) -> dict:
        return {
            "character": self.character,
            "density_before": self.density_before,
            "density_after": self.density_after,
        }


@dataclass
class BsgResult:
    subgroup: Subgroup2
    shift: int
    local_density: Fraction
    uniformity: Fraction  # sup_{g != 0} |\hat 1_{A'}(g)| / P(A')
    sup_coefficient: Fraction
    restricted: Z2Set  # A' = (A - shift) ∩ H', in coordinates of H'
    steps: List[UniformizeStep] = field(default_factory=list)

    def is_uniform(self, epsilon: Fraction) -> bool:
        return self.sup_coefficient <= epsilon * self.local_density

    def members_in_ambient(self) -> List[int]:
        """A' as elements of H' inside the ambient group."""
        return [self.subgroup.embed(c) for c in self.restricted.members]

    def to_dict(self) -> dict:
        m = self.subgroup.ambient_m
        return {
            "subgroup": self.subgroup.to_dict(),
            "shift": format_z2(self.shift, m),
            "local_density": self.local_density,
            "uniformity": self.uniformity,
            "sup_coefficient": self.sup_coefficient,
            "steps": [s.to_dict() for s in self.steps],
        }


def _uniformity(restricted: Z2Set) -> Tuple[int, Fraction]:
    """Witness and value of sup_{g != 0} |\\hat 1_{A'}(g)| on the subgroup."""
    if restricted.ambient_m == 0 or not restricted:
        return 0, Fraction(0)
    return sup_nontrivial(wht(RealFn2.indicator(restricted)))


def _result(A: Z2Set, subgroup: Subgroup2, shift: int, steps=None) -> BsgResult:
    restricted = subgroup.restrict(A, shift)
    _, sup = _uniformity(restricted)
    density = restricted.density
    ratio = sup / density if density else Fraction(0)
    return BsgResult(subgroup, shift, density, ratio, sup, restricted, list(steps or []))


def bsg_oracle(
    A: Z2Set,
    c: Fraction,
    min_subgroup_density: Fraction,
    cap: Optional[int] = None,
) -> Optional[BsgResult]:
    """
    Exhaustive search for (H', x) maximizing |A ∩ (x + H')| / |H'| among subgroups with
    P(H') >= min_subgroup_density, subject to that density being at least c/2.
    Ties prefer the larger subgroup, then the earlier subgroup in canonical order, then
    the least x. Returns None when no pair qualifies.
    """
    c = Fraction(c)
    min_subgroup_density = Fraction(min_subgroup_density)
    subgroups = enumerate_subgroups(A.ambient_m, cap)
    best_key = None
    best: Optional[Tuple[Subgroup2, int]] = None
    for index, H in enumerate(subgroups):
        if H.density < min_subgroup_density:
            continue
        counts = {}
        for a in A.members:
            s = H.syndrome(a)
            counts[s] = counts.get(s, 0) + 1
        reps = H.coset_representatives()
        for s, count in counts.items():
            local = Fraction(count, H.size)
            if local < c / 2:
                continue
            key = (-local, -H.dimension, index, reps[s])
            if best_key is None or key < best_key:
                best_key, best = key, (H, reps[s])
    if best is None:
        return None
    return _result(A, best[0], best[1])


def uniformize_step_bound(alpha0: Fraction, epsilon: Fraction, bits: int = FIXED_POINT_BITS) -> int:
    """ceil(eps^{-1} ln alpha0^{-1}) + 1 with the logarithm rounded up."""
    if alpha0 <= 0 or alpha0 >= 1:
        return 1
    value = ln_upper(1 / alpha0, bits) / epsilon
    return -(-value.numerator // value.denominator) + 1


def uniformize(
    A: Z2Set,
    epsilon: Fraction,
    inner: BsgResult,
    bits: int = FIXED_POINT_BITS,
    verbose: bool = False,
) -> BsgResult:
    """
    Starting from (H_0, x_0) = (inner.subgroup, inner.shift), repeatedly pass to the
    half of the current subgroup singled out by the largest nontrivial coefficient of
    the restricted set, accumulating the shift x = x_0 + ... + x_i, until
    sup_{g != 0} |\\hat 1_{A'}(g)| <= epsilon P(A').

    Raises:
    - ValueError: epsilon outside (0, 1]
    - TheoremFalsificationError: a step fails to grow the density by (1 + epsilon) or
      the loop outlives its step bound
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1].")
    m = A.ambient_m
    subgroup, shift = inner.subgroup, inner.shift
    current = subgroup.restrict(A, shift)
    bound = uniformize_step_bound(current.density, epsilon, bits)
    steps: List[UniformizeStep] = []
    while True:
        gamma, sup = _uniformity(current)
        density = current.density
        if sup <= epsilon * density:
            break
        if len(steps) >= bound:
            raise TheoremFalsificationError(
                f"uniformize did not settle within {bound} steps.",
                {"epsilon": epsilon, "density": density, "steps": len(steps)},
            )
        step = linf_increment(RealFn2.indicator(current), gamma)
        # translate by the chosen coset and keep the half {gamma}^perp, in ambient terms
        translate = subgroup.embed(step.coset)
        half = Subgroup2.from_basis(m, [subgroup.embed(b) for b in step.subgroup.basis])
        shift ^= translate
        subgroup = half
        current = subgroup.restrict(A, shift)
        if current.density != step.new_density or current.density <= (1 + epsilon) * density:
            raise TheoremFalsificationError(
                "uniformize step did not grow the density by the factor 1 + epsilon.",
                {"epsilon": epsilon, "before": density, "after": current.density},
            )
        steps.append(UniformizeStep(gamma, density, current.density))
        if verbose:
            print(f"[uniformize] step {len(steps)}: density {density} -> {current.density}")
    return _result(A, subgroup, shift, steps)
