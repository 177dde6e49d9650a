"""
The density-increment drivers and the two large steps they are built from.

Every branch the argument can take is decided on exact rationals and written to the
EventLogger held by the EngineConfig, so a run can be serialized as a trace and
replayed later. A proof-guaranteed inequality that fails raises
TheoremFalsificationError; one that only holds for the default branch thresholds is
logged as a flag instead when the thresholds have been overridden.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.counting import diagnostics, density_function, energy, lambda_fourier, lev_positivity
from src.engine_config import EngineConfig
from src.event_logger import canonical_json, parse_trace, trace_digest, trace_lines
from src.exceptions import (
    CapExceededError,
    InternalConsistencyError,
    TheoremFalsificationError,
    TraceReplayError,
)
from src.group_core import (
    Family,
    Subgroup2,
    Z2Set,
    Z4Set,
    digits4,
    fibre_decompose,
    format_set,
    format_z2,
    format_z4,
    gf2_rref,
    halved_part,
    in_image_of_two,
    parse_set_text,
)
from src.harmonic import dft4, fwht, wht
from src.increment import (
    ChainBound,
    FamilySummary,
    IncrementCertificate,
    compose_chain,
    density_fn_increment,
    dyadic_select,
    fibre_increment,
    large_l2_drive,
    relabel_fibres,
)
from src.regularize import BsgResult, bsg_oracle, uniformize
from src.utils import ceil_log2, floor_log2, floor_sqrt, ln_lower, ln_upper, solve_increasing

logger = logging.getLogger(__name__)

DRIVERS = ("rml", "weighted")


@dataclass
class FloorOutcome:
    """A certified lower bound for Lambda of the family the step was given."""

    floor: Fraction
    branch: str
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass
class IncrementOutcome:
    family: Family
    certificate: IncrementCertificate
    branch: str
    required_gain: Fraction


@dataclass
class DriverResult:
    driver: str
    certified_floor: Fraction  # floor for Lambda of the input set
    local_floor: Fraction  # floor for Lambda of the last set or family visited
    terminal_branch: str
    steps: int
    codimension: int
    densities: List[Fraction]
    completed: bool
    chain: Optional[ChainBound] = None

    def to_dict(self) -> dict:
        return {
            "driver": self.driver,
            "certified_floor": self.certified_floor,
            "local_floor": self.local_floor,
            "terminal_branch": self.terminal_branch,
            "steps": self.steps,
            "codimension": self.codimension,
            "densities": self.densities,
            "completed": self.completed,
        }


@dataclass(frozen=True)
class ReplayReport:
    driver: str
    events: int
    certified_floor: Fraction


@dataclass
class _FibreRegularity:
    h: int
    result: BsgResult
    mean_on_coset: Fraction  # (f * P_{H_h})(h)
    sup_on_coset: Fraction


def _argmax_nontrivial(values: List[Fraction]) -> int:
    """Least g != 0 maximizing values[g]."""
    return max(range(1, len(values)), key=lambda g: (values[g], -g))


def _integer_rows(matrix: np.ndarray) -> List[List[int]]:
    return [[int(v) for v in row] for row in matrix]


class DensityIncrementEngine:
    def __init__(self, cfg: EngineConfig = None):
        self.cfg = cfg or EngineConfig()
        self.log = self.cfg.event_logger

    @property
    def bits(self) -> int:
        return self.cfg.fixed_point_bits

    def _event(self, branch: str, certificate: Optional[dict] = None, **quantities):
        if not self.log.started:
            self.log.start_event("engine_start")
        self.log.log_event(branch, certificate=certificate, **quantities)
        if self.cfg.verbose:
            print(f"[engine] {branch}")

    def _flag(self, name: str, message: str, state: dict):
        """A check that the argument only guarantees for the default branch thresholds."""
        if self.cfg.uses_default_thresholds():
            raise TheoremFalsificationError(message, state)
        logger.warning("%s: %s", name, message)
        self._event("flag", name=name, message=message)

    # ------------------------------------------------------------------
    # High fibred energy
    # ------------------------------------------------------------------

    def _epsilon(self, c: Fraction, K: Fraction) -> Fraction:
        """Rational floor of sqrt(c/K)/4; extra bits are added until it is positive."""
        bits = self.bits
        root = floor_sqrt(c / K, bits)
        while root == 0:
            bits += 8
            root = floor_sqrt(c / K, bits)
        return min(root / 4, Fraction(1))

    def _regularize_fibre(self, fibre: Z2Set, c: Fraction, epsilon: Fraction):
        try:
            inner = bsg_oracle(fibre, c, self.cfg.bsg_min_subgroup_density)
        except CapExceededError as e:
            return None, str(e)
        if inner is None:
            return None, "no coset reaches density c/2"
        return uniformize(fibre, epsilon, inner, self.bits), None

    def high_energy_step(
        self, F: Family, S: Z2Set, c: Fraction, K: Fraction, L: Fraction
    ) -> FloorOutcome:
        """
        Lower bound for Lambda of a family whose fibres over S carry large additive energy.

        The step runs as follows:
        - verify the hypotheses: K alpha >= f(h) >= K alpha / 2 and
          ||1_{A_h} * 1_{A_h}||^2 >= c f(h)^3 on S, and sup |f^(g)| <= L alpha^2
        - for every h in S, find a dense coset x_h + H_h of A_h (bsg_oracle) and refine
          it until A'_h is epsilon-uniform (uniformize), epsilon = sqrt(c/K)/4
        - split S into S0 = {h : (f * P_{H_h})(h) >= alpha / 2} and S1 and keep the larger
        - on S0, sum the progressions with both ends in x_h + A'_h: an exact floor
        - on S1, regroup the fibres on a common subgroup H' = I_h^perp cut out by large
          coefficients of f, trim them to a common size and pass the resulting delta 1_S
          family to large_l2_drive

        Fibres that the oracle cannot serve are dropped from S and recorded; the floor
        stays sound because every term of Lambda is non-negative.
        """
        c, K, L = Fraction(c), Fraction(K), Fraction(L)
        m = F.ambient_m
        if S.ambient_m != m:
            raise ValueError("S must live in the index group of the family.")
        if not S:
            self._event("high_energy_vacuous")
            return FloorOutcome(Fraction(0), "high_energy_vacuous")
        alpha = F.density
        if alpha == 0:
            raise ValueError("high_energy_step needs a family of positive density.")
        if c <= 0 or K <= 0 or L <= 0:
            raise ValueError("c, K and L must be positive.")
        f = F.density_values()
        for h in S.members:
            if not K * alpha / 2 <= f[h] <= K * alpha:
                raise ValueError(
                    f"Hypothesis K alpha >= f(h) >= K alpha / 2 fails at h = {format_z2(h, m)}."
                )
            if energy(F.fibre(h)) < c * f[h] ** 3:
                raise ValueError(f"Energy hypothesis fails at h = {format_z2(h, m)}.")
        diag = diagnostics(F)
        if diag.sup_f_hat > L * alpha**2:
            raise ValueError(f"sup |f^(g)| = {diag.sup_f_hat} exceeds L alpha^2 = {L * alpha**2}.")

        epsilon = self._epsilon(c, K)
        hs = list(S.members)
        with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
            outcomes = list(pool.map(lambda h: self._regularize_fibre(F.fibre(h), c, epsilon), hs))

        sizes = F.sizes
        served: List[_FibreRegularity] = []
        excluded: Dict[str, str] = {}
        for h, (result, reason) in zip(hs, outcomes):
            if result is None:
                excluded[format_z2(h, m)] = reason
                continue
            coset = sizes[np.bitwise_xor(result.subgroup.members(), h)]
            served.append(
                _FibreRegularity(
                    h,
                    result,
                    Fraction(int(coset.sum()), result.subgroup.size * F.group_order),
                    Fraction(int(coset.max()), F.group_order),
                )
            )
        if excluded:
            self._event("high_energy_excluded", fibres=excluded)
        if not served:
            return FloorOutcome(Fraction(0), "high_energy_excluded", {"excluded": excluded})

        s0 = [r for r in served if r.mean_on_coset >= alpha / 2]
        s1 = [r for r in served if r.mean_on_coset < alpha / 2]
        self._event(
            "high_energy_partition",
            epsilon=epsilon,
            c=c,
            K=K,
            L=L,
            served=len(served),
            s0=len(s0),
            s1=len(s1),
            fibres={
                format_z2(r.h, m): {
                    "dimension": r.result.subgroup.dimension,
                    "shift": format_z2(r.result.shift, m),
                    "local_density": r.result.local_density,
                    "mean_on_coset": r.mean_on_coset,
                }
                for r in served
            },
        )
        if len(s0) >= len(s1):
            return self._high_energy_s0(F, s0, c, K, epsilon)
        return self._high_energy_s1(F, s1, L)

    def _high_energy_s0(
        self, F: Family, s0: List[_FibreRegularity], c: Fraction, K: Fraction, epsilon: Fraction
    ) -> FloorOutcome:
        m = F.ambient_m
        alpha = F.density
        sizes = F.sizes
        raw = 0
        stated = Fraction(0)
        flagged = []
        for r in s0:
            u = np.array(r.result.members_in_ambient(), dtype=np.int64)
            term_raw = int(sizes[u[:, None] ^ u[None, :] ^ r.h].sum())
            raw += term_raw
            # |H|^{-2} sum_{u, u'} f(u + u' + h) against P(H_h)^2 P(A'_h)^2 (f * P_{H_h})(h) / 2
            term = Fraction(term_raw, 8**m)
            bound = r.result.subgroup.density**2 * r.result.local_density**2 * r.mean_on_coset / 2
            stated += bound
            if term < bound:
                guaranteed = (
                    r.result.local_density >= c / 2
                    and r.result.is_uniform(epsilon)
                    and r.sup_on_coset <= K * alpha
                )
                state = {"h": format_z2(r.h, m), "term": term, "bound": bound}
                if guaranteed:
                    raise TheoremFalsificationError("Pointwise high-energy bound failed.", state)
                flagged.append(format_z2(r.h, m))
        floor = Fraction(raw, 16**m)
        stated /= F.group_order
        self._event("high_energy_s0", floor=floor, stated_bound=stated, flagged=flagged)
        return FloorOutcome(floor, "high_energy_s0", {"stated_bound": stated, "flagged": flagged})

    def _high_energy_s1(self, F: Family, s1: List[_FibreRegularity], L: Fraction) -> FloorOutcome:
        m = F.ambient_m
        alpha = F.density
        coefficients = [abs(v) for v in wht(density_function(F)).coeffs()]
        ratio = 1 / (4 * L * alpha)
        d = floor_log2(ratio) if ratio >= 1 else 0

        regrouped: Dict[Subgroup2, List[_FibreRegularity]] = {}
        spectrum_sizes = {}
        for r in s1:
            threshold = r.result.subgroup.density * alpha / 4
            dual = Subgroup2.from_basis(m, r.result.subgroup.annihilator).members().tolist()
            large = sorted(g for g in dual if g and coefficients[g] >= threshold)
            spectrum_sizes[format_z2(r.h, m)] = len(large)
            independent: List[int] = []
            for g in large:
                if len(independent) == d:
                    break
                if len(gf2_rref(independent + [g])) > len(independent):
                    independent.append(g)
            if len(independent) < d:
                raise TheoremFalsificationError(
                    "Large spectrum inside H_h^perp has too few independent elements.",
                    {"h": format_z2(r.h, m), "d": d, "found": len(independent), "large": len(large)},
                )
            regrouped.setdefault(Subgroup2.from_annihilator(m, independent), []).append(r)

        H_prime, group = min(regrouped.items(), key=lambda item: (-len(item[1]), item[0].sort_key()))
        t = min(r.result.restricted.size for r in group)
        delta = Fraction(t, H_prime.size)

        counts: Dict[int, int] = {}
        for r in group:
            s = H_prime.syndrome(r.h)
            counts[s] = counts.get(s, 0) + 1
        reps = H_prime.coset_representatives()
        best = min(counts, key=lambda s: (-counts[s], reps[s]))
        h1 = reps[best]

        pieces = {}
        shifts = {}
        for r in group:
            if H_prime.syndrome(r.h) != best:
                continue
            pieces[r.h] = np.array(r.result.members_in_ambient()[:t], dtype=np.int64)
            shifts[r.h] = r.result.shift
        new_family = relabel_fibres(F, H_prime, h1, pieces)
        certificate = IncrementCertificate(
            kind="energy_regroup",
            subgroup=H_prime,
            shift_table=shifts,
            h1=h1,
            before=FamilySummary.of(F),
            after=FamilySummary.of(new_family),
            claimed_gain=None,
            extras={"d": d, "delta": delta, "group": len(group), "relabelled": len(pieces)},
        )
        certificate.verify(F, new_family)
        self._event(
            "high_energy_s1",
            certificate=certificate.to_dict(),
            d=d,
            spectrum_sizes=spectrum_sizes,
            subgroups=len(regrouped),
            group=len(group),
            delta=delta,
        )
        drive = large_l2_drive(new_family, self.log, self.bits)
        chain = compose_chain([certificate] + drive.certificates, FamilySummary.of(F))
        floor = chain.lift(drive.terminal.lambda_floor)
        self._event("high_energy_floor", floor=floor, steps=drive.steps, step_bound=drive.step_bound)
        return FloorOutcome(floor, "high_energy_s1", {"d": d, "delta": delta, "drive_steps": drive.steps})

    # ------------------------------------------------------------------
    # Small mean square
    # ------------------------------------------------------------------

    def small_ms_step(self, F: Family, L: Fraction) -> Union[FloorOutcome, IncrementOutcome]:
        """
        Either a certified floor for Lambda(F) or a density increment of at least
        L alpha^2 / 4K.

        The step runs as follows:
        - drop the fibres with f >= 4 K alpha and with f <= alpha / 4, and split the rest
          into levels K_i alpha / 2 <= f <= K_i alpha with K_i = 2^{i-1}
        - keep the level S_i maximizing K_i P(S_i)
        - increment when a second moment E 1_{S_i} |1_{A_h}^(g)|^2 exceeds L alpha^3, a
          first moment exceeds L alpha^2 / 4K, or |f^(g)| exceeds L alpha^2 / 4K
        - otherwise compare the progression count over S_i with alpha E 1_{S_i} f^2 / 2
        - when the count is smaller, locate the characters carrying the deficit, move to
          the fibres of S_i with at least half the average energy and run
          high_energy_step there
        """
        L = Fraction(L)
        alpha = F.density
        if alpha == 0:
            raise ValueError("small_ms_step needs a family of positive density.")
        m = F.ambient_m
        N = F.group_order
        diag = diagnostics(F)
        K = diag.K
        if L < max(K, Fraction(2)):
            raise ValueError(f"L = {L} must be at least max(K, 2) with K = {K}.")
        threshold = self.cfg.threshold
        f = F.density_values()

        large = [h for h in range(N) if f[h] >= threshold("large_fibre") * K * alpha]
        small = [h for h in range(N) if f[h] <= threshold("small_fibre") * alpha]
        dropped = set(large) | set(small)
        middle = [h for h in range(N) if h not in dropped]
        middle_mass = sum((f[h] for h in middle), Fraction(0)) / N
        if middle_mass < alpha / 2:
            self._flag(
                "middle_mass",
                "Fibres of moderate density carry less than alpha / 2.",
                {"middle_mass": middle_mass, "alpha": alpha},
            )

        # 2^(top-1) alpha reaches the large-fibre cutoff 4 K alpha
        top = ceil_log2(K) + 3
        levels = []
        for i in range(top + 1):
            K_i = Fraction(2) ** (i - 1)
            levels.append([h for h in middle if K_i * alpha / 2 <= f[h] <= K_i * alpha])
        scores = [Fraction(2) ** (i - 1) * Fraction(len(level), N) for i, level in enumerate(levels)]
        level = max(range(len(scores)), key=lambda i: (scores[i], -i))
        S_i = levels[level]
        K_i = Fraction(2) ** (level - 1)
        self._event(
            "small_ms_levels",
            alpha=alpha,
            K=K,
            L=L,
            large=len(large),
            small=len(small),
            middle_mass=middle_mass,
            level_densities=[Fraction(len(lv), N) for lv in levels],
            level=level,
            K_i=K_i,
        )
        if not S_i:
            self._event("small_ms_empty")
            return FloorOutcome(Fraction(0), "small_ms_empty")

        W = _integer_rows(fwht(F.fibre_matrix, axis=1))
        second = [Fraction(sum(W[h][g] ** 2 for h in S_i), N**3) for g in range(N)]
        first = [Fraction(sum(abs(W[h][g]) for h in S_i), N**2) for g in range(N)]
        fourth = [Fraction(sum(W[h][g] ** 4 for h in S_i), N**5) for g in range(N)]
        f_hat = wht(density_function(F)).coeffs()
        required = L * alpha**2 / (4 * K)

        if m >= 1:
            g2 = _argmax_nontrivial(second)
            if second[g2] > threshold("second_moment") * L * alpha**3:
                return self._small_ms_increment(F, g2, "small_ms_second_moment", required, fibre_increment)
            g1 = _argmax_nontrivial(first)
            if first[g1] > threshold("first_moment") * L * alpha**2 / K:
                return self._small_ms_increment(F, g1, "small_ms_first_moment", required, fibre_increment)
            if diag.sup_f_hat > threshold("first_moment") * L * alpha**2 / K:
                return self._small_ms_increment(
                    F, diag.witness, "small_ms_density_spectrum", required, density_fn_increment
                )

        # E_h 1_{S_i}(h) <tau_h(1_{A_h} * 1_{A_h}), f>, counted and through the spectrum
        sizes = F.sizes
        q_raw = 0
        for h in S_i:
            a = F.fibre(h).as_array()
            q_raw += int(sizes[a[:, None] ^ a[None, :] ^ h].sum())
        Q = Fraction(q_raw, 16**m)
        signs = [[1 - 2 * ((g & h).bit_count() & 1) for g in range(N)] for h in range(N)]
        twisted = [Fraction(sum(W[h][g] ** 2 * signs[h][g] for h in S_i), N**3) for g in range(N)]
        if sum((t * c for t, c in zip(twisted, f_hat)), Fraction(0)) != Q:
            raise InternalConsistencyError("Direct and spectral values of the restricted count differ.")
        mass = sum((f[h] for h in S_i), Fraction(0)) / N
        mass_sq = sum((f[h] ** 2 for h in S_i), Fraction(0)) / N
        if Q >= alpha * mass_sq / 2:
            self._event("small_ms_direct", floor=Q, target=alpha * mass_sq / 2)
            return FloorOutcome(Q, "small_ms_direct", {"target": alpha * mass_sq / 2})

        return self._small_ms_spectrum(F, S_i, K, K_i, L, Q, mass, mass_sq, second, first, fourth, f_hat)

    def _small_ms_increment(self, F, gamma, branch, required, step) -> IncrementOutcome:
        new_family, certificate = step(F, gamma)
        certificate.verify(F, new_family)
        if certificate.claimed_gain < required:
            self._flag(
                branch,
                "Increment gain is below L alpha^2 / 4K.",
                {"gain": certificate.claimed_gain, "required": required},
            )
        self._event(
            branch,
            certificate=certificate.to_dict(),
            gamma=format_z2(gamma, F.ambient_m),
            gain=certificate.claimed_gain,
            required=required,
        )
        return IncrementOutcome(new_family, certificate, branch, required)

    def _small_ms_spectrum(self, F, S_i, K, K_i, L, Q, mass, mass_sq, second, first, fourth, f_hat):
        """
        Split the spectrum above tau into dyadic bands and pass the most energetic
        fibres to the high-energy step.

        Band j holds the characters with 2^j tau <= second(g) < 2^(j+1) tau, counted
        upward from tau, and the `small_ms_spectrum` event records it as `band`.
        Counting downward from the largest band instead gives index `top - band`.
        """
        m = F.ambient_m
        N = F.group_order
        alpha = F.density
        tau = mass_sq**2 / (16 * K * mass)
        spectrum = [g for g in range(1, N) if second[g] >= tau]
        weighted = sum((second[g] * abs(f_hat[g]) for g in range(1, N)), Fraction(0))
        outside = sum((second[g] * abs(f_hat[g]) for g in range(1, N) if second[g] < tau), Fraction(0))
        state = {"Q": Q, "tau": tau, "weighted": weighted, "outside": outside, "alpha": alpha}
        if weighted < alpha * mass_sq - Q:
            raise InternalConsistencyError("Nontrivial spectrum does not account for the missing count.")
        # Cauchy-Schwarz with sum_g second(g) = E 1_{S_i} f and sum_g f^(g)^2 = K alpha^2
        if outside > alpha * mass_sq / 4:
            raise TheoremFalsificationError("Spectrum below tau carries more than alpha E 1 f^2 / 4.", state)
        inside = weighted - outside
        if inside < alpha * mass_sq / 4:
            raise TheoremFalsificationError("Large spectrum carries less than alpha E 1 f^2 / 4.", state)

        top = floor_log2(max(second[g] for g in spectrum) / tau)
        bands = [[g for g in spectrum if 2**j * tau <= second[g] < 2 ** (j + 1) * tau] for j in range(top + 1)]
        band_sums = [sum((second[g] * abs(f_hat[g]) for g in band), Fraction(0)) for band in bands]
        j = max(range(len(bands)), key=lambda k: (band_sums[k], -k))
        if band_sums[j] * len(bands) < inside:
            raise InternalConsistencyError("Selected band is below the band average.")
        for g in bands[j]:
            if second[g] ** 3 > first[g] ** 2 * fourth[g]:
                raise InternalConsistencyError(f"Moment convexity fails at {format_z2(g, m)}.")
        self._event(
            "small_ms_spectrum",
            Q=Q,
            tau=tau,
            spectrum=len(spectrum),
            bands=[len(b) for b in bands],
            top=top,
            band=j,
            band_sum=band_sums[j],
        )

        with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
            energies = dict(zip(S_i, pool.map(lambda h: energy(F.fibre(h)), S_i)))
        average = sum(energies.values(), Fraction(0)) / N
        energetic = [h for h in S_i if energies[h] >= average / 2]
        f = F.density_values()
        c = min(energies[h] / f[h] ** 3 for h in energetic)
        self._event(
            "small_ms_energy",
            average=average,
            energetic_density=Fraction(len(energetic), N),
            c=c,
        )
        return self.high_energy_step(F, Z2Set(m, energetic), c, K_i, L)

    # ------------------------------------------------------------------
    # Drivers
    # ------------------------------------------------------------------

    def solve_L(self, alpha: Fraction) -> Fraction:
        """
        Grid solution of C_S L^3 ln(L)^2 = ln(1/alpha) / 2, with the left side bounded
        above and the right side below so the result never overshoots.
        """
        target = ln_lower(1 / alpha, self.bits) / 2
        C_S = self.cfg.C_S
        return solve_increasing(
            lambda L: C_S * L**3 * ln_upper(L, self.bits) ** 2,
            target,
            self.bits,
            start=Fraction(1),
            verbose=self.cfg.verbose,
        )

    def weighted_driver(self, A: Z4Set) -> DriverResult:
        """
        Main iteration on the fibre family of A. Each round computes K_i and L_i; a
        small L_i (relative to K_i) sends the family through dyadic_select and
        large_l2_drive, otherwise small_ms_step either returns a floor or increments the
        density and the loop continues on the new family.
        """
        alpha0 = A.density
        if alpha0 == 0:
            raise ValueError("weighted_driver needs a set of positive density.")
        F = fibre_decompose(A)
        initial = FamilySummary.of(F)
        self.log.start_event("weighted_start", n=A.ambient_n, alpha=alpha0, C_S=self.cfg.C_S)
        certificates: List[IncrementCertificate] = []
        densities = [alpha0]
        local_floor = Fraction(0)
        terminal = "max_steps"
        completed = False
        for step in range(self.cfg.max_steps):
            alpha = F.density
            if alpha == 1:
                local_floor, terminal, completed = Fraction(1), "saturated", True
                self._event("saturated", m=F.ambient_m)
                break
            K = diagnostics(F).K
            L = self.solve_L(alpha)
            route_bound = 2 + K**2 / (1 + ln_upper(K, self.bits)) ** 2
            small_ms = L > route_bound and L >= max(K, Fraction(2))
            self._event(
                "weighted_round",
                round=step,
                m=F.ambient_m,
                alpha=alpha,
                K=K,
                L=L,
                route_bound=route_bound,
                route="small_ms" if small_ms else "dyadic",
            )
            if small_ms:
                outcome = self.small_ms_step(F, L)
                if isinstance(outcome, IncrementOutcome):
                    new_alpha = outcome.family.density
                    if new_alpha <= alpha:
                        raise TheoremFalsificationError(
                            "Increment branch did not raise the density.",
                            {"alpha": alpha, "alpha_after": new_alpha},
                        )
                    if new_alpha < alpha + outcome.required_gain:
                        self._flag(
                            "density_law",
                            "Density rose by less than L alpha^2 / 4K.",
                            {"alpha": alpha, "alpha_after": new_alpha, "required": outcome.required_gain},
                        )
                    certificates.append(outcome.certificate)
                    F = outcome.family
                    densities.append(new_alpha)
                    continue
                local_floor, terminal, completed = outcome.floor, outcome.branch, True
                break
            selection = dyadic_select(F, event_logger=self.log, verbose=self.cfg.verbose)
            self._event(
                "dyadic_selection",
                certificate=selection.certificate.to_dict(),
                **selection.to_dict(),
            )
            drive = large_l2_drive(selection.subfamily, self.log, self.bits)
            local_floor, terminal, completed = drive.certified_floor, "large_l2", True
            break
        else:
            self._event("max_steps_reached", max_steps=self.cfg.max_steps)

        chain = compose_chain(certificates, initial)
        floor = chain.lift(local_floor) if completed else Fraction(0)
        result = DriverResult(
            driver="weighted",
            certified_floor=floor,
            local_floor=local_floor,
            terminal_branch=terminal,
            steps=len(certificates),
            codimension=chain.codimension,
            densities=densities,
            completed=completed,
            chain=chain,
        )
        self._event("weighted_floor", **result.to_dict())
        return result

    def _kernel_step(self, A: Z4Set, r: int) -> Tuple[Z4Set, dict]:
        """Densest coset of ker(x -> r.x), identified with Z_4^{k-1} by dropping coordinate j."""
        k = A.ambient_n
        rd = digits4(r, k)
        j = next(i for i, d in enumerate(rd) if d % 2)
        rows = np.array(A.digit_rows(), dtype=np.int64).reshape(len(A), k)
        values = (rows @ np.array(rd, dtype=np.int64)) % 4
        counts = np.bincount(values, minlength=4)
        v = int(max(range(4), key=lambda u: (int(counts[u]), -u)))
        chosen = rows[values == v].copy()
        # r_j is its own inverse mod 4, so x - v r_j e_j lies in the kernel
        chosen[:, j] = (chosen[:, j] - v * rd[j]) % 4
        kept = np.delete(chosen, j, axis=1)
        return Z4Set.from_digits(k - 1, kept.tolist()), {"coordinate": j, "coset": v}

    def rml_driver(self, A: Z4Set) -> DriverResult:
        """
        Classical iteration on sets in Z_4^k: stop once Lambda >= alpha^3 / 2, otherwise
        the largest nontrivial coefficient (|1_A^(r)|^2 > alpha^4 / 4) sends A to a set
        in Z_4^{k-1} of density alpha + Omega(alpha^2). A character of order 2 is a
        coefficient of the fibre density function and is handled by
        density_fn_increment; one of order 4 passes to the densest coset of its kernel.
        Lev positivity is checked at every visited set.
        """
        alpha0 = A.density
        if alpha0 == 0:
            raise ValueError("rml_driver needs a set of positive density.")
        self.log.start_event("rml_start", n=A.ambient_n, alpha=alpha0)
        current = A
        densities = [alpha0]
        steps = 0
        local_floor = Fraction(0)
        terminal = "max_steps"
        completed = False
        report = lambda_fourier(current)
        while steps < self.cfg.max_steps:
            k = current.ambient_n
            alpha = current.density
            lev = lev_positivity(current)
            state = {"k": k, "alpha": alpha, "lambda": report.lambda_value, "lev": lev.lhs}
            if not lev.holds:
                raise TheoremFalsificationError("Lev positivity failed.", state)
            if report.lambda_value >= alpha**3 / 2:
                local_floor, terminal, completed = alpha**3 / 2, "rml_floor", True
                self._event("rml_floor", k=k, alpha=alpha, lambda_value=report.lambda_value, lev=lev.lhs)
                break
            r, sq = dft4(current).sup_nontrivial()
            state.update({"witness": format_z4(r, k), "sq_coefficient": sq})
            if sq <= alpha**4 / 4:
                raise TheoremFalsificationError(
                    "Lambda is below alpha^3 / 2 and no coefficient exceeds alpha^2 / 2.", state
                )
            certificate = None
            if in_image_of_two(r, k):
                F = fibre_decompose(current)
                new_family, cert = density_fn_increment(F, halved_part(r, k))
                cert.verify(F, new_family)
                if cert.claimed_gain**2 != sq or cert.before.raw_count != report.raw_count:
                    raise InternalConsistencyError("Order-2 coefficient differs from the density spectrum.")
                new_set = new_family.to_z4set()
                kind, extras, certificate = "density_fn", {}, cert.to_dict()
            else:
                new_set, extras = self._kernel_step(current, r)
                kind = "kernel"
                gain = new_set.density - alpha
                if gain < 0 or 9 * gain**2 < 4 * sq:
                    raise TheoremFalsificationError(
                        "Kernel coset gained less than (2/3)|1_A^(r)|.", {**state, "alpha_after": new_set.density}
                    )
            new_report = lambda_fourier(new_set)
            if new_report.raw_count > report.raw_count:
                raise TheoremFalsificationError(
                    "Progression count grew along an increment.",
                    {**state, "raw_before": report.raw_count, "raw_after": new_report.raw_count},
                )
            self._event(
                "rml_step",
                certificate=certificate,
                k=k,
                alpha=alpha,
                lambda_value=report.lambda_value,
                lev=lev.lhs,
                witness=format_z4(r, k),
                sq_coefficient=sq,
                kind=kind,
                alpha_after=new_set.density,
                raw_before=report.raw_count,
                raw_after=new_report.raw_count,
                **extras,
            )
            current, report = new_set, new_report
            densities.append(current.density)
            steps += 1
        else:
            self._event("max_steps_reached", max_steps=self.cfg.max_steps)

        floor = local_floor / 16**steps if completed else Fraction(0)
        result = DriverResult(
            driver="rml",
            certified_floor=floor,
            local_floor=local_floor,
            terminal_branch=terminal,
            steps=steps,
            codimension=steps,
            densities=densities,
            completed=completed,
        )
        self._event("rml_result", **result.to_dict())
        return result

    def run(self, driver: str, A: Z4Set) -> DriverResult:
        if driver == "rml":
            return self.rml_driver(A)
        if driver == "weighted":
            return self.weighted_driver(A)
        raise ValueError(f"Unknown driver '{driver}'; choose from {', '.join(DRIVERS)}.")


def trace_header(driver: str, A: Z4Set, cfg: EngineConfig) -> dict:
    config = cfg.to_dict(include_events=False)
    # the thread count never changes the events
    config.pop("workers")
    return {"driver": driver, "input": format_set(A), "config": config}


def run_driver(driver: str, A: Z4Set, cfg: EngineConfig = None) -> Tuple[DriverResult, List[str]]:
    """Run a driver and serialize its events as trace lines."""
    cfg = cfg or EngineConfig()
    result = DensityIncrementEngine(cfg).run(driver, A)
    return result, trace_lines(trace_header(driver, A, cfg), cfg.event_logger)


def replay_trace(text: str) -> ReplayReport:
    """
    Re-run the driver named in a trace on its recorded input and configuration and
    compare every event. Raises TraceReplayError naming the first step that differs,
    when a stored certificate fails its own checks, or when the digest is wrong.
    """
    header, events, digest, covered = parse_trace(text)
    driver = header.get("driver")
    if driver not in DRIVERS:
        raise TraceReplayError(f"Trace names unknown driver {driver!r}.")
    A = parse_set_text(str(header.get("input", "")))
    if not isinstance(A, Z4Set):
        raise TraceReplayError("Trace input is not a set in Z_4^n.")
    cfg = EngineConfig.from_dict(header.get("config") or {})
    result = DensityIncrementEngine(cfg).run(driver, A)

    fresh = [canonical_json(e.to_dict()) for e in cfg.event_logger.get_events()]
    recorded = [canonical_json(e.to_dict()) for e in events]
    for i, (a, b) in enumerate(zip(recorded, fresh)):
        if a != b:
            raise TraceReplayError(f"step {events[i].step}: recorded '{events[i].branch}' event differs from replay")
    if len(recorded) != len(fresh):
        raise TraceReplayError(
            f"step {min(len(recorded), len(fresh))}: trace has {len(recorded)} events, replay produced {len(fresh)}"
        )
    for event in events:
        if event.certificate is None:
            continue
        failures = IncrementCertificate.from_dict(event.certificate).check()
        if failures:
            raise TraceReplayError(f"step {event.step}: certificate fails: " + "; ".join(failures))
    if trace_digest(covered) != digest:
        raise TraceReplayError("trace digest does not match its contents")
    return ReplayReport(driver, len(events), result.certified_floor)


def rml_driver(A: Z4Set, cfg: EngineConfig = None) -> DriverResult:
    return DensityIncrementEngine(cfg).rml_driver(A)


def weighted_driver(A: Z4Set, cfg: EngineConfig = None) -> DriverResult:
    return DensityIncrementEngine(cfg).weighted_driver(A)


def high_energy_step(F: Family, S: Z2Set, c, K, L, cfg: EngineConfig = None) -> FloorOutcome:
    return DensityIncrementEngine(cfg).high_energy_step(F, S, c, K, L)


def small_ms_step(F: Family, L, cfg: EngineConfig = None) -> Union[FloorOutcome, IncrementOutcome]:
    return DensityIncrementEngine(cfg).small_ms_step(F, L)
