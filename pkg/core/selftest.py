"""
Acceptance Self-Test
====================

Each check returns (passed, detail). Quick mode shrinks the Monte Carlo run;
everything else is exact and runs at full size.
"""

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Tuple

from .asymptotics import (
    box_zd,
    dirichlet_lambda1,
    log_gamma_from_volume,
    power_volume,
    segment,
    witt_degree,
    wreath_volume,
)
from .exclusive import (
    ExclusiveCandidate,
    check_exclusive,
    magnus_group,
    return_expression_check,
    tm_criterion,
)
from .fox import flow_of_word, fox_derivatives, magnus_embed, stretch_flow, stretch_word
from .groups import (
    evaluate_word,
    make_abelian_group,
    make_bs,
    make_free_solvable,
    make_lamplighter,
)
from .measures import (
    MeasureSpec,
    abelianization_map,
    convolve_power,
    law_measure,
    lazy_law,
    lift_map,
    make_lazy_srw,
    make_phi_lower_measure,
    make_pm_one_law,
    mod_map,
    pushforward,
    sws,
)
from .utils import get_logger
from .walks import mc_return_probability
from .words import commutator, conjugate, generator_word, parse_word, random_word, word_multiply

logger = get_logger(__name__)

Check = Callable[[bool, int], Tuple[bool, str]]


@dataclass
class SelfTestResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def to_json(self):
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "seconds": round(self.seconds, 3)}


def _random_length(rng: random.Random, top: int) -> int:
    return rng.randint(0, top)


def check_magnus_homomorphism(full: bool, seed: int) -> Tuple[bool, str]:
    rng = random.Random(seed)
    groups = [make_abelian_group(2), make_abelian_group(3), make_lamplighter(2), make_bs(2)]
    pairs = 0
    for _ in range(250):
        for group in groups:
            u = random_word(group.rank, _random_length(rng, 30), rng)
            v = random_word(group.rank, _random_length(rng, 30), rng)
            if magnus_embed(word_multiply(u, v), group) != magnus_embed(u, group) * magnus_embed(v, group):
                return False, f"ψ(uv) ≠ ψ(u)ψ(v) on {group.name} for u={u}, v={v}"
            pairs += 1
    return True, f"{pairs} pairs"


def check_kernel(full: bool, seed: int) -> Tuple[bool, str]:
    rng = random.Random(seed)
    s22, s32 = make_free_solvable(2, 2), make_free_solvable(3, 2)
    w = parse_word("[[s1,s2], s1[s1,s2]s1^-1]", 2)
    if not s22.is_identity(evaluate_word(s22, w)):
        return False, "w is not trivial in S_{2,2}"
    if s32.is_identity(evaluate_word(s32, w)):
        return False, "w is trivial in S_{3,2}"
    base = commutator(generator_word(2, 1), generator_word(2, 2))
    for k in range(200):
        a = conjugate(base, random_word(2, rng.randint(0, 8), rng))
        b = conjugate(base, random_word(2, rng.randint(0, 8), rng))
        x = conjugate(commutator(a, b), random_word(2, rng.randint(0, 8), rng))
        if not s22.is_identity(evaluate_word(s22, x)):
            return False, f"[N,N] element {x} is not trivial in S_{{2,2}}"
    return True, "201 words"


def check_flow_fox(full: bool, seed: int) -> Tuple[bool, str]:
    rng = random.Random(seed)
    groups = [make_abelian_group(2), make_lamplighter(2), make_bs(2)]
    for k in range(500):
        group = groups[k % len(groups)]
        w = random_word(group.rank, rng.randint(0, 30), rng)
        flow = flow_of_word(w, group)
        derivatives = fox_derivatives(w, group)
        from_fox = {(x, i): c for i, d in enumerate(derivatives, 1) for x, c in d.terms.items()}
        if from_fox != flow.edges:
            return False, f"flow and Fox coefficients differ for {w} on {group.name}"
    return True, "500 words"


def check_lower_identity(full: bool, seed: int) -> Tuple[bool, str]:
    for base in (make_abelian_group(2), make_lamplighter(2, marking="sw")):
        mu = make_lazy_srw(magnus_group(base))
        phi = make_phi_lower_measure([lazy_law()], base)
        for n in range(1, 7):
            left = convolve_power(mu, n).at_identity()
            right = convolve_power(phi, n).at_identity()
            if left != right:
                return False, f"{base.name}, n={n}: {left} ≠ {right}"
            if n == 2 and left != Fraction(5, 16):
                return False, f"{base.name}: n=2 value is {left}, expected 5/16"
    return True, "n = 1..6 on zr:2 and llsw:2"


def check_upper_inequality(full: bool, seed: int) -> Tuple[bool, str]:
    base = make_abelian_group(2)
    quarter = Fraction(1, 4)
    phi = {generator_word(2, i, m): quarter for i in (1, 2) for m in (2, -2)}
    rho = parse_word("[s1,s2]", 2)
    rows = return_expression_check(base, phi, rho, 4)
    for row in rows:
        if not row.holds:
            return False, f"n={row.n}: {row.walk} > {row.projected}"
    return True, "; ".join(f"n={r.n}: {r.walk} <= {r.projected}" for r in rows)


def check_exclusive_pairs(full: bool, seed: int) -> Tuple[bool, str]:
    z2 = make_abelian_group(2)
    rho = parse_word("[s1,s2]", 2)
    gammas = [generator_word(2, 1, 2), generator_word(2, 2, 2)]
    good = check_exclusive(ExclusiveCandidate(z2, gammas, rho, 1, bar="sublattice:2,2", m=(2, 2)))
    if good.exclusive is not True:
        return False, f"exclusive candidate rejected: {[c.holds for c in good.conditions]}"
    full_gammas = [generator_word(2, 1), generator_word(2, 2)]
    bad = check_exclusive(ExclusiveCandidate(z2, full_gammas, rho, 0, bar="full", radius=2))
    two = bad.conditions[1]
    if two.holds is not False or two.witness != [0, 1]:
        return False, f"full-group candidate: condition 2 gave {two.holds} with witness {two.witness}"
    if not tm_criterion(generator_word(2, 1), (2, 1), (2, 2)):
        return False, "T_m criterion failed for u=s1, s=s2, m=(2,2)"
    return True, "all three cases"


def check_pushforward(full: bool, seed: int) -> Tuple[bool, str]:
    eta = law_measure(make_pm_one_law())
    z1 = make_abelian_group(1)
    cases = [(mod_map(z1, 2), law_measure(lazy_law(), z1))]
    s22 = make_free_solvable(2, 2)
    cases.append((abelianization_map(s22), make_lazy_srw(s22)))
    for theta, mu in cases:
        upstairs = sws(eta, mu)
        downstairs = sws(eta, pushforward(mu, theta))
        lift = lift_map(theta, eta.group)
        for n in range(1, 4):
            dist = convolve_power(upstairs, n)
            pushed = pushforward(MeasureSpec(upstairs.group, dist.masses, True, "q^n"), lift)
            direct = convolve_power(downstairs, n)
            if pushed.atoms != direct.masses:
                return False, f"{theta.name}: pushforward differs at n={n}"
    return True, "mod 2 on ℤ and abelianization of S_{2,2}, n = 1..3"


def check_stretch(full: bool, seed: int) -> Tuple[bool, str]:
    rng = random.Random(seed)
    for group in (make_abelian_group(2), make_free_solvable(2, 2)):
        for _ in range(100):
            w = random_word(2, rng.randint(0, 12), rng)
            if flow_of_word(stretch_word(w, 2), group).edges != stretch_flow(flow_of_word(w, group), 2).edges:
                return False, f"t_2 flow mismatch for {w} on {group.name}"
    return True, "100 words on zr:2 and sdr:2,2"


def check_monte_carlo(full: bool, seed: int) -> Tuple[bool, str]:
    trials = 1_000_000 if full else 100_000
    spec = make_lazy_srw(make_free_solvable(2, 2))
    exact = float(convolve_power(spec, 8).at_identity())
    one = mc_return_probability(spec, 8, trials, seed, threads=1)
    two = mc_return_probability(spec, 8, trials, seed, threads=2)
    if one.hits != two.hits:
        return False, f"hits differ across worker counts: {one.hits} vs {two.hits}"
    low, high = one.three_sigma
    if not low <= exact <= high:
        return False, f"exact {exact:.6f} outside 3σ band [{low:.6f}, {high:.6f}]"
    return True, f"estimate {one.estimate:.6f}, exact {exact:.6f}, {trials} trials"


def check_gamma(full: bool, seed: int) -> Tuple[bool, str]:
    line = power_volume(1)
    for t in (10, 1e3, 1e5):
        got = math.exp(log_gamma_from_volume(line, t))
        want = math.sqrt(2 * t + 1)
        if abs(got / want - 1) > 1e-4:
            return False, f"V(t)=t, t={t:g}: γ={got}, expected {want}"
    slopes = []
    t1, t2 = 1e3, 1e6
    for D in (1, 2, 3):
        W = wreath_volume(power_volume(D))
        u1, u2 = log_gamma_from_volume(W, t1), log_gamma_from_volume(W, t2)
        correction = 2 / (D + 2) * (math.log(math.log(t2)) - math.log(math.log(t1)))
        slope = (math.log(u2) - math.log(u1) - correction) / (math.log(t2) - math.log(t1))
        slopes.append(slope)
        if abs(slope - D / (D + 2)) > 0.05:
            return False, f"D={D}: slope {slope:.4f}, expected {D / (D + 2):.4f}"
    return True, "slopes " + ", ".join(f"{s:.3f}" for s in slopes)


def check_witt(full: bool, seed: int) -> Tuple[bool, str]:
    expected = {(2, 1): 2, (2, 2): 4, (3, 2): 9}
    for (r, c), want in expected.items():
        got = witt_degree(r, c)
        if got != want:
            return False, f"D({r},{c}) = {got}, expected {want}"
    return True, "D(2,1)=2, D(2,2)=4, D(3,2)=9"


def check_dirichlet(full: bool, seed: int) -> Tuple[bool, str]:
    z1 = make_abelian_group(1)
    lazy = make_lazy_srw(z1)
    for k in (1, 4, 16):
        got = dirichlet_lambda1(lazy, segment(k)).lambda1
        want = (1 - math.cos(math.pi / (2 * k + 2))) / 2
        if abs(got - want) > 1e-6:
            return False, f"segment k={k}: λ₁={got}, expected {want}"
    z2 = make_abelian_group(2)
    lazy2 = make_lazy_srw(z2)
    scaled = [k * k * dirichlet_lambda1(lazy2, box_zd(k, 2)).lambda1 for k in (4, 8, 16, 32)]
    if max(scaled) > 2 * min(scaled):
        return False, f"k²λ₁ spread too wide: {scaled}"
    return True, "k²λ₁ = " + ", ".join(f"{v:.3f}" for v in scaled)


CRITERIA: List[Tuple[str, Check]] = [
    ("Magnus homomorphism", check_magnus_homomorphism),
    ("kernel and word problem", check_kernel),
    ("flow equals Fox coefficients", check_flow_fox),
    ("lower-bound measure identity", check_lower_identity),
    ("projected upper bound", check_upper_inequality),
    ("exclusive-pair checker", check_exclusive_pairs),
    ("lifted pushforward", check_pushforward),
    ("stretch of flows", check_stretch),
    ("Monte Carlo against exact", check_monte_carlo),
    ("γ solver", check_gamma),
    ("Witt degree", check_witt),
    ("Dirichlet eigenvalue", check_dirichlet),
]


def run_selftest(full: bool = False, seed: int = 20240601, only: List[int] = None) -> List[SelfTestResult]:
    results = []
    for number, (name, check) in enumerate(CRITERIA, 1):
        if only and number not in only:
            continue
        start = time.perf_counter()
        try:
            passed, detail = check(full, seed)
        except Exception as exc:  # counts as a failure
            logger.debug("criterion %d raised", number, exc_info=True)
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(SelfTestResult(number, name, passed, detail, time.perf_counter() - start))
        logger.info("criterion %d (%s): %s", number, name, "pass" if passed else "FAIL")
    return results
