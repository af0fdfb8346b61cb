"""
Exclusive Pairs
===============

Sufficient conditions for (Γ, ρ) to be an exclusive pair, where Γ ≤ Γ₂ is given by
generator words and ρ ∈ N∖[N,N] is split as ρ = u·s·v around one letter s:

  1. 𝔣_ρ is nonzero on the edge e₀ = (ū, ū·s̄, s);
  2. 𝔣_ρ vanishes on x·e₀ for every x ∈ Γ̄∖{ē};
  3. e₀ lies outside the support of every flow 𝔣_g, g ∈ Γ.

Condition 3 is certified by the T_m criterion when Γ ≤ H_m, and otherwise only refuted
or verified up to a search radius.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from sympy import Matrix

from .fox import Flow, VarthetaForm, flow_of_word, magnus_embed, vartheta_project, vartheta_target
from .groups import (
    Element,
    FullGroup,
    MarkedGroup,
    SubgroupPredicate,
    Sublattice,
    WreathProduct,
    evaluate_word,
    make_abelian_group,
)
from .measures import (
    MeasureSpec,
    Weight,
    convolve,
    convolve_power,
    law_measure,
    make_pm_one_law,
    sws,
)
from .utils import CandidateError, GroupError, RankMismatchError, get_logger
from .words import ReducedWord, generator_word, identity_word, word_inverse, word_multiply

logger = get_logger(__name__)

Letter = Tuple[int, int]


@dataclass
class ExclusiveCandidate:
    """
    `split_at` is the 0-based position of the letter s in ρ.
    `bar` names the subgroup predicate on Γ₁ describing Γ̄.
    `m` (optional) asserts Γ ≤ H_m so the T_m criterion may be used.
    """

    group: MarkedGroup
    gammas: List[ReducedWord]
    rho: ReducedWord
    split_at: int
    bar: str = "full"
    radius: int = 4
    m: Optional[Tuple[int, ...]] = None
    budget: int = 200_000

    @property
    def u(self) -> ReducedWord:
        return self.rho[:self.split_at]

    @property
    def s(self) -> Letter:
        return self.rho[self.split_at]

    @property
    def v(self) -> ReducedWord:
        return self.rho[self.split_at + 1:]


def validate_candidate(c: ExclusiveCandidate) -> Tuple[bool, str]:
    if c.rho.rank != c.group.rank:
        return False, f"ρ has rank {c.rho.rank}, group {c.group.name} has rank {c.group.rank}"
    for w in c.gammas:
        if w.rank != c.group.rank:
            return False, f"Γ generator {w} has rank {w.rank}, expected {c.group.rank}"
    if c.rho.is_identity:
        return False, "ρ is freely trivial, so its flow is zero"
    if not 0 <= c.split_at < len(c.rho):
        return False, f"split position {c.split_at} outside 0..{len(c.rho) - 1}"
    flow = flow_of_word(c.rho, c.group)
    if not c.group.is_identity(flow.end):
        return False, "ρ does not lie in N (its path does not close up)"
    if flow.is_zero():
        return False, "ρ lies in [N,N] (its flow is zero)"
    if c.m is not None and any(k < 1 for k in c.m):
        return False, f"m entries must be >= 1, got {c.m}"
    return True, "candidate valid"


@dataclass
class ConditionVerdict:
    """holds is None when the search ran out of budget."""

    holds: Optional[bool]
    method: str
    witness: Any = None
    detail: str = ""
    bounded_only: bool = False

    def to_json(self):
        return {
            "holds": self.holds,
            "method": self.method,
            "witness": self.witness,
            "detail": self.detail,
            "bounded_only": self.bounded_only,
        }


@dataclass
class CheckReport:
    group: str
    rho: str
    split_at: int
    edge: Any
    conditions: List[ConditionVerdict] = field(default_factory=list)

    @property
    def exclusive(self) -> Optional[bool]:
        verdicts = [c.holds for c in self.conditions]
        if any(v is False for v in verdicts):
            return False
        if any(v is None for v in verdicts):
            return None
        return True

    def to_json(self):
        return {
            "group": self.group,
            "rho": self.rho,
            "split_at": self.split_at,
            "edge": self.edge,
            "conditions": [c.to_json() for c in self.conditions],
            "exclusive": self.exclusive,
        }


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _vertex_words(rho: ReducedWord, group: MarkedGroup) -> Dict[Element, ReducedWord]:
    """First prefix word of ρ reaching each vertex of its path."""
    words: Dict[Element, ReducedWord] = {group.identity(): identity_word(rho.rank)}
    x = group.identity()
    for k, (gen, sign) in enumerate(rho):
        x = group.multiply(x, group.letter(gen, sign))
        words.setdefault(x, rho[:k + 1])
    return words


def _edge_of_split(c: ExclusiveCandidate) -> Tuple[Element, int, ReducedWord]:
    """Edge key of e₀ and a word for its tail vertex."""
    gen, sign = c.s
    if sign > 0:
        word = c.u
    else:
        word = c.rho[:c.split_at + 1]
    return evaluate_word(c.group, word), gen, word


def make_Hm(group: MarkedGroup, m: Sequence[int]) -> Tuple[List[ReducedWord], Optional[SubgroupPredicate]]:
    """
    Generators s_i^{m_i} of H_m and, for abelian groups with the standard
    marking, the exact sublattice predicate for its image.
    """
    m = tuple(int(k) for k in m)
    if len(m) != group.rank:
        raise RankMismatchError(f"{len(m)} entries in m for a group of rank {group.rank}")
    if any(k < 1 for k in m):
        raise CandidateError(f"m entries must be >= 1, got {m}")
    words = [generator_word(group.rank, i, k) for i, k in enumerate(m, 1)]
    if all(k == 1 for k in m):
        return words, FullGroup()
    if group.is_abelian and getattr(group, "standard_marking", False):
        predicate = Sublattice(m)
        group.register_subgroup(predicate)
        return words, predicate
    return words, None


def _inside_Hm(gammas: Sequence[ReducedWord], m: Sequence[int]) -> bool:
    for w in gammas:
        gens = {gen for gen, _ in w}
        if len(gens) > 1:
            return False
        if gens:
            (gen,) = gens
            if sum(sign for _, sign in w) % m[gen - 1] != 0:
                return False
    return True


def tm_criterion(u: ReducedWord, s: Letter, m: Sequence[int], group: Optional[MarkedGroup] = None,
                 abelianize: Optional[Callable[[ReducedWord], Sequence[int]]] = None) -> bool:
    """
    True when π(u) ∉ ⟨π(s)⟩ in T_m = ⊕ ℤ/m_i, π the abelianization of Γ₁
    with s_i ↦ ε_i; then e₀ avoids every flow of H_m.
    """
    m = tuple(int(k) for k in m)
    if any(k < 2 for k in m):
        raise CandidateError(f"T_m needs entries >= 2, got {m}")
    if len(m) != u.rank:
        raise RankMismatchError(f"{len(m)} entries in m for words of rank {u.rank}")
    if abelianize is None:
        if group is not None and not group.has_standard_abelianization:
            raise GroupError(f"{group.name} has no built-in abelianization; pass an abelianization map")
        abelianize = ReducedWord.exponent_sums
    target = tuple(c % k for c, k in zip(abelianize(u), m))
    gen, sign = s
    step = tuple((sign if j == gen - 1 else 0) % k for j, k in enumerate(m))
    point = tuple(0 for _ in m)
    cyclic = set()
    while point not in cyclic:
        cyclic.add(point)
        point = tuple((a + b) % k for a, b, k in zip(point, step, m))
    return target not in cyclic


# ---------------------------------------------------------------------------
# The check
# ---------------------------------------------------------------------------

def _condition_two(c: ExclusiveCandidate, flow: Flow, vertex: Element, gen: int,
                   vertex_word: ReducedWord) -> ConditionVerdict:
    group = c.group
    predicate = group.subgroup(c.bar)
    words = _vertex_words(c.rho, group)
    inverse_vertex = group.inverse(vertex)
    checked = 0
    for (z, i), value in sorted(flow.edges.items(), key=lambda item: group.canonical_key(item[0][0])):
        if i != gen or z == vertex:
            continue
        x = group.multiply(z, inverse_vertex)
        word = word_multiply(words[z], word_inverse(vertex_word)) if z in words else None
        checked += 1
        if predicate.contains(group, x, word):
            return ConditionVerdict(False, "support enumeration", group.to_json(x),
                                    f"flow {value} on the translate by x = {group.to_json(x)}")
    return ConditionVerdict(True, "support enumeration", detail=f"{checked} translates of e₀ carry flow, none in Γ̄")


def _condition_three(c: ExclusiveCandidate, vertex: Element, gen: int) -> ConditionVerdict:
    if c.m is not None and all(k >= 2 for k in c.m) and _inside_Hm(c.gammas, c.m):
        try:
            if tm_criterion(c.u, c.s, c.m, group=c.group):
                return ConditionVerdict(True, "T_m criterion", detail=f"m = {list(c.m)}")
        except GroupError as exc:
            logger.info("T_m criterion unavailable: %s", exc)
    return bounded_edge_search(c, vertex, gen)


def bounded_edge_search(c: ExclusiveCandidate, vertex: Element, gen: int) -> ConditionVerdict:
    """
    Breadth-first search over Γ products up to `radius` Γ-letters, looking for a
    flow through e₀. Elements of Γ₂ are deduplicated by their flows.
    """
    group = c.group
    method = f"bounded search to radius {c.radius}"
    steps = []
    for w in c.gammas:
        for word in (w, word_inverse(w)):
            steps.append((word, flow_of_word(word, group)))
    e = identity_word(group.rank)
    start = Flow(group, {}, group.identity(), group.identity())
    seen = {(frozenset(), group.identity())}
    frontier = [(e, start)]
    for depth in range(1, c.radius + 1):
        nxt = []
        for word, flow in frontier:
            for step_word, step_flow in steps:
                product = flow + step_flow.translate(flow.end)
                key = (frozenset(product.edges.items()), product.end)
                if key in seen:
                    continue
                seen.add(key)
                candidate = word_multiply(word, step_word)
                if product.value(vertex, gen) != 0:
                    return ConditionVerdict(False, method, str(candidate) or "e",
                                            f"Γ element at depth {depth} has flow on e₀")
                nxt.append((candidate, product))
                if len(seen) > c.budget:
                    return ConditionVerdict(None, method, detail=f"budget of {c.budget} elements exhausted at depth {depth}")
        frontier = nxt
    return ConditionVerdict(True, method, detail=f"{len(seen)} elements of Γ checked", bounded_only=True)


def check_exclusive(c: ExclusiveCandidate) -> CheckReport:
    ok, message = validate_candidate(c)
    if not ok:
        raise CandidateError(message)
    group = c.group
    group.subgroup(c.bar)  # fail early on a missing predicate
    flow = flow_of_word(c.rho, group)
    vertex, gen, vertex_word = _edge_of_split(c)
    report = CheckReport(group.name, str(c.rho), c.split_at, {"vertex": group.to_json(vertex), "gen": gen})

    value = flow.value(vertex, gen)
    report.conditions.append(ConditionVerdict(value != 0, "direct", None if value else report.edge,
                                              f"flow on e₀ is {value}"))
    report.conditions.append(_condition_two(c, flow, vertex, gen, vertex_word))
    report.conditions.append(_condition_three(c, vertex, gen))
    logger.debug("exclusive check on %s: %s", group.name, [v.holds for v in report.conditions])
    return report


# ---------------------------------------------------------------------------
# Spot checks
# ---------------------------------------------------------------------------

def translates_rank(c: ExclusiveCandidate, radius: int = 3) -> Tuple[int, int]:
    """
    Exact integer rank of the stacked translates τ_ḡ ā(ρ) over ḡ in the radius
    ball of Γ̄ (generated by the images of the Γ words). Returns (rank, count).
    """
    group = c.group
    bar_steps = []
    for w in c.gammas:
        x = evaluate_word(group, w)
        bar_steps.extend([x, group.inverse(x)])
    seen = {group.identity()}
    frontier = [group.identity()]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for step in bar_steps:
                y = group.multiply(x, step)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    a = magnus_embed(c.rho, group).a
    translates = [a.translate(g) for g in sorted(seen, key=group.canonical_key)]
    columns = sorted({(x, i) for t in translates for x, v in t.columns.items() for i, value in enumerate(v) if value},
                     key=lambda key: (group.canonical_key(key[0]), key[1]))
    index = {key: j for j, key in enumerate(columns)}
    rows = []
    for t in translates:
        row = [0] * len(columns)
        for x, v in t.columns.items():
            for i, value in enumerate(v):
                if value:
                    row[index[(x, i)]] = value
        rows.append(row)
    return int(Matrix(rows).rank()), len(rows)


def magnus_group(base: MarkedGroup) -> WreathProduct:
    """Γ₂ = F_r/[N,N] realized inside ℤ^r ≀ Γ₁."""
    return WreathProduct(make_abelian_group(base.rank), base, magnus=True, name=f"gamma2({base.name})")


def word_measure(group: MarkedGroup, weights: Dict[ReducedWord, Weight], name: str = "words") -> MeasureSpec:
    atoms: Dict[Element, Weight] = {}
    for w, p in weights.items():
        x = evaluate_word(group, w)
        atoms[x] = atoms.get(x, 0) + p
    exact = all(isinstance(p, Fraction) for p in weights.values())
    return MeasureSpec(group, atoms, exact, name)


@dataclass
class ReturnComparison:
    n: int
    walk: Weight
    projected: Weight

    @property
    def holds(self) -> bool:
        return self.walk <= self.projected


def return_expression_check(base: MarkedGroup, phi: Dict[ReducedWord, Weight], rho: ReducedWord,
                            n_max: int) -> List[ReturnComparison]:
    """
    Compare (ν*φ*ν)^{*n}(e) on Γ₂ with (η⋆φ̄⋆η)^{⋆n}(e) on ℤ ≀ Γ₁ for n = 1..n_max,
    where ν(ρ^{±1}) = η(±1) = 1/2 and φ̄ is the image of φ in Γ₁.
    """
    gamma2 = magnus_group(base)
    half = Fraction(1, 2)
    nu = word_measure(gamma2, {rho: half, word_inverse(rho): half}, "nu")
    phi_up = word_measure(gamma2, phi, "phi")
    walk = MeasureSpec(gamma2, convolve(convolve(nu.atoms, phi_up.atoms, gamma2), nu.atoms, gamma2),
                       nu.exact and phi_up.exact, "nu*phi*nu")
    phi_bar = word_measure(base, phi, "phi-bar")
    eta = law_measure(make_pm_one_law())
    projected = sws(eta, phi_bar)
    out = []
    for n in range(1, n_max + 1):
        left = convolve_power(walk, n).at_identity()
        right = convolve_power(projected, n).at_identity()
        out.append(ReturnComparison(n, left, right))
    return out


def vartheta_convolution_check(base: MarkedGroup, phi: Dict[ReducedWord, Weight]) -> Tuple[bool, Dict, Dict]:
    """
    ϑ(ν*φ*ν) against η⋆φ̄⋆η as exact distributions on ℤ ≀ Γ₁: each product
    ρ^{x₁} γ ρ^{x₂} is sent through ϑ. Returns (equal, pushed, direct).
    """
    target = vartheta_target(base)
    half = Fraction(1, 2)
    e = identity_word(base.rank)
    pushed: Dict[Element, Weight] = {}
    for x1 in (1, -1):
        for gamma, p in phi.items():
            for x2 in (1, -1):
                y = vartheta_project(VarthetaForm((e, gamma, e), (x1, x2)), base, target)
                pushed[y] = pushed.get(y, 0) + half * p * half
    direct = sws(law_measure(make_pm_one_law()), word_measure(base, phi, "phi-bar")).atoms
    pushed = {y: w for y, w in pushed.items() if w != 0}
    return pushed == direct, pushed, direct
