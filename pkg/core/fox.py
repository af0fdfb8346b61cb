"""
Fox Calculus and Flows
======================

Fox derivatives projected to ℤ(Γ₁), the Magnus embedding ψ into ℤ^r ≀ Γ₁,
flows on the marked Cayley graph of Γ₁, the flow word problem for
Γ₂ = F_r/[N,N], the δ_m stretch and the ϑ projection onto ℤ ≀ Γ̄.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .groups import (
    AbelianGroup,
    Element,
    MarkedGroup,
    WreathProduct,
    evaluate_word,
)
from .utils import GroupError, RankMismatchError, get_logger
from .words import ReducedWord, identity_word, reduce, word_multiply

logger = get_logger(__name__)

EdgeKey = Tuple[Element, int]


def _check_rank(w: ReducedWord, group: MarkedGroup):
    if w.rank != group.rank:
        raise RankMismatchError(f"word of rank {w.rank} on {group.name} of rank {group.rank}")


def _bump(terms: Dict, key, value):
    total = terms.get(key, 0) + value
    if total:
        terms[key] = total
    else:
        terms.pop(key, None)


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass
class GroupRingElement:
    """Finitely supported ℤ-combination of elements of `group`; zeros are never stored."""

    group: MarkedGroup
    terms: Dict[Element, int] = field(default_factory=dict)

    def coefficient(self, x: Element) -> int:
        return self.terms.get(x, 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        terms = dict(self.terms)
        for x, c in other.terms.items():
            _bump(terms, x, c)
        return GroupRingElement(self.group, terms)

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(self.group, {x: -c for x, c in self.terms.items()})

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return self + (-other)

    def translate(self, g: Element) -> "GroupRingElement":
        """Left multiplication by g."""
        return GroupRingElement(self.group, {self.group.multiply(g, x): c for x, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, GroupRingElement) and self.terms == other.terms

    def to_json(self) -> List[Dict[str, Any]]:
        rows = [{"key": self.group.to_json(x), "coefficient": c} for x, c in self.terms.items()]
        return sorted(rows, key=lambda row: repr(row["key"]))


@dataclass
class ModuleVector:
    """
    Element of the free ℤ(Γ₁)-module of rank r: column vectors in ℤ^r keyed by Γ₁.
    """

    group: MarkedGroup
    rank: int
    columns: Dict[Element, Tuple[int, ...]] = field(default_factory=dict)

    def _combine(self, other: "ModuleVector", sign: int) -> "ModuleVector":
        if other.rank != self.rank:
            raise RankMismatchError(f"module rank {self.rank} vs {other.rank}")
        columns = dict(self.columns)
        zero = (0,) * self.rank
        for x, vec in other.columns.items():
            cur = columns.get(x, zero)
            new = tuple(a + sign * b for a, b in zip(cur, vec))
            if any(new):
                columns[x] = new
            else:
                columns.pop(x, None)
        return ModuleVector(self.group, self.rank, columns)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return ModuleVector(self.group, self.rank, {x: tuple(-c for c in v) for x, v in self.columns.items()})

    def translate(self, g: Element) -> "ModuleVector":
        """τ_g: the column at x moves to g·x."""
        return ModuleVector(self.group, self.rank,
                            {self.group.multiply(g, x): v for x, v in self.columns.items()})

    def column(self, i: int) -> GroupRingElement:
        return GroupRingElement(self.group, {x: v[i - 1] for x, v in self.columns.items() if v[i - 1]})

    def is_zero(self) -> bool:
        return not self.columns

    def __eq__(self, other):
        return isinstance(other, ModuleVector) and self.rank == other.rank and self.columns == other.columns

    def entry_count(self) -> int:
        """Number of nonzero (key, coordinate) entries."""
        return sum(1 for v in self.columns.values() for c in v if c)

    def to_json(self) -> List[Dict[str, Any]]:
        rows = [{"key": self.group.to_json(x), "vector": list(v)} for x, v in self.columns.items()]
        return sorted(rows, key=lambda row: repr(row["key"]))


@dataclass
class WreathImage:
    """(a, g) in ℤ^r ≀ Γ₁ with (a₁,g₁)(a₂,g₂) = (a₁ + τ_{g₁}a₂, g₁g₂)."""

    a: ModuleVector
    base: Element

    def __mul__(self, other: "WreathImage") -> "WreathImage":
        return WreathImage(self.a + other.a.translate(self.base), self.a.group.multiply(self.base, other.base))

    def inverse(self) -> "WreathImage":
        g_inv = self.a.group.inverse(self.base)
        return WreathImage(-self.a.translate(g_inv), g_inv)

    def is_identity(self) -> bool:
        return self.a.is_zero() and self.a.group.is_identity(self.base)

    def __eq__(self, other):
        return isinstance(other, WreathImage) and self.a == other.a and self.base == other.base

    def to_json(self) -> Dict[str, Any]:
        return {"a": self.a.to_json(), "base": self.a.group.to_json(self.base)}


@dataclass
class Flow:
    """
    Integer function on marked edges of the Cayley graph of Γ₁.
    Key (x, i) is the edge x → x·s̄_i labelled s_i. `start`/`end` are the
    endpoints of the path a word flow came from.
    """

    group: MarkedGroup
    edges: Dict[EdgeKey, int] = field(default_factory=dict)
    start: Optional[Element] = None
    end: Optional[Element] = None

    def value(self, x: Element, i: int) -> int:
        return self.edges.get((x, i), 0)

    def is_zero(self) -> bool:
        return not self.edges

    def support(self) -> List[EdgeKey]:
        return list(self.edges)

    def __add__(self, other: "Flow") -> "Flow":
        edges = dict(self.edges)
        for key, v in other.edges.items():
            _bump(edges, key, v)
        return Flow(self.group, edges, self.start, other.end)

    def __neg__(self) -> "Flow":
        return Flow(self.group, {k: -v for k, v in self.edges.items()}, self.end, self.start)

    def translate(self, g: Element) -> "Flow":
        mult = self.group.multiply
        return Flow(self.group, {(mult(g, x), i): v for (x, i), v in self.edges.items()},
                    None if self.start is None else mult(g, self.start),
                    None if self.end is None else mult(g, self.end))

    def __eq__(self, other):
        return isinstance(other, Flow) and self.edges == other.edges

    def to_json(self) -> Dict[str, Any]:
        rows = [{"vertex": self.group.to_json(x), "gen": i, "value": v} for (x, i), v in self.edges.items()]
        rows.sort(key=lambda row: (repr(row["vertex"]), row["gen"]))
        return {"edges": rows}


# ---------------------------------------------------------------------------
# Fox derivatives and the Magnus embedding
# ---------------------------------------------------------------------------

def _walk(w: ReducedWord, group: MarkedGroup):
    """
    Yield (prefix image, generator, sign) for the edge each letter crosses.
    For a negative letter the prefix has already been moved back along the edge.
    """
    x = group.identity()
    for gen, sign in w:
        if sign > 0:
            yield x, gen, 1
            x = group.multiply(x, group.letter(gen, 1))
        else:
            x = group.multiply(x, group.letter(gen, -1))
            yield x, gen, -1


def fox_derivatives(w: ReducedWord, group: MarkedGroup) -> List[GroupRingElement]:
    """π(∂_{s_i} w) for every i from one left-to-right pass."""
    _check_rank(w, group)
    terms: List[Dict[Element, int]] = [dict() for _ in range(group.rank)]
    for x, gen, sign in _walk(w, group):
        _bump(terms[gen - 1], x, sign)
    return [GroupRingElement(group, t) for t in terms]


def fox_derivative(w: ReducedWord, i: int, group: MarkedGroup) -> GroupRingElement:
    if not 1 <= i <= group.rank:
        raise RankMismatchError(f"generator {i} outside 1..{group.rank}")
    return fox_derivatives(w, group)[i - 1]


def magnus_embed(w: ReducedWord, group: MarkedGroup) -> WreathImage:
    """
    ψ(w) = (Σ_i π(∂_i w) λ_i, π(w)).
    """
    _check_rank(w, group)
    r = group.rank
    columns: Dict[Element, List[int]] = {}
    end = group.identity()
    for x, gen, sign in _walk(w, group):
        columns.setdefault(x, [0] * r)[gen - 1] += sign
    for gen, sign in w:
        end = group.multiply(end, group.letter(gen, sign))
    module = ModuleVector(group, r, {x: tuple(v) for x, v in columns.items() if any(v)})
    return WreathImage(module, end)


def magnus_identity(group: MarkedGroup) -> WreathImage:
    return WreathImage(ModuleVector(group, group.rank), group.identity())


# ---------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------

def flow_of_word(w: ReducedWord, group: MarkedGroup) -> Flow:
    """𝔣_w: net traversals of each marked edge by the path of w from ē."""
    _check_rank(w, group)
    edges: Dict[EdgeKey, int] = {}
    end = group.identity()
    for x, gen, sign in _walk(w, group):
        _bump(edges, (x, gen), sign)
        end = group.multiply(x, group.letter(gen, 1)) if sign > 0 else x
    return Flow(group, edges, group.identity(), end)


@dataclass
class NetFlow:
    values: Dict[Element, int]
    is_circulation: bool


def net_flow(f: Flow) -> NetFlow:
    """𝔣*(v) = outgoing minus incoming; zero entries are dropped."""
    values: Dict[Element, int] = {}
    for (x, i), v in f.edges.items():
        _bump(values, x, v)
        _bump(values, f.group.multiply(x, f.group.letter(i, 1)), -v)
    return NetFlow(values, not values)


def words_equal_mod_NN(u: ReducedWord, v: ReducedWord, group: MarkedGroup) -> bool:
    """u = v in F_r/[N,N] iff their flows over Γ₁ = F_r/N coincide."""
    if u.rank != v.rank:
        raise RankMismatchError(f"rank mismatch: {u.rank} vs {v.rank}")
    return flow_of_word(u, group).edges == flow_of_word(v, group).edges


def flow_cocycle(u: ReducedWord, v: ReducedWord, group: MarkedGroup) -> Flow:
    """𝔣_u + τ_{π(u)} 𝔣_v, which equals 𝔣_{uv}."""
    fu = flow_of_word(u, group)
    fv = flow_of_word(v, group)
    return fu + fv.translate(fu.end)


def flow_to_module(f: Flow) -> ModuleVector:
    columns: Dict[Element, List[int]] = {}
    r = f.group.rank
    for (x, i), v in f.edges.items():
        columns.setdefault(x, [0] * r)[i - 1] += v
    return ModuleVector(f.group, r, {x: tuple(v) for x, v in columns.items() if any(v)})


def module_to_flow(a: ModuleVector) -> Flow:
    edges = {(x, i): c for x, v in a.columns.items() for i, c in enumerate(v, 1) if c}
    return Flow(a.group, edges)


# ---------------------------------------------------------------------------
# δ_m stretch
# ---------------------------------------------------------------------------

def stretch_word(w: ReducedWord, m: int) -> ReducedWord:
    """δ_m: every letter s_i^{±1} becomes s_i^{±m}."""
    if m < 1:
        raise GroupError(f"stretch factor must be >= 1, got {m}")
    return reduce([letter for letter in w for _ in range(m)], w.rank)


def stretch_flow(f: Flow, m: int) -> Flow:
    """
    t_m: the value on (x, i) is copied to (δ_m(x)·s̄_i^j, i) for j = 0..m-1.
    Needs δ_m on the group.
    """
    if m < 1:
        raise GroupError(f"stretch factor must be >= 1, got {m}")
    group = f.group
    edges: Dict[EdgeKey, int] = {}
    for (x, i), v in f.edges.items():
        site = group.stretch_element(x, m)
        step = group.letter(i, 1)
        for _ in range(m):
            _bump(edges, (site, i), v)
            site = group.multiply(site, step)
    start = None if f.start is None else group.stretch_element(f.start, m)
    end = None if f.end is None else group.stretch_element(f.end, m)
    return Flow(group, edges, start, end)


@dataclass
class StretchResult:
    word: ReducedWord
    flow: Flow
    status: str  # "verified" or "unverified"

    @property
    def verified(self) -> bool:
        return self.status == "verified"


def stretch(w: ReducedWord, m: int, group: MarkedGroup) -> StretchResult:
    """
    δ_m(w) with its flow. On groups where δ_m is known to satisfy the
    injectivity hypothesis the flow is built as t_m(𝔣_w) and checked against the
    traced flow; elsewhere the traced flow is returned tagged "unverified".
    """
    word = stretch_word(w, m)
    traced = flow_of_word(word, group)
    if not group.stretch_verified(m):
        logger.debug("stretch on %s by %d is unverified", group.name, m)
        return StretchResult(word, traced, "unverified")
    lifted = stretch_flow(flow_of_word(w, group), m)
    if lifted.edges != traced.edges:
        raise GroupError(f"t_{m} flow disagrees with the traced flow of δ_{m}(w) on {group.name}")
    return StretchResult(word, lifted, "verified")


# ---------------------------------------------------------------------------
# ϑ projection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarthetaForm:
    """
    γ₁ ρ^{x₁} γ₂ … γ_p ρ^{x_p} γ_{p+1}: p+1 words in F_r and p integer exponents.
    """

    gammas: Tuple[ReducedWord, ...]
    exponents: Tuple[int, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.exponents) + 1:
            raise GroupError(
                f"alternating form needs {len(self.exponents) + 1} γ words for "
                f"{len(self.exponents)} exponents, got {len(self.gammas)}")
        ranks = {g.rank for g in self.gammas}
        if len(ranks) != 1:
            raise RankMismatchError(f"γ words have mixed ranks {sorted(ranks)}")

    @property
    def rank(self) -> int:
        return self.gammas[0].rank

    @classmethod
    def of_gamma(cls, gamma: ReducedWord) -> "VarthetaForm":
        return cls((gamma,), ())

    @classmethod
    def of_rho(cls, rank: int, exponent: int = 1) -> "VarthetaForm":
        e = identity_word(rank)
        return cls((e, e), (exponent,))

    def __mul__(self, other: "VarthetaForm") -> "VarthetaForm":
        seam = word_multiply(self.gammas[-1], other.gammas[0])
        return VarthetaForm(self.gammas[:-1] + (seam,) + other.gammas[1:], self.exponents + other.exponents)

    def word(self, rho: ReducedWord) -> ReducedWord:
        out = self.gammas[0]
        for x, gamma in zip(self.exponents, self.gammas[1:]):
            out = word_multiply(word_multiply(out, rho ** x), gamma)
        return out


def vartheta_target(bar_group: MarkedGroup) -> WreathProduct:
    """ℤ ≀ Γ̄ with lamp ℤ."""
    return WreathProduct(AbelianGroup("zr:1", 1), bar_group, name=f"wr(zr:1, {bar_group.name})")


def vartheta_project(form: VarthetaForm, bar_group: MarkedGroup,
                     target: Optional[WreathProduct] = None) -> Element:
    """
    ϑ(form) = ((Σ_j x_j·1_h(σ̄_j))_h, π̄(γ₁…γ_{p+1})) with σ̄_j = π̄(γ₁…γ_j),
    π̄ evaluating F_r words in `bar_group`.
    """
    target = target or vartheta_target(bar_group)
    _check_rank(form.gammas[0], bar_group)
    lamps: Dict[Element, Tuple[int]] = {}
    sigma = bar_group.identity()
    for j, x in enumerate(form.exponents):
        sigma = bar_group.multiply(sigma, evaluate_word(bar_group, form.gammas[j]))
        total = lamps.get(sigma, (0,))[0] + x
        lamps[sigma] = (total,)
    sigma = bar_group.multiply(sigma, evaluate_word(bar_group, form.gammas[-1]))
    return target.element(lamps, sigma)


def vartheta_generators(bar_group: MarkedGroup, words: Sequence[ReducedWord]) -> List[Element]:
    """ϑ of the plain words γ (no ρ factor): (0, π̄(γ))."""
    target = vartheta_target(bar_group)
    return [vartheta_project(VarthetaForm.of_gamma(w), bar_group, target) for w in words]
