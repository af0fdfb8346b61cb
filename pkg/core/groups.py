"""
Marked Groups
=============

Concrete marked groups Γ₁ with exact arithmetic: ℤ^r and T_m, the lamplighter
ℤ_q≀ℤ, BS(1,q), wreath products A≀G and the recursive free solvable groups
S_{d,r} (Magnus pairs over S_{d-1,r}).

Elements are plain immutable tuples, normalized so that Python equality is group
equality and elements can be used directly as dictionary keys.
Finitely supported maps are stored as tuples of (key, value) pairs sorted by key,
with no identity values.
"""

import json
import re
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .utils import (
    BudgetExceeded,
    GroupError,
    GroupSpecError,
    MembershipError,
    RankMismatchError,
    get_logger,
    parse_int_list,
    validate_moduli,
)
from .words import ReducedWord

logger = get_logger(__name__)

Element = Any


# ---------------------------------------------------------------------------
# Subgroup membership predicates
# ---------------------------------------------------------------------------

class SubgroupPredicate:
    """Membership oracle for a subgroup of a marked group."""

    name = "subgroup"
    needs_word = False

    def contains(self, group: "MarkedGroup", x: Element, word: Optional[ReducedWord] = None) -> bool:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class FullGroup(SubgroupPredicate):
    name = "full"

    def contains(self, group, x, word=None):
        return True


class Sublattice(SubgroupPredicate):
    """m₁ℤ × … × m_rℤ inside an abelian group."""

    def __init__(self, moduli: Sequence[int]):
        self.moduli = tuple(int(m) for m in moduli)
        self.name = "sublattice:" + ",".join(str(m) for m in self.moduli)

    def contains(self, group, x, word=None):
        if len(x) != len(self.moduli):
            raise MembershipError(f"{self.name} expects {len(self.moduli)} coordinates, got {len(x)}")
        return all(c % m == 0 for c, m in zip(x, self.moduli))


class EvenTranslation(SubgroupPredicate):
    """Elements whose translation part (t coordinate) is even."""

    name = "even-t"

    def contains(self, group, x, word=None):
        return group.translation(x) % 2 == 0


class EvenSites(SubgroupPredicate):
    """Lamplighter elements with even position and lamps lit only at even sites."""

    name = "even-sites"

    def contains(self, group, x, word=None):
        lamps, position = x
        return position % 2 == 0 and all(site % 2 == 0 for site, _ in lamps)


class CosetTable(SubgroupPredicate):
    """
    Finite-index subgroup given by the action of the generators on cosets.
    tables[i][c] is the coset reached from coset c by generator s_{i+1};
    the subgroup is the stabilizer of coset 0. Membership needs a word.
    """

    needs_word = True

    def __init__(self, tables: Sequence[Sequence[int]], name: str = "coset-table"):
        ok, message = validate_coset_tables(tables)
        if not ok:
            raise MembershipError(message)
        self.tables = tuple(tuple(t) for t in tables)
        self.inverse_tables = tuple(_invert_permutation(t) for t in self.tables)
        self.name = name

    @property
    def index(self) -> int:
        return len(self.tables[0])

    def coset_of(self, word: ReducedWord) -> int:
        if word.rank != len(self.tables):
            raise RankMismatchError(f"coset table has {len(self.tables)} generators, word has rank {word.rank}")
        coset = 0
        for gen, sign in word:
            table = self.tables[gen - 1] if sign > 0 else self.inverse_tables[gen - 1]
            coset = table[coset]
        return coset

    def contains(self, group, x, word=None):
        if word is None:
            raise MembershipError(f"{self.name} membership needs a word representative")
        return self.coset_of(word) == 0


def validate_coset_tables(tables: Sequence[Sequence[int]]):
    """
    Check that every generator acts by a permutation of the same coset set
    """
    if not tables:
        return False, "coset table needs at least one generator"
    size = len(tables[0])
    if size == 0:
        return False, "coset table is empty"
    for i, table in enumerate(tables, 1):
        if len(table) != size:
            return False, f"generator {i} acts on {len(table)} cosets, expected {size}"
        if sorted(table) != list(range(size)):
            return False, f"generator {i} does not act by a permutation"
    return True, "coset table valid"


def _invert_permutation(table: Sequence[int]) -> Tuple[int, ...]:
    inverse = [0] * len(table)
    for c, d in enumerate(table):
        inverse[d] = c
    return tuple(inverse)


# ---------------------------------------------------------------------------
# Base class
# ---------------------------------------------------------------------------

class MarkedGroup(ABC):
    """
    A group with a designated generator tuple s̄₁..s̄_r.
    """

    is_abelian = False

    def __init__(self, name: str, rank: int):
        self.name = name
        self.rank = rank
        self._subgroups: Dict[str, SubgroupPredicate] = {}
        self.register_subgroup(FullGroup())
        self._gens: Optional[List[Element]] = None
        self._gen_inverses: Optional[List[Element]] = None

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"

    # -- required ----------------------------------------------------------

    @abstractmethod
    def identity(self) -> Element:
        ...

    @abstractmethod
    def multiply(self, a: Element, b: Element) -> Element:
        ...

    @abstractmethod
    def inverse(self, a: Element) -> Element:
        ...

    @abstractmethod
    def generator(self, i: int) -> Element:
        """Image s̄_i of the i-th generator (1-based)."""

    @property
    @abstractmethod
    def torsion(self) -> Tuple[bool, ...]:
        ...

    @abstractmethod
    def to_json(self, x: Element) -> Any:
        ...

    # -- derived -----------------------------------------------------------

    def equal(self, a: Element, b: Element) -> bool:
        return a == b

    def is_identity(self, x: Element) -> bool:
        return x == self.identity()

    def canonical_key(self, x: Element) -> bytes:
        """Deterministic byte key; equal elements and only those share a key."""
        return json.dumps(self.to_json(x), sort_keys=True, separators=(",", ":")).encode("utf-8")

    def generators(self) -> List[Element]:
        if self._gens is None:
            self._gens = [self.generator(i) for i in range(1, self.rank + 1)]
            self._gen_inverses = [self.inverse(g) for g in self._gens]
        return self._gens

    def letter(self, gen: int, sign: int) -> Element:
        self.generators()
        return self._gens[gen - 1] if sign > 0 else self._gen_inverses[gen - 1]

    def symmetric_generators(self) -> List[Element]:
        """s̄₁, s̄₁⁻¹, …, s̄_r, s̄_r⁻¹"""
        out = []
        for i in range(1, self.rank + 1):
            out.append(self.letter(i, 1))
            out.append(self.letter(i, -1))
        return out

    def power(self, x: Element, n: int) -> Element:
        base = x if n >= 0 else self.inverse(x)
        result = self.identity()
        square = base
        k = abs(n)
        while k:
            if k & 1:
                result = self.multiply(result, square)
            square = self.multiply(square, square)
            k >>= 1
        return result

    def generator_power(self, i: int, m: int) -> Element:
        return self.power(self.generator(i), m)

    # -- optional structure ------------------------------------------------

    def translation(self, x: Element) -> int:
        raise GroupError(f"{self.name} has no translation coordinate")

    def abelianization(self, x: Element) -> Tuple[int, ...]:
        raise GroupError(f"{self.name} has no built-in abelianization")

    @property
    def has_standard_abelianization(self) -> bool:
        """True when abelianization is ℤ^r with s̄_i ↦ ε_i."""
        return False

    def project(self, x: Element) -> Element:
        raise GroupError(f"{self.name} has no built-in projection")

    def stretch_element(self, x: Element, m: int) -> Element:
        raise GroupError(f"δ_m is not available on {self.name}")

    def stretch_verified(self, m: int) -> bool:
        """Whether δ_m is known to be injective with s̄_i^q ∉ δ_m(Γ₁) for 1 ≤ q < m."""
        return False

    # -- subgroups ---------------------------------------------------------

    def register_subgroup(self, predicate: SubgroupPredicate, name: Optional[str] = None):
        self._subgroups[name or predicate.name] = predicate

    def subgroup(self, name: str) -> SubgroupPredicate:
        if name in self._subgroups:
            return self._subgroups[name]
        if name.startswith("sublattice:") and self.is_abelian:
            predicate = Sublattice(parse_int_list(name.split(":", 1)[1], "sublattice"))
            self.register_subgroup(predicate)
            return predicate
        known = ", ".join(sorted(self._subgroups))
        raise MembershipError(f"{self.name} has no subgroup predicate {name!r} (known: {known})")

    def subgroup_names(self) -> List[str]:
        return sorted(self._subgroups)

    def is_member(self, name: str, x: Element, word: Optional[ReducedWord] = None) -> bool:
        return self.subgroup(name).contains(self, x, word)


# ---------------------------------------------------------------------------
# ℤ^r, T_m and marked abelian groups
# ---------------------------------------------------------------------------

class AbelianGroup(MarkedGroup):
    """
    ℤ^dim with optional per-coordinate moduli and optional generator images.
    """

    is_abelian = True

    def __init__(self, name: str, dim: int, moduli: Optional[Sequence[Optional[int]]] = None,
                 images: Optional[Sequence[Sequence[int]]] = None):
        self.dim = dim
        self.moduli: Tuple[Optional[int], ...] = tuple(moduli) if moduli is not None else (None,) * dim
        if images is None:
            images = [tuple(1 if j == i else 0 for j in range(dim)) for i in range(dim)]
        self.images = tuple(self._normalize(tuple(v)) for v in images)
        super().__init__(name, len(self.images))

    def _normalize(self, x: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(c if m is None else c % m for c, m in zip(x, self.moduli))

    @property
    def standard_marking(self) -> bool:
        return self.images == tuple(tuple(1 if j == i else 0 for j in range(self.dim)) for i in range(self.dim))

    def identity(self):
        return (0,) * self.dim

    def multiply(self, a, b):
        return self._normalize(tuple(x + y for x, y in zip(a, b)))

    def inverse(self, a):
        return self._normalize(tuple(-x for x in a))

    def generator(self, i):
        if not 1 <= i <= self.rank:
            raise RankMismatchError(f"generator {i} outside 1..{self.rank}")
        return self.images[i - 1]

    def power(self, x, n):
        return self._normalize(tuple(n * c for c in x))

    @property
    def torsion(self):
        flags = []
        for v in self.images:
            # finite order iff every nonzero coordinate is a modded one
            flags.append(all(c == 0 or m is not None for c, m in zip(v, self.moduli)))
        return tuple(flags)

    def to_json(self, x):
        return list(x)

    def abelianization(self, x):
        return tuple(x)

    @property
    def has_standard_abelianization(self):
        return self.standard_marking and all(m is None for m in self.moduli)

    def stretch_element(self, x, m):
        if any(mod is not None for mod in self.moduli):
            raise GroupError(f"δ_m is not injective on {self.name}")
        return tuple(m * c for c in x)

    def stretch_verified(self, m):
        if any(mod is not None for mod in self.moduli):
            return False
        for v in self.images:
            for q in range(1, m):
                if all((q * c) % m == 0 for c in v):
                    return False
        return True


def make_abelian_group(r: int, moduli: Optional[Sequence[int]] = None,
                       images: Optional[Sequence[Sequence[int]]] = None) -> AbelianGroup:
    """
    ℤ^r (moduli None) or T_m = ⊕ ℤ/m_i (moduli given), generators the unit
    vectors unless `images` marks other generators.
    """
    if r < 1:
        raise GroupError(f"rank must be >= 1, got {r}")
    if moduli is not None:
        moduli = list(moduli)
        if len(moduli) != r:
            raise GroupError(f"expected {r} moduli, got {len(moduli)}")
        ok, message = validate_moduli(moduli)
        if not ok:
            raise GroupError(message)
        name = "tm:" + ",".join(str(m) for m in moduli)
    else:
        name = f"zr:{r}"
    if images is not None:
        for v in images:
            if len(v) != r:
                raise GroupError(f"generator image {tuple(v)} does not have {r} coordinates")
        name = f"marked({name}; " + "; ".join(",".join(str(c) for c in v) for v in images) + ")"
    group = AbelianGroup(name, r, moduli, images)
    logger.debug("built %s", group.name)
    return group


def line_with_loops() -> AbelianGroup:
    """ℤ = ⟨a, b | b⟩: the line graph with a loop at every vertex."""
    return make_abelian_group(1, images=[(1,), (0,)])


# ---------------------------------------------------------------------------
# Lamplighter ℤ_q ≀ ℤ
# ---------------------------------------------------------------------------

class LamplighterGroup(MarkedGroup):
    """
    Elements (lamps, position); lamps is a sorted tuple of (site, value), 0 < value < q.
    Marking "at" is (a, t) with a of order q; marking "sw" is (t, t·a), both of
    infinite order.
    """

    def __init__(self, q: int, marking: str = "at"):
        self.q = q
        self.marking = marking
        name = f"ll:{q}" if marking == "at" else f"llsw:{q}"
        super().__init__(name, 2)
        self.register_subgroup(EvenTranslation())
        self.register_subgroup(EvenSites())

    def identity(self):
        return ((), 0)

    def _add(self, f, g, shift):
        if not g:
            return f
        acc = dict(f)
        for site, value in g:
            site += shift
            total = (acc.get(site, 0) + value) % self.q
            if total:
                acc[site] = total
            else:
                acc.pop(site, None)
        return tuple(sorted(acc.items()))

    def multiply(self, a, b):
        return (self._add(a[0], b[0], a[1]), a[1] + b[1])

    def inverse(self, a):
        lamps, x = a
        return (tuple((site - x, (-value) % self.q) for site, value in lamps), -x)

    def generator(self, i):
        a = (((0, 1),), 0)
        t = ((), 1)
        if self.marking == "at":
            table = {1: a, 2: t}
        else:
            table = {1: t, 2: self.multiply(t, a)}
        if i not in table:
            raise RankMismatchError(f"generator {i} outside 1..2")
        return table[i]

    @property
    def torsion(self):
        return (True, False) if self.marking == "at" else (False, False)

    def translation(self, x):
        return x[1]

    def to_json(self, x):
        return {"lamps": [[site, value] for site, value in x[0]], "position": x[1]}


def make_lamplighter(q: int, marking: str = "at") -> LamplighterGroup:
    if q < 2:
        raise GroupError(f"lamplighter needs q >= 2, got {q}")
    if marking not in ("at", "sw"):
        raise GroupError(f"unknown lamplighter marking {marking!r}")
    return LamplighterGroup(q, marking)


# ---------------------------------------------------------------------------
# Baumslag-Solitar BS(1, q)
# ---------------------------------------------------------------------------

class BaumslagSolitarGroup(MarkedGroup):
    """
    ℤ[1/q] ⋊ ℤ with (t, x)(t', x') = (t + t', x + q^t x').
    Elements are (t, num, k) meaning x = num / q^k, k >= 0 and q ∤ num when k > 0.
    a = (-1, 0, 0), b = (0, 1, 0) satisfy a⁻¹ b a = b^q.
    """

    def __init__(self, q: int):
        self.q = q
        super().__init__(f"bs:{q}", 2)
        self.register_subgroup(EvenTranslation())

    def _normalize(self, num: int, k: int) -> Tuple[int, int]:
        if num == 0:
            return 0, 0
        while k > 0 and num % self.q == 0:
            num //= self.q
            k -= 1
        while k < 0:
            num *= self.q
            k += 1
        return num, k

    def _scale(self, num: int, k: int, e: int) -> Tuple[int, int]:
        """num/q^k times q^e"""
        if e >= 0:
            return num * self.q ** e, k
        return num, k - e

    def identity(self):
        return (0, 0, 0)

    def multiply(self, a, b):
        t1, n1, k1 = a
        t2, n2, k2 = b
        nb, kb = self._scale(n2, k2, t1)
        top = max(k1, kb)
        num = n1 * self.q ** (top - k1) + nb * self.q ** (top - kb)
        num, k = self._normalize(num, top)
        return (t1 + t2, num, k)

    def inverse(self, a):
        t, n, k = a
        num, kk = self._scale(-n, k, -t)
        num, kk = self._normalize(num, kk)
        return (-t, num, kk)

    def generator(self, i):
        if i == 1:
            return (-1, 0, 0)
        if i == 2:
            return (0, 1, 0)
        raise RankMismatchError(f"generator {i} outside 1..2")

    @property
    def torsion(self):
        return (False, False)

    def translation(self, x):
        return x[0]

    def to_json(self, x):
        return {"t": x[0], "num": x[1], "k": x[2]}


def make_bs(q: int) -> BaumslagSolitarGroup:
    if q < 2:
        raise GroupError(f"BS(1,q) needs q >= 2, got {q}")
    return BaumslagSolitarGroup(q)


# ---------------------------------------------------------------------------
# Wreath products and S_{d,r}
# ---------------------------------------------------------------------------

class WreathProduct(MarkedGroup):
    """
    A ≀ G with (f, h)(f', h') = (f + τ_h f', hh'), τ_h f(x) = f(h⁻¹x).
    Elements are (config, base) with config a sorted tuple of (site, lamp value).

    With magnus=True the marking is ψ(s_i) = (δ_ē·ε_i, s̄_i) (lamp ℤ^r, base of rank r),
    which realizes Γ₂ = F_r/[N,N] for Γ₁ = base; otherwise the marking is the lamp
    generators at ē followed by the base generators.
    """

    def __init__(self, lamp: MarkedGroup, base: MarkedGroup, magnus: bool = False,
                 name: Optional[str] = None):
        if not lamp.is_abelian:
            raise GroupError(f"lamp group {lamp.name} must be abelian")
        if magnus and lamp.rank != base.rank:
            raise GroupError("Magnus marking needs lamp rank equal to base rank")
        self.lamp = lamp
        self.base = base
        self.magnus = magnus
        rank = base.rank if magnus else lamp.rank + base.rank
        super().__init__(name or f"wr({lamp.name}, {base.name})", rank)

    # -- configurations ----------------------------------------------------

    def element(self, config: Dict[Element, Element], base: Element) -> Element:
        """Build a normalized element from a site -> lamp mapping."""
        e = self.lamp.identity()
        return (tuple(sorted((k, v) for k, v in config.items() if v != e)), base)

    def translate_config(self, h: Element, config) -> Tuple:
        """τ_h: (site y, value) ↦ (h·y, value)"""
        return tuple(sorted((self.base.multiply(h, y), v) for y, v in config))

    def add_configs(self, f, g) -> Tuple:
        if not g:
            return f
        if not f:
            return g
        acc = dict(f)
        e = self.lamp.identity()
        for y, v in g:
            cur = acc.get(y)
            new = v if cur is None else self.lamp.multiply(cur, v)
            if new == e:
                acc.pop(y, None)
            else:
                acc[y] = new
        return tuple(sorted(acc.items()))

    # -- group law ---------------------------------------------------------

    def identity(self):
        return ((), self.base.identity())

    def multiply(self, a, b):
        f, h = a
        g, k = b
        if g:
            acc = dict(f)
            e = self.lamp.identity()
            for y, v in g:
                site = self.base.multiply(h, y)
                cur = acc.get(site)
                new = v if cur is None else self.lamp.multiply(cur, v)
                if new == e:
                    acc.pop(site, None)
                else:
                    acc[site] = new
            f = tuple(sorted(acc.items()))
        return (f, self.base.multiply(h, k))

    def inverse(self, a):
        f, h = a
        h_inv = self.base.inverse(h)
        return (tuple(sorted((self.base.multiply(h_inv, y), self.lamp.inverse(v)) for y, v in f)), h_inv)

    def lamp_at_identity(self, value: Element) -> Element:
        return self.element({self.base.identity(): value}, self.base.identity())

    def base_element(self, h: Element) -> Element:
        return ((), h)

    def generator(self, i):
        if not 1 <= i <= self.rank:
            raise RankMismatchError(f"generator {i} outside 1..{self.rank}")
        if self.magnus:
            return self.element({self.base.identity(): self.lamp.generator(i)}, self.base.generator(i))
        if i <= self.lamp.rank:
            return self.lamp_at_identity(self.lamp.generator(i))
        return self.base_element(self.base.generator(i - self.lamp.rank))

    @property
    def torsion(self):
        if self.magnus:
            # the lamp ℤ^r is torsion free, so ψ(s_i) has infinite order
            return (False,) * self.rank
        return tuple(self.lamp.torsion) + tuple(self.base.torsion)

    def to_json(self, x):
        f, h = x
        return {
            "config": [{"at": self.base.to_json(y), "lamp": self.lamp.to_json(v)} for y, v in f],
            "base": self.base.to_json(h),
        }

    # -- structure ---------------------------------------------------------

    def project(self, x):
        return x[1]

    def translation(self, x):
        return self.base.translation(x[1])

    def abelianization(self, x):
        if not self.magnus:
            raise GroupError(f"{self.name} has no built-in abelianization")
        return self.base.abelianization(x[1])

    @property
    def has_standard_abelianization(self):
        return self.magnus and self.base.has_standard_abelianization

    def stretch_config(self, config, m: int) -> Tuple:
        """t_m on a Magnus configuration: column i at x spreads over δ_m(x)·s̄_i^j, 0 ≤ j < m."""
        acc: Dict[Element, List[int]] = {}
        for x, vec in config:
            origin = self.base.stretch_element(x, m)
            for i, value in enumerate(vec, 1):
                if value == 0:
                    continue
                site = origin
                step = self.base.generator(i)
                for _ in range(m):
                    slot = acc.setdefault(site, [0] * self.lamp.dim)
                    slot[i - 1] += value
                    site = self.base.multiply(site, step)
        return self.element({k: tuple(v) for k, v in acc.items()}, None)[0]

    def stretch_element(self, x, m):
        if not self.magnus:
            raise GroupError(f"δ_m is not available on {self.name}")
        return (self.stretch_config(x[0], m), self.base.stretch_element(x[1], m))

    def stretch_verified(self, m):
        return self.magnus and self.base.stretch_verified(m)


def make_wreath(lamp: MarkedGroup, base: MarkedGroup) -> WreathProduct:
    return WreathProduct(lamp, base)


def make_free_solvable(d: int, r: int) -> MarkedGroup:
    """
    S_{d,r} = F_r / F_r^{(d)}: ℤ^r for d = 1, otherwise Magnus pairs over S_{d-1,r}.
    """
    if d < 1 or r < 1:
        raise GroupError(f"free solvable group needs d >= 1 and r >= 1, got d={d}, r={r}")
    group: MarkedGroup = AbelianGroup(f"sdr:1,{r}", r)
    for level in range(2, d + 1):
        group = WreathProduct(AbelianGroup(f"zr:{r}", r), group, magnus=True, name=f"sdr:{level},{r}")
    return group


# ---------------------------------------------------------------------------
# Words, balls, spec strings
# ---------------------------------------------------------------------------

def evaluate_word(group: MarkedGroup, w: ReducedWord) -> Element:
    """Product of generator images; the empty word gives the identity."""
    if w.rank != group.rank:
        raise RankMismatchError(f"word of rank {w.rank} on group {group.name} of rank {group.rank}")
    x = group.identity()
    for gen, sign in w:
        x = group.multiply(x, group.letter(gen, sign))
    return x


@dataclass
class BallLayer:
    radius: int
    size: int
    frontier: List[Element]


def ball(group: MarkedGroup, radius: int, budget: Optional[int] = None) -> List[BallLayer]:
    """
    Breadth-first sphere enumeration with generators s̄_i^{±1}.
    Raises BudgetExceeded (with the layers found so far) once the ball would
    hold more than `budget` elements.
    """
    steps = group.symmetric_generators()
    e = group.identity()
    seen = {e}
    frontier = [e]
    layers = [BallLayer(0, 1, [e])]
    for k in range(1, radius + 1):
        nxt = []
        for x in frontier:
            for s in steps:
                y = group.multiply(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if budget is not None and len(seen) > budget:
                        raise BudgetExceeded(
                            f"ball of {group.name} exceeds {budget} elements at radius {k}", partial=layers)
        layers.append(BallLayer(k, len(seen), nxt))
        frontier = nxt
    return layers


def ball_elements(group: MarkedGroup, radius: int, budget: Optional[int] = None) -> List[Element]:
    return [x for layer in ball(group, radius, budget) for x in layer.frontier]


def _split_top_level(text: str, sep: str) -> List[str]:
    parts, depth, current = [], 0, []
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        if char == sep and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(char)
    parts.append("".join(current))
    return [p.strip() for p in parts]


_GROUP_START = re.compile(r"\s*(zr|tm|llsw|ll|bs|sdr|wr|marked)[:(]")


def _split_wreath_args(text: str) -> List[str]:
    """Split "lamp, base" at the top-level commas that begin another group spec."""
    cuts, depth = [], 0
    for pos, char in enumerate(text):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        elif char == "," and depth == 0 and _GROUP_START.match(text, pos + 1):
            cuts.append(pos)
    bounds = [-1] + cuts + [len(text)]
    return [text[a + 1:b].strip() for a, b in zip(bounds, bounds[1:])]


def parse_group_spec(text: str) -> MarkedGroup:
    """
    Build a group from a spec string: zr:2, tm:2,2, ll:2, llsw:2, bs:3, sdr:3,2,
    wr(zr:1, zr:2), marked(zr:1; 1; 0).
    """
    spec = (text or "").strip()
    try:
        if spec.startswith("wr(") and spec.endswith(")"):
            parts = _split_wreath_args(spec[3:-1])
            if len(parts) != 2:
                raise GroupSpecError(f"wr(...) needs a lamp and a base: {text!r}")
            return make_wreath(parse_group_spec(parts[0]), parse_group_spec(parts[1]))
        if spec.startswith("marked(") and spec.endswith(")"):
            parts = _split_top_level(spec[7:-1], ";")
            inner = parse_group_spec(parts[0])
            if not isinstance(inner, AbelianGroup) or not inner.standard_marking:
                raise GroupSpecError(f"marked(...) needs zr:D or tm:... inside: {text!r}")
            images = [parse_int_list(p, "generator image") for p in parts[1:]]
            moduli = None if all(m is None for m in inner.moduli) else list(inner.moduli)
            return make_abelian_group(inner.dim, moduli, images)
        kind, _, args = spec.partition(":")
        values = parse_int_list(args, kind or "group")
        if kind == "zr" and len(values) == 1:
            return make_abelian_group(values[0])
        if kind == "tm" and values:
            return make_abelian_group(len(values), values)
        if kind == "ll" and len(values) == 1:
            return make_lamplighter(values[0])
        if kind == "llsw" and len(values) == 1:
            return make_lamplighter(values[0], marking="sw")
        if kind == "bs" and len(values) == 1:
            return make_bs(values[0])
        if kind == "sdr" and len(values) == 2:
            return make_free_solvable(values[0], values[1])
    except GroupError as exc:
        raise GroupSpecError(f"invalid group spec {text!r}: {exc}")
    raise GroupSpecError(f"unknown group spec {text!r}")


def validate_group_spec(text: str):
    try:
        group = parse_group_spec(text)
    except GroupSpecError as exc:
        return False, str(exc)
    return True, f"{group.name} (rank {group.rank})"
