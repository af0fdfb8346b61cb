"""
Step Measures and Exact Convolution
===================================

Symmetric laws on ℤ, step measures supported on generator powers, the lower-bound
measure φ on ℤ^r ≀ Γ₁, switch-walk-switch measures on wreath products, pushforwards
along homomorphisms, and exact sparse convolution powers.

Weights are `Fraction` whenever every weight is rational and the support is finite;
otherwise they are floats and the measure is tagged inexact. The two are never mixed.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from rich.progress import BarColumn, Progress, TextColumn, TimeElapsedColumn

from .groups import (
    AbelianGroup,
    Element,
    MarkedGroup,
    WreathProduct,
    evaluate_word,
    make_abelian_group,
)
from .utils import (
    BudgetExceeded,
    GroupError,
    MeasureError,
    RankMismatchError,
    console,
    get_logger,
)
from .words import ReducedWord

logger = get_logger(__name__)

Weight = Union[Fraction, float]

FLOAT_TOLERANCE = 1e-12
DEFAULT_CUTOFF = 10_000


def _is_exact(values) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


# ---------------------------------------------------------------------------
# Laws on ℤ
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegerLaw:
    """
    Finitely supported symmetric law on ℤ as sorted (m, weight) pairs.
    `normalization` is the sum of the unnormalized weights (power laws only).
    """

    weights: Tuple[Tuple[int, Weight], ...]
    exact: bool
    name: str = "law"
    normalization: Optional[float] = None
    cutoff: Optional[int] = None
    alpha: Optional[float] = None

    def __iter__(self):
        return iter(self.weights)

    def as_dict(self) -> Dict[int, Weight]:
        return dict(self.weights)

    def mass(self, m: int) -> Weight:
        return self.as_dict().get(m, Fraction(0) if self.exact else 0.0)

    @property
    def max_jump(self) -> int:
        return max(abs(m) for m, _ in self.weights)


def validate_law(weights: Dict[int, Weight]) -> Tuple[bool, str]:
    """
    Check positivity, total mass one and symmetry m ↔ -m
    """
    if not weights:
        return False, "law has no atoms"
    for m, w in weights.items():
        if w <= 0:
            return False, f"weight at {m} is {w}, must be positive"
        if weights.get(-m) != w:
            return False, f"law is not symmetric at {m}"
    total = sum(weights.values())
    if _is_exact(weights.values()):
        if total != 1:
            return False, f"weights sum to {total}, not 1"
    elif abs(total - 1.0) > FLOAT_TOLERANCE:
        return False, f"weights sum to {total!r}, not 1"
    return True, "law valid"


def _law(weights: Dict[int, Weight], name: str, **extra) -> IntegerLaw:
    ok, message = validate_law(weights)
    if not ok:
        raise MeasureError(f"{name}: {message}")
    return IntegerLaw(tuple(sorted(weights.items())), _is_exact(weights.values()), name, **extra)


def lazy_law() -> IntegerLaw:
    """p(0) = 1/2, p(±1) = 1/4."""
    return _law({-1: Fraction(1, 4), 0: Fraction(1, 2), 1: Fraction(1, 4)}, "lazy")


def make_pm_one_law() -> IntegerLaw:
    """η(±1) = 1/2."""
    return _law({-1: Fraction(1, 2), 1: Fraction(1, 2)}, "pm-one")


def make_uniform_law(values: Sequence[int]) -> IntegerLaw:
    values = sorted(set(int(v) for v in values))
    if not values:
        raise MeasureError("uniform law needs at least one value")
    weight = Fraction(1, len(values))
    return _law({v: weight for v in values}, "uniform{" + ",".join(str(v) for v in values) + "}")


def make_power_law(alpha: float, cutoff: int = DEFAULT_CUTOFF) -> IntegerLaw:
    """
    p_α(m) ∝ (1+|m|)^{-1-α} on |m| <= cutoff, renormalized. alpha=inf gives the lazy law.
    """
    if math.isinf(alpha) and alpha > 0:
        return lazy_law()
    if not 0 < alpha <= 2:
        raise MeasureError(f"power-law exponent must lie in (0, 2], got {alpha}")
    if cutoff < 1:
        raise MeasureError(f"power-law cutoff must be >= 1, got {cutoff}")
    m = np.arange(-cutoff, cutoff + 1)
    raw = (1.0 + np.abs(m)) ** (-1.0 - alpha)
    normalization = float(raw.sum())
    weights = {int(k): float(w) / normalization for k, w in zip(m, raw)}
    # mirror so the two sides are bitwise equal
    for k in range(1, cutoff + 1):
        weights[-k] = weights[k]
    total = math.fsum(weights.values())
    if abs(total - 1.0) > FLOAT_TOLERANCE:
        raise MeasureError(f"power law does not normalize: total {total!r}")
    return IntegerLaw(tuple(sorted(weights.items())), False, f"power-law(alpha={alpha}, cutoff={cutoff})",
                      normalization=normalization, cutoff=cutoff, alpha=alpha)


# ---------------------------------------------------------------------------
# Measure specs and distributions
# ---------------------------------------------------------------------------

@dataclass
class MeasureSpec:
    """
    Finitely supported probability measure on `group`.
    `powers` maps (i, m) to the weight put on s_i^m when the measure was built on
    generator powers; several (i, m) may land on the same element (m = 0).
    """

    group: MarkedGroup
    atoms: Dict[Element, Weight]
    exact: bool
    name: str = "measure"
    powers: Optional[Dict[Tuple[int, int], Weight]] = None

    def mass(self, x: Element) -> Weight:
        return self.atoms.get(x, Fraction(0) if self.exact else 0.0)

    def total(self) -> Weight:
        return sum(self.atoms.values()) if self.exact else math.fsum(self.atoms.values())

    def support_size(self) -> int:
        return len(self.atoms)

    def sorted_atoms(self) -> List[Tuple[Element, Weight]]:
        """Atoms in canonical-key order, independent of construction order."""
        key = self.group.canonical_key
        return sorted(self.atoms.items(), key=lambda item: key(item[0]))

    def is_symmetric(self) -> bool:
        for x, w in self.atoms.items():
            other = self.atoms.get(self.group.inverse(x))
            if other is None:
                return False
            if self.exact and other != w:
                return False
            if not self.exact and abs(other - w) > FLOAT_TOLERANCE * max(w, 1e-300):
                return False
        return True

    def sampler(self) -> Tuple[List[Element], np.ndarray]:
        """Atoms and their cumulative probabilities, for inverse-CDF sampling."""
        items = self.sorted_atoms()
        probs = np.array([float(w) for _, w in items], dtype=float)
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        return [x for x, _ in items], cdf


def validate_measure(spec: MeasureSpec) -> Tuple[bool, str]:
    if not spec.atoms:
        return False, "measure has no atoms"
    if any(w <= 0 for w in spec.atoms.values()):
        return False, "measure has a non-positive weight"
    total = spec.total()
    if spec.exact and total != 1:
        return False, f"weights sum to {total}, not 1"
    if not spec.exact and abs(total - 1.0) > FLOAT_TOLERANCE:
        return False, f"weights sum to {total!r}, not 1"
    if not spec.is_symmetric():
        return False, "measure is not symmetric"
    return True, "measure valid"


def _checked(spec: MeasureSpec) -> MeasureSpec:
    ok, message = validate_measure(spec)
    if not ok:
        raise MeasureError(f"{spec.name}: {message}")
    return spec


@dataclass
class Distribution:
    """Result of a convolution; `deficit` is the mass dropped by pruning."""

    group: MarkedGroup
    masses: Dict[Element, Weight]
    exact: bool
    steps: int = 0
    deficit: Weight = 0

    def mass(self, x: Element) -> Weight:
        return self.masses.get(x, Fraction(0) if self.exact else 0.0)

    def at_identity(self) -> Weight:
        return self.mass(self.group.identity())

    def total(self) -> Weight:
        return sum(self.masses.values()) if self.exact else math.fsum(self.masses.values())

    def support_size(self) -> int:
        return len(self.masses)


def delta_measure(group: MarkedGroup) -> MeasureSpec:
    return MeasureSpec(group, {group.identity(): Fraction(1)}, True, "delta", powers={})


def law_measure(law: IntegerLaw, group: Optional[AbelianGroup] = None) -> MeasureSpec:
    """A law on ℤ as a measure on the rank-one group zr:1."""
    group = group or make_abelian_group(1)
    if group.rank != 1:
        raise MeasureError(f"law on ℤ needs a rank-one group, got {group.name}")
    return make_generator_power_measure(group, [law])


def make_generator_power_measure(group: MarkedGroup, laws: Sequence[IntegerLaw],
                                 name: Optional[str] = None) -> MeasureSpec:
    """
    μ(s_i^m) = p_i(m)/r. A single law is used for every generator.
    """
    r = group.rank
    if len(laws) == 1 and r > 1:
        laws = list(laws) * r
    if len(laws) != r:
        raise RankMismatchError(f"{len(laws)} laws for a group of rank {r}")
    exact = all(law.exact for law in laws)
    atoms: Dict[Element, Weight] = {}
    powers: Dict[Tuple[int, int], Weight] = {}
    for i, law in enumerate(laws, 1):
        step = group.generator(i)
        for m, w in law:
            weight = Fraction(w) / r if exact else float(w) / r
            powers[(i, m)] = weight
            x = group.power(step, m)
            atoms[x] = atoms.get(x, 0) + weight
    label = name or "gen-powers(" + ", ".join(law.name for law in laws) + ")"
    return _checked(MeasureSpec(group, atoms, exact, label, powers))


def make_lazy_srw(group: MarkedGroup) -> MeasureSpec:
    """μ(e) = 1/2, μ(s_i^{±1}) = 1/(4r)."""
    return make_generator_power_measure(group, [lazy_law()], name="lazy-srw")


def make_switch_law(r: int) -> MeasureSpec:
    """η_r(0) = 1/2, η_r(±ε_i) = 1/(4r) on ℤ^r."""
    return make_generator_power_measure(make_abelian_group(r), [lazy_law()], name=f"switch({r})")


def make_phi_lower_measure(laws: Sequence[IntegerLaw], base: MarkedGroup) -> MeasureSpec:
    """
    φ on ℤ^r ≀ Γ₁ with atoms (δ^i, 0)(0, s̄_i^m)(-δ^i, 0) of weight p_i(m)/r,
    δ^i = ε_i at ē. Every s̄_i must have infinite order.
    """
    torsion = [i for i, flag in enumerate(base.torsion, 1) if flag]
    if torsion:
        listed = ", ".join(f"s{i}" for i in torsion)
        raise MeasureError(
            f"{base.name}: generators {listed} have finite order; the lower-bound "
            f"measure equals the walk on Γ₂ only when no marked generator is torsion")
    r = base.rank
    if len(laws) == 1 and r > 1:
        laws = list(laws) * r
    if len(laws) != r:
        raise RankMismatchError(f"{len(laws)} laws for a group of rank {r}")
    wreath = WreathProduct(make_abelian_group(r), base, name=f"wr(zr:{r}, {base.name})")
    exact = all(law.exact for law in laws)
    atoms: Dict[Element, Weight] = {}
    powers: Dict[Tuple[int, int], Weight] = {}
    for i, law in enumerate(laws, 1):
        switch = wreath.lamp_at_identity(wreath.lamp.generator(i))
        unswitch = wreath.inverse(switch)
        for m, w in law:
            weight = Fraction(w) / r if exact else float(w) / r
            x = wreath.multiply(wreath.multiply(switch, wreath.base_element(base.generator_power(i, m))), unswitch)
            atoms[x] = atoms.get(x, 0) + weight
            powers[(i, m)] = weight
    return _checked(MeasureSpec(wreath, atoms, exact, "phi-lower", powers))


# ---------------------------------------------------------------------------
# Convolution
# ---------------------------------------------------------------------------

def convolve(first: Dict[Element, Weight], second: Dict[Element, Weight], group: MarkedGroup) -> Dict[Element, Weight]:
    """(a * b)(z) = Σ_{xy=z} a(x) b(y), without pruning."""
    out: Dict[Element, Weight] = {}
    multiply = group.multiply
    for x, p in first.items():
        for y, q in second.items():
            z = multiply(x, y)
            out[z] = out.get(z, 0) + p * q
    return {z: w for z, w in out.items() if w != 0}


def make_progress(enabled: bool) -> Progress:
    return Progress(TextColumn("[progress.description]{task.description}"), BarColumn(),
                    TextColumn("{task.completed}/{task.total}"), TimeElapsedColumn(),
                    console=console, transient=True, disable=not enabled)


def convolve_power(spec: MeasureSpec, n: int, budget: Optional[int] = None,
                   mass_floor: Optional[float] = None, show_progress: bool = False) -> Distribution:
    """
    μ^{*n} by repeated sparse multiply-accumulate. Atoms below `mass_floor` are
    dropped in float mode only, their mass added to `deficit`.

    When a step's support exceeds `budget` the smallest atoms are pruned into
    `deficit` and the convolution carries on to step n; BudgetExceeded is then
    raised with that step-n distribution, for which
    at_identity() <= μ^{(n)}(e) <= at_identity() + deficit.
    """
    if n < 0:
        raise MeasureError(f"convolution power must be >= 0, got {n}")
    group = spec.group
    current: Dict[Element, Weight] = {group.identity(): Fraction(1) if spec.exact else 1.0}
    deficit: Weight = Fraction(0) if spec.exact else 0.0
    steps = spec.sorted_atoms()
    multiply = group.multiply
    first_pruned: Optional[int] = None
    with make_progress(show_progress and console.is_terminal) as progress:
        task = progress.add_task(f"convolving {spec.name}", total=n)
        for k in range(1, n + 1):
            nxt: Dict[Element, Weight] = {}
            for x, p in current.items():
                for g, w in steps:
                    y = multiply(x, g)
                    nxt[y] = nxt.get(y, 0) + p * w
            if not spec.exact and mass_floor:
                dropped = [y for y, w in nxt.items() if w < mass_floor]
                deficit += math.fsum(nxt.pop(y) for y in dropped)
            if budget is not None and len(nxt) > budget:
                deficit += _prune_to_budget(nxt, budget, group, spec.exact)
                if first_pruned is None:
                    first_pruned = k
                    logger.warning("support of %s^%d exceeds %d atoms; pruning the smallest",
                                   spec.name, k, budget)
            current = nxt
            progress.advance(task)
            logger.debug("step %d: support %d", k, len(current))
    result = Distribution(group, current, spec.exact, n, deficit)
    if first_pruned is not None:
        raise BudgetExceeded(
            f"support of {spec.name}^{first_pruned} exceeds {budget} atoms; "
            f"step {n} is truncated with deficit {float(deficit):.3g}",
            partial=result)
    return result


def _prune_to_budget(masses: Dict[Element, Weight], budget: int, group: MarkedGroup, exact: bool) -> Weight:
    """Drop the smallest atoms (ties by canonical key) until `budget` remain; returns their mass."""
    key = group.canonical_key
    order = sorted(masses, key=lambda x: (masses[x], key(x)))
    dropped = [masses.pop(x) for x in order[:len(masses) - budget]]
    return sum(dropped, Fraction(0)) if exact else math.fsum(dropped)


def return_probability_exact(spec: MeasureSpec, n: int, budget: Optional[int] = None) -> Weight:
    """μ^{(n)}(e); a Fraction for exact specs."""
    return convolve_power(spec, n, budget=budget).at_identity()


# ---------------------------------------------------------------------------
# Switch-walk-switch
# ---------------------------------------------------------------------------

def sws(eta: MeasureSpec, mu: MeasureSpec, target: Optional[WreathProduct] = None) -> MeasureSpec:
    """
    η ⋆ μ ⋆ η on A ≀ G: switch at the current site, move by μ, switch again.
    """
    if target is None:
        target = WreathProduct(eta.group, mu.group, name=f"wr({eta.group.name}, {mu.group.name})")
    if target.lamp.name != eta.group.name or target.base.name != mu.group.name:
        raise MeasureError(
            f"switch-walk-switch on {target.name} needs η on {target.lamp.name} and μ on "
            f"{target.base.name}, got {eta.group.name} and {mu.group.name}")
    if eta.exact != mu.exact:
        raise MeasureError("switch-walk-switch needs both measures exact or both inexact")
    lamp_moves = {target.lamp_at_identity(a): w for a, w in eta.atoms.items()}
    base_moves = {target.base_element(h): w for h, w in mu.atoms.items()}
    atoms = convolve(convolve(lamp_moves, base_moves, target), lamp_moves, target)
    return MeasureSpec(target, atoms, eta.exact, f"sws({eta.name}, {mu.name})")


def iterated_sws(eta: MeasureSpec, mu: MeasureSpec, k: int) -> MeasureSpec:
    """q_k = η ⋆_k q_{k-1} ⋆_k η on W_k = A ≀ W_{k-1}, q_0 = μ."""
    if k < 1:
        raise MeasureError(f"iterated switch-walk-switch needs k >= 1, got {k}")
    q = mu
    for _ in range(k):
        q = sws(eta, q)
    return q


# ---------------------------------------------------------------------------
# Homomorphisms and pushforward
# ---------------------------------------------------------------------------

class Homomorphism:
    """
    Group homomorphism source → target given by an element map. Maps defined
    only on generator powers (tables) override `apply_power` and set
    `needs_powers`.
    """

    needs_powers = False

    def __init__(self, name: str, source: MarkedGroup, target: MarkedGroup,
                 func: Optional[Callable[[Element], Element]] = None):
        self.name = name
        self.source = source
        self.target = target
        self._func = func

    def __repr__(self):
        return f"<Homomorphism {self.name}: {self.source.name} -> {self.target.name}>"

    def apply(self, x: Element) -> Element:
        if self._func is None:
            raise GroupError(f"{self.name} is only defined on generator powers")
        return self._func(x)

    def apply_power(self, i: int, m: int) -> Element:
        return self.apply(self.source.generator_power(i, m))


class GeneratorTableMap(Homomorphism):
    """s_i ↦ images[i]; defined on words and on generator powers."""

    needs_powers = True

    def __init__(self, source: MarkedGroup, target: MarkedGroup, images: Sequence[Union[Element, ReducedWord]]):
        if len(images) != source.rank:
            raise RankMismatchError(f"{len(images)} images for {source.rank} generators")
        resolved = []
        for image in images:
            if isinstance(image, ReducedWord):
                image = evaluate_word(target, image)
            else:
                try:
                    target.canonical_key(image)
                    target.multiply(target.identity(), image)
                except (TypeError, ValueError, KeyError, IndexError, AttributeError) as exc:
                    raise MeasureError(f"image {image!r} is not an element of {target.name}: {exc}")
            resolved.append(image)
        super().__init__(f"table({source.name} -> {target.name})", source, target)
        self.images = resolved

    def apply_power(self, i, m):
        return self.target.power(self.images[i - 1], m)

    def apply_word(self, w: ReducedWord) -> Element:
        if w.rank != self.source.rank:
            raise RankMismatchError(f"word of rank {w.rank} for a map on rank {self.source.rank}")
        x = self.target.identity()
        for gen, sign in w:
            image = self.images[gen - 1]
            x = self.target.multiply(x, image if sign > 0 else self.target.inverse(image))
        return x


def abelianization_map(group: MarkedGroup) -> Homomorphism:
    if not group.has_standard_abelianization:
        raise GroupError(f"{group.name} has no built-in abelianization onto ℤ^r")
    return Homomorphism(f"ab({group.name})", group, make_abelian_group(group.rank), group.abelianization)


def projection_map(group: MarkedGroup) -> Homomorphism:
    if not isinstance(group, WreathProduct):
        raise GroupError(f"{group.name} has no built-in projection")
    return Homomorphism(f"proj({group.name})", group, group.base, group.project)


def mod_map(group: AbelianGroup, q: int) -> Homomorphism:
    """ℤ^r → (ℤ/q)^r, coordinatewise reduction."""
    if not isinstance(group, AbelianGroup) or any(m is not None for m in group.moduli):
        raise GroupError(f"mod map needs a free abelian source, got {group.name}")
    target = make_abelian_group(group.dim, [q] * group.dim)
    return Homomorphism(f"mod{q}({group.name})", group, target, lambda x: tuple(c % q for c in x))


def stretch_map(group: MarkedGroup, m: int) -> Homomorphism:
    return Homomorphism(f"delta{m}({group.name})", group, group, lambda x: group.stretch_element(x, m))


def lift_map(theta: Homomorphism, lamp: MarkedGroup) -> Homomorphism:
    """
    θ₁: A ≀ G → A ≀ H, (f, x) ↦ (f̄, θ(x)) with f̄(h) = Σ_{θ(g)=h} f(g).
    """
    source = WreathProduct(lamp, theta.source, name=f"wr({lamp.name}, {theta.source.name})")
    target = WreathProduct(lamp, theta.target, name=f"wr({lamp.name}, {theta.target.name})")

    def lifted(x):
        config, base = x
        fibers: Dict[Element, Element] = {}
        for g, value in config:
            h = theta.apply(g)
            fibers[h] = lamp.multiply(fibers[h], value) if h in fibers else value
        return target.element(fibers, theta.apply(base))

    return Homomorphism(f"lift({theta.name})", source, target, lifted)


def lift_map_k(theta: Homomorphism, lamp: MarkedGroup, k: int) -> Homomorphism:
    """θ_k = (θ_{k-1})₁ on W_k."""
    if k < 0:
        raise GroupError(f"lift depth must be >= 0, got {k}")
    for _ in range(k):
        theta = lift_map(theta, lamp)
    return theta


def generator_table_map(source: MarkedGroup, target: MarkedGroup,
                        images: Sequence[Union[Element, ReducedWord]]) -> GeneratorTableMap:
    return GeneratorTableMap(source, target, images)


def pushforward(spec: MeasureSpec, hom: Homomorphism) -> MeasureSpec:
    """θ(μ)(h) = Σ_{θ(g)=h} μ(g)."""
    if spec.group.name != hom.source.name:
        raise MeasureError(f"{hom.name} is defined on {hom.source.name}, measure lives on {spec.group.name}")
    atoms: Dict[Element, Weight] = {}
    if hom.needs_powers:
        if spec.powers is None:
            raise MeasureError(f"{hom.name} needs a measure built on generator powers")
        for (i, m), w in spec.powers.items():
            y = hom.apply_power(i, m)
            atoms[y] = atoms.get(y, 0) + w
    else:
        for x, w in spec.atoms.items():
            y = hom.apply(x)
            atoms[y] = atoms.get(y, 0) + w
    return MeasureSpec(hom.target, atoms, spec.exact, f"{hom.name}_*({spec.name})")


# ---------------------------------------------------------------------------
# Weak moment
# ---------------------------------------------------------------------------

def weak_moment(spec: MeasureSpec, alpha: float) -> float:
    """
    W(ρ_α, μ) = sup_s s·μ(ρ_α > s) with ρ_α(s_i^m) = (1+|m|)^α for m ≠ 0 and
    ρ_α(e) = 0, evaluated at the jump points of the tail.
    """
    if spec.powers is None:
        raise MeasureError(f"{spec.name} is not supported on generator powers")
    if alpha <= 0:
        raise MeasureError(f"weak moment exponent must be positive, got {alpha}")
    torsion = [i for i, flag in enumerate(spec.group.torsion, 1) if flag]
    if torsion:
        listed = ", ".join(f"s{i}" for i in torsion)
        raise MeasureError(f"{spec.group.name}: generators {listed} have finite order, "
                           f"so |s_i^m| is not |m| and the weak moment is undefined")
    by_value: Dict[float, float] = {}
    for (_, m), w in spec.powers.items():
        if m == 0:
            continue
        v = (1.0 + abs(m)) ** alpha
        by_value[v] = by_value.get(v, 0.0) + float(w)
    best = 0.0
    tail = 0.0
    for v in sorted(by_value, reverse=True):
        tail += by_value[v]
        best = max(best, v * tail)
    return best
