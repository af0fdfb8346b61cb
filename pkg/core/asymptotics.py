"""
Asymptotics
===========

Return-probability profiles as (exponent, value) pairs, the Witt degree D(r,c),
volume functions and the γ function they determine, Følner couple counts for
boxes in ℤ^D and their wreath lifts, and the lowest Dirichlet eigenvalue of a
finite set.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, sparse
from scipy.sparse.linalg import splu
from scipy.special import lambertw
from sympy import divisors
from sympy.functions.combinatorial.numbers import mobius

from .groups import Element
from .measures import MeasureSpec
from .utils import BudgetExceeded, ProfileError, get_logger

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

def iterated_log(i: int, n: float) -> float:
    """log_[0] n = n, log_[i] n = log(1 + log_[i-1] n)."""
    if i < 0:
        raise ProfileError(f"iterated log depth must be >= 0, got {i}")
    if n < 0:
        raise ProfileError(f"iterated log needs n >= 0, got {n}")
    value = float(n)
    for _ in range(i):
        value = math.log1p(value)
    return value


def witt_degree(r: int, c: int) -> int:
    """
    D(r,c) = Σ_{m<=c} Σ_{k|m} μ(k) r^{m/k}, the growth degree of the free
    nilpotent group of class c on r generators.
    """
    if r < 1 or c < 1:
        raise ProfileError(f"Witt degree needs r >= 1 and c >= 1, got r={r}, c={c}")
    return sum(int(mobius(k)) * r ** (m // k) for m in range(1, c + 1) for k in divisors(m))


@dataclass(frozen=True)
class FamilyInfo:
    params: Tuple[str, ...]
    description: str


FAMILIES: Dict[str, FamilyInfo] = {
    "polynomial": FamilyInfo(("D",), "n^{-D/2}"),
    "metabelian": FamilyInfo(("r",), "exp(-n^{r/(r+2)} (log n)^{2/(r+2)})"),
    "free-solvable": FamilyInfo(("d", "r"), "exp(-n (log_[d-1] n / log_[d-2] n)^{2/r})"),
    "nilpotent-base": FamilyInfo(("D",), "exp(-n^{D/(D+2)} (log n)^{2/(D+2)})"),
    "log2": FamilyInfo((), "exp(-n / (log n)^2)"),
    "lamplighter-base": FamilyInfo(("d",), "exp(-n / (log n)^{2/d})"),
    "zwr-zd-base": FamilyInfo(("d",), "exp(-n (log log n / log n)^{2/d})"),
    "polycyclic-base": FamilyInfo(("d",), "exp(-n / (log log n)^{2/(d+1)})"),
    "alpha-metabelian": FamilyInfo(("r", "alpha"), "exp(-n^{r/(r+a)} (log n)^{a/(r+a)})"),
    "scdr": FamilyInfo(("d", "r", "c"), "exp(-n (log_[d-1] n / log_[d-2] n)^{2/D(r,c)})"),
    "weak-free-solvable": FamilyInfo(("d", "r", "alpha"), "exp(-n (log_[d-1] n / log_[d-2] n)^{a/r})"),
    "poly-weak": FamilyInfo(("D", "alpha"), "n^{-D/a}"),
}

_POLYNOMIAL_FAMILIES = {"polynomial", "poly-weak"}


@dataclass
class ProfileSpec:
    family: str
    params: Dict[str, float] = field(default_factory=dict)

    @property
    def label(self) -> str:
        args = ",".join(f"{k}={self.params[k]:g}" for k in FAMILIES[self.family].params)
        return f"{self.family}({args})"


@dataclass
class ProfilePoint:
    n: float
    exponent: float
    value: float


def validate_profile(spec: ProfileSpec) -> Tuple[bool, str]:
    if spec.family not in FAMILIES:
        return False, f"unknown family {spec.family!r} (known: {', '.join(sorted(FAMILIES))})"
    info = FAMILIES[spec.family]
    missing = [p for p in info.params if p not in spec.params]
    if missing:
        return False, f"{spec.family} needs parameters {', '.join(missing)}"
    p = spec.params
    if "r" in p and p["r"] < 1:
        return False, f"r must be >= 1, got {p['r']}"
    if spec.family in ("metabelian", "free-solvable", "scdr") and p.get("r", 2) < 2:
        return False, f"r must be >= 2, got {p['r']}"
    if "D" in p and p["D"] < 1:
        return False, f"D must be >= 1, got {p['D']}"
    if "d" in p:
        low = 3 if spec.family in ("free-solvable", "scdr", "weak-free-solvable") else 1
        if p["d"] < low:
            return False, f"d must be >= {low}, got {p['d']}"
    if "c" in p and p["c"] < 1:
        return False, f"c must be >= 1, got {p['c']}"
    if "alpha" in p and not 0 < p["alpha"] <= 2:
        return False, f"alpha must lie in (0, 2], got {p['alpha']}"
    return True, "profile valid"


def parse_profile(family: str, params: str) -> ProfileSpec:
    """params like "d=3,r=2" or positional "3,2" in the family's parameter order."""
    if family not in FAMILIES:
        raise ProfileError(f"unknown family {family!r} (known: {', '.join(sorted(FAMILIES))})")
    names = FAMILIES[family].params
    values: Dict[str, float] = {}
    parts = [p.strip() for p in (params or "").split(",") if p.strip()]
    for pos, part in enumerate(parts):
        key, sep, raw = part.partition("=")
        if not sep:
            if pos >= len(names):
                raise ProfileError(f"too many parameters for {family}: {params!r}")
            key, raw = names[pos], part
        try:
            values[key.strip()] = float(raw)
        except ValueError:
            raise ProfileError(f"parameter {key.strip()} is not a number: {raw!r}")
    spec = ProfileSpec(family, values)
    ok, message = validate_profile(spec)
    if not ok:
        raise ProfileError(message)
    return spec


def _ratio_power(n: float, d: int, power: float) -> float:
    return (iterated_log(d - 1, n) / iterated_log(d - 2, n)) ** power


def profile_exponent(spec: ProfileSpec, n: float) -> float:
    """The quantity E(n) with Φ(n) = exp(-E(n))."""
    if n < 3:
        raise ProfileError(f"profiles are evaluated for n >= 3, got {n}")
    p = spec.params
    log_n = math.log(n)
    family = spec.family
    if family == "polynomial":
        return p["D"] / 2 * log_n
    if family == "poly-weak":
        return p["D"] / p["alpha"] * log_n
    if family == "metabelian":
        r = p["r"]
        return n ** (r / (r + 2)) * log_n ** (2 / (r + 2))
    if family == "nilpotent-base":
        D = p["D"]
        return n ** (D / (D + 2)) * log_n ** (2 / (D + 2))
    if family == "alpha-metabelian":
        r, a = p["r"], p["alpha"]
        return n ** (r / (r + a)) * log_n ** (a / (r + a))
    if family == "free-solvable":
        return n * _ratio_power(n, int(p["d"]), 2 / p["r"])
    if family == "scdr":
        D = witt_degree(int(p["r"]), int(p["c"]))
        return n * _ratio_power(n, int(p["d"]), 2 / D)
    if family == "weak-free-solvable":
        return n * _ratio_power(n, int(p["d"]), p["alpha"] / p["r"])
    if family == "log2":
        return n / log_n ** 2
    if family == "lamplighter-base":
        return n / log_n ** (2 / p["d"])
    if family == "zwr-zd-base":
        return n * (math.log(log_n) / log_n) ** (2 / p["d"])
    if family == "polycyclic-base":
        return n / math.log(log_n) ** (2 / (p["d"] + 1))
    raise ProfileError(f"unknown family {family!r}")


def phi_profile(spec: ProfileSpec, n: float) -> ProfilePoint:
    ok, message = validate_profile(spec)
    if not ok:
        raise ProfileError(message)
    exponent = profile_exponent(spec, n)
    # underflows to 0.0 for large exponents; the exponent carries the information
    return ProfilePoint(n, exponent, math.exp(-exponent))


def parse_n_grid(text: str) -> List[int]:
    """"a:b:steps" gives `steps` log-spaced integers from a to b; "a,b,c" is a list."""
    try:
        if ":" in text:
            a, b, steps = text.split(":")
            a, b, steps = float(a), float(b), int(steps)
            if steps < 1 or a <= 0 or b < a:
                raise ValueError
            grid = np.unique(np.round(np.geomspace(a, b, steps)).astype(np.int64))
            return [int(x) for x in grid]
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ProfileError(f"invalid grid {text!r}; use a:b:steps or a comma list")


# ---------------------------------------------------------------------------
# Volume functions and γ
# ---------------------------------------------------------------------------

@dataclass
class VolumeFunction:
    """
    Increasing 𝒱 on [1, ∞) given in log form: log_volume(t) = log 𝒱(t) and
    inverse_log(L) = 𝒱⁻¹(e^L).
    """

    name: str
    log_volume: Callable[[float], float]
    inverse_log: Callable[[float], float]
    tag: str = ""

    def volume(self, t: float) -> float:
        return math.exp(self.log_volume(t))


def power_volume(D: float, c: float = 1.0) -> VolumeFunction:
    """𝒱(t) = c t^D."""
    if D <= 0 or c <= 0:
        raise ProfileError(f"power volume needs D > 0 and c > 0, got D={D}, c={c}")
    log_c = math.log(c)
    return VolumeFunction(f"power(D={D:g}, c={c:g})",
                          lambda t: log_c + D * math.log(t),
                          lambda L: math.exp((L - log_c) / D),
                          tag=f"t^{D:g}")


def stretched_exponential_volume(a: float) -> VolumeFunction:
    """𝒱(t) = exp(t^a)."""
    if a <= 0:
        raise ProfileError(f"stretched exponential needs a > 0, got {a}")
    return VolumeFunction(f"stretched(a={a:g})",
                          lambda t: t ** a,
                          lambda L: max(L, 0.0) ** (1 / a),
                          tag=f"exp(t^{a:g})")


def _exp_tower(m: int, x: float) -> float:
    for _ in range(m):
        x = math.exp(x)
    return x


def _log_tower(m: int, x: float) -> float:
    for _ in range(m):
        if x <= 0:
            return -math.inf
        x = math.log(x)
    return x


def tower_volume(m: int) -> VolumeFunction:
    """
    𝒱(t) = exp(ℓ⁻¹(t)) with ℓ⁻¹(t) = exp^{∘m}(t log t).
    """
    if m < 1:
        raise ProfileError(f"tower depth must be >= 1, got {m}")
    floor = _exp_tower(m, 0.0)

    def inverse_log(L: float) -> float:
        if L <= floor:
            return 1.0
        y = _log_tower(m, L)
        if y <= 0:
            return 1.0
        # t log t = y
        return y / float(lambertw(y).real)

    return VolumeFunction(f"tower(m={m})", lambda t: _exp_tower(m, t * math.log(t)), inverse_log,
                          tag=f"exp(exp^{m}(t log t))")


def wreath_volume(base: VolumeFunction, C: float = 1.0) -> VolumeFunction:
    """
    𝒲(t) = exp(C 𝒱(t) log 𝒱(t)), the volume adapted to Følner couples of ℤ^r ≀ G.
    𝒲⁻¹ uses the Lambert W function: 𝒱 log 𝒱 = L/C gives log 𝒱 = W₀(L/C).
    """
    if C <= 0:
        raise ProfileError(f"wreath constant must be positive, got {C}")

    def log_volume(t: float) -> float:
        lv = base.log_volume(t)
        return C * math.exp(lv) * lv

    def inverse_log(L: float) -> float:
        return base.inverse_log(float(lambertw(max(L, 0.0) / C).real))

    return VolumeFunction(f"wreath({base.name}, C={C:g})", log_volume, inverse_log,
                          tag=f"exp(C V log V), V = {base.tag}")


def log_gamma_from_volume(volume: VolumeFunction, t: float, rtol: float = 1e-10) -> float:
    """
    U = log γ(t), solving ∫_{log 𝒱(1)}^{U} [𝒱⁻¹(e^u)]² du = t
    (the defining integral in the variable u = log s).
    """
    if t <= 0:
        raise ProfileError(f"γ needs t > 0, got {t}")
    lower = volume.log_volume(1.0)

    def integrand(u: float) -> float:
        return volume.inverse_log(u) ** 2

    def excess(U: float) -> float:
        value, _ = integrate.quad(integrand, lower, U, limit=400, epsrel=1e-10)
        if not math.isfinite(value):
            raise ProfileError(f"γ integral for {volume.name} is not finite at U={U}")
        return value - t

    width = 1.0
    while excess(lower + width) < 0:
        width *= 2
        if width > 1e12:
            raise ProfileError(f"γ bracket for {volume.name} did not close at t={t}")
    return float(optimize.brentq(excess, lower + width / 2 if width > 1 else lower, lower + width, rtol=rtol))


def gamma_from_volume(volume: VolumeFunction, t: float) -> float:
    return math.exp(log_gamma_from_volume(volume, t))


def gamma_rate(volume: VolumeFunction, t: float) -> float:
    """γ'/γ at t, which equals 1/[𝒱⁻¹(γ(t))]²."""
    return 1.0 / volume.inverse_log(log_gamma_from_volume(volume, t)) ** 2


def delta_regular_check(volume: VolumeFunction, delta: float, t_grid: Sequence[float],
                        samples: int = 8) -> Tuple[bool, float]:
    """
    Sample γ'(s)/γ(s) >= δ γ'(t)/γ(t) for s in (t, 2t). Returns the verdict
    and the smallest observed ratio.
    """
    worst = math.inf
    for t in t_grid:
        base = gamma_rate(volume, t)
        for k in range(1, samples + 1):
            s = t * (1 + k / (samples + 1))
            worst = min(worst, gamma_rate(volume, s) / base)
    return worst >= delta - 1e-9, worst


# ---------------------------------------------------------------------------
# Følner couples
# ---------------------------------------------------------------------------

@dataclass
class FolnerCouple:
    k: int
    D: int
    r: int
    omega: int
    omega_prime: int
    distance: int
    log_theta: float
    log_theta_prime: float
    lift_distance: int

    @property
    def log_ratio(self) -> float:
        return self.log_theta_prime - self.log_theta

    @property
    def exact_ratio_factor(self) -> float:
        """(1 - 1/#Ω)^{r#Ω}, so that #Θ'/#Θ = factor · #Ω'/#Ω."""
        return (1 - 1 / self.omega) ** (self.r * self.omega)

    def to_json(self):
        return {
            "k": self.k, "D": self.D, "r": self.r,
            "omega": self.omega, "omega_prime": self.omega_prime,
            "distance": self.distance, "lift_distance": self.lift_distance,
            "log_theta": self.log_theta, "log_theta_prime": self.log_theta_prime,
        }


def folner_zd(k: int, D: int, r: int = 1) -> FolnerCouple:
    """
    Ω = [-k,k]^D, Ω' = [-⌈k/2⌉,⌈k/2⌉]^D and the lifted couple on ℤ^r ≀ ℤ^D:
    #Θ = #Ω (k#Ω)^{r#Ω}, #Θ' = #Ω' (k#Ω - k)^{r#Ω}, in log space.
    """
    if k < 2 or D < 1 or r < 1:
        raise ProfileError(f"Følner couple needs k >= 2, D >= 1, r >= 1; got k={k}, D={D}, r={r}")
    half = -(-k // 2)
    omega = (2 * k + 1) ** D
    omega_prime = (2 * half + 1) ** D
    distance = k + 1 - half
    log_theta = math.log(omega) + r * omega * math.log(k * omega)
    log_theta_prime = math.log(omega_prime) + r * omega * math.log(k * omega - k)
    return FolnerCouple(k, D, r, omega, omega_prime, distance, log_theta, log_theta_prime, min(k, distance))


def box_zd(k: int, D: int) -> List[Tuple[int, ...]]:
    axis = range(-k, k + 1)
    return [tuple(int(c) for c in point) for point in np.array(np.meshgrid(*[axis] * D, indexing="ij")).reshape(D, -1).T]


def segment(k: int) -> List[Tuple[int]]:
    return [(x,) for x in range(-k, k + 1)]


# ---------------------------------------------------------------------------
# Dirichlet eigenvalue
# ---------------------------------------------------------------------------

@dataclass
class DirichletResult:
    lambda1: float
    test_bound: float
    size: int
    iterations: int


def _distance_to_complement(spec: MeasureSpec, omega: Sequence[Element], inside: set) -> Dict[Element, int]:
    """d(x, Ω^c) in the Cayley graph of the marked generators, by multi-source BFS."""
    group = spec.group
    steps = group.symmetric_generators()
    dist: Dict[Element, int] = {}
    queue: deque = deque()
    for x in omega:
        if any(group.multiply(x, s) not in inside for s in steps):
            dist[x] = 1
            queue.append(x)
    while queue:
        x = queue.popleft()
        for s in steps:
            y = group.multiply(x, s)
            if y in inside and y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def dirichlet_lambda1(spec: MeasureSpec, omega: Sequence[Element], budget: Optional[int] = None,
                      tol: float = 1e-13, max_iter: int = 20_000) -> DirichletResult:
    """
    Lowest eigenvalue of I - P restricted to Ω (zero boundary values), by inverse
    power iteration on a sparse LU factorization; also the Rayleigh quotient of
    f = d(·, Ω^c), an upper bound.
    """
    omega = list(dict.fromkeys(omega))
    if not omega:
        raise ProfileError("Ω is empty")
    if budget is not None and len(omega) > budget:
        raise BudgetExceeded(f"|Ω| = {len(omega)} exceeds the Dirichlet budget of {budget}")
    group = spec.group
    index = {x: i for i, x in enumerate(omega)}
    rows, cols, vals = [], [], []
    for x, i in index.items():
        for g, w in spec.atoms.items():
            j = index.get(group.multiply(x, g))
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(float(w))
    n = len(omega)
    P = sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))
    L = (sparse.identity(n, format="csc") - P).tocsc()
    lu = splu(L)

    v = np.ones(n) / math.sqrt(n)
    estimate = float(v @ (L @ v))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = lu.solve(v)
        v = w / np.linalg.norm(w)
        new = float(v @ (L @ v))
        if abs(new - estimate) <= tol * max(1.0, abs(new)):
            estimate = new
            break
        estimate = new
    else:
        logger.warning("inverse iteration did not converge in %d steps", max_iter)

    dist = _distance_to_complement(spec, omega, set(index))
    f = np.array([float(dist.get(x, 0)) for x in omega])
    test_bound = float(f @ (L @ f)) / float(f @ f)
    return DirichletResult(estimate, test_bound, n, iterations)
