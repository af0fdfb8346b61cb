"""
Tests for profiles, volume functions, Følner couples and Dirichlet eigenvalues
"""

import math

import pytest

from core.asymptotics import (
    box_zd,
    delta_regular_check,
    dirichlet_lambda1,
    folner_zd,
    gamma_from_volume,
    iterated_log,
    log_gamma_from_volume,
    parse_n_grid,
    parse_profile,
    phi_profile,
    power_volume,
    profile_exponent,
    segment,
    stretched_exponential_volume,
    tower_volume,
    witt_degree,
    wreath_volume,
)
from core.groups import make_abelian_group
from core.measures import make_lazy_srw
from core.utils import BudgetExceeded, ProfileError


@pytest.mark.parametrize("r,c,expected", [(2, 1, 2), (2, 2, 4), (3, 2, 9), (2, 3, 10), (3, 1, 3)])
def test_witt_degree(r, c, expected):
    assert witt_degree(r, c) == expected


def mobius(k):
    value, p = 1, 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            value = -value
        p += 1
    return -value if k > 1 else value


def test_witt_degree_matches_necklace_sum():
    for r in range(1, 6):
        for c in range(1, 7):
            expected = sum(mobius(k) * r ** (m // k) for m in range(1, c + 1) for k in range(1, m + 1) if m % k == 0)
            assert witt_degree(r, c) == expected


def test_iterated_log():
    assert iterated_log(0, 5.0) == 5.0
    assert iterated_log(1, math.e - 1) == pytest.approx(1.0)
    with pytest.raises(ProfileError):
        iterated_log(-1, 2.0)


def test_polynomial_profile():
    point = phi_profile(parse_profile("polynomial", "D=2"), 100)
    assert point.exponent == pytest.approx(math.log(100))
    assert point.value == pytest.approx(0.01)


def test_scdr_with_class_one_is_free_solvable():
    scdr = parse_profile("scdr", "d=3,r=2,c=1")
    free = parse_profile("free-solvable", "3,2")
    for n in (10, 1e4, 1e8):
        assert profile_exponent(scdr, n) == pytest.approx(profile_exponent(free, n))


def test_profile_validation():
    with pytest.raises(ProfileError):
        parse_profile("free-solvable", "d=2,r=2")
    with pytest.raises(ProfileError):
        parse_profile("metabelian", "")
    with pytest.raises(ProfileError):
        parse_profile("nope", "1")
    with pytest.raises(ProfileError):
        profile_exponent(parse_profile("log2", ""), 2)
    assert parse_profile("alpha-metabelian", "2,1").label == "alpha-metabelian(r=2,alpha=1)"


def test_n_grid():
    assert parse_n_grid("10:1000:3") == [10, 100, 1000]
    assert parse_n_grid("1,5,9") == [1, 5, 9]
    with pytest.raises(ProfileError):
        parse_n_grid("10:1:3")


@pytest.mark.parametrize("t", [10, 1e3, 1e5])
def test_gamma_of_linear_volume(t):
    assert gamma_from_volume(power_volume(1), t) == pytest.approx(math.sqrt(2 * t + 1), rel=1e-4)


def test_gamma_of_quadratic_volume():
    assert gamma_from_volume(power_volume(2), 50) == pytest.approx(51, rel=1e-6)
    ok, worst = delta_regular_check(power_volume(2), 0.5, [10, 100, 1000])
    assert ok and 0.5 < worst < 0.6
    ok, _ = delta_regular_check(power_volume(2), 0.9, [10, 100])
    assert not ok


@pytest.mark.parametrize("D", [1, 2, 3])
def test_wreath_gamma_slope(D):
    volume = wreath_volume(power_volume(D))
    t1, t2 = 1e3, 1e6
    u1, u2 = log_gamma_from_volume(volume, t1), log_gamma_from_volume(volume, t2)
    correction = 2 / (D + 2) * (math.log(math.log(t2)) - math.log(math.log(t1)))
    slope = (math.log(u2) - math.log(u1) - correction) / (math.log(t2) - math.log(t1))
    assert slope == pytest.approx(D / (D + 2), abs=0.05)


def test_other_volumes_are_monotone():
    for volume in (stretched_exponential_volume(0.5), tower_volume(1)):
        values = [log_gamma_from_volume(volume, t) for t in (10, 100, 1000)]
        assert values == sorted(values)
        assert all(math.isfinite(v) for v in values)


def test_folner_couple():
    couple = folner_zd(4, 1)
    assert (couple.omega, couple.omega_prime, couple.distance) == (9, 5, 3)
    expected = math.log(couple.omega_prime / couple.omega) + math.log(couple.exact_ratio_factor)
    assert couple.log_ratio == pytest.approx(expected)
    big = folner_zd(20, 2, r=2)
    assert big.exact_ratio_factor == pytest.approx(math.exp(-2), rel=0.01)
    with pytest.raises(ProfileError):
        folner_zd(1, 1)


def test_sets():
    assert len(box_zd(2, 2)) == 25
    assert (-2, 2) in box_zd(2, 2)
    assert segment(1) == [(-1,), (0,), (1,)]


@pytest.mark.parametrize("k", [1, 4, 16])
def test_segment_eigenvalue(k):
    lazy = make_lazy_srw(make_abelian_group(1))
    result = dirichlet_lambda1(lazy, segment(k))
    assert result.lambda1 == pytest.approx((1 - math.cos(math.pi / (2 * k + 2))) / 2, abs=1e-6)
    assert result.test_bound >= result.lambda1 - 1e-12
    assert result.size == 2 * k + 1


def test_box_eigenvalue_scaling():
    lazy = make_lazy_srw(make_abelian_group(2))
    scaled = [k * k * dirichlet_lambda1(lazy, box_zd(k, 2)).lambda1 for k in (4, 8, 16)]
    assert max(scaled) <= 2 * min(scaled)


def test_dirichlet_budget():
    lazy = make_lazy_srw(make_abelian_group(2))
    with pytest.raises(BudgetExceeded):
        dirichlet_lambda1(lazy, box_zd(5, 2), budget=50)
    with pytest.raises(ProfileError):
        dirichlet_lambda1(lazy, [])


@pytest.mark.parametrize("family,params", [
    ("polynomial", "D=2"),
    ("metabelian", "r=2"),
    ("nilpotent-base", "D=3"),
    ("free-solvable", "d=2,r=2"),
    ("free-solvable", "d=3,r=2"),
    ("log2", ""),
])
def test_profiles_are_nonincreasing_probabilities(family, params):
    spec = parse_profile(family, params)
    values = [phi_profile(spec, n).value for n in range(10, 2001, 10)]
    assert all(0 < v <= 1 for v in values)
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_free_solvable_exponent_is_sublinear():
    spec = parse_profile("free-solvable", "d=3,r=2")
    ratios = [profile_exponent(spec, n) / n for n in parse_n_grid("1000:1000000000:25")]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_folner_theta_bound():
    for k in range(2, 21):
        for D in (1, 2, 3):
            for r in (1, 2, 3):
                couple = folner_zd(k, D, r)
                assert couple.log_theta <= 3 * r * couple.omega * math.log(couple.omega)
