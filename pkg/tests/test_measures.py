"""
Tests for laws, measures, exact convolution and pushforwards
"""

import math
from fractions import Fraction

import pytest

from core.exclusive import magnus_group
from core.groups import evaluate_word, make_abelian_group, make_lamplighter, parse_group_spec
from core.measures import (
    MeasureSpec,
    abelianization_map,
    convolve,
    convolve_power,
    delta_measure,
    generator_table_map,
    iterated_sws,
    law_measure,
    lazy_law,
    lift_map,
    lift_map_k,
    make_generator_power_measure,
    make_lazy_srw,
    make_phi_lower_measure,
    make_pm_one_law,
    make_power_law,
    make_switch_law,
    make_uniform_law,
    mod_map,
    projection_map,
    pushforward,
    return_probability_exact,
    stretch_map,
    sws,
    validate_law,
    weak_moment,
)
from core.utils import BudgetExceeded, GroupError, MeasureError
from core.words import generator_word


def test_laws():
    assert lazy_law().as_dict() == {-1: Fraction(1, 4), 0: Fraction(1, 2), 1: Fraction(1, 4)}
    assert make_uniform_law([-2, 2]).mass(2) == Fraction(1, 2)
    assert make_power_law(math.inf) == lazy_law()
    ok, message = validate_law({1: Fraction(1)})
    assert not ok and "symmetric" in message
    with pytest.raises(MeasureError):
        make_uniform_law([0, 1])
    with pytest.raises(MeasureError):
        make_power_law(2.5)


def test_power_law_normalizes():
    law = make_power_law(1.0, cutoff=500)
    assert not law.exact
    assert math.isclose(math.fsum(w for _, w in law), 1.0, abs_tol=1e-12)
    assert law.mass(7) == law.mass(-7)
    assert law.max_jump == 500


def test_lazy_srw_shape(z2):
    spec = make_lazy_srw(z2)
    assert spec.exact
    assert spec.mass((0, 0)) == Fraction(1, 2)
    assert spec.mass((1, 0)) == Fraction(1, 8)
    assert spec.total() == 1
    assert spec.is_symmetric()


def test_switch_law():
    assert make_switch_law(3).mass((0, 1, 0)) == Fraction(1, 12)


def test_return_probabilities(s22):
    spec = make_lazy_srw(s22)
    assert convolve_power(spec, 0).masses == {s22.identity(): 1}
    assert return_probability_exact(spec, 2) == Fraction(5, 16)
    assert convolve_power(spec, 3).total() == 1


def test_lower_measure_identity(z2):
    mu = make_lazy_srw(magnus_group(z2))
    phi = make_phi_lower_measure([lazy_law()], z2)
    assert phi.group.name == "wr(zr:2, zr:2)"
    for n in range(1, 5):
        assert convolve_power(mu, n).at_identity() == convolve_power(phi, n).at_identity()
    assert convolve_power(phi, 2).at_identity() == Fraction(5, 16)


def test_lower_measure_identity_on_switch_marked_lamplighter():
    base = make_lamplighter(2, marking="sw")
    mu = make_lazy_srw(magnus_group(base))
    phi = make_phi_lower_measure([lazy_law()], base)
    for n in range(1, 5):
        assert convolve_power(mu, n).at_identity() == convolve_power(phi, n).at_identity()


def powers_by_step(spec, n):
    """μ^{*0}, ..., μ^{*n} one step at a time."""
    dists = [{spec.group.identity(): Fraction(1)}]
    for _ in range(n):
        dists.append(convolve(dists[-1], spec.atoms, spec.group))
    return dists


def test_convolution_powers_are_symmetric_probabilities(s22):
    for masses in powers_by_step(make_lazy_srw(s22), 6):
        assert sum(masses.values()) == 1
        for x, w in masses.items():
            assert masses[s22.inverse(x)] == w


@pytest.mark.parametrize("spec", ["zr:2", "llsw:2"])
def test_even_return_probabilities_nonincreasing(spec):
    group = parse_group_spec(spec)
    dists = powers_by_step(make_lazy_srw(group), 12)
    values = [dists[2 * n].get(group.identity(), 0) for n in range(7)]
    assert values[0] == 1
    assert all(a >= b for a, b in zip(values, values[1:]))


@pytest.mark.slow
def test_even_return_probabilities_nonincreasing_free_metabelian(s22):
    dists = powers_by_step(make_lazy_srw(s22), 12)
    values = [dists[2 * n].get(s22.identity(), 0) for n in range(7)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_lower_measure_rejects_torsion():
    with pytest.raises(MeasureError, match="finite order"):
        make_phi_lower_measure([lazy_law()], make_lamplighter(2))


def test_budget_truncates_with_deficit(z2):
    spec = make_lazy_srw(z2)
    with pytest.raises(BudgetExceeded) as info:
        convolve_power(spec, 10, budget=30)
    partial = info.value.partial
    assert partial.steps == 10
    assert partial.support_size() <= 30
    assert partial.deficit > 0
    assert partial.total() + partial.deficit == 1
    exact = return_probability_exact(spec, 10)
    assert partial.at_identity() <= exact <= partial.at_identity() + partial.deficit


def test_float_pruning_reports_deficit():
    z1 = make_abelian_group(1)
    spec = make_generator_power_measure(z1, [make_power_law(1.0, cutoff=50)])
    dist = convolve_power(spec, 2, mass_floor=1e-6)
    assert dist.deficit > 0
    assert math.isclose(dist.total() + dist.deficit, 1.0, rel_tol=1e-9)


def test_switch_walk_switch():
    eta = law_measure(make_pm_one_law())
    mu = law_measure(lazy_law())
    q = sws(eta, mu)
    assert q.total() == 1
    assert q.is_symmetric()
    # switch, stay, switch back
    assert q.mass(q.group.identity()) == Fraction(1, 4)
    q2 = iterated_sws(eta, mu, 2)
    assert q2.group.base.name == q.group.name
    assert q2.total() == 1


def test_sws_needs_matching_groups(z2):
    with pytest.raises(MeasureError):
        sws(make_lazy_srw(z2), make_lazy_srw(z2), target=sws(law_measure(make_pm_one_law()), make_lazy_srw(z2)).group)


def test_pushforward_mod_two():
    z1 = make_abelian_group(1)
    theta = mod_map(z1, 2)
    pushed = pushforward(law_measure(lazy_law(), z1), theta)
    assert pushed.atoms == {(0,): Fraction(1, 2), (1,): Fraction(1, 2)}
    table = generator_table_map(z1, theta.target, [(1,)])
    assert pushforward(law_measure(lazy_law(), z1), table).atoms == pushed.atoms


def test_lifted_pushforward_commutes(s22):
    eta = law_measure(make_pm_one_law())
    theta = abelianization_map(s22)
    mu = make_lazy_srw(s22)
    lift = lift_map(theta, eta.group)
    upstairs = convolve_power(sws(eta, mu), 2)
    pushed = pushforward(MeasureSpec(lift.source, upstairs.masses, True, "q^2"), lift)
    assert pushed.atoms == convolve_power(sws(eta, pushforward(mu, theta)), 2).masses
    assert lift_map_k(theta, eta.group, 0) is theta


def test_iterated_lift_commutes_with_switch_walk_switch():
    z1 = make_abelian_group(1)
    eta = law_measure(make_pm_one_law())
    mu = law_measure(lazy_law(), z1)
    theta = mod_map(z1, 2)
    upstairs = iterated_sws(eta, mu, 2)
    lift = lift_map_k(theta, eta.group, 2)
    assert lift.source.name == upstairs.group.name
    assert pushforward(upstairs, lift).atoms == iterated_sws(eta, pushforward(mu, theta), 2).atoms


def test_projection_pushforward():
    eta = law_measure(make_pm_one_law())
    mu = law_measure(lazy_law())
    q = sws(eta, mu)
    assert pushforward(q, projection_map(q.group)).atoms == mu.atoms
    z2 = make_abelian_group(2)
    phi = make_phi_lower_measure([lazy_law()], z2)
    assert pushforward(phi, projection_map(phi.group)).atoms == make_lazy_srw(z2).atoms
    with pytest.raises(GroupError):
        projection_map(z2)


def test_stretch_pushforward(z2):
    pushed = pushforward(make_lazy_srw(z2), stretch_map(z2, 3))
    assert pushed.atoms == {(0, 0): Fraction(1, 2), (3, 0): Fraction(1, 8), (-3, 0): Fraction(1, 8),
                            (0, 3): Fraction(1, 8), (0, -3): Fraction(1, 8)}
    gamma2 = magnus_group(z2)
    pushed = pushforward(make_lazy_srw(gamma2), stretch_map(gamma2, 2))
    for i in (1, 2):
        for sign in (1, -1):
            assert pushed.mass(evaluate_word(gamma2, generator_word(2, i, 2 * sign))) == Fraction(1, 8)
    assert pushed.total() == 1


def test_pushforward_checks_source(z2):
    with pytest.raises(MeasureError):
        pushforward(make_lazy_srw(z2), mod_map(make_abelian_group(1), 2))


def test_delta_measure(z2):
    assert convolve_power(delta_measure(z2), 5).masses == {(0, 0): Fraction(1)}


def test_weak_moment(z2):
    assert weak_moment(make_lazy_srw(z2), 1.0) == pytest.approx(1.0)
    spec = make_generator_power_measure(z2, [make_uniform_law([-3, 3])])
    assert weak_moment(spec, 1.0) == pytest.approx(4.0)
    with pytest.raises(MeasureError):
        weak_moment(spec, 0)


@pytest.mark.parametrize("group", [make_abelian_group(2, [2, 2]), make_lamplighter(2)])
def test_weak_moment_rejects_torsion(group):
    with pytest.raises(MeasureError, match="finite order"):
        weak_moment(make_lazy_srw(group), 1.0)


def test_sampler_cdf(z2):
    atoms, cdf = make_lazy_srw(z2).sampler()
    assert len(atoms) == 5
    assert cdf[-1] == 1.0
    assert all(a <= b for a, b in zip(cdf, cdf[1:]))
