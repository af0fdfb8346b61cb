"""
Tests for Fox derivatives, the Magnus embedding and flows
"""

import pytest

from core.fox import (
    VarthetaForm,
    flow_cocycle,
    flow_of_word,
    flow_to_module,
    fox_derivative,
    fox_derivatives,
    magnus_embed,
    magnus_identity,
    module_to_flow,
    net_flow,
    stretch,
    stretch_flow,
    stretch_word,
    vartheta_generators,
    vartheta_project,
    vartheta_target,
    words_equal_mod_NN,
)
from core.groups import (
    evaluate_word,
    line_with_loops,
    make_bs,
    make_free_solvable,
    make_lamplighter,
    parse_group_spec,
)
from core.utils import GroupError, RankMismatchError
from core.words import generator_word, identity_word, parse_word, random_word, word_inverse, word_multiply


def test_fox_of_generators(z2):
    s1 = generator_word(2, 1)
    assert fox_derivative(s1, 1, z2).terms == {(0, 0): 1}
    assert fox_derivative(s1, 2, z2).is_zero()
    assert fox_derivative(s1 ** -1, 1, z2).terms == {(-1, 0): -1}


def test_fox_of_commutator(z2):
    d1, d2 = fox_derivatives(parse_word("[s1,s2]", 2), z2)
    assert d1.terms == {(0, 0): 1, (0, 1): -1}
    assert d2.terms == {(1, 0): 1, (0, 0): -1}


@pytest.mark.parametrize("group", [make_lamplighter(2), make_bs(2), make_free_solvable(2, 2)], ids=lambda g: g.name)
def test_magnus_is_homomorphism(group, rng):
    for _ in range(40):
        u = random_word(2, rng.randint(0, 20), rng)
        v = random_word(2, rng.randint(0, 20), rng)
        assert magnus_embed(word_multiply(u, v), group) == magnus_embed(u, group) * magnus_embed(v, group)


def test_magnus_inverse(z2, rng):
    w = random_word(2, 15, rng)
    assert (magnus_embed(w, z2) * magnus_embed(w, z2).inverse()).is_identity()
    assert magnus_embed(identity_word(2), z2) == magnus_identity(z2)


@pytest.mark.parametrize("spec, relator", [("zr:2", "[s1,s2]"), ("bs:2", "s2^-2 s1^-1 s2 s1")])
def test_conjugate_relator_translates(spec, relator, rng):
    group = parse_group_spec(spec)
    rho = parse_word(relator, 2)
    a = magnus_embed(rho, group).a
    for _ in range(20):
        g = random_word(2, rng.randint(0, 8), rng)
        conjugate = word_multiply(word_multiply(g, rho), word_inverse(g))
        assert magnus_embed(conjugate, group).a == a.translate(evaluate_word(group, g))


def test_flow_matches_fox(rng):
    for group in (make_lamplighter(2), make_bs(3)):
        for _ in range(50):
            w = random_word(2, rng.randint(0, 25), rng)
            flow = flow_of_word(w, group)
            for (x, i), value in flow.edges.items():
                assert fox_derivative(w, i, group).coefficient(x) == value
            assert flow_to_module(flow) == magnus_embed(w, group).a


def test_net_flow(z2):
    assert net_flow(flow_of_word(generator_word(2, 1), z2)).values == {(0, 0): 1, (1, 0): -1}
    assert net_flow(flow_of_word(parse_word("[s1,s2]", 2), z2)).is_circulation
    assert net_flow(flow_of_word(identity_word(2), z2)).is_circulation


def test_flow_cocycle(z2, rng):
    u, v = random_word(2, 9, rng), random_word(2, 9, rng)
    assert flow_cocycle(u, v, z2) == flow_of_word(u * v, z2)


def test_module_flow_round_trip(z2):
    flow = flow_of_word(parse_word("s1 s2^2 s1^-1", 2), z2)
    assert module_to_flow(flow_to_module(flow)) == flow


def test_word_problem(z2):
    u = parse_word("s1 s2", 2)
    assert words_equal_mod_NN(u, u, z2)
    assert not words_equal_mod_NN(u, parse_word("s2 s1", 2), z2)
    w = parse_word("[[s1,s2], s1[s1,s2]s1^-1]", 2)
    assert words_equal_mod_NN(w, identity_word(2), z2)
    assert magnus_embed(w, z2).is_identity()
    with pytest.raises(RankMismatchError):
        words_equal_mod_NN(u, generator_word(3, 1), z2)


def test_word_problem_agrees_with_embedding(s22, rng):
    for _ in range(40):
        u = random_word(2, rng.randint(0, 10), rng)
        v = random_word(2, rng.randint(0, 10), rng)
        assert words_equal_mod_NN(u, v, s22) == (magnus_embed(u, s22) == magnus_embed(v, s22))


def test_line_with_loops_relators():
    line = line_with_loops()
    w = parse_word("[s2^s1, s2^(s1 s1)]", 2)
    assert words_equal_mod_NN(w, identity_word(2), line)
    assert not words_equal_mod_NN(parse_word("s2^s1", 2), parse_word("s2", 2), line)


def test_stretch(z2, s22, rng):
    assert stretch_word(parse_word("s1 s2^-1", 2), 3) == parse_word("s1^3 s2^-3", 2)
    for group in (z2, s22):
        w = random_word(2, 10, rng)
        result = stretch(w, 2, group)
        assert result.verified
        assert result.flow == stretch_flow(flow_of_word(w, group), 2)
    assert stretch(parse_word("s1 s2", 2), 2, make_lamplighter(2)).status == "unverified"
    with pytest.raises(GroupError):
        stretch_word(parse_word("s1", 1), 0)


def test_vartheta(z2):
    rho = parse_word("[s1,s2]", 2)
    gamma = parse_word("s1^2", 2)
    form = VarthetaForm.of_rho(2) * VarthetaForm.of_gamma(gamma) * VarthetaForm.of_rho(2, -1)
    assert form.word(rho) == rho * gamma * rho ** -1
    target = vartheta_target(z2)
    image = vartheta_project(form, z2, target)
    assert image == target.element({(0, 0): (1,), (2, 0): (-1,)}, (2, 0))
    assert vartheta_generators(z2, [gamma]) == [target.element({}, (2, 0))]
    with pytest.raises(GroupError):
        VarthetaForm((gamma,), (1,))
