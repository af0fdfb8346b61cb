"""
Tests for marked groups, balls and spec strings
"""

import math

import pytest

from core.groups import (
    CosetTable,
    EvenSites,
    ball,
    ball_elements,
    evaluate_word,
    line_with_loops,
    make_abelian_group,
    make_bs,
    make_free_solvable,
    make_lamplighter,
    make_wreath,
    parse_group_spec,
    validate_coset_tables,
    validate_group_spec,
)
from core.utils import BudgetExceeded, GroupSpecError, MembershipError
from core.words import parse_word, random_word


def test_evaluate_trivial_words(z2):
    assert evaluate_word(z2, parse_word("", 2)) == z2.identity()
    assert evaluate_word(z2, parse_word("[s1,s2]", 2)) == z2.identity()
    bs = make_bs(3)
    assert bs.is_identity(evaluate_word(bs, parse_word("s1 s1^-1", 2)))


def test_bs_relation():
    for q in (2, 3, 5):
        bs = make_bs(q)
        lhs = evaluate_word(bs, parse_word("s1^-1 s2 s1", 2))
        assert lhs == bs.generator_power(2, q)


def test_wreath_lamps_commute():
    w = make_wreath(make_abelian_group(1, [2]), make_abelian_group(1))
    assert w.name == "wr(tm:2, zr:1)"
    assert w.rank == 2
    assert w.is_identity(evaluate_word(w, parse_word("s1^2", 2)))
    assert w.equal(evaluate_word(w, parse_word("s1 s1^s2", 2)), evaluate_word(w, parse_word("s1^s2 s1", 2)))
    assert not w.equal(evaluate_word(w, parse_word("s1 s2", 2)), evaluate_word(w, parse_word("s2 s1", 2)))


@pytest.mark.parametrize("spec", ["zr:2", "tm:2,3", "ll:2", "llsw:3", "bs:2", "sdr:2,2", "sdr:3,2"])
def test_inverse_and_associativity(spec, rng):
    group = parse_group_spec(spec)
    for _ in range(500):
        x, y, z = (evaluate_word(group, random_word(group.rank, rng.randint(0, 10), rng)) for _ in range(3))
        assert group.is_identity(group.multiply(x, group.inverse(x)))
        assert group.multiply(group.multiply(x, y), z) == group.multiply(x, group.multiply(y, z))


def test_canonical_key_matches_equality(rng):
    group = parse_group_spec("sdr:2,2")
    w = random_word(2, 12, rng)
    x = evaluate_word(group, w)
    y = evaluate_word(group, w * parse_word("[[s1,s2],[s1,s2]^s1]", 2))
    assert x == y
    assert group.canonical_key(x) == group.canonical_key(y)
    assert group.canonical_key(x) != group.canonical_key(group.multiply(x, group.generator(1)))


def test_torsion_flags():
    assert parse_group_spec("zr:3").torsion == (False, False, False)
    assert parse_group_spec("tm:2,2").torsion == (True, True)
    assert make_lamplighter(2).torsion == (True, False)
    assert make_lamplighter(2, marking="sw").torsion == (False, False)
    assert make_bs(2).torsion == (False, False)
    assert make_free_solvable(3, 2).torsion == (False, False)


def test_ball_sizes(z2):
    assert [layer.size for layer in ball(z2, 2)] == [1, 5, 13]
    assert ball(make_lamplighter(2), 1)[-1].size == 4


@pytest.mark.parametrize("spec", ["zr:2", "ll:2", "llsw:2", "bs:2", "sdr:2,2", "wr(tm:2, zr:1)"])
def test_canonical_key_injective_on_balls(spec):
    group = parse_group_spec(spec)
    elements = ball_elements(group, 3)
    assert len({group.canonical_key(x) for x in elements}) == len(elements)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_abelian_ball_growth_exponent(d):
    sizes = ball(make_abelian_group(d), 30)
    slope = math.log(sizes[30].size / sizes[15].size) / math.log(2)
    assert abs(slope - d) < 0.1


def test_ball_budget_keeps_partial(z2):
    with pytest.raises(BudgetExceeded) as info:
        ball(z2, 10, budget=20)
    assert [layer.size for layer in info.value.partial] == [1, 5, 13]


def test_free_solvable_kernel():
    w = parse_word("[[s1,s2], s1[s1,s2]s1^-1]", 2)
    s22, s32 = make_free_solvable(2, 2), make_free_solvable(3, 2)
    assert s22.is_identity(evaluate_word(s22, w))
    assert not s32.is_identity(evaluate_word(s32, w))
    assert make_free_solvable(1, 3).name == "sdr:1,3"


def test_subgroup_predicates(z2):
    assert z2.is_member("sublattice:2,2", (4, -2))
    assert not z2.is_member("sublattice:2,2", (1, 0))
    bs = make_bs(2)
    assert bs.is_member("even-t", bs.generator_power(1, 2))
    assert not bs.is_member("even-t", bs.generator(1))
    with pytest.raises(MembershipError):
        bs.subgroup("sublattice:2,2")


def test_even_sites():
    ll = make_lamplighter(2)
    a, t = ll.generators()
    t2 = ll.multiply(t, t)
    inside = ll.multiply(ll.multiply(t2, a), ll.inverse(t2))
    assert ll.is_member("even-sites", inside)
    assert ll.is_member("even-sites", ll.multiply(a, t2))
    assert not ll.is_member("even-sites", ll.multiply(ll.multiply(t, a), ll.inverse(t)))
    assert not ll.is_member("even-sites", t)
    assert isinstance(ll.subgroup("even-sites"), EvenSites)


def test_coset_table_membership():
    table = CosetTable([[1, 0], [0, 1]], name="index-two")
    z2 = make_abelian_group(2)
    assert table.index == 2
    assert table.contains(z2, None, parse_word("s1 s2 s1", 2))
    assert not table.contains(z2, None, parse_word("s1 s2", 2))
    with pytest.raises(MembershipError):
        table.contains(z2, (0, 0))
    ok, message = validate_coset_tables([[0, 0], [0, 1]])
    assert not ok and "permutation" in message


def test_line_with_loops():
    line = line_with_loops()
    assert line.generators() == [(1,), (0,)]
    assert line.torsion == (False, True)


def test_spec_strings():
    assert parse_group_spec("wr(zr:1, zr:2)").rank == 3
    assert parse_group_spec("wr(tm:2,2, zr:1)").rank == 3
    assert parse_group_spec("wr(zr:2, sdr:2,2)").rank == 4
    assert parse_group_spec("wr(tm:2,2, zr:1)").lamp.moduli == (2, 2)
    assert parse_group_spec("marked(zr:1; 1; 0)").generators() == [(1,), (0,)]
    assert parse_group_spec("tm:2,2").moduli == (2, 2)
    assert validate_group_spec("bs:3") == (True, "bs:3 (rank 2)")
    for bad in ("zr", "zz:2", "ll:1", "wr(zr:1)", "tm:1,2"):
        with pytest.raises(GroupSpecError):
            parse_group_spec(bad)


def test_to_json_shapes():
    assert make_bs(2).to_json(make_bs(2).generator(1)) == {"t": -1, "num": 0, "k": 0}
    ll = make_lamplighter(2)
    assert ll.to_json(ll.generator(1)) == {"lamps": [[0, 1]], "position": 0}
