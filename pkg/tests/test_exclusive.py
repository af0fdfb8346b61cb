"""
Tests for the exclusive-pair checker and the projected comparisons
"""

from fractions import Fraction

import pytest

from core.exclusive import (
    ExclusiveCandidate,
    bounded_edge_search,
    check_exclusive,
    make_Hm,
    magnus_group,
    return_expression_check,
    tm_criterion,
    translates_rank,
    validate_candidate,
    vartheta_convolution_check,
)
from core.groups import make_bs
from core.utils import CandidateError, GroupError
from core.words import generator_word, parse_word, parse_word_list


def squares(rank=2):
    return [generator_word(rank, i, 2) for i in range(1, rank + 1)]


def test_sublattice_candidate_is_exclusive(z2):
    rho = parse_word("[s1,s2]", 2)
    report = check_exclusive(ExclusiveCandidate(z2, squares(), rho, 1, bar="sublattice:2,2", m=(2, 2)))
    assert [c.holds for c in report.conditions] == [True, True, True]
    assert report.conditions[2].method == "T_m criterion"
    assert report.exclusive is True
    assert report.to_json()["edge"] == {"vertex": [1, 0], "gen": 2}


def test_full_group_fails_condition_two(z2):
    rho = parse_word("[s1,s2]", 2)
    gens = [generator_word(2, 1), generator_word(2, 2)]
    report = check_exclusive(ExclusiveCandidate(z2, gens, rho, 0, bar="full", radius=2))
    two = report.conditions[1]
    assert two.holds is False
    assert two.witness == [0, 1]
    assert report.exclusive is False


def test_full_group_fails_condition_three(z2):
    rho = parse_word("[s1,s2]", 2)
    gens = [generator_word(2, 1), generator_word(2, 2)]
    three = check_exclusive(ExclusiveCandidate(z2, gens, rho, 0, radius=1)).conditions[2]
    assert three.holds is False
    assert three.witness == "s1"


def test_baumslag_solitar_candidate():
    bs = make_bs(2)
    rho = parse_word("s2^-2 s1^-1 s2 s1", 2)
    gammas = parse_word_list("s1^2; s2", 2)
    candidate = ExclusiveCandidate(bs, gammas, rho, 3, bar="even-t", radius=3)
    assert candidate.s == (2, 1)
    report = check_exclusive(candidate)
    assert [c.holds for c in report.conditions] == [True, True, True]
    assert report.conditions[2].bounded_only


def test_tm_criterion():
    assert tm_criterion(generator_word(2, 1), (2, 1), (2, 2))
    assert not tm_criterion(generator_word(2, 2, 3), (2, 1), (2, 2))
    assert tm_criterion(generator_word(2, 1, 3), (2, 1), (2, 2))
    assert not tm_criterion(generator_word(2, 1, 2), (2, 1), (2, 2))
    with pytest.raises(CandidateError):
        tm_criterion(generator_word(2, 1), (2, 1), (1, 2))
    with pytest.raises(GroupError):
        tm_criterion(generator_word(2, 1), (2, 1), (2, 2), group=make_bs(2))


def test_make_Hm(z2):
    words, predicate = make_Hm(z2, (2, 3))
    assert [str(w) for w in words] == ["s1^2", "s2^3"]
    assert predicate.name == "sublattice:2,3"
    assert make_Hm(make_bs(2), (2, 2))[1] is None


def test_candidate_validation(z2):
    rho = parse_word("s1 s2", 2)
    ok, message = validate_candidate(ExclusiveCandidate(z2, squares(), rho, 0))
    assert not ok and "close" in message
    ok, message = validate_candidate(ExclusiveCandidate(z2, squares(), parse_word("[s1,s2]", 2), 9))
    assert not ok
    nn = parse_word("[[s1,s2],[s1,s2]^s1]", 2)
    ok, message = validate_candidate(ExclusiveCandidate(z2, squares(), nn, 0))
    assert not ok and "[N,N]" in message
    with pytest.raises(CandidateError):
        check_exclusive(ExclusiveCandidate(z2, squares(), rho, 0))


def test_translates_rank(z2):
    candidate = ExclusiveCandidate(z2, squares(), parse_word("[s1,s2]", 2), 1)
    assert translates_rank(candidate, radius=1) == (5, 5)


def test_return_expression(z2):
    quarter = Fraction(1, 4)
    phi = {generator_word(2, i, m): quarter for i in (1, 2) for m in (2, -2)}
    rows = return_expression_check(z2, phi, parse_word("[s1,s2]", 2), 2)
    assert [r.n for r in rows] == [1, 2]
    assert all(r.holds for r in rows)


def test_vartheta_convolution(z2):
    quarter = Fraction(1, 4)
    phi = {generator_word(2, i, m): quarter for i in (1, 2) for m in (2, -2)}
    equal, pushed, direct = vartheta_convolution_check(z2, phi)
    assert equal
    assert sum(pushed.values()) == 1


def test_magnus_group_name(z2):
    assert magnus_group(z2).name == "gamma2(zr:2)"


@pytest.mark.parametrize("m", [(2, 2), (2, 3)])
def test_tm_criterion_agrees_with_edge_search(z2, m):
    gammas = [generator_word(2, i, k) for i, k in enumerate(m, 1)]
    candidate = ExclusiveCandidate(z2, gammas, parse_word("[s1,s2]", 2), 1,
                                   bar=f"sublattice:{m[0]},{m[1]}", m=m, radius=4)
    assert tm_criterion(candidate.u, candidate.s, m)
    verdict = bounded_edge_search(candidate, (1, 0), 2)
    assert verdict.holds is True
    assert verdict.bounded_only
