"""
Tests for free words and the word parser
"""

import pytest

from core.utils import RankMismatchError, WordParseError
from core.words import (
    commutator,
    conjugate,
    format_word,
    generator_word,
    identity_word,
    parse_word,
    parse_word_list,
    random_word,
    reduce,
    word_inverse,
    word_multiply,
    word_power,
)


def test_cancellation():
    assert parse_word("s1 s1^-1").is_identity
    assert parse_word("s1 s2 s2^-1 s1", 2) == generator_word(2, 1, 2)


def test_reduce_is_idempotent(rng):
    for _ in range(50):
        w = random_word(3, rng.randint(0, 20), rng)
        assert reduce(w.letters, 3) == w


def test_commutator_and_inverse():
    s1, s2 = generator_word(2, 1), generator_word(2, 2)
    assert format_word(commutator(s1, s2)) == "s1 s2 s1^-1 s2^-1"
    assert format_word(word_inverse(s1 * s2)) == "s2^-1 s1^-1"
    assert commutator(s1 * s2, s1 * s2).is_identity


def test_conjugate_is_right_action():
    s1, s2 = generator_word(2, 1), generator_word(2, 2)
    assert conjugate(s1, s2) == parse_word("s2^-1 s1 s2", 2)
    assert parse_word("s1^s2", 2) == conjugate(s1, s2)


def test_powers():
    assert len(parse_word("s1^3")) == 3
    assert parse_word("s1^-2") == word_inverse(generator_word(1, 1, 2))
    w = parse_word("s1 s2", 2)
    assert word_power(w, -2) == word_inverse(w * w)
    assert word_power(w, 0) == identity_word(2)


def test_grammar_sugar():
    nested = parse_word("[[s1,s2], s1[s1,s2]s1^-1]", 2)
    assert nested.exponent_sums() == (0, 0)
    assert parse_word("(s1 s2)^2", 2) == parse_word("s1 s2 s1 s2", 2)
    assert parse_word("e").is_identity


def test_rank_inference():
    assert parse_word("s3").rank == 3
    assert parse_word("").rank == 1
    assert parse_word("s1", 4).rank == 4


def test_word_list():
    words = parse_word_list("s1^2; s2^2", 2)
    assert [str(w) for w in words] == ["s1^2", "s2^2"]


def test_format_collapses_runs():
    assert format_word(parse_word("s1 s1 s2^-1 s2^-1 s2^-1 s1", 2)) == "s1^2 s2^-3 s1"
    assert format_word(identity_word(2)) == ""


def test_slicing_returns_words():
    w = parse_word("s1 s2 s1^-1", 2)
    assert w[:2] == parse_word("s1 s2", 2)
    assert w[2] == (1, -1)


@pytest.mark.parametrize("text", ["s0", "s1^0", "s3", "[s1,s2", "s1^", "x1", "s1 )"])
def test_parse_errors(text):
    with pytest.raises(WordParseError):
        parse_word(text, 2)


def test_parse_error_reports_position():
    with pytest.raises(WordParseError) as info:
        parse_word("s1 s2 ?", 2)
    assert info.value.position == 6


def test_rank_mismatch():
    with pytest.raises(RankMismatchError):
        word_multiply(generator_word(2, 1), generator_word(3, 1))
    with pytest.raises(RankMismatchError):
        generator_word(2, 3)
