"""
Free Words
==========

Freely reduced words over generators s1..sr, stored letter by letter as
(generator index, exponent +-1) pairs.

Text grammar (whitespace between factors is optional):

    word    := factor*
    factor  := atom ('^' (INT | atom))*
    atom    := 'sK' | 'e' | '[' word ',' word ']' | '(' word ')'

`x^M` is the M-th power, `x^y` is the conjugate y^-1 x y and
`[u,v]` is the commutator u v u^-1 v^-1.
"""

import random
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from .utils import RankMismatchError, WordParseError

Letter = Tuple[int, int]


@dataclass(frozen=True)
class ReducedWord:
    """
    Freely reduced word in F_r; the empty word is the identity.
    Build instances with `reduce` or the helpers below.
    """

    letters: Tuple[Letter, ...]
    rank: int

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return ReducedWord(self.letters[item], self.rank)
        return self.letters[item]

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return word_multiply(self, other)

    def __invert__(self) -> "ReducedWord":
        return word_inverse(self)

    def __pow__(self, n: int) -> "ReducedWord":
        return word_power(self, n)

    def __str__(self) -> str:
        return format_word(self)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def prefixes(self) -> Iterator[Tuple[int, Letter]]:
        """Yield (position, letter) left to right."""
        return enumerate(self.letters)

    def exponent_sums(self) -> Tuple[int, ...]:
        sums = [0] * self.rank
        for gen, sign in self.letters:
            sums[gen - 1] += sign
        return tuple(sums)


def identity_word(rank: int) -> ReducedWord:
    return ReducedWord((), rank)


def generator_word(rank: int, index: int, power: int = 1) -> ReducedWord:
    if not 1 <= index <= rank:
        raise RankMismatchError(f"generator s{index} outside 1..{rank}")
    sign = 1 if power > 0 else -1
    return ReducedWord(tuple((index, sign) for _ in range(abs(power))), rank)


def reduce(tokens: Iterable[Letter], rank: int) -> ReducedWord:
    """
    Free reduction of a stream of signed letters (stack based, one pass)
    """
    stack: List[Letter] = []
    for gen, sign in tokens:
        if not 1 <= gen <= rank:
            raise RankMismatchError(f"generator index {gen} outside 1..{rank}")
        if sign not in (1, -1):
            raise WordParseError(f"letter exponent must be +1 or -1, got {sign}")
        if stack and stack[-1][0] == gen and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((gen, sign))
    return ReducedWord(tuple(stack), rank)


def _check_rank(u: ReducedWord, v: ReducedWord):
    if u.rank != v.rank:
        raise RankMismatchError(f"rank mismatch: {u.rank} vs {v.rank}")


def word_multiply(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    _check_rank(u, v)
    # only the seam can cancel
    left = list(u.letters)
    right = v.letters
    k = 0
    while left and k < len(right) and left[-1][0] == right[k][0] and left[-1][1] == -right[k][1]:
        left.pop()
        k += 1
    return ReducedWord(tuple(left) + right[k:], u.rank)


def word_inverse(u: ReducedWord) -> ReducedWord:
    return ReducedWord(tuple((gen, -sign) for gen, sign in reversed(u.letters)), u.rank)


def word_power(u: ReducedWord, n: int) -> ReducedWord:
    base = u if n >= 0 else word_inverse(u)
    result = identity_word(u.rank)
    for _ in range(abs(n)):
        result = word_multiply(result, base)
    return result


def commutator(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    """[u, v] = u v u^-1 v^-1"""
    _check_rank(u, v)
    return reduce(u.letters + v.letters + word_inverse(u).letters + word_inverse(v).letters, u.rank)


def conjugate(u: ReducedWord, x: ReducedWord) -> ReducedWord:
    """u^x = x^-1 u x"""
    _check_rank(u, x)
    return reduce(word_inverse(x).letters + u.letters + x.letters, u.rank)


def format_word(w: ReducedWord) -> str:
    """
    Text form with runs collapsed, e.g. "s1^2 s2^-1"; the identity is "".
    """
    parts = []
    i = 0
    letters = w.letters
    while i < len(letters):
        gen, sign = letters[i]
        j = i
        while j < len(letters) and letters[j] == (gen, sign):
            j += 1
        run = (j - i) * sign
        parts.append(f"s{gen}" if run == 1 else f"s{gen}^{run}")
        i = j
    return " ".join(parts)


def random_word(rank: int, length: int, rng: random.Random) -> ReducedWord:
    """Uniform reduced word of exactly `length` letters (non-backtracking walk)."""
    letters: List[Letter] = []
    while len(letters) < length:
        letter = (rng.randint(1, rank), rng.choice((1, -1)))
        if letters and letters[-1][0] == letter[0] and letters[-1][1] == -letter[1]:
            continue
        letters.append(letter)
    return ReducedWord(tuple(letters), rank)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, rank: Optional[int]):
        self.text = text
        self.pos = 0
        self.rank = rank
        self.max_index = 0

    def error(self, message: str) -> WordParseError:
        return WordParseError(message, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n*.":
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str):
        if self.peek() != char:
            raise self.error(f"expected {char!r}")
        self.pos += 1

    def integer(self) -> int:
        self.skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        digits = self.text[start:self.pos]
        if digits in ("", "+", "-"):
            self.pos = start
            raise self.error("expected an integer")
        return int(digits)

    def word(self, stop: str) -> List[Letter]:
        letters: List[Letter] = []
        while True:
            char = self.peek()
            if char == "" or char in stop:
                return letters
            letters.extend(self.factor())

    def factor(self) -> List[Letter]:
        base = self.atom()
        while self.peek() == "^":
            self.pos += 1
            nxt = self.peek()
            if nxt == "":
                raise self.error("unexpected end of input after '^'")
            if nxt in "+-" or nxt.isdigit():
                power = self.integer()
                if power == 0:
                    raise self.error("exponent 0 is not allowed")
                unit = base if power > 0 else _inverse_letters(base)
                base = unit * abs(power)
            elif nxt in "s[(e":
                x = self.atom()
                base = _inverse_letters(x) + base + x
            else:
                raise self.error("expected exponent or conjugating word after '^'")
        return base

    def atom(self) -> List[Letter]:
        char = self.peek()
        if char == "s":
            self.pos += 1
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                raise self.error("expected generator index after 's'")
            index = int(self.text[start:self.pos])
            if index < 1 or (self.rank is not None and index > self.rank):
                self.pos = start
                raise self.error(f"generator s{index} outside 1..{self.rank}")
            self.max_index = max(self.max_index, index)
            return [(index, 1)]
        if char == "e":
            self.pos += 1
            return []
        if char == "[":
            self.pos += 1
            u = self.word(",]")
            self.expect(",")
            v = self.word("]")
            self.expect("]")
            return u + v + _inverse_letters(u) + _inverse_letters(v)
        if char == "(":
            self.pos += 1
            u = self.word(")")
            self.expect(")")
            return u
        if char == "":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected character {char!r}")


def _inverse_letters(letters: Sequence[Letter]) -> List[Letter]:
    return [(gen, -sign) for gen, sign in reversed(letters)]


def parse_word(text: str, rank: Optional[int] = None) -> ReducedWord:
    """
    Parse the text grammar into a reduced word. With rank=None the rank is
    the largest generator index used (at least 1).
    """
    parser = _Parser(text or "", rank)
    letters = parser.word("")
    if parser.peek() != "":
        raise parser.error("trailing input")
    effective = rank if rank is not None else max(parser.max_index, 1)
    return reduce(letters, effective)


def parse_word_list(text: str, rank: Optional[int] = None) -> List[ReducedWord]:
    """Semicolon separated list of words, e.g. "s1^2; s2^2"."""
    return [parse_word(part, rank) for part in text.split(";") if part.strip()]
