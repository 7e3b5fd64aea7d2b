"""Reduced-word algebra for free products of copies of Z and Z4.

Generators 1..mbar have infinite order (written s1, s2, ...); the rest have
order 4 (written t1, t2, ..., tI being global generator mbar+I).  Words are
tuples of syllables (generator, exponent) with adjacent generators distinct;
order-4 exponents are kept in {1, 2, 3}.  A pure free group is mbar == m.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

Syllable = tuple[int, int]


@dataclass(frozen=True)
class Presentation:
    generators: int
    infinite: int  # generators 1..infinite are the Z factors

    def __post_init__(self):
        if not 0 <= self.infinite <= self.generators:
            raise ValueError("need 0 <= infinite <= generators")

    def is_sigma(self, gen: int) -> bool:
        return 1 <= gen <= self.infinite

    def is_tau(self, gen: int) -> bool:
        return self.infinite < gen <= self.generators


@dataclass(frozen=True)
class Word:
    syllables: tuple[Syllable, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.syllables)


IDENTITY = Word()


def reduce_syllables(raw: Iterable[Syllable], pres: Presentation) -> Word:
    """Canonical form: merge adjacent same-generator syllables, drop zeros,
    fold order-4 exponents into {1,2,3}.  Confluent regardless of input
    grouping."""
    stack: list[list[int]] = []
    for gen, exp in raw:
        if gen < 1 or gen > pres.generators:
            raise ValueError(f"generator {gen} out of range")
        if pres.is_tau(gen):
            exp %= 4
        if exp == 0:
            continue
        if stack and stack[-1][0] == gen:
            stack[-1][1] += exp
            if pres.is_tau(gen):
                stack[-1][1] %= 4
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([gen, exp])
    return Word(tuple((g, e) for g, e in stack))


def multiply(a: Word, b: Word, pres: Presentation) -> Word:
    return reduce_syllables(a.syllables + b.syllables, pres)


def inverse(a: Word, pres: Presentation) -> Word:
    out = []
    for gen, exp in reversed(a.syllables):
        out.append((gen, (4 - exp) % 4 if pres.is_tau(gen) else -exp))
    return Word(tuple(out))


def word_length(w: Word, pres: Presentation) -> int:
    """Total letter count: |exponent| for Z generators, exponent for Z4."""
    return sum(exp if pres.is_tau(gen) else abs(exp) for gen, exp in w.syllables)


def is_reduced(w: Word, pres: Presentation) -> bool:
    prev = 0
    for gen, exp in w.syllables:
        if gen == prev or not 1 <= gen <= pres.generators:
            return False
        if pres.is_tau(gen):
            if exp not in (1, 2, 3):
                return False
        elif exp == 0:
            return False
        prev = gen
    return True


@dataclass(frozen=True)
class TripleDecomposition:
    h1: Word
    h2: Word
    h3: Word


def decompose(g: Word, pres: Presentation) -> TripleDecomposition:
    """Split g = h1 h2 h3 with h3 = h1^{-1}, transferring matched end
    syllables inward: opposite-sign ends of the same Z generator move out
    letter by letter; same-Z4-generator ends with exponent total >= 4 move
    out as tau^j / tau^(4-j), taking j=2 whenever more than one j fits."""
    mid = list(g.syllables)
    h1: list[Syllable] = []
    while len(mid) >= 2:
        gen_a, a = mid[0]
        gen_b, b = mid[-1]
        if gen_a != gen_b:
            break
        gen = gen_a
        if pres.is_sigma(gen):
            if (a > 0) == (b > 0):
                break
            take = min(abs(a), abs(b))
            sign = 1 if a > 0 else -1
            h1.append((gen, sign * take))
            if abs(a) == take:
                mid.pop(0)
            else:
                mid[0] = (gen, a - sign * take)
            if abs(b) == take:
                mid.pop()
            else:
                mid[-1] = (gen, b + sign * take)
        else:
            if a + b < 4:
                break
            lo = max(1, 4 - b)
            hi = min(3, a)
            j = 2 if lo < hi else lo
            h1.append((gen, j))
            if a == j:
                mid.pop(0)
            else:
                mid[0] = (gen, a - j)
            back = b - (4 - j)
            if back == 0:
                mid.pop()
            else:
                mid[-1] = (gen, back)
    head = Word(tuple(h1))
    return TripleDecomposition(head, Word(tuple(mid)), inverse(head, pres))


def power(g: Word, n: int, pres: Presentation) -> Word:
    d = decompose(g, pres)
    if not d.h2:
        return IDENTITY
    if len(d.h2.syllables) == 1:
        gen, k = d.h2.syllables[0]
        if pres.is_tau(gen):
            e = (k * n) % 4
            mid = ((gen, e),) if e else ()
            return reduce_syllables(d.h1.syllables + mid + d.h3.syllables, pres)
    if n == 0:
        return IDENTITY
    if n > 0:
        mid = d.h2.syllables * n
    else:
        mid = inverse(d.h2, pres).syllables * (-n)
    return reduce_syllables(d.h1.syllables + mid + d.h3.syllables, pres)


def element_order(g: Word, pres: Presentation) -> int | None:
    """Order of g; None means infinite.  Finite orders occur exactly for
    conjugates of Z4-generator powers."""
    d = decompose(g, pres)
    if not d.h2:
        return 1
    if len(d.h2.syllables) == 1:
        gen, k = d.h2.syllables[0]
        if pres.is_tau(gen):
            return 2 if k == 2 else 4
    return None


def tau_parity(g: Word, pres: Presentation) -> int:
    """Parity (0 even / 1 odd) of the total Z4-letter count."""
    return sum(exp for gen, exp in g.syllables if pres.is_tau(gen)) % 2


# letter view: a letter is (generator, +1/-1); Z4 letters are always (gen, +1)

Letter = tuple[int, int]


def letters(w: Word, pres: Presentation) -> list[Letter]:
    out: list[Letter] = []
    for gen, exp in w.syllables:
        if pres.is_tau(gen):
            out.extend((gen, 1) for _ in range(exp))
        else:
            sign = 1 if exp > 0 else -1
            out.extend((gen, sign) for _ in range(abs(exp)))
    return out


def word_from_letters(lts: Iterable[Letter], pres: Presentation) -> Word:
    return reduce_syllables(((gen, sign) for gen, sign in lts), pres)


def leftmost_letter(w: Word, pres: Presentation) -> Letter:
    gen, exp = w.syllables[0]
    if pres.is_tau(gen):
        return (gen, 1)
    return (gen, 1 if exp > 0 else -1)


def strip_leftmost(w: Word, pres: Presentation) -> Word:
    """Remove one letter from the front; the result is reduced and one
    letter shorter."""
    gen, exp = w.syllables[0]
    rest = w.syllables[1:]
    if pres.is_tau(gen):
        new_exp = exp - 1
    else:
        new_exp = exp - (1 if exp > 0 else -1)
    if new_exp == 0:
        return Word(rest)
    return Word(((gen, new_exp),) + rest)


def prepend_letter(letter: Letter, w: Word, pres: Presentation) -> Word:
    gen, sign = letter
    return reduce_syllables(((gen, sign),) + w.syllables, pres)


def ends_with(g: Word, suffix: Word, pres: Presentation) -> bool:
    """Letter-level suffix test."""
    gl = letters(g, pres)
    sl = letters(suffix, pres)
    return len(sl) > 0 and len(gl) >= len(sl) and gl[-len(sl):] == sl


def last_letter(w: Word, pres: Presentation) -> Letter | None:
    if not w.syllables:
        return None
    gen, exp = w.syllables[-1]
    if pres.is_tau(gen):
        return (gen, 1)
    return (gen, 1 if exp > 0 else -1)


def enumerate_ball(pres: Presentation, bound: int) -> Iterator[Word]:
    """Every reduced word of letter-length at most `bound`, exactly once, in
    shortlex order: length first, then generator index, then exponent with
    Z exponents ascending (-n..-1, 1..n) and Z4 exponents 1..3."""

    def emit(length: int, banned: int) -> Iterator[tuple[Syllable, ...]]:
        if length == 0:
            yield ()
            return
        for gen in range(1, pres.generators + 1):
            if gen == banned:
                continue
            if pres.is_sigma(gen):
                exps = [e for e in range(-length, length + 1) if e != 0]
            else:
                exps = [e for e in (1, 2, 3) if e <= length]
            for exp in exps:
                head = (gen, exp)
                for rest in emit(length - abs(exp), gen):
                    yield (head,) + rest

    for length in range(bound + 1):
        for syl in emit(length, 0):
            yield Word(syl)


def ball_size(pres: Presentation, bound: int) -> int:
    """Word count of the ball, by the transfer recurrence (independent of
    the enumerator; used to cross-check it)."""
    m, mbar = pres.generators, pres.infinite

    # f[n][banned_is_sigma? actually banned generator identity matters only
    # through its type] -- counts of length-n words avoiding one fixed
    # generator at the front.  Track banned = none / a sigma / a tau.
    def count(n: int, banned: int, memo: dict) -> int:
        if n == 0:
            return 1
        key = (n, banned)
        if key in memo:
            return memo[key]
        total = 0
        for gen in range(1, m + 1):
            if gen == banned:
                continue
            if pres.is_sigma(gen):
                for e in range(1, n + 1):
                    total += 2 * count(n - e, gen, memo)
            else:
                for e in (1, 2, 3):
                    if e <= n:
                        total += count(n - e, gen, memo)
        memo[key] = total
        return total

    memo: dict = {}
    return sum(count(n, 0, memo) for n in range(bound + 1))


_TOKEN_RE = re.compile(r"([st])(\d+)(?:\^(-?\d+))?$")


def format_word(w: Word, pres: Presentation) -> str:
    if not w.syllables:
        return "e"
    parts = []
    for gen, exp in w.syllables:
        if pres.is_tau(gen):
            name = f"t{gen - pres.infinite}"
        else:
            name = f"s{gen}"
        parts.append(name if exp == 1 else f"{name}^{exp}")
    return " ".join(parts)


def parse_word(text: str, pres: Presentation) -> Word:
    text = text.strip()
    if text in ("", "e"):
        return IDENTITY
    raw: list[Syllable] = []
    for tok in text.split():
        match = _TOKEN_RE.match(tok)
        if not match:
            raise ValueError(f"bad word token: {tok!r}")
        family, idx_s, exp_s = match.groups()
        idx = int(idx_s)
        exp = int(exp_s) if exp_s is not None else 1
        if family == "s":
            if not 1 <= idx <= pres.infinite:
                raise ValueError(f"no infinite-order generator s{idx}")
            gen = idx
        else:
            gen = pres.infinite + idx
            if not pres.is_tau(gen):
                raise ValueError(f"no order-4 generator t{idx}")
        raw.append((gen, exp))
    word = reduce_syllables(raw, pres)
    return word
