"""Systems of formal congruences over pieces {1,...,r}.

A congruence is a pair (L, R) of nonempty proper subsets of {1,...,r}, read
as "the union of the pieces in L is congruent to the union of the pieces in
R".  Subsets are stored as bitmasks: bit k-1 set means piece k is in the set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

Mask = int


class DslError(ValueError):
    """Parse failure, with 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def mask_of(indices: Iterable[int]) -> Mask:
    m = 0
    for k in indices:
        m |= 1 << (k - 1)
    return m


def mask_indices(mask: Mask) -> tuple[int, ...]:
    out = []
    k = 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


def full_mask(r: int) -> Mask:
    return (1 << r) - 1


def complement(mask: Mask, r: int) -> Mask:
    return full_mask(r) & ~mask


def is_proper(mask: Mask, r: int) -> bool:
    return mask != 0 and mask != full_mask(r)


def popcount(mask: Mask) -> int:
    return bin(mask).count("1")


def mask_str(mask: Mask) -> str:
    return "{" + " ".join(str(k) for k in mask_indices(mask)) + "}"


def proper_masks(r: int) -> Iterator[Mask]:
    """All nonempty proper subsets of {1,...,r}, ascending as integers."""
    for m in range(1, full_mask(r)):
        yield m


@dataclass(frozen=True)
class CongruenceSystem:
    """r pieces plus an ordered list of proper congruences (L_i, R_i)."""

    r: int
    congruences: tuple[tuple[Mask, Mask], ...] = ()

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("piece count r must be >= 1")
        for i, (left, right) in enumerate(self.congruences, start=1):
            for side in (left, right):
                if side == 0:
                    raise ValueError(f"congruence {i}: improper side (empty)")
                if side == full_mask(self.r):
                    raise ValueError(f"congruence {i}: improper side (full set)")
                if side & ~full_mask(self.r):
                    raise ValueError(f"congruence {i}: index out of range for r={self.r}")

    @property
    def m(self) -> int:
        return len(self.congruences)

    def sides(self) -> list[Mask]:
        """All sides and their complements, deduplicated, ascending."""
        seen = set()
        for left, right in self.congruences:
            seen.update((left, right, complement(left, self.r), complement(right, self.r)))
        return sorted(seen)

    def without(self, index: int) -> "CongruenceSystem":
        """Copy with congruence `index` (1-based) removed."""
        congs = tuple(c for j, c in enumerate(self.congruences, start=1) if j != index)
        return CongruenceSystem(self.r, congs)


_SETS_RE = re.compile(r"sets\s+(\d+)\s*$")
_CONG_RE = re.compile(r"cong\s+\{([^}]*)\}\s*~\s*\{([^}]*)\}\s*$")


def _parse_side(body: str, r: int, line_no: int, col: int) -> Mask:
    mask = 0
    for tok in body.split():
        if not tok.isdigit():
            raise DslError(f"expected piece index, got {tok!r}", line_no, col)
        k = int(tok)
        if k < 1 or k > r:
            raise DslError(f"index out of range: {k} (r={r})", line_no, col)
        mask |= 1 << (k - 1)
    if mask == 0:
        raise DslError("improper side: empty set", line_no, col)
    if mask == full_mask(r):
        raise DslError("improper side: full set", line_no, col)
    return mask


def parse_system(text: str) -> CongruenceSystem:
    """Parse the line-oriented DSL: `sets <r>` then `cong {..} ~ {..}` lines."""
    r: int | None = None
    congruences: list[tuple[Mask, Mask]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        col = line.index(stripped[0]) + 1
        if r is None:
            m = _SETS_RE.match(stripped)
            if not m:
                raise DslError("expected `sets <r>` header", line_no, col)
            r = int(m.group(1))
            if r < 1:
                raise DslError("piece count must be >= 1", line_no, col)
            continue
        m = _CONG_RE.match(stripped)
        if not m:
            raise DslError("expected `cong {..} ~ {..}`", line_no, col)
        left = _parse_side(m.group(1), r, line_no, col)
        right = _parse_side(m.group(2), r, line_no, col)
        congruences.append((left, right))
    if r is None:
        raise DslError("empty input: missing `sets <r>` header", 1, 1)
    return CongruenceSystem(r, tuple(congruences))


def format_system(sys_: CongruenceSystem) -> str:
    lines = [f"sets {sys_.r}"]
    for left, right in sys_.congruences:
        lines.append(f"cong {mask_str(left)} ~ {mask_str(right)}")
    return "\n".join(lines) + "\n"
