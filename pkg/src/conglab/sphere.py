"""Exact-arithmetic rotations of the sphere.

Everything is a 3x3 matrix or 3-vector of Fractions; no floating point
appears in any decision.  Infinite-order generators are rotations by
arccos(3/5) (conjugated to distinct committed rational axes), order-4
generators are conjugated quarter turns composed with the antipodal map,
which is central and keeps the witnesses fixed-point free on odd words.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .words import Presentation, Word, enumerate_ball, tau_parity

Vec = tuple[Fraction, Fraction, Fraction]
Mat = tuple[tuple[Fraction, ...], ...]

ZERO = Fraction(0)
ONE = Fraction(1)

IDENTITY_MAT: Mat = (
    (ONE, ZERO, ZERO),
    (ZERO, ONE, ZERO),
    (ZERO, ZERO, ONE),
)

ZETA: Mat = tuple(tuple(-x for x in row) for row in IDENTITY_MAT)  # type: ignore[assignment]


def mat_mul(a: Mat, b: Mat) -> Mat:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
        for i in range(3)
    )


def mat_vec(a: Mat, v: Vec) -> Vec:
    return tuple(sum(a[i][k] * v[k] for k in range(3)) for i in range(3))  # type: ignore[return-value]


def transpose(a: Mat) -> Mat:
    return tuple(tuple(a[j][i] for j in range(3)) for i in range(3))


def det(a: Mat) -> Fraction:
    return (
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )


def trace(a: Mat) -> Fraction:
    return a[0][0] + a[1][1] + a[2][2]


def is_orthogonal(a: Mat) -> bool:
    return mat_mul(transpose(a), a) == IDENTITY_MAT


def mat_pow(a: Mat, n: int) -> Mat:
    if n < 0:
        return mat_pow(transpose(a), -n)
    out = IDENTITY_MAT
    for _ in range(n):
        out = mat_mul(out, a)
    return out


def dist_sq(p: Vec, q: Vec) -> Fraction:
    return sum((p[i] - q[i]) ** 2 for i in range(3))


def on_sphere(p: Vec) -> bool:
    return p[0] ** 2 + p[1] ** 2 + p[2] ** 2 == 1


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


def vec_json(v: Vec) -> list[str]:
    return [frac_str(x) for x in v]


def vec_from_json(parts: Iterable[str]) -> Vec:
    x, y, z = (Fraction(p) for p in parts)
    return (x, y, z)


def mat_json(m: Mat) -> list[list[str]]:
    return [[frac_str(x) for x in row] for row in m]


def mat_from_json(rows: list[list[str]]) -> Mat:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _rot(cos: Fraction, sin: Fraction, axis: str) -> Mat:
    c, s = cos, sin
    if axis == "z":
        return ((c, -s, ZERO), (s, c, ZERO), (ZERO, ZERO, ONE))
    if axis == "x":
        return ((ONE, ZERO, ZERO), (ZERO, c, -s), (ZERO, s, c))
    return ((c, ZERO, s), (ZERO, ONE, ZERO), (-s, ZERO, c))


_C35 = Fraction(3, 5)
_S45 = Fraction(4, 5)
_C7 = Fraction(7, 25)
_S24 = Fraction(24, 25)
_C5 = Fraction(5, 13)
_S12 = Fraction(12, 13)

_RX7 = _rot(_C7, _S24, "x")
_RY7 = _rot(_C7, _S24, "y")
_RX13 = _rot(_C5, _S12, "x")
_RY13 = _rot(_C5, _S12, "y")


def _chain(*mats: Mat) -> Mat:
    out = IDENTITY_MAT
    for m in mats:
        out = mat_mul(out, m)
    return out


# Committed conjugators: infinite-order generator k acts about D ẑ for the
# k-th entry below (the first two give the classic pair about the z and x
# axes).  The conjugator angle families (7/25 and 5/13) are distinct from
# the generators' own angles, so conjugators are not expressible in the
# generators by short words.  Order-4 generators use their own family: a
# half turn about an axis perpendicular or parallel to another generator's
# axis would conjugate that generator to its inverse, so every tau axis
# must stay non-orthogonal and non-parallel to every other committed axis
# (checked exactly in tests).
_SIGMA_CONJUGATORS: tuple[Mat, ...] = (
    IDENTITY_MAT,
    _rot(ZERO, ONE, "y"),
    _rot(ZERO, ONE, "x"),
    _chain(_RX7, _RY7),
    _chain(_RX7, _RX7, _RY7),
    _chain(_RX7, _RY7, _RY7),
    _chain(_RX7, _RX7, _RY7, _RY7),
    _chain(_RX7, _RX7, _RX7, _RY7),
)

_TAU_CONJUGATORS: tuple[Mat, ...] = (
    _chain(_RX13, _RY13),
    _chain(_RX13, _RX13, _RY13),
    _chain(_RX13, _RY13, _RY13),
    _chain(_RX13, _RX13, _RY13, _RY13),
    _chain(_RX13, _RX13, _RX13, _RY13),
    _chain(_RX13, _RY13, _RY13, _RY13),
    _chain(_RX13, _RX13, _RX13, _RY13, _RY13),
    _chain(_RX13, _RX13, _RY13, _RY13, _RY13),
)

MAX_GENERATORS = len(_SIGMA_CONJUGATORS)


@dataclass
class GroupRealization:
    presentation: Presentation
    generator_matrices: tuple[Mat, ...]
    zeta_composed: tuple[bool, ...]
    freeness_certified_to: int = 0

    def matrix(self, gen: int) -> Mat:
        return self.generator_matrices[gen - 1]


def standard_generators(pres: Presentation) -> GroupRealization:
    """The committed realization: arccos(3/5) rotations for the Z factors,
    zeta-composed quarter turns for the Z4 factors, all about the committed
    distinct rational axes."""
    if pres.generators > MAX_GENERATORS:
        raise ValueError(f"at most {MAX_GENERATORS} generators are committed")
    mats = []
    zeta_flags = []
    sigma_base = _rot(_C35, _S45, "z")
    tau_base = _rot(ZERO, ONE, "z")
    for gen in range(1, pres.generators + 1):
        if pres.is_sigma(gen):
            conj = _SIGMA_CONJUGATORS[gen - 1]
            mats.append(mat_mul(mat_mul(conj, sigma_base), transpose(conj)))
            zeta_flags.append(False)
        else:
            conj = _TAU_CONJUGATORS[gen - pres.infinite - 1]
            rot = mat_mul(mat_mul(conj, tau_base), transpose(conj))
            mats.append(mat_mul(ZETA, rot))
            zeta_flags.append(True)
    return GroupRealization(pres, tuple(mats), tuple(zeta_flags))


def evaluate(real: GroupRealization, g: Word) -> Mat:
    """Matrix of a word; leftmost syllable is the leftmost factor."""
    out = IDENTITY_MAT
    for gen, exp in g.syllables:
        out = mat_mul(out, mat_pow(real.matrix(gen), exp))
    return out


def apply(m: Mat, x: Vec) -> Vec:
    return mat_vec(m, x)


@dataclass
class FreenessResult:
    certified: bool
    depth: int
    words_checked: int
    counterexample: Word | None = None


def certify_ball_freeness(real: GroupRealization, depth: int) -> FreenessResult:
    """Exhaustively check that no nonidentity reduced word up to the given
    letter length evaluates to the identity matrix.  On success the bound is
    recorded in the realization."""
    pres = real.presentation
    gen_pows: dict[tuple[int, int], Mat] = {}

    def gp(gen: int, exp: int) -> Mat:
        key = (gen, exp)
        if key not in gen_pows:
            gen_pows[key] = mat_pow(real.matrix(gen), exp)
        return gen_pows[key]

    count = 0

    def walk(prefix: Mat, banned: int, remaining: int) -> Word | None:
        nonlocal count
        for gen in range(1, pres.generators + 1):
            if gen == banned:
                continue
            if pres.is_sigma(gen):
                exps: Iterable[int] = [e for e in range(-remaining, remaining + 1) if e != 0]
            else:
                exps = [e for e in (1, 2, 3) if e <= remaining]
            for exp in exps:
                mat = mat_mul(prefix, gp(gen, exp))
                count += 1
                if mat == IDENTITY_MAT:
                    return Word(((gen, exp),))
                deeper = walk(mat, gen, remaining - abs(exp))
                if deeper is not None:
                    return Word(((gen, exp),) + deeper.syllables)
        return None

    bad = walk(IDENTITY_MAT, 0, depth)
    if bad is not None:
        return FreenessResult(False, depth, count, bad)
    real.freeness_certified_to = max(real.freeness_certified_to, depth)
    return FreenessResult(True, depth, count)


@dataclass
class FixedPointStatus:
    has_fixed_point: bool
    kind: str  # identity | rotation | free
    axis: Vec | None = None

    def to_dict(self) -> dict:
        return {
            "has_fixed_point": self.has_fixed_point,
            "kind": self.kind,
            "axis": None if self.axis is None else vec_json(self.axis),
        }


def _kernel_vector(m: Mat) -> Vec | None:
    """A nonzero rational vector with (M - I)v = 0, canonically scaled."""
    rows = [[m[i][j] - (ONE if i == j else ZERO) for j in range(3)] for i in range(3)]
    # Gaussian elimination
    pivots = []
    r = 0
    for c in range(3):
        pivot = next((i for i in range(r, 3) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        rows[r] = [x / rows[r][c] for x in rows[r]]
        for i in range(3):
            if i != r and rows[i][c] != 0:
                rows[i] = [a - rows[i][c] * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if r == 3:
        return None
    free = next(c for c in range(3) if c not in pivots)
    v = [ZERO, ZERO, ZERO]
    v[free] = ONE
    for row, c in zip(rows, pivots):
        v[c] = -row[free]
    # clear denominators, divide by gcd, first nonzero positive
    from math import gcd

    denom = 1
    for x in v:
        denom = denom * x.denominator // gcd(denom, x.denominator)
    ints = [int(x * denom) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    if next(x for x in ints if x != 0) < 0:
        ints = [-x for x in ints]
    return tuple(Fraction(x) for x in ints)  # type: ignore[return-value]


def fixed_point_status(m: Mat) -> FixedPointStatus:
    """Exact fixed-point test for an orthogonal matrix acting on the sphere.

    Rotations other than the identity fix their axis.  An orientation-
    reversing isometry fixes a point iff +1 is an eigenvalue, which for
    these matrices happens exactly when the underlying rotation has angle
    pi, i.e. trace(-M) = -1.
    """
    if not is_orthogonal(m):
        raise ValueError("matrix is not orthogonal")
    if m == IDENTITY_MAT:
        return FixedPointStatus(True, "identity")
    d = det(m)
    if d == 1:
        axis = _kernel_vector(m)
        if axis is None:
            raise AssertionError("rotation without an axis")
        return FixedPointStatus(True, "rotation", axis)
    if trace(m) == 1:
        axis = _kernel_vector(m)
        return FixedPointStatus(True, "rotation", axis)
    return FixedPointStatus(False, "free")


@dataclass
class OrbitPointsReport:
    points: list[Vec]
    min_dist_sq: Fraction | None
    coincidences: list[tuple[int, int]]

    def to_dict(self) -> dict:
        return {
            "points": [vec_json(p) for p in self.points],
            "min_dist_sq": None if self.min_dist_sq is None else frac_str(self.min_dist_sq),
            "coincidences": self.coincidences,
        }


def orbit_points(real: GroupRealization, words: list[Word], x0: Vec) -> OrbitPointsReport:
    if not on_sphere(x0):
        raise ValueError("base point must lie exactly on the sphere")
    points = [apply(evaluate(real, w), x0) for w in words]
    min_d: Fraction | None = None
    coincidences = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = dist_sq(points[i], points[j])
            if d == 0:
                coincidences.append((i, j))
            elif min_d is None or d < min_d:
                min_d = d
    return OrbitPointsReport(points, min_d, coincidences)


def enumerate_parity_words(real: GroupRealization, count: int, parity: int,
                           max_depth: int = 6) -> Iterator[Word]:
    """First `count` ball words with the given order-4 letter parity."""
    pres = real.presentation
    emitted = 0
    for w in enumerate_ball(pres, max_depth):
        if not w:
            continue
        if tau_parity(w, pres) == parity:
            yield w
            emitted += 1
            if emitted >= count:
                return
