"""Stage-wise construction of the open sets B_k on the sphere, desk scale.

Each stage consumes one entry of a committed base-cap schedule, picks an
exact rational point x0, runs the M recursion to decide which group
translates of x0 join which pieces, and places one spherical cap per
placement, sized so that every maintained property can be re-checked
exactly afterwards:

* (2) no tracked point belongs to every piece;
* (3) patch-level membership equivalences under each witness generator;
* (4) the link graph over tracked points has finite enumerated components;
* every cap is included in or disjoint from every other cap (proved by
  exact rational comparisons, with a sorted-coordinate window index so the
  checks stay near-linear).

All geometry is exact; no float enters any decision.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Iterator

from .budgets import BudgetError
from .deduction import is_consistent, is_weak
from .partitions import MgState, mg_support
from .sphere import (
    GroupRealization,
    Mat,
    Vec,
    apply,
    dist_sq,
    frac_str,
    mat_pow,
    vec_json,
)
from .systems import CongruenceSystem, Mask, complement, full_mask, mask_indices
from .words import (
    IDENTITY,
    Presentation,
    Word,
    format_word,
    leftmost_letter,
    multiply,
    strip_leftmost,
    word_length,
)

SCHEMA = "conglab-stage-state/1"


def sqrt_upper(x: Fraction) -> Fraction:
    """A rational upper bound for sqrt(x), tight to ~2^-40."""
    if x < 0:
        raise ValueError("negative radicand")
    num = x.numerator << 80
    q = -((-num) // x.denominator)  # ceil division
    return Fraction(isqrt(q) + 1, 1 << 40)


def _cw_stream() -> Iterator[Fraction]:
    q = Fraction(1)
    while True:
        yield q
        q = 1 / (2 * (q.numerator // q.denominator) - q + 1)


def signed_rational(index: int) -> Fraction:
    """0, 1, -1, 1/2, -1/2, 2, -2, ... (Calkin-Wilf with signs)."""
    if index == 0:
        return Fraction(0)
    k, odd = divmod(index + 1, 2)
    stream = _cw_stream()
    value = Fraction(1)
    for _ in range(k):
        value = next(stream)
    return value if odd else -value


def _cantor_unpair(n: int) -> tuple[int, int]:
    w = (isqrt(8 * n + 1) - 1) // 2
    t = w * (w + 1) // 2
    return n - t, w - (n - t)


def rational_point(index: int) -> Vec:
    """Committed dense sequence of exact rational sphere points
    (inverse stereographic image of a rational plane grid)."""
    i, j = _cantor_unpair(index)
    u, v = signed_rational(i), signed_rational(j)
    s = 1 + u * u + v * v
    return (2 * u / s, 2 * v / s, (u * u + v * v - 1) / s)


@dataclass(frozen=True)
class BaseCap:
    kind: str  # "sphere" | "cap"
    center: Vec | None = None
    radius_sq: Fraction | None = None
    occurrence: int = 0  # t for the t-th whole-sphere entry

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": None if self.center is None else vec_json(self.center),
            "radius_sq": None if self.radius_sq is None else frac_str(self.radius_sq),
            "occurrence": self.occurrence,
        }


def base_schedule_entry(r: int, n: int) -> BaseCap:
    """Entry n of the committed base listing; the whole sphere occupies the
    first r slots."""
    if n < r:
        return BaseCap("sphere", occurrence=n + 1)
    t, d = _cantor_unpair(n - r)
    return BaseCap("cap", rational_point(t), Fraction(1, 4 ** (d + 1)))


@dataclass(frozen=True)
class Patch:
    piece: int
    word: Word
    stage: int
    base_center: Vec
    center: Vec
    radius_sq: Fraction


@dataclass
class StageRegions:
    """All caps of one stage share a base point and radius; the centers are
    kept sorted by x for exact window queries."""

    stage: int
    base_center: Vec
    radius_sq: Fraction
    radius_upper: Fraction  # rational upper bound of the radius
    xs: list[Fraction] = field(default_factory=list)
    centers: list[Vec] = field(default_factory=list)
    pieces: list[Mask] = field(default_factory=list)  # placed pieces per center
    words: list[Word] = field(default_factory=list)

    def add(self, center: Vec, pieces: Mask, word: Word) -> None:
        pos = bisect_left(self.xs, center[0])
        self.xs.insert(pos, center[0])
        self.centers.insert(pos, center)
        self.pieces.insert(pos, pieces)
        self.words.insert(pos, word)

    def window(self, x: Fraction, half_width: Fraction) -> range:
        return range(bisect_left(self.xs, x - half_width), bisect_right(self.xs, x + half_width))


@dataclass
class TrackedPoint:
    point: Vec
    mask: Mask  # full membership
    stage: int
    word: Word


@dataclass
class StageRecord:
    stage: int
    cap: BaseCap
    x0: Vec
    k_bar: int
    placements: int
    radius_sq: Fraction
    candidate_index: int

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "cap": self.cap.to_dict(),
            "x0": vec_json(self.x0),
            "k_bar": self.k_bar,
            "placements": self.placements,
            "radius_sq": frac_str(self.radius_sq),
            "candidate_index": self.candidate_index,
        }


class InvariantViolation(RuntimeError):
    pass


@dataclass
class StageState:
    system: CongruenceSystem
    m_bar: int
    variant: str
    presentation: Presentation
    realization: GroupRealization
    link_radius: int
    stages: list[StageRegions] = field(default_factory=list)
    tracked: dict[Vec, TrackedPoint] = field(default_factory=dict)
    stage: int = 0
    history: list[StageRecord] = field(default_factory=list)
    x0_budget: int = 512
    support_budget: int = 100_000

    # -- exact geometric queries --------------------------------------------

    def membership(self, point: Vec, include_boundary: bool = False) -> tuple[Mask, bool]:
        """(pieces whose open caps contain the point, point-on-some-boundary)."""
        mask = 0
        boundary = False
        x = point[0]
        for regions in self.stages:
            for idx in regions.window(x, regions.radius_upper):
                d = dist_sq(point, regions.centers[idx])
                if d < regions.radius_sq:
                    mask |= regions.pieces[idx]
                elif d == regions.radius_sq:
                    boundary = True
        return mask, boundary

    def piece_patches(self) -> dict[int, list[Patch]]:
        out: dict[int, list[Patch]] = {k: [] for k in range(1, self.system.r + 1)}
        for regions in self.stages:
            for center, pieces, word in zip(regions.centers, regions.pieces, regions.words):
                for k in mask_indices(pieces):
                    out[k].append(Patch(k, word, regions.stage, regions.base_center,
                                        center, regions.radius_sq))
        return out

    def patch_count(self) -> int:
        return sum(len(mask_indices(p)) for s in self.stages for p in s.pieces)


def _generator_images(state: StageState, point: Vec) -> list[tuple[int, int, Vec]]:
    """(generator, direction, image point) for every one-link neighbor."""
    out = []
    for gen in range(1, state.presentation.generators + 1):
        mat = state.realization.matrix(gen)
        out.append((gen, +1, apply(mat, point)))
        out.append((gen, -1, apply(mat_pow(mat, -1), point)))
    return out


def init(system: CongruenceSystem, m_bar: int, realization: GroupRealization,
         variant: str, min_certificate_depth: int = 4) -> StageState:
    """Fresh state: empty pieces, schedule at the first whole-sphere slot.

    Requires a weak consistent system for the s2 variant, a consistent
    transformed system for s4, and a ball-freeness certificate of at least
    the configured depth on the realization (the stage steps then verify
    the point-level facts the certificate stands in for exactly, at every
    placement, since certificates to the full link radius are not
    computable).
    """
    if variant not in ("s2", "s4"):
        raise ValueError("variant must be 's2' or 's4'")
    if not is_consistent(system).ok:
        raise ValueError("system must be consistent")
    if variant == "s2":
        if not is_weak(system).ok:
            raise ValueError("s2 variant needs a weak system")
        m_bar = system.m
    else:
        for i in range(m_bar + 1, system.m + 1):
            left, right = system.congruences[i - 1]
            if right != complement(left, system.r):
                raise ValueError(f"congruence {i} must be self-complement in the s4 variant")
        if m_bar and not is_weak(CongruenceSystem(system.r, system.congruences[:m_bar])).ok:
            raise ValueError("leading congruences must form a weak system")
    pres = realization.presentation
    if pres.generators != system.m:
        raise ValueError("realization must have one generator per congruence")
    expected_infinite = system.m if variant == "s2" else m_bar
    if pres.infinite != expected_infinite:
        raise ValueError("realization generator orders do not match the variant")
    if realization.freeness_certified_to < min_certificate_depth:
        raise ValueError(
            f"insufficient freeness certificate: need depth >= {min_certificate_depth}, "
            f"have {realization.freeness_certified_to}")
    link_radius = (1 << (system.r + 1)) if variant == "s4" else (1 << system.r)
    return StageState(system, m_bar, variant, pres, realization, link_radius)


def _stereo(u: Fraction, v: Fraction) -> Vec:
    s = 1 + u * u + v * v
    return (2 * u / s, 2 * v / s, (u * u + v * v - 1) / s)


def _candidate_x0(index: int, cap: BaseCap) -> Vec:
    """Committed candidate stream for base points.

    Whole-sphere stages roam a shifted rational grid (the 1/3 and 1/7
    offsets break coordinate symmetry: unshifted grid points like (1, 1) or (-1, -1)
    project onto mirror axes of products of the committed generators and
    collide with their own orbit).  Cap stages walk a sequence converging
    to the cap center in the stereographic chart, so candidates inside the
    cap are reached after boundedly many attempts regardless of how small
    or far the cap is."""
    if cap.kind == "sphere":
        i, j = _cantor_unpair(index)
        u = signed_rational(i) + Fraction(1, 3)
        v = signed_rational(j) + Fraction(1, 7)
        return _stereo(u, v)
    cx, cy, cz = cap.center
    uc, vc = cx / (1 - cz), cy / (1 - cz)
    ring, spoke = divmod(index, 16)
    scale = Fraction(1, 4 ** (ring + 1))
    du = signed_rational(spoke) * scale / 3
    dv = signed_rational((spoke + 5) % 16) * scale / 7
    return _stereo(uc + du + scale / 11, vc + dv + scale / 13)


def _outside_piece_closure(state: StageState, point: Vec, piece: int) -> bool:
    bit = 1 << (piece - 1)
    x = point[0]
    for regions in state.stages:
        for idx in regions.window(x, regions.radius_upper):
            if not regions.pieces[idx] & bit:
                continue
            if dist_sq(point, regions.centers[idx]) <= regions.radius_sq:
                return False
    return True


def step(state: StageState) -> None:
    full = full_mask(state.system.r)
    for tp in state.tracked.values():
        if tp.mask == full:
            raise InvariantViolation(
                f"refusing to step: tracked point of stage {tp.stage} "
                f"(word {format_word(tp.word, state.presentation)}) lies in every piece")
    cap = base_schedule_entry(state.system.r, state.stage)
    last_error: str | None = None
    for candidate in range(state.x0_budget):
        x0 = _candidate_x0(candidate, cap)
        outcome = _attempt_stage(state, cap, x0, candidate)
        if outcome is None:
            return
        last_error = outcome
    raise BudgetError(f"no valid x0 found in budget ({state.x0_budget}): last failure: {last_error}")


def _attempt_stage(state: StageState, cap: BaseCap, x0: Vec, candidate: int) -> str | None:
    """One candidate base point; returns an error string to try the next
    candidate, or None after committing the stage."""
    sys_ = state.system
    full = full_mask(sys_.r)

    # -- x0 must land in Z' and off every patch boundary
    if cap.kind == "sphere":
        if not _outside_piece_closure(state, x0, cap.occurrence):
            return "candidate inside the forced piece"
    else:
        if not dist_sq(x0, cap.center) < cap.radius_sq:
            return "candidate outside the scheduled cap"
    members_x0, boundary = state.membership(x0, include_boundary=True)
    if boundary:
        return "candidate on a patch boundary"
    if members_x0 == full:
        raise InvariantViolation("a point lies in every piece")

    # cheap rejection of generator axis points before the heavy work
    letter_mats: dict[tuple[int, int], Mat] = {}
    for gen in range(1, state.presentation.generators + 1):
        mat = state.realization.matrix(gen)
        letter_mats[(gen, +1)] = mat
        letter_mats[(gen, -1)] = mat_pow(mat, -1)
        if apply(mat, x0) == x0:
            return "candidate fixed by a generator"

    if cap.kind == "sphere":
        k_bar = cap.occurrence
    else:
        k_bar = next(k for k in range(1, sys_.r + 1) if not members_x0 >> (k - 1) & 1)

    # -- M recursion over the orbit of x0 (points built one letter at a time)
    points: dict[Word, Vec] = {IDENTITY: x0}

    def point_of(word: Word) -> Vec:
        missing = []
        cur = word
        while cur not in points:
            missing.append(cur)
            cur = strip_leftmost(cur, state.presentation)
        for w in reversed(missing):
            parent = strip_leftmost(w, state.presentation)
            points[w] = apply(letter_mats[leftmost_letter(w, state.presentation)], points[parent])
        return points[word]

    oracle_memo: dict[Word, Mask] = {}

    def oracle(word: Word) -> Mask:
        if word not in oracle_memo:
            mask, on_boundary = state.membership(point_of(word))
            oracle_memo[word] = mask
        return oracle_memo[word]

    mg_state = MgState(sys_, k_bar, state.presentation, oracle)
    try:
        support = mg_support(mg_state, max_length=state.link_radius * (len(state.tracked) + 2),
                             budget=state.support_budget)
    except AssertionError as exc:
        return f"M recursion failed: {exc}"

    placements = sorted(support.items(), key=lambda kv: (word_length(kv[0], state.presentation), kv[0].syllables))
    new_words = [w for w, _ in placements]
    new_set = set(new_words)

    # -- points used for sizing: placements plus their one-link extensions
    new_points: list[tuple[Word, Vec]] = [(w, point_of(w)) for w in new_words]
    extension_words: set[Word] = set()
    for w in new_words:
        for gen in range(1, state.presentation.generators + 1):
            for sign in (+1, -1):
                img = multiply(Word(((gen, sign),)), w, state.presentation)
                if img not in new_set:
                    extension_words.add(img)
    extension_points = [point_of(w) for w in sorted(extension_words, key=lambda w: w.syllables)]

    # every used point stays off existing boundaries
    for p in [p for _, p in new_points] + extension_points:
        _, on_boundary = state.membership(p, include_boundary=True)
        if on_boundary:
            return "a used point lies on a patch boundary"

    # -- radius: a quarter of the least distance among the points that matter
    pts = [p for _, p in new_points]
    closest = _closest_pair_sq(pts)
    if closest == 0:
        return "coincident placement points"
    u_sq = min(Fraction(1, 64), closest / 16 if closest is not None else Fraction(1, 64))

    # window index over the new centers, for threshold queries
    guard = sqrt_upper(u_sq)
    new_sorted = sorted(pts, key=lambda p: (p[0], p[1], p[2]))
    xs_only = [p[0] for p in new_sorted]

    def near_new(point: Vec) -> Fraction | None:
        lo = bisect_left(xs_only, point[0] - guard)
        hi = bisect_right(xs_only, point[0] + guard)
        best = None
        for idx in range(lo, hi):
            d = dist_sq(point, new_sorted[idx])
            if best is None or d < best:
                best = d
        return best

    # one-link extension points must stay clear of every new cap
    for p in extension_points:
        d = near_new(p)
        if d is not None:
            if d == 0:
                return "orbit coincidence between an extension and a placement"
            u_sq = min(u_sq, d / 16)

    # old centers and their one-link images must stay outside the new caps
    for tp in state.tracked.values():
        for q in [tp.point] + [img for _, _, img in _generator_images(state, tp.point)]:
            d = near_new(q)
            if d is not None:
                if d == 0:
                    return "a new placement collides with an existing tracked point"
                u_sq = min(u_sq, d / 16)

    # stay inside or outside every existing cap with exact margin; caps not
    # in the window are provably unbinding (d^2 >= radius_sq + 4 sqrt(u_sq))
    reach = sqrt_upper(4 * sqrt_upper(u_sq))
    for _, p in new_points:
        x = p[0]
        for regions in state.stages:
            margin = regions.radius_upper + reach
            for idx in regions.window(x, margin):
                d = dist_sq(p, regions.centers[idx])
                if d < regions.radius_sq:
                    gap = (regions.radius_sq - d) / 4
                    u_sq = min(u_sq, gap * gap)
                elif d > regions.radius_sq:
                    gap = (d - regions.radius_sq) / 4
                    u_sq = min(u_sq, gap * gap)
                else:
                    return "a placement center on a patch boundary"

    if u_sq == 0:
        return "radius collapsed to zero"

    # -- commit (memberships resolved against the old patches first)
    tracked_updates = []
    for w, mask in placements:
        mplus = mask | oracle(w)
        if mplus == full:
            raise InvariantViolation("M+ reached the full set at placement")
        tracked_updates.append((point_of(w), mplus, w))
    regions = StageRegions(state.stage, x0, u_sq, sqrt_upper(u_sq))
    for w, mask in placements:
        regions.add(point_of(w), mask, w)
    state.stages.append(regions)
    for point, mplus, w in tracked_updates:
        state.tracked[point] = TrackedPoint(point, mplus, state.stage, w)
    state.history.append(StageRecord(state.stage, cap, x0, k_bar, len(placements),
                                     u_sq, candidate_index=candidate))
    state.stage += 1
    return None


# --------------------------------------------------------------------------
# invariant checking
# --------------------------------------------------------------------------


@dataclass
class InvariantReport:
    ok: bool
    patches: int
    tracked_points: int
    links: int
    components: int
    largest_component: int
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "patches": self.patches,
            "tracked_points": self.tracked_points,
            "links": self.links,
            "components": self.components,
            "largest_component": self.largest_component,
            "failures": self.failures,
        }


def check_invariants(state: StageState, since_stage: int = 0) -> InvariantReport:
    """Exact re-check of (2), patch-level (3), (4), the cap discipline, and
    per-stage progress.  Membership masks are recomputed from patch
    geometry.  `since_stage` limits the pairwise cap-discipline scan to
    stages >= that index (earlier pairs were checked when placed)."""
    sys_ = state.system
    full = full_mask(sys_.r)
    failures: list[dict] = []

    # memberships from geometry; (2)
    for tp in state.tracked.values():
        geo, boundary = state.membership(tp.point, include_boundary=True)
        if boundary:
            failures.append({"fact": "tracked point on a boundary", "stage": tp.stage})
        if geo != tp.mask:
            failures.append({
                "fact": "stored membership disagrees with geometry",
                "word": format_word(tp.word, state.presentation),
                "stage": tp.stage,
            })
        if geo == full:
            failures.append({"fact": "a tracked point lies in every piece", "stage": tp.stage})

    # patch-level (3)
    for tp in state.tracked.values():
        for i, (left, right) in enumerate(sys_.congruences, start=1):
            mat = state.realization.matrix(i)
            image, _ = state.membership(apply(mat, tp.point))
            lc, rc = complement(left, sys_.r), complement(right, sys_.r)
            ok_main = (not (left & ~tp.mask)) == (not (right & ~image))
            ok_comp = (not (lc & ~tp.mask)) == (not (rc & ~image))
            if not (ok_main and ok_comp):
                failures.append({
                    "fact": "membership equivalence failed",
                    "congruence": i,
                    "word": format_word(tp.word, state.presentation),
                    "stage": tp.stage,
                })

    # (4): links among tracked points; every component is finite and
    # enumerated (all tracked points carry membership, so links among them
    # are active by the distance-0 case)
    index_of = {p: n for n, p in enumerate(state.tracked)}
    adj: dict[int, set[int]] = {n: set() for n in index_of.values()}
    links = 0
    for p, n in index_of.items():
        for _gen, _sign, img in _generator_images(state, p):
            m = index_of.get(img)
            if m is not None and m != n:
                if m not in adj[n]:
                    links += 1
                adj[n].add(m)
                adj[m].add(n)
    seen: set[int] = set()
    components = 0
    largest = 0
    for n in adj:
        if n in seen:
            continue
        components += 1
        size = 0
        frontier = [n]
        seen.add(n)
        while frontier:
            cur = frontier.pop()
            size += 1
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        largest = max(largest, size)

    # cap discipline: included-or-disjoint, proved exactly
    for si in range(since_stage, len(state.stages)):
        a = state.stages[si]
        for sj in range(si):
            b = state.stages[sj]
            width = a.radius_upper + b.radius_upper
            for ia in range(len(a.centers)):
                pa = a.centers[ia]
                for ib in b.window(pa[0], width):
                    if not _cap_included_or_disjoint(pa, a.radius_sq, b.centers[ib], b.radius_sq):
                        failures.append({"fact": "cap discipline violated",
                                         "stages": [a.stage, b.stage]})
        # same-stage caps share a radius, so the closest pair decides all
        closest = _closest_pair_sq(a.centers)
        if closest is not None and not _sq_dist_separates(closest, a.radius_sq, a.radius_sq):
            failures.append({"fact": "same-stage caps overlap", "stage": a.stage})

    # progress: the consumed cap meets the intersection over pieces != k_bar
    for rec in state.history:
        tp = state.tracked.get(rec.x0)
        if tp is None:
            failures.append({"fact": "stage base point is not tracked", "stage": rec.stage})
            continue
        want = full & ~(1 << (rec.k_bar - 1))
        if tp.mask & (1 << (rec.k_bar - 1)) or (want & ~tp.mask):
            failures.append({"fact": "progress membership wrong", "stage": rec.stage})
        if rec.cap.kind == "cap" and not dist_sq(rec.x0, rec.cap.center) < rec.cap.radius_sq:
            failures.append({"fact": "base point left its cap", "stage": rec.stage})

    return InvariantReport(
        ok=not failures,
        patches=state.patch_count(),
        tracked_points=len(state.tracked),
        links=links,
        components=components,
        largest_component=largest,
        failures=failures,
    )


def _closest_pair_sq(pts: list[Vec]) -> Fraction | None:
    """Smallest pairwise squared distance, by a sweep over the sorted first
    coordinate (exact; prunes once the coordinate gap alone exceeds the
    current best)."""
    if len(pts) < 2:
        return None
    order = sorted(pts, key=lambda p: (p[0], p[1], p[2]))
    best: Fraction | None = None
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            dx = order[j][0] - order[i][0]
            if best is not None and dx * dx >= best:
                break
            d = dist_sq(order[i], order[j])
            if best is None or d < best:
                best = d
                if best == 0:
                    return best
    return best


def _sq_dist_separates(d_sq: Fraction, r1_sq: Fraction, r2_sq: Fraction) -> bool:
    """Exact test for sqrt(d_sq) >= sqrt(r1_sq) + sqrt(r2_sq)."""
    b = d_sq - r1_sq - r2_sq
    return b >= 0 and b * b >= 4 * r1_sq * r2_sq


def _caps_disjoint(c1: Vec, r1_sq: Fraction, c2: Vec, r2_sq: Fraction) -> bool:
    """Exact sufficient test: center distance >= r1 + r2."""
    return _sq_dist_separates(dist_sq(c1, c2), r1_sq, r2_sq)


def _cap_included(c1: Vec, r1_sq: Fraction, c2: Vec, r2_sq: Fraction) -> bool:
    """Exact sufficient test: distance + r1 <= r2."""
    d = dist_sq(c1, c2)
    a = r2_sq + r1_sq - d
    return r2_sq >= r1_sq and a >= 0 and a * a >= 4 * r1_sq * r2_sq and d <= r2_sq


def _cap_included_or_disjoint(c1: Vec, r1_sq: Fraction, c2: Vec, r2_sq: Fraction) -> bool:
    return (_caps_disjoint(c1, r1_sq, c2, r2_sq)
            or _cap_included(c1, r1_sq, c2, r2_sq)
            or _cap_included(c2, r2_sq, c1, r1_sq))


@dataclass
class RunSummary:
    stages: int
    patches: int
    tracked_points: int
    per_piece: dict[int, int]
    reports: list[InvariantReport]

    def to_dict(self) -> dict:
        return {
            "stages": self.stages,
            "patches": self.patches,
            "tracked_points": self.tracked_points,
            "per_piece": {str(k): v for k, v in sorted(self.per_piece.items())},
            "ok": all(r.ok for r in self.reports),
        }


def run(state: StageState, steps: int, check_each: bool = True) -> RunSummary:
    reports = []
    for _ in range(steps):
        before = len(state.stages)
        step(state)
        if check_each:
            report = check_invariants(state, since_stage=before)
            reports.append(report)
            if not report.ok:
                raise InvariantViolation(json.dumps(report.failures))
    per_piece = {k: len(v) for k, v in state.piece_patches().items()}
    return RunSummary(state.stage, state.patch_count(), len(state.tracked), per_piece, reports)


# --------------------------------------------------------------------------
# snapshots
# --------------------------------------------------------------------------


def snapshot(state: StageState) -> dict:
    return {
        "schema": SCHEMA,
        "r": state.system.r,
        "m": state.system.m,
        "m_bar": state.m_bar,
        "variant": state.variant,
        "congruences": [[list(mask_indices(a)), list(mask_indices(b))]
                        for a, b in state.system.congruences],
        "link_radius": state.link_radius,
        "stage": state.stage,
        "stages": [
            {
                "stage": s.stage,
                "base_center": vec_json(s.base_center),
                "radius_sq": frac_str(s.radius_sq),
                "placements": [
                    {
                        "word": format_word(w, state.presentation),
                        "center": vec_json(c),
                        "pieces": list(mask_indices(p)),
                    }
                    for w, c, p in zip(s.words, s.centers, s.pieces)
                ],
            }
            for s in state.stages
        ],
        "tracked": [
            {
                "point": vec_json(tp.point),
                "mask": list(mask_indices(tp.mask)),
                "stage": tp.stage,
                "word": format_word(tp.word, state.presentation),
            }
            for tp in state.tracked.values()
        ],
        "history": [rec.to_dict() for rec in state.history],
    }


def snapshot_json(state: StageState) -> str:
    return json.dumps(snapshot(state), indent=1, sort_keys=True)
