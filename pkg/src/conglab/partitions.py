"""Explicit solutions in the group itself.

Three layers:

* a two-coloring of the proper masks from the weak leading part of a
  transformed system;
* group partitions: a total assignment word -> piece realizing the system
  inside the free product, witnessed by left multiplication with the
  generators, anchored so that a chosen even-parity word w shares a piece
  with the identity;
* the M recursion assigning each group element the set of pieces its orbit
  point joins during a construction stage, plus orbit models with a fixed
  word and canonical coset representatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .budgets import BudgetError, check_mask_budget
from .digraph import CongruenceDigraph
from .systems import CongruenceSystem, Mask, complement, full_mask, mask_indices, proper_masks
from .words import (
    IDENTITY,
    Letter,
    Presentation,
    Word,
    enumerate_ball,
    last_letter,
    leftmost_letter,
    letters,
    multiply,
    power,
    prepend_letter,
    strip_leftmost,
    tau_parity,
    word_from_letters,
    word_length,
)


class NotWeakError(ValueError):
    """The leading congruences relate a mask to its complement."""


class OddParityError(ValueError):
    """The anchor word has an odd number of order-4 letters."""


class ImpossibleBranchError(AssertionError):
    """A branch the accompanying induction proves unreachable was reached;
    the system is invalid or there is a bug."""


def smallest_piece(mask: Mask) -> int:
    if mask == 0:
        raise ValueError("empty mask has no pieces")
    return (mask & -mask).bit_length()


def piece_in(piece: int, mask: Mask) -> bool:
    return bool(mask >> (piece - 1) & 1)


def two_coloring(sys_: CongruenceSystem, m_bar: int) -> dict[Mask, int]:
    """Two-color all proper masks so complements get opposite colors and the
    sides of each leading congruence share a color.

    Colors follow the closure classes of the first m_bar congruences; the
    lexicographically least mask of each complementary class pair seeds
    color 0.
    """
    from .deduction import CongruenceClosure

    check_mask_budget(sys_.r)
    weak_part = CongruenceSystem(sys_.r, sys_.congruences[:m_bar])
    closure = CongruenceClosure(weak_part)
    roots: dict[Mask, list[Mask]] = {}
    for mask in closure.touched():
        roots.setdefault(closure._find(mask), []).append(mask)
    cls_of: dict[Mask, tuple[Mask, ...]] = {}
    for members in roots.values():
        t = tuple(sorted(members))
        for mask in members:
            cls_of[mask] = t
    color: dict[Mask, int] = {}
    for mask in proper_masks(sys_.r):
        if mask in color:
            continue
        cls = cls_of.get(mask, (mask,))
        comp_cls = tuple(sorted(complement(x, sys_.r) for x in cls))
        if set(cls) & set(comp_cls):
            raise NotWeakError(f"mask {mask_indices(mask)} is congruent to its complement")
        seed = 0 if min(cls) < min(comp_cls) else 1
        for x in cls:
            color[x] = seed
        for x in comp_cls:
            color[x] = 1 - seed
    return color


def letter_action(sys_: CongruenceSystem, pres: Presentation, letter: Letter) -> tuple[Mask, Mask]:
    """(domain, range) of a witness letter: congruence i read forward for
    sigma_i and tau_i, backward for sigma_i^{-1}."""
    gen, sign = letter
    left, right = sys_.congruences[gen - 1]
    if sign < 0:
        return right, left
    return left, right


def witness_word(i: int) -> Word:
    return Word(((i, 1),))


class GroupPartition:
    """Total deterministic assignment of reduced words to pieces."""

    def __init__(self, system: CongruenceSystem, m_bar: int, pres: Presentation, anchor: Word):
        if pres.generators != system.m:
            raise ValueError("presentation must have one generator per congruence")
        if pres.infinite != m_bar:
            raise ValueError("infinite-order generator count must equal m_bar")
        for i in range(m_bar + 1, system.m + 1):
            left, right = system.congruences[i - 1]
            if right != complement(left, system.r):
                raise ValueError(f"congruence {i} must be self-complement")
        if tau_parity(anchor, pres) != 0:
            raise OddParityError("anchor word must have even order-4 letter parity")
        self.system = system
        self.m_bar = m_bar
        self.presentation = pres
        self.anchor = anchor
        self.coloring = two_coloring(system, m_bar)
        self._memo: dict[Word, int] = {}
        self._build_end_segments()

    # -- end-segment phase -------------------------------------------------

    def _action(self, letter: Letter) -> tuple[Mask, Mask]:
        return letter_action(self.system, self.presentation, letter)

    def _build_end_segments(self) -> None:
        pres = self.presentation
        r = self.system.r
        lts = letters(self.anchor, pres)  # [rho_n, ..., rho_1], leftmost first
        n = len(lts)
        if n == 0:
            self._memo[IDENTITY] = 1
            return

        def rho(t: int) -> Letter:
            return lts[n - t]

        def seg(t: int) -> Word:
            return word_from_letters(lts[n - t:], pres)

        def dom_rng(t: int) -> tuple[Mask, Mask]:
            return self._action(rho(t))

        nxt = lambda t: t + 1 if t < n else 1

        case_j = None
        for t in range(1, n + 1):
            _dom_t, rng_t = dom_rng(t)
            dom_next, _ = dom_rng(nxt(t))
            if rng_t != dom_next and rng_t != complement(dom_next, r):
                case_j = t
                break

        assign: dict[int, int] = {}
        if case_j is None:
            # chain of domains/complements; even parity closes the loop
            s = [0] * (n + 1)
            dom1, _ = dom_rng(1)
            s[0] = dom1
            for t in range(1, n + 1):
                dom_t, rng_t = dom_rng(t)
                if s[t - 1] == dom_t:
                    s[t] = rng_t
                elif s[t - 1] == complement(dom_t, r):
                    s[t] = complement(rng_t, r)
                else:
                    raise ImpossibleBranchError("domain chain broke")
            if s[n] != s[0]:
                raise ImpossibleBranchError("parity argument failed to close the chain")
            for t in range(n + 1):
                assign[t] = smallest_piece(s[t])
            assign[n] = assign[0]
        else:
            j = case_j
            dom_j, rng_j = dom_rng(j)
            dom_next, _ = dom_rng(nxt(j))
            if (rng_j & dom_next) and (rng_j & complement(dom_next, r)):
                s_mask, rng_s = dom_j, rng_j
            else:
                s_mask, rng_s = complement(dom_j, r), complement(rng_j, r)

            def constrained(t: int) -> Mask:
                # e_t must sit in dom(rho_{t+1}) iff e_{t+1} sits in its range
                dom_, rng_ = dom_rng(t + 1)
                if piece_in(assign[t + 1], rng_):
                    return dom_
                return complement(dom_, r)

            if j == n == 1:
                dom1, rng1 = dom_rng(1)
                if s_mask == dom1:
                    pick = dom1 & rng1
                else:
                    pick = complement(dom1, r) & complement(rng1, r)
                k = smallest_piece(pick)
                assign[0] = k
                assign[1] = k
            elif j == n:
                assign[n - 1] = smallest_piece(s_mask)
                for t in range(n - 2, 0, -1):
                    assign[t] = smallest_piece(constrained(t))
                dom1, rng1 = dom_rng(1)
                need = dom1 if piece_in(assign[1], rng1) else complement(dom1, r)
                assign[0] = smallest_piece(need & rng_s)
                assign[n] = assign[0]
            else:
                assign[j - 1] = smallest_piece(s_mask)
                for t in range(j - 2, -1, -1):
                    assign[t] = smallest_piece(constrained(t))
                assign[n] = assign[0]
                for t in range(n - 1, j, -1):
                    assign[t] = smallest_piece(constrained(t))
                dom_, rng_ = dom_rng(j + 1)
                need = dom_ if piece_in(assign[j + 1], rng_) else complement(dom_, r)
                assign[j] = smallest_piece(rng_s & need)

        for t in range(n + 1):
            self._memo[seg(t)] = assign[t]

    # -- recursion on everything else --------------------------------------

    def assign(self, g: Word) -> int:
        memo = self._memo
        pres = self.presentation
        stack = [g]
        while stack:
            cur = stack[-1]
            if cur in memo:
                stack.pop()
                continue
            parent = strip_leftmost(cur, pres)
            if parent not in memo:
                stack.append(parent)
                continue
            stack.pop()
            dom, rng = self._action(leftmost_letter(cur, pres))
            if piece_in(memo[parent], dom):
                need = rng
            else:
                need = complement(rng, self.system.r)
            memo[cur] = smallest_piece(need)
        return memo[g]

    def assignment_table(self, depth: int) -> dict[Word, int]:
        return {g: self.assign(g) for g in enumerate_ball(self.presentation, depth)}


def build_group_partition(system: CongruenceSystem, m_bar: int, pres: Presentation,
                          anchor: Word) -> GroupPartition:
    return GroupPartition(system, m_bar, pres, anchor)


@dataclass
class PartitionCheck:
    ok: bool
    words_checked: int
    violation: dict | None = None

    def to_dict(self) -> dict:
        out = {"ok": self.ok, "words_checked": self.words_checked}
        if self.violation is not None:
            out["violation"] = self.violation
        return out


def verify_group_partition(part: GroupPartition, depth: int) -> PartitionCheck:
    """Exhaustive check on the ball: membership in the left side maps to
    membership in the right side under each witness generator."""
    pres = part.presentation
    sys_ = part.system
    from .words import format_word

    count = 0
    for g in enumerate_ball(pres, depth):
        count += 1
        for i, (left, right) in enumerate(sys_.congruences, start=1):
            h = multiply(witness_word(i), g, pres)
            if piece_in(part.assign(g), left) != piece_in(part.assign(h), right):
                return PartitionCheck(False, count, {
                    "word": format_word(g, pres),
                    "congruence": i,
                    "image": format_word(h, pres),
                })
    return PartitionCheck(True, count)


# --------------------------------------------------------------------------
# The M recursion
# --------------------------------------------------------------------------


@dataclass
class MgState:
    system: CongruenceSystem
    k_bar: int
    presentation: Presentation
    oracle: Callable[[Word], Mask]
    m_table: dict[Word, Mask] = field(default_factory=dict)

    def __post_init__(self):
        if self.presentation.generators != self.system.m:
            raise ValueError("one generator per congruence required")
        if not 1 <= self.k_bar <= self.system.r:
            raise ValueError("k_bar out of range")
        self.m_table[IDENTITY] = full_mask(self.system.r) & ~(1 << (self.k_bar - 1))


def empty_oracle(_: Word) -> Mask:
    return 0


def mg_compute(state: MgState, g: Word) -> tuple[Mask, Mask]:
    """(M_g, M+_g) by recursion on the reduced form."""
    pres = state.presentation
    sys_ = state.system
    table = state.m_table
    chain = []
    cur = g
    while cur not in table:
        chain.append(cur)
        cur = strip_leftmost(cur, pres)
    for word in reversed(chain):
        parent = strip_leftmost(word, pres)
        m_parent = table[parent]
        if m_parent == 0:
            table[word] = 0
            continue
        mplus_parent = m_parent | state.oracle(parent)
        if mplus_parent == full_mask(sys_.r):
            raise ImpossibleBranchError("M+ reached the full set")
        gen, sign = leftmost_letter(word, pres)
        left, right = sys_.congruences[gen - 1]
        if pres.is_sigma(gen) and sign < 0:
            left, right = right, left
        lc = complement(left, sys_.r)
        if not (left & ~mplus_parent):
            if not (lc & ~mplus_parent):
                raise ImpossibleBranchError("both sides matched; proof says this cannot occur")
            table[word] = right
        elif not (lc & ~mplus_parent):
            table[word] = complement(right, sys_.r)
        else:
            table[word] = 0
    m_g = table[g]
    return m_g, m_g | state.oracle(g)


def mg_support(state: MgState, max_length: int, budget: int = 200_000) -> dict[Word, Mask]:
    """All words with nonempty M, found by prepending letters breadth-first
    from the identity (children are exactly the reduced one-letter
    extensions).  Raises when the cap is hit: the support should stay well
    inside it for valid inputs."""
    pres = state.presentation
    support: dict[Word, Mask] = {}
    frontier = [IDENTITY]
    m_id, _ = mg_compute(state, IDENTITY)
    support[IDENTITY] = m_id
    explored = 0
    while frontier:
        nxt: list[Word] = []
        for g in frontier:
            glen = word_length(g, pres)
            if glen >= max_length:
                raise BudgetError(
                    f"M support reached the length cap {max_length}", explored=explored)
            for gen in range(1, pres.generators + 1):
                signs = (1, -1) if pres.is_sigma(gen) else (1,)
                for sign in signs:
                    child = prepend_letter((gen, sign), g, pres)
                    if word_length(child, pres) != glen + 1 or child in support:
                        continue
                    explored += 1
                    if explored > budget:
                        raise BudgetError("M support budget exceeded", explored=explored)
                    m_child, _ = mg_compute(state, child)
                    if m_child:
                        support[child] = m_child
                        nxt.append(child)
        frontier = nxt
    return support


@dataclass
class MgPropertyReport:
    ok: bool
    checks: int
    violation: dict | None = None

    def to_dict(self) -> dict:
        out = {"ok": self.ok, "checks": self.checks}
        if self.violation is not None:
            out["violation"] = self.violation
        return out


def mg_edge_property_check(state: MgState, depth: int,
                           digraph: CongruenceDigraph | None = None,
                           link_radius: int | None = None) -> MgPropertyReport:
    """On the ball: the subset equivalences between M+ of a word and M+ of
    its one-letter extensions, M+ never full, and (with an empty oracle and
    a digraph provided) every nonempty-M trace embeds as a pattern-free
    graph path shorter than the link radius."""
    pres = state.presentation
    sys_ = state.system
    from .words import format_word

    checks = 0
    full = full_mask(sys_.r)
    for g in enumerate_ball(pres, depth):
        _, mplus_g = mg_compute(state, g)
        if mplus_g == full:
            return MgPropertyReport(False, checks, {"word": format_word(g, pres), "fact": "M+ full"})
        for i in range(1, sys_.m + 1):
            h = multiply(witness_word(i), g, pres)
            _, mplus_h = mg_compute(state, h)
            left, right = sys_.congruences[i - 1]
            lc, rc = complement(left, sys_.r), complement(right, sys_.r)
            checks += 1
            ok1 = (not (left & ~mplus_g)) == (not (right & ~mplus_h))
            ok2 = (not (lc & ~mplus_g)) == (not (rc & ~mplus_h))
            if not (ok1 and ok2):
                return MgPropertyReport(False, checks, {
                    "word": format_word(g, pres),
                    "congruence": i,
                    "image": format_word(h, pres),
                })
    if digraph is not None:
        edge_keys = {(e.src, e.dst, e.cong, e.direction) for e in digraph.edges}
        support = mg_support(state, max_length=(link_radius or digraph.path_bound()) + 2)
        longest = 0
        for g in support:
            glen = word_length(g, pres)
            longest = max(longest, glen)
            cur = g
            while cur != IDENTITY:
                parent = strip_leftmost(cur, pres)
                m_cur = state.m_table[cur]
                m_parent = state.m_table[parent]
                gen, sign = leftmost_letter(cur, pres)
                checks += 1
                if (m_parent, m_cur, gen, sign) not in edge_keys:
                    return MgPropertyReport(False, checks, {
                        "word": format_word(g, pres),
                        "fact": "M trace left the digraph",
                    })
                cur = parent
        bound = link_radius or digraph.path_bound()
        if longest >= bound:
            return MgPropertyReport(False, checks, {"fact": f"trace of length {longest} >= {bound}"})
    return MgPropertyReport(True, checks)


# --------------------------------------------------------------------------
# Orbits with a fixed word
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitModel:
    """Orbit of a point fixed exactly by the powers of w."""

    fixed_word: Word
    presentation: Presentation

    def __post_init__(self):
        w, pres = self.fixed_word, self.presentation
        if not w:
            raise ValueError("fixed word must be a nonidentity reduced word")
        if tau_parity(w, pres) != 0:
            raise OddParityError("fixed word must have even order-4 parity")
        if not self.is_tau_square() and self._ends_with_rho_prime(w):
            raise ValueError("fixed word must not end with rho'")

    def rho(self) -> Letter:
        return leftmost_letter(self.fixed_word, self.presentation)

    def rho_prime(self) -> Letter:
        gen, sign = self.rho()
        if self.presentation.is_tau(gen):
            return (gen, 1)
        return (gen, -sign)

    def is_tau_square(self) -> bool:
        syl = self.fixed_word.syllables
        return len(syl) == 1 and self.presentation.is_tau(syl[0][0]) and syl[0][1] == 2

    def _ends_with_rho_prime(self, g: Word) -> bool:
        return last_letter(g, self.presentation) == self.rho_prime()

    def is_canonical(self, g: Word) -> bool:
        from .words import ends_with

        pres = self.presentation
        if self.is_tau_square():
            gen = self.fixed_word.syllables[0][0]
            if g.syllables and g.syllables[-1][0] == gen and g.syllables[-1][1] >= 2:
                return False
            return True
        if ends_with(g, self.fixed_word, pres):
            return False
        if g.syllables and self._ends_with_rho_prime(g):
            return False
        return True


def canonical_form(orbit: OrbitModel, g: Word, power_bound: int = 8) -> Word:
    """The unique representative of g modulo right powers of the fixed word
    that avoids the forbidden endings."""
    pres = orbit.presentation
    hits = []
    for j in range(-power_bound, power_bound + 1):
        cand = multiply(g, power(orbit.fixed_word, j, pres), pres)
        if orbit.is_canonical(cand):
            hits.append((abs(j), j, cand))
    if not hits:
        raise BudgetError(f"not canonicalizable within |j| <= {power_bound}")
    hits.sort()
    if len({cand for _, _, cand in hits}) > 1:
        raise AssertionError("canonical form is not unique; invalid orbit model")
    return hits[0][2]


@dataclass
class OrbitCheck:
    ok: bool
    points_checked: int
    violation: dict | None = None

    def to_dict(self) -> dict:
        out = {"ok": self.ok, "points_checked": self.points_checked}
        if self.violation is not None:
            out["violation"] = self.violation
        return out


def build_orbit_partition(orbit: OrbitModel | None, part: GroupPartition,
                          depth: int) -> tuple[dict[Word, int], OrbitCheck]:
    """Piece assignment for orbit points via canonical representatives, and
    the ball verification of every witness congruence on the orbit."""
    pres = part.presentation
    sys_ = part.system
    if orbit is None:
        table = {g: part.assign(g) for g in enumerate_ball(pres, depth)}
        check = verify_group_partition(part, depth)
        return table, OrbitCheck(check.ok, check.words_checked, check.violation)
    if part.anchor != orbit.fixed_word:
        raise ValueError("partition anchor must equal the orbit's fixed word")
    from .words import format_word

    reps: dict[Word, int] = {}
    for g in enumerate_ball(pres, depth):
        rep = canonical_form(orbit, g)
        if rep not in reps:
            reps[rep] = part.assign(rep)
    count = 0
    for rep in list(reps):
        for i, (left, right) in enumerate(sys_.congruences, start=1):
            image = canonical_form(orbit, multiply(witness_word(i), rep, pres))
            piece_img = reps.get(image)
            if piece_img is None:
                piece_img = part.assign(image)
            count += 1
            if piece_in(reps[rep], left) != piece_in(piece_img, right):
                return reps, OrbitCheck(False, count, {
                    "representative": format_word(rep, pres),
                    "congruence": i,
                    "image": format_word(image, pres),
                })
    return reps, OrbitCheck(True, count)
