"""System transformations: inconsistency reduction, the weak-plus-self-complement
normal form, and the generated partition systems over sequence indices."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .deduction import CongruenceClosure, SideGraph, is_nonredundant, is_weak
from .systems import CongruenceSystem, Mask, complement, full_mask, mask_indices


@dataclass
class ReductionResult:
    system: CongruenceSystem | None  # None when every index was deleted
    deleted: tuple[int, ...]  # original indices, ascending
    index_map: dict[int, int]  # surviving original index -> new index
    iterations: int

    @property
    def empty(self) -> bool:
        return self.system is None

    def to_dict(self) -> dict:
        return {
            "empty": self.empty,
            "deleted": list(self.deleted),
            "index_map": {str(k): v for k, v in sorted(self.index_map.items())},
            "iterations": self.iterations,
            "system": None if self.system is None else {
                "r": self.system.r,
                "congruences": [
                    [list(mask_indices(a)), list(mask_indices(b))]
                    for a, b in self.system.congruences
                ],
            },
        }


def _delete_indices(sys_: CongruenceSystem, doomed_bits: Mask) -> CongruenceSystem | None:
    """Drop the pieces in doomed_bits from the index set and every side."""
    survivors = [k for k in range(1, sys_.r + 1) if not (doomed_bits >> (k - 1)) & 1]
    if not survivors:
        return None
    remap = {old: new for new, old in enumerate(survivors, start=1)}
    new_r = len(survivors)
    congs = []
    for left, right in sys_.congruences:
        new_left = 0
        new_right = 0
        for old, new in remap.items():
            bit = 1 << (old - 1)
            if left & bit:
                new_left |= 1 << (new - 1)
            if right & bit:
                new_right |= 1 << (new - 1)
        if new_left in (0, full_mask(new_r)) or new_right in (0, full_mask(new_r)):
            continue
        congs.append((new_left, new_right))
    return CongruenceSystem(new_r, tuple(congs))


def reduce_inconsistent(sys_: CongruenceSystem) -> ReductionResult:
    """Iterated deletion of pieces forced empty by inconsistencies.

    Each round collects every deducible L <= R with R strictly inside L and
    deletes all indices in L minus R; rounds repeat until the system is
    consistent or nothing is left.  Terminates in at most r rounds.
    """
    current: CongruenceSystem | None = sys_
    # original index tracked per current position
    alive = list(range(1, sys_.r + 1))
    deleted: set[int] = set()
    iterations = 0
    while current is not None:
        graph = SideGraph(current)
        doomed = 0
        for c in graph.vertices:
            for d in graph.reach(c):
                if d != c and not (d & ~c):
                    doomed |= c & ~d
        if not doomed:
            break
        iterations += 1
        deleted.update(alive[k - 1] for k in mask_indices(doomed))
        alive = [orig for pos, orig in enumerate(alive, start=1)
                 if not (doomed >> (pos - 1)) & 1]
        current = _delete_indices(current, doomed)
    index_map = {orig: new for new, orig in enumerate(alive, start=1)} if current else {}
    return ReductionResult(current, tuple(sorted(deleted)), index_map, iterations)


@dataclass
class TransformResult:
    system: CongruenceSystem
    m_bar: int
    self_complement_indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "r": self.system.r,
            "m": self.system.m,
            "m_bar": self.m_bar,
            "self_complement_indices": list(self.self_complement_indices),
            "congruences": [
                [list(mask_indices(a)), list(mask_indices(b))]
                for a, b in self.system.congruences
            ],
        }


def systems_equivalent(a: CongruenceSystem, b: CongruenceSystem) -> bool:
    """Mutual deducibility of every congruence (same r required)."""
    if a.r != b.r:
        return False
    ca, cb = CongruenceClosure(a), CongruenceClosure(b)
    return all(cb.same_class(left, right) for left, right in a.congruences) and all(
        ca.same_class(left, right) for left, right in b.congruences
    )


_EXHAUSTIVE_M_CAP = 6
_EXHAUSTIVE_COMBO_CAP = 200_000


def minimize_congruences(sys_: CongruenceSystem) -> CongruenceSystem:
    """Smallest equivalent system found by greedy deletion plus a capped
    exhaustive search over congruences between closure-equivalent sides."""
    current = sys_
    # greedy: drop deducible congruences until nonredundant
    while True:
        rep = is_nonredundant(current)
        if rep.ok:
            break
        current = current.without(rep.witness["index"])
    if current.m > _EXHAUSTIVE_M_CAP or current.m <= 1:
        return current
    closure = CongruenceClosure(current)
    pool: list[tuple[Mask, Mask]] = []
    seen: set[tuple[Mask, Mask]] = set()
    touched = closure.touched()
    for a_i, a in enumerate(touched):
        for b in touched[a_i + 1:]:
            if not closure.same_class(a, b):
                continue
            pair = (a, b)
            alt = tuple(sorted((complement(a, current.r), complement(b, current.r))))
            canon = min(pair, alt)
            if canon in seen:
                continue
            seen.add(canon)
            pool.append(canon)
    pool.sort()
    for size in range(1, current.m):
        combos = combinations(pool, size)
        budget = _EXHAUSTIVE_COMBO_CAP
        for combo in combos:
            budget -= 1
            if budget < 0:
                return current
            candidate = CongruenceSystem(current.r, combo)
            if systems_equivalent(current, candidate):
                return candidate
    return current


def transform_to_weak_plus_selfcomp(sys_: CongruenceSystem) -> TransformResult:
    """Equivalent minimal system split into a weak part followed by
    self-complement congruences (R_i = L_i^c)."""
    base = minimize_congruences(sys_)
    weak_part = list(base.congruences)
    selfcomp: list[tuple[Mask, Mask]] = []
    r = base.r
    while True:
        working = CongruenceSystem(r, tuple(weak_part)) if weak_part else None
        if working is None:
            break
        closure = CongruenceClosure(working)
        best: tuple[int, Mask] | None = None
        for mask in closure.touched():
            comp = complement(mask, r)
            if closure.same_class(mask, comp):
                chain = closure.chain(mask, comp)
                assert chain is not None
                cand = (len(chain), mask)
                if best is None or cand < best:
                    best = cand
        if best is None:
            break
        _, m0 = best
        chain = closure.chain(m0, complement(m0, r))
        assert chain
        last_index = chain[-1].index
        del weak_part[last_index - 1]
        selfcomp.append((m0, complement(m0, r)))
    result_sys = CongruenceSystem(r, tuple(weak_part) + tuple(selfcomp))
    result = TransformResult(
        system=result_sys,
        m_bar=len(weak_part),
        self_complement_indices=tuple(range(len(weak_part) + 1, result_sys.m + 1)),
    )
    if not systems_equivalent(sys_, result_sys):
        raise AssertionError("transform produced a non-equivalent system")
    if not is_weak(CongruenceSystem(r, tuple(weak_part)) if weak_part else CongruenceSystem(r)).ok:
        raise AssertionError("transform left a non-weak leading part")
    return result


def generate_partition_system(n: int) -> tuple[CongruenceSystem, tuple[tuple[int, ...], ...]]:
    """The generated system over sequences s = <s_j : 3 <= j <= n> with
    1 <= s_j <= j, one congruence per pair (i, j) != (1, n).

    Returns the system (indices relabeled to 1..n!/2 in lexicographic
    sequence order) and the relabeling table.
    """
    if not 3 <= n <= 7:
        raise ValueError("n out of range: need 3 <= n <= 7")
    seqs = sorted(product(*(range(1, j + 1) for j in range(3, n + 1))))
    index_of = {s: k for k, s in enumerate(seqs)}

    def coord_mask(j: int, i: int) -> Mask:
        mask = 0
        for s in seqs:
            if s[j - 3] == i:
                mask |= 1 << index_of[s]
        return mask

    base = coord_mask(n, 1)
    congs = []
    for j in range(3, n + 1):
        for i in range(1, j + 1):
            if (i, j) == (1, n):
                continue
            congs.append((base, coord_mask(j, i)))
    return CongruenceSystem(len(seqs), tuple(congs)), tuple(seqs)
