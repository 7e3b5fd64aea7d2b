"""Brute-force oracles, kept independent of the production algorithms.

The closure oracle runs a union-find fixpoint over every proper mask; the
subcongruence oracle closes a full boolean relation over all 2^r masks by
iterating the rules until nothing changes.  Both are exponential in r and
meant for r <= 4.
"""

from __future__ import annotations

from itertools import combinations

from conglab.systems import CongruenceSystem, complement, full_mask


def brute_closure_classes(sys_: CongruenceSystem) -> list[list[int]]:
    parent = {m: m for m in range(1, full_mask(sys_.r))}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    changed = True
    while changed:
        changed = False
        for left, right in sys_.congruences:
            for a, b in ((left, right),
                         (complement(left, sys_.r), complement(right, sys_.r))):
                if find(a) != find(b):
                    union(a, b)
                    changed = True
    groups: dict[int, list[int]] = {}
    for m in parent:
        groups.setdefault(find(m), []).append(m)
    return sorted((sorted(v) for v in groups.values()), key=lambda c: c[0])


def brute_subcong_relation(sys_: CongruenceSystem) -> set[tuple[int, int]]:
    full = full_mask(sys_.r)
    masks = range(full + 1)
    rel = {(a, b) for a in masks for b in masks if not (a & ~b)}
    for left, right in sys_.congruences:
        lc, rc = complement(left, sys_.r), complement(right, sys_.r)
        rel.update([(left, right), (right, left), (lc, rc), (rc, lc)])
    changed = True
    while changed:
        changed = False
        new = set()
        for a, b in rel:
            for c in masks:
                if (b, c) in rel and (a, c) not in rel and (a, c) not in new:
                    new.add((a, c))
        if new:
            rel |= new
            changed = True
    return rel


def brute_weak(sys_: CongruenceSystem) -> bool:
    for cls in brute_closure_classes(sys_):
        members = set(cls)
        if any(complement(m, sys_.r) in members for m in members):
            return False
    return True


def brute_consistent(sys_: CongruenceSystem) -> bool:
    rel = brute_subcong_relation(sys_)
    return not any(b != a and not (b & ~a) for a, b in rel)


def enumerate_small_systems() -> list[CongruenceSystem]:
    """A fixed deterministic enumeration of several hundred systems with
    r <= 3 and m <= 3."""
    out = []
    for r in (2, 3):
        masks = [m for m in range(1, full_mask(r)) ]
        pool = [(a, b) for i, a in enumerate(masks) for b in masks[i:]]
        for size in range(0, 4):
            combos = list(combinations(pool, size))
            if r == 3 and size == 3:
                combos = combos[:300]
            if r == 3 and size == 2:
                combos = combos[:200]
            for combo in combos:
                out.append(CongruenceSystem(r, combo))
    return out
