"""Deduction calculus over a congruence system.

Two relations are decided here, both with replayable witness chains:

* congruence deducibility (closure under complementation and transitivity
  of the system congruences), an equivalence relation on masks;
* subcongruence L <= R ("congruent to a subset of"), closed under the
  subset rule, transitivity, and system congruences plus complements.

Since congruence steps only ever fire at sides of the system (or their
complements), any subcongruence deduction factors through the finite "side
digraph" whose vertices are the sides/complements, with congruence-jump
edges and subset edges between sides.  That keeps every decision polynomial
in the number of congruences, independent of 2^r.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .budgets import BudgetError, check_mask_budget
from .systems import (
    CongruenceSystem,
    Mask,
    complement,
    full_mask,
    mask_indices,
    popcount,
    proper_masks,
)


@dataclass(frozen=True)
class SubsetStep:
    frm: Mask
    to: Mask

    def to_dict(self) -> dict:
        return {"rule": "subset", "from": list(mask_indices(self.frm)), "to": list(mask_indices(self.to))}


@dataclass(frozen=True)
class CongStep:
    index: int  # 1-based congruence number
    reversed: bool  # applied from R-side to L-side
    complemented: bool
    frm: Mask
    to: Mask

    def to_dict(self) -> dict:
        return {
            "rule": "congruence",
            "index": self.index,
            "reversed": self.reversed,
            "complemented": self.complemented,
            "from": list(mask_indices(self.frm)),
            "to": list(mask_indices(self.to)),
        }


Step = SubsetStep | CongStep
Chain = tuple[Step, ...]


def chain_to_json(chain: Chain) -> list[dict]:
    return [s.to_dict() for s in chain]


def chain_from_json(items: list[dict]) -> Chain:
    from .systems import mask_of

    steps: list[Step] = []
    for item in items:
        frm, to = mask_of(item["from"]), mask_of(item["to"])
        if item["rule"] == "subset":
            steps.append(SubsetStep(frm, to))
        elif item["rule"] == "congruence":
            steps.append(CongStep(item["index"], item["reversed"], item["complemented"], frm, to))
        else:
            raise ValueError(f"unknown rule {item['rule']!r}")
    return tuple(steps)


def verify_witness_json(sys_: CongruenceSystem, witness: dict, kind: str) -> bool:
    """Replay a JSON witness produced by the classifiers.

    kind: 'weak' (a mask congruent to its complement), 'consistent'
    (L <= R with R strictly inside L), or 'nonredundant' (a congruence
    deducible from the others, or an identity congruence)."""
    from .systems import mask_of

    if kind == "weak":
        mask = mask_of(witness["mask"])
        chain = chain_from_json(witness["chain"])
        return replay_chain(sys_, chain, mask, complement(mask, sys_.r), allow_subset=False)
    if kind == "consistent":
        left, right = mask_of(witness["left"]), mask_of(witness["right"])
        if not (right != left and not (right & ~left)):
            return False
        chain = chain_from_json(witness["chain"])
        return replay_chain(sys_, chain, left, right)
    if kind == "nonredundant":
        index = witness["index"]
        left, right = sys_.congruences[index - 1]
        if witness.get("identity"):
            return left == right
        chain = chain_from_json(witness["chain"])
        if any(isinstance(s, CongStep) and s.index == index for s in chain):
            return False
        return replay_chain(sys_, chain, left, right, allow_subset=False)
    raise ValueError(f"unknown witness kind {kind!r}")


def replay_chain(sys_: CongruenceSystem, chain: Chain, start: Mask, end: Mask,
                 allow_subset: bool = True) -> bool:
    """Check that every step is a legal rule application and the chain
    composes from `start` to `end`."""
    at = start
    for step in chain:
        if step.frm != at:
            return False
        if isinstance(step, SubsetStep):
            if not allow_subset:
                return False
            if step.frm & ~step.to:
                return False
        else:
            if not (1 <= step.index <= sys_.m):
                return False
            left, right = sys_.congruences[step.index - 1]
            if step.complemented:
                left, right = complement(left, sys_.r), complement(right, sys_.r)
            if step.reversed:
                left, right = right, left
            if (step.frm, step.to) != (left, right):
                return False
        at = step.to
    return at == end


class CongruenceClosure:
    """Union-find closure of the congruence-deducibility relation.

    Lazy: only masks that occur as sides (or complements of sides) are ever
    placed in nontrivial classes, so this works at any r.  Witness chains
    come from BFS over the congruence-jump graph.
    """

    def __init__(self, sys_: CongruenceSystem, skip: Iterable[int] = ()):
        self.system = sys_
        self.skip = frozenset(skip)
        self._parent: dict[Mask, Mask] = {}
        self._adj: dict[Mask, list[tuple[Mask, CongStep]]] = {}
        for i, (left, right) in enumerate(sys_.congruences, start=1):
            if i in self.skip:
                continue
            lc, rc = complement(left, sys_.r), complement(right, sys_.r)
            self._add_edge(left, right, CongStep(i, False, False, left, right))
            self._add_edge(right, left, CongStep(i, True, False, right, left))
            self._add_edge(lc, rc, CongStep(i, False, True, lc, rc))
            self._add_edge(rc, lc, CongStep(i, True, True, rc, lc))
            self._union(left, right)
            self._union(lc, rc)

    def _add_edge(self, a: Mask, b: Mask, step: CongStep) -> None:
        self._adj.setdefault(a, []).append((b, step))
        self._adj.setdefault(b, [])

    def _find(self, a: Mask) -> Mask:
        parent = self._parent
        if a not in parent:
            parent[a] = a
            return a
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def _union(self, a: Mask, b: Mask) -> None:
        ra, rb = self._find(a), self._find(b)
        if ra != rb:
            # deterministic: smaller mask value wins as root
            if rb < ra:
                ra, rb = rb, ra
            self._parent[rb] = ra

    def touched(self) -> list[Mask]:
        return sorted(self._adj)

    def same_class(self, a: Mask, b: Mask) -> bool:
        if a == b:
            return True
        if a not in self._adj or b not in self._adj:
            return False
        return self._find(a) == self._find(b)

    def chain(self, a: Mask, b: Mask) -> Chain | None:
        """Shortest congruence-step chain from a to b, or None."""
        if a == b:
            return ()
        if not self.same_class(a, b):
            return None
        prev: dict[Mask, tuple[Mask, CongStep]] = {a: None}  # type: ignore[dict-item]
        frontier = [a]
        while frontier:
            nxt = []
            for u in frontier:
                for v, step in sorted(self._adj[u], key=lambda e: (e[1].index, e[1].complemented, e[1].reversed)):
                    if v in prev:
                        continue
                    prev[v] = (u, step)
                    if v == b:
                        steps = []
                        cur = b
                        while cur != a:
                            u0, s0 = prev[cur]
                            steps.append(s0)
                            cur = u0
                        return tuple(reversed(steps))
                    nxt.append(v)
            frontier = nxt
        return None

    def nontrivial_classes(self) -> list[list[Mask]]:
        groups: dict[Mask, list[Mask]] = {}
        for v in self.touched():
            groups.setdefault(self._find(v), []).append(v)
        classes = [sorted(vs) for vs in groups.values() if len(vs) > 1]
        return sorted(classes, key=lambda c: c[0])


def materialized_classes(sys_: CongruenceSystem) -> list[list[Mask]]:
    """The finest partition of all 2^r - 2 proper masks merged by the
    closure.  Budget-guarded; use CongruenceClosure directly at large r."""
    check_mask_budget(sys_.r)
    closure = CongruenceClosure(sys_)
    groups: dict[Mask, list[Mask]] = {}
    for mask in proper_masks(sys_.r):
        root = closure._find(mask) if mask in closure._adj else mask
        groups.setdefault(root, []).append(mask)
    return sorted((sorted(v) for v in groups.values()), key=lambda c: c[0])


class SideGraph:
    """Reachability structure deciding the subcongruence relation.

    Vertices: sides of the system and their complements.  Edges: the four
    congruence jumps per congruence, plus a subset edge A -> B for sides
    A strictly contained in B.  L <= R holds iff L <= R as sets, or there
    are sides C >= L and D <= R with a path C ~> D.
    """

    def __init__(self, sys_: CongruenceSystem):
        self.system = sys_
        self.vertices = sys_.sides()
        self._adj: dict[Mask, list[tuple[Mask, Step]]] = {v: [] for v in self.vertices}
        for i, (left, right) in enumerate(sys_.congruences, start=1):
            lc, rc = complement(left, sys_.r), complement(right, sys_.r)
            self._adj[left].append((right, CongStep(i, False, False, left, right)))
            self._adj[right].append((left, CongStep(i, True, False, right, left)))
            self._adj[lc].append((rc, CongStep(i, False, True, lc, rc)))
            self._adj[rc].append((lc, CongStep(i, True, True, rc, lc)))
        for a in self.vertices:
            for b in self.vertices:
                if a != b and not (a & ~b):
                    self._adj[a].append((b, SubsetStep(a, b)))
        for v in self.vertices:
            self._adj[v].sort(key=_edge_sort_key)
        self._reach: dict[Mask, dict[Mask, int]] = {}

    def reach(self, start: Mask) -> dict[Mask, int]:
        """BFS distances from a side vertex to every reachable side."""
        cached = self._reach.get(start)
        if cached is not None:
            return cached
        dist = {start: 0}
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v, _step in self._adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        self._reach[start] = dist
        return dist

    def path(self, start: Mask, goal: Mask) -> Chain | None:
        if start == goal:
            return ()
        prev: dict[Mask, tuple[Mask, Step]] = {start: None}  # type: ignore[dict-item]
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v, step in self._adj[u]:
                    if v in prev:
                        continue
                    prev[v] = (u, step)
                    if v == goal:
                        steps = []
                        cur = goal
                        while cur != start:
                            u0, s0 = prev[cur]
                            steps.append(s0)
                            cur = u0
                        return tuple(reversed(steps))
                    nxt.append(v)
            frontier = nxt
        return None


def _edge_sort_key(edge: tuple[Mask, Step]):
    _v, step = edge
    if isinstance(step, CongStep):
        return (0, step.index, step.complemented, step.reversed, step.to)
    return (1, 0, False, False, step.to)


def subcong_holds(sys_: CongruenceSystem, left: Mask, right: Mask) -> tuple[bool, Chain | None]:
    """Decide whether L <= R is deducible; return a rule-by-rule chain."""
    if left & ~full_mask(sys_.r) or right & ~full_mask(sys_.r):
        raise ValueError("mask out of range")
    if not (left & ~right):
        return True, (SubsetStep(left, right),)
    graph = SideGraph(sys_)
    best: tuple[int, Mask, Mask] | None = None
    for c in graph.vertices:
        if left & ~c:
            continue
        dist = graph.reach(c)
        for d, steps in dist.items():
            if d & ~right:
                continue
            extra = (1 if left != c else 0) + (1 if d != right else 0)
            cand = (steps + extra, c, d)
            if best is None or cand < best:
                best = cand
    if best is None:
        return False, None
    _, c, d = best
    chain: list[Step] = []
    if left != c:
        chain.append(SubsetStep(left, c))
    chain.extend(graph.path(c, d) or ())
    if d != right:
        chain.append(SubsetStep(d, right))
    return True, tuple(chain)


@dataclass
class PropertyReport:
    ok: bool
    witness: dict | None = None

    def to_dict(self) -> dict:
        out = {"ok": self.ok}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def is_weak(sys_: CongruenceSystem) -> PropertyReport:
    """Weak: no deducible congruence relates a mask to its complement."""
    closure = CongruenceClosure(sys_)
    best: tuple[int, Mask] | None = None
    for mask in closure.touched():
        comp = complement(mask, sys_.r)
        if closure.same_class(mask, comp):
            chain = closure.chain(mask, comp)
            assert chain is not None
            cand = (len(chain), mask)
            if best is None or cand < best:
                best = cand
    if best is None:
        return PropertyReport(True)
    _, mask = best
    chain = closure.chain(mask, complement(mask, sys_.r))
    assert chain is not None and replay_chain(sys_, chain, mask, complement(mask, sys_.r), allow_subset=False)
    return PropertyReport(False, {"mask": list(mask_indices(mask)), "chain": chain_to_json(chain)})


def find_inconsistency(sys_: CongruenceSystem) -> tuple[Mask, Mask, Chain] | None:
    """A deducible L <= R with R a proper subset of L, if one exists.

    Only side pairs need checking: a violating (L, R) exists iff some side
    pair C ~> D with D strictly inside C does (take L=C, R=D).
    """
    graph = SideGraph(sys_)
    best: tuple[int, Mask, Mask] | None = None
    for c in graph.vertices:
        dist = graph.reach(c)
        for d, steps in dist.items():
            if d != c and not (d & ~c):
                cand = (steps, c, d)
                if best is None or cand < best:
                    best = cand
    if best is None:
        return None
    _, c, d = best
    chain = graph.path(c, d)
    assert chain is not None and replay_chain(sys_, chain, c, d)
    return c, d, chain


def is_consistent(sys_: CongruenceSystem) -> PropertyReport:
    hit = find_inconsistency(sys_)
    if hit is None:
        return PropertyReport(True)
    left, right, chain = hit
    return PropertyReport(False, {
        "left": list(mask_indices(left)),
        "right": list(mask_indices(right)),
        "chain": chain_to_json(chain),
    })


def deducible_decreasing_pairs(sys_: CongruenceSystem) -> list[tuple[Mask, Mask]]:
    """All pairs (L, R) with |L| > |R| and L <= R deducible.

    Enumerates the full mask lattice, so budget-guarded.  The subset rule
    alone never decreases size; a decreasing pair must route through the
    side digraph (L inside some side C, a path C ~> D, D inside R).
    """
    check_mask_budget(sys_.r)
    if sys_.r > 10:
        raise BudgetError(f"decreasing-pair enumeration capped at r=10, got r={sys_.r}")
    graph = SideGraph(sys_)
    full = full_mask(sys_.r)
    reach_sets = {c: set(graph.reach(c)) for c in graph.vertices}
    pairs: list[tuple[Mask, Mask]] = []
    for left in range(1, full + 1):
        lsize = popcount(left)
        if lsize < 1:
            continue
        targets: set[Mask] = set()
        for c in graph.vertices:
            if not (left & ~c):
                targets.update(reach_sets[c])
        small = [d for d in targets if popcount(d) < lsize]
        if not small:
            continue
        for right in range(full + 1):
            if popcount(right) >= lsize:
                continue
            if any(not (d & ~right) for d in small):
                pairs.append((left, right))
    return sorted(pairs)


def subcong_relation(sys_: CongruenceSystem) -> set[tuple[Mask, Mask]]:
    """The full deducible relation over all mask pairs (budget-guarded;
    intended for small r and cross-checks)."""
    check_mask_budget(sys_.r)
    if sys_.r > 10:
        raise BudgetError(f"full-relation enumeration capped at r=10, got r={sys_.r}")
    graph = SideGraph(sys_)
    full = full_mask(sys_.r)
    reach_sets = {c: set(graph.reach(c)) for c in graph.vertices}
    relation: set[tuple[Mask, Mask]] = set()
    for left in range(full + 1):
        targets: set[Mask] = set()
        for c in graph.vertices:
            if not (left & ~c):
                targets.update(reach_sets[c])
        for right in range(full + 1):
            if not (left & ~right) or any(not (d & ~right) for d in targets):
                relation.add((left, right))
    return relation


def is_nonredundant(sys_: CongruenceSystem) -> PropertyReport:
    """Nonredundant: no congruence deducible from the others, no identity.

    Among deducible congruences the witness is the one with the shortest
    replay chain, ties to the highest index (so the reported congruence is
    the one to delete, e.g. the later of two duplicates)."""
    for i, (left, right) in enumerate(sys_.congruences, start=1):
        if left == right:
            return PropertyReport(False, {"index": i, "identity": True, "chain": []})
    best: tuple[int, int, Chain] | None = None
    for i, (left, right) in enumerate(sys_.congruences, start=1):
        closure = CongruenceClosure(sys_, skip=(i,))
        if closure.same_class(left, right):
            chain = closure.chain(left, right)
            assert chain is not None and replay_chain(sys_, chain, left, right, allow_subset=False)
            cand = (len(chain), -i, chain)
            if best is None or cand[:2] < best[:2]:
                best = cand
    if best is None:
        return PropertyReport(True)
    _, neg_i, chain = best
    return PropertyReport(False, {"index": -neg_i, "identity": False, "chain": chain_to_json(chain)})


@dataclass
class ClassificationReport:
    system: CongruenceSystem
    weak: PropertyReport
    consistent: PropertyReport
    nonredundant: PropertyReport
    classes: list[list[Mask]]
    classes_complete: bool  # False when only nontrivial classes materialized

    def to_dict(self) -> dict:
        return {
            "r": self.system.r,
            "m": self.system.m,
            "weak": self.weak.to_dict(),
            "consistent": self.consistent.to_dict(),
            "nonredundant": self.nonredundant.to_dict(),
            "classes": [[list(mask_indices(m)) for m in cls] for cls in self.classes],
            "classes_complete": self.classes_complete,
        }


def classify_system(sys_: CongruenceSystem) -> ClassificationReport:
    try:
        classes = materialized_classes(sys_)
        complete = True
    except BudgetError:
        classes = CongruenceClosure(sys_).nontrivial_classes()
        complete = False
    return ClassificationReport(
        system=sys_,
        weak=is_weak(sys_),
        consistent=is_consistent(sys_),
        nonredundant=is_nonredundant(sys_),
        classes=classes,
        classes_complete=complete,
    )
