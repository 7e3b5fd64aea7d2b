"""The labeled digraph over nonempty proper masks, its undirected quotient,
and the three structural claims checked on instances with witnesses.

Edge rules (variant "s2"): for each congruence i and vertex S,
  L_i in S  gives S -> R_i   labeled f_i;     L_i^c in S gives S -> R_i^c (f_i)
  R_i in S  gives S -> L_i   labeled f_i^-1;  R_i^c in S gives S -> L_i^c (f_i^-1)
An edge is good when its source equals the corresponding side exactly (it
belongs to a 2-cycle coming from the congruence itself); all others are bad.

Variant "s4" (for transformed systems with m_bar leading weak congruences):
the f_i^-1 edges for i > m_bar are omitted; the self-complement congruences
then contribute 2-cycles whose edges both carry the forward label.
"""

from __future__ import annotations

from dataclasses import dataclass

from .budgets import BudgetError, check_mask_budget, state_budget
from .systems import CongruenceSystem, Mask, complement, mask_indices, mask_str, proper_masks


@dataclass(frozen=True)
class Edge:
    src: Mask
    dst: Mask
    cong: int  # congruence index i; the label generator
    direction: int  # +1 = f_i, -1 = f_i^-1
    complemented: bool
    good: bool

    def label(self) -> tuple[int, int]:
        return (self.cong, self.direction)

    def to_dict(self) -> dict:
        return {
            "src": list(mask_indices(self.src)),
            "dst": list(mask_indices(self.dst)),
            "cong": self.cong,
            "direction": self.direction,
            "complemented": self.complemented,
            "good": self.good,
        }


@dataclass(frozen=True)
class UEdge:
    a: Mask
    b: Mask
    cong: int
    complemented: bool
    self_complement: bool

    def to_dict(self) -> dict:
        return {
            "a": list(mask_indices(self.a)),
            "b": list(mask_indices(self.b)),
            "cong": self.cong,
            "complemented": self.complemented,
            "self_complement": self.self_complement,
        }


@dataclass
class CongruenceDigraph:
    variant: str  # "s2" | "s4"
    system: CongruenceSystem
    m_bar: int
    vertices: tuple[Mask, ...]
    edges: tuple[Edge, ...]

    def out_edges(self) -> dict[Mask, list[Edge]]:
        adj: dict[Mask, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            adj[e.src].append(e)
        return adj

    def path_bound(self) -> int:
        r = self.system.r
        return 1 << (r + 1) if self.variant == "s4" else 1 << r


def build_digraph(sys_: CongruenceSystem, variant: str = "s2", m_bar: int | None = None) -> CongruenceDigraph:
    if variant not in ("s2", "s4"):
        raise ValueError("variant must be 's2' or 's4'")
    check_mask_budget(sys_.r)
    if sys_.r > 12:
        raise BudgetError(f"digraph capped at r=12, got r={sys_.r}")
    if variant == "s2":
        m_bar = sys_.m
    else:
        if m_bar is None:
            raise ValueError("variant s4 needs m_bar")
        for i in range(m_bar + 1, sys_.m + 1):
            left, right = sys_.congruences[i - 1]
            if right != complement(left, sys_.r):
                raise ValueError(f"congruence {i} is not self-complement (required for i > m_bar)")
    vertices = tuple(proper_masks(sys_.r))
    edges: list[Edge] = []
    for src in vertices:
        for i, (left, right) in enumerate(sys_.congruences, start=1):
            lc, rc = complement(left, sys_.r), complement(right, sys_.r)
            if not (left & ~src):
                edges.append(Edge(src, right, i, +1, False, good=src == left))
            if not (lc & ~src):
                edges.append(Edge(src, rc, i, +1, True, good=src == lc))
            if variant == "s4" and i > m_bar:
                continue
            if not (right & ~src):
                edges.append(Edge(src, left, i, -1, False, good=src == right))
            if not (rc & ~src):
                edges.append(Edge(src, lc, i, -1, True, good=src == rc))
    return CongruenceDigraph(variant, sys_, m_bar, vertices, tuple(edges))


def undirected_quotient(g: CongruenceDigraph) -> list[UEdge]:
    """One undirected edge per good 2-cycle.

    For an ordinary congruence the 2-cycle pairs the forward and backward
    good edges of one complemented form; an s4 self-complement congruence
    has a single 2-cycle whose two forward edges differ in the flag.
    """
    groups: dict[tuple[int, int], list[Edge]] = {}
    for e in g.edges:
        if not e.good:
            continue
        if g.variant == "s4" and e.cong > g.m_bar:
            key = (e.cong, 2)
        else:
            key = (e.cong, 1 if e.complemented else 0)
        groups.setdefault(key, []).append(e)
    out = []
    for (cong, kind), pair in sorted(groups.items()):
        if len(pair) != 2:
            raise AssertionError(f"good edges of congruence {cong} do not form 2-cycles")
        e = pair[0]
        a, b = min(e.src, e.dst), max(e.src, e.dst)
        out.append(UEdge(a, b, cong, kind == 1, self_complement=kind == 2))
    return out


@dataclass
class ClaimReport:
    ok: bool
    witness: dict | None = None
    explored: int = 0

    def to_dict(self) -> dict:
        out: dict = {"ok": self.ok, "explored": self.explored}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def check_claim1(g: CongruenceDigraph) -> ClaimReport:
    """No cycle contains a bad edge: for every bad edge u->v, v must not
    reach u.  Witness: a concrete cycle through a bad edge."""
    adj = g.out_edges()
    for bad in g.edges:
        if bad.good:
            continue
        # BFS from bad.dst back to bad.src
        prev: dict[Mask, Edge] = {}
        frontier = [bad.dst]
        seen = {bad.dst}
        found = bad.dst == bad.src
        while frontier and not found:
            nxt = []
            for u in frontier:
                for e in adj[u]:
                    if e.dst in seen:
                        continue
                    seen.add(e.dst)
                    prev[e.dst] = e
                    if e.dst == bad.src:
                        found = True
                        break
                    nxt.append(e.dst)
                if found:
                    break
            frontier = nxt
        if found:
            path = []
            cur = bad.src
            while cur != bad.dst:
                e = prev[cur]
                path.append(e)
                cur = e.src
            cycle = [bad] + list(reversed(path))
            return ClaimReport(False, {"cycle": [e.to_dict() for e in cycle]})
    return ClaimReport(True)


def check_claim2(g: CongruenceDigraph) -> ClaimReport:
    """The undirected quotient is a forest; in the s4 variant each component
    additionally carries at most one self-complement edge."""
    uedges = undirected_quotient(g)
    parent: dict[Mask, Mask] = {}
    forest_adj: dict[Mask, list[tuple[Mask, UEdge]]] = {}

    def find(x: Mask) -> Mask:
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    for ue in uedges:
        ra, rb = find(ue.a), find(ue.b)
        if ra == rb:
            # witness: closing edge plus the tree path between endpoints
            path: list[UEdge] = []
            if ue.a != ue.b:
                prev: dict[Mask, tuple[Mask, UEdge]] = {ue.a: None}  # type: ignore[dict-item]
                frontier = [ue.a]
                while frontier and ue.b not in prev:
                    nxt = []
                    for u in frontier:
                        for v, e in forest_adj.get(u, []):
                            if v not in prev:
                                prev[v] = (u, e)
                                nxt.append(v)
                    frontier = nxt
                cur = ue.b
                while cur != ue.a:
                    u, e = prev[cur]
                    path.append(e)
                    cur = u
                path.reverse()
            return ClaimReport(False, {"cycle": [e.to_dict() for e in [ue] + path]})
        parent[max(ra, rb)] = min(ra, rb)
        forest_adj.setdefault(ue.a, []).append((ue.b, ue))
        forest_adj.setdefault(ue.b, []).append((ue.a, ue))
    if g.variant == "s4":
        per_component: dict[Mask, list[UEdge]] = {}
        for ue in uedges:
            if ue.self_complement:
                per_component.setdefault(find(ue.a), []).append(ue)
        for root, group in sorted(per_component.items()):
            if len(group) > 1:
                return ClaimReport(False, {
                    "component": list(mask_indices(root)),
                    "self_complement_edges": [e.to_dict() for e in group],
                })
    return ClaimReport(True)


def _forbidden(g: CongruenceDigraph, last: tuple[int, int] | None, run: int,
               nxt: tuple[int, int]) -> tuple[bool, int]:
    """Transition rule of the pattern automaton.  Returns (forbidden, new
    run length of equal labels)."""
    if last is None:
        return False, 1
    cong, direction = nxt
    lcong, ldir = last
    if g.variant == "s2" or cong <= g.m_bar:
        if lcong == cong and ldir == -direction:
            return True, 1
        return False, 1
    # s4 tau label: forbid four consecutive equal labels
    if (lcong, ldir) == (cong, direction):
        if run + 1 >= 4:
            return True, run + 1
        return False, run + 1
    return False, 1


def check_claim3(g: CongruenceDigraph, path_bound: int | None = None) -> ClaimReport:
    """Search for a pattern-free path of exactly `path_bound` edges
    (default: the variant bound).  Forbidden patterns: an adjacent
    label/inverse-label pair, and in the s4 variant four consecutive equal
    order-4 labels.  The search runs over (vertex, last label, run) states;
    a reachable state cycle yields arbitrarily long paths."""
    bound = g.path_bound() if path_bound is None else path_bound
    budget = state_budget()
    adj = g.out_edges()

    State = tuple[Mask, tuple[int, int] | None, int]
    transitions: dict[State, list[tuple[State, Edge]]] = {}
    starts: list[State] = [(v, None, 0) for v in g.vertices]
    stack = list(starts)
    seen: set[State] = set(starts)
    while stack:
        state = stack.pop()
        v, last, run = state
        outs = []
        for e in adj[v]:
            blocked, new_run = _forbidden(g, last, run, e.label())
            if blocked:
                continue
            nstate = (e.dst, e.label(), new_run)
            outs.append((nstate, e))
            if nstate not in seen:
                seen.add(nstate)
                if len(seen) > budget:
                    raise BudgetError("claim-3 state budget exceeded", explored=len(seen))
                stack.append(nstate)
        transitions[state] = outs

    # longest path in the state graph; a cycle means unbounded
    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[State, int] = {}
    longest: dict[State, int] = {}
    cycle_state: State | None = None

    order: list[State] = []
    for start in starts:
        if color.get(start, WHITE) != WHITE:
            continue
        dfs = [(start, iter(transitions.get(start, ())))]
        color[start] = GRAY
        while dfs:
            state, it = dfs[-1]
            advanced = False
            for nstate, _e in it:
                c = color.get(nstate, WHITE)
                if c == GRAY:
                    cycle_state = nstate
                    break
                if c == WHITE:
                    color[nstate] = GRAY
                    dfs.append((nstate, iter(transitions.get(nstate, ()))))
                    advanced = True
                    break
            if cycle_state is not None:
                break
            if not advanced:
                color[state] = BLACK
                order.append(state)
                dfs.pop()
        if cycle_state is not None:
            break

    if cycle_state is not None:
        path = _unroll_cycle_path(transitions, starts, cycle_state, bound)
        return ClaimReport(False, {"path": [e.to_dict() for e in path]}, explored=len(seen))

    for state in order:
        best = 0
        for nstate, _e in transitions.get(state, ()):
            best = max(best, 1 + longest[nstate])
        longest[state] = best

    reach_max = max((longest[s] for s in starts), default=0)
    if reach_max < bound:
        return ClaimReport(True, explored=len(seen))
    # extract a path of exactly `bound` edges
    state = next(s for s in starts if longest[s] >= bound)
    path = []
    remaining = bound
    while remaining:
        for nstate, e in transitions[state]:
            if longest[nstate] >= remaining - 1:
                path.append(e)
                state = nstate
                remaining -= 1
                break
        else:
            raise AssertionError("longest-path extraction failed")
    return ClaimReport(False, {"path": [e.to_dict() for e in path]}, explored=len(seen))


def _unroll_cycle_path(transitions, starts, cycle_state, bound):
    """A pattern-free path of exactly `bound` edges through a state cycle."""
    # path from some start to cycle_state
    prev: dict = {}
    frontier = list(starts)
    seen = set(starts)
    while frontier and cycle_state not in seen:
        nxt = []
        for s in frontier:
            for ns, e in transitions.get(s, ()):
                if ns not in seen:
                    seen.add(ns)
                    prev[ns] = (s, e)
                    nxt.append(ns)
        frontier = nxt
    prefix: list[Edge] = []
    cur = cycle_state
    while cur in prev:
        s, e = prev[cur]
        prefix.append(e)
        cur = s
    prefix.reverse()
    # cycle from cycle_state back to itself
    prev2: dict = {}
    frontier = [cycle_state]
    seen2 = set()
    loop: list[Edge] = []
    while frontier and not loop:
        nxt = []
        for s in frontier:
            for ns, e in transitions.get(s, ()):
                if ns == cycle_state:
                    loop_edges = [e]
                    cur = s
                    while cur in prev2:
                        s0, e0 = prev2[cur]
                        loop_edges.append(e0)
                        cur = s0
                    loop_edges.reverse()
                    loop = loop_edges
                    break
                if ns not in seen2:
                    seen2.add(ns)
                    prev2[ns] = (s, e)
                    nxt.append(ns)
            if loop:
                break
        frontier = nxt
    path = list(prefix)
    while len(path) < bound:
        path.extend(loop)
    return path[:bound]


def to_dot(g: CongruenceDigraph) -> str:
    """DOT export: good edges solid, bad dashed."""
    lines = ["digraph congruences {"]
    for v in g.vertices:
        lines.append(f'  "{mask_str(v)}";')
    for e in g.edges:
        if g.variant == "s4" and e.cong > g.m_bar:
            label = f"tau{e.cong}"
        elif g.variant == "s4":
            label = f"sigma{e.cong}" + ("" if e.direction > 0 else "^-1")
        else:
            label = f"f{e.cong}" + ("" if e.direction > 0 else "^-1")
        style = "solid" if e.good else "dashed"
        lines.append(f'  "{mask_str(e.src)}" -> "{mask_str(e.dst)}" [label="{label}", style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
