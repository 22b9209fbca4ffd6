"""Coherence of colored variable choices, canonical valuations, and the
characteristic of a tree.

Choosing a color per bound variable fixes how each quantifier would be
eliminated.  Two colored choices conflict when one's rewrite would tear the
other's licensing occurrence away from its binder; conflicts plus the
per-variable eliminability constraints form a 2-SAT instance, solved by
strongly connected components of the implication graph.  Coherent trees are
exactly those whose eliminations can all be carried out; among them, the
existence of a cyclic alternating path decides whether fixpoint types can
show up in the result (characteristic 1) or not (characteristic 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from .polytree import ColoredVar, Node, PolyTree, TreeError, is_bare
from .syntax import Color
from .yoneda import (
    is_c_eliminable,
    is_modular,
    modular_positions,
    _occurrence_positions,
)


class Characteristic(IntEnum):
    ZERO = 0
    ONE = 1
    INFINITE = 2

    def __str__(self) -> str:
        return {0: "0", 1: "1", 2: "inf"}[int(self)]


Lit = tuple[str, Color]


# ---------------------------------------------------------------------------
# Conflicts between colored choices
# ---------------------------------------------------------------------------

def _parallel_groups(e: PolyTree) -> dict[int, list[int]]:
    """Label positions grouped by the binder vertex right below them."""
    groups: dict[int, list[int]] = {}
    for pos, _lbl in e.labels():
        if is_bare(e.node(pos)):
            par = e.parent(pos)
            if par is None:
                continue
            groups.setdefault(par, []).append(pos)
        else:
            groups.setdefault(pos, []).append(pos)
    return groups


def conflict_pairs(e: PolyTree) -> set[frozenset[Lit]]:
    """Pairs of colored choices {(x, c), (y, d)} that cannot both be taken.

    A parallel pair of modular occurrences witnesses a conflict only when
    performing one elimination would move the other occurrence away from
    its binder: the moved content is the subtree their shared node roots,
    so the other variable must be bound outside that subtree (and the
    mover's occurrence must sit at distance 2, else nothing is moved).
    """
    out: set[frozenset[Lit]] = set()
    bound = set(e.idx.binding)
    modular = set(modular_positions(e))
    for u, members in _parallel_groups(e).items():
        labeled = [
            p
            for p in members
            if isinstance(e.node(p).head, ColoredVar)
            and e.node(p).head.name in bound
            and p in modular
        ]
        for i in range(len(labeled)):
            for j in range(i + 1, len(labeled)):
                a, b = labeled[i], labeled[j]
                la, lb = e.node(a).head, e.node(b).head
                if la.name == lb.name:
                    continue
                ra, rb = e.binding_pos(la.name), e.binding_pos(lb.name)
                moves_a = e.label_distance(a, ra) == 2 and not e.in_subtree(rb, u)
                moves_b = e.label_distance(b, rb) == 2 and not e.in_subtree(ra, u)
                if moves_a or moves_b:
                    out.add(
                        frozenset(
                            {(la.name, la.color.flip()), (lb.name, lb.color.flip())}
                        )
                    )
    return out


def coherent_pair(e: PolyTree, x: str, c: Color, y: str, d: Color) -> bool:
    """May x be eliminated at color c and y at color d in the same run?

    Symmetric; a variable paired with itself at the same color is always
    coherent, and at opposite colors exactly when no gated parallel-modular
    witness exists."""
    e.binding_pos(x)
    e.binding_pos(y)
    if x == y and c is d:
        return True
    if x == y:
        # same machinery as conflict_pairs, without the distinct-name skip
        bound = set(e.idx.binding)
        modular = set(modular_positions(e))
        for u, members in _parallel_groups(e).items():
            lab = [
                p
                for p in members
                if isinstance(e.node(p).head, ColoredVar)
                and e.node(p).head.name == x
                and p in modular
            ]
            for i in range(len(lab)):
                for j in range(len(lab)):
                    if i == j:
                        continue
                    a, b = lab[i], lab[j]
                    la, lb = e.node(a).head, e.node(b).head
                    if la.color is not c.flip() or lb.color is not d.flip():
                        continue
                    ra = e.binding_pos(x)
                    moves_a = e.label_distance(a, ra) == 2 and not e.in_subtree(ra, u)
                    moves_b = e.label_distance(b, ra) == 2 and not e.in_subtree(ra, u)
                    if moves_a or moves_b:
                        return False
        return True
    return frozenset({(x, c), (y, d)}) not in conflict_pairs(e)


def is_phi_coherent(e: PolyTree, phi: dict[str, Color]) -> bool:
    """Direct check of the definition against a full valuation."""
    bv = set(e.bound_vars())
    if set(phi) != bv:
        return False
    if not all(is_c_eliminable(e, x, phi[x]) for x in bv):
        return False
    conflicts = conflict_pairs(e)
    chosen = {(x, phi[x]) for x in bv}
    return not any(pair <= chosen for pair in conflicts)


# ---------------------------------------------------------------------------
# 2-SAT: implication graph, strongly connected components, valuation
# ---------------------------------------------------------------------------

@dataclass
class ImplicationGraph:
    vertices: list[Lit]
    edges: set[tuple[Lit, Lit]]

    def successors(self, v: Lit) -> list[Lit]:
        return sorted(
            (w for (u, w) in self.edges if u == v), key=lambda l: (l[0], l[1].value)
        )

    def is_skew_symmetric(self) -> bool:
        def dual(l: Lit) -> Lit:
            return (l[0], l[1].flip())

        return all((dual(w), dual(v)) in self.edges for (v, w) in self.edges)


def build_implication_graph(e: PolyTree) -> ImplicationGraph:
    bv = sorted(e.bound_vars())
    vertices = [(x, c) for x in bv for c in (Color.BLUE, Color.RED)]
    edges: set[tuple[Lit, Lit]] = set()
    for x in bv:
        for c in (Color.BLUE, Color.RED):
            if not is_c_eliminable(e, x, c):
                # x cannot take color c, so assuming it forces the flip
                edges.add(((x, c), (x, c.flip())))
    for pair in conflict_pairs(e):
        (x, c), (y, d) = sorted(pair, key=lambda l: (l[0], l[1].value))
        edges.add(((x, c), (y, d.flip())))
        edges.add(((y, d), (x, c.flip())))
    return ImplicationGraph(vertices, edges)


def tarjan_scc(vertices: list[Lit], succ) -> list[list[Lit]]:
    """Iterative Tarjan; components come out in reverse topological order."""
    index: dict[Lit, int] = {}
    low: dict[Lit, int] = {}
    on_stack: set[Lit] = set()
    stack: list[Lit] = []
    out: list[list[Lit]] = []
    counter = [0]

    for start in vertices:
        if start in index:
            continue
        work = [(start, iter(succ(start)))]
        index[start] = low[start] = counter[0]
        counter[0] += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def find_valuation(e: PolyTree) -> Optional[dict[str, Color]]:
    phi, _ = find_valuation_with_witness(e)
    return phi


def find_valuation_with_witness(
    e: PolyTree,
) -> tuple[Optional[dict[str, Color]], Optional[list[Lit]]]:
    """The canonical coherent valuation, or a strongly connected component
    holding both colors of some variable as the incoherence witness.

    Components are processed in reverse topological order with ties broken
    by sorted literals, so the result is reproducible."""
    if not e.bound_vars():
        return {}, None
    graph = build_implication_graph(e)
    comps = tarjan_scc(graph.vertices, graph.successors)
    comp_of: dict[Lit, int] = {}
    for i, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = i
    for comp in comps:
        seen: set[str] = set()
        for (x, _c) in comp:
            if x in seen:
                return None, sorted(comp, key=lambda l: (l[0], l[1].value))
            seen.add(x)
    phi: dict[str, Color] = {}
    for comp in comps:  # reverse topological: sink side first wins
        for (x, c) in sorted(comp, key=lambda l: (l[0], l[1].value)):
            if x not in phi:
                phi[x] = c
    if not is_phi_coherent(e, phi):
        raise AssertionError("2-SAT produced a valuation that fails the definition")
    return phi, None


def is_coherent(e: PolyTree) -> bool:
    return find_valuation(e) is not None


def brute_force_valuation(e: PolyTree) -> Optional[dict[str, Color]]:
    """Exhaustive search over all colorings; for cross-checking only."""
    bv = sorted(e.bound_vars())
    if len(bv) > 20:
        raise ValueError("brute force is limited to small variable counts")
    for bits in range(1 << len(bv)):
        phi = {
            x: (Color.BLUE if bits & (1 << i) else Color.RED) for i, x in enumerate(bv)
        }
        if is_phi_coherent(e, phi):
            return phi
    return None


# ---------------------------------------------------------------------------
# Alternating paths and the characteristic
# ---------------------------------------------------------------------------

def down_moves(e: PolyTree) -> set[tuple[int, int]]:
    """Pairs (a, b): complementary occurrences of one bound variable with a
    modular target."""
    out: set[tuple[int, int]] = set()
    for x in e.bound_vars():
        blues = _occurrence_positions(e, x, Color.BLUE)
        reds = _occurrence_positions(e, x, Color.RED)
        for b in blues:
            for r in reds:
                if is_modular(e, r):
                    out.add((b, r))
                if is_modular(e, b):
                    out.add((r, b))
    return out


def up_moves(e: PolyTree) -> set[tuple[int, int]]:
    """Pairs (a, b): from a modular occurrence back into the subtree that
    its elimination would move into the fixpoint body.

    Distance-1 occurrences move nothing, so they have no up-moves; for the
    rest the subtree is the one rooted at the vertex right below the
    occurrence."""
    out: set[tuple[int, int]] = set()
    bound = set(e.idx.binding)
    for p in modular_positions(e):
        lbl = e.node(p).head
        rx = e.binding_pos(lbl.name)
        if e.label_distance(p, rx) != 2:
            continue
        gamma = p if not is_bare(e.node(p)) else e.parent(p)
        for q in e.subtree_positions(gamma):
            if q == p:
                continue
            h = e.node(q).head
            if isinstance(h, ColoredVar) and h.name in bound:
                out.add((p, q))
    return out


def _composed_graph(e: PolyTree) -> dict[int, set[int]]:
    downs = down_moves(e)
    ups = up_moves(e)
    up_from: dict[int, set[int]] = {}
    for (m, b) in ups:
        up_from.setdefault(m, set()).add(b)
    comp: dict[int, set[int]] = {}
    for (a, m) in downs:
        for b in up_from.get(m, ()):  # a down-move then an up-move
            comp.setdefault(a, set()).add(b)
    return comp


def has_cyclic_alternating_path(e: PolyTree) -> bool:
    return find_cyclic_alternating_path(e) is not None


def find_cyclic_alternating_path(e: PolyTree) -> Optional[list[int]]:
    """A cycle in the down;up composition, as a list of label positions."""
    comp = _composed_graph(e)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in comp}

    def dfs(v: int, path: list[int]) -> Optional[list[int]]:
        color[v] = GRAY
        path.append(v)
        for w in sorted(comp.get(v, ())):
            if w not in color:
                continue
            if color[w] == GRAY:
                i = path.index(w)
                return path[i:] + [w]
            if color[w] == WHITE:
                found = dfs(w, path)
                if found:
                    return found
        path.pop()
        color[v] = BLACK
        return None

    for v in sorted(comp):
        if color[v] == WHITE:
            found = dfs(v, [])
            if found:
                return found
    return None


def characteristic(e: PolyTree) -> Characteristic:
    if not is_coherent(e):
        return Characteristic.INFINITE
    return (
        Characteristic.ONE
        if has_cyclic_alternating_path(e)
        else Characteristic.ZERO
    )


def characteristic_of_type(a) -> Characteristic:
    from .polytree import tree_of_type

    return characteristic(tree_of_type(a))
