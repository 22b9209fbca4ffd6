"""Modular-node analysis and the quantifier-eliminating tree rewrites.

A bound variable can be eliminated from a tree when all its occurrences of
one color are "modular": close enough to the binder and unambiguous among
their siblings.  Eliminating it replaces the opposite occurrences with a
fixpoint anchor assembled from the subtrees that carried the modular ones.
Four rule shapes exist, indexed by the polarity of the subtree at the
binder and the color being kept; they share one implementation here.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .polytree import (
    Bullet,
    ColoredVar,
    Label,
    MuAnchor,
    Node,
    NuAnchor,
    PolyTree,
    Triangle,
    TreeError,
    VarSet,
    is_bare,
    leaf,
    validate,
)
from .syntax import Color, NameSupply


class NotEliminable(TreeError):
    pass


class NotCoherent(TreeError):
    pass


# ---------------------------------------------------------------------------
# Basic geometry
# ---------------------------------------------------------------------------

def binding_node(e: PolyTree, x: str) -> int:
    """Position of the unique node whose binder contains x."""
    return e.binding_pos(x)


def head_node(e: PolyTree, x: str) -> int:
    """Position owning the head of the subtree rooted at x's binder."""
    rx = e.binding_pos(x)
    h = e.head_anchor_position(rx)
    return rx if h is None else h


def distance(e: PolyTree, n: int, m: int) -> int:
    """Edge count between the binder-or-leaf vertices of two positions."""

    def up(p: int) -> Optional[int]:
        return e.parent(p)

    # walk both up to the common ancestor, counting steps
    an, am = n, m
    da, db = e.depth(n), e.depth(m)
    steps = 0
    while da > db:
        an = up(an)
        da -= 1
        steps += 1
    while db > da:
        am = up(am)
        db -= 1
        steps += 1
    while an != am:
        an, am = up(an), up(am)
        steps += 2
    return steps


def label_at(e: PolyTree, pos: int) -> Label:
    head = e.node(pos).head
    if isinstance(head, Node):
        raise TreeError(f"node {pos} has an anchor, not a label, in head position")
    return head


def is_modular(e: PolyTree, pos: int) -> bool:
    """Is the label vertex at pos a modular node?

    Modular means: a bound colored variable, not the head of its own
    binder's subtree, at distance 1 or 2 from the binder, and (at distance
    2) without a parallel sibling carrying the same label.  Distance-1
    occurrences are degenerate whole premises; a twin there denotes a
    repeated premise, which stays eliminable, so the parallel test only
    applies at distance 2.
    """
    lbl = label_at(e, pos)
    if not isinstance(lbl, ColoredVar):
        raise TreeError("modularity is defined for variable labels only")
    if lbl.name not in e.idx.binding:
        raise TreeError(f"{lbl.name!r} is a free variable")
    rx = e.binding_pos(lbl.name)
    if pos == rx:
        return False  # this is h_X
    d = e.label_distance(pos, rx)
    if not 1 <= d <= 2:
        return False
    if d == 2:
        for q in e.parallel_label_positions(pos):
            other = e.node(q).head
            if isinstance(other, ColoredVar) and other == lbl:
                return False
    return True


def _occurrence_positions(e: PolyTree, x: str, c: Color) -> list[int]:
    return [
        pos
        for pos, lbl in e.labels()
        if isinstance(lbl, ColoredVar) and lbl.name == x and lbl.color is c
    ]


def modular_positions(e: PolyTree) -> list[int]:
    out = []
    bound = set(e.idx.binding)
    for pos, lbl in e.labels():
        if isinstance(lbl, ColoredVar) and lbl.name in bound and is_modular(e, pos):
            out.append(pos)
    return out


def modular_pairs(e: PolyTree) -> list[tuple[int, int]]:
    """All modular X-pairs (one blue and one red occurrence of the same
    bound variable, at least one of them modular)."""
    out = []
    for x in e.bound_vars():
        blues = _occurrence_positions(e, x, Color.BLUE)
        reds = _occurrence_positions(e, x, Color.RED)
        for b in blues:
            for r in reds:
                if is_modular(e, b) or is_modular(e, r):
                    out.append((b, r))
    return out


def is_c_eliminable(e: PolyTree, x: str, c: Color) -> bool:
    """Every occurrence of x with the flipped color is modular."""
    e.binding_pos(x)  # raises for unknown variables
    return all(is_modular(e, pos) for pos in _occurrence_positions(e, x, c.flip()))


def is_eliminable(e: PolyTree, x: str) -> bool:
    """Every X-pair is modular (decided pairwise, not via is_c_eliminable)."""
    e.binding_pos(x)
    blues = _occurrence_positions(e, x, Color.BLUE)
    reds = _occurrence_positions(e, x, Color.RED)
    return all(
        is_modular(e, b) or is_modular(e, r) for b in blues for r in reds
    )


# ---------------------------------------------------------------------------
# Decomposition into the rewrite shape
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GCase:
    """One subtree that carried a modular occurrence.

    For the mu flavor the occurrence was the subtree's head; what is left
    is its binder set and children.  For the nu flavor the occurrence was a
    bare child; the head slot survives in rest_head.
    """

    binders: tuple[str, ...]
    children: tuple[Node, ...]
    rest_head: Union[Label, Node, None] = None


@dataclass(frozen=True)
class Decomposition:
    var: str
    color: Color
    flavor: str  # "mu" | "nu"
    polarity: Color
    binder_rest: tuple[str, ...]
    items: tuple[tuple[str, object], ...]  # ("g", GCase) / ("f", Node), child order
    head: Union[Label, Node]

    @property
    def cases(self) -> tuple[GCase, ...]:
        return tuple(payload for kind, payload in self.items if kind == "g")

    @property
    def passive(self) -> tuple[Node, ...]:
        return tuple(payload for kind, payload in self.items if kind == "f")

    def reassemble(self) -> Node:
        """Rebuild the original subtree rooted at the binder."""
        children = []
        for kind, payload in self.items:
            if kind == "f":
                children.append(payload)
            elif self.flavor == "mu":
                g: GCase = payload
                children.append(
                    Node(
                        VarSet(g.binders),
                        ColoredVar(self.var, self.color.flip()),
                        g.children,
                    )
                )
            else:
                g = payload
                kids = (leaf(ColoredVar(self.var, self.color.flip())),) + g.children
                children.append(Node(VarSet(g.binders), g.rest_head, kids))
        names = self.binder_rest + (self.var,)
        return Node(VarSet(names), self.head, tuple(children))


def _contains_label(n: Node, x: str, c: Color) -> bool:
    head = n.head
    if isinstance(head, Node):
        if _contains_label(head, x, c):
            return True
    elif isinstance(head, ColoredVar) and head.name == x and head.color is c:
        return True
    return any(_contains_label(ch, x, c) for ch in n.children)


def decompose(e: PolyTree, x: str, c: Color) -> Decomposition:
    """Match the subtree at x's binder against the rewrite shape for color c.

    Succeeds exactly when x is c-eliminable; shape violations raise
    NotEliminable.  The matching is purely structural, independent of
    is_c_eliminable, so the two can cross-check each other.
    """
    rx = e.binding_pos(x)
    rnode = e.node(rx)
    assert isinstance(rnode.binder, VarSet)
    pol = e.polarity_at(rx)
    flavor = "mu" if c is pol else "nu"
    dropped = c.flip()

    head = rnode.head
    if isinstance(head, Node):
        if _contains_label(head, x, dropped):
            raise NotEliminable(f"{x} occurs with the dropped color inside the head anchor")
    elif isinstance(head, ColoredVar) and head.name == x:
        if flavor == "nu":
            raise NotEliminable(f"{x} heads its own binder node")

    items: list[tuple[str, object]] = []
    for ch in rnode.children:
        if not _contains_label(ch, x, dropped):
            items.append(("f", ch))
            continue
        if flavor == "mu":
            if is_bare(ch) and ch.head == ColoredVar(x, dropped):
                items.append(("g", GCase((), ())))
                continue
            if (
                isinstance(ch.binder, VarSet)
                and isinstance(ch.head, ColoredVar)
                and ch.head == ColoredVar(x, dropped)
                and not any(_contains_label(d, x, dropped) for d in ch.children)
            ):
                items.append(("g", GCase(ch.binder.names, ch.children)))
                continue
            raise NotEliminable(
                f"a subtree holds an occurrence of {x} too deep to eliminate at {c.value}"
            )
        # nu flavor: the occurrence must be a unique bare child of ch
        if not isinstance(ch.binder, VarSet):
            raise NotEliminable(f"{x} occurs inside an anchor, not eliminable at {c.value}")
        hits = [
            i
            for i, d in enumerate(ch.children)
            if is_bare(d) and d.head == ColoredVar(x, dropped)
        ]
        if len(hits) != 1:
            raise NotEliminable(
                f"{x} must occur exactly once, as a whole premise, per subtree"
            )
        rest = tuple(d for i, d in enumerate(ch.children) if i != hits[0])
        rest_head = ch.head
        if any(_contains_label(d, x, dropped) for d in rest) or (
            isinstance(rest_head, Node) and _contains_label(rest_head, x, dropped)
        ):
            raise NotEliminable(
                f"a subtree holds an occurrence of {x} too deep to eliminate at {c.value}"
            )
        items.append(("g", GCase(ch.binder.names, rest, rest_head)))

    binder_rest = tuple(v for v in rnode.binder.names if v != x)
    return Decomposition(x, c, flavor, pol, binder_rest, tuple(items), rnode.head)


# ---------------------------------------------------------------------------
# The rewrite step
# ---------------------------------------------------------------------------

@dataclass
class Step:
    """Record of one elimination: the variable, its color, and the ancestry
    map sending each bound variable of the result to the bound variable of
    the source it is (a copy of)."""

    var: str
    color: Color
    ancestry: dict[str, str]
    measure_before: int = 0
    measure_after: int = 0
    anchored_measure_after: int = 0


def _all_names(e: PolyTree) -> set[str]:
    names = set(e.idx.binding)
    names |= {lbl.name for _, lbl in e.labels() if isinstance(lbl, ColoredVar)}
    return names


def _all_anchor_ids(n: Node, acc: set[str]) -> set[str]:
    if isinstance(n.binder, (MuAnchor, NuAnchor)):
        acc.add(n.binder.anchor)
    if isinstance(n.head, Node):
        _all_anchor_ids(n.head, acc)
    for c in n.children:
        _all_anchor_ids(c, acc)
    return acc


def reduce_step(e: PolyTree, x: str, c: Color, check: bool = True) -> tuple[PolyTree, Step]:
    """Eliminate x at color c; requires x to be c-eliminable.

    All bound variables and anchor ids inside the copied subtrees are
    freshly renamed per copy; the step's ancestry map records the originals.
    """
    dec = decompose(e, x, c)
    rx = e.binding_pos(x)
    supply = NameSupply(avoid=_all_names(e))
    anchor_ids = NameSupply(avoid=_all_anchor_ids(e.root, set()))
    copy_map: dict[str, str] = {}

    ref_cls = Bullet if dec.flavor == "mu" else Triangle

    def freshen_copy(n: Node, vmap: dict[str, str], amap: dict[str, str], aid: str) -> Node:
        binder = n.binder
        if isinstance(binder, VarSet):
            new_names = []
            for v in binder.names:
                nv = supply.fresh(v)
                vmap[v] = nv
                copy_map[nv] = v
                new_names.append(nv)
            binder = VarSet(tuple(new_names))
        else:
            na = anchor_ids.fresh("a")
            amap[binder.anchor] = na
            binder = type(binder)(na)
        head = _copy_head(n.head, vmap, amap, aid)
        children = tuple(freshen_copy(ch, vmap, amap, aid) for ch in n.children)
        return Node(binder, head, children)

    def _copy_head(h: Union[Label, Node], vmap, amap, aid) -> Union[Label, Node]:
        if isinstance(h, Node):
            return freshen_copy(h, vmap, amap, aid)
        if isinstance(h, ColoredVar):
            if h.name == x and h.color is c:
                return ref_cls(c, aid)
            return ColoredVar(vmap.get(h.name, h.name), h.color)
        return type(h)(h.color, amap.get(h.anchor, h.anchor))

    def make_anchor() -> Node:
        aid = anchor_ids.fresh("a")
        vmap: dict[str, str] = {}
        amap: dict[str, str] = {}
        if dec.flavor == "mu":
            cases = []
            for g in dec.cases:
                zs = []
                for z in g.binders:
                    nz = supply.fresh(z)
                    vmap[z] = nz
                    copy_map[nz] = z
                    zs.append(nz)
                kids = tuple(freshen_copy(d, vmap, amap, aid) for d in g.children)
                cases.append(Node(VarSet(tuple(zs)), Bullet(c.flip(), aid), kids))
            return Node(MuAnchor(aid), Bullet(c, aid), tuple(cases))
        cases = []
        for g in dec.cases:
            zs = []
            for z in g.binders:
                nz = supply.fresh(z)
                vmap[z] = nz
                copy_map[nz] = z
                zs.append(nz)
            kids = tuple(freshen_copy(d, vmap, amap, aid) for d in g.children)
            rest_head = _copy_head(g.rest_head, vmap, amap, aid)
            cases.append(Node(VarSet(tuple(zs)), rest_head, kids))
        body = Node(VarSet(()), Triangle(c.flip(), aid), tuple(cases))
        return Node(NuAnchor(aid), Triangle(c, aid), (body,))

    def theta(n: Node) -> Node:
        head = n.head
        if isinstance(head, Node):
            head = theta(head)
        elif isinstance(head, ColoredVar) and head.name == x and head.color is c:
            head = make_anchor()
        children = []
        for ch in n.children:
            if is_bare(ch) and ch.head == ColoredVar(x, c):
                children.append(make_anchor())
            else:
                children.append(theta(ch))
        return Node(n.binder, head, tuple(children))

    new_head = dec.head
    if isinstance(new_head, Node):
        new_head = theta(new_head)
    elif isinstance(new_head, ColoredVar) and new_head.name == x and new_head.color is c:
        new_head = make_anchor()
    new_children = tuple(theta(f) for f in dec.passive)
    new_sub = Node(VarSet(dec.binder_rest), new_head, new_children)

    new_root = _replace_at(e, rx, new_sub)
    result = PolyTree(e.polarity, new_root)
    if check:
        validate(result)

    ancestry = {y: copy_map.get(y, y) for y in result.bound_vars()}
    step = Step(var=x, color=c, ancestry=ancestry)
    step.measure_before = measure(e)
    step.measure_after = measure(result)
    step.anchored_measure_after = anchored_measure(result, e, ancestry)
    return result, step


def _replace_at(e: PolyTree, pos: int, replacement: Node) -> Node:
    """Rebuild the root with the node at pos swapped out."""
    path: list[int] = []
    p: Optional[int] = pos
    while p is not None:
        path.append(p)
        p = e.parent(p)
    path.reverse()  # root ... pos

    def rebuild(cur_pos: int, i: int) -> Node:
        if i == len(path) - 1:
            return replacement
        cur = e.node(cur_pos)
        nxt = path[i + 1]
        slot = e.idx.slot[nxt]
        if slot[0] == "head":
            return Node(cur.binder, rebuild(nxt, i + 1), cur.children)
        children = list(cur.children)
        children[slot[1]] = rebuild(nxt, i + 1)
        return Node(cur.binder, cur.head, tuple(children))

    return rebuild(path[0], 0)


# ---------------------------------------------------------------------------
# Termination measure
# ---------------------------------------------------------------------------

def measure(e: PolyTree) -> int:
    """Sum over bound variables of s^(terminal count below the binder),
    with s one more than the square of the tree's terminal count.  Simple
    trees measure 0."""
    k = e.terminal_count(0)
    s = k * k + 1
    return sum(s ** e.terminal_count(e.binding_pos(x)) for x in e.bound_vars())


def anchored_measure(after: PolyTree, before: PolyTree, ancestry: dict[str, str]) -> int:
    """The measure of the reduced tree with sizes read off the source tree.

    Copies inherit the terminal count of the variable they descend from and
    the base stays the source's; this is the quantity that strictly
    decreases at every step (the recomputed measure need not, since copies
    can enlarge the subtrees of outer binders).
    """
    k = before.terminal_count(0)
    s = k * k + 1
    total = 0
    for y in after.bound_vars():
        orig = ancestry[y]
        total += s ** before.terminal_count(before.binding_pos(orig))
    return total


# ---------------------------------------------------------------------------
# Cancellation and reduction strategies
# ---------------------------------------------------------------------------

def theta_target_count(e: PolyTree, x: str, c: Color) -> int:
    """Number of positions the anchor would be substituted into."""
    dec = decompose(e, x, c)
    count = 0
    if not isinstance(dec.head, Node):
        if dec.head == ColoredVar(x, c):
            count += 1
    else:
        count += _count_label(dec.head, x, c)
    for f in dec.passive:
        count += _count_label(f, x, c)
    return count


def _count_label(n: Node, x: str, c: Color) -> int:
    total = 0
    head = n.head
    if isinstance(head, Node):
        total += _count_label(head, x, c)
    elif isinstance(head, ColoredVar) and head.name == x and head.color is c:
        total += 1
    for ch in n.children:
        total += _count_label(ch, x, c)
    return total


def is_canceling(e: PolyTree, x: str, c: Color) -> bool:
    """A step is canceling when the substitution has nothing to target, so
    the matched subtrees (and their bound variables) are erased."""
    return theta_target_count(e, x, c) == 0


@dataclass
class ReductionTrace:
    steps: list[Step] = field(default_factory=list)

    def composed_ancestry(self) -> dict[str, str]:
        """Map bound variables of the final tree to those of the initial."""
        if not self.steps:
            return {}
        out = dict(self.steps[-1].ancestry)
        for step in reversed(self.steps[:-1]):
            out = {y: step.ancestry[orig] for y, orig in out.items()}
        return out

    def stage_ancestries(self) -> list[dict[str, str]]:
        """G_i maps: ancestry from each intermediate tree back to the start."""
        maps = []
        acc: Optional[dict[str, str]] = None
        for step in self.steps:
            if acc is None:
                acc = dict(step.ancestry)
            else:
                acc = {y: acc[orig] for y, orig in step.ancestry.items()}
            maps.append(dict(acc))
        return maps

    def as_json(self) -> list[dict]:
        return [
            {
                "var": s.var,
                "color": s.color.value,
                "measure_before": s.measure_before,
                "measure_after": s.measure_after,
            }
            for s in self.steps
        ]


class StuckReduction(TreeError):
    def __init__(self, tree: PolyTree, trace: ReductionTrace):
        super().__init__("no admissible elimination remains")
        self.tree = tree
        self.trace = trace


def _order_candidates(e: PolyTree, xs: Iterable[str], policy: str, rng) -> list[str]:
    xs = list(xs)
    if policy == "outermost":
        xs.sort(key=lambda x: (e.depth(e.binding_pos(x)), x))
    elif policy == "innermost":
        xs.sort(key=lambda x: (-e.depth(e.binding_pos(x)), x))
    elif policy == "random":
        rng.shuffle(xs)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return xs


def _scope_has_other_binders(e: PolyTree, x: str) -> bool:
    rx = e.binding_pos(x)
    for p in e.subtree_positions(rx):
        if p == rx:
            continue
        b = e.node(p).binder
        if isinstance(b, VarSet) and b.names:
            return True
    return False


def standard_reduce(
    e: PolyTree,
    phi: dict[str, Color],
    policy: str = "outermost",
    seed: int | None = None,
    least_canceling: bool = False,
) -> tuple[PolyTree, ReductionTrace]:
    """Eliminate every bound variable, coloring each by phi through the
    ancestry maps.  Policies pick the next variable: outermost-first,
    innermost-first or seeded-random order; with least_canceling, canceling
    steps wait until the binder's scope holds no other variable.

    Requires e to be phi-coherent (checked up front)."""
    from .coherence import is_phi_coherent

    if not is_phi_coherent(e, phi):
        raise NotCoherent("the given valuation does not make the tree coherent")
    rng = random.Random(seed)
    trace = ReductionTrace()
    origin: dict[str, str] = {x: x for x in e.bound_vars()}
    current = e
    while current.bound_vars():
        ordered = _order_candidates(current, current.bound_vars(), policy, rng)
        chosen = None
        for x in ordered:
            color = phi[origin[x]]
            if not is_c_eliminable(current, x, color):
                continue
            if least_canceling and is_canceling(current, x, color) and _scope_has_other_binders(current, x):
                continue  # such a step must wait for its scope to empty
            chosen = x
            break
        if chosen is None:
            raise StuckReduction(current, trace)
        color = phi[origin[chosen]]
        current, step = reduce_step(current, chosen, color)
        trace.steps.append(step)
        origin = {y: origin[old] for y, old in step.ancestry.items()}
    return current, trace


def greedy_standard_reduce(
    e: PolyTree,
    policy: str = "outermost",
    seed: int | None = None,
    least_canceling: bool = False,
) -> tuple[PolyTree, ReductionTrace, bool]:
    """Run a maximal standard reduction without a precomputed valuation.

    At each step any eliminable (variable, color) whose original is
    pairwise coherent with all earlier choices may fire.  Returns the last
    tree, the trace, and whether it converged onto a simple tree.  Used to
    probe strong convergence on possibly incoherent trees."""
    from .coherence import coherent_pair

    rng = random.Random(seed)
    trace = ReductionTrace()
    origin: dict[str, str] = {x: x for x in e.bound_vars()}
    chosen_colors: dict[str, Color] = {}
    current = e
    while current.bound_vars():
        ordered = _order_candidates(current, current.bound_vars(), policy, rng)
        colors = [Color.BLUE, Color.RED]
        if policy == "random":
            rng.shuffle(colors)
        pick = None
        for x in ordered:
            orig = origin[x]
            for c in colors:
                if orig in chosen_colors and chosen_colors[orig] is not c:
                    continue
                if not is_c_eliminable(current, x, c):
                    continue
                ok = all(
                    coherent_pair(e, orig, c, other, oc)
                    for other, oc in chosen_colors.items()
                    if other != orig
                )
                if not ok:
                    continue
                if (
                    least_canceling
                    and is_canceling(current, x, c)
                    and _scope_has_other_binders(current, x)
                ):
                    continue  # a least-canceling run may not fire this yet
                pick = (x, c)
                break
            if pick:
                break
        if pick is None:
            return current, trace, False
        x, c = pick
        chosen_colors[origin[x]] = c
        current, step = reduce_step(current, x, c)
        trace.steps.append(step)
        origin = {y: origin[old] for y, old in step.ancestry.items()}
    return current, trace, True


def uniform_reduce(
    e: PolyTree,
    chi: dict[str, Color],
    seed: int | None = None,
) -> tuple[PolyTree, ReductionTrace]:
    """Hierarchical elimination: a variable fires only once its scope holds
    no other bound variable, and all copies of one original are eliminated
    with the skeleton's color.  The result depends only on the skeleton."""
    from .coherence import is_phi_coherent

    if not is_phi_coherent(e, chi):
        raise NotCoherent("the given skeleton does not make the tree coherent")
    rng = random.Random(seed)
    trace = ReductionTrace()
    origin: dict[str, str] = {x: x for x in e.bound_vars()}
    current = e
    while current.bound_vars():
        ready = [x for x in current.bound_vars() if not _scope_has_other_binders(current, x)]
        if not ready:
            raise StuckReduction(current, trace)
        if seed is None:
            ready.sort()
            x = ready[0]
        else:
            x = rng.choice(ready)
        color = chi[origin[x]]
        if not is_c_eliminable(current, x, color):
            raise StuckReduction(current, trace)
        current, step = reduce_step(current, x, color)
        trace.steps.append(step)
        origin = {y: origin[old] for y, old in step.ancestry.items()}
    return current, trace
