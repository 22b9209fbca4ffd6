"""Tree representation of polymorphic types, invariant under isomorphism.

A tree node carries a binder (a set of variable names, or an anchor marker
for an embedded least/greatest-fixpoint construction), a head, and a set of
child subtrees.  Heads are usually colored labels; after rewriting they can
also be whole anchor subtrees (a fixpoint construction can land in head
position).  Label colors alternate with depth: children flip polarity, a
head anchor keeps its owner's polarity.

Anchors are binder-like: each carries a unique id, and bullet/triangle
labels reference the id of the anchor they recurse on.  This keeps nested
fixpoints unambiguous where the drawn notation relies on context.

Node positions (NodeIds) are pre-order indices into a traversal; they are
derived data and equality never depends on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .normform import nf, split_nf
from .syntax import (
    Arrow,
    Color,
    Exists,
    Forall,
    Mu,
    NameSupply,
    Nu,
    Type,
    TypeLike,
    Var,
    mk_prod,
    mk_sum,
)


@dataclass(frozen=True)
class VarSet:
    names: tuple[str, ...]


@dataclass(frozen=True)
class MuAnchor:
    anchor: str


@dataclass(frozen=True)
class NuAnchor:
    anchor: str


Binder = Union[VarSet, MuAnchor, NuAnchor]


@dataclass(frozen=True)
class ColoredVar:
    name: str
    color: Color


@dataclass(frozen=True)
class Bullet:
    color: Color
    anchor: str


@dataclass(frozen=True)
class Triangle:
    color: Color
    anchor: str


Label = Union[ColoredVar, Bullet, Triangle]


@dataclass(frozen=True)
class Node:
    binder: Binder
    head: Union[Label, "Node"]
    children: tuple["Node", ...] = ()


def leaf(label: Label) -> Node:
    return Node(VarSet(()), label, ())


def is_bare(n: Node) -> bool:
    """A bare leaf draws as a single vertex: no binder, no children."""
    return (
        isinstance(n.binder, VarSet)
        and not n.binder.names
        and not n.children
        and not isinstance(n.head, Node)
    )


class TreeError(Exception):
    pass


class PolyTree:
    """An immutable rooted tree with cached positional indexing."""

    def __init__(self, polarity: Color, root: Node):
        self.polarity = polarity
        self.root = root
        self._idx: _Index | None = None

    @property
    def idx(self) -> "_Index":
        if self._idx is None:
            self._idx = _Index(self)
        return self._idx

    # -- convenience accessors used across modules ------------------------

    def node(self, pos: int) -> Node:
        return self.idx.nodes[pos]

    def positions(self) -> range:
        return range(len(self.idx.nodes))

    def bound_vars(self) -> tuple[str, ...]:
        return tuple(self.idx.binding)

    def free_vars(self) -> frozenset[str]:
        bound = set(self.idx.binding)
        return frozenset(
            lbl.name
            for _, lbl in self.labels()
            if isinstance(lbl, ColoredVar) and lbl.name not in bound
        )

    def labels(self) -> Iterator[tuple[int, Label]]:
        """All terminal vertices as (position, label) pairs."""
        for pos, n in enumerate(self.idx.nodes):
            if not isinstance(n.head, Node):
                yield pos, n.head

    def binding_pos(self, x: str) -> int:
        try:
            return self.idx.binding[x]
        except KeyError:
            raise TreeError(f"{x!r} is not a bound variable of this tree") from None

    def polarity_at(self, pos: int) -> Color:
        return self.idx.pol[pos]

    def depth(self, pos: int) -> int:
        return self.idx.depth[pos]

    def parent(self, pos: int) -> int | None:
        return self.idx.parent[pos]

    def in_subtree(self, pos: int, anc: int) -> bool:
        return anc <= pos < self.idx.end[anc]

    def subtree_positions(self, anc: int) -> range:
        return range(anc, self.idx.end[anc])

    def terminal_count(self, anc: int = 0) -> int:
        """Number of label vertices in the subtree rooted at anc."""
        return sum(
            1
            for p in self.subtree_positions(anc)
            if not isinstance(self.idx.nodes[p].head, Node)
        )

    # -- geometry of label vertices ---------------------------------------

    def label_distance(self, pos: int, anc: int) -> int:
        """Edge count from the label vertex of pos up to the binder vertex
        of the ancestor position anc.  A bare leaf is a single vertex; any
        other node contributes a binder vertex below its label."""
        if not self.in_subtree(pos, anc):
            raise TreeError("distance is only defined toward an ancestor")
        extra = 0 if is_bare(self.idx.nodes[pos]) else 1
        return self.idx.depth[pos] - self.idx.depth[anc] + extra

    def parallel_label_positions(self, pos: int) -> list[int]:
        """Positions whose label vertex is an immediate sibling of pos's
        label vertex (successors of the same binder vertex)."""
        n = self.idx.nodes[pos]
        if isinstance(n.head, Node):
            raise TreeError("position has no label vertex")
        if not is_bare(n):
            # The parent vertex is pos's own binder; its other successors
            # are the attachment points of pos's children.
            out = []
            for c in self._child_positions(pos):
                if is_bare(self.idx.nodes[c]):
                    out.append(c)
            return out
        q = self.idx.parent[pos]
        if q is None:
            return []
        out = []
        if not isinstance(self.idx.nodes[q].head, Node):
            out.append(q)
        for c in self._child_positions(q):
            if c != pos and is_bare(self.idx.nodes[c]):
                out.append(c)
        return out

    def _child_positions(self, pos: int) -> list[int]:
        return [
            p
            for p in self.subtree_positions(pos)
            if self.idx.parent[p] == pos and self.idx.slot[p][0] == "child"
        ]

    def child_positions(self, pos: int) -> list[int]:
        return self._child_positions(pos)

    def head_anchor_position(self, pos: int) -> int | None:
        for p in self.subtree_positions(pos):
            if self.idx.parent[p] == pos and self.idx.slot[p][0] == "head":
                return p
        return None

    def __repr__(self) -> str:
        return f"PolyTree({self.polarity.value}, {render(self.root)})"


class _Index:
    def __init__(self, tree: PolyTree):
        self.nodes: list[Node] = []
        self.parent: list[int | None] = []
        self.slot: list[tuple[str, int]] = []
        self.depth: list[int] = []
        self.pol: list[Color] = []
        self.end: list[int] = []

        def visit(n: Node, par: int | None, slot: tuple[str, int], depth: int, pol: Color):
            pos = len(self.nodes)
            self.nodes.append(n)
            self.parent.append(par)
            self.slot.append(slot)
            self.depth.append(depth)
            self.pol.append(pol)
            self.end.append(-1)
            if isinstance(n.head, Node):
                visit(n.head, pos, ("head", 0), depth + 1, pol)
            for i, c in enumerate(n.children):
                visit(c, pos, ("child", i), depth + 1, pol.flip())
            self.end[pos] = len(self.nodes)

        visit(tree.root, None, ("root", 0), 0, tree.polarity)

        self.binding: dict[str, int] = {}
        for p, n in enumerate(self.nodes):
            if isinstance(n.binder, VarSet):
                for x in n.binder.names:
                    if x in self.binding:
                        raise TreeError(f"bound variable {x!r} is not unique")
                    self.binding[x] = p


# ---------------------------------------------------------------------------
# Construction from types
# ---------------------------------------------------------------------------

def tree_of_type(a: Type, polarity: Color = Color.BLUE) -> PolyTree:
    """Tree of a polymorphic type; depends only on its normal form."""
    a = nf(a)

    def build(t: Type, pol: Color) -> Node:
        binders, premises, head = split_nf(t)
        return Node(
            VarSet(binders),
            ColoredVar(head, pol),
            tuple(build(p, pol.flip()) for p in premises),
        )

    return PolyTree(polarity, build(a, polarity))


def type_of_tree(e: PolyTree) -> Type:
    """Inverse of tree_of_type for anchor-free trees."""

    def back(n: Node) -> Type:
        if not isinstance(n.binder, VarSet) or not isinstance(n.head, ColoredVar):
            raise TreeError("type_of_tree requires an anchor-free tree")
        out: Type = Var(n.head.name)
        for c in reversed(n.children):
            out = Arrow(back(c), out)
        for v in reversed(n.binder.names):
            out = Forall(v, out)
        return out

    return back(e.root)


# ---------------------------------------------------------------------------
# Structural equality up to binder/anchor renaming and child order
# ---------------------------------------------------------------------------

def _shape_key(n: Node) -> tuple:
    binder_kind = type(n.binder).__name__
    nbind = len(n.binder.names) if isinstance(n.binder, VarSet) else 0
    if isinstance(n.head, Node):
        head_kind: tuple = ("anchor", _shape_key(n.head))
    else:
        head_kind = (type(n.head).__name__, n.head.color.value)
    return (
        binder_kind,
        nbind,
        head_kind,
        len(n.children),
        tuple(sorted(_shape_key(c) for c in n.children)),
    )


def tree_equal(e: PolyTree, f: PolyTree) -> bool:
    """Equality up to child order, bound-name bijection and anchor-id
    bijection.  Free variables must match literally."""
    if e.polarity != f.polarity:
        return False

    bound_a = set(e.idx.binding)
    bound_b = set(f.idx.binding)

    def labels_match(x: Label, y: Label, st: dict) -> bool:
        if type(x) is not type(y):
            return False
        if isinstance(x, ColoredVar):
            if x.color is not y.color:
                return False
            in_a, in_b = x.name in bound_a, y.name in bound_b
            if in_a != in_b:
                return False
            if not in_a:
                return x.name == y.name
            if st["groups_a"].get(x.name) != st["groups_b"].get(y.name):
                return False
            if x.name in st["vmap"]:
                return st["vmap"][x.name] == y.name
            if y.name in st["vmap_rev"]:
                return False
            st["vmap"][x.name] = y.name
            st["vmap_rev"][y.name] = x.name
            return True
        # Bullet / Triangle: same color, referenced anchors already paired.
        if x.color is not y.color:
            return False
        return st["amap"].get(x.anchor) == y.anchor

    def match(a: Node, b: Node, st: dict) -> bool:
        if type(a.binder) is not type(b.binder):
            return False
        if isinstance(a.binder, VarSet):
            if len(a.binder.names) != len(b.binder.names):
                return False
            gid = st["next_group"]
            st["next_group"] += 1
            for x in a.binder.names:
                st["groups_a"][x] = gid
            for y in b.binder.names:
                st["groups_b"][y] = gid
        else:
            if st["amap"].get(a.binder.anchor) is not None:
                return False  # anchor ids are unique; re-pairing is a bug
            st["amap"][a.binder.anchor] = b.binder.anchor

        # heads
        ha, hb = a.head, b.head
        if isinstance(ha, Node) != isinstance(hb, Node):
            return False
        if isinstance(ha, Node):
            if not match(ha, hb, st):
                return False
        elif not labels_match(ha, hb, st):
            return False

        # children as a multiset, with backtracking
        if len(a.children) != len(b.children):
            return False
        keys_a = [_shape_key(c) for c in a.children]
        keys_b = [_shape_key(c) for c in b.children]
        if sorted(keys_a) != sorted(keys_b):
            return False
        order = sorted(range(len(a.children)), key=lambda i: keys_a[i])

        def snapshot(st):
            return {
                "vmap": dict(st["vmap"]),
                "vmap_rev": dict(st["vmap_rev"]),
                "amap": dict(st["amap"]),
                "groups_a": dict(st["groups_a"]),
                "groups_b": dict(st["groups_b"]),
                "next_group": st["next_group"],
            }

        def restore(st, snap):
            st.clear()
            st.update(snap)

        def search(idx: int, used: int) -> bool:
            if idx == len(order):
                return True
            i = order[idx]
            for j in range(len(b.children)):
                if used & (1 << j) or keys_b[j] != keys_a[i]:
                    continue
                snap = snapshot(st)
                if match(a.children[i], b.children[j], st) and search(idx + 1, used | (1 << j)):
                    return True
                restore(st, snap)
            return False

        return search(0, 0)

    state = {
        "vmap": {},
        "vmap_rev": {},
        "amap": {},
        "groups_a": {},
        "groups_b": {},
        "next_group": 0,
    }
    return match(e.root, f.root, state)


# ---------------------------------------------------------------------------
# Simplicity and the monomorphic translation
# ---------------------------------------------------------------------------

def is_simple(e: PolyTree) -> bool:
    """No bound variables anywhere (anchor markers are fine)."""
    return not e.idx.binding


def _anchor_occurs(n: Node, anchor: str, ref_color: Color) -> bool:
    """Does a recursion reference to `anchor` occur in n's subtree?

    References carry the anchor's own color; the heads of the anchor node
    and of its case/body nodes are structural markers, not references (the
    latter carry the flipped color, so the color test excludes them)."""
    if isinstance(n.head, Node):
        if _anchor_occurs(n.head, anchor, ref_color):
            return True
    elif (
        isinstance(n.head, (Bullet, Triangle))
        and n.head.anchor == anchor
        and n.head.color is ref_color
        and not (isinstance(n.binder, (MuAnchor, NuAnchor)) and n.binder.anchor == anchor)
    ):
        return True
    return any(_anchor_occurs(c, anchor, ref_color) for c in n.children)


def tau(e: PolyTree) -> TypeLike:
    """Monomorphic reading of a simple tree.

    Ordinary nodes become arrow chains into their head; a mu anchor becomes
    ``mu X. sum_k exists Zk. prod_j ...`` and a nu anchor
    ``nu X. prod_j ...``.  The fixpoint binder is dropped when the recursion
    marker never occurs, and empty exists binders are dropped.
    """
    supply = NameSupply(avoid={lbl.name for _, lbl in e.labels() if isinstance(lbl, ColoredVar)})
    rec_name: dict[str, str] = {}

    def head_type(h: Label | Node) -> TypeLike:
        if isinstance(h, Node):
            return go(h)
        if isinstance(h, ColoredVar):
            return Var(h.name)
        if h.anchor not in rec_name:
            raise TreeError("recursion marker outside the scope of its anchor")
        return Var(rec_name[h.anchor])

    def case_marker_ok(c: Node, anchor: str, want) -> bool:
        return isinstance(c.head, want) and c.head.anchor == anchor

    def go(n: Node) -> TypeLike:
        if isinstance(n.binder, MuAnchor):
            aid = n.binder.anchor
            if not isinstance(n.head, Bullet):
                raise TreeError("malformed mu anchor")
            rec_name[aid] = supply.fresh("X")
            parts = []
            for c in n.children:
                if not isinstance(c.binder, VarSet) or not case_marker_ok(c, aid, Bullet):
                    raise TreeError("malformed mu anchor")
                prod = mk_prod([go(d) for d in c.children])
                if c.binder.names:
                    prod = Exists(c.binder.names, prod)
                parts.append(prod)
            body = mk_sum(parts)
            out = Mu(rec_name[aid], body) if _anchor_occurs(n, aid, n.head.color) else body
            del rec_name[aid]
            return out
        if isinstance(n.binder, NuAnchor):
            aid = n.binder.anchor
            if not isinstance(n.head, Triangle):
                raise TreeError("malformed nu anchor")
            rec_name[aid] = supply.fresh("X")
            if len(n.children) != 1:
                raise TreeError("malformed nu anchor")
            body_node = n.children[0]
            if not isinstance(body_node.binder, VarSet) or not case_marker_ok(
                body_node, aid, Triangle
            ):
                raise TreeError("malformed nu anchor")
            if body_node.binder.names:
                raise TreeError("nu anchor with a bound-variable set is not monomorphic")
            body = mk_prod([go(d) for d in body_node.children])
            out = Nu(rec_name[aid], body) if _anchor_occurs(n, aid, n.head.color) else body
            del rec_name[aid]
            return out
        # ordinary node
        if n.binder.names:
            raise TreeError(
                f"tau requires a simple tree; found bound variables {n.binder.names}"
            )
        out = head_type(n.head)
        for c in reversed(n.children):
            out = Arrow(go(c), out)
        return out

    return go(e.root)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate(e: PolyTree) -> None:
    """Raise TreeError unless all structural invariants hold."""
    idx = e.idx  # binder uniqueness is checked during indexing

    bound = set(idx.binding)

    def visit(n: Node, pol: Color, anchors: dict[str, tuple[str, Color]], scope: set[str]):
        if isinstance(n.binder, VarSet):
            scope = scope | set(n.binder.names)
        head = n.head
        if isinstance(n.binder, MuAnchor):
            aid = n.binder.anchor
            if not (isinstance(head, Bullet) and head.anchor == aid and head.color is pol):
                raise TreeError("mu anchor head must be its own bullet at tree polarity")
            for c in n.children:
                if not isinstance(c.binder, VarSet):
                    raise TreeError("mu anchor cases must carry variable binders")
                if not (
                    isinstance(c.head, Bullet)
                    and c.head.anchor == aid
                    and c.head.color is pol.flip()
                ):
                    raise TreeError("mu anchor case head must be the flipped bullet")
                cscope = scope | set(c.binder.names)
                for d in c.children:
                    visit(d, pol, {**anchors, aid: ("mu", pol)}, cscope)
            return
        if isinstance(n.binder, NuAnchor):
            aid = n.binder.anchor
            if not (isinstance(head, Triangle) and head.anchor == aid and head.color is pol):
                raise TreeError("nu anchor head must be its own triangle at tree polarity")
            if len(n.children) != 1:
                raise TreeError("nu anchor must have exactly one body")
            c = n.children[0]
            if not isinstance(c.binder, VarSet):
                raise TreeError("nu anchor body must carry a variable binder")
            if not (
                isinstance(c.head, Triangle)
                and c.head.anchor == aid
                and c.head.color is pol.flip()
            ):
                raise TreeError("nu anchor body head must be the flipped triangle")
            cscope = scope | set(c.binder.names)
            for d in c.children:
                visit(d, pol, {**anchors, aid: ("nu", pol)}, cscope)
            return
        # ordinary node
        if isinstance(head, Node):
            if not isinstance(head.binder, (MuAnchor, NuAnchor)):
                raise TreeError("only anchors may sit in head position")
            visit(head, pol, anchors, scope)
        elif isinstance(head, ColoredVar):
            if head.color is not pol:
                raise TreeError(
                    f"label {head.name}^{head.color.value} at polarity {pol.value}"
                )
            if head.name in bound and head.name not in scope:
                raise TreeError(f"occurrence of {head.name!r} escapes its binder")
        else:  # recursion reference
            kind = "mu" if isinstance(head, Bullet) else "nu"
            info = anchors.get(head.anchor)
            if info is None or info[0] != kind:
                raise TreeError("recursion marker without a matching enclosing anchor")
            if head.color is not info[1] or head.color is not pol:
                raise TreeError("recursion marker with the wrong polarity")
        for c in n.children:
            visit(c, pol.flip(), anchors, scope)

    visit(e.root, e.polarity, {}, set())


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _label_text(lbl: Label) -> str:
    if isinstance(lbl, ColoredVar):
        return f"{lbl.name}^{'+' if lbl.color is Color.BLUE else '-'}"
    sym = "•" if isinstance(lbl, Bullet) else "▲"
    return f"{sym}{'+' if lbl.color is Color.BLUE else '-'}[{lbl.anchor}]"


def render(n: Node, indent: int = 0) -> str:
    """Compact single-line rendering (for repr and the CLI tree command)."""
    if isinstance(n.binder, VarSet):
        b = "{" + " ".join(n.binder.names) + "}" if n.binder.names else "{}"
    elif isinstance(n.binder, MuAnchor):
        b = f"mu[{n.binder.anchor}]"
    else:
        b = f"nu[{n.binder.anchor}]"
    h = render(n.head) if isinstance(n.head, Node) else _label_text(n.head)
    if not n.children:
        return f"({b} {h})"
    return f"({b} {h} | {' '.join(render(c) for c in n.children)})"


def to_dot(e: PolyTree, annotate_modular: bool = False, annotate_pairs: bool = False) -> str:
    """Graphviz rendering; node names follow deterministic pre-order.

    Bare leaves draw as a single label vertex, like the usual pictures.
    Modular labels get an underline and a fontcolor; modular pairs become
    dashed constraint-free edges."""
    from .yoneda import modular_pairs, modular_positions

    modular: set[int] = set()
    if annotate_modular or annotate_pairs:
        modular = set(modular_positions(e))

    lines = [
        "digraph polytree {",
        "  rankdir=BT;",
        "  node [shape=plaintext];",
    ]
    idx = e.idx

    def attach_point(pos: int) -> str:
        return f"h{pos}" if is_bare(idx.nodes[pos]) else f"b{pos}"

    for pos, n in enumerate(idx.nodes):
        bare = is_bare(n)
        if not bare:
            if isinstance(n.binder, VarSet):
                btxt = " ".join(n.binder.names) if n.binder.names else "∅"
            else:
                btxt = "•" if isinstance(n.binder, MuAnchor) else "▲"
            lines.append(f'  b{pos} [label="{btxt}"];')
        if not isinstance(n.head, Node):
            txt = _label_text(n.head)
            if annotate_modular and pos in modular:
                lines.append(f'  h{pos} [label=<<u>{txt}</u>>, fontcolor="blue4"];')
            else:
                lines.append(f'  h{pos} [label="{txt}"];')
            if not bare:
                lines.append(f"  h{pos} -> b{pos} [dir=none];")
    for pos in range(1, len(idx.nodes)):
        par = idx.parent[pos]
        lines.append(f"  {attach_point(pos)} -> b{par} [dir=none];")
    if annotate_pairs:
        for (p, q) in modular_pairs(e):
            lines.append(f"  h{p} -> h{q} [style=dashed, constraint=false, dir=none];")
    lines.append("}")
    return "\n".join(lines)
