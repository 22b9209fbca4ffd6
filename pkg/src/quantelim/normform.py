"""Normal forms of polymorphic types and the isomorphism decision they induce.

A type is in normal form when it looks like ``forall Ys. A1 -> ... -> An -> X``
with every bound variable actually used and every premise recursively in
normal form.  Two normal forms are equivalent (``sim``) when they match up to
a bijection of bound names and a permutation of premises; that relation
decides isomorphism of arbitrary polymorphic types.
"""

from __future__ import annotations

from .syntax import Arrow, Forall, Type, Var, free_vars, freshen


def nf(a: Type) -> Type:
    """Normal form: drop vacuous quantifiers, hoist the rest leftmost.

    Rewrites ``forall X. A == A`` (X unused) and
    ``A -> forall X. B == forall X. A -> B`` exhaustively, recursing into
    premises.  The result is isomorphic to the input.
    """
    a = freshen(a)

    def go(t: Type) -> Type:
        match t:
            case Var(_):
                return t
            case Forall(v, body):
                body = go(body)
                if v not in free_vars(body):
                    return body
                return Forall(v, body)
            case Arrow(dom, cod):
                dom = go(dom)
                cod = go(cod)
                hoisted: list[str] = []
                while isinstance(cod, Forall):
                    # Binders are globally unique after freshen, so hoisting
                    # over dom cannot capture.
                    hoisted.append(cod.var)
                    cod = cod.body
                out: Type = Arrow(dom, cod)
                for v in reversed(hoisted):
                    out = Forall(v, out)
                return out
        raise TypeError(f"not a polymorphic type: {t!r}")

    return go(a)


def split_nf(a: Type) -> tuple[tuple[str, ...], tuple[Type, ...], str]:
    """Decompose a type in NF into (binders, premises, head variable)."""
    binders: list[str] = []
    while isinstance(a, Forall):
        binders.append(a.var)
        a = a.body
    premises: list[Type] = []
    while isinstance(a, Arrow):
        premises.append(a.dom)
        a = a.cod
    if not isinstance(a, Var):
        raise ValueError(f"head of a normal form must be a variable, got {a!r}")
    return tuple(binders), tuple(premises), a.name


def _prekey(a: Type) -> tuple:
    """Structural key used to prune the premise-permutation search."""
    binders, premises, _head = split_nf(a)
    return (len(binders), len(premises), tuple(sorted(_prekey(p) for p in premises)))


def sim(a: Type, b: Type) -> bool:
    """Equivalence of normal forms up to binder bijection and premise order.

    Bound names are paired lazily while matching, with backtracking over
    premise permutations; the pairing must stay a consistent bijection over
    the whole match.  Inputs are assumed freshened (as ``nf`` guarantees), so
    a flat pairing set suffices.
    """

    def heads_match(x: str, y: str, env_a, env_b, pairs: dict[str, str]) -> bool:
        in_a, in_b = x in env_a, y in env_b
        if in_a != in_b:
            return False
        if not in_a:
            return x == y  # free variables match literally
        if env_a[x] != env_b[y]:
            return False  # bound at different binder groups
        if x in pairs:
            return pairs[x] == y
        if y in pairs.values():
            return False
        pairs[x] = y
        return True

    def go(a: Type, b: Type, env_a: dict, env_b: dict, pairs: dict[str, str]) -> bool:
        ys, prems_a, head_a = split_nf(a)
        zs, prems_b, head_b = split_nf(b)
        if len(ys) != len(zs) or len(prems_a) != len(prems_b):
            return False
        lvl = len(env_a)  # group id; envs only ever grow down a branch
        env_a = {**env_a, **{y: (lvl, len(ys)) for y in ys}}
        env_b = {**env_b, **{z: (lvl, len(zs)) for z in zs}}

        order = sorted(range(len(prems_a)), key=lambda i: _prekey(prems_a[i]))
        keys_a = [_prekey(p) for p in prems_a]
        keys_b = [_prekey(p) for p in prems_b]

        def search(idx: int, used: int) -> bool:
            if idx == len(order):
                return heads_match(head_a, head_b, env_a, env_b, pairs)
            i = order[idx]
            for j in range(len(prems_b)):
                if used & (1 << j) or keys_b[j] != keys_a[i]:
                    continue
                saved = dict(pairs)
                if go(prems_a[i], prems_b[j], env_a, env_b, pairs) and search(
                    idx + 1, used | (1 << j)
                ):
                    return True
                pairs.clear()
                pairs.update(saved)
            return False

        return search(0, 0)

    return go(a, b, {}, {}, {})


def iso_beta_eta(a: Type, b: Type) -> bool:
    """Decide isomorphism by both available procedures and insist they agree.

    The NF/sim route and the tree-equality route are independent; a mismatch
    indicates a bug, so it raises instead of guessing.
    """
    from .polytree import tree_equal, tree_of_type

    via_nf = sim(nf(a), nf(b))
    via_tree = tree_equal(tree_of_type(a), tree_of_type(b))
    if via_nf != via_tree:
        raise AssertionError(
            f"isomorphism procedures disagree on {a!r} / {b!r}: "
            f"nf/sim={via_nf} tree={via_tree}"
        )
    return via_nf


def nf_is_normal(a: Type) -> bool:
    """Check the NF shape predicate (used by tests)."""
    try:
        binders, premises, _ = split_nf(a)
    except ValueError:
        return False
    body = a
    for _ in binders:
        body = body.body  # type: ignore[union-attr]
    used = free_vars(body)
    if any(v not in used for v in binders):
        return False
    return all(nf_is_normal(p) for p in premises)
