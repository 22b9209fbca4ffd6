"""Monomorphic simplification, inhabitant counting and type embeddings.

Closed types of characteristic zero flatten to quantifier-free types and
then normalize to a finite sum of units, whose length counts the
inhabitants of the original type.  The reverse embedding turns monomorphic
types back into polymorphic ones, clause by clause.
"""

from __future__ import annotations

from .coherence import Characteristic, characteristic_of_type
from .polytree import tau, tree_of_type
from .syntax import (
    Arrow,
    Color,
    Exists,
    Forall,
    Mu,
    NameSupply,
    Nu,
    One,
    Prod,
    Sum,
    Type,
    TypeLike,
    Var,
    Zero,
    free_vars,
    is_lambda2,
    is_simple_type,
    mk_prod,
    mk_sum,
    occurrences,
)
from .yoneda import NotCoherent, uniform_reduce
from .coherence import find_valuation


class OpenType(Exception):
    pass


class NotSimple(Exception):
    pass


class NotFinite:
    """Returned when the finiteness criterion does not apply; it signals
    that the criterion is inconclusive, not a proof of infinitude."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NotFinite"


NOT_FINITE = NotFinite()


# ---------------------------------------------------------------------------
# Simplification of monomorphic types
# ---------------------------------------------------------------------------

def simplify_mono(m: TypeLike) -> TypeLike:
    """Exhaustively apply the oriented isomorphism rules.

    Unit and zero laws, currying of product domains, splitting of sum
    domains, distribution of products over sums, flattening, and dropping
    of vacuous mu/nu/exists binders.  Closed types over 0, 1, +, *, -> end
    up as a numeral (an n-fold sum of 1, or 0).  Deliberately exponential:
    counting ``(1+...+1) -> n`` really does expand to n^m summands.
    """

    def norm(t: TypeLike) -> TypeLike:
        match t:
            case Arrow(dom, cod):
                dom = norm(dom)
                cod = norm(cod)
                if isinstance(dom, One):
                    return cod
                if isinstance(dom, Zero):
                    return One()
                if isinstance(dom, Sum):
                    return norm(mk_prod([Arrow(p, cod) for p in dom.parts]))
                if isinstance(dom, Prod):
                    out = cod
                    for p in reversed(dom.parts):
                        out = Arrow(p, out)
                    return norm(out)
                return Arrow(dom, cod)
            case Sum(parts):
                flat: list[TypeLike] = []
                for p in parts:
                    p = norm(p)
                    if isinstance(p, Sum):
                        flat.extend(p.parts)
                    elif isinstance(p, Zero):
                        continue
                    else:
                        flat.append(p)
                return mk_sum(flat)
            case Prod(parts):
                flat = []
                for p in parts:
                    p = norm(p)
                    if isinstance(p, Zero):
                        return Zero()
                    if isinstance(p, Prod):
                        flat.extend(p.parts)
                    elif isinstance(p, One):
                        continue
                    else:
                        flat.append(p)
                for i, p in enumerate(flat):
                    if isinstance(p, Sum):
                        rest = flat[:i] + flat[i + 1 :]
                        return norm(
                            mk_sum([mk_prod([q] + rest) for q in p.parts])
                        )
                return mk_prod(flat)
            case Mu(v, body):
                body = norm(body)
                if v not in free_vars(body):
                    return body
                return Mu(v, body)
            case Nu(v, body):
                body = norm(body)
                if v not in free_vars(body):
                    return body
                return Nu(v, body)
            case Exists(vs, body):
                body = norm(body)
                used = free_vars(body)
                kept = tuple(v for v in vs if v in used)
                if not kept:
                    return body
                return Exists(kept, body)
            case Forall(v, body):
                return Forall(v, norm(body))
            case _:
                return t

    prev = m
    for _ in range(1000):
        cur = norm(prev)
        if cur == prev:
            return cur
        prev = cur
    raise RuntimeError("simplification failed to stabilize")


def numeral_size(m: TypeLike) -> int:
    """Size of a numeral type: 0, 1, or an n-fold sum of 1."""
    match m:
        case Zero():
            return 0
        case One():
            return 1
        case Sum(parts) if all(isinstance(p, One) for p in parts):
            return len(parts)
    raise ValueError(f"not a numeral type: {m!r}")


def is_numeral(m: TypeLike) -> bool:
    try:
        numeral_size(m)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# Flattening a polymorphic type to a monomorphic one
# ---------------------------------------------------------------------------

def flat(a: Type) -> TypeLike:
    """Monomorphic image of a coherent polymorphic type: reduce the tree
    uniformly under the canonical valuation, then read the result back.

    Raises NotCoherent when no valuation exists (characteristic infinite).
    For characteristic zero the result has no mu, nu or exists."""
    e = tree_of_type(a)
    phi = find_valuation(e)
    if phi is None:
        raise NotCoherent(f"no coherent valuation for {a!r}")
    reduced, _trace = uniform_reduce(e, phi)
    return tau(reduced)


def count_inhabitants(a: Type):
    """Number of inhabitants of a closed type of characteristic zero, up to
    equivalence; NOT_FINITE when the criterion does not apply."""
    if not is_lambda2(a):
        raise TypeError("count_inhabitants expects a polymorphic (forall/arrow) type")
    if free_vars(a):
        raise OpenType(f"type has free variables: {sorted(free_vars(a))}")
    if characteristic_of_type(a) is not Characteristic.ZERO:
        return NOT_FINITE
    m = simplify_mono(flat(a))
    return numeral_size(m)


# ---------------------------------------------------------------------------
# Occurrence-counting predicates on simple types
# ---------------------------------------------------------------------------

def _require_simple(a: Type) -> None:
    if not is_simple_type(a):
        raise NotSimple(f"expected a quantifier-free arrow type, got {a!r}")


def _polarity_counts(a: Type, x: str) -> tuple[int, int]:
    occs = occurrences(a, x)
    blues = sum(1 for _, c in occs if c is Color.BLUE)
    reds = sum(1 for _, c in occs if c is Color.RED)
    return blues, reds


def balanced(a: Type) -> bool:
    """Every free variable occurs exactly once positively and once
    negatively."""
    _require_simple(a)
    return all(_polarity_counts(a, x) == (1, 1) for x in free_vars(a))


def negatively_non_duplicated(a: Type) -> bool:
    """No variable occurs twice negatively."""
    _require_simple(a)
    return all(_polarity_counts(a, x)[1] <= 1 for x in free_vars(a))


def positively_non_duplicated(a: Type) -> bool:
    """No variable occurs twice positively."""
    _require_simple(a)
    return all(_polarity_counts(a, x)[0] <= 1 for x in free_vars(a))


def simple_depth(a: Type) -> int:
    """d(X) = 0, d(A -> B) = max(d(A) + 1, d(B))."""
    _require_simple(a)
    match a:
        case Var(_):
            return 0
        case Arrow(dom, cod):
            return max(simple_depth(dom) + 1, simple_depth(cod))
    raise NotSimple(repr(a))


def forall_closure(a: Type) -> Type:
    """Universally close all free variables (sorted for determinism)."""
    out = a
    for x in sorted(free_vars(a), reverse=True):
        out = Forall(x, out)
    return out


# ---------------------------------------------------------------------------
# The second-order embedding of monomorphic types
# ---------------------------------------------------------------------------

def sharp(m: TypeLike) -> Type:
    """Standard polymorphic encoding, clause by clause:

    1 = forall X. X -> X;  0 = forall X. X;
    products and sums take a fresh result variable over their components;
    mu X. A = forall X. (A# -> X) -> X;
    nu X. A = forall Y. (forall X. X -> (X -> A#) -> Y) -> Y;
    exists is the usual double-negation shorthand.
    """
    supply = NameSupply(avoid=set(free_vars(m)) | _all_names(m))

    def go(t: TypeLike) -> Type:
        match t:
            case Var(_):
                return t
            case Arrow(dom, cod):
                return Arrow(go(dom), go(cod))
            case Forall(v, body):
                return Forall(v, go(body))
            case One():
                x = supply.fresh("X")
                return Forall(x, Arrow(Var(x), Var(x)))
            case Zero():
                x = supply.fresh("X")
                return Forall(x, Var(x))
            case Prod(parts):
                x = supply.fresh("X")
                inner: Type = Var(x)
                for p in reversed(parts):
                    inner = Arrow(go(p), inner)
                return Forall(x, Arrow(inner, Var(x)))
            case Sum(parts):
                x = supply.fresh("X")
                out: Type = Var(x)
                for p in reversed(parts):
                    out = Arrow(Arrow(go(p), Var(x)), out)
                return Forall(x, out)
            case Mu(v, body):
                return Forall(v, Arrow(Arrow(go(body), Var(v)), Var(v)))
            case Nu(v, body):
                y = supply.fresh("Y")
                inner = Forall(
                    v, Arrow(Var(v), Arrow(Arrow(Var(v), go(body)), Var(y)))
                )
                return Forall(y, Arrow(inner, Var(y)))
            case Exists(vs, body):
                y = supply.fresh("Y")
                inner = go(body)
                inner = Arrow(inner, Var(y))
                for v in reversed(vs):
                    inner = Forall(v, inner)
                return Forall(y, Arrow(inner, Var(y)))
        raise TypeError(f"not a type: {t!r}")

    return go(m)


def _all_names(m: TypeLike) -> set[str]:
    from .syntax import bound_vars

    return set(free_vars(m)) | set(bound_vars(m))
