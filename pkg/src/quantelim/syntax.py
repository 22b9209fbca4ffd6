"""Abstract syntax, parsing and printing for polymorphic and monomorphic types.

Two type languages share one AST:

* the polymorphic language: variables, arrows and `forall` binders;
* the monomorphic language: variables, arrows, finite sums and products,
  the constants 0 and 1, least/greatest fixpoints `mu`/`nu` and `exists`.

``Var`` and ``Arrow`` belong to both languages, so translations between the
two can reuse the same nodes.  All values are immutable; every operation is
a pure function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union


class Color(Enum):
    """Polarity of a variable occurrence: BLUE is positive, RED negative."""

    BLUE = "blue"
    RED = "red"

    def flip(self) -> "Color":
        return Color.RED if self is Color.BLUE else Color.BLUE


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Arrow:
    dom: "TypeLike"
    cod: "TypeLike"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "TypeLike"


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Sum:
    parts: tuple["TypeLike", ...]

    def __post_init__(self):
        assert len(self.parts) >= 2, "use Zero / the single part instead"


@dataclass(frozen=True)
class Prod:
    parts: tuple["TypeLike", ...]

    def __post_init__(self):
        assert len(self.parts) >= 2, "use One / the single part instead"


@dataclass(frozen=True)
class Mu:
    var: str
    body: "TypeLike"


@dataclass(frozen=True)
class Nu:
    var: str
    body: "TypeLike"


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    body: "TypeLike"


TypeLike = Union[Var, Arrow, Forall, Zero, One, Sum, Prod, Mu, Nu, Exists]
# The polymorphic fragment only ever uses these three constructors.
Type = Union[Var, Arrow, Forall]


def mk_sum(parts: list["TypeLike"]) -> "TypeLike":
    """n-ary sum with the unit collapses: nullary is 0, unary is the part."""
    if not parts:
        return Zero()
    if len(parts) == 1:
        return parts[0]
    return Sum(tuple(parts))


def mk_prod(parts: list["TypeLike"]) -> "TypeLike":
    if not parts:
        return One()
    if len(parts) == 1:
        return parts[0]
    return Prod(tuple(parts))


def subterms(t: TypeLike) -> Iterator[TypeLike]:
    """All subterms of t, including t itself (pre-order)."""
    yield t
    match t:
        case Arrow(dom, cod):
            yield from subterms(dom)
            yield from subterms(cod)
        case Forall(_, body) | Mu(_, body) | Nu(_, body) | Exists(_, body):
            yield from subterms(body)
        case Sum(parts) | Prod(parts):
            for p in parts:
                yield from subterms(p)
        case _:
            pass


def is_lambda2(t: TypeLike) -> bool:
    """True iff t uses only Var/Arrow/Forall."""
    return all(isinstance(s, (Var, Arrow, Forall)) for s in subterms(t))


def is_simple_type(t: TypeLike) -> bool:
    """True iff t is quantifier-free and arrow-only (a simple type)."""
    return all(isinstance(s, (Var, Arrow)) for s in subterms(t))


def is_mono(t: TypeLike) -> bool:
    """True iff t has no Forall."""
    return not any(isinstance(s, Forall) for s in subterms(t))


def free_vars(t: TypeLike) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset({name})
        case Arrow(dom, cod):
            return free_vars(dom) | free_vars(cod)
        case Forall(v, body) | Mu(v, body) | Nu(v, body):
            return free_vars(body) - {v}
        case Exists(vs, body):
            return free_vars(body) - set(vs)
        case Sum(parts) | Prod(parts):
            out: frozenset[str] = frozenset()
            for p in parts:
                out |= free_vars(p)
            return out
        case _:
            return frozenset()


def bound_vars(t: TypeLike) -> frozenset[str]:
    out: set[str] = set()
    for s in subterms(t):
        match s:
            case Forall(v, _) | Mu(v, _) | Nu(v, _):
                out.add(v)
            case Exists(vs, _):
                out.update(vs)
            case _:
                pass
    return frozenset(out)


class NameSupply:
    """Deterministic fresh-name generator, scoped per invocation.

    Names are base + positive integer suffix; the base of e.g. ``X12`` is
    ``X``.  Each base counts up independently, skipping anything in
    ``avoid``.
    """

    _base_re = re.compile(r"^(.*?)[0-9]*$")

    def __init__(self, avoid: set[str] | frozenset[str] = frozenset()):
        self._avoid = set(avoid)
        self._next: dict[str, int] = {}

    @classmethod
    def base_of(cls, name: str) -> str:
        m = cls._base_re.match(name)
        return m.group(1) if m and m.group(1) else name

    def fresh(self, like: str) -> str:
        base = self.base_of(like)
        n = self._next.get(base, 1)
        while f"{base}{n}" in self._avoid:
            n += 1
        self._next[base] = n + 1
        name = f"{base}{n}"
        self._avoid.add(name)
        return name

    def reserve(self, names) -> None:
        self._avoid.update(names)


def freshen(t: TypeLike, supply: NameSupply | None = None) -> TypeLike:
    """Rename all binders so they are pairwise distinct and avoid free names.

    The result is alpha-equivalent to t and satisfies the Barendregt
    convention.  Renaming is deterministic: binders are renumbered in
    pre-order with per-base counters.
    """
    if supply is None:
        supply = NameSupply(avoid=set(free_vars(t)))

    def go(t: TypeLike, env: dict[str, str]) -> TypeLike:
        match t:
            case Var(name):
                return Var(env.get(name, name))
            case Arrow(dom, cod):
                return Arrow(go(dom, env), go(cod, env))
            case Forall(v, body):
                v2 = supply.fresh(v)
                return Forall(v2, go(body, {**env, v: v2}))
            case Mu(v, body):
                v2 = supply.fresh(v)
                return Mu(v2, go(body, {**env, v: v2}))
            case Nu(v, body):
                v2 = supply.fresh(v)
                return Nu(v2, go(body, {**env, v: v2}))
            case Exists(vs, body):
                vs2 = tuple(supply.fresh(v) for v in vs)
                return Exists(vs2, go(body, {**env, **dict(zip(vs, vs2))}))
            case Sum(parts):
                return Sum(tuple(go(p, env) for p in parts))
            case Prod(parts):
                return Prod(tuple(go(p, env) for p in parts))
            case _:
                return t

    return go(t, {})


def subst(t: TypeLike, x: str, s: TypeLike) -> TypeLike:
    """Capture-avoiding substitution of s for free occurrences of x in t."""
    s_free = free_vars(s)

    def rename_binder(v: str, body: TypeLike, taken) -> tuple[str, TypeLike]:
        supply = NameSupply(avoid=set(taken) | free_vars(body) | {x, v})
        v2 = supply.fresh(v)
        return v2, plain_rename(body, v, v2)

    def go(t: TypeLike) -> TypeLike:
        match t:
            case Var(name):
                return s if name == x else t
            case Arrow(dom, cod):
                return Arrow(go(dom), go(cod))
            case Forall(v, body):
                if v == x:
                    return t
                if v in s_free and x in free_vars(body):
                    v, body = rename_binder(v, body, s_free)
                return Forall(v, go(body))
            case Mu(v, body):
                if v == x:
                    return t
                if v in s_free and x in free_vars(body):
                    v, body = rename_binder(v, body, s_free)
                return Mu(v, go(body))
            case Nu(v, body):
                if v == x:
                    return t
                if v in s_free and x in free_vars(body):
                    v, body = rename_binder(v, body, s_free)
                return Nu(v, go(body))
            case Exists(vs, body):
                if x in vs:
                    return t
                if (set(vs) & s_free) and x in free_vars(body):
                    supply = NameSupply(avoid=set(s_free) | free_vars(body) | {x} | set(vs))
                    vs2 = []
                    for v in vs:
                        if v in s_free:
                            v2 = supply.fresh(v)
                            body = plain_rename(body, v, v2)
                            vs2.append(v2)
                        else:
                            vs2.append(v)
                    vs = tuple(vs2)
                return Exists(tuple(vs), go(body))
            case Sum(parts):
                return Sum(tuple(go(p) for p in parts))
            case Prod(parts):
                return Prod(tuple(go(p) for p in parts))
            case _:
                return t

    return go(t)


def plain_rename(t: TypeLike, old: str, new: str) -> TypeLike:
    """Rename free occurrences of old to new (new assumed not captured)."""
    return subst(t, old, Var(new)) if old != new else t


def occurrences(t: TypeLike, x: str, _path: tuple[str, ...] = (), _col: Color = Color.BLUE):
    """Free occurrences of x in t as (path, polarity) pairs.

    Polarity flips on arrow domains and is preserved elsewhere.  Path steps
    are "dom", "cod", "body" and "part0", "part1", ...
    """
    out: list[tuple[tuple[str, ...], Color]] = []
    match t:
        case Var(name):
            if name == x:
                out.append((_path, _col))
        case Arrow(dom, cod):
            out += occurrences(dom, x, _path + ("dom",), _col.flip())
            out += occurrences(cod, x, _path + ("cod",), _col)
        case Forall(v, body) | Mu(v, body) | Nu(v, body):
            if v != x:
                out += occurrences(body, x, _path + ("body",), _col)
        case Exists(vs, body):
            if x not in vs:
                out += occurrences(body, x, _path + ("body",), _col)
        case Sum(parts) | Prod(parts):
            for i, p in enumerate(parts):
                out += occurrences(p, x, _path + (f"part{i}",), _col)
        case _:
            pass
    return out


def alpha_eq(a: TypeLike, b: TypeLike) -> bool:
    """Alpha-equivalence (binder names ignored, everything else literal)."""

    def go(a, b, env_a: dict, env_b: dict) -> bool:
        match a, b:
            case Var(x), Var(y):
                ra, rb = env_a.get(x, ("free", x)), env_b.get(y, ("free", y))
                return ra == rb
            case Arrow(d1, c1), Arrow(d2, c2):
                return go(d1, d2, env_a, env_b) and go(c1, c2, env_a, env_b)
            case (Forall(v1, b1), Forall(v2, b2)) | (Mu(v1, b1), Mu(v2, b2)) | (
                Nu(v1, b1),
                Nu(v2, b2),
            ):
                lvl = len(env_a)
                return go(b1, b2, {**env_a, v1: ("b", lvl)}, {**env_b, v2: ("b", lvl)})
            case Exists(vs1, b1), Exists(vs2, b2):
                if len(vs1) != len(vs2):
                    return False
                lvl = len(env_a)
                ea = {**env_a, **{v: ("b", lvl + i) for i, v in enumerate(vs1)}}
                eb = {**env_b, **{v: ("b", lvl + i) for i, v in enumerate(vs2)}}
                return go(b1, b2, ea, eb)
            case (Sum(p1), Sum(p2)) | (Prod(p1), Prod(p2)):
                return len(p1) == len(p2) and all(
                    go(x, y, env_a, env_b) for x, y in zip(p1, p2)
                )
            case Zero(), Zero():
                return True
            case One(), One():
                return True
            case _:
                return False

    return go(a, b, {}, {})


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class ParseError(Exception):
    def __init__(self, msg: str, pos: int, expected: tuple[str, ...] = ()):
        super().__init__(f"{msg} at position {pos}" + (f" (expected one of: {', '.join(expected)})" if expected else ""))
        self.pos = pos
        self.expected = expected


_TOKEN_RE = re.compile(r"\s*(->|[A-Za-z][A-Za-z0-9_']*|[()+*.01])")

KEYWORDS = ("forall", "mu", "nu", "exists")
MONO_ONLY = ("0", "1", "+", "*", "mu", "nu", "exists")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    """Recursive descent over the shared grammar.

    type  := "forall" ident+ "." type | arrow
    arrow := sum ("->" arrow)?
    sum   := prod ("+" prod)*
    prod  := atom ("*" atom)*
    atom  := ident | "0" | "1" | "(" type ")"
           | ("mu"|"nu") ident "." type | "exists" ident+ "." type
    """

    def __init__(self, text: str, allow_forall: bool, allow_mono: bool):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.allow_forall = allow_forall
        self.allow_mono = allow_mono

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def advance(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str):
        if self.peek() != tok:
            raise ParseError(f"got {self.peek()!r}", self.pos(), expected=(tok,))
        self.advance()

    def ident(self) -> str:
        tok = self.peek()
        if tok is None or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_']*", tok) or tok in KEYWORDS:
            raise ParseError(f"got {tok!r}", self.pos(), expected=("identifier",))
        return self.advance()

    def reject_mono(self, tok: str):
        if not self.allow_mono and tok in MONO_ONLY:
            raise ParseError(
                f"{tok!r} is not part of the polymorphic type grammar", self.pos(),
                expected=("identifier", "forall", "("),
            )

    def type_(self) -> TypeLike:
        if self.peek() == "forall":
            if not self.allow_forall:
                raise ParseError("'forall' is not allowed in monomorphic types", self.pos())
            self.advance()
            names = [self.ident()]
            while self.peek() not in (".", None):
                names.append(self.ident())
            self.expect(".")
            body = self.type_()
            for v in reversed(names):
                body = Forall(v, body)
            return body
        return self.arrow()

    def arrow(self) -> TypeLike:
        left = self.sum()
        if self.peek() == "->":
            self.advance()
            # binders may start the codomain: "A -> forall X. B"
            return Arrow(left, self.type_())
        return left

    def sum(self) -> TypeLike:
        parts = [self.prod()]
        while self.peek() == "+":
            self.reject_mono("+")
            self.advance()
            parts.append(self.prod())
        return mk_sum(parts)

    def prod(self) -> TypeLike:
        parts = [self.atom()]
        while self.peek() == "*":
            self.reject_mono("*")
            self.advance()
            parts.append(self.atom())
        return mk_prod(parts)

    def atom(self) -> TypeLike:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.pos(), expected=("identifier", "("))
        self.reject_mono(tok)
        if tok == "(":
            self.advance()
            t = self.type_()
            self.expect(")")
            return t
        if tok == "0":
            self.advance()
            return Zero()
        if tok == "1":
            self.advance()
            return One()
        if tok in ("mu", "nu"):
            self.advance()
            v = self.ident()
            self.expect(".")
            body = self.type_()
            return Mu(v, body) if tok == "mu" else Nu(v, body)
        if tok == "exists":
            self.advance()
            names = [self.ident()]
            while self.peek() not in (".", None):
                names.append(self.ident())
            self.expect(".")
            return Exists(tuple(names), self.type_())
        return Var(self.ident())

    def run(self) -> TypeLike:
        t = self.type_()
        if self.i != len(self.tokens):
            raise ParseError(f"trailing input {self.peek()!r}", self.pos(), expected=("end of input",))
        return t


def parse_type(text: str) -> TypeLike:
    """Parse a polymorphic type (rejects 0, 1, +, *, mu, nu, exists)."""
    return _Parser(text, allow_forall=True, allow_mono=False).run()


def parse_monotype(text: str) -> TypeLike:
    """Parse a monomorphic type (rejects forall)."""
    return _Parser(text, allow_forall=False, allow_mono=True).run()


def parse_any(text: str) -> TypeLike:
    """Parse allowing the union of both grammars."""
    return _Parser(text, allow_forall=True, allow_mono=True).run()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# precedence levels: 0 arrow/binders, 1 sum, 2 prod, 3 atom
def _print(t: TypeLike, prec: int) -> str:
    def paren_if(cond: bool, s: str) -> str:
        return f"({s})" if cond else s

    match t:
        case Var(name):
            return name
        case Zero():
            return "0"
        case One():
            return "1"
        case Arrow(dom, cod):
            s = f"{_print(dom, 1)} -> {_print(cod, 0)}"
            return paren_if(prec > 0, s)
        case Forall(_, _):
            names = []
            body = t
            while isinstance(body, Forall):
                names.append(body.var)
                body = body.body
            s = f"forall {' '.join(names)}. {_print(body, 0)}"
            return paren_if(prec > 0, s)
        case Mu(v, body):
            return paren_if(prec > 0, f"mu {v}. {_print(body, 0)}")
        case Nu(v, body):
            return paren_if(prec > 0, f"nu {v}. {_print(body, 0)}")
        case Exists(vs, body):
            return paren_if(prec > 0, f"exists {' '.join(vs)}. {_print(body, 0)}")
        case Sum(parts):
            s = " + ".join(_print(p, 2) for p in parts)
            return paren_if(prec > 1, s)
        case Prod(parts):
            s = " * ".join(_print(p, 3) for p in parts)
            return paren_if(prec > 2, s)
    raise TypeError(f"not a type: {t!r}")


def print_type(t: TypeLike) -> str:
    """Render with minimal parentheses; parse_* round-trips up to alpha."""
    return _print(t, 0)
