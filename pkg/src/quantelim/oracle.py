"""Brute-force counting of normal inhabitants of simple types.

Goal-directed search in the Ben-Yelles style: to inhabit
``A1 -> ... -> An -> X``, abstract over the premises, pick any hypothesis
whose head is X, and inhabit its arguments recursively.  Counting is over
beta-normal eta-long terms, which coincide with equivalence classes of
inhabitants for simple types.  Free variables are treated as opaque atoms.

Used as independent ground truth for the type-isomorphism counting pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import Arrow, Type, Var, is_simple_type, print_type


class NotSimpleGoal(Exception):
    pass


@dataclass(frozen=True)
class OracleResult:
    count: int
    complete: bool


def _split(t: Type) -> tuple[tuple[Type, ...], str]:
    premises = []
    while isinstance(t, Arrow):
        premises.append(t.dom)
        t = t.cod
    if not isinstance(t, Var):
        raise NotSimpleGoal(f"head of a simple type must be a variable: {t!r}")
    return tuple(premises), t.name


def _sequent_key(atom: str, hyps: tuple[Type, ...]) -> tuple:
    return (atom, tuple(sorted(print_type(h) for h in hyps)))


def enumerate_inhabitants(a: Type, depth_bound: int = 16) -> OracleResult:
    """Count distinct normal inhabitants of a quantifier-free type.

    A branch whose sequent (goal atom plus hypothesis multiset) repeats on
    the search path is cut off: any term it produced could be pumped into
    infinitely many, so for a finite count it must be uninhabited.  The
    result is complete when no branch hit the depth bound and every cut
    sequent is provably uninhabited; otherwise raise the bound.
    """
    if not is_simple_type(a):
        raise NotSimpleGoal(f"expected a quantifier-free arrow type, got {a!r}")

    state = {"incomplete": False}
    cut: list[tuple[str, tuple[Type, ...]]] = []

    def count(goal: Type, hyps: tuple[Type, ...], path: frozenset, depth: int) -> int:
        premises, atom = _split(goal)
        hyps2 = hyps + premises
        key = _sequent_key(atom, hyps2)
        if key in path:
            cut.append((atom, hyps2))
            return 0
        if depth > depth_bound:
            state["incomplete"] = True
            return 0
        path = path | {key}
        total = 0
        for h in hyps2:  # duplicates are distinct variables: keep multiplicity
            hprem, hatom = _split(h)
            if hatom != atom:
                continue
            prod = 1
            for b in hprem:
                prod *= count(b, hyps2, path, depth + 1)
                if prod == 0:
                    break
            total += prod
        return total

    n = count(a, (), frozenset(), 0)
    complete = not state["incomplete"] and all(
        not _inhabited(atom, hyps) for atom, hyps in cut
    )
    return OracleResult(count=n, complete=complete)


def _inhabited(atom: str, hyps: tuple[Type, ...]) -> bool:
    """Decision procedure for inhabitation of simple-type sequents; the
    loop check makes this one terminating and exact."""
    memo: dict[tuple, bool] = {}

    def prove(goal: Type, hyps: tuple[Type, ...], path: frozenset) -> bool:
        premises, g_atom = _split(goal)
        hyps2 = hyps + premises
        key = _sequent_key(g_atom, hyps2)
        if key in memo:
            return memo[key]
        if key in path:
            return False
        path = path | {key}
        for h in set(hyps2):
            hprem, hatom = _split(h)
            if hatom != g_atom:
                continue
            if all(prove(b, hyps2, path) for b in hprem):
                memo[key] = True
                return True
        return False

    return prove(Var(atom), hyps, frozenset())


def count_closure_inhabitants(a: Type, depth_bound: int = 16) -> OracleResult:
    """Inhabitants of the universal closure of a simple type: the same as
    counting with the free variables held abstract."""
    return enumerate_inhabitants(a, depth_bound)
