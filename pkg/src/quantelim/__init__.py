"""Analysis toolkit for System F types: isomorphism, quantifier
elimination over a tree representation, characteristic computation and
inhabitant counting."""

from .coherence import (
    Characteristic,
    characteristic,
    characteristic_of_type,
    coherent_pair,
    down_moves,
    find_valuation,
    has_cyclic_alternating_path,
    is_coherent,
    up_moves,
)
from .finite import (
    NOT_FINITE,
    balanced,
    count_inhabitants,
    flat,
    negatively_non_duplicated,
    positively_non_duplicated,
    sharp,
    simple_depth,
    simplify_mono,
)
from .normform import iso_beta_eta, nf, sim
from .oracle import enumerate_inhabitants
from .polytree import (
    PolyTree,
    is_simple,
    tau,
    to_dot,
    tree_equal,
    tree_of_type,
    type_of_tree,
)
from .syntax import (
    Arrow,
    Color,
    Exists,
    Forall,
    Mu,
    Nu,
    One,
    Prod,
    Sum,
    Var,
    Zero,
    parse_monotype,
    parse_type,
    print_type,
    subst,
)
from .yoneda import (
    decompose,
    is_c_eliminable,
    is_eliminable,
    is_modular,
    measure,
    reduce_step,
    standard_reduce,
    uniform_reduce,
)

__all__ = [
    "Arrow",
    "Characteristic",
    "Color",
    "Exists",
    "Forall",
    "Mu",
    "NOT_FINITE",
    "Nu",
    "One",
    "PolyTree",
    "Prod",
    "Sum",
    "Var",
    "Zero",
    "balanced",
    "characteristic",
    "characteristic_of_type",
    "coherent_pair",
    "count_inhabitants",
    "decompose",
    "down_moves",
    "enumerate_inhabitants",
    "find_valuation",
    "flat",
    "has_cyclic_alternating_path",
    "is_c_eliminable",
    "is_coherent",
    "is_eliminable",
    "is_modular",
    "is_simple",
    "iso_beta_eta",
    "measure",
    "negatively_non_duplicated",
    "nf",
    "parse_monotype",
    "parse_type",
    "positively_non_duplicated",
    "print_type",
    "reduce_step",
    "sharp",
    "sim",
    "simple_depth",
    "simplify_mono",
    "standard_reduce",
    "subst",
    "tau",
    "to_dot",
    "tree_equal",
    "tree_of_type",
    "type_of_tree",
    "uniform_reduce",
    "up_moves",
]
