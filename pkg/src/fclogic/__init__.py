"""FC logic engine: model checking and query evaluation over the factors of a word.

The universe of discourse is Fac(w), the set of all factors (contiguous
subwords) of one host word w, named by the reserved universe variable ``u``.
Subpackages cover the core data model, formula syntax, two evaluation
engines, regular constraints, static pattern optimization, closure and
fixed-point operators, Datalog over factors, translations to neighboring
logics, document spanners, and a command-line front end.
"""

from fclogic.core import (
    Alphabet,
    EqualityOracle,
    FactorRef,
    Relation,
    Substitution,
    Word,
    build_oracle,
    canonicalize,
    count_factors,
    enumerate_factors,
)
from fclogic.syntax import parse, print_formula, free_vars, width, classify
from fclogic.evaluator import eval_naive, eval_relation_naive, eval_bottomup, solve_equation

__all__ = [
    "Alphabet",
    "EqualityOracle",
    "FactorRef",
    "Relation",
    "Substitution",
    "Word",
    "build_oracle",
    "canonicalize",
    "count_factors",
    "enumerate_factors",
    "parse",
    "print_formula",
    "free_vars",
    "width",
    "classify",
    "eval_naive",
    "eval_relation_naive",
    "eval_bottomup",
    "solve_equation",
]
