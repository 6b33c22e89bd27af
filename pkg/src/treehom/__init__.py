"""Weighted tree automata with equality constraints over commutative semirings.

The package models weighted tree grammars whose rules may force subtrees at
chosen positions to be equal, applies nondeleting and nonerasing tree
homomorphisms to them, and offers the constructions needed to study whether
a homomorphic image of a regular weighted tree series is again regular:
building the image automaton, eliminating zero divisors, projecting to the
boolean support, and linearizing constraints away.  Everything is backed by
bounded brute-force checkers so small instances can be verified exactly.
"""

from .analyze import bounded_equivalence, check_h_unambiguous, run_count_compare
from .automaton import (
    Automaton,
    AutomatonError,
    Evaluator,
    Rule,
    Run,
    RunsTable,
    accepting_runs,
    check_run,
    check_unambiguous,
    constraints_ok,
    eq_restriction_violation,
    evaluate,
    format_run,
    is_eq_restricted,
    make_rule,
    match_lhs,
    run_state_map,
    runs_to_state,
    state_language_up_to,
    state_weight,
    support_up_to,
)
from .construct import (
    automata_equal,
    canonical_form,
    canonical_rename,
    dickson_cap,
    eliminate_zero_divisors,
    hom_image,
    hom_image_annotated,
    linearize,
    project_boolean,
    relabel_symbols,
    run_image,
    wtg_to_wta,
)
from .decide import (
    EVIDENCE_REGULAR,
    LINEARIZATION_MISMATCH,
    ORACLE_NONREGULAR,
    ORACLE_REGULAR,
    PRECONDITION_VIOLATED,
    UNKNOWN,
    DecisionReport,
    SupportReduction,
    decide_hom_regularity,
    reduce_to_support,
)
from .hom import (
    HomError,
    TreeHomomorphism,
    apply_hom,
    check_tetris_free,
    preimage,
)
from .semiring import (
    ArcticSemiring,
    BooleanSemiring,
    IntegerSemiring,
    ModularSemiring,
    NaturalSemiring,
    Semiring,
    SemiringError,
    SemiringMismatch,
    TropicalSemiring,
    Weight,
    get_semiring,
    parse_weight,
    power_index_period,
)
from .term import (
    Position,
    RankedAlphabet,
    TermError,
    TermSyntaxError,
    Tree,
    count_trees,
    enumerate_trees,
    format_position,
    format_term,
    is_variable,
    lex_min_position,
    parse_position,
    parse_term,
    positions,
    positions_of_label,
    replace_at,
    subtree_at,
    substitute_vars,
    tree_key,
    variable,
)
from .verdict import Verdict

__version__ = "0.1.0"

__all__ = [
    "ArcticSemiring",
    "Automaton",
    "AutomatonError",
    "BooleanSemiring",
    "DecisionReport",
    "EVIDENCE_REGULAR",
    "Evaluator",
    "HomError",
    "IntegerSemiring",
    "LINEARIZATION_MISMATCH",
    "ModularSemiring",
    "NaturalSemiring",
    "ORACLE_NONREGULAR",
    "ORACLE_REGULAR",
    "PRECONDITION_VIOLATED",
    "Position",
    "RankedAlphabet",
    "Rule",
    "Run",
    "RunsTable",
    "Semiring",
    "SemiringError",
    "SemiringMismatch",
    "SupportReduction",
    "TermError",
    "TermSyntaxError",
    "Tree",
    "TreeHomomorphism",
    "TropicalSemiring",
    "UNKNOWN",
    "Verdict",
    "Weight",
    "accepting_runs",
    "apply_hom",
    "automata_equal",
    "bounded_equivalence",
    "canonical_form",
    "canonical_rename",
    "check_h_unambiguous",
    "check_run",
    "check_tetris_free",
    "check_unambiguous",
    "constraints_ok",
    "count_trees",
    "decide_hom_regularity",
    "dickson_cap",
    "eliminate_zero_divisors",
    "enumerate_trees",
    "evaluate",
    "format_position",
    "format_run",
    "format_term",
    "get_semiring",
    "hom_image",
    "hom_image_annotated",
    "is_eq_restricted",
    "is_variable",
    "lex_min_position",
    "linearize",
    "make_rule",
    "match_lhs",
    "parse_position",
    "parse_term",
    "parse_weight",
    "positions",
    "positions_of_label",
    "power_index_period",
    "preimage",
    "project_boolean",
    "reduce_to_support",
    "relabel_symbols",
    "replace_at",
    "run_count_compare",
    "run_image",
    "run_state_map",
    "runs_to_state",
    "state_language_up_to",
    "state_weight",
    "substitute_vars",
    "subtree_at",
    "support_up_to",
    "tree_key",
    "variable",
    "wtg_to_wta",
]
