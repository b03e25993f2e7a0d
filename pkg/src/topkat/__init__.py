"""Equational program reasoning with KAT, TopKAT and FailTopKAT.

The package decides equivalence of KAT/TopKAT terms by top elimination plus
guarded-string derivatives, encodes Hoare and incorrectness triples as term
claims, evaluates everything over finite relational models, and extends both
to programs with an explicit failure element.
"""

from .atoms import (
    Atom,
    AtomCapError,
    GuardedString,
    coalesce,
    enumerate_atoms,
    eval_test,
    gs_member,
    language_up_to,
    render_guarded_string,
    top_language_up_to,
)
from .engine import ReducedTerm, Verdict, decide_claim, decide_equal, decide_leq, reduce_top
from .failtopkat import (
    ErrorCode,
    FailVerdict,
    SplitPair,
    decide_fail_equal,
    decide_fail_leq,
    eval_fail,
    split,
)
from .logic import (
    EquationalResult,
    ModelStrategy,
    Rule,
    RuleReport,
    Triple,
    check_figure,
    check_rule,
    check_triple_equational,
    check_triple_in_model,
    encode_hoare,
    encode_incorrectness,
    kat_expressibility_experiment,
    parse_triple,
    rules_for_figure,
)
from .relmodels import (
    Countermodel,
    ModelError,
    RelationalModel,
    check_triple_semantic,
    codomain,
    enumerate_models,
    eval_term,
    find_countermodel,
    model_from_json,
    model_to_json,
    random_model,
)
from .syntax import (
    Act,
    Alphabet,
    Claim,
    Fail,
    Not,
    One,
    ParseError,
    Plus,
    Seq,
    Star,
    Term,
    TermKind,
    Test,
    Top,
    TopkatError,
    ValidationError,
    Zero,
    desugar,
    occurring_primitives,
    parse_claim,
    parse_term,
    print_term,
    validate,
)

__version__ = "0.1.0"
