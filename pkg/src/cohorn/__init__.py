"""Proof-relevant resolution for Horn clause logic with corecursive
evidence for divergent term-matching derivations."""

from .corec import (
    AutoReport,
    DIRECTLY_PROVEN,
    INCONCLUSIVE,
    LEMMA_UNPROVABLE,
    NO_LOOP_FOUND,
    PROVEN,
    ProofConfig,
    auto,
    prove_horn,
    wf_check,
)
from .evidence import (
    ObservationRecord,
    SimpleLoop,
    TypingContext,
    check_obs_equiv,
    corecursive_points,
    detect_simple_loop,
    ev_step,
    hnf,
    observational_points,
    type_check,
    whnf,
)
from .loopdetect import (
    AbstractTree,
    CandidateLemma,
    ClosedSubtree,
    CriticalTriple,
    NoClosedSubtree,
    Projection,
    abstract_representation,
    candidate_lemma,
    closed_subtree,
    find_critical_triples,
    paterson_ok,
    projection,
)
from .parser import ParseError, ScopeError, SourceModule, parse_atom, parse_module, render
from .resolve import (
    AxiomEnv,
    Entry,
    EntryKind,
    Fuel,
    FuelExhausted,
    GuardViolation,
    OverlapError,
    ResolutionTree,
    Stuck,
    axiom,
    build_tree,
    cohypothesis,
    hypothesis,
    lemma,
    resolve,
    step,
    trace,
)
from .syntax import (
    App,
    Atom,
    Const,
    EApp,
    EAxiom,
    ELam,
    EMu,
    EVar,
    Eigen,
    Evidence,
    Hole,
    HornFormula,
    MAtom,
    PredicateMismatch,
    Term,
    Var,
    alpha_equal,
    anti_unify,
    anti_unify_all,
    apply,
    compose,
    fact,
    free_vars,
    match,
    mk_app,
    mk_eapp,
    pair,
    symbol_multiset,
    var_multiset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
