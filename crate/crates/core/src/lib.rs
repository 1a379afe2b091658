//! Executable first-order logic over pluggable algebras.
//!
//! Formulas are programs: a substitution is the state of a computation,
//! equations assign by solving, conjunction sequences, disjunction
//! branches, an existential quantifier declares a local variable, and
//! negation succeeds exactly on finite failure. Where the uniform,
//! decidable rules cannot settle an equation, the distinguished `error`
//! state is the result rather than a wrong answer.
//!
//! The [`oracle`] module provides classical truth over finite
//! interpretations and randomized checks that evaluation is sound for it.

pub mod formula;
pub mod interp;
pub mod oracle;
pub mod semantics;
pub mod subst;
pub mod syntax;
pub mod term;

pub use formula::{validate_formula, Formula};
pub use interp::{
    AtomStatus, FiniteAlgebra, HerbrandAlgebra, IntegerAlgebra, Interpretation, InterpretationDoc,
    ModelError,
};
pub use semantics::{
    eval, eval_answers, eval_answers_with, eval_with, solve_equation, EvalAnswers, EvalOptions,
    Mutation, Outcome,
};
pub use subst::{
    apply_to_formula, compose, is_less_general, substitutions_equal, Answer, Substitution,
};
pub use syntax::{
    parse_formula, parse_formula_lenient, parse_subst, parse_term, parse_term_lenient,
    print_formula, print_outcome, print_subst, print_term, ParseError, SourceSpan,
};
pub use term::{
    evaluate, normal_terms_equal, validate_term, Algebra, DomainValue, FnSym, FreshSupply,
    GroundTerm, MalformedInput, NormalTerm, PredSym, Signature, Term, Variable,
};
