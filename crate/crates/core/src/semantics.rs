//! The evaluator.
//!
//! A formula, read as a program, transforms a state (a substitution) into
//! an outcome: a set of successor states, possibly together with the
//! distinguished `error` element signalling that solvability could not be
//! determined by the uniform, decidable rules. Conjunction is sequential
//! composition, disjunction is nondeterministic choice, an existential
//! quantifier declares a local variable, and negation follows the
//! negation-as-finite-failure reading.

use std::fmt;

use crate::formula::{require_user_variables, validate_formula, Formula};
use crate::interp::{AtomStatus, Interpretation};
use crate::subst::{apply_to_formula, compose, substitutions_equal, Answer, Substitution};
use crate::term::{
    evaluate_unchecked, normal_terms_equal, validate_term, Algebra, FreshSupply, MalformedInput,
    NormalTerm, Term, Variable,
};

/// Deliberate evaluator corruptions, used to demonstrate that the
/// verification suites actually detect wrong semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Treat a ground equation with distinct values as satisfied.
    AcceptGroundMismatch,
    /// Report finite failure where negation is actually undetermined.
    NegationErrorAsFailure,
    /// Keep local bindings when leaving the scope of a quantifier.
    SkipDrop,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EvalOptions {
    pub mutation: Option<Mutation>,
}

/// The meaning of a formula at a state: successor substitutions in
/// discovery order, deduplicated, plus an error flag. The error element
/// prints last.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    substitutions: Vec<Substitution>,
    error: bool,
}

impl Outcome {
    pub fn substitutions(&self) -> &[Substitution] {
        &self.substitutions
    }

    pub fn has_error(&self) -> bool {
        self.error
    }

    /// True iff the outcome is the empty set: finite failure.
    pub fn is_failure(&self) -> bool {
        self.substitutions.is_empty() && !self.error
    }

    /// Removes `x` from every member, then deduplicates; error is
    /// preserved.
    pub fn drop_variable(&self, x: &Variable, algebra: &dyn Algebra) -> Outcome {
        let mut out = Outcome {
            substitutions: Vec::new(),
            error: self.error,
        };
        for theta in &self.substitutions {
            let dropped = theta.without(x);
            if !out
                .substitutions
                .iter()
                .any(|s| substitutions_equal(s, &dropped, algebra))
            {
                out.substitutions.push(dropped);
            }
        }
        out
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.substitutions.is_empty() && !self.error {
            return write!(f, "false");
        }
        let mut first = true;
        for theta in &self.substitutions {
            if !first {
                writeln!(f)?;
            }
            write!(f, "{}", theta)?;
            first = false;
        }
        if self.error {
            if !first {
                writeln!(f)?;
            }
            write!(f, "error")?;
        }
        Ok(())
    }
}

/// Like [`Outcome`], but each success also carries its computed answer:
/// the delta `gamma` with `full = compose(initial, gamma)`.
#[derive(Clone, Debug, Default)]
pub struct EvalAnswers {
    pub answers: Vec<Answer>,
    pub error: bool,
}

impl EvalAnswers {
    fn push(&mut self, answer: Answer, algebra: &dyn Algebra) {
        if !self
            .answers
            .iter()
            .any(|a| substitutions_equal(&a.full, &answer.full, algebra))
        {
            self.answers.push(answer);
        }
    }

    fn merge(&mut self, other: EvalAnswers, algebra: &dyn Algebra) {
        for answer in other.answers {
            self.push(answer, algebra);
        }
        self.error |= other.error;
    }

    fn error_only() -> Self {
        EvalAnswers {
            answers: Vec::new(),
            error: true,
        }
    }

    pub fn outcome(&self) -> Outcome {
        Outcome {
            substitutions: self.answers.iter().map(|a| a.full.clone()).collect(),
            error: self.error,
        }
    }
}

/// Solves `s = t` at state `theta`. The cases are tried in order:
///
/// 1. `s theta` is a variable not occurring in `t theta`: bind it;
/// 2. symmetrically for `t theta` when `s theta` is not a variable;
/// 3. the two sides evaluate to identical normal terms: succeed;
/// 4. both sides are ground with distinct values: fail;
/// 5. otherwise the outcome is the error state.
///
/// Unsolvability never raises; only structural problems with the input do.
pub fn solve_equation(
    s: &Term,
    t: &Term,
    theta: &Substitution,
    interp: &Interpretation,
) -> Result<Outcome, MalformedInput> {
    solve_equation_with(s, t, theta, interp, EvalOptions::default())
}

pub fn solve_equation_with(
    s: &Term,
    t: &Term,
    theta: &Substitution,
    interp: &Interpretation,
    options: EvalOptions,
) -> Result<Outcome, MalformedInput> {
    let algebra = interp.algebra();
    validate_term(s, algebra)?;
    validate_term(t, algebra)?;
    validate_substitution(theta, algebra)?;
    let state = Answer::initial(theta.clone());
    Ok(equation_cases(s, t, &state, algebra, options).outcome())
}

fn validate_substitution(
    theta: &Substitution,
    algebra: &dyn Algebra,
) -> Result<(), MalformedInput> {
    theta
        .iter()
        .try_for_each(|(_, h)| validate_term(h.as_term(), algebra))
}

fn extend(state: &Answer, var: Variable, range: NormalTerm, algebra: &dyn Algebra) -> Answer {
    let step = Substitution::singleton(var, range);
    Answer {
        full: compose(&state.full, &step, algebra),
        delta: compose(&state.delta, &step, algebra),
    }
}

fn equation_cases(
    s: &Term,
    t: &Term,
    state: &Answer,
    algebra: &dyn Algebra,
    options: EvalOptions,
) -> EvalAnswers {
    let theta = &state.full;
    let s_inst = theta.apply(s);
    let t_inst = theta.apply(t);

    if let Term::Var(x) = &s_inst {
        if !t_inst.occurs(x) {
            let range = evaluate_unchecked(&t_inst, algebra);
            let mut out = EvalAnswers::default();
            out.push(extend(state, x.clone(), range, algebra), algebra);
            return out;
        }
    }
    if let Term::Var(y) = &t_inst {
        if !s_inst.is_var() && !s_inst.occurs(y) {
            let range = evaluate_unchecked(&s_inst, algebra);
            let mut out = EvalAnswers::default();
            out.push(extend(state, y.clone(), range, algebra), algebra);
            return out;
        }
    }
    let s_normal = evaluate_unchecked(&s_inst, algebra);
    let t_normal = evaluate_unchecked(&t_inst, algebra);
    if normal_terms_equal(&s_normal, &t_normal, algebra) {
        let mut out = EvalAnswers::default();
        out.push(state.clone(), algebra);
        return out;
    }
    if s_inst.is_ground() && t_inst.is_ground() {
        if options.mutation == Some(Mutation::AcceptGroundMismatch) {
            let mut out = EvalAnswers::default();
            out.push(state.clone(), algebra);
            return out;
        }
        return EvalAnswers::default();
    }
    EvalAnswers::error_only()
}

struct Engine<'a> {
    interp: &'a Interpretation,
    supply: &'a mut FreshSupply,
    options: EvalOptions,
}

impl Engine<'_> {
    fn algebra(&self) -> &dyn Algebra {
        self.interp.algebra()
    }

    fn eval(&mut self, phi: &Formula, state: &Answer) -> EvalAnswers {
        match phi {
            Formula::Equation(s, t) => equation_cases(s, t, state, self.algebra(), self.options),
            Formula::Atom(p, args) => {
                let status = self
                    .interp
                    .atom_status(p, args, &state.full)
                    .expect("formula validated before evaluation");
                let mut out = EvalAnswers::default();
                match status {
                    AtomStatus::True => out.push(state.clone(), self.algebra()),
                    AtomStatus::False => {}
                    AtomStatus::Nonground => out.error = true,
                }
                out
            }
            Formula::And(a, b) => {
                // the meaning of b, applied to every element of a's outcome
                let first = self.eval(a, state);
                let mut out = EvalAnswers {
                    answers: Vec::new(),
                    error: first.error,
                };
                for mid in &first.answers {
                    let second = self.eval(b, mid);
                    out.merge(second, self.algebra());
                }
                out
            }
            Formula::Or(a, b) => {
                let mut out = self.eval(a, state);
                let right = self.eval(b, state);
                out.merge(right, self.algebra());
                out
            }
            Formula::Not(a) => {
                let sub = self.eval(a, state);
                let mut out = EvalAnswers::default();
                if sub.answers.is_empty() && !sub.error {
                    out.push(state.clone(), self.algebra());
                } else if sub
                    .answers
                    .iter()
                    .any(|m| substitutions_equal(&m.full, &state.full, self.algebra()))
                {
                    // finite failure of the negation
                } else if self.options.mutation == Some(Mutation::NegationErrorAsFailure) {
                    // mutated: report failure instead of the error state
                } else {
                    out.error = true;
                }
                out
            }
            Formula::Exists(x, body) => {
                let fresh = self.supply.fresh();
                let rename =
                    Substitution::singleton(x.clone(), NormalTerm::variable(fresh.clone()));
                let renamed = apply_to_formula(body, &rename, self.supply);
                let inner = self.eval(&renamed, state);
                if self.options.mutation == Some(Mutation::SkipDrop) {
                    return inner;
                }
                let mut out = EvalAnswers {
                    answers: Vec::new(),
                    error: inner.error,
                };
                for answer in inner.answers {
                    let dropped = Answer {
                        full: answer.full.without(&fresh),
                        delta: answer.delta.without(&fresh),
                    };
                    out.push(dropped, self.algebra());
                }
                out
            }
        }
    }
}

/// Evaluates `phi` at state `theta`. Only structural problems (unknown
/// symbols, arity clashes, reserved variables) are reported as errors; the
/// semantic error state is part of the returned outcome.
pub fn eval(
    phi: &Formula,
    theta: &Substitution,
    interp: &Interpretation,
    supply: &mut FreshSupply,
) -> Result<Outcome, MalformedInput> {
    eval_with(phi, theta, interp, supply, EvalOptions::default())
}

pub fn eval_with(
    phi: &Formula,
    theta: &Substitution,
    interp: &Interpretation,
    supply: &mut FreshSupply,
    options: EvalOptions,
) -> Result<Outcome, MalformedInput> {
    Ok(answers_with(phi, theta, interp, supply, options)?.outcome())
}

/// Evaluates `phi` at `theta`, pairing every success with its computed
/// answer delta.
pub fn eval_answers(
    phi: &Formula,
    theta: &Substitution,
    interp: &Interpretation,
) -> Result<EvalAnswers, MalformedInput> {
    let mut supply = FreshSupply::new();
    answers_with(phi, theta, interp, &mut supply, EvalOptions::default())
}

pub fn eval_answers_with(
    phi: &Formula,
    theta: &Substitution,
    interp: &Interpretation,
    options: EvalOptions,
) -> Result<EvalAnswers, MalformedInput> {
    let mut supply = FreshSupply::new();
    answers_with(phi, theta, interp, &mut supply, options)
}

fn answers_with(
    phi: &Formula,
    theta: &Substitution,
    interp: &Interpretation,
    supply: &mut FreshSupply,
    options: EvalOptions,
) -> Result<EvalAnswers, MalformedInput> {
    validate_formula(phi, interp.algebra())?;
    require_user_variables(phi)?;
    validate_substitution(theta, interp.algebra())?;
    // never reuse a name that already occurs in the initial state
    supply.reserve(theta.domain());
    let range_vars = theta.range_variables();
    supply.reserve(range_vars.iter());
    let mut engine = Engine {
        interp,
        supply,
        options,
    };
    Ok(engine.eval(phi, &Answer::initial(theta.clone())))
}
