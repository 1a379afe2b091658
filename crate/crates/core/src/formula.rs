//! Abstract syntax of formulas.
//!
//! The connectives are exactly those the evaluator gives meaning to:
//! equations, predicate atoms, conjunction, disjunction, negation and
//! existential quantification. There is no universal quantifier,
//! implication or biconditional in the core language.

use std::collections::BTreeSet;
use std::fmt;

use crate::term::{Algebra, MalformedInput, PredSym, Term, Variable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Equation(Term, Term),
    Atom(PredSym, Vec<Term>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Exists(Variable, Box<Formula>),
}

impl Formula {
    pub fn eq(s: Term, t: Term) -> Self {
        Formula::Equation(s, t)
    }

    pub fn atom(p: impl Into<PredSym>, args: Vec<Term>) -> Self {
        Formula::Atom(p.into(), args)
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn exists(x: Variable, body: Formula) -> Self {
        Formula::Exists(x, Box::new(body))
    }

    pub fn free_variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Formula::Equation(s, t) => {
                s.collect_variables(out);
                t.collect_variables(out);
            }
            Formula::Atom(_, args) => {
                for arg in args {
                    arg.collect_variables(out);
                }
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Not(a) => a.collect_free(out),
            Formula::Exists(x, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
        }
    }

    /// Every variable occurring anywhere: free, bound, or inside an
    /// embedded range term. Used to pre-reserve fresh names.
    pub fn all_variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Formula::Equation(s, t) => {
                s.collect_variables(out);
                t.collect_variables(out);
            }
            Formula::Atom(_, args) => {
                for arg in args {
                    arg.collect_variables(out);
                }
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_all(out);
                b.collect_all(out);
            }
            Formula::Not(a) => a.collect_all(out),
            Formula::Exists(x, body) => {
                out.insert(x.clone());
                body.collect_all(out);
            }
        }
    }
}

/// Checks every symbol of the formula against the algebra.
pub fn validate_formula(phi: &Formula, algebra: &dyn Algebra) -> Result<(), MalformedInput> {
    match phi {
        Formula::Equation(s, t) => {
            crate::term::validate_term(s, algebra)?;
            crate::term::validate_term(t, algebra)
        }
        Formula::Atom(p, args) => {
            match algebra.signature().pred_arity(p) {
                None => return Err(MalformedInput::UnknownPredicate(p.to_string())),
                Some(arity) if arity != args.len() => {
                    return Err(MalformedInput::PredicateArity {
                        sym: p.to_string(),
                        expected: arity,
                        found: args.len(),
                    })
                }
                Some(_) => {}
            }
            args.iter()
                .try_for_each(|arg| crate::term::validate_term(arg, algebra))
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            validate_formula(a, algebra)?;
            validate_formula(b, algebra)
        }
        Formula::Not(a) => validate_formula(a, algebra),
        Formula::Exists(_, body) => validate_formula(body, algebra),
    }
}

/// Rejects formulas mentioning generated (underscore-tagged) variables,
/// which are reserved for the evaluator's fresh supply.
pub fn require_user_variables(phi: &Formula) -> Result<(), MalformedInput> {
    for v in phi.all_variables() {
        if v.is_generated() {
            return Err(MalformedInput::ReservedVariable(v.to_string()));
        }
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}

// Precedence for printing: 1 = exists (extends right), 2 = or, 3 = and,
// 4 = not, 5 = atomic.
fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula, min: u8) -> fmt::Result {
    match phi {
        Formula::Equation(s, t) => write!(f, "{} = {}", s, t),
        Formula::Atom(p, args) => {
            if args.is_empty() {
                write!(f, "{}", p)
            } else {
                write!(f, "{}(", p)?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", arg)?;
                }
                write!(f, ")")
            }
        }
        Formula::Or(a, b) => write_binary(f, a, " | ", b, 2, min),
        Formula::And(a, b) => write_binary(f, a, " & ", b, 3, min),
        Formula::Not(a) => {
            if min > 4 {
                write!(f, "(")?;
            }
            write!(f, "~")?;
            write_formula(f, a, 5)?;
            if min > 4 {
                write!(f, ")")
            } else {
                Ok(())
            }
        }
        Formula::Exists(x, body) => {
            let parens = min > 1;
            if parens {
                write!(f, "(")?;
            }
            write!(f, "exists {} ", x)?;
            write_formula(f, body, 1)?;
            if parens {
                write!(f, ")")
            } else {
                Ok(())
            }
        }
    }
}

fn write_binary(
    f: &mut fmt::Formatter<'_>,
    lhs: &Formula,
    op: &str,
    rhs: &Formula,
    level: u8,
    min: u8,
) -> fmt::Result {
    let parens = min > level;
    if parens {
        write!(f, "(")?;
    }
    write_formula(f, lhs, level)?;
    write!(f, "{}", op)?;
    write_formula(f, rhs, level + 1)?;
    if parens {
        write!(f, ")")
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables_skip_binders() {
        let phi = Formula::and(
            Formula::exists(
                Variable::named("x"),
                Formula::atom("p", vec![Term::var("x"), Term::var("y")]),
            ),
            Formula::eq(Term::var("x"), Term::var("z")),
        );
        let free: Vec<String> = phi.free_variables().iter().map(|v| v.to_string()).collect();
        assert_eq!(free, ["x", "y", "z"]);
    }

    #[test]
    fn printing_disambiguates() {
        let p = || Formula::atom("p", vec![]);
        let q = || Formula::atom("q", vec![]);
        let r = || Formula::atom("r", vec![]);
        assert_eq!(
            Formula::or(Formula::and(p(), q()), r()).to_string(),
            "p & q | r"
        );
        assert_eq!(
            Formula::and(Formula::or(p(), q()), r()).to_string(),
            "(p | q) & r"
        );
        assert_eq!(Formula::not(Formula::and(p(), q())).to_string(), "~(p & q)");
        assert_eq!(Formula::and(Formula::not(p()), q()).to_string(), "~p & q");
        let ex = Formula::exists(Variable::named("x"), Formula::or(p(), q()));
        assert_eq!(ex.to_string(), "exists x p | q");
        assert_eq!(Formula::and(ex, r()).to_string(), "(exists x p | q) & r");
    }
}
