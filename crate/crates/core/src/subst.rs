//! Substitutions: finite mappings from variables to normal terms.
//!
//! A substitution is the state of a computation. It generalizes both the
//! usual syntactic substitutions and valuations, since a variable may be
//! sent to a non-ground term or directly to a domain value. Application,
//! composition, removal and a generality order are provided here.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::term::{
    evaluate_unchecked, normal_terms_equal, terms_equal, Algebra, FreshSupply, NormalTerm, Term,
    Variable,
};

/// A finite mapping from variables to normal terms, written
/// `{x1/h1, ..., xn/hn}`. No variable maps to itself; the empty
/// substitution is the identity state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Variable, NormalTerm>,
}

/// Violations of the substitution invariants at construction.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SubstitutionError {
    #[error("binding `{0}` maps a variable to itself")]
    IdentityBinding(String),
    #[error("variable `{0}` bound twice")]
    DuplicateVariable(String),
}

impl Substitution {
    pub fn empty() -> Self {
        Substitution::default()
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (Variable, NormalTerm)>,
    ) -> Result<Self, SubstitutionError> {
        let mut bindings = BTreeMap::new();
        for (x, h) in pairs {
            if h.as_term() == &Term::Var(x.clone()) {
                return Err(SubstitutionError::IdentityBinding(x.to_string()));
            }
            if bindings.insert(x.clone(), h).is_some() {
                return Err(SubstitutionError::DuplicateVariable(x.to_string()));
            }
        }
        Ok(Substitution { bindings })
    }

    /// A one-binding substitution. `range` must differ from `var`.
    pub fn singleton(var: Variable, range: NormalTerm) -> Self {
        debug_assert!(range.as_term() != &Term::Var(var.clone()));
        let mut bindings = BTreeMap::new();
        bindings.insert(var, range);
        Substitution { bindings }
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, x: &Variable) -> Option<&NormalTerm> {
        self.bindings.get(x)
    }

    pub fn binds(&self, x: &Variable) -> bool {
        self.bindings.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &NormalTerm)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Variable> {
        self.bindings.keys()
    }

    /// Every variable occurring in a range term.
    pub fn range_variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        for h in self.bindings.values() {
            h.as_term().collect_variables(&mut out);
        }
        out
    }

    /// Applies the substitution to a term: simultaneous replacement of each
    /// bound variable by its range. The result need not be in normal form.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.bindings.get(v) {
                Some(h) => h.as_term().clone(),
                None => t.clone(),
            },
            Term::Val(_) => t.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|arg| self.apply(arg)).collect())
            }
        }
    }

    /// Removes the binding for `x`, if any. This is the substitution-level
    /// part of the operation that closes the scope of a local variable.
    pub fn without(&self, x: &Variable) -> Substitution {
        let mut bindings = self.bindings.clone();
        bindings.remove(x);
        Substitution { bindings }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, h)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}", x, h)?;
        }
        write!(f, "}}")
    }
}

/// Composition `theta . eta`: the unique substitution sending each variable
/// `x` to the evaluation of `(x theta) eta`. Bindings that would map a
/// variable to itself are dropped.
pub fn compose(theta: &Substitution, eta: &Substitution, algebra: &dyn Algebra) -> Substitution {
    let mut bindings = BTreeMap::new();
    for (x, h) in theta.iter() {
        let image = evaluate_unchecked(&eta.apply(h.as_term()), algebra);
        if image.as_term() != &Term::Var(x.clone()) {
            bindings.insert(x.clone(), image);
        }
    }
    for (x, h) in eta.iter() {
        if !theta.binds(x) {
            bindings.insert(x.clone(), h.clone());
        }
    }
    Substitution { bindings }
}

/// Pointwise equality: same domain and identical ranges.
pub fn substitutions_equal(a: &Substitution, b: &Substitution, algebra: &dyn Algebra) -> bool {
    a.len() == b.len()
        && a.iter().all(|(x, h)| match b.get(x) {
            Some(k) => normal_terms_equal(h, k, algebra),
            None => false,
        })
}

/// A successful evaluation result: the final state `full` together with the
/// computed answer `delta`, the smallest extension with
/// `full = compose(initial, delta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub full: Substitution,
    pub delta: Substitution,
}

impl Answer {
    pub fn initial(state: Substitution) -> Self {
        Answer {
            full: state,
            delta: Substitution::empty(),
        }
    }
}

/// Applies a substitution to a formula, substituting free occurrences only.
/// If a range term would be captured by a binder, the bound variable is
/// first renamed using `fresh`.
pub fn apply_to_formula(phi: &Formula, theta: &Substitution, fresh: &mut FreshSupply) -> Formula {
    match phi {
        Formula::Equation(s, t) => Formula::Equation(theta.apply(s), theta.apply(t)),
        Formula::Atom(p, args) => {
            Formula::Atom(p.clone(), args.iter().map(|t| theta.apply(t)).collect())
        }
        Formula::And(a, b) => Formula::and(
            apply_to_formula(a, theta, fresh),
            apply_to_formula(b, theta, fresh),
        ),
        Formula::Or(a, b) => Formula::or(
            apply_to_formula(a, theta, fresh),
            apply_to_formula(b, theta, fresh),
        ),
        Formula::Not(a) => Formula::not(apply_to_formula(a, theta, fresh)),
        Formula::Exists(x, body) => {
            let inner = theta.without(x);
            if inner.is_empty() {
                return Formula::Exists(x.clone(), body.clone());
            }
            let captured = body
                .free_variables()
                .iter()
                .any(|v| v != x && inner.get(v).map(|h| h.as_term().occurs(x)).unwrap_or(false));
            if captured {
                let renamed = fresh.fresh();
                let rename =
                    Substitution::singleton(x.clone(), NormalTerm::variable(renamed.clone()));
                let body = apply_to_formula(body, &rename, fresh);
                Formula::Exists(renamed, Box::new(apply_to_formula(&body, &inner, fresh)))
            } else {
                Formula::Exists(x.clone(), Box::new(apply_to_formula(body, &inner, fresh)))
            }
        }
    }
}

/// True iff `eta` is less general than `theta`: some `gamma` satisfies
/// `compose(theta, gamma) = eta`. The witness is found by matching each
/// `x theta` against `x eta`, instantiating only variable leaves of the
/// pattern; where the algebra can invert function symbols (finite tables,
/// term algebras), an application may also match a collapsed value.
pub fn is_less_general(eta: &Substitution, theta: &Substitution, algebra: &dyn Algebra) -> bool {
    let vars: BTreeSet<Variable> = theta.domain().chain(eta.domain()).cloned().collect();
    let pairs: Vec<(Term, Term)> = vars
        .into_iter()
        .map(|x| {
            let pattern = theta
                .get(&x)
                .map(|h| h.as_term().clone())
                .unwrap_or_else(|| Term::Var(x.clone()));
            let subject = eta
                .get(&x)
                .map(|h| h.as_term().clone())
                .unwrap_or_else(|| Term::Var(x.clone()));
            (pattern, subject)
        })
        .collect();
    let mut found = false;
    search_matchers(&pairs, BTreeMap::new(), algebra, &mut |binds| {
        let gamma_pairs: Vec<(Variable, NormalTerm)> = binds
            .iter()
            .filter(|(x, t)| *t != &Term::Var((*x).clone()))
            .map(|(x, t)| (x.clone(), evaluate_unchecked(t, algebra)))
            .collect();
        let gamma = Substitution::from_pairs(gamma_pairs).expect("identities stripped");
        if substitutions_equal(&compose(theta, &gamma, algebra), eta, algebra) {
            found = true;
        }
        found
    });
    found
}

/// Depth-first search over all consistent matchers for the given
/// pattern/subject pairs, calling `accept` on each complete solution until
/// it returns true.
fn search_matchers(
    pairs: &[(Term, Term)],
    binds: BTreeMap<Variable, Term>,
    algebra: &dyn Algebra,
    accept: &mut dyn FnMut(&BTreeMap<Variable, Term>) -> bool,
) -> bool {
    let Some(((pattern, subject), rest)) = pairs.split_first() else {
        return accept(&binds);
    };
    match pattern {
        Term::Var(x) => match binds.get(x) {
            Some(prev) => {
                if terms_equal(prev, subject, algebra) {
                    search_matchers(rest, binds, algebra, accept)
                } else {
                    false
                }
            }
            None => {
                let mut binds = binds;
                binds.insert(x.clone(), subject.clone());
                search_matchers(rest, binds, algebra, accept)
            }
        },
        Term::Val(d) => match subject {
            Term::Val(e) if algebra.value_eq(d, e) => search_matchers(rest, binds, algebra, accept),
            _ => false,
        },
        Term::App(f, pattern_args) => match subject {
            Term::App(g, subject_args) if f == g && pattern_args.len() == subject_args.len() => {
                let mut extended: Vec<(Term, Term)> = pattern_args
                    .iter()
                    .cloned()
                    .zip(subject_args.iter().cloned())
                    .collect();
                extended.extend_from_slice(rest);
                search_matchers(&extended, binds, algebra, accept)
            }
            Term::Val(value) => {
                for tuple in algebra.preimages(f, value) {
                    let mut extended: Vec<(Term, Term)> = pattern_args
                        .iter()
                        .cloned()
                        .zip(tuple.into_iter().map(Term::Val))
                        .collect();
                    extended.extend_from_slice(rest);
                    if search_matchers(&extended, binds.clone(), algebra, accept) {
                        return true;
                    }
                }
                false
            }
            _ => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{FiniteAlgebra, HerbrandAlgebra, IntegerAlgebra};
    use crate::term::{evaluate, DomainValue, Signature};

    fn theta_example(alg: &IntegerAlgebra) -> Substitution {
        // {x/6-z, y/3}
        let six_minus_z = evaluate(
            &Term::app("-", vec![Term::constant("6"), Term::var("z")]),
            alg,
        )
        .unwrap();
        let three = evaluate(&Term::constant("3"), alg).unwrap();
        Substitution::from_pairs([
            (Variable::named("x"), six_minus_z),
            (Variable::named("y"), three),
        ])
        .unwrap()
    }

    #[test]
    fn applies_simultaneously() {
        let alg = IntegerAlgebra::new();
        let theta = theta_example(&alg);
        // s = x + (((3+2)*4) - y)
        let s = Term::app(
            "+",
            vec![
                Term::var("x"),
                Term::app(
                    "-",
                    vec![
                        Term::app(
                            "*",
                            vec![
                                Term::app("+", vec![Term::constant("3"), Term::constant("2")]),
                                Term::constant("4"),
                            ],
                        ),
                        Term::var("y"),
                    ],
                ),
            ],
        );
        let applied = theta.apply(&s);
        assert_eq!(applied.to_string(), "6 - z + ((3 + 2) * 4 - 3)");
        let normal = evaluate(&applied, &alg).unwrap();
        assert_eq!(normal.to_string(), "6 - z + 17");
        // the empty substitution changes nothing
        assert_eq!(Substitution::empty().apply(&s), s);
        // a bare bound variable becomes its range
        let x20 = Substitution::singleton(
            Variable::named("x"),
            NormalTerm::value(DomainValue::Int(20.into())),
        );
        assert_eq!(x20.apply(&Term::var("x")), Term::int(20));
    }

    #[test]
    fn composes_and_collapses() {
        let alg = IntegerAlgebra::new();
        let theta = theta_example(&alg);
        let eta = Substitution::singleton(
            Variable::named("z"),
            NormalTerm::value(DomainValue::Int(4.into())),
        );
        let composed = compose(&theta, &eta, &alg);
        assert_eq!(composed.to_string(), "{x/2, y/3, z/4}");
    }

    #[test]
    fn empty_substitution_is_identity_for_compose() {
        let alg = IntegerAlgebra::new();
        let theta = theta_example(&alg);
        let e = Substitution::empty();
        assert!(substitutions_equal(
            &compose(&theta, &e, &alg),
            &theta,
            &alg
        ));
        assert!(substitutions_equal(
            &compose(&e, &theta, &alg),
            &theta,
            &alg
        ));
    }

    #[test]
    fn composition_drops_identity_bindings() {
        let alg = IntegerAlgebra::new();
        let xy = Substitution::singleton(
            Variable::named("x"),
            NormalTerm::variable(Variable::named("y")),
        );
        let yx = Substitution::singleton(
            Variable::named("y"),
            NormalTerm::variable(Variable::named("x")),
        );
        // x goes to y and back to x, so only the y binding remains
        let composed = compose(&xy, &yx, &alg);
        assert_eq!(composed.to_string(), "{y/x}");
    }

    #[test]
    fn without_removes_a_binding() {
        let alg = IntegerAlgebra::new();
        let theta = Substitution::from_pairs([
            (
                Variable::named("x"),
                evaluate(&Term::app("*", vec![Term::var("y"), Term::var("y")]), &alg).unwrap(),
            ),
            (
                Variable::named("y"),
                NormalTerm::value(DomainValue::Int(3.into())),
            ),
        ])
        .unwrap();
        assert_eq!(
            theta.without(&Variable::named("y")).to_string(),
            "{x/y * y}"
        );
        assert_eq!(theta.without(&Variable::named("w")), theta);
    }

    #[test]
    fn substitution_equality_is_pointwise() {
        let alg = IntegerAlgebra::new();
        let one = Substitution::singleton(
            Variable::named("x"),
            NormalTerm::value(DomainValue::Int(1.into())),
        );
        let one_again = Substitution::singleton(
            Variable::named("x"),
            NormalTerm::value(DomainValue::Int(1.into())),
        );
        let two = Substitution::singleton(
            Variable::named("x"),
            NormalTerm::value(DomainValue::Int(2.into())),
        );
        let e = Substitution::empty();
        assert!(substitutions_equal(&e, &e, &alg));
        assert!(substitutions_equal(&one, &one_again, &alg));
        assert!(!substitutions_equal(&one, &two, &alg));
        assert!(!substitutions_equal(&one, &e, &alg));
    }

    fn herbrand_fg() -> HerbrandAlgebra {
        let mut sig = Signature::new();
        sig.add_function("c", 0).unwrap();
        sig.add_function("f", 1).unwrap();
        sig.add_function("g", 1).unwrap();
        HerbrandAlgebra::new(sig).unwrap()
    }

    #[test]
    fn generality_examples() {
        let alg = herbrand_fg();
        let g_of_y = evaluate(&Term::app("g", vec![Term::var("y")]), &alg).unwrap();
        let f_g_y = evaluate(
            &Term::app("f", vec![Term::app("g", vec![Term::var("y")])]),
            &alg,
        )
        .unwrap();
        let theta = Substitution::from_pairs([(Variable::named("x"), g_of_y.clone())]).unwrap();
        let eta = Substitution::from_pairs([
            (Variable::named("x"), g_of_y),
            (Variable::named("z"), f_g_y),
        ])
        .unwrap();
        assert!(is_less_general(&eta, &theta, &alg));
        assert!(is_less_general(&theta, &theta, &alg));
        assert!(!is_less_general(&theta, &eta, &alg));

        let int = IntegerAlgebra::new();
        let one = Substitution::singleton(
            Variable::named("x"),
            NormalTerm::value(DomainValue::Int(1.into())),
        );
        let two = Substitution::singleton(
            Variable::named("x"),
            NormalTerm::value(DomainValue::Int(2.into())),
        );
        assert!(!is_less_general(&one, &two, &int));
        assert!(is_less_general(&one, &one, &int));
    }

    #[test]
    fn generality_through_collapsed_applications() {
        // w is bound to f(y); once y is instantiated the range collapses to a
        // value, and matching must invert the table to recover the witness.
        let alg = FiniteAlgebra::from_parts(
            vec!["a".into(), "b".into()],
            vec![("f", vec![(vec!["a"], "b"), (vec!["b"], "a")])],
        )
        .unwrap();
        let f_y = evaluate(&Term::app("f", vec![Term::var("y")]), &alg).unwrap();
        let theta = Substitution::from_pairs([(Variable::named("w"), f_y)]).unwrap();
        let eta = Substitution::from_pairs([
            (
                Variable::named("w"),
                NormalTerm::value(DomainValue::Elem("b".into())),
            ),
            (
                Variable::named("y"),
                NormalTerm::value(DomainValue::Elem("a".into())),
            ),
        ])
        .unwrap();
        assert!(is_less_general(&eta, &theta, &alg));
        // but w/a, y/a is not an instance: f(a) = b, not a
        let bad = Substitution::from_pairs([
            (
                Variable::named("w"),
                NormalTerm::value(DomainValue::Elem("a".into())),
            ),
            (
                Variable::named("y"),
                NormalTerm::value(DomainValue::Elem("a".into())),
            ),
        ])
        .unwrap();
        assert!(!is_less_general(&bad, &theta, &alg));
    }

    #[test]
    fn formula_application_respects_binders() {
        use crate::formula::Formula;
        let mut fresh = FreshSupply::new();

        // (y = z - 1){x/1}: x is not free, nothing changes
        let phi = Formula::Equation(
            Term::var("y"),
            Term::app("-", vec![Term::var("z"), Term::constant("1")]),
        );
        let theta = Substitution::singleton(
            Variable::named("x"),
            NormalTerm::value(DomainValue::Int(1.into())),
        );
        assert_eq!(apply_to_formula(&phi, &theta, &mut fresh), phi);

        // (exists x p(x, y)){y/3}: the bound x is untouched
        let body = Formula::Atom("p".into(), vec![Term::var("x"), Term::var("y")]);
        let exists = Formula::Exists(Variable::named("x"), Box::new(body));
        let y3 = Substitution::singleton(
            Variable::named("y"),
            NormalTerm::value(DomainValue::Int(3.into())),
        );
        let applied = apply_to_formula(&exists, &y3, &mut fresh);
        assert_eq!(applied.to_string(), "exists x p(x, 3)");
    }

    #[test]
    fn formula_application_avoids_capture() {
        let alg = herbrand_fg();
        let mut fresh = FreshSupply::new();
        let body = Formula::Atom("p".into(), vec![Term::var("x"), Term::var("y")]);
        let exists = Formula::Exists(Variable::named("x"), Box::new(body));
        let f_x = evaluate(&Term::app("f", vec![Term::var("x")]), &alg).unwrap();
        let theta = Substitution::from_pairs([(Variable::named("y"), f_x)]).unwrap();
        let applied = apply_to_formula(&exists, &theta, &mut fresh);
        // the free variables afterwards must be exactly those of f(x)
        let frees = applied.free_variables();
        assert_eq!(frees, [Variable::named("x")].into_iter().collect());
        match applied {
            Formula::Exists(bound, _) => {
                assert!(bound.is_generated());
                assert_ne!(bound, Variable::named("x"));
            }
            other => panic!("expected a quantified formula, got {}", other),
        }
    }
}
