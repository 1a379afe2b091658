//! Shared helpers for the integration suites: fixed interpretations,
//! seeded random syntactic objects, and outcome comparison modulo the
//! names of generated variables.

// each test target compiles this module separately and uses a subset
#![allow(dead_code)]

use folsem::semantics::Outcome;
use folsem::term::evaluate;
use folsem::{Algebra, Interpretation, NormalTerm, Substitution, Term, Variable};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const POOL: [&str; 4] = ["w", "x", "y", "z"];

pub fn int_interp() -> Interpretation {
    Interpretation::integer()
}

pub fn finite_interp() -> Interpretation {
    Interpretation::from_json(
        r#"{"domain": ["a", "b"],
            "functions": {
                "f": {"arity": 1, "table": {"a": "b", "b": "a"}},
                "g": {"arity": 2, "table": {"a,a": "a", "a,b": "b", "b,a": "b", "b,b": "a"}}
            },
            "predicates": {
                "p": {"arity": 1, "tuples": [["a"]]},
                "q": {"arity": 2, "tuples": [["a", "b"], ["b", "b"]]}
            }}"#,
    )
    .unwrap()
}

pub fn herbrand_interp() -> Interpretation {
    Interpretation::from_json(
        r#"{"domain": "herbrand",
            "functions": {"c": {"arity": 0}, "f": {"arity": 1}, "g": {"arity": 2}},
            "predicates": {"p": {"arity": 1, "tuples": [["c"], ["f(c)"]]},
                            "q": {"arity": 2, "tuples": [["c", "g(c, c)"]]}}}"#,
    )
    .unwrap()
}

/// A random term in the parser's universe over the interpretation's
/// signature: variables from `pool`, declared function symbols, and (for
/// finite algebras) element names as values.
pub fn gen_term_over(
    rng: &mut ChaCha8Rng,
    interp: &Interpretation,
    depth: usize,
    pool: &[&str],
) -> Term {
    let functions: Vec<(String, usize)> = interp
        .signature()
        .functions()
        .map(|(f, a)| (f.to_string(), a))
        .collect();
    let int_literals = interp.signature().has_int_literals();
    if depth > 0 && !functions.is_empty() && rng.gen_bool(0.6) {
        let (name, arity) = functions[rng.gen_range(0..functions.len())].clone();
        let args = (0..arity)
            .map(|_| gen_term_over(rng, interp, depth - 1, pool))
            .collect();
        return Term::app(name, args);
    }
    let elements = interp.algebra().value_constants();
    if int_literals && (pool.is_empty() || rng.gen_bool(0.4)) {
        Term::constant(rng.gen_range(0..100u32).to_string())
    } else if let Some(elements) = elements.filter(|_| pool.is_empty() || rng.gen_bool(0.4)) {
        let elements: Vec<&String> = elements.iter().collect();
        Term::Val(folsem::DomainValue::Elem(
            elements[rng.gen_range(0..elements.len())].clone(),
        ))
    } else if pool.is_empty() {
        // fall back to a constant of the signature
        let constants: Vec<String> = interp
            .signature()
            .constants()
            .map(|c| c.to_string())
            .collect();
        Term::constant(constants[rng.gen_range(0..constants.len())].clone())
    } else {
        Term::var(pool[rng.gen_range(0..pool.len())])
    }
}

/// A random substitution with normal-form ranges over `range_pool`.
pub fn gen_subst_over(
    rng: &mut ChaCha8Rng,
    interp: &Interpretation,
    depth: usize,
    domain_pool: &[&str],
    range_pool: &[&str],
) -> Substitution {
    let mut pairs = Vec::new();
    for name in domain_pool {
        if rng.gen_bool(0.5) {
            continue;
        }
        let var = Variable::named(*name);
        let term = gen_term_over(rng, interp, depth, range_pool);
        let range = evaluate(&term, interp.algebra()).unwrap();
        if range.as_term() == &Term::Var(var.clone()) {
            continue;
        }
        pairs.push((var, range));
    }
    Substitution::from_pairs(pairs).unwrap()
}

/// A random formula in the parser's universe.
pub fn gen_formula_over(
    rng: &mut ChaCha8Rng,
    interp: &Interpretation,
    depth: usize,
) -> folsem::Formula {
    use folsem::Formula;
    if depth == 0 || rng.gen_bool(0.3) {
        let predicates: Vec<(String, usize)> = interp
            .signature()
            .predicates()
            .map(|(p, a)| (p.to_string(), a))
            .collect();
        if !predicates.is_empty() && rng.gen_bool(0.5) {
            let (name, arity) = predicates[rng.gen_range(0..predicates.len())].clone();
            let args = (0..arity)
                .map(|_| gen_term_over(rng, interp, 1, &POOL))
                .collect();
            return Formula::atom(name, args);
        }
        return Formula::eq(
            gen_term_over(rng, interp, 2, &POOL),
            gen_term_over(rng, interp, 2, &POOL),
        );
    }
    match rng.gen_range(0..10) {
        0..=2 => Formula::and(
            gen_formula_over(rng, interp, depth - 1),
            gen_formula_over(rng, interp, depth - 1),
        ),
        3..=5 => Formula::or(
            gen_formula_over(rng, interp, depth - 1),
            gen_formula_over(rng, interp, depth - 1),
        ),
        6..=7 => Formula::not(gen_formula_over(rng, interp, depth - 1)),
        _ => Formula::exists(
            Variable::named(POOL[rng.gen_range(0..POOL.len())]),
            gen_formula_over(rng, interp, depth - 1),
        ),
    }
}

/// Structural equality of outcomes up to a bijective renaming of generated
/// variables.
pub fn outcomes_equal_up_to_renaming(a: &Outcome, b: &Outcome, algebra: &dyn Algebra) -> bool {
    if a.has_error() != b.has_error() || a.substitutions().len() != b.substitutions().len() {
        return false;
    }
    let mut forward: BTreeMap<Variable, Variable> = BTreeMap::new();
    let mut backward: BTreeMap<Variable, Variable> = BTreeMap::new();
    for (sa, sb) in a.substitutions().iter().zip(b.substitutions()) {
        if sa.len() != sb.len() {
            return false;
        }
        for ((xa, ha), (xb, hb)) in sa.iter().zip(sb.iter()) {
            if !vars_match(xa, xb, &mut forward, &mut backward) {
                return false;
            }
            if !terms_match(ha, hb, algebra, &mut forward, &mut backward) {
                return false;
            }
        }
    }
    true
}

fn vars_match(
    a: &Variable,
    b: &Variable,
    forward: &mut BTreeMap<Variable, Variable>,
    backward: &mut BTreeMap<Variable, Variable>,
) -> bool {
    match (a.is_generated(), b.is_generated()) {
        (false, false) => a == b,
        (true, true) => {
            let fwd = forward.entry(a.clone()).or_insert_with(|| b.clone());
            let bwd = backward.entry(b.clone()).or_insert_with(|| a.clone());
            fwd == b && bwd == a
        }
        _ => false,
    }
}

fn terms_match(
    a: &NormalTerm,
    b: &NormalTerm,
    algebra: &dyn Algebra,
    forward: &mut BTreeMap<Variable, Variable>,
    backward: &mut BTreeMap<Variable, Variable>,
) -> bool {
    fn go(
        a: &Term,
        b: &Term,
        algebra: &dyn Algebra,
        forward: &mut BTreeMap<Variable, Variable>,
        backward: &mut BTreeMap<Variable, Variable>,
    ) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => vars_match(x, y, forward, backward),
            (Term::Val(d), Term::Val(e)) => algebra.value_eq(d, e),
            (Term::App(f, fa), Term::App(g, ga)) => {
                f == g
                    && fa.len() == ga.len()
                    && fa
                        .iter()
                        .zip(ga)
                        .all(|(x, y)| go(x, y, algebra, forward, backward))
            }
            _ => false,
        }
    }
    go(a.as_term(), b.as_term(), algebra, forward, backward)
}
