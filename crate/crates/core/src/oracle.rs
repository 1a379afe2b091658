//! Brute-force truth over finite interpretations, and executable checks
//! that compare the evaluator against it.
//!
//! Truth here is classical: connectives are Boolean and quantifiers range
//! over the (finite) domain, while the evaluator's negation is finite
//! failure and its quantifier is a local-variable declaration. The checks
//! verify that evaluation is sound for truth on seeded random instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{validate_formula, Formula};
use crate::interp::{
    DomainSpec, FunctionDecl, Interpretation, InterpretationDoc, PredicateDecl, TupleEntry,
};
use crate::semantics::{eval_answers_with, EvalOptions};
use crate::subst::{apply_to_formula, is_less_general, substitutions_equal, Substitution};
use crate::term::{
    evaluate_unchecked, normal_terms_equal, DomainValue, FreshSupply, MalformedInput, NormalTerm,
    PredSym, Term, Variable,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("the domain is not enumerable; truth checking needs a finite domain")]
    NotEnumerable,
    #[error(transparent)]
    Malformed(#[from] MalformedInput),
}

/// Formulas of the verification layer. These extend the core language with
/// the classical truth constants, implication and biconditional, which the
/// evaluator deliberately has no clauses for.
#[derive(Clone, Debug, PartialEq)]
pub enum CheckFormula {
    Core(Formula),
    Top,
    Bottom,
    Not(Box<CheckFormula>),
    And(Box<CheckFormula>, Box<CheckFormula>),
    Or(Box<CheckFormula>, Box<CheckFormula>),
    Implies(Box<CheckFormula>, Box<CheckFormula>),
    Iff(Box<CheckFormula>, Box<CheckFormula>),
    Exists(Variable, Box<CheckFormula>),
}

impl CheckFormula {
    pub fn implies(a: CheckFormula, b: CheckFormula) -> Self {
        CheckFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: CheckFormula, b: CheckFormula) -> Self {
        CheckFormula::Iff(Box::new(a), Box::new(b))
    }

    pub fn free_variables(&self) -> BTreeSet<Variable> {
        match self {
            CheckFormula::Core(phi) => phi.free_variables(),
            CheckFormula::Top | CheckFormula::Bottom => BTreeSet::new(),
            CheckFormula::Not(a) => a.free_variables(),
            CheckFormula::And(a, b)
            | CheckFormula::Or(a, b)
            | CheckFormula::Implies(a, b)
            | CheckFormula::Iff(a, b) => {
                let mut out = a.free_variables();
                out.extend(b.free_variables());
                out
            }
            CheckFormula::Exists(x, body) => {
                let mut out = body.free_variables();
                out.remove(x);
                out
            }
        }
    }

    fn validate(&self, interp: &Interpretation) -> Result<(), MalformedInput> {
        match self {
            CheckFormula::Core(phi) => validate_formula(phi, interp.algebra()),
            CheckFormula::Top | CheckFormula::Bottom => Ok(()),
            CheckFormula::Not(a) => a.validate(interp),
            CheckFormula::And(a, b)
            | CheckFormula::Or(a, b)
            | CheckFormula::Implies(a, b)
            | CheckFormula::Iff(a, b) => {
                a.validate(interp)?;
                b.validate(interp)
            }
            CheckFormula::Exists(_, body) => body.validate(interp),
        }
    }
}

impl fmt::Display for CheckFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckFormula::Core(phi) => write!(f, "{}", phi),
            CheckFormula::Top => write!(f, "true"),
            CheckFormula::Bottom => write!(f, "false"),
            CheckFormula::Not(a) => write!(f, "~({})", a),
            CheckFormula::And(a, b) => write!(f, "({}) & ({})", a, b),
            CheckFormula::Or(a, b) => write!(f, "({}) | ({})", a, b),
            CheckFormula::Implies(a, b) => write!(f, "({}) -> ({})", a, b),
            CheckFormula::Iff(a, b) => write!(f, "({}) <-> ({})", a, b),
            CheckFormula::Exists(x, body) => write!(f, "exists {} ({})", x, body),
        }
    }
}

/// Encodes a substitution as the right-nested conjunction of its bindings
/// as equations, in variable order. The empty substitution encodes as the
/// truth constant.
pub fn equational_form(theta: &Substitution) -> CheckFormula {
    let mut conj: Option<Formula> = None;
    for (x, h) in theta.iter().collect::<Vec<_>>().into_iter().rev() {
        let eq = Formula::Equation(Term::Var(x.clone()), h.as_term().clone());
        conj = Some(match conj {
            None => eq,
            Some(rest) => Formula::and(eq, rest),
        });
    }
    match conj {
        None => CheckFormula::Top,
        Some(phi) => CheckFormula::Core(phi),
    }
}

/// A recorded truth evaluation.
#[derive(Clone, Debug)]
pub struct TruthJudgment {
    pub formula: Formula,
    pub subst: Substitution,
    pub verdict: bool,
}

/// Truth of a core formula under a substitution.
///
/// When the substitution covers all free variables and its ranges are
/// ground, this is the structural Tarskian recursion: equations compare
/// normal forms, atoms look up their relation, connectives are classical
/// and quantifiers enumerate the domain. Uncovered free variables, and
/// variables occurring free in range terms, are closed universally by
/// enumerating values for them.
pub fn truth(
    interp: &Interpretation,
    theta: &Substitution,
    phi: &Formula,
) -> Result<bool, OracleError> {
    truth_of(interp, theta, &CheckFormula::Core(phi.clone()))
}

pub fn judge(
    interp: &Interpretation,
    theta: &Substitution,
    phi: &Formula,
) -> Result<TruthJudgment, OracleError> {
    Ok(TruthJudgment {
        formula: phi.clone(),
        subst: theta.clone(),
        verdict: truth(interp, theta, phi)?,
    })
}

/// Truth of a verification-layer formula; see [`truth`].
pub fn truth_of(
    interp: &Interpretation,
    theta: &Substitution,
    psi: &CheckFormula,
) -> Result<bool, OracleError> {
    Ok(counter_valuation(interp, theta, psi)?.is_none())
}

/// The first valuation of the closed-over variables falsifying `psi`, if
/// any. `None` means `psi` holds.
fn counter_valuation(
    interp: &Interpretation,
    theta: &Substitution,
    psi: &CheckFormula,
) -> Result<Option<Substitution>, OracleError> {
    psi.validate(interp)?;
    let domain = interp
        .enumerate_domain()
        .ok_or(OracleError::NotEnumerable)?;

    let mut extras: BTreeSet<Variable> = psi
        .free_variables()
        .into_iter()
        .filter(|v| !theta.binds(v))
        .collect();
    for v in theta.range_variables() {
        if !theta.binds(&v) {
            extras.insert(v);
        }
    }
    let extras: Vec<Variable> = extras.into_iter().collect();
    let free: BTreeSet<Variable> = psi.free_variables();

    let assignments: Vec<Vec<&DomainValue>> = if extras.is_empty() {
        vec![Vec::new()]
    } else {
        (0..extras.len())
            .map(|_| domain.iter())
            .multi_cartesian_product()
            .collect()
    };

    for assignment in assignments {
        let valuation = Substitution::from_pairs(
            extras
                .iter()
                .zip(&assignment)
                .map(|(v, d)| (v.clone(), NormalTerm::value((*d).clone()))),
        )
        .expect("values never bind a variable to itself");
        // instantiate the range terms, then extend with the free variables
        let mut pairs: Vec<(Variable, NormalTerm)> = theta
            .iter()
            .map(|(x, h)| {
                (
                    x.clone(),
                    evaluate_unchecked(&valuation.apply(h.as_term()), interp.algebra()),
                )
            })
            .collect();
        for (v, d) in extras.iter().zip(&assignment) {
            if free.contains(v) {
                pairs.push((v.clone(), NormalTerm::value((*d).clone())));
            }
        }
        let sigma = Substitution::from_pairs(pairs)
            .expect("instantiated bindings cannot become identities");
        if !holds(interp, &domain, &sigma, psi) {
            return Ok(Some(valuation));
        }
    }
    Ok(None)
}

fn with_value(sigma: &Substitution, x: &Variable, d: &DomainValue) -> Substitution {
    let mut pairs: Vec<(Variable, NormalTerm)> = sigma
        .iter()
        .filter(|(v, _)| *v != x)
        .map(|(v, h)| (v.clone(), h.clone()))
        .collect();
    pairs.push((x.clone(), NormalTerm::value(d.clone())));
    Substitution::from_pairs(pairs).expect("value bindings are never identities")
}

fn holds(
    interp: &Interpretation,
    domain: &[DomainValue],
    sigma: &Substitution,
    psi: &CheckFormula,
) -> bool {
    match psi {
        CheckFormula::Core(phi) => holds_core(interp, domain, sigma, phi),
        CheckFormula::Top => true,
        CheckFormula::Bottom => false,
        CheckFormula::Not(a) => !holds(interp, domain, sigma, a),
        CheckFormula::And(a, b) => {
            holds(interp, domain, sigma, a) && holds(interp, domain, sigma, b)
        }
        CheckFormula::Or(a, b) => {
            holds(interp, domain, sigma, a) || holds(interp, domain, sigma, b)
        }
        CheckFormula::Implies(a, b) => {
            !holds(interp, domain, sigma, a) || holds(interp, domain, sigma, b)
        }
        CheckFormula::Iff(a, b) => {
            holds(interp, domain, sigma, a) == holds(interp, domain, sigma, b)
        }
        CheckFormula::Exists(x, body) => domain
            .iter()
            .any(|d| holds(interp, domain, &with_value(sigma, x, d), body)),
    }
}

fn holds_core(
    interp: &Interpretation,
    domain: &[DomainValue],
    sigma: &Substitution,
    phi: &Formula,
) -> bool {
    match phi {
        Formula::Equation(s, t) => {
            let s = evaluate_unchecked(&sigma.apply(s), interp.algebra());
            let t = evaluate_unchecked(&sigma.apply(t), interp.algebra());
            normal_terms_equal(&s, &t, interp.algebra())
        }
        Formula::Atom(p, args) => {
            let mut tuple = Vec::with_capacity(args.len());
            for arg in args {
                let normal = evaluate_unchecked(&sigma.apply(arg), interp.algebra());
                match normal.as_value() {
                    Some(value) => tuple.push(value.clone()),
                    // a non-ground instance is not a member of the relation
                    None => return false,
                }
            }
            interp.relation(p).is_some_and(|rel| rel.contains(&tuple))
        }
        Formula::And(a, b) => {
            holds_core(interp, domain, sigma, a) && holds_core(interp, domain, sigma, b)
        }
        Formula::Or(a, b) => {
            holds_core(interp, domain, sigma, a) || holds_core(interp, domain, sigma, b)
        }
        Formula::Not(a) => !holds_core(interp, domain, sigma, a),
        Formula::Exists(x, body) => domain
            .iter()
            .any(|d| holds_core(interp, domain, &with_value(sigma, x, d), body)),
    }
}

// ---- checks ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CheckName {
    #[serde(rename = "soundness-i")]
    SoundnessI,
    #[serde(rename = "soundness-ii")]
    SoundnessII,
    #[serde(rename = "note-i")]
    NoteI,
    #[serde(rename = "note-ii")]
    NoteII,
    #[serde(rename = "note-equality")]
    NoteEquality,
}

impl CheckName {
    pub const ALL: [CheckName; 5] = [
        CheckName::SoundnessI,
        CheckName::SoundnessII,
        CheckName::NoteI,
        CheckName::NoteII,
        CheckName::NoteEquality,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::SoundnessI => "soundness-i",
            CheckName::SoundnessII => "soundness-ii",
            CheckName::NoteI => "note-i",
            CheckName::NoteII => "note-ii",
            CheckName::NoteEquality => "note-equality",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub message: String,
    pub details: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<serde_json::Value>,
    pub formula: String,
    pub subst: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Result of one check on one instance. Failing reports always carry a
/// reproducible counterexample.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: CheckName,
    pub verdict: Verdict,
    pub inputs: CheckInputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

fn report(
    check: CheckName,
    phi: &Formula,
    theta: &Substitution,
    verdict: Verdict,
    counterexample: Option<Counterexample>,
) -> CheckReport {
    CheckReport {
        check,
        verdict,
        inputs: CheckInputs {
            interpretation: None,
            formula: phi.to_string(),
            subst: theta.to_string(),
            seed: None,
        },
        counterexample,
    }
}

fn detail(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// Every substitution member of the outcome validates the formula.
pub fn check_soundness_i(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
) -> Result<CheckReport, OracleError> {
    check_soundness_i_with(interp, phi, theta, EvalOptions::default())
}

pub fn check_soundness_i_with(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
    options: EvalOptions,
) -> Result<CheckReport, OracleError> {
    let result = eval_answers_with(phi, theta, interp, options)?;
    for answer in &result.answers {
        if !truth(interp, &answer.full, phi)? {
            return Ok(report(
                CheckName::SoundnessI,
                phi,
                theta,
                Verdict::Fail,
                Some(Counterexample {
                    message: "computed answer does not validate the formula".into(),
                    details: detail(&[
                        ("answer", answer.full.to_string()),
                        ("delta", answer.delta.to_string()),
                    ]),
                }),
            ));
        }
    }
    Ok(report(
        CheckName::SoundnessI,
        phi,
        theta,
        Verdict::Pass,
        None,
    ))
}

/// For error-free outcomes, the instantiated formula is equivalent to the
/// disjunction of its computed answers in equational form, each closed
/// existentially over the generated variables in its range.
pub fn check_soundness_ii(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
) -> Result<CheckReport, OracleError> {
    check_soundness_ii_with(interp, phi, theta, EvalOptions::default())
}

pub fn check_soundness_ii_with(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
    options: EvalOptions,
) -> Result<CheckReport, OracleError> {
    let result = eval_answers_with(phi, theta, interp, options)?;
    if result.error {
        return Ok(report(
            CheckName::SoundnessII,
            phi,
            theta,
            Verdict::NotApplicable,
            None,
        ));
    }
    // the empty disjunction is the falsity constant
    let mut disjunction: Option<CheckFormula> = None;
    for answer in result.answers.iter().rev() {
        let mut clause = equational_form(&answer.delta);
        let generated: Vec<Variable> = answer
            .delta
            .range_variables()
            .into_iter()
            .filter(Variable::is_generated)
            .collect();
        for y in generated.into_iter().rev() {
            clause = CheckFormula::Exists(y, Box::new(clause));
        }
        disjunction = Some(match disjunction {
            None => clause,
            Some(rest) => CheckFormula::Or(Box::new(clause), Box::new(rest)),
        });
    }
    let rhs = disjunction.unwrap_or(CheckFormula::Bottom);

    let mut fresh = FreshSupply::new();
    fresh.reserve(theta.domain());
    fresh.reserve(theta.range_variables().iter());
    let phi_theta = apply_to_formula(phi, theta, &mut fresh);
    let claim = CheckFormula::iff(CheckFormula::Core(phi_theta.clone()), rhs.clone());

    match counter_valuation(interp, &Substitution::empty(), &claim)? {
        None => Ok(report(
            CheckName::SoundnessII,
            phi,
            theta,
            Verdict::Pass,
            None,
        )),
        Some(valuation) => Ok(report(
            CheckName::SoundnessII,
            phi,
            theta,
            Verdict::Fail,
            Some(Counterexample {
                message: "instantiated formula is not equivalent to its answers".into(),
                details: detail(&[
                    ("instantiated", phi_theta.to_string()),
                    ("answers", rhs.to_string()),
                    ("valuation", valuation.to_string()),
                ]),
            }),
        )),
    }
}

/// Every substitution member of an outcome is an instance of the initial
/// state.
pub fn check_note_i(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
) -> Result<CheckReport, OracleError> {
    check_note_i_with(interp, phi, theta, EvalOptions::default())
}

pub fn check_note_i_with(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
    options: EvalOptions,
) -> Result<CheckReport, OracleError> {
    let result = eval_answers_with(phi, theta, interp, options)?;
    for answer in &result.answers {
        if !is_less_general(&answer.full, theta, interp.algebra()) {
            return Ok(report(
                CheckName::NoteI,
                phi,
                theta,
                Verdict::Fail,
                Some(Counterexample {
                    message: "answer is not an instance of the initial state".into(),
                    details: detail(&[("answer", answer.full.to_string())]),
                }),
            ));
        }
    }
    Ok(report(CheckName::NoteI, phi, theta, Verdict::Pass, None))
}

/// When the instantiated formula is ground, the only possible substitution
/// member of its outcome is the initial state itself.
pub fn check_note_ii(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
) -> Result<CheckReport, OracleError> {
    check_note_ii_with(interp, phi, theta, EvalOptions::default())
}

pub fn check_note_ii_with(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
    options: EvalOptions,
) -> Result<CheckReport, OracleError> {
    let mut fresh = FreshSupply::new();
    fresh.reserve(theta.domain());
    fresh.reserve(theta.range_variables().iter());
    let phi_theta = apply_to_formula(phi, theta, &mut fresh);
    if !phi_theta.free_variables().is_empty() {
        return Ok(report(
            CheckName::NoteII,
            phi,
            theta,
            Verdict::NotApplicable,
            None,
        ));
    }
    let result = eval_answers_with(phi, theta, interp, options)?;
    for answer in &result.answers {
        if !substitutions_equal(&answer.full, theta, interp.algebra()) {
            return Ok(report(
                CheckName::NoteII,
                phi,
                theta,
                Verdict::Fail,
                Some(Counterexample {
                    message: "ground instance produced an answer beyond the initial state".into(),
                    details: detail(&[("answer", answer.full.to_string())]),
                }),
            ));
        }
    }
    Ok(report(CheckName::NoteII, phi, theta, Verdict::Pass, None))
}

/// Truth under a substitution agrees with validity of the implication from
/// the substitution's equational form.
pub fn check_note_equality(
    interp: &Interpretation,
    phi: &Formula,
    theta: &Substitution,
) -> Result<CheckReport, OracleError> {
    // The valuation oracle is faithful only for resolved states, where no
    // range term mentions a variable the substitution itself binds.
    // Evaluation always produces resolved states, since composition
    // instantiates earlier ranges.
    if theta.range_variables().iter().any(|v| theta.binds(v)) {
        return Ok(report(
            CheckName::NoteEquality,
            phi,
            theta,
            Verdict::NotApplicable,
            None,
        ));
    }
    let lhs = truth(interp, theta, phi)?;
    let claim = CheckFormula::implies(equational_form(theta), CheckFormula::Core(phi.clone()));
    let rhs = truth_of(interp, &Substitution::empty(), &claim)?;
    if lhs == rhs {
        Ok(report(
            CheckName::NoteEquality,
            phi,
            theta,
            Verdict::Pass,
            None,
        ))
    } else {
        Ok(report(
            CheckName::NoteEquality,
            phi,
            theta,
            Verdict::Fail,
            Some(Counterexample {
                message: "truth under the state disagrees with its equational form".into(),
                details: detail(&[
                    ("truth", lhs.to_string()),
                    ("implication", claim.to_string()),
                    ("implication-valid", rhs.to_string()),
                ]),
            }),
        ))
    }
}

// ---- instance generation ----

/// Size caps for generated instances.
#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    pub max_domain: usize,
    pub max_formula_depth: usize,
    pub max_functions: usize,
    pub max_fn_arity: usize,
    pub max_predicates: usize,
    pub max_pred_arity: usize,
    pub max_subst_depth: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_domain: 4,
            max_formula_depth: 5,
            max_functions: 2,
            max_fn_arity: 2,
            max_predicates: 3,
            max_pred_arity: 2,
            max_subst_depth: 2,
        }
    }
}

/// A reproducible test instance: a finite interpretation document, a
/// formula over it, and an initial state.
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub doc: InterpretationDoc,
    pub formula: Formula,
    pub subst: Substitution,
}

impl Instance {
    pub fn interpretation(&self) -> Interpretation {
        self.doc.build().expect("generated documents are valid")
    }

    /// A stable serialized form, usable as a distinctness key.
    pub fn key(&self) -> String {
        format!("{}|{}|{}", self.doc.to_json(), self.formula, self.subst)
    }
}

const ELEMENT_NAMES: [&str; 4] = ["a", "b", "c", "d"];
const FUNCTION_NAMES: [&str; 2] = ["f", "g"];
const PREDICATE_NAMES: [&str; 3] = ["p", "q", "r"];
const VARIABLE_POOL: [&str; 4] = ["w", "x", "y", "z"];

/// Deterministically generates an instance from a seed.
pub fn gen_instance(seed: u64, params: &GenParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc = gen_doc(&mut rng, params);
    let interp = doc.build().expect("generated documents are valid");
    let (formula, subst) = gen_query(&mut rng, &interp, params);
    Instance {
        seed,
        doc,
        formula,
        subst,
    }
}

fn gen_doc(rng: &mut ChaCha8Rng, params: &GenParams) -> InterpretationDoc {
    let size = rng.gen_range(1..=params.max_domain.max(1));
    let elements: Vec<String> = ELEMENT_NAMES
        .iter()
        .take(size)
        .map(|s| s.to_string())
        .collect();

    let mut functions = BTreeMap::new();
    let fn_count = rng.gen_range(0..=params.max_functions.min(FUNCTION_NAMES.len()));
    for name in FUNCTION_NAMES.iter().take(fn_count) {
        let arity = rng.gen_range(0..=params.max_fn_arity);
        let mut table = BTreeMap::new();
        let keys: Vec<Vec<&String>> = if arity == 0 {
            vec![Vec::new()]
        } else {
            (0..arity)
                .map(|_| elements.iter())
                .multi_cartesian_product()
                .collect()
        };
        for key in keys {
            let result = elements[rng.gen_range(0..elements.len())].clone();
            table.insert(key.iter().join(","), result);
        }
        functions.insert(
            name.to_string(),
            FunctionDecl {
                arity,
                table: Some(table),
            },
        );
    }

    let mut predicates = BTreeMap::new();
    let pred_count = rng.gen_range(0..=params.max_predicates.min(PREDICATE_NAMES.len()));
    for name in PREDICATE_NAMES.iter().take(pred_count) {
        let arity = rng.gen_range(0..=params.max_pred_arity);
        let mut tuples = Vec::new();
        let keys: Vec<Vec<&String>> = if arity == 0 {
            vec![Vec::new()]
        } else {
            (0..arity)
                .map(|_| elements.iter())
                .multi_cartesian_product()
                .collect()
        };
        for key in keys {
            if rng.gen_bool(0.5) {
                tuples.push(
                    key.into_iter()
                        .map(|e| TupleEntry::Name(e.clone()))
                        .collect(),
                );
            }
        }
        predicates.insert(name.to_string(), PredicateDecl { arity, tuples });
    }

    InterpretationDoc {
        domain: DomainSpec::Elements(elements),
        functions,
        predicates,
    }
}

/// Generates a formula and an initial state over an arbitrary enumerable
/// interpretation.
pub fn gen_query(
    rng: &mut ChaCha8Rng,
    interp: &Interpretation,
    params: &GenParams,
) -> (Formula, Substitution) {
    let depth = rng.gen_range(0..=params.max_formula_depth);
    let formula = gen_formula(rng, interp, depth);
    let subst = gen_subst(rng, interp, params);
    (formula, subst)
}

fn domain_values(interp: &Interpretation) -> Vec<DomainValue> {
    interp
        .enumerate_domain()
        .expect("generation needs an enumerable domain")
}

fn gen_term(rng: &mut ChaCha8Rng, interp: &Interpretation, depth: usize, pool: &[&str]) -> Term {
    let functions: Vec<(String, usize)> = interp
        .signature()
        .functions()
        .map(|(f, a)| (f.to_string(), a))
        .collect();
    if depth > 0 && !functions.is_empty() && rng.gen_bool(0.6) {
        let (name, arity) = functions[rng.gen_range(0..functions.len())].clone();
        let args = (0..arity)
            .map(|_| gen_term(rng, interp, depth - 1, pool))
            .collect();
        return Term::app(name, args);
    }
    if pool.is_empty() || rng.gen_bool(0.4) {
        let values = domain_values(interp);
        Term::Val(values[rng.gen_range(0..values.len())].clone())
    } else {
        Term::var(pool[rng.gen_range(0..pool.len())])
    }
}

fn gen_leaf(rng: &mut ChaCha8Rng, interp: &Interpretation) -> Formula {
    let predicates: Vec<(String, usize)> = interp
        .signature()
        .predicates()
        .map(|(p, a)| (p.to_string(), a))
        .collect();
    if !predicates.is_empty() && rng.gen_bool(0.5) {
        let (name, arity) = predicates[rng.gen_range(0..predicates.len())].clone();
        let args = (0..arity)
            .map(|_| gen_term(rng, interp, 1, &VARIABLE_POOL))
            .collect();
        Formula::Atom(PredSym::new(name), args)
    } else {
        Formula::Equation(
            gen_term(rng, interp, 2, &VARIABLE_POOL),
            gen_term(rng, interp, 2, &VARIABLE_POOL),
        )
    }
}

fn gen_formula(rng: &mut ChaCha8Rng, interp: &Interpretation, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return gen_leaf(rng, interp);
    }
    match rng.gen_range(0..10) {
        0..=2 => Formula::and(
            gen_formula(rng, interp, depth - 1),
            gen_formula(rng, interp, depth - 1),
        ),
        3..=5 => Formula::or(
            gen_formula(rng, interp, depth - 1),
            gen_formula(rng, interp, depth - 1),
        ),
        6..=7 => Formula::not(gen_formula(rng, interp, depth - 1)),
        _ => Formula::exists(
            Variable::named(VARIABLE_POOL[rng.gen_range(0..VARIABLE_POOL.len())]),
            gen_formula(rng, interp, depth - 1),
        ),
    }
}

fn gen_subst(rng: &mut ChaCha8Rng, interp: &Interpretation, params: &GenParams) -> Substitution {
    let values = domain_values(interp);
    let bound: Vec<&str> = VARIABLE_POOL
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .copied()
        .collect();
    // range terms mention only unbound variables, so the state is resolved:
    // applying it twice changes nothing, as for states evaluation produces
    let free: Vec<&str> = VARIABLE_POOL
        .iter()
        .filter(|name| !bound.contains(name))
        .copied()
        .collect();
    let mut pairs = Vec::new();
    // half the time the state is a plain valuation, which keeps ground
    // instances common
    let valuation_like = rng.gen_bool(0.5);
    for name in bound {
        let var = Variable::named(name);
        let range = if valuation_like || rng.gen_bool(0.5) {
            NormalTerm::value(values[rng.gen_range(0..values.len())].clone())
        } else {
            let term = gen_term(rng, interp, params.max_subst_depth, &free);
            evaluate_unchecked(&term, interp.algebra())
        };
        if range.as_term() == &Term::Var(var.clone()) {
            continue;
        }
        pairs.push((var, range));
    }
    Substitution::from_pairs(pairs).expect("identity bindings skipped")
}

// ---- suite runner ----

#[derive(Clone, Copy, Debug)]
pub struct SuiteParams {
    pub count: u64,
    pub seed: u64,
    pub gen: GenParams,
    pub options: EvalOptions,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SuiteTally {
    pub pass: u64,
    pub fail: u64,
    pub not_applicable: u64,
}

/// Aggregated result of running every check over a seed range.
#[derive(Debug, Serialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub count: u64,
    pub suites: BTreeMap<&'static str, SuiteTally>,
    pub failures: Vec<CheckReport>,
}

impl SuiteSummary {
    pub fn failure_count(&self) -> u64 {
        self.suites.values().map(|t| t.fail).sum()
    }
}

/// Runs all five checks over `count` generated instances starting at
/// `seed`. Reports are merged in seed order.
pub fn run_suites(params: &SuiteParams) -> Result<SuiteSummary, OracleError> {
    run_suites_impl(params, None)
}

/// Like [`run_suites`], but generates formulas and states over a fixed
/// interpretation instead of generating one per seed.
pub fn run_suites_on(
    interp: &Interpretation,
    doc: Option<&InterpretationDoc>,
    params: &SuiteParams,
) -> Result<SuiteSummary, OracleError> {
    if interp.enumerate_domain().is_none() {
        return Err(OracleError::NotEnumerable);
    }
    run_suites_impl(params, Some((interp, doc)))
}

fn run_suites_impl(
    params: &SuiteParams,
    fixed: Option<(&Interpretation, Option<&InterpretationDoc>)>,
) -> Result<SuiteSummary, OracleError> {
    let mut suites: BTreeMap<&'static str, SuiteTally> = CheckName::ALL
        .iter()
        .map(|name| (name.as_str(), SuiteTally::default()))
        .collect();
    let mut failures = Vec::new();

    for i in 0..params.count {
        let seed = params.seed.wrapping_add(i);
        let (interp, doc_value, formula, subst) = match fixed {
            Some((interp, doc)) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (formula, subst) = gen_query(&mut rng, interp, &params.gen);
                (
                    None,
                    doc.map(InterpretationDoc::to_json_value),
                    formula,
                    subst,
                )
            }
            None => {
                let instance = gen_instance(seed, &params.gen);
                let interp = instance.interpretation();
                (
                    Some(interp),
                    Some(instance.doc.to_json_value()),
                    instance.formula,
                    instance.subst,
                )
            }
        };
        let interp_ref: &Interpretation = match (&interp, fixed) {
            (Some(owned), _) => owned,
            (None, Some((shared, _))) => shared,
            (None, None) => unreachable!(),
        };

        let reports = [
            check_soundness_i_with(interp_ref, &formula, &subst, params.options)?,
            check_soundness_ii_with(interp_ref, &formula, &subst, params.options)?,
            check_note_i_with(interp_ref, &formula, &subst, params.options)?,
            check_note_ii_with(interp_ref, &formula, &subst, params.options)?,
            check_note_equality(interp_ref, &formula, &subst)?,
        ];
        for mut report in reports {
            let tally = suites
                .get_mut(report.check.as_str())
                .expect("all names present");
            match report.verdict {
                Verdict::Pass => tally.pass += 1,
                Verdict::Fail => tally.fail += 1,
                Verdict::NotApplicable => tally.not_applicable += 1,
            }
            if report.verdict == Verdict::Fail {
                report.inputs.seed = Some(seed);
                report.inputs.interpretation = doc_value.clone();
                failures.push(report);
            }
        }
    }

    Ok(SuiteSummary {
        seed: params.seed,
        count: params.count,
        suites,
        failures,
    })
}
