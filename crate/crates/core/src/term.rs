//! Terms over an algebra.
//!
//! A [`Term`] is a syntax tree whose leaves are variables, constants
//! (arity-0 function symbols) or embedded domain values, so terms can mix
//! syntax with semantics. Evaluation collapses every maximal ground
//! subterm to its value in the algebra, producing a [`NormalTerm`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use thiserror::Error;

/// A variable. Variables produced by a [`FreshSupply`] carry a numeric tag
/// and render with a leading underscore; the parser reserves that prefix,
/// so generated names can never collide with user input.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    name: String,
    tag: Option<u32>,
}

impl Variable {
    pub fn named(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            tag: None,
        }
    }

    pub fn generated(name: impl Into<String>, tag: u32) -> Self {
        Variable {
            name: name.into(),
            tag: Some(tag),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tag(&self) -> Option<u32> {
        self.tag
    }

    /// True for variables minted by a [`FreshSupply`].
    pub fn is_generated(&self) -> bool {
        self.tag.is_some()
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            None => write!(f, "{}", self.name),
            Some(tag) => write!(f, "_{}{}", self.name, tag),
        }
    }
}

/// A function symbol. Constants are function symbols of arity zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnSym(String);

impl FnSym {
    pub fn new(name: impl Into<String>) -> Self {
        FnSym(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for FnSym {
    fn from(name: &str) -> Self {
        FnSym(name.to_owned())
    }
}

impl From<String> for FnSym {
    fn from(name: String) -> Self {
        FnSym(name)
    }
}

impl fmt::Display for FnSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A predicate symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredSym(String);

impl PredSym {
    pub fn new(name: impl Into<String>) -> Self {
        PredSym(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for PredSym {
    fn from(name: &str) -> Self {
        PredSym(name.to_owned())
    }
}

impl From<String> for PredSym {
    fn from(name: String) -> Self {
        PredSym(name)
    }
}

impl fmt::Display for PredSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A variable-free term, used as a domain element of term algebras.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundTerm {
    pub sym: FnSym,
    pub args: Vec<GroundTerm>,
}

impl GroundTerm {
    pub fn new(sym: impl Into<FnSym>, args: Vec<GroundTerm>) -> Self {
        GroundTerm {
            sym: sym.into(),
            args,
        }
    }

    pub fn constant(sym: impl Into<FnSym>) -> Self {
        GroundTerm {
            sym: sym.into(),
            args: Vec::new(),
        }
    }

    /// The ground term as a plain [`Term`].
    pub fn to_term(&self) -> Term {
        Term::App(
            self.sym.clone(),
            self.args.iter().map(GroundTerm::to_term).collect(),
        )
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// An element of an algebra's domain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DomainValue {
    /// An arbitrary-precision integer (integer algebra).
    Int(BigInt),
    /// A ground term standing for itself (term algebras).
    Term(GroundTerm),
    /// A named element of a finite algebra.
    Elem(String),
}

impl fmt::Display for DomainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainValue::Int(n) => write!(f, "{}", n),
            DomainValue::Term(t) => write!(f, "{}", t),
            DomainValue::Elem(name) => write!(f, "{}", name),
        }
    }
}

/// A term whose leaves may be variables, domain values, or constants, and
/// whose inner nodes apply function symbols.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Variable),
    Val(DomainValue),
    App(FnSym, Vec<Term>),
}

impl Term {
    pub fn var(v: impl Into<String>) -> Self {
        Term::Var(Variable::named(v))
    }

    pub fn val(d: DomainValue) -> Self {
        Term::Val(d)
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        Term::Val(DomainValue::Int(n.into()))
    }

    pub fn app(sym: impl Into<FnSym>, args: Vec<Term>) -> Self {
        Term::App(sym.into(), args)
    }

    /// An occurrence of an arity-0 function symbol.
    pub fn constant(sym: impl Into<FnSym>) -> Self {
        Term::App(sym.into(), Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Val(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// The set of variables occurring in the term.
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    pub(crate) fn collect_variables(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Val(_) => {}
            Term::App(_, args) => {
                for arg in args {
                    arg.collect_variables(out);
                }
            }
        }
    }

    /// True iff `x` occurs in the term.
    pub fn occurs(&self, x: &Variable) -> bool {
        match self {
            Term::Var(v) => v == x,
            Term::Val(_) => false,
            Term::App(_, args) => args.iter().any(|arg| arg.occurs(x)),
        }
    }

    /// Replaces every embedded ground-term value by its syntactic form.
    /// Over a term algebra this is the inverse of evaluation.
    pub fn expand_term_values(&self) -> Term {
        match self {
            Term::Var(v) => Term::Var(v.clone()),
            Term::Val(DomainValue::Term(g)) => g.to_term(),
            Term::Val(d) => Term::Val(d.clone()),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(Term::expand_term_values).collect(),
            ),
        }
    }
}

/// A term in evaluated normal form: no constant leaves remain, and no node
/// applies a function symbol to values only. A ground normal term is a
/// single value leaf.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalTerm(Term);

impl NormalTerm {
    /// Wraps a bare variable, which is trivially in normal form.
    pub fn variable(v: Variable) -> Self {
        NormalTerm(Term::Var(v))
    }

    /// Wraps a domain value, which is trivially in normal form.
    pub fn value(d: DomainValue) -> Self {
        NormalTerm(Term::Val(d))
    }

    pub fn as_term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }

    /// The value of a ground normal term.
    pub fn as_value(&self) -> Option<&DomainValue> {
        match &self.0 {
            Term::Val(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.as_value().is_some()
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        self.0.variables()
    }
}

impl fmt::Display for NormalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Declares the function and predicate symbols of a language, with their
/// arities. The two namespaces are disjoint, and a symbol may not be
/// declared twice with different arities. The integer signature admits an
/// unbounded family of integer-literal constants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    functions: BTreeMap<FnSym, usize>,
    predicates: BTreeMap<PredSym, usize>,
    int_literals: bool,
}

/// Violations of the signature invariants.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{0}` declared twice with different arities")]
    ConflictingArity(String),
    #[error("symbol `{0}` declared as both a function and a predicate")]
    NamespaceClash(String),
    #[error("symbol name `{0}` is reserved")]
    ReservedName(String),
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    /// The signature of integer arithmetic: binary `*`, `+`, `-`, unary
    /// minus (internally named `neg`), and every integer literal as a
    /// constant.
    pub fn integer() -> Self {
        let mut sig = Signature {
            int_literals: true,
            ..Signature::default()
        };
        for op in ["*", "+", "-"] {
            sig.add_function(op, 2).expect("fresh signature");
        }
        sig.add_function("neg", 1).expect("fresh signature");
        sig
    }

    fn check_name(name: &str) -> Result<(), SignatureError> {
        if name.is_empty() || name.starts_with('_') || name == "=" || name == "exists" {
            return Err(SignatureError::ReservedName(name.to_owned()));
        }
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        Self::check_name(name)?;
        if self.predicates.contains_key(&PredSym::new(name)) {
            return Err(SignatureError::NamespaceClash(name.to_owned()));
        }
        match self.functions.get(&FnSym::new(name)) {
            Some(&old) if old != arity => Err(SignatureError::ConflictingArity(name.to_owned())),
            Some(_) => Ok(()),
            None => {
                self.functions.insert(FnSym::new(name), arity);
                Ok(())
            }
        }
    }

    pub fn add_predicate(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        Self::check_name(name)?;
        if self.functions.contains_key(&FnSym::new(name)) {
            return Err(SignatureError::NamespaceClash(name.to_owned()));
        }
        match self.predicates.get(&PredSym::new(name)) {
            Some(&old) if old != arity => Err(SignatureError::ConflictingArity(name.to_owned())),
            Some(_) => Ok(()),
            None => {
                self.predicates.insert(PredSym::new(name), arity);
                Ok(())
            }
        }
    }

    pub fn has_int_literals(&self) -> bool {
        self.int_literals
    }

    pub fn is_int_literal(&self, name: &str) -> bool {
        self.int_literals && !name.is_empty() && name.bytes().all(|b| b.is_ascii_digit())
    }

    /// Arity of a function symbol, including literal constants.
    pub fn fn_arity(&self, sym: &FnSym) -> Option<usize> {
        if let Some(&arity) = self.functions.get(sym) {
            return Some(arity);
        }
        self.is_int_literal(sym.as_str()).then_some(0)
    }

    pub fn pred_arity(&self, sym: &PredSym) -> Option<usize> {
        self.predicates.get(sym).copied()
    }

    pub fn functions(&self) -> impl Iterator<Item = (&FnSym, usize)> {
        self.functions.iter().map(|(f, &a)| (f, a))
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&PredSym, usize)> {
        self.predicates.iter().map(|(p, &a)| (p, a))
    }

    /// Constants = declared arity-0 function symbols (literals excluded).
    pub fn constants(&self) -> impl Iterator<Item = &FnSym> {
        self.functions
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(f, _)| f)
    }
}

/// An algebra: a domain together with a total meaning for every function
/// symbol of its signature. Implementations are immutable and shareable.
pub trait Algebra: fmt::Debug + Send + Sync {
    fn signature(&self) -> &Signature;

    /// Value equality on the domain.
    fn value_eq(&self, a: &DomainValue, b: &DomainValue) -> bool {
        a == b
    }

    /// The meaning of `f` applied to domain values. Total for every symbol
    /// of the signature; arity-0 symbols yield the value of the constant.
    fn apply_symbol(&self, f: &FnSym, args: &[DomainValue]) -> DomainValue;

    /// Whether a value belongs to this algebra's domain.
    fn contains_value(&self, value: &DomainValue) -> bool;

    /// A duplicate-free enumeration of the domain, when it is finite.
    fn enumerate(&self) -> Option<Vec<DomainValue>> {
        None
    }

    /// All argument tuples that `f` maps to `value`. Empty when inversion
    /// is unsupported; used only to strengthen syntactic matching.
    fn preimages(&self, _f: &FnSym, _value: &DomainValue) -> Vec<Vec<DomainValue>> {
        Vec::new()
    }

    /// Names the concrete syntax should read as domain constants. Finite
    /// algebras expose their element names here.
    fn value_constants(&self) -> Option<&BTreeSet<String>> {
        None
    }
}

/// Structural problems with user input: unknown symbols, arity mismatches,
/// or identifiers reserved for generated variables. Distinct from the
/// semantic `error` state, which is a value, not a failure.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MalformedInput {
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
    #[error("function `{sym}` expects {expected} argument(s), got {found}")]
    FunctionArity {
        sym: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown predicate symbol `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{sym}` expects {expected} argument(s), got {found}")]
    PredicateArity {
        sym: String,
        expected: usize,
        found: usize,
    },
    #[error("variable `{0}` uses the reserved generated-variable form")]
    ReservedVariable(String),
    #[error("value `{0}` does not belong to the algebra's domain")]
    ForeignValue(String),
}

/// Checks that every symbol and embedded value of `t` belongs to the
/// algebra.
pub fn validate_term(t: &Term, algebra: &dyn Algebra) -> Result<(), MalformedInput> {
    match t {
        Term::Var(_) => Ok(()),
        Term::Val(d) => {
            if algebra.contains_value(d) {
                Ok(())
            } else {
                Err(MalformedInput::ForeignValue(d.to_string()))
            }
        }
        Term::App(f, args) => {
            match algebra.signature().fn_arity(f) {
                None => return Err(MalformedInput::UnknownFunction(f.to_string())),
                Some(arity) if arity != args.len() => {
                    return Err(MalformedInput::FunctionArity {
                        sym: f.to_string(),
                        expected: arity,
                        found: args.len(),
                    })
                }
                Some(_) => {}
            }
            args.iter().try_for_each(|arg| validate_term(arg, algebra))
        }
    }
}

/// Evaluates a term: replaces each constant by its value and repeatedly
/// collapses every application whose arguments are all values. Equivalently,
/// replaces each maximal ground subterm by its value. Idempotent.
pub fn evaluate(t: &Term, algebra: &dyn Algebra) -> Result<NormalTerm, MalformedInput> {
    validate_term(t, algebra)?;
    Ok(evaluate_unchecked(t, algebra))
}

/// Evaluation for terms already known to be well formed over the algebra.
pub(crate) fn evaluate_unchecked(t: &Term, algebra: &dyn Algebra) -> NormalTerm {
    match t {
        Term::Var(v) => NormalTerm(Term::Var(v.clone())),
        Term::Val(d) => NormalTerm(Term::Val(d.clone())),
        Term::App(f, args) => {
            let args: Vec<NormalTerm> = args
                .iter()
                .map(|arg| evaluate_unchecked(arg, algebra))
                .collect();
            if let Some(values) = args
                .iter()
                .map(|arg| arg.as_value().cloned())
                .collect::<Option<Vec<DomainValue>>>()
            {
                NormalTerm(Term::Val(algebra.apply_symbol(f, &values)))
            } else {
                NormalTerm(Term::App(
                    f.clone(),
                    args.into_iter().map(NormalTerm::into_term).collect(),
                ))
            }
        }
    }
}

/// Structural identity of terms, with the algebra's value equality at value
/// leaves.
pub(crate) fn terms_equal(a: &Term, b: &Term, algebra: &dyn Algebra) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => x == y,
        (Term::Val(d), Term::Val(e)) => algebra.value_eq(d, e),
        (Term::App(f, fa), Term::App(g, ga)) => {
            f == g
                && fa.len() == ga.len()
                && fa.iter().zip(ga).all(|(x, y)| terms_equal(x, y, algebra))
        }
        _ => false,
    }
}

/// Identity of normal terms. Two normal terms denote the same object iff
/// they are structurally identical, comparing value leaves with the
/// algebra's value equality.
pub fn normal_terms_equal(a: &NormalTerm, b: &NormalTerm, algebra: &dyn Algebra) -> bool {
    terms_equal(a.as_term(), b.as_term(), algebra)
}

/// Parses a literal constant's name as an integer value.
pub(crate) fn literal_value(name: &str) -> BigInt {
    BigInt::from_str(name).expect("validated integer literal")
}

/// A monotone supply of generated variables `_y1, _y2, ...`, guaranteed
/// distinct from every user-written variable (the parser reserves the `_`
/// prefix) and from previously generated ones.
#[derive(Clone, Debug)]
pub struct FreshSupply {
    next: u32,
}

impl FreshSupply {
    pub fn new() -> Self {
        FreshSupply { next: 1 }
    }

    /// A supply whose first variable is `_y<n>`; supplies with disjoint
    /// ranges may be used to demonstrate choice-of-name independence.
    pub fn starting_at(n: u32) -> Self {
        FreshSupply { next: n.max(1) }
    }

    pub fn fresh(&mut self) -> Variable {
        let v = Variable::generated("y", self.next);
        self.next += 1;
        v
    }

    /// Advances the supply past every tagged variable in `vars`.
    pub fn reserve<'a>(&mut self, vars: impl IntoIterator<Item = &'a Variable>) {
        for v in vars {
            if let Some(tag) = v.tag() {
                self.next = self.next.max(tag + 1);
            }
        }
    }
}

impl Default for FreshSupply {
    fn default() -> Self {
        FreshSupply::new()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

// Precedence levels for printing: 1 = additive, 2 = multiplicative,
// 3 = unary minus, 4 = atomic. Infix rendering is keyed on name and arity
// so printing needs no signature.
fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    match t {
        Term::Var(v) => write!(f, "{}", v),
        Term::Val(DomainValue::Int(n)) => {
            if n.sign() == num_bigint::Sign::Minus && min > 3 {
                write!(f, "({})", n)
            } else {
                write!(f, "{}", n)
            }
        }
        Term::Val(DomainValue::Term(g)) => write_term(f, &g.to_term(), min),
        Term::Val(DomainValue::Elem(name)) => write!(f, "{}", name),
        Term::App(sym, args) => match (sym.as_str(), args.len()) {
            ("+", 2) | ("-", 2) => write_infix(f, sym.as_str(), &args[0], &args[1], 1, min),
            ("*", 2) => write_infix(f, "*", &args[0], &args[1], 2, min),
            ("neg", 1) => {
                let parens = min > 3;
                if parens {
                    write!(f, "(")?;
                }
                write!(f, "-")?;
                write_term(f, &args[0], 3)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            (_, 0) => write!(f, "{}", sym),
            _ => {
                write!(f, "{}(", sym)?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write_term(f, arg, 0)?;
                }
                write!(f, ")")
            }
        },
    }
}

fn write_infix(
    f: &mut fmt::Formatter<'_>,
    op: &str,
    lhs: &Term,
    rhs: &Term,
    level: u8,
    min: u8,
) -> fmt::Result {
    let parens = min > level;
    if parens {
        write!(f, "(")?;
    }
    write_term(f, lhs, level)?;
    write!(f, " {} ", op)?;
    write_term(f, rhs, level + 1)?;
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}
