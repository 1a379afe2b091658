//! Concrete algebras and interpretations.
//!
//! An interpretation pairs an algebra (term, integer, or finite-table)
//! with an explicit relation for every predicate symbol. Interpretations
//! are described on disk by a small JSON document; see the repository
//! docs for the schema.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use itertools::Itertools;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::subst::Substitution;
use crate::term::{
    evaluate, Algebra, DomainValue, FnSym, GroundTerm, MalformedInput, PredSym, Signature,
    SignatureError, Term,
};

/// The term algebra over a signature: every ground term denotes itself, so
/// evaluation is the identity up to the embedding of ground terms as
/// values. The signature must declare at least one constant, otherwise the
/// domain would be empty.
#[derive(Debug)]
pub struct HerbrandAlgebra {
    signature: Signature,
}

impl HerbrandAlgebra {
    pub fn new(signature: Signature) -> Result<Self, ModelError> {
        if signature.constants().next().is_none() {
            return Err(ModelError::NoConstants);
        }
        if signature.has_int_literals() {
            return Err(ModelError::BadName("integer literals".into()));
        }
        Ok(HerbrandAlgebra { signature })
    }

    fn term_over_signature(&self, g: &GroundTerm) -> bool {
        self.signature.fn_arity(&g.sym) == Some(g.args.len())
            && g.args.iter().all(|arg| self.term_over_signature(arg))
    }
}

impl Algebra for HerbrandAlgebra {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn apply_symbol(&self, f: &FnSym, args: &[DomainValue]) -> DomainValue {
        let args = args
            .iter()
            .map(|d| match d {
                DomainValue::Term(g) => g.clone(),
                other => panic!("term algebra applied to foreign value {other}"),
            })
            .collect();
        DomainValue::Term(GroundTerm {
            sym: f.clone(),
            args,
        })
    }

    fn contains_value(&self, value: &DomainValue) -> bool {
        matches!(value, DomainValue::Term(g) if self.term_over_signature(g))
    }

    fn enumerate(&self) -> Option<Vec<DomainValue>> {
        // Finite exactly when every function symbol is a constant.
        if self.signature.functions().any(|(_, arity)| arity > 0) {
            return None;
        }
        Some(
            self.signature
                .constants()
                .map(|c| DomainValue::Term(GroundTerm::constant(c.clone())))
                .collect(),
        )
    }

    fn preimages(&self, f: &FnSym, value: &DomainValue) -> Vec<Vec<DomainValue>> {
        match value {
            DomainValue::Term(g) if &g.sym == f => {
                vec![g.args.iter().cloned().map(DomainValue::Term).collect()]
            }
            _ => Vec::new(),
        }
    }
}

/// The standard algebra of arbitrary-precision integer arithmetic.
#[derive(Debug)]
pub struct IntegerAlgebra {
    signature: Signature,
}

impl IntegerAlgebra {
    pub fn new() -> Self {
        IntegerAlgebra {
            signature: Signature::integer(),
        }
    }
}

impl Default for IntegerAlgebra {
    fn default() -> Self {
        IntegerAlgebra::new()
    }
}

impl Algebra for IntegerAlgebra {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn apply_symbol(&self, f: &FnSym, args: &[DomainValue]) -> DomainValue {
        let int = |d: &DomainValue| match d {
            DomainValue::Int(n) => n.clone(),
            other => panic!("integer algebra applied to foreign value {other}"),
        };
        let result: BigInt = match (f.as_str(), args.len()) {
            ("+", 2) => int(&args[0]) + int(&args[1]),
            ("-", 2) => int(&args[0]) - int(&args[1]),
            ("*", 2) => int(&args[0]) * int(&args[1]),
            ("neg", 1) => -int(&args[0]),
            (name, 0) if self.signature.is_int_literal(name) => crate::term::literal_value(name),
            _ => panic!("unknown integer symbol {f}/{}", args.len()),
        };
        DomainValue::Int(result)
    }

    fn contains_value(&self, value: &DomainValue) -> bool {
        matches!(value, DomainValue::Int(_))
    }
}

/// Rows of a function table: `(arguments, result)` over element names.
pub type TableRows<'a> = Vec<(Vec<&'a str>, &'a str)>;

/// An algebra over a finite set of named elements, with every function
/// symbol given by a total table.
#[derive(Debug)]
pub struct FiniteAlgebra {
    signature: Signature,
    elements: Vec<String>,
    element_set: BTreeSet<String>,
    tables: BTreeMap<FnSym, BTreeMap<Vec<DomainValue>, DomainValue>>,
}

impl FiniteAlgebra {
    pub fn new(
        elements: Vec<String>,
        tables: BTreeMap<FnSym, (usize, BTreeMap<Vec<DomainValue>, DomainValue>)>,
    ) -> Result<Self, ModelError> {
        if elements.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        let mut element_set = BTreeSet::new();
        for e in &elements {
            check_identifier(e)?;
            if !element_set.insert(e.clone()) {
                return Err(ModelError::DuplicateElement(e.clone()));
            }
        }
        let mut signature = Signature::new();
        let mut plain_tables = BTreeMap::new();
        for (f, (arity, table)) in tables {
            if element_set.contains(f.as_str()) {
                return Err(ModelError::ElementClash(f.to_string()));
            }
            signature.add_function(f.as_str(), arity)?;
            let domain_values: Vec<DomainValue> =
                elements.iter().cloned().map(DomainValue::Elem).collect();
            // totality: every argument tuple must be present
            for tuple in (0..arity)
                .map(|_| domain_values.iter())
                .multi_cartesian_product()
            {
                let key: Vec<DomainValue> = tuple.into_iter().cloned().collect();
                match table.get(&key) {
                    Some(DomainValue::Elem(e)) if element_set.contains(e) => {}
                    Some(other) => {
                        return Err(ModelError::UnknownElement(other.to_string()));
                    }
                    None => {
                        return Err(ModelError::PartialTable {
                            function: f.to_string(),
                            missing: key.iter().map(|d| d.to_string()).join(","),
                        })
                    }
                }
            }
            if arity == 0 {
                // the loop above is empty for constants; check explicitly
                let key: Vec<DomainValue> = Vec::new();
                match table.get(&key) {
                    Some(DomainValue::Elem(e)) if element_set.contains(e) => {}
                    Some(other) => return Err(ModelError::UnknownElement(other.to_string())),
                    None => {
                        return Err(ModelError::PartialTable {
                            function: f.to_string(),
                            missing: String::new(),
                        })
                    }
                }
            }
            for key in table.keys() {
                if key.len() != arity
                    || key
                        .iter()
                        .any(|d| !matches!(d, DomainValue::Elem(e) if element_set.contains(e)))
                {
                    return Err(ModelError::PartialTable {
                        function: f.to_string(),
                        missing: key.iter().map(|d| d.to_string()).join(","),
                    });
                }
            }
            plain_tables.insert(f, table);
        }
        Ok(FiniteAlgebra {
            signature,
            elements,
            element_set,
            tables: plain_tables,
        })
    }

    /// Convenience constructor from element names and rows of
    /// `(arguments, result)` per function.
    pub fn from_parts(
        elements: Vec<String>,
        functions: Vec<(&str, TableRows<'_>)>,
    ) -> Result<Self, ModelError> {
        let mut tables = BTreeMap::new();
        for (name, rows) in functions {
            let arity = rows.first().map(|(args, _)| args.len()).unwrap_or(0);
            let mut table = BTreeMap::new();
            for (args, result) in rows {
                table.insert(
                    args.into_iter()
                        .map(|a| DomainValue::Elem(a.to_owned()))
                        .collect(),
                    DomainValue::Elem(result.to_owned()),
                );
            }
            tables.insert(FnSym::new(name), (arity, table));
        }
        FiniteAlgebra::new(elements, tables)
    }

    pub(crate) fn add_predicates_to_signature(
        &mut self,
        predicates: impl IntoIterator<Item = (String, usize)>,
    ) -> Result<(), ModelError> {
        for (name, arity) in predicates {
            if self.element_set.contains(&name) {
                return Err(ModelError::ElementClash(name));
            }
            self.signature.add_predicate(&name, arity)?;
        }
        Ok(())
    }
}

impl Algebra for FiniteAlgebra {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn apply_symbol(&self, f: &FnSym, args: &[DomainValue]) -> DomainValue {
        self.tables
            .get(f)
            .and_then(|table| table.get(args))
            .unwrap_or_else(|| panic!("table for {f} has no entry for {args:?}"))
            .clone()
    }

    fn contains_value(&self, value: &DomainValue) -> bool {
        matches!(value, DomainValue::Elem(e) if self.element_set.contains(e))
    }

    fn enumerate(&self) -> Option<Vec<DomainValue>> {
        Some(
            self.elements
                .iter()
                .cloned()
                .map(DomainValue::Elem)
                .collect(),
        )
    }

    fn preimages(&self, f: &FnSym, value: &DomainValue) -> Vec<Vec<DomainValue>> {
        match self.tables.get(f) {
            Some(table) => table
                .iter()
                .filter(|(_, result)| *result == value)
                .map(|(args, _)| args.clone())
                .collect(),
            None => Vec::new(),
        }
    }

    fn value_constants(&self) -> Option<&BTreeSet<String>> {
        Some(&self.element_set)
    }
}

/// Truth status of an instantiated atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomStatus {
    True,
    False,
    /// Some argument instance is non-ground, so membership is undetermined.
    Nonground,
}

/// An algebra together with a decidable relation for every predicate
/// symbol of the signature. Immutable once constructed.
#[derive(Debug)]
pub struct Interpretation {
    algebra: Box<dyn Algebra>,
    relations: BTreeMap<PredSym, BTreeSet<Vec<DomainValue>>>,
}

impl Interpretation {
    pub fn new(
        algebra: Box<dyn Algebra>,
        relations: BTreeMap<PredSym, BTreeSet<Vec<DomainValue>>>,
    ) -> Result<Self, ModelError> {
        let mut relations = relations;
        for (p, arity) in algebra.signature().predicates() {
            let tuples = relations.entry(p.clone()).or_default();
            for tuple in tuples.iter() {
                if tuple.len() != arity {
                    return Err(ModelError::TupleArity {
                        predicate: p.to_string(),
                        expected: arity,
                        found: tuple.len(),
                    });
                }
                for value in tuple {
                    if !algebra.contains_value(value) {
                        return Err(ModelError::UnknownElement(value.to_string()));
                    }
                }
            }
        }
        let declared: BTreeSet<&PredSym> = relations.keys().collect();
        for p in declared {
            if algebra.signature().pred_arity(p).is_none() {
                return Err(ModelError::BadName(p.to_string()));
            }
        }
        Ok(Interpretation { algebra, relations })
    }

    /// The integer interpretation with no predicates.
    pub fn integer() -> Self {
        Interpretation {
            algebra: Box::new(IntegerAlgebra::new()),
            relations: BTreeMap::new(),
        }
    }

    pub fn herbrand(signature: Signature) -> Result<Self, ModelError> {
        Ok(Interpretation {
            algebra: Box::new(HerbrandAlgebra::new(signature)?),
            relations: BTreeMap::new(),
        })
    }

    pub fn algebra(&self) -> &dyn Algebra {
        self.algebra.as_ref()
    }

    pub fn signature(&self) -> &Signature {
        self.algebra.signature()
    }

    pub fn relation(&self, p: &PredSym) -> Option<&BTreeSet<Vec<DomainValue>>> {
        self.relations.get(p)
    }

    /// The domain as a finite duplicate-free list, when one exists.
    pub fn enumerate_domain(&self) -> Option<Vec<DomainValue>> {
        self.algebra.enumerate()
    }

    /// Status of `p(args)` under `theta`: non-ground if some instantiated
    /// argument is non-ground, otherwise decided by table membership.
    pub fn atom_status(
        &self,
        p: &PredSym,
        args: &[Term],
        theta: &Substitution,
    ) -> Result<AtomStatus, MalformedInput> {
        match self.signature().pred_arity(p) {
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
        let mut tuple = Vec::with_capacity(args.len());
        for arg in args {
            let normal = evaluate(&theta.apply(arg), self.algebra())?;
            match normal.as_value() {
                Some(value) => tuple.push(value.clone()),
                None => return Ok(AtomStatus::Nonground),
            }
        }
        let holds = self
            .relations
            .get(p)
            .map(|rel| rel.contains(&tuple))
            .unwrap_or(false);
        Ok(if holds {
            AtomStatus::True
        } else {
            AtomStatus::False
        })
    }
}

fn check_identifier(name: &str) -> Result<(), ModelError> {
    let mut chars = name.chars();
    let ok = match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    };
    if ok && name != "exists" {
        Ok(())
    } else {
        Err(ModelError::BadName(name.to_owned()))
    }
}

fn check_symbol_name(name: &str, arity: usize) -> Result<(), ModelError> {
    // operator names are allowed at their conventional arities so that
    // custom algebras can reuse the infix syntax
    match (name, arity) {
        ("+", 2) | ("-", 2) | ("*", 2) | ("neg", 1) => Ok(()),
        _ => check_identifier(name),
    }
}

/// Problems constructing an interpretation or reading its document.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid interpretation document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("the domain must not be empty")]
    EmptyDomain,
    #[error("domain element `{0}` declared twice")]
    DuplicateElement(String),
    #[error("`{0}` is not a valid name here")]
    BadName(String),
    #[error("unknown domain element `{0}`")]
    UnknownElement(String),
    #[error("function `{0}` needs a table over a finite domain")]
    MissingTable(String),
    #[error("function `{0}` must not carry a table for this domain")]
    UnexpectedTable(String),
    #[error("table for function `{function}` has no entry for ({missing})")]
    PartialTable { function: String, missing: String },
    #[error("tuple for predicate `{predicate}` has {found} entries, expected {expected}")]
    TupleArity {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("cannot read `{entry}` in a tuple for predicate `{predicate}`: {reason}")]
    BadTupleEntry {
        predicate: String,
        entry: String,
        reason: String,
    },
    #[error("the integer domain has a fixed function signature; remove `functions`")]
    FunctionsFixed,
    #[error("a term domain needs at least one constant")]
    NoConstants,
    #[error("`{0}` is declared both as a domain element and as a symbol")]
    ElementClash(String),
}

/// On-disk description of an interpretation.
///
/// `domain` is either a list of element names, `"int"`, or `"herbrand"`.
/// Finite domains give every function a total `table` keyed by
/// comma-joined argument names; term domains declare arities only;
/// the integer domain declares no functions at all. Predicates list their
/// extension as explicit tuples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpretationDoc {
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, FunctionDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub predicates: BTreeMap<String, PredicateDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Kind(String),
    Elements(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub arity: usize,
    #[serde(default)]
    pub tuples: Vec<Vec<TupleEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TupleEntry {
    Int(i64),
    Name(String),
}

impl fmt::Display for TupleEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TupleEntry::Int(n) => write!(f, "{}", n),
            TupleEntry::Name(s) => write!(f, "{}", s),
        }
    }
}

impl InterpretationDoc {
    pub fn from_json(src: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serialization")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("document serialization")
    }

    /// Builds the interpretation this document describes.
    pub fn build(&self) -> Result<Interpretation, ModelError> {
        match &self.domain {
            DomainSpec::Kind(kind) if kind == "int" => self.build_integer(),
            DomainSpec::Kind(kind) if kind == "herbrand" => self.build_herbrand(),
            DomainSpec::Kind(kind) => Err(ModelError::BadName(kind.clone())),
            DomainSpec::Elements(elements) => self.build_finite(elements),
        }
    }

    fn build_integer(&self) -> Result<Interpretation, ModelError> {
        if !self.functions.is_empty() {
            return Err(ModelError::FunctionsFixed);
        }
        let mut signature = Signature::integer();
        for (name, decl) in &self.predicates {
            check_identifier(name)?;
            signature.add_predicate(name, decl.arity)?;
        }
        let algebra = IntegerAlgebra { signature };
        let mut relations: BTreeMap<PredSym, BTreeSet<Vec<DomainValue>>> = BTreeMap::new();
        for (name, decl) in &self.predicates {
            let mut tuples = BTreeSet::new();
            for tuple in &decl.tuples {
                let mut values = Vec::with_capacity(tuple.len());
                for entry in tuple {
                    let value = match entry {
                        TupleEntry::Int(n) => DomainValue::Int(BigInt::from(*n)),
                        TupleEntry::Name(s) => {
                            s.parse::<BigInt>().map(DomainValue::Int).map_err(|e| {
                                ModelError::BadTupleEntry {
                                    predicate: name.clone(),
                                    entry: s.clone(),
                                    reason: e.to_string(),
                                }
                            })?
                        }
                    };
                    values.push(value);
                }
                tuples.insert(values);
            }
            relations.insert(PredSym::new(name), tuples);
        }
        Interpretation::new(Box::new(algebra), relations)
    }

    fn build_herbrand(&self) -> Result<Interpretation, ModelError> {
        let mut signature = Signature::new();
        for (name, decl) in &self.functions {
            check_symbol_name(name, decl.arity)?;
            if decl.table.is_some() {
                return Err(ModelError::UnexpectedTable(name.clone()));
            }
            signature.add_function(name, decl.arity)?;
        }
        for (name, decl) in &self.predicates {
            check_identifier(name)?;
            signature.add_predicate(name, decl.arity)?;
        }
        let algebra = HerbrandAlgebra::new(signature)?;
        let mut relations: BTreeMap<PredSym, BTreeSet<Vec<DomainValue>>> = BTreeMap::new();
        for (name, decl) in &self.predicates {
            let mut tuples = BTreeSet::new();
            for tuple in &decl.tuples {
                let mut values = Vec::with_capacity(tuple.len());
                for entry in tuple {
                    let text = match entry {
                        TupleEntry::Name(s) => s.clone(),
                        TupleEntry::Int(n) => n.to_string(),
                    };
                    let term = crate::syntax::parse_ground_term(&text, algebra.signature())
                        .map_err(|e| ModelError::BadTupleEntry {
                            predicate: name.clone(),
                            entry: text.clone(),
                            reason: e.to_string(),
                        })?;
                    let normal =
                        evaluate(&term, &algebra).map_err(|e| ModelError::BadTupleEntry {
                            predicate: name.clone(),
                            entry: text.clone(),
                            reason: e.to_string(),
                        })?;
                    match normal.as_value() {
                        Some(value) => values.push(value.clone()),
                        None => {
                            return Err(ModelError::BadTupleEntry {
                                predicate: name.clone(),
                                entry: text,
                                reason: "tuple entries must be ground".into(),
                            })
                        }
                    }
                }
                tuples.insert(values);
            }
            relations.insert(PredSym::new(name), tuples);
        }
        Interpretation::new(Box::new(algebra), relations)
    }

    fn build_finite(&self, elements: &[String]) -> Result<Interpretation, ModelError> {
        let element_set: BTreeSet<&String> = elements.iter().collect();
        let mut tables = BTreeMap::new();
        for (name, decl) in &self.functions {
            check_symbol_name(name, decl.arity)?;
            let raw = decl
                .table
                .as_ref()
                .ok_or_else(|| ModelError::MissingTable(name.clone()))?;
            let mut table = BTreeMap::new();
            for (key, result) in raw {
                let args: Vec<DomainValue> = if key.is_empty() {
                    Vec::new()
                } else {
                    key.split(',')
                        .map(|e| {
                            let e = e.trim();
                            if element_set.contains(&e.to_owned()) {
                                Ok(DomainValue::Elem(e.to_owned()))
                            } else {
                                Err(ModelError::UnknownElement(e.to_owned()))
                            }
                        })
                        .collect::<Result<_, _>>()?
                };
                if args.len() != decl.arity {
                    return Err(ModelError::PartialTable {
                        function: name.clone(),
                        missing: key.clone(),
                    });
                }
                table.insert(args, DomainValue::Elem(result.clone()));
            }
            tables.insert(FnSym::new(name), (decl.arity, table));
        }
        let mut algebra = FiniteAlgebra::new(elements.to_vec(), tables)?;
        algebra.add_predicates_to_signature(
            self.predicates
                .iter()
                .map(|(name, decl)| (name.clone(), decl.arity)),
        )?;
        let mut relations: BTreeMap<PredSym, BTreeSet<Vec<DomainValue>>> = BTreeMap::new();
        for (name, decl) in &self.predicates {
            check_identifier(name)?;
            let mut tuples = BTreeSet::new();
            for tuple in &decl.tuples {
                let mut values = Vec::with_capacity(tuple.len());
                for entry in tuple {
                    match entry {
                        TupleEntry::Name(s) if element_set.contains(s) => {
                            values.push(DomainValue::Elem(s.clone()));
                        }
                        other => {
                            return Err(ModelError::BadTupleEntry {
                                predicate: name.clone(),
                                entry: other.to_string(),
                                reason: "not a domain element".into(),
                            })
                        }
                    }
                }
                tuples.insert(values);
            }
            relations.insert(PredSym::new(name), tuples);
        }
        Interpretation::new(Box::new(algebra), relations)
    }
}

impl Interpretation {
    pub fn from_doc(doc: &InterpretationDoc) -> Result<Self, ModelError> {
        doc.build()
    }

    pub fn from_json(src: &str) -> Result<Self, ModelError> {
        InterpretationDoc::from_json(src)?.build()
    }

    pub fn from_path(path: &Path) -> Result<Self, ModelError> {
        let src = std::fs::read_to_string(path)?;
        Self::from_json(&src)
    }
}
