//! Concrete syntax.
//!
//! A hand-rolled lexer and recursive-descent parser for terms, formulas
//! and substitution literals, checked against the active interpretation's
//! signature, plus the canonical printers. Printing then parsing is the
//! identity. ASCII operators stand in for the usual connectives:
//! `&`, `|`, `~`, `*`, and `exists x` for quantified formulas.
//!
//! The grammar ships in `docs/grammar.md`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::interp::Interpretation;
use crate::semantics::Outcome;
use crate::subst::{Substitution, SubstitutionError};
use crate::term::{evaluate, Signature, Term, Variable};

/// Byte range of a token or parse node in the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("parse error at {span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TokenKind {
    Ident,
    Int,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Slash,
    Equals,
    Amp,
    Pipe,
    Tilde,
    Star,
    Plus,
    Minus,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    text: String,
    span: SourceSpan,
}

fn tokenize(input: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let c = bytes[i] as char;
        let kind = match c {
            c if c.is_ascii_whitespace() => {
                i += 1;
                continue;
            }
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            ',' => TokenKind::Comma,
            '/' => TokenKind::Slash,
            '=' => TokenKind::Equals,
            '&' => TokenKind::Amp,
            '|' => TokenKind::Pipe,
            '~' => TokenKind::Tilde,
            '*' => TokenKind::Star,
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            c if c.is_ascii_digit() => {
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Int,
                    text: input[start..i].to_owned(),
                    span: SourceSpan { start, end: i },
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                i += 1;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident,
                    text: input[start..i].to_owned(),
                    span: SourceSpan { start, end: i },
                });
                continue;
            }
            other => {
                return Err(ParseError::new(
                    SourceSpan {
                        start,
                        end: start + other.len_utf8(),
                    },
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        i += 1;
        tokens.push(Token {
            kind,
            text: input[start..i].to_owned(),
            span: SourceSpan { start, end: i },
        });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        span: SourceSpan {
            start: input.len(),
            end: input.len(),
        },
    });
    Ok(tokens)
}

/// What the parser checks names against. `lenient` accepts any consistent
/// input without a signature; otherwise arities and symbol namespaces are
/// enforced and, for finite algebras, element names parse as values.
#[derive(Clone, Copy)]
pub struct ParseEnv<'a> {
    signature: Option<&'a Signature>,
    value_constants: Option<&'a BTreeSet<String>>,
}

impl<'a> ParseEnv<'a> {
    pub fn lenient() -> ParseEnv<'static> {
        ParseEnv {
            signature: None,
            value_constants: None,
        }
    }

    pub fn checked(signature: &'a Signature) -> ParseEnv<'a> {
        ParseEnv {
            signature: Some(signature),
            value_constants: None,
        }
    }

    pub fn for_interpretation(interp: &'a Interpretation) -> ParseEnv<'a> {
        ParseEnv {
            signature: Some(interp.signature()),
            value_constants: interp.algebra().value_constants(),
        }
    }

    fn int_literals(&self) -> bool {
        self.signature.is_none_or(Signature::has_int_literals)
    }

    fn is_element(&self, name: &str) -> bool {
        self.value_constants.is_some_and(|set| set.contains(name))
    }

    fn is_function(&self, name: &str) -> bool {
        self.signature
            .is_some_and(|sig| sig.fn_arity(&name.into()).is_some() && !sig.is_int_literal(name))
    }

    fn is_predicate(&self, name: &str) -> bool {
        self.signature
            .is_some_and(|sig| sig.pred_arity(&name.into()).is_some())
    }

    fn is_symbol(&self, name: &str) -> bool {
        self.is_function(name) || self.is_predicate(name) || self.is_element(name)
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    env: ParseEnv<'a>,
}

impl<'a> Parser<'a> {
    fn new(input: &str, env: ParseEnv<'a>) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(input)?,
            pos: 0,
            env,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> TokenKind {
        self.tokens[self.pos].kind
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, ParseError> {
        if self.peek_kind() == kind {
            Ok(self.next())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let tok = self.peek();
        let found = match tok.kind {
            TokenKind::Eof => "end of input".to_owned(),
            _ => format!("`{}`", tok.text),
        };
        ParseError::new(tok.span, format!("expected {what}, found {found}"))
    }

    fn at_keyword(&self, word: &str) -> bool {
        let tok = self.peek();
        tok.kind == TokenKind::Ident && tok.text == word
    }

    fn finish<T>(&mut self, value: T) -> Result<T, ParseError> {
        if self.peek_kind() == TokenKind::Eof {
            Ok(value)
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    // ---- terms ----

    fn operator_term(
        &mut self,
        name: &str,
        arity: usize,
        span: SourceSpan,
        args: Vec<Term>,
    ) -> Result<Term, ParseError> {
        if let Some(sig) = self.env.signature {
            match sig.fn_arity(&name.into()) {
                Some(a) if a == arity => {}
                _ => {
                    return Err(ParseError::new(
                        span,
                        format!("function symbol `{name}` is not available in this signature"),
                    ))
                }
            }
        }
        Ok(Term::app(name, args))
    }

    fn parse_term_expr(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let (kind, name) = match self.peek_kind() {
                TokenKind::Plus => (TokenKind::Plus, "+"),
                TokenKind::Minus => (TokenKind::Minus, "-"),
                _ => break,
            };
            let span = self.peek().span;
            self.expect(kind, "operator")?;
            let rhs = self.parse_multiplicative()?;
            lhs = self.operator_term(name, 2, span, vec![lhs, rhs])?;
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.parse_unary()?;
        while self.peek_kind() == TokenKind::Star {
            let span = self.peek().span;
            self.next();
            let rhs = self.parse_unary()?;
            lhs = self.operator_term("*", 2, span, vec![lhs, rhs])?;
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Term, ParseError> {
        if self.peek_kind() == TokenKind::Minus {
            let span = self.peek().span;
            self.next();
            let arg = self.parse_unary()?;
            return self.operator_term("neg", 1, span, vec![arg]);
        }
        self.parse_primary_term()
    }

    fn parse_primary_term(&mut self) -> Result<Term, ParseError> {
        match self.peek_kind() {
            TokenKind::LParen => {
                self.next();
                let t = self.parse_term_expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(t)
            }
            TokenKind::Int => {
                let tok = self.next();
                if self.env.int_literals() {
                    Ok(Term::constant(tok.text))
                } else {
                    Err(ParseError::new(
                        tok.span,
                        "integer literals are only available over the integer domain",
                    ))
                }
            }
            TokenKind::Ident => self.parse_ident_term(),
            _ => Err(self.unexpected("a term")),
        }
    }

    fn parse_ident_term(&mut self) -> Result<Term, ParseError> {
        let tok = self.next();
        let name = tok.text.clone();
        if name.starts_with('_') {
            return Err(ParseError::new(
                tok.span,
                format!("`{name}` starts with `_`, which is reserved for generated variables"),
            ));
        }
        if name == "exists" {
            return Err(ParseError::new(tok.span, "`exists` is a reserved word"));
        }
        if self.env.is_element(&name) {
            return Ok(Term::Val(crate::term::DomainValue::Elem(name)));
        }
        let has_args = self.peek_kind() == TokenKind::LParen;
        if self.env.signature.is_some() {
            if self.env.is_predicate(&name) {
                return Err(ParseError::new(
                    tok.span,
                    format!("`{name}` is a predicate symbol, not a term"),
                ));
            }
            if self.env.is_function(&name) {
                let arity = self
                    .env
                    .signature
                    .unwrap()
                    .fn_arity(&name.as_str().into())
                    .unwrap();
                let args = if has_args {
                    self.parse_arguments()?
                } else {
                    Vec::new()
                };
                if args.len() != arity {
                    return Err(ParseError::new(
                        tok.span,
                        format!(
                            "function `{name}` expects {arity} argument(s), got {}",
                            args.len()
                        ),
                    ));
                }
                return Ok(Term::app(name, args));
            }
            if has_args {
                return Err(ParseError::new(
                    tok.span,
                    format!("unknown symbol `{name}`"),
                ));
            }
            return Ok(Term::var(name));
        }
        // lenient: applications are symbols, bare names are variables
        if has_args {
            let args = self.parse_arguments()?;
            Ok(Term::app(name, args))
        } else {
            Ok(Term::var(name))
        }
    }

    fn parse_arguments(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek_kind() != TokenKind::RParen {
            loop {
                args.push(self.parse_term_expr()?);
                if self.peek_kind() == TokenKind::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(args)
    }

    // ---- formulas ----

    fn parse_formula_expr(&mut self) -> Result<Formula, ParseError> {
        if self.at_keyword("exists") {
            return self.parse_exists();
        }
        self.parse_or()
    }

    fn parse_exists(&mut self) -> Result<Formula, ParseError> {
        self.next(); // the keyword; binds as far right as the group allows
        let var = self.parse_bindable_variable("a quantified variable")?;
        let body = self.parse_formula_expr()?;
        Ok(Formula::Exists(var, Box::new(body)))
    }

    fn parse_bindable_variable(&mut self, what: &str) -> Result<Variable, ParseError> {
        let tok = self.expect(TokenKind::Ident, what)?;
        let name = tok.text.clone();
        if name.starts_with('_') {
            return Err(ParseError::new(
                tok.span,
                format!("`{name}` starts with `_`, which is reserved for generated variables"),
            ));
        }
        if name == "exists" {
            return Err(ParseError::new(tok.span, "`exists` is a reserved word"));
        }
        if self.env.is_symbol(&name) {
            return Err(ParseError::new(
                tok.span,
                format!("`{name}` is a declared symbol and cannot be used as a variable"),
            ));
        }
        Ok(Variable::named(name))
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.parse_and()?;
        while self.peek_kind() == TokenKind::Pipe {
            self.next();
            let rhs = if self.at_keyword("exists") {
                self.parse_exists()?
            } else {
                self.parse_and()?
            };
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.parse_not()?;
        while self.peek_kind() == TokenKind::Amp {
            self.next();
            let rhs = if self.at_keyword("exists") {
                self.parse_exists()?
            } else {
                self.parse_not()?
            };
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> Result<Formula, ParseError> {
        if self.peek_kind() == TokenKind::Tilde {
            self.next();
            let inner = self.parse_not()?;
            return Ok(Formula::not(inner));
        }
        self.parse_primary_formula()
    }

    fn parse_primary_formula(&mut self) -> Result<Formula, ParseError> {
        if self.peek_kind() == TokenKind::LParen {
            // could be a parenthesized formula or a parenthesized term on
            // the left of an equation; try the formula reading first
            let saved = self.pos;
            self.next();
            if let Ok(inner) = self.parse_formula_expr() {
                if self.peek_kind() == TokenKind::RParen {
                    let after = self.pos;
                    self.next();
                    // `(t) = s` must reparse as an equation
                    if self.peek_kind() != TokenKind::Equals {
                        return Ok(inner);
                    }
                    self.pos = after;
                }
            }
            self.pos = saved;
            return self.parse_equation();
        }
        if self.peek_kind() == TokenKind::Ident {
            let tok = self.peek().clone();
            let name = tok.text.clone();
            let is_atom = if self.env.signature.is_some() {
                self.env.is_predicate(&name)
            } else {
                // lenient: a bare or applied name not followed by an
                // operator or `=` reads as an atom
                self.lenient_looks_like_atom()
            };
            if is_atom {
                self.next();
                let args = if self.peek_kind() == TokenKind::LParen {
                    self.parse_arguments()?
                } else {
                    Vec::new()
                };
                if let Some(sig) = self.env.signature {
                    let arity = sig.pred_arity(&name.as_str().into()).unwrap();
                    if args.len() != arity {
                        return Err(ParseError::new(
                            tok.span,
                            format!(
                                "predicate `{name}` expects {arity} argument(s), got {}",
                                args.len()
                            ),
                        ));
                    }
                }
                return Ok(Formula::Atom(name.as_str().into(), args));
            }
        }
        self.parse_equation()
    }

    fn lenient_looks_like_atom(&self) -> bool {
        // look ahead past a possible argument list for `=` or an operator
        let mut pos = self.pos + 1;
        if self.tokens[pos].kind == TokenKind::LParen {
            let mut depth = 1;
            pos += 1;
            while depth > 0 && self.tokens[pos].kind != TokenKind::Eof {
                match self.tokens[pos].kind {
                    TokenKind::LParen => depth += 1,
                    TokenKind::RParen => depth -= 1,
                    _ => {}
                }
                pos += 1;
            }
        }
        !matches!(
            self.tokens[pos].kind,
            TokenKind::Equals
                | TokenKind::Plus
                | TokenKind::Minus
                | TokenKind::Star
                | TokenKind::Slash
        )
    }

    fn parse_equation(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.parse_term_expr()?;
        self.expect(TokenKind::Equals, "`=`")?;
        let rhs = self.parse_term_expr()?;
        Ok(Formula::Equation(lhs, rhs))
    }

    // ---- substitutions ----

    fn parse_substitution(&mut self, interp: &Interpretation) -> Result<Substitution, ParseError> {
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut pairs = Vec::new();
        let mut seen = BTreeSet::new();
        if self.peek_kind() != TokenKind::RBrace {
            loop {
                let var_span = self.peek().span;
                let var = self.parse_bindable_variable("a variable")?;
                if !seen.insert(var.clone()) {
                    return Err(ParseError::new(
                        var_span,
                        format!("variable `{var}` bound twice"),
                    ));
                }
                self.expect(TokenKind::Slash, "`/`")?;
                let range_span_start = self.peek().span.start;
                let range = self.parse_term_expr()?;
                let range_span = SourceSpan {
                    start: range_span_start,
                    end: self.tokens[self.pos.saturating_sub(1)].span.end,
                };
                let normal = evaluate(&range, interp.algebra())
                    .map_err(|e| ParseError::new(range_span, e.to_string()))?;
                if normal.as_term() == &Term::Var(var.clone()) {
                    return Err(ParseError::new(
                        range_span,
                        format!("binding maps `{var}` to itself"),
                    ));
                }
                pairs.push((var, normal));
                if self.peek_kind() == TokenKind::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RBrace, "`}`")?;
        Substitution::from_pairs(pairs).map_err(|e: SubstitutionError| {
            ParseError::new(SourceSpan { start: 0, end: 0 }, e.to_string())
        })
    }
}

/// Parses a term against the interpretation's signature.
pub fn parse_term(input: &str, interp: &Interpretation) -> Result<Term, ParseError> {
    let mut p = Parser::new(input, ParseEnv::for_interpretation(interp))?;
    let t = p.parse_term_expr()?;
    p.finish(t)
}

/// Parses a formula against the interpretation's signature.
pub fn parse_formula(input: &str, interp: &Interpretation) -> Result<Formula, ParseError> {
    let mut p = Parser::new(input, ParseEnv::for_interpretation(interp))?;
    let f = p.parse_formula_expr()?;
    p.finish(f)
}

/// Parses a substitution literal `{x/t, ...}`, evaluating every range term
/// to normal form over the interpretation's algebra.
pub fn parse_subst(input: &str, interp: &Interpretation) -> Result<Substitution, ParseError> {
    let mut p = Parser::new(input, ParseEnv::for_interpretation(interp))?;
    let s = p.parse_substitution(interp)?;
    p.finish(s)
}

/// Parses a term over a bare signature; used for ground terms inside
/// interpretation documents.
pub fn parse_ground_term(input: &str, signature: &Signature) -> Result<Term, ParseError> {
    let mut p = Parser::new(input, ParseEnv::checked(signature))?;
    let t = p.parse_term_expr()?;
    p.finish(t)
}

/// Parses a term without a signature: applications are taken at face
/// value and bare names are variables.
pub fn parse_term_lenient(input: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(input, ParseEnv::lenient())?;
    let t = p.parse_term_expr()?;
    p.finish(t)
}

/// Parses a formula without a signature.
pub fn parse_formula_lenient(input: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(input, ParseEnv::lenient())?;
    let f = p.parse_formula_expr()?;
    p.finish(f)
}

/// Canonical textual form of a term; `parse_term` inverts it.
pub fn print_term(t: &Term) -> String {
    t.to_string()
}

/// Canonical textual form of a formula; `parse_formula` inverts it.
pub fn print_formula(phi: &Formula) -> String {
    phi.to_string()
}

/// Canonical textual form of a substitution; `parse_subst` inverts it.
pub fn print_subst(theta: &Substitution) -> String {
    theta.to_string()
}

/// Textual form of an outcome: members in discovery order, `error` last,
/// `false` for finite failure.
pub fn print_outcome(outcome: &Outcome) -> String {
    outcome.to_string()
}
