//! Exact real vectors over a declared basis `{1, θ_1, …, θ_m}`.
//!
//! Rational independence of floating-point numbers cannot be decided, so
//! every irrational quantity enters as a rational combination of named
//! symbols whose joint independence (together with 1) is *declared* by the
//! user. Each symbol also carries a numeric value used only for simulation.
//! Decisions made from these vectors are sound relative to that declaration.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::affine::rational;
use crate::error::{Error, Result};

/// One declared symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolDecl {
    pub name: String,
    /// Source expression of the numeric value, e.g. `sqrt(2) - 1`.
    pub expr: String,
    pub value: f64,
}

/// Ordered symbol basis. Index 0 of every coefficient vector is the
/// rational part; index `j + 1` is the coefficient of symbol `j`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SymbolBasis {
    symbols: Vec<SymbolDecl>,
}

impl SymbolBasis {
    pub fn empty() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn new(symbols: Vec<SymbolDecl>) -> Result<Arc<Self>> {
        for (i, s) in symbols.iter().enumerate() {
            if !is_identifier(&s.name) {
                return Err(Error::Parse(format!("invalid symbol name {:?}", s.name)));
            }
            if !s.value.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "symbol @{} has non-finite value",
                    s.name
                )));
            }
            if symbols[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::InvalidInput(format!("symbol @{} declared twice", s.name)));
            }
        }
        Ok(Arc::new(Self { symbols }))
    }

    /// Declare symbols from `(name, numeric expression)` pairs.
    pub fn from_exprs<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Arc<Self>> {
        let symbols = pairs
            .iter()
            .map(|(n, e)| {
                Ok(SymbolDecl {
                    name: n.as_ref().to_string(),
                    expr: e.as_ref().to_string(),
                    value: eval_numeric(e.as_ref())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// Human-readable statement of the trusted independence assumption.
    pub fn assumption(&self) -> String {
        if self.symbols.is_empty() {
            "no irrational symbols declared; all data rational".to_string()
        } else {
            let names: Vec<String> = self.symbols.iter().map(|s| format!("@{}", s.name)).collect();
            format!(
                "{{1, {}}} declared linearly independent over Q",
                names.join(", ")
            )
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A rational combination `q_0 + Σ q_j θ_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    coeffs: Vec<BigRational>,
}

impl ExactScalar {
    pub fn zero(basis_len: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); basis_len + 1],
        }
    }

    pub fn rational(q: BigRational, basis_len: usize) -> Self {
        let mut s = Self::zero(basis_len);
        s.coeffs[0] = q;
        s
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn symbol(index: usize, basis_len: usize) -> Self {
        let mut s = Self::zero(basis_len);
        s.coeffs[index + 1] = BigRational::one();
        s
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.coeffs[0]
    }

    pub fn symbolic_part(&self) -> &[BigRational] {
        &self.coeffs[1..]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// True when the value is an integer (symbolically).
    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.coeffs[0].is_integer()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * q).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    /// Reduce the rational part into `[0, 1)`.
    pub fn reduce_mod_one(&self) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = &s.coeffs[0] - s.coeffs[0].floor();
        s
    }

    pub fn eval(&self, basis: &SymbolBasis) -> f64 {
        let mut v = self.coeffs[0].to_f64().unwrap_or(f64::NAN);
        for (c, s) in self.coeffs[1..].iter().zip(basis.symbols()) {
            if !c.is_zero() {
                v += c.to_f64().unwrap_or(f64::NAN) * s.value;
            }
        }
        v
    }

    pub fn display<'a>(&'a self, basis: &'a SymbolBasis) -> ScalarDisplay<'a> {
        ScalarDisplay { s: self, basis }
    }
}

pub struct ScalarDisplay<'a> {
    s: &'a ExactScalar,
    basis: &'a SymbolBasis,
}

impl fmt::Display for ScalarDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, c) in self.s.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if wrote {
                write!(f, " {sign} ")?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            if i == 0 {
                write!(f, "{mag}")?;
            } else {
                let name = &self.basis.symbols()[i - 1].name;
                if mag.is_one() {
                    write!(f, "@{name}")?;
                } else {
                    write!(f, "{mag}*@{name}")?;
                }
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A vector of exact scalars over a shared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactVector {
    basis: Arc<SymbolBasis>,
    entries: Vec<ExactScalar>,
}

impl ExactVector {
    pub fn new(basis: Arc<SymbolBasis>, entries: Vec<ExactScalar>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| e.coeffs.len() != basis.len() + 1) {
            return Err(Error::InvalidInput(format!(
                "entry with {} coefficients does not match basis of {} symbols",
                e.coeffs.len() - 1,
                basis.len()
            )));
        }
        Ok(Self { basis, entries })
    }

    pub fn zeros(basis: Arc<SymbolBasis>, dim: usize) -> Self {
        let m = basis.len();
        Self {
            basis,
            entries: vec![ExactScalar::zero(m); dim],
        }
    }

    /// Parse each entry with the exact syntax (`p/q`, `@name`, sums).
    pub fn parse<S: AsRef<str>>(basis: Arc<SymbolBasis>, entries: &[S]) -> Result<Self> {
        let entries = entries
            .iter()
            .map(|e| parse_scalar(e.as_ref(), &basis))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { basis, entries })
    }

    pub fn from_rationals(basis: Arc<SymbolBasis>, values: &[(i64, i64)]) -> Self {
        let m = basis.len();
        let entries = values
            .iter()
            .map(|&(p, q)| ExactScalar::rational(BigRational::new(p.into(), q.into()), m))
            .collect();
        Self { basis, entries }
    }

    pub fn basis(&self) -> &Arc<SymbolBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ExactScalar] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(ExactScalar::is_zero)
    }

    /// True when every entry is an integer, i.e. the vector is `0` on the torus.
    pub fn is_lattice(&self) -> bool {
        self.entries.iter().all(ExactScalar::is_integer)
    }

    pub fn eval(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eval(&self.basis)).collect()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self {
            basis: self.basis.clone(),
            entries: self.entries.iter().map(|e| e.scale(q)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            entries: self.entries.iter().map(ExactScalar::neg).collect(),
        }
    }

    /// Entrywise sum; both vectors must share a basis and dimension.
    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            basis: self.basis.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(p, q)| p.add(q)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn reduce_mod_one(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            entries: self.entries.iter().map(ExactScalar::reduce_mod_one).collect(),
        }
    }

    pub fn concat(&self, other: &ExactVector) -> Result<Self> {
        if !Arc::ptr_eq(&self.basis, &other.basis) && self.basis != other.basis {
            return Err(Error::InvalidInput(
                "cannot concatenate vectors over different symbol bases".into(),
            ));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(Self {
            basis: self.basis.clone(),
            entries,
        })
    }

    /// Entry strings in the exact syntax.
    pub fn to_strings(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| e.display(&self.basis).to_string())
            .collect()
    }

    /// Coefficient matrix: row `i` holds the basis coefficients of entry `i`.
    pub fn coefficient_rows(&self) -> Vec<Vec<BigRational>> {
        self.entries.iter().map(|e| e.coeffs.clone()).collect()
    }
}

impl Serialize for ExactVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl fmt::Display for ExactVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

/// `Σ k_i v_i ≠ 0` for every nonzero integer `k`.
///
/// With `with_one` the constant 1 joins the family, which turns the test
/// into `Σ k_i v_i ∉ Z` for every nonzero `k`.
pub fn rationally_independent(v: &ExactVector, with_one: bool) -> bool {
    let mut rows = v.coefficient_rows();
    if with_one {
        rows.push(ExactScalar::rational(BigRational::one(), v.basis.len()).coeffs);
    }
    rational::rank(&rows) == rows.len()
}

/// An integer relation `k` with `Σ k_i v_i ∈ Z` (or `= 0` without `with_one`), if any.
pub fn integer_relation(v: &ExactVector, with_one: bool) -> Option<Vec<BigInt>> {
    let n = v.dim();
    let m = v.basis.len();
    // Columns are entries; rows the basis coefficients. With `with_one` the
    // rational-part row is dropped and an extra column absorbs the integer.
    let rows: Vec<Vec<BigRational>> = (0..=m)
        .filter(|&j| !(with_one && j == 0))
        .map(|j| v.entries.iter().map(|e| e.coeffs[j].clone()).collect())
        .collect();
    let kernel = if rows.is_empty() {
        (0..n)
            .map(|i| {
                let mut e = vec![BigRational::zero(); n];
                e[i] = BigRational::one();
                e
            })
            .collect()
    } else {
        rational::nullspace(&rows, n)
    };
    let k = kernel.into_iter().next()?;
    let denom_lcm = k
        .iter()
        .fold(BigInt::one(), |acc, q| num_integer::Integer::lcm(&acc, q.denom()));
    let mut ints: Vec<BigInt> = k
        .iter()
        .map(|q| (q * BigRational::from_integer(denom_lcm.clone())).to_integer())
        .collect();
    if with_one {
        // Scale so the rational part also becomes integral.
        let rat: BigRational = ints
            .iter()
            .zip(&v.entries)
            .map(|(k, e)| BigRational::from_integer(k.clone()) * &e.coeffs[0])
            .fold(BigRational::zero(), |a, b| a + b);
        let d = rat.denom().clone();
        ints.iter_mut().for_each(|k| *k *= &d);
    }
    Some(ints)
}

// ---------------------------------------------------------------------------
// Exact syntax: `1/2`, `-3`, `0.25`, `@theta`, `2/3*@theta`, `@theta/4`,
// and sums/differences of such terms.
// ---------------------------------------------------------------------------

pub fn parse_scalar(src: &str, basis: &SymbolBasis) -> Result<ExactScalar> {
    let m = basis.len();
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty exact expression".into()));
    }
    let mut acc = ExactScalar::zero(m);
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = BigRational::one();
        while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            if bytes[i] == b'-' {
                sign = -sign;
            }
            i += 1;
        }
        let start = i;
        while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            i += 1;
        }
        let term = &s[start..i];
        if term.is_empty() {
            return Err(Error::Parse(format!("dangling sign in {src:?}")));
        }
        acc = acc.add(&parse_term(term, basis)?.scale(&sign));
    }
    Ok(acc)
}

fn parse_term(term: &str, basis: &SymbolBasis) -> Result<ExactScalar> {
    let m = basis.len();
    let mut coeff = BigRational::one();
    let mut symbol: Option<usize> = None;
    for (fi, factor) in term.split('*').enumerate() {
        let mut parts = factor.split('/');
        let head = parts.next().unwrap_or("");
        if let Some(name) = head.strip_prefix('@') {
            if symbol.is_some() {
                return Err(Error::Parse(format!("non-linear term {term:?}")));
            }
            symbol = Some(basis.index_of(name).ok_or_else(|| {
                Error::Config(format!("undeclared symbol @{name}"))
            })?);
        } else {
            if head.is_empty() && fi == 0 {
                return Err(Error::Parse(format!("malformed term {term:?}")));
            }
            coeff *= parse_decimal(head)?;
        }
        for d in parts {
            let q = parse_decimal(d)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("division by zero in {term:?}")));
            }
            coeff /= q;
        }
    }
    Ok(match symbol {
        Some(j) => ExactScalar::symbol(j, m).scale(&coeff),
        None => ExactScalar::rational(coeff, m),
    })
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid number {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok(BigRational::new(num, den))
}

// ---------------------------------------------------------------------------
// Numeric expressions for symbol values: numbers, + - * /, parentheses,
// `sqrt(..)`, `pi`, `e`.
// ---------------------------------------------------------------------------

pub fn eval_numeric(src: &str) -> Result<f64> {
    let tokens: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = NumParser { t: &tokens, i: 0 };
    let v = p.expr()?;
    if p.i != tokens.len() {
        return Err(Error::Parse(format!("trailing input in {src:?}")));
    }
    if !v.is_finite() {
        return Err(Error::Parse(format!("{src:?} is not finite")));
    }
    Ok(v)
}

struct NumParser<'a> {
    t: &'a [char],
    i: usize,
}

impl NumParser<'_> {
    fn peek(&self) -> Option<char> {
        self.t.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.i += 1;
            let r = self.term()?;
            v = if c == '+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.i += 1;
            let r = self.unary()?;
            v = if c == '*' { v * r } else { v / r };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64> {
        if self.peek() == Some('-') {
            self.i += 1;
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64> {
        match self.peek() {
            Some('(') => {
                self.i += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.i;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E')
                {
                    self.i += 1;
                }
                let s: String = self.t[start..self.i].iter().collect();
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("invalid number {s:?}")))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.i;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                    self.i += 1;
                }
                let name: String = self.t[start..self.i].iter().collect();
                match name.as_str() {
                    "pi" => Ok(std::f64::consts::PI),
                    "e" => Ok(std::f64::consts::E),
                    "sqrt" => {
                        self.expect('(')?;
                        let v = self.expr()?;
                        self.expect(')')?;
                        Ok(v.sqrt())
                    }
                    _ => Err(Error::Parse(format!("unknown name {name:?}"))),
                }
            }
            other => Err(Error::Parse(format!("unexpected {other:?}"))),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.i += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {c:?}")))
        }
    }
}
