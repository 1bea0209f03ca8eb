//! Exact multivariate polynomials over the rationals.
//!
//! Variables are split into base coordinates `x_1..x_m` (coordinates on `S`)
//! followed by normal coordinates `y_1..y_q`. A [`Poly`] stores its terms in
//! a `BTreeMap` keyed by [`Monomial`], whose ordering is graded
//! lexicographic with low degree first; that ordering is also the printing
//! order, so printing is canonical.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

/// Default bound on any single exponent produced while parsing.
pub const DEFAULT_EXPONENT_CAP: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyError {
    UnknownVariable(String),
    DuplicateVariable(String),
    EmptyContext,
    InvalidName(String),
    ContextMismatch,
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::UnknownVariable(v) => write!(f, "unknown variable `{v}`"),
            PolyError::DuplicateVariable(v) => write!(f, "variable `{v}` declared twice"),
            PolyError::EmptyContext => f.write_str("no variables declared"),
            PolyError::InvalidName(v) => write!(f, "`{v}` is not a valid variable name"),
            PolyError::ContextMismatch => f.write_str("polynomials live in different rings"),
        }
    }
}

impl core::error::Error for PolyError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownVariable(String),
    UnexpectedChar(char),
    UnexpectedEnd,
    ExpectedExponent,
    NegativeExponent,
    ExponentCap(u32),
    ZeroDenominator,
    TrailingInput,
}

/// A parse failure, with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnknownVariable(v) => write!(f, "unknown variable `{v}`")?,
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`")?,
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input")?,
            ParseErrorKind::ExpectedExponent => f.write_str("expected an integer exponent")?,
            ParseErrorKind::NegativeExponent => f.write_str("negative exponents are not allowed")?,
            ParseErrorKind::ExponentCap(cap) => write!(f, "exponent exceeds the cap of {cap}")?,
            ParseErrorKind::ZeroDenominator => f.write_str("zero denominator")?,
            ParseErrorKind::TrailingInput => f.write_str("unexpected trailing input")?,
        }
        write!(f, " at position {}", self.position)
    }
}

impl core::error::Error for ParseError {}

/// Names of the coordinates, base variables first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarContext {
    base: Vec<String>,
    normal: Vec<String>,
    exponent_cap: u32,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarContext {
    pub fn new<S: AsRef<str>>(base: &[S], normal: &[S]) -> Result<Self, PolyError> {
        if base.is_empty() && normal.is_empty() {
            return Err(PolyError::EmptyContext);
        }
        let mut seen: Vec<&str> = Vec::new();
        for name in base.iter().chain(normal.iter()).map(AsRef::as_ref) {
            if !valid_name(name) {
                return Err(PolyError::InvalidName(name.to_string()));
            }
            if seen.contains(&name) {
                return Err(PolyError::DuplicateVariable(name.to_string()));
            }
            seen.push(name);
        }
        Ok(VarContext {
            base: base.iter().map(|s| s.as_ref().to_string()).collect(),
            normal: normal.iter().map(|s| s.as_ref().to_string()).collect(),
            exponent_cap: DEFAULT_EXPONENT_CAP,
        })
    }

    pub fn with_exponent_cap(mut self, cap: u32) -> Self {
        self.exponent_cap = cap;
        self
    }

    pub fn exponent_cap(&self) -> u32 {
        self.exponent_cap
    }

    /// Number of base variables `m`.
    pub fn base_dim(&self) -> usize {
        self.base.len()
    }

    /// Number of normal variables `q`.
    pub fn normal_dim(&self) -> usize {
        self.normal.len()
    }

    pub fn nvars(&self) -> usize {
        self.base.len() + self.normal.len()
    }

    pub fn base_vars(&self) -> &[String] {
        &self.base
    }

    pub fn normal_vars(&self) -> &[String] {
        &self.normal
    }

    /// Ambient index of a variable name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.base.iter().chain(self.normal.iter()).position(|v| v == name)
    }

    pub fn name(&self, index: usize) -> &str {
        if index < self.base.len() {
            &self.base[index]
        } else {
            &self.normal[index - self.base.len()]
        }
    }

    pub fn is_normal(&self, index: usize) -> bool {
        index >= self.base.len()
    }

    /// Ambient index of the normal variable `y_a`.
    pub fn normal_index(&self, a: usize) -> usize {
        self.base.len() + a
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.nvars())
    }

    pub fn one(&self) -> Poly {
        Poly::one(self.nvars())
    }

    pub fn var(&self, index: usize) -> Poly {
        Poly::var(self.nvars(), index)
    }

    /// The normal variable `y_a` as a polynomial.
    pub fn normal_var(&self, a: usize) -> Poly {
        self.var(self.normal_index(a))
    }

    pub fn parse(&self, text: &str) -> Result<Poly, ParseError> {
        Parser::new(text, self).parse()
    }

    /// Formal partial derivative with respect to a named variable.
    pub fn partial(&self, p: &Poly, name: &str) -> Result<Poly, PolyError> {
        let index = self
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(p.derivative(index))
    }

    /// Evaluation on the zero section: every normal variable set to zero.
    pub fn restrict_to_s(&self, p: &Poly) -> Poly {
        self.fiber_component(p, 0)
    }

    /// Sum of the monomials whose normal exponents add up to exactly `k`.
    pub fn fiber_component(&self, p: &Poly, k: u32) -> Poly {
        let m = self.base.len();
        p.filter(|mono| mono.partial_degree(m..mono.len()) == k)
    }

    pub fn fiber_degree(&self, mono: &Monomial) -> u32 {
        mono.partial_degree(self.base.len()..mono.len())
    }

    /// True when no normal variable occurs in `p`.
    pub fn is_y_free(&self, p: &Poly) -> bool {
        p.terms().all(|(mono, _)| self.fiber_degree(mono) == 0)
    }

    pub fn print(&self, p: &Poly) -> String {
        p.display(self).to_string()
    }
}

/// Exponent vector of length `m + q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn partial_degree(&self, range: core::ops::Range<usize>) -> u32 {
        self.0[range].iter().sum()
    }

    pub fn exponent(&self, index: usize) -> u32 {
        self.0[index]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All monomials of total degree `degree` in the first `count` of `nvars`
    /// variables, in ascending monomial order.
    pub fn all_of_degree(nvars: usize, count: usize, degree: u32) -> Vec<Monomial> {
        fn fill(pos: usize, count: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if pos + 1 == count {
                cur[pos] = left;
                out.push(Monomial(cur.clone()));
                cur[pos] = 0;
                return;
            }
            for e in (0..=left).rev() {
                cur[pos] = e;
                fill(pos + 1, count, left - e, cur, out);
            }
            cur[pos] = 0;
        }
        let mut out = Vec::new();
        if count == 0 {
            if degree == 0 {
                out.push(Monomial::one(nvars));
            }
            return out;
        }
        let mut cur = vec![0; nvars];
        fill(0, count, degree, &mut cur, &mut out);
        out.sort();
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        // graded, low degree first; ties broken so that x1 sorts before x2
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial with exact rational coefficients. Zero coefficients are
/// never stored, so structural equality is mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Poly::monomial(nvars, Monomial::one(nvars), c)
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Poly::constant(nvars, Rational::from_integer(BigInt::from(c)))
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        Poly::monomial(nvars, Monomial::var(nvars, index), Rational::one())
    }

    pub fn monomial(nvars: usize, mono: Monomial, c: Rational) -> Self {
        assert_eq!(mono.len(), nvars, "monomial length does not match the ring");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mono, c);
        }
        Poly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Rational {
        self.terms.get(mono).cloned().unwrap_or_else(Rational::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.nvars))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.min_degree()
    }

    fn add_term(&mut self, mono: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.mul(mono), v * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to variable `index`.
    pub fn derivative(&self, index: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (mono, c) in &self.terms {
            let e = mono.0[index];
            if e == 0 {
                continue;
            }
            let mut exps = mono.0.clone();
            exps[index] -= 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Terms whose monomial satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Part of total degree exactly `degree`.
    pub fn homogeneous_part(&self, degree: u32) -> Poly {
        self.filter(|m| m.degree() == degree)
    }

    pub fn largest_exponent(&self) -> u32 {
        self.terms.keys().flat_map(|m| m.0.iter().copied()).max().unwrap_or(0)
    }

    pub fn display<'a>(&'a self, ctx: &'a VarContext) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, ctx }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        debug_assert_eq!(self.nvars, rhs.nvars);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        debug_assert_eq!(self.nvars, rhs.nvars);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, rhs.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

/// Canonical text form: terms in ascending graded order, explicit `*` and
/// `^`, rational coefficients as `p/q`.
pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    ctx: &'a VarContext,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (k, (mono, c)) in self.poly.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            let is_const = mono.degree() == 0;
            let mut need_star = false;
            if is_const || !abs.is_one() {
                write!(f, "{abs}")?;
                need_star = true;
            }
            for (i, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if need_star {
                    f.write_str("*")?;
                }
                f.write_str(self.ctx.name(i))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                need_star = true;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    ctx: &'a VarContext,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, ctx: &'a VarContext) -> Self {
        Parser { src, pos: 0, ctx }
    }

    fn err(&self, kind: ParseErrorKind, position: usize) -> ParseError {
        ParseError { kind, position }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn parse(mut self) -> Result<Poly, ParseError> {
        let p = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.err(ParseErrorKind::TrailingInput, self.pos));
        }
        Ok(p)
    }

    fn check_cap(&self, p: &Poly, at: usize) -> Result<(), ParseError> {
        let cap = self.ctx.exponent_cap;
        if p.largest_exponent() > cap {
            return Err(self.err(ParseErrorKind::ExponentCap(cap), at));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.bump();
                    acc += &self.term()?;
                }
                Some('-') => {
                    self.bump();
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('*') {
                let at = self.pos;
                self.bump();
                acc = &acc * &self.unary()?;
                self.check_cap(&acc, at)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.bump();
        self.skip_ws();
        let at = self.pos;
        match self.peek() {
            Some('-') => return Err(self.err(ParseErrorKind::NegativeExponent, at)),
            Some(c) if c.is_ascii_digit() => {}
            Some(_) => return Err(self.err(ParseErrorKind::ExpectedExponent, at)),
            None => return Err(self.err(ParseErrorKind::UnexpectedEnd, at)),
        }
        let digits = self.digits();
        let cap = self.ctx.exponent_cap;
        let exp = digits
            .parse::<u32>()
            .ok()
            .filter(|e| *e <= cap)
            .ok_or_else(|| self.err(ParseErrorKind::ExponentCap(cap), at))?;
        let out = base.pow(exp);
        self.check_cap(&out, at)?;
        Ok(out)
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let n = self.ctx.nvars();
        match self.peek() {
            None => Err(self.err(ParseErrorKind::UnexpectedEnd, start)),
            Some('(') => {
                self.bump();
                let inner = self.expr()?;
                self.skip_ws();
                match self.bump() {
                    Some(')') => Ok(inner),
                    Some(c) => Err(self.err(ParseErrorKind::UnexpectedChar(c), self.pos - c.len_utf8())),
                    None => Err(self.err(ParseErrorKind::UnexpectedEnd, self.pos)),
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let num = parse_bigint(self.digits());
                let mut value = Rational::from_integer(num);
                // a rational literal `p/q` binds tighter than `*`
                let save = self.pos;
                self.skip_ws();
                if self.peek() == Some('/') {
                    self.bump();
                    self.skip_ws();
                    let den_at = self.pos;
                    if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        return match self.peek() {
                            Some(c) => Err(self.err(ParseErrorKind::UnexpectedChar(c), den_at)),
                            None => Err(self.err(ParseErrorKind::UnexpectedEnd, den_at)),
                        };
                    }
                    let den = parse_bigint(self.digits());
                    if den.is_zero() {
                        return Err(self.err(ParseErrorKind::ZeroDenominator, den_at));
                    }
                    value /= Rational::from_integer(den);
                } else {
                    self.pos = save;
                }
                Ok(Poly::constant(n, value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.bump();
                }
                let name = &self.src[start..self.pos];
                match self.ctx.index_of(name) {
                    Some(i) => Ok(Poly::var(n, i)),
                    None => Err(self.err(ParseErrorKind::UnknownVariable(name.to_string()), start)),
                }
            }
            Some(c) => Err(self.err(ParseErrorKind::UnexpectedChar(c), start)),
        }
    }
}

fn parse_bigint(digits: &str) -> BigInt {
    // digits are ASCII 0-9, so this cannot fail
    let mut acc = BigInt::zero();
    let ten = BigInt::from(10u32);
    for d in digits.bytes() {
        acc = acc * &ten + BigInt::from(d - b'0');
    }
    acc
}

/// Converts a small rational to `i64` when it is an integer that fits.
pub fn rational_to_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}
