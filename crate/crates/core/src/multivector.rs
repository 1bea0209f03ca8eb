//! Multivector fields with polynomial coefficients and the Schouten bracket.
//!
//! A k-vector is stored sparsely as a map from strictly increasing index
//! tuples `(i_1 < ... < i_k)` to the coefficient of `∂_{i_1} ∧ ... ∧ ∂_{i_k}`.
//!
//! Sign conventions. The bracket is computed in odd coordinates `ξ_i = ∂_i`:
//!
//! ```text
//! [P, Q] = Σ_i (P ∂⃖/∂ξ_i)(∂Q/∂x_i) − (∂P/∂x_i)(∂⃗/∂ξ_i Q)
//! ```
//!
//! With it `[X, Y]` is the Lie bracket of vector fields, `[X, f] = X(f)`, and
//! for a bivector `π` with `{f, g} = π(df, dg) = Σ π^{ij} ∂_i f ∂_j g` one gets
//! `[π, f] = −X_f` where `X_f = {f, ·}`. The Lichnerowicz differential is
//! `d_π = [π, ·]`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::polyring::Poly;
use crate::Rational;

/// Which coordinates the index tuples range over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Space {
    /// All `m + q` ambient coordinates.
    Ambient,
    /// Only the base coordinates `x_1..x_m` of `S`.
    Base,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MultivectorError {
    ContextMismatch,
    GradeMismatch { expected: usize, found: usize },
    IndexOutOfRange(usize),
    NotPoisson,
}

impl fmt::Display for MultivectorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultivectorError::ContextMismatch => f.write_str("multivectors live on different spaces"),
            MultivectorError::GradeMismatch { expected, found } => {
                write!(f, "expected a {expected}-vector, found a {found}-vector")
            }
            MultivectorError::IndexOutOfRange(i) => write!(f, "coordinate index {i} out of range"),
            MultivectorError::NotPoisson => f.write_str("bivector fails the Jacobi identity"),
        }
    }
}

impl core::error::Error for MultivectorError {}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Multivector {
    nvars: usize,
    dim: usize,
    space: Space,
    grade: usize,
    terms: BTreeMap<Vec<usize>, Poly>,
}

/// Sign and result of sorting `indices`, or `None` on a repeated index.
pub(crate) fn sort_with_sign(indices: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut v = indices.to_vec();
    let mut negative = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((negative, v))
}

/// `ξ_I ∧ ξ_J = ± ξ_K`, `None` when the tuples overlap.
fn merge(a: &[usize], b: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut negative = false;
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] jumps over the remaining a[i..]
            if (a.len() - i) % 2 == 1 {
                negative = !negative;
            }
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((negative, out))
}

fn remove_at(indices: &[usize], pos: usize) -> Vec<usize> {
    let mut v = indices.to_vec();
    v.remove(pos);
    v
}

impl Multivector {
    pub fn zero(nvars: usize, dim: usize, space: Space, grade: usize) -> Self {
        Multivector {
            nvars,
            dim,
            space,
            grade,
            terms: BTreeMap::new(),
        }
    }

    /// A grade-0 multivector.
    pub fn function(dim: usize, space: Space, f: Poly) -> Self {
        let mut out = Multivector::zero(f.nvars(), dim, space, 0);
        out.add_component(&[], &f).expect("grade 0 has no indices");
        out
    }

    /// A vector field from its components along `∂_0..∂_{dim-1}`.
    pub fn vector_field(nvars: usize, space: Space, components: &[Poly]) -> Self {
        let mut out = Multivector::zero(nvars, components.len(), space, 1);
        for (i, p) in components.iter().enumerate() {
            out.add_component(&[i], p).expect("index in range");
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Poly)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    fn same_shape(&self, other: &Multivector) -> bool {
        self.nvars == other.nvars && self.dim == other.dim && self.space == other.space
    }

    fn add_sorted(&mut self, key: Vec<usize>, p: Poly) {
        if p.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &p;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Adds `p ∂_{indices[0]} ∧ ...`; indices may come in any order.
    pub fn add_component(&mut self, indices: &[usize], p: &Poly) -> Result<(), MultivectorError> {
        if indices.len() != self.grade {
            return Err(MultivectorError::GradeMismatch {
                expected: self.grade,
                found: indices.len(),
            });
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.dim) {
            return Err(MultivectorError::IndexOutOfRange(bad));
        }
        if let Some((negative, key)) = sort_with_sign(indices) {
            self.add_sorted(key, if negative { -p } else { p.clone() });
        }
        Ok(())
    }

    /// The antisymmetric component `P^{indices}` for indices in any order.
    pub fn component(&self, indices: &[usize]) -> Poly {
        match sort_with_sign(indices) {
            Some((negative, key)) => match self.terms.get(&key) {
                Some(p) if negative => -p,
                Some(p) => p.clone(),
                None => Poly::zero(self.nvars),
            },
            None => Poly::zero(self.nvars),
        }
    }

    pub fn map_coefficients(&self, mut f: impl FnMut(&Poly) -> Poly) -> Multivector {
        let mut out = Multivector::zero(self.nvars, self.dim, self.space, self.grade);
        for (k, p) in &self.terms {
            out.add_sorted(k.clone(), f(p));
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Multivector {
        self.map_coefficients(|p| p.scale(c))
    }

    pub fn mul_function(&self, f: &Poly) -> Multivector {
        self.map_coefficients(|p| p * f)
    }

    pub fn try_add(&self, other: &Multivector) -> Result<Multivector, MultivectorError> {
        if !self.same_shape(other) {
            return Err(MultivectorError::ContextMismatch);
        }
        if self.grade != other.grade {
            return Err(MultivectorError::GradeMismatch {
                expected: self.grade,
                found: other.grade,
            });
        }
        let mut out = self.clone();
        for (k, p) in &other.terms {
            out.add_sorted(k.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Multivector) -> Result<Multivector, MultivectorError> {
        self.try_add(&other.scale(&-Rational::from_integer(1.into())))
    }

    pub fn wedge(&self, other: &Multivector) -> Result<Multivector, MultivectorError> {
        if !self.same_shape(other) {
            return Err(MultivectorError::ContextMismatch);
        }
        let mut out = Multivector::zero(self.nvars, self.dim, self.space, self.grade + other.grade);
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                if let Some((negative, key)) = merge(a, b) {
                    let prod = p * q;
                    out.add_sorted(key, if negative { -prod } else { prod });
                }
            }
        }
        Ok(out)
    }

    /// Schouten–Nijenhuis bracket; grade `k + l − 1` (a zero function when
    /// both arguments are functions).
    pub fn schouten(&self, other: &Multivector) -> Result<Multivector, MultivectorError> {
        if !self.same_shape(other) {
            return Err(MultivectorError::ContextMismatch);
        }
        let grade = (self.grade + other.grade).saturating_sub(1);
        let mut out = Multivector::zero(self.nvars, self.dim, self.space, grade);
        if self.grade + other.grade == 0 {
            return Ok(out);
        }
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                // (P ∂⃖ξ_i)(∂_i Q)
                for (pos, &i) in a.iter().enumerate() {
                    let dq = q.derivative(i);
                    if dq.is_zero() {
                        continue;
                    }
                    let right_neg = (a.len() - 1 - pos) % 2 == 1;
                    let rest = remove_at(a, pos);
                    if let Some((neg, key)) = merge(&rest, b) {
                        let t = p * &dq;
                        out.add_sorted(key, if right_neg ^ neg { -t } else { t });
                    }
                }
                // −(∂_i P)(∂⃗ξ_i Q)
                for (pos, &i) in b.iter().enumerate() {
                    let dp = p.derivative(i);
                    if dp.is_zero() {
                        continue;
                    }
                    let left_neg = pos % 2 == 1;
                    let rest = remove_at(b, pos);
                    if let Some((neg, key)) = merge(a, &rest) {
                        let t = &dp * q;
                        out.add_sorted(key, if left_neg ^ neg { t } else { -t });
                    }
                }
            }
        }
        Ok(out)
    }

    /// `π(α, β) = Σ π^{ij} α_i β_j` for a bivector and two covectors given
    /// by their components.
    pub fn pair(&self, alpha: &[Poly], beta: &[Poly]) -> Result<Poly, MultivectorError> {
        if self.grade != 2 {
            return Err(MultivectorError::GradeMismatch {
                expected: 2,
                found: self.grade,
            });
        }
        let mut out = Poly::zero(self.nvars);
        for (k, p) in &self.terms {
            let (i, j) = (k[0], k[1]);
            let t = &(&alpha[i] * &beta[j]) - &(&alpha[j] * &beta[i]);
            out += &(p * &t);
        }
        Ok(out)
    }

    /// `π(df, dg)` for a bivector.
    pub fn bracket(&self, f: &Poly, g: &Poly) -> Result<Poly, MultivectorError> {
        let df = gradient(f, self.dim);
        let dg = gradient(g, self.dim);
        self.pair(&df, &dg)
    }

    /// A vector field applied to a function.
    pub fn apply(&self, f: &Poly) -> Result<Poly, MultivectorError> {
        if self.grade != 1 {
            return Err(MultivectorError::GradeMismatch {
                expected: 1,
                found: self.grade,
            });
        }
        let mut out = Poly::zero(self.nvars);
        for (k, p) in &self.terms {
            out += &(p * &f.derivative(k[0]));
        }
        Ok(out)
    }
}

/// `(∂_0 f, ..., ∂_{dim-1} f)`.
pub fn gradient(f: &Poly, dim: usize) -> Vec<Poly> {
    (0..dim).map(|i| f.derivative(i)).collect()
}

/// Result of [`jacobi_check`]: the verdict and the trivector `[π, π]`.
#[derive(Clone, Debug)]
pub struct JacobiReport {
    pub holds: bool,
    pub residual: Multivector,
}

pub fn jacobi_check(pi: &Multivector) -> Result<JacobiReport, MultivectorError> {
    if pi.grade() != 2 {
        return Err(MultivectorError::GradeMismatch {
            expected: 2,
            found: pi.grade(),
        });
    }
    let residual = pi.schouten(pi)?;
    Ok(JacobiReport {
        holds: residual.is_zero(),
        residual,
    })
}

/// `d_ψ a = [ψ, a]`; refuses a `ψ` that is not Poisson.
pub fn lichnerowicz_d(psi: &Multivector, a: &Multivector) -> Result<Multivector, MultivectorError> {
    if !jacobi_check(psi)?.holds {
        return Err(MultivectorError::NotPoisson);
    }
    psi.schouten(a)
}
