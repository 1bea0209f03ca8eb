//! Fraction-free exact elimination on sparse rational vectors.
//!
//! Vectors are scaled to primitive integer vectors before elimination and
//! every combination `p·v − v_p·r` is divided by its content, so entries
//! stay small. Pivots are chosen by lowest column index, which makes ranks
//! and kernel bases reproducible.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Rational;

/// Sparse rational vector: column index to nonzero value.
pub type SparseVec = BTreeMap<usize, Rational>;

type IntRow = BTreeMap<usize, BigInt>;

fn to_primitive(v: &SparseVec) -> IntRow {
    let mut lcm = BigInt::one();
    for c in v.values() {
        lcm = lcm.lcm(c.denom());
    }
    let mut row: IntRow = v
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(&k, c)| (k, c.numer() * (&lcm / c.denom())))
        .collect();
    normalize(&mut row);
    row
}

/// Divides by the content and makes the leading entry positive.
fn normalize(row: &mut IntRow) {
    let mut g = BigInt::zero();
    for c in row.values() {
        g = g.gcd(c);
    }
    if g.is_zero() {
        row.clear();
        return;
    }
    if row.values().next().is_some_and(|c| c.is_negative()) {
        g = -g;
    }
    if !g.is_one() {
        for c in row.values_mut() {
            *c = &*c / &g;
        }
    }
}

/// `v ← p·v − v[col]·r` where `p = r[col]`, then normalized.
fn eliminate(v: &mut IntRow, r: &IntRow, col: usize) {
    let Some(vc) = v.get(&col).cloned() else {
        return;
    };
    let p = &r[&col];
    if !p.is_one() {
        for c in v.values_mut() {
            *c = &*c * p;
        }
    }
    for (&k, rc) in r {
        let e = v.entry(k).or_insert_with(BigInt::zero);
        *e -= &vc * rc;
        if e.is_zero() {
            v.remove(&k);
        }
    }
    normalize(v);
}

/// Incremental row echelon form. Rows are kept reduced against each other's
/// pivots (Gauss–Jordan), so membership tests are a single pass.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<IntRow>,
    pivots: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &SparseVec) -> IntRow {
        let mut row = to_primitive(v);
        for (&col, &ri) in &self.pivots {
            if row.contains_key(&col) {
                eliminate(&mut row, &self.rows[ri], col);
            }
        }
        row
    }

    /// Adds `v`; returns `true` when it was independent of the rows so far.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let row = self.reduce(v);
        let Some((&col, _)) = row.iter().next() else {
            return false;
        };
        for existing in &mut self.rows {
            if existing.contains_key(&col) {
                eliminate(existing, &row, col);
            }
        }
        self.pivots.insert(col, self.rows.len());
        self.rows.push(row);
        true
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Pivot columns in increasing order.
    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }
}

pub fn rank(vectors: &[SparseVec]) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// A matrix given by its columns, each a sparse vector over row indices.
#[derive(Clone, Debug, Default)]
pub struct ColumnMatrix {
    pub columns: Vec<SparseVec>,
}

impl ColumnMatrix {
    pub fn new(columns: Vec<SparseVec>) -> Self {
        ColumnMatrix { columns }
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn rank(&self) -> usize {
        rank(&self.columns)
    }

    fn rows(&self) -> Vec<SparseVec> {
        let mut rows: BTreeMap<usize, SparseVec> = BTreeMap::new();
        for (j, col) in self.columns.iter().enumerate() {
            for (&i, c) in col {
                if !c.is_zero() {
                    rows.entry(i).or_default().insert(j, c.clone());
                }
            }
        }
        rows.into_values().collect()
    }

    /// Basis of `{x : Σ_j x_j · column_j = 0}`, one vector per free column,
    /// normalized to `1` at its free column.
    pub fn kernel(&self) -> Vec<SparseVec> {
        let mut e = Echelon::new();
        for row in self.rows() {
            e.insert(&row);
        }
        let pivots = e.pivot_columns();
        let mut basis = Vec::new();
        for free in (0..self.ncols()).filter(|j| !e.pivots.contains_key(j)) {
            let mut x = SparseVec::new();
            x.insert(free, Rational::one());
            for &p in &pivots {
                let r = &e.rows[e.pivots[&p]];
                if let Some(c) = r.get(&free) {
                    x.insert(p, -Rational::new(c.clone(), r[&p].clone()));
                }
            }
            basis.push(x);
        }
        basis
    }

    pub fn nullity(&self) -> usize {
        self.ncols() - self.rank()
    }

    /// `Σ_j x_j · column_j`.
    pub fn apply(&self, x: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (&j, xj) in x {
            for (&i, c) in &self.columns[j] {
                let e = out.entry(i).or_insert_with(Rational::zero);
                *e += xj * c;
                if e.is_zero() {
                    out.remove(&i);
                }
            }
        }
        out
    }
}

/// Adds `c · v` into `acc`.
pub fn axpy(acc: &mut SparseVec, c: &Rational, v: &SparseVec) {
    for (&k, x) in v {
        let e = acc.entry(k).or_insert_with(Rational::zero);
        *e += c * x;
        if e.is_zero() {
            acc.remove(&k);
        }
    }
}
