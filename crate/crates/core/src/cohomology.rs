//! Weight-graded first cohomologies of the infinitesimal Poisson algebra.
//!
//! Coefficient functions are polynomials in the base variables. The normal
//! variables get a weight `t` and the data are tested for homogeneity of a
//! common weight `s`; when `(s, t)` exist every linear operator below is
//! homogeneous and each weight is computed exactly. Otherwise the grading is
//! *truncated*: unknowns range over all degrees up to the window, cocycle
//! dimensions stay exact and coboundary dimensions become lower bounds.
//!
//! A derivation of the affine algebra is a [`DerivationPair`]
//! `X(f ⊕ η) = u(f) ⊕ (δ(η) + Q(df))` where `δ` is a derivative endomorphism
//! of the conormal sections with symbol `u`. The weight `W` of a derivation is
//! the degree of `u`; then `δ` has degree `W − 1` and `Q` degree `W − t`.
//! Over a point (`m = 0`) every object is constant and only `W = 0` occurs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::One;

use crate::infinitesimal::{increasing_tuples, AffineElement, ConormalMultivector, InfinitesimalData, Section};
use crate::linalg::{axpy, rank, ColumnMatrix, SparseVec};
use crate::multivector::{jacobi_check, Multivector, MultivectorError, Space};
use crate::polyring::{Monomial, Poly};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CohomologyError {
    NotPoisson,
    /// Two computations that must agree do not; always a bug.
    Inconsistent(String),
    /// A vanishing criterion holds but a direct dimension is nonzero.
    TheoremViolation {
        weight: usize,
        dim: usize,
    },
}

impl fmt::Display for CohomologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CohomologyError::NotPoisson => f.write_str("induced bivector fails the Jacobi identity"),
            CohomologyError::Inconsistent(msg) => write!(f, "internal inconsistency: {msg}"),
            CohomologyError::TheoremViolation { weight, dim } => write!(
                f,
                "vanishing criterion holds but H1 has dimension {dim} in weight {weight}"
            ),
        }
    }
}

impl core::error::Error for CohomologyError {}

impl From<MultivectorError> for CohomologyError {
    fn from(_: MultivectorError) -> Self {
        CohomologyError::NotPoisson
    }
}

/// Weights `x ↦ 1`, `y ↦ t` under which `π` is homogeneous of weight `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grading {
    pub s: i64,
    pub t: i64,
    pub truncated: bool,
}

/// Coefficient degrees admitted for one kind of unknown.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Window {
    Exact(i64),
    UpTo(i64),
}

impl Window {
    fn new(truncated: bool, degree: i64) -> Self {
        if truncated {
            Window::UpTo(degree)
        } else {
            Window::Exact(degree)
        }
    }

    /// Monomials in the first `m` of `nvars` variables.
    fn monomials(self, nvars: usize, m: usize) -> Vec<Monomial> {
        let range = match self {
            Window::Exact(d) => d..=d,
            Window::UpTo(d) => 0..=d,
        };
        range
            .filter(|&d| d >= 0)
            .flat_map(|d| Monomial::all_of_degree(nvars, m, d as u32))
            .collect()
    }
}

fn data_degrees(p: &Poly) -> impl Iterator<Item = i64> + '_ {
    p.terms().map(|(mono, _)| i64::from(mono.degree()))
}

/// Infers `(s, t)` from the extracted data.
pub fn infer_grading(data: &InfinitesimalData) -> Grading {
    let exact = |s, t| Grading { s, t, truncated: false };
    if data.m() == 0 {
        return exact(0, 0);
    }
    // constraints on s, s − t and s + t
    let mut s_vals = Vec::new();
    let mut s_minus_t = Vec::new();
    let mut s_plus_t = Vec::new();
    for (_, p) in data.psi().terms() {
        s_vals.extend(data_degrees(p).map(|d| d - 2));
    }
    for sec in data.gamma.iter().flatten() {
        for p in &sec.0 {
            s_vals.extend(data_degrees(p).map(|d| d - 1));
        }
    }
    for (i, row) in data.kappa.iter().enumerate() {
        for sec in &row[i + 1..] {
            for p in &sec.0 {
                s_minus_t.extend(data_degrees(p).map(|d| d - 2));
            }
        }
    }
    for sec in data.c.iter().flatten() {
        for p in &sec.0 {
            s_plus_t.extend(data_degrees(p));
        }
    }
    let single = |v: &mut Vec<i64>| -> Result<Option<i64>, ()> {
        v.sort_unstable();
        v.dedup();
        match v.len() {
            0 => Ok(None),
            1 => Ok(Some(v[0])),
            _ => Err(()),
        }
    };
    let truncated = Grading {
        s: 0,
        t: 0,
        truncated: true,
    };
    let (Ok(s), Ok(k), Ok(e)) = (single(&mut s_vals), single(&mut s_minus_t), single(&mut s_plus_t)) else {
        return truncated;
    };
    match (s, k, e) {
        (Some(s), Some(k), Some(e)) if s - k == e - s => exact(s, s - k),
        (Some(_), Some(_), Some(_)) => truncated,
        (Some(s), Some(k), None) => exact(s, s - k),
        (Some(s), None, Some(e)) => exact(s, e - s),
        (Some(s), None, None) => exact(s, 0),
        (None, Some(k), Some(e)) if (k + e) % 2 == 0 => exact((k + e) / 2, (e - k) / 2),
        (None, Some(_), Some(_)) => truncated,
        (None, Some(k), None) => exact(k, 0),
        (None, None, Some(e)) => exact(e, 0),
        (None, None, None) => exact(0, 0),
    }
}

/// Windows of every unknown at derivation weight `w`.
#[derive(Clone, Copy, Debug)]
struct Windows {
    symbol: Window,
    delta: Window,
    q: Window,
    ham_base: Window,
    ham_fiber: Window,
}

impl Windows {
    fn at(data: &InfinitesimalData, g: Grading, w: usize) -> Self {
        let w = w as i64;
        if data.m() == 0 {
            let e = Window::Exact(w);
            return Windows {
                symbol: e,
                delta: e,
                q: e,
                ham_base: e,
                ham_fiber: e,
            };
        }
        if g.truncated {
            return Windows {
                symbol: Window::UpTo(w),
                delta: Window::UpTo(w - 1),
                q: Window::UpTo(w),
                ham_base: Window::UpTo(w + 1),
                ham_fiber: Window::UpTo(w + 1),
            };
        }
        Windows {
            symbol: Window::Exact(w),
            delta: Window::Exact(w - 1),
            q: Window::Exact(w - g.t),
            ham_base: Window::Exact(w - 1 - g.s),
            ham_fiber: Window::Exact(w - 1 - g.t - g.s),
        }
    }
}

/// Cocycle, coboundary and quotient dimensions of one graded piece.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QuotientDims {
    pub cocycles: usize,
    pub coboundaries: usize,
    pub quotient: usize,
}

/// Per-weight dimensions, index = weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDims {
    pub truncated: bool,
    pub dims: Vec<QuotientDims>,
}

impl GradedDims {
    pub fn quotients(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.quotient).collect()
    }

    pub fn all_vanish(&self) -> bool {
        self.dims.iter().all(|d| d.quotient == 0)
    }
}

struct Indexer<K: Ord> {
    map: BTreeMap<K, usize>,
}

impl<K: Ord> Indexer<K> {
    fn new() -> Self {
        Indexer { map: BTreeMap::new() }
    }

    fn id(&mut self, key: K) -> usize {
        let next = self.map.len();
        *self.map.entry(key).or_insert(next)
    }
}

/// Encodes residuals keyed by `(position, component, monomial)`.
struct ResidualEncoder {
    keys: Indexer<(usize, usize, Monomial)>,
}

impl ResidualEncoder {
    fn new() -> Self {
        ResidualEncoder { keys: Indexer::new() }
    }

    fn poly(&mut self, out: &mut SparseVec, tag: usize, comp: usize, p: &Poly) {
        for (mono, c) in p.terms() {
            let k = self.keys.id((tag, comp, mono.clone()));
            out.insert(k, c.clone());
        }
    }

    fn section(&mut self, out: &mut SparseVec, tag: usize, s: &Section) {
        for (a, p) in s.0.iter().enumerate() {
            self.poly(out, tag, a, p);
        }
    }

    fn affine(&mut self, out: &mut SparseVec, tag: usize, e: &AffineElement) {
        self.poly(out, tag, 0, &e.f);
        for (a, p) in e.eta.0.iter().enumerate() {
            self.poly(out, tag, a + 1, p);
        }
    }

    fn multivector(&mut self, out: &mut SparseVec, tag: usize, mv: &Multivector) {
        for (idx, p) in mv.terms() {
            let comp = idx.iter().fold(0, |acc, &i| acc * (mv.dim() + 1) + i + 1);
            self.poly(out, tag, comp, p);
        }
    }
}

/// In-window part of the span of `generators`: combinations whose
/// coordinates outside `inside` cancel.
fn window_span(generators: &[SparseVec], inside: impl Fn(usize) -> bool) -> Vec<SparseVec> {
    let split = |v: &SparseVec, keep: bool| -> SparseVec {
        v.iter()
            .filter(|(&k, _)| inside(k) == keep)
            .map(|(&k, c)| (k, c.clone()))
            .collect()
    };
    let outside = ColumnMatrix::new(generators.iter().map(|g| split(g, false)).collect());
    outside
        .kernel()
        .iter()
        .map(|combo| {
            let mut acc = SparseVec::new();
            for (&j, c) in combo {
                axpy(&mut acc, c, &split(&generators[j], true));
            }
            acc
        })
        .filter(|v| !v.is_empty())
        .collect()
}

fn project(v: &SparseVec, keep: impl Fn(usize) -> bool) -> SparseVec {
    v.iter()
        .filter(|(&k, _)| keep(k))
        .map(|(&k, c)| (k, c.clone()))
        .collect()
}

/// Cocycles = kernel of `constraints`; coboundaries = in-window span of
/// `generators` (coordinates `≥ constraints.ncols()` lie outside the window).
fn quotient(
    constraints: &ColumnMatrix,
    generators: &[SparseVec],
    label: &str,
) -> Result<QuotientDims, CohomologyError> {
    let n = constraints.ncols();
    let cocycles = constraints.nullity();
    let span = window_span(generators, |k| k < n);
    if span.iter().any(|v| !constraints.apply(v).is_empty()) {
        return Err(CohomologyError::Inconsistent(format!(
            "{label}: a coboundary violates the cocycle constraints"
        )));
    }
    let coboundaries = rank(&span);
    Ok(QuotientDims {
        cocycles,
        coboundaries,
        quotient: cocycles - coboundaries,
    })
}

// ---------------------------------------------------------------------------
// Poisson cohomology of the base

fn vector_field_of(psi: &Multivector, i: usize, p: Poly) -> Multivector {
    let mut comps = vec![Poly::zero(psi.nvars()); psi.dim()];
    comps[i] = p;
    Multivector::vector_field(psi.nvars(), Space::Base, &comps)
}

fn homogeneous_degree<'a>(polys: impl Iterator<Item = &'a Poly>) -> Option<Option<i64>> {
    let mut degrees: Vec<i64> = polys.flat_map(data_degrees).collect();
    degrees.sort_unstable();
    degrees.dedup();
    match degrees.len() {
        0 => Some(None),
        1 => Some(Some(degrees[0])),
        _ => None,
    }
}

/// First Poisson cohomology of `(S, ψ)`, graded by the degree of the
/// vector-field coefficients.
pub fn poisson_h1(psi: &Multivector, max_weight: usize) -> Result<GradedDims, CohomologyError> {
    if psi.grade() != 2 || psi.space() != Space::Base {
        return Err(CohomologyError::NotPoisson);
    }
    if !jacobi_check(psi)?.holds {
        return Err(CohomologyError::NotPoisson);
    }
    let (n, m) = (psi.nvars(), psi.dim());
    let homogeneous = homogeneous_degree(psi.terms().map(|(_, p)| p));
    let truncated = homogeneous.is_none();
    let mut dims = Vec::new();
    for w in 0..=max_weight as i64 {
        let field_window = Window::new(truncated, w);
        let fn_window = match homogeneous {
            Some(Some(p)) => Window::Exact(w - p + 1),
            Some(None) => Window::Exact(-1),
            None => Window::UpTo(w + 1),
        };
        let mut layout = Indexer::new();
        for i in 0..m {
            for mono in field_window.monomials(n, m) {
                layout.id((i, mono));
            }
        }
        let size = layout.map.len();
        let mut enc = ResidualEncoder::new();
        let mut columns = Vec::with_capacity(size);
        for (i, mono) in layout.map.keys() {
            let u = vector_field_of(psi, *i, Poly::monomial(n, mono.clone(), Rational::one()));
            let mut col = SparseVec::new();
            enc.multivector(&mut col, 0, &psi.schouten(&u)?);
            columns.push(col);
        }
        let constraints = ColumnMatrix::new(columns);
        let positions: BTreeMap<(usize, Monomial), usize> = layout.map.into_iter().collect();
        let mut outside = Indexer::new();
        let mut generators = Vec::new();
        for mono in fn_window.monomials(n, m) {
            let f = Multivector::function(m, Space::Base, Poly::monomial(n, mono, Rational::one()));
            let field = psi.schouten(&f)?;
            let mut v = SparseVec::new();
            for (idx, p) in field.terms() {
                for (mono, c) in p.terms() {
                    let key = (idx[0], mono.clone());
                    let k = match positions.get(&key) {
                        Some(&k) => k,
                        None => size + outside.id(key),
                    };
                    v.insert(k, c.clone());
                }
            }
            generators.push(v);
        }
        dims.push(quotient(&constraints, &generators, "poisson_h1")?);
    }
    Ok(GradedDims { truncated, dims })
}

// ---------------------------------------------------------------------------
// Center and linear derivations of the fiber algebra

fn structure_degree(data: &InfinitesimalData) -> Option<Option<i64>> {
    homogeneous_degree(data.c.iter().flatten().flat_map(|s| s.0.iter()))
}

fn monomial_section(data: &InfinitesimalData, a: usize, mono: &Monomial) -> Section {
    let mut s = data.zero_section();
    s.0[a] = Poly::monomial(data.nvars(), mono.clone(), Rational::one());
    s
}

/// Conormal sections in `window` that are pointwise central.
fn center_in_window(data: &InfinitesimalData, window: Window) -> Vec<Section> {
    let (n, m, q) = (data.nvars(), data.m(), data.q());
    let monos = window.monomials(n, m);
    let mut keys = Vec::new();
    let mut enc = ResidualEncoder::new();
    let mut columns = Vec::new();
    for a in 0..q {
        for mono in &monos {
            let z = monomial_section(data, a, mono);
            let mut col = SparseVec::new();
            for b in 0..q {
                enc.section(&mut col, b, &data.fiber_bracket(&z, &data.dy(b)));
            }
            columns.push(col);
            keys.push((a, mono.clone()));
        }
    }
    ColumnMatrix::new(columns)
        .kernel()
        .iter()
        .map(|v| {
            let mut s = data.zero_section();
            for (&k, c) in v {
                let (a, mono) = &keys[k];
                s.0[*a] += &Poly::monomial(n, mono.clone(), c.clone());
            }
            s
        })
        .collect()
}

/// Center of the fiber algebra, one basis per coefficient degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterBasis {
    pub truncated: bool,
    pub by_degree: Vec<Vec<Section>>,
}

impl CenterBasis {
    pub fn dims(&self) -> Vec<usize> {
        self.by_degree.iter().map(Vec::len).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.by_degree.iter().all(Vec::is_empty)
    }
}

pub fn center_basis(data: &InfinitesimalData, max_degree: usize) -> CenterBasis {
    let truncated = structure_degree(data).is_none();
    let by_degree = (0..=max_degree as i64)
        .map(|d| center_in_window(data, Window::new(truncated, d)))
        .collect();
    CenterBasis { truncated, by_degree }
}

/// Matrix of `δ` as unknowns `(a, b, monomial)` with `δ(dy_a) ∋ mono·dy_b`.
fn delta_unit(data: &InfinitesimalData, a: usize, b: usize, mono: &Monomial) -> Vec<Section> {
    let mut delta = vec![data.zero_section(); data.q()];
    delta[a] = monomial_section(data, b, mono);
    delta
}

/// `𝒞∞`-linear derivations of the fiber algebra modulo inner ones, graded by
/// the coefficient degree of `δ`.
pub fn linear_derivations_mod_inner(
    data: &InfinitesimalData,
    max_degree: usize,
) -> Result<GradedDims, CohomologyError> {
    let (n, m, q) = (data.nvars(), data.m(), data.q());
    let degree = structure_degree(data);
    let truncated = degree.is_none();
    let mut dims = Vec::new();
    for d in 0..=max_degree as i64 {
        let delta_window = Window::new(truncated, d);
        let inner_window = match degree {
            Some(Some(p)) => Window::Exact(d - p),
            Some(None) => Window::Exact(-1),
            None => Window::UpTo(d),
        };
        let mut layout = Indexer::new();
        for a in 0..q {
            for b in 0..q {
                for mono in delta_window.monomials(n, m) {
                    layout.id((a, b, mono));
                }
            }
        }
        let size = layout.map.len();
        let positions: BTreeMap<_, _> = layout.map.into_iter().collect();
        let mut enc = ResidualEncoder::new();
        let mut columns = vec![SparseVec::new(); size];
        for ((a, b, mono), &k) in &positions {
            let delta = delta_unit(data, *a, *b, mono);
            let apply = |eta: &Section| -> Section {
                let mut out = data.zero_section();
                for (e, coeff) in eta.0.iter().enumerate() {
                    out.add_assign(&delta[e].scale(coeff));
                }
                out
            };
            let col = &mut columns[k];
            let mut tag = 0;
            for x in 0..q {
                for y in x + 1..q {
                    let mut r = apply(&data.c[x][y]);
                    r.sub_assign(&data.fiber_bracket(&delta[x], &data.dy(y)));
                    r.sub_assign(&data.fiber_bracket(&data.dy(x), &delta[y]));
                    enc.section(col, tag, &r);
                    tag += 1;
                }
            }
        }
        let constraints = ColumnMatrix::new(columns);
        let mut outside = Indexer::new();
        let mut generators = Vec::new();
        for c in 0..q {
            for mono in inner_window.monomials(n, m) {
                let eta = monomial_section(data, c, &mono);
                let mut v = SparseVec::new();
                for a in 0..q {
                    let image = data.fiber_bracket(&eta, &data.dy(a));
                    for (b, p) in image.0.iter().enumerate() {
                        for (mono, coeff) in p.terms() {
                            let key = (a, b, mono.clone());
                            let k = match positions.get(&key) {
                                Some(&k) => k,
                                None => size + outside.id(key),
                            };
                            v.insert(k, coeff.clone());
                        }
                    }
                }
                generators.push(v);
            }
        }
        dims.push(quotient(&constraints, &generators, "linear_derivations_mod_inner")?);
    }
    Ok(GradedDims { truncated, dims })
}

// ---------------------------------------------------------------------------
// Derivations of the affine algebra

/// `X(f ⊕ η) = u(f) ⊕ (δ(η) + Σ_i ∂_i f · Q_i)` with
/// `δ(η) = Σ_a (η^a δ(dy_a) + u(η^a) dy_a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationPair {
    /// Symbol `u = σ_δ`, components along `∂_{x_i}`.
    pub u: Vec<Poly>,
    /// `delta[a] = δ(dy_a)`.
    pub delta: Vec<Section>,
    /// `q[i] = Q(dx_i)`.
    pub q: Vec<Section>,
}

impl DerivationPair {
    pub fn zero(data: &InfinitesimalData) -> Self {
        DerivationPair {
            u: vec![data.zero_poly(); data.m()],
            delta: vec![data.zero_section(); data.q()],
            q: vec![data.zero_section(); data.m()],
        }
    }

    /// `u(g)`.
    pub fn symbol_apply(&self, g: &Poly) -> Poly {
        let mut out = Poly::zero(g.nvars());
        for (i, ui) in self.u.iter().enumerate() {
            if !ui.is_zero() {
                out += &(ui * &g.derivative(i));
            }
        }
        out
    }

    /// `δ(η)`.
    pub fn apply_delta(&self, data: &InfinitesimalData, eta: &Section) -> Section {
        let mut out = data.zero_section();
        for (a, ea) in eta.0.iter().enumerate() {
            if ea.is_zero() {
                continue;
            }
            out.add_assign(&self.delta[a].scale(ea));
            out.0[a] += &self.symbol_apply(ea);
        }
        out
    }

    /// `Q(α) = Σ_i α_i Q(dx_i)`.
    pub fn apply_q(&self, data: &InfinitesimalData, alpha: &[Poly]) -> Section {
        let mut out = data.zero_section();
        for (ai, qi) in alpha.iter().zip(&self.q) {
            if !ai.is_zero() {
                out.add_assign(&qi.scale(ai));
            }
        }
        out
    }

    pub fn apply(&self, data: &InfinitesimalData, e: &AffineElement) -> AffineElement {
        let mut eta = self.apply_delta(data, &e.eta);
        eta.add_assign(&self.apply_q(data, &data.differential(&e.f)));
        AffineElement::new(self.symbol_apply(&e.f), eta)
    }

    pub fn scale(&self, c: &Poly) -> Self {
        DerivationPair {
            u: self.u.iter().map(|p| p * c).collect(),
            delta: self.delta.iter().map(|s| s.scale(c)).collect(),
            q: self.q.iter().map(|s| s.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        DerivationPair {
            u: self.u.iter().zip(&other.u).map(|(a, b)| a + b).collect(),
            delta: self.delta.iter().zip(&other.delta).map(|(a, b)| a + b).collect(),
            q: self.q.iter().zip(&other.q).map(|(a, b)| a + b).collect(),
        }
    }
}

/// `{F, ·}^aff` read off its values on the generators.
pub fn hamiltonian(data: &InfinitesimalData, f: &AffineElement) -> DerivationPair {
    let mut x = DerivationPair::zero(data);
    let q = data.q();
    for i in 0..data.m() {
        let image = data.affine_bracket(f, &AffineElement::base(Poly::var(data.nvars(), i), q));
        x.u[i] = image.f;
        x.q[i] = image.eta;
    }
    for a in 0..q {
        x.delta[a] = data.affine_bracket(f, &AffineElement::fiber(data.dy(a))).eta;
    }
    x
}

/// `X{g, h} − {Xg, h} − {g, Xh}` on all generator pairs `g < h`.
pub fn derivation_residual(data: &InfinitesimalData, x: &DerivationPair) -> Vec<AffineElement> {
    let gens = data.generators();
    let images: Vec<_> = gens.iter().map(|g| x.apply(data, g)).collect();
    let mut out = Vec::new();
    for k in 0..gens.len() {
        for l in k + 1..gens.len() {
            let lhs = x.apply(data, &data.affine_bracket(&gens[k], &gens[l]));
            let r1 = data.affine_bracket(&images[k], &gens[l]);
            let r2 = data.affine_bracket(&gens[k], &images[l]);
            out.push(&(&lhs - &r1) - &r2);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Symbol(usize),
    Delta(usize, usize),
    Q(usize, usize),
}

/// Unknown coordinates `(slot, monomial)` of one derivation weight.
struct Layout {
    positions: BTreeMap<(Slot, Monomial), usize>,
    keys: Vec<(Slot, Monomial)>,
    outside: Indexer<(Slot, Monomial)>,
}

impl Layout {
    fn new(data: &InfinitesimalData, win: &Windows) -> Self {
        let (n, m, q) = (data.nvars(), data.m(), data.q());
        let mut keys = Vec::new();
        for i in 0..m {
            for mono in win.symbol.monomials(n, m) {
                keys.push((Slot::Symbol(i), mono));
            }
        }
        for a in 0..q {
            for b in 0..q {
                for mono in win.delta.monomials(n, m) {
                    keys.push((Slot::Delta(a, b), mono));
                }
            }
        }
        for i in 0..m {
            for a in 0..q {
                for mono in win.q.monomials(n, m) {
                    keys.push((Slot::Q(i, a), mono));
                }
            }
        }
        let positions = keys.iter().cloned().enumerate().map(|(k, key)| (key, k)).collect();
        Layout {
            positions,
            keys,
            outside: Indexer::new(),
        }
    }

    fn len(&self) -> usize {
        self.keys.len()
    }

    fn unit(&self, data: &InfinitesimalData, k: usize) -> DerivationPair {
        let mut x = DerivationPair::zero(data);
        let (slot, mono) = &self.keys[k];
        let p = Poly::monomial(data.nvars(), mono.clone(), Rational::one());
        match *slot {
            Slot::Symbol(i) => x.u[i] = p,
            Slot::Delta(a, b) => x.delta[a].0[b] = p,
            Slot::Q(i, a) => x.q[i].0[a] = p,
        }
        x
    }

    fn slot_of(&self, k: usize) -> Option<Slot> {
        self.keys.get(k).map(|(s, _)| *s)
    }

    /// Coordinates of `x`; monomials outside the window get indices `≥ len()`.
    fn encode(&mut self, x: &DerivationPair) -> SparseVec {
        let mut v = SparseVec::new();
        let mut put = |layout: &mut Layout, slot: Slot, p: &Poly| {
            for (mono, c) in p.terms() {
                let key = (slot, mono.clone());
                let k = match layout.positions.get(&key) {
                    Some(&k) => k,
                    None => layout.len() + layout.outside.id(key),
                };
                v.insert(k, c.clone());
            }
        };
        for (i, p) in x.u.iter().enumerate() {
            put(self, Slot::Symbol(i), p);
        }
        for (a, s) in x.delta.iter().enumerate() {
            for (b, p) in s.0.iter().enumerate() {
                put(self, Slot::Delta(a, b), p);
            }
        }
        for (i, s) in x.q.iter().enumerate() {
            for (a, p) in s.0.iter().enumerate() {
                put(self, Slot::Q(i, a), p);
            }
        }
        v
    }

    fn decode(&self, data: &InfinitesimalData, v: &SparseVec) -> DerivationPair {
        let mut x = DerivationPair::zero(data);
        for (&k, c) in v {
            let (slot, mono) = &self.keys[k];
            let p = Poly::monomial(data.nvars(), mono.clone(), c.clone());
            match *slot {
                Slot::Symbol(i) => x.u[i] += &p,
                Slot::Delta(a, b) => x.delta[a].0[b] += &p,
                Slot::Q(i, a) => x.q[i].0[a] += &p,
            }
        }
        x
    }
}

fn hamiltonian_generators(data: &InfinitesimalData, win: &Windows) -> Vec<AffineElement> {
    let (n, m, q) = (data.nvars(), data.m(), data.q());
    let mut out: Vec<AffineElement> = win
        .ham_base
        .monomials(n, m)
        .into_iter()
        .map(|mono| AffineElement::base(Poly::monomial(n, mono, Rational::one()), q))
        .collect();
    for a in 0..q {
        for mono in win.ham_fiber.monomials(n, m) {
            out.push(AffineElement::fiber(monomial_section(data, a, &mono)));
        }
    }
    out
}

fn derivation_constraints(data: &InfinitesimalData, layout: &Layout) -> ColumnMatrix {
    let mut enc = ResidualEncoder::new();
    let columns = (0..layout.len())
        .map(|k| {
            let mut col = SparseVec::new();
            for (tag, r) in derivation_residual(data, &layout.unit(data, k)).iter().enumerate() {
                enc.affine(&mut col, tag, r);
            }
            col
        })
        .collect();
    ColumnMatrix::new(columns)
}

/// Basis of the bracket derivations of weight `weight`.
pub fn bracket_derivations(data: &InfinitesimalData, weight: usize) -> Vec<DerivationPair> {
    let win = Windows::at(data, infer_grading(data), weight);
    let layout = Layout::new(data, &win);
    derivation_constraints(data, &layout)
        .kernel()
        .iter()
        .map(|v| layout.decode(data, v))
        .collect()
}

/// First cohomology of the affine Poisson algebra: bracket derivations
/// modulo Hamiltonian ones, graded by derivation weight.
pub fn h1_direct(data: &InfinitesimalData, max_weight: usize) -> Result<GradedDims, CohomologyError> {
    let grading = infer_grading(data);
    let mut dims = Vec::new();
    for w in 0..=max_weight {
        let win = Windows::at(data, grading, w);
        let mut layout = Layout::new(data, &win);
        let constraints = derivation_constraints(data, &layout);
        let generators: Vec<_> = hamiltonian_generators(data, &win)
            .iter()
            .map(|f| layout.encode(&hamiltonian(data, f)))
            .collect();
        dims.push(quotient(&constraints, &generators, "h1_direct")?);
    }
    Ok(GradedDims {
        truncated: grading.truncated,
        dims,
    })
}

// ---------------------------------------------------------------------------
// Derivative endomorphisms compatible with the connection and curvature

/// Residuals of the membership conditions for `(δ, u)` with auxiliary `Q̃`
/// stored in `x.q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipResidual {
    /// `δ` is a derivation of the fiber bracket.
    pub fiber: Vec<Section>,
    /// `[ψ, u]`.
    pub symbol: Multivector,
    /// `[D_{dx_i}, δ] dy_a + D_{du^i} dy_a − [Q̃_i, dy_a]_1`.
    pub connection: Vec<Section>,
    /// `δ K(dx_i, dx_j) − K(du^i, dx_j) − K(dx_i, du^j) + (d_D Q̃)(dx_i, dx_j)`.
    pub curvature: Vec<Section>,
}

impl MembershipResidual {
    pub fn is_zero(&self) -> bool {
        self.symbol.is_zero()
            && self
                .fiber
                .iter()
                .chain(&self.connection)
                .chain(&self.curvature)
                .all(Section::is_zero)
    }
}

pub fn membership_residual(data: &InfinitesimalData, x: &DerivationPair) -> MembershipResidual {
    let (n, m, q) = (data.nvars(), data.m(), data.q());
    let mut fiber = Vec::new();
    for a in 0..q {
        for b in a + 1..q {
            let mut r = x.apply_delta(data, &data.c[a][b]);
            r.sub_assign(&data.fiber_bracket(&x.delta[a], &data.dy(b)));
            r.sub_assign(&data.fiber_bracket(&data.dy(a), &x.delta[b]));
            fiber.push(r);
        }
    }
    let field = Multivector::vector_field(n, Space::Base, &x.u);
    let symbol = data.psi().schouten(&field).expect("base multivectors share a shape");
    let du: Vec<Vec<Poly>> = x.u.iter().map(|p| data.differential(p)).collect();
    let mut connection = Vec::new();
    for i in 0..m {
        for a in 0..q {
            let mut r = data.connection_dx(i, &x.delta[a]);
            r.sub_assign(&x.apply_delta(data, &data.gamma[i][a]));
            r.add_assign(&data.connection(&du[i], &data.dy(a)));
            r.sub_assign(&data.fiber_bracket(&x.q[i], &data.dy(a)));
            connection.push(r);
        }
    }
    let dq = data.contravariant_differential(&ConormalMultivector::from_values(x.q.clone()));
    let unit = |i: usize| {
        let mut v = vec![Poly::zero(n); m];
        v[i] = Poly::one(n);
        v
    };
    let mut curvature = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let mut r = x.apply_delta(data, &data.kappa[i][j]);
            r.sub_assign(&data.curvature(&du[i], &unit(j)));
            r.sub_assign(&data.curvature(&unit(i), &du[j]));
            r.add_assign(&dq.value(&[i, j], n, q));
            curvature.push(r);
        }
    }
    MembershipResidual {
        fiber,
        symbol,
        connection,
        curvature,
    }
}

/// `(D_{df}, ψ(df, ·))` with `Q̃ = −K(df, ·)`.
pub fn connection_derivation(data: &InfinitesimalData, f: &Poly) -> DerivationPair {
    let (n, m) = (data.nvars(), data.m());
    let df = data.differential(f);
    let mut x = DerivationPair::zero(data);
    for i in 0..m {
        let mut dxi = vec![Poly::zero(n); m];
        dxi[i] = Poly::one(n);
        x.u[i] = data.psi_pair(&df, &dxi);
        x.q[i] = -&data.curvature(&df, &dxi);
    }
    for a in 0..data.q() {
        x.delta[a] = data.connection(&df, &data.dy(a));
    }
    x
}

/// `(ad_η, 0)` with `Q̃ = d_D η`.
pub fn inner_derivation(data: &InfinitesimalData, eta: &Section) -> DerivationPair {
    let mut x = DerivationPair::zero(data);
    for a in 0..data.q() {
        x.delta[a] = data.fiber_bracket(eta, &data.dy(a));
    }
    for i in 0..data.m() {
        x.q[i] = data.connection_dx(i, eta);
    }
    x
}

/// Dimensions of the spaces in the short exact sequences at one weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MSpaceDims {
    /// Solutions `(δ, u, Q̃)` of the membership conditions.
    pub solutions: usize,
    pub m: usize,
    pub c: usize,
    pub inner: usize,
    pub c_plus_inner: usize,
    pub m0: usize,
    pub c0: usize,
    pub c0_plus_inner: usize,
    pub image_sigma: usize,
    pub ham: usize,
    /// `𝔐 / (𝒞 + Inn)`.
    pub m_mod: usize,
    /// `𝔐₀ / (𝒞₀ + Inn)`.
    pub m0_mod: usize,
    /// `Im σ / Ham`.
    pub sigma_mod_ham: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MSpace {
    pub weight: usize,
    pub dims: MSpaceDims,
    /// Basis of `𝔐` as `(δ, u)` with `q` zero.
    pub m_basis: Vec<DerivationPair>,
}

pub fn m_space(data: &InfinitesimalData, max_weight: usize) -> Result<Vec<MSpace>, CohomologyError> {
    let grading = infer_grading(data);
    let (n, m, q) = (data.nvars(), data.m(), data.q());
    let mut out = Vec::new();
    for w in 0..=max_weight {
        let win = Windows::at(data, grading, w);
        let mut layout = Layout::new(data, &win);
        let size = layout.len();
        let mut enc = ResidualEncoder::new();
        let columns = (0..size)
            .map(|k| {
                let r = membership_residual(data, &layout.unit(data, k));
                let mut col = SparseVec::new();
                let mut tag = 0;
                for s in r.fiber.iter().chain(&r.connection).chain(&r.curvature) {
                    enc.section(&mut col, tag, s);
                    tag += 1;
                }
                enc.multivector(&mut col, tag, &r.symbol);
                col
            })
            .collect();
        let constraints = ColumnMatrix::new(columns);
        let solutions = constraints.kernel();

        let slots: Vec<Slot> = (0..size).filter_map(|k| layout.slot_of(k)).collect();
        let is_symbol = |k: usize| matches!(slots.get(k), Some(Slot::Symbol(_)));
        let is_pair = |k: usize| matches!(slots.get(k), Some(Slot::Symbol(_) | Slot::Delta(..)));
        let m_vectors: Vec<_> = solutions.iter().map(|v| project(v, is_pair)).collect();
        let dim_m = rank(&m_vectors);
        let dim_sigma = rank(&m_vectors.iter().map(|v| project(v, is_symbol)).collect::<Vec<_>>());

        let c_generators: Vec<_> = win
            .ham_base
            .monomials(n, m)
            .into_iter()
            .map(|mono| layout.encode(&connection_derivation(data, &Poly::monomial(n, mono, Rational::one()))))
            .collect();
        let mut inner_generators = Vec::new();
        for a in 0..q {
            for mono in win.ham_fiber.monomials(n, m) {
                inner_generators.push(layout.encode(&inner_derivation(data, &monomial_section(data, a, &mono))));
            }
        }
        let c_full = window_span(&c_generators, |k| k < size);
        let inner_full = window_span(&inner_generators, |k| k < size);
        for v in c_full.iter().chain(&inner_full) {
            if !constraints.apply(v).is_empty() {
                return Err(CohomologyError::Inconsistent(format!(
                    "m_space: a connection or inner derivation violates the membership conditions at weight {w}"
                )));
            }
        }
        let c_vecs: Vec<_> = c_full.iter().map(|v| project(v, is_pair)).collect();
        let inner_vecs: Vec<_> = inner_full.iter().map(|v| project(v, is_pair)).collect();
        let c0_vecs: Vec<_> = window_span(&c_generators, |k| k < size && !is_symbol(k))
            .iter()
            .map(|v| project(v, is_pair))
            .collect();
        let ham_vecs: Vec<_> = c_vecs.iter().map(|v| project(v, is_symbol)).collect();

        let both: Vec<_> = c_vecs.iter().chain(&inner_vecs).cloned().collect();
        let both0: Vec<_> = c0_vecs.iter().chain(&inner_vecs).cloned().collect();
        let all: Vec<_> = m_vectors.iter().chain(&both).cloned().collect();
        if rank(&all) != dim_m {
            return Err(CohomologyError::Inconsistent(format!(
                "m_space: connection and inner derivations are not contained in M at weight {w}"
            )));
        }
        let c_plus_inner = rank(&both);
        let c0_plus_inner = rank(&both0);
        let ham = rank(&ham_vecs);
        let dims = MSpaceDims {
            solutions: solutions.len(),
            m: dim_m,
            c: rank(&c_vecs),
            inner: rank(&inner_vecs),
            c_plus_inner,
            m0: dim_m - dim_sigma,
            c0: rank(&c0_vecs),
            c0_plus_inner,
            image_sigma: dim_sigma,
            ham,
            m_mod: dim_m - c_plus_inner,
            m0_mod: (dim_m - dim_sigma) - c0_plus_inner,
            sigma_mod_ham: dim_sigma - ham,
        };
        let mut basis_rows = crate::linalg::Echelon::new();
        let mut m_basis = Vec::new();
        for v in &m_vectors {
            if basis_rows.insert(v) {
                m_basis.push(layout.decode(data, v));
            }
        }
        out.push(MSpace {
            weight: w,
            dims,
            m_basis,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Center-valued complex

/// First cohomology of the center-valued complex `(𝔷•, ∂_D)`, graded by
/// derivation weight: `Q ∈ 𝔷¹` has degree `W − t`.
pub fn partial_d_h1(data: &InfinitesimalData, max_weight: usize) -> Result<GradedDims, CohomologyError> {
    let grading = infer_grading(data);
    let (n, q) = (data.nvars(), data.q());
    let mut dims = Vec::new();
    for w in 0..=max_weight {
        let win = Windows::at(data, grading, w);
        // only the Q slots of the derivation layout
        let mut layout = Layout::new(
            data,
            &Windows {
                symbol: Window::Exact(-1),
                delta: Window::Exact(-1),
                ..win
            },
        );
        let mut enc = ResidualEncoder::new();
        let columns = (0..layout.len())
            .map(|k| {
                let x = layout.unit(data, k);
                let mut col = SparseVec::new();
                let mut tag = 0;
                for qi in &x.q {
                    for b in 0..q {
                        enc.section(&mut col, tag, &data.fiber_bracket(qi, &data.dy(b)));
                        tag += 1;
                    }
                }
                let dq = data.contravariant_differential(&ConormalMultivector::from_values(x.q));
                for pair in increasing_tuples(data.m(), 2) {
                    enc.section(&mut col, tag, &dq.value(&pair, n, q));
                    tag += 1;
                }
                col
            })
            .collect::<Vec<_>>();
        let constraints = ColumnMatrix::new(columns);
        let zeros = center_in_window(data, win.ham_fiber);
        let mut generators = Vec::new();
        for z in &zeros {
            let dz = data.contravariant_differential(&ConormalMultivector::section(z.clone()));
            if !data.contravariant_differential(&dz).is_zero() {
                return Err(CohomologyError::Inconsistent(format!(
                    "partial_d_h1: the center differential does not square to zero at weight {w}"
                )));
            }
            let mut x = DerivationPair::zero(data);
            x.q = (0..data.m()).map(|i| dz.value(&[i], n, q)).collect();
            generators.push(layout.encode(&x));
        }
        dims.push(quotient(&constraints, &generators, "partial_d_h1")?);
    }
    Ok(GradedDims {
        truncated: grading.truncated,
        dims,
    })
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightRow {
    pub weight: usize,
    pub poisson_h1: QuotientDims,
    /// Indexed by the coefficient degree of `δ`.
    pub linear_derivations: QuotientDims,
    /// Indexed by coefficient degree.
    pub center_dim: usize,
    pub partial_h1: QuotientDims,
    pub h1_direct: QuotientDims,
    pub m_space: MSpaceDims,
    /// `dim 𝔐/(𝒞+Inn) = dim 𝔐₀/(𝒞₀+Inn) + dim Im σ/Ham`.
    pub additivity_holds: bool,
    /// `dim 𝔐/(𝒞+Inn) ≤ dim H¹ ≤ dim H¹_∂ + dim 𝔐/(𝒞+Inn)`; `None` when truncated.
    pub bound_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub max_weight: usize,
    pub grading: Grading,
    pub truncated: bool,
    pub rows: Vec<WeightRow>,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub condition_iii: bool,
    pub center_complex_acyclic: bool,
    pub additivity_holds: bool,
    pub bound_holds: bool,
}

pub fn exact_sequence_report(data: &InfinitesimalData, max_weight: usize) -> Result<CohomologyReport, CohomologyError> {
    let grading = infer_grading(data);
    let poisson = poisson_h1(data.psi(), max_weight)?;
    let linear = linear_derivations_mod_inner(data, max_weight)?;
    let center = center_basis(data, max_weight);
    let partial = partial_d_h1(data, max_weight)?;
    let direct = h1_direct(data, max_weight)?;
    let spaces = m_space(data, max_weight)?;
    let mut rows = Vec::new();
    for w in 0..=max_weight {
        let ms = spaces[w].dims;
        let h1 = direct.dims[w];
        if h1.cocycles != ms.solutions {
            return Err(CohomologyError::Inconsistent(format!(
                "weight {w}: {} bracket derivations but {} solutions of the membership conditions",
                h1.cocycles, ms.solutions
            )));
        }
        let additivity_holds = ms.m_mod == ms.m0_mod + ms.sigma_mod_ham;
        if !additivity_holds {
            return Err(CohomologyError::Inconsistent(format!(
                "weight {w}: additivity fails ({} != {} + {})",
                ms.m_mod, ms.m0_mod, ms.sigma_mod_ham
            )));
        }
        let bound_holds =
            (!grading.truncated).then(|| ms.m_mod <= h1.quotient && h1.quotient <= partial.dims[w].quotient + ms.m_mod);
        if bound_holds == Some(false) {
            return Err(CohomologyError::Inconsistent(format!(
                "weight {w}: dim H1 = {} outside [{}, {} + {}]",
                h1.quotient, ms.m_mod, partial.dims[w].quotient, ms.m_mod
            )));
        }
        rows.push(WeightRow {
            weight: w,
            poisson_h1: poisson.dims[w],
            linear_derivations: linear.dims[w],
            center_dim: center.by_degree[w].len(),
            partial_h1: partial.dims[w],
            h1_direct: h1,
            m_space: ms,
            additivity_holds,
            bound_holds,
        });
    }
    Ok(CohomologyReport {
        max_weight,
        grading,
        truncated: grading.truncated,
        condition_i: poisson.all_vanish(),
        condition_ii: linear.all_vanish(),
        condition_iii: center.is_trivial(),
        center_complex_acyclic: partial.all_vanish(),
        additivity_holds: true,
        bound_holds: true,
        rows,
    })
}

/// Outcome of the vanishing criteria at a weight window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub max_weight: usize,
    pub truncated: bool,
    pub poisson_h1: Vec<usize>,
    pub linear_derivations: Vec<usize>,
    /// Center dimension per coefficient degree.
    pub center: Vec<usize>,
    pub partial_h1: Vec<usize>,
    pub h1_direct: Vec<usize>,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub condition_iii: bool,
    pub center_complex_acyclic: bool,
    /// Conditions (i), (ii), (iii).
    pub classical: bool,
    /// Conditions (i), (ii) and an acyclic center complex.
    pub generalized: bool,
    /// `h1_direct` vanishes on the whole window.
    pub h1_vanishes: bool,
    pub summary: String,
}

pub fn theorem1_check(data: &InfinitesimalData, max_weight: usize) -> Result<Verdict, CohomologyError> {
    let grading = infer_grading(data);
    let poisson = poisson_h1(data.psi(), max_weight)?;
    let linear = linear_derivations_mod_inner(data, max_weight)?;
    let center_max = if grading.t < 0 {
        max_weight + grading.t.unsigned_abs() as usize
    } else {
        max_weight
    };
    let center = center_basis(data, center_max);
    let partial = partial_d_h1(data, max_weight)?;
    let direct = h1_direct(data, max_weight)?;

    let condition_i = poisson.all_vanish();
    let condition_ii = linear.all_vanish();
    let condition_iii = center.is_trivial();
    let center_complex_acyclic = partial.all_vanish();
    let classical = condition_i && condition_ii && condition_iii;
    let generalized = condition_i && condition_ii && center_complex_acyclic;
    let h1 = direct.quotients();
    let h1_vanishes = h1.iter().all(|&d| d == 0);

    if (classical || generalized) && !h1_vanishes && !grading.truncated {
        let (weight, &dim) = h1.iter().enumerate().find(|(_, &d)| d != 0).expect("nonzero weight");
        return Err(CohomologyError::TheoremViolation { weight, dim });
    }

    let hypotheses = if classical {
        "conditions (i)(ii)(iii) hold"
    } else {
        "conditions (i)(ii) hold and the center complex is acyclic"
    };
    let summary = if classical || generalized {
        if h1_vanishes {
            format!("trivial: {hypotheses}; H1 = 0 (verified directly)")
        } else {
            format!("trivial: {hypotheses}; direct dims are truncated upper bounds")
        }
    } else {
        let failed: Vec<&str> = [(condition_i, "(i)"), (condition_ii, "(ii)"), (condition_iii, "(iii)")]
            .iter()
            .filter(|(holds, _)| !holds)
            .map(|(_, name)| *name)
            .collect();
        let failing = match failed.len() {
            1 => format!("condition {} fails", failed[0]),
            _ => format!("conditions {} fail", failed.concat()),
        };
        let dims: Vec<String> = h1.iter().map(|d| format!("{d}")).collect();
        format!("inconclusive: {failing}; direct H1 dims by weight: {}", dims.join(", "))
    };
    Ok(Verdict {
        max_weight,
        truncated: grading.truncated,
        poisson_h1: poisson.quotients(),
        linear_derivations: linear.quotients(),
        center: center.dims(),
        partial_h1: partial.quotients(),
        h1_direct: h1,
        condition_i,
        condition_ii,
        condition_iii,
        center_complex_acyclic,
        classical,
        generalized,
        h1_vanishes,
        summary,
    })
}
