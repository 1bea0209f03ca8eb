//! The infinitesimal Poisson algebra of a coordinate submanifold `S = {y = 0}`.
//!
//! With the coordinate splitting `h(dx_i) = dx_i|_S` and the identity
//! exponential map, the first-order data of `π` along `S` are
//!
//! ```text
//! ψ^{ij}    = π^{x_i x_j}|_S                 induced Poisson structure on S
//! c^e_{ab}  = ∂_{y_e} π^{y_a y_b}|_S          [dy_a, dy_b]_1 = Σ_e c^e_{ab} dy_e
//! Γ^b_{ia}  = ∂_{y_b} π^{x_i y_a}|_S          D_{dx_i} dy_a  = Σ_b Γ^b_{ia} dy_b
//! K^a_{ij}  = ∂_{y_a} π^{x_i x_j}|_S          K(dx_i, dx_j)  = Σ_a K^a_{ij} dy_a
//! ```
//!
//! A fiberwise-affine function `f + Σ_a η^a y_a` is an [`AffineElement`]
//! `f ⊕ η`. All coefficient polynomials live in the ambient ring but never
//! contain a normal variable.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use crate::multivector::{gradient, jacobi_check, sort_with_sign, Multivector, MultivectorError, Space};
use crate::polyring::{Poly, VarContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubmanifoldError {
    /// `π` is not an ambient bivector over the context's variables.
    Shape,
    NotPoisson(Multivector),
    /// Components with a normal index that do not vanish on `S`.
    NotPoissonSubmanifold(Vec<(usize, usize)>),
    /// A polynomial with fiber degree above one.
    NotAffine,
}

impl fmt::Display for SubmanifoldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubmanifoldError::Shape => f.write_str("bivector does not match the coordinate context"),
            SubmanifoldError::NotPoisson(_) => f.write_str("bivector fails the Jacobi identity"),
            SubmanifoldError::NotPoissonSubmanifold(bad) => {
                write!(f, "{} component(s) with a normal index do not vanish on S", bad.len())
            }
            SubmanifoldError::NotAffine => f.write_str("polynomial is not fiberwise affine"),
        }
    }
}

impl core::error::Error for SubmanifoldError {}

impl From<MultivectorError> for SubmanifoldError {
    fn from(_: MultivectorError) -> Self {
        SubmanifoldError::Shape
    }
}

/// A section `η = Σ_a η^a dy_a` of the conormal bundle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Section(pub Vec<Poly>);

impl Section {
    pub fn zero(nvars: usize, q: usize) -> Self {
        Section(vec![Poly::zero(nvars); q])
    }

    /// `dy_a`.
    pub fn basis(nvars: usize, q: usize, a: usize) -> Self {
        let mut s = Section::zero(nvars, q);
        s.0[a] = Poly::one(nvars);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Poly::is_zero)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, f: &Poly) -> Section {
        Section(self.0.iter().map(|p| p * f).collect())
    }

    pub fn map(&self, f: impl FnMut(&Poly) -> Poly) -> Section {
        Section(self.0.iter().map(f).collect())
    }

    pub fn add_assign(&mut self, other: &Section) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &Section) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a -= b;
        }
    }
}

impl Add for &Section {
    type Output = Section;
    fn add(self, rhs: &Section) -> Section {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl Sub for &Section {
    type Output = Section;
    fn sub(self, rhs: &Section) -> Section {
        let mut out = self.clone();
        out.sub_assign(rhs);
        out
    }
}

impl Neg for &Section {
    type Output = Section;
    fn neg(self) -> Section {
        self.map(|p| -p)
    }
}

/// A fiberwise-affine function `f ⊕ η`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineElement {
    pub f: Poly,
    pub eta: Section,
}

impl AffineElement {
    pub fn new(f: Poly, eta: Section) -> Self {
        AffineElement { f, eta }
    }

    pub fn zero(nvars: usize, q: usize) -> Self {
        AffineElement::new(Poly::zero(nvars), Section::zero(nvars, q))
    }

    /// `f ⊕ 0`.
    pub fn base(f: Poly, q: usize) -> Self {
        let n = f.nvars();
        AffineElement::new(f, Section::zero(n, q))
    }

    /// `0 ⊕ η`.
    pub fn fiber(eta: Section) -> Self {
        let n = eta.0.first().map(Poly::nvars).unwrap_or(0);
        AffineElement::new(Poly::zero(n), eta)
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.eta.is_zero()
    }

    /// Reads `f + Σ η^a y_a` off an ambient polynomial of fiber degree ≤ 1.
    pub fn from_poly(ctx: &VarContext, p: &Poly) -> Result<Self, SubmanifoldError> {
        let too_high = p.terms().any(|(mono, _)| ctx.fiber_degree(mono) > 1);
        if too_high {
            return Err(SubmanifoldError::NotAffine);
        }
        let f = ctx.fiber_component(p, 0);
        let linear = ctx.fiber_component(p, 1);
        let eta = (0..ctx.normal_dim())
            .map(|a| ctx.restrict_to_s(&linear.derivative(ctx.normal_index(a))))
            .collect();
        Ok(AffineElement::new(f, Section(eta)))
    }

    pub fn to_poly(&self, ctx: &VarContext) -> Poly {
        let mut out = self.f.clone();
        for (a, e) in self.eta.0.iter().enumerate() {
            out += &(e * &ctx.normal_var(a));
        }
        out
    }
}

impl Add for &AffineElement {
    type Output = AffineElement;
    fn add(self, rhs: &AffineElement) -> AffineElement {
        AffineElement::new(&self.f + &rhs.f, &self.eta + &rhs.eta)
    }
}

impl Sub for &AffineElement {
    type Output = AffineElement;
    fn sub(self, rhs: &AffineElement) -> AffineElement {
        AffineElement::new(&self.f - &rhs.f, &self.eta - &rhs.eta)
    }
}

/// `(f ⊕ η)·(g ⊕ ξ) = fg ⊕ (fξ + gη)`.
pub fn affine_product(u: &AffineElement, v: &AffineElement) -> AffineElement {
    AffineElement::new(&u.f * &v.f, &v.eta.scale(&u.f) + &u.eta.scale(&v.f))
}

/// Outcome of the Poisson-submanifold test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmanifoldReport {
    pub holds: bool,
    /// Ambient index pairs `(μ, ν)`, `μ < ν`, of offending components.
    pub offending: Vec<(usize, usize)>,
}

fn check_shape(pi: &Multivector, ctx: &VarContext) -> Result<(), SubmanifoldError> {
    let n = ctx.nvars();
    if pi.grade() != 2 || pi.nvars() != n || pi.dim() != n || pi.space() != Space::Ambient {
        return Err(SubmanifoldError::Shape);
    }
    Ok(())
}

/// Every component `π^{μν}` with a normal index must vanish on `S`.
pub fn check_poisson_submanifold(pi: &Multivector, ctx: &VarContext) -> Result<SubmanifoldReport, SubmanifoldError> {
    check_shape(pi, ctx)?;
    let jacobi = jacobi_check(pi)?;
    if !jacobi.holds {
        return Err(SubmanifoldError::NotPoisson(jacobi.residual));
    }
    let offending: Vec<(usize, usize)> = pi
        .terms()
        .filter(|(k, p)| (ctx.is_normal(k[0]) || ctx.is_normal(k[1])) && !ctx.restrict_to_s(p).is_zero())
        .map(|(k, _)| (k[0], k[1]))
        .collect();
    Ok(SubmanifoldReport {
        holds: offending.is_empty(),
        offending,
    })
}

/// The extracted tuple `(ψ, c, Γ, K)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfinitesimalData {
    ctx: VarContext,
    psi: Multivector,
    /// `c[a][b] = [dy_a, dy_b]_1`.
    pub c: Vec<Vec<Section>>,
    /// `gamma[i][a] = D_{dx_i} dy_a`.
    pub gamma: Vec<Vec<Section>>,
    /// `kappa[i][j] = K(dx_i, dx_j)`.
    pub kappa: Vec<Vec<Section>>,
}

/// An `E*`-valued k-vector field on `S`: `Q(dx_{i_1}, ..., dx_{i_k})` for
/// increasing index tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConormalMultivector {
    pub grade: usize,
    pub components: BTreeMap<Vec<usize>, Section>,
}

impl ConormalMultivector {
    pub fn new(grade: usize) -> Self {
        ConormalMultivector {
            grade,
            components: BTreeMap::new(),
        }
    }

    /// An `E*`-valued function (grade 0).
    pub fn section(s: Section) -> Self {
        let mut out = ConormalMultivector::new(0);
        out.components.insert(Vec::new(), s);
        out
    }

    /// An `E*`-valued vector field from `Q(dx_i)`, `i = 0..m`.
    pub fn from_values(values: Vec<Section>) -> Self {
        let mut out = ConormalMultivector::new(1);
        for (i, s) in values.into_iter().enumerate() {
            out.components.insert(vec![i], s);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(Section::is_zero)
    }

    /// Value on `(dx_{idx[0]}, ...)` for indices in any order.
    pub fn value(&self, idx: &[usize], nvars: usize, q: usize) -> Section {
        match sort_with_sign(idx) {
            Some((negative, key)) => match self.components.get(&key) {
                Some(s) if negative => -s,
                Some(s) => s.clone(),
                None => Section::zero(nvars, q),
            },
            None => Section::zero(nvars, q),
        }
    }
}

/// Residuals of one structural identity, labelled by their generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub holds: bool,
    pub residuals: Vec<(String, Section)>,
}

impl IdentityCheck {
    fn from_residuals(all: Vec<(String, Section)>) -> Self {
        let residuals: Vec<_> = all.into_iter().filter(|(_, s)| !s.is_zero()).collect();
        IdentityCheck {
            holds: residuals.is_empty(),
            residuals,
        }
    }
}

/// The three compatibility identities between `[·,·]_1`, `D` and `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtReport {
    /// `D_α [η, ξ]_1 = [D_α η, ξ]_1 + [η, D_α ξ]_1`.
    pub pt1: IdentityCheck,
    /// `Curv^D(α, β) = [K(α, β), ·]_1`.
    pub pt2: IdentityCheck,
    /// Cyclic sum of `D_α K(β, γ) + K(α, [β, γ]_ψ)` vanishes.
    pub pt3: IdentityCheck,
}

impl PtReport {
    pub fn all_hold(&self) -> bool {
        self.pt1.holds && self.pt2.holds && self.pt3.holds
    }
}

impl InfinitesimalData {
    /// Extracts `(ψ, c, Γ, K)` from `π` for `S = {y = 0}`.
    pub fn extract(pi: &Multivector, ctx: &VarContext) -> Result<Self, SubmanifoldError> {
        let report = check_poisson_submanifold(pi, ctx)?;
        if !report.holds {
            return Err(SubmanifoldError::NotPoissonSubmanifold(report.offending));
        }
        let (n, m, q) = (ctx.nvars(), ctx.base_dim(), ctx.normal_dim());
        let y = |a: usize| ctx.normal_index(a);
        let first_order = |mu: usize, nu: usize, e: usize| ctx.restrict_to_s(&pi.component(&[mu, nu]).derivative(y(e)));

        let mut psi = Multivector::zero(n, m, Space::Base, 2);
        for i in 0..m {
            for j in i + 1..m {
                psi.add_component(&[i, j], &ctx.restrict_to_s(&pi.component(&[i, j])))?;
            }
        }
        let c = (0..q)
            .map(|a| {
                (0..q)
                    .map(|b| Section((0..q).map(|e| first_order(y(a), y(b), e)).collect()))
                    .collect()
            })
            .collect();
        let gamma = (0..m)
            .map(|i| {
                (0..q)
                    .map(|a| Section((0..q).map(|b| first_order(i, y(a), b)).collect()))
                    .collect()
            })
            .collect();
        let kappa = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| Section((0..q).map(|a| first_order(i, j, a)).collect()))
                    .collect()
            })
            .collect();
        Ok(InfinitesimalData {
            ctx: ctx.clone(),
            psi,
            c,
            gamma,
            kappa,
        })
    }

    /// Assembles data directly; used for negative controls and tests.
    pub fn from_parts(
        ctx: VarContext,
        psi: Multivector,
        c: Vec<Vec<Section>>,
        gamma: Vec<Vec<Section>>,
        kappa: Vec<Vec<Section>>,
    ) -> Self {
        InfinitesimalData {
            ctx,
            psi,
            c,
            gamma,
            kappa,
        }
    }

    pub fn ctx(&self) -> &VarContext {
        &self.ctx
    }

    pub fn psi(&self) -> &Multivector {
        &self.psi
    }

    pub fn m(&self) -> usize {
        self.ctx.base_dim()
    }

    pub fn q(&self) -> usize {
        self.ctx.normal_dim()
    }

    pub fn nvars(&self) -> usize {
        self.ctx.nvars()
    }

    pub fn zero_section(&self) -> Section {
        Section::zero(self.nvars(), self.q())
    }

    pub fn dy(&self, a: usize) -> Section {
        Section::basis(self.nvars(), self.q(), a)
    }

    pub fn zero_poly(&self) -> Poly {
        Poly::zero(self.nvars())
    }

    /// Components of `df` along `dx_1..dx_m`.
    pub fn differential(&self, f: &Poly) -> Vec<Poly> {
        gradient(f, self.m())
    }

    /// `{f, g}_ψ = ψ(df, dg)`.
    pub fn psi_bracket(&self, f: &Poly, g: &Poly) -> Poly {
        self.psi
            .pair(&self.differential(f), &self.differential(g))
            .expect("psi is a bivector")
    }

    /// `ψ(α, β)` on two one-forms.
    pub fn psi_pair(&self, alpha: &[Poly], beta: &[Poly]) -> Poly {
        self.psi.pair(alpha, beta).expect("psi is a bivector")
    }

    /// `[η, ξ]_1`, bilinear over functions.
    pub fn fiber_bracket(&self, eta: &Section, xi: &Section) -> Section {
        let mut out = self.zero_section();
        for (a, ea) in eta.0.iter().enumerate() {
            if ea.is_zero() {
                continue;
            }
            for (b, xb) in xi.0.iter().enumerate() {
                if xb.is_zero() {
                    continue;
                }
                out.add_assign(&self.c[a][b].scale(&(ea * xb)));
            }
        }
        out
    }

    /// `D_{dx_i} ξ = Σ_b ({x_i, ξ^b}_ψ dy_b + ξ^b D_{dx_i} dy_b)`.
    pub fn connection_dx(&self, i: usize, xi: &Section) -> Section {
        let m = self.m();
        let mut out = self.zero_section();
        for (b, xb) in xi.0.iter().enumerate() {
            if xb.is_zero() {
                continue;
            }
            // {x_i, h}_ψ = Σ_j ψ^{ij} ∂_j h
            let mut transport = self.zero_poly();
            for j in 0..m {
                let pij = self.psi.component(&[i, j]);
                if !pij.is_zero() {
                    transport += &(&pij * &xb.derivative(j));
                }
            }
            out.0[b] += &transport;
            out.add_assign(&self.gamma[i][b].scale(xb));
        }
        out
    }

    /// `D_α ξ`, linear over functions in `α`.
    pub fn connection(&self, alpha: &[Poly], xi: &Section) -> Section {
        let mut out = self.zero_section();
        for (i, ai) in alpha.iter().enumerate() {
            if !ai.is_zero() {
                out.add_assign(&self.connection_dx(i, xi).scale(ai));
            }
        }
        out
    }

    /// `D_{df} ξ`.
    pub fn connection_exact(&self, f: &Poly, xi: &Section) -> Section {
        self.connection(&self.differential(f), xi)
    }

    /// `K(α, β)`.
    pub fn curvature(&self, alpha: &[Poly], beta: &[Poly]) -> Section {
        let mut out = self.zero_section();
        for (i, ai) in alpha.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in beta.iter().enumerate() {
                if bj.is_zero() || i == j {
                    continue;
                }
                out.add_assign(&self.kappa[i][j].scale(&(ai * bj)));
            }
        }
        out
    }

    pub fn curvature_exact(&self, f: &Poly, g: &Poly) -> Section {
        self.curvature(&self.differential(f), &self.differential(g))
    }

    /// `{f ⊕ η, g ⊕ ξ}^aff = ψ(df, dg) ⊕ (D_{df} ξ − D_{dg} η + [η, ξ]_1 + K(df, dg))`.
    pub fn affine_bracket(&self, u: &AffineElement, v: &AffineElement) -> AffineElement {
        let df = self.differential(&u.f);
        let dg = self.differential(&v.f);
        let mut eta = self.connection(&df, &v.eta);
        eta.sub_assign(&self.connection(&dg, &u.eta));
        eta.add_assign(&self.fiber_bracket(&u.eta, &v.eta));
        eta.add_assign(&self.curvature(&df, &dg));
        AffineElement::new(self.psi_pair(&df, &dg), eta)
    }

    /// Generators `x_i ⊕ 0` followed by `0 ⊕ dy_a`.
    pub fn generators(&self) -> Vec<AffineElement> {
        let n = self.nvars();
        let q = self.q();
        (0..self.m())
            .map(|i| AffineElement::base(Poly::var(n, i), q))
            .chain((0..q).map(|a| AffineElement::fiber(self.dy(a))))
            .collect()
    }

    /// Human-readable name of generator `k` of [`Self::generators`].
    pub fn generator_name(&self, k: usize) -> String {
        if k < self.m() {
            String::from(self.ctx.name(k))
        } else {
            format!("d{}", self.ctx.name(self.ctx.normal_index(k - self.m())))
        }
    }

    /// The contravariant differential `d_D` on `E*`-valued multivectors:
    ///
    /// ```text
    /// (d Q)(dx_{i_0}, ..., dx_{i_k}) = Σ_l (−1)^l D_{dx_{i_l}} Q(..., î_l, ...)
    ///     + Σ_{l<p} (−1)^{l+p} Q(dψ^{i_l i_p}, ..., î_l, ..., î_p, ...)
    /// ```
    pub fn contravariant_differential(&self, q_field: &ConormalMultivector) -> ConormalMultivector {
        let (n, m, q) = (self.nvars(), self.m(), self.q());
        let k = q_field.grade;
        let mut out = ConormalMultivector::new(k + 1);
        for idx in increasing_tuples(m, k + 1) {
            let mut total = self.zero_section();
            for l in 0..=k {
                let mut rest = idx.clone();
                let il = rest.remove(l);
                let term = self.connection_dx(il, &q_field.value(&rest, n, q));
                if l % 2 == 0 {
                    total.add_assign(&term);
                } else {
                    total.sub_assign(&term);
                }
            }
            for l in 0..=k {
                for p in l + 1..=k {
                    let rest: Vec<usize> = idx
                        .iter()
                        .enumerate()
                        .filter(|&(t, _)| t != l && t != p)
                        .map(|(_, &v)| v)
                        .collect();
                    let dpsi = self.differential(&self.psi.component(&[idx[l], idx[p]]));
                    // Q(dg, rest) = Σ_j ∂_j g Q(dx_j, rest)
                    let mut term = self.zero_section();
                    for (j, gj) in dpsi.iter().enumerate() {
                        if gj.is_zero() {
                            continue;
                        }
                        let mut full = vec![j];
                        full.extend_from_slice(&rest);
                        term.add_assign(&q_field.value(&full, n, q).scale(gj));
                    }
                    if (l + p) % 2 == 0 {
                        total.add_assign(&term);
                    } else {
                        total.sub_assign(&term);
                    }
                }
            }
            if !total.is_zero() {
                out.components.insert(idx, total);
            }
        }
        out
    }

    /// Checks the three identities on the generators `dx_i`, `dy_a`.
    pub fn verify_pt(&self) -> PtReport {
        let (m, q) = (self.m(), self.q());
        let xname = |i: usize| format!("dx:{}", self.ctx.name(i));
        let yname = |a: usize| format!("dy:{}", self.ctx.name(self.ctx.normal_index(a)));

        let mut pt1 = Vec::new();
        for i in 0..m {
            for a in 0..q {
                for b in 0..q {
                    let lhs = self.connection_dx(i, &self.c[a][b]);
                    let rhs = &self.fiber_bracket(&self.connection_dx(i, &self.dy(a)), &self.dy(b))
                        + &self.fiber_bracket(&self.dy(a), &self.connection_dx(i, &self.dy(b)));
                    pt1.push((format!("{},{},{}", xname(i), yname(a), yname(b)), &lhs - &rhs));
                }
            }
        }

        let mut pt2 = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let dpsi = self.differential(&self.psi.component(&[i, j]));
                for a in 0..q {
                    let dya = self.dy(a);
                    let mut curv = self.connection_dx(i, &self.connection_dx(j, &dya));
                    curv.sub_assign(&self.connection_dx(j, &self.connection_dx(i, &dya)));
                    curv.sub_assign(&self.connection(&dpsi, &dya));
                    curv.sub_assign(&self.fiber_bracket(&self.kappa[i][j], &dya));
                    pt2.push((format!("{},{},{}", xname(i), xname(j), yname(a)), curv));
                }
            }
        }

        let mut pt3 = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let mut total = self.zero_section();
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        total.add_assign(&self.connection_dx(a, &self.kappa[b][c]));
                        let dpsi = self.differential(&self.psi.component(&[b, c]));
                        let mut dxa = vec![self.zero_poly(); m];
                        dxa[a] = Poly::one(self.nvars());
                        total.add_assign(&self.curvature(&dxa, &dpsi));
                    }
                    pt3.push((format!("{},{},{}", xname(i), xname(j), xname(k)), total));
                }
            }
        }

        PtReport {
            pt1: IdentityCheck::from_residuals(pt1),
            pt2: IdentityCheck::from_residuals(pt2),
            pt3: IdentityCheck::from_residuals(pt3),
        }
    }
}

/// Strictly increasing `k`-tuples from `0..m`.
pub fn increasing_tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Compares fiber components 0 and 1 of the full bracket `{u, v}_π` with the
/// affine bracket.
pub fn first_order_check(pi: &Multivector, data: &InfinitesimalData, u: &AffineElement, v: &AffineElement) -> bool {
    let ctx = data.ctx();
    let full = pi.bracket(&u.to_poly(ctx), &v.to_poly(ctx)).expect("pi is a bivector");
    let truncated = &ctx.fiber_component(&full, 0) + &ctx.fiber_component(&full, 1);
    truncated == data.affine_bracket(u, v).to_poly(ctx)
}
