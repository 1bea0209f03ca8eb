//! Dense brute-force oracles, independent of the graded solvers.
//!
//! The affine algebra is modelled as `ℚ[x, y] / (y)²`. A derivation is given
//! by arbitrary images of every coordinate (no structural ansatz) and is
//! extended by the chain rule. Constraints are imposed on all pairs of
//! monomials up to a fixed degree, and ranks come from dense Gaussian
//! elimination.

#![allow(dead_code)]

use ipw_core::multivector::Multivector;
use ipw_core::polyring::{Monomial, Poly, VarContext};
use ipw_core::Rational;
use num_traits::{One, Zero};

pub fn dense_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][col].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = &rows[i][col] / &pivot;
                for j in col..ncols {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        r += 1;
    }
    r
}

/// `π(dp, dq)` summed over all ordered index pairs.
pub fn full_bracket(pi: &Multivector, p: &Poly, q: &Poly) -> Poly {
    let n = p.nvars();
    let mut out = Poly::zero(n);
    for mu in 0..n {
        for nu in 0..n {
            let c = pi.component(&[mu, nu]);
            if !c.is_zero() {
                out = out + &c * &(&p.derivative(mu) * &q.derivative(nu));
            }
        }
    }
    out
}

fn truncate(ctx: &VarContext, p: &Poly) -> Poly {
    let m = ctx.base_dim();
    p.filter(|mono| mono.exponents()[m..].iter().sum::<u32>() <= 1)
}

/// Bracket of the truncated algebra.
pub fn affine_bracket(ctx: &VarContext, pi: &Multivector, p: &Poly, q: &Poly) -> Poly {
    truncate(ctx, &full_bracket(pi, p, q))
}

/// Monomials `x^α y^β`, `|β| ≤ 1`, of weight `weight` with `x ↦ 1`, `y ↦ t`.
pub fn weighted_monomials(ctx: &VarContext, t: i64, weight: i64) -> Vec<Monomial> {
    let (n, m, q) = (ctx.nvars(), ctx.base_dim(), ctx.normal_dim());
    let mut out = Vec::new();
    if weight >= 0 {
        out.extend(Monomial::all_of_degree(n, m, weight as u32));
    }
    let d = weight - t;
    if d >= 0 {
        for a in 0..q {
            for mono in Monomial::all_of_degree(n, m, d as u32) {
                out.push(mono.mul(&Monomial::var(n, m + a)));
            }
        }
    }
    out
}

/// All monomials of the truncated algebra of total degree `≤ max_degree`.
pub fn test_monomials(ctx: &VarContext, max_degree: u32) -> Vec<Monomial> {
    let (n, m) = (ctx.nvars(), ctx.base_dim());
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for mono in Monomial::all_of_degree(n, n, d) {
            if mono.exponents()[m..].iter().sum::<u32>() <= 1 {
                out.push(mono);
            }
        }
    }
    out
}

/// A derivation of the truncated algebra from the images of the coordinates.
pub struct Derivation {
    pub images: Vec<Poly>,
}

impl Derivation {
    pub fn apply(&self, ctx: &VarContext, p: &Poly) -> Poly {
        let mut out = Poly::zero(p.nvars());
        for (mu, img) in self.images.iter().enumerate() {
            out = out + &p.derivative(mu) * img;
        }
        truncate(ctx, &out)
    }
}

/// One residual vector per derivation: product compatibility on `y_a y_b`
/// and the bracket-derivation rule on all test-monomial pairs.
fn residual(ctx: &VarContext, pi: &Multivector, x: &Derivation, tests: &[Poly]) -> Vec<Poly> {
    let (n, m, q) = (ctx.nvars(), ctx.base_dim(), ctx.normal_dim());
    let mut out = Vec::new();
    for a in 0..q {
        for b in a..q {
            let ya = Poly::var(n, m + a);
            let yb = Poly::var(n, m + b);
            out.push(truncate(ctx, &(&ya * &x.images[m + b] + &yb * &x.images[m + a])));
        }
    }
    for (k, p) in tests.iter().enumerate() {
        for r in &tests[k + 1..] {
            let lhs = x.apply(ctx, &affine_bracket(ctx, pi, p, r));
            let r1 = affine_bracket(ctx, pi, &x.apply(ctx, p), r);
            let r2 = affine_bracket(ctx, pi, p, &x.apply(ctx, r));
            out.push(lhs - r1 - r2);
        }
    }
    out
}

fn flatten(polys: &[Poly], keys: &mut Vec<(usize, Monomial)>) -> Vec<(usize, Rational)> {
    let mut out = Vec::new();
    for (k, p) in polys.iter().enumerate() {
        for (mono, c) in p.terms() {
            let key = (k, mono.clone());
            let pos = keys.iter().position(|e| *e == key).unwrap_or_else(|| {
                keys.push(key);
                keys.len() - 1
            });
            out.push((pos, c.clone()));
        }
    }
    out
}

fn densify(sparse: &[Vec<(usize, Rational)>], width: usize) -> Vec<Vec<Rational>> {
    sparse
        .iter()
        .map(|s| {
            let mut row = vec![Rational::zero(); width];
            for (k, c) in s {
                row[*k] += c;
            }
            row
        })
        .collect()
}

/// Dimension of the first cohomology of the truncated algebra for
/// derivations of weight shift `shift`, with `π` homogeneous of weight `s`
/// under `x ↦ 1`, `y ↦ t`. Constraints use all monomials of degree
/// `≤ test_degree`.
pub fn h1_dense(ctx: &VarContext, pi: &Multivector, s: i64, t: i64, shift: i64, test_degree: u32) -> usize {
    let (n, m) = (ctx.nvars(), ctx.base_dim());
    // unknowns: coefficients of every coordinate image
    let mut unknowns: Vec<(usize, Monomial)> = Vec::new();
    for mu in 0..n {
        let w = if mu < m { 1 } else { t };
        for mono in weighted_monomials(ctx, t, w + shift) {
            unknowns.push((mu, mono));
        }
    }
    let tests: Vec<Poly> = test_monomials(ctx, test_degree)
        .into_iter()
        .map(|mono| Poly::monomial(n, mono, Rational::one()))
        .collect();
    let unit = |k: usize| {
        let mut images = vec![Poly::zero(n); n];
        let (mu, mono) = &unknowns[k];
        images[*mu] = Poly::monomial(n, mono.clone(), Rational::one());
        Derivation { images }
    };
    // cocycles: nullity of unknowns ↦ residuals
    let mut keys = Vec::new();
    let cols: Vec<_> = (0..unknowns.len())
        .map(|k| flatten(&residual(ctx, pi, &unit(k), &tests), &mut keys))
        .collect();
    let cocycles = unknowns.len() - dense_rank(densify(&cols, keys.len()));
    // coboundaries: Hamiltonians of weight shift − s
    let hams: Vec<Vec<(usize, Rational)>> = weighted_monomials(ctx, t, shift - s)
        .into_iter()
        .map(|mono| {
            let f = Poly::monomial(n, mono, Rational::one());
            let images: Vec<Poly> = (0..n)
                .map(|mu| affine_bracket(ctx, pi, &f, &Poly::var(n, mu)))
                .collect();
            images
                .iter()
                .enumerate()
                .flat_map(|(mu, p)| {
                    p.terms()
                        .map(|(mono, c)| {
                            let pos = unknowns
                                .iter()
                                .position(|e| e.0 == mu && e.1 == *mono)
                                .expect("hamiltonian lies in the weight window");
                            (pos, c.clone())
                        })
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    let coboundaries = dense_rank(densify(&hams, unknowns.len()));
    cocycles - coboundaries
}

/// Dense first Poisson cohomology of `(ℝ^m, ψ)` with `ψ` homogeneous of
/// polynomial degree `p`, for vector fields of coefficient degree `w`.
pub fn poisson_h1_dense(ctx: &VarContext, psi_entries: &[(usize, usize, Poly)], p: i64, w: i64) -> usize {
    let (n, m) = (ctx.nvars(), ctx.base_dim());
    let bracket = |f: &Poly, g: &Poly| -> Poly {
        let mut out = Poly::zero(n);
        for (i, j, c) in psi_entries {
            out = out + c * &(&f.derivative(*i) * &g.derivative(*j) - &f.derivative(*j) * &g.derivative(*i));
        }
        out
    };
    let monos = if w >= 0 {
        Monomial::all_of_degree(n, m, w as u32)
    } else {
        Vec::new()
    };
    let unknowns: Vec<(usize, Monomial)> = (0..m)
        .flat_map(|i| monos.iter().map(move |mo| (i, mo.clone())))
        .collect();
    let apply = |k: usize, f: &Poly| -> Poly {
        let (i, mono) = &unknowns[k];
        &Poly::monomial(n, mono.clone(), Rational::one()) * &f.derivative(*i)
    };
    let mut keys = Vec::new();
    let cols: Vec<_> = (0..unknowns.len())
        .map(|k| {
            let mut res = Vec::new();
            for i in 0..m {
                for j in i + 1..m {
                    let (xi, xj) = (Poly::var(n, i), Poly::var(n, j));
                    let lhs = apply(k, &bracket(&xi, &xj));
                    let rhs = bracket(&apply(k, &xi), &xj) + bracket(&xi, &apply(k, &xj));
                    res.push(lhs - rhs);
                }
            }
            flatten(&res, &mut keys)
        })
        .collect();
    let cocycles = unknowns.len() - dense_rank(densify(&cols, keys.len()));
    let fdeg = w - p + 1;
    let fs = if fdeg >= 0 {
        Monomial::all_of_degree(n, m, fdeg as u32)
    } else {
        Vec::new()
    };
    let hams: Vec<_> = fs
        .into_iter()
        .map(|mono| {
            let f = Poly::monomial(n, mono, Rational::one());
            let mut v = Vec::new();
            for i in 0..m {
                for (mo, c) in bracket(&f, &Poly::var(n, i)).terms() {
                    let pos = unknowns.iter().position(|e| e.0 == i && e.1 == *mo).unwrap();
                    v.push((pos, c.clone()));
                }
            }
            v
        })
        .collect();
    cocycles - dense_rank(densify(&hams, unknowns.len()))
}

/// `{{f, g}, h} + cyclic` with the full bracket.
pub fn jacobiator(pi: &Multivector, f: &Poly, g: &Poly, h: &Poly) -> Poly {
    full_bracket(pi, &full_bracket(pi, f, g), h)
        + full_bracket(pi, &full_bracket(pi, g, h), f)
        + full_bracket(pi, &full_bracket(pi, h, f), g)
}
