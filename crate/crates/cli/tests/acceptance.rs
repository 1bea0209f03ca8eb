//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use ipw::problem::{self, Problem};
use ipw_core::cohomology::{exact_sequence_report, infer_grading, theorem1_check};
use ipw_core::infinitesimal::{affine_product, first_order_check};
use ipw_core::multivector::jacobi_check;
use ipw_core::{AffineElement, InfinitesimalData, Multivector, Poly, Rational, Space, VarContext};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn problem_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("problems")
        .join(format!("{name}.ipw"))
}

fn load(name: &str) -> Result<(Problem, InfinitesimalData), String> {
    let p = problem::read(&problem_path(name)).map_err(|e| format!("{name}: {e}"))?;
    let data = InfinitesimalData::extract(&p.pi, &p.ctx).map_err(|e| format!("{name}: {e}"))?;
    Ok((p, data))
}

const BUNDLED: [&str; 6] = ["so3", "sl2", "abelian", "product", "rank_one", "affine_bundle"];

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn structural_identities() -> Outcome {
    let mut gamma_seen = false;
    for name in BUNDLED {
        let (_, data) = load(name)?;
        let pt = data.verify_pt();
        for (label, check) in [("pt1", &pt.pt1), ("pt2", &pt.pt2), ("pt3", &pt.pt3)] {
            ensure(check.holds, || format!("{name}: {label} fails"))?;
            for (at, residual) in &check.residuals {
                ensure(residual.is_zero(), || format!("{name}: {label} residual at {at}"))?;
            }
        }
        gamma_seen |= data.gamma.iter().flatten().any(|s| !s.is_zero());
    }
    ensure(gamma_seen, || "no bundled problem has a nonzero connection term".into())?;
    Ok(format!("{} problems, all residuals zero", BUNDLED.len()))
}

fn affine_axioms() -> Outcome {
    let mut triples = 0;
    for name in BUNDLED {
        let (p, data) = load(name)?;
        let gens = data.generators();
        let unit = AffineElement::base(Poly::one(data.nvars()), data.q());
        let mut elements = gens.clone();
        elements.push(unit);
        for (k, u) in gens.iter().enumerate() {
            for v in &gens[k..] {
                elements.push(affine_product(u, v));
            }
        }
        let br = |u: &AffineElement, v: &AffineElement| data.affine_bracket(u, v);
        for u in &elements {
            for v in &elements {
                ensure(br(u, v) == br(v, u).scale_neg(), || format!("{name}: antisymmetry"))?;
                ensure(first_order_check(&p.pi, &data, u, v), || {
                    format!("{name}: first-order check")
                })?;
                for w in &elements {
                    let leibniz = &br(u, &affine_product(v, w))
                        - &(&affine_product(&br(u, v), w) + &affine_product(v, &br(u, w)));
                    ensure(leibniz.is_zero(), || format!("{name}: Leibniz"))?;
                    let jacobi = &(&br(u, &br(v, w)) + &br(v, &br(w, u))) + &br(w, &br(u, v));
                    ensure(jacobi.is_zero(), || format!("{name}: Jacobi"))?;
                    triples += 1;
                }
            }
        }
    }
    Ok(format!("{triples} triples over generators, unit and products"))
}

trait Negate {
    fn scale_neg(&self) -> Self;
}

impl Negate for AffineElement {
    fn scale_neg(&self) -> Self {
        &AffineElement::zero(self.f.nvars(), self.eta.rank()) - self
    }
}

/// Derivation-weight shift probed by the dense oracle, `None` for an empty window.
fn oracle_shift(ctx: &VarContext, w: usize) -> Option<i64> {
    if ctx.base_dim() == 0 {
        (w == 0).then_some(0)
    } else {
        Some(w as i64 - 1)
    }
}

fn oracle_dims(ctx: &VarContext, pi: &Multivector, data: &InfinitesimalData, max_weight: usize) -> Vec<usize> {
    let g = infer_grading(data);
    (0..=max_weight)
        .map(|w| oracle_shift(ctx, w).map_or(0, |k| oracle::h1_dense(ctx, pi, g.s, g.t, k, 2)))
        .collect()
}

fn theorem_positive() -> Outcome {
    let (p, data) = load("so3")?;
    let v = theorem1_check(&data, 3).map_err(|e| e.to_string())?;
    ensure(v.condition_i && v.condition_ii && v.condition_iii, || {
        format!("conditions: {}", v.summary)
    })?;
    ensure(v.h1_direct == vec![0; 4], || format!("h1_direct = {:?}", v.h1_direct))?;
    let dense = oracle_dims(&p.ctx, &p.pi, &data, 3);
    ensure(dense == v.h1_direct, || {
        format!("oracle {dense:?} vs {:?}", v.h1_direct)
    })?;
    Ok(format!("h1 by weight {:?}, oracle agrees", v.h1_direct))
}

fn negative_control() -> Outcome {
    let (p, data) = load("abelian")?;
    let v = theorem1_check(&data, 1).map_err(|e| e.to_string())?;
    ensure(!v.condition_iii, || "condition (iii) unexpectedly holds".into())?;
    ensure(v.h1_direct[0] == 4, || format!("weight-0 dim {}", v.h1_direct[0]))?;
    let dense = oracle_dims(&p.ctx, &p.pi, &data, 0);
    ensure(dense[0] == 4, || format!("oracle gives {}", dense[0]))?;
    Ok("center nonzero, weight-0 H1 = 4, oracle agrees".into())
}

fn exact_sequences() -> Outcome {
    let mut rows = 0;
    for name in BUNDLED {
        let (p, data) = load(name)?;
        let w = p.max_weight.unwrap_or(2);
        let report = exact_sequence_report(&data, w).map_err(|e| format!("{name}: {e}"))?;
        ensure(!report.truncated, || format!("{name}: grading truncated"))?;
        for row in &report.rows {
            ensure(row.additivity_holds, || {
                format!("{name}: additivity at weight {}", row.weight)
            })?;
            ensure(row.bound_holds == Some(true), || {
                format!("{name}: bound at weight {}", row.weight)
            })?;
            rows += 1;
        }
    }
    Ok(format!("{rows} weight rows"))
}

/// A Lie algebra by structure constants `[e_i, e_j] = c e_k`, whose last
/// `ideal` basis vectors span an ideal.
struct LieAlgebra {
    name: &'static str,
    dim: usize,
    brackets: Vec<(usize, usize, usize, i64)>,
    ideal: usize,
}

fn lie(name: &'static str, dim: usize, ideal: usize, brackets: &[(usize, usize, usize, i64)]) -> LieAlgebra {
    LieAlgebra {
        name,
        dim,
        brackets: brackets.to_vec(),
        ideal,
    }
}

fn lie_family(rng: &mut ChaCha8Rng) -> LieAlgebra {
    let so3 = [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1)];
    let sl2 = [(0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)];
    match rng.gen_range(0..11) {
        0 => lie("so3", 3, 3, &so3),
        1 => lie("sl2", 3, 3, &sl2),
        2 => lie("aff1", 2, rng.gen_range(1..=2), &[(0, 1, 1, 1)]),
        3 => lie("heisenberg", 3, rng.gen_range(1..=3), &[(0, 1, 2, 1)]),
        4 => {
            let dim = rng.gen_range(1..=3);
            lie("abelian", dim, rng.gen_range(1..=dim), &[])
        }
        5 => lie("R+so3", 4, 3, &[(1, 2, 3, 1), (2, 3, 1, 1), (3, 1, 2, 1)]),
        6 => lie("so3+R", 4, 1, &[(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1)]),
        7 => lie("R+sl2", 4, 3, &[(1, 2, 2, 2), (1, 3, 3, -2), (2, 3, 1, 1)]),
        8 => lie("aff1+aff1", 4, 2, &[(0, 2, 2, 1), (1, 3, 3, 1)]),
        9 => lie("aff1+R", 3, rng.gen_range(1..=3), &[(0, 2, 2, 1)]),
        _ => {
            let mut c: Vec<(usize, usize, usize, i64)> = Vec::new();
            let (a, b, d) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            let g = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(-2..=2) };
            for (k, coef) in [(1, a), (2, b)] {
                if coef != 0 {
                    c.push((0, 1, k, coef));
                }
            }
            for (k, coef) in [(1, g), (2, d)] {
                if coef != 0 {
                    c.push((0, 2, k, coef));
                }
            }
            let ideal = if g == 0 {
                rng.gen_range(1..=3)
            } else {
                rng.gen_range(2..=3)
            };
            LieAlgebra {
                name: "semidirect",
                dim: 3,
                brackets: c,
                ideal,
            }
        }
    }
}

fn int(k: i64) -> Rational {
    Rational::from_integer(k.into())
}

fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, p);
        let pivot = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..2 * n {
                    let d = &f * &a[col][j];
                    a[i][j] -= d;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Basis change preserving the ideal: base rows mix freely, ideal rows stay in the ideal.
fn random_basis(rng: &mut ChaCha8Rng, dim: usize, ideal: usize) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let base = dim - ideal;
    loop {
        let m: Vec<Vec<Rational>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        if i >= base && j < base {
                            int(0)
                        } else {
                            int(rng.gen_range(-2..=2))
                        }
                    })
                    .collect()
            })
            .collect();
        if let Some(inv) = inverse(&m) {
            return (m, inv);
        }
    }
}

fn lie_poisson(alg: &LieAlgebra, rng: &mut ChaCha8Rng) -> (VarContext, Multivector) {
    let (n, q) = (alg.dim, alg.ideal);
    let base: Vec<String> = (1..=n - q).map(|i| format!("x{i}")).collect();
    let normal: Vec<String> = (1..=q).map(|a| format!("y{a}")).collect();
    let ctx = VarContext::new(&base, &normal).unwrap();
    let mut c = vec![vec![vec![Rational::zero(); n]; n]; n];
    for &(i, j, k, v) in &alg.brackets {
        c[i][j][k] += int(v);
        c[j][i][k] -= int(v);
    }
    let (m, inv) = random_basis(rng, n, q);
    let mut pi = Multivector::zero(n, n, Space::Ambient, 2);
    for i in 0..n {
        for j in i + 1..n {
            let mut p = Poly::zero(n);
            for (k, mik) in m[i].iter().enumerate() {
                for (l, mjl) in m[j].iter().enumerate() {
                    for (r, crs) in c[k][l].iter().enumerate() {
                        let coef = mik * mjl * crs;
                        if coef.is_zero() {
                            continue;
                        }
                        for (s, inv_rs) in inv[r].iter().enumerate() {
                            p = p + Poly::var(n, s).scale(&(&coef * inv_rs));
                        }
                    }
                }
            }
            pi.add_component(&[i, j], &p).unwrap();
        }
    }
    (ctx, pi)
}

fn theorem_guard() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d5e_ed01);
    let (mut cases, mut hypotheses, mut oracle_checks) = (0, 0, 0);
    for _ in 0..48 {
        let alg = lie_family(&mut rng);
        let (ctx, pi) = lie_poisson(&alg, &mut rng);
        ensure(jacobi_check(&pi).unwrap().holds, || {
            format!("{}: generated input is not Poisson", alg.name)
        })?;
        let data = InfinitesimalData::extract(&pi, &ctx).map_err(|e| format!("{}: {e}", alg.name))?;
        let w = if ctx.base_dim() == 0 { 0 } else { rng.gen_range(0..=2) };
        let v = theorem1_check(&data, w).map_err(|e| format!("{}: {e}", alg.name))?;
        if v.classical || v.generalized {
            hypotheses += 1;
            ensure(v.h1_direct.iter().all(|&d| d == 0), || {
                format!("{}: {:?}", alg.name, v.h1_direct)
            })?;
        }
        if !v.truncated && ctx.nvars() <= 3 {
            let dense = oracle_dims(&ctx, &pi, &data, w.min(1));
            ensure(dense[..] == v.h1_direct[..dense.len()], || {
                format!("{}: oracle {dense:?} vs {:?}", alg.name, v.h1_direct)
            })?;
            oracle_checks += 1;
        }
        cases += 1;
    }
    ensure(hypotheses > 0, || "no sampled input satisfied the hypotheses".into())?;
    Ok(format!(
        "{cases} inputs, {hypotheses} meet the hypotheses, {oracle_checks} oracle-checked"
    ))
}

fn determinism() -> Outcome {
    for name in BUNDLED {
        let path = problem_path(name);
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_ipw"))
                .args(["theorem1", "--format", "json", path.to_str().unwrap()])
                .output()
                .expect("binary runs")
        };
        let (a, b) = (run(), run());
        ensure(a.status.success(), || format!("{name}: exit {:?}", a.status.code()))?;
        ensure(a.stdout == b.stdout, || format!("{name}: output differs between runs"))?;

        let (_, data) = load(name)?;
        if infer_grading(&data).truncated {
            continue;
        }
        let small = theorem1_check(&data, 2).map_err(|e| e.to_string())?;
        let large = theorem1_check(&data, 3).map_err(|e| e.to_string())?;
        let prefix = |a: &[usize], b: &[usize]| b.starts_with(a);
        ensure(
            prefix(&small.poisson_h1, &large.poisson_h1)
                && prefix(&small.linear_derivations, &large.linear_derivations)
                && prefix(&small.center, &large.center)
                && prefix(&small.partial_h1, &large.partial_h1)
                && prefix(&small.h1_direct, &large.h1_direct),
            || format!("{name}: windows 2 and 3 disagree"),
        )?;
    }
    Ok("byte-identical json, windows 2 and 3 agree".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("structural identities", structural_identities),
        ("affine bracket axioms", affine_axioms),
        ("so(3) vanishing", theorem_positive),
        ("abelian negative control", negative_control),
        ("exact-sequence consistency", exact_sequences),
        ("randomized theorem guard", theorem_guard),
        ("determinism and window stability", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (label, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {label}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {label}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} of 7 passed in {:.1?}", 7 - failed, start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
