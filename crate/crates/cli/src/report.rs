//! JSON and text renderings of the reports.
//!
//! JSON objects use sorted keys and canonical polynomial strings, so equal
//! inputs give byte-identical output.

use std::fmt::Write as _;

use ipw_core::cohomology::{CohomologyReport, MSpaceDims, QuotientDims, Verdict};
use ipw_core::infinitesimal::{IdentityCheck, Section};
use ipw_core::{InfinitesimalData, PtReport, VarContext};
use serde_json::{json, Map, Value};

use crate::problem::Problem;

/// The top-level JSON object; absent parts are `null`.
#[derive(Default)]
pub struct Envelope {
    pub data: Option<Value>,
    pub pt: Option<Value>,
    pub bracket: Option<Value>,
    pub cohomology: Option<Value>,
    pub verdict: Option<Value>,
}

impl Envelope {
    pub fn to_json(&self, echo: Value) -> String {
        let v = json!({
            "input_echo": echo,
            "data": self.data,
            "pt": self.pt,
            "bracket": self.bracket,
            "cohomology": self.cohomology,
            "verdict": self.verdict,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
        s.push('\n');
        s
    }
}

pub fn input_echo(problem: &Problem, command: &str, max_weight: Option<usize>) -> Value {
    let poisson: Map<String, Value> = problem
        .components
        .iter()
        .map(|(&(a, b), p)| {
            let key = format!("{},{}", problem.coordinates[a], problem.coordinates[b]);
            (key, Value::String(problem.ctx.print(p)))
        })
        .collect();
    json!({
        "command": command,
        "coordinates": problem.coordinates,
        "base": problem.base(),
        "normal": problem.normal,
        "poisson": poisson,
        "max_weight": max_weight,
    })
}

fn normal_name(ctx: &VarContext, a: usize) -> &str {
    ctx.name(ctx.normal_index(a))
}

fn section_json(ctx: &VarContext, s: &Section) -> Value {
    let map: Map<String, Value> =
        s.0.iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(a, p)| (normal_name(ctx, a).to_string(), Value::String(ctx.print(p))))
            .collect();
    Value::Object(map)
}

pub fn data_json(data: &InfinitesimalData) -> Value {
    let ctx = data.ctx();
    let (m, q) = (data.m(), data.q());
    let mut psi = Map::new();
    for i in 0..m {
        for j in i + 1..m {
            let p = data.psi().component(&[i, j]);
            if !p.is_zero() {
                psi.insert(format!("{},{}", ctx.name(i), ctx.name(j)), Value::String(ctx.print(&p)));
            }
        }
    }
    let mut c = Map::new();
    for a in 0..q {
        for b in a + 1..q {
            if !data.c[a][b].is_zero() {
                let key = format!("{},{}", normal_name(ctx, a), normal_name(ctx, b));
                c.insert(key, section_json(ctx, &data.c[a][b]));
            }
        }
    }
    let mut gamma = Map::new();
    for i in 0..m {
        for a in 0..q {
            if !data.gamma[i][a].is_zero() {
                let key = format!("{},{}", ctx.name(i), normal_name(ctx, a));
                gamma.insert(key, section_json(ctx, &data.gamma[i][a]));
            }
        }
    }
    let mut kappa = Map::new();
    for i in 0..m {
        for j in i + 1..m {
            if !data.kappa[i][j].is_zero() {
                let key = format!("{},{}", ctx.name(i), ctx.name(j));
                kappa.insert(key, section_json(ctx, &data.kappa[i][j]));
            }
        }
    }
    json!({ "psi": psi, "c": c, "gamma": gamma, "kappa": kappa })
}

fn identity_json(ctx: &VarContext, check: &IdentityCheck) -> Value {
    let residuals: Vec<Value> = check
        .residuals
        .iter()
        .map(|(label, s)| json!({ "at": label, "residual": section_json(ctx, s) }))
        .collect();
    json!({ "holds": check.holds, "residuals": residuals })
}

pub fn pt_json(ctx: &VarContext, report: &PtReport) -> Value {
    json!({
        "pt1": identity_json(ctx, &report.pt1),
        "pt2": identity_json(ctx, &report.pt2),
        "pt3": identity_json(ctx, &report.pt3),
    })
}

fn quotient_json(d: &QuotientDims) -> Value {
    json!({ "cocycles": d.cocycles, "coboundaries": d.coboundaries, "quotient": d.quotient })
}

fn m_space_json(d: &MSpaceDims) -> Value {
    json!({
        "solutions": d.solutions,
        "m": d.m,
        "c": d.c,
        "inner": d.inner,
        "c_plus_inner": d.c_plus_inner,
        "m0": d.m0,
        "c0": d.c0,
        "c0_plus_inner": d.c0_plus_inner,
        "image_sigma": d.image_sigma,
        "ham": d.ham,
        "m_mod_c_inner": d.m_mod,
        "m0_mod_c0_inner": d.m0_mod,
        "sigma_mod_ham": d.sigma_mod_ham,
    })
}

pub fn cohomology_json(report: &CohomologyReport) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "weight": r.weight,
                "poisson_h1": quotient_json(&r.poisson_h1),
                "linear_derivations_mod_inner": quotient_json(&r.linear_derivations),
                "center": r.center_dim,
                "center_complex_h1": quotient_json(&r.partial_h1),
                "h1_direct": quotient_json(&r.h1_direct),
                "m_space": m_space_json(&r.m_space),
                "additivity_holds": r.additivity_holds,
                "bound_holds": r.bound_holds,
            })
        })
        .collect();
    json!({
        "max_weight": report.max_weight,
        "grading": { "s": report.grading.s, "t": report.grading.t, "truncated": report.truncated },
        "per_weight": rows,
        "conditions": {
            "i": report.condition_i,
            "ii": report.condition_ii,
            "iii": report.condition_iii,
            "center_complex_acyclic": report.center_complex_acyclic,
        },
        "additivity_holds": report.additivity_holds,
        "bound_holds": report.bound_holds,
    })
}

pub fn theorem_json(v: &Verdict) -> Value {
    let rows: Vec<Value> = (0..=v.max_weight)
        .map(|w| {
            json!({
                "weight": w,
                "poisson_h1": v.poisson_h1[w],
                "linear_derivations_mod_inner": v.linear_derivations[w],
                "center_complex_h1": v.partial_h1[w],
                "h1_direct": v.h1_direct[w],
            })
        })
        .collect();
    json!({
        "max_weight": v.max_weight,
        "truncated": v.truncated,
        "per_weight": rows,
        "center_by_degree": v.center,
        "conditions": {
            "i": v.condition_i,
            "ii": v.condition_ii,
            "iii": v.condition_iii,
            "center_complex_acyclic": v.center_complex_acyclic,
            "classical": v.classical,
            "generalized": v.generalized,
        },
        "h1_vanishes": v.h1_vanishes,
    })
}

// ---------------------------------------------------------------------------
// text

fn section_text(ctx: &VarContext, s: &Section) -> String {
    let parts: Vec<String> =
        s.0.iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(a, p)| format!("({}) d{}", ctx.print(p), normal_name(ctx, a)))
            .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn list_or_none(names: &[String]) -> String {
    if names.is_empty() {
        "(none)".into()
    } else {
        names.join(", ")
    }
}

pub fn data_text(data: &InfinitesimalData) -> String {
    let ctx = data.ctx();
    let (m, q) = (data.m(), data.q());
    let mut out = String::new();
    let _ = writeln!(out, "base: {}", list_or_none(ctx.base_vars()));
    let _ = writeln!(out, "normal: {}", list_or_none(ctx.normal_vars()));
    let _ = writeln!(out, "induced bivector:");
    for i in 0..m {
        for j in i + 1..m {
            let p = data.psi().component(&[i, j]);
            if !p.is_zero() {
                let _ = writeln!(out, "  {{{}, {}}} = {}", ctx.name(i), ctx.name(j), ctx.print(&p));
            }
        }
    }
    let _ = writeln!(out, "fiber bracket:");
    for a in 0..q {
        for b in a + 1..q {
            if !data.c[a][b].is_zero() {
                let (na, nb) = (normal_name(ctx, a), normal_name(ctx, b));
                let _ = writeln!(out, "  [d{na}, d{nb}] = {}", section_text(ctx, &data.c[a][b]));
            }
        }
    }
    let _ = writeln!(out, "connection:");
    for i in 0..m {
        for a in 0..q {
            if !data.gamma[i][a].is_zero() {
                let _ = writeln!(
                    out,
                    "  D_d{} d{} = {}",
                    ctx.name(i),
                    normal_name(ctx, a),
                    section_text(ctx, &data.gamma[i][a])
                );
            }
        }
    }
    let _ = writeln!(out, "curvature:");
    for i in 0..m {
        for j in i + 1..m {
            if !data.kappa[i][j].is_zero() {
                let _ = writeln!(
                    out,
                    "  K(d{}, d{}) = {}",
                    ctx.name(i),
                    ctx.name(j),
                    section_text(ctx, &data.kappa[i][j])
                );
            }
        }
    }
    out
}

pub fn pt_text(ctx: &VarContext, report: &PtReport) -> String {
    let mut out = String::new();
    for (name, check) in [("pt1", &report.pt1), ("pt2", &report.pt2), ("pt3", &report.pt3)] {
        let _ = writeln!(out, "{name}: {}", if check.holds { "holds" } else { "FAILS" });
        for (label, s) in &check.residuals {
            let _ = writeln!(out, "  at {label}: {}", section_text(ctx, s));
        }
    }
    out
}

fn q_text(d: &QuotientDims) -> String {
    format!("{} ({}/{})", d.quotient, d.cocycles, d.coboundaries)
}

pub fn cohomology_text(report: &CohomologyReport) -> String {
    let mut out = String::new();
    let g = report.grading;
    let _ = writeln!(
        out,
        "grading: s = {}, t = {}{}",
        g.s,
        g.t,
        if report.truncated {
            " (truncated: coboundaries are lower bounds)"
        } else {
            ""
        }
    );
    let _ = writeln!(out, "dims are quotient (cocycles/coboundaries)");
    for r in &report.rows {
        let m = &r.m_space;
        let _ = writeln!(out, "weight {}:", r.weight);
        let _ = writeln!(out, "  poisson H1 of S          {}", q_text(&r.poisson_h1));
        let _ = writeln!(out, "  linear derivations/inner {}", q_text(&r.linear_derivations));
        let _ = writeln!(out, "  center                   {}", r.center_dim);
        let _ = writeln!(out, "  center complex H1        {}", q_text(&r.partial_h1));
        let _ = writeln!(out, "  H1 direct                {}", q_text(&r.h1_direct));
        let _ = writeln!(
            out,
            "  M/(C+Inn) = {} = M0/(C0+Inn) {} + Im sigma/Ham {}",
            m.m_mod, m.m0_mod, m.sigma_mod_ham
        );
        let bound = match r.bound_holds {
            Some(true) => "holds",
            Some(false) => "FAILS",
            None => "not checked (truncated)",
        };
        let _ = writeln!(
            out,
            "  bound {} <= H1 <= {} + {}: {bound}",
            m.m_mod, r.partial_h1.quotient, m.m_mod
        );
    }
    let yes = |b: bool| if b { "holds" } else { "fails" };
    let _ = writeln!(out, "condition (i): {}", yes(report.condition_i));
    let _ = writeln!(out, "condition (ii): {}", yes(report.condition_ii));
    let _ = writeln!(out, "condition (iii): {}", yes(report.condition_iii));
    let _ = writeln!(out, "center complex acyclic: {}", yes(report.center_complex_acyclic));
    out
}

fn dims_text(v: &[usize]) -> String {
    v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn theorem_text(v: &Verdict) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "weights 0..={}{}",
        v.max_weight,
        if v.truncated { " (truncated)" } else { "" }
    );
    let _ = writeln!(out, "poisson H1 of S:          {}", dims_text(&v.poisson_h1));
    let _ = writeln!(out, "linear derivations/inner: {}", dims_text(&v.linear_derivations));
    let _ = writeln!(out, "center by degree:         {}", dims_text(&v.center));
    let _ = writeln!(out, "center complex H1:        {}", dims_text(&v.partial_h1));
    let _ = writeln!(out, "H1 direct:                {}", dims_text(&v.h1_direct));
    let _ = writeln!(out, "verdict: {}", v.summary);
    out
}
