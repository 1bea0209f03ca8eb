//! Small Poisson structures used across the integration tests.

#![allow(dead_code)]

use ipw_core::{InfinitesimalData, Multivector, Space, VarContext};

pub struct Example {
    pub name: &'static str,
    pub ctx: VarContext,
    pub pi: Multivector,
    /// Weights `(s, t)` worked out by hand.
    pub weights: (i64, i64),
}

impl Example {
    pub fn data(&self) -> InfinitesimalData {
        InfinitesimalData::extract(&self.pi, &self.ctx).unwrap()
    }
}

pub fn build(base: &[&str], normal: &[&str], entries: &[(&str, &str, &str)]) -> (VarContext, Multivector) {
    let ctx = VarContext::new(base, normal).unwrap();
    let n = ctx.nvars();
    let mut pi = Multivector::zero(n, n, Space::Ambient, 2);
    for &(a, b, s) in entries {
        let (i, j) = (ctx.index_of(a).unwrap(), ctx.index_of(b).unwrap());
        pi.add_component(&[i, j], &ctx.parse(s).unwrap()).unwrap();
    }
    (ctx, pi)
}

fn example(
    name: &'static str,
    base: &[&str],
    normal: &[&str],
    entries: &[(&str, &str, &str)],
    weights: (i64, i64),
) -> Example {
    let (ctx, pi) = build(base, normal, entries);
    Example { name, ctx, pi, weights }
}

pub fn so3() -> Example {
    example(
        "so3",
        &[],
        &["x1", "x2", "x3"],
        &[("x1", "x2", "x3"), ("x2", "x3", "x1"), ("x3", "x1", "x2")],
        (0, 0),
    )
}

pub fn sl2() -> Example {
    example(
        "sl2",
        &[],
        &["h", "e", "f"],
        &[("h", "e", "2*e"), ("h", "f", "-2*f"), ("e", "f", "h")],
        (0, 0),
    )
}

pub fn abelian() -> Example {
    example("abelian", &[], &["y1", "y2"], &[], (0, 0))
}

pub fn product() -> Example {
    example("product", &["x1", "x2"], &["y1"], &[("x1", "x2", "1 + y1")], (-2, 0))
}

pub fn rank_one() -> Example {
    example(
        "rank_one",
        &["x1", "x2"],
        &["y"],
        &[("x1", "x2", "x1"), ("x2", "y", "y")],
        (-1, 0),
    )
}

pub fn affine_bundle() -> Example {
    example(
        "affine_bundle",
        &["x"],
        &["y1", "y2"],
        &[("y1", "y2", "y2"), ("x", "y2", "y2")],
        (-1, 1),
    )
}

pub fn all() -> Vec<Example> {
    vec![so3(), sl2(), abelian(), product(), rank_one(), affine_bundle()]
}
