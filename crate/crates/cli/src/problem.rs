//! Problem files: a sectioned `key = value` format.
//!
//! ```text
//! # comments start with '#'
//! [manifold]
//! dim = 3
//! coordinates = x1, x2, x3
//!
//! [submanifold]
//! normal = x1, x2, x3        # S = {x1 = x2 = x3 = 0}
//!
//! [poisson]
//! x1,x2 = x3                 # pi^{x1 x2}; the first name must come first
//! x2,x3 = x1
//!
//! [options]
//! max_weight = 3
//! format = json
//! ```
//!
//! Unlisted components are zero. Base coordinates are the coordinates not
//! listed as normal, in file order.

use std::collections::BTreeMap;
use std::path::Path;

use ipw_core::polyring::ParseError;
use ipw_core::{Multivector, Poly, Space, VarContext};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: in component {key}: {source}")]
    Polynomial {
        line: usize,
        key: String,
        source: ParseError,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub coordinates: Vec<String>,
    pub normal: Vec<String>,
    pub ctx: VarContext,
    pub pi: Multivector,
    /// Components as written, keyed by coordinate-order position.
    pub components: BTreeMap<(usize, usize), Poly>,
    pub max_weight: Option<usize>,
    pub format: Option<Format>,
}

impl Problem {
    pub fn base(&self) -> &[String] {
        self.ctx.base_vars()
    }

    /// `"a,b"` for two ambient indices.
    pub fn pair_name(&self, i: usize, j: usize) -> String {
        format!("{},{}", self.ctx.name(i), self.ctx.name(j))
    }
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

pub fn read(path: &Path) -> Result<Problem, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Problem, ProblemError> {
    let syntax = |line: usize, message: String| ProblemError::Syntax { line, message };
    let mut section: Option<String> = None;
    let mut entries: BTreeMap<String, BTreeMap<String, (usize, String)>> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, "unterminated section header".into()))?
                .trim();
            if !matches!(name, "manifold" | "submanifold" | "poisson" | "options") {
                return Err(syntax(line, format!("unknown section [{name}]")));
            }
            if entries.contains_key(name) {
                return Err(syntax(line, format!("section [{name}] repeated")));
            }
            entries.insert(name.to_string(), BTreeMap::new());
            section = Some(name.to_string());
            continue;
        }
        let Some(current) = &section else {
            return Err(syntax(line, "entry outside of a section".into()));
        };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, "expected key = value".into()))?;
        let key: String = key.split_whitespace().collect();
        let table = entries.get_mut(current).expect("section registered");
        if table.insert(key.clone(), (line, value.trim().to_string())).is_some() {
            return Err(syntax(line, format!("duplicate key {key}")));
        }
    }

    let empty = BTreeMap::new();
    let table = |name: &str| entries.get(name).unwrap_or(&empty);
    let manifold = table("manifold");
    let check_keys = |name: &str, allowed: &[&str]| -> Result<(), ProblemError> {
        for (key, (line, _)) in table(name) {
            if !allowed.contains(&key.as_str()) {
                return Err(syntax(*line, format!("unknown key {key} in [{name}]")));
            }
        }
        Ok(())
    };
    check_keys("manifold", &["dim", "coordinates"])?;
    check_keys("submanifold", &["normal"])?;
    check_keys("options", &["max_weight", "format"])?;

    let (coord_line, coord_text) = manifold
        .get("coordinates")
        .ok_or_else(|| ProblemError::Invalid("[manifold] needs coordinates".into()))?;
    let coordinates = split_list(coord_text);
    if let Some((line, dim)) = manifold.get("dim") {
        let dim: usize = dim
            .parse()
            .map_err(|_| syntax(*line, format!("dim must be a non-negative integer, found {dim}")))?;
        if dim != coordinates.len() {
            return Err(syntax(
                *coord_line,
                format!("dim = {dim} but {} coordinates listed", coordinates.len()),
            ));
        }
    }
    let normal = table("submanifold")
        .get("normal")
        .map(|(_, v)| split_list(v))
        .unwrap_or_default();
    for name in &normal {
        if !coordinates.contains(name) {
            return Err(ProblemError::Invalid(format!(
                "normal variable {name} is not a coordinate"
            )));
        }
    }
    let base: Vec<String> = coordinates.iter().filter(|c| !normal.contains(c)).cloned().collect();
    let mut ordered_normal: Vec<String> = Vec::new();
    for name in &normal {
        if ordered_normal.contains(name) {
            return Err(ProblemError::Invalid(format!("normal variable {name} listed twice")));
        }
        ordered_normal.push(name.clone());
    }
    let ctx = VarContext::new(&base, &ordered_normal).map_err(|e| ProblemError::Invalid(e.to_string()))?;

    let n = ctx.nvars();
    let file_pos = |name: &str| coordinates.iter().position(|c| c == name);
    let mut pi = Multivector::zero(n, n, Space::Ambient, 2);
    let mut components = BTreeMap::new();
    for (key, (line, value)) in table("poisson") {
        let (a, b) = key
            .split_once(',')
            .ok_or_else(|| syntax(*line, format!("component key {key} must be a,b")))?;
        let (Some(pa), Some(pb)) = (file_pos(a), file_pos(b)) else {
            return Err(syntax(*line, format!("component {key} names an unknown coordinate")));
        };
        if pa >= pb {
            return Err(syntax(
                *line,
                format!("component {key} must be upper triangular ({a} listed before {b})"),
            ));
        }
        let p = ctx.parse(value).map_err(|source| ProblemError::Polynomial {
            line: *line,
            key: key.clone(),
            source,
        })?;
        let (i, j) = (ctx.index_of(a).expect("known"), ctx.index_of(b).expect("known"));
        pi.add_component(&[i, j], &p)
            .map_err(|e| ProblemError::Invalid(e.to_string()))?;
        components.insert((pa, pb), p);
    }

    let options = table("options");
    let max_weight = match options.get("max_weight") {
        Some((line, v)) => Some(
            v.parse::<usize>()
                .map_err(|_| syntax(*line, format!("max_weight must be a non-negative integer, found {v}")))?,
        ),
        None => None,
    };
    let format = match options.get("format") {
        Some((_, v)) if v == "json" => Some(Format::Json),
        Some((_, v)) if v == "text" => Some(Format::Text),
        Some((line, v)) => return Err(syntax(*line, format!("format must be json or text, found {v}"))),
        None => None,
    };
    Ok(Problem {
        coordinates,
        normal: ordered_normal,
        ctx,
        pi,
        components,
        max_weight,
        format,
    })
}
