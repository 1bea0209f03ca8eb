//! `ipw`: command-line front end for the infinitesimal Poisson workbench.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 not Poisson, 3 not a
//! Poisson submanifold, 4 internal inconsistency.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ipw_core::cohomology::{exact_sequence_report, theorem1_check};
use ipw_core::infinitesimal::check_poisson_submanifold;
use ipw_core::{AffineElement, CohomologyError, InfinitesimalData, SubmanifoldError};
use serde_json::{json, Value};
use thiserror::Error;

use ipw::problem::{self, Format, Problem, ProblemError};
use ipw::report::{self, Envelope};

#[derive(Parser)]
#[command(
    name = "ipw",
    version,
    about = "Infinitesimal Poisson algebras of coordinate Poisson submanifolds"
)]
struct Cli {
    /// Output format; defaults to the file's `format` option, then json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Jacobi identity and the submanifold condition.
    Validate { file: PathBuf },
    /// Print the induced bivector, fiber bracket, connection and curvature.
    Extract { file: PathBuf },
    /// Check the compatibility identities of the extracted data.
    VerifyPt { file: PathBuf },
    /// Affine bracket of two fiberwise-affine polynomials.
    Bracket { file: PathBuf, u: String, v: String },
    /// Weight-graded cohomology report with the exact-sequence checks.
    Cohomology {
        file: PathBuf,
        #[arg(long)]
        max_weight: Option<usize>,
    },
    /// Evaluate the vanishing criteria and confirm them directly.
    Theorem1 {
        file: PathBuf,
        #[arg(long)]
        max_weight: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Extract { .. } => "extract",
            Command::VerifyPt { .. } => "verify-pt",
            Command::Bracket { .. } => "bracket",
            Command::Cohomology { .. } => "cohomology",
            Command::Theorem1 { .. } => "theorem1",
        }
    }

    fn file(&self) -> &PathBuf {
        match self {
            Command::Validate { file }
            | Command::Extract { file }
            | Command::VerifyPt { file }
            | Command::Bracket { file, .. }
            | Command::Cohomology { file, .. }
            | Command::Theorem1 { file, .. } => file,
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("argument {which}: {message}")]
    Argument { which: &'static str, message: String },
    #[error("no weight window: pass --max-weight or set max_weight in [options]")]
    MissingWeight,
    #[error("the bivector fails the Jacobi identity")]
    NotPoisson { residual: Vec<String> },
    #[error("S is not a Poisson submanifold: components {} do not vanish on S", .offending.join(" "))]
    NotSubmanifold { offending: Vec<String> },
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Problem(_) | CliError::Argument { .. } | CliError::MissingWeight => 1,
            CliError::NotPoisson { .. } => 2,
            CliError::NotSubmanifold { .. } => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Problem(_) | CliError::Argument { .. } => "parse",
            CliError::MissingWeight => "usage",
            CliError::NotPoisson { .. } => "not_poisson",
            CliError::NotSubmanifold { .. } => "not_poisson_submanifold",
            CliError::Internal(_) => "internal",
        }
    }

    fn to_json(&self) -> Value {
        let mut detail = json!({
            "code": self.code(),
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Problem(ProblemError::Polynomial { line, key, source }) => {
                detail["line"] = json!(line);
                detail["component"] = json!(key);
                detail["position"] = json!(source.position);
            }
            CliError::Problem(ProblemError::Syntax { line, .. }) => detail["line"] = json!(line),
            CliError::NotPoisson { residual } => detail["jacobiator"] = json!(residual),
            CliError::NotSubmanifold { offending } => detail["offending"] = json!(offending),
            _ => {}
        }
        json!({ "error": detail })
    }
}

fn submanifold_error(problem: &Problem, e: SubmanifoldError) -> CliError {
    match e {
        SubmanifoldError::NotPoisson(residual) => CliError::NotPoisson {
            residual: residual
                .terms()
                .map(|(idx, p)| {
                    let names: Vec<&str> = idx.iter().map(|&i| problem.ctx.name(i)).collect();
                    format!("{}: {}", names.join(","), problem.ctx.print(p))
                })
                .collect(),
        },
        SubmanifoldError::NotPoissonSubmanifold(bad) => CliError::NotSubmanifold {
            offending: bad.iter().map(|&(i, j)| problem.pair_name(i, j)).collect(),
        },
        other => CliError::Internal(other.to_string()),
    }
}

fn cohomology_error(e: CohomologyError) -> CliError {
    match e {
        CohomologyError::NotPoisson => CliError::NotPoisson { residual: Vec::new() },
        other => CliError::Internal(other.to_string()),
    }
}

fn extract(problem: &Problem) -> Result<InfinitesimalData, CliError> {
    InfinitesimalData::extract(&problem.pi, &problem.ctx).map_err(|e| submanifold_error(problem, e))
}

fn parse_affine(problem: &Problem, which: &'static str, text: &str) -> Result<AffineElement, CliError> {
    let p = problem.ctx.parse(text).map_err(|e| CliError::Argument {
        which,
        message: e.to_string(),
    })?;
    AffineElement::from_poly(&problem.ctx, &p).map_err(|e| CliError::Argument {
        which,
        message: e.to_string(),
    })
}

struct Output {
    envelope: Envelope,
    text: String,
    max_weight: Option<usize>,
}

fn run(command: &Command, problem: &Problem) -> Result<Output, CliError> {
    let weight = |flag: &Option<usize>| flag.or(problem.max_weight).ok_or(CliError::MissingWeight);
    let mut envelope = Envelope::default();
    let mut max_weight = None;
    let text = match command {
        Command::Validate { .. } => {
            let report =
                check_poisson_submanifold(&problem.pi, &problem.ctx).map_err(|e| submanifold_error(problem, e))?;
            if !report.holds {
                return Err(submanifold_error(
                    problem,
                    SubmanifoldError::NotPoissonSubmanifold(report.offending),
                ));
            }
            let summary = "valid: Poisson bivector, S is a Poisson submanifold";
            envelope.verdict = Some(json!(summary));
            format!("{summary}\n")
        }
        Command::Extract { .. } => {
            let data = extract(problem)?;
            envelope.data = Some(report::data_json(&data));
            report::data_text(&data)
        }
        Command::VerifyPt { .. } => {
            let data = extract(problem)?;
            let pt = data.verify_pt();
            envelope.data = Some(report::data_json(&data));
            envelope.pt = Some(report::pt_json(data.ctx(), &pt));
            let text = report::pt_text(data.ctx(), &pt);
            if !pt.all_hold() {
                return Err(CliError::Internal(format!(
                    "extracted data fail the compatibility identities\n{text}"
                )));
            }
            text
        }
        Command::Bracket { u, v, .. } => {
            let data = extract(problem)?;
            let (a, b) = (parse_affine(problem, "u", u)?, parse_affine(problem, "v", v)?);
            let result = problem.ctx.print(&data.affine_bracket(&a, &b).to_poly(&problem.ctx));
            envelope.bracket = Some(json!({
                "u": problem.ctx.print(&a.to_poly(&problem.ctx)),
                "v": problem.ctx.print(&b.to_poly(&problem.ctx)),
                "result": result,
            }));
            format!("{{{u}, {v}}} = {result}\n")
        }
        Command::Cohomology { max_weight: flag, .. } => {
            let w = weight(flag)?;
            max_weight = Some(w);
            let data = extract(problem)?;
            let report = exact_sequence_report(&data, w).map_err(cohomology_error)?;
            envelope.data = Some(report::data_json(&data));
            envelope.cohomology = Some(report::cohomology_json(&report));
            report::cohomology_text(&report)
        }
        Command::Theorem1 { max_weight: flag, .. } => {
            let w = weight(flag)?;
            max_weight = Some(w);
            let data = extract(problem)?;
            let verdict = theorem1_check(&data, w).map_err(cohomology_error)?;
            envelope.data = Some(report::data_json(&data));
            envelope.cohomology = Some(report::theorem_json(&verdict));
            envelope.verdict = Some(json!(verdict.summary));
            report::theorem_text(&verdict)
        }
    };
    Ok(Output {
        envelope,
        text,
        max_weight,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let problem = problem::read(cli.command.file()).map_err(CliError::from);
    let format = cli
        .format
        .or_else(|| problem.as_ref().ok().and_then(|p| p.format))
        .unwrap_or(Format::Json);
    let result = problem.and_then(|p| run(&cli.command, &p).map(|out| (p, out)));
    match result {
        Ok((problem, out)) => {
            match format {
                Format::Json => {
                    let echo = report::input_echo(&problem, cli.command.name(), out.max_weight);
                    print!("{}", out.envelope.to_json(echo));
                }
                Format::Text => print!("{}", out.text),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&e.to_json()).expect("serializes")),
                Format::Text => {}
            }
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
