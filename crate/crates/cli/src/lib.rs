//! Command-line driver: reads a JSON job, runs the requested computation,
//! writes a CSV and prints a short report.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 input or hypothesis
//! error.

pub mod config;
pub mod expr;
pub mod suite;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

use gronwall_core::linsys::{norm_envelope, LinearSystem};
use gronwall_core::oracle::equality_case;
use gronwall_core::riccati::{
    build_comparison, check_comparison_hypotheses_with, verify_comparison, SquaredDifference,
};
use gronwall_core::{classic_bound, general_bound, two_sided_envelope, BoundProblem, Grid, Signal};

use config::{
    BoundJob, EnvelopeJob, JobConfig, LinsysJob, RiccatiJob, SquaredDifferenceSpec, SuiteJob,
};
use expr::ExprError;
use suite::SuiteGrids;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "gronwall",
    version,
    about = "Gronwall-Bellman bounds, envelopes and Riccati comparison checks"
)]
pub struct Args {
    /// JSON job description.
    pub config: PathBuf,

    /// Output CSV path, overriding the job's `output` field.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Number of grid nodes, overriding the job's `n` field.
    #[arg(long = "grid-n")]
    pub grid_n: Option<usize>,

    /// Suppress the report on standard output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read { path: String, source: io::Error },

    #[error("cannot write `{path}`: {source}")]
    Write { path: String, source: io::Error },

    #[error("config parse error: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("expression in `{field}`: {source}")]
    Expression { field: String, source: ExprError },

    #[error("config error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Core(#[from] gronwall_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Result of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    /// Every verification performed by the job passed.
    pub verified: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.verified {
            0
        } else {
            1
        }
    }
}

struct Report<'a> {
    out: &'a mut dyn Write,
    quiet: bool,
}

impl Report<'_> {
    fn line(&mut self, text: impl AsRef<str>) {
        if !self.quiet {
            // Report output is best effort; a closed stdout must not mask the exit code.
            let _ = writeln!(self.out, "{}", text.as_ref());
        }
    }
}

/// Formats with 17 significant digits, which round-trips every `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &str, header: &[&str], columns: &[&[f64]]) -> Result<(), CliError> {
    let io_err = |source: io::Error| CliError::Write {
        path: path.to_string(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| io_err(e.into()))?;
    w.write_record(header).map_err(|e| io_err(e.into()))?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| format_number(c[i])))
            .map_err(|e| io_err(e.into()))?;
    }
    w.flush().map_err(io_err)
}

fn output_path(args: &Args, job: &JobConfig) -> Option<String> {
    args.output
        .as_ref()
        .map(|p| p.display().to_string())
        .or_else(|| job.output().map(str::to_string))
}

fn require_output(path: Option<String>) -> Result<String, CliError> {
    path.ok_or_else(|| {
        CliError::Config("no output path: set `output` in the job or pass --output".into())
    })
}

/// Runs the job named by `args`, writing the report to `out`.
pub fn run(args: &Args, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let path = args.config.display().to_string();
    let text =
        fs::read_to_string(&args.config).map_err(|source| CliError::Read { path, source })?;
    let mut job = JobConfig::parse(&text)?;
    if let Some(n) = args.grid_n {
        job.set_grid_n(n);
    }
    let output = output_path(args, &job);
    let mut report = Report {
        out,
        quiet: args.quiet,
    };
    match &job {
        JobConfig::Bound(j) => run_bound(j, &require_output(output)?, &mut report),
        JobConfig::Envelope(j) => run_envelope(j, &require_output(output)?, &mut report),
        JobConfig::Linsys(j) => run_linsys(j, &require_output(output)?, &mut report),
        JobConfig::RiccatiCompare(j) => run_riccati(j, &require_output(output)?, &mut report),
        JobConfig::VerifySuite(j) => run_suite(j, args.grid_n, output.as_deref(), &mut report),
    }
}

fn grid(t0: f64, t1: f64, n: usize) -> Result<Grid, CliError> {
    Ok(Grid::new(t0, t1, n)?)
}

fn nodes(g: &Grid) -> Vec<f64> {
    g.nodes().collect()
}

fn run_bound(job: &BoundJob, output: &str, report: &mut Report) -> Result<Outcome, CliError> {
    let g = grid(job.t0, job.t1, job.n)?;
    let p = BoundProblem::new(
        job.c,
        job.v.build("v", job.t0, job.t1)?,
        job.f.build("f", job.t0, job.t1)?,
        g,
    );
    let classic = classic_bound(&p)?;
    let general = general_bound(&p)?;
    write_csv(
        output,
        &["t", "classic_bound", "general_bound"],
        &[&nodes(&g), &classic, &general],
    )?;
    let last = g.len() - 1;
    report.line(format!(
        "classic_bound(t1): {}",
        format_number(classic[last])
    ));
    report.line(format!(
        "general_bound(t1): {}",
        format_number(general[last])
    ));
    Ok(Outcome { verified: true })
}

fn run_envelope(job: &EnvelopeJob, output: &str, report: &mut Report) -> Result<Outcome, CliError> {
    let g = grid(job.t0, job.t1, job.n)?;
    let v = job.v.build("v", job.t0, job.t1)?;
    let f = job.f.build("f", job.t0, job.t1)?;
    let e = two_sided_envelope(job.u0, &v, &f, &g)?;
    write_csv(
        output,
        &["t", "lower", "upper"],
        &[&nodes(&g), &e.lower, &e.upper],
    )?;
    let last = g.len() - 1;
    report.line(format!("lower(t1): {}", format_number(e.lower[last])));
    report.line(format!("upper(t1): {}", format_number(e.upper[last])));
    Ok(Outcome { verified: true })
}

fn build_system(job: &LinsysJob) -> Result<LinearSystem, CliError> {
    let dim = job.y0.len();
    if job.a.len() != dim || job.a.iter().any(|row| row.len() != dim) {
        return Err(CliError::Config(format!(
            "`a` must be a {dim}x{dim} matrix to match `y0`"
        )));
    }
    let mut matrix = Vec::with_capacity(dim * dim);
    for (r, row) in job.a.iter().enumerate() {
        for (c, entry) in row.iter().enumerate() {
            matrix.push(entry.build(&format!("a[{r}][{c}]"), job.t0, job.t1)?);
        }
    }
    let forcing = match &job.g {
        None => vec![Signal::constant(0.0); dim],
        Some(g) if g.len() == dim => g
            .iter()
            .enumerate()
            .map(|(i, s)| s.build(&format!("g[{i}]"), job.t0, job.t1))
            .collect::<Result<_, _>>()?,
        Some(g) => {
            return Err(CliError::Config(format!(
                "`g` has {} entries, expected {dim}",
                g.len()
            )))
        }
    };
    Ok(LinearSystem::new(
        matrix,
        forcing,
        job.y0.clone(),
        grid(job.t0, job.t1, job.n)?,
    )?)
}

fn run_linsys(job: &LinsysJob, output: &str, report: &mut Report) -> Result<Outcome, CliError> {
    let sys = build_system(job)?;
    let r = norm_envelope(&sys)?;
    let e = &r.envelope;
    write_csv(
        output,
        &["t", "lower", "actual_norm", "upper"],
        &[&nodes(sys.grid()), &e.lower, &r.actual_norm, &e.upper],
    )?;
    report.line(format!("contained: {}", r.contained));
    report.line(format!("max_upper_gap: {}", format_number(r.max_upper_gap)));
    report.line(format!("max_lower_gap: {}", format_number(r.max_lower_gap)));
    if r.norm_fallbacks > 0 {
        report.line(format!("frobenius_fallbacks: {}", r.norm_fallbacks));
    }
    Ok(Outcome {
        verified: r.contained,
    })
}

fn run_riccati(job: &RiccatiJob, output: &str, report: &mut Report) -> Result<Outcome, CliError> {
    let g = grid(job.t0, job.t1, job.n)?;
    let p = BoundProblem::new(
        job.c,
        job.v.build("v", job.t0, job.t1)?,
        job.f.build("f", job.t0, job.t1)?,
        g,
    );
    let u = match &job.u {
        Some(spec) => spec.build("u", job.t0, job.t1)?,
        None => Signal::sampled(g, equality_case(&p)?.values)?,
    };
    let cmp = build_comparison(&p, &u)?;
    let comparison = verify_comparison(&cmp.y, &cmp.x)?;
    let mode = match job.squared_difference {
        SquaredDifferenceSpec::AsPrinted => SquaredDifference::AsPrinted,
        SquaredDifferenceSpec::Linear => SquaredDifference::Linear,
    };
    let hyp = check_comparison_hypotheses_with(&cmp.setup(), &g, mode)?;
    write_csv(
        output,
        &["t", "y", "x"],
        &[&nodes(&g), &cmp.y.values, &cmp.x.values],
    )?;

    report.line(format!(
        "min_quadratic_coefficient: {}",
        format_number(cmp.min_quadratic())
    ));
    report.line(format!("f1_nonneg: {}", hyp.f1_nonneg));
    report.line(format!("eta1_admissible: {}", hyp.eta1_admissible));
    report.line(format!("eta2_admissible: {}", hyp.eta2_admissible));
    report.line(format!("condition_holds: {}", hyp.condition_holds));
    if let Some((i, value)) = hyp.first_violation {
        report.line(format!(
            "condition_violation: node {i}, value {}",
            format_number(value)
        ));
    }
    report.line(format!("comparison_holds: {}", comparison.holds));
    report.line(format!(
        "max_abs_gap: {}",
        format_number(comparison.max_abs_gap)
    ));
    if let Some((i, gap)) = comparison.first_violation {
        report.line(format!(
            "comparison_violation: node {i}, y - x = {}",
            format_number(gap)
        ));
    }
    Ok(Outcome {
        verified: hyp.condition_holds && comparison.holds,
    })
}

fn run_suite(
    job: &SuiteJob,
    grid_n: Option<usize>,
    output: Option<&str>,
    report: &mut Report,
) -> Result<Outcome, CliError> {
    if let Some(n) = grid_n {
        grid(0.0, 1.0, n)?;
    }
    let grids = grid_n.map_or_else(SuiteGrids::default, SuiteGrids::uniform);
    let results = suite::run_all(job.seed, job.count, grids);
    for r in &results {
        let verdict = if r.ok() { "PASS" } else { "FAIL" };
        report.line(format!("{verdict} {}/{} {}", r.passed, r.total, r.name));
    }
    if let Some(path) = output {
        let io_err = |source: io::Error| CliError::Write {
            path: path.to_string(),
            source,
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| io_err(e.into()))?;
        w.write_record(["suite", "passed", "total"])
            .map_err(|e| io_err(e.into()))?;
        for r in &results {
            w.write_record([
                r.name.to_string(),
                r.passed.to_string(),
                r.total.to_string(),
            ])
            .map_err(|e| io_err(e.into()))?;
        }
        w.flush().map_err(io_err)?;
    }
    Ok(Outcome {
        verified: results.iter().all(|r| r.ok()),
    })
}
