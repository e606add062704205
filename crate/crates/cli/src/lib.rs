//! Command-line front end. `run` is the whole program minus process I/O so
//! that it can be driven from tests.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use coposolve::copositivity::{eigenvalues, ClosedFormResult};
use coposolve::neumann::{self, mountain_pass_solve, EnergyReport, Grid, SeedDiagnostic, SolutionKind, SolveOutcome, SolverConfig};
use coposolve::p_copositivity::{b_epsilon_limit_form, b_epsilon, find_mu, MuSearchBudget, MuSearchOutcome};
use coposolve::{
    check_psd, classify_copositivity, classify_solvability, strict_copositivity_closed_form, ConeVector,
    CopositivityVerdict, Exponent, ProblemParams, PsdClass, SolvabilityBudget, SolvabilityVerdict, SymMatrix,
    Tolerance,
};

pub const SCHEMA_VERSION: &str = "coposolve-report/1";
pub const SEED_ENV: &str = "COPOSOLVE_SEED";
pub const MAX_MATRIX_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Defaults {
    pub tol: f64,
    pub p: f64,
    pub resolution: u32,
    pub budget: usize,
    pub nodes: usize,
}

pub const DEFAULTS: Defaults = Defaults {
    tol: 1e-9,
    p: 4.0,
    resolution: 64,
    budget: 50,
    nodes: 129,
};

/// Matrix input file: `{"n": <int>, "beta": [[...], ...], "name": <optional string>}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub beta: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<SymMatrix, CliError> {
        if self.n == 0 || self.n > MAX_MATRIX_SIZE {
            return Err(CliError::invalid(format!("n = {} outside 1..={MAX_MATRIX_SIZE}", self.n)));
        }
        if self.beta.len() != self.n || self.beta.iter().any(|r| r.len() != self.n) {
            return Err(CliError::invalid(format!("beta must be {0}x{0}", self.n)));
        }
        SymMatrix::from_rows(&self.beta).map_err(CliError::from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixInput {
    pub source: String,
    #[serde(flatten)]
    pub matrix: MatrixFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tol: f64,
    pub p: Option<Exponent>,
    pub dim: Option<u32>,
    pub resolution: Option<u32>,
    pub budget: Option<usize>,
    pub nodes: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyEntry {
    pub source: String,
    pub verdict: CopositivityVerdict,
    pub psd: PsdClass,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub outcome: String,
    pub classification: Option<SolutionKind>,
    pub seed_provenance: Option<String>,
    pub energy: Option<EnergyReport>,
    pub min_value: Option<f64>,
    pub max_value: Option<f64>,
    pub csv: Option<String>,
    pub sidecar: Option<String>,
    pub best_residual: Option<f64>,
    pub diagnostics: Vec<SeedDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BEpsilonSummary {
    pub eps: f64,
    pub closed_form: ClosedFormResult,
    /// `4 eps`, the closed-form value of the diagnostic for this family.
    pub expected_diagnostic: f64,
    pub limit_form_at_322: f64,
    pub find_mu: MuSearchOutcome,
    pub solvability: SolvabilityVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ReportBody {
    Classify { entries: Vec<ClassifyEntry> },
    Liouville { params: ProblemParams, verdict: SolvabilityVerdict },
    FindMu { p: Exponent, outcome: MuSearchOutcome },
    Solve { params: ProblemParams, grid: Grid, result: SolveSummary },
    Bepsilon(BEpsilonSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub defaults: Defaults,
    pub settings: Settings,
    pub inputs: Vec<MatrixInput>,
    pub body: ReportBody,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub error: String,
    pub message: String,
    #[serde(skip)]
    pub code: i32,
}

impl CliError {
    fn io(message: String) -> Self {
        Self {
            error: "io".into(),
            message,
            code: 1,
        }
    }

    fn invalid(message: String) -> Self {
        Self {
            error: "input".into(),
            message,
            code: 2,
        }
    }
}

impl From<coposolve::Error> for CliError {
    fn from(e: coposolve::Error) -> Self {
        Self {
            error: e.tag().into(),
            message: e.to_string(),
            code: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "coposolve", version, about = "Copositivity certificates and Liouville-type verdicts for coupled elliptic systems")]
pub struct Cli {
    /// Report format on standard output.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Copositivity verdict and PSD check for a matrix file, or every `*.json` in a directory.
    Classify {
        path: PathBuf,
        #[arg(long, default_value_t = DEFAULTS.tol)]
        tol: f64,
    },
    /// Existence / nonexistence of nontrivial entire solutions.
    Liouville {
        file: PathBuf,
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value = "4")]
        p: String,
        /// Cutting-plane rounds for the weight search.
        #[arg(long, default_value_t = DEFAULTS.budget)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULTS.resolution)]
        resolution: u32,
        #[arg(long, default_value_t = DEFAULTS.tol)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search for a weight certifying strict (p-1)-copositivity.
    FindMu {
        file: PathBuf,
        #[arg(long, default_value = "4")]
        p: String,
        #[arg(long, default_value_t = DEFAULTS.resolution)]
        resolution: u32,
        #[arg(long, default_value_t = DEFAULTS.budget)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Nontrivial nonnegative solution of the Neumann problem on the unit box.
    Solve {
        file: PathBuf,
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value = "4")]
        p: String,
        #[arg(long, default_value_t = DEFAULTS.nodes)]
        nodes: usize,
        /// CSV destination; a JSON sidecar with the energy report is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Full analysis of the three-component family with off-diagonal entries eps - 1 and 1.
    Bepsilon {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 3)]
        dim: u32,
        #[arg(long, default_value = "4")]
        p: String,
        #[arg(long, default_value_t = DEFAULTS.budget)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULTS.resolution)]
        resolution: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Exit code and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn read_matrix(path: &Path) -> Result<MatrixInput, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let matrix: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("{}: malformed matrix JSON: {e}", path.display())))?;
    matrix.to_matrix()?;
    Ok(MatrixInput {
        source: path.display().to_string(),
        matrix,
    })
}

fn parse_p(text: &str) -> Result<Exponent, CliError> {
    let p: Exponent = text.parse()?;
    if !(p.value() > 2.0) {
        return Err(CliError::invalid(format!("p = {p} must be > 2")));
    }
    Ok(p)
}

fn check_budget(budget: usize, resolution: u32) -> Result<(), CliError> {
    if budget == 0 {
        return Err(CliError::invalid("budget must be >= 1".into()));
    }
    if resolution < 16 {
        return Err(CliError::invalid(format!("resolution {resolution} < 16")));
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn settings(tol: f64, seed: u64) -> Settings {
    Settings {
        tol,
        p: None,
        dim: None,
        resolution: None,
        budget: None,
        nodes: None,
        seed,
    }
}

fn execute(command: Command, env_seed: Option<u64>) -> Result<Report, CliError> {
    let seed_of = |s: u64| env_seed.unwrap_or(s);
    let (settings, inputs, body) = match command {
        Command::Classify { path, tol } => {
            let tolerance = Tolerance::new(tol)?;
            let files = if path.is_dir() {
                let mut files: Vec<PathBuf> = fs::read_dir(&path)
                    .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "json"))
                    .collect();
                files.sort();
                files
            } else {
                vec![path]
            };
            let mut inputs = Vec::new();
            let mut entries = Vec::new();
            for file in files {
                let input = read_matrix(&file)?;
                let b = input.matrix.to_matrix()?;
                entries.push(ClassifyEntry {
                    source: input.source.clone(),
                    verdict: classify_copositivity(&b, tolerance)?,
                    psd: check_psd(&b, tolerance),
                    eigenvalues: eigenvalues(&b),
                });
                inputs.push(input);
            }
            (settings(tol, 0), inputs, ReportBody::Classify { entries })
        }
        Command::Liouville {
            file,
            dim,
            p,
            budget,
            resolution,
            tol,
            seed,
        } => {
            check_budget(budget, resolution)?;
            let input = read_matrix(&file)?;
            let b = input.matrix.to_matrix()?;
            let params = ProblemParams::new(dim, parse_p(&p)?)?;
            let seed = seed_of(seed);
            let sb = SolvabilityBudget {
                search: MuSearchBudget {
                    max_iterations: budget,
                    resolution,
                    seed,
                    ..MuSearchBudget::default()
                },
                tolerance: Tolerance::new(tol)?,
            };
            let verdict = classify_solvability(&b, &params, &sb)?;
            let mut s = settings(tol, seed);
            s.p = Some(params.p);
            s.dim = Some(dim);
            s.budget = Some(budget);
            s.resolution = Some(resolution);
            (s, vec![input], ReportBody::Liouville { params, verdict })
        }
        Command::FindMu {
            file,
            p,
            resolution,
            budget,
            seed,
        } => {
            check_budget(budget, resolution)?;
            let input = read_matrix(&file)?;
            let b = input.matrix.to_matrix()?;
            let p = parse_p(&p)?;
            let seed = seed_of(seed);
            let outcome = find_mu(
                &b,
                p.value(),
                &MuSearchBudget {
                    max_iterations: budget,
                    resolution,
                    seed,
                    ..MuSearchBudget::default()
                },
            )?;
            let mut s = settings(DEFAULTS.tol, seed);
            s.p = Some(p);
            s.budget = Some(budget);
            s.resolution = Some(resolution);
            (s, vec![input], ReportBody::FindMu { p, outcome })
        }
        Command::Solve { file, dim, p, nodes, out } => {
            let input = read_matrix(&file)?;
            let b = input.matrix.to_matrix()?;
            if !(dim == 1 || dim == 2) {
                return Err(CliError::invalid(format!("--dim must be 1 or 2, got {dim}")));
            }
            let params = ProblemParams::new(dim, parse_p(&p)?)?;
            let grid = Grid::unit(dim as usize, nodes)?;
            let outcome = mountain_pass_solve(&b, &params, &grid, &SolverConfig::default())?;
            let mut result = SolveSummary {
                outcome: String::new(),
                classification: None,
                seed_provenance: None,
                energy: None,
                min_value: None,
                max_value: None,
                csv: None,
                sidecar: None,
                best_residual: None,
                diagnostics: outcome.diagnostics().to_vec(),
            };
            match &outcome {
                SolveOutcome::Solution { solution, .. } => {
                    let csv = fs::File::create(&out).map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
                    neumann::write_csv(std::io::BufWriter::new(csv), &grid, &solution.field)?;
                    let side = sidecar_path(&out);
                    let json = serde_json::to_string_pretty(&solution.report).expect("report serializes");
                    fs::write(&side, json + "\n").map_err(|e| CliError::io(format!("{}: {e}", side.display())))?;
                    result.outcome = "solution".into();
                    result.classification = Some(solution.classification);
                    result.seed_provenance = Some(solution.seed_provenance.clone());
                    result.energy = Some(solution.report.clone());
                    result.min_value = Some(solution.field.min_value());
                    result.max_value = Some(solution.field.max_abs());
                    result.csv = Some(out.display().to_string());
                    result.sidecar = Some(side.display().to_string());
                }
                SolveOutcome::TrivialOnly { .. } => result.outcome = "trivial-only".into(),
                SolveOutcome::Inconclusive { best_residual, .. } => {
                    result.outcome = "inconclusive".into();
                    result.best_residual = Some(*best_residual);
                }
            }
            let mut s = settings(DEFAULTS.tol, 0);
            s.p = Some(params.p);
            s.dim = Some(dim);
            s.nodes = Some(nodes);
            (s, vec![input], ReportBody::Solve { params, grid, result })
        }
        Command::Bepsilon {
            eps,
            dim,
            p,
            budget,
            resolution,
            seed,
        } => {
            check_budget(budget, resolution)?;
            let b = b_epsilon(eps)?;
            let params = ProblemParams::new(dim, parse_p(&p)?)?;
            let seed = seed_of(seed);
            let search = MuSearchBudget {
                max_iterations: budget,
                resolution,
                seed,
                ..MuSearchBudget::default()
            };
            let summary = BEpsilonSummary {
                eps,
                closed_form: strict_copositivity_closed_form(&b)?,
                expected_diagnostic: 4.0 * eps,
                limit_form_at_322: b_epsilon_limit_form(&ConeVector::new(vec![3.0, 2.0, 2.0])?)?,
                find_mu: find_mu(&b, params.p.value(), &search)?,
                solvability: classify_solvability(
                    &b,
                    &params,
                    &SolvabilityBudget {
                        search,
                        tolerance: Tolerance::DEFAULT,
                    },
                )?,
            };
            let input = MatrixInput {
                source: format!("bepsilon(eps={eps})"),
                matrix: MatrixFile {
                    n: 3,
                    beta: b.rows(),
                    name: Some(format!("B_eps({eps})")),
                },
            };
            let mut s = settings(DEFAULTS.tol, seed);
            s.p = Some(params.p);
            s.dim = Some(dim);
            s.budget = Some(budget);
            s.resolution = Some(resolution);
            (s, vec![input], ReportBody::Bepsilon(summary))
        }
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION.into(),
        defaults: DEFAULTS,
        settings,
        inputs,
        body,
    })
}

fn render_text(report: &Report) -> String {
    let mut out = format!("{}\n", report.schema_version);
    match &report.body {
        ReportBody::Classify { entries } => {
            for e in entries {
                out += &format!(
                    "{}: {:?} (min {:.6e} at {:?}, {:?}), {:?}\n",
                    e.source,
                    e.verdict.kind,
                    e.verdict.min_value,
                    e.verdict.witness.as_slice(),
                    e.verdict.method,
                    e.psd
                );
            }
        }
        ReportBody::Liouville { params, verdict } => {
            out += &format!("N = {}, p = {}: {:?} [{}]\n", params.dim, params.p, verdict.kind, verdict.reason);
            if let Some(note) = &verdict.note {
                out += &format!("note: {note}\n");
            }
        }
        ReportBody::FindMu { p, outcome } => {
            out += &match outcome {
                MuSearchOutcome::Certified { certificate, iterations, .. } => format!(
                    "p = {p}: certified mu = {:?}, kappa = {:.6e}, min = {:.6e} after {iterations} rounds\n",
                    certificate.mu.as_slice(),
                    certificate.kappa,
                    certificate.min_on_simplex
                ),
                MuSearchOutcome::Failure(f) => format!(
                    "p = {p}: failure, LP margin {:.6e} on {} cuts after {} rounds\n",
                    f.best_margin,
                    f.adversarial_set.len(),
                    f.iterations
                ),
                MuSearchOutcome::Inconclusive(i) => {
                    format!("p = {p}: inconclusive after {} rounds, margin {:.6e}\n", i.iterations, i.last_margin)
                }
            };
        }
        ReportBody::Solve { result, .. } => {
            out += &format!("outcome: {}\n", result.outcome);
            if let Some(e) = &result.energy {
                out += &format!("energy {:.12e}, residual {:.3e}\n", e.energy, e.residual_inf);
            }
            if let Some(csv) = &result.csv {
                out += &format!("field written to {csv}\n");
            }
        }
        ReportBody::Bepsilon(s) => {
            out += &format!(
                "eps = {}: closed-form diagnostic {:?} (4 eps = {}), limit form at (3,2,2) = {}\n",
                s.eps, s.closed_form.diagnostic, s.expected_diagnostic, s.limit_form_at_322
            );
            out += &format!(
                "weight search: {}\n",
                match &s.find_mu {
                    MuSearchOutcome::Certified { .. } => "certified",
                    MuSearchOutcome::Failure(_) => "failure",
                    MuSearchOutcome::Inconclusive(_) => "inconclusive",
                }
            );
            out += &format!("solvability: {:?} [{}]\n", s.solvability.kind, s.solvability.reason);
        }
    }
    out
}

fn error_line(e: &CliError) -> String {
    serde_json::to_string(e).expect("error serializes") + "\n"
}

/// Run one invocation. `args` includes the program name. `env_seed` is the
/// value of `COPOSOLVE_SEED`, which overrides `--seed` when set.
pub fn run_with_env<I, S>(args: I, env_seed: Option<&str>) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let fail = |e: CliError| Output {
        code: e.code,
        stdout: String::new(),
        stderr: error_line(&e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Output {
                    code: 0,
                    stdout: e.to_string(),
                    stderr: String::new(),
                };
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail(CliError {
                error: "usage".into(),
                message: first.to_string(),
                code: 2,
            });
        }
    };
    let env_seed = match env_seed.map(|s| s.trim().parse::<u64>()) {
        None => None,
        Some(Ok(s)) => Some(s),
        Some(Err(_)) => return fail(CliError::invalid(format!("{SEED_ENV} must be an unsigned integer"))),
    };
    match execute(cli.command, env_seed) {
        Ok(report) => {
            let stdout = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
                Format::Text => render_text(&report),
            };
            Output {
                code: 0,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => fail(e),
    }
}

/// Run with `COPOSOLVE_SEED` taken from the process environment.
pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(SEED_ENV).ok();
    run_with_env(args, env.as_deref())
}

pub fn parse_report(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}
