//! Command-line driver: argument parsing, validation, and the five
//! experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use spinmeter::measurement::PovmDocument;
use spinmeter::random::{random_pure, rng};
use spinmeter::tomography::{reconstruct_counts, reconstruction_diagnostics, sample_outcomes};
use spinmeter::type2::convergence_study;
use spinmeter::{
    make_completely_optimal, q_function, CoherentGrid, DensityMatrix, DensityMatrixFile, Error,
    Povm, Spin, SpinSystem, UnitVector,
};

pub const TOOL: &str = "spinmeter";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

const SATURATION_TOL: f64 = 1e-9;
const Q_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(
    name = "spinmeter",
    version,
    about = "Optimal spin-direction measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Spin quantum number(s); comma separated for error-relations.
    #[arg(
        long = "s",
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub s: Vec<String>,

    /// Quadrature exactness degree L (default 4s+2).
    #[arg(long, global = true)]
    pub grid_degree: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Number of simulated outcomes for tomography.
    #[arg(long, global = true)]
    pub samples: Option<u64>,

    /// Radial widths for type2, comma separated and descending.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub sigma: Vec<f64>,

    /// mixed | basis:<m> | coherent:<theta>,<phi> | random-pure:<seed> | file:<path>
    #[arg(long, global = true)]
    pub state: Option<String>,

    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fidelities and error relations of the completely optimal model.
    ErrorRelations,
    /// Q-function of a state on the grid.
    Qfunction,
    /// Simulated measurement and linear-inversion reconstruction.
    Tomography,
    /// Vector-pointer convergence table.
    Type2,
    /// JSON export of the completely optimal model.
    PovmExport,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Invariant(m) => write!(f, "numerical invariant violated: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Incomplete { .. }
            | Error::NotPositive { .. }
            | Error::KernelCondition { .. }
            | Error::IllPosed(_)
            | Error::NotInformationallyComplete { .. }
            | Error::ZeroProbability(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Named states accepted by `--state`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Mixed,
    Basis(f64),
    Coherent { theta: f64, phi: f64 },
    RandomPure(u64),
    File(PathBuf),
}

/// Parses `3/2`-style fractions as well as decimals.
pub fn parse_number(text: &str) -> Result<f64, CliError> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| config(format!("bad number {text:?}")))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| config(format!("bad number {text:?}")))?;
            p / q
        }
        None => text
            .parse()
            .map_err(|_| config(format!("bad number {text:?}")))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(config(format!("bad number {text:?}")))
    }
}

impl std::str::FromStr for StateSpec {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
        match kind {
            "mixed" if arg.is_empty() => Ok(StateSpec::Mixed),
            "basis" => Ok(StateSpec::Basis(parse_number(arg)?)),
            "coherent" => {
                let (t, p) = arg
                    .split_once(',')
                    .ok_or_else(|| config("coherent state needs <theta>,<phi>"))?;
                Ok(StateSpec::Coherent {
                    theta: parse_number(t)?,
                    phi: parse_number(p)?,
                })
            }
            "random-pure" => arg
                .trim()
                .parse()
                .map(StateSpec::RandomPure)
                .map_err(|_| config(format!("bad seed in {text:?}"))),
            "file" if !arg.is_empty() => Ok(StateSpec::File(PathBuf::from(arg))),
            _ => Err(config(format!("unknown state spec {text:?}"))),
        }
    }
}

impl StateSpec {
    pub fn build(&self, sys: &SpinSystem) -> Result<DensityMatrix, CliError> {
        let rho = match self {
            StateSpec::Mixed => DensityMatrix::maximally_mixed(sys.dim()),
            StateSpec::Basis(m) => {
                let idx = sys.m_index(*m)?;
                let mut ket = spinmeter::CVector::zeros(sys.dim());
                ket[idx] = spinmeter::linalg::c(1.0);
                DensityMatrix::pure(&ket)?
            }
            StateSpec::Coherent { theta, phi } => {
                DensityMatrix::pure(&sys.coherent(&UnitVector::from_polar(*theta, *phi)))?
            }
            StateSpec::RandomPure(seed) => random_pure(&mut rng(*seed), sys.dim()),
            StateSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
                let file: DensityMatrixFile = serde_json::from_str(&text)
                    .map_err(|e| config(format!("cannot parse {}: {e}", path.display())))?;
                DensityMatrix::try_from(file)?
            }
        };
        if rho.dim() != sys.dim() {
            return Err(config(format!(
                "state has dimension {}, spin {} needs {}",
                rho.dim(),
                sys.spin(),
                sys.dim()
            )));
        }
        Ok(rho)
    }
}

/// Validated inputs, echoed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub s: Vec<f64>,
    pub grid_degree: Option<usize>,
    pub seed: u64,
    pub samples: Option<u64>,
    pub sigma: Vec<f64>,
    pub state: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Format,
    #[serde(skip)]
    spins: Vec<Spin>,
    #[serde(skip)]
    state_spec: Option<StateSpec>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let s: Vec<f64> = cli
            .s
            .iter()
            .map(|t| parse_number(t))
            .collect::<Result<_, _>>()?;
        if s.is_empty() {
            return Err(config("--s is required"));
        }
        let spins: Vec<Spin> = s.iter().map(|&v| Spin::new(v)).collect::<Result<_, _>>()?;
        if cli.command != Command::ErrorRelations && spins.len() != 1 {
            return Err(config("this command takes a single --s value"));
        }
        if let Some(l) = cli.grid_degree {
            for spin in &spins {
                let need = 2 * spin.twice() as usize;
                if l < need {
                    return Err(config(format!(
                        "--grid-degree {l} is below 4s = {need} for s = {spin}"
                    )));
                }
            }
        }
        let mut samples = cli.samples;
        let mut state = cli.state.clone();
        match cli.command {
            Command::Tomography => {
                let n = *samples.get_or_insert(100_000);
                if n == 0 {
                    return Err(config("--samples must be at least 1"));
                }
                state.get_or_insert_with(|| format!("random-pure:{}", cli.seed));
            }
            Command::Qfunction => {
                state.get_or_insert_with(|| "mixed".to_string());
            }
            Command::Type2 => {
                if cli.sigma.is_empty() {
                    return Err(config("--sigma needs at least one width"));
                }
                if cli.sigma.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    return Err(config("--sigma widths must be positive"));
                }
                if cli.sigma.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(config("--sigma widths must be strictly descending"));
                }
            }
            Command::PovmExport => {
                if cli.format == Format::Csv {
                    return Err(config("povm-export writes JSON only"));
                }
            }
            Command::ErrorRelations => {}
        }
        let state_spec = state.as_deref().map(str::parse).transpose()?;
        Ok(RunConfig {
            command: cli.command,
            s,
            grid_degree: cli.grid_degree,
            seed: cli.seed,
            samples,
            sigma: cli.sigma,
            state,
            out: cli.out,
            format: cli.format,
            spins,
            state_spec,
        })
    }

    fn frame(&self, spin: Spin) -> Arc<CoherentGrid> {
        match self.grid_degree {
            Some(l) => CoherentGrid::with_degree(spin, l),
            None => CoherentGrid::for_spin(spin),
        }
    }
}

/// What a command produces before the metadata envelope is added.
pub struct Report {
    pub result: Value,
    pub csv: String,
    /// Additional files written next to `--out`.
    pub side_files: Vec<(PathBuf, Vec<u8>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRelationRow {
    pub s: f64,
    #[serde(rename = "L")]
    pub grid_degree: usize,
    pub eta_i: f64,
    pub eta_f: f64,
    pub eta_d: f64,
    pub delta_ei: f64,
    pub delta_ef: f64,
    pub delta_d: f64,
    pub bound_e: f64,
    pub bound_d: f64,
    pub saturated: bool,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cmd_error_relations(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut rows = Vec::new();
    for &spin in &cfg.spins {
        let frame = cfg.frame(spin);
        let grid_degree = frame.grid().exactness();
        let r = make_completely_optimal(frame, None)?.fidelity_report();
        let s = r.s;
        let saturated = [
            r.eta_i - s,
            r.eta_f - s,
            r.eta_d - s * s,
            r.delta_ei - s.sqrt(),
            r.delta_ef - s.sqrt(),
            r.delta_d - (2.0 * s).sqrt(),
        ]
        .iter()
        .all(|e| e.abs() < SATURATION_TOL);
        rows.push(ErrorRelationRow {
            s,
            grid_degree,
            eta_i: r.eta_i,
            eta_f: r.eta_f,
            eta_d: r.eta_d,
            delta_ei: r.delta_ei,
            delta_ef: r.delta_ef,
            delta_d: r.delta_d,
            bound_e: s.sqrt(),
            bound_d: (2.0 * s).sqrt(),
            saturated,
        });
    }
    let mut csv =
        String::from("s,L,eta_i,eta_f,eta_d,delta_ei,delta_ef,delta_d,bound_e,bound_d,saturated\n");
    for r in &rows {
        let nums = [
            r.s, r.eta_i, r.eta_f, r.eta_d, r.delta_ei, r.delta_ef, r.delta_d, r.bound_e, r.bound_d,
        ];
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt(nums[0]),
            r.grid_degree,
            nums[1..]
                .iter()
                .map(|x| fmt(*x))
                .collect::<Vec<_>>()
                .join(","),
            r.saturated
        );
    }
    let all = rows.iter().all(|r| r.saturated);
    let report = Report {
        result: json!({ "rows": rows, "all_saturated": all }),
        csv,
        side_files: Vec::new(),
    };
    if all {
        Ok(report)
    } else {
        Err(CliError::Invariant(
            "bounds not saturated by the optimal model".into(),
        ))
    }
}

pub fn cmd_qfunction(cfg: &RunConfig) -> Result<Report, CliError> {
    let frame = cfg.frame(cfg.spins[0]);
    let rho = cfg
        .state_spec
        .as_ref()
        .expect("defaulted")
        .build(frame.sys())?;
    let q = q_function(&frame, &rho)?;
    let val = Povm::optimal(frame.clone()).outcome_distribution(&rho)?;
    let deviation = q.max_abs_diff(val.values());
    if !(deviation < Q_TOL) {
        return Err(CliError::Invariant(format!(
            "outcome density differs from Q by {deviation:.3e}"
        )));
    }
    let mut csv = Vec::new();
    q.write_csv(&mut csv)?;
    Ok(Report {
        result: json!({
            "s": frame.s(),
            "max_outcome_deviation": deviation,
            "q": q.to_record(),
        }),
        csv: String::from_utf8(csv).expect("ascii"),
        side_files: Vec::new(),
    })
}

fn counts_path(out: &Path, ext: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.counts.{ext}"))
}

pub fn cmd_tomography(cfg: &RunConfig) -> Result<Report, CliError> {
    let frame = cfg.frame(cfg.spins[0]);
    let rho = cfg
        .state_spec
        .as_ref()
        .expect("defaulted")
        .build(frame.sys())?;
    let povm = Povm::optimal(frame.clone());
    let n = cfg.samples.expect("defaulted");
    let counts = sample_outcomes(&povm, &rho, n, cfg.seed)?;
    let result = reconstruct_counts(&povm, &counts)?;
    let diag = reconstruction_diagnostics(&povm, &result, &rho)?;

    let mut counts_csv = Vec::new();
    counts.write_csv(&povm, &mut counts_csv)?;
    let sidecar = serde_json::to_vec_pretty(&counts.sidecar(&povm)).expect("serializable");
    let side_files = match &cfg.out {
        Some(out) => vec![
            (counts_path(out, "csv"), counts_csv),
            (counts_path(out, "json"), sidecar),
        ],
        None => Vec::new(),
    };

    let mut csv = String::from("s,L,N,seed,fidelity,trace_distance,q_max_deviation,residual,clipped_mass,condition_number\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{},{},{}",
        fmt(frame.s()),
        frame.grid().exactness(),
        n,
        cfg.seed,
        fmt(diag.fidelity),
        fmt(diag.trace_distance),
        fmt(diag.q_max_deviation),
        fmt(result.residual),
        fmt(result.clipped_mass),
        fmt(result.condition_number)
    );
    Ok(Report {
        result: json!({
            "s": frame.s(),
            "L": frame.grid().exactness(),
            "N": n,
            "seed": cfg.seed,
            "counts": counts.counts,
            "reference": DensityMatrixFile::from(&rho),
            "estimate": DensityMatrixFile::from(&result.estimate),
            "diagnostics": diag,
            "residual": result.residual,
            "projected_residual": result.projected_residual,
            "clipped_mass": result.clipped_mass,
            "condition_number": result.condition_number,
        }),
        csv,
        side_files,
    })
}

pub fn cmd_type2(cfg: &RunConfig) -> Result<Report, CliError> {
    let frame = cfg.frame(cfg.spins[0]);
    let s = frame.s();
    let rows = convergence_study(frame.clone(), &cfg.sigma)?;
    let mut csv = String::from("sigma,delta_ei,delta_ef,mass_within_sigma,shell_mass\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt(r.sigma),
            fmt(r.delta_ei),
            fmt(r.delta_ef),
            fmt(r.mass_within_sigma),
            fmt(r.shell_mass)
        );
    }
    Ok(Report {
        result: json!({
            "s": s,
            "L": frame.grid().exactness(),
            "floor": s.sqrt(),
            "rows": rows,
        }),
        csv,
        side_files: Vec::new(),
    })
}

pub fn cmd_povm_export(cfg: &RunConfig) -> Result<Report, CliError> {
    let frame = cfg.frame(cfg.spins[0]);
    let model = make_completely_optimal(frame, None)?;
    let doc = PovmDocument::from_model(&model);
    Ok(Report {
        result: serde_json::to_value(&doc).expect("serializable"),
        csv: String::new(),
        side_files: Vec::new(),
    })
}

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::ErrorRelations => cmd_error_relations(cfg),
        Command::Qfunction => cmd_qfunction(cfg),
        Command::Tomography => cmd_tomography(cfg),
        Command::Type2 => cmd_type2(cfg),
        Command::PovmExport => cmd_povm_export(cfg),
    }
}

/// Adds `{tool, version, config, wall_time_seconds}` to the report body.
pub fn render(cfg: &RunConfig, report: &Report, wall: f64) -> String {
    match cfg.format {
        Format::Json => {
            let doc = json!({
                "tool": TOOL,
                "version": VERSION,
                "config": cfg,
                "wall_time_seconds": wall,
                "result": report.result,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
            text.push('\n');
            text
        }
        Format::Csv => {
            let config_json = serde_json::to_string(cfg).expect("serializable");
            format!(
                "# tool: {TOOL} {VERSION}\n# config: {config_json}\n# wall_time_seconds: {wall}\n{}",
                report.csv
            )
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| config(format!("cannot write {}: {e}", path.display())))
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let start = Instant::now();
    let outcome = execute(&cfg);
    let wall = start.elapsed().as_secs_f64();
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let text = render(&cfg, &report, wall);
    let written = match &cfg.out {
        Some(path) => write_file(path, text.as_bytes()).and_then(|_| {
            report
                .side_files
                .iter()
                .try_for_each(|(p, bytes)| write_file(p, bytes))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
