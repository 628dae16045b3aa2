//! Command-line driver: loads a spec, runs the selected checks and renders a
//! deterministic report.

use std::path::PathBuf;

use algebroid::calculus::{self as calc, CalcError, ProbeConfig, StructureKind};
use algebroid::exprjet::DomainError;
use algebroid::foliation::{self, FoliationError, MonitorKind, ORTHOGONALITY_TOL};
use algebroid::freealg::{self as free, FreeError, FreeMode, FreeOptions, FreeTruncation};
use algebroid::model::{
    load_psi, load_spec_file, sample_points, validate_spec, AlgebroidSpec, CheckReport, SpecError, ValidateOptions,
    DEFAULT_POINTS, DEFAULT_SEED,
};
use algebroid::par::Execution;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

/// Energy drift allowed along a geodesic before the check fails.
pub const ENERGY_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "algebroid", version, about = "Compatibility checks for Lie algebroids with connection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural checks and, in lie mode, the algebroid axioms.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Also require the Poisson bivector to be nondegenerate.
        #[arg(long)]
        poisson_nondegenerate: bool,
    },
    /// Compatibility checks; only the axioms run unless others are selected.
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        select: Selection,
    },
    /// Truncated free algebroid generated by the spec.
    Free {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=4))]
        degree: u8,
        #[arg(long, value_enum, default_value_t = FreeModeArg::Quotient)]
        mode: FreeModeArg,
        /// Propagate the Killing condition through every degree.
        #[arg(long)]
        killing: bool,
    },
    /// Geodesics with energy and orthogonality monitors.
    Geodesic {
        #[command(flatten)]
        common: Common,
        /// Start point as comma-separated coordinates; random orthogonal starts when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "v0")]
        x0: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "x0")]
        v0: Option<Vec<f64>>,
        /// Number of random orthogonal starts used without --x0.
        #[arg(long, default_value_t = 20)]
        starts: usize,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Write the trace of a single geodesic as CSV.
        #[arg(long, requires = "x0")]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = DEFAULT_POINTS, value_parser = positive_usize)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Overrides the tolerance of every selected check.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluate sample points on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Default, Args)]
pub struct Selection {
    #[arg(long)]
    pub axioms: bool,
    /// Compatibility tensor of the connection.
    #[arg(long)]
    pub cartan: bool,
    #[arg(long)]
    pub killing: bool,
    #[arg(long)]
    pub generalized: bool,
    #[arg(long)]
    pub symplectic: bool,
    #[arg(long)]
    pub poisson: bool,
    #[arg(long, requires = "psi_file")]
    pub koszul: bool,
    #[arg(long)]
    pub flat_frame: bool,
    #[arg(long)]
    pub psi_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FreeModeArg {
    Almost,
    Quotient,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Indeterminate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Input(_) => 2,
            CliError::Indeterminate(_) => 3,
        }
    }
}

impl From<CalcError> for CliError {
    fn from(e: CalcError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FoliationError> for CliError {
    fn from(e: FoliationError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FreeError> for CliError {
    fn from(e: FreeError) -> Self {
        match e {
            FreeError::Indeterminate { .. } | FreeError::NonLocallyFree { .. } => {
                CliError::Indeterminate(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub spec: String,
    pub seed: u64,
    pub points: usize,
    pub checks: Vec<CheckReport>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free: Option<FreeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicSummary>,
}

impl Report {
    fn new(common: &Common, checks: Vec<CheckReport>) -> Report {
        let verdict = if checks.iter().all(|c| c.pass) { Verdict::Pass } else { Verdict::Fail };
        Report {
            spec: common.spec.display().to_string(),
            seed: common.seed,
            points: common.points,
            checks,
            verdict,
            free: None,
            geodesic: None,
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("spec {} ({} points, seed {})\n", self.spec, self.points, self.seed);
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            out += &format!(
                "{status} {:<28} max {:.3e}  mean {:.3e}  tol {:.1e}",
                c.name, c.max_residual, c.mean_residual, c.tolerance
            );
            if !c.pass {
                if let Some(p) = &c.worst_point {
                    out += &format!("  at {p:?}");
                }
            }
            if let Some(note) = &c.note {
                out += &format!("  ({note})");
            }
            out.push('\n');
        }
        if let Some(f) = &self.free {
            out += &format!(
                "free degree {} {}: counts {:?}, witt {:?}, relations {:?}, max |S| {:.3e}\n",
                f.degree, f.mode, f.counts, f.witt, f.relations, f.max_s
            );
        }
        if let Some(g) = &self.geodesic {
            out += &format!(
                "geodesics {}: monitor {}, max energy drift {:.3e}\n",
                g.traces, g.monitor, g.max_energy_drift
            );
        }
        out += match self.verdict {
            Verdict::Pass => "verdict: pass\n",
            Verdict::Fail => "verdict: fail\n",
        };
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Json => self.to_json(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeSummary {
    pub degree: usize,
    pub mode: String,
    pub basis: Vec<String>,
    pub counts: Vec<usize>,
    pub witt: Vec<usize>,
    pub relations: Vec<usize>,
    pub max_s: f64,
    pub jacobiator_defect: f64,
    pub rank_profile: free::RankProfile,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicSummary {
    pub traces: usize,
    pub t_max: f64,
    pub h: f64,
    pub monitor: String,
    pub max_energy_drift: f64,
    /// Earliest time at which a trace left the chart, if any did.
    pub exit_time: Option<f64>,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Validate { common, .. }
            | Command::Check { common, .. }
            | Command::Free { common, .. }
            | Command::Geodesic { common, .. } => common,
        }
    }
}

/// Runs the selected suite. Check failures are part of the report; only
/// input problems and numerical indeterminacy are errors.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let common = cli.command.common();
    if let Some(t) = common.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Input(format!("tolerance must be positive, got {t}")));
        }
    }
    Execution::set_current(if common.sequential { Execution::Sequential } else { Execution::Parallel });
    let spec = load_spec_file(&common.spec)?;
    let points = sample_points(&spec.chart, common.points, common.seed);
    match &cli.command {
        Command::Validate { poisson_nondegenerate, .. } => {
            let options = ValidateOptions { poisson_nondegenerate: *poisson_nondegenerate };
            let mut checks = validate_spec(&spec, &points, options);
            if let Some(t) = common.tol {
                retolerance(&mut checks, t);
            }
            Ok(Report::new(common, checks))
        }
        Command::Check { select, .. } => run_checks(&spec, &points, select, common),
        Command::Free { degree, mode, killing, .. } => {
            let mode = match mode {
                FreeModeArg::Almost => FreeMode::Almost,
                FreeModeArg::Quotient => FreeMode::Quotient,
            };
            run_free(&spec, &points, *degree as usize, mode, *killing, common)
        }
        Command::Geodesic { x0, v0, starts, t_max, h, csv, .. } => {
            if !(*h > 0.0 && *t_max > 0.0) {
                return Err(CliError::Input("--h and --t-max must be positive".into()));
            }
            let starts = match (x0, v0) {
                (Some(x), Some(v)) => vec![(x.clone(), v.clone())],
                _ => foliation::orthogonal_starts(&spec, *starts, common.seed, 1.0)?,
            };
            if starts.is_empty() {
                return Err(CliError::Input("no orthogonal starting velocities found in the domain".into()));
            }
            run_geodesics(&spec, &starts, *t_max, *h, csv.as_deref(), common)
        }
    }
}

fn retolerance(checks: &mut [CheckReport], tol: f64) {
    for c in checks {
        c.tolerance = tol;
        c.pass = c.max_residual <= tol;
    }
}

fn run_checks(
    spec: &AlgebroidSpec,
    points: &[Vec<f64>],
    select: &Selection,
    common: &Common,
) -> Result<Report, CliError> {
    let tol = |default: f64| common.tol.unwrap_or(default);
    let any = select.cartan
        || select.killing
        || select.generalized
        || select.symplectic
        || select.poisson
        || select.koszul
        || select.flat_frame;
    let mut checks = Vec::new();
    if select.axioms || !any {
        let mut axioms = validate_spec(spec, points, ValidateOptions::default());
        if let Some(t) = common.tol {
            retolerance(&mut axioms, t);
        }
        checks.extend(axioms);
    }
    if select.cartan {
        checks.push(calc::check_cartan(spec, points, tol(calc::CARTAN_TOL))?);
    }
    if select.killing {
        checks.push(calc::check_killing_frame(spec, points, tol(calc::KILLING_FRAME_TOL))?);
        checks.push(calc::check_killing_sym(spec, points, tol(calc::KILLING_SYM_TOL))?);
    }
    if select.generalized {
        checks.extend(calc::check_generalized(spec, points, tol(calc::BILINEAR_TOL))?);
    }
    if select.symplectic {
        checks.push(calc::check_structure(spec, points, StructureKind::Symplectic, tol(calc::BILINEAR_TOL))?);
    }
    if select.poisson {
        checks.push(calc::check_structure(spec, points, StructureKind::Poisson, tol(calc::BILINEAR_TOL))?);
    }
    if select.koszul {
        let path = select.psi_file.as_ref().expect("clap enforces --psi-file");
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let psi = load_psi(&text, spec)?;
        checks.push(calc::check_koszul(spec, &psi, points, tol(calc::KOSZUL_TOL))?);
    }
    if select.flat_frame {
        let mut config = ProbeConfig::centered(spec, 4);
        config.tolerance = tol(calc::FLAT_FRAME_TOL);
        match calc::flat_frame_probe(spec, &config) {
            Ok(probe) => checks.extend(probe.reports()),
            Err(CalcError::NotFlat { max, tolerance, point }) => {
                let report = CheckReport::from_residuals("flat_frame_flatness", tolerance, &[point], &[max]);
                checks.push(report.with_note("connection is not flat, so no flat frame exists"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Report::new(common, checks))
}

fn run_free(
    spec: &AlgebroidSpec,
    points: &[Vec<f64>],
    degree: usize,
    mode: FreeMode,
    killing: bool,
    common: &Common,
) -> Result<Report, CliError> {
    let tol = |default: f64| common.tol.unwrap_or(default);
    let options = FreeOptions { seed: common.seed, ..FreeOptions::default() };
    let truncation: FreeTruncation = free::free_extend(spec, degree, mode, &options)?;
    let mut checks = vec![
        free::cartan_check_extended(&truncation, points, tol(free::FREE_CARTAN_TOL))?,
        free::anchor_morphism_extended(&truncation, points, tol(free::FREE_ANCHOR_TOL))?,
        free::extension_consistency(&truncation, points, tol(free::FREE_CARTAN_TOL))?,
    ];
    let defect = free::jacobiator_defect(&truncation);
    match mode {
        FreeMode::Quotient => {
            let t = tol(free::FREE_JACOBI_TOL);
            let at = vec![spec.chart.domain.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect()];
            checks.push(CheckReport::from_residuals("free_jacobi_identity", t, &at, &[defect]));
        }
        FreeMode::Almost if degree >= 3 => {
            checks.push(free::jacobiator_check(&truncation, points, tol(free::FREE_JACOBI_TOL))?);
        }
        FreeMode::Almost => {}
    }
    if killing {
        let t = tol(free::PROPAGATION_TOL);
        let generators = calc::check_killing_frame(spec, points, t)?;
        let pass = generators.pass;
        checks.push(generators);
        if pass {
            checks.extend(free::propagate_compatibility(&truncation, points, t)?);
        }
    }
    let max_s = checks[0].max_residual;
    let profile = free::anchor_rank_profile(&truncation, points)?;
    let mut report = Report::new(common, checks);
    report.free = Some(FreeSummary {
        degree,
        mode: match mode {
            FreeMode::Almost => "almost".into(),
            FreeMode::Quotient => "quotient".into(),
        },
        basis: truncation.basis.iter().map(|w| w.to_string()).collect(),
        counts: truncation.counts(),
        witt: (1..=degree).map(|k| free::witt(spec.rank, k)).collect(),
        relations: truncation.relations.clone(),
        max_s,
        jacobiator_defect: defect,
        rank_profile: profile,
    });
    Ok(report)
}

fn run_geodesics(
    spec: &AlgebroidSpec,
    starts: &[foliation::Start],
    t_max: f64,
    h: f64,
    csv: Option<&std::path::Path>,
    common: &Common,
) -> Result<Report, CliError> {
    let (mut energy, mut orth) = (Vec::new(), Vec::new());
    let mut kinds = Vec::new();
    let mut exit_time: Option<f64> = None;
    for (x0, v0) in starts {
        let trace = foliation::geodesic_integrate(spec, x0, v0, t_max, h)?;
        if let Some(path) = csv {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            foliation::write_csv(spec, &trace, std::io::BufWriter::new(file))?;
        }
        if let Some(t) = trace.exit_time {
            exit_time = Some(exit_time.map_or(t, |e| e.min(t)));
        }
        energy.push(trace.energy_drift());
        let (kind, rep) = foliation::orthogonality_monitor(spec, &trace)?;
        kinds.push(kind);
        orth.push(rep.max_residual);
    }
    let at: Vec<Vec<f64>> = starts.iter().map(|(x, _)| x.clone()).collect();
    let energy_report = CheckReport::from_residuals("energy_drift", common.tol.unwrap_or(ENERGY_TOL), &at, &energy);
    let mut orth_report =
        CheckReport::from_residuals("orthogonality_drift", common.tol.unwrap_or(ORTHOGONALITY_TOL), &at, &orth);
    let raw = kinds.contains(&MonitorKind::RawSpan);
    if raw {
        orth_report = orth_report.with_note("raw span surrogate: frame Killing residual too large along some trace");
    }
    let max_energy_drift = energy.iter().cloned().fold(0.0, f64::max);
    let mut report = Report::new(common, vec![energy_report, orth_report]);
    report.points = starts.len();
    report.geodesic = Some(GeodesicSummary {
        traces: starts.len(),
        t_max,
        h,
        monitor: if raw { "raw_span".into() } else { "transported_frame".into() },
        max_energy_drift,
        exit_time,
    });
    Ok(report)
}
