//! Command-line surface for the phasedist library: configure an input state,
//! run one of the measurement schemes, and emit the resulting phase
//! distribution as plot-ready CSV or a self-describing JSON document.
//!
//! Conventions shared by every subcommand:
//! - complex amplitudes are written `re+imi` (e.g. `-4+0i`) or `mag@phase`
//!   (e.g. `2@1.57`); a bare number is real;
//! - an optional `--config file.json` supplies defaults, explicit flags
//!   override it, and no environment variable affects the numerics;
//! - output files are written atomically (temp file + rename), stdout is
//!   used when `--output` is omitted;
//! - exit code 0 on success, 1 for invalid configuration or I/O failure
//!   (with a machine-readable JSON error object on stderr), 2 for numerical
//!   non-convergence.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use phasedist::direct::{
    averaged_distribution, direct_strong_limit, direct_weak_limit, DataPolicy, NormalizationPolicy,
};
use phasedist::fock::{tm_phase_distribution, TwoModeFockState};
use phasedist::indirect::{indirect_general, indirect_weak_limit, IndirectConfig};
use phasedist::kernels::{CoherentEnsemble, CoherentPair};
use phasedist::montecarlo::empirical_phase_distribution;
use phasedist::numerics::{fringe_fit, FringeSummary, PhaseDistribution, PhaseGrid};

// ---------------------------------------------------------------------------
// Command definitions
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "phasedist",
    version,
    about = "Phase-difference distributions from photon count statistics",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    scheme: Scheme,
}

#[derive(Subcommand)]
enum Scheme {
    /// θ-averaged count-statistics distribution for coherent inputs
    Direct(DirectArgs),
    /// Closed-form strong-field limit of the direct scheme
    DirectStrong(StrongArgs),
    /// Weak-field closed-form fringe summary of the direct scheme (JSON)
    DirectWeak(DirectWeakArgs),
    /// Common-local-oscillator scheme via adaptive quadrature
    Indirect(IndirectArgs),
    /// Weak-field closed-form fringe summary of the indirect scheme (JSON)
    IndirectWeak(StrongArgs),
    /// θ-averaged distribution of a truncated coherent product in Fock space
    Fock(FockArgs),
    /// Monte Carlo emulation of the full measurement procedure
    Mc(McArgs),
    /// Strong-field direct limit vs indirect scheme, with distance report
    Compare(CompareArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// First input amplitude (`re+imi` or `mag@phase`)
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<String>,
    /// Second input amplitude (`re+imi` or `mag@phase`)
    #[arg(long, allow_hyphen_values = true)]
    beta2: Option<String>,
    /// Phase-grid nodes (even, at least 8)
    #[arg(long)]
    grid_points: Option<usize>,
    /// Output file; stdout when omitted (for `compare`: path prefix)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// JSON file supplying defaults for any field; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DirectArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Handling of the ambiguous zero-difference outcome
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Order of θ-averaging and per-θ normalization
    #[arg(long, value_enum)]
    normalization: Option<NormalizationArg>,
}

#[derive(Args)]
struct StrongArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DirectWeakArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Handling of the ambiguous zero-difference outcome
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
}

#[derive(Args)]
struct IndirectArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Quadrature refinement tolerance (L¹ change per doubling)
    #[arg(long)]
    tolerance: Option<f64>,
    /// Phase of the shared local oscillator (the result must not depend on it)
    #[arg(long, allow_hyphen_values = true)]
    lo_phase: Option<f64>,
}

#[derive(Args)]
struct FockArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Photon-number cutoff per mode for the truncated coherent product
    #[arg(long)]
    cutoff: Option<usize>,
    /// Handling of the ambiguous zero-difference outcome
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Order of θ-averaging and per-θ normalization
    #[arg(long, value_enum)]
    normalization: Option<NormalizationArg>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Shots per θ node
    #[arg(long)]
    shots: Option<u64>,
    /// RNG seed (the run is fully deterministic given this)
    #[arg(long)]
    seed: Option<u64>,
    /// Handling of the ambiguous zero-difference outcome
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Quadrature refinement tolerance for the indirect scheme
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    /// Drop zero-difference events and renormalize
    Discard,
    /// Spread their probability uniformly
    Spread,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizationArg {
    /// Average the raw θ-distributions, normalize once (default)
    AverageThenNormalize,
    /// Normalize per θ setting, then average
    NormalizeThenAverage,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum AppError {
    Config(String),
    Io(String),
    Numerical(String),
}

impl AppError {
    fn kind(&self) -> &'static str {
        match self {
            AppError::Config(_) => "invalid_config",
            AppError::Io(_) => "io",
            AppError::Numerical(_) => "non_convergence",
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Config(m) | AppError::Io(m) | AppError::Numerical(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Io(_) => 1,
            AppError::Numerical(_) => 2,
        }
    }
}

fn from_lib(err: phasedist::Error) -> AppError {
    match err {
        phasedist::Error::InvalidInput(_) | phasedist::Error::NoData(_) => {
            AppError::Config(err.to_string())
        }
        phasedist::Error::NonConvergence(_) | phasedist::Error::TailTooLarge { .. } => {
            AppError::Numerical(err.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ClapErrorKind::DisplayHelp
                    | ClapErrorKind::DisplayVersion
                    | ClapErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            print!("{err}");
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            return fail(&AppError::Config(err.to_string()));
        }
    };
    match run(cli.scheme) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => fail(&err),
    }
}

fn fail(err: &AppError) -> ExitCode {
    let object = serde_json::json!({ "error": err.message(), "kind": err.kind() });
    eprintln!("{object}");
    ExitCode::from(err.exit_code())
}

// ---------------------------------------------------------------------------
// Config file merging
// ---------------------------------------------------------------------------

/// Optional defaults from `--config`; any explicit flag wins over these.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scheme: Option<String>,
    beta1: Option<String>,
    beta2: Option<String>,
    policy: Option<String>,
    normalization: Option<String>,
    grid_points: Option<usize>,
    tolerance: Option<f64>,
    lo_phase: Option<f64>,
    seed: Option<u64>,
    shots: Option<u64>,
    cutoff: Option<usize>,
    output: Option<PathBuf>,
    format: Option<String>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, AppError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| AppError::Config(format!("malformed config {}: {e}", path.display())))
    }

    fn present_fields(&self) -> Vec<&'static str> {
        let mut fields = Vec::new();
        macro_rules! record {
            ($($name:ident),*) => {
                $(if self.$name.is_some() { fields.push(stringify!($name)); })*
            };
        }
        record!(
            beta1,
            beta2,
            policy,
            normalization,
            grid_points,
            tolerance,
            lo_phase,
            seed,
            shots,
            cutoff,
            output,
            format
        );
        fields
    }

    /// The per-scheme field consistency demanded by the config contract:
    /// a config file may only set fields the chosen scheme understands.
    fn ensure_applicable(&self, scheme: &str, allowed: &[&str]) -> Result<(), AppError> {
        if let Some(declared) = &self.scheme {
            if declared != scheme {
                return Err(AppError::Config(format!(
                    "config file is for scheme `{declared}`, but `{scheme}` was invoked"
                )));
            }
        }
        for field in self.present_fields() {
            if !allowed.contains(&field) {
                return Err(AppError::Config(format!(
                    "config field `{field}` does not apply to scheme `{scheme}`"
                )));
            }
        }
        Ok(())
    }

    fn policy(&self) -> Result<Option<PolicyArg>, AppError> {
        self.policy
            .as_deref()
            .map(|s| match s {
                "discard" => Ok(PolicyArg::Discard),
                "spread" => Ok(PolicyArg::Spread),
                other => Err(AppError::Config(format!(
                    "unknown policy `{other}` (expected `discard` or `spread`)"
                ))),
            })
            .transpose()
    }

    fn normalization(&self) -> Result<Option<NormalizationArg>, AppError> {
        self.normalization
            .as_deref()
            .map(|s| match s {
                "average-then-normalize" => Ok(NormalizationArg::AverageThenNormalize),
                "normalize-then-average" => Ok(NormalizationArg::NormalizeThenAverage),
                other => Err(AppError::Config(format!(
                    "unknown normalization `{other}` (expected \
                     `average-then-normalize` or `normalize-then-average`)"
                ))),
            })
            .transpose()
    }

    fn format(&self) -> Result<Option<FormatArg>, AppError> {
        self.format
            .as_deref()
            .map(|s| match s {
                "csv" => Ok(FormatArg::Csv),
                "json" => Ok(FormatArg::Json),
                other => Err(AppError::Config(format!(
                    "unknown format `{other}` (expected `csv` or `json`)"
                ))),
            })
            .transpose()
    }
}

// ---------------------------------------------------------------------------
// Resolved configuration and provenance echo
// ---------------------------------------------------------------------------

/// Everything that determined the run, echoed into JSON outputs so a result
/// file is reproducible from its own provenance block.
#[derive(Serialize)]
struct ConfigEcho {
    scheme: &'static str,
    /// Canonical (re, im) of the parsed amplitude.
    beta1: [f64; 2],
    beta2: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    policy: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lo_phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff: Option<usize>,
    format: &'static str,
}

#[derive(Serialize)]
struct Provenance {
    library_version: &'static str,
    config: ConfigEcho,
}

impl Provenance {
    fn new(config: ConfigEcho) -> Self {
        Self {
            library_version: env!("CARGO_PKG_VERSION"),
            config,
        }
    }
}

#[derive(Serialize)]
struct FringeDoc {
    mean_offset: f64,
    amplitude: f64,
    peak_phase: f64,
}

impl From<FringeSummary> for FringeDoc {
    fn from(f: FringeSummary) -> Self {
        Self {
            mean_offset: f.mean_offset,
            amplitude: f.amplitude,
            peak_phase: f.peak_phase,
        }
    }
}

#[derive(Serialize)]
struct DistributionDoc {
    grid_points: usize,
    phi: Vec<f64>,
    density: Vec<f64>,
    fringe: FringeDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    discarded_fraction: Option<f64>,
    provenance: Provenance,
}

#[derive(Serialize)]
struct SummaryDoc {
    fringe: FringeDoc,
    provenance: Provenance,
}

#[derive(Serialize)]
struct CompareReport {
    l1_distance: f64,
    linf_distance: f64,
    direct_strong_csv: String,
    indirect_csv: String,
    provenance: Provenance,
}

// ---------------------------------------------------------------------------
// Value parsing and formatting
// ---------------------------------------------------------------------------

/// Parses `mag@phase_rad`, `re+imi`, a bare real, or a bare imaginary
/// (`0.4i`); stored canonically as (re, im).
fn parse_complex(text: &str) -> Result<Complex64, AppError> {
    let bad = |why: &str| {
        AppError::Config(format!(
            "cannot parse complex amplitude `{text}` ({why}); \
             use `re+imi` like -4+0i or `mag@phase` like 2@1.57"
        ))
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(bad("empty"));
    }
    let value = if let Some((mag, phase)) = s.split_once('@') {
        let mag: f64 = mag.trim().parse().map_err(|_| bad("bad magnitude"))?;
        let phase: f64 = phase.trim().parse().map_err(|_| bad("bad phase"))?;
        Complex64::from_polar(mag, phase)
    } else if let Some(body) = s.strip_suffix(['i', 'I']) {
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            if matches!(bytes[idx], b'+' | b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
                break;
            }
        }
        let imaginary_part = |t: &str| -> Result<f64, AppError> {
            match t {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => t.parse().map_err(|_| bad("bad imaginary part")),
            }
        };
        match split {
            Some(idx) => {
                let re: f64 = body[..idx].parse().map_err(|_| bad("bad real part"))?;
                Complex64::new(re, imaginary_part(&body[idx..])?)
            }
            None => Complex64::new(0.0, imaginary_part(body)?),
        }
    } else {
        Complex64::new(s.parse().map_err(|_| bad("bad real number"))?, 0.0)
    };
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(bad("not finite"));
    }
    Ok(value)
}

/// Plain-decimal rendering with a fixed number of significant digits,
/// locale-independent (e.g. 1/2π at 15 digits is `0.159154943091895`).
fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let formatted = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = formatted
        .split_once('e')
        .expect("float e-format always contains an exponent");
    let exponent: i32 = exponent.parse().expect("float exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits_only: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = 1 + exponent;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..-point {
            out.push('0');
        }
        out.push_str(&digits_only);
    } else if point as usize >= digits_only.len() {
        out.push_str(&digits_only);
        for _ in 0..(point as usize - digits_only.len()) {
            out.push('0');
        }
    } else {
        out.push_str(&digits_only[..point as usize]);
        out.push('.');
        out.push_str(&digits_only[point as usize..]);
    }
    out
}

/// Two-column CSV: `phi,density`, φ to 12 significant digits, density to 15,
/// newline-terminated rows.
fn csv_document(dist: &PhaseDistribution) -> String {
    let mut out = String::from("phi,density\n");
    for (k, &density) in dist.density().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{}",
            significant(dist.grid().phi(k), 12),
            significant(density, 15)
        );
    }
    out
}

fn json_document<T: Serialize>(doc: &T) -> Result<String, AppError> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| AppError::Io(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes via a temporary file in the destination directory plus an atomic
/// rename, so readers never observe a partial artifact.
fn write_atomic(path: &Path, contents: &str) -> Result<(), AppError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| AppError::Io(format!("cannot create temp file in {}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| AppError::Io(format!("cannot persist {}: {e}", path.display())))?;
    Ok(())
}

fn emit(target: Option<&Path>, contents: &str) -> Result<(), AppError> {
    match target {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Shared resolution helpers
// ---------------------------------------------------------------------------

struct Resolved {
    pair: CoherentPair,
    beta1: Complex64,
    beta2: Complex64,
    grid: PhaseGrid,
    output: Option<PathBuf>,
    format: FormatArg,
}

fn resolve_common(
    scheme: &'static str,
    common: &CommonArgs,
    file: &FileConfig,
    default_format: FormatArg,
) -> Result<Resolved, AppError> {
    let beta1_text = common
        .beta1
        .clone()
        .or_else(|| file.beta1.clone())
        .ok_or_else(|| AppError::Config(format!("`{scheme}` requires --beta1")))?;
    let beta2_text = common
        .beta2
        .clone()
        .or_else(|| file.beta2.clone())
        .ok_or_else(|| AppError::Config(format!("`{scheme}` requires --beta2")))?;
    let beta1 = parse_complex(&beta1_text)?;
    let beta2 = parse_complex(&beta2_text)?;
    let pair = CoherentPair::new(beta1, beta2, 0.0).map_err(from_lib)?;
    let grid_points = common
        .grid_points
        .or(file.grid_points)
        .unwrap_or(PhaseGrid::DEFAULT_POINTS);
    let grid = PhaseGrid::new(grid_points).map_err(from_lib)?;
    let output = common.output.clone().or_else(|| file.output.clone());
    let format = match common.format {
        Some(f) => f,
        None => file.format()?.unwrap_or(default_format),
    };
    Ok(Resolved {
        pair,
        beta1,
        beta2,
        grid,
        output,
        format,
    })
}

fn resolve_policy(
    flag: Option<PolicyArg>,
    file: &FileConfig,
) -> Result<(DataPolicy, &'static str), AppError> {
    let arg = match flag {
        Some(p) => p,
        None => file.policy()?.unwrap_or(PolicyArg::Discard),
    };
    Ok(match arg {
        PolicyArg::Discard => (DataPolicy::DiscardOrigin, "discard"),
        PolicyArg::Spread => (DataPolicy::UniformSpread, "spread"),
    })
}

fn resolve_normalization(
    flag: Option<NormalizationArg>,
    file: &FileConfig,
) -> Result<(NormalizationPolicy, &'static str), AppError> {
    let arg = match flag {
        Some(n) => n,
        None => file
            .normalization()?
            .unwrap_or(NormalizationArg::AverageThenNormalize),
    };
    Ok(match arg {
        NormalizationArg::AverageThenNormalize => (
            NormalizationPolicy::AverageThenNormalize,
            "average-then-normalize",
        ),
        NormalizationArg::NormalizeThenAverage => (
            NormalizationPolicy::NormalizeThenAverage,
            "normalize-then-average",
        ),
    })
}

fn format_name(format: FormatArg) -> &'static str {
    match format {
        FormatArg::Csv => "csv",
        FormatArg::Json => "json",
    }
}

fn base_echo(scheme: &'static str, resolved: &Resolved) -> ConfigEcho {
    ConfigEcho {
        scheme,
        beta1: [resolved.beta1.re, resolved.beta1.im],
        beta2: [resolved.beta2.re, resolved.beta2.im],
        policy: None,
        normalization: None,
        grid_points: Some(resolved.grid.len()),
        tolerance: None,
        lo_phase: None,
        seed: None,
        shots: None,
        cutoff: None,
        format: format_name(resolved.format),
    }
}

/// Emits a distribution in the chosen format, with fringe summary and
/// provenance attached in JSON mode.
fn emit_distribution(
    resolved: &Resolved,
    dist: &PhaseDistribution,
    discarded_fraction: Option<f64>,
    echo: ConfigEcho,
) -> Result<(), AppError> {
    let contents = match resolved.format {
        FormatArg::Csv => csv_document(dist),
        FormatArg::Json => {
            let doc = DistributionDoc {
                grid_points: dist.grid().len(),
                phi: dist.grid().phis().collect(),
                density: dist.density().to_vec(),
                fringe: fringe_fit(dist).into(),
                discarded_fraction,
                provenance: Provenance::new(echo),
            };
            json_document(&doc)?
        }
    };
    emit(resolved.output.as_deref(), &contents)
}

/// Emits a closed-form fringe summary; these carry no grid, so CSV has
/// nothing meaningful to hold.
fn emit_summary(
    resolved: &Resolved,
    fringe: FringeSummary,
    echo: ConfigEcho,
) -> Result<(), AppError> {
    if resolved.format == FormatArg::Csv {
        return Err(AppError::Config(
            "closed-form fringe summaries are JSON-only; drop --format csv".into(),
        ));
    }
    let doc = SummaryDoc {
        fringe: fringe.into(),
        provenance: Provenance::new(echo),
    };
    emit(resolved.output.as_deref(), &json_document(&doc)?)
}

// ---------------------------------------------------------------------------
// Scheme execution
// ---------------------------------------------------------------------------

const COMMON_FIELDS: &[&str] = &["beta1", "beta2", "grid_points", "output", "format"];

fn with_common(extra: &[&'static str]) -> Vec<&'static str> {
    let mut fields = COMMON_FIELDS.to_vec();
    fields.extend_from_slice(extra);
    fields
}

fn run(scheme: Scheme) -> Result<(), AppError> {
    match scheme {
        Scheme::Direct(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            file.ensure_applicable("direct", &with_common(&["policy", "normalization"]))?;
            let resolved = resolve_common("direct", &args.common, &file, FormatArg::Csv)?;
            let (policy, policy_name) = resolve_policy(args.policy, &file)?;
            let (norm, norm_name) = resolve_normalization(args.normalization, &file)?;
            let ensemble = CoherentEnsemble::pure(resolved.pair);
            let dist =
                averaged_distribution(&ensemble, policy, norm, resolved.grid).map_err(from_lib)?;
            let mut echo = base_echo("direct", &resolved);
            echo.policy = Some(policy_name);
            echo.normalization = Some(norm_name);
            emit_distribution(&resolved, &dist, None, echo)
        }
        Scheme::DirectStrong(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            file.ensure_applicable("direct-strong", &with_common(&[]))?;
            let resolved = resolve_common("direct-strong", &args.common, &file, FormatArg::Csv)?;
            let ensemble = CoherentEnsemble::pure(resolved.pair);
            let dist = direct_strong_limit(&ensemble, resolved.grid);
            let echo = base_echo("direct-strong", &resolved);
            emit_distribution(&resolved, &dist, None, echo)
        }
        Scheme::DirectWeak(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            file.ensure_applicable("direct-weak", &with_common(&["policy"]))?;
            let resolved = resolve_common("direct-weak", &args.common, &file, FormatArg::Json)?;
            let (policy, policy_name) = resolve_policy(args.policy, &file)?;
            let fringe = direct_weak_limit(&resolved.pair, policy).map_err(from_lib)?;
            let mut echo = base_echo("direct-weak", &resolved);
            echo.policy = Some(policy_name);
            echo.grid_points = None;
            emit_summary(&resolved, fringe, echo)
        }
        Scheme::Indirect(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            file.ensure_applicable("indirect", &with_common(&["tolerance", "lo_phase"]))?;
            let resolved = resolve_common("indirect", &args.common, &file, FormatArg::Csv)?;
            let tolerance = args.tolerance.or(file.tolerance).unwrap_or(1e-8);
            let lo_phase = args.lo_phase.or(file.lo_phase).unwrap_or(0.0);
            let config =
                IndirectConfig::new(lo_phase, resolved.grid, tolerance).map_err(from_lib)?;
            let ensemble = CoherentEnsemble::pure(resolved.pair);
            let dist = indirect_general(&ensemble, &config).map_err(from_lib)?;
            let mut echo = base_echo("indirect", &resolved);
            echo.tolerance = Some(tolerance);
            echo.lo_phase = Some(lo_phase);
            emit_distribution(&resolved, &dist, None, echo)
        }
        Scheme::IndirectWeak(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            file.ensure_applicable("indirect-weak", &with_common(&[]))?;
            let resolved = resolve_common("indirect-weak", &args.common, &file, FormatArg::Json)?;
            let fringe = indirect_weak_limit(&resolved.pair).map_err(from_lib)?;
            let mut echo = base_echo("indirect-weak", &resolved);
            echo.grid_points = None;
            emit_summary(&resolved, fringe, echo)
        }
        Scheme::Fock(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            file.ensure_applicable("fock", &with_common(&["cutoff", "policy", "normalization"]))?;
            let resolved = resolve_common("fock", &args.common, &file, FormatArg::Csv)?;
            let cutoff = args
                .cutoff
                .or(file.cutoff)
                .ok_or_else(|| AppError::Config("`fock` requires --cutoff".into()))?;
            let (policy, policy_name) = resolve_policy(args.policy, &file)?;
            let (norm, norm_name) = resolve_normalization(args.normalization, &file)?;
            let state = TwoModeFockState::coherent_product(resolved.beta1, resolved.beta2, cutoff)
                .map_err(from_lib)?;
            let dist =
                tm_phase_distribution(&state, policy, norm, resolved.grid).map_err(from_lib)?;
            let mut echo = base_echo("fock", &resolved);
            echo.cutoff = Some(cutoff);
            echo.policy = Some(policy_name);
            echo.normalization = Some(norm_name);
            emit_distribution(&resolved, &dist, None, echo)
        }
        Scheme::Mc(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            file.ensure_applicable("mc", &with_common(&["shots", "seed", "policy"]))?;
            let resolved = resolve_common("mc", &args.common, &file, FormatArg::Csv)?;
            let shots = args
                .shots
                .or(file.shots)
                .ok_or_else(|| AppError::Config("`mc` requires --shots".into()))?;
            if shots == 0 {
                return Err(AppError::Config("--shots must be at least 1".into()));
            }
            let seed = args.seed.or(file.seed).unwrap_or(0);
            let (policy, policy_name) = resolve_policy(args.policy, &file)?;
            let phase =
                empirical_phase_distribution(&resolved.pair, policy, shots, seed, resolved.grid)
                    .map_err(from_lib)?;
            let mut echo = base_echo("mc", &resolved);
            echo.policy = Some(policy_name);
            echo.shots = Some(shots);
            echo.seed = Some(seed);
            emit_distribution(
                &resolved,
                phase.distribution(),
                Some(phase.discarded_fraction()),
                echo,
            )
        }
        Scheme::Compare(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            file.ensure_applicable("compare", &with_common(&["tolerance"]))?;
            let resolved = resolve_common("compare", &args.common, &file, FormatArg::Json)?;
            let tolerance = args.tolerance.or(file.tolerance).unwrap_or(1e-8);
            let ensemble = CoherentEnsemble::pure(resolved.pair);
            let strong = direct_strong_limit(&ensemble, resolved.grid);
            let config = IndirectConfig::new(0.0, resolved.grid, tolerance).map_err(from_lib)?;
            let indirect = indirect_general(&ensemble, &config).map_err(from_lib)?;

            let prefix = resolved
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from("compare"));
            let with_suffix = |suffix: &str| -> PathBuf {
                let mut name = prefix.as_os_str().to_os_string();
                name.push(suffix);
                PathBuf::from(name)
            };
            let strong_path = with_suffix("-direct-strong.csv");
            let indirect_path = with_suffix("-indirect.csv");
            let report_path = with_suffix("-report.json");
            write_atomic(&strong_path, &csv_document(&strong))?;
            write_atomic(&indirect_path, &csv_document(&indirect))?;

            let mut echo = base_echo("compare", &resolved);
            echo.tolerance = Some(tolerance);
            let report = CompareReport {
                l1_distance: strong.l1_distance(&indirect).map_err(from_lib)?,
                linf_distance: strong.linf_distance(&indirect).map_err(from_lib)?,
                direct_strong_csv: strong_path.display().to_string(),
                indirect_csv: indirect_path.display().to_string(),
                provenance: Provenance::new(echo),
            };
            write_atomic(&report_path, &json_document(&report)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing_forms() {
        let close =
            |a: Complex64, re: f64, im: f64| (a.re - re).abs() < 1e-15 && (a.im - im).abs() < 1e-15;
        assert!(close(parse_complex("1+0i").unwrap(), 1.0, 0.0));
        assert!(close(parse_complex("-4+0i").unwrap(), -4.0, 0.0));
        assert!(close(parse_complex("0.3-0.25i").unwrap(), 0.3, -0.25));
        assert!(close(parse_complex("1e-2+2e-3i").unwrap(), 0.01, 0.002));
        assert!(close(parse_complex("0.5i").unwrap(), 0.0, 0.5));
        assert!(close(parse_complex("-i").unwrap(), 0.0, -1.0));
        assert!(close(parse_complex("0.1").unwrap(), 0.1, 0.0));
        let polar = parse_complex("2@1.5707963267948966").unwrap();
        assert!(polar.re.abs() < 1e-15 && (polar.im - 2.0).abs() < 1e-15);
        assert!(parse_complex("nonsense").is_err());
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn significant_digit_rendering() {
        assert_eq!(
            significant(1.0 / phasedist::numerics::TAU, 15),
            "0.159154943091895"
        );
        assert_eq!(significant(0.0, 12), "0");
        assert_eq!(significant(0.1234567890123456, 12), "0.123456789012");
        assert_eq!(significant(4.938271604938, 12), "4.93827160494");
        assert_eq!(significant(-0.5, 15), "-0.500000000000000");
        assert_eq!(significant(1234.5, 6), "1234.50");
        assert_eq!(significant(1.5e-4, 6), "0.000150000");
    }

    #[test]
    fn json_round_trip_preserves_densities_bit_for_bit() {
        use phasedist::direct::{averaged_distribution, DataPolicy, NormalizationPolicy};
        use phasedist::kernels::{CoherentEnsemble, CoherentPair};

        let pair =
            CoherentPair::new(Complex64::new(0.6, 0.0), Complex64::new(0.4, 0.3), 0.0).unwrap();
        let dist = averaged_distribution(
            &CoherentEnsemble::pure(pair),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            PhaseGrid::new(64).unwrap(),
        )
        .unwrap();
        let doc = DistributionDoc {
            grid_points: dist.grid().len(),
            phi: dist.grid().phis().collect(),
            density: dist.density().to_vec(),
            fringe: fringe_fit(&dist).into(),
            discarded_fraction: None,
            provenance: Provenance::new(ConfigEcho {
                scheme: "direct",
                beta1: [0.6, 0.0],
                beta2: [0.4, 0.3],
                policy: Some("discard"),
                normalization: Some("average-then-normalize"),
                grid_points: Some(64),
                tolerance: None,
                lo_phase: None,
                seed: None,
                shots: None,
                cutoff: None,
                format: "json",
            }),
        };
        let text = json_document(&doc).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        for (value, &original) in parsed["density"]
            .as_array()
            .unwrap()
            .iter()
            .zip(dist.density())
        {
            assert_eq!(value.as_f64().unwrap().to_bits(), original.to_bits());
        }
        for (value, original) in parsed["phi"]
            .as_array()
            .unwrap()
            .iter()
            .zip(dist.grid().phis())
        {
            assert_eq!(value.as_f64().unwrap().to_bits(), original.to_bits());
        }
    }

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(
            from_lib(phasedist::Error::InvalidInput("x".into())).exit_code(),
            1
        );
        assert_eq!(
            from_lib(phasedist::Error::NoData("x".into())).exit_code(),
            1
        );
        assert_eq!(
            from_lib(phasedist::Error::NonConvergence("x".into())).exit_code(),
            2
        );
        assert_eq!(
            from_lib(phasedist::Error::TailTooLarge {
                tail: 1e-3,
                tolerance: 1e-9
            })
            .exit_code(),
            2
        );
        assert_eq!(AppError::Io("x".into()).exit_code(), 1);
    }
}
