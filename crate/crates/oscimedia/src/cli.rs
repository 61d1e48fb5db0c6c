//! Batch front end: config ingestion, figure presets, sweeps, and CSV or
//! JSON emission. The binary is a thin shim over [`run`]; everything here
//! is callable from tests and examples.
//!
//! Precedence for settings: built-in defaults, then the config file, then
//! the preset parameters, then command-line flags.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::floquet::{exponent_scan, resonance_region};
use crate::mathieu::{
    hill_evolution, q_reconstruction, resonance_line, stability_chart, StabilityClass,
};
use crate::medium::{MediumSpec, ModeSpec, MotionProfile};
use crate::photons::photon_density_series;
use crate::propagation::{evolve_f12, AmplitudePair, EvolveOptions};
use crate::{Error, Result};

/// What to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Chart,
    Scan,
    Evolve,
    Photons,
    Compare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Chart => "chart",
            Command::Scan => "scan",
            Command::Evolve => "evolve",
            Command::Photons => "photons",
            Command::Compare => "compare",
        }
    }

    fn from_name(name: &str) -> Result<Command> {
        match name {
            "chart" => Ok(Command::Chart),
            "scan" => Ok(Command::Scan),
            "evolve" => Ok(Command::Evolve),
            "photons" => Ok(Command::Photons),
            "compare" => Ok(Command::Compare),
            other => Err(Error::Config(format!(
                "unknown command {other:?} (expected chart, scan, evolve, photons or compare)"
            ))),
        }
    }
}

/// Figure presets with the reference parameters baked in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6b,
    Fig6c,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6b => "fig6b",
            Preset::Fig6c => "fig6c",
        }
    }

    fn from_name(name: &str) -> Result<Preset> {
        match name {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            "fig6b" => Ok(Preset::Fig6b),
            "fig6c" => Ok(Preset::Fig6c),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (expected fig1, fig2, fig3, fig4, fig5, fig6b or fig6c)"
            ))),
        }
    }

    /// The command a preset belongs to; running it under another command is
    /// a configuration error.
    pub fn command(&self) -> Command {
        match self {
            Preset::Fig1 => Command::Chart,
            Preset::Fig2 => Command::Compare,
            Preset::Fig3 | Preset::Fig4 | Preset::Fig5 => Command::Scan,
            Preset::Fig6b | Preset::Fig6c => Command::Photons,
        }
    }

    fn apply(&self, cfg: &mut RunConfig) {
        cfg.n = 2.0;
        cfg.b = 0.3;
        cfg.theta = FRAC_PI_2;
        cfg.rho = None;
        cfg.rho_range = None;
        match self {
            // The chart window and default 256 x 256 resolution already
            // match the reference figure; numerics stay user-tunable.
            Preset::Fig1 => {}
            Preset::Fig2 => {
                cfg.rho = Some(1.016);
                cfg.periods = 50;
            }
            Preset::Fig3 => cfg.rho_range = Some((0.5, 2.5, 401)),
            // fig4 and fig5 emit several tables; their windows are set in
            // the executor.
            Preset::Fig4 | Preset::Fig5 => {}
            Preset::Fig6b => {
                cfg.rho = Some(1.55);
                cfg.periods = 100;
            }
            Preset::Fig6c => {
                cfg.rho = Some(1.016);
                cfg.periods = 100;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    fn from_name(name: &str) -> Result<OutputFormat> {
        match name {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format {other:?} (expected csv or json)"
            ))),
        }
    }

    fn extension(&self) -> &'static str {
        self.name()
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<Preset>,
    pub n: f64,
    pub b: f64,
    pub theta: f64,
    pub rho: Option<f64>,
    /// (lo, hi, sample count), inclusive of both ends.
    pub rho_range: Option<(f64, f64, usize)>,
    pub periods: u32,
    pub order: u32,
    pub tolerance: f64,
    pub samples_per_period: usize,
    pub resolution: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    fn defaults(command: Command) -> RunConfig {
        RunConfig {
            command,
            preset: None,
            n: 2.0,
            b: 0.3,
            theta: FRAC_PI_2,
            rho: None,
            rho_range: None,
            periods: 100,
            order: 1,
            tolerance: 1e-10,
            samples_per_period: 64,
            resolution: 256,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

/// One emitted table. `name` tags the file suffix when a run produces
/// several tables.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub name: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    fn new(name: Option<&str>, columns: &[&str]) -> ResultTable {
        ResultTable {
            name: name.map(str::to_string),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "oscimedia",
    version,
    about = "Modes of an oscillating medium: resonance charts, Floquet scans, photon production"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArg,
}

#[derive(Subcommand, Debug)]
enum CommandArg {
    /// Stability chart of the reduced oscillator over (a, q).
    Chart(CommonArgs),
    /// Characteristic exponent over a range of mode frequencies.
    Scan(CommonArgs),
    /// Amplitude pair evolution under the harmonic drive.
    Evolve(CommonArgs),
    /// Photon number density across an oscillation window.
    Photons(CommonArgs),
    /// Full evolution against the reduced-oscillator reconstruction.
    Compare(CommonArgs),
}

impl CommandArg {
    fn split(&self) -> (Command, &CommonArgs) {
        match self {
            CommandArg::Chart(a) => (Command::Chart, a),
            CommandArg::Scan(a) => (Command::Scan, a),
            CommandArg::Evolve(a) => (Command::Evolve, a),
            CommandArg::Photons(a) => (Command::Photons, a),
            CommandArg::Compare(a) => (Command::Compare, a),
        }
    }
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Figure preset: fig1, fig2, fig3, fig4, fig5, fig6b, fig6c.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output file; stdout when absent. Multi-table runs add suffixes.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
    /// Refractive index of the medium at rest.
    #[arg(long)]
    n: Option<f64>,
    /// Velocity amplitude in units of c.
    #[arg(long)]
    b: Option<f64>,
    /// Angle between the wave vector and the motion, radians.
    #[arg(long)]
    theta: Option<f64>,
    /// Mode frequency over oscillation frequency.
    #[arg(long, conflicts_with = "rho_range")]
    rho: Option<f64>,
    /// Inclusive frequency sweep: lower bound, upper bound, sample count.
    #[arg(long = "rho-range", num_args = 3, value_names = ["LO", "HI", "COUNT"])]
    rho_range: Option<Vec<f64>>,
    /// Oscillation periods to cover.
    #[arg(long)]
    periods: Option<u32>,
    /// Integrator tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    #[serde(default)]
    physics: PhysicsSection,
    #[serde(default)]
    numerics: NumericsSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhysicsSection {
    n: Option<f64>,
    b: Option<f64>,
    theta: Option<f64>,
    rho: Option<f64>,
    rho_range: Option<RhoRangeSection>,
    periods: Option<u32>,
    order: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RhoRangeSection {
    lo: f64,
    hi: f64,
    count: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumericsSection {
    tolerance: Option<f64>,
    samples_per_period: Option<usize>,
    resolution: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    path: Option<PathBuf>,
    format: Option<String>,
}

/// Entry point for the binary: parse, run, map errors to exit codes.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parses `args` (including the program name) and runs the request.
/// Returns the process exit code: 0 success, 1 validation, 2 numerical,
/// 3 input/output.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let (command, common) = cli.command.split();
    let outcome = resolve(command, common).and_then(|cfg| {
        let tables = execute(&cfg, common)?;
        emit(&tables)
    });
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Builds the effective config: defaults, then file, then preset, then
/// flags.
fn resolve(command: Command, args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::defaults(command);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let file: FileConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        apply_file(&mut cfg, &file)?;
    }
    if let Some(name) = &args.preset {
        let preset = Preset::from_name(name)?;
        if preset.command() != cfg.command {
            return Err(Error::Config(format!(
                "preset {} belongs to the {} command, not {}",
                preset.name(),
                preset.command().name(),
                cfg.command.name()
            )));
        }
        preset.apply(&mut cfg);
        cfg.preset = Some(preset);
    }
    apply_flags(&mut cfg, args)?;
    validate(&cfg)?;
    Ok(cfg)
}

fn apply_file(cfg: &mut RunConfig, file: &FileConfig) -> Result<()> {
    if let Some(name) = &file.command {
        let file_command = Command::from_name(name)?;
        if file_command != cfg.command {
            return Err(Error::Config(format!(
                "config file sets command = {:?} but the command line says {:?}",
                file_command.name(),
                cfg.command.name()
            )));
        }
    }
    let p = &file.physics;
    if p.rho.is_some() && p.rho_range.is_some() {
        return Err(Error::Config(
            "set either physics.rho or physics.rho_range, not both".into(),
        ));
    }
    if let Some(n) = p.n {
        cfg.n = n;
    }
    if let Some(b) = p.b {
        cfg.b = b;
    }
    if let Some(theta) = p.theta {
        cfg.theta = theta;
    }
    if let Some(rho) = p.rho {
        cfg.rho = Some(rho);
        cfg.rho_range = None;
    }
    if let Some(r) = &p.rho_range {
        cfg.rho_range = Some((r.lo, r.hi, r.count));
        cfg.rho = None;
    }
    if let Some(periods) = p.periods {
        cfg.periods = periods;
    }
    if let Some(order) = p.order {
        cfg.order = order;
    }
    if let Some(tolerance) = file.numerics.tolerance {
        cfg.tolerance = tolerance;
    }
    if let Some(spp) = file.numerics.samples_per_period {
        cfg.samples_per_period = spp;
    }
    if let Some(resolution) = file.numerics.resolution {
        cfg.resolution = resolution;
    }
    if let Some(path) = &file.output.path {
        cfg.out = Some(path.clone());
    }
    if let Some(format) = &file.output.format {
        cfg.format = OutputFormat::from_name(format)?;
    }
    Ok(())
}

fn apply_flags(cfg: &mut RunConfig, args: &CommonArgs) -> Result<()> {
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(b) = args.b {
        cfg.b = b;
    }
    if let Some(theta) = args.theta {
        cfg.theta = theta;
    }
    if let Some(rho) = args.rho {
        cfg.rho = Some(rho);
        cfg.rho_range = None;
    }
    if let Some(raw) = &args.rho_range {
        cfg.rho_range = Some(parse_rho_range(raw)?);
        cfg.rho = None;
    }
    if let Some(periods) = args.periods {
        cfg.periods = periods;
    }
    if let Some(tolerance) = args.tolerance {
        cfg.tolerance = tolerance;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(format) = &args.format {
        cfg.format = OutputFormat::from_name(format)?;
    }
    Ok(())
}

fn parse_rho_range(raw: &[f64]) -> Result<(f64, f64, usize)> {
    if raw.len() != 3 {
        return Err(Error::Config(
            "--rho-range takes exactly three values: LO HI COUNT".into(),
        ));
    }
    let count = raw[2];
    if !(count.is_finite() && count > 0.0 && count.fract() == 0.0 && count <= 1e9) {
        return Err(Error::Config(format!(
            "rho_range count must be a positive integer, got {count}"
        )));
    }
    Ok((raw[0], raw[1], count as usize))
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let medium = MediumSpec::new(cfg.n)?;
    MotionProfile::Harmonic { b: cfg.b }.validate(medium)?;
    // Validates theta on its own when no single rho is requested.
    ModeSpec::new(cfg.rho.unwrap_or(1.0), cfg.theta)?;
    if let Some((lo, hi, count)) = cfg.rho_range {
        ModeSpec::new(lo, cfg.theta)?;
        ModeSpec::new(hi, cfg.theta)?;
        if hi <= lo {
            return Err(Error::Config(format!(
                "rho_range upper bound must exceed the lower bound, got [{lo}, {hi}]"
            )));
        }
        if count < 2 {
            return Err(Error::Config(format!(
                "rho_range needs at least two samples, got {count}"
            )));
        }
    }
    if !(cfg.tolerance.is_finite() && cfg.tolerance > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {}",
            cfg.tolerance
        )));
    }
    if cfg.periods == 0 {
        return Err(Error::Config("periods must be at least 1".into()));
    }
    if cfg.order == 0 {
        return Err(Error::Config("order must be at least 1".into()));
    }
    let multi_window = matches!(cfg.preset, Some(Preset::Fig4 | Preset::Fig5));
    match cfg.command {
        Command::Scan => {
            if cfg.rho_range.is_none() && !multi_window {
                return Err(Error::Config(
                    "scan needs a frequency window: --rho-range LO HI COUNT or physics.rho_range"
                        .into(),
                ));
            }
        }
        Command::Evolve | Command::Photons | Command::Compare => {
            if cfg.rho.is_none() {
                return Err(Error::Config(format!(
                    "{} needs a single mode frequency: --rho or physics.rho",
                    cfg.command.name()
                )));
            }
        }
        Command::Chart => {}
    }
    Ok(())
}

/// Runs the resolved config and returns one or more tables, each with the
/// effective config it was computed under.
fn execute(cfg: &RunConfig, args: &CommonArgs) -> Result<Vec<(RunConfig, ResultTable)>> {
    let medium = MediumSpec::new(cfg.n)?;
    match cfg.preset {
        Some(Preset::Fig1) => {
            let grid = chart_table(cfg, None)?;
            let line = line_table(cfg, medium)?;
            Ok(vec![(cfg.clone(), grid), (cfg.clone(), line)])
        }
        Some(Preset::Fig4) if args.rho_range.is_none() => {
            let windows = [("m1", (1.000, 1.035, 281)), ("m2", (2.0340, 2.0368, 281))];
            windows
                .iter()
                .map(|(name, window)| {
                    let mut sub = cfg.clone();
                    sub.rho_range = Some(*window);
                    let table = scan_table(&sub, medium, Some(name))?;
                    Ok((sub, table))
                })
                .collect()
        }
        Some(Preset::Fig5) => {
            let bs: Vec<f64> = match args.b {
                Some(b) => vec![b],
                None => vec![0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            };
            bs.iter()
                .map(|&b| {
                    let region = resonance_region(medium, b, cfg.theta, cfg.order, cfg.tolerance)?;
                    let pad = 0.25 * (region.rho_hi - region.rho_lo);
                    let mut sub = cfg.clone();
                    sub.b = b;
                    sub.rho_range = Some((region.rho_lo - pad, region.rho_hi + pad, 161));
                    let name = format!("b{b:.2}");
                    let table = scan_table(&sub, medium, Some(&name))?;
                    Ok((sub, table))
                })
                .collect()
        }
        _ => {
            let table = match cfg.command {
                Command::Chart => chart_table(cfg, None)?,
                Command::Scan => scan_table(cfg, medium, None)?,
                Command::Evolve => evolve_table(cfg, medium)?,
                Command::Photons => photons_table(cfg, medium)?,
                Command::Compare => compare_table(cfg, medium)?,
            };
            Ok(vec![(cfg.clone(), table)])
        }
    }
}

/// The chart command maps the fixed reference window a in [0, 5],
/// q in [-1, 1] at the configured resolution.
const CHART_A_RANGE: (f64, f64) = (0.0, 5.0);
const CHART_Q_RANGE: (f64, f64) = (-1.0, 1.0);

fn chart_table(cfg: &RunConfig, name: Option<&str>) -> Result<ResultTable> {
    let chart = stability_chart(CHART_A_RANGE, CHART_Q_RANGE, cfg.resolution)?;
    let mut table = ResultTable::new(name, &["a", "q", "half_trace", "stable"]);
    for (ia, &a) in chart.a_values.iter().enumerate() {
        for (iq, &q) in chart.q_values.iter().enumerate() {
            let idx = chart.index(ia, iq);
            let stable = match chart.class[idx] {
                StabilityClass::Stable => 1.0,
                StabilityClass::Unstable => 0.0,
                StabilityClass::Unknown => f64::NAN,
            };
            table.push(vec![a, q, chart.half_trace[idx], stable]);
        }
    }
    Ok(table)
}

fn line_table(cfg: &RunConfig, medium: MediumSpec) -> Result<ResultTable> {
    let (slope, intercept) = resonance_line(medium, cfg.theta, cfg.b)?;
    let mut table = ResultTable::new(Some("line"), &["q", "a"]);
    let count = cfg.resolution.max(2);
    for i in 0..count {
        let q = CHART_Q_RANGE.0
            + (CHART_Q_RANGE.1 - CHART_Q_RANGE.0) * i as f64 / (count - 1) as f64;
        table.push(vec![q, slope * q + intercept]);
    }
    Ok(table)
}

fn scan_table(cfg: &RunConfig, medium: MediumSpec, name: Option<&str>) -> Result<ResultTable> {
    let (lo, hi, count) = cfg
        .rho_range
        .expect("scan config carries a frequency window");
    let points = exponent_scan(medium, cfg.b, cfg.theta, (lo, hi), count, cfg.tolerance)?;
    let mut table = ResultTable::new(name, &["rho", "re_nu", "im_nu"]);
    for (rho, exponent) in points {
        table.push(vec![rho, exponent.re, exponent.im]);
    }
    Ok(table)
}

fn evolve_table(cfg: &RunConfig, medium: MediumSpec) -> Result<ResultTable> {
    let mode = ModeSpec::new(cfg.rho.expect("validated"), cfg.theta)?;
    let profile = MotionProfile::Harmonic { b: cfg.b };
    let init = AmplitudePair::linear(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let opts = EvolveOptions {
        tolerance: cfg.tolerance,
        samples_per_period: cfg.samples_per_period,
        fixed_steps_per_period: None,
    };
    let span = TAU * cfg.periods as f64;
    let traj = evolve_f12(medium, mode, profile, init, (0.0, span), &opts)?;
    let mut table = ResultTable::new(
        None,
        &["tau", "re_f1", "im_f1", "re_f2", "im_f2", "abs_f1", "abs_f2"],
    );
    for (tau, state) in traj.taus.iter().zip(&traj.states) {
        table.push(vec![
            *tau,
            state.first.re,
            state.first.im,
            state.second.re,
            state.second.im,
            state.first.norm(),
            state.second.norm(),
        ]);
    }
    Ok(table)
}

fn photons_table(cfg: &RunConfig, medium: MediumSpec) -> Result<ResultTable> {
    let mode = ModeSpec::new(cfg.rho.expect("validated"), cfg.theta)?;
    let series = photon_density_series(
        medium,
        mode,
        cfg.b,
        cfg.periods,
        cfg.samples_per_period,
        cfg.tolerance,
    )?;
    let mut table = ResultTable::new(None, &["tau", "density"]);
    for (tau, density) in series.taus.iter().zip(&series.density) {
        table.push(vec![*tau, *density]);
    }
    Ok(table)
}

fn compare_table(cfg: &RunConfig, medium: MediumSpec) -> Result<ResultTable> {
    let mode = ModeSpec::new(cfg.rho.expect("validated"), cfg.theta)?;
    let profile = MotionProfile::Harmonic { b: cfg.b };
    let init = AmplitudePair::linear(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let span = TAU * cfg.periods as f64;
    let opts = EvolveOptions {
        tolerance: cfg.tolerance,
        samples_per_period: cfg.samples_per_period,
        fixed_steps_per_period: None,
    };
    let full = evolve_f12(medium, mode, profile, init, (0.0, span), &opts)?;
    let reduced = hill_evolution(
        medium,
        mode,
        cfg.b,
        init,
        span,
        cfg.samples_per_period,
        cfg.tolerance,
    )?;
    let reconstructed = q_reconstruction(medium, mode, profile, &reduced)?;
    if full.taus.len() != reconstructed.len() {
        return Err(Error::Numerical(format!(
            "sample grids disagree: {} full vs {} reconstructed",
            full.taus.len(),
            reconstructed.len()
        )));
    }
    let mut table = ResultTable::new(None, &["tau", "abs_f1_full", "abs_f1_mathieu"]);
    for ((tau, state), (_, pair)) in full.taus.iter().zip(&full.states).zip(&reconstructed) {
        table.push(vec![*tau, state.first.norm(), pair.first.norm()]);
    }
    Ok(table)
}

/// One provenance field: key, plain text for CSV comments, JSON fragment.
type ProvenanceField = (&'static str, String, String);

fn provenance(cfg: &RunConfig, table_name: Option<&str>) -> Vec<ProvenanceField> {
    fn text(s: &str) -> String {
        s.to_string()
    }
    fn json_str(s: &str) -> String {
        json_string(s)
    }
    let mut fields: Vec<ProvenanceField> = Vec::new();
    let version = concat!("oscimedia ", env!("CARGO_PKG_VERSION"));
    fields.push(("tool", text(version), json_str(version)));
    fields.push((
        "command",
        text(cfg.command.name()),
        json_str(cfg.command.name()),
    ));
    match cfg.preset {
        Some(p) => fields.push(("preset", text(p.name()), json_str(p.name()))),
        None => fields.push(("preset", text("none"), "null".into())),
    }
    match table_name {
        Some(name) => fields.push(("table", text(name), json_str(name))),
        None => fields.push(("table", text("none"), "null".into())),
    }
    fields.push(("n", format!("{}", cfg.n), format!("{}", cfg.n)));
    fields.push(("b", format!("{}", cfg.b), format!("{}", cfg.b)));
    fields.push(("theta", format!("{}", cfg.theta), format!("{}", cfg.theta)));
    match cfg.rho {
        Some(rho) => fields.push(("rho", format!("{rho}"), format!("{rho}"))),
        None => fields.push(("rho", text("none"), "null".into())),
    }
    match cfg.rho_range {
        Some((lo, hi, count)) => fields.push((
            "rho_range",
            format!("[{lo}, {hi}, {count}]"),
            format!("[{lo}, {hi}, {count}]"),
        )),
        None => fields.push(("rho_range", text("none"), "null".into())),
    }
    fields.push((
        "periods",
        format!("{}", cfg.periods),
        format!("{}", cfg.periods),
    ));
    fields.push(("order", format!("{}", cfg.order), format!("{}", cfg.order)));
    fields.push((
        "tolerance",
        format!("{:e}", cfg.tolerance),
        format!("{:e}", cfg.tolerance),
    ));
    fields.push((
        "samples_per_period",
        format!("{}", cfg.samples_per_period),
        format!("{}", cfg.samples_per_period),
    ));
    fields.push((
        "resolution",
        format!("{}", cfg.resolution),
        format!("{}", cfg.resolution),
    ));
    fields.push((
        "format",
        text(cfg.format.name()),
        json_str(cfg.format.name()),
    ));
    match &cfg.out {
        Some(path) => {
            let shown = path.display().to_string();
            fields.push(("out", shown.clone(), json_string(&shown)));
        }
        None => fields.push(("out", text("none"), "null".into())),
    }
    fields
}

/// 17 significant digits: every f64 round-trips exactly.
fn fmt_cell(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else if value.is_nan() {
        "NaN".to_string()
    } else if value > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn json_cell(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// CSV layout: header row, then '#' provenance comment lines echoing the
/// effective config, then the data rows.
pub fn render_csv(table: &ResultTable, cfg: &RunConfig) -> String {
    let mut out = String::new();
    let header: Vec<String> = table.columns.iter().map(|c| csv_field(c)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (key, text, _) in provenance(cfg, table.name.as_deref()) {
        out.push_str("# ");
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&text);
        out.push('\n');
    }
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_cell(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// JSON layout: {"columns", "rows", "config"} with numeric cells at 17
/// significant digits.
pub fn render_json(table: &ResultTable, cfg: &RunConfig) -> String {
    let mut out = String::from("{\n  \"columns\": [");
    let columns: Vec<String> = table.columns.iter().map(|c| json_string(c)).collect();
    out.push_str(&columns.join(", "));
    out.push_str("],\n  \"rows\": [");
    if table.rows.is_empty() {
        out.push_str("],\n");
    } else {
        out.push('\n');
        for (i, row) in table.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|&v| json_cell(v)).collect();
            out.push_str("    [");
            out.push_str(&cells.join(", "));
            out.push(']');
            out.push_str(if i + 1 == table.rows.len() { "\n" } else { ",\n" });
        }
        out.push_str("  ],\n");
    }
    out.push_str("  \"config\": {\n");
    let fields = provenance(cfg, table.name.as_deref());
    for (i, (key, _, json)) in fields.iter().enumerate() {
        out.push_str("    ");
        out.push_str(&json_string(key));
        out.push_str(": ");
        out.push_str(json);
        out.push_str(if i + 1 == fields.len() { "\n" } else { ",\n" });
    }
    out.push_str("  }\n}\n");
    out
}

fn render(table: &ResultTable, cfg: &RunConfig) -> String {
    match cfg.format {
        OutputFormat::Csv => render_csv(table, cfg),
        OutputFormat::Json => render_json(table, cfg),
    }
}

fn output_path(base: &Path, name: Option<&str>, format: OutputFormat) -> PathBuf {
    match name {
        None => base.to_path_buf(),
        Some(tag) => {
            let stem = base
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let ext = base
                .extension()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format.extension().to_string());
            base.with_file_name(format!("{stem}_{tag}.{ext}"))
        }
    }
}

fn emit(tables: &[(RunConfig, ResultTable)]) -> Result<()> {
    let out = tables.first().and_then(|(cfg, _)| cfg.out.clone());
    match out {
        Some(base) => {
            for (cfg, table) in tables {
                let path = output_path(&base, table.name.as_deref(), cfg.format);
                std::fs::write(&path, render(table, cfg))?;
            }
        }
        None => {
            let mut first = true;
            for (cfg, table) in tables {
                if !first {
                    println!();
                }
                first = false;
                print!("{}", render(table, cfg));
            }
        }
    }
    Ok(())
}
