//! `qkd-limits` command line: argument parsing, dispatch and output.
//!
//! Every command takes the same flat set of `--key value` parameters. A JSON
//! config file (`--config path`, a flat object using the same keys) supplies
//! values first; explicit flags override it. Defaults describe a 1.3 um
//! telecom fiber link: `eta_B = 0.11`, `d_B = 1e-5`, `beta = 0.38 dB/km`,
//! `c = 5 dB`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::link_model::{
    link_budget_for, ChannelParams, Composition, DetectorParams, ErrorModel,
};
use crate::photon_statistics::{HeraldedPdc, SourceModel};
use crate::pns_simulator::{
    run_simulation, run_simulation_sharded, theoretical_reference, BlockPolicy, EveMode,
    EveStrategy, Forwarding, MatchStatus, SimConfig,
};
use crate::report::{render, Cell, OutputFormat, ReportRow};
use crate::security_bounds::{
    combined_condition_at, honest_detector_wcp_bound, max_secure_distance,
    necessary_condition_error_at, necessary_condition_multiphoton, optimal_pdc_chi,
    optimal_wcp_mu, BoundResult, Method, Reach,
};

#[derive(Debug, Parser)]
#[command(name = "qkd-limits", version, about = "Security limits of practical BB84 links")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Per-slot click and error probabilities at Bob.
    Budget(PhysicalArgs),
    /// Evaluate the error-only, multi-photon and combined criteria.
    Check(PhysicalArgs),
    /// Minimum transmission for a source, optionally optimizing its intensity.
    Bound(PhysicalArgs),
    /// Maximum secure fiber length.
    Distance(PhysicalArgs),
    /// Repeat another command over a grid of one parameter.
    Sweep(SweepArgs),
    /// Monte Carlo simulation of the protocol with an optional eavesdropper.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct PhysicalArgs {
    /// JSON file with default values for any of these keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Source family: sp, wcp or pdc.
    #[arg(long)]
    source: Option<String>,
    /// Mean photon number of the weak pulse, or `optimal`.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Squared squeezing parameter of the PDC source, or `optimal`.
    #[arg(long, allow_hyphen_values = true)]
    chi2: Option<String>,
    /// Efficiency of Alice's heralding detector.
    #[arg(long, allow_hyphen_values = true)]
    eta_a: Option<String>,
    /// Dark-count probability of Alice's heralding detector.
    #[arg(long, allow_hyphen_values = true)]
    dark_a: Option<String>,
    /// Efficiency of Bob's detector.
    #[arg(long, allow_hyphen_values = true)]
    eta_b: Option<String>,
    /// Dark-count probability per slot of Bob's detector.
    #[arg(long, allow_hyphen_values = true)]
    dark_b: Option<String>,
    /// Fiber absorption in dB/km.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Length-independent loss in dB.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Fiber length in km.
    #[arg(long, allow_hyphen_values = true)]
    length: Option<String>,
    /// Error probability of a detected signal photon.
    #[arg(long, allow_hyphen_values = true)]
    pe_signal: Option<String>,
    /// Probability composition: approx or exact.
    #[arg(long)]
    mode: Option<String>,
    /// Bound method: closed or exact.
    #[arg(long)]
    method: Option<String>,
    /// Sifted error threshold of the error criterion.
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<String>,
    /// Bob's efficiency is outside Eve's control (WCP bound only).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    trusted_detector: Option<String>,
    /// Output format: table, json or csv.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Args)]
struct SimulationArgs {
    /// Number of time slots.
    #[arg(long)]
    pulses: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Eavesdropper: none, pns, ir or pns-ir.
    #[arg(long)]
    eve: Option<String>,
    /// Single-photon blocking probability, or `auto`.
    #[arg(long)]
    block: Option<String>,
    /// Fraction of pulses intercepted and resent.
    #[arg(long)]
    intercept: Option<String>,
    /// Eve can make Bob's detector fire on every forwarded photon.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    eve_controls_eta: Option<String>,
    /// Photons forwarded after splitting: all (n - 1) or one.
    #[arg(long)]
    forward: Option<String>,
    /// Worker threads; does not change the result.
    #[arg(long)]
    shards: Option<String>,
    /// Count dark-count clicks as known to Eve.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    credit_dark: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    physical: PhysicalArgs,
    #[command(flatten)]
    simulation: SimulationArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    physical: PhysicalArgs,
    #[command(flatten)]
    simulation: SimulationArgs,
    /// Parameter to vary.
    #[arg(long)]
    axis: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Grid spacing: linear or log.
    #[arg(long)]
    scale: Option<String>,
    /// Command evaluated at each point (default bound).
    #[arg(long)]
    of: Option<String>,
}

const PHYSICAL_KEYS: &[&str] = &[
    "source",
    "mu",
    "chi2",
    "eta-a",
    "dark-a",
    "eta-b",
    "dark-b",
    "beta",
    "c",
    "length",
    "pe-signal",
    "mode",
    "method",
    "threshold",
    "trusted-detector",
    "format",
];
const SIMULATION_KEYS: &[&str] = &[
    "pulses",
    "seed",
    "eve",
    "block",
    "intercept",
    "eve-controls-eta",
    "forward",
    "shards",
    "credit-dark",
];
const SWEEP_KEYS: &[&str] = &["axis", "start", "stop", "steps", "scale", "of"];

/// Parameters a sweep may vary.
const SWEEPABLE: &[&str] = &[
    "mu",
    "chi2",
    "eta-a",
    "dark-a",
    "eta-b",
    "dark-b",
    "beta",
    "c",
    "length",
    "pe-signal",
    "threshold",
    "intercept",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Budget,
    Check,
    Bound,
    Distance,
    Sweep,
    Simulate,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Budget,
        Command::Check,
        Command::Bound,
        Command::Distance,
        Command::Sweep,
        Command::Simulate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Budget => "budget",
            Command::Check => "check",
            Command::Bound => "bound",
            Command::Distance => "distance",
            Command::Sweep => "sweep",
            Command::Simulate => "simulate",
        }
    }

    fn allowed_keys(&self) -> Vec<&'static str> {
        let mut keys = PHYSICAL_KEYS.to_vec();
        match self {
            Command::Simulate => keys.extend_from_slice(SIMULATION_KEYS),
            Command::Sweep => {
                keys.extend_from_slice(SIMULATION_KEYS);
                keys.extend_from_slice(SWEEP_KEYS);
            }
            _ => {}
        }
        keys
    }
}

/// A source intensity given either as a number or as `optimal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intensity {
    Value(f64),
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    SinglePhoton,
    Wcp,
    Pdc,
}

/// Physical parameters shared by every command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physical {
    pub source: SourceKind,
    pub mu: Intensity,
    pub chi2: Intensity,
    pub eta_a: f64,
    pub dark_a: f64,
    pub bob: DetectorParams,
    pub beta: f64,
    pub c: f64,
    pub length: f64,
    pub err: ErrorModel,
    pub composition: Composition,
    pub method: Method,
    pub threshold: f64,
    pub trusted_detector: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulation {
    pub pulses: u64,
    pub seed: u64,
    pub eve: EveStrategy,
    pub eve_controls_eta: bool,
    pub shards: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: &'static str,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub scale: Scale,
    pub of: Command,
}

impl SweepAxis {
    pub fn grid(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    /// Merged flat key/value parameters (config file, then flags).
    pub parameters: BTreeMap<&'static str, String>,
    pub physical: Physical,
    pub simulation: Option<Simulation>,
    pub sweep: Option<SweepAxis>,
    pub output_format: OutputFormat,
}

fn canonical_key(raw: &str) -> String {
    raw.trim().to_ascii_lowercase().replace('_', "-")
}

fn known_key(allowed: &[&'static str], raw: &str) -> Option<&'static str> {
    let key = canonical_key(raw);
    allowed.iter().copied().find(|k| *k == key)
}

fn read_config(path: &PathBuf, allowed: &[&'static str]) -> Result<BTreeMap<&'static str, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(obj) = value else {
        return Err(Error::Config("config must be a flat JSON object".into()));
    };
    let mut map = BTreeMap::new();
    for (k, v) in obj {
        let key = known_key(allowed, &k)
            .ok_or_else(|| Error::Config(format!("unknown key `{k}` in config")))?;
        let text = match v {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            _ => return Err(Error::Config(format!("config key `{k}` must be a string, number or bool"))),
        };
        map.insert(key, text);
    }
    Ok(map)
}

fn clap_error(e: clap::Error) -> Error {
    Error::Config(e.to_string().trim_end().to_owned())
}

/// Parses and validates `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = Cli::command().try_get_matches_from(argv).map_err(clap_error)?;
    let (name, sub) = matches
        .subcommand()
        .ok_or_else(|| Error::Config("missing command".into()))?;
    let command = Command::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| Error::Config(format!("unknown command `{name}`")))?;
    let allowed = command.allowed_keys();

    let mut parameters = match sub.try_get_one::<PathBuf>("config") {
        Ok(Some(path)) => read_config(path, &allowed)?,
        _ => BTreeMap::new(),
    };
    for id in sub.ids() {
        if sub.value_source(id.as_str()) != Some(ValueSource::CommandLine) {
            continue;
        }
        let Ok(Some(value)) = sub.try_get_one::<String>(id.as_str()) else {
            continue;
        };
        if let Some(key) = known_key(&allowed, id.as_str()) {
            parameters.insert(key, value.clone());
        }
    }
    spec_from_parameters(command, parameters)
}

fn spec_from_parameters(command: Command, parameters: BTreeMap<&'static str, String>) -> Result<RunSpec> {
    let physical = resolve_physical(&parameters)?;
    let output_format = match parameters.get("format") {
        Some(f) => f.parse()?,
        None => OutputFormat::Table,
    };
    let simulation = matches!(command, Command::Simulate | Command::Sweep)
        .then(|| resolve_simulation(&parameters))
        .transpose()?;
    let sweep = if command == Command::Sweep {
        let axis = resolve_sweep(&parameters)?;
        // Both ends of the grid must be valid parameter sets.
        for x in [axis.start, axis.stop] {
            resolve_physical(&with_value(&parameters, axis.key, x))?;
        }
        Some(axis)
    } else {
        None
    };
    Ok(RunSpec {
        command,
        parameters,
        physical,
        simulation,
        sweep,
        output_format,
    })
}

fn with_value(
    parameters: &BTreeMap<&'static str, String>,
    key: &'static str,
    value: f64,
) -> BTreeMap<&'static str, String> {
    let mut p = parameters.clone();
    p.insert(key, format!("{value:e}"));
    p
}

fn number(p: &BTreeMap<&'static str, String>, key: &'static str, default: f64) -> Result<f64> {
    match p.get(key) {
        None => Ok(default),
        Some(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::invalid(key, format!("expected a number, got `{s}`"))),
    }
}

fn in_range(key: &'static str, x: f64, ok: bool, what: &str) -> Result<f64> {
    if ok {
        Ok(x)
    } else {
        Err(Error::invalid(key, format!("{what}, got {x}")))
    }
}

fn flag(p: &BTreeMap<&'static str, String>, key: &'static str, default: bool) -> Result<bool> {
    match p.get(key).map(|s| s.trim().to_ascii_lowercase()) {
        None => Ok(default),
        Some(s) if s == "true" || s == "1" || s == "yes" => Ok(true),
        Some(s) if s == "false" || s == "0" || s == "no" => Ok(false),
        Some(s) => Err(Error::invalid(key, format!("expected true or false, got `{s}`"))),
    }
}

fn intensity(p: &BTreeMap<&'static str, String>, key: &'static str, upper: f64) -> Result<Intensity> {
    match p.get(key) {
        None => Ok(Intensity::Optimal),
        Some(s) if s.trim() == "optimal" => Ok(Intensity::Optimal),
        Some(_) => {
            let x = number(p, key, 0.0)?;
            in_range(key, x, x > 0.0 && x < upper, &format!("must lie in (0, {upper})"))?;
            Ok(Intensity::Value(x))
        }
    }
}

fn resolve_physical(p: &BTreeMap<&'static str, String>) -> Result<Physical> {
    let source = match p.get("source").map(|s| s.trim()) {
        None | Some("wcp") => SourceKind::Wcp,
        Some("sp") | Some("single") | Some("single-photon") => SourceKind::SinglePhoton,
        Some("pdc") => SourceKind::Pdc,
        Some(other) => {
            return Err(Error::invalid("source", format!("expected sp, wcp or pdc, got `{other}`")))
        }
    };
    let mu = intensity(p, "mu", 700.0)?;
    let chi2 = intensity(p, "chi2", 1.0)?;
    let eta_a = number(p, "eta-a", 0.11)?;
    in_range("eta-a", eta_a, eta_a > 0.0 && eta_a <= 1.0, "must lie in (0, 1]")?;
    let dark_a = number(p, "dark-a", 1e-5)?;
    in_range("dark-a", dark_a, (0.0..1.0).contains(&dark_a), "must lie in [0, 1)")?;
    let eta_b = number(p, "eta-b", 0.11)?;
    in_range("eta-b", eta_b, eta_b > 0.0 && eta_b <= 1.0, "must lie in (0, 1]")?;
    let dark_b = number(p, "dark-b", 1e-5)?;
    in_range("dark-b", dark_b, (0.0..0.5).contains(&dark_b), "must lie in [0, 0.5)")?;
    let beta = number(p, "beta", 0.38)?;
    in_range("beta", beta, beta >= 0.0, "must be >= 0")?;
    let c = number(p, "c", 5.0)?;
    in_range("c", c, c >= 0.0, "must be >= 0")?;
    let length = number(p, "length", 0.0)?;
    in_range("length", length, length >= 0.0, "must be >= 0")?;
    let pe = number(p, "pe-signal", 0.0)?;
    in_range("pe-signal", pe, (0.0..=0.5).contains(&pe), "must lie in [0, 0.5]")?;
    let threshold = number(p, "threshold", 0.25)?;
    in_range("threshold", threshold, threshold > 0.0 && threshold <= 0.5, "must lie in (0, 0.5]")?;
    let composition = match p.get("mode").map(|s| s.trim()) {
        None | Some("approx") => Composition::FirstOrder,
        Some("exact") => Composition::Exact,
        Some(other) => return Err(Error::invalid("mode", format!("expected approx or exact, got `{other}`"))),
    };
    let method = match p.get("method").map(|s| s.trim()) {
        None | Some("closed") => Method::ClosedForm,
        Some("exact") => Method::NumericExact,
        Some(other) => return Err(Error::invalid("method", format!("expected closed or exact, got `{other}`"))),
    };
    Ok(Physical {
        source,
        mu,
        chi2,
        eta_a,
        dark_a,
        bob: DetectorParams::new(eta_b, dark_b)?,
        beta,
        c,
        length,
        err: ErrorModel::new(pe)?,
        composition,
        method,
        threshold,
        trusted_detector: flag(p, "trusted-detector", false)?,
    })
}

fn resolve_simulation(p: &BTreeMap<&'static str, String>) -> Result<Simulation> {
    let integer = |key: &'static str, default: u64| -> Result<u64> {
        match p.get(key) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::invalid(key, format!("expected a non-negative integer, got `{s}`"))),
        }
    };
    let pulses = integer("pulses", 1_000_000)?;
    if pulses == 0 {
        return Err(Error::invalid("pulses", "must be >= 1"));
    }
    let mode = match p.get("eve").map(|s| s.trim()) {
        None | Some("none") => EveMode::Absent,
        Some("pns") => EveMode::Pns,
        Some("ir") => EveMode::InterceptResend,
        Some("pns-ir") => EveMode::PnsPlusInterceptResend,
        Some(other) => {
            return Err(Error::invalid("eve", format!("expected none, pns, ir or pns-ir, got `{other}`")))
        }
    };
    let block = match p.get("block").map(|s| s.trim()) {
        Some("auto") => BlockPolicy::AutoMatch,
        None if mode.splits_photons() => BlockPolicy::AutoMatch,
        _ => BlockPolicy::Fixed(number(p, "block", 0.0)?),
    };
    let forwarding = match p.get("forward").map(|s| s.trim()) {
        None | Some("all") => Forwarding::AllRemaining,
        Some("one") => Forwarding::OnePhoton,
        Some(other) => return Err(Error::invalid("forward", format!("expected all or one, got `{other}`"))),
    };
    let default_intercept = if mode == EveMode::InterceptResend { 1.0 } else { 0.0 };
    let eve = EveStrategy {
        mode,
        single_photon_block: block,
        intercept_fraction: number(p, "intercept", default_intercept)?,
        forwarding,
        credit_dark_counts: flag(p, "credit-dark", true)?,
    };
    eve.validate()?;
    let shards = match p.get("shards") {
        None => None,
        Some(_) => Some(integer("shards", 1)?.max(1) as usize),
    };
    Ok(Simulation {
        pulses,
        seed: integer("seed", 1)?,
        eve,
        eve_controls_eta: flag(p, "eve-controls-eta", true)?,
        shards,
    })
}

fn resolve_sweep(p: &BTreeMap<&'static str, String>) -> Result<SweepAxis> {
    let raw = p
        .get("axis")
        .ok_or_else(|| Error::invalid("axis", "a sweep needs --axis"))?;
    let key = known_key(SWEEPABLE, raw)
        .ok_or_else(|| Error::invalid("axis", format!("`{raw}` cannot be swept")))?;
    let start = p
        .get("start")
        .ok_or_else(|| Error::invalid("start", "a sweep needs --start"))
        .and_then(|_| number(p, "start", 0.0))?;
    let stop = p
        .get("stop")
        .ok_or_else(|| Error::invalid("stop", "a sweep needs --stop"))
        .and_then(|_| number(p, "stop", 0.0))?;
    let steps = match p.get("steps") {
        None => 10,
        Some(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid("steps", format!("expected an integer, got `{s}`")))?,
    };
    if steps < 2 {
        return Err(Error::invalid("steps", format!("must be >= 2, got {steps}")));
    }
    let scale = match p.get("scale").map(|s| s.trim()) {
        None | Some("linear") => Scale::Linear,
        Some("log") => Scale::Log,
        Some(other) => return Err(Error::invalid("scale", format!("expected linear or log, got `{other}`"))),
    };
    if scale == Scale::Log && !(start > 0.0 && stop > 0.0) {
        return Err(Error::invalid("start", "log sweeps need positive start and stop"));
    }
    let of = match p.get("of").map(|s| s.trim()) {
        None | Some("bound") => Command::Bound,
        Some("budget") => Command::Budget,
        Some("check") => Command::Check,
        Some("distance") => Command::Distance,
        Some("simulate") => Command::Simulate,
        Some(other) => {
            return Err(Error::invalid(
                "of",
                format!("expected budget, check, bound, distance or simulate, got `{other}`"),
            ))
        }
    };
    Ok(SweepAxis {
        key,
        start,
        stop,
        steps,
        scale,
        of,
    })
}

impl Physical {
    fn source_model(&self) -> Result<SourceModel> {
        Ok(match self.source {
            SourceKind::SinglePhoton => SourceModel::SinglePhoton,
            SourceKind::Wcp => SourceModel::weak_coherent(self.mu_value()?)?,
            SourceKind::Pdc => SourceModel::HeraldedPdc(HeraldedPdc::new(
                self.chi2_value()?,
                self.eta_a,
                self.dark_a,
            )?),
        })
    }

    /// Numeric `mu`, resolving `optimal` to the closed-form optimum.
    fn mu_value(&self) -> Result<f64> {
        match self.mu {
            Intensity::Value(x) => Ok(x),
            Intensity::Optimal => Ok(optimal_wcp_mu(&self.bob)?.optimal_intensity.unwrap_or(0.0)),
        }
    }

    fn chi2_value(&self) -> Result<f64> {
        match self.chi2 {
            Intensity::Value(x) => Ok(x),
            Intensity::Optimal => optimal_pdc_chi(self.eta_a, self.dark_a, &self.bob)?
                .optimal_intensity
                .ok_or(Error::DegenerateOptimum("optimal chi^2 is zero; give --chi2 explicitly")),
        }
    }

    fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.beta, self.c, self.length)
    }

    fn intensity_columns(&self, row: &mut ReportRow) {
        row.push("source", self.source_label());
        let cell = |i: Intensity| match i {
            Intensity::Value(x) => Cell::Num(x),
            Intensity::Optimal => Cell::Text("optimal".into()),
        };
        match self.source {
            SourceKind::SinglePhoton => row.push("intensity", Cell::Empty),
            SourceKind::Wcp => row.push("intensity", cell(self.mu)),
            SourceKind::Pdc => row.push("intensity", cell(self.chi2)),
        }
    }

    fn source_label(&self) -> &'static str {
        match self.source {
            SourceKind::SinglePhoton => "sp",
            SourceKind::Wcp => "wcp",
            SourceKind::Pdc => "pdc",
        }
    }

    fn optimize(&self) -> bool {
        match self.source {
            SourceKind::SinglePhoton => false,
            SourceKind::Wcp => self.mu == Intensity::Optimal,
            SourceKind::Pdc => self.chi2 == Intensity::Optimal,
        }
    }
}

fn reach_cells(row: &mut ReportRow, reach: Option<Reach>) {
    let (status, km) = match reach {
        Some(Reach::Km(l)) => ("finite", Cell::Num(l)),
        Some(Reach::Unlimited) => ("unlimited", Cell::Empty),
        Some(Reach::Unattainable { .. }) => ("insecure_at_any_distance", Cell::Empty),
        None => ("", Cell::Empty),
    };
    row.push("l_max_km", km);
    row.push("reach", status);
}

fn budget_rows(ph: &Physical) -> Result<ReportRow> {
    let source = ph.source_model()?;
    let dist = source.distribution()?;
    let f = crate::link_model::transmission(&ph.channel()?);
    let b = link_budget_for(&dist, f, &ph.bob, &ph.err, ph.composition);
    let mut row = ReportRow::new();
    ph.intensity_columns(&mut row);
    row.push("resolved_intensity", resolved_intensity(ph)?);
    row.push("length_km", ph.length);
    row.push("f", b.f);
    row.push("p_sig", b.p_sig);
    row.push("p_dark", b.p_dark);
    row.push("p_exp", b.p_exp);
    row.push("e", b.e);
    row.push("p_e_sifted", b.p_e_sifted);
    row.push("p_multi", dist.p_multi());
    Ok(row)
}

fn resolved_intensity(ph: &Physical) -> Result<Cell> {
    Ok(match ph.source {
        SourceKind::SinglePhoton => Cell::Empty,
        SourceKind::Wcp => Cell::Num(ph.mu_value()?),
        SourceKind::Pdc => Cell::Num(ph.chi2_value()?),
    })
}

fn check_row(ph: &Physical) -> Result<ReportRow> {
    let mut row = budget_rows(ph)?;
    let p_exp = row.num("p_exp").unwrap_or(0.0);
    let e = row.num("e").unwrap_or(0.0);
    let p_sig = row.num("p_sig").unwrap_or(0.0);
    let p_multi = row.num("p_multi").unwrap_or(0.0);
    for v in [
        necessary_condition_error_at(p_exp, e, ph.threshold),
        necessary_condition_multiphoton(p_sig, p_multi),
        combined_condition_at(p_exp, e, p_multi, ph.threshold),
    ] {
        let name = v.criterion.as_str();
        row.push(&format!("{name}_secure"), v.secure);
        row.push(&format!("{name}_margin"), v.margin);
    }
    Ok(row)
}

fn bound_result(ph: &Physical) -> Result<BoundResult> {
    if ph.trusted_detector {
        if ph.source != SourceKind::Wcp {
            return Err(Error::invalid("trusted-detector", "only applies to --source wcp"));
        }
        let Intensity::Value(mu) = ph.mu else {
            return Err(Error::invalid("mu", "the trusted-detector bound needs an explicit --mu"));
        };
        return Ok(honest_detector_wcp_bound(mu)?.with_fiber(ph.beta, ph.c));
    }
    let source = match ph.source {
        SourceKind::Wcp if ph.optimize() => SourceModel::WeakCoherent { mu: f64::NAN },
        SourceKind::Pdc if ph.optimize() => SourceModel::HeraldedPdc(HeraldedPdc {
            chi_sq: f64::NAN,
            eta_a: ph.eta_a,
            d_a: ph.dark_a,
        }),
        _ => ph.source_model()?,
    };
    max_secure_distance(&source, &ph.bob, ph.beta, ph.c, ph.optimize(), ph.method)
}

fn bound_row(ph: &Physical, with_distance_first: bool) -> Result<ReportRow> {
    let b = bound_result(ph)?;
    let mut row = ReportRow::new();
    ph.intensity_columns(&mut row);
    row.push("method", if ph.trusted_detector { "trusted_detector" } else { b.method.as_str() });
    if with_distance_first {
        reach_cells(&mut row, b.reach);
        row.push("f_min", b.f_min);
        row.push("optimal_intensity", b.optimal_intensity);
    } else {
        row.push("f_min", b.f_min);
        row.push("optimal_intensity", b.optimal_intensity);
        reach_cells(&mut row, b.reach);
    }
    row.push("degenerate", b.degenerate);
    Ok(row)
}

fn simulate_row(ph: &Physical, sim: &Simulation) -> Result<ReportRow> {
    let config = SimConfig {
        n_pulses: sim.pulses,
        seed: sim.seed,
        source: ph.source_model()?,
        channel: ph.channel()?,
        bob: ph.bob,
        error_model: ph.err,
        eve: sim.eve,
        eve_controls_bob_efficiency: sim.eve_controls_eta,
    };
    let r = match sim.shards {
        Some(s) => run_simulation_sharded(&config, s)?,
        None => run_simulation(&config)?,
    };
    let mut row = ReportRow::new();
    ph.intensity_columns(&mut row);
    row.push("resolved_intensity", resolved_intensity(ph)?);
    row.push("eve", match sim.eve.mode {
        EveMode::Absent => "none",
        EveMode::Pns => "pns",
        EveMode::InterceptResend => "ir",
        EveMode::PnsPlusInterceptResend => "pns-ir",
    });
    row.push("seed", sim.seed);
    row.push("emitted", r.emitted);
    row.push("heralded", r.heralded);
    row.push("clicks", r.clicks);
    row.push("sifted_bits", r.sifted_bits);
    row.push("error_bits", r.error_bits);
    row.push("p_exp", r.p_exp_empirical);
    row.push("p_exp_stderr", r.p_exp_stderr);
    row.push("qber", r.qber);
    row.push("qber_stderr", r.qber_stderr);
    row.push("eve_known_fraction", r.eve_known_fraction);
    let (single, multi, status) = match r.blocking {
        Some(p) => (
            Cell::Num(p.single_block),
            Cell::Num(p.multi_block),
            Cell::from(match p.status {
                MatchStatus::Matched => "matched",
                MatchStatus::InfeasibleDeficit => "infeasible_deficit",
                MatchStatus::MultiPhotonSurplus => "multiphoton_surplus",
            }),
        ),
        None => (Cell::Empty, Cell::Empty, Cell::Empty),
    };
    row.push("single_block", single);
    row.push("multi_block", multi);
    row.push("match_status", status);
    let reference = theoretical_reference(&config).ok();
    row.push("reference_p_exp", reference.map(|b| b.p_exp));
    row.push("reference_qber", reference.map(|b| b.p_e_sifted));
    Ok(row)
}

fn execute_single(command: Command, ph: &Physical, sim: Option<&Simulation>) -> Result<ReportRow> {
    match command {
        Command::Budget => budget_rows(ph),
        Command::Check => check_row(ph),
        Command::Bound => bound_row(ph, false),
        Command::Distance => bound_row(ph, true),
        Command::Simulate => {
            let sim = sim.ok_or_else(|| Error::Config("missing simulation parameters".into()))?;
            simulate_row(ph, sim)
        }
        Command::Sweep => Err(Error::Config("sweeps cannot be nested".into())),
    }
}

/// Runs the analysis described by `spec`.
pub fn execute(spec: &RunSpec) -> Result<Vec<ReportRow>> {
    let Some(axis) = &spec.sweep else {
        return Ok(vec![execute_single(spec.command, &spec.physical, spec.simulation.as_ref())?]);
    };
    axis.grid()
        .into_iter()
        .map(|x| {
            let params = with_value(&spec.parameters, axis.key, x);
            let ph = resolve_physical(&params)?;
            let sim = resolve_simulation(&params)?;
            let inner = execute_single(axis.of, &ph, Some(&sim))?;
            let mut row = ReportRow::new().with(axis.key, x);
            row.cells.extend(inner.cells);
            Ok(row)
        })
        .collect()
}

/// Parses, executes and renders; returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<T> = argv.into_iter().collect();
    if let Err(e) = Cli::try_parse_from(argv.clone()) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = write!(out, "{}", e.render());
            return 0;
        }
        let _ = write!(err, "{}", e.render());
        return 2;
    }
    let result = parse_args(argv).and_then(|spec| {
        let rows = execute(&spec)?;
        render(&rows, spec.output_format)
    });
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
