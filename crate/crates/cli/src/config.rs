//! Run configuration: JSON file, command-line flags, and their merge.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::Failure;
use hollingiv::local_bifurcations::C31Denominator;
use hollingiv::{sim, ModelParams};

#[derive(Parser, Debug)]
#[command(name = "hollingiv", version, about = "Bifurcation analysis of the Holling IV predator-prey model with Allee effect")]
pub struct Cli {
    /// JSON config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long = "K", global = true, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long = "A", global = true, allow_hyphen_values = true)]
    pub allee: Option<f64>,
    #[arg(long = "a", global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long = "b", global = true, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long = "d", global = true, allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json`, or is embedded in
    /// JSON written to stdout.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Equilibria with eigenvalues and stability classes.
    Equilibria(NoOpts),
    /// Region label in the (d, A) plane.
    Region(NoOpts),
    /// Bogdanov-Takens point and cusp coefficients for (a, K).
    Bt(NoOpts),
    /// Linear part of the three-parameter unfolding at the BT point.
    Unfold(UnfoldOpts),
    /// Nilpotent triple point at A = K.
    Ns(NsOpts),
    /// Focus quantities at E_alpha.
    Hopf(NoOpts),
    /// Codimension-three Hopf point for the given a.
    Hopf3(Hopf3Opts),
    /// Trajectory from one initial point.
    Simulate(SimulateOpts),
    /// Limit cycles around E_alpha.
    Cycles(CyclesOpts),
    /// Existence and non-existence criteria for closed orbits.
    Certify(NoOpts),
    /// Region labels over a (d, A) grid.
    Sweep(SweepOpts),
    /// Phase portrait.
    Portrait(PortraitOpts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Equilibria(_) => "equilibria",
            Command::Region(_) => "region",
            Command::Bt(_) => "bt",
            Command::Unfold(_) => "unfold",
            Command::Ns(_) => "ns",
            Command::Hopf(_) => "hopf",
            Command::Hopf3(_) => "hopf3",
            Command::Simulate(_) => "simulate",
            Command::Cycles(_) => "cycles",
            Command::Certify(_) => "certify",
            Command::Sweep(_) => "sweep",
            Command::Portrait(_) => "portrait",
        }
    }

    fn options_value(&self) -> Value {
        let v = match self {
            Command::Equilibria(o) | Command::Region(o) | Command::Bt(o) | Command::Hopf(o) | Command::Certify(o) => serde_json::to_value(o),
            Command::Unfold(o) => serde_json::to_value(o),
            Command::Ns(o) => serde_json::to_value(o),
            Command::Hopf3(o) => serde_json::to_value(o),
            Command::Simulate(o) => serde_json::to_value(o),
            Command::Cycles(o) => serde_json::to_value(o),
            Command::Sweep(o) => serde_json::to_value(o),
            Command::Portrait(o) => serde_json::to_value(o),
        };
        v.expect("options serialize")
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoOpts {}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum C31 {
    Corrected,
    Reference,
}

impl From<C31> for C31Denominator {
    fn from(c: C31) -> Self {
        match c {
            C31::Corrected => C31Denominator::Corrected,
            C31::Reference => C31Denominator::Reference,
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnfoldOpts {
    /// Denominator of c31 in the coefficient chain.
    #[arg(long, value_enum)]
    pub c31: Option<C31>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsOpts {
    /// Replace b by b_ns, where gamma2 vanishes.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub at_b_ns: Option<bool>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hopf3Opts {
    /// Continue the codimension-three locus in A down to this value.
    #[arg(long, allow_hyphen_values = true)]
    pub continue_to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOpts {
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub y0: Option<f64>,
    /// Negative values integrate backward.
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclesOpts {
    #[arg(long)]
    pub n_seed: Option<usize>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOpts {
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    #[arg(long)]
    pub n_d: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub allee_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub allee_max: Option<f64>,
    #[arg(long)]
    pub n_allee: Option<usize>,
}

/// `x,y` on the command line, `[x, y]` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub [f64; 2]);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y but got {s:?}"))?;
        let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Point([p(x)?, p(y)?]))
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitOpts {
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Initial point `x,y`; repeatable.
    #[arg(long = "point")]
    pub points: Option<Vec<Point>>,
    /// Detect and draw limit cycles.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub cycles: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsInput {
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub allee: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

/// Config file layout. Manifests written by the tool have the same layout
/// plus a `run` block, so a manifest can be fed back with `--config`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub params: ParamsInput,
    pub command: Option<String>,
    #[serde(default)]
    pub options: Map<String, Value>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    /// Run metadata; ignored on input.
    #[allow(dead_code)]
    #[serde(default, skip_serializing)]
    pub run: Option<Value>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ParamsInput,
    pub command: Command,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    /// Entries where a flag replaced a file value.
    pub overrides: Vec<String>,
    pub config_file: Option<PathBuf>,
}

fn schema(msg: String) -> Failure {
    Failure::new(2, msg)
}

fn read_file(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(4, format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| schema(format!("config {}: {e}", path.display())))
}

fn parse_options<T: DeserializeOwned>(command: &str, v: Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| schema(format!("options for {command}: {e}")))
}

fn command_from(name: &str, v: Value) -> Result<Command, Failure> {
    Ok(match name {
        "equilibria" => Command::Equilibria(parse_options(name, v)?),
        "region" => Command::Region(parse_options(name, v)?),
        "bt" => Command::Bt(parse_options(name, v)?),
        "unfold" => Command::Unfold(parse_options(name, v)?),
        "ns" => Command::Ns(parse_options(name, v)?),
        "hopf" => Command::Hopf(parse_options(name, v)?),
        "hopf3" => Command::Hopf3(parse_options(name, v)?),
        "simulate" => Command::Simulate(parse_options(name, v)?),
        "cycles" => Command::Cycles(parse_options(name, v)?),
        "certify" => Command::Certify(parse_options(name, v)?),
        "sweep" => Command::Sweep(parse_options(name, v)?),
        "portrait" => Command::Portrait(parse_options(name, v)?),
        other => return Err(schema(format!("unknown command {other:?}"))),
    })
}

fn overlay<T: Copy>(key: &str, file: &mut Option<T>, flag: Option<T>, overrides: &mut Vec<String>) {
    if let Some(v) = flag {
        if file.is_some() {
            overrides.push(key.to_string());
        }
        *file = Some(v);
    }
}

pub fn parse_config(cli: Cli) -> Result<RunConfig, Failure> {
    let file = match &cli.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    let mut overrides = vec![];
    let mut params = file.params.clone();
    overlay("params.K", &mut params.k, cli.k, &mut overrides);
    overlay("params.A", &mut params.allee, cli.allee, &mut overrides);
    overlay("params.a", &mut params.a, cli.a, &mut overrides);
    overlay("params.b", &mut params.b, cli.b, &mut overrides);
    overlay("params.d", &mut params.d, cli.d, &mut overrides);

    let command = match (&cli.command, &file.command) {
        (None, None) => return Err(schema("no command given (flag subcommand or \"command\" in the config)".into())),
        (None, Some(name)) => command_from(name, Value::Object(file.options.clone()))?,
        (Some(cmd), file_cmd) => {
            let mut merged = Map::new();
            if file_cmd.as_deref() == Some(cmd.name()) {
                merged = file.options.clone();
            } else if file_cmd.is_some() {
                overrides.push("command".into());
            }
            if file_cmd.as_deref() == Some(cmd.name()) {
                command_from(cmd.name(), Value::Object(merged.clone()))?;
            }
            if let Value::Object(flags) = cmd.options_value() {
                for (k, v) in flags {
                    if v.is_null() {
                        continue;
                    }
                    if merged.contains_key(&k) {
                        overrides.push(format!("options.{k}"));
                    }
                    merged.insert(k, v);
                }
            }
            command_from(cmd.name(), Value::Object(merged))?
        }
    };
    let mut format = file.format;
    overlay("format", &mut format, cli.format, &mut overrides);
    let format = format.unwrap_or(match command {
        Command::Portrait(_) => Format::Svg,
        _ => Format::Json,
    });
    let mut output = file.output.clone();
    if let Some(o) = cli.out {
        if output.is_some() {
            overrides.push("output".into());
        }
        output = Some(o);
    }
    Ok(RunConfig { params, command, format, output, manifest: cli.manifest, overrides, config_file: cli.config })
}

impl ParamsInput {
    fn need(&self, v: Option<f64>, key: &str, command: &str) -> Result<f64, Failure> {
        v.ok_or_else(|| schema(format!("command {command} needs parameter {key}")))
    }

    pub fn full(&self, command: &str) -> Result<ModelParams, Failure> {
        let p = ModelParams::new(
            self.need(self.k, "K", command)?,
            self.need(self.allee, "A", command)?,
            self.need(self.a, "a", command)?,
            self.need(self.b, "b", command)?,
            self.need(self.d, "d", command)?,
        );
        p.map_err(Failure::from)
    }

    pub fn a(&self, command: &str) -> Result<f64, Failure> {
        let a = self.need(self.a, "a", command)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Failure::new(3, format!("invalid parameter a: {a} must be positive")));
        }
        Ok(a)
    }

    pub fn k(&self, command: &str) -> Result<f64, Failure> {
        let k = self.need(self.k, "K", command)?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Failure::new(3, format!("invalid parameter K: {k} must be positive")));
        }
        Ok(k)
    }
}

impl SimulateOpts {
    pub fn fill(&mut self) -> Result<(), Failure> {
        if self.x0.is_none() || self.y0.is_none() {
            return Err(schema("simulate needs x0 and y0".into()));
        }
        self.t_end.get_or_insert(100.0);
        self.rtol.get_or_insert(sim::DEFAULT_RTOL);
        Ok(())
    }
}

impl CyclesOpts {
    pub fn fill(&mut self) {
        self.n_seed.get_or_insert(200);
        self.rtol.get_or_insert(sim::DEFAULT_RTOL);
        self.t_max.get_or_insert(sim::T_MAX);
    }
}

impl Hopf3Opts {
    pub fn fill(&mut self) {
        if self.continue_to.is_some() {
            self.step.get_or_insert(1e-3);
        }
    }
}

impl SweepOpts {
    pub fn fill(&mut self, p: &ParamsInput) -> Result<(), Failure> {
        let k = p.k("sweep")?;
        let a = p.a("sweep")?;
        let b = p.need(p.b, "b", "sweep")?;
        let dm = 1.0 / (b + 2.0 * a.sqrt());
        self.d_min.get_or_insert(0.01 * dm);
        self.d_max.get_or_insert(1.5 * dm);
        self.n_d.get_or_insert(120);
        self.allee_min.get_or_insert(-0.95 * k);
        self.allee_max.get_or_insert(0.95 * k);
        self.n_allee.get_or_insert(120);
        Ok(())
    }
}

impl PortraitOpts {
    pub fn fill(&mut self, p: &ModelParams) {
        self.x_max.get_or_insert(1.15 * p.K);
        if self.y_max.is_none() {
            let n = 400;
            let g = (0..=n).map(|i| p.G(p.K * i as f64 / n as f64)).fold(0.0f64, f64::max);
            self.y_max = Some(if g > 0.0 { 1.3 * g } else { p.K });
        }
        self.t_end.get_or_insert(10.0);
        self.points.get_or_insert_with(Vec::new);
        self.cycles.get_or_insert(true);
    }
}
