//! Job configuration: TOML or JSON, picked by file extension.

use std::path::Path;

use oll_core::dynamics::{DEFAULT_EPSILON, DEFAULT_HORIZON, DEFAULT_RATIO, DEFAULT_WINDOW};
use oll_core::{
    AtomSet, AtomicSpace, CompositionSystem, Notion, OrliczFunction, SimpleFunction, TestFamily, Transformation,
    WeightFamily,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Toml,
    Json,
}

impl SourceFormat {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("toml") => Ok(SourceFormat::Toml),
            Some("json") => Ok(SourceFormat::Json),
            _ => Err(CliError::Config {
                path: path.display().to_string(),
                message: "config must have a .toml or .json extension".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Distortion constant `M`; the computed bound is used when absent.
    #[serde(rename = "distortion_M", default, skip_serializing_if = "Option::is_none")]
    pub distortion_m: Option<f64>,
    #[serde(default)]
    pub notions: Vec<String>,
    pub space: SpaceSpec,
    pub tau: TauSpec,
    pub phi: PhiSpec,
    pub weight: WeightSpec,
    #[serde(default)]
    pub test_family: FamilySpec,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default = "default_window")]
    pub window: i64,
    pub mass: MassSpec,
}

fn default_window() -> i64 {
    DEFAULT_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MassSpec {
    Geometric {
        r: f64,
    },
    BilateralGeometric {
        r: f64,
    },
    Counting,
    /// `[index, mass]` pairs covering the whole window.
    Table {
        masses: Vec<(i64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TauSpec {
    Shift {
        d: i64,
        #[serde(default = "yes")]
        invertible: bool,
    },
    Identity {
        #[serde(default = "yes")]
        invertible: bool,
    },
    /// `[from, to]` pairs; unlisted atoms are fixed.
    Table {
        pairs: Vec<(i64, i64)>,
        #[serde(default = "yes")]
        invertible: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Power { p: f64 },
    ExpMinusOne,
    ShiftedLinear { a: f64, c: f64 },
    CappedPower { p: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        c: f64,
    },
    PowerDecay {
        alpha: f64,
        #[serde(default = "one")]
        c: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// Inclusive atom range for singletons, aligned blocks and random draws.
    #[serde(default = "default_range")]
    pub range: (i64, i64),
    #[serde(default = "default_blocks")]
    pub block_lengths: Vec<i64>,
    #[serde(default)]
    pub sets: Vec<Vec<i64>>,
    #[serde(default)]
    pub random_unions: usize,
    #[serde(default)]
    pub random_functions: usize,
}

fn default_range() -> (i64, i64) {
    (-8, 8)
}

fn default_blocks() -> Vec<i64> {
    vec![2, 4, 8]
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            range: default_range(),
            block_lengths: default_blocks(),
            sets: Vec::new(),
            random_unions: 0,
            random_functions: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default = "default_horizon")]
    pub horizon: i64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_ratio")]
    pub ratio_threshold: f64,
    /// Overrides `space.window` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_horizon() -> i64 {
    DEFAULT_HORIZON
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_ratio() -> f64 {
    DEFAULT_RATIO
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            horizon: DEFAULT_HORIZON,
            epsilon: DEFAULT_EPSILON,
            ratio_threshold: DEFAULT_RATIO,
            window: None,
            seed: 0,
        }
    }
}

/// A real value or a complex `[re, im]`, which is replaced by its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> f64 {
        match self {
            Scalar::Real(v) => v,
            Scalar::Complex([re, im]) => re.hypot(im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    /// `[index, value]` pairs.
    pub values: Vec<(i64, Scalar)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<String>,
}

/// Command-line overrides, applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub notions: Vec<String>,
    pub horizon: Option<i64>,
    pub epsilon: Option<f64>,
    pub ratio_threshold: Option<f64>,
    pub window: Option<i64>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub output: Option<String>,
}

/// Reads, parses and validates a config file.
pub fn parse_config(path: &Path) -> Result<JobConfig, CliError> {
    let format = SourceFormat::from_path(path)?;
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_config_str(&text, format)
}

/// Parses and validates config text; schema errors name the offending key.
pub fn parse_config_str(text: &str, format: SourceFormat) -> Result<JobConfig, CliError> {
    let schema_error = |path: String, message: String| CliError::Config {
        path: if path == "." { "<root>".into() } else { path },
        message,
    };
    let cfg: JobConfig = match format {
        SourceFormat::Toml => {
            let de = toml::Deserializer::parse(text).map_err(|e| schema_error(".".into(), e.message().into()))?;
            serde_path_to_error::deserialize(de)
                .map_err(|e| schema_error(e.path().to_string(), e.inner().message().to_string()))?
        }
        SourceFormat::Json => {
            let mut de = serde_json::Deserializer::from_str(text);
            let cfg = serde_path_to_error::deserialize(&mut de)
                .map_err(|e| schema_error(e.path().to_string(), e.inner().to_string()))?;
            de.end().map_err(|e| schema_error(".".into(), e.to_string()))?;
            cfg
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

impl JobConfig {
    /// Runs every module validator by building the system, family, notions and function.
    pub fn validate(&self) -> Result<(), CliError> {
        self.system()?;
        self.test_family()?;
        self.notion_list()?;
        self.simple_function()?;
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if !o.notions.is_empty() {
            self.notions = o.notions.clone();
        }
        let p = &mut self.parameters;
        p.horizon = o.horizon.unwrap_or(p.horizon);
        p.epsilon = o.epsilon.unwrap_or(p.epsilon);
        p.ratio_threshold = o.ratio_threshold.unwrap_or(p.ratio_threshold);
        p.window = o.window.or(p.window);
        p.seed = o.seed.unwrap_or(p.seed);
        if let Some(f) = o.format {
            self.output.format = f;
        }
        if o.output.is_some() {
            self.output.path = o.output.clone();
        }
        self.validate()
    }

    pub fn window(&self) -> i64 {
        self.parameters.window.unwrap_or(self.space.window)
    }

    pub fn space(&self) -> Result<AtomicSpace, CliError> {
        let w = self.window();
        let space = match &self.space.mass {
            MassSpec::Geometric { r } => AtomicSpace::geometric(w, *r)?,
            MassSpec::BilateralGeometric { r } => AtomicSpace::bilateral_geometric(w, *r)?,
            MassSpec::Counting => AtomicSpace::counting(w)?,
            MassSpec::Table { masses } => {
                let map: std::collections::BTreeMap<i64, f64> = masses.iter().copied().collect();
                if map.len() != masses.len() {
                    return Err(CliError::Config {
                        path: "space.mass.masses".into(),
                        message: "duplicate atom index".into(),
                    });
                }
                AtomicSpace::table(w, map)?
            }
        };
        Ok(space)
    }

    pub fn phi(&self) -> Result<OrliczFunction, CliError> {
        Ok(match self.phi {
            PhiSpec::Power { p } => OrliczFunction::power(p)?,
            PhiSpec::ExpMinusOne => OrliczFunction::exp_minus_one(),
            PhiSpec::ShiftedLinear { a, c } => OrliczFunction::shifted_linear(a, c)?,
            PhiSpec::CappedPower { p, b } => OrliczFunction::capped_power(p, b)?,
        })
    }

    /// Builds and validates the composition system.
    pub fn system(&self) -> Result<CompositionSystem, CliError> {
        let (tau, invertible) = match &self.tau {
            TauSpec::Shift { d, invertible } => (Transformation::shift(*d), *invertible),
            TauSpec::Identity { invertible } => (Transformation::identity(), *invertible),
            TauSpec::Table { pairs, invertible } => (Transformation::table(pairs.iter().copied())?, *invertible),
        };
        let weight = match self.weight {
            WeightSpec::Constant { c } => WeightFamily::Constant { c },
            WeightSpec::PowerDecay { alpha, c } => WeightFamily::PowerDecay { alpha, c },
        };
        let mut system = CompositionSystem::assemble(self.space()?, tau, self.phi()?, weight, 1.0);
        system.distortion_m = match self.distortion_m {
            Some(m) => m,
            None => system.distortion_bound().max(f64::MIN_POSITIVE),
        };
        if !invertible {
            system = system.forward_only();
        }
        oll_core::validate_system(&system)?;
        Ok(system)
    }

    pub fn test_family(&self) -> Result<TestFamily, CliError> {
        let spec = &self.test_family;
        let (lo, hi) = spec.range;
        if lo > hi {
            return Err(CliError::Config {
                path: "test_family.range".into(),
                message: format!("empty range [{lo}, {hi}]"),
            });
        }
        let mut sets = TestFamily::singletons_and_blocks(lo, hi, &spec.block_lengths);
        sets.extend(spec.sets.iter().map(|s| AtomSet::new(s.iter().copied())));
        let p = &self.parameters;
        let fam = TestFamily::new(sets, p.horizon, p.epsilon, p.ratio_threshold)?
            .with_random_unions(spec.random_unions, lo, hi, p.seed)
            .with_random_functions(spec.random_functions, lo, hi, p.seed);
        let w = self.window();
        if let Some(k) = fam.sets.iter().flat_map(AtomSet::iter).find(|k| k.abs() > w) {
            return Err(CliError::Config {
                path: "test_family".into(),
                message: format!("atom {k} lies outside the window [-{w}, {w}]"),
            });
        }
        Ok(fam)
    }

    /// Requested notions in canonical order; all admissible ones when none are listed.
    pub fn notion_list(&self) -> Result<Vec<Notion>, CliError> {
        if self.notions.is_empty() {
            let invertible = !matches!(
                self.tau,
                TauSpec::Shift { invertible: false, .. }
                    | TauSpec::Identity { invertible: false }
                    | TauSpec::Table { invertible: false, .. }
            );
            return Ok(Notion::ALL.into_iter().filter(|n| invertible || !n.two_sided()).collect());
        }
        let mut out = Vec::new();
        for key in &self.notions {
            let n = Notion::from_key(key).ok_or_else(|| CliError::Config {
                path: "notions".into(),
                message: format!(
                    "unknown notion `{key}`, expected one of expansive, positive, uniform_positive, uniform"
                ),
            })?;
            out.push(n);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn simple_function(&self) -> Result<Option<SimpleFunction>, CliError> {
        self.function
            .as_ref()
            .map(|f| {
                let w = self.window();
                if let Some(&(k, _)) = f.values.iter().find(|(k, _)| k.abs() > w) {
                    return Err(CliError::Config {
                        path: "function.values".into(),
                        message: format!("atom {k} lies outside the window [-{w}, {w}]"),
                    });
                }
                Ok(SimpleFunction::new(f.values.iter().map(|&(k, v)| (k, v.value())))?)
            })
            .transpose()
    }
}
