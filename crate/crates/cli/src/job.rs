//! Job orchestration for each subcommand.

use std::collections::BTreeMap;
use std::time::Instant;

use oll_core::dynamics::{DELTA2_S0, DELTA2_SAMPLES, DELTA2_S_MAX};
use oll_core::{
    classify, delta2_probe, distribution, luxemburg_norm, modular, oracle_classify, orbit_norms, rearrangement,
    trace_rows, AtomicSpace, CompositionSystem, Delta2Report, ExtReal, LuxemburgNorm, Notion, OrbitTrace,
    OrliczFunction, SimpleFunction, Status, StepFunction, SystemReport, TraceRow, Transformation, Verdict,
    WeightFunction,
};
use serde::Serialize;

use crate::config::JobConfig;
use crate::report::{digest, Report, Timing, ToolInfo};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSummary {
    pub space: AtomicSpace,
    pub tau: Transformation,
    pub phi: OrliczFunction,
    pub weight: WeightFunction,
    pub distortion_m: f64,
    pub invertible: bool,
    pub validation: SystemReport,
}

impl SystemSummary {
    fn of(system: &CompositionSystem) -> Result<Self, CliError> {
        Ok(SystemSummary {
            space: system.space.clone(),
            tau: system.tau.clone(),
            phi: system.phi,
            weight: system.weight,
            distortion_m: system.distortion_m,
            invertible: system.invertible,
            validation: oll_core::validate_system(system)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub horizon: i64,
    pub epsilon: f64,
    pub ratio_threshold: f64,
    pub window: i64,
    pub seed: u64,
    pub test_sets: usize,
    pub test_functions: usize,
}

/// Either side of the comparison: a verdict, or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Verdict(Verdict),
    Error(String),
}

impl Outcome {
    fn of(r: oll_core::Result<Verdict>) -> Self {
        match r {
            Ok(v) => Outcome::Verdict(v),
            Err(e) => Outcome::Error(e.to_string()),
        }
    }

    pub fn status(&self) -> Option<Status> {
        match self {
            Outcome::Verdict(v) => Some(v.status),
            Outcome::Error(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NotionResult {
    pub criterion: Outcome,
    pub oracle: Outcome,
    /// Both sides reached the same status, or both refused the notion.
    pub agreement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub system: SystemSummary,
    pub family: FamilySummary,
    pub notions: BTreeMap<&'static str, NotionResult>,
    pub agreement: bool,
}

pub type RunReport = Report<Classification>;

impl RunReport {
    /// 0 when every notion was decided, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let decided =
            self.result.notions.values().all(|r| matches!(r.criterion.status(), Some(Status::Holds | Status::Fails)));
        if decided {
            0
        } else {
            1
        }
    }
}

fn envelope<T>(cfg: &JobConfig, command: &'static str, start: Instant, result: T) -> Result<Report<T>, CliError> {
    Ok(Report {
        tool: ToolInfo::current(),
        command,
        config_digest: digest(cfg)?,
        name: cfg.name.clone(),
        result,
        timing: Timing { elapsed_seconds: start.elapsed().as_secs_f64() },
    })
}

/// Classifies every requested notion with both the criterion and the oracle.
pub fn run_job(cfg: &JobConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let system = cfg.system()?;
    let fam = cfg.test_family()?;
    let mut notions = BTreeMap::new();
    for notion in cfg.notion_list()? {
        log::info!("classifying {notion}");
        let criterion = Outcome::of(classify(&system, &fam, notion));
        let oracle = Outcome::of(oracle_classify(&system, &fam, notion));
        let agreement = criterion.status() == oracle.status();
        if !agreement {
            log::warn!("{notion}: criterion {:?} vs oracle {:?}", criterion.status(), oracle.status());
        }
        notions.insert(notion.key(), NotionResult { criterion, oracle, agreement });
    }
    let agreement = notions.values().all(|r| r.agreement);
    let family = FamilySummary {
        horizon: fam.horizon,
        epsilon: fam.epsilon,
        ratio_threshold: fam.ratio_threshold,
        window: cfg.window(),
        seed: cfg.parameters.seed,
        test_sets: fam.sets.len(),
        test_functions: fam.functions.len(),
    };
    let result = Classification { system: SystemSummary::of(&system)?, family, notions, agreement };
    envelope(cfg, "classify", start, result)
}

fn require_function(cfg: &JobConfig) -> Result<SimpleFunction, CliError> {
    cfg.simple_function()?.ok_or_else(|| CliError::Config {
        path: "function".into(),
        message: "this command needs a [function] table".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormResult {
    pub function: SimpleFunction,
    pub norm: LuxemburgNorm,
    pub modular_at_norm: ExtReal,
    pub modular_at_one: ExtReal,
}

pub fn run_norm(cfg: &JobConfig) -> Result<Report<NormResult>, CliError> {
    let start = Instant::now();
    let system = cfg.system()?;
    let g = require_function(cfg)?;
    let norm = luxemburg_norm(&system, &g)?;
    let modular_at_norm = if g.is_zero() { ExtReal::ZERO } else { modular(&system, &g, norm.value)? };
    let modular_at_one = modular(&system, &g, 1.0)?;
    envelope(cfg, "norm", start, NormResult { function: g, norm, modular_at_norm, modular_at_one })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelMeasure {
    pub level: f64,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RearrangeResult {
    pub function: SimpleFunction,
    pub rearrangement: StepFunction,
    /// `μ_g(λ)` at `λ = 0` and at each value of `g*`.
    pub distribution: Vec<LevelMeasure>,
}

pub fn run_rearrange(cfg: &JobConfig) -> Result<Report<RearrangeResult>, CliError> {
    let start = Instant::now();
    let space = cfg.space()?;
    let g = require_function(cfg)?;
    let star = rearrangement(&space, &g)?;
    let mut distribution_rows = Vec::with_capacity(star.values.len() + 1);
    for level in std::iter::once(0.0).chain(star.values.iter().copied()) {
        distribution_rows.push(LevelMeasure { level, measure: distribution(&space, &g, level)? });
    }
    envelope(
        cfg,
        "rearrange",
        start,
        RearrangeResult { function: g, rearrangement: star, distribution: distribution_rows },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateResult {
    pub rows: Vec<TraceRow>,
    /// Orbit norms of the `[function]` table, when one is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitTrace>,
}

pub fn run_simulate(cfg: &JobConfig) -> Result<Report<SimulateResult>, CliError> {
    let start = Instant::now();
    let system = cfg.system()?;
    let fam = cfg.test_family()?;
    let rows = trace_rows(&system, &fam)?;
    let orbit = match cfg.simple_function()? {
        Some(g) if !g.is_zero() => Some(orbit_norms(&system, &g, -fam.horizon..=fam.horizon)?),
        _ => None,
    };
    envelope(cfg, "simulate", start, SimulateResult { rows, orbit })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGrid {
    pub s0: f64,
    pub s_max: f64,
    pub samples: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid { s0: DELTA2_S0, s_max: DELTA2_S_MAX, samples: DELTA2_SAMPLES }
    }
}

pub fn run_probe(cfg: &JobConfig, grid: ProbeGrid) -> Result<Report<Delta2Report>, CliError> {
    let start = Instant::now();
    let report = delta2_probe(&cfg.phi()?, grid.s0, grid.s_max, grid.samples)?;
    envelope(cfg, "probe-delta2", start, report)
}

/// Notions whose criterion verdict is not decided.
pub fn undecided(report: &RunReport) -> Vec<Notion> {
    report
        .result
        .notions
        .iter()
        .filter(|(_, r)| !matches!(r.criterion.status(), Some(Status::Holds | Status::Fails)))
        .filter_map(|(k, _)| Notion::from_key(k))
        .collect()
}
