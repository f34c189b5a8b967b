//! Orbits of the composition operator `C_τ g = g ∘ τ`, the set criteria for
//! (uniform, positive) expansivity, and an independent oracle that classifies
//! from orbit norms computed by bisection.
//!
//! For `A` of finite positive measure the criterion quantity is
//!
//! ```text
//! c_n(A) = φ⁻¹(1 / H(μ(τ⁻ⁿ(A))))        ‖C_τⁿ χ_A‖ = 1/c_n(A)
//! ```
//!
//! and the growth ratio is `ρ_n(A) = c_0(A)/c_n(A)`, the norm of `C_τⁿ`
//! applied to the normalized indicator of `A`.
//!
//! # Finite-horizon semantics
//!
//! `inf = 0` and `lim = ∞` over `ℤ` cannot be decided from finitely many
//! terms. Each test set is therefore judged on the orbit `|n| ≤ N` and gets
//! one of three outcomes:
//!
//! * holds: the threshold is reached inside the horizon;
//! * fails: the relevant growth sequence peaks inside the horizon and is
//!   non-increasing from its peak to the end of every limit direction while
//!   staying below the threshold;
//! * otherwise undecided.
//!
//! A notion fails when some set fails, holds when every set holds, and is
//! inconclusive otherwise.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::{validate_system, AtomSet, CompositionSystem};
use crate::orlicz::delta2_probe;
use crate::rearrangement::{indicator_level, luxemburg_norm, SimpleFunction};

/// Relative tolerance for monotonicity and near-tie comparisons on traces.
pub const TRACE_RTOL: f64 = 1e-9;

/// Grid used to probe the Δ2 hypothesis of the uniform notions.
pub const DELTA2_S0: f64 = 1.0;
pub const DELTA2_S_MAX: f64 = 1e6;
pub const DELTA2_SAMPLES: usize = 64;

pub const DEFAULT_HORIZON: i64 = 20;
pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_RATIO: f64 = 1e4;
pub const DEFAULT_WINDOW: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Expansive,
    PositivelyExpansive,
    UniformlyPositivelyExpansive,
    UniformlyExpansive,
}

impl Notion {
    pub const ALL: [Notion; 4] = [
        Notion::Expansive,
        Notion::PositivelyExpansive,
        Notion::UniformlyPositivelyExpansive,
        Notion::UniformlyExpansive,
    ];

    /// Short name used by the CLI and config files.
    pub fn key(self) -> &'static str {
        match self {
            Notion::Expansive => "expansive",
            Notion::PositivelyExpansive => "positive",
            Notion::UniformlyPositivelyExpansive => "uniform_positive",
            Notion::UniformlyExpansive => "uniform",
        }
    }

    pub fn from_key(key: &str) -> Option<Notion> {
        Notion::ALL.into_iter().find(|n| n.key() == key)
    }

    /// Needs `C_τ` to be invertible.
    pub fn two_sided(self) -> bool {
        matches!(self, Notion::Expansive | Notion::UniformlyExpansive)
    }

    /// Carries the Δ2 hypothesis.
    pub fn uniform(self) -> bool {
        matches!(self, Notion::UniformlyPositivelyExpansive | Notion::UniformlyExpansive)
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub set: AtomSet,
    pub n: i64,
    pub value: ExtReal,
}

/// Split of the test sets for the two-sided uniform notion: `forward` sets grow under
/// `τⁿ(A)`, `backward` sets under `τ⁻ⁿ(A)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Bipartition {
    pub forward: Vec<AtomSet>,
    pub backward: Vec<AtomSet>,
}

impl Bipartition {
    pub fn len(&self) -> usize {
        self.forward.len() + self.backward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
    pub bipartition: Option<Bipartition>,
}

impl Verdict {
    pub fn is_decided(&self) -> bool {
        self.status != Status::Inconclusive
    }
}

/// Finite surrogate for "every A of finite positive measure".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFamily {
    /// Sorted lexicographically, no duplicates.
    pub sets: Vec<AtomSet>,
    pub horizon: i64,
    /// Smallness threshold for `c_n/c_0` in the expansive notions.
    pub epsilon: f64,
    /// Growth threshold for `ρ_n` and for orbit norms.
    pub ratio_threshold: f64,
    /// Extra unit-sphere vectors used only by the oracle.
    pub functions: Vec<SimpleFunction>,
}

impl TestFamily {
    pub fn new(sets: Vec<AtomSet>, horizon: i64, epsilon: f64, ratio_threshold: f64) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::InvalidParameter(format!("horizon must be >= 1, got {horizon}")));
        }
        for (name, v) in [("epsilon", epsilon), ("ratio threshold", ratio_threshold)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if sets.iter().any(AtomSet::is_empty) {
            return Err(Error::InvalidParameter("test family contains an empty set".into()));
        }
        let mut sets = sets;
        sets.sort();
        sets.dedup();
        if sets.is_empty() {
            return Err(Error::InvalidParameter("test family has no sets".into()));
        }
        Ok(TestFamily { sets, horizon, epsilon, ratio_threshold, functions: Vec::new() })
    }

    /// Singletons of `[lo, hi]` plus aligned blocks of each length that fit in `[lo, hi]`.
    pub fn singletons_and_blocks(lo: i64, hi: i64, block_lengths: &[i64]) -> Vec<AtomSet> {
        let mut sets: Vec<AtomSet> = (lo..=hi).map(AtomSet::singleton).collect();
        for &len in block_lengths.iter().filter(|&&l| l >= 1) {
            let mut start = lo;
            while start + len - 1 <= hi {
                sets.push(AtomSet::block(start, len));
                start += len;
            }
        }
        sets
    }

    /// Defaults: singletons in `[−8, 8]`, blocks of length 2, 4, 8, `N = 20`, `ε = 1e-4`, `R = 1e4`.
    pub fn standard() -> Self {
        let sets = Self::singletons_and_blocks(-8, 8, &[2, 4, 8]);
        Self::new(sets, DEFAULT_HORIZON, DEFAULT_EPSILON, DEFAULT_RATIO).expect("default family is valid")
    }

    /// Adds `count` random unions of one to four atoms from `[lo, hi]`.
    pub fn with_random_unions(mut self, count: usize, lo: i64, hi: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<i64> = (lo..=hi).collect();
        for _ in 0..count {
            let size = rng.gen_range(1..=4.min(pool.len()));
            self.sets.push(pool.choose_multiple(&mut rng, size).copied().collect());
        }
        self.sets.sort();
        self.sets.dedup();
        self
    }

    /// Adds `count` random simple functions (one to four atoms of `[lo, hi]`, values in ±[0.1, 2]).
    pub fn with_random_functions(mut self, count: usize, lo: i64, hi: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let pool: Vec<i64> = (lo..=hi).collect();
        for _ in 0..count {
            let size = rng.gen_range(1..=4.min(pool.len()));
            let atoms: Vec<i64> = pool.choose_multiple(&mut rng, size).copied().collect();
            let entries = atoms.into_iter().map(|k| {
                let v: f64 = rng.gen_range(0.1..2.0);
                (k, if rng.gen_bool(0.5) { v } else { -v })
            });
            self.functions.push(SimpleFunction::new(entries).expect("distinct atoms"));
        }
        self
    }
}

/// `(n, c_n)` for one set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionTrace {
    pub set: AtomSet,
    pub entries: Vec<(i64, ExtReal)>,
    pub out_of_window: Vec<i64>,
    pub notes: Vec<String>,
}

impl CriterionTrace {
    pub fn get(&self, n: i64) -> Option<ExtReal> {
        self.entries.iter().find(|(m, _)| *m == n).map(|&(_, c)| c)
    }
}

/// `(n, ‖C_τⁿ g‖)` for one function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitTrace {
    pub entries: Vec<(i64, f64)>,
    pub out_of_window: Vec<i64>,
}

impl OrbitTrace {
    pub fn get(&self, n: i64) -> Option<f64> {
        self.entries.iter().find(|(m, _)| *m == n).map(|&(_, v)| v)
    }
}

/// `C_τⁿ g = g ∘ τⁿ`; the value at `k` is `g(τⁿ(k))`.
pub fn compose_iterate(system: &CompositionSystem, g: &SimpleFunction, n: i64) -> Result<SimpleFunction> {
    let mut entries = Vec::with_capacity(g.entries().len());
    for &(a, v) in g.entries() {
        let moved = system.preimage_set(&AtomSet::singleton(a), n)?;
        entries.push((moved.indices()[0], v));
    }
    SimpleFunction::new(entries)
}

/// Luxemburg norms of `C_τⁿ g` for `n` in `range`; steps that leave the window are listed separately.
pub fn orbit_norms(
    system: &CompositionSystem,
    g: &SimpleFunction,
    range: impl IntoIterator<Item = i64>,
) -> Result<OrbitTrace> {
    if g.is_zero() {
        return Err(Error::Domain("orbit norms need a non-zero function".into()));
    }
    let mut trace = OrbitTrace { entries: Vec::new(), out_of_window: Vec::new() };
    for n in range {
        match compose_iterate(system, g, n) {
            Ok(image) => trace.entries.push((n, luxemburg_norm(system, &image)?.value)),
            Err(Error::OutOfWindow { .. }) => trace.out_of_window.push(n),
            Err(e) => return Err(e),
        }
    }
    Ok(trace)
}

/// `c_n = φ⁻¹(1/H(μ(τ⁻ⁿ(A))))` for `n` in `range`.
pub fn criterion_sequence(
    system: &CompositionSystem,
    set: &AtomSet,
    range: impl IntoIterator<Item = i64>,
) -> Result<CriterionTrace> {
    let mu = system.set_measure(set)?;
    if mu == 0.0 {
        return Err(Error::Domain("criterion needs 0 < mu(A)".into()));
    }
    let mut trace =
        CriterionTrace { set: set.clone(), entries: Vec::new(), out_of_window: Vec::new(), notes: Vec::new() };
    for n in range {
        match system.preimage_set(set, n) {
            Ok(image) => {
                if image.is_empty() {
                    trace.notes.push(format!("empty preimage at n = {n}; c_n = b_phi"));
                }
                let mu_n = system.set_measure(&image)?;
                trace.entries.push((n, indicator_level(&system.phi, &system.weight, mu_n)?));
            }
            Err(Error::OutOfWindow { .. }) => trace.out_of_window.push(n),
            Err(e) => return Err(e),
        }
    }
    Ok(trace)
}

// ---------------------------------------------------------------------------
// Trace analysis

/// Values along `n = 0, s, 2s, …, N·s` for a direction `s = ±1`; `None` where the orbit left the window.
type Ray = Vec<Option<f64>>;

fn ray_of(horizon: i64, sign: i64, value: impl Fn(i64) -> Option<f64>) -> Ray {
    (0..=horizon).map(|i| value(sign * i)).collect()
}

fn near_le(a: f64, b: f64) -> bool {
    a <= b || a <= b * (1.0 + TRACE_RTOL)
}

/// Peak index and value when the ray provably stays bounded: complete, peaks before the
/// last step, and is non-increasing from the peak to the end.
fn ray_bounded(ray: &Ray) -> Option<(usize, f64)> {
    let values: Vec<f64> = ray.iter().copied().collect::<Option<_>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let peak = values.iter().position(|&v| near_le(max, v))?;
    if peak + 1 >= values.len() {
        return None;
    }
    values[peak..].windows(2).all(|w| near_le(w[1], w[0])).then_some((peak, values[peak]))
}

/// `ρ_N ≥ R` and `ρ` non-decreasing over the last half of the horizon.
fn ray_grows(ray: &Ray, threshold: f64) -> bool {
    let half = (ray.len() - 1) / 2;
    let Some(tail) = ray[half..].iter().copied().collect::<Option<Vec<f64>>>() else {
        return false;
    };
    let last = *tail.last().expect("non-empty ray");
    last >= threshold && tail.windows(2).all(|w| near_le(w[0], w[1]))
}

enum SetOutcome {
    Holds,
    Fails(Witness),
    Undecided(String),
}

fn aggregate(outcomes: Vec<(String, SetOutcome)>, mut notes: Vec<String>) -> Verdict {
    let mut witness = None;
    let mut undecided = Vec::new();
    for (label, outcome) in outcomes {
        match outcome {
            SetOutcome::Holds => {}
            SetOutcome::Fails(w) => {
                if witness.is_none() {
                    witness = Some(w);
                }
            }
            SetOutcome::Undecided(why) => undecided.push(format!("{label}: {why}")),
        }
    }
    let status = if witness.is_some() {
        Status::Fails
    } else if undecided.is_empty() {
        Status::Holds
    } else {
        Status::Inconclusive
    };
    if status == Status::Inconclusive {
        notes.push(format!("{} test vector(s) undecided within the horizon", undecided.len()));
        notes.extend(undecided.into_iter().take(8));
    }
    Verdict { status, witness, notes, bipartition: None }
}

fn incomplete_note(ray: &Ray) -> &'static str {
    if ray.iter().any(Option::is_none) {
        "orbit left window"
    } else {
        "trace neither reaches the threshold nor is provably bounded"
    }
}

/// Outcome of a sup-type test (expansive / positively expansive) over the given rays.
fn sup_outcome(rays: &[(i64, Ray)], hit: impl Fn(f64) -> bool, witness: impl Fn(i64, f64) -> Witness) -> SetOutcome {
    if rays.iter().any(|(_, ray)| ray.iter().any(|v| v.is_some_and(&hit))) {
        return SetOutcome::Holds;
    }
    let bounds: Option<Vec<(i64, usize, f64)>> =
        rays.iter().map(|(sign, ray)| ray_bounded(ray).map(|(i, v)| (*sign, i, v))).collect();
    match bounds {
        Some(bounds) => {
            let &(sign, i, v) = bounds.iter().max_by(|a, b| a.2.total_cmp(&b.2)).expect("at least one ray");
            SetOutcome::Fails(witness(sign * i as i64, v))
        }
        None => {
            let bad = rays.iter().find(|(_, r)| ray_bounded(r).is_none()).expect("some unbounded ray");
            SetOutcome::Undecided(incomplete_note(&bad.1).into())
        }
    }
}

/// Outcome of a uniform growth test on one ray.
fn uniform_outcome(ray: &Ray, threshold: f64) -> std::result::Result<(), Option<(usize, f64)>> {
    if ray_grows(ray, threshold) {
        return Ok(());
    }
    let last = ray.last().copied().flatten();
    match ray_bounded(ray) {
        Some(peak) if last.is_some_and(|v| v < threshold) => Err(Some(peak)),
        _ => Err(None),
    }
}

fn check_admissible(system: &CompositionSystem, notion: Notion) -> Result<()> {
    let report = validate_system(system)?;
    if notion.two_sided() && !report.two_sided_admissible {
        return Err(Error::Admissibility(format!("{notion} needs an invertible composition operator")));
    }
    Ok(())
}

fn check_family(system: &CompositionSystem, fam: &TestFamily) -> Result<()> {
    for set in &fam.sets {
        if let Some(k) = set.iter().find(|&k| !system.space.in_window(k)) {
            return Err(Error::Domain(format!("test set {} has atom {k} outside the window", set.label())));
        }
    }
    Ok(())
}

/// Δ2 gate for the uniform notions; returns the note to attach when the probe fails.
fn delta2_gate(system: &CompositionSystem) -> Result<Option<String>> {
    let report = delta2_probe(&system.phi, DELTA2_S0, DELTA2_S_MAX, DELTA2_SAMPLES)?;
    Ok((!report.satisfied_on_grid).then(|| {
        format!(
            "Δ2 unverified: probe on [{DELTA2_S0}, {DELTA2_S_MAX}] gave max ratio {}{}",
            report.max_ratio,
            if report.ratio_growing { " (still growing)" } else { "" }
        )
    }))
}

fn apply_delta2_gate(mut verdict: Verdict, gate: Option<String>) -> Verdict {
    if let Some(note) = gate {
        if verdict.status == Status::Holds {
            verdict.status = Status::Inconclusive;
        }
        verdict.notes.insert(0, note);
    }
    verdict
}

/// Criterion traces and growth rays for every set of the family over `|n| ≤ N`.
struct CriterionData {
    set: AtomSet,
    c0: ExtReal,
    trace: CriterionTrace,
}

impl CriterionData {
    fn collect(system: &CompositionSystem, fam: &TestFamily) -> Result<Vec<Self>> {
        fam.sets
            .iter()
            .map(|set| {
                let trace = criterion_sequence(system, set, -fam.horizon..=fam.horizon)?;
                let c0 = trace.get(0).expect("n = 0 never leaves the window");
                Ok(CriterionData { set: set.clone(), c0, trace })
            })
            .collect()
    }

    /// `ρ_n = c_0/c_n` along a direction.
    fn growth_ray(&self, horizon: i64, sign: i64) -> Ray {
        ray_of(horizon, sign, |n| self.trace.get(n).map(|c| self.c0.div(c).value()))
    }
}

/// Expansivity via `inf_{n∈ℤ} c_n = 0`, tested as `min_{|n|≤N} c_n/c_0 < ε`.
pub fn classify_expansive(system: &CompositionSystem, fam: &TestFamily) -> Result<Verdict> {
    sup_criterion(system, fam, Notion::Expansive)
}

/// Positive expansivity via `inf_{n∈ℕ} c_n = 0`.
pub fn classify_positively_expansive(system: &CompositionSystem, fam: &TestFamily) -> Result<Verdict> {
    sup_criterion(system, fam, Notion::PositivelyExpansive)
}

fn sup_criterion(system: &CompositionSystem, fam: &TestFamily, notion: Notion) -> Result<Verdict> {
    check_admissible(system, notion)?;
    check_family(system, fam)?;
    let signs: &[i64] = if notion.two_sided() { &[1, -1] } else { &[1] };
    let data = CriterionData::collect(system, fam)?;
    let outcomes = data
        .iter()
        .map(|d| {
            let rays: Vec<(i64, Ray)> = signs.iter().map(|&s| (s, d.growth_ray(fam.horizon, s))).collect();
            let outcome = sup_outcome(
                &rays,
                |rho| ExtReal(rho).recip().value() < fam.epsilon,
                |n, _| Witness { set: d.set.clone(), n, value: d.trace.get(n).expect("bounded rays are complete") },
            );
            (d.set.label(), outcome)
        })
        .collect();
    Ok(aggregate(outcomes, Vec::new()))
}

/// Uniform positive expansivity via `ρ_n(A) → ∞` uniformly, tested as `ρ_N ≥ R` for every set.
pub fn classify_uniformly_positively_expansive(system: &CompositionSystem, fam: &TestFamily) -> Result<Verdict> {
    check_admissible(system, Notion::UniformlyPositivelyExpansive)?;
    check_family(system, fam)?;
    let gate = delta2_gate(system)?;
    let data = CriterionData::collect(system, fam)?;
    let outcomes = data
        .iter()
        .map(|d| {
            let ray = d.growth_ray(fam.horizon, 1);
            let outcome = match uniform_outcome(&ray, fam.ratio_threshold) {
                Ok(()) => SetOutcome::Holds,
                Err(Some((i, v))) => SetOutcome::Fails(Witness { set: d.set.clone(), n: i as i64, value: ExtReal(v) }),
                Err(None) => SetOutcome::Undecided(incomplete_note(&ray).into()),
            };
            (d.set.label(), outcome)
        })
        .collect();
    Ok(apply_delta2_gate(aggregate(outcomes, Vec::new()), gate))
}

/// Uniform expansivity via a split of the sets into forward-growing (`μ(τⁿ(A))`)
/// and backward-growing (`μ(τ⁻ⁿ(A))`) classes; assignment is greedy, forward first.
pub fn classify_uniformly_expansive(system: &CompositionSystem, fam: &TestFamily) -> Result<Verdict> {
    check_admissible(system, Notion::UniformlyExpansive)?;
    check_family(system, fam)?;
    let gate = delta2_gate(system)?;
    let data = CriterionData::collect(system, fam)?;
    let mut split = Bipartition::default();
    let outcomes = data
        .iter()
        .map(|d| {
            let forward = d.growth_ray(fam.horizon, -1);
            let backward = d.growth_ray(fam.horizon, 1);
            let outcome = two_sided_uniform_outcome(&d.set, &forward, &backward, fam.ratio_threshold, &mut split);
            (d.set.label(), outcome)
        })
        .collect();
    let mut verdict = aggregate(outcomes, Vec::new());
    verdict.bipartition = Some(split);
    Ok(apply_delta2_gate(verdict, gate))
}

fn two_sided_uniform_outcome(
    set: &AtomSet,
    forward: &Ray,
    backward: &Ray,
    threshold: f64,
    split: &mut Bipartition,
) -> SetOutcome {
    let fwd = uniform_outcome(forward, threshold);
    if fwd.is_ok() {
        split.forward.push(set.clone());
        return SetOutcome::Holds;
    }
    let bwd = uniform_outcome(backward, threshold);
    if bwd.is_ok() {
        split.backward.push(set.clone());
        return SetOutcome::Holds;
    }
    match (fwd, bwd) {
        (Err(Some((i, v))), Err(Some((j, u)))) => {
            let (n, value) = if v >= u { (-(i as i64), v) } else { (j as i64, u) };
            SetOutcome::Fails(Witness { set: set.clone(), n, value: ExtReal(value) })
        }
        _ => {
            let note = if forward.iter().chain(backward).any(Option::is_none) {
                "orbit left window"
            } else {
                "neither direction grows nor is provably bounded"
            };
            SetOutcome::Undecided(note.into())
        }
    }
}

/// Classifies `notion` with the criteria above.
pub fn classify(system: &CompositionSystem, fam: &TestFamily, notion: Notion) -> Result<Verdict> {
    match notion {
        Notion::Expansive => classify_expansive(system, fam),
        Notion::PositivelyExpansive => classify_positively_expansive(system, fam),
        Notion::UniformlyPositivelyExpansive => classify_uniformly_positively_expansive(system, fam),
        Notion::UniformlyExpansive => classify_uniformly_expansive(system, fam),
    }
}

// ---------------------------------------------------------------------------
// Oracle

/// A unit-sphere test vector and its orbit norms.
struct OracleVector {
    label: String,
    set: AtomSet,
    trace: OrbitTrace,
}

impl OracleVector {
    fn ray(&self, horizon: i64, sign: i64) -> Ray {
        ray_of(horizon, sign, |n| self.trace.get(n))
    }
}

fn oracle_vectors(system: &CompositionSystem, fam: &TestFamily) -> Result<Vec<OracleVector>> {
    let range = || -fam.horizon..=fam.horizon;
    let mut out = Vec::with_capacity(fam.sets.len() + fam.functions.len());
    for set in &fam.sets {
        let indicator = SimpleFunction::indicator(set);
        let norm = luxemburg_norm(system, &indicator)?.value;
        let unit = indicator.scale(norm.recip());
        out.push(OracleVector { label: set.label(), set: set.clone(), trace: orbit_norms(system, &unit, range())? });
    }
    for (i, g) in fam.functions.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let norm = luxemburg_norm(system, g)?.value;
        let unit = g.scale(norm.recip());
        out.push(OracleVector {
            label: format!("f{i}"),
            set: unit.support(),
            trace: orbit_norms(system, &unit, range())?,
        });
    }
    Ok(out)
}

/// Direct finite-horizon classification from orbit norms of normalized test vectors:
/// `sup ‖Cⁿg‖ ≥ R` for the expansive notions, `‖C^N g‖ ≥ R` (growing) for the uniform ones.
pub fn oracle_classify(system: &CompositionSystem, fam: &TestFamily, notion: Notion) -> Result<Verdict> {
    check_admissible(system, notion)?;
    check_family(system, fam)?;
    let vectors = oracle_vectors(system, fam)?;
    let threshold = fam.ratio_threshold;
    let mut split = Bipartition::default();
    let outcomes = vectors
        .iter()
        .map(|v| {
            let witness = |n: i64, value: f64| Witness { set: v.set.clone(), n, value: ExtReal(value) };
            let outcome = match notion {
                Notion::Expansive | Notion::PositivelyExpansive => {
                    let signs: &[i64] = if notion.two_sided() { &[1, -1] } else { &[1] };
                    let rays: Vec<(i64, Ray)> = signs.iter().map(|&s| (s, v.ray(fam.horizon, s))).collect();
                    sup_outcome(&rays, |norm| norm >= threshold, witness)
                }
                Notion::UniformlyPositivelyExpansive => {
                    let ray = v.ray(fam.horizon, 1);
                    match uniform_outcome(&ray, threshold) {
                        Ok(()) => SetOutcome::Holds,
                        Err(Some((i, value))) => SetOutcome::Fails(witness(i as i64, value)),
                        Err(None) => SetOutcome::Undecided(incomplete_note(&ray).into()),
                    }
                }
                Notion::UniformlyExpansive => two_sided_uniform_outcome(
                    &v.set,
                    &v.ray(fam.horizon, -1),
                    &v.ray(fam.horizon, 1),
                    threshold,
                    &mut split,
                ),
            };
            (v.label.clone(), outcome)
        })
        .collect();
    let mut verdict = aggregate(outcomes, Vec::new());
    if notion == Notion::UniformlyExpansive {
        verdict.bipartition = Some(split);
    }
    Ok(verdict)
}

/// One CSV row: the criterion value, growth ratio and indicator orbit norm at `(A, n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub set: AtomSet,
    pub n: i64,
    pub c_n: ExtReal,
    pub ratio: ExtReal,
    pub norm: f64,
}

/// Rows for every set of the family and every in-window `|n| ≤ N`, sets in order, `n` ascending.
pub fn trace_rows(system: &CompositionSystem, fam: &TestFamily) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for set in &fam.sets {
        let trace = criterion_sequence(system, set, -fam.horizon..=fam.horizon)?;
        let c0 = trace.get(0).expect("n = 0 is always in the window");
        let norms = orbit_norms(system, &SimpleFunction::indicator(set), -fam.horizon..=fam.horizon)?;
        for &(n, c_n) in &trace.entries {
            rows.push(TraceRow {
                set: set.clone(),
                n,
                c_n,
                ratio: c0.div(c_n),
                norm: norms.get(n).unwrap_or(f64::NAN),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{AtomicSpace, Transformation};
    use crate::orlicz::OrliczFunction;
    use crate::weights::WeightFamily;

    fn power1(space: AtomicSpace, tau: Transformation) -> CompositionSystem {
        let m = CompositionSystem::assemble(
            space.clone(),
            tau.clone(),
            OrliczFunction::power(1.0).unwrap(),
            WeightFamily::Constant { c: 1.0 },
            1.0,
        )
        .distortion_bound()
        .max(f64::MIN_POSITIVE);
        CompositionSystem::new(space, tau, OrliczFunction::power(1.0).unwrap(), WeightFamily::Constant { c: 1.0 }, m)
            .unwrap()
    }

    fn s1() -> CompositionSystem {
        power1(AtomicSpace::geometric(64, 0.5).unwrap(), Transformation::shift(1))
    }

    #[test]
    fn compose_examples() {
        let s = s1();
        let chi0 = SimpleFunction::indicator(&AtomSet::singleton(0));
        assert_eq!(compose_iterate(&s, &chi0, 3).unwrap(), SimpleFunction::indicator(&AtomSet::singleton(-3)));
        let g = SimpleFunction::new([(0, 2.0), (1, 5.0)]).unwrap();
        assert_eq!(compose_iterate(&s, &g, 1).unwrap(), SimpleFunction::new([(-1, 2.0), (0, 5.0)]).unwrap());
        let id = power1(AtomicSpace::counting(8).unwrap(), Transformation::identity());
        assert_eq!(compose_iterate(&id, &g, 7).unwrap(), g);
        assert_eq!(compose_iterate(&s, &chi0, 65).unwrap_err(), Error::OutOfWindow { n: 65 });
    }

    #[test]
    fn orbit_norm_examples() {
        let s = s1();
        let trace = orbit_norms(&s, &SimpleFunction::indicator(&AtomSet::singleton(0)), 0..=3).unwrap();
        for (n, expected) in [(0, 1.0), (1, 2.0), (2, 4.0), (3, 8.0)] {
            let v = trace.get(n).unwrap();
            assert!((v - expected).abs() <= 1e-11 * expected, "n={n}: {v}");
        }
        let c = power1(AtomicSpace::counting(16).unwrap(), Transformation::shift(1));
        let trace = orbit_norms(&c, &SimpleFunction::indicator(&AtomSet::singleton(0)), -3..=3).unwrap();
        assert!(trace.entries.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-11));
        let trace = orbit_norms(&c, &SimpleFunction::indicator(&AtomSet::singleton(0)), 15..=17).unwrap();
        assert_eq!(trace.out_of_window, vec![17]);
        assert!(orbit_norms(&c, &SimpleFunction::zero(), 0..=1).is_err());
    }

    #[test]
    fn criterion_examples() {
        let s = s1();
        let t = criterion_sequence(&s, &AtomSet::singleton(0), 0..=3).unwrap();
        assert_eq!(t.get(3).unwrap().value(), 0.125);
        assert_eq!(t.get(0).unwrap().value(), 1.0);
        let id = power1(AtomicSpace::geometric(16, 0.5).unwrap(), Transformation::identity());
        let t = criterion_sequence(&id, &AtomSet::new([1, 2]), -4..=4).unwrap();
        assert!(t.entries.iter().all(|&(_, c)| c == t.get(0).unwrap()));
        assert!(criterion_sequence(&s, &AtomSet::empty(), 0..=1).is_err());
    }

    #[test]
    fn ray_analysis() {
        let ray = |v: &[f64]| v.iter().map(|&x| Some(x)).collect::<Ray>();
        assert_eq!(ray_bounded(&ray(&[1.0, 1.0, 1.0])), Some((0, 1.0)));
        assert_eq!(ray_bounded(&ray(&[1.0, 4.0, 2.0, 2.0])), Some((1, 4.0)));
        assert_eq!(ray_bounded(&ray(&[1.0, 2.0, 4.0])), None);
        assert_eq!(ray_bounded(&ray(&[1.0, 4.0, 2.0, 3.0])), None);
        assert_eq!(ray_bounded(&vec![Some(1.0), None, Some(1.0)]), None);
        assert!(ray_grows(&ray(&[1.0, 2.0, 4.0, 8.0, 16.0]), 16.0));
        assert!(!ray_grows(&ray(&[1.0, 2.0, 4.0, 8.0, 16.0]), 17.0));
        assert!(!ray_grows(&ray(&[1.0, 2.0, 40.0, 8.0, 16.0]), 10.0));
    }

    #[test]
    fn standard_family_shape() {
        let fam = TestFamily::standard();
        // 17 singletons + 8 + 4 + 2 blocks
        assert_eq!(fam.sets.len(), 31);
        assert!(fam.sets.windows(2).all(|w| w[0] < w[1]));
        assert!(fam.sets.contains(&AtomSet::block(0, 8)));
        let more = fam.clone().with_random_unions(5, -8, 8, 7);
        assert!(more.sets.len() >= 31);
        let again = fam.with_random_unions(5, -8, 8, 7);
        assert_eq!(more, again);
    }

    #[test]
    fn family_validation() {
        assert!(TestFamily::new(vec![AtomSet::empty()], 20, 1e-4, 1e4).is_err());
        assert!(TestFamily::new(vec![AtomSet::singleton(0)], 0, 1e-4, 1e4).is_err());
        assert!(TestFamily::new(vec![AtomSet::singleton(0)], 5, 0.0, 1e4).is_err());
        assert!(TestFamily::new(vec![], 5, 1e-4, 1e4).is_err());
    }

    #[test]
    fn forward_only_system_rejects_two_sided_notions() {
        let s = s1().forward_only();
        let fam = TestFamily::standard();
        assert!(matches!(classify_expansive(&s, &fam), Err(Error::Admissibility(_))));
        assert!(matches!(oracle_classify(&s, &fam, Notion::UniformlyExpansive), Err(Error::Admissibility(_))));
        assert_eq!(classify_positively_expansive(&s, &fam).unwrap().status, Status::Holds);
    }

    #[test]
    fn notion_keys_round_trip() {
        for n in Notion::ALL {
            assert_eq!(Notion::from_key(n.key()), Some(n));
        }
        assert_eq!(Notion::from_key("chaotic"), None);
    }
}
