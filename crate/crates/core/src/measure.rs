//! Atomic σ-finite measure spaces over integer-indexed atoms, finite atom
//! sets, injective transformations with exact preimages, and the composition
//! dynamical system built from them.
//!
//! Infinite spaces are described by closed-form mass rules and explored
//! inside a finite index window `[−W, W]`. Any orbit step that leaves the
//! window is reported as [`Error::OutOfWindow`]; nothing is truncated
//! silently.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::orlicz::OrliczFunction;
use crate::weights::{WeightFamily, WeightFunction};

/// Relative slack when comparing measure ratios against a stored distortion constant.
const DISTORTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MassRule {
    /// `m(k) = r^k`.
    Geometric { r: f64 },
    /// `m(k) = r^|k|`.
    BilateralGeometric { r: f64 },
    /// `m(k) = 1`.
    Counting,
    /// Explicit masses for every index of the window; the space is the window itself.
    Table { masses: BTreeMap<i64, f64> },
}

impl MassRule {
    fn closed_form(&self, k: i64) -> Option<f64> {
        let pow = |r: f64, e: i64| r.powf(e as f64);
        match self {
            MassRule::Geometric { r } => Some(pow(*r, k)),
            MassRule::BilateralGeometric { r } => Some(pow(*r, k.unsigned_abs() as i64)),
            MassRule::Counting => Some(1.0),
            MassRule::Table { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicSpace {
    /// Half-width `W` of the index window `[−W, W]`.
    pub window: i64,
    pub mass: MassRule,
}

impl AtomicSpace {
    pub fn new(window: i64, mass: MassRule) -> Result<Self> {
        let space = AtomicSpace { window, mass };
        space.validate()?;
        Ok(space)
    }

    pub fn counting(window: i64) -> Result<Self> {
        Self::new(window, MassRule::Counting)
    }

    pub fn geometric(window: i64, r: f64) -> Result<Self> {
        Self::new(window, MassRule::Geometric { r })
    }

    pub fn bilateral_geometric(window: i64, r: f64) -> Result<Self> {
        Self::new(window, MassRule::BilateralGeometric { r })
    }

    pub fn table(window: i64, masses: BTreeMap<i64, f64>) -> Result<Self> {
        Self::new(window, MassRule::Table { masses })
    }

    /// Same mass rule, different window.
    pub fn with_window(&self, window: i64) -> Result<Self> {
        Self::new(window, self.mass.clone())
    }

    pub fn window_range(&self) -> RangeInclusive<i64> {
        -self.window..=self.window
    }

    pub fn in_window(&self, k: i64) -> bool {
        self.window_range().contains(&k)
    }

    /// Positivity and finiteness of every atom in the window; table coverage.
    pub fn validate(&self) -> Result<()> {
        if self.window < 0 {
            return Err(Error::validation(format!("window half-width must be >= 0, got {}", self.window), None));
        }
        match &self.mass {
            MassRule::Geometric { r } | MassRule::BilateralGeometric { r } => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::validation(format!("mass ratio r must be finite and positive, got {r}"), None));
                }
            }
            MassRule::Counting => {}
            MassRule::Table { masses } => {
                if let Some(&k) = masses.keys().find(|&&k| !self.in_window(k)) {
                    return Err(Error::validation("table mass defined outside the window", Some(k)));
                }
                if let Some(k) = self.window_range().find(|k| !masses.contains_key(k)) {
                    return Err(Error::validation("table mass missing for atom", Some(k)));
                }
            }
        }
        for k in self.window_range() {
            let m = self.atom_mass(k)?;
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::validation(format!("atom mass must be positive and finite, got {m}"), Some(k)));
            }
        }
        Ok(())
    }

    /// `m(k)` for an atom of the window.
    pub fn atom_mass(&self, k: i64) -> Result<f64> {
        if !self.in_window(k) {
            return Err(Error::Domain(format!("atom {k} outside window [-{0}, {0}]", self.window)));
        }
        Ok(self.rule_mass(k).expect("window atoms always have a mass"))
    }

    /// Mass given by the rule, also outside the window for closed-form rules.
    fn rule_mass(&self, k: i64) -> Option<f64> {
        match &self.mass {
            MassRule::Table { masses } => masses.get(&k).copied(),
            rule => rule.closed_form(k),
        }
    }

    /// `μ(X)`: closed form for the infinite families, the window sum for tables.
    pub fn total_measure(&self) -> ExtReal {
        match &self.mass {
            MassRule::BilateralGeometric { r } if *r < 1.0 => ExtReal((1.0 + r) / (1.0 - r)),
            MassRule::Geometric { .. } | MassRule::BilateralGeometric { .. } | MassRule::Counting => ExtReal::INFINITY,
            MassRule::Table { masses } => ExtReal(masses.values().sum()),
        }
    }

    /// `μ(A) = Σ_{k∈A} m(k)`.
    pub fn set_measure(&self, set: &AtomSet) -> Result<f64> {
        set.iter().map(|k| self.atom_mass(k)).sum()
    }
}

/// A finite set of atoms, stored sorted and without duplicates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AtomSet(Vec<i64>);

impl AtomSet {
    pub fn new(indices: impl IntoIterator<Item = i64>) -> Self {
        let set: BTreeSet<i64> = indices.into_iter().collect();
        AtomSet(set.into_iter().collect())
    }

    pub fn empty() -> Self {
        AtomSet(Vec::new())
    }

    pub fn singleton(k: i64) -> Self {
        AtomSet(vec![k])
    }

    /// `{start, start+1, …, start+len−1}`.
    pub fn block(start: i64, len: i64) -> Self {
        AtomSet((start..start + len).collect())
    }

    pub fn indices(&self) -> &[i64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: i64) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    pub fn is_disjoint(&self, other: &AtomSet) -> bool {
        self.iter().all(|k| !other.contains(k))
    }

    pub fn union(&self, other: &AtomSet) -> AtomSet {
        AtomSet::new(self.iter().chain(other.iter()))
    }

    /// Compact label such as `{-1;0;3}` (no commas, so it is safe inside CSV).
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        format!("{{{}}}", parts.join(";"))
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for AtomSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl FromIterator<i64> for AtomSet {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        AtomSet::new(iter)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Transformation {
    /// `τ(k) = k + d`.
    Shift { d: i64 },
    /// Explicit permutation of a subset of the window; unlisted atoms are fixed.
    Table {
        forward: BTreeMap<i64, i64>,
        #[serde(skip)]
        inverse: BTreeMap<i64, i64>,
    },
}

impl Transformation {
    pub fn shift(d: i64) -> Self {
        Transformation::Shift { d }
    }

    pub fn identity() -> Self {
        Transformation::Shift { d: 0 }
    }

    /// Builds a table bijection from `(k, τ(k))` pairs; checks injectivity and that the
    /// image of the listed atoms is exactly the listed atoms.
    pub fn table(pairs: impl IntoIterator<Item = (i64, i64)>) -> Result<Self> {
        let mut forward = BTreeMap::new();
        let mut inverse = BTreeMap::new();
        for (from, to) in pairs {
            if forward.insert(from, to).is_some() {
                return Err(Error::validation("transformation table lists an atom twice", Some(from)));
            }
            if let Some(prev) = inverse.insert(to, from) {
                return Err(Error::validation(
                    format!("transformation not injective: {prev} and {from} both map to {to}"),
                    Some(to),
                ));
            }
        }
        if let Some(&k) = inverse.keys().find(|k| !forward.contains_key(k)) {
            return Err(Error::validation("table image leaves the listed atoms (not a permutation)", Some(k)));
        }
        Ok(Transformation::Table { forward, inverse })
    }

    /// `τ(k)`.
    pub fn forward(&self, k: i64) -> Option<i64> {
        match self {
            Transformation::Shift { d } => k.checked_add(*d),
            Transformation::Table { forward, .. } => Some(*forward.get(&k).unwrap_or(&k)),
        }
    }

    /// `τ⁻¹(k)`.
    pub fn backward(&self, k: i64) -> Option<i64> {
        match self {
            Transformation::Shift { d } => k.checked_sub(*d),
            Transformation::Table { inverse, .. } => Some(*inverse.get(&k).unwrap_or(&k)),
        }
    }

    /// `τⁿ(k)` for any integer `n` (negative powers use the inverse).
    pub fn iterate(&self, k: i64, n: i64) -> Option<i64> {
        match self {
            Transformation::Shift { d } => d.checked_mul(n).and_then(|s| k.checked_add(s)),
            Transformation::Table { .. } => {
                let mut x = k;
                for _ in 0..n.unsigned_abs() {
                    x = if n > 0 { self.forward(x)? } else { self.backward(x)? };
                }
                Some(x)
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Transformation::Shift { d } => *d == 0,
            Transformation::Table { forward, .. } => forward.iter().all(|(k, v)| k == v),
        }
    }
}

/// Atomic space, injective transformation, Orlicz function, weight and distortion constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionSystem {
    pub space: AtomicSpace,
    pub tau: Transformation,
    pub phi: OrliczFunction,
    pub weight: WeightFunction,
    /// Stored bound `M` with `μ(τ⁻¹(A)) ≤ M·μ(A)`.
    pub distortion_m: f64,
    /// Whether `C_τ⁻¹ = C_{τ⁻¹}` may be used (two-sided notions).
    pub invertible: bool,
}

impl CompositionSystem {
    /// Assembles a system without validation; the weight's `K` is set to `[0, μ(X)]`.
    pub fn assemble(
        space: AtomicSpace,
        tau: Transformation,
        phi: OrliczFunction,
        weight: WeightFamily,
        distortion_m: f64,
    ) -> Self {
        let weight = WeightFunction { family: weight, domain_upper: space.total_measure() };
        CompositionSystem { space, tau, phi, weight, distortion_m, invertible: true }
    }

    /// Assembles and validates.
    pub fn new(
        space: AtomicSpace,
        tau: Transformation,
        phi: OrliczFunction,
        weight: WeightFamily,
        distortion_m: f64,
    ) -> Result<Self> {
        let system = Self::assemble(space, tau, phi, weight, distortion_m);
        validate_system(&system)?;
        Ok(system)
    }

    /// Marks the inverse operator as unavailable (forward notions only).
    pub fn forward_only(mut self) -> Self {
        self.invertible = false;
        self
    }

    pub fn set_measure(&self, set: &AtomSet) -> Result<f64> {
        self.space.set_measure(set)
    }

    /// `{k : τⁿ(k) ∈ A}`, i.e. `τ⁻ⁿ(A)`; negative `n` gives the forward image `τ^|n|(A)`.
    pub fn preimage_set(&self, set: &AtomSet, n: i64) -> Result<AtomSet> {
        let mut out = Vec::with_capacity(set.len());
        for a in set.iter() {
            if !self.space.in_window(a) {
                return Err(Error::Domain(format!("atom {a} outside the index window")));
            }
            match n.checked_neg().and_then(|m| self.tau.iterate(a, m)) {
                Some(k) if self.space.in_window(k) => out.push(k),
                _ => return Err(Error::OutOfWindow { n }),
            }
        }
        Ok(AtomSet::new(out))
    }

    /// Least `M` with `μ(τ⁻¹{k}) ≤ M·m(k)` over the window atoms.
    pub fn distortion_bound(&self) -> f64 {
        self.ratio_sup(|k| self.tau.backward(k)).0
    }

    /// Least `M'` with `μ(τ{k}) ≤ M'·m(k)`, the bound for `τ⁻¹`.
    pub fn inverse_distortion_bound(&self) -> f64 {
        self.ratio_sup(|k| self.tau.forward(k)).0
    }

    /// `sup_k m(image(k))/m(k)` and the maximising atom. Images without a mass count as 0.
    fn ratio_sup(&self, image: impl Fn(i64) -> Option<i64>) -> (f64, Option<i64>) {
        let mut best = (0.0, None);
        for k in self.space.window_range() {
            let Ok(mk) = self.space.atom_mass(k) else { continue };
            let num = image(k).and_then(|j| self.space.rule_mass(j)).unwrap_or(0.0);
            let ratio = num / mk;
            if ratio > best.0 || best.1.is_none() {
                best = (ratio, Some(k));
            }
        }
        best
    }

    /// Checks whether `w` is wandering over `n_range`: the sets `τ⁻ⁿ(w)` are pairwise disjoint.
    pub fn is_wandering(&self, w: &AtomSet, n_range: RangeInclusive<i64>) -> Result<bool> {
        let mut seen = BTreeSet::new();
        for n in n_range {
            let image = self.preimage_set(w, n)?;
            for k in image.iter() {
                if !seen.insert(k) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Result of a successful [`validate_system`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemReport {
    pub distortion_bound: f64,
    pub inverse_distortion_bound: f64,
    pub forward_admissible: bool,
    /// Two-sided notions need `τ` bijective with `τ⁻¹` satisfying the distortion bound.
    pub two_sided_admissible: bool,
    pub total_measure: ExtReal,
}

/// Checks σ-finiteness (positive finite masses), injectivity, the distortion bound
/// against the stored `M`, and the weight domain; failures carry a witness atom.
pub fn validate_system(system: &CompositionSystem) -> Result<SystemReport> {
    system.space.validate()?;
    system.phi.validate()?;
    crate::weights::validate_weight(&system.weight)?;

    if let Transformation::Table { forward, .. } = &system.tau {
        let rebuilt = Transformation::table(forward.iter().map(|(&k, &v)| (k, v)))?;
        if rebuilt != system.tau {
            return Err(Error::validation("stored inverse table disagrees with the forward table", None));
        }
        for (&k, &v) in forward {
            if !system.space.in_window(k) || !system.space.in_window(v) {
                return Err(Error::validation("transformation table leaves the window", Some(k)));
            }
        }
    }
    for k in system.space.window_range() {
        if let Some(j) = system.tau.forward(k) {
            if system.tau.backward(j) != Some(k) {
                return Err(Error::validation("inverse rule disagrees with forward rule", Some(k)));
            }
        }
    }

    let m = system.distortion_m;
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::validation(format!("distortion constant M must be positive and finite, got {m}"), None));
    }
    let (bound, witness) = system.ratio_sup(|k| system.tau.backward(k));
    if bound > m * (1.0 + DISTORTION_SLACK) {
        return Err(Error::validation(
            format!("distortion bound violated: mu(tau^-1 A) / mu(A) = {bound} > M = {m}"),
            witness,
        ));
    }
    if system.weight.domain_upper != system.space.total_measure() {
        return Err(Error::validation("weight domain does not equal [0, mu(X)]", None));
    }

    let inverse_bound = system.inverse_distortion_bound();
    Ok(SystemReport {
        distortion_bound: bound,
        inverse_distortion_bound: inverse_bound,
        forward_admissible: true,
        two_sided_admissible: system.invertible && inverse_bound.is_finite(),
        total_measure: system.space.total_measure(),
    })
}
