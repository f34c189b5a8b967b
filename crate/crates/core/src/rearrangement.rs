//! Distribution functions, non-increasing rearrangements, the Orlicz-Lorentz
//! modular and the Luxemburg norm of simple functions.
//!
//! For a simple function `g` the rearrangement `g*` is a finite step
//! function, so the modular
//!
//! ```text
//! I(g/λ) = ∫ φ(g*(t)/λ) h(t) dt = Σᵢ φ(vᵢ/λ)·(H(tᵢ) − H(tᵢ₋₁))
//! ```
//!
//! is evaluated exactly from the closed-form cumulative weight `H`. The norm
//! `‖g‖ = inf{λ > 0 : I(g/λ) ≤ 1}` is then found by bracketing and bisection
//! on the non-increasing map `λ ↦ I(g/λ)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::{AtomSet, AtomicSpace, CompositionSystem};
use crate::orlicz::OrliczFunction;
use crate::weights::WeightFunction;

/// Relative width at which bisection stops.
pub const NORM_RTOL: f64 = 1e-12;
/// Bisection iteration cap.
pub const MAX_BISECTION_ITERATIONS: usize = 200;
const MAX_BRACKET_STEPS: usize = 2200;

/// Finitely supported function on atoms: sorted `(index, value)` pairs with distinct indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SimpleFunction {
    entries: Vec<(i64, f64)>,
}

impl SimpleFunction {
    /// Rejects duplicate indices and non-finite values.
    pub fn new(entries: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            if !v.is_finite() {
                return Err(Error::Domain(format!("simple function value at atom {k} is not finite: {v}")));
            }
            if map.insert(k, v).is_some() {
                return Err(Error::Domain(format!("simple function lists atom {k} twice")));
            }
        }
        Ok(SimpleFunction { entries: map.into_iter().collect() })
    }

    pub fn zero() -> Self {
        SimpleFunction::default()
    }

    /// `c·χ_A`.
    pub fn scaled_indicator(set: &AtomSet, c: f64) -> Self {
        SimpleFunction { entries: set.iter().map(|k| (k, c)).collect() }
    }

    /// `χ_A`.
    pub fn indicator(set: &AtomSet) -> Self {
        Self::scaled_indicator(set, 1.0)
    }

    pub fn entries(&self) -> &[(i64, f64)] {
        &self.entries
    }

    pub fn value_at(&self, k: i64) -> f64 {
        self.entries.binary_search_by_key(&k, |&(i, _)| i).map(|pos| self.entries[pos].1).unwrap_or(0.0)
    }

    /// Atoms carrying a non-zero value.
    pub fn support(&self) -> AtomSet {
        self.entries.iter().filter(|(_, v)| *v != 0.0).map(|&(k, _)| k).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, v)| *v == 0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        SimpleFunction { entries: self.entries.iter().map(|&(k, v)| (k, c * v)).collect() }
    }

    /// Pointwise `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &SimpleFunction, b: f64) -> Self {
        let mut map: BTreeMap<i64, f64> = self.entries.iter().map(|&(k, v)| (k, a * v)).collect();
        for &(k, v) in &other.entries {
            *map.entry(k).or_insert(0.0) += b * v;
        }
        SimpleFunction { entries: map.into_iter().collect() }
    }

    /// Atomwise `|self| ≤ |other|`.
    pub fn dominated_by(&self, other: &SimpleFunction) -> bool {
        self.entries.iter().all(|&(k, v)| v.abs() <= other.value_at(k).abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }
}

/// Right-continuous non-increasing step function on `[0, ∞)`:
/// `values[i]` on `[breakpoints[i-1], breakpoints[i])` with `breakpoints[-1] = 0`, zero after the last.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct StepFunction {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= t);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Lebesgue measure of `{t : g*(t) > λ}`.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        let count = self.values.partition_point(|&v| v > lambda);
        if count == 0 {
            0.0
        } else {
            self.breakpoints[count - 1]
        }
    }

    /// Total width of the support, `t_k`.
    pub fn support_measure(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    /// `(t_{i-1}, t_i, v_i)` triples.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.iter().zip(&self.values).scan(0.0, |start, (&end, &v)| {
            let step = (*start, end, v);
            *start = end;
            Some(step)
        })
    }
}

/// Non-zero magnitudes sorted descending (ties by index) with their masses.
///
/// Both [`distribution`] and [`rearrangement`] accumulate masses in this order,
/// which makes them agree bit for bit at every breakpoint.
fn sorted_magnitudes(space: &AtomicSpace, g: &SimpleFunction) -> Result<Vec<(f64, f64)>> {
    let mut items = Vec::with_capacity(g.entries.len());
    for &(k, v) in &g.entries {
        let m = space.atom_mass(k)?;
        if v != 0.0 {
            items.push((v.abs(), k, m));
        }
    }
    items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(items.into_iter().map(|(v, _, m)| (v, m)).collect())
}

/// `μ_g(λ) = μ{|g| > λ}`.
pub fn distribution(space: &AtomicSpace, g: &SimpleFunction, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!("distribution level must be >= 0, got {lambda}")));
    }
    let items = sorted_magnitudes(space, g)?;
    Ok(items.iter().take_while(|(v, _)| *v > lambda).fold(0.0, |acc, (_, m)| acc + m))
}

/// `g*`: distinct magnitudes in decreasing order, each held for the total mass attaining it.
pub fn rearrangement(space: &AtomicSpace, g: &SimpleFunction) -> Result<StepFunction> {
    let items = sorted_magnitudes(space, g)?;
    let mut out = StepFunction::default();
    let mut t = 0.0;
    for (i, &(v, m)) in items.iter().enumerate() {
        t += m;
        let last_of_group = items.get(i + 1).is_none_or(|next| next.0 != v);
        if last_of_group {
            out.breakpoints.push(t);
            out.values.push(v);
        }
    }
    Ok(out)
}

/// Modular of a rearranged function: `Σ φ(vᵢ/λ)·(H(tᵢ) − H(tᵢ₋₁))`.
pub fn modular_of_steps(
    phi: &OrliczFunction,
    weight: &WeightFunction,
    steps: &StepFunction,
    lambda: f64,
) -> Result<ExtReal> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("modular scale must be > 0, got {lambda}")));
    }
    let mut total = ExtReal::ZERO;
    let mut h_prev = 0.0;
    for (_, end, v) in steps.steps() {
        let h_end = weight.cumulative(end)?;
        let width = ExtReal((h_end - h_prev).max(0.0));
        total = total + phi.eval_unchecked(v / lambda) * width;
        h_prev = h_end;
    }
    Ok(total)
}

/// `I_{φ,h}(g/λ)`.
pub fn modular(system: &CompositionSystem, g: &SimpleFunction, lambda: f64) -> Result<ExtReal> {
    let steps = rearrangement(&system.space, g)?;
    modular_of_steps(&system.phi, &system.weight, &steps, lambda)
}

/// Luxemburg norm with the bisection diagnostics reported alongside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LuxemburgNorm {
    pub value: f64,
    /// Bisection steps after the bracket was established.
    pub iterations: usize,
    /// `1 − I(g/value)`, non-negative.
    pub residual: f64,
}

/// `φ⁻¹(1/H(μ))`, the reciprocal of `‖χ_A‖` for `μ(A) = μ`.
pub fn indicator_level(phi: &OrliczFunction, weight: &WeightFunction, measure: f64) -> Result<ExtReal> {
    let h = weight.cumulative(measure)?;
    Ok(phi.inverse(ExtReal::new(h)?.recip()))
}

/// `‖g‖_{φ,h}` for a rearranged function.
pub fn norm_of_steps(phi: &OrliczFunction, weight: &WeightFunction, steps: &StepFunction) -> Result<LuxemburgNorm> {
    if steps.is_empty() {
        return Ok(LuxemburgNorm { value: 0.0, iterations: 0, residual: 1.0 });
    }
    let modular_at = |lambda: f64| modular_of_steps(phi, weight, steps, lambda);
    let fits = |lambda: f64| -> Result<bool> { Ok(modular_at(lambda)? <= ExtReal::ONE) };

    // ‖g‖ ≤ max|g|·‖χ_supp‖, so this is usually already an upper bound
    let max_v = steps.values[0];
    let level = indicator_level(phi, weight, steps.support_measure())?;
    let mut hi = max_v * (1.0 + level.recip().to_finite().unwrap_or(0.0));
    let mut steps_taken = 0;
    while !fits(hi)? {
        hi *= 2.0;
        steps_taken += 1;
        if !hi.is_finite() || steps_taken > MAX_BRACKET_STEPS {
            return Err(Error::NonConvergence { lo: 0.0, hi, iterations: 0 });
        }
    }

    let mut lo = hi / 2.0;
    while fits(lo)? {
        hi = lo;
        lo /= 2.0;
        if lo < f64::MIN_POSITIVE {
            let residual = 1.0 - modular_at(hi)?.value();
            return Ok(LuxemburgNorm { value: 0.0, iterations: 0, residual });
        }
    }

    let mut iterations = 0;
    while hi - lo > NORM_RTOL * hi {
        if iterations == MAX_BISECTION_ITERATIONS {
            return Err(Error::NonConvergence { lo, hi, iterations });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fits(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let residual = 1.0 - modular_at(hi)?.value();
    Ok(LuxemburgNorm { value: hi, iterations, residual })
}

/// `‖g‖_{φ,h} = inf{λ > 0 : I(g/λ) ≤ 1}`.
pub fn luxemburg_norm(system: &CompositionSystem, g: &SimpleFunction) -> Result<LuxemburgNorm> {
    let steps = rearrangement(&system.space, g)?;
    norm_of_steps(&system.phi, &system.weight, &steps)
}

/// Closed form `‖χ_A‖ = 1/φ⁻¹(1/H(μ(A)))`.
pub fn char_norm_formula(system: &CompositionSystem, set: &AtomSet) -> Result<f64> {
    let mu = system.set_measure(set)?;
    if mu == 0.0 {
        return Err(Error::Domain("characteristic norm needs 0 < mu(A)".into()));
    }
    Ok(indicator_level(&system.phi, &system.weight, mu)?.recip().value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Transformation;
    use crate::weights::WeightFamily;
    use std::collections::BTreeMap;

    /// Atoms 1 (mass 0.5) and 2 (mass 1).
    fn two_atom_system(phi: OrliczFunction) -> CompositionSystem {
        let space =
            AtomicSpace::table(2, BTreeMap::from([(-2, 1.0), (-1, 1.0), (0, 1.0), (1, 0.5), (2, 1.0)])).unwrap();
        CompositionSystem::assemble(space, Transformation::identity(), phi, WeightFamily::Constant { c: 1.0 }, 1.0)
    }

    fn g() -> SimpleFunction {
        SimpleFunction::new([(1, 3.0), (2, 1.0)]).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let s = two_atom_system(OrliczFunction::power(2.0).unwrap());
        assert_eq!(distribution(&s.space, &g(), 2.0).unwrap(), 0.5);
        assert_eq!(distribution(&s.space, &g(), 0.5).unwrap(), 1.5);
        assert_eq!(distribution(&s.space, &g(), 3.0).unwrap(), 0.0);
        assert!(distribution(&s.space, &g(), -1.0).is_err());
    }

    #[test]
    fn rearrangement_examples() {
        let s = two_atom_system(OrliczFunction::power(2.0).unwrap());
        let r = rearrangement(&s.space, &g()).unwrap();
        assert_eq!(r.breakpoints, vec![0.5, 1.5]);
        assert_eq!(r.values, vec![3.0, 1.0]);
        assert_eq!(r.eval(0.0), 3.0);
        assert_eq!(r.eval(0.5), 1.0);
        assert_eq!(r.eval(1.5), 0.0);

        let set = AtomSet::new([0, 2]);
        let r = rearrangement(&s.space, &SimpleFunction::scaled_indicator(&set, -2.0)).unwrap();
        assert_eq!(r.breakpoints, vec![2.0]);
        assert_eq!(r.values, vec![2.0]);

        assert!(rearrangement(&s.space, &SimpleFunction::zero()).unwrap().is_empty());
    }

    #[test]
    fn ties_are_merged() {
        let s = two_atom_system(OrliczFunction::power(1.0).unwrap());
        let f = SimpleFunction::new([(-1, 2.0), (0, -2.0), (1, 0.0), (2, 1.0)]).unwrap();
        let r = rearrangement(&s.space, &f).unwrap();
        assert_eq!(r.values, vec![2.0, 1.0]);
        assert_eq!(r.breakpoints, vec![2.0, 3.0]);
    }

    #[test]
    fn modular_examples() {
        let s = two_atom_system(OrliczFunction::power(2.0).unwrap());
        assert_eq!(modular(&s, &g(), 1.0).unwrap().value(), 5.5);
        let capped = two_atom_system(OrliczFunction::capped_power(2.0, 2.0).unwrap());
        assert!(modular(&capped, &g(), 1.0).unwrap().is_infinite());
        assert!(modular(&s, &g(), 0.0).is_err());
    }

    #[test]
    fn norm_examples() {
        let s = two_atom_system(OrliczFunction::power(2.0).unwrap());
        let n = luxemburg_norm(&s, &g()).unwrap();
        assert!((n.value - 5.5f64.sqrt()).abs() <= 1e-11 * 5.5f64.sqrt(), "{n:?}");
        assert!(n.residual >= 0.0);
        assert!(n.iterations <= MAX_BISECTION_ITERATIONS);

        let quarter = AtomicSpace::table(0, BTreeMap::from([(0, 0.25)])).unwrap();
        let s = CompositionSystem::assemble(
            quarter,
            Transformation::identity(),
            OrliczFunction::power(2.0).unwrap(),
            WeightFamily::Constant { c: 1.0 },
            1.0,
        );
        let n = luxemburg_norm(&s, &SimpleFunction::new([(0, 3.0)]).unwrap()).unwrap();
        assert!((n.value - 1.5).abs() <= 1e-11);

        assert_eq!(luxemburg_norm(&s, &SimpleFunction::zero()).unwrap().value, 0.0);
    }

    #[test]
    fn char_norm_examples() {
        let space = AtomicSpace::counting(8).unwrap();
        let set = AtomSet::new([0, 1, 2, 3]);
        for p in [1.0, 2.0, 3.5] {
            let s = CompositionSystem::assemble(
                space.clone(),
                Transformation::identity(),
                OrliczFunction::power(p).unwrap(),
                WeightFamily::Constant { c: 1.0 },
                1.0,
            );
            let v = char_norm_formula(&s, &set).unwrap();
            assert!((v - 4f64.powf(1.0 / p)).abs() < 1e-12);
        }
        let s = CompositionSystem::assemble(
            space,
            Transformation::identity(),
            OrliczFunction::power(1.0).unwrap(),
            WeightFamily::PowerDecay { alpha: 0.5, c: 1.0 },
            1.0,
        );
        assert_eq!(char_norm_formula(&s, &set).unwrap(), 4.0);
        assert!(matches!(char_norm_formula(&s, &AtomSet::empty()), Err(Error::Domain(_))));
    }

    #[test]
    fn duplicate_atoms_rejected() {
        assert!(SimpleFunction::new([(0, 1.0), (0, 2.0)]).is_err());
        assert!(SimpleFunction::new([(0, f64::NAN)]).is_err());
    }

    #[test]
    fn out_of_window_atoms_rejected() {
        let s = two_atom_system(OrliczFunction::power(1.0).unwrap());
        let f = SimpleFunction::new([(9, 1.0)]).unwrap();
        assert!(luxemburg_norm(&s, &f).is_err());
    }
}
