//! Parametric Orlicz functions.
//!
//! Four closed-form convex families are supported. Each provides exact
//! evaluation, the right generalized inverse `sup{s ≥ 0 : φ(s) ≤ y}`, and the
//! degeneracy parameters
//!
//! ```text
//! a_φ = inf{u > 0 : φ(u) > 0}      b_φ = sup{u > 0 : φ(u) < ∞}
//! ```
//!
//! The inverse at `y = ∞` is defined as `b_φ` (the limit as `y → ∞`), which
//! keeps `‖χ_A‖ = 1/φ⁻¹(1/H(μ(A)))` continuous as `μ(A) ↓ 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum OrliczFunction {
    /// `φ(s) = s^p`, `p ≥ 1`.
    Power { p: f64 },
    /// `φ(s) = e^s − 1`.
    ExpMinusOne,
    /// `φ(s) = c·max(0, s − a)`.
    ShiftedLinear { a: f64, c: f64 },
    /// `φ(s) = s^p` on `[0, b]`, `∞` beyond.
    CappedPower { p: f64, b: f64 },
}

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(OrliczFunction::Power { p })
    }

    pub fn exp_minus_one() -> Self {
        OrliczFunction::ExpMinusOne
    }

    pub fn shifted_linear(a: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidParameter(format!("shifted_linear offset a must be finite and >= 0, got {a}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("shifted_linear slope c must be finite and > 0, got {c}")));
        }
        Ok(OrliczFunction::ShiftedLinear { a, c })
    }

    pub fn capped_power(p: f64, b: f64) -> Result<Self> {
        check_exponent(p)?;
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("capped_power cap b must be finite and > 0, got {b}")));
        }
        Ok(OrliczFunction::CappedPower { p, b })
    }

    /// Re-checks the parameter constraints (useful for values built by struct literal).
    pub fn validate(&self) -> Result<()> {
        match *self {
            OrliczFunction::Power { p } => Self::power(p).map(|_| ()),
            OrliczFunction::ExpMinusOne => Ok(()),
            OrliczFunction::ShiftedLinear { a, c } => Self::shifted_linear(a, c).map(|_| ()),
            OrliczFunction::CappedPower { p, b } => Self::capped_power(p, b).map(|_| ()),
        }
    }

    /// `φ(s)`.
    pub fn eval(&self, s: f64) -> Result<ExtReal> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::Domain(format!("Orlicz function argument must be >= 0, got {s}")));
        }
        Ok(self.eval_unchecked(s))
    }

    /// `φ(s)` for `s ≥ 0` already established by the caller.
    pub(crate) fn eval_unchecked(&self, s: f64) -> ExtReal {
        let v = match *self {
            OrliczFunction::Power { p } => s.powf(p),
            OrliczFunction::ExpMinusOne => s.exp_m1(),
            OrliczFunction::ShiftedLinear { a, c } => c * (s - a).max(0.0),
            OrliczFunction::CappedPower { p, b } => {
                if s <= b {
                    s.powf(p)
                } else {
                    f64::INFINITY
                }
            }
        };
        // overflow of a finite formula is still ∞
        ExtReal::new(v).unwrap_or(ExtReal::INFINITY)
    }

    /// Right generalized inverse `sup{s ≥ 0 : φ(s) ≤ y}`, with `φ⁻¹(∞) = b_φ`.
    pub fn inverse(&self, y: ExtReal) -> ExtReal {
        if y.is_infinite() {
            return self.params().1;
        }
        let y = y.value();
        let s = match *self {
            OrliczFunction::Power { p } => y.powf(p.recip()),
            OrliczFunction::ExpMinusOne => y.ln_1p(),
            OrliczFunction::ShiftedLinear { a, c } => a + y / c,
            OrliczFunction::CappedPower { p, b } => y.powf(p.recip()).min(b),
        };
        ExtReal::new(s).unwrap_or(ExtReal::INFINITY)
    }

    /// `(a_φ, b_φ)`.
    pub fn params(&self) -> (f64, ExtReal) {
        match *self {
            OrliczFunction::Power { .. } | OrliczFunction::ExpMinusOne => (0.0, ExtReal::INFINITY),
            OrliczFunction::ShiftedLinear { a, .. } => (a, ExtReal::INFINITY),
            OrliczFunction::CappedPower { b, .. } => (0.0, ExtReal(b)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OrliczFunction::Power { .. } => "power",
            OrliczFunction::ExpMinusOne => "exp_minus_one",
            OrliczFunction::ShiftedLinear { .. } => "shifted_linear",
            OrliczFunction::CappedPower { .. } => "capped_power",
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent p must be finite and >= 1 for convexity, got {p}")))
    }
}

/// Outcome of sampling `φ(2s)/φ(s)` on a geometric grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta2Report {
    pub satisfied_on_grid: bool,
    pub constant_m: ExtReal,
    pub s0: f64,
    pub grid: Vec<f64>,
    pub max_ratio: ExtReal,
    /// Grid points where `φ(s) = 0` or `φ(s) = ∞`, excluded from the ratio.
    pub skipped: Vec<f64>,
    /// True when the ratio is still increasing at the top of the grid.
    pub ratio_growing: bool,
}

/// Relative slack used when deciding that the ratio sequence is still growing.
const GROWTH_SLACK: f64 = 1e-9;

/// Probes `φ(2s) ≤ M·φ(s)` on `n_samples` geometrically spaced points in `[s0, s_max]`.
///
/// The grid is declared satisfied when the largest observed ratio is finite
/// and the ratio at the top of the grid does not exceed the ratio at the
/// geometric midpoint; a ratio that keeps climbing (as for `e^s − 1`) cannot
/// be bounded by a constant as the grid is extended.
pub fn delta2_probe(phi: &OrliczFunction, s0: f64, s_max: f64, n_samples: usize) -> Result<Delta2Report> {
    if !(s0.is_finite() && s0 > 0.0 && s_max.is_finite() && s0 < s_max) {
        return Err(Error::Domain(format!("delta2 probe needs 0 < s0 < s_max, got s0 = {s0}, s_max = {s_max}")));
    }
    if n_samples < 2 {
        return Err(Error::Domain(format!("delta2 probe needs n_samples >= 2, got {n_samples}")));
    }

    let log_span = (s_max / s0).ln();
    let grid: Vec<f64> = (0..n_samples)
        .map(|i| if i + 1 == n_samples { s_max } else { s0 * (log_span * i as f64 / (n_samples - 1) as f64).exp() })
        .collect();

    let mut skipped = Vec::new();
    let mut ratios: Vec<(usize, ExtReal)> = Vec::new();
    for (i, &s) in grid.iter().enumerate() {
        let base = phi.eval_unchecked(s);
        if base.is_zero() || base.is_infinite() {
            skipped.push(s);
            continue;
        }
        ratios.push((i, phi.eval_unchecked(2.0 * s).div(base)));
    }

    let max_ratio = ratios.iter().map(|&(_, r)| r).max();
    let ratio_growing = match (ratios.first(), ratios.last()) {
        (Some(_), Some(&(_, last))) if ratios.len() >= 2 => {
            let mid_index = n_samples / 2;
            let mid = ratios.iter().find(|&&(i, _)| i >= mid_index).map(|&(_, r)| r).unwrap_or(last);
            last.value() > mid.value() * (1.0 + GROWTH_SLACK)
        }
        _ => false,
    };

    let (satisfied_on_grid, max_ratio) = match max_ratio {
        Some(m) => (m.is_finite() && !ratio_growing, m),
        // nothing to compare on this grid
        None => (false, ExtReal::INFINITY),
    };

    Ok(Delta2Report { satisfied_on_grid, constant_m: max_ratio, s0, grid, max_ratio, skipped, ratio_growing })
}
