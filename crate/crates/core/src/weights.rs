//! Non-increasing weight functions on `K = [0, μ(X)]` and their cumulative
//! integrals `H(t) = ∫₀ᵗ h(u) du`, both in closed form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightFamily {
    /// `h(t) = c`.
    Constant { c: f64 },
    /// `h(t) = c·t^(−α)`, `0 ≤ α < 1`.
    PowerDecay { alpha: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightFunction {
    pub family: WeightFamily,
    /// Upper end of `K`, i.e. `μ(X)`; may be infinite.
    pub domain_upper: ExtReal,
}

/// Arguments may overshoot `domain_upper` by this relative amount (summation rounding).
const UPPER_SLACK: f64 = 1e-12;

impl WeightFunction {
    /// Builds and validates a weight.
    pub fn new(family: WeightFamily, domain_upper: ExtReal) -> Result<Self> {
        let w = WeightFunction { family, domain_upper };
        validate_weight(&w)?;
        Ok(w)
    }

    pub fn constant(c: f64, domain_upper: ExtReal) -> Result<Self> {
        Self::new(WeightFamily::Constant { c }, domain_upper)
    }

    pub fn power_decay(alpha: f64, c: f64, domain_upper: ExtReal) -> Result<Self> {
        Self::new(WeightFamily::PowerDecay { alpha, c }, domain_upper)
    }

    /// Same family on a different `K`.
    pub fn with_domain_upper(self, domain_upper: ExtReal) -> Self {
        WeightFunction { domain_upper, ..self }
    }

    /// `h(t)` for `0 < t ≤ μ(X)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 0.0 || ExtReal(t) > self.domain_upper {
            return Err(Error::Domain(format!("weight argument must lie in (0, {}], got {t}", self.domain_upper)));
        }
        Ok(match self.family {
            WeightFamily::Constant { c } => c,
            WeightFamily::PowerDecay { alpha, c } => c * t.powf(-alpha),
        })
    }

    /// `H(t) = ∫₀ᵗ h` for `0 ≤ t ≤ μ(X)`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("cumulative weight needs t >= 0, got {t}")));
        }
        let t = match self.domain_upper.to_finite() {
            Some(upper) if t > upper => {
                if t <= upper * (1.0 + UPPER_SLACK) {
                    upper
                } else {
                    return Err(Error::Domain(format!("cumulative weight argument {t} exceeds mu(X) = {upper}")));
                }
            }
            _ => t,
        };
        Ok(self.cumulative_unchecked(t))
    }

    fn cumulative_unchecked(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match self.family {
            WeightFamily::Constant { c } => c * t,
            WeightFamily::PowerDecay { alpha, c } => c * t.powf(1.0 - alpha) / (1.0 - alpha),
        }
    }
}

/// Successful validation: the grid on which monotonicity was sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightReport {
    pub samples: usize,
    pub grid_upper: f64,
}

/// Checks parameter ranges, then samples `h` on a grid to confirm it is non-increasing.
pub fn validate_weight(w: &WeightFunction) -> Result<WeightReport> {
    let (c, alpha) = match w.family {
        WeightFamily::Constant { c } => (c, 0.0),
        WeightFamily::PowerDecay { alpha, c } => (c, alpha),
    };
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::validation(format!("weight scale c must be finite and positive, got {c}"), None));
    }
    if alpha.is_nan() || alpha.is_infinite() {
        return Err(Error::validation(format!("weight exponent alpha must be finite, got {alpha}"), None));
    }
    if alpha >= 1.0 {
        return Err(Error::validation(format!("weight not locally integrable (alpha = {alpha} >= 1)"), None));
    }
    if alpha < 0.0 {
        return Err(Error::validation(format!("weight not non-increasing (alpha = {alpha} < 0)"), None));
    }
    if w.domain_upper.is_zero() {
        return Err(Error::validation("weight domain K = [0, 0] is degenerate", None));
    }

    let grid_upper = w.domain_upper.to_finite().unwrap_or(1e6);
    let samples = 64;
    let mut prev = f64::INFINITY;
    for i in 1..=samples {
        let t = grid_upper * (i as f64 / samples as f64);
        let h = w.eval(t)?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::validation(format!("weight not positive at t = {t}"), None));
        }
        if h > prev {
            return Err(Error::validation(format!("weight not non-increasing at t = {t}"), None));
        }
        prev = h;
    }
    Ok(WeightReport { samples, grid_upper })
}
