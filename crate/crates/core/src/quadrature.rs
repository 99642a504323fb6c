//! Composite Simpson quadrature with an attached error estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PANELS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    /// `|S_n - S_{n/2}|` plus a round-off floor. Deliberately not divided by
    /// 15, so it overestimates the error of `S_n` for smooth integrands.
    pub error_estimate: f64,
    pub panels: usize,
}

/// Rounds up to the next multiple of four (at least four) so that the
/// half-resolution rule is itself a valid Simpson rule.
pub fn admissible_panels(panels: usize) -> usize {
    panels.max(4).div_ceil(4) * 4
}

/// Simpson's rule on equally spaced samples `f(a), f(a+h), ..., f(b)`.
/// `samples.len() - 1` must be even and `samples.len() - 1 >= 4`.
pub fn simpson_samples(samples: &[f64], h: f64) -> Result<Quadrature> {
    let n = samples.len().saturating_sub(1);
    if n < 4 || !n.is_multiple_of(4) {
        return Err(Error::BadParameter(format!("{n} panels; need a positive multiple of 4")));
    }
    let rule = |step: usize| -> f64 {
        let m = n / step;
        let mut s = samples[0] + samples[n];
        for k in 1..m {
            s += samples[k * step] * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h * step as f64 / 3.0
    };
    let fine = rule(1);
    let coarse = rule(2);
    let mass: f64 = samples.iter().map(|x| x.abs()).sum::<f64>() * h.abs();
    let floor = 64.0 * f64::EPSILON * mass;
    if !fine.is_finite() {
        return Err(Error::IntegratorDiverged("non-finite quadrature sum".into()));
    }
    Ok(Quadrature { value: fine, error_estimate: (fine - coarse).abs() + floor, panels: n })
}

/// Integrates `f` over `[a, b]` with (at least) `panels` panels.
pub fn simpson<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, panels: usize) -> Result<Quadrature> {
    let n = admissible_panels(panels);
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, panels: n });
    }
    let h = (b - a) / n as f64;
    let samples = (0..=n).map(|k| f(a + h * k as f64)).collect::<Result<Vec<_>>>()?;
    simpson_samples(&samples, h)
}
