//! Bounds for a bare classical Markov chain.

use crate::error::{Error, Result};
use crate::metrics::{self, ObservableStats};
use crate::models::ClassicalMarkovModel;

use super::closed::ratio_or_flag;
use super::report::{BoundKind, BoundReport};

fn ensure_time(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::BadParameter(format!("time {tau} must be finite and nonnegative")));
    }
    Ok(())
}

/// `a(0) tau >= D_{1/2}(P(0) || P(tau))`.
pub fn classical_speed_limit(markov: &ClassicalMarkovModel, tau: f64) -> Result<BoundReport> {
    ensure_time(tau)?;
    let p_tau = markov.distribution_at(tau)?;
    let a = markov.initial_activity();
    let d = metrics::renyi_half(markov.initial(), &p_tau)?;
    Ok(BoundReport::new(BoundKind::ClassicalSpeedLimit, a * tau, d).param("tau", tau).param("activity", a))
}

/// Mean and standard deviation of `f` under `p`.
pub fn distribution_stats(f: &[f64], p: &[f64]) -> Result<ObservableStats> {
    if f.len() != p.len() {
        return Err(Error::Shape(format!("observable has {} values for {} states", f.len(), p.len())));
    }
    let mean: f64 = f.iter().zip(p).map(|(x, q)| x * q).sum();
    let var: f64 = f.iter().zip(p).map(|(x, q)| (x - mean) * (x - mean) * q).sum();
    Ok(ObservableStats::new(mean, var.max(0.0).sqrt()))
}

/// `e^{a(0) tau} - 1 >= ratio^2` for a state function `f`.
pub fn classical_tur(markov: &ClassicalMarkovModel, tau: f64, f: &[f64]) -> Result<BoundReport> {
    ensure_time(tau)?;
    let s0 = distribution_stats(f, markov.initial())?;
    let s1 = distribution_stats(f, &markov.distribution_at(tau)?)?;
    let (ratio, ok) = ratio_or_flag(&s0, &s1);
    let a = markov.initial_activity();
    Ok(BoundReport::new(BoundKind::ClassicalTur, (a * tau).exp_m1(), ratio)
        .condition("observable_nondegenerate", ok)
        .param("tau", tau)
        .param("activity", a)
        .param("mean_f_0", s0.mean)
        .param("mean_f_tau", s1.mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric() -> ClassicalMarkovModel {
        ClassicalMarkovModel::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn two_state_speed_limit() {
        let r = classical_speed_limit(&symmetric(), 1.0).unwrap();
        let p0 = (1.0 + (-2f64).exp()) / 2.0;
        assert!((r.rhs - (-p0.ln())).abs() < 1e-12);
        assert!((r.rhs - 0.566219).abs() < 1e-6);
        assert_eq!(r.lhs, 1.0);
    }

    #[test]
    fn two_state_tur() {
        let r = classical_tur(&symmetric(), 1.0, &[0.0, 1.0]).unwrap();
        let q = (1.0 - (-2f64).exp()) / 2.0;
        // Bernoulli(q) against the point mass at 0.
        assert!((r.rhs - q / (1.0 - q)).abs() < 1e-12);
        assert!((r.lhs - 1.71828).abs() < 1e-5);
        assert!(r.applicable && r.slack > 0.0);
    }

    #[test]
    fn constant_observable() {
        let r = classical_tur(&symmetric(), 1.0, &[2.0, 2.0]).unwrap();
        assert_eq!(r.rhs, 0.0);
    }
}
