//! Moments of `‖u(·, t)‖_{L²}` for the model example.
//!
//! With `f(t) = 2 + 2t + (−1)^m μ² t`, the exact modes satisfy
//! `|u_n(t)|² = exp{−n^{2m} f(t) + 2μ i^m n^m w_t}`. For even `m` the noise
//! term is real and `E‖u‖^p` is infinite once `1 − p μ² t / f(t) < 0`, i.e.
//! for `t > 2/ε` with `ε = (p − 1)μ² − 2 > 0`. For odd `m` it is a pure
//! rotation, the modulus is deterministic and every moment is finite.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::simulate::PathEnsemble;
use crate::{Error, Result};

/// Relative tolerance on the analytic series tail.
pub const TAIL_RTOL: f64 = 1e-12;

/// Per-decade growth factor that flags an empirically diverging estimator.
pub const DIVERGENCE_GROWTH: f64 = 2.0;

/// Per-decade ratio below which the estimator counts as stabilised.
pub const STABLE_RATIO: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finiteness {
    Finite,
    Infinite,
}

impl Finiteness {
    pub fn as_str(self) -> &'static str {
        match self {
            Finiteness::Finite => "finite",
            Finiteness::Infinite => "infinite",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitenessVerdict {
    pub verdict: Finiteness,
    /// `1 − p μ² t / f(t)` for even `m`; `ε = (p − 1)μ² − 2` for odd `m`
    /// (reported, not used).
    pub criterion_value: f64,
}

/// Plug-in Monte Carlo estimate.
///
/// `stderr` is the sample standard deviation over `√paths`; when the
/// estimated moment is heavy-tailed or infinite this number is itself
/// unreliable and should be read together with the finiteness verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub paths: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub p: f64,
    pub t: f64,
    pub finite: Finiteness,
    pub closed_form: Option<f64>,
    pub mc_estimate: Option<McEstimate>,
    pub criterion_value: f64,
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu * mu < 2.0) {
        return Err(Error::param(
            "mu",
            format!("μ² = {} must be below 2 for the L² solution to exist", mu * mu),
        ));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::param("p", format!("must be a finite value >= 2, got {p}")));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param("t", format!("must be a finite value >= 0, got {t}")));
    }
    Ok(())
}

/// `f(t) = 2 + 2t + (−1)^m μ² t`.
pub fn growth_exponent(m: u32, mu: f64, t: f64) -> f64 {
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    2.0 + 2.0 * t + sign * mu * mu * t
}

/// `ε = (p − 1)μ² − 2`.
pub fn epsilon(mu: f64, p: f64) -> f64 {
    (p - 1.0) * mu * mu - 2.0
}

/// `2/ε` when `ε > 0`.
pub fn blowup_time(mu: f64, p: f64) -> Option<f64> {
    let eps = epsilon(mu, p);
    (eps > 0.0).then(|| 2.0 / eps)
}

/// Whether `E‖u(·, t)‖^p_{L²}` is finite for the model example.
pub fn finiteness(m: u32, mu: f64, p: f64, t: f64) -> Result<FinitenessVerdict> {
    check_mu(mu)?;
    check_p(p)?;
    check_t(t)?;
    if m == 0 {
        return Err(Error::param("m", "half-order must be at least 1"));
    }
    if m % 2 == 1 {
        return Ok(FinitenessVerdict {
            verdict: Finiteness::Finite,
            criterion_value: epsilon(mu, p),
        });
    }
    let criterion_value = 1.0 - p * mu * mu * t / growth_exponent(m, mu, t);
    Ok(FinitenessVerdict {
        verdict: if criterion_value < 0.0 {
            Finiteness::Infinite
        } else {
            Finiteness::Finite
        },
        criterion_value,
    })
}

/// `Σ_{|n| ≤ N} e^{−n^{2m} rate}`, failing if the tail bound
/// `2 e^{−(N+1)^{2m} rate} / (1 − e^{−rate})` exceeds `1e−12` of the sum.
fn truncated_theta(m: u32, rate: f64, truncation: usize) -> Result<f64> {
    let mut sum = 1.0;
    for n in 1..=truncation {
        sum += 2.0 * (-(n as f64).powi(2 * m as i32) * rate).exp();
    }
    let next = (truncation + 1) as f64;
    let tail = 2.0 * (-next.powi(2 * m as i32) * rate).exp() / (1.0 - (-rate).exp());
    let tolerance = TAIL_RTOL * sum;
    if !(tail < tolerance) {
        return Err(Error::TruncationTooSmall {
            truncation,
            tail,
            tolerance,
        });
    }
    Ok(sum)
}

/// `E‖u(·, t)‖²_{L²} = 2π Σ_n e^{−n^{2m}(2 + (2 − μ²)t)}`, valid for both
/// parities.
pub fn closed_form_l2(m: u32, mu: f64, t: f64, truncation: usize) -> Result<f64> {
    check_mu(mu)?;
    check_t(t)?;
    let rate = 2.0 + (2.0 - mu * mu) * t;
    Ok(2.0 * PI * truncated_theta(m, rate, truncation)?)
}

/// `E‖u(·, t)‖^p_{L²} = (2π)^{p/2} (Σ_n e^{−n^{2m} f(t)})^{p/2}` for odd `m`,
/// where `f(t) = 2 + (2 − μ²)t`.
pub fn closed_form_p_moment_odd(m: u32, mu: f64, p: f64, t: f64, truncation: usize) -> Result<f64> {
    if m.is_multiple_of(2) {
        return Err(Error::param("m", "the closed-form p-th moment needs odd m"));
    }
    check_mu(mu)?;
    check_p(p)?;
    check_t(t)?;
    let series = truncated_theta(m, growth_exponent(m, mu, t), truncation)?;
    Ok((2.0 * PI * series).powf(p / 2.0))
}

/// Mean and standard error of `samples`, summed in index order.
pub fn mc_estimate(samples: &[f64]) -> Result<McEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let stderr = if samples.len() > 1 {
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr,
        paths: samples.len(),
    })
}

/// Plug-in estimate of `E‖u(·, t)‖^p_{L²}` over the ensemble.
pub fn mc_p_moment(ens: &PathEnsemble, p: f64, t: f64) -> Result<McEstimate> {
    check_p(p)?;
    let idx = ens.time_index(t)?;
    let samples: Vec<f64> = ens.snapshot(idx).map(|f| f.l2_norm().powf(p)).collect();
    mc_estimate(&samples)
}

/// Successive estimates at increasing path counts (one decade apart) and the
/// ratios between them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceDiagnostic {
    pub estimates: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl DivergenceDiagnostic {
    pub fn new(estimates: Vec<f64>) -> Self {
        let ratios = estimates.windows(2).map(|w| w[1] / w[0]).collect();
        DivergenceDiagnostic { estimates, ratios }
    }

    /// Every ratio at least [`DIVERGENCE_GROWTH`].
    pub fn diverging(&self) -> bool {
        !self.ratios.is_empty() && self.ratios.iter().all(|&r| r >= DIVERGENCE_GROWTH)
    }

    /// Every ratio at most [`STABLE_RATIO`].
    pub fn stable(&self) -> bool {
        !self.ratios.is_empty() && self.ratios.iter().all(|&r| r <= STABLE_RATIO)
    }
}
