//! Exact decision of the coercivity conditions on the leading coefficients.
//!
//! Both conditions read
//!
//! ```text
//! ξᵀ S ξ − λ |ξ|² ≥ c_p · ξᵀ N ξ     for all ξ = (ξ_α)_{|α|=m},
//! ```
//!
//! with `S`, `N` from [`CoefficientSet::leading_forms`]. The standard
//! condition uses `c_p = 1`; the `p`-dependent one uses
//! `c_p = (p + (−1)^m (p−2)) / 2`, which is `1` for odd `m` and `p − 1` for
//! even `m`. The largest admissible `λ` is therefore `λ_min(S − c_p N)`.

use serde::{Deserialize, Serialize};

use crate::multiindex::CoefficientSet;
use crate::{Error, Result};

/// Margin below which `λ*` does not count as strictly positive.
pub const TOL_POS: f64 = 1e-12;

/// Relative width at which [`critical_p`] stops bisecting.
pub const CRITICAL_P_RTOL: f64 = 1e-10;

const P_BRACKET_LIMIT: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `c_p = 1` regardless of `m` and `p`.
    Standard,
    /// `c_p = (p + (−1)^m (p−2)) / 2`.
    PDependent,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "std" => Ok(Mode::Standard),
            "pdep" | "p_dependent" | "p-dependent" => Ok(Mode::PDependent),
            other => Err(Error::param(
                "mode",
                format!("unknown mode `{other}` (expected `standard` or `pdep`)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityVerdict {
    pub lambda_star: f64,
    pub c_p: f64,
    pub holds: bool,
    pub p: f64,
    pub mode: Mode,
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::param(
            "p",
            format!("integrability index must be a finite value >= 2, got {p}"),
        ));
    }
    Ok(())
}

/// `(p + (−1)^m (p−2)) / 2`, evaluated by parity.
pub fn multiplier(m: u32, p: f64) -> Result<f64> {
    check_p(p)?;
    if m == 0 {
        return Err(Error::param("m", "half-order must be at least 1"));
    }
    Ok(if m % 2 == 1 { 1.0 } else { p - 1.0 })
}

/// Smallest eigenvalue of `S − c N`.
fn min_eigenvalue(c: &CoefficientSet, noise_weight: f64) -> Result<f64> {
    let forms = c.leading_forms();
    let form = &forms.drift - &forms.noise * noise_weight;
    let scale = form.amax().max(1.0);
    let asym = (&form - form.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let eig = form.symmetric_eigen();
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Largest `λ` for which the chosen condition holds at index `p`.
pub fn lambda_star(c: &CoefficientSet, p: f64, mode: Mode) -> Result<CoercivityVerdict> {
    let c_p = match mode {
        Mode::Standard => {
            check_p(p)?;
            1.0
        }
        Mode::PDependent => multiplier(c.half_order(), p)?,
    };
    let lambda_star = min_eigenvalue(c, c_p)?;
    Ok(CoercivityVerdict {
        lambda_star,
        c_p,
        holds: lambda_star > TOL_POS,
        p,
        mode,
    })
}

/// The index `p* ≥ 2` at which the `p`-dependent condition stops holding.
///
/// `None` for odd `m` (no `p`-dependence), for `N = 0` (holds for every `p`),
/// when the condition already fails at `p = 2`, or when no sign change is
/// found below `p = 10⁶`.
pub fn critical_p(c: &CoefficientSet) -> Result<Option<f64>> {
    if c.half_order() % 2 == 1 {
        return Ok(None);
    }
    let forms = c.leading_forms();
    if forms.noise.iter().all(|&v| v == 0.0) {
        return Ok(None);
    }
    let lambda = |p: f64| lambda_star(c, p, Mode::PDependent).map(|v| v.lambda_star);
    if lambda(2.0)? <= TOL_POS {
        return Ok(None);
    }

    let mut hi = 4.0;
    while lambda(hi)? >= 0.0 {
        hi *= 2.0;
        if hi > P_BRACKET_LIMIT {
            return Ok(None);
        }
    }
    let mut lo = 2.0;
    while hi - lo > CRITICAL_P_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if lambda(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `λ*` on `steps` equally spaced indices in `[p_min, p_max]`.
pub fn sweep(c: &CoefficientSet, p_min: f64, p_max: f64, steps: usize, mode: Mode) -> Result<Vec<CoercivityVerdict>> {
    check_p(p_min)?;
    check_p(p_max)?;
    if p_max < p_min {
        return Err(Error::param("p-max", "must not be smaller than p-min"));
    }
    if steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    let grid: Vec<f64> = if steps == 1 {
        vec![p_min]
    } else {
        let h = (p_max - p_min) / (steps - 1) as f64;
        (0..steps)
            .map(|i| if i + 1 == steps { p_max } else { p_min + h * i as f64 })
            .collect()
    };
    grid.into_iter().map(|p| lambda_star(c, p, mode)).collect()
}
