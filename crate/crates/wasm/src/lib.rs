//! Browser bindings for three interactive views of the scalar model
//! `du = (-1)^{m+1} a D^{2m}u dt + μ D^m u dw`: the coercivity margin as a
//! function of `p`, the moment blowup criterion over time, and one exact
//! sample path of the field.
//!
//! Each export wraps a plain function returning `Result<_, String>` so the
//! logic can be tested natively.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;

use spde_core::coercivity::{self, Mode};
use spde_core::moments;
use spde_core::simulate::{generate_path, sample_exact_field, TimeGrid};
use spde_core::CoefficientSet;
use wasm_bindgen::prelude::*;

fn scalar(m: u32, a: f64, mu: f64) -> Result<CoefficientSet, String> {
    CoefficientSet::scalar(m, a, &[mu]).map_err(|e| e.to_string())
}

fn mode(p_dependent: bool) -> Mode {
    if p_dependent {
        Mode::PDependent
    } else {
        Mode::Standard
    }
}

/// `[p_0, λ*_0, p_1, λ*_1, …]` on `steps` points of `[p_min, p_max]`.
pub fn lambda_curve(
    m: u32,
    a: f64,
    mu: f64,
    p_min: f64,
    p_max: f64,
    steps: usize,
    p_dependent: bool,
) -> Result<Vec<f64>, String> {
    let c = scalar(m, a, mu)?;
    let verdicts = coercivity::sweep(&c, p_min, p_max, steps, mode(p_dependent)).map_err(|e| e.to_string())?;
    Ok(verdicts.iter().flat_map(|v| [v.p, v.lambda_star]).collect())
}

/// Critical index, NaN when there is none.
pub fn critical_index(m: u32, a: f64, mu: f64) -> Result<f64, String> {
    let c = scalar(m, a, mu)?;
    Ok(coercivity::critical_p(&c)
        .map_err(|e| e.to_string())?
        .unwrap_or(f64::NAN))
}

/// `[t, criterion, finite (1/0), E‖u‖²]` per time on `steps + 1` points of
/// `[0, t_max]`.
pub fn moment_profile(
    m: u32,
    mu: f64,
    p: f64,
    t_max: f64,
    steps: usize,
    truncation: usize,
) -> Result<Vec<f64>, String> {
    if steps == 0 || !(t_max > 0.0) {
        return Err("need t_max > 0 and at least one step".into());
    }
    let mut out = Vec::with_capacity(4 * (steps + 1));
    for i in 0..=steps {
        let t = t_max * i as f64 / steps as f64;
        let v = moments::finiteness(m, mu, p, t).map_err(|e| e.to_string())?;
        let l2 = moments::closed_form_l2(m, mu, t, truncation).map_err(|e| e.to_string())?;
        let finite = if v.verdict == moments::Finiteness::Finite {
            1.0
        } else {
            0.0
        };
        out.extend([t, v.criterion_value, finite, l2]);
    }
    Ok(out)
}

/// Exact sample `u(x, t)` on `points` equally spaced `x`, for path `path` of
/// the seeded ensemble. The Wiener value is taken on the grid `{0, t}`.
pub fn sample_path(
    m: u32,
    mu: f64,
    t: f64,
    truncation: usize,
    seed: u64,
    path: u64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(t > 0.0) {
        return Err("t must be positive".into());
    }
    let grid = TimeGrid::new(vec![0.0, t]).map_err(|e| e.to_string())?;
    let w = generate_path(seed, path, &grid, 1).values(0)[1];
    let field = sample_exact_field(m, mu, truncation, t, w);
    let xs: Vec<f64> = (0..points).map(|j| 2.0 * PI * j as f64 / points as f64).collect();
    field.evaluate(&xs).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = lambdaCurve)]
pub fn lambda_curve_js(
    m: u32,
    a: f64,
    mu: f64,
    p_min: f64,
    p_max: f64,
    steps: usize,
    p_dependent: bool,
) -> Result<Vec<f64>, JsError> {
    lambda_curve(m, a, mu, p_min, p_max, steps, p_dependent).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = criticalIndex)]
pub fn critical_index_js(m: u32, a: f64, mu: f64) -> Result<f64, JsError> {
    critical_index(m, a, mu).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = momentProfile)]
pub fn moment_profile_js(
    m: u32,
    mu: f64,
    p: f64,
    t_max: f64,
    steps: usize,
    truncation: usize,
) -> Result<Vec<f64>, JsError> {
    moment_profile(m, mu, p, t_max, steps, truncation).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = samplePath)]
pub fn sample_path_js(
    m: u32,
    mu: f64,
    t: f64,
    truncation: usize,
    seed: u64,
    path: u64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    sample_path(m, mu, t, truncation, seed, path, points).map_err(|e| JsError::new(&e))
}
