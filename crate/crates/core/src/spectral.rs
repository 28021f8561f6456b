//! Fourier fields on the torus `𝕋 = ℝ / 2πℤ`.
//!
//! A field is stored as its truncated Fourier series
//! `u(x) = Σ_{|n| ≤ N} u_n e^{inx}`, so `‖u‖²_{L²} = 2π Σ |u_n|²` and
//! `D^k` acts on mode `n` as multiplication by `(in)^k`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::multiindex::CoefficientSet;
use crate::{Error, Result};

/// Relative tolerance on the imaginary residual of a point evaluation.
pub const HERMITIAN_RTOL: f64 = 1e-10;

/// `i^k`, selected by quadrant so the result is exactly `±1` or `±i`.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `(in)^k` with the power of `i` taken exactly.
pub fn symbol_power(n: i64, k: u32) -> Complex64 {
    i_pow(k) * (n as f64).powi(k as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    truncation: usize,
    /// `modes[n + N]` holds `u_n`.
    modes: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(truncation: usize) -> Self {
        SpectralField {
            truncation,
            modes: vec![Complex64::new(0.0, 0.0); 2 * truncation + 1],
        }
    }

    pub fn constant(truncation: usize, value: f64) -> Self {
        let mut f = SpectralField::zeros(truncation);
        f.set(0, Complex64::new(value, 0.0));
        f
    }

    /// Field from the amplitudes `u_{−N}, …, u_N`.
    pub fn from_modes(truncation: usize, modes: Vec<Complex64>) -> Result<Self> {
        if modes.len() != 2 * truncation + 1 {
            return Err(Error::param(
                "modes",
                format!(
                    "expected {} amplitudes for N = {truncation}, got {}",
                    2 * truncation + 1,
                    modes.len()
                ),
            ));
        }
        Ok(SpectralField { truncation, modes })
    }

    /// Field with `u_n = g(n)` for every `|n| ≤ N`.
    pub fn from_fn(truncation: usize, g: impl Fn(i64) -> Complex64) -> Self {
        let n = truncation as i64;
        SpectralField {
            truncation,
            modes: (-n..=n).map(g).collect(),
        }
    }

    /// `a sin(kx)`.
    pub fn sine(truncation: usize, k: i64, amplitude: f64) -> Self {
        let mut f = SpectralField::zeros(truncation);
        f.add_sine(k, amplitude);
        f
    }

    /// `a cos(kx)`.
    pub fn cosine(truncation: usize, k: i64, amplitude: f64) -> Self {
        let mut f = SpectralField::zeros(truncation);
        f.add_cosine(k, amplitude);
        f
    }

    /// Adds `a sin(kx) = a (e^{ikx} − e^{−ikx}) / 2i`.
    pub fn add_sine(&mut self, k: i64, amplitude: f64) {
        if k == 0 || k.unsigned_abs() as usize > self.truncation {
            return;
        }
        let half = Complex64::new(0.0, -0.5 * amplitude);
        *self.mode_mut(k) += half;
        *self.mode_mut(-k) -= half;
    }

    /// Adds `a cos(kx)`.
    pub fn add_cosine(&mut self, k: i64, amplitude: f64) {
        if k.unsigned_abs() as usize > self.truncation {
            return;
        }
        if k == 0 {
            *self.mode_mut(0) += amplitude;
            return;
        }
        *self.mode_mut(k) += 0.5 * amplitude;
        *self.mode_mut(-k) += 0.5 * amplitude;
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn modes(&self) -> &[Complex64] {
        &self.modes
    }

    pub fn modes_mut(&mut self) -> &mut [Complex64] {
        &mut self.modes
    }

    /// `u_n`, zero outside the truncation.
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.truncation {
            return Complex64::new(0.0, 0.0);
        }
        self.modes[(n + self.truncation as i64) as usize]
    }

    /// Panics if `|n| > N`.
    pub fn set(&mut self, n: i64, value: Complex64) {
        *self.mode_mut(n) = value;
    }

    pub fn mode_mut(&mut self, n: i64) -> &mut Complex64 {
        let idx = n + self.truncation as i64;
        assert!(
            idx >= 0 && (idx as usize) < self.modes.len(),
            "mode {n} outside truncation N = {}",
            self.truncation
        );
        &mut self.modes[idx as usize]
    }

    /// `(n, u_n)` pairs from `n = −N` upwards.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n0 = -(self.truncation as i64);
        self.modes.iter().enumerate().map(move |(i, &v)| (n0 + i as i64, v))
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// `max_n |u_{−n} − conj(u_n)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.truncation as i64;
        (0..=n)
            .map(|k| (self.get(-k) - self.get(k).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        SpectralField {
            truncation: self.truncation,
            modes: self.modes.iter().map(|v| v * s).collect(),
        }
    }

    pub fn try_add(&self, other: &SpectralField) -> Result<Self> {
        if other.truncation != self.truncation {
            return Err(Error::TruncationMismatch {
                expected: self.truncation,
                found: other.truncation,
            });
        }
        Ok(SpectralField {
            truncation: self.truncation,
            modes: self.modes.iter().zip(&other.modes).map(|(a, b)| a + b).collect(),
        })
    }

    /// `D^order u`: mode `n` multiplied by `(in)^order`.
    pub fn differentiate(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        let n0 = -(self.truncation as i64);
        for (i, v) in out.modes.iter_mut().enumerate() {
            *v *= symbol_power(n0 + i as i64, order);
        }
        out
    }

    pub fn l2_norm_squared(&self) -> f64 {
        2.0 * PI * self.modes.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `‖u‖_{L²(𝕋)}` via Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    fn evaluate_complex(&self, x: f64) -> Complex64 {
        let n0 = -(self.truncation as i64);
        self.modes
            .iter()
            .enumerate()
            .map(|(i, v)| v * Complex64::cis((n0 + i as i64) as f64 * x))
            .sum()
    }

    /// `u(x) = Re Σ u_n e^{inx}` at each point; errors if the discarded
    /// imaginary part exceeds `1e−10 · Σ|u_n|`.
    pub fn evaluate(&self, points: &[f64]) -> Result<Vec<f64>> {
        let tolerance = HERMITIAN_RTOL * self.modes.iter().map(|v| v.norm()).sum::<f64>();
        points
            .iter()
            .map(|&x| {
                let z = self.evaluate_complex(x);
                if z.im.abs() > tolerance {
                    return Err(Error::NotHermitian {
                        residual: z.im.abs(),
                        tolerance,
                    });
                }
                Ok(z.re)
            })
            .collect()
    }

    /// Writes `n,re,im` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,re,im")?;
        for (n, v) in self.iter() {
            writeln!(out, "{n},{},{}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Table of `e^{inx}` for a fixed point set, reused across many fields.
#[derive(Clone, Debug)]
pub struct EvaluationTable {
    truncation: usize,
    points: usize,
    /// `[point][mode]`
    phases: Vec<Complex64>,
}

impl EvaluationTable {
    pub fn new(truncation: usize, points: &[f64]) -> Self {
        let n = truncation as i64;
        let phases = points
            .iter()
            .flat_map(|&x| (-n..=n).map(move |k| Complex64::cis(k as f64 * x)))
            .collect();
        EvaluationTable {
            truncation,
            points: points.len(),
            phases,
        }
    }

    pub fn point_count(&self) -> usize {
        self.points
    }

    /// Real part of `D^order u` at every tabulated point, written into `out`.
    /// Hermitian symmetry is assumed, not checked.
    pub fn evaluate_into(&self, field: &SpectralField, order: u32, out: &mut [f64]) {
        debug_assert_eq!(field.truncation, self.truncation);
        let width = 2 * self.truncation + 1;
        let n0 = -(self.truncation as i64);
        let coeffs: Vec<Complex64> = field
            .modes
            .iter()
            .enumerate()
            .map(|(i, v)| v * symbol_power(n0 + i as i64, order))
            .collect();
        for (p, slot) in out.iter_mut().enumerate().take(self.points) {
            let row = &self.phases[p * width..(p + 1) * width];
            *slot = row.iter().zip(&coeffs).map(|(e, c)| c.re * e.re - c.im * e.im).sum();
        }
    }
}

/// Drift and noise symbols of an `x`-independent operator on the torus:
/// `a(n) = (−1)^{m+1} Σ A_{αβ} (in)^{|α|+|β|}` and `b_k(n) = Σ B^k_α (in)^{|α|}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSymbol {
    truncation: usize,
    pub drift: Vec<Complex64>,
    pub noise: Vec<Vec<Complex64>>,
}

impl OperatorSymbol {
    /// Requires a one-dimensional coefficient set.
    pub fn from_coefficients(c: &CoefficientSet, truncation: usize) -> Result<Self> {
        if c.dim() != 1 {
            return Err(Error::param(
                "coeffs",
                format!("the torus simulator is one-dimensional, got n = {}", c.dim()),
            ));
        }
        let m = c.half_order();
        let sign = if m.is_multiple_of(2) { -1.0 } else { 1.0 };
        let n = truncation as i64;
        let drift = (-n..=n)
            .map(|k| {
                c.a_entries()
                    .map(|(al, be, v)| symbol_power(k, al.order() + be.order()) * v)
                    .sum::<Complex64>()
                    * sign
            })
            .collect();
        let noise = (0..c.noise_count())
            .map(|kk| {
                (-n..=n)
                    .map(|k| c.b_entries(kk).map(|(al, v)| symbol_power(k, al.order()) * v).sum())
                    .collect()
            })
            .collect();
        Ok(OperatorSymbol {
            truncation,
            drift,
            noise,
        })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn drift_at(&self, n: i64) -> Complex64 {
        self.drift[(n + self.truncation as i64) as usize]
    }

    pub fn noise_at(&self, k: usize, n: i64) -> Complex64 {
        self.noise[k][(n + self.truncation as i64) as usize]
    }
}
