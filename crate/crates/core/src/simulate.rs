//! Reproducible Wiener paths and solution trajectories on the torus.
//!
//! Two samplers live here:
//!
//! - the exact mode solution of the model example
//!   `du = (−1)^{m+1} D^{2m}u dt + μ D^m u dw`, `u_n(0) = e^{−n^{2m}}`;
//! - an exponential-Euler scheme for the linear equation with
//!   `t`-dependent, `x`-independent coefficients and free terms `f`, `g^k`.
//!
//! Each Fourier mode of the linear equation is a scalar complex SDE
//!
//! ```text
//! du = (a u + f) dt + Σ_k (b_k u + g_k) dw^k,
//! ```
//!
//! and one step of length `h` with coefficients frozen at the left endpoint is
//!
//! ```text
//! Φ = exp{(a − ½ Σ b_k²) h + Σ b_k Δw^k}
//! u ← Φ u + Φ (f − Σ b_k g_k) h + Φ Σ g_k Δw^k.
//! ```
//!
//! `Φ` is the exact stochastic exponential of the homogeneous part, so with
//! `f = g = 0` and constant coefficients the scheme is exact at grid times.
//!
//! Path `i` draws its increments from a ChaCha stream keyed by
//! `(master_seed, i)` alone, so ensembles do not depend on thread count or
//! evaluation order, and the first `k` paths of a larger ensemble coincide
//! with a `k`-path ensemble.

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::multiindex::CoefficientSet;
use crate::parallel;
use crate::spectral::{i_pow, OperatorSymbol, SpectralField};
use crate::{Error, Result};

pub const DEFAULT_STEPS: usize = 512;
pub const DEFAULT_PATHS: usize = 10_000;
pub const DEFAULT_TRUNCATION: usize = 16;

/// Time grid `0 = t_0 < t_1 < … < t_M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::param("grid", "needs at least two time points"));
        }
        if times[0] != 0.0 {
            return Err(Error::param("grid", "must start at t = 0"));
        }
        for j in 1..times.len() {
            if !(times[j] > times[j - 1]) || !times[j].is_finite() {
                return Err(Error::GridNotIncreasing(j));
            }
        }
        Ok(TimeGrid { times })
    }

    /// `steps` equal steps on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::param("steps", "must be at least 1"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::param("T", format!("horizon must be positive, got {horizon}")));
        }
        let h = horizon / steps as f64;
        let times = (0..=steps)
            .map(|j| if j == steps { horizon } else { h * j as f64 })
            .collect();
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

/// Increments of `K` independent Wiener processes on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    times: Vec<f64>,
    /// `increments[k][j] = w^k(t_{j+1}) − w^k(t_j)`
    increments: Vec<Vec<f64>>,
}

impl WienerPath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn noise_count(&self) -> usize {
        self.increments.len()
    }

    pub fn increments(&self, k: usize) -> &[f64] {
        &self.increments[k]
    }

    /// `w^k` at every grid time, starting from `w^k(0) = 0`.
    pub fn values(&self, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.times.len());
        let mut acc = 0.0;
        out.push(acc);
        for dw in &self.increments[k] {
            acc += dw;
            out.push(acc);
        }
        out
    }

    /// The same path observed on every `factor`-th grid time.
    pub fn coarsen(&self, factor: usize) -> Result<WienerPath> {
        let steps = self.times.len() - 1;
        if factor == 0 || !steps.is_multiple_of(factor) {
            return Err(Error::param(
                "factor",
                format!("{factor} does not divide the {steps} steps of the path"),
            ));
        }
        Ok(WienerPath {
            times: self.times.iter().step_by(factor).copied().collect(),
            increments: self
                .increments
                .iter()
                .map(|inc| inc.chunks(factor).map(|c| c.iter().sum()).collect())
                .collect(),
        })
    }
}

/// Generator for path `index` of the ensemble seeded by `master_seed`.
pub fn path_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// One Wiener path. Increments are drawn process by process, each in time
/// order.
pub fn generate_path(master_seed: u64, index: u64, grid: &TimeGrid, noise_count: usize) -> WienerPath {
    let mut rng = path_rng(master_seed, index);
    let times = grid.times().to_vec();
    let increments = (0..noise_count)
        .map(|_| {
            times
                .windows(2)
                .map(|w| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * (w[1] - w[0]).sqrt()
                })
                .collect()
        })
        .collect();
    WienerPath { times, increments }
}

pub fn generate_paths(
    master_seed: u64,
    path_count: usize,
    grid: &TimeGrid,
    noise_count: usize,
) -> Result<Vec<WienerPath>> {
    if path_count == 0 {
        return Err(Error::param("paths", "must be at least 1"));
    }
    Ok(parallel::map_indexed(path_count, |i| {
        generate_path(master_seed, i as u64, grid, noise_count)
    }))
}

/// `e^{−n^{2m}}`, the initial datum of the model example.
pub fn example_initial(m: u32, truncation: usize) -> SpectralField {
    SpectralField::from_fn(truncation, |n| {
        Complex64::new((-(n as f64).powi(2 * m as i32)).exp(), 0.0)
    })
}

/// Exact solution of mode `n` of the model example given `w_t`:
/// `exp{−n^{2m}(1 + t + (−1)^m μ² t / 2) + μ i^m n^m w_t}`.
pub fn sample_exact_mode(n: i64, m: u32, mu: f64, t: f64, w_t: f64) -> Complex64 {
    let nf = n as f64;
    let n2m = nf.powi(2 * m as i32);
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let decay = -n2m * (1.0 + t + sign * mu * mu * t / 2.0);
    let noise = i_pow(m) * (mu * nf.powi(m as i32) * w_t);
    (noise + decay).exp()
}

/// All modes `|n| ≤ N` of the model example at time `t`.
pub fn sample_exact_field(m: u32, mu: f64, truncation: usize, t: f64, w_t: f64) -> SpectralField {
    SpectralField::from_fn(truncation, |n| sample_exact_mode(n, m, mu, t, w_t))
}

/// Initial condition of the linear model.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// `u_n(0) = e^{−n^{2m}}`.
    Example,
    Field(SpectralField),
}

pub type CoefficientFn = dyn Fn(f64) -> CoefficientSet + Send + Sync;
pub type FieldFn = dyn Fn(f64) -> SpectralField + Send + Sync;
pub type NoiseFieldFn = dyn Fn(f64) -> Vec<SpectralField> + Send + Sync;

/// Linear equation with `x`-independent coefficients `A(t)`, `B(t)` and free
/// terms `f(x, t)`, `g^k(x, t)` supplied as spectral fields.
pub struct LinearModel {
    coefficients: Box<CoefficientFn>,
    forcing: Option<Box<FieldFn>>,
    noise_forcing: Option<Box<NoiseFieldFn>>,
    initial: InitialCondition,
}

impl std::fmt::Debug for LinearModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearModel")
            .field("coefficients(0)", &(self.coefficients)(0.0))
            .field("forcing", &self.forcing.is_some())
            .field("noise_forcing", &self.noise_forcing.is_some())
            .field("initial", &self.initial)
            .finish()
    }
}

impl LinearModel {
    pub fn new(coefficients: impl Fn(f64) -> CoefficientSet + Send + Sync + 'static) -> Self {
        LinearModel {
            coefficients: Box::new(coefficients),
            forcing: None,
            noise_forcing: None,
            initial: InitialCondition::Zero,
        }
    }

    pub fn constant(coefficients: CoefficientSet) -> Self {
        LinearModel::new(move |_| coefficients.clone())
    }

    /// The model example with `A = 1`, `B = μ` and its initial datum.
    pub fn example(m: u32, mu: f64) -> Result<Self> {
        Ok(LinearModel::constant(CoefficientSet::scalar(m, 1.0, &[mu])?).with_initial(InitialCondition::Example))
    }

    pub fn with_forcing(mut self, f: impl Fn(f64) -> SpectralField + Send + Sync + 'static) -> Self {
        self.forcing = Some(Box::new(f));
        self
    }

    pub fn with_noise_forcing(mut self, g: impl Fn(f64) -> Vec<SpectralField> + Send + Sync + 'static) -> Self {
        self.noise_forcing = Some(Box::new(g));
        self
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    pub fn coefficients_at(&self, t: f64) -> CoefficientSet {
        (self.coefficients)(t)
    }

    pub fn forcing_at(&self, t: f64) -> Option<SpectralField> {
        self.forcing.as_ref().map(|f| f(t))
    }

    pub fn noise_forcing_at(&self, t: f64) -> Option<Vec<SpectralField>> {
        self.noise_forcing.as_ref().map(|g| g(t))
    }

    pub fn initial(&self) -> &InitialCondition {
        &self.initial
    }

    pub fn half_order(&self) -> u32 {
        self.coefficients_at(0.0).half_order()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub truncation: usize,
    pub grid: TimeGrid,
    pub paths: usize,
    pub master_seed: u64,
    /// Keep a snapshot every this many steps; the final time is always kept.
    pub record_every: usize,
}

impl SimulationSettings {
    pub fn new(truncation: usize, grid: TimeGrid, paths: usize, master_seed: u64) -> Self {
        SimulationSettings {
            truncation,
            grid,
            paths,
            master_seed,
            record_every: 1,
        }
    }

    pub fn record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    fn record_indices(&self) -> Vec<usize> {
        let steps = self.grid.steps();
        let mut idx: Vec<usize> = (0..=steps).step_by(self.record_every.max(1)).collect();
        if *idx.last().unwrap() != steps {
            idx.push(steps);
        }
        idx
    }
}

/// Per-step data shared by every path: frozen symbols and projected forcing.
struct StepData {
    h: f64,
    /// `(a − ½ Σ b_k²) h`
    drift_h: Vec<Complex64>,
    /// `b_k`, `[k][mode]`
    noise: Vec<Vec<Complex64>>,
    /// `(f − Σ b_k g_k) h`
    forcing_h: Vec<Complex64>,
    /// `g_k`, `[k][mode]`, empty when `g = 0`
    noise_forcing: Vec<Vec<Complex64>>,
}

fn build_plan(model: &LinearModel, settings: &SimulationSettings, noise_count: usize, m: u32) -> Result<Vec<StepData>> {
    let truncation = settings.truncation;
    let width = 2 * truncation + 1;
    let times = settings.grid.times();
    let mut plan = Vec::with_capacity(times.len() - 1);
    for w in times.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let coeffs = model.coefficients_at(t);
        if coeffs.noise_count() != noise_count || coeffs.half_order() != m {
            return Err(Error::param(
                "coeffs",
                format!("coefficients at t = {t} change the order or noise count"),
            ));
        }
        let symbol = OperatorSymbol::from_coefficients(&coeffs, truncation)?;

        let f = match model.forcing_at(t) {
            Some(f) => {
                if f.truncation() != truncation {
                    return Err(Error::TruncationMismatch {
                        expected: truncation,
                        found: f.truncation(),
                    });
                }
                f.modes().to_vec()
            }
            None => vec![Complex64::new(0.0, 0.0); width],
        };
        let g = match model.noise_forcing_at(t) {
            Some(g) => {
                if g.len() != noise_count {
                    return Err(Error::NoiseCountMismatch {
                        expected: noise_count,
                        found: g.len(),
                    });
                }
                for gk in &g {
                    if gk.truncation() != truncation {
                        return Err(Error::TruncationMismatch {
                            expected: truncation,
                            found: gk.truncation(),
                        });
                    }
                }
                g.into_iter().map(|gk| gk.modes().to_vec()).collect()
            }
            None => Vec::new(),
        };

        let drift_h = (0..width)
            .map(|i| {
                let b2: Complex64 = symbol.noise.iter().map(|bk| bk[i] * bk[i]).sum();
                (symbol.drift[i] - 0.5 * b2) * h
            })
            .collect();
        // Itô correction of the forced equation: the cross term −Σ b_k g_k
        // enters the deterministic forcing.
        let forcing_h = (0..width)
            .map(|i| {
                let cross: Complex64 = g
                    .iter()
                    .zip(&symbol.noise)
                    .map(|(gk, bk): (&Vec<Complex64>, &Vec<Complex64>)| bk[i] * gk[i])
                    .sum();
                (f[i] - cross) * h
            })
            .collect();
        plan.push(StepData {
            h,
            drift_h,
            noise: symbol.noise,
            forcing_h,
            noise_forcing: g,
        });
    }
    Ok(plan)
}

fn initial_field(model: &LinearModel, m: u32, truncation: usize) -> Result<SpectralField> {
    match model.initial() {
        InitialCondition::Zero => Ok(SpectralField::zeros(truncation)),
        InitialCondition::Example => Ok(example_initial(m, truncation)),
        InitialCondition::Field(f) => {
            if f.truncation() != truncation {
                return Err(Error::TruncationMismatch {
                    expected: truncation,
                    found: f.truncation(),
                });
            }
            Ok(f.clone())
        }
    }
}

fn run_path(plan: &[StepData], path: &WienerPath, initial: &SpectralField, record: &[usize]) -> Vec<SpectralField> {
    let mut u = initial.clone();
    let mut out = Vec::with_capacity(record.len());
    let mut next = 0;
    if record.first() == Some(&0) {
        out.push(u.clone());
        next = 1;
    }
    for (j, step) in plan.iter().enumerate() {
        debug_assert!(step.h > 0.0);
        let dw: Vec<f64> = (0..path.noise_count()).map(|k| path.increments(k)[j]).collect();
        for (i, v) in u.modes_mut().iter_mut().enumerate() {
            let mut exponent = step.drift_h[i];
            for (bk, dwk) in step.noise.iter().zip(&dw) {
                exponent += bk[i] * dwk;
            }
            let phi = exponent.exp();
            let mut inc = step.forcing_h[i];
            for (gk, dwk) in step.noise_forcing.iter().zip(&dw) {
                inc += gk[i] * dwk;
            }
            *v = phi * (*v + inc);
        }
        if next < record.len() && record[next] == j + 1 {
            out.push(u.clone());
            next += 1;
        }
    }
    out
}

/// Advances one given Wiener path with the exponential-Euler scheme and
/// returns the state at every grid time.
pub fn simulate_path(model: &LinearModel, truncation: usize, path: &WienerPath) -> Result<Vec<SpectralField>> {
    let grid = TimeGrid::new(path.times().to_vec())?;
    let coeffs = model.coefficients_at(0.0);
    if path.noise_count() != coeffs.noise_count() {
        return Err(Error::NoiseCountMismatch {
            expected: coeffs.noise_count(),
            found: path.noise_count(),
        });
    }
    let settings = SimulationSettings::new(truncation, grid, 1, 0);
    let plan = build_plan(model, &settings, coeffs.noise_count(), coeffs.half_order())?;
    let initial = initial_field(model, coeffs.half_order(), truncation)?;
    Ok(run_path(&plan, path, &initial, &settings.record_indices()))
}

/// Description of how an ensemble was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub m: u32,
    pub truncation: usize,
    pub master_seed: u64,
    pub noise_count: usize,
    pub steps: usize,
    pub horizon: f64,
    /// Coefficients at `t = 0`, absent for hand-built ensembles.
    pub coefficients: Option<CoefficientSet>,
}

/// Independent trajectories recorded at common snapshot times.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    params: EnsembleParams,
    times: Vec<f64>,
    /// `[path][snapshot]`
    paths: Vec<Vec<SpectralField>>,
}

impl PathEnsemble {
    /// Ensemble from precomputed trajectories; every trajectory must carry one
    /// field per snapshot time, all with truncation `params.truncation`.
    pub fn from_parts(params: EnsembleParams, times: Vec<f64>, paths: Vec<Vec<SpectralField>>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::param("times", "snapshot times must increase"));
            }
        }
        for traj in &paths {
            if traj.len() != times.len() {
                return Err(Error::param(
                    "paths",
                    "trajectory length differs from the snapshot count",
                ));
            }
            for f in traj {
                if f.truncation() != params.truncation {
                    return Err(Error::TruncationMismatch {
                        expected: params.truncation,
                        found: f.truncation(),
                    });
                }
            }
        }
        Ok(PathEnsemble { params, times, paths })
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn truncation(&self) -> usize {
        self.params.truncation
    }

    pub fn trajectory(&self, path: usize) -> &[SpectralField] {
        &self.paths[path]
    }

    /// Index of the snapshot at time `t`.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or(Error::TimeNotOnGrid(t))
    }

    /// Fields of every path at snapshot `index`.
    pub fn snapshot(&self, index: usize) -> impl Iterator<Item = &SpectralField> + '_ {
        self.paths.iter().map(move |traj| &traj[index])
    }

    /// The first `count` paths.
    pub fn prefix(&self, count: usize) -> Result<PathEnsemble> {
        if count == 0 || count > self.paths.len() {
            return Err(Error::param(
                "paths",
                format!("prefix of {count} paths from an ensemble of {}", self.paths.len()),
            ));
        }
        Ok(PathEnsemble {
            params: self.params.clone(),
            times: self.times.clone(),
            paths: self.paths[..count].to_vec(),
        })
    }

    /// Every field multiplied by `s`.
    pub fn scaled(&self, s: f64) -> PathEnsemble {
        PathEnsemble {
            params: self.params.clone(),
            times: self.times.clone(),
            paths: self
                .paths
                .iter()
                .map(|traj| traj.iter().map(|f| f.scaled(s)).collect())
                .collect(),
        }
    }
}

/// Runs the exponential-Euler scheme on `settings.paths` independent paths.
pub fn simulate_model(model: &LinearModel, settings: &SimulationSettings) -> Result<PathEnsemble> {
    if settings.paths == 0 {
        return Err(Error::param("paths", "must be at least 1"));
    }
    if settings.record_every == 0 {
        return Err(Error::param("record_every", "must be at least 1"));
    }
    let coeffs = model.coefficients_at(0.0);
    let m = coeffs.half_order();
    let noise_count = coeffs.noise_count();
    let plan = build_plan(model, settings, noise_count, m)?;
    let initial = initial_field(model, m, settings.truncation)?;
    let record = settings.record_indices();

    let paths = parallel::map_indexed(settings.paths, |i| {
        let w = generate_path(settings.master_seed, i as u64, &settings.grid, noise_count);
        run_path(&plan, &w, &initial, &record)
    });
    let times = record.iter().map(|&j| settings.grid.times()[j]).collect();
    Ok(PathEnsemble {
        params: EnsembleParams {
            m,
            truncation: settings.truncation,
            master_seed: settings.master_seed,
            noise_count,
            steps: settings.grid.steps(),
            horizon: settings.grid.horizon(),
            coefficients: Some(coeffs),
        },
        times,
        paths,
    })
}

/// Exact samples of the model example at every time of `grid`, one Wiener
/// process, path `i` driven by the same increments as in [`simulate_model`].
pub fn sample_exact(
    m: u32,
    mu: f64,
    truncation: usize,
    grid: &TimeGrid,
    paths: usize,
    master_seed: u64,
) -> Result<PathEnsemble> {
    if paths == 0 {
        return Err(Error::param("paths", "must be at least 1"));
    }
    if m == 0 {
        return Err(Error::param("m", "half-order must be at least 1"));
    }
    let times = grid.times().to_vec();
    let trajectories = parallel::map_indexed(paths, |i| {
        let w = generate_path(master_seed, i as u64, grid, 1).values(0);
        times
            .iter()
            .zip(&w)
            .map(|(&t, &wt)| sample_exact_field(m, mu, truncation, t, wt))
            .collect()
    });
    Ok(PathEnsemble {
        params: EnsembleParams {
            m,
            truncation,
            master_seed,
            noise_count: 1,
            steps: grid.steps(),
            horizon: grid.horizon(),
            coefficients: Some(CoefficientSet::scalar(m, 1.0, &[mu])?),
        },
        times,
        paths: trajectories,
    })
}

/// `‖u(·, t)‖_{L²}` of the exact model-example solution for every path and
/// every time of `grid`, without storing fields. `[path][time]`.
pub fn sample_exact_l2_norms(
    m: u32,
    mu: f64,
    truncation: usize,
    grid: &TimeGrid,
    paths: usize,
    master_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if paths == 0 {
        return Err(Error::param("paths", "must be at least 1"));
    }
    if m == 0 {
        return Err(Error::param("m", "half-order must be at least 1"));
    }
    let times = grid.times().to_vec();
    Ok(parallel::map_indexed(paths, |i| {
        let w = generate_path(master_seed, i as u64, grid, 1).values(0);
        times
            .iter()
            .zip(&w)
            .map(|(&t, &wt)| sample_exact_field(m, mu, truncation, t, wt).l2_norm())
            .collect()
    }))
}
