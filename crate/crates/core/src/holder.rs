//! Estimators of stochastic Hölder norms on a finite space-time region.
//!
//! For a random field `u` and `E = L^p(Ω)` the quantities estimated are
//!
//! ```text
//! |u|_k            = max_{j ≤ k} sup_X ‖D^j u(X)‖_{L^p_ω}
//! [u]_{k+δ}        = sup_t sup_{x ≠ y} ‖D^k u(x,t) − D^k u(y,t)‖_{L^p_ω} / d(x,y)^δ
//! [u]_{(k+δ,δ/2m)} = sup_{X ≠ Y} ‖D^k u(X) − D^k u(Y)‖_{L^p_ω} / |X − Y|_p^δ
//! ```
//!
//! with the torus distance `d(x,y) = min(|x−y|, 2π−|x−y|)` and the parabolic
//! modulus `|X − Y|_p = d(x,y) + |t−s|^{1/2m}`. Expectations become means over
//! paths and suprema become maxima over grid pairs; pairs closer than one
//! spatial grid cell are skipped.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::parallel;
use crate::simulate::{LinearModel, PathEnsemble};
use crate::spectral::{EvaluationTable, SpectralField};
use crate::{Error, Result};

/// Default spatial resolution of a probe region.
pub const DEFAULT_RESOLUTION_X: usize = 64;
/// Default temporal resolution of a probe region.
pub const DEFAULT_RESOLUTION_T: usize = 32;

/// `min(|x−y|, 2π−|x−y|)` for points of `[0, 2π)`.
pub fn torus_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Finite stand-in for a space-time cylinder: spatial points on the torus and
/// time points in `[0, T]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    points: Vec<f64>,
    times: Vec<f64>,
}

impl Region {
    pub fn new(points: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if points.is_empty() || times.is_empty() {
            return Err(Error::RegionTooSmall);
        }
        if points.len() * times.len() < 2 {
            return Err(Error::RegionTooSmall);
        }
        if points.iter().any(|&x| !(0.0..2.0 * PI).contains(&x)) {
            return Err(Error::param("points", "spatial points must lie in [0, 2π)"));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("points", "spatial points must be strictly increasing"));
        }
        if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::param("times", "time points must be finite and non-negative"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("times", "time points must be strictly increasing"));
        }
        Ok(Region { points, times })
    }

    /// `resolution_x` equally spaced points `2πj / resolution_x`.
    pub fn uniform(resolution_x: usize, times: Vec<f64>) -> Result<Self> {
        let points = (0..resolution_x)
            .map(|j| 2.0 * PI * j as f64 / resolution_x as f64)
            .collect();
        Region::new(points, times)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Smallest torus distance between neighbouring spatial points; zero for
    /// a single point.
    pub fn cell(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| torus_distance(self.points[i], self.points[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    fn point_count(&self) -> usize {
        self.points.len() * self.times.len()
    }
}

/// `(mean |v|^p)^{1/p}` over draws.
pub fn lp_omega(values: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if values.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let sum: f64 = values.iter().map(|v| pow_abs(*v, p)).sum();
    Ok((sum / values.len() as f64).powf(1.0 / p))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::param("p", format!("must be a finite value >= 2, got {p}")));
    }
    Ok(())
}

#[inline]
fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 2.0 {
        v * v
    } else if p == 4.0 {
        let s = v * v;
        s * s
    } else {
        v.abs().powf(p)
    }
}

/// `|v|^p` given `|v|²`.
#[inline]
fn pow_from_square(sq: f64, p: f64) -> f64 {
    if p == 2.0 {
        sq
    } else if p == 4.0 {
        sq * sq
    } else {
        sq.powf(p / 2.0)
    }
}

/// Real samples of an `ℝ^comps`-valued field at every region point.
/// Layout `[time][x][draw][comp]`, so each point's draws are contiguous.
struct Samples {
    nx: usize,
    nt: usize,
    draws: usize,
    comps: usize,
    data: Vec<f64>,
}

impl Samples {
    fn point(&self, ti: usize, xi: usize) -> &[f64] {
        let width = self.draws * self.comps;
        let start = (ti * self.nx + xi) * width;
        &self.data[start..start + width]
    }

    /// `‖·‖_{L^p_ω(E)}` at one point.
    fn point_norm(&self, ti: usize, xi: usize, p: f64) -> f64 {
        let v = self.point(ti, xi);
        let sum: f64 = v
            .chunks_exact(self.comps)
            .map(|c| pow_from_square(c.iter().map(|x| x * x).sum(), p))
            .sum();
        (sum / self.draws as f64).powf(1.0 / p)
    }

    /// `‖a − b‖_{L^p_ω(E)}` between two points.
    fn difference_norm(&self, a: (usize, usize), b: (usize, usize), p: f64) -> f64 {
        let va = self.point(a.0, a.1);
        let vb = self.point(b.0, b.1);
        let sum: f64 = if self.comps == 1 {
            if p == 2.0 {
                va.iter().zip(vb).map(|(x, y)| (x - y) * (x - y)).sum()
            } else {
                va.iter().zip(vb).map(|(x, y)| pow_abs(x - y, p)).sum()
            }
        } else {
            va.chunks_exact(self.comps)
                .zip(vb.chunks_exact(self.comps))
                .map(|(ca, cb)| {
                    let sq: f64 = ca.iter().zip(cb).map(|(x, y)| (x - y) * (x - y)).sum();
                    pow_from_square(sq, p)
                })
                .sum()
        };
        (sum / self.draws as f64).powf(1.0 / p)
    }

    /// Per-time maxima of the point norms.
    fn sup_by_time(&self, p: f64) -> Vec<f64> {
        (0..self.nt)
            .map(|ti| (0..self.nx).map(|xi| self.point_norm(ti, xi, p)).fold(0.0, f64::max))
            .collect()
    }
}

/// Samples `D^order` of one or more fields per draw. `fields(ti, draw)` gives
/// the `comps` fields of that draw at region time `ti`.
fn collect_samples<'a, F>(
    region: &Region,
    truncation: usize,
    draws: usize,
    comps: usize,
    order: u32,
    fields: F,
) -> Samples
where
    F: Fn(usize, usize) -> Vec<&'a SpectralField> + Sync + Send,
{
    let table = EvaluationTable::new(truncation, region.points());
    let nx = region.points().len();
    let nt = region.times().len();
    let slabs = parallel::map_indexed(nt, |ti| {
        let mut slab = vec![0.0; nx * draws * comps];
        let mut buf = vec![0.0; nx];
        for d in 0..draws {
            for (c, field) in fields(ti, d).into_iter().enumerate() {
                table.evaluate_into(field, order, &mut buf);
                for (xi, v) in buf.iter().enumerate() {
                    slab[(xi * draws + d) * comps + c] = *v;
                }
            }
        }
        slab
    });
    Samples {
        nx,
        nt,
        draws,
        comps,
        data: slabs.concat(),
    }
}

/// Spatial seminorm per time and, when `modulus_power` is given, the
/// space-time seminorm with `|X−Y|_p = d(x,y) + |t−s|^{modulus_power}`.
fn seminorms(
    samples: &Samples,
    region: &Region,
    delta: f64,
    p: f64,
    modulus_power: Option<f64>,
) -> (Vec<f64>, Option<f64>) {
    let nx = samples.nx;
    let total = samples.nt * nx;
    let cutoff = region.cell() * (1.0 - 1e-9);
    let xs = region.points();
    let ts = region.times();

    // Each first point reports its best same-time and space-time quotient.
    let per_point = parallel::map_indexed(total, |i| {
        let (ti, xi) = (i / nx, i % nx);
        let mut space = 0.0f64;
        let mut joint = 0.0f64;
        for j in (i + 1)..total {
            let (tj, xj) = (j / nx, j % nx);
            let dx = torus_distance(xs[xi], xs[xj]);
            let dist = if ti == tj {
                dx
            } else if let Some(power) = modulus_power {
                dx + (ts[tj] - ts[ti]).abs().powf(power)
            } else {
                break;
            };
            if dist <= 0.0 || dist < cutoff {
                continue;
            }
            let q = samples.difference_norm((ti, xi), (tj, xj), p) / dist.powf(delta);
            if ti == tj {
                space = space.max(q);
            }
            joint = joint.max(q);
        }
        (space, joint)
    });

    let mut space = vec![0.0f64; samples.nt];
    let mut joint = 0.0f64;
    for (i, (s, j)) in per_point.into_iter().enumerate() {
        let ti = i / nx;
        space[ti] = space[ti].max(s);
        joint = joint.max(j);
    }
    (space, modulus_power.map(|_| joint))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    /// `|u|_k`: largest `‖D^j u‖_{L^p_ω}` over `j ≤ k` and the region.
    pub sup_norm: f64,
    /// `[u]_{k+δ}`: spatial quotient, sup over time.
    pub seminorm_space: f64,
    /// `[u]_{(k+δ,δ/2m)}`, present when the space-time variant was requested.
    pub seminorm_parabolic: Option<f64>,
    /// `|u|_k + [u]_{(k+δ,δ/2m)}` (space-time), or
    /// `sup_t (|u(·,t)|_k + [u(·,t)]_{k+δ})` (spatial).
    pub full_norm: f64,
    pub k: u32,
    pub delta: f64,
    pub p: f64,
    pub parabolic: bool,
    pub resolution_x: usize,
    pub resolution_t: usize,
    pub paths: usize,
}

fn check_holder_params(k: u32, m: u32, delta: f64, p: f64, region: &Region) -> Result<()> {
    check_p(p)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if k > 2 * m {
        return Err(Error::param(
            "k",
            format!("derivative order {k} exceeds 2m = {}", 2 * m),
        ));
    }
    if region.point_count() < 2 {
        return Err(Error::RegionTooSmall);
    }
    Ok(())
}

/// Norms of `D^0 … D^k` of a field given per draw, time and component.
#[allow(clippy::too_many_arguments)]
fn holder_from_fields<'a, F>(
    region: &Region,
    truncation: usize,
    draws: usize,
    comps: usize,
    m: u32,
    k: u32,
    delta: f64,
    p: f64,
    parabolic: bool,
    fields: F,
) -> HolderReport
where
    F: Fn(usize, usize) -> Vec<&'a SpectralField> + Sync + Send + Copy,
{
    let nt = region.times().len();
    let mut sup_by_time = vec![0.0f64; nt];
    for order in 0..k {
        let s = collect_samples(region, truncation, draws, comps, order, fields);
        for (acc, v) in sup_by_time.iter_mut().zip(s.sup_by_time(p)) {
            *acc = acc.max(v);
        }
    }
    let top = collect_samples(region, truncation, draws, comps, k, fields);
    for (acc, v) in sup_by_time.iter_mut().zip(top.sup_by_time(p)) {
        *acc = acc.max(v);
    }
    let power = parabolic.then(|| 1.0 / (2.0 * m as f64));
    let (space, joint) = seminorms(&top, region, delta, p, power);

    let sup_norm = sup_by_time.iter().copied().fold(0.0, f64::max);
    let seminorm_space = space.iter().copied().fold(0.0, f64::max);
    let full_norm = match joint {
        Some(j) => sup_norm + j,
        None => sup_by_time.iter().zip(&space).map(|(a, b)| a + b).fold(0.0, f64::max),
    };
    HolderReport {
        sup_norm,
        seminorm_space,
        seminorm_parabolic: joint,
        full_norm,
        k,
        delta,
        p,
        parabolic,
        resolution_x: region.points().len(),
        resolution_t: nt,
        paths: draws,
    }
}

/// Hölder norms of `D^k u` for the ensemble on `region`. Region times must be
/// snapshot times of the ensemble.
pub fn holder_seminorm(
    ens: &PathEnsemble,
    k: u32,
    delta: f64,
    p: f64,
    region: &Region,
    parabolic: bool,
) -> Result<HolderReport> {
    let m = ens.params().m;
    check_holder_params(k, m, delta, p, region)?;
    let snapshot: Vec<usize> = region
        .times()
        .iter()
        .map(|&t| ens.time_index(t))
        .collect::<Result<_>>()?;
    let fields = |ti: usize, d: usize| vec![&ens.trajectory(d)[snapshot[ti]]];
    Ok(holder_from_fields(
        region,
        ens.truncation(),
        ens.path_count(),
        1,
        m,
        k,
        delta,
        p,
        parabolic,
        fields,
    ))
}

/// Spatial Hölder norm `|h|_{k+δ}` of a deterministic, possibly
/// `l²`-valued, free term given as fields at each region time.
fn deterministic_norm(
    per_time: &[Vec<SpectralField>],
    truncation: usize,
    m: u32,
    k: u32,
    delta: f64,
    p: f64,
    region: &Region,
) -> f64 {
    let comps = per_time.first().map_or(0, Vec::len);
    if comps == 0 || per_time.iter().flatten().all(SpectralField::is_zero) {
        return 0.0;
    }
    let fields = |ti: usize, _d: usize| per_time[ti].iter().collect::<Vec<_>>();
    holder_from_fields(region, truncation, 1, comps, m, k, delta, p, false, fields).full_norm
}

/// Estimated `⦀u⦀_{(2m+δ,δ/2m)} / (⦀f⦀_δ + ⦀g⦀_{m+δ})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchauderProbe {
    pub norm_u: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    pub ratio: f64,
    pub resolution_x: usize,
    pub resolution_t: usize,
    pub paths: usize,
}

/// Ratio of the solution's space-time `2m+δ` norm to the free terms' norms,
/// all estimated on `region`. `ens` must come from [`crate::simulate::simulate_model`]
/// applied to `model`, with zero initial data.
pub fn schauder_ratio(
    ens: &PathEnsemble,
    model: &LinearModel,
    delta: f64,
    p: f64,
    region: &Region,
) -> Result<SchauderProbe> {
    let m = ens.params().m;
    let truncation = ens.truncation();
    check_holder_params(2 * m, m, delta, p, region)?;

    let f: Vec<Vec<SpectralField>> = region
        .times()
        .iter()
        .map(|&t| model.forcing_at(t).into_iter().collect())
        .collect();
    let g: Vec<Vec<SpectralField>> = region
        .times()
        .iter()
        .map(|&t| model.noise_forcing_at(t).unwrap_or_default())
        .collect();
    for field in f.iter().chain(&g).flatten() {
        if field.truncation() != truncation {
            return Err(Error::TruncationMismatch {
                expected: truncation,
                found: field.truncation(),
            });
        }
    }
    let norm_f = deterministic_norm(&f, truncation, m, 0, delta, p, region);
    let norm_g = deterministic_norm(&g, truncation, m, m, delta, p, region);
    if norm_f + norm_g == 0.0 {
        return Err(Error::ZeroForcing);
    }
    let report = holder_seminorm(ens, 2 * m, delta, p, region, true)?;
    Ok(SchauderProbe {
        norm_u: report.full_norm,
        norm_f,
        norm_g,
        ratio: report.full_norm / (norm_f + norm_g),
        resolution_x: report.resolution_x,
        resolution_t: report.resolution_t,
        paths: report.paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::CoefficientSet;
    use crate::simulate::{simulate_model, EnsembleParams, SimulationSettings, TimeGrid};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn params(m: u32, truncation: usize) -> EnsembleParams {
        EnsembleParams {
            m,
            truncation,
            master_seed: 0,
            noise_count: 1,
            steps: 1,
            horizon: 1.0,
            coefficients: None,
        }
    }

    /// One-path ensemble with the same field at every time.
    fn frozen(field: SpectralField, times: &[f64]) -> PathEnsemble {
        let traj = vec![field.clone(); times.len()];
        PathEnsemble::from_parts(params(1, field.truncation()), times.to_vec(), vec![traj]).unwrap()
    }

    /// Spatial seminorm by definition, from point evaluations of `u`.
    fn brute_force_space(u: impl Fn(f64) -> f64, region: &Region, delta: f64) -> f64 {
        let xs = region.points();
        let cutoff = region.cell() * (1.0 - 1e-9);
        let mut best = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            for &y in &xs[i + 1..] {
                let d = torus_distance(x, y);
                if d >= cutoff && d > 0.0 {
                    best = best.max((u(x) - u(y)).abs() / d.powf(delta));
                }
            }
        }
        best
    }

    #[test]
    fn torus_distance_wraps() {
        assert!((torus_distance(0.1, 2.0 * PI - 0.1) - 0.2).abs() < 1e-12);
        assert!((torus_distance(0.0, PI) - PI).abs() < 1e-12);
        assert_eq!(torus_distance(1.0, 1.0), 0.0);
    }

    #[test]
    fn region_validation() {
        assert!(matches!(Region::uniform(1, vec![0.5]), Err(Error::RegionTooSmall)));
        assert!(Region::new(vec![0.0, 7.0], vec![0.0]).is_err());
        assert!(Region::new(vec![1.0, 0.5], vec![0.0]).is_err());
        assert!(Region::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        let r = Region::uniform(8, vec![0.0, 1.0]).unwrap();
        assert!((r.cell() - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn lp_omega_examples() {
        assert!((lp_omega(&[-2.5; 10], 3.0).unwrap() - 2.5).abs() < 1e-12);
        assert!((lp_omega(&[1.5, 1.5], 2.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(lp_omega(&[], 2.0), Err(Error::EmptyEnsemble)));
        assert!(lp_omega(&[1.0], 1.0).is_err());
    }

    #[test]
    fn lp_omega_of_standard_normals() {
        use crate::simulate::path_rng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = path_rng(21, 0);
        let z: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = z.len() as f64;
        for (p, moment) in [(2.0, 1.0f64), (4.0, 3.0)] {
            let powers: Vec<f64> = z.iter().map(|v| v.abs().powf(p)).collect();
            let mean = powers.iter().sum::<f64>() / n;
            let sd = (powers.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let se = sd / n.sqrt();
            let est = lp_omega(&z, p).unwrap();
            // 3 standard errors of the p-th moment, mapped through x^{1/p}
            let lo = (moment - 3.0 * se).powf(1.0 / p);
            let hi = (moment + 3.0 * se).powf(1.0 / p);
            assert!(est >= lo && est <= hi, "p={p} est={est}");
        }
        assert!((3f64.powf(0.25) - 1.316).abs() < 1e-3);
    }

    #[test]
    fn constant_field_has_zero_seminorm() {
        let times = [0.0, 0.5, 1.0];
        let ens = frozen(SpectralField::constant(3, 2.0), &times);
        let region = Region::uniform(16, times.to_vec()).unwrap();
        for k in 0..=2 {
            for delta in [0.1, 0.5, 0.9] {
                let r = holder_seminorm(&ens, k, delta, 2.0, &region, true).unwrap();
                assert_eq!(r.seminorm_space, 0.0);
                assert_eq!(r.seminorm_parabolic, Some(0.0));
            }
        }
    }

    #[test]
    fn sine_matches_brute_force() {
        let times = [0.0];
        let ens = frozen(SpectralField::sine(2, 1, 1.0), &times);
        for nx in [8, 31, 64] {
            let region = Region::uniform(nx, times.to_vec()).unwrap();
            let r = holder_seminorm(&ens, 0, 0.5, 2.0, &region, false).unwrap();
            let oracle = brute_force_space(f64::sin, &region, 0.5);
            assert!((r.seminorm_space - oracle).abs() <= 1e-12 * oracle, "nx={nx}");
            let sup = region.points().iter().map(|x| x.sin().abs()).fold(0.0, f64::max);
            assert!((r.sup_norm - sup).abs() < 1e-12);
            assert!((r.full_norm - (sup + oracle)).abs() < 1e-12);
        }
    }

    #[test]
    fn second_derivative_of_two_cos() {
        let times = [0.0, 1.0];
        let u = SpectralField::cosine(2, 1, 2.0);
        let region = Region::uniform(24, times.to_vec()).unwrap();
        let k2 = holder_seminorm(&frozen(u.clone(), &times), 2, 0.4, 2.0, &region, true).unwrap();
        let k0 = holder_seminorm(&frozen(u.scaled(-1.0), &times), 0, 0.4, 2.0, &region, true).unwrap();
        assert!((k2.seminorm_space - k0.seminorm_space).abs() < 1e-12);
        assert!((k2.seminorm_parabolic.unwrap() - k0.seminorm_parabolic.unwrap()).abs() < 1e-12);
    }

    fn random_ensemble() -> PathEnsemble {
        let model = crate::simulate::LinearModel::example(2, 0.8).unwrap();
        let settings = SimulationSettings::new(4, TimeGrid::uniform(0.5, 8).unwrap(), 50, 4).record_every(2);
        simulate_model(&model, &settings).unwrap()
    }

    #[test]
    fn scaling_equivariance() {
        let ens = random_ensemble();
        let region = Region::uniform(12, ens.times()[1..].to_vec()).unwrap();
        let base = holder_seminorm(&ens, 1, 0.5, 3.0, &region, true).unwrap();
        for s in [0.5, 3.0] {
            let r = holder_seminorm(&ens.scaled(s), 1, 0.5, 3.0, &region, true).unwrap();
            assert!((r.sup_norm - s * base.sup_norm).abs() <= 1e-12 * s * base.sup_norm);
            assert!((r.seminorm_space - s * base.seminorm_space).abs() <= 1e-12 * s * base.seminorm_space);
            let (a, b) = (r.seminorm_parabolic.unwrap(), base.seminorm_parabolic.unwrap());
            assert!((a - s * b).abs() <= 1e-12 * s * b);
        }
    }

    #[test]
    fn refinement_is_monotone() {
        let ens = random_ensemble();
        let times = ens.times()[1..].to_vec();
        let coarse = Region::uniform(8, times.clone()).unwrap();
        let fine = Region::uniform(16, times).unwrap();
        let a = holder_seminorm(&ens, 0, 0.5, 2.0, &coarse, true).unwrap();
        let b = holder_seminorm(&ens, 0, 0.5, 2.0, &fine, true).unwrap();
        assert!(b.seminorm_space >= a.seminorm_space);
        assert!(b.seminorm_parabolic.unwrap() >= a.seminorm_parabolic.unwrap());
        assert!(b.sup_norm >= a.sup_norm);
    }

    #[test]
    fn monotone_in_delta_on_small_regions() {
        let ens = random_ensemble();
        // spatial diameter 0.9, temporal spread 0.25^{1/4} ≈ 0.7 is too much for
        // the joint modulus, so only same-time pairs here
        let points: Vec<f64> = (0..10).map(|j| 0.1 * j as f64).collect();
        let region = Region::new(points, ens.times()[1..].to_vec()).unwrap();
        let mut last = 0.0;
        for delta in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let r = holder_seminorm(&ens, 1, delta, 2.0, &region, false).unwrap();
            assert!(r.seminorm_space >= last);
            last = r.seminorm_space;
        }
    }

    #[test]
    fn triangle_inequality() {
        let ens = random_ensemble();
        let times = ens.times().to_vec();
        let other = frozen_like(&ens, |n| {
            Complex64::new(
                0.0,
                if n == 2 {
                    -0.5
                } else if n == -2 {
                    0.5
                } else {
                    0.0
                },
            )
        });
        let sum = combine(&ens, &other);
        let region = Region::uniform(10, times).unwrap();
        for parabolic in [false, true] {
            let a = holder_seminorm(&ens, 0, 0.5, 2.5, &region, parabolic).unwrap();
            let b = holder_seminorm(&other, 0, 0.5, 2.5, &region, parabolic).unwrap();
            let c = holder_seminorm(&sum, 0, 0.5, 2.5, &region, parabolic).unwrap();
            assert!(c.seminorm_space <= a.seminorm_space + b.seminorm_space + 1e-12);
            if parabolic {
                assert!(
                    c.seminorm_parabolic.unwrap()
                        <= a.seminorm_parabolic.unwrap() + b.seminorm_parabolic.unwrap() + 1e-12
                );
            }
        }
    }

    /// Same shape as `ens`, every path holding a time-scaled copy of one field.
    fn frozen_like(ens: &PathEnsemble, modes: impl Fn(i64) -> Complex64) -> PathEnsemble {
        let base = SpectralField::from_fn(ens.truncation(), modes);
        let traj: Vec<SpectralField> = ens.times().iter().map(|&t| base.scaled(1.0 + t)).collect();
        PathEnsemble::from_parts(ens.params().clone(), ens.times().to_vec(), vec![traj; ens.path_count()]).unwrap()
    }

    fn combine(a: &PathEnsemble, b: &PathEnsemble) -> PathEnsemble {
        let paths = (0..a.path_count())
            .map(|p| {
                a.trajectory(p)
                    .iter()
                    .zip(b.trajectory(p))
                    .map(|(x, y)| x.try_add(y).unwrap())
                    .collect()
            })
            .collect();
        PathEnsemble::from_parts(a.params().clone(), a.times().to_vec(), paths).unwrap()
    }

    #[test]
    fn parameter_checks() {
        let ens = random_ensemble();
        let region = Region::uniform(4, vec![0.5]).unwrap();
        assert!(holder_seminorm(&ens, 5, 0.5, 2.0, &region, false).is_err());
        assert!(holder_seminorm(&ens, 1, 1.0, 2.0, &region, false).is_err());
        assert!(holder_seminorm(&ens, 1, 0.5, 1.5, &region, false).is_err());
        let off_grid = Region::uniform(4, vec![0.3]).unwrap();
        assert!(matches!(
            holder_seminorm(&ens, 1, 0.5, 2.0, &off_grid, false),
            Err(Error::TimeNotOnGrid(_))
        ));
    }

    #[test]
    fn zero_forcing_is_rejected() {
        let coeffs = CoefficientSet::scalar(1, 1.0, &[1.0]).unwrap();
        let model = LinearModel::constant(coeffs);
        let settings = SimulationSettings::new(2, TimeGrid::uniform(1.0, 4).unwrap(), 3, 1);
        let ens = simulate_model(&model, &settings).unwrap();
        let region = Region::uniform(8, vec![0.5, 1.0]).unwrap();
        assert!(matches!(
            schauder_ratio(&ens, &model, 0.5, 2.0, &region),
            Err(Error::ZeroForcing)
        ));
        // and the solution itself is zero
        let r = holder_seminorm(&ens, 2, 0.5, 2.0, &region, true).unwrap();
        assert_eq!(r.full_norm, 0.0);
    }

    fn arb_field() -> impl Strategy<Value = SpectralField> {
        (-2.0f64..2.0, prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3)).prop_map(|(c, pos)| {
            let mut f = SpectralField::constant(3, c);
            for (i, (re, im)) in pos.into_iter().enumerate() {
                let n = i as i64 + 1;
                f.set(n, Complex64::new(re, im));
                f.set(-n, Complex64::new(re, -im));
            }
            f
        })
    }

    /// Three paths at times {0, 0.5, 1}.
    fn arb_ensemble() -> impl Strategy<Value = PathEnsemble> {
        prop::collection::vec(prop::collection::vec(arb_field(), 3), 3)
            .prop_map(|paths| PathEnsemble::from_parts(params(1, 3), vec![0.0, 0.5, 1.0], paths).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_scaling_equivariance(ens in arb_ensemble(), s in 0.01f64..100.0, k in 0u32..=2, p in 2.0f64..6.0) {
            let region = Region::uniform(9, ens.times().to_vec()).unwrap();
            let a = holder_seminorm(&ens, k, 0.5, p, &region, true).unwrap();
            let b = holder_seminorm(&ens.scaled(s), k, 0.5, p, &region, true).unwrap();
            for (x, y) in [
                (b.sup_norm, a.sup_norm),
                (b.seminorm_space, a.seminorm_space),
                (b.seminorm_parabolic.unwrap(), a.seminorm_parabolic.unwrap()),
                (b.full_norm, a.full_norm),
            ] {
                prop_assert!((x - s * y).abs() <= 1e-12 * s * y.max(1e-300));
            }
        }

        #[test]
        fn prop_triangle_inequality(u in arb_ensemble(), v in arb_ensemble(), p in 2.0f64..6.0, delta in 0.05f64..0.95) {
            let w = combine(&u, &v);
            let region = Region::uniform(7, u.times().to_vec()).unwrap();
            let a = holder_seminorm(&u, 1, delta, p, &region, true).unwrap();
            let b = holder_seminorm(&v, 1, delta, p, &region, true).unwrap();
            let c = holder_seminorm(&w, 1, delta, p, &region, true).unwrap();
            let tol = 1e-12 * (1.0 + a.seminorm_parabolic.unwrap() + b.seminorm_parabolic.unwrap());
            prop_assert!(c.seminorm_space <= a.seminorm_space + b.seminorm_space + tol);
            prop_assert!(c.seminorm_parabolic.unwrap() <= a.seminorm_parabolic.unwrap() + b.seminorm_parabolic.unwrap() + tol);
            prop_assert!(c.sup_norm <= a.sup_norm + b.sup_norm + tol);
        }

        #[test]
        fn prop_reports_are_non_negative_and_ordered(ens in arb_ensemble(), k in 0u32..=2) {
            let region = Region::uniform(8, ens.times().to_vec()).unwrap();
            let r = holder_seminorm(&ens, k, 0.3, 2.0, &region, true).unwrap();
            prop_assert!(r.sup_norm >= 0.0 && r.seminorm_space >= 0.0);
            // same-time pairs are a subset of all pairs
            prop_assert!(r.seminorm_parabolic.unwrap() >= r.seminorm_space);
            let s = holder_seminorm(&ens, k, 0.3, 2.0, &region, false).unwrap();
            prop_assert_eq!(s.seminorm_space, r.seminorm_space);
            prop_assert!(s.full_norm <= r.full_norm + 1e-12);
        }

        #[test]
        fn prop_lp_omega_monotone_in_p(v in prop::collection::vec(-5.0f64..5.0, 1..50), p in 2.0f64..8.0, dp in 0.0f64..4.0) {
            prop_assert!(lp_omega(&v, p).unwrap() <= lp_omega(&v, p + dp).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn deterministic_heat_equation_ratio() {
        // m = 1, μ = 0, f = sin x: u(x,t) = (1 − e^{−t}) sin x and D²u = −u.
        let coeffs = CoefficientSet::scalar(1, 1.0, &[0.0]).unwrap();
        let model = LinearModel::constant(coeffs).with_forcing(|_| SpectralField::sine(3, 1, 1.0));
        let steps = 2048;
        let settings = SimulationSettings::new(3, TimeGrid::uniform(1.0, steps).unwrap(), 2, 1).record_every(256);
        let ens = simulate_model(&model, &settings).unwrap();
        let times: Vec<f64> = ens.times()[1..].to_vec();
        let region = Region::uniform(32, times.clone()).unwrap();
        let probe = schauder_ratio(&ens, &model, 0.5, 2.0, &region).unwrap();

        // closed-form solution evaluated on the same pairs
        let xs = region.points();
        let amp = |t: f64| 1.0 - (-t).exp();
        let cutoff = region.cell() * (1.0 - 1e-9);
        let mut sup = 0.0f64;
        let mut semi = 0.0f64;
        let pts: Vec<(f64, f64)> = times.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
        for &(t, x) in &pts {
            sup = sup.max(amp(t) * x.sin().abs()).max(amp(t) * x.cos().abs());
        }
        for (i, &(t, x)) in pts.iter().enumerate() {
            for &(s, y) in &pts[i + 1..] {
                let d = torus_distance(x, y) + (t - s).abs().sqrt();
                if d >= cutoff {
                    semi = semi.max((amp(t) * x.sin() - amp(s) * y.sin()).abs() / d.sqrt());
                }
            }
        }
        let f_sup = xs.iter().map(|x| x.sin().abs()).fold(0.0, f64::max);
        let f_semi = brute_force_space(f64::sin, &region, 0.5);
        let expected = (sup + semi) / (f_sup + f_semi);
        assert_eq!(probe.norm_g, 0.0);
        assert!((probe.norm_f - (f_sup + f_semi)).abs() < 1e-12);
        // exponential Euler with frozen forcing carries an O(h) error
        assert!(
            (probe.ratio - expected).abs() <= 2e-3 * expected,
            "{} vs {expected}",
            probe.ratio
        );
    }
}
