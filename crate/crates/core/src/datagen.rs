//! Benchmark data: uniform hypersphere samples, ellipsoidal holes and grains
//! with a known informative plane, and two-Higgs-doublet parameter scans.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::slicing::Dataset;

/// Fill `out` with a uniform point of the `p`-ball of radius `radius`:
/// Gaussian direction times `radius * U^(1/p)`.
fn ball_point(rng: &mut ChaCha8Rng, radius: f64, out: &mut [f64]) {
    let p = out.len();
    loop {
        let mut norm2 = 0.0;
        for v in out.iter_mut() {
            *v = StandardNormal.sample(rng);
            norm2 += *v * *v;
        }
        if norm2 > 0.0 {
            let u: f64 = rng.random();
            let scale = radius * u.powf(1.0 / p as f64) / norm2.sqrt();
            out.iter_mut().for_each(|v| *v *= scale);
            return;
        }
    }
}

/// `n` i.i.d. uniform points in the `p`-ball of radius `radius`.
pub fn sample_ball(n: usize, p: usize, radius: f64, seed: u64) -> Result<Dataset> {
    sample_with_cavities(n, p, radius, &[], seed).map(|s| s.dataset)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CavityKind {
    Hole,
    Grain,
}

/// Axis-aligned ellipsoidal region of depleted or enhanced density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    pub kind: CavityKind,
    pub center: Vec<f64>,
    pub semi_axes: Vec<f64>,
    /// Density relative to the surrounding ball: 0 empties a hole, values
    /// above 1 oversample a grain.
    pub density_factor: f64,
}

impl CavitySpec {
    pub fn hole(center: Vec<f64>, semi_axes: Vec<f64>) -> Self {
        Self { kind: CavityKind::Hole, center, semi_axes, density_factor: 0.0 }
    }

    pub fn grain(center: Vec<f64>, semi_axes: Vec<f64>, density_factor: f64) -> Self {
        Self { kind: CavityKind::Grain, center, semi_axes, density_factor }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.center)
            .zip(&self.semi_axes)
            .map(|((xi, ci), ai)| ((xi - ci) / ai).powi(2))
            .sum::<f64>()
            <= 1.0
    }

    /// Region volume divided by the volume of the `radius`-ball.
    pub fn volume_fraction(&self, radius: f64) -> f64 {
        self.semi_axes.iter().map(|a| a / radius).product()
    }

    pub fn validate(&self, p: usize, radius: f64) -> Result<()> {
        if self.center.len() != p || self.semi_axes.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: if self.center.len() != p { self.center.len() } else { self.semi_axes.len() },
            });
        }
        if self.semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::invalid("cavity semi-axes must be positive"));
        }
        let center_norm = self.center.iter().map(|c| c * c).sum::<f64>().sqrt();
        let reach = center_norm + self.semi_axes.iter().copied().fold(0.0, f64::max);
        if reach > radius * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "cavity reaches radius {reach:.4} beyond the ball radius {radius}"
            )));
        }
        match self.kind {
            CavityKind::Hole if !(0.0..1.0).contains(&self.density_factor) => {
                Err(Error::invalid(format!("hole density factor {} must lie in [0, 1)", self.density_factor)))
            }
            CavityKind::Grain if !(self.density_factor >= 1.0 && self.density_factor.is_finite()) => {
                Err(Error::invalid(format!("grain density factor {} must be at least 1", self.density_factor)))
            }
            _ => Ok(()),
        }
    }

    /// The coordinate plane whose central section cuts the largest bounded
    /// cross-section: the two largest semi-axes shorter than `radius`. Axes
    /// spanning the whole ball are used only when fewer than two are shorter.
    pub fn informative_axes(&self, radius: f64) -> (usize, usize) {
        let spans = |a: f64| a >= radius * (1.0 - 1e-12);
        let mut order: Vec<usize> = (0..self.semi_axes.len()).collect();
        order.sort_by(|&a, &b| {
            let (xa, xb) = (self.semi_axes[a], self.semi_axes[b]);
            spans(xa).cmp(&spans(xb)).then(xb.total_cmp(&xa)).then(a.cmp(&b))
        });
        let (i, j) = (order[0], order[1]);
        (i.min(j), i.max(j))
    }
}

/// Result of sampling with cavities.
#[derive(Debug, Clone, PartialEq)]
pub struct CavitySample {
    pub dataset: Dataset,
    /// Coordinate plane of the first cavity's largest cross-section.
    pub informative_axes: Option<(usize, usize)>,
    /// Points rejected by holes while drawing the base sample.
    pub rejected: usize,
    /// Extra points added inside grains.
    pub grain_points: usize,
}

/// Uniform ball sample with holes carved out and grains oversampled.
///
/// Base points are drawn exactly as in [`sample_ball`] and rejected (with
/// probability `1 - density_factor`) when they fall in a hole, until `n` are
/// accepted. Each grain then receives `(density_factor - 1)` times the number
/// of accepted points already inside it, drawn uniformly in the ellipsoid.
pub fn sample_with_cavities(
    n: usize,
    p: usize,
    radius: f64,
    cavities: &[CavitySpec],
    seed: u64,
) -> Result<CavitySample> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    if p < 3 {
        return Err(Error::invalid(format!("dimension p = {p} must be at least 3")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius {radius} must be positive")));
    }
    for c in cavities {
        c.validate(p, radius)?;
    }
    let holes: Vec<&CavitySpec> = cavities.iter().filter(|c| c.kind == CavityKind::Hole).collect();
    let hole_volume: f64 = holes.iter().map(|c| c.volume_fraction(radius) * (1.0 - c.density_factor)).sum();
    if hole_volume >= 1.0 {
        return Err(Error::NothingToSample { cavity: hole_volume, ball: 1.0 });
    }

    let mut rng = seed::rng(seed);
    let mut points = Vec::with_capacity(n * p);
    let mut x = vec![0.0; p];
    let mut rejected = 0;
    while points.len() < n * p {
        ball_point(&mut rng, radius, &mut x);
        let mut keep = true;
        for hole in &holes {
            if hole.contains(&x) {
                keep = hole.density_factor > 0.0 && rng.random::<f64>() < hole.density_factor;
                if !keep {
                    break;
                }
            }
        }
        if keep {
            points.extend_from_slice(&x);
        } else {
            rejected += 1;
        }
    }

    let mut grain_points = 0;
    for grain in cavities.iter().filter(|c| c.kind == CavityKind::Grain) {
        let already = points.chunks_exact(p).filter(|row| grain.contains(row)).count();
        let extra = ((grain.density_factor - 1.0) * already as f64).round() as usize;
        for _ in 0..extra {
            ball_point(&mut rng, 1.0, &mut x);
            for ((xi, ci), ai) in x.iter_mut().zip(&grain.center).zip(&grain.semi_axes) {
                *xi = ci + ai * *xi;
            }
            points.extend_from_slice(&x);
        }
        grain_points += extra;
    }

    let dataset = Dataset::new(points, p, radius)?;
    Ok(CavitySample {
        dataset,
        informative_axes: cavities.first().map(|c| c.informative_axes(radius)),
        rejected,
        grain_points,
    })
}

/// Standard hole fixture in `p` dimensions: a centred ellipsoid with semi-axes
/// `0.9 R` along the first two coordinates and `0.5 R` along the rest.
///
/// Projections only show a shallow central depletion; the central slice
/// through the first coordinate plane shows the largest, empty cross-section.
pub fn hole_fixture(p: usize, radius: f64) -> Vec<CavitySpec> {
    let mut axes = vec![0.5 * radius; p];
    axes[0] = 0.9 * radius;
    axes[1] = 0.9 * radius;
    vec![CavitySpec::hole(vec![0.0; p], axes)]
}

/// Two-Higgs-doublet model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThdmParams {
    pub lambda: [f64; 5],
    pub tan_beta: f64,
    pub cos_beta_alpha: f64,
}

/// Squared scalar masses in GeV^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThdmMasses {
    #[serde(rename = "m2_h")]
    pub light: f64,
    #[serde(rename = "m2_H")]
    pub heavy: f64,
    #[serde(rename = "m2_Hpm")]
    pub charged: f64,
    #[serde(rename = "m2_A")]
    pub pseudoscalar: f64,
}

impl ThdmMasses {
    pub fn all_positive(&self) -> bool {
        self.light > 0.0 && self.heavy > 0.0 && self.charged > 0.0 && self.pseudoscalar > 0.0
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.light, self.heavy, self.charged, self.pseudoscalar]
    }
}

/// Electroweak scale in GeV.
pub const THDM_VEV: f64 = 246.0;

/// Squared masses of the four scalars for the given parameters.
///
/// `beta = atan(tan_beta)` and `alpha = beta - acos(cos_beta_alpha)`.
pub fn thdm_masses(params: &ThdmParams, v: f64) -> Result<ThdmMasses> {
    let ThdmParams { lambda, tan_beta, cos_beta_alpha } = *params;
    if !(tan_beta > 0.0 && tan_beta.is_finite()) {
        return Err(Error::invalid(format!("tan(beta) = {tan_beta} must be positive and finite")));
    }
    if !(-1.0..=1.0).contains(&cos_beta_alpha) {
        return Err(Error::invalid(format!("cos(beta - alpha) = {cos_beta_alpha} outside [-1, 1]")));
    }
    let [l1, l2, l3, l4, l5] = lambda;
    let l345 = l3 + l4 + l5;
    let l45 = l4 + l5;
    let beta = tan_beta.atan();
    let diff = cos_beta_alpha.acos();
    let alpha = beta - diff;
    let sin_diff = diff.sin();
    let cos_diff = diff.cos();
    let sin_double = (2.0 * diff).sin();
    if sin_diff.abs() < 1e-9 || sin_double.abs() < 1e-9 {
        return Err(Error::SingularAngle { sin_diff, sin_double });
    }
    let (sb, cb) = beta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    let s2b = (2.0 * beta).sin();
    let s2a = (2.0 * alpha).sin();
    let c2a = (2.0 * alpha).cos();
    let v2 = v * v;

    let light = v2 / sin_diff
        * (-l1 * cb.powi(3) * sa + l2 * sb.powi(3) * ca + l345 / 2.0 * (beta + alpha).cos() * s2b);
    let heavy = v2 / cos_diff
        * (l1 * cb.powi(3) * ca + l2 * sb.powi(3) * sa + l345 / 2.0 * (beta + alpha).sin() * s2b);
    let charged =
        v2 / sin_double * (-s2a * (l1 * cb * cb - l2 * sb * sb) + l345 * s2b * c2a - l45 / 2.0 * sin_double);
    let pseudoscalar =
        v2 / sin_double * (s2a * (-l1 * cb * cb + l2 * sb * sb) + l345 * s2b * c2a - l5 * sin_double);
    Ok(ThdmMasses { light, heavy, charged, pseudoscalar })
}

/// Physical parameter ranges mapped from the standardized unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThdmRanges {
    pub lambda: (f64, f64),
    pub tan_beta: (f64, f64),
    pub cos_beta_alpha: (f64, f64),
}

impl Default for ThdmRanges {
    fn default() -> Self {
        Self { lambda: (-3.0, 3.0), tan_beta: (0.2, 10.0), cos_beta_alpha: (-0.5, 0.5) }
    }
}

impl ThdmRanges {
    fn map(range: (f64, f64), z: f64) -> f64 {
        let mid = 0.5 * (range.0 + range.1);
        let half = 0.5 * (range.1 - range.0);
        mid + half * z
    }

    /// Physical parameters for standardized coordinates
    /// `(l1, l2, l3, l4, l5, tan_beta, cos_beta_alpha)`.
    pub fn to_params(&self, z: &[f64; 7]) -> ThdmParams {
        let mut lambda = [0.0; 5];
        for (l, zi) in lambda.iter_mut().zip(z) {
            *l = Self::map(self.lambda, *zi);
        }
        ThdmParams {
            lambda,
            tan_beta: Self::map(self.tan_beta, z[5]),
            cos_beta_alpha: Self::map(self.cos_beta_alpha, z[6]),
        }
    }
}

/// Column names of the standardized THDM coordinates.
pub const THDM_COLUMNS: [&str; 7] = ["l1", "l2", "l3", "l4", "l5", "tan_beta", "cos_beta_alpha"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThdmPoint {
    pub standardized: [f64; 7],
    pub params: ThdmParams,
    pub masses: ThdmMasses,
    pub physical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThdmScan {
    pub points: Vec<ThdmPoint>,
    /// Standardized coordinates of the physical points only.
    pub physical: Dataset,
    /// Samples redrawn because of singular or invalid angles.
    pub rejected: usize,
    pub radius: f64,
}

impl ThdmScan {
    /// Standardized coordinates of every retained sample.
    pub fn all_points(&self) -> Result<Dataset> {
        let values: Vec<f64> = self.points.iter().flat_map(|p| p.standardized).collect();
        Dataset::new(values, 7, self.radius)
    }

    pub fn non_physical_fraction(&self) -> f64 {
        self.points.iter().filter(|p| !p.physical).count() as f64 / self.points.len() as f64
    }
}

/// Uniform scan of the standardized 7-ball of radius `radius`, flagging
/// points whose squared masses are not all positive.
pub fn thdm_scan(n: usize, radius: f64, seed: u64, ranges: &ThdmRanges) -> Result<ThdmScan> {
    if n == 0 {
        return Err(Error::invalid("scan size must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius {radius} must be positive")));
    }
    let mut rng = seed::rng(seed);
    let mut points = Vec::with_capacity(n);
    let mut rejected = 0;
    let mut z = [0.0; 7];
    while points.len() < n {
        ball_point(&mut rng, radius, &mut z);
        let params = ranges.to_params(&z);
        match thdm_masses(&params, THDM_VEV) {
            Ok(masses) => points.push(ThdmPoint {
                standardized: z,
                params,
                masses,
                physical: masses.all_positive(),
            }),
            Err(Error::SingularAngle { .. }) | Err(Error::InvalidArgument(_)) => {
                rejected += 1;
                if rejected > 1000 + 100 * n {
                    return Err(Error::invalid("parameter ranges produce almost only invalid angles"));
                }
            }
            Err(e) => return Err(e),
        }
    }
    let physical_values: Vec<f64> = points.iter().filter(|p| p.physical).flat_map(|p| p.standardized).collect();
    let physical = Dataset::new(physical_values, 7, radius)?;
    Ok(ThdmScan { points, physical, rejected, radius })
}
