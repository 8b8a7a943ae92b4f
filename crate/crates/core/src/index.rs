//! The section pursuit index family.
//!
//! For relative counts `s` (inside the slice) and `c` (outside), the
//! low-density index sums `w_k * ([c_k^(1/q) - s_k^(1/q)]_+)^q` over bins whose
//! contribution exceeds the noise cutoff `epsilon`; the up-density index swaps
//! `s` and `c`. With `q = 1` and unit weights this is the plain sum of positive
//! count differences above `epsilon`. Values are rescaled by the index range
//! at 10% overlap so different `q` share the range `[0, 1]`.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::binning::{bin_fraction, polar_bin_split, relative_reweighted, PolarGrid, RelativeCounts};
use crate::error::{Error, Result};
use crate::slicing::{expected_slice_count, SliceAssignment};

/// Which side of the comparison is expected to be depleted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Holes: low density inside the slice.
    Low,
    /// Grains: high density inside the slice.
    Up,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Direction::Low),
            "up" => Ok(Direction::Up),
            other => Err(Error::invalid(format!("unknown direction {other:?}, expected low or up"))),
        }
    }
}

/// Noise cutoff: an explicit value or estimated from the sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Auto,
    Value(f64),
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Epsilon::Auto => serializer.serialize_str("auto"),
            Epsilon::Value(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct EpsilonVisitor;

        impl Visitor<'_> for EpsilonVisitor {
            type Value = Epsilon;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\" or a non-negative number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Epsilon, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Epsilon, E> {
                Ok(Epsilon::Value(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Epsilon, E> {
                Ok(Epsilon::Value(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Epsilon, E> {
                Ok(Epsilon::Value(v as f64))
            }
        }

        deserializer.deserialize_any(EpsilonVisitor)
    }
}

impl std::str::FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Epsilon::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(Epsilon::Value(v)),
            _ => Err(Error::invalid(format!("epsilon must be \"auto\" or a non-negative number, got {s:?}"))),
        }
    }
}

/// Everything needed to score one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub direction: Direction,
    pub q: f64,
    pub epsilon: Epsilon,
    /// Per-bin weights `w_k`; `None` means all ones.
    #[serde(default)]
    pub bin_weights: Option<Vec<f64>>,
    /// Absolute slice height.
    pub h: f64,
    pub grid: PolarGrid,
    #[serde(default = "one")]
    pub rotation_average: usize,
}

fn one() -> usize {
    1
}

/// Slice height relative to the data radius used by [`IndexConfig::with_defaults`].
pub const DEFAULT_HEIGHT_RATIO: f64 = 0.25;
pub const DEFAULT_RADIAL_BINS: usize = 5;
pub const DEFAULT_ANGULAR_BINS: usize = 10;

impl IndexConfig {
    /// Low-density index, `q = 1`, 5 x 10 bins, `h = R/4`, automatic epsilon.
    pub fn with_defaults(radius: f64) -> Result<Self> {
        let grid = PolarGrid::new(DEFAULT_RADIAL_BINS, DEFAULT_ANGULAR_BINS, radius)?;
        Ok(Self {
            direction: Direction::Low,
            q: 1.0,
            epsilon: Epsilon::Auto,
            bin_weights: None,
            h: DEFAULT_HEIGHT_RATIO * radius,
            grid,
            rotation_average: 1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::invalid(format!("q = {} must be positive", self.q)));
        }
        if let Epsilon::Value(e) = self.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::invalid(format!("epsilon = {e} must be non-negative")));
            }
        }
        if let Some(w) = &self.bin_weights {
            if w.len() != self.grid.len() {
                return Err(Error::DimensionMismatch { expected: self.grid.len(), got: w.len() });
            }
            if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::invalid("bin weights must be non-negative"));
            }
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::invalid(format!("slice height h = {} must be positive", self.h)));
        }
        if self.rotation_average == 0 {
            return Err(Error::invalid("rotation_average must be at least 1"));
        }
        Ok(())
    }

    /// Resolve the cutoff for a sample of `n` points in `p` dimensions.
    pub fn resolve_epsilon(&self, n: usize, p: usize) -> Result<f64> {
        match self.epsilon {
            Epsilon::Value(e) => Ok(e),
            Epsilon::Auto => epsilon_auto(n, p, &self.grid, self.h, self.grid.radius()),
        }
    }

    /// Copy of the config with the cutoff fixed to an explicit value.
    pub fn resolved(&self, n: usize, p: usize) -> Result<Self> {
        let eps = self.resolve_epsilon(n, p)?;
        Ok(Self { epsilon: Epsilon::Value(eps), ..self.clone() })
    }

    /// Weight of bin `k` (1 unless configured).
    pub fn bin_weight(&self, k: usize) -> f64 {
        self.bin_weights.as_ref().map_or(1.0, |w| w[k])
    }
}

/// Score of one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexValue {
    /// Rescaled value clamped to `[0, 1]`.
    pub value: f64,
    pub raw: f64,
    pub epsilon_used: f64,
    pub inside_count: usize,
    pub outside_count: usize,
}

impl IndexValue {
    pub fn from_raw(raw: f64, q: f64, epsilon_used: f64, inside_count: usize, outside_count: usize) -> Self {
        Self {
            value: (raw * rescale_factor(q)).clamp(0.0, 1.0),
            raw,
            epsilon_used,
            inside_count,
            outside_count,
        }
    }

    /// Score assigned to slices that cannot be evaluated.
    pub fn zero(epsilon_used: f64, inside_count: usize, outside_count: usize) -> Self {
        Self { value: 0.0, raw: 0.0, epsilon_used, inside_count, outside_count }
    }
}

/// `a - b` when it exceeds `epsilon`, else zero.
pub fn threshold_diff(a: f64, b: f64, epsilon: f64) -> f64 {
    let d = a - b;
    if d > epsilon {
        d
    } else {
        0.0
    }
}

/// Raw index between inside counts `s` and outside counts `c`.
///
/// A bin contributes when its term `([x^(1/q) - y^(1/q)]_+)^q` exceeds
/// `epsilon`, so the cutoff lives on the scale of relative counts for every
/// `q`.
pub fn raw_index(
    s: &RelativeCounts,
    c: &RelativeCounts,
    direction: Direction,
    q: f64,
    epsilon: f64,
    weights: Option<&[f64]>,
) -> Result<f64> {
    if s.k_r != c.k_r || s.k_theta != c.k_theta {
        return Err(Error::GridMismatch {
            left: format!("{}x{}", s.k_r, s.k_theta),
            right: format!("{}x{}", c.k_r, c.k_theta),
        });
    }
    if let Some(w) = weights {
        if w.len() != s.len() {
            return Err(Error::DimensionMismatch { expected: s.len(), got: w.len() });
        }
    }
    let inv_q = 1.0 / q;
    let root_eps = if epsilon > 0.0 { epsilon.powf(inv_q) } else { 0.0 };
    let mut raw = 0.0;
    for k in 0..s.len() {
        let (larger, smaller) = match direction {
            Direction::Low => (c.values[k], s.values[k]),
            Direction::Up => (s.values[k], c.values[k]),
        };
        let d = threshold_diff(root(larger, inv_q), root(smaller, inv_q), root_eps);
        if d > 0.0 {
            let w = weights.map_or(1.0, |w| w[k]);
            raw += w * if q == 1.0 { d } else { d.powf(q) };
        }
    }
    Ok(raw)
}

#[inline]
fn root(v: f64, inv_q: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if inv_q == 1.0 {
        v
    } else {
        v.powf(inv_q)
    }
}

/// Index between already reweighted relative counts. The config's cutoff must
/// be explicit (see [`IndexConfig::resolved`]); the point counts of the
/// returned value are left at zero.
pub fn index_eval(s: &RelativeCounts, c: &RelativeCounts, config: &IndexConfig) -> Result<IndexValue> {
    let epsilon = match config.epsilon {
        Epsilon::Value(e) => e,
        Epsilon::Auto => {
            return Err(Error::invalid("automatic epsilon needs the sample size; resolve the config first"))
        }
    };
    if s.k_r != config.grid.k_r() || s.k_theta != config.grid.k_theta() {
        return Err(Error::GridMismatch {
            left: format!("{}x{}", s.k_r, s.k_theta),
            right: format!("{}x{}", config.grid.k_r(), config.grid.k_theta()),
        });
    }
    let raw = raw_index(s, c, config.direction, config.q, epsilon, config.bin_weights.as_deref())?;
    Ok(IndexValue::from_raw(raw, config.q, epsilon, 0, 0))
}

/// Closed-form up-index when the interior fills a fraction `gamma` of the
/// bins uniformly and the exterior fills all of them: `([1 - gamma^(1/q)]_+)^q`.
pub fn parametrized_index_up(q: f64, gamma: f64) -> f64 {
    let d = 1.0 - gamma.powf(1.0 / q);
    if d > 0.0 {
        d.powf(q)
    } else {
        0.0
    }
}

/// Closed-form low-index for the same configuration: `1 - gamma`.
pub fn parametrized_index_low(gamma: f64) -> f64 {
    1.0 - gamma
}

/// Factor mapping raw values to `[0, 1]`, normalised at `gamma = 0.1`.
pub fn rescale_factor(q: f64) -> f64 {
    1.0 / parametrized_index_up(q, 0.1)
}

/// Per-ring noise scale `delta_S^i / K` for the inside distribution of a
/// uniform ball sample, innermost ring first.
pub fn epsilon_per_ring(n: usize, p: usize, grid: &PolarGrid, h: f64, radius: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("epsilon estimate needs a non-empty sample"));
    }
    if !(h > 0.0 && h <= radius) {
        return Err(Error::invalid(format!("slice height {h} must lie in (0, {radius}]")));
    }
    let inside = expected_slice_count(n, p, h, radius);
    let per_sector = inside / grid.k_theta() as f64;
    let k = grid.len() as f64;
    let edges = grid.radial_edges();
    edges
        .windows(2)
        .map(|w| {
            let expected = per_sector * bin_fraction(w[0], w[1], 2, grid.radius())?;
            if expected < 1.0 {
                return Err(Error::SampleTooSmall { expected });
            }
            Ok(1.0 / expected.sqrt() / k)
        })
        .collect()
}

/// Automatic cutoff: the innermost ring's relative Poisson error divided by
/// the bin count.
///
/// The innermost ring has the smallest expected inside count, hence the
/// largest relative error.
pub fn epsilon_auto(n: usize, p: usize, grid: &PolarGrid, h: f64, radius: f64) -> Result<f64> {
    Ok(epsilon_per_ring(n, p, grid, h, radius)?[0])
}

/// Analytic expectation of the `q = 1` index for two pure-noise samples with
/// cutoff `epsilon = n_sigma * delta`: `exp(-n^2/4) sqrt(K / (gamma N))`.
pub fn noise_expectation_q1(n_sigma: f64, k: usize, n: usize, gamma: f64) -> f64 {
    (-n_sigma * n_sigma / 4.0).exp() * (k as f64 / (gamma * n as f64)).sqrt()
}

/// Index of a (centred) slice, averaged over `rotation_average` in-plane
/// rotations spread evenly across one angular bin.
///
/// The inside distribution is reweighted as a disk and the outside one with
/// the frame's dimension.
pub fn rotation_averaged_index(assignment: &SliceAssignment, config: &IndexConfig) -> Result<IndexValue> {
    config.validate()?;
    let n = assignment.len();
    let p = assignment.frame.p();
    let epsilon = config.resolve_epsilon(n, p)?;
    let m = config.rotation_average;
    let step = config.grid.angular_width() / m as f64;
    let mut raw_sum = 0.0;
    let mut counts = (0, 0);
    let mut rotated = Vec::new();
    for j in 0..m {
        let points = if j == 0 {
            &assignment.projected
        } else {
            let (sin, cos) = (j as f64 * step).sin_cos();
            rotated.clear();
            rotated.extend(assignment.projected.iter().map(|y| [cos * y[0] - sin * y[1], sin * y[0] + cos * y[1]]));
            &rotated
        };
        let (inside, outside) = polar_bin_split(points, &assignment.inside, &config.grid)?;
        if inside.total == 0 || outside.total == 0 {
            return Err(Error::DegenerateSlice { inside: inside.total as usize, outside: outside.total as usize });
        }
        counts = (inside.total as usize, outside.total as usize);
        let s = relative_reweighted(&inside, 2, &config.grid)?;
        let c = relative_reweighted(&outside, p, &config.grid)?;
        raw_sum += raw_index(&s, &c, config.direction, config.q, epsilon, config.bin_weights.as_deref())?;
    }
    Ok(IndexValue::from_raw(raw_sum / m as f64, config.q, epsilon, counts.0, counts.1))
}

/// Overlap fixture: outside uniform over `k` bins, inside uniform over the
/// first `k_prime`.
pub fn overlap_counts(k: usize, k_prime: usize) -> Result<(RelativeCounts, RelativeCounts)> {
    if k_prime == 0 || k_prime > k {
        return Err(Error::invalid(format!("need 0 < K' <= K, got K' = {k_prime}, K = {k}")));
    }
    let c = vec![1.0 / k as f64; k];
    let s = (0..k).map(|i| if i < k_prime { 1.0 / k_prime as f64 } else { 0.0 }).collect();
    Ok((RelativeCounts::from_values(s, 1, k, true)?, RelativeCounts::from_values(c, 1, k, true)?))
}
