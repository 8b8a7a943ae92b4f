//! Fixed polar binning of projected points and reweighting of bin counts by
//! the radial distribution of a uniformly filled `p`-ball.
//!
//! Bins are indexed ring-major: bin `k = ring * k_theta + sector`. Radial
//! edges are equidistant on `[0, R]`, angular edges equidistant on `[0, 2pi)`
//! with the origin of angles on the positive first axis.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial and angular bin layout shared by every plane of a pursuit run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    k_r: usize,
    k_theta: usize,
    #[serde(rename = "R")]
    radius: f64,
}

impl PolarGrid {
    pub fn new(k_r: usize, k_theta: usize, radius: f64) -> Result<Self> {
        if k_r == 0 || k_theta == 0 {
            return Err(Error::invalid(format!("grid needs at least one bin, got {k_r} x {k_theta}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("grid radius {radius} must be positive")));
        }
        Ok(Self { k_r, k_theta, radius })
    }

    pub fn k_r(&self) -> usize {
        self.k_r
    }

    pub fn k_theta(&self) -> usize {
        self.k_theta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Total bin count `K = k_r * k_theta`.
    pub fn len(&self) -> usize {
        self.k_r * self.k_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radial_edges(&self) -> Vec<f64> {
        (0..=self.k_r)
            .map(|i| if i == self.k_r { self.radius } else { self.radius * i as f64 / self.k_r as f64 })
            .collect()
    }

    pub fn angular_edges(&self) -> Vec<f64> {
        (0..=self.k_theta).map(|j| TAU * j as f64 / self.k_theta as f64).collect()
    }

    pub fn angular_width(&self) -> f64 {
        TAU / self.k_theta as f64
    }

    pub fn bin_index(&self, ring: usize, sector: usize) -> usize {
        ring * self.k_theta + sector
    }

    pub fn ring_of(&self, k: usize) -> usize {
        k / self.k_theta
    }

    /// Bin of a projected point, or `None` when it lies beyond `R`.
    pub fn locate(&self, y: [f64; 2]) -> Option<usize> {
        Locator::new(self).locate(y)
    }

    fn describe(&self) -> String {
        format!("{}x{} (R = {})", self.k_r, self.k_theta, self.radius)
    }
}

/// Precomputed bin edges for repeated lookups on one grid.
struct Locator {
    radius: f64,
    k_theta: usize,
    radial: Vec<f64>,
    angular: Vec<f64>,
}

impl Locator {
    fn new(grid: &PolarGrid) -> Self {
        let radial = (0..=grid.k_r).map(|i| grid.radius * i as f64 / grid.k_r as f64).collect();
        let angular = (0..=grid.k_theta).map(|j| TAU * j as f64 / grid.k_theta as f64).collect();
        Self { radius: grid.radius, k_theta: grid.k_theta, radial, angular }
    }

    #[inline]
    fn locate(&self, y: [f64; 2]) -> Option<usize> {
        let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if !(r <= self.radius) {
            return None;
        }
        let ring = edge_bucket(r, &self.radial).min(self.radial.len() - 2);
        let mut theta = y[1].atan2(y[0]);
        if theta < 0.0 {
            theta += TAU;
        }
        if theta >= TAU {
            theta = 0.0;
        }
        let sector = edge_bucket(theta, &self.angular).min(self.k_theta - 1);
        Some(ring * self.k_theta + sector)
    }
}

/// Index `i` with `edges[i] <= v < edges[i + 1]`, starting from the
/// arithmetic guess and correcting for round-off against the exact edges.
#[inline]
fn edge_bucket(v: f64, edges: &[f64]) -> usize {
    let count = edges.len() - 1;
    let mut i = ((v / edges[count]) * count as f64).floor().max(0.0) as usize;
    i = i.min(count);
    while i > 0 && v < edges[i] {
        i -= 1;
    }
    while i < count && v >= edges[i + 1] {
        i += 1;
    }
    i
}

/// Integer bin counts of the selected points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinnedCounts {
    pub counts: Vec<u64>,
    pub total: u64,
    pub overflow: u64,
    pub k_r: usize,
    pub k_theta: usize,
}

impl BinnedCounts {
    pub fn empty(grid: &PolarGrid) -> Self {
        Self { counts: vec![0; grid.len()], total: 0, overflow: 0, k_r: grid.k_r, k_theta: grid.k_theta }
    }

    /// Exact merge of two shards binned on the same grid.
    pub fn merge(&mut self, other: &BinnedCounts) -> Result<()> {
        if self.k_r != other.k_r || self.k_theta != other.k_theta {
            return Err(Error::GridMismatch {
                left: format!("{}x{}", self.k_r, self.k_theta),
                right: format!("{}x{}", other.k_r, other.k_theta),
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.overflow += other.overflow;
        Ok(())
    }
}

/// Normalised (and usually reweighted) bin values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeCounts {
    pub values: Vec<f64>,
    pub weighted: bool,
    pub k_r: usize,
    pub k_theta: usize,
}

impl RelativeCounts {
    /// Wrap raw values laid out on a `k_r x k_theta` grid.
    pub fn from_values(values: Vec<f64>, k_r: usize, k_theta: usize, weighted: bool) -> Result<Self> {
        if values.len() != k_r * k_theta {
            return Err(Error::DimensionMismatch { expected: k_r * k_theta, got: values.len() });
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("relative counts must be finite and non-negative"));
        }
        Ok(Self { values, weighted, k_r, k_theta })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Radial CDF of a uniform `p`-ball of radius `R` projected onto a plane:
/// `1 - (1 - (r/R)^2)^(p/2)`.
pub fn radial_cdf(r: f64, p: usize, radius: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::invalid(format!("radial CDF needs p >= 2, got {p}")));
    }
    if !(0.0..=radius).contains(&r) {
        return Err(Error::invalid(format!("radius {r} outside [0, {radius}]")));
    }
    let u = r / radius;
    Ok(1.0 - (1.0 - u * u).powf(p as f64 / 2.0))
}

/// Expected fraction of projected points with radius in `[r1, r2)`.
pub fn bin_fraction(r1: f64, r2: f64, p: usize, radius: f64) -> Result<f64> {
    if !(r1 < r2) {
        return Err(Error::invalid(format!("inverted radial bounds [{r1}, {r2}]")));
    }
    Ok(radial_cdf(r2, p, radius)? - radial_cdf(r1, p, radius)?)
}

/// Per-ring weights `1 / (K_r f_i(p, R))` that flatten a uniform ball.
pub fn bin_weights(p: usize, grid: &PolarGrid) -> Result<Vec<f64>> {
    let edges = grid.radial_edges();
    edges
        .windows(2)
        .map(|w| Ok(1.0 / (grid.k_r as f64 * bin_fraction(w[0], w[1], p, grid.radius)?)))
        .collect()
}

/// Count the selected projected points per polar bin. Points with radius
/// above `R` go to `overflow` instead of any bin.
pub fn polar_bin(projected: &[[f64; 2]], selector: &[bool], grid: &PolarGrid) -> Result<BinnedCounts> {
    if projected.len() != selector.len() {
        return Err(Error::DimensionMismatch { expected: projected.len(), got: selector.len() });
    }
    let locator = Locator::new(grid);
    let mut out = BinnedCounts::empty(grid);
    for (y, _) in projected.iter().zip(selector).filter(|(_, &s)| s) {
        match locator.locate(*y) {
            Some(k) => {
                out.counts[k] += 1;
                out.total += 1;
            }
            None => out.overflow += 1,
        }
    }
    Ok(out)
}

/// Bin every point once and split the counts by `selector`: selected points
/// go to the first result, the rest to the second.
pub fn polar_bin_split(
    projected: &[[f64; 2]],
    selector: &[bool],
    grid: &PolarGrid,
) -> Result<(BinnedCounts, BinnedCounts)> {
    if projected.len() != selector.len() {
        return Err(Error::DimensionMismatch { expected: projected.len(), got: selector.len() });
    }
    let locator = Locator::new(grid);
    let mut sel = BinnedCounts::empty(grid);
    let mut rest = BinnedCounts::empty(grid);
    for (y, &s) in projected.iter().zip(selector) {
        let out = if s { &mut sel } else { &mut rest };
        match locator.locate(*y) {
            Some(k) => {
                out.counts[k] += 1;
                out.total += 1;
            }
            None => out.overflow += 1,
        }
    }
    Ok((sel, rest))
}

/// Relative counts multiplied by the ring weights for dimension `p_effective`.
///
/// Use `p_effective = 2` for the slice interior (approximately a uniform disk)
/// and the data dimension for the exterior.
pub fn relative_reweighted(counts: &BinnedCounts, p_effective: usize, grid: &PolarGrid) -> Result<RelativeCounts> {
    if counts.k_r != grid.k_r || counts.k_theta != grid.k_theta {
        return Err(Error::GridMismatch {
            left: format!("{}x{}", counts.k_r, counts.k_theta),
            right: grid.describe(),
        });
    }
    if counts.total == 0 {
        return Err(Error::EmptyDistribution);
    }
    let weights = bin_weights(p_effective, grid)?;
    let total = counts.total as f64;
    let values = counts
        .counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / total * weights[grid.ring_of(k)])
        .collect();
    Ok(RelativeCounts { values, weighted: true, k_r: grid.k_r, k_theta: grid.k_theta })
}

/// Plain relative counts `S_k / sum S` without reweighting.
pub fn relative(counts: &BinnedCounts) -> Result<RelativeCounts> {
    if counts.total == 0 {
        return Err(Error::EmptyDistribution);
    }
    let total = counts.total as f64;
    Ok(RelativeCounts {
        values: counts.counts.iter().map(|&c| c as f64 / total).collect(),
        weighted: false,
        k_r: counts.k_r,
        k_theta: counts.k_theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_edges() {
        let g = PolarGrid::new(5, 10, 2.0).unwrap();
        let r = g.radial_edges();
        assert_eq!(r.len(), 6);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[5], 2.0);
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        let a = g.angular_edges();
        for w in a.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], TAU / 10.0, epsilon = 1e-12);
        }
        assert_eq!(g.len(), 50);
        assert!(PolarGrid::new(0, 3, 1.0).is_err());
        assert!(PolarGrid::new(3, 3, 0.0).is_err());
    }

    #[test]
    fn grid_json_shape() {
        let g = PolarGrid::new(5, 10, 1.5).unwrap();
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"k_r":5,"k_theta":10,"R":1.5}"#);
    }

    #[test]
    fn cdf_anchors() {
        assert_abs_diff_eq!(radial_cdf(1.0, 7, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        for u in [0.1, 0.4, 0.9] {
            assert_abs_diff_eq!(radial_cdf(u * 3.0, 2, 3.0).unwrap(), u * u, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(radial_cdf(0.5, 10, 1.0).unwrap(), 0.7626953125, epsilon = 1e-15);
        assert!(radial_cdf(1.1, 4, 1.0).is_err());
        assert!(radial_cdf(-0.1, 4, 1.0).is_err());
    }

    #[test]
    fn fractions() {
        assert_abs_diff_eq!(bin_fraction(0.0, 1.0, 6, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bin_fraction(0.0, 0.5, 4, 1.0).unwrap(), 0.4375, epsilon = 1e-15);
        let g = PolarGrid::new(5, 1, 1.0).unwrap();
        let e = g.radial_edges();
        for (i, w) in e.windows(2).enumerate() {
            let f = bin_fraction(w[0], w[1], 2, 1.0).unwrap();
            assert_abs_diff_eq!(f, (2 * i + 1) as f64 / 25.0, epsilon = 1e-14);
        }
        assert!(bin_fraction(0.5, 0.2, 3, 1.0).is_err());
    }

    #[test]
    fn weights() {
        let g1 = PolarGrid::new(1, 4, 1.0).unwrap();
        assert_eq!(bin_weights(2, &g1).unwrap(), vec![1.0]);
        let g5 = PolarGrid::new(5, 4, 1.0).unwrap();
        let w = bin_weights(2, &g5).unwrap();
        for (got, want) in w.iter().zip([5.0, 5.0 / 3.0, 1.0, 5.0 / 7.0, 5.0 / 9.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn fractions_sum_to_one() {
        for p in 2..12 {
            let g = PolarGrid::new(7, 1, 2.5).unwrap();
            let sum: f64 = g.radial_edges().windows(2).map(|w| bin_fraction(w[0], w[1], p, 2.5).unwrap()).sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn origin_and_boundary_conventions() {
        let g = PolarGrid::new(5, 8, 1.0).unwrap();
        assert_eq!(g.locate([0.0, 0.0]), Some(0));
        assert_eq!(g.locate([1.0, 0.0]), Some(g.bin_index(4, 0)));
        assert_eq!(g.locate([0.0, -1.0]), Some(g.bin_index(4, 6)));
        assert_eq!(g.locate([1.0 + 1e-12, 0.0]), None);
        // a radius exactly on an interior edge opens the next ring
        assert_eq!(g.locate([0.4, 0.0]), Some(g.bin_index(2, 0)));
        // tiny negative angle wraps to the last sector
        assert_eq!(g.locate([0.5, -0.01]), Some(g.bin_index(2, 7)));
        assert_eq!(g.locate([0.5, -1e-300]), Some(g.bin_index(2, 0)));
    }

    #[test]
    fn overflow_is_counted() {
        let g = PolarGrid::new(2, 2, 1.0).unwrap();
        let pts = [[0.1, 0.1], [2.0, 0.0], [-0.7, 0.1], [0.0, 0.3]];
        let c = polar_bin(&pts, &[true, true, true, false], &g).unwrap();
        assert_eq!(c.overflow, 1);
        assert_eq!(c.total, 2);
        assert_eq!(c.counts.iter().sum::<u64>() + c.overflow, 3);
    }

    #[test]
    fn reweighting_errors_and_trivial_case() {
        let g = PolarGrid::new(1, 1, 1.0).unwrap();
        let empty = BinnedCounts::empty(&g);
        assert_eq!(relative_reweighted(&empty, 2, &g), Err(Error::EmptyDistribution));
        let c = polar_bin(&[[0.3, 0.2], [0.0, 0.5]], &[true, true], &g).unwrap();
        let r = relative_reweighted(&c, 2, &g).unwrap();
        assert_eq!(r.values, vec![1.0]);
        assert!(r.weighted);
        let other = PolarGrid::new(2, 1, 1.0).unwrap();
        assert!(matches!(relative_reweighted(&c, 2, &other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn zero_bins_stay_zero() {
        let g = PolarGrid::new(3, 4, 1.0).unwrap();
        let pts = [[0.1, 0.0], [0.5, 0.5], [-0.2, 0.1]];
        let c = polar_bin(&pts, &[true; 3], &g).unwrap();
        for p in [2, 4, 9] {
            let r = relative_reweighted(&c, p, &g).unwrap();
            for (v, n) in r.values.iter().zip(&c.counts) {
                assert_eq!(*n == 0, *v == 0.0);
            }
        }
    }

    #[test]
    fn disk_reweighting_is_area_normalisation() {
        // for p = 2 each value is count / total divided by K_r times the ring's area share
        let g = PolarGrid::new(4, 3, 2.0).unwrap();
        let pts: Vec<[f64; 2]> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                let r = 2.0 * ((i * 7919) % 200) as f64 / 200.0;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let c = polar_bin(&pts, &vec![true; pts.len()], &g).unwrap();
        let r = relative_reweighted(&c, 2, &g).unwrap();
        let edges = g.radial_edges();
        for k in 0..g.len() {
            let ring = g.ring_of(k);
            let area_share = (edges[ring + 1].powi(2) - edges[ring].powi(2)) / 4.0;
            let expect = c.counts[k] as f64 / c.total as f64 / (4.0 * area_share);
            assert_abs_diff_eq!(r.values[k], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn merge_is_exact() {
        let g = PolarGrid::new(2, 3, 1.0).unwrap();
        let pts = [[0.1, 0.2], [0.9, -0.1], [-0.3, -0.3], [5.0, 0.0]];
        let all = polar_bin(&pts, &[true; 4], &g).unwrap();
        let mut a = polar_bin(&pts[..2], &[true; 2], &g).unwrap();
        let b = polar_bin(&pts[2..], &[true; 2], &g).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a, all);
    }
}
