//! Projection of data onto a frame and the inside/outside split of a slice
//! through the origin.

use crate::error::{Error, Result};
use crate::geometry::ProjectionFrame;

/// Relative slack allowed when checking that points lie inside the R-ball.
const RADIUS_SLACK: f64 = 1e-9;

/// `n` points in `p` dimensions, all within the hypersphere of radius `radius_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    p: usize,
    radius_bound: f64,
    labels: Option<Vec<String>>,
}

impl Dataset {
    /// Build a dataset from row-major values.
    pub fn new(points: Vec<f64>, p: usize, radius_bound: f64) -> Result<Self> {
        if p < 3 {
            return Err(Error::invalid(format!("dataset dimension p = {p} must be at least 3")));
        }
        if points.is_empty() || points.len() % p != 0 {
            return Err(Error::invalid(format!(
                "{} values cannot form a non-empty {p}-column dataset",
                points.len()
            )));
        }
        if !(radius_bound > 0.0 && radius_bound.is_finite()) {
            return Err(Error::invalid(format!("radius bound {radius_bound} must be positive")));
        }
        let n = points.len() / p;
        let limit = radius_bound * (1.0 + RADIUS_SLACK);
        for (i, row) in points.chunks_exact(p).enumerate() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm > limit {
                return Err(Error::invalid(format!(
                    "point {i} has norm {norm} outside radius bound {radius_bound}"
                )));
            }
        }
        Ok(Self { points, n, p, radius_bound, labels: None })
    }

    pub fn from_rows(rows: &[Vec<f64>], radius_bound: f64) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::invalid("rows have differing lengths"));
        }
        Self::new(rows.concat(), p, radius_bound)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn radius_bound(&self) -> f64 {
        self.radius_bound
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.p)
    }

    /// Row-major point values.
    pub fn values(&self) -> &[f64] {
        &self.points
    }
}

/// Per-point result of slicing a dataset with a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceAssignment {
    pub projected: Vec<[f64; 2]>,
    pub distances: Vec<f64>,
    pub inside: Vec<bool>,
    pub h: f64,
    pub frame: ProjectionFrame,
}

impl SliceAssignment {
    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn outside_count(&self) -> usize {
        self.inside.len() - self.inside_count()
    }

    pub fn len(&self) -> usize {
        self.inside.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inside.is_empty()
    }
}

fn check_dims(data: &Dataset, frame: &ProjectionFrame) -> Result<()> {
    if data.p() != frame.p() {
        return Err(Error::DimensionMismatch { expected: data.p(), got: frame.p() });
    }
    Ok(())
}

/// Projected coordinates `Y = X A`, one row per point.
pub fn project(data: &Dataset, frame: &ProjectionFrame) -> Result<Vec<[f64; 2]>> {
    check_dims(data, frame)?;
    Ok(data.rows().map(|x| frame.project_point(x)).collect())
}

/// Split points into inside (`distance < h`) and outside of the slice through
/// the origin spanned by `frame`.
pub fn slice(data: &Dataset, frame: &ProjectionFrame, h: f64) -> Result<SliceAssignment> {
    check_dims(data, frame)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("slice height h = {h} must be positive")));
    }
    let n = data.n();
    let mut projected = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    let mut inside = Vec::with_capacity(n);
    for x in data.rows() {
        let y = frame.project_point(x);
        let norm2 = x.iter().map(|v| v * v).sum::<f64>();
        let d = (norm2 - y[0] * y[0] - y[1] * y[1]).max(0.0).sqrt();
        projected.push(y);
        distances.push(d);
        inside.push(d < h);
    }
    Ok(SliceAssignment { projected, distances, inside, h, frame: frame.clone() })
}

/// Expected number of points inside a central slice of a uniform `p`-ball.
///
/// With `x = h / R`: `N/2 * x^(p-2) * (p - (p-2) x^2)`.
pub fn expected_slice_count(n: usize, p: usize, h: f64, radius: f64) -> f64 {
    let x = h / radius;
    let pf = p as f64;
    n as f64 / 2.0 * x.powi(p as i32 - 2) * (pf - (pf - 2.0) * x * x)
}

/// Shift projected coordinates so their mean is the origin.
pub fn center_projection(assignment: &SliceAssignment) -> SliceAssignment {
    assignment.clone().centered()
}

impl SliceAssignment {
    /// In-place form of [`center_projection`].
    pub fn centered(mut self) -> Self {
        if self.projected.is_empty() {
            return self;
        }
        let n = self.projected.len() as f64;
        let (sx, sy) = self.projected.iter().fold((0.0, 0.0), |(sx, sy), y| (sx + y[0], sy + y[1]));
        let (mx, my) = (sx / n, sy / n);
        for y in &mut self.projected {
            y[0] -= mx;
            y[1] -= my;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_data() -> Dataset {
        Dataset::from_rows(
            &[
                vec![0.1, 0.2, 0.3, 0.4],
                vec![-0.5, 0.0, 0.5, 0.1],
                vec![0.3, -0.3, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, -0.9],
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn dataset_rejects_points_outside_ball() {
        assert!(Dataset::new(vec![1.0, 1.0, 0.0], 3, 1.0).is_err());
        assert!(Dataset::new(vec![1.0, 0.0], 2, 1.0).is_err());
        assert!(Dataset::new(vec![], 3, 1.0).is_err());
        assert!(Dataset::new(vec![1.0, 0.0, 0.0], 3, 1.0).is_ok());
    }

    #[test]
    fn axis_projection_picks_columns() {
        let data = small_data();
        let frame = ProjectionFrame::coordinate_plane(4, 0, 1).unwrap();
        let y = project(&data, &frame).unwrap();
        for (i, row) in data.rows().enumerate() {
            assert_eq!(y[i], [row[0], row[1]]);
        }
    }

    #[test]
    fn projection_contracts() {
        let data = small_data();
        let frame = ProjectionFrame::random(4, 3).unwrap();
        let y = project(&data, &frame).unwrap();
        for (yi, x) in y.iter().zip(data.rows()) {
            let ny = (yi[0] * yi[0] + yi[1] * yi[1]).sqrt();
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(ny <= nx + 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let data = small_data();
        let frame = ProjectionFrame::random(5, 3).unwrap();
        assert!(matches!(project(&data, &frame), Err(Error::DimensionMismatch { .. })));
        assert!(slice(&data, &frame, 0.3).is_err());
    }

    #[test]
    fn whole_ball_slice_and_in_plane_point() {
        let data = small_data();
        let frame = ProjectionFrame::coordinate_plane(4, 0, 1).unwrap();
        let all = slice(&data, &frame, 1.0).unwrap();
        assert!(all.inside.iter().all(|&b| b));
        // the third point lies in the (1, 2) plane
        let thin = slice(&data, &frame, 1e-6).unwrap();
        assert_eq!(thin.distances[2], 0.0);
        assert!(thin.inside[2]);
        assert_eq!(thin.inside_count(), 1);
        assert!(slice(&data, &frame, 0.0).is_err());
        assert!(slice(&data, &frame, -1.0).is_err());
    }

    #[test]
    fn slice_respects_pythagoras() {
        let data = small_data();
        let frame = ProjectionFrame::random(4, 17).unwrap();
        let s = slice(&data, &frame, 0.3).unwrap();
        for i in 0..data.n() {
            let x2: f64 = data.row(i).iter().map(|v| v * v).sum();
            let y = s.projected[i];
            assert_abs_diff_eq!(s.distances[i].powi(2) + y[0] * y[0] + y[1] * y[1], x2, epsilon = 1e-8);
            assert_eq!(s.inside[i], s.distances[i] < 0.3);
        }
    }

    #[test]
    fn expected_count_edge_values() {
        assert_abs_diff_eq!(expected_slice_count(1000, 5, 2.0, 2.0), 1000.0, epsilon = 1e-9);
        for x in [0.1, 0.5, 0.9] {
            assert_abs_diff_eq!(expected_slice_count(777, 2, x, 1.0), 777.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(expected_slice_count(10_000, 4, 0.25, 1.0), 1210.9375, epsilon = 1e-9);
    }

    #[test]
    fn centering() {
        let data = small_data();
        let frame = ProjectionFrame::coordinate_plane(4, 0, 1).unwrap();
        let s = slice(&data, &frame, 0.5).unwrap();
        let c = center_projection(&s);
        let c2 = center_projection(&c);
        for (a, b) in c.projected.iter().zip(&c2.projected) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-12);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-12);
        }
        let mut shifted = c.clone();
        for y in &mut shifted.projected {
            y[0] += 3.0;
            y[1] -= 1.0;
        }
        let back = center_projection(&shifted);
        for (a, b) in back.projected.iter().zip(&c.projected) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-12);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-12);
        }
        assert_eq!(c.distances, s.distances);
        assert_eq!(c.inside, s.inside);
    }
}
