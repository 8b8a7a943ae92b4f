//! Orthonormal 2-D frames in `p` dimensions and geodesics between the planes
//! they span.
//!
//! A [`ProjectionFrame`] is a `p x 2` matrix with orthonormal columns. Two
//! frames that span the same plane are the same projection for every purpose
//! except angular binning, so comparisons go through [`principal_angles`].

use nalgebra::{Matrix2, MatrixXx2, Vector2};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed;

/// Tolerance for the orthonormality invariant of a frame.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// A `p x 2` orthonormal basis of a projection plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionFrame {
    basis: MatrixXx2<f64>,
}

impl ProjectionFrame {
    /// Wrap an already orthonormal basis, checking the invariants.
    pub fn new(basis: MatrixXx2<f64>) -> Result<Self> {
        let p = basis.nrows();
        if p < 3 {
            return Err(Error::invalid(format!("frame dimension p = {p} must be at least 3")));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("frame basis contains non-finite values"));
        }
        let deviation = orthonormality_error(&basis);
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { basis })
    }

    /// Build a frame from column-major values (`2p` entries).
    pub fn from_column_major(p: usize, values: &[f64]) -> Result<Self> {
        if values.len() != 2 * p {
            return Err(Error::DimensionMismatch { expected: 2 * p, got: values.len() });
        }
        Self::new(MatrixXx2::from_column_slice(values))
    }

    /// Gram-Schmidt orthonormalization of an arbitrary `p x 2` matrix.
    ///
    /// The first column of the result is the first column of `m` normalized,
    /// and the span is preserved.
    pub fn orthonormalize(m: &MatrixXx2<f64>) -> Result<Self> {
        let p = m.nrows();
        if p < 3 {
            return Err(Error::invalid(format!("frame dimension p = {p} must be at least 3")));
        }
        let a = m.column(0).into_owned();
        let b = m.column(1).into_owned();
        let a_norm = a.norm();
        let b_norm = b.norm();
        if !(a_norm > 0.0 && b_norm > 0.0) || !a_norm.is_finite() || !b_norm.is_finite() {
            return Err(Error::DegenerateBasis);
        }
        let e1 = a / a_norm;
        let mut r = &b - &e1 * e1.dot(&b);
        // second pass keeps orthogonality at round-off level
        r -= &e1 * e1.dot(&r);
        let r_norm = r.norm();
        if r_norm <= 1e-12 * b_norm {
            return Err(Error::DegenerateBasis);
        }
        let e2 = r / r_norm;
        let mut basis = MatrixXx2::zeros(p);
        basis.set_column(0, &e1);
        basis.set_column(1, &e2);
        Self::new(basis)
    }

    /// Frame spanned by coordinate axes `i` and `j` (zero-based).
    pub fn coordinate_plane(p: usize, i: usize, j: usize) -> Result<Self> {
        if i >= p || j >= p || i == j {
            return Err(Error::invalid(format!("axes ({i}, {j}) invalid for p = {p}")));
        }
        let mut basis = MatrixXx2::zeros(p);
        basis[(i, 0)] = 1.0;
        basis[(j, 1)] = 1.0;
        Self::new(basis)
    }

    /// A frame drawn uniformly over 2-planes in `R^p`, deterministic per seed.
    pub fn random(p: usize, seed: u64) -> Result<Self> {
        if p < 3 {
            return Err(Error::invalid(format!("frame dimension p = {p} must be at least 3")));
        }
        let mut rng = seed::rng(seed);
        loop {
            let m = MatrixXx2::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
            match Self::orthonormalize(&m) {
                Ok(frame) => return Ok(frame),
                Err(Error::DegenerateBasis) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn p(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &MatrixXx2<f64> {
        &self.basis
    }

    /// Column-major basis values, `2p` entries.
    pub fn to_column_major(&self) -> Vec<f64> {
        self.basis.as_slice().to_vec()
    }

    /// Project a single point onto the plane.
    #[inline]
    pub fn project_point(&self, x: &[f64]) -> [f64; 2] {
        let p = self.p();
        let cols = self.basis.as_slice();
        let (c0, c1) = cols.split_at(p);
        let mut y0 = 0.0;
        let mut y1 = 0.0;
        for ((xi, a), b) in x.iter().zip(c0).zip(c1) {
            y0 += xi * a;
            y1 += xi * b;
        }
        [y0, y1]
    }

    /// Rotate the basis within its own plane by `angle` radians.
    pub fn rotated_in_plane(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        Self { basis: &self.basis * rot }
    }
}

fn orthonormality_error(basis: &MatrixXx2<f64>) -> f64 {
    let gram = basis.transpose() * basis;
    (gram - Matrix2::identity()).abs().max()
}

#[derive(Serialize, Deserialize)]
struct FrameWire {
    p: usize,
    basis: Vec<f64>,
}

impl Serialize for ProjectionFrame {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FrameWire { p: self.p(), basis: self.to_column_major() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProjectionFrame {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = FrameWire::deserialize(deserializer)?;
        ProjectionFrame::from_column_major(wire.p, &wire.basis).map_err(serde::de::Error::custom)
    }
}

/// Principal angles between the spans of two frames, sorted descending.
///
/// Cosines come from the singular values of `a^T b` and sines from the
/// component of `b` orthogonal to `a`, so small angles keep full precision.
pub fn principal_angles(a: &ProjectionFrame, b: &ProjectionFrame) -> Result<[f64; 2]> {
    check_same_dim(a, b)?;
    let cross = a.basis.transpose() * &b.basis;
    let mut cosines: Vec<f64> = cross.svd(false, false).singular_values.iter().copied().collect();
    let residual = &b.basis - &a.basis * &cross;
    let mut sines: Vec<f64> = residual.svd(false, false).singular_values.iter().copied().collect();
    cosines.sort_by(|x, y| y.total_cmp(x));
    sines.sort_by(|x, y| x.total_cmp(y));
    let mut angles = [
        sines[0].atan2(cosines[0].min(1.0)),
        sines[1].atan2(cosines[1].min(1.0)),
    ];
    angles.sort_by(|x, y| y.total_cmp(x));
    Ok(angles)
}

fn check_same_dim(a: &ProjectionFrame, b: &ProjectionFrame) -> Result<()> {
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch { expected: a.p(), got: b.p() });
    }
    Ok(())
}

/// Shortest rotation between two planes.
///
/// Interpolated frames start at exactly `start`'s basis; at `t = 1` the span
/// is `end`'s, with the basis turned to minimise in-plane spin relative to
/// `start` (orthogonal Procrustes alignment).
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    start: ProjectionFrame,
    end: ProjectionFrame,
    principal_angles: [f64; 2],
    // principal vectors of the start plane
    from: MatrixXx2<f64>,
    // unit directions orthogonal to the start plane, paired with `from`
    toward: MatrixXx2<f64>,
    // angles aligned with the columns of `from`/`toward`
    column_angles: Vector2<f64>,
    // maps the principal-vector basis back to the start basis
    unrotate: Matrix2<f64>,
}

impl GeodesicPath {
    pub fn between(a: &ProjectionFrame, b: &ProjectionFrame) -> Result<Self> {
        check_same_dim(a, b)?;
        let cross = a.basis.transpose() * &b.basis;
        let svd = cross.svd(true, true);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        let from = &a.basis * u;
        let to = &b.basis * v_t.transpose();
        let p = a.p();
        let mut toward = MatrixXx2::zeros(p);
        let mut column_angles = Vector2::zeros();
        for i in 0..2 {
            let cos = svd.singular_values[i];
            let mut r = to.column(i) - from.column(i) * cos;
            // remove any leakage into the start plane
            for j in 0..2 {
                let leak = from.column(j).dot(&r);
                r -= from.column(j) * leak;
            }
            let sin = r.norm();
            if sin > 1e-13 {
                toward.set_column(i, &(r / sin));
                column_angles[i] = sin.atan2(cos.min(1.0));
            }
        }
        let mut principal_angles = [column_angles[0], column_angles[1]];
        principal_angles.sort_by(|x, y| y.total_cmp(x));
        Ok(Self {
            start: a.clone(),
            end: b.clone(),
            principal_angles,
            from,
            toward,
            column_angles,
            unrotate: u.transpose(),
        })
    }

    pub fn start(&self) -> &ProjectionFrame {
        &self.start
    }

    pub fn end(&self) -> &ProjectionFrame {
        &self.end
    }

    /// Principal angles between start and end, descending.
    pub fn principal_angles(&self) -> [f64; 2] {
        self.principal_angles
    }

    /// Total geodesic angle (sum of principal angles).
    pub fn total_angle(&self) -> f64 {
        self.principal_angles.iter().sum()
    }

    /// Frame at fraction `t` of the path.
    pub fn interpolate(&self, t: f64) -> Result<ProjectionFrame> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("interpolation parameter t = {t} outside [0, 1]")));
        }
        Ok(self.frame_at(t))
    }

    fn frame_at(&self, t: f64) -> ProjectionFrame {
        let p = self.start.p();
        let mut moved = MatrixXx2::zeros(p);
        for i in 0..2 {
            let (s, c) = (t * self.column_angles[i]).sin_cos();
            moved.set_column(i, &(self.from.column(i) * c + self.toward.column(i) * s));
        }
        let basis = moved * self.unrotate;
        ProjectionFrame::new(basis.clone())
            .or_else(|_| ProjectionFrame::orthonormalize(&basis))
            .expect("geodesic frames stay orthonormal")
    }
}

/// Frame at geodesic distance `|alpha|` from `origin` along a pseudo-random
/// direction chosen by `direction_seed`.
///
/// The direction is an isotropic Gaussian tangent vector scaled so its larger
/// singular value is one; the largest principal angle to `origin` is then
/// exactly `|alpha|`. Negative `alpha` walks the same geodesic the other way.
pub fn step_from(origin: &ProjectionFrame, direction_seed: u64, alpha: f64) -> Result<ProjectionFrame> {
    if !(alpha > -std::f64::consts::FRAC_PI_2 && alpha <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::invalid(format!("step angle {alpha} outside (-pi/2, pi/2]")));
    }
    let direction = TangentDirection::new(origin, direction_seed);
    Ok(direction.at(alpha))
}

/// A unit-speed geodesic through a frame, parametrised by its largest
/// principal angle.
#[derive(Debug, Clone)]
pub struct TangentDirection {
    // origin basis expressed in the right singular vectors of the tangent
    rotated_origin: MatrixXx2<f64>,
    left: MatrixXx2<f64>,
    speeds: Vector2<f64>,
    v_t: Matrix2<f64>,
}

impl TangentDirection {
    pub fn new(origin: &ProjectionFrame, direction_seed: u64) -> Self {
        let p = origin.p();
        let mut rng = seed::rng(direction_seed);
        loop {
            let z = MatrixXx2::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
            let mut h = &z - &origin.basis * (origin.basis.transpose() * &z);
            h -= &origin.basis * (origin.basis.transpose() * &h);
            let svd = h.svd(true, true);
            let top = svd.singular_values.max();
            if !(top > 1e-12) {
                continue;
            }
            let u = svd.u.expect("requested U");
            let v_t_dyn = svd.v_t.expect("requested V^T");
            let v_t = Matrix2::from_fn(|i, j| v_t_dyn[(i, j)]);
            let speeds = Vector2::new(svd.singular_values[0] / top, svd.singular_values[1] / top);
            let mut left = MatrixXx2::zeros(p);
            for i in 0..2 {
                if speeds[i] > 1e-12 {
                    left.set_column(i, &u.column(i));
                }
            }
            return Self {
                rotated_origin: &origin.basis * v_t.transpose(),
                left,
                speeds,
                v_t,
            };
        }
    }

    /// Frame at signed angle `alpha` along the direction.
    pub fn at(&self, alpha: f64) -> ProjectionFrame {
        let p = self.rotated_origin.nrows();
        let mut moved = MatrixXx2::zeros(p);
        for i in 0..2 {
            let (s, c) = (alpha * self.speeds[i]).sin_cos();
            moved.set_column(i, &(self.rotated_origin.column(i) * c + self.left.column(i) * s));
        }
        let basis = moved * self.v_t;
        ProjectionFrame::new(basis.clone())
            .or_else(|_| ProjectionFrame::orthonormalize(&basis))
            .expect("tangent geodesic frames stay orthonormal")
    }
}
