use nalgebra::{Matrix3, MatrixXx2, Vector3};
use proptest::prelude::*;
use section_pursuit::geometry::TangentDirection;
use section_pursuit::{principal_angles, step_from, GeodesicPath, ProjectionFrame};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Principal angles from the eigenvalues of `M^T M` with `M = A^T B`,
/// solved in closed form for the 2 x 2 case.
fn oracle_angles(a: &ProjectionFrame, b: &ProjectionFrame) -> [f64; 2] {
    let (a, b) = (a.basis(), b.basis());
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = (0..a.nrows()).map(|k| a[(k, i)] * b[(k, j)]).sum();
        }
    }
    let g00 = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let g11 = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let g01 = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let tr = g00 + g11;
    let det = g00 * g11 - g01 * g01;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let hi = ((tr + disc) / 2.0).clamp(0.0, 1.0).sqrt();
    let lo = ((tr - disc) / 2.0).clamp(0.0, 1.0).sqrt();
    [lo.acos(), hi.acos()]
}

fn assert_orthonormal(f: &ProjectionFrame) {
    let g = f.basis().transpose() * f.basis();
    assert!((g[(0, 0)] - 1.0).abs() < 1e-10);
    assert!((g[(1, 1)] - 1.0).abs() < 1e-10);
    assert!(g[(0, 1)].abs() < 1e-10);
}

#[test]
fn angles_match_closed_form_oracle() {
    for seed in 0..50 {
        let a = ProjectionFrame::random(6, 2 * seed).unwrap();
        let b = ProjectionFrame::random(6, 2 * seed + 1).unwrap();
        let got = principal_angles(&a, &b).unwrap();
        let want = oracle_angles(&a, &b);
        assert!((got[0] - want[0]).abs() < 1e-7, "{got:?} vs {want:?}");
        assert!((got[1] - want[1]).abs() < 1e-7, "{got:?} vs {want:?}");
    }
}

#[test]
fn coordinate_planes_have_known_angles() {
    let a = ProjectionFrame::coordinate_plane(5, 0, 1).unwrap();
    let b = ProjectionFrame::coordinate_plane(5, 2, 3).unwrap();
    let ang = principal_angles(&a, &b).unwrap();
    assert!((ang[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((ang[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    let c = ProjectionFrame::coordinate_plane(5, 0, 4).unwrap();
    let ang = principal_angles(&a, &c).unwrap();
    assert!((ang[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!(ang[1].abs() < 1e-12);
}

#[test]
fn random_frames_are_uniform_on_octants() {
    let rotation = Matrix3::new(0.36, 0.48, -0.8, -0.8, 0.6, 0.0, 0.48, 0.64, 0.6);
    let mut plain = [0u32; 8];
    let mut rotated = [0u32; 8];
    let octant = |v: Vector3<f64>| (v[0] > 0.0) as usize | ((v[1] > 0.0) as usize) << 1 | ((v[2] > 0.0) as usize) << 2;
    for seed in 0..10_000 {
        let f = ProjectionFrame::random(3, seed).unwrap();
        let v = Vector3::new(f.basis()[(0, 0)], f.basis()[(1, 0)], f.basis()[(2, 0)]);
        plain[octant(v)] += 1;
        rotated[octant(rotation * v)] += 1;
    }
    let chi = ChiSquared::new(7.0).unwrap();
    for counts in [plain, rotated] {
        let stat: f64 = counts.iter().map(|&c| (c as f64 - 1250.0).powi(2) / 1250.0).sum();
        let p_value = 1.0 - chi.cdf(stat);
        assert!(p_value > 0.001, "chi-square {stat}, p = {p_value}, counts {counts:?}");
    }
}

#[test]
fn geodesic_angle_is_linear_in_t() {
    let a = ProjectionFrame::random(6, 10).unwrap();
    let b = ProjectionFrame::random(6, 11).unwrap();
    let path = GeodesicPath::between(&a, &b).unwrap();
    let total = path.principal_angles();
    for t in [0.25, 0.75] {
        let f = path.interpolate(t).unwrap();
        assert_orthonormal(&f);
        let ang = principal_angles(&a, &f).unwrap();
        assert!((ang[0] - t * total[0]).abs() < 1e-8);
        assert!((ang[1] - t * total[1]).abs() < 1e-8);
        assert!((ang.iter().sum::<f64>() - t * path.total_angle()).abs() < 1e-8);
    }
    let mid = path.interpolate(0.5).unwrap();
    let to_a = principal_angles(&a, &mid).unwrap();
    let to_b = principal_angles(&b, &mid).unwrap();
    assert!((to_a[0] - to_b[0]).abs() < 1e-8 && (to_a[1] - to_b[1]).abs() < 1e-8);
    let end = path.interpolate(1.0).unwrap();
    assert!(principal_angles(&end, &b).unwrap()[0] < 1e-8);
    assert!(path.interpolate(1.5).is_err());
    assert!(path.interpolate(-0.1).is_err());
}

#[test]
fn geodesic_is_continuous_and_monotone() {
    let a = ProjectionFrame::random(5, 3).unwrap();
    let b = ProjectionFrame::random(5, 4).unwrap();
    let path = GeodesicPath::between(&a, &b).unwrap();
    let mut last = 0.0;
    for i in 0..=100 {
        let t = i as f64 / 100.0;
        let f = path.interpolate(t).unwrap();
        let g = path.interpolate((t + 1e-4).min(1.0)).unwrap();
        assert!(principal_angles(&f, &g).unwrap()[0] < 1e-3);
        let d = principal_angles(&a, &f).unwrap()[0];
        assert!(d >= last - 1e-12);
        last = d;
    }
}

#[test]
fn step_reaches_requested_angle() {
    let origin = ProjectionFrame::random(6, 1).unwrap();
    for (seed, alpha) in [(3, 0.3), (4, 1.2), (5, -0.7), (6, std::f64::consts::FRAC_PI_2)] {
        let f = step_from(&origin, seed, alpha).unwrap();
        assert_orthonormal(&f);
        assert!((principal_angles(&origin, &f).unwrap()[0] - alpha.abs()).abs() < 1e-8);
        assert_eq!(f, step_from(&origin, seed, alpha).unwrap());
    }
    let dir = TangentDirection::new(&origin, 9);
    let plus = dir.at(0.4);
    let minus = dir.at(-0.4);
    let path = GeodesicPath::between(&minus, &plus).unwrap();
    let mid = path.interpolate(0.5).unwrap();
    assert!(principal_angles(&mid, &origin).unwrap()[0] < 1e-8);
}

#[test]
fn orthonormalize_examples() {
    let m = MatrixXx2::from_row_slice(&[2.0, 0.0, 0.0, 3.0, 0.0, 0.0]);
    let f = ProjectionFrame::orthonormalize(&m).unwrap();
    assert_eq!(f.to_column_major(), vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let m = MatrixXx2::from_row_slice(&[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
    let f = ProjectionFrame::orthonormalize(&m).unwrap();
    let g = f.basis().transpose() * f.basis();
    assert!((g - nalgebra::Matrix2::identity()).abs().max() < 1e-12);
    let s = 0.5f64.sqrt();
    assert!((f.basis()[(0, 0)] - s).abs() < 1e-15 && (f.basis()[(1, 0)] - s).abs() < 1e-15);
}

fn frame_pair() -> impl Strategy<Value = (usize, u64, u64)> {
    (3usize..9, any::<u64>(), any::<u64>())
}

proptest! {
    #[test]
    fn geodesic_is_symmetric((p, s1, s2) in frame_pair()) {
        let a = ProjectionFrame::random(p, s1).unwrap();
        let b = ProjectionFrame::random(p, s2).unwrap();
        let ab = GeodesicPath::between(&a, &b).unwrap().principal_angles();
        let ba = GeodesicPath::between(&b, &a).unwrap().principal_angles();
        prop_assert!((ab[0] - ba[0]).abs() < 1e-9 && (ab[1] - ba[1]).abs() < 1e-9);
        prop_assert!(ab[0] >= ab[1]);
        prop_assert!(ab[1] >= 0.0 && ab[0] <= std::f64::consts::FRAC_PI_2 + 1e-12);
    }

    #[test]
    fn every_emitted_frame_is_orthonormal((p, s1, s2) in frame_pair(), t in 0.0f64..=1.0, alpha in -1.5f64..1.5) {
        let a = ProjectionFrame::random(p, s1).unwrap();
        let b = ProjectionFrame::random(p, s2).unwrap();
        assert_orthonormal(&a);
        assert_orthonormal(&GeodesicPath::between(&a, &b).unwrap().interpolate(t).unwrap());
        assert_orthonormal(&step_from(&a, s2, alpha).unwrap());
        assert_orthonormal(&a.rotated_in_plane(alpha));
    }

    #[test]
    fn frame_json_round_trips((p, s1, _s2) in frame_pair()) {
        let a = ProjectionFrame::random(p, s1).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let back: ProjectionFrame = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, a);
    }
}
