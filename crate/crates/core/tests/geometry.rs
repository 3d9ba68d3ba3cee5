use approx::assert_relative_eq;
use ffts_eso::geom::*;
use ffts_eso::nalgebra::{Matrix3, UnitQuaternion, Vector3, Vector4};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn vec3() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-3.0f64..3.0).prop_map(Vec3::from)
}

fn rotation() -> impl Strategy<Value = Rotation> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("nonzero quaternion", |q| q.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|q| {
            let q = UnitQuaternion::from_quaternion(Vector4::from(q).into());
            Rotation::from_matrix_unchecked(*q.to_rotation_matrix().matrix())
        })
}

#[test]
fn hat_examples() {
    let m = hat(&Vec3::z());
    assert_eq!(m, Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
}

#[test]
fn vee_examples() {
    let v = Vec3::new(1.0, 2.0, 3.0);
    assert_eq!(vee(&hat(&v)).unwrap(), v);
    assert_eq!(vee(&Mat3::zeros()).unwrap(), Vec3::zeros());
    assert!(matches!(vee(&Mat3::identity()), Err(GeomError::NotSkew(_))));
}

#[test]
fn exp_examples() {
    assert_eq!(*exp_so3(&Vec3::zeros()).matrix(), Mat3::identity());
    let q = exp_so3(&Vec3::new(0.0, 0.0, FRAC_PI_2));
    assert_relative_eq!(q.apply(&Vec3::x()), Vec3::y(), epsilon = 1e-15);
}

#[test]
fn log_examples() {
    assert_eq!(log_so3(&Rotation::identity()), Vec3::zeros());
    let v = Vec3::new(0.1, 0.2, 0.3);
    assert_relative_eq!(log_so3(&exp_so3(&v)), v, epsilon = 1e-9);
    let w = log_so3(&Rotation::from_diagonal([1.0, -1.0, -1.0]).unwrap());
    assert_relative_eq!(w.norm(), PI, epsilon = 1e-12);
    assert_relative_eq!(w.x.abs(), PI, epsilon = 1e-12);
}

#[test]
fn log_near_half_turn() {
    for eps in [1e-3, 1e-6, 1e-9] {
        let v = Vec3::new(1.0, -2.0, 0.5).normalize() * (PI - eps);
        assert_relative_eq!(log_so3(&exp_so3(&v)), v, epsilon = 1e-7);
    }
}

#[test]
fn s_k_examples() {
    let k = MorseWeights::default();
    assert_eq!(s_k(&Rotation::identity(), &k), Vec3::zeros());
    for d in [[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
        assert_eq!(s_k(&Rotation::from_diagonal(d).unwrap(), &k), Vec3::zeros());
    }
}

#[test]
fn morse_examples() {
    let k = MorseWeights::default();
    assert_eq!(morse_value(&Rotation::identity(), &k), 0.0);
    assert_eq!(morse_value(&Rotation::from_diagonal([1.0, -1.0, -1.0]).unwrap(), &k), 6.0);
}

#[test]
fn morse_weights_ordering() {
    assert!(MorseWeights::new(3.0, 2.0, 1.0).is_ok());
    assert!(MorseWeights::new(2.0, 2.0, 1.0).is_err());
    assert!(MorseWeights::new(3.0, 2.0, 0.5).is_err());
}

#[test]
fn set_s_examples() {
    assert!(in_set_s(&Rotation::identity()));
    assert!(!in_set_s(&Rotation::from_diagonal([-1.0, 1.0, -1.0]).unwrap()));
    assert!(in_set_s(&exp_so3(&Vec3::new(0.3, 0.0, 0.0))));
}

#[test]
fn h_matrix_examples() {
    let h = h_matrix(&Vec3::x(), 0.5).unwrap();
    assert_relative_eq!(h, Mat3::from_diagonal(&Vec3::new(0.0, 1.0, 1.0)), epsilon = 1e-15);
    assert_eq!(h_matrix(&Vec3::new(0.3, -2.0, 1.0), 0.0).unwrap(), Mat3::identity());
    let p = 1.2;
    let ev = symmetric_eigenvalues(&h_matrix(&Vector3::new(1.0, 1.0, 0.0), (p - 1.0) / p).unwrap());
    assert_relative_eq!(ev[0], 1.0 - 1.0 / 3.0, epsilon = 1e-12);
    assert_relative_eq!(ev[1], 1.0, epsilon = 1e-12);
    assert_relative_eq!(ev[2], 1.0, epsilon = 1e-12);
    assert_eq!(h_matrix(&Vec3::new(1e-13, 0.0, 0.0), 0.5), Err(GeomError::ZeroVector));
}

#[test]
fn principal_angle_examples() {
    let r = exp_so3(&Vec3::new(0.4, 0.1, -0.3));
    assert_eq!(principal_angle(&r, &r), 0.0);
    assert_relative_eq!(
        principal_angle(&Rotation::identity(), &exp_so3(&Vec3::new(0.0, 0.0, 0.5))),
        0.5,
        epsilon = 1e-12
    );
}

#[test]
fn renormalize_pulls_back_to_so3() {
    let m = exp_so3(&Vec3::new(0.2, -0.7, 1.1)).into_matrix() + Mat3::from_fn(|i, j| 1e-6 * (i + 2 * j) as f64);
    let raw = Rotation::from_matrix_unchecked(m);
    let r = raw.renormalize();
    assert!(r.orthogonality_residual() < 1e-14);
    assert_relative_eq!(r.matrix().determinant(), 1.0, epsilon = 1e-14);
    assert!(Rotation::from_matrix(m).is_err());
}

proptest! {
    #[test]
    fn hat_is_cross(v in vec3(), w in vec3()) {
        let m = hat(&v);
        prop_assert!((m * w - v.cross(&w)).norm() <= 1e-12);
        prop_assert_eq!(m + m.transpose(), Mat3::zeros());
    }

    #[test]
    fn exp_inverse(v in vec3()) {
        let p = exp_so3(&v).compose(&exp_so3(&-v));
        prop_assert!((p.matrix() - Mat3::identity()).norm() <= 1e-12);
    }

    #[test]
    fn log_exp_round_trip(axis in vec3(), theta in 0.0f64..(PI - 1e-6)) {
        prop_assume!(axis.norm() > 1e-3);
        let v = axis.normalize() * theta;
        prop_assert!((log_so3(&exp_so3(&v)) - v).norm() <= 1e-9);
    }

    #[test]
    fn renormalize_is_idempotent_and_local(r in rotation(), noise in vec3()) {
        let m = r.matrix() + Mat3::from_diagonal(&(noise * 1e-7));
        let raw = Rotation::from_matrix_unchecked(m);
        let once = raw.renormalize();
        let twice = once.renormalize();
        prop_assert!((once.matrix() - twice.matrix()).norm() <= 1e-14);
        let moved = principal_angle(&r, &once);
        prop_assert!(moved <= 10.0 * raw.orthogonality_residual() + 1e-14);
    }

    #[test]
    fn triangle_inequality(a in rotation(), b in rotation(), c in rotation()) {
        let ac = principal_angle(&a, &c);
        prop_assert!(ac <= principal_angle(&a, &b) + principal_angle(&b, &c) + 1e-9);
        prop_assert!((0.0..=PI).contains(&ac));
    }

    #[test]
    fn morse_value_nonnegative(r in rotation()) {
        let k = MorseWeights::default();
        let v = morse_value(&r, &k);
        prop_assert!(v >= -1e-15);
    }

    #[test]
    fn s_k_bound_inside_s(v in prop::array::uniform3(-0.8f64..0.8)) {
        let r = exp_so3(&Vec3::from(v));
        prop_assume!(in_set_s(&r));
        let k = MorseWeights::default();
        let s = s_k(&r, &k);
        prop_assert!(s.norm_squared() >= morse_value(&r, &k) - 1e-12);
    }

    #[test]
    fn morse_rate_is_projected_s_k(r in rotation(), omega in vec3()) {
        let k = MorseWeights::default();
        let h = 1e-5;
        let f = |t: f64| morse_value(&r.compose(&exp_so3(&(omega * t))), &k);
        let fd = (f(h) - f(-h)) / (2.0 * h);
        prop_assert!((fd - omega.dot(&s_k(&r, &k))).abs() <= 1e-7 * (1.0 + omega.norm()));
    }
}
