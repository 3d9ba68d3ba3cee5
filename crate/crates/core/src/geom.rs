//! Small-dimension rigid-body geometry on SO(3) and SE(3).
//!
//! Rotations are stored as raw 3×3 matrices. The integrator steps them in the
//! ambient matrix space and projects back onto SO(3) with [`Rotation::renormalize`].

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use std::f64::consts::PI;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Below this angle exp/log switch to their series expansions.
pub const SMALL_ANGLE: f64 = 1e-6;
/// Skew-symmetry residual accepted by [`vee`].
pub const SKEW_TOLERANCE: f64 = 1e-9;
/// `‖x‖²` below this is treated as the zero vector by [`h_matrix`].
pub const H_ZERO_GUARD: f64 = 1e-24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("matrix is not skew-symmetric (residual {0:.3e})")]
    NotSkew(f64),
    #[error("vector is zero within the configured guard")]
    ZeroVector,
    #[error("Morse weights must satisfy K1 > K2 > K3 >= 1, got ({0}, {1}, {2})")]
    InvalidMorseWeights(f64, f64, f64),
    #[error("matrix is not a rotation (orthogonality residual {residual:.3e}, det {det})")]
    NotRotation { residual: f64, det: f64 },
}

/// Cross-product matrix: `hat(v) * w == v.cross(&w)`.
#[rustfmt::skip]
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(
         0.0, -v.z,  v.y,
         v.z,  0.0, -v.x,
        -v.y,  v.x,  0.0,
    )
}

/// Inverse of [`hat`]. Fails when `m` is not skew-symmetric within [`SKEW_TOLERANCE`].
pub fn vee(m: &Mat3) -> Result<Vec3, GeomError> {
    let residual = (m + m.transpose()).abs().max();
    if residual > SKEW_TOLERANCE {
        return Err(GeomError::NotSkew(residual));
    }
    Ok(vee_unchecked(m))
}

/// Reads the skew part of `m` without checking symmetry.
pub fn vee_unchecked(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// An element of SO(3) backed by its matrix.
///
/// Constructors that take arbitrary matrices either check the manifold
/// invariant ([`Rotation::from_matrix`]) or project onto it
/// ([`Rotation::project`]). [`Rotation::from_matrix_unchecked`] exists for
/// integrator stages, where the value is off-manifold by `O(h²)` until the
/// step completes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub const TOLERANCE: f64 = 1e-9;

    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn from_matrix(m: Mat3) -> Result<Self, GeomError> {
        let r = Self(m);
        let residual = r.orthogonality_residual();
        let det = m.determinant();
        if residual > Self::TOLERANCE || (det - 1.0).abs() > Self::TOLERANCE {
            return Err(GeomError::NotRotation { residual, det });
        }
        Ok(r)
    }

    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Self(m)
    }

    /// Closest rotation to `m` in the Frobenius norm (orthogonal polar factor).
    pub fn project(m: &Mat3) -> Self {
        let svd = m.svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Self::gram_schmidt(m),
        };
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            // Flip the axis of the smallest singular value to land in SO(3).
            let k = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(2);
            let mut u = u;
            u.column_mut(k).neg_mut();
            r = u * v_t;
        }
        Self(r)
    }

    fn gram_schmidt(m: &Mat3) -> Self {
        let c0 = m.column(0).normalize();
        let c1 = (m.column(1) - c0 * c0.dot(&m.column(1))).normalize();
        let c2 = c0.cross(&c1);
        Self(Mat3::from_columns(&[c0, c1, c2]))
    }

    /// Projects `self` back onto SO(3).
    pub fn renormalize(&self) -> Self {
        Self::project(&self.0)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat3 {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Group product `self * other`.
    pub fn compose(&self, other: &Rotation) -> Self {
        Self(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// `‖RᵀR − I‖_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat3::identity()).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn from_diagonal(d: [f64; 3]) -> Result<Self, GeomError> {
        Self::from_matrix(Mat3::from_diagonal(&Vec3::new(d[0], d[1], d[2])))
    }
}

/// Rigid-body configuration `(R, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub rotation: Rotation,
    pub position: Vec3,
}

/// Exponential map so(3) → SO(3) via the Rodrigues formula.
pub fn exp_so3(v: &Vec3) -> Rotation {
    let theta2 = v.norm_squared();
    let k = hat(v);
    let k2 = k * k;
    let theta = theta2.sqrt();
    let m = if theta < SMALL_ANGLE {
        Mat3::identity() + k + 0.5 * k2
    } else {
        Mat3::identity() + (theta.sin() / theta) * k + ((1.0 - theta.cos()) / theta2) * k2
    };
    Rotation(m)
}

/// Logarithm SO(3) → so(3) returning the rotation vector with norm in `[0, π]`.
pub fn log_so3(r: &Rotation) -> Vec3 {
    let m = r.matrix();
    let skew = vee_unchecked(m);
    let sin_theta = skew.norm();
    let cos_theta = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = sin_theta.atan2(cos_theta);

    if theta < SMALL_ANGLE {
        // First-order inverse of the series branch of exp_so3.
        return skew;
    }
    if cos_theta > -0.99 {
        return skew * (theta / sin_theta);
    }

    // Near θ = π the skew part vanishes; recover the axis from the
    // symmetric part (1 − cos θ)·aaᵀ using its largest diagonal entry.
    let sym = 0.5 * (m + m.transpose()) - Mat3::identity() * cos_theta;
    let scale = 1.0 - cos_theta;
    let i = (0..3)
        .max_by(|&a, &b| sym[(a, a)].total_cmp(&sym[(b, b)]))
        .unwrap_or(0);
    let mut axis: Vec3 = sym.column(i) / (sym[(i, i)] * scale).sqrt();
    axis.normalize_mut();
    if axis.dot(&skew) < 0.0 {
        axis = -axis;
    }
    axis * theta
}

/// Rotation angle of `aᵀb`, in `[0, π]`.
pub fn principal_angle(a: &Rotation, b: &Rotation) -> f64 {
    log_so3(&a.transpose().compose(b)).norm()
}

/// Diagonal weights `K = diag(K1, K2, K3)` of the Morse function `⟨K, I − R⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseWeights {
    k: [f64; 3],
}

impl MorseWeights {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self, GeomError> {
        let ok = k1.is_finite() && k1 > k2 && k2 > k3 && k3 >= 1.0;
        if !ok {
            return Err(GeomError::InvalidMorseWeights(k1, k2, k3));
        }
        Ok(Self { k: [k1, k2, k3] })
    }

    pub fn values(&self) -> [f64; 3] {
        self.k
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::from_diagonal(&Vec3::from(self.k))
    }
}

impl Default for MorseWeights {
    fn default() -> Self {
        Self { k: [3.0, 2.0, 1.0] }
    }
}

/// `Σᵢ Kᵢ (Rᵀeᵢ) × eᵢ`, the attitude error vector whose zeros are the
/// critical points of `⟨K, I − R⟩`.
pub fn s_k(r: &Rotation, k: &MorseWeights) -> Vec3 {
    s_k_matrix(r.matrix(), k)
}

/// [`s_k`] on a raw matrix (used on integrator stages).
pub fn s_k_matrix(r: &Mat3, k: &MorseWeights) -> Vec3 {
    let mut out = Vec3::zeros();
    for (i, ki) in k.k.iter().enumerate() {
        let e = Vec3::ith(i, 1.0);
        // Rᵀeᵢ is the i-th row of R.
        let row = Vec3::new(r[(i, 0)], r[(i, 1)], r[(i, 2)]);
        out += *ki * row.cross(&e);
    }
    out
}

/// `tr(Kᵀ(I − R))`.
pub fn morse_value(r: &Rotation, k: &MorseWeights) -> f64 {
    morse_value_matrix(r.matrix(), k)
}

pub fn morse_value_matrix(r: &Mat3, k: &MorseWeights) -> f64 {
    k.k.iter()
        .enumerate()
        .map(|(i, ki)| ki * (1.0 - r[(i, i)]))
        .sum()
}

/// Membership in the closed neighbourhood of the identity on which
/// `s_Kᵀs_K ≥ ⟨K, I − R⟩` holds.
pub fn in_set_s(r: &Rotation) -> bool {
    let m = r.matrix();
    (0..3).all(|i| m[(i, i)] >= 0.0)
        && (0..3).all(|i| (0..3).all(|j| i == j || m[(i, j)] * m[(j, i)] <= 0.0))
}

/// The four critical points of the Morse function.
pub fn critical_set() -> [Rotation; 4] {
    [
        Rotation::identity(),
        Rotation(Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0))),
        Rotation(Mat3::from_diagonal(&Vec3::new(-1.0, 1.0, -1.0))),
        Rotation(Mat3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0))),
    ]
}

/// `I − (2k / xᵀx)·xxᵀ`.
pub fn h_matrix(x: &Vec3, k: f64) -> Result<Mat3, GeomError> {
    let n2 = x.norm_squared();
    if !(n2 >= H_ZERO_GUARD) {
        return Err(GeomError::ZeroVector);
    }
    Ok(Mat3::identity() - (2.0 * k / n2) * x * x.transpose())
}

/// Eigenvalues of a symmetric 3×3 matrix in ascending order.
pub fn symmetric_eigenvalues(m: &Mat3) -> [f64; 3] {
    let mut ev: Vec<f64> = SymmetricEigen::new(*m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    [ev[0], ev[1], ev[2]]
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}
