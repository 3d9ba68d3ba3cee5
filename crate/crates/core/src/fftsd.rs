//! Hölder-continuous fast finite-time stable differentiator (HC-FFTSD).
//!
//! The differentiator error dynamics are
//!
//! ```text
//! ė₁ = −k₁ φ₁(e₁ + μ) + e₂ + δ₁
//! ė₂ = −k₂ φ₂(e₁ + μ) + δ₂
//! ```
//!
//! with `φ₂ = φ₁′ φ₁`. This module also carries the gain-design toolkit built
//! around the 2×2 Lyapunov equation `AᵀP + PA = −Q` and the settling-time
//! bounds used to certify convergence.

use crate::exec::{self, Execution};
use nalgebra::{Matrix2, Matrix3, SMatrix, SVector, Vector2, Vector3};
use thiserror::Error;

/// Floor applied to `‖e‖²` before taking fractional powers.
pub const POWER_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FftsdError {
    #[error("Hölder exponent must lie in (1, 2), got {0}")]
    InvalidExponent(f64),
    #[error("differentiator gains must be positive: k1={k1}, k2={k2}, k3={k3}")]
    NonPositiveGain { k1: f64, k2: f64, k3: f64 },
    #[error("gain matrix is not Hurwitz (trace {trace}, det {det})")]
    NotHurwitz { trace: f64, det: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("Jacobian is undefined at e1 = 0")]
    ZeroVector,
    #[error("argument outside domain: {0}")]
    Domain(String),
}

/// Exponent `p ∈ (1, 2)`; all derived exponents are computed on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderExponent(f64);

impl HolderExponent {
    pub fn new(p: f64) -> Result<Self, FftsdError> {
        if p > 1.0 && p < 2.0 {
            Ok(Self(p))
        } else {
            Err(FftsdError::InvalidExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(1 − p)/(3p − 2)`, the power applied to `eᵀe` in φ₁.
    pub fn phi_power(self) -> f64 {
        (1.0 - self.0) / (3.0 * self.0 - 2.0)
    }

    /// `p/(3p − 2)`.
    pub fn ratio(self) -> f64 {
        self.0 / (3.0 * self.0 - 2.0)
    }

    /// `(1 − p)/p`, the power applied to `eᵀe` in the sliding variables ψ.
    pub fn psi_power(self) -> f64 {
        (1.0 - self.0) / self.0
    }

    /// `1/p`, the exponent of the finite-time term in `V̇ ≤ −γ₁V − γ₂V^{1/p}`.
    pub fn alpha(self) -> f64 {
        1.0 / self.0
    }
}

/// `(xᵀx)^c` evaluated as `exp(c·ln(xᵀx))` with `xᵀx` floored at [`POWER_FLOOR`].
pub(crate) fn sq_power(sq: f64, c: f64) -> f64 {
    (c * sq.max(POWER_FLOOR).ln()).exp()
}

/// The pair (k₃, p) that shapes φ₁ and φ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderFeedback {
    pub k3: f64,
    pub p: HolderExponent,
}

impl HolderFeedback {
    pub fn new(k3: f64, p: HolderExponent) -> Self {
        Self { k3, p }
    }

    pub fn phi1<const N: usize>(&self, e: &SVector<f64, N>) -> SVector<f64, N> {
        let sq = e.norm_squared();
        if sq == 0.0 {
            return SVector::zeros();
        }
        e * (self.k3 + sq_power(sq, self.p.phi_power()))
    }

    pub fn phi2<const N: usize>(&self, e: &SVector<f64, N>) -> SVector<f64, N> {
        let sq = e.norm_squared();
        if sq == 0.0 {
            return SVector::zeros();
        }
        let p = self.p.value();
        let a = self.p.phi_power();
        let k3 = self.k3;
        let c1 = 2.0 * k3 * (2.0 * p - 1.0) / (3.0 * p - 2.0);
        let c2 = self.p.ratio();
        e * (k3 * k3 + c1 * sq_power(sq, a) + c2 * sq_power(sq, 2.0 * a))
    }

    /// `k₃I + (e₁ᵀe₁)^{(1−p)/(3p−2)}·[I − (2(p−1)/(3p−2))·e₁e₁ᵀ/(e₁ᵀe₁)]`.
    pub fn phi1_jacobian<const N: usize>(
        &self,
        e: &SVector<f64, N>,
    ) -> Result<SMatrix<f64, N, N>, FftsdError> {
        let sq = e.norm_squared();
        if sq < POWER_FLOOR {
            return Err(FftsdError::ZeroVector);
        }
        let p = self.p.value();
        let pw = sq_power(sq, self.p.phi_power());
        let c = 2.0 * (p - 1.0) / (3.0 * p - 2.0);
        let id = SMatrix::<f64, N, N>::identity();
        Ok(id * self.k3 + (id - (e * e.transpose()) * (c / sq)) * pw)
    }

    /// Closed-form `(λ_min, λ_max)` of [`Self::phi1_jacobian`].
    pub fn jacobian_eigen_bounds<const N: usize>(&self, e: &SVector<f64, N>) -> (f64, f64) {
        let pw = sq_power(e.norm_squared(), self.p.phi_power());
        (self.k3 + pw * self.p.ratio(), self.k3 + pw)
    }
}

/// Differentiator gains `(k₁, k₂, k₃, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentiatorGains {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub p: HolderExponent,
}

impl DifferentiatorGains {
    pub fn new(k1: f64, k2: f64, k3: f64, p: f64) -> Result<Self, FftsdError> {
        let p = HolderExponent::new(p)?;
        if !(k1 > 0.0 && k2 > 0.0 && k3 > 0.0) {
            return Err(FftsdError::NonPositiveGain { k1, k2, k3 });
        }
        let g = Self { k1, k2, k3, p };
        let a = g.gain_matrix();
        let (trace, det) = (a.trace(), a.determinant());
        // 2×2 Hurwitz iff trace < 0 and det > 0.
        if !(trace < 0.0 && det > 0.0) {
            return Err(FftsdError::NotHurwitz { trace, det });
        }
        Ok(g)
    }

    /// `[[−k₁, 1], [−k₂, 0]]`.
    pub fn gain_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(-self.k1, 1.0, -self.k2, 0.0)
    }

    pub fn feedback(&self) -> HolderFeedback {
        HolderFeedback::new(self.k3, self.p)
    }
}

pub fn phi1<const N: usize>(e1: &SVector<f64, N>, g: &DifferentiatorGains) -> SVector<f64, N> {
    g.feedback().phi1(e1)
}

pub fn phi2<const N: usize>(e1: &SVector<f64, N>, g: &DifferentiatorGains) -> SVector<f64, N> {
    g.feedback().phi2(e1)
}

pub fn phi1_jacobian<const N: usize>(
    e1: &SVector<f64, N>,
    g: &DifferentiatorGains,
) -> Result<SMatrix<f64, N, N>, FftsdError> {
    g.feedback().phi1_jacobian(e1)
}

/// Differentiator error state `(e₁, e₂) ∈ ℝⁿ × ℝⁿ`. Also used as its own
/// time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffState<const N: usize> {
    pub e1: SVector<f64, N>,
    pub e2: SVector<f64, N>,
}

impl<const N: usize> DiffState<N> {
    pub fn new(e1: SVector<f64, N>, e2: SVector<f64, N>) -> Self {
        Self { e1, e2 }
    }

    pub fn zeros() -> Self {
        Self::new(SVector::zeros(), SVector::zeros())
    }

    pub fn norm(&self) -> f64 {
        (self.e1.norm_squared() + self.e2.norm_squared()).sqrt()
    }

    /// `ζ = (φ₁(e₁), e₂)`.
    pub fn zeta(&self, g: &DifferentiatorGains) -> (SVector<f64, N>, SVector<f64, N>) {
        (phi1(&self.e1, g), self.e2)
    }
}

impl<const N: usize> std::ops::Add for DiffState<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.e1 + rhs.e1, self.e2 + rhs.e2)
    }
}

/// Perturbation and measurement-noise inputs to [`differentiator_rhs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffInputs<const N: usize> {
    pub delta1: SVector<f64, N>,
    pub delta2: SVector<f64, N>,
    pub noise: SVector<f64, N>,
}

impl<const N: usize> Default for DiffInputs<N> {
    fn default() -> Self {
        Self {
            delta1: SVector::zeros(),
            delta2: SVector::zeros(),
            noise: SVector::zeros(),
        }
    }
}

pub fn differentiator_rhs<const N: usize>(
    s: &DiffState<N>,
    g: &DifferentiatorGains,
    inputs: &DiffInputs<N>,
) -> DiffState<N> {
    let fb = g.feedback();
    let x = s.e1 + inputs.noise;
    DiffState::new(
        -fb.phi1(&x) * g.k1 + s.e2 + inputs.delta1,
        -fb.phi2(&x) * g.k2 + inputs.delta2,
    )
}

/// Whether `γ₁ ≥ λ_max(P)/λ_min(P)`, the gain condition under which the
/// perturbed and noisy differentiators are practically finite-time stable.
/// Equality is reported separately: it leaves no decay margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RobustnessCondition {
    Strict,
    Equality,
    Violated,
}

/// Solution of the 2×2 Lyapunov equation with the convergence constants it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovCertificate {
    pub a: Matrix2<f64>,
    pub p: Matrix2<f64>,
    pub q: Matrix2<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda_min_p: f64,
    pub lambda_max_p: f64,
    pub lambda_min_q: f64,
    pub k3: f64,
    pub exponent: HolderExponent,
}

impl LyapunovCertificate {
    /// `‖AᵀP + PA + Q‖_F`.
    pub fn residual(&self) -> f64 {
        (self.a.transpose() * self.p + self.p * self.a + self.q).norm()
    }

    /// `ζᵀ(P ⊗ I)ζ` for `ζ = (z₁, z₂)`.
    pub fn quadratic_form<const N: usize>(&self, z1: &SVector<f64, N>, z2: &SVector<f64, N>) -> f64 {
        let p = &self.p;
        p[(0, 0)] * z1.norm_squared() + 2.0 * p[(0, 1)] * z1.dot(z2) + p[(1, 1)] * z2.norm_squared()
    }

    /// `V = ζᵀPζ` of a differentiator state.
    pub fn lyapunov_value<const N: usize>(&self, s: &DiffState<N>, g: &DifferentiatorGains) -> f64 {
        let (z1, z2) = s.zeta(g);
        self.quadratic_form(&z1, &z2)
    }

    pub fn condition_ratio(&self) -> f64 {
        self.lambda_max_p / self.lambda_min_p
    }

    pub fn robustness_condition(&self) -> RobustnessCondition {
        let ratio = self.condition_ratio();
        let tol = 1e-12 * ratio.max(self.gamma1);
        if (self.gamma1 - ratio).abs() <= tol {
            RobustnessCondition::Equality
        } else if self.gamma1 > ratio {
            RobustnessCondition::Strict
        } else {
            RobustnessCondition::Violated
        }
    }

    /// Upper bound on the settling time from `V(0) = v0`.
    pub fn settling_time(&self, v0: f64) -> Result<f64, FftsdError> {
        settling_time_ffts(self.gamma1, self.gamma2, self.exponent.alpha(), v0)
    }
}

/// Eigenvalues `(λ_min, λ_max)` of a symmetric 2×2 matrix.
pub fn sym2_eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
    let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - rad, mean + rad)
}

fn is_spd(m: &Matrix2<f64>) -> bool {
    let sym = (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-12 * m.norm().max(1.0);
    sym && m.iter().all(|x| x.is_finite()) && m[(0, 0)] > 0.0 && m.determinant() > 0.0
}

/// Solves `AᵀP + PA = −Q` for symmetric `P` as a 3-unknown linear system.
pub fn solve_lyapunov(a: &Matrix2<f64>, q: &Matrix2<f64>) -> Result<Matrix2<f64>, FftsdError> {
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    // Unknowns (p11, p12, p22); rows are the (1,1), (1,2), (2,2) entries.
    #[rustfmt::skip]
    let lhs = Matrix3::new(
        2.0 * a11, 2.0 * a21,  0.0,
        a12,       a11 + a22,  a21,
        0.0,       2.0 * a12,  2.0 * a22,
    );
    let rhs = -Vector3::new(q[(0, 0)], 0.5 * (q[(0, 1)] + q[(1, 0)]), q[(1, 1)]);
    let sol = lhs.lu().solve(&rhs).ok_or(FftsdError::NotSpd)?;
    Ok(Matrix2::new(sol[0], sol[1], sol[1], sol[2]))
}

/// Solves the Lyapunov equation for the gain matrix of `g` and fills in
/// `γ₁ = k₃λ_min(Q)/λ_max(P)` and
/// `γ₂ = λ_min(Q)·λ_min(P)^{(p−1)/p}/λ_max(P) · p/(3p−2)`.
pub fn solve_lyapunov_2x2(
    g: &DifferentiatorGains,
    q: &Matrix2<f64>,
) -> Result<LyapunovCertificate, FftsdError> {
    if !is_spd(q) {
        return Err(FftsdError::NotSpd);
    }
    let a = g.gain_matrix();
    let p = solve_lyapunov(&a, q)?;
    if !is_spd(&p) {
        return Err(FftsdError::NotSpd);
    }
    let (lambda_min_p, lambda_max_p) = sym2_eigenvalues(&p);
    let (lambda_min_q, _) = sym2_eigenvalues(q);
    let pe = g.p.value();
    let gamma1 = g.k3 * lambda_min_q / lambda_max_p;
    let gamma2 = lambda_min_q * lambda_min_p.powf((pe - 1.0) / pe) / lambda_max_p * g.p.ratio();
    Ok(LyapunovCertificate {
        a,
        p,
        q: *q,
        gamma1,
        gamma2,
        lambda_min_p,
        lambda_max_p,
        lambda_min_q,
        k3: g.k3,
        exponent: g.p,
    })
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), FftsdError> {
    if cond {
        Ok(())
    } else {
        Err(FftsdError::Domain(msg()))
    }
}

/// `V₀^{1−α} / (λ(1−α))`.
pub fn settling_time_fts(lambda: f64, alpha: f64, v0: f64) -> Result<f64, FftsdError> {
    check(lambda > 0.0, || format!("lambda = {lambda} must be > 0"))?;
    check(alpha > 0.0 && alpha < 1.0, || format!("alpha = {alpha} must be in (0,1)"))?;
    check(v0 >= 0.0, || format!("V0 = {v0} must be >= 0"))?;
    Ok(v0.powf(1.0 - alpha) / (lambda * (1.0 - alpha)))
}

/// `ln((λ₁V₀^{1−α} + λ₂)/λ₂) / (λ₁(1−α))`.
pub fn settling_time_ffts(lambda1: f64, lambda2: f64, alpha: f64, v0: f64) -> Result<f64, FftsdError> {
    check(lambda1 > 0.0 && lambda2 > 0.0, || {
        format!("lambda1 = {lambda1}, lambda2 = {lambda2} must be > 0")
    })?;
    check(alpha > 0.0 && alpha < 1.0, || format!("alpha = {alpha} must be in (0,1)"))?;
    check(v0 >= 0.0, || format!("V0 = {v0} must be >= 0"))?;
    Ok((lambda1 * v0.powf(1.0 - alpha) / lambda2).ln_1p() / (lambda1 * (1.0 - alpha)))
}

/// Residual set and settling time for `V̇ ≤ −λ₁V − λ₂V^α + η`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PftsBound {
    pub theta0: f64,
    pub eta: f64,
    pub residual_set_level: f64,
    pub settling_time_bound: f64,
}

pub fn pfts_bound(
    lambda1: f64,
    lambda2: f64,
    alpha: f64,
    eta: f64,
    theta0: f64,
    v0: f64,
) -> Result<PftsBound, FftsdError> {
    check(lambda1 > 0.0 && lambda2 > 0.0, || {
        format!("lambda1 = {lambda1}, lambda2 = {lambda2} must be > 0")
    })?;
    check(alpha > 0.0 && alpha < 1.0, || format!("alpha = {alpha} must be in (0,1)"))?;
    check(eta >= 0.0, || format!("eta = {eta} must be >= 0"))?;
    check(theta0 > 0.0 && theta0 < 1.0, || format!("theta0 = {theta0} must be in (0,1)"))?;
    check(v0 >= 0.0, || format!("V0 = {v0} must be >= 0"))?;

    let slack = 1.0 - theta0;
    let residual_set_level =
        (eta / (slack * lambda1)).min((eta / (slack * lambda2)).powf(1.0 / alpha));
    let w = v0.powf(1.0 - alpha);
    let t1 = (theta0 * lambda1 * w / lambda2).ln_1p() / (theta0 * lambda1 * (1.0 - alpha));
    let t2 = (lambda1 * w / (theta0 * lambda2)).ln_1p() / (lambda1 * (1.0 - alpha));
    Ok(PftsBound {
        theta0,
        eta,
        residual_set_level,
        settling_time_bound: t1.max(t2),
    })
}

/// Upper bounds on `‖φ₁(e) − φ₁(e + μ)‖` and `‖φ₂(e) − φ₂(e + μ)‖` over `‖μ‖ ≤ μ̄`.
pub fn noise_gap_bounds(mu_bar: f64, g: &DifferentiatorGains) -> (f64, f64) {
    if mu_bar <= 0.0 {
        return (0.0, 0.0);
    }
    let p = g.p.value();
    let k3 = g.k3;
    let c = 2.0 * (p - 1.0) / (3.0 * p - 2.0);
    let b1 = k3 * mu_bar + 2f64.powf(c) * mu_bar.powf(1.0 - c);
    let b2 = k3 * k3 * mu_bar
        + (2.0 * k3 * (2.0 * p - 1.0) / (3.0 * p - 2.0)) * 2f64.powf(c) * mu_bar.powf(1.0 - c)
        + g.p.ratio() * 2f64.powf(2.0 * c) * mu_bar.powf(1.0 - 2.0 * c);
    (b1, b2)
}

/// `YᵀY` with `Y(x) = ‖x‖^{−2α}x − ‖x + μ‖^{−2α}(x + μ)`.
pub fn noise_gap_function<const N: usize>(
    x: &SVector<f64, N>,
    mu: &SVector<f64, N>,
    alpha: f64,
) -> Result<f64, FftsdError> {
    check(alpha > 0.0 && alpha < 0.5, || format!("alpha = {alpha} must be in (0, 1/2)"))?;
    let y = x + mu;
    let (nx, ny) = (x.norm_squared(), y.norm_squared());
    check(nx > 0.0, || "x must be nonzero".into())?;
    check(ny > 0.0, || "x must differ from -mu".into())?;
    let gap = x * nx.powf(-alpha) - y * ny.powf(-alpha);
    Ok(gap.norm_squared())
}

/// Rectangular grid over the `(c₁, c₂)` coordinates of `x = c₁μ + c₂ν`, where
/// `ν ⊥ μ` and `‖ν‖ = ‖μ‖`. Points sit at cell centres, so neither singular
/// point `x = 0` nor `x = −μ` is ever evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub step: f64,
    pub c1_range: (f64, f64),
    pub c2_range: (f64, f64),
}

impl GridSpec {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            c1_range: (-2.0, 1.0),
            c2_range: (-1.5, 1.5),
        }
    }

    fn axis(range: (f64, f64), step: f64) -> Vec<f64> {
        let n = ((range.1 - range.0) / step).round().max(1.0) as usize;
        (0..n).map(|i| range.0 + (i as f64 + 0.5) * step).collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::with_step(1e-2)
    }
}

/// A unit-length-scaled vector orthogonal to `mu` with `‖ν‖ = ‖μ‖`
/// (zero when `N = 1`).
fn orthogonal_companion<const N: usize>(mu: &SVector<f64, N>) -> SVector<f64, N> {
    if N < 2 {
        return SVector::zeros();
    }
    let u = mu.normalize();
    // Start from the basis vector least aligned with μ.
    let i = (0..N)
        .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .unwrap_or(0);
    let mut nu = SVector::<f64, N>::zeros();
    nu[i] = 1.0;
    nu -= u * u.dot(&nu);
    nu.normalize() * mu.norm()
}

/// Brute-force maximiser of [`noise_gap_function`] over the `(c₁, c₂)` grid.
pub fn noise_gap_argmax_oracle<const N: usize>(
    mu: &SVector<f64, N>,
    alpha: f64,
    grid: &GridSpec,
) -> Result<SVector<f64, N>, FftsdError> {
    noise_gap_argmax_oracle_with(mu, alpha, grid, Execution::default())
}

pub fn noise_gap_argmax_oracle_with<const N: usize>(
    mu: &SVector<f64, N>,
    alpha: f64,
    grid: &GridSpec,
    mode: Execution,
) -> Result<SVector<f64, N>, FftsdError> {
    check(mu.norm_squared() > 0.0, || "mu must be nonzero".into())?;
    check(alpha > 0.0 && alpha < 0.5, || format!("alpha = {alpha} must be in (0, 1/2)"))?;
    check(grid.step > 0.0, || "grid step must be positive".into())?;
    let nu = orthogonal_companion(mu);
    let c1s = GridSpec::axis(grid.c1_range, grid.step);
    let c2s = if N < 2 { vec![0.0] } else { GridSpec::axis(grid.c2_range, grid.step) };

    let rows = exec::map(mode, c1s, |c1| {
        let mut best = (f64::NEG_INFINITY, c1, 0.0);
        for &c2 in &c2s {
            let x = mu * c1 + nu * c2;
            if let Ok(v) = noise_gap_function(&x, mu, alpha) {
                if v > best.0 {
                    best = (v, c1, c2);
                }
            }
        }
        best
    });
    let (_, c1, c2) = rows
        .into_iter()
        .fold((f64::NEG_INFINITY, 0.0, 0.0), |acc, r| if r.0 > acc.0 { r } else { acc });
    Ok(mu * c1 + nu * c2)
}

/// Value of the noise-gap function at `x = c₁μ + c₂ν`.
pub fn noise_gap_in_plane<const N: usize>(
    mu: &SVector<f64, N>,
    alpha: f64,
    c1: f64,
    c2: f64,
) -> Result<f64, FftsdError> {
    let nu = orthogonal_companion(mu);
    noise_gap_function(&(mu * c1 + nu * c2), mu, alpha)
}

/// Eigenvalues of the gain matrix (real and imaginary parts).
pub fn gain_matrix_eigenvalues(g: &DifferentiatorGains) -> [(f64, f64); 2] {
    let a = g.gain_matrix();
    let tr = a.trace();
    let det = a.determinant();
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(0.5 * tr - r, 0.0), (0.5 * tr + r, 0.0)]
    } else {
        let i = (-disc).sqrt();
        [(0.5 * tr, -i), (0.5 * tr, i)]
    }
}

/// Helper for 1-D drivers that work on `Vector2`.
pub fn quadratic_form2(p: &Matrix2<f64>, z: &Vector2<f64>) -> f64 {
    (z.transpose() * p * z)[(0, 0)]
}
