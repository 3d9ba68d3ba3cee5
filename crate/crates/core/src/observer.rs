//! Translational and rotational fast finite-time stable extended state observers.
//!
//! Both observers share the structure of the Hölder-continuous differentiator:
//! a sliding variable ψ built from the configuration and velocity errors is
//! driven by φ₁(ψ), while the disturbance estimate integrates φ₂(ψ).

use crate::fftsd::{
    self, sq_power, DifferentiatorGains, FftsdError, HolderExponent, HolderFeedback,
    LyapunovCertificate, RobustnessCondition,
};
use crate::geom::{self, hat, morse_value, s_k, GeomError, Mat3, MorseWeights, Rotation, Vec3};
use nalgebra::Matrix2;
use std::fmt;
use std::ops::Add;
use thiserror::Error;

/// Below this error norm the singular H-term is replaced by the velocity error alone.
pub const H_TERM_GUARD: f64 = 1e-9;

const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub enum GainViolation {
    KappaTooSmall { kappa: f64 },
    MuOutsideWindow { mu: f64, upper: f64 },
    GammaNotPositive { name: &'static str, value: f64 },
}

impl fmt::Display for GainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KappaTooSmall { kappa } => write!(f, "kappa = {kappa} must exceed 1/2"),
            Self::MuOutsideWindow { mu, upper } => write!(f, "mu = {mu} must lie in (0, {upper})"),
            Self::GammaNotPositive { name, value } => write!(f, "{name} = {value} must be positive"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObserverError {
    #[error(transparent)]
    Differentiator(#[from] FftsdError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("invalid observer gains: {}", list(.0))]
    InvalidGains(Vec<GainViolation>),
}

fn list(v: &[GainViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// `x + (xᵀx)^{(1−p)/p}·x`, continuously extended by 0 at the origin.
fn sliding_term(x: &Vec3, p: HolderExponent) -> Vec3 {
    let sq = x.norm_squared();
    if sq == 0.0 {
        return Vec3::zeros();
    }
    x + x * sq_power(sq, p.psi_power())
}

/// Time derivative of [`sliding_term`] along `ẋ = xdot`:
/// `(xᵀx)^{(1−p)/p}·H(x, (p−1)/p)·ẋ + ẋ`, guarded near the origin.
fn sliding_rate(x: &Vec3, xdot: &Vec3, p: HolderExponent) -> Vec3 {
    if x.norm() < H_TERM_GUARD {
        return *xdot;
    }
    let pv = p.value();
    let h = geom::h_matrix(x, (pv - 1.0) / pv).unwrap_or_else(|_| Mat3::identity());
    h * xdot * sq_power(x.norm_squared(), p.psi_power()) + xdot
}

/// Constants derived from a validated gain set.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GainReport {
    pub gamma1: f64,
    pub gamma2: f64,
    #[serde(rename = "Gamma1")]
    pub big_gamma1: f64,
    #[serde(rename = "Gamma2")]
    pub big_gamma2: f64,
    pub mu: f64,
    pub mu_upper: f64,
    pub lambda_min_p: f64,
    pub lambda_max_p: f64,
    pub lyapunov_residual: f64,
    pub robustness: RobustnessCondition,
}

fn certify(k1: f64, k2: f64, k3: f64, p: f64) -> Result<(DifferentiatorGains, LyapunovCertificate), ObserverError> {
    let d = DifferentiatorGains::new(k1, k2, k3, p)?;
    let cert = fftsd::solve_lyapunov_2x2(&d, &Matrix2::identity())?;
    Ok((d, cert))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationalEsoGains {
    pub kt1: f64,
    pub kt2: f64,
    pub kt3: f64,
    pub kappa_t: f64,
    pub p: HolderExponent,
    pub certificate: LyapunovCertificate,
    pub mu_t: f64,
}

impl TranslationalEsoGains {
    /// Builds the gain set with `μ_t` at half its upper bound.
    pub fn new(kt1: f64, kt2: f64, kt3: f64, kappa_t: f64, p: f64) -> Result<Self, ObserverError> {
        let (d, certificate) = certify(kt1, kt2, kt3, p)?;
        let mut g = Self { kt1, kt2, kt3, kappa_t, p: d.p, certificate, mu_t: 0.0 };
        g.mu_t = 0.5 * g.mu_upper();
        Ok(g)
    }

    pub fn with_mu(mut self, mu_t: f64) -> Self {
        self.mu_t = mu_t;
        self
    }

    pub fn feedback(&self) -> HolderFeedback {
        HolderFeedback::new(self.kt3, self.p)
    }

    pub fn differentiator(&self) -> DifferentiatorGains {
        DifferentiatorGains { k1: self.kt1, k2: self.kt2, k3: self.kt3, p: self.p }
    }

    /// `k_t3³·λ_min(P)·λ_min(Q)/λ_max(P)`.
    pub fn mu_upper(&self) -> f64 {
        let c = &self.certificate;
        self.kt3.powi(3) * c.lambda_min_p * c.lambda_min_q / c.lambda_max_p
    }

    pub fn big_gamma1(&self) -> f64 {
        let c = &self.certificate;
        (c.gamma1 - self.mu_t / (self.kt3 * self.kt3 * c.lambda_min_p)).min(2.0 * self.kappa_t - 1.0)
    }

    pub fn big_gamma2(&self) -> f64 {
        let pv = self.p.value();
        self.certificate
            .gamma2
            .min(2.0 * self.kappa_t * self.mu_t.powf((pv - 1.0) / pv))
    }
}

impl Default for TranslationalEsoGains {
    fn default() -> Self {
        Self::new(3.0, 2.0, 6.0, 0.8, 1.2).expect("default translational gains are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationalEsoGains {
    pub ka1: f64,
    pub ka2: f64,
    pub ka3: f64,
    pub kappa_a: f64,
    pub p: HolderExponent,
    pub k: MorseWeights,
    pub certificate: LyapunovCertificate,
    pub mu_a: f64,
}

impl RotationalEsoGains {
    /// Builds the gain set with `μ_a` at half its upper bound.
    pub fn new(
        ka1: f64,
        ka2: f64,
        ka3: f64,
        kappa_a: f64,
        p: f64,
        k: MorseWeights,
    ) -> Result<Self, ObserverError> {
        let (d, certificate) = certify(ka1, ka2, ka3, p)?;
        let mut g = Self { ka1, ka2, ka3, kappa_a, p: d.p, k, certificate, mu_a: 0.0 };
        g.mu_a = 0.5 * g.mu_upper();
        Ok(g)
    }

    pub fn with_mu(mut self, mu_a: f64) -> Self {
        self.mu_a = mu_a;
        self
    }

    pub fn feedback(&self) -> HolderFeedback {
        HolderFeedback::new(self.ka3, self.p)
    }

    pub fn differentiator(&self) -> DifferentiatorGains {
        DifferentiatorGains { k1: self.ka1, k2: self.ka2, k3: self.ka3, p: self.p }
    }

    /// `2k_a3³·λ_min(P)·λ_min(Q)/λ_max(P)`.
    pub fn mu_upper(&self) -> f64 {
        let c = &self.certificate;
        2.0 * self.ka3.powi(3) * c.lambda_min_p * c.lambda_min_q / c.lambda_max_p
    }

    pub fn big_gamma1(&self) -> f64 {
        let c = &self.certificate;
        (c.gamma1 - self.mu_a / (2.0 * self.ka3 * self.ka3 * c.lambda_min_p)).min(self.kappa_a - 0.5)
    }

    pub fn big_gamma2(&self) -> f64 {
        let pv = self.p.value();
        self.certificate
            .gamma2
            .min(self.kappa_a * self.mu_a.powf((pv - 1.0) / pv))
    }
}

impl Default for RotationalEsoGains {
    fn default() -> Self {
        Self::new(3.0, 2.0, 4.0, 0.6, 1.2, MorseWeights::default())
            .expect("default rotational gains are valid")
    }
}

fn report(
    cert: &LyapunovCertificate,
    kappa: f64,
    mu: f64,
    mu_upper: f64,
    g1: f64,
    g2: f64,
) -> Result<GainReport, ObserverError> {
    let mut v = Vec::new();
    if !(kappa > 0.5) {
        v.push(GainViolation::KappaTooSmall { kappa });
    }
    if !(mu > 0.0 && mu < mu_upper) {
        v.push(GainViolation::MuOutsideWindow { mu, upper: mu_upper });
    }
    if !(g1 > 0.0) {
        v.push(GainViolation::GammaNotPositive { name: "Gamma1", value: g1 });
    }
    if !(g2 > 0.0) {
        v.push(GainViolation::GammaNotPositive { name: "Gamma2", value: g2 });
    }
    if !v.is_empty() {
        return Err(ObserverError::InvalidGains(v));
    }
    Ok(GainReport {
        gamma1: cert.gamma1,
        gamma2: cert.gamma2,
        big_gamma1: g1,
        big_gamma2: g2,
        mu,
        mu_upper,
        lambda_min_p: cert.lambda_min_p,
        lambda_max_p: cert.lambda_max_p,
        lyapunov_residual: cert.residual(),
        robustness: cert.robustness_condition(),
    })
}

/// Recomputes the certificate from `(k_t1, k_t2, k_t3, p)` and checks every constraint.
pub fn validate_gains_t(g: &TranslationalEsoGains) -> Result<GainReport, ObserverError> {
    let fresh = TranslationalEsoGains::new(g.kt1, g.kt2, g.kt3, g.kappa_t, g.p.value())?
        .with_mu(g.mu_t);
    report(
        &fresh.certificate,
        g.kappa_t,
        g.mu_t,
        fresh.mu_upper(),
        fresh.big_gamma1(),
        fresh.big_gamma2(),
    )
}

/// Recomputes the certificate from `(k_a1, k_a2, k_a3, p)` and checks every constraint.
pub fn validate_gains_a(g: &RotationalEsoGains) -> Result<GainReport, ObserverError> {
    let fresh = RotationalEsoGains::new(g.ka1, g.ka2, g.ka3, g.kappa_a, g.p.value(), g.k)?
        .with_mu(g.mu_a);
    report(
        &fresh.certificate,
        g.kappa_a,
        g.mu_a,
        fresh.mu_upper(),
        fresh.big_gamma1(),
        fresh.big_gamma2(),
    )
}

/// Estimates `(b̂, v̂, φ̂_D)`; also used as its own time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TranslationalEsoState {
    pub b_hat: Vec3,
    pub v_hat: Vec3,
    pub phi_hat: Vec3,
}

impl Add for TranslationalEsoState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            b_hat: self.b_hat + o.b_hat,
            v_hat: self.v_hat + o.v_hat,
            phi_hat: self.phi_hat + o.phi_hat,
        }
    }
}

impl TranslationalEsoState {
    pub fn advance(&self, d: &Self, h: f64) -> Self {
        Self {
            b_hat: self.b_hat + d.b_hat * h,
            v_hat: self.v_hat + d.v_hat * h,
            phi_hat: self.phi_hat + d.phi_hat * h,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.b_hat, self.v_hat, self.phi_hat]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Estimates `(R̂, Ω̂, τ̂_D)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotationalEsoState {
    pub r_hat: Rotation,
    pub omega_hat: Vec3,
    pub tau_hat: Vec3,
}

/// Time derivative of [`RotationalEsoState`]; the rotation rate is a raw matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationalEsoRate {
    pub r_hat: Mat3,
    pub omega_hat: Vec3,
    pub tau_hat: Vec3,
}

impl Add for RotationalEsoRate {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            r_hat: self.r_hat + o.r_hat,
            omega_hat: self.omega_hat + o.omega_hat,
            tau_hat: self.tau_hat + o.tau_hat,
        }
    }
}

impl RotationalEsoState {
    /// Euler increment on the flat matrix representation (no projection).
    pub fn advance(&self, d: &RotationalEsoRate, h: f64) -> Self {
        Self {
            r_hat: Rotation::from_matrix_unchecked(self.r_hat.matrix() + d.r_hat * h),
            omega_hat: self.omega_hat + d.omega_hat * h,
            tau_hat: self.tau_hat + d.tau_hat * h,
        }
    }

    pub fn project(&mut self) {
        self.r_hat = self.r_hat.renormalize();
    }

    pub fn is_finite(&self) -> bool {
        self.r_hat.is_finite()
            && self.omega_hat.iter().chain(self.tau_hat.iter()).all(|x| x.is_finite())
    }
}

/// `ψ_t = e_v + κ_t[e_b + (e_bᵀe_b)^{(1−p)/p}·e_b]`.
pub fn psi_t(e_b: &Vec3, e_v: &Vec3, g: &TranslationalEsoGains) -> Vec3 {
    e_v + sliding_term(e_b, g.p) * g.kappa_t
}

/// `ψ_a = e_Ω + κ_a[e_R + (e_Rᵀe_R)^{(1−p)/p}·e_R]`.
pub fn psi_a(e_r: &Vec3, e_omega: &Vec3, g: &RotationalEsoGains) -> Vec3 {
    e_omega + sliding_term(e_r, g.p) * g.kappa_a
}

/// `Σᵢ Kᵢ eᵢ × (e_Ω × E_Rᵀeᵢ)`, the time derivative of `s_K(E_R)` along `Ė_R = E_R e_Ω^×`.
pub fn e_w(e_r_mat: &Rotation, e_omega: &Vec3, k: &MorseWeights) -> Vec3 {
    let m = e_r_mat.matrix();
    k.values()
        .iter()
        .enumerate()
        .map(|(i, ki)| {
            let ei = Vec3::ith(i, 1.0);
            // Eᵀeᵢ is row i of E.
            let col = m.row(i).transpose();
            ei.cross(&e_omega.cross(&col)) * *ki
        })
        .sum()
}

/// Observer right-hand side for `(b̂, v̂, φ̂_D)` given the measured state,
/// the applied thrust `f` and mass `m`.
#[allow(clippy::too_many_arguments)]
pub fn translational_eso_rhs(
    est: &TranslationalEsoState,
    meas_b: &Vec3,
    meas_v: &Vec3,
    meas_r: &Rotation,
    thrust_f: f64,
    g: &TranslationalEsoGains,
    m: f64,
    grav: f64,
) -> TranslationalEsoState {
    let e_b = meas_b - est.b_hat;
    let e_v = meas_v - est.v_hat;
    let psi = psi_t(&e_b, &e_v, g);
    let fb = g.feedback();
    let force = E3 * (m * grav) - meas_r.apply(&E3) * thrust_f;
    let correction = fb.phi1(&psi) * (m * g.kt1) + sliding_rate(&e_b, &e_v, g.p) * (m * g.kappa_t);
    TranslationalEsoState {
        b_hat: est.v_hat,
        v_hat: (force + correction + est.phi_hat) / m,
        phi_hat: fb.phi2(&psi) * (m * g.kt2),
    }
}

/// Observer right-hand side for `(R̂, Ω̂, τ̂_D)` given the measured attitude and
/// angular velocity, the applied torque and the inertia `J`.
pub fn rotational_eso_rhs(
    est: &RotationalEsoState,
    meas_r: &Rotation,
    meas_omega: &Vec3,
    control_tau: &Vec3,
    g: &RotationalEsoGains,
    j: &Mat3,
    j_inv: &Mat3,
) -> RotationalEsoRate {
    let er = Rotation::from_matrix_unchecked(est.r_hat.matrix().transpose() * meas_r.matrix());
    let erm = er.matrix();
    let e_omega = meas_omega - erm.transpose() * est.omega_hat;
    let e_r = s_k(&er, &g.k);
    let w = e_w(&er, &e_omega, &g.k);
    let psi = psi_a(&e_r, &e_omega, g);
    let fb = g.feedback();

    let model = j_inv * ((j * meas_omega).cross(meas_omega) + est.tau_hat + control_tau);
    let correction = fb.phi1(&psi) * g.ka1 + sliding_rate(&e_r, &w, g.p) * g.kappa_a;
    let transport = erm * hat(&e_omega) * erm.transpose() * est.omega_hat;
    RotationalEsoRate {
        r_hat: est.r_hat.matrix() * hat(&est.omega_hat),
        omega_hat: erm * (model + correction) + transport,
        tau_hat: j * fb.phi2(&psi) * g.ka2,
    }
}

/// Estimation errors of both observers against the true state and disturbances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsoErrors {
    pub e_b: Vec3,
    pub e_v: Vec3,
    pub e_phi: Vec3,
    pub e_r_mat: Rotation,
    pub e_omega: Vec3,
    pub e_tau: Vec3,
}

impl Default for EsoErrors {
    fn default() -> Self {
        Self {
            e_b: Vec3::zeros(),
            e_v: Vec3::zeros(),
            e_phi: Vec3::zeros(),
            e_r_mat: Rotation::identity(),
            e_omega: Vec3::zeros(),
            e_tau: Vec3::zeros(),
        }
    }
}

impl EsoErrors {
    /// `e_b = b − b̂`, `e_v = v − v̂`, `e_φ = φ_D − φ̂_D`, `E_R = R̂ᵀR`,
    /// `e_Ω = Ω − E_RᵀΩ̂`, `e_τ = τ_D − τ̂_D`.
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        b: &Vec3,
        v: &Vec3,
        phi_d: &Vec3,
        r: &Rotation,
        omega: &Vec3,
        tau_d: &Vec3,
        t: &TranslationalEsoState,
        a: &RotationalEsoState,
    ) -> Self {
        let e_r_mat = Rotation::from_matrix_unchecked(a.r_hat.matrix().transpose() * r.matrix());
        Self {
            e_b: b - t.b_hat,
            e_v: v - t.v_hat,
            e_phi: phi_d - t.phi_hat,
            e_omega: omega - e_r_mat.matrix().transpose() * a.omega_hat,
            e_r_mat,
            e_tau: tau_d - a.tau_hat,
        }
    }

    /// Principal angle of `E_R` (rad).
    pub fn attitude_angle(&self) -> f64 {
        geom::log_so3(&self.e_r_mat.renormalize()).norm()
    }
}

/// `V_t = ζ_tᵀP_tζ_t + μ_t·e_bᵀe_b`, `ζ_t = (φ₁(ψ_t), e_φ/m)`.
pub fn lyapunov_monitor_t(e: &EsoErrors, g: &TranslationalEsoGains, m: f64) -> f64 {
    let psi = psi_t(&e.e_b, &e.e_v, g);
    let z1 = g.feedback().phi1(&psi);
    let z2 = e.e_phi / m;
    g.certificate.quadratic_form(&z1, &z2) + g.mu_t * e.e_b.norm_squared()
}

/// `V_a = ζ_aᵀP_aζ_a + μ_a⟨K, I − E_R⟩`, `ζ_a = (φ₁(ψ_a), J⁻¹e_τ)`.
pub fn lyapunov_monitor_a(e: &EsoErrors, g: &RotationalEsoGains, j_inv: &Mat3) -> f64 {
    let e_r = s_k(&e.e_r_mat, &g.k);
    let psi = psi_a(&e_r, &e.e_omega, g);
    let z1 = g.feedback().phi1(&psi);
    let z2 = j_inv * e.e_tau;
    g.certificate.quadratic_form(&z1, &z2) + g.mu_a * morse_value(&e.e_r_mat, &g.k)
}

/// Right-hand side `−Γ₁V − Γ₂V^{1/p}` of the decrease inequality.
pub fn decrease_bound(big_gamma1: f64, big_gamma2: f64, p: HolderExponent, v: f64) -> f64 {
    -big_gamma1 * v - big_gamma2 * v.max(0.0).powf(p.alpha())
}
