//! Rigid-body ground truth: dynamics, disturbances, reference trajectories,
//! a geometric tracking controller and the sensor model.
//!
//! Frames follow the north-east-down convention: gravity acts along `+e₃`,
//! thrust along `−Re₃`, and altitude is negative `z`.

use crate::geom::{exp_so3, hat, vee_unchecked, Mat3, Pose, Rotation, Vec3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Add;
use thiserror::Error;

pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("inertia must be symmetric positive definite")]
    BadInertia,
    #[error("disturbance switch times must start at 0 and strictly increase")]
    BadSchedule,
    #[error("noise PSD must be non-negative, got {0}")]
    NegativePsd(f64),
}

/// Mass, inertia and gravity. The inverse inertia is cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyParams {
    mass: f64,
    inertia: Mat3,
    inertia_inv: Mat3,
    grav: f64,
}

impl RigidBodyParams {
    pub fn new(mass: f64, inertia: Mat3, grav: f64) -> Result<Self, PlantError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(PlantError::NonPositiveMass(mass));
        }
        let sym = (inertia - inertia.transpose()).norm() <= 1e-12 * inertia.norm();
        let chol = inertia.cholesky();
        let (true, Some(_)) = (sym, chol) else {
            return Err(PlantError::BadInertia);
        };
        let inertia_inv = inertia.try_inverse().ok_or(PlantError::BadInertia)?;
        Ok(Self { mass, inertia, inertia_inv, grav })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn inertia(&self) -> &Mat3 {
        &self.inertia
    }

    pub fn inertia_inv(&self) -> &Mat3 {
        &self.inertia_inv
    }

    pub fn grav(&self) -> f64 {
        self.grav
    }
}

impl Default for RigidBodyParams {
    fn default() -> Self {
        let j = Mat3::from_diagonal(&Vec3::new(0.0820, 0.0845, 0.1377));
        Self::new(4.34, j, 9.81).expect("default parameters are valid")
    }
}

/// Pose, inertial velocity and body angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidBodyState {
    pub pose: Pose,
    pub v: Vec3,
    pub omega: Vec3,
}

impl RigidBodyState {
    /// State at the initial conditions shared by every scenario.
    pub fn initial() -> Self {
        Self {
            pose: Pose { rotation: Rotation::identity(), position: Vec3::new(0.01, 0.0, 0.0) },
            v: Vec3::new(5.0 * PI, 0.0, 0.0),
            omega: Vec3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Rotation {
        &self.pose.rotation
    }

    pub fn position(&self) -> &Vec3 {
        &self.pose.position
    }

    /// Body-frame velocity `ν = Rᵀv`.
    pub fn body_velocity(&self) -> Vec3 {
        self.pose.rotation.matrix().transpose() * self.v
    }

    pub fn advance(&self, d: &RigidBodyRate, h: f64) -> Self {
        Self {
            pose: Pose {
                rotation: Rotation::from_matrix_unchecked(self.pose.rotation.matrix() + d.r * h),
                position: self.pose.position + d.b * h,
            },
            v: self.v + d.v * h,
            omega: self.omega + d.omega * h,
        }
    }

    pub fn project(&mut self) {
        self.pose.rotation = self.pose.rotation.renormalize();
    }

    pub fn is_finite(&self) -> bool {
        self.pose.rotation.is_finite()
            && self
                .pose
                .position
                .iter()
                .chain(self.v.iter())
                .chain(self.omega.iter())
                .all(|x| x.is_finite())
    }
}

/// Time derivative of [`RigidBodyState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyRate {
    pub b: Vec3,
    pub v: Vec3,
    pub r: Mat3,
    pub omega: Vec3,
}

impl Add for RigidBodyRate {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { b: self.b + o.b, v: self.v + o.v, r: self.r + o.r, omega: self.omega + o.omega }
    }
}

/// Piecewise-constant force and torque schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceProfile {
    force: Vec<(f64, Vec3)>,
    torque: Vec<(f64, Vec3)>,
}

impl DisturbanceProfile {
    pub fn new(force: Vec<(f64, Vec3)>, torque: Vec<(f64, Vec3)>) -> Result<Self, PlantError> {
        for s in [&force, &torque] {
            let starts_at_zero = s.first().is_some_and(|(t, _)| *t == 0.0);
            let increasing = s.windows(2).all(|w| w[1].0 > w[0].0);
            if !starts_at_zero || !increasing {
                return Err(PlantError::BadSchedule);
            }
        }
        Ok(Self { force, torque })
    }

    /// Constant force and torque for all time.
    pub fn constant(force: Vec3, torque: Vec3) -> Self {
        Self { force: vec![(0.0, force)], torque: vec![(0.0, torque)] }
    }

    pub fn none() -> Self {
        Self::constant(Vec3::zeros(), Vec3::zeros())
    }

    pub fn force_schedule(&self) -> &[(f64, Vec3)] {
        &self.force
    }

    pub fn torque_schedule(&self) -> &[(f64, Vec3)] {
        &self.torque
    }

    /// All switch times after `t = 0`, sorted and deduplicated.
    pub fn switch_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .force
            .iter()
            .chain(self.torque.iter())
            .map(|(t, _)| *t)
            .filter(|t| *t > 0.0)
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}

impl Default for DisturbanceProfile {
    fn default() -> Self {
        Self::new(
            vec![(0.0, Vec3::new(5.0, 10.0, 0.0)), (10.0, Vec3::new(9.0, 15.0, 5.0))],
            vec![(0.0, Vec3::new(-0.1, 0.1, 0.1)), (20.0, Vec3::new(0.0, 0.0, 0.2))],
        )
        .expect("default schedule is valid")
    }
}

fn segment_value(s: &[(f64, Vec3)], t: f64) -> Vec3 {
    s.iter()
        .take_while(|(start, _)| *start <= t)
        .last()
        .map(|(_, v)| *v)
        .unwrap_or_else(|| s[0].1)
}

/// `(φ_D(t), τ_D(t))`; each segment holds on `[start, next_start)`.
pub fn eval_disturbance(d: &DisturbanceProfile, t: f64) -> (Vec3, Vec3) {
    (segment_value(&d.force, t), segment_value(&d.torque, t))
}

/// `ḃ = v`, `mv̇ = mge₃ − fRe₃ + φ_D`, `Ṙ = RΩ^×`, `JΩ̇ = JΩ×Ω + τ + τ_D`.
pub fn plant_rhs(
    s: &RigidBodyState,
    f: f64,
    tau: &Vec3,
    d: &DisturbanceProfile,
    t: f64,
    p: &RigidBodyParams,
) -> RigidBodyRate {
    let (phi_d, tau_d) = eval_disturbance(d, t);
    plant_rhs_with(s, f, tau, &phi_d, &tau_d, p)
}

/// [`plant_rhs`] with the disturbances given directly.
pub fn plant_rhs_with(
    s: &RigidBodyState,
    f: f64,
    tau: &Vec3,
    phi_d: &Vec3,
    tau_d: &Vec3,
    p: &RigidBodyParams,
) -> RigidBodyRate {
    let r = s.pose.rotation.matrix();
    let jw = p.inertia * s.omega;
    RigidBodyRate {
        b: s.v,
        v: E3 * p.grav - r * E3 * (f / p.mass) + phi_d / p.mass,
        r: r * hat(&s.omega),
        omega: p.inertia_inv * (jw.cross(&s.omega) + tau + tau_d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    Hovering,
    SlowSwing,
    FastSwing,
    HighPitch,
}

impl ReferenceKind {
    pub const ALL: [ReferenceKind; 4] =
        [Self::Hovering, Self::SlowSwing, Self::FastSwing, Self::HighPitch];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hovering => "hovering",
            Self::SlowSwing => "slow-swing",
            Self::FastSwing => "fast-swing",
            Self::HighPitch => "high-pitch",
        }
    }
}

impl std::str::FromStr for ReferenceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scenario '{s}' (expected hovering, slow-swing, fast-swing or high-pitch)"))
    }
}

/// Desired position and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub b: Vec3,
    pub v: Vec3,
    pub a: Vec3,
}

/// Closed-form reference trajectory at time `t`.
pub fn reference(kind: ReferenceKind, t: f64) -> ReferencePoint {
    let z = -3.0;
    // x = A sin(wt) (and y = A cos(wt) for the circle).
    let sine = |amp: f64, w: f64| {
        let (s, c) = (w * t).sin_cos();
        (amp * s, amp * w * c, -amp * w * w * s)
    };
    let cosine = |amp: f64, w: f64| {
        let (s, c) = (w * t).sin_cos();
        (amp * c, -amp * w * s, -amp * w * w * c)
    };
    let (x, y) = match kind {
        ReferenceKind::Hovering => ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        ReferenceKind::SlowSwing => (sine(10.0, 0.1 * PI), (0.0, 0.0, 0.0)),
        ReferenceKind::FastSwing => (sine(5.0, 0.5 * PI), (0.0, 0.0, 0.0)),
        ReferenceKind::HighPitch => (sine(10.0, 0.5 * PI), cosine(10.0, 0.5 * PI)),
    };
    ReferencePoint {
        b: Vec3::new(x.0, y.0, z),
        v: Vec3::new(x.1, y.1, 0.0),
        a: Vec3::new(x.2, y.2, 0.0),
    }
}

/// Gains of the geometric tracking controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    pub kx: f64,
    pub kv: f64,
    pub kr: f64,
    pub komega: f64,
    /// Norm limit on the velocity command the position error produces (m/s).
    pub max_approach_speed: f64,
    /// Norm limit on the position feedback acceleration (m/s²).
    pub max_feedback_accel: f64,
    /// Minimum upward component of the commanded force, as a fraction of `mg`.
    pub min_lift: f64,
    /// Thrust limit (N); `None` disables saturation.
    pub max_thrust: Option<f64>,
    /// Per-axis torque limit (N·m); `None` disables saturation.
    pub max_torque: Option<f64>,
}

impl ControllerGains {
    /// Position gains proportional to the mass, attitude gains fixed.
    pub fn for_mass(mass: f64) -> Self {
        Self {
            kx: 9.0 * mass,
            kv: 6.0 * mass,
            kr: 8.81,
            komega: 2.54,
            max_approach_speed: 5.0,
            max_feedback_accel: 2.0 * 9.81,
            min_lift: 0.2,
            max_thrust: None,
            max_torque: None,
        }
    }
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self::for_mass(RigidBodyParams::default().mass())
    }
}

fn clamp_norm(x: Vec3, limit: f64) -> Vec3 {
    let n = x.norm();
    if n > limit {
        x * (limit / n)
    } else {
        x
    }
}

/// Desired thrust vector `F` with `fRe₃ = −F` realising the position PD law.
///
/// The position error sets a speed-limited velocity command, the velocity
/// error sets a norm-limited acceleration, and `F` keeps a minimum upward
/// component.
fn desired_force(
    b: &Vec3,
    v: &Vec3,
    r: &ReferencePoint,
    fb_phi: &Vec3,
    p: &RigidBodyParams,
    g: &ControllerGains,
) -> Vec3 {
    let v_cmd = clamp_norm(-(b - r.b) * (g.kx / g.kv), g.max_approach_speed);
    let a_fb = clamp_norm((v_cmd - (v - r.v)) * (g.kv / p.mass), g.max_feedback_accel);
    let mut force = (a_fb + r.a) * p.mass - E3 * (p.mass * p.grav) - fb_phi;
    force.z = force.z.min(-g.min_lift * p.mass * p.grav);
    force
}

const MIN_FORCE: f64 = 1e-6;

/// Attitude whose third axis points along `−F` and whose first axis is as close
/// to north as possible.
fn attitude_from_force(force: &Vec3) -> Rotation {
    let b3 = if force.norm() < MIN_FORCE { -E3 } else { -force.normalize() };
    let mut b2 = b3.cross(&Vec3::x());
    if b2.norm() < 1e-6 {
        b2 = b3.cross(&Vec3::y());
    }
    let b2 = b2.normalize();
    let b1 = b2.cross(&b3);
    Rotation::from_matrix_unchecked(Mat3::from_columns(&[b1, b2, b3]))
}

/// Attitude-only feedforward: the desired attitude implied by the reference
/// acceleration, differentiated numerically.
#[derive(Debug, Clone, Copy)]
struct Feedforward {
    omega: Vec3,
    omega_dot: Vec3,
}

const FF_STEP: f64 = 1e-4;

fn feedforward(kind: ReferenceKind, t: f64, p: &RigidBodyParams) -> Feedforward {
    let rd = |t: f64| {
        let r = reference(kind, t);
        attitude_from_force(&(r.a * p.mass - E3 * (p.mass * p.grav)))
    };
    let rate = |t: f64| {
        let (a, b) = (rd(t - FF_STEP), rd(t + FF_STEP));
        let mid = rd(t);
        vee_unchecked(&(mid.matrix().transpose() * (b.matrix() - a.matrix()))) / (2.0 * FF_STEP)
    };
    Feedforward {
        omega: rate(t),
        omega_dot: (rate(t + FF_STEP) - rate(t - FF_STEP)) / (2.0 * FF_STEP),
    }
}

/// Controller output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub f: f64,
    pub tau: Vec3,
}

/// Geometric tracking controller on SE(3) with optional disturbance
/// feedforwards `fb_phi`, `fb_tau` subtracted from the force and torque.
#[allow(clippy::too_many_arguments)]
pub fn tracking_control(
    s: &RigidBodyState,
    kind: ReferenceKind,
    t: f64,
    fb_phi: &Vec3,
    fb_tau: &Vec3,
    p: &RigidBodyParams,
    g: &ControllerGains,
) -> ControlInput {
    let r_ref = reference(kind, t);
    let ff = feedforward(kind, t, p);
    tracking_control_with(s, &r_ref, &ff.omega, &ff.omega_dot, fb_phi, fb_tau, p, g)
}

/// [`tracking_control`] with the reference and desired angular rates given directly.
#[allow(clippy::too_many_arguments)]
pub fn tracking_control_with(
    s: &RigidBodyState,
    r_ref: &ReferencePoint,
    omega_d: &Vec3,
    omega_d_dot: &Vec3,
    fb_phi: &Vec3,
    fb_tau: &Vec3,
    p: &RigidBodyParams,
    g: &ControllerGains,
) -> ControlInput {
    let r = s.pose.rotation.matrix();
    let force = desired_force(&s.pose.position, &s.v, r_ref, fb_phi, p, g);
    let rd = *attitude_from_force(&force).matrix();
    let mut f = -force.dot(&(r * E3));

    let e_r = vee_unchecked(&(rd.transpose() * r - r.transpose() * rd)) * 0.5;
    let rt_rd = r.transpose() * rd;
    let e_omega = s.omega - rt_rd * omega_d;
    let j = p.inertia;
    let mut tau = -e_r * g.kr - e_omega * g.komega
        - (j * s.omega).cross(&s.omega)
        - j * (hat(&s.omega) * rt_rd * omega_d - rt_rd * omega_d_dot)
        - fb_tau;

    if let Some(max) = g.max_thrust {
        f = f.clamp(0.0, max);
    }
    if let Some(max) = g.max_torque {
        tau = tau.map(|x| x.clamp(-max, max));
    }
    ControlInput { f, tau }
}

/// Power spectral densities of the four measurement channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub psd_b: f64,
    pub psd_v: f64,
    pub psd_r: f64,
    pub psd_omega: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(psd_b: f64, psd_v: f64, psd_r: f64, psd_omega: f64, seed: u64) -> Result<Self, PlantError> {
        for psd in [psd_b, psd_v, psd_r, psd_omega] {
            if !(psd >= 0.0) {
                return Err(PlantError::NegativePsd(psd));
            }
        }
        Ok(Self { psd_b, psd_v, psd_r, psd_omega, seed })
    }

    pub fn off(seed: u64) -> Self {
        Self { psd_b: 0.0, psd_v: 0.0, psd_r: 0.0, psd_omega: 0.0, seed }
    }

    pub fn is_off(&self) -> bool {
        [self.psd_b, self.psd_v, self.psd_r, self.psd_omega].iter().all(|x| *x == 0.0)
    }

    /// Per-sample standard deviation `√(PSD/h)`.
    pub fn sigma(psd: f64, h: f64) -> f64 {
        (psd / h).sqrt()
    }

    /// Draws one held noise sample. Always consumes twelve normals so the
    /// stream position does not depend on which channels are active.
    pub fn sample<R: Rng + ?Sized>(&self, h: f64, rng: &mut R) -> NoiseSample {
        let mut draw = |psd: f64| {
            let s = Self::sigma(psd, h);
            let mut v = Vec3::zeros();
            for x in v.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *x = s * z;
            }
            v
        };
        NoiseSample {
            b: draw(self.psd_b),
            v: draw(self.psd_v),
            r: draw(self.psd_r),
            omega: draw(self.psd_omega),
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { psd_b: 3e-8, psd_v: 3e-7, psd_r: 3e-8, psd_omega: 3e-7, seed: 0 }
    }
}

/// One draw of additive noise on `(b, v, Ω)` and rotation-vector noise on `R`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSample {
    pub b: Vec3,
    pub v: Vec3,
    pub r: Vec3,
    pub omega: Vec3,
}

/// Measured `(b, v, R, Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub b: Vec3,
    pub v: Vec3,
    pub r: Rotation,
    pub omega: Vec3,
}

impl Measurement {
    /// `b_N = b + μ_b`, `v_N = v + μ_v`, `R_N = R·exp(μ_R)`, `Ω_N = Ω + μ_Ω`.
    pub fn from_state(s: &RigidBodyState, n: &NoiseSample) -> Self {
        let r = if n.r == Vec3::zeros() {
            s.pose.rotation
        } else {
            s.pose.rotation.compose(&exp_so3(&n.r))
        };
        Self { b: s.pose.position + n.b, v: s.v + n.v, r, omega: s.omega + n.omega }
    }
}

/// Samples noise and applies it to `s`.
pub fn sense<R: Rng + ?Sized>(s: &RigidBodyState, n: &NoiseSpec, h: f64, rng: &mut R) -> Measurement {
    Measurement::from_state(s, &n.sample(h, rng))
}
