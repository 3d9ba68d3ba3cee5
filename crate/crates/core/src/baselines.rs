//! Comparison observers: a per-axis linear extended state observer (LESO)
//! whose attitude channel works on ZYX Euler angles, and a fixed-time sliding
//! disturbance observer (FxTSDO) fed by finite-differenced velocities.

use crate::geom::{wrap_angle, Mat3, Rotation, Vec3};
use serde::{Deserialize, Serialize};
use std::ops::Add;

/// `|cos(pitch)|` below which the Euler extraction is flagged and clamped.
pub const EULER_SINGULARITY_COS: f64 = 1e-3;
/// Any estimate magnitude above this marks the observer as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// ZYX Euler angles `(roll, pitch, yaw)` of `r`, and whether the pitch was
/// clamped away from `±π/2`.
pub fn euler_zyx(r: &Rotation) -> (Vec3, bool) {
    let m = r.matrix();
    let cos_pitch = m[(0, 0)].hypot(m[(1, 0)]);
    let sin_pitch = -m[(2, 0)];
    let singular = cos_pitch < EULER_SINGULARITY_COS;
    let pitch = sin_pitch.atan2(cos_pitch.max(EULER_SINGULARITY_COS));
    let roll = m[(2, 1)].atan2(m[(2, 2)]);
    let yaw = m[(1, 0)].atan2(m[(0, 0)]);
    (Vec3::new(roll, pitch, yaw), singular)
}

/// Bandwidths of the two LESO channels (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LesoGains {
    pub omega_t: f64,
    pub omega_a: f64,
}

impl Default for LesoGains {
    fn default() -> Self {
        Self { omega_t: 10.0, omega_a: 15.0 }
    }
}

/// `(3ω, 3ω², ω³)`.
fn leso_betas(omega: f64) -> (f64, f64, f64) {
    (3.0 * omega, 3.0 * omega * omega, omega.powi(3))
}

/// Three-state chain per axis: value, rate and lumped disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LesoChannel {
    pub z1: Vec3,
    pub z2: Vec3,
    pub z3: Vec3,
}

impl Add for LesoChannel {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { z1: self.z1 + o.z1, z2: self.z2 + o.z2, z3: self.z3 + o.z3 }
    }
}

impl LesoChannel {
    fn scaled_add(&self, d: &Self, h: f64) -> Self {
        Self { z1: self.z1 + d.z1 * h, z2: self.z2 + d.z2 * h, z3: self.z3 + d.z3 * h }
    }

    fn max_abs(&self) -> f64 {
        self.z1.iter().chain(self.z2.iter()).chain(self.z3.iter()).fold(0.0, |m, x| {
            if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY }
        })
    }

    fn rhs(&self, innovation: Vec3, u: &Vec3, omega: f64) -> Self {
        let (b1, b2, b3) = leso_betas(omega);
        Self { z1: self.z2 + innovation * b1, z2: self.z3 + u + innovation * b2, z3: innovation * b3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LesoFlags {
    /// Set once the Euler extraction came within the singular band.
    pub euler_singularity: bool,
    pub diverged: bool,
}

/// Translational channel on position and Euler channel on attitude.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LesoState {
    pub translational: LesoChannel,
    pub attitude: LesoChannel,
    pub flags: LesoFlags,
}

/// Measured quantities and model inputs for one LESO step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LesoInputs {
    pub b: Vec3,
    pub r: Rotation,
    pub omega: Vec3,
    pub thrust: f64,
    pub tau: Vec3,
}

impl LesoState {
    /// Starts at the given position, attitude, rates and disturbances.
    pub fn at_truth(
        b: &Vec3,
        v: &Vec3,
        r: &Rotation,
        phi_d: &Vec3,
        tau_d: &Vec3,
        mass: f64,
        inertia: &Mat3,
    ) -> Self {
        let (eta, singular) = euler_zyx(r);
        Self {
            translational: LesoChannel { z1: *b, z2: *v, z3: phi_d / mass },
            attitude: LesoChannel {
                z1: eta,
                z2: Vec3::zeros(),
                z3: tau_d.component_div(&inertia.diagonal()),
            },
            flags: LesoFlags { euler_singularity: singular, diverged: false },
        }
    }

    /// Disturbance force estimate `m·z₃` (N).
    pub fn force_estimate(&self, mass: f64) -> Vec3 {
        self.translational.z3 * mass
    }

    /// Disturbance torque estimate `J_ii·z₃` (N·m).
    pub fn torque_estimate(&self, inertia: &Mat3) -> Vec3 {
        self.attitude.z3.component_mul(&inertia.diagonal())
    }
}

/// One Heun step of the LESO with the measurement and inputs held over the step.
#[allow(clippy::too_many_arguments)]
pub fn leso_step(
    s: &LesoState,
    meas: &LesoInputs,
    gains: &LesoGains,
    mass: f64,
    grav: f64,
    inertia: &Mat3,
    inertia_inv: &Mat3,
    h: f64,
) -> LesoState {
    if s.flags.diverged {
        return *s;
    }
    let e3 = Vec3::z();
    let u_t = e3 * grav - meas.r.matrix() * e3 * (meas.thrust / mass);
    let (eta, singular) = euler_zyx(&meas.r);
    let u_a = inertia_inv * ((inertia * meas.omega).cross(&meas.omega) + meas.tau);

    let trans = heun(&s.translational, h, |c| c.rhs(meas.b - c.z1, &u_t, gains.omega_t));
    let att = heun(&s.attitude, h, |c| {
        c.rhs((eta - c.z1).map(wrap_angle), &u_a, gains.omega_a)
    });
    let diverged = trans.max_abs() > DIVERGENCE_LIMIT || att.max_abs() > DIVERGENCE_LIMIT;
    LesoState {
        translational: trans,
        attitude: att,
        flags: LesoFlags {
            euler_singularity: s.flags.euler_singularity || singular,
            diverged,
        },
    }
}

fn heun(c: &LesoChannel, h: f64, f: impl Fn(&LesoChannel) -> LesoChannel) -> LesoChannel {
    let k1 = f(c);
    let k2 = f(&c.scaled_add(&k1, h));
    c.scaled_add(&(k1 + k2), 0.5 * h)
}

/// Gains of the fixed-time sliding disturbance observer for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FxtsdoGains {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    /// Exponent below one (finite-time branch).
    pub a1: f64,
    /// Exponent above one (fixed-time branch).
    pub a2: f64,
}

impl FxtsdoGains {
    pub fn force() -> Self {
        Self { l1: 8.0, l2: 0.05, l3: 16.0, l4: 0.001, a1: 0.75, a2: 1.25 }
    }

    pub fn torque() -> Self {
        Self { l1: 8.0, l2: 0.5, l3: 16.0, l4: 0.1, a1: 0.75, a2: 1.25 }
    }
}

/// `|x|^a·sign(x)` per component.
fn sig(x: &Vec3, a: f64) -> Vec3 {
    x.map(|v| v.abs().powf(a).copysign(v))
}

/// One channel: disturbance estimate, auxiliary rate state and the previous
/// velocity sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FxtsdoChannel {
    pub d_hat: Vec3,
    pub w: Vec3,
    pub prev_velocity: Vec3,
}

impl FxtsdoChannel {
    pub fn new(d_hat: Vec3, velocity: Vec3) -> Self {
        Self { d_hat, w: Vec3::zeros(), prev_velocity: velocity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FxtsdoState {
    pub force: FxtsdoChannel,
    pub torque: FxtsdoChannel,
    pub diverged: bool,
}

/// Updates one channel from a new velocity sample.
///
/// `gain` maps the finite-difference acceleration to the disturbance units
/// (mass or inertia) and `model` is the model-predicted generalised force
/// averaged over the step.
pub fn fxtsdo_step(
    s: &FxtsdoChannel,
    velocity_meas: &Vec3,
    gain: &Mat3,
    model: &Vec3,
    g: &FxtsdoGains,
    h: f64,
) -> FxtsdoChannel {
    let accel = (velocity_meas - s.prev_velocity) / h;
    let raw = gain * accel - model;
    let sigma = s.d_hat - raw;
    let d_dot = -sig(&sigma, g.a1) * g.l1 - sig(&sigma, g.a2) * g.l2 + s.w;
    let w_dot = -sig(&sigma, 2.0 * g.a1 - 1.0) * g.l3 - sig(&sigma, 2.0 * g.a2 - 1.0) * g.l4;
    FxtsdoChannel { d_hat: s.d_hat + d_dot * h, w: s.w + w_dot * h, prev_velocity: *velocity_meas }
}

impl FxtsdoState {
    pub fn new(phi_d: Vec3, tau_d: Vec3, v: Vec3, omega: Vec3) -> Self {
        Self {
            force: FxtsdoChannel::new(phi_d, v),
            torque: FxtsdoChannel::new(tau_d, omega),
            diverged: false,
        }
    }

    /// Steps both channels; `force_model` and `torque_model` are the model
    /// forces `m(ge₃ − fRe₃/m)` and torques `JΩ×Ω + τ` averaged over the step.
    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &self,
        v: &Vec3,
        omega: &Vec3,
        force_model: &Vec3,
        torque_model: &Vec3,
        mass: f64,
        inertia: &Mat3,
        gf: &FxtsdoGains,
        ga: &FxtsdoGains,
        h: f64,
    ) -> Self {
        if self.diverged {
            return *self;
        }
        let force = fxtsdo_step(&self.force, v, &(Mat3::identity() * mass), force_model, gf, h);
        let torque = fxtsdo_step(&self.torque, omega, inertia, torque_model, ga, h);
        let bad = |c: &FxtsdoChannel| {
            c.d_hat.iter().chain(c.w.iter()).any(|x| !x.is_finite() || x.abs() > DIVERGENCE_LIMIT)
        };
        let diverged = bad(&force) || bad(&torque);
        Self { force, torque, diverged }
    }
}
