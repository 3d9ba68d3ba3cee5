//! Closed-loop scenario execution.

use super::config::{ConfigError, SimConfig};
use super::integrator::{heun_step, sample_count, ClosedLoopRate, ClosedLoopState};
use super::record::{BaselineRow, SimRecord, SimRow};
use crate::baselines::{leso_step, FxtsdoState, LesoInputs, LesoState};
use crate::geom::{exp_so3, Vec3};
use crate::observer::{
    lyapunov_monitor_a, lyapunov_monitor_t, rotational_eso_rhs, translational_eso_rhs, EsoErrors,
    RotationalEsoState, TranslationalEsoState,
};
use crate::plant::{
    eval_disturbance, plant_rhs_with, tracking_control, ControlInput, Measurement, NoiseSample,
    RigidBodyParams, RigidBodyState, E3,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Observers initialised at the true state and disturbances, plus offsets.
pub fn initial_observers(cfg: &SimConfig) -> (TranslationalEsoState, RotationalEsoState) {
    let s = &cfg.initial;
    let (phi_d, tau_d) = eval_disturbance(&cfg.disturbance, 0.0);
    let o = &cfg.offsets;
    let r_hat = if o.r == Vec3::zeros() {
        s.pose.rotation
    } else {
        s.pose.rotation.compose(&exp_so3(&o.r))
    };
    (
        TranslationalEsoState {
            b_hat: s.pose.position + o.b,
            v_hat: s.v + o.v,
            phi_hat: phi_d + o.phi,
        },
        RotationalEsoState {
            r_hat,
            omega_hat: r_hat.matrix().transpose() * s.pose.rotation.matrix() * s.omega + o.omega,
            tau_hat: tau_d + o.tau,
        },
    )
}

/// Closed-loop right-hand side with control and measurement noise held.
fn closed_loop_rhs(
    cfg: &SimConfig,
    x: &ClosedLoopState,
    t: f64,
    u: &ControlInput,
    noise: &NoiseSample,
) -> ClosedLoopRate {
    let p = &cfg.params;
    let (phi_d, tau_d) = eval_disturbance(&cfg.disturbance, t);
    let meas = Measurement::from_state(&x.plant, noise);
    ClosedLoopRate {
        plant: plant_rhs_with(&x.plant, u.f, &u.tau, &phi_d, &tau_d, p),
        translational: translational_eso_rhs(
            &x.translational,
            &meas.b,
            &meas.v,
            &meas.r,
            u.f,
            &cfg.translational,
            p.mass(),
            p.grav(),
        ),
        rotational: rotational_eso_rhs(
            &x.rotational,
            &meas.r,
            &meas.omega,
            &u.tau,
            &cfg.rotational,
            p.inertia(),
            p.inertia_inv(),
        ),
    }
}

fn model_force(meas: &Measurement, f: f64, p: &RigidBodyParams) -> Vec3 {
    E3 * (p.mass() * p.grav()) - meas.r.matrix() * E3 * f
}

fn model_torque(meas: &Measurement, tau: &Vec3, p: &RigidBodyParams) -> Vec3 {
    (p.inertia() * meas.omega).cross(&meas.omega) + tau
}

struct Baselines {
    leso: LesoState,
    fxtsdo: FxtsdoState,
    /// Model force and torque at the previous sample under the control applied since.
    prev_model: (Vec3, Vec3),
}

impl Baselines {
    fn new(cfg: &SimConfig, meas: &Measurement) -> Self {
        let (phi_d, tau_d) = eval_disturbance(&cfg.disturbance, 0.0);
        let p = &cfg.params;
        Self {
            leso: LesoState::at_truth(&meas.b, &meas.v, &meas.r, &phi_d, &tau_d, p.mass(), p.inertia()),
            fxtsdo: FxtsdoState::new(phi_d, tau_d, meas.v, meas.omega),
            prev_model: (Vec3::zeros(), Vec3::zeros()),
        }
    }

    fn row(&self, phi_d: &Vec3, tau_d: &Vec3, p: &RigidBodyParams) -> BaselineRow {
        BaselineRow {
            leso_phi: phi_d - self.leso.force_estimate(p.mass()),
            leso_tau: tau_d - self.leso.torque_estimate(p.inertia()),
            fxtsdo_phi: phi_d - self.fxtsdo.force.d_hat,
            fxtsdo_tau: tau_d - self.fxtsdo.torque.d_hat,
            leso_euler_singularity: self.leso.flags.euler_singularity,
            leso_diverged: self.leso.flags.diverged,
            fxtsdo_diverged: self.fxtsdo.diverged,
        }
    }
}

/// Builds the sample at time `t` from the current closed-loop state.
fn sample(cfg: &SimConfig, x: &ClosedLoopState, t: f64, u: &ControlInput, diverged: bool) -> SimRow {
    let p = &cfg.params;
    let (phi_d, tau_d) = eval_disturbance(&cfg.disturbance, t);
    let s = &x.plant;
    let e = EsoErrors::compute(
        &s.pose.position,
        &s.v,
        &phi_d,
        &s.pose.rotation,
        &s.omega,
        &tau_d,
        &x.translational,
        &x.rotational,
    );
    SimRow {
        t,
        truth: *s,
        phi_d,
        tau_d,
        translational: x.translational,
        rotational: x.rotational,
        e_phi: e.e_phi,
        e_tau: e.e_tau,
        attitude_error: e.attitude_angle(),
        thrust: u.f,
        torque: u.tau,
        v_t: lyapunov_monitor_t(&e, &cfg.translational, p.mass()),
        v_a: lyapunov_monitor_a(&e, &cfg.rotational, p.inertia_inv()),
        diverged,
        baselines: None,
    }
}

/// Recomputes `(V_t, V_a)` of a recorded sample.
pub fn monitors_of(row: &SimRow, cfg: &SimConfig) -> (f64, f64) {
    let s = &row.truth;
    let e = EsoErrors::compute(
        &s.pose.position,
        &s.v,
        &row.phi_d,
        &s.pose.rotation,
        &s.omega,
        &row.tau_d,
        &row.translational,
        &row.rotational,
    );
    (
        lyapunov_monitor_t(&e, &cfg.translational, cfg.params.mass()),
        lyapunov_monitor_a(&e, &cfg.rotational, cfg.params.inertia_inv()),
    )
}

/// Runs one closed loop: sense, observe, control, integrate.
///
/// Each step samples the noise once and holds it, together with the control,
/// across both Heun stages. The comparison observers read the same
/// measurements and never touch the random stream.
pub fn run_scenario(cfg: &SimConfig) -> Result<SimRecord, ConfigError> {
    cfg.validate()?;
    let n = sample_count(cfg.duration, cfg.h);
    let h = cfg.h;
    let p = &cfg.params;
    let noise_spec = cfg.effective_noise();
    let mut rng = ChaCha8Rng::seed_from_u64(noise_spec.seed);

    let (translational, rotational) = initial_observers(cfg);
    let mut x = ClosedLoopState { plant: cfg.initial, translational, rotational };
    let mut rec = SimRecord::new(cfg.baselines);
    rec.rows.reserve(n);
    let mut baselines: Option<Baselines> = None;
    let mut diverged = false;
    let mut u_prev = ControlInput { f: 0.0, tau: Vec3::zeros() };

    for k in 0..n {
        let t = k as f64 * h;
        let noise = noise_spec.sample(h, &mut rng);
        let meas = Measurement::from_state(&x.plant, &noise);

        if cfg.baselines {
            let b = baselines.get_or_insert_with(|| Baselines::new(cfg, &meas));
            if k > 0 {
                let fm = 0.5 * (b.prev_model.0 + model_force(&meas, u_prev.f, p));
                let tm = 0.5 * (b.prev_model.1 + model_torque(&meas, &u_prev.tau, p));
                b.fxtsdo = b.fxtsdo.step(
                    &meas.v,
                    &meas.omega,
                    &fm,
                    &tm,
                    p.mass(),
                    p.inertia(),
                    &cfg.fxtsdo_force,
                    &cfg.fxtsdo_torque,
                    h,
                );
            }
        }

        let u = if diverged {
            u_prev
        } else {
            let (fb_phi, fb_tau) = if cfg.reject {
                (x.translational.phi_hat, x.rotational.tau_hat)
            } else {
                (Vec3::zeros(), Vec3::zeros())
            };
            let measured = RigidBodyState {
                pose: crate::geom::Pose { rotation: meas.r, position: meas.b },
                v: meas.v,
                omega: meas.omega,
            };
            tracking_control(&measured, cfg.scenario, t, &fb_phi, &fb_tau, p, &cfg.controller)
        };

        let mut row = sample(cfg, &x, t, &u, diverged);
        if let Some(b) = &baselines {
            row.baselines = Some(b.row(&row.phi_d, &row.tau_d, p));
        }
        rec.rows.push(row);
        if k + 1 == n {
            break;
        }

        if let Some(b) = baselines.as_mut() {
            let inputs = LesoInputs { b: meas.b, r: meas.r, omega: meas.omega, thrust: u.f, tau: u.tau };
            b.leso = leso_step(&b.leso, &inputs, &cfg.leso, p.mass(), p.grav(), p.inertia(), p.inertia_inv(), h);
            b.prev_model = (model_force(&meas, u.f, p), model_torque(&meas, &u.tau, p));
        }

        if !diverged {
            match heun_step(|tau, s| closed_loop_rhs(cfg, s, tau, &u, &noise), &x, t, h) {
                Ok(next) => x = next,
                Err(_) => diverged = true,
            }
        }
        u_prev = u;
    }
    Ok(rec)
}
