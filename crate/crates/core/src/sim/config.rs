//! Simulation configuration and its flat TOML file form.

use crate::baselines::{FxtsdoGains, LesoGains};
use crate::geom::{exp_so3, Mat3, MorseWeights, Pose, Rotation, Vec3};
use crate::observer::{
    validate_gains_a, validate_gains_t, ObserverError, RotationalEsoGains, TranslationalEsoGains,
};
use crate::plant::{
    ControllerGains, DisturbanceProfile, NoiseSpec, PlantError, ReferenceKind, RigidBodyParams,
    RigidBodyState,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("duration {duration} must be at least one step {h}")]
    BadDuration { duration: f64, h: f64 },
    #[error("disturbance schedule '{0}' has mismatched times and values")]
    ScheduleShape(&'static str),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Observer(#[from] ObserverError),
    #[error(transparent)]
    Geometry(#[from] crate::geom::GeomError),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
}

/// Offsets added to the true initial state to initialise the observers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObserverOffsets {
    pub b: Vec3,
    pub v: Vec3,
    pub phi: Vec3,
    /// Rotation vector `ξ` with `R̂(0) = R(0)·exp(ξ)`.
    pub r: Vec3,
    pub omega: Vec3,
    pub tau: Vec3,
}

/// A fully validated simulation description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: ReferenceKind,
    pub h: f64,
    pub duration: f64,
    pub noise: NoiseSpec,
    pub noise_on: bool,
    pub translational: TranslationalEsoGains,
    pub rotational: RotationalEsoGains,
    pub baselines: bool,
    pub reject: bool,
    pub disturbance: DisturbanceProfile,
    pub params: RigidBodyParams,
    pub controller: ControllerGains,
    pub initial: RigidBodyState,
    pub offsets: ObserverOffsets,
    pub leso: LesoGains,
    pub fxtsdo_force: FxtsdoGains,
    pub fxtsdo_torque: FxtsdoGains,
}

impl SimConfig {
    pub fn for_scenario(scenario: ReferenceKind, noise_on: bool) -> Self {
        Self { scenario, noise_on, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(ConfigError::BadStep(self.h));
        }
        if !(self.duration >= self.h) {
            return Err(ConfigError::BadDuration { duration: self.duration, h: self.h });
        }
        validate_gains_t(&self.translational)?;
        validate_gains_a(&self.rotational)?;
        Ok(())
    }

    /// The noise model actually applied (all PSDs zero when noise is off).
    pub fn effective_noise(&self) -> NoiseSpec {
        if self.noise_on { self.noise } else { NoiseSpec::off(self.noise.seed) }
    }

    pub fn noise_label(&self) -> &'static str {
        if self.noise_on { "noisy" } else { "clean" }
    }

    pub fn run_name(&self) -> String {
        format!("{}_{}", self.scenario.name(), self.noise_label())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        ConfigFile::default().build().expect("default configuration is valid")
    }
}

/// Flat key/value file form of [`SimConfig`]. Missing keys take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ReferenceKind,
    pub h: f64,
    pub duration: f64,
    pub noise: bool,
    pub seed: u64,
    pub psd_b: f64,
    pub psd_v: f64,
    pub psd_r: f64,
    pub psd_omega: f64,
    pub baselines: bool,
    pub reject: bool,

    pub p: f64,
    pub kt1: f64,
    pub kt2: f64,
    pub kt3: f64,
    pub kappa_t: f64,
    /// Defaults to half the admissible upper bound.
    pub mu_t: Option<f64>,
    pub ka1: f64,
    pub ka2: f64,
    pub ka3: f64,
    pub kappa_a: f64,
    pub mu_a: Option<f64>,
    pub morse_k: [f64; 3],

    pub mass: f64,
    pub inertia: [f64; 3],
    pub grav: f64,
    pub b0: [f64; 3],
    pub v0: [f64; 3],
    pub rotvec0: [f64; 3],
    pub omega0: [f64; 3],

    pub force_times: Vec<f64>,
    pub force_values: Vec<[f64; 3]>,
    pub torque_times: Vec<f64>,
    pub torque_values: Vec<[f64; 3]>,

    pub kx: f64,
    pub kv: f64,
    pub kr: f64,
    pub komega: f64,
    pub max_approach_speed: f64,
    pub max_feedback_accel: f64,
    pub min_lift: f64,
    pub max_thrust: Option<f64>,
    pub max_torque: Option<f64>,

    pub leso_omega_t: f64,
    pub leso_omega_a: f64,
    pub fxtsdo_force: [f64; 6],
    pub fxtsdo_torque: [f64; 6],
}

impl Default for ConfigFile {
    fn default() -> Self {
        let noise = NoiseSpec::default();
        let ctrl = ControllerGains::default();
        let leso = LesoGains::default();
        let fx = |g: FxtsdoGains| [g.l1, g.l2, g.l3, g.l4, g.a1, g.a2];
        let d = DisturbanceProfile::default();
        let split = |s: &[(f64, Vec3)]| -> (Vec<f64>, Vec<[f64; 3]>) {
            s.iter().map(|(t, v)| (*t, [v.x, v.y, v.z])).unzip()
        };
        let (force_times, force_values) = split(d.force_schedule());
        let (torque_times, torque_values) = split(d.torque_schedule());
        let init = RigidBodyState::initial();
        let arr = |v: &Vec3| [v.x, v.y, v.z];
        Self {
            scenario: ReferenceKind::Hovering,
            h: 1e-3,
            duration: 30.0,
            noise: false,
            seed: 1,
            psd_b: noise.psd_b,
            psd_v: noise.psd_v,
            psd_r: noise.psd_r,
            psd_omega: noise.psd_omega,
            baselines: true,
            reject: true,
            p: 1.2,
            kt1: 3.0,
            kt2: 2.0,
            kt3: 6.0,
            kappa_t: 0.8,
            mu_t: None,
            ka1: 3.0,
            ka2: 2.0,
            ka3: 4.0,
            kappa_a: 0.6,
            mu_a: None,
            morse_k: MorseWeights::default().values(),
            mass: 4.34,
            inertia: [0.0820, 0.0845, 0.1377],
            grav: 9.81,
            b0: arr(&init.pose.position),
            v0: arr(&init.v),
            rotvec0: [0.0; 3],
            omega0: arr(&init.omega),
            force_times,
            force_values,
            torque_times,
            torque_values,
            kx: ctrl.kx,
            kv: ctrl.kv,
            kr: ctrl.kr,
            komega: ctrl.komega,
            max_approach_speed: ctrl.max_approach_speed,
            max_feedback_accel: ctrl.max_feedback_accel,
            min_lift: ctrl.min_lift,
            max_thrust: ctrl.max_thrust,
            max_torque: ctrl.max_torque,
            leso_omega_t: leso.omega_t,
            leso_omega_a: leso.omega_a,
            fxtsdo_force: fx(FxtsdoGains::force()),
            fxtsdo_torque: fx(FxtsdoGains::torque()),
        }
    }
}

fn schedule(
    name: &'static str,
    times: &[f64],
    values: &[[f64; 3]],
) -> Result<Vec<(f64, Vec3)>, ConfigError> {
    if times.len() != values.len() {
        return Err(ConfigError::ScheduleShape(name));
    }
    Ok(times.iter().zip(values).map(|(t, v)| (*t, Vec3::from(*v))).collect())
}

fn fxtsdo(a: [f64; 6]) -> FxtsdoGains {
    FxtsdoGains { l1: a[0], l2: a[1], l3: a[2], l4: a[3], a1: a[4], a2: a[5] }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.to_owned(), source })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn build(&self) -> Result<SimConfig, ConfigError> {
        let k = MorseWeights::new(self.morse_k[0], self.morse_k[1], self.morse_k[2])?;
        let mut translational =
            TranslationalEsoGains::new(self.kt1, self.kt2, self.kt3, self.kappa_t, self.p)?;
        if let Some(mu) = self.mu_t {
            translational = translational.with_mu(mu);
        }
        let mut rotational =
            RotationalEsoGains::new(self.ka1, self.ka2, self.ka3, self.kappa_a, self.p, k)?;
        if let Some(mu) = self.mu_a {
            rotational = rotational.with_mu(mu);
        }
        let params = RigidBodyParams::new(
            self.mass,
            Mat3::from_diagonal(&Vec3::from(self.inertia)),
            self.grav,
        )?;
        let disturbance = DisturbanceProfile::new(
            schedule("force", &self.force_times, &self.force_values)?,
            schedule("torque", &self.torque_times, &self.torque_values)?,
        )?;
        let rotvec = Vec3::from(self.rotvec0);
        let rotation = if rotvec == Vec3::zeros() { Rotation::identity() } else { exp_so3(&rotvec) };
        let cfg = SimConfig {
            scenario: self.scenario,
            h: self.h,
            duration: self.duration,
            noise: NoiseSpec::new(self.psd_b, self.psd_v, self.psd_r, self.psd_omega, self.seed)?,
            noise_on: self.noise,
            translational,
            rotational,
            baselines: self.baselines,
            reject: self.reject,
            disturbance,
            params,
            controller: ControllerGains {
                kx: self.kx,
                kv: self.kv,
                kr: self.kr,
                komega: self.komega,
                max_approach_speed: self.max_approach_speed,
                max_feedback_accel: self.max_feedback_accel,
                min_lift: self.min_lift,
                max_thrust: self.max_thrust,
                max_torque: self.max_torque,
            },
            initial: RigidBodyState {
                pose: Pose { rotation, position: Vec3::from(self.b0) },
                v: Vec3::from(self.v0),
                omega: Vec3::from(self.omega0),
            },
            offsets: ObserverOffsets::default(),
            leso: LesoGains { omega_t: self.leso_omega_t, omega_a: self.leso_omega_a },
            fxtsdo_force: fxtsdo(self.fxtsdo_force),
            fxtsdo_torque: fxtsdo(self.fxtsdo_torque),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
