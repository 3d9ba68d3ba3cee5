//! Summary statistics over recorded runs.

use super::record::{SimRecord, SimRow};
use crate::fftsd::HolderExponent;
use crate::geom::Vec3;
use crate::observer::decrease_bound;
use serde::Serialize;

/// Maximum of `f` over samples with `t ∈ [t0, t1)`; `None` when the window is empty.
pub fn window_max(rec: &SimRecord, t0: f64, t1: f64, f: impl Fn(&SimRow) -> f64) -> Option<f64> {
    rec.rows
        .iter()
        .filter(|r| r.t >= t0 && r.t < t1)
        .map(f)
        .fold(None, |m, x| Some(m.map_or(x, |m: f64| if x.is_nan() || x > m { x } else { m })))
}

/// Pooled per-window variance `mean ‖e − ē‖²` of a vector series.
pub fn pooled_variance(rec: &SimRecord, windows: &[(f64, f64)], f: impl Fn(&SimRow) -> Vec3) -> f64 {
    let (mut total, mut count) = (0.0, 0usize);
    for &(t0, t1) in windows {
        let xs: Vec<Vec3> = rec.rows.iter().filter(|r| r.t >= t0 && r.t < t1).map(&f).collect();
        if xs.is_empty() {
            continue;
        }
        let mean = xs.iter().sum::<Vec3>() / xs.len() as f64;
        total += xs.iter().map(|x| (x - mean).norm_squared()).sum::<f64>();
        count += xs.len();
    }
    if count == 0 { f64::NAN } else { total / count as f64 }
}

/// Outcome of checking sampled rates of a Lyapunov monitor against
/// `V̇ ≤ −Γ₁V − Γ₂V^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecreaseReport {
    pub steps: usize,
    pub satisfied: usize,
    /// Largest excess of the sampled rate over bound plus tolerance.
    pub worst_excess: f64,
}

impl DecreaseReport {
    pub fn fraction(&self) -> f64 {
        if self.steps == 0 { 1.0 } else { self.satisfied as f64 / self.steps as f64 }
    }
}

/// Tolerance `abs + rel·V` on the sampled-rate condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecreaseTolerance {
    pub abs: f64,
    pub rel: f64,
}

/// Compares forward differences `(V_{k+1} − V_k)/h` with the bound evaluated at
/// the right endpoint `V_{k+1}`. Pairs that straddle an instant in `skip`
/// (disturbance switches) are not counted.
pub fn decrease_check(
    times: &[f64],
    values: &[f64],
    big_gamma1: f64,
    big_gamma2: f64,
    p: HolderExponent,
    tol: DecreaseTolerance,
    skip: &[f64],
) -> DecreaseReport {
    let mut rep = DecreaseReport { steps: 0, satisfied: 0, worst_excess: f64::NEG_INFINITY };
    for k in 0..values.len().saturating_sub(1) {
        let (t0, t1) = (times[k], times[k + 1]);
        if skip.iter().any(|s| *s > t0 && *s <= t1) {
            continue;
        }
        let rate = (values[k + 1] - values[k]) / (t1 - t0);
        let v = values[k + 1];
        let excess = rate - decrease_bound(big_gamma1, big_gamma2, p, v) - (tol.abs + tol.rel * v);
        rep.steps += 1;
        if excess <= 0.0 {
            rep.satisfied += 1;
        }
        rep.worst_excess = rep.worst_excess.max(excess);
    }
    rep
}

/// Headline numbers for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub noise: String,
    pub seed: u64,
    pub samples: usize,
    pub diverged: bool,
    pub max_e_phi: f64,
    pub max_e_tau: f64,
    pub terminal_e_phi: f64,
    pub terminal_e_tau: f64,
    /// Maxima over `t ≥ 5 s`.
    pub settled_max_e_phi: f64,
    pub settled_max_e_tau: f64,
    pub baselines: Option<BaselineSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineSummary {
    pub leso_max_e_phi: f64,
    pub leso_max_e_tau: f64,
    pub fxtsdo_max_e_phi: f64,
    pub fxtsdo_max_e_tau: f64,
    pub leso_euler_singularity: bool,
    pub leso_diverged: bool,
    pub fxtsdo_diverged: bool,
}

fn max_norm(rec: &SimRecord, f: impl Fn(&SimRow) -> f64) -> f64 {
    window_max(rec, f64::NEG_INFINITY, f64::INFINITY, f).unwrap_or(f64::NAN)
}

pub fn summarize(rec: &SimRecord, scenario: &str, noise: &str, seed: u64) -> RunSummary {
    let last = rec.rows.last();
    let baselines = rec.with_baselines.then(|| {
        let b = |r: &SimRow| r.baselines.unwrap_or_default();
        BaselineSummary {
            leso_max_e_phi: max_norm(rec, |r| b(r).leso_phi.norm()),
            leso_max_e_tau: max_norm(rec, |r| b(r).leso_tau.norm()),
            fxtsdo_max_e_phi: max_norm(rec, |r| b(r).fxtsdo_phi.norm()),
            fxtsdo_max_e_tau: max_norm(rec, |r| b(r).fxtsdo_tau.norm()),
            leso_euler_singularity: rec.rows.iter().any(|r| b(r).leso_euler_singularity),
            leso_diverged: rec.rows.iter().any(|r| b(r).leso_diverged),
            fxtsdo_diverged: rec.rows.iter().any(|r| b(r).fxtsdo_diverged),
        }
    });
    RunSummary {
        scenario: scenario.to_owned(),
        noise: noise.to_owned(),
        seed,
        samples: rec.rows.len(),
        diverged: rec.diverged(),
        max_e_phi: max_norm(rec, |r| r.e_phi.norm()),
        max_e_tau: max_norm(rec, |r| r.e_tau.norm()),
        terminal_e_phi: last.map_or(f64::NAN, |r| r.e_phi.norm()),
        terminal_e_tau: last.map_or(f64::NAN, |r| r.e_tau.norm()),
        settled_max_e_phi: window_max(rec, 5.0, f64::INFINITY, |r| r.e_phi.norm()).unwrap_or(f64::NAN),
        settled_max_e_tau: window_max(rec, 5.0, f64::INFINITY, |r| r.e_tau.norm()).unwrap_or(f64::NAN),
        baselines,
    }
}
