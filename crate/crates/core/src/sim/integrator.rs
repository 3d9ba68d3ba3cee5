//! Fixed-step Heun (explicit trapezoid) integration on flat representations
//! with an end-of-step projection hook for manifold-valued components.

use crate::fftsd::DiffState;
use crate::observer::{RotationalEsoRate, RotationalEsoState, TranslationalEsoState};
use crate::plant::{RigidBodyRate, RigidBodyState};
use std::ops::Add;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum IntegrationError {
    #[error("state became non-finite while stepping from t = {t}")]
    NonFinite { t: f64 },
}

/// A state that can be advanced by an Euler increment of its rate.
pub trait Integrable: Sized {
    type Rate: Add<Output = Self::Rate> + Copy;

    /// `self + h·d` on the flat representation.
    fn advance(&self, d: &Self::Rate, h: f64) -> Self;

    /// Maps the state back onto its manifold after a full step.
    fn project(&mut self) {}

    fn is_finite(&self) -> bool;
}

/// `k₁ = f(t, x)`, `k₂ = f(t + h, P(x + h·k₁))`, `x⁺ = P(x + (h/2)(k₁ + k₂))`.
///
/// The predictor is projected as well, so attitude errors formed inside the
/// right-hand side never see the `O(h²)` non-orthogonality of a raw Euler step.
pub fn heun_step<S, F>(mut rhs: F, s: &S, t: f64, h: f64) -> Result<S, IntegrationError>
where
    S: Integrable,
    F: FnMut(f64, &S) -> S::Rate,
{
    let k1 = rhs(t, s);
    let mut predictor = s.advance(&k1, h);
    predictor.project();
    let k2 = rhs(t + h, &predictor);
    let mut next = s.advance(&(k1 + k2), 0.5 * h);
    next.project();
    if next.is_finite() {
        Ok(next)
    } else {
        Err(IntegrationError::NonFinite { t })
    }
}

/// Integrates from `t0` over `n` steps, returning the final state.
pub fn integrate<S, F>(mut rhs: F, s0: S, t0: f64, h: f64, n: usize) -> Result<S, IntegrationError>
where
    S: Integrable,
    F: FnMut(f64, &S) -> S::Rate,
{
    (0..n).try_fold(s0, |s, k| heun_step(&mut rhs, &s, t0 + k as f64 * h, h))
}

impl Integrable for f64 {
    type Rate = f64;
    fn advance(&self, d: &f64, h: f64) -> f64 {
        self + h * d
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl<const N: usize> Integrable for DiffState<N> {
    type Rate = DiffState<N>;
    fn advance(&self, d: &Self, h: f64) -> Self {
        DiffState::new(self.e1 + d.e1 * h, self.e2 + d.e2 * h)
    }
    fn is_finite(&self) -> bool {
        self.e1.iter().chain(self.e2.iter()).all(|x| x.is_finite())
    }
}

impl Integrable for RigidBodyState {
    type Rate = RigidBodyRate;
    fn advance(&self, d: &RigidBodyRate, h: f64) -> Self {
        RigidBodyState::advance(self, d, h)
    }
    fn project(&mut self) {
        RigidBodyState::project(self)
    }
    fn is_finite(&self) -> bool {
        RigidBodyState::is_finite(self)
    }
}

impl Integrable for TranslationalEsoState {
    type Rate = TranslationalEsoState;
    fn advance(&self, d: &Self, h: f64) -> Self {
        TranslationalEsoState::advance(self, d, h)
    }
    fn is_finite(&self) -> bool {
        TranslationalEsoState::is_finite(self)
    }
}

impl Integrable for RotationalEsoState {
    type Rate = RotationalEsoRate;
    fn advance(&self, d: &RotationalEsoRate, h: f64) -> Self {
        RotationalEsoState::advance(self, d, h)
    }
    fn project(&mut self) {
        RotationalEsoState::project(self)
    }
    fn is_finite(&self) -> bool {
        RotationalEsoState::is_finite(self)
    }
}

/// Plant and both observers stepped together on one clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedLoopState {
    pub plant: RigidBodyState,
    pub translational: TranslationalEsoState,
    pub rotational: RotationalEsoState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedLoopRate {
    pub plant: RigidBodyRate,
    pub translational: TranslationalEsoState,
    pub rotational: RotationalEsoRate,
}

impl Add for ClosedLoopRate {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            plant: self.plant + o.plant,
            translational: self.translational + o.translational,
            rotational: self.rotational + o.rotational,
        }
    }
}

impl Integrable for ClosedLoopState {
    type Rate = ClosedLoopRate;
    fn advance(&self, d: &ClosedLoopRate, h: f64) -> Self {
        Self {
            plant: self.plant.advance(&d.plant, h),
            translational: self.translational.advance(&d.translational, h),
            rotational: self.rotational.advance(&d.rotational, h),
        }
    }
    fn project(&mut self) {
        self.plant.project();
        self.rotational.project();
    }
    fn is_finite(&self) -> bool {
        self.plant.is_finite() && self.translational.is_finite() && self.rotational.is_finite()
    }
}

/// Number of samples `⌊T/h⌋ + 1`, robust to `T/h` landing just below an integer.
pub fn sample_count(duration: f64, h: f64) -> usize {
    let ratio = duration / h;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { ratio.floor() };
    steps as usize + 1
}
