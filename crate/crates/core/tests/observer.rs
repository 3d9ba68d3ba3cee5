use approx::assert_relative_eq;
use ffts_eso::fftsd::phi1;
use ffts_eso::geom::{exp_so3, hat, morse_value, s_k, Mat3, MorseWeights, Rotation, Vec3};
use ffts_eso::observer::*;
use ffts_eso::plant::{plant_rhs_with, RigidBodyParams, RigidBodyState, ReferenceKind};
use ffts_eso::sim::{run_scenario, ObserverOffsets, SimConfig};
use ffts_eso::geom::Pose;
use ffts_eso::plant::DisturbanceProfile;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut impl Rng, scale: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.random_range(-scale..scale))
}

fn random_rotation(rng: &mut impl Rng, max_angle: f64) -> Rotation {
    let axis = random_vec(rng, 1.0).normalize();
    exp_so3(&(axis * rng.random_range(0.0..max_angle)))
}

#[test]
fn psi_examples() {
    let gt = TranslationalEsoGains::default();
    assert_eq!(psi_t(&Vec3::zeros(), &Vec3::zeros(), &gt), Vec3::zeros());
    let e_v = Vec3::new(0.3, -1.0, 2.0);
    assert_eq!(psi_t(&Vec3::zeros(), &e_v, &gt), e_v);
    // (1 + 1) per unit error with κ = 0.8 and ‖e‖ = 1.
    assert_relative_eq!(psi_t(&Vec3::x(), &Vec3::zeros(), &gt), Vec3::x() * 1.6, epsilon = 1e-15);
    let ga = RotationalEsoGains::default();
    assert_relative_eq!(psi_a(&Vec3::y(), &Vec3::zeros(), &ga), Vec3::y() * 1.2, epsilon = 1e-15);
}

#[test]
fn e_w_example() {
    let k = MorseWeights::default();
    // s_K(I) = 0 and with E = I: Σ Kᵢ eᵢ × (ω × eᵢ) = (tr K·I − K)ω.
    let w = e_w(&Rotation::identity(), &Vec3::new(0.0, 0.0, 1.0), &k);
    assert_relative_eq!(w, Vec3::new(0.0, 0.0, 5.0), epsilon = 1e-15);
}

#[test]
fn e_w_is_rate_of_s_k() {
    let k = MorseWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let e = random_rotation(&mut rng, 3.0);
        let w = random_vec(&mut rng, 2.0);
        let d = 1e-6;
        let fd = (s_k(&e.compose(&exp_so3(&(w * d))), &k) - s_k(&e.compose(&exp_so3(&(w * -d))), &k)) / (2.0 * d);
        assert!((fd - e_w(&e, &w, &k)).norm() <= 1e-8, "{fd} vs {}", e_w(&e, &w, &k));
    }
}

struct TranslationalCase {
    state: RigidBodyState,
    est: TranslationalEsoState,
    phi_d: Vec3,
    thrust: f64,
}

fn translational_case(rng: &mut impl Rng) -> TranslationalCase {
    TranslationalCase {
        state: RigidBodyState {
            pose: Pose { rotation: random_rotation(rng, 1.0), position: random_vec(rng, 2.0) },
            v: random_vec(rng, 2.0),
            omega: random_vec(rng, 1.0),
        },
        est: TranslationalEsoState {
            b_hat: random_vec(rng, 2.0),
            v_hat: random_vec(rng, 2.0),
            phi_hat: random_vec(rng, 5.0),
        },
        phi_d: random_vec(rng, 5.0),
        thrust: rng.random_range(20.0..60.0),
    }
}

#[test]
fn translational_error_dynamics() {
    let g = TranslationalEsoGains::default();
    let p = RigidBodyParams::default();
    let m = p.mass();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let c = translational_case(&mut rng);
        let plant = plant_rhs_with(&c.state, c.thrust, &Vec3::zeros(), &c.phi_d, &Vec3::zeros(), &p);
        let sigma = |s: &RigidBodyState, e: &TranslationalEsoState| {
            translational_eso_rhs(e, &s.pose.position, &s.v, &s.pose.rotation, c.thrust, &g, m, p.grav())
        };
        let obs = sigma(&c.state, &c.est);
        let e_b = c.state.pose.position - c.est.b_hat;
        let e_v = c.state.v - c.est.v_hat;
        let e_phi = c.phi_d - c.est.phi_hat;
        assert_relative_eq!(plant.b - obs.b_hat, e_v, epsilon = 1e-12);
        assert!((-obs.phi_hat - (-g.feedback().phi2(&psi_t(&e_b, &e_v, &g)) * (m * g.kt2))).norm() <= 1e-10);

        // ψ̇_t = −k_t1·φ₁(ψ_t) + e_φ/m, checked by a central difference in time.
        let d = 1e-6;
        let psi_at = |sign: f64| {
            let eb = e_b + (plant.b - obs.b_hat) * (sign * d);
            let ev = e_v + (plant.v - obs.v_hat) * (sign * d);
            psi_t(&eb, &ev, &g)
        };
        let psi_dot = (psi_at(1.0) - psi_at(-1.0)) / (2.0 * d);
        let psi = psi_t(&e_b, &e_v, &g);
        let expected = -phi1(&psi, &g.differentiator()) * g.kt1 + e_phi / m;
        assert!((psi_dot - expected).norm() <= 1e-5 * (1.0 + expected.norm()), "{psi_dot} vs {expected}");
    }
}

#[test]
fn rotational_error_dynamics() {
    let g = RotationalEsoGains::default();
    let p = RigidBodyParams::default();
    let (j, j_inv) = (*p.inertia(), *p.inertia_inv());
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..50 {
        let r = random_rotation(&mut rng, 3.0);
        let omega = random_vec(&mut rng, 2.0);
        let tau_d = random_vec(&mut rng, 0.5);
        let tau = random_vec(&mut rng, 0.5);
        let est = RotationalEsoState {
            r_hat: r.compose(&random_rotation(&mut rng, 1.2)),
            omega_hat: random_vec(&mut rng, 2.0),
            tau_hat: random_vec(&mut rng, 0.5),
        };
        let state = RigidBodyState { pose: Pose { rotation: r, position: Vec3::zeros() }, v: Vec3::zeros(), omega };
        let plant = plant_rhs_with(&state, 0.0, &tau, &Vec3::zeros(), &tau_d, &p);
        let obs = rotational_eso_rhs(&est, &r, &omega, &tau, &g, &j, &j_inv);

        let errors = |sign: f64, d: f64| {
            let r = r.compose(&exp_so3(&(omega * (sign * d))));
            let omega = omega + plant.omega * (sign * d);
            let r_hat = est.r_hat.compose(&exp_so3(&(est.omega_hat * (sign * d))));
            let omega_hat = est.omega_hat + obs.omega_hat * (sign * d);
            let er = Rotation::from_matrix_unchecked(r_hat.matrix().transpose() * r.matrix());
            let e_omega = omega - er.matrix().transpose() * omega_hat;
            psi_a(&s_k(&er, &g.k), &e_omega, &g)
        };
        let d = 1e-6;
        let psi_dot = (errors(1.0, d) - errors(-1.0, d)) / (2.0 * d);
        let psi = errors(0.0, 0.0);
        let e_tau = tau_d - est.tau_hat;
        let expected = -phi1(&psi, &g.differentiator()) * g.ka1 + j_inv * e_tau;
        assert!(
            (psi_dot - expected).norm() <= 1e-5 * (1.0 + expected.norm()),
            "trial {trial}: {psi_dot} vs {expected}"
        );
        assert_relative_eq!(obs.r_hat, est.r_hat.matrix() * hat(&est.omega_hat), epsilon = 1e-14);
        assert!((obs.tau_hat - j * g.feedback().phi2(&psi) * g.ka2).norm() <= 1e-10);
    }
}

#[test]
fn zero_error_is_an_equilibrium() {
    let gt = TranslationalEsoGains::default();
    let ga = RotationalEsoGains::default();
    let p = RigidBodyParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let c = translational_case(&mut rng);
    let est = TranslationalEsoState { b_hat: c.state.pose.position, v_hat: c.state.v, phi_hat: c.phi_d };
    let plant = plant_rhs_with(&c.state, c.thrust, &Vec3::zeros(), &c.phi_d, &Vec3::zeros(), &p);
    let s = &c.state;
    let obs = translational_eso_rhs(&est, &s.pose.position, &s.v, &s.pose.rotation, c.thrust, &gt, p.mass(), p.grav());
    assert_relative_eq!(obs.v_hat, plant.v, epsilon = 1e-12);
    assert_eq!(obs.phi_hat, Vec3::zeros());

    // An exactly orthogonal attitude: roundoff in R̂ᵀR would be amplified by the fractional powers.
    let s = &RigidBodyState { pose: Pose { rotation: Rotation::from_diagonal([-1.0, -1.0, 1.0]).unwrap(), ..s.pose }, ..*s };
    let tau_d = Vec3::new(0.1, -0.2, 0.05);
    let est = RotationalEsoState { r_hat: *s.rotation(), omega_hat: s.omega, tau_hat: tau_d };
    let plant = plant_rhs_with(s, 0.0, &Vec3::zeros(), &Vec3::zeros(), &tau_d, &p);
    let obs = rotational_eso_rhs(&est, s.rotation(), &s.omega, &Vec3::zeros(), &ga, p.inertia(), p.inertia_inv());
    assert_relative_eq!(obs.omega_hat, plant.omega, epsilon = 1e-12);
    assert_eq!(obs.tau_hat, Vec3::zeros());
}

#[test]
fn translational_observer_is_equivariant() {
    let g = TranslationalEsoGains::default();
    let p = RigidBodyParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let c = translational_case(&mut rng);
    let shift = Vec3::new(4.0, -8.0, 2.0);
    let s = &c.state;
    let base = translational_eso_rhs(&c.est, &s.pose.position, &s.v, s.rotation(), c.thrust, &g, p.mass(), p.grav());
    let moved_est = TranslationalEsoState { b_hat: c.est.b_hat + shift, ..c.est };
    let moved = translational_eso_rhs(&moved_est, &(s.pose.position + shift), &s.v, s.rotation(), c.thrust, &g, p.mass(), p.grav());
    assert_eq!(base, moved);
}

#[test]
fn gain_validation_errors() {
    let bad = TranslationalEsoGains::new(3.0, 2.0, 6.0, 0.4, 1.2).unwrap();
    match validate_gains_t(&bad) {
        Err(ObserverError::InvalidGains(v)) => {
            assert!(v.iter().any(|x| matches!(x, GainViolation::KappaTooSmall { .. })))
        }
        other => panic!("expected a gain violation, got {other:?}"),
    }
    let bad = RotationalEsoGains::new(3.0, 2.0, 4.0, 0.5, 1.2, MorseWeights::default()).unwrap();
    assert!(validate_gains_a(&bad).is_err());
    let g = TranslationalEsoGains::default();
    let over = g.with_mu(1.01 * g.mu_upper());
    match validate_gains_t(&over) {
        Err(ObserverError::InvalidGains(v)) => {
            assert!(v.iter().any(|x| matches!(x, GainViolation::MuOutsideWindow { .. })))
        }
        other => panic!("expected a gain violation, got {other:?}"),
    }
    let g = RotationalEsoGains::default();
    assert!(validate_gains_a(&g.with_mu(1.01 * g.mu_upper())).is_err());
    assert!(validate_gains_a(&g.with_mu(0.0)).is_err());
}

#[test]
fn default_gain_constants() {
    let t = validate_gains_t(&TranslationalEsoGains::default()).unwrap();
    let a = validate_gains_a(&RotationalEsoGains::default()).unwrap();
    let lmax = 0.75 + 0.3125f64.sqrt();
    let lmin = 0.75 - 0.3125f64.sqrt();
    assert_relative_eq!(t.mu_upper, 216.0 * lmin / lmax, max_relative = 1e-12);
    assert_relative_eq!(a.mu_upper, 128.0 * lmin / lmax, max_relative = 1e-12);
    assert_relative_eq!(t.big_gamma1, 0.6, max_relative = 1e-12);
    assert_relative_eq!(a.big_gamma1, 0.1, max_relative = 1e-12);
    assert_relative_eq!(t.big_gamma2, t.gamma2, max_relative = 1e-12);
    assert_relative_eq!(a.big_gamma2, a.gamma2, max_relative = 1e-12);
}

#[test]
fn monitors_examples() {
    let gt = TranslationalEsoGains::default();
    let ga = RotationalEsoGains::default();
    let p = RigidBodyParams::default();
    let zero = EsoErrors::default();
    assert_eq!(lyapunov_monitor_t(&zero, &gt, p.mass()), 0.0);
    assert_eq!(lyapunov_monitor_a(&zero, &ga, p.inertia_inv()), 0.0);
    // Only e_b nonzero along x with unit norm: ψ = 1.6e₁.
    let e = EsoErrors { e_b: Vec3::x(), ..zero };
    let z1 = gt.feedback().phi1(&(Vec3::x() * 1.6));
    let expected = gt.certificate.p[(0, 0)] * z1.norm_squared() + gt.mu_t;
    assert_relative_eq!(lyapunov_monitor_t(&e, &gt, p.mass()), expected, max_relative = 1e-12);
    let flipped = EsoErrors { e_r_mat: Rotation::from_diagonal([1.0, -1.0, -1.0]).unwrap(), ..zero };
    assert_relative_eq!(lyapunov_monitor_a(&flipped, &ga, p.inertia_inv()), 6.0 * ga.mu_a, max_relative = 1e-12);
}

#[test]
fn decrease_bound_examples() {
    let p = ffts_eso::fftsd::HolderExponent::new(1.2).unwrap();
    assert_eq!(decrease_bound(0.6, 0.4, p, 0.0), 0.0);
    assert_relative_eq!(decrease_bound(0.6, 0.4, p, 1.0), -1.0, epsilon = 1e-15);
}

fn rotational_only(e0: Rotation, tau_hat: Vec3) -> (RotationalEsoState, f64) {
    let g = RotationalEsoGains::default();
    let p = RigidBodyParams::default();
    let (j, j_inv) = (*p.inertia(), *p.inertia_inv());
    let tau_d = Vec3::new(0.05, -0.03, 0.02);
    let r = Rotation::identity();
    let mut est = RotationalEsoState { r_hat: e0.transpose(), omega_hat: Vec3::zeros(), tau_hat };
    let h = 1e-3;
    for _ in 0..10_000 {
        // The plant spins freely at rest: R fixed, Ω = 0 needs τ = −τ_D.
        let rhs = |e: &RotationalEsoState| rotational_eso_rhs(e, &r, &Vec3::zeros(), &-tau_d, &g, &j, &j_inv);
        let k1 = rhs(&est);
        let mut pred = est.advance(&k1, h);
        pred.project();
        let k2 = rhs(&pred);
        est = est.advance(&(k1 + k2), 0.5 * h);
        est.project();
    }
    let er = Rotation::from_matrix_unchecked(est.r_hat.matrix().transpose());
    (est, morse_value(&er, &g.k))
}

#[test]
fn attitude_converges_from_random_errors_in_s() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut tried = 0;
    while tried < 100 {
        let e0 = random_rotation(&mut rng, 3.1);
        if !ffts_eso::geom::in_set_s(&e0) {
            continue;
        }
        tried += 1;
        let (_, v) = rotational_only(e0, Vec3::zeros());
        assert!(v <= 1e-6, "morse value {v} after 10 s from {e0:?}");
    }
}

#[test]
fn critical_points_are_stationary() {
    let g = RotationalEsoGains::default();
    let p = RigidBodyParams::default();
    for d in [[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
        let c = Rotation::from_diagonal(d).unwrap();
        let est = RotationalEsoState { r_hat: c, omega_hat: Vec3::zeros(), tau_hat: Vec3::zeros() };
        let rate = rotational_eso_rhs(&est, &Rotation::identity(), &Vec3::zeros(), &Vec3::zeros(), &g, p.inertia(), p.inertia_inv());
        assert_eq!(rate.omega_hat, Vec3::zeros());
        assert_eq!(rate.tau_hat, Vec3::zeros());
        assert_eq!(rate.r_hat, Mat3::zeros());
    }
}

#[test]
fn estimates_recover_after_a_disturbance_step() {
    let mut cfg = SimConfig::for_scenario(ReferenceKind::Hovering, false);
    cfg.duration = 8.0;
    cfg.baselines = false;
    cfg.disturbance = DisturbanceProfile::new(
        vec![(0.0, Vec3::zeros()), (2.0, Vec3::new(3.0, -2.0, 1.0))],
        vec![(0.0, Vec3::zeros()), (2.0, Vec3::new(0.1, 0.2, -0.1))],
    )
    .unwrap();
    cfg.offsets = ObserverOffsets { b: Vec3::new(0.2, 0.0, 0.0), ..Default::default() };
    let rec = run_scenario(&cfg).unwrap();
    let last = rec.rows.last().unwrap();
    assert!(last.e_phi.norm() <= 1e-3, "{}", last.e_phi.norm());
    assert!(last.e_tau.norm() <= 1e-3, "{}", last.e_tau.norm());
    let jump = rec.rows.iter().find(|r| r.t > 2.0).unwrap();
    assert!(jump.e_phi.norm() > 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monitors_are_nonnegative(
        eb in prop::array::uniform3(-2.0f64..2.0),
        ev in prop::array::uniform3(-2.0f64..2.0),
        ephi in prop::array::uniform3(-5.0f64..5.0),
        rv in prop::array::uniform3(-1.5f64..1.5),
    ) {
        let e = EsoErrors {
            e_b: Vec3::from(eb),
            e_v: Vec3::from(ev),
            e_phi: Vec3::from(ephi),
            e_r_mat: exp_so3(&Vec3::from(rv)),
            e_omega: Vec3::from(ev),
            e_tau: Vec3::from(ephi) * 0.1,
        };
        let p = RigidBodyParams::default();
        prop_assert!(lyapunov_monitor_t(&e, &TranslationalEsoGains::default(), p.mass()) >= 0.0);
        prop_assert!(lyapunov_monitor_a(&e, &RotationalEsoGains::default(), p.inertia_inv()) >= 0.0);
    }
}
