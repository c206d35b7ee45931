//! Closed-form recomputation of the two-matrix ladder, independent of the library,
//! with the resulting values frozen.

use lyocert::certificates::{Certificate, RadiusConvention, TauVariant};
use lyocert::example::worked_example;

const N0: u64 = 11;
const N_THETA: u64 = 1056;
const TAU0: f64 = 0.9166666666666666;
const TAU_STAR: f64 = 0.06176835728613705;
const RHO_STAR: f64 = 0.0013166176656017549;
const K_SP: f64 = 1519.043874506961;
const R_STAR: f64 = 1.6457720820021935e-05;
const M_STAR: f64 = 22.77258872223978;
const CAUCHY1_HALF: f64 = 2767404.9124147715;
const CAUCHY2_EXAMPLE: f64 = 168152379219.36526;
const LN_K_STAR: f64 = 1898.9451717079273;

struct Oracle {
    ecc: f64,
    n0: u64,
    tau0: f64,
    n_theta: u64,
    tau_star: f64,
    rho_star: f64,
    k_sp: f64,
    r_star: f64,
    m_star: f64,
    ln_k_star: f64,
}

/// σ₁/σ₂ of a 2×2 matrix from the trace and determinant of AᵀA.
fn ecc2(a: [f64; 4]) -> f64 {
    let [p, q, r, s] = a;
    let t = p * p + q * q + r * r + s * s;
    let d = (p * s - q * r).powi(2);
    let disc = (t * t / 4.0 - d).sqrt();
    ((t / 2.0 + disc) / (t / 2.0 - disc)).sqrt()
}

fn oracle(theta: f64, gap: f64) -> Oracle {
    let (c, s) = ((std::f64::consts::PI / 3.0).cos(), (std::f64::consts::PI / 3.0).sin());
    // R diag(2, ½) Rᵀ
    let a2 = [2.0 * c * c + 0.5 * s * s, 1.5 * c * s, 1.5 * c * s, 2.0 * s * s + 0.5 * c * c];
    let ecc = ecc2([2.0, 0.0, 0.0, 0.5]).max(ecc2(a2));
    let n0 = (2.0 * 2f64.ln() / (theta * gap)).ceil() as u64;
    let tau0 = 1.0 - 2f64.ln() / (4.0 * (2.0 * ecc).ln());
    let c2 = ecc * ecc;
    let n_theta = n0 * ((3.0 * c2.ln() / (1.0 / tau0).ln()).ceil() as u64).max(1);
    let tau_star = tau0.powf(n_theta as f64 / (3.0 * n0 as f64));
    let rho_star = (1.0 - tau_star.powf(1.0 / n_theta as f64)) / 2.0;
    let k_sp = 4.0 / (1.0 - tau_star.powf(1.0 / n_theta as f64));
    let holder = 1.0 + ecc.powf(2.0 * theta);
    let r_star = 1.0 / (4.0 * 2.0 * k_sp * holder);
    let bracket = 2f64.ln() + ecc + 1.0;
    let m_star = 2.0 * k_sp * rho_star * bracket;
    let n = n_theta as f64;
    let r_norm = (2.0 + ecc.powf(2.0 * theta)).max(2.0);
    // 1/ρ* is negligible next to the second term
    let ln_k_star = n.ln() + (n - 1.0) * r_norm.ln() - ((1.0 - rho_star).powf(n) - tau_star).ln();
    Oracle { ecc, n0, tau0, n_theta, tau_star, rho_star, k_sp, r_star, m_star, ln_k_star }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn oracle_matches_frozen_values() {
    let o = oracle(0.5, 0.26);
    assert!(rel(o.ecc, 4.0) < 1e-12);
    assert_eq!((o.n0, o.n_theta), (N0, N_THETA));
    for (a, b) in [
        (o.tau0, TAU0),
        (o.tau_star, TAU_STAR),
        (o.rho_star, RHO_STAR),
        (o.k_sp, K_SP),
        (o.r_star, R_STAR),
        (o.m_star, M_STAR),
        (o.m_star / (o.r_star / 2.0), CAUCHY1_HALF),
        (2.0 * o.m_star / (o.r_star * o.r_star), CAUCHY2_EXAMPLE),
        (o.ln_k_star, LN_K_STAR),
    ] {
        assert!(rel(a, b) < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn library_matches_oracle() {
    let c = Certificate::new(&worked_example(), 0.5, 0.26, TauVariant::Pessimistic, false).unwrap();
    let l = &c.ladder;
    assert_eq!((l.n0, l.n_theta), (N0, N_THETA));
    assert_eq!(l.c2.round(), 16.0);
    assert!(rel(l.tau0, TAU0) < 1e-9);
    assert!(rel(l.tau_star, TAU_STAR) < 1e-9);
    assert!(rel(l.rho_star, RHO_STAR) < 1e-9);
    assert!(rel(c.resolvent.k_star_sp, K_SP) < 1e-9);
    assert!(rel(c.r_star.value(), R_STAR) < 1e-9);
    assert!(rel(c.m_star.value(), M_STAR) < 1e-9);
    assert!(rel(c.cauchy(&[1], RadiusConvention::HalfRadius).value(), CAUCHY1_HALF) < 1e-9);
    assert!(rel(c.cauchy(&[2], RadiusConvention::Example).value(), CAUCHY2_EXAMPLE) < 1e-9);
    assert!((c.resolvent.k_star.ln - LN_K_STAR).abs() < 1e-6);
}

#[test]
fn oracle_tracks_library_off_the_example() {
    for (theta, gap) in [(0.3, 0.5), (0.8, 0.1), (1.0, 1.3)] {
        let o = oracle(theta, gap);
        let c = Certificate::new(&worked_example(), theta, gap, TauVariant::Pessimistic, false).unwrap();
        assert_eq!((c.ladder.n0, c.ladder.n_theta), (o.n0, o.n_theta));
        assert!(rel(c.r_star.value(), o.r_star) < 1e-9);
        assert!(rel(c.m_star.value(), o.m_star) < 1e-9);
    }
}
