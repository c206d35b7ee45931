//! Randomized checks of the geometric inequalities the certificates rest on.
//! Each inequality is tested as stated; the only slack is a floating-point
//! allowance of 1e-10 relative plus 1e-14 absolute.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::c_geom;
use crate::error::Result;
use crate::geometry::{
    exterior_power, fs_distance, grassmann_action, grassmann_distance, log_norm_phi, op_norm, projective_action,
    sampling, singular_values, GrassmannPoint, MatrixTuple, ProjectivePoint,
};
use crate::transfer::{GridDynamics, ProjectiveGrid};

pub const REL_SLACK: f64 = 1e-10;
pub const ABS_SLACK: f64 = 1e-14;
/// Allowance for the interpolated T_i against the Hölder-norm bound.
pub const HOLDER_SLACK: f64 = 0.05;

const CHUNK: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LemmaResult {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// max lhs/rhs over samples with rhs > 0.
    pub max_ratio: f64,
    /// max (lhs − rhs).
    pub worst_excess: f64,
}

impl LemmaResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    n: usize,
    bad: usize,
    ratio: f64,
    excess: f64,
}

impl Tally {
    fn push(&mut self, lhs: f64, rhs: f64) {
        self.n += 1;
        if lhs > rhs * (1.0 + REL_SLACK) + ABS_SLACK || !lhs.is_finite() {
            self.bad += 1;
        }
        if rhs > 0.0 {
            self.ratio = self.ratio.max(lhs / rhs);
        }
        self.excess = if self.n == 1 { lhs - rhs } else { self.excess.max(lhs - rhs) };
    }

    fn merge(mut self, o: Tally) -> Tally {
        if o.n > 0 {
            self.excess = if self.n == 0 { o.excess } else { self.excess.max(o.excess) };
        }
        self.n += o.n;
        self.bad += o.bad;
        self.ratio = self.ratio.max(o.ratio);
        self
    }

    fn result(self, name: &str) -> LemmaResult {
        LemmaResult { name: name.into(), samples: self.n, violations: self.bad, max_ratio: self.ratio, worst_excess: self.excess }
    }
}

/// Runs `f` on `samples` draws split into seeded chunks; chunk c uses stream c.
fn run<F>(name: &str, samples: usize, seed: u64, f: F) -> LemmaResult
where
    F: Fn(&mut ChaCha12Rng, &mut Tally) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let t = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut t = Tally::default();
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                f(&mut rng, &mut t);
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge);
    t.result(name)
}

fn inv_norm(g: &DMatrix<f64>) -> f64 {
    1.0 / singular_values(g).last().copied().unwrap_or(0.0)
}

/// Unit-norm Gaussian direction in matrix space.
fn direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let e = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = op_norm(&e);
    e / n
}

/// g' = g + εE with ε log-uniform in [1e-3, 1e-1]·σ_min(g), so g' stays invertible.
fn local_perturbation<R: Rng + ?Sized>(rng: &mut R, g: &DMatrix<f64>) -> DMatrix<f64> {
    let eps = 10f64.powf(rng.random_range(-3.0..-1.0)) / inv_norm(g);
    g + direction(rng, g.nrows()) * eps
}

fn dims<R: Rng + ?Sized>(rng: &mut R) -> usize {
    rng.random_range(2..=4)
}

pub fn proj_contract(samples: usize, seed: u64) -> LemmaResult {
    run("proj_contract", samples, seed, |rng, t| {
        let d = dims(rng);
        let g = sampling::lemma_matrix(rng, d);
        let (u, v) = (sampling::projective_point(rng, d), sampling::projective_point(rng, d));
        let ecc = op_norm(&g) * inv_norm(&g);
        let lhs = fs_distance(&act(&g, &u), &act(&g, &v)).unwrap_or(f64::NAN);
        t.push(lhs, ecc * ecc * fs_distance(&u, &v).unwrap_or(f64::NAN));
    })
}

fn act(g: &DMatrix<f64>, v: &ProjectivePoint) -> ProjectivePoint {
    projective_action(g, v).expect("invertible sample")
}

/// |φ(g,v) − φ(g',v)| ≤ max(‖g⁻¹‖, ‖g'⁻¹‖)·‖g − g'‖; half the draws use an independent g',
/// half a local perturbation.
pub fn phi_lip_g(samples: usize, seed: u64) -> LemmaResult {
    run("phi_lip_g", samples, seed, |rng, t| {
        let d = dims(rng);
        let g = sampling::lemma_matrix(rng, d);
        let h = if rng.random_bool(0.5) { sampling::lemma_matrix(rng, d) } else { local_perturbation(rng, &g) };
        let v = sampling::projective_point(rng, d);
        let lhs = (log_norm_phi(&g, &v) - log_norm_phi(&h, &v)).abs();
        t.push(lhs, inv_norm(&g).max(inv_norm(&h)) * op_norm(&(&g - &h)));
    })
}

/// |φ(g,u) − φ(g,v)| ≤ (‖g‖‖g⁻¹‖ + 1)·d(u, v).
pub fn phi_lip_v(samples: usize, seed: u64) -> LemmaResult {
    run("phi_lip_v", samples, seed, |rng, t| {
        let d = dims(rng);
        let g = sampling::lemma_matrix(rng, d);
        let u = sampling::projective_point(rng, d);
        let v = if rng.random_bool(0.5) {
            sampling::projective_point(rng, d)
        } else {
            let w = u.vector() + sampling::unit_vector(rng, d) * 10f64.powf(rng.random_range(-4.0..-1.0));
            ProjectivePoint::new(w).expect("nonzero")
        };
        let lhs = (log_norm_phi(&g, &u) - log_norm_phi(&g, &v)).abs();
        t.push(lhs, (op_norm(&g) * inv_norm(&g) + 1.0) * fs_distance(&u, &v).unwrap_or(f64::NAN));
    })
}

fn gact(g: &DMatrix<f64>, v: &GrassmannPoint) -> GrassmannPoint {
    grassmann_action(g, v).expect("invertible sample")
}

pub fn grassmann_contract(d: usize, k: usize, samples: usize, seed: u64) -> LemmaResult {
    run(&format!("grassmann_contract({d},{k})"), samples, seed, |rng, t| {
        let g = sampling::lemma_matrix(rng, d);
        let (v, w) = (sampling::grassmann_point(rng, d, k), sampling::grassmann_point(rng, d, k));
        let lhs = grassmann_distance(&gact(&g, &v), &gact(&g, &w)).unwrap_or(f64::NAN);
        let c = (op_norm(&g) * inv_norm(&g)).powi(k as i32);
        t.push(lhs, c * grassmann_distance(&v, &w).unwrap_or(f64::NAN));
    })
}

/// d(gV, g'V) ≤ k·max(‖g⁻¹‖, ‖g'⁻¹‖)^{k−1}·‖g − g'‖ with g' a local perturbation of g.
pub fn grassmann_perturb(d: usize, k: usize, samples: usize, seed: u64) -> LemmaResult {
    run(&format!("grassmann_perturb({d},{k})"), samples, seed, |rng, t| {
        let g = sampling::lemma_matrix(rng, d);
        let h = local_perturbation(rng, &g);
        let v = sampling::grassmann_point(rng, d, k);
        let lhs = grassmann_distance(&gact(&g, &v), &gact(&h, &v)).unwrap_or(f64::NAN);
        let rhs = k as f64 * inv_norm(&g).max(inv_norm(&h)).powi(k as i32 - 1) * op_norm(&(&g - &h));
        t.push(lhs, rhs);
    })
}

/// max relative deviation of ‖Λ^k g‖ from σ₁⋯σ_k.
pub fn exterior_norm_identity(d: usize, k: usize, samples: usize, seed: u64) -> Result<f64> {
    let chunks = samples.div_ceil(CHUNK);
    let per: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<f64> {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut worst: f64 = 0.0;
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let g = sampling::lemma_matrix(&mut rng, d);
                let s = singular_values(&g);
                let prod: f64 = s[..k].iter().product();
                let n = op_norm(&exterior_power(&g, k)?);
                worst = worst.max((n - prod).abs() / prod);
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// d(g[v], g'[v]) ≤ C_geom(A, ρ)·‖g − g'‖ for g, g' in the ρ-ball around A.
pub fn c_geom_lipschitz(samples: usize, seed: u64) -> LemmaResult {
    run("c_geom_lipschitz", samples, seed, |rng, t| {
        let d = dims(rng);
        let a = sampling::lemma_matrix(rng, d);
        let (na, ni) = (op_norm(&a), inv_norm(&a));
        let rho = rng.random_range(0.0..0.9) / ni;
        let pick = |rng: &mut ChaCha12Rng| &a + direction(rng, d) * (rho * rng.random::<f64>());
        let g = pick(rng);
        let h = pick(rng);
        let v = sampling::projective_point(rng, d);
        let lhs = fs_distance(&act(&g, &v), &act(&h, &v)).unwrap_or(f64::NAN);
        t.push(lhs, c_geom(na, ni, rho) * op_norm(&(&g - &h)));
    })
}

/// ‖f‖_θ = sup|f| + sup_{j≠k} |f_j − f_k| / d(v_j, v_k)^θ on the grid.
pub fn holder_norm(f: &[f64], grid: &ProjectiveGrid, theta: f64) -> f64 {
    let a = grid.angles();
    let sup = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut semi: f64 = 0.0;
    for j in 0..f.len() {
        for k in j + 1..f.len() {
            let d = (a[j] - a[k]).sin().abs();
            semi = semi.max((f[j] - f[k]).abs() / d.powf(theta));
        }
    }
    sup + semi
}

fn test_function(rng: &mut ChaCha12Rng, grid: &ProjectiveGrid, theta: f64) -> Vec<f64> {
    let a = grid.angles();
    if rng.random_bool(0.5) {
        let terms = rng.random_range(1..=8);
        let coef: Vec<(f64, f64)> = (1..=terms)
            .map(|k| {
                let s = 1.0 / (k as f64).powf(1.0 + theta);
                (rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
            })
            .collect();
        a.iter()
            .map(|x| coef.iter().enumerate().map(|(k, (c, s))| c * (2.0 * (k + 1) as f64 * x).cos() + s * (2.0 * (k + 1) as f64 * x).sin()).sum())
            .collect()
    } else {
        let x0: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let amp: f64 = rng.random_range(0.2..2.0);
        a.iter().map(|x| amp * (x - x0).sin().abs().powf(theta)).collect()
    }
}

/// max_i ‖T_i f‖_θ/‖f‖_θ over sampled f, against max_i (1 + ecc(A_i)^{2θ}).
pub fn transfer_holder_bound(tuple: &MatrixTuple, theta: f64, grid_m: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let grid = ProjectiveGrid::new(grid_m)?;
    let dy = GridDynamics::new(tuple, &grid)?;
    let bound = tuple.info().iter().map(|m| 1.0 + m.eccentricity.powf(2.0 * theta)).fold(0.0, f64::max);
    let ratios: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let f = test_function(&mut rng, &grid, theta);
            let nf = holder_norm(&f, &grid, theta);
            (0..tuple.len())
                .map(|i| {
                    let t = dy.t_matrix(i);
                    let g: Vec<f64> = (t * DVector::from_column_slice(&f)).iter().copied().collect();
                    holder_norm(&g, &grid, theta) / nf
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok((ratios.into_iter().fold(0.0, f64::max), bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inequalities_hold_on_small_batches() {
        for r in [proj_contract(2000, 1), phi_lip_g(2000, 2), phi_lip_v(2000, 3), grassmann_contract(3, 2, 2000, 4), c_geom_lipschitz(2000, 5)] {
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.samples, 2000);
        }
    }

    #[test]
    fn runs_are_reproducible() {
        assert_eq!(proj_contract(1500, 9), proj_contract(1500, 9));
    }

    #[test]
    fn orthogonal_maps_preserve_distance() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let q = sampling::orthogonal(&mut rng, 3);
        let (u, v) = (sampling::projective_point(&mut rng, 3), sampling::projective_point(&mut rng, 3));
        let a = fs_distance(&act(&q, &u), &act(&q, &v)).unwrap();
        assert!((a - fs_distance(&u, &v).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn exterior_identity_small() {
        assert!(exterior_norm_identity(4, 2, 500, 1).unwrap() < 1e-10);
    }

    #[test]
    fn holder_norm_of_constant() {
        let g = ProjectiveGrid::new(16).unwrap();
        assert_eq!(holder_norm(&[2.0; 16], &g, 0.5), 2.0);
    }
}
