//! Contour quadrature on the extension: Taylor coefficients along zero-sum
//! directions, a Cauchy–Hadamard radius surrogate, finite-difference
//! holomorphy residuals, the discretized Neumann criterion and a collision scan.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analytic_extension_value, assemble_operator, c64, real_weights, GridDynamics, ProjectiveGrid, C64};
use crate::error::{Error, Result};
use crate::geometry::MatrixTuple;

/// Checks Σu = 0 and u ≠ 0.
pub fn check_direction(u: &[f64], n: usize) -> Result<()> {
    if u.len() != n {
        return Err(Error::DimensionMismatch(format!("direction has {} entries, expected {n}", u.len())));
    }
    if u.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidInput("direction must be nonzero".into()));
    }
    let s: f64 = u.iter().sum();
    if s.abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("direction must be zero-sum, sums to {s}")));
    }
    Ok(())
}

/// p + t·u.
pub fn shifted(p: &[f64], u: &[f64], t: C64) -> Vec<C64> {
    p.iter().zip(u).map(|(pi, ui)| c64(*pi) + t * ui).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaylorCoefficients {
    pub radius: f64,
    pub nodes: usize,
    /// c_j as (re, im).
    pub coefficients: Vec<(f64, f64)>,
}

impl TaylorCoefficients {
    pub fn complex(&self) -> Vec<C64> {
        self.coefficients.iter().map(|(a, b)| C64::new(*a, *b)).collect()
    }

    /// Sharp-radius surrogate after discarding coefficients whose contour contribution
    /// |c_j|·r_c^j sits below `rel_floor` times the largest one (quadrature round-off).
    pub fn sharp_radius(&self, rel_floor: f64) -> Result<SharpRadius> {
        let c = self.complex();
        let scaled: Vec<f64> = c.iter().enumerate().map(|(j, z)| z.norm() * self.radius.powi(j as i32)).collect();
        let top = scaled.iter().copied().fold(0.0, f64::max);
        let kept: Vec<C64> = c
            .iter()
            .zip(&scaled)
            .map(|(z, s)| if *s < rel_floor * top { c64(0.0) } else { *z })
            .collect();
        estimate_sharp_radius(&kept)
    }

    /// |c_j|·j!, the derivative magnitude of order j.
    pub fn derivative_magnitudes(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.complex()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j > 0 {
                    fact *= j as f64;
                }
                c.norm() * fact
            })
            .collect()
    }
}

/// Trapezoid rule for c_j of t ↦ f(t) on |t| = r_c with Q nodes.
pub fn cauchy_coefficients<F>(f: F, order: usize, radius: f64, nodes: usize) -> Result<Vec<C64>>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("contour radius {radius} must be > 0")));
    }
    if nodes < 4 * order.max(1) {
        return Err(Error::InvalidInput(format!("need Q >= 4J quadrature nodes, got Q = {nodes}, J = {order}")));
    }
    let vals: Vec<C64> = (0..nodes)
        .into_par_iter()
        .map(|q| f(C64::from_polar(radius, 2.0 * PI * q as f64 / nodes as f64)))
        .collect::<Result<_>>()?;
    Ok((0..=order)
        .map(|j| {
            let s: C64 = vals
                .iter()
                .enumerate()
                .map(|(q, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * q) as f64 / nodes as f64))
                .sum();
            s / nodes as f64 / radius.powi(j as i32)
        })
        .collect())
}

/// Coefficients c₀..c_J of t ↦ λ̃₊(p⁰ + t·u).
pub fn taylor_coefficients(
    tuple: &MatrixTuple,
    p0: &[f64],
    u: &[f64],
    order: usize,
    radius: f64,
    nodes: usize,
    grid: &ProjectiveGrid,
) -> Result<TaylorCoefficients> {
    check_direction(u, tuple.len())?;
    crate::oracles::validate_weights(p0, tuple.len())?;
    let f = |t: C64| {
        analytic_extension_value(tuple, &shifted(p0, u, t), grid).map_err(|e| match e {
            Error::EigenvalueCollision { mu, other } => Error::ContourTooLarge(format!(
                "eigenvalue collision on |t| = {radius} (mu = {mu}, competitor {other})"
            )),
            e => e,
        })
    };
    let c = cauchy_coefficients(f, order, radius, nodes)?;
    Ok(TaylorCoefficients { radius, nodes, coefficients: c.iter().map(|z| (z.re, z.im)).collect() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SharpRadius {
    /// 1/max_{j ≥ J/2} |c_j|^{1/j}; None when indeterminate. A finite-order surrogate for the true radius.
    pub radius: Option<f64>,
    pub indeterminate: bool,
    pub tail_start: usize,
}

pub const SHARP_RADIUS_FLOOR: f64 = 1e-14;

pub fn estimate_sharp_radius(coeffs: &[C64]) -> Result<SharpRadius> {
    if coeffs.len() < 8 {
        return Err(Error::InvalidInput(format!("need >= 8 coefficients, got {}", coeffs.len())));
    }
    let j_max = coeffs.len() - 1;
    let start = j_max.div_ceil(2);
    let root = (start..=j_max)
        .filter(|j| coeffs[*j].norm() >= SHARP_RADIUS_FLOOR)
        .map(|j| coeffs[j].norm().powf(1.0 / j as f64))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    Ok(match root {
        Some(r) => SharpRadius { radius: Some(1.0 / r), indeterminate: false, tail_start: start },
        None => SharpRadius { radius: None, indeterminate: true, tail_start: start },
    })
}

/// |∂_x f − (1/i) ∂_y f| at t₀ by central differences with step h.
pub fn cr_holomorphy_check<F>(f: F, t0: C64, h: f64) -> Result<f64>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    if !(h > 1e-6 && h < 1e-2) {
        return Err(Error::InvalidInput(format!("CR step h = {h} outside (1e-6, 1e-2)")));
    }
    let i = C64::new(0.0, 1.0);
    let pts = [t0 + h, t0 - h, t0 + i * h, t0 - i * h];
    let v: Vec<C64> = pts.par_iter().map(|t| f(*t)).collect::<Result<_>>()?;
    let dx = (v[0] - v[1]) / (2.0 * h);
    let dy = (v[2] - v[3]) / (2.0 * h);
    Ok((dx - dy / i).norm())
}

/// CR residual of t ↦ λ̃₊(z₀ + t·u) at t = 0.
pub fn extension_cr_residual(tuple: &MatrixTuple, z0: &[f64], u: &[f64], grid: &ProjectiveGrid, h: f64) -> Result<f64> {
    check_direction(u, tuple.len())?;
    cr_holomorphy_check(|t| analytic_extension_value(tuple, &shifted(z0, u, t), grid), c64(0.0), h)
}

/// max_{ζ ∈ Γ} ‖(P_z − P_{p⁰})(ζI − P_{p⁰})⁻¹‖_∞ for each z, over `nodes` points of |ζ − 1| = ρ*.
pub fn neumann_criterion(
    tuple: &MatrixTuple,
    p0: &[f64],
    zs: &[Vec<C64>],
    grid: &ProjectiveGrid,
    rho_star: f64,
    nodes: usize,
) -> Result<Vec<f64>> {
    crate::oracles::validate_weights(p0, tuple.len())?;
    if !(rho_star > 0.0) || nodes == 0 {
        return Err(Error::InvalidInput("Neumann check needs rho* > 0 and at least one contour node".into()));
    }
    for z in zs {
        if z.len() != tuple.len() {
            return Err(Error::DimensionMismatch("weight vector length".into()));
        }
    }
    let base = assemble_operator(tuple, &real_weights(p0), grid, 0.0)?.to_dense();
    let dyn_ = GridDynamics::new(tuple, grid)?;
    let m = grid.len();
    let n = tuple.len();
    let per_node: Vec<Vec<f64>> = (0..nodes)
        .into_par_iter()
        .map(|q| -> Result<Vec<f64>> {
            let zeta = c64(1.0) + C64::from_polar(rho_star, 2.0 * PI * q as f64 / nodes as f64);
            let shifted = DMatrix::<C64>::identity(m, m) * zeta - &base;
            let res = shifted
                .lu()
                .try_inverse()
                .ok_or_else(|| Error::SolverFailure(format!("resolvent is singular at zeta = {zeta}")))?;
            let tr: Vec<DMatrix<C64>> = (0..n).map(|i| dyn_.t_times_dense(i, &res)).collect();
            Ok(zs
                .iter()
                .map(|z| {
                    let mut x = DMatrix::<C64>::zeros(m, m);
                    for i in 0..n {
                        let d = z[i] - p0[i];
                        if d != c64(0.0) {
                            x += &tr[i] * d;
                        }
                    }
                    x.row_iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..zs.len()).map(|k| per_node.iter().map(|v| v[k]).fold(0.0, f64::max)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollisionHit {
    pub distance: f64,
    pub direction: Vec<f64>,
    pub t: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollisionScan {
    pub nearest: Option<CollisionHit>,
    pub evaluations: usize,
    pub max_radius: f64,
}

/// Evaluates `probe` at t = r·e^{2πik/phases} along every zero-sum direction and reports
/// the smallest |t| at which it signals an eigenvalue collision. All points are probed.
pub fn scan_for_collisions<F>(probe: F, directions: &[Vec<f64>], radii: &[f64], phases: usize) -> Result<CollisionScan>
where
    F: Fn(&[f64], C64) -> Result<()> + Sync,
{
    let phases = phases.max(1);
    let points: Vec<(usize, f64, C64)> = directions
        .iter()
        .enumerate()
        .flat_map(|(d, _)| {
            radii.iter().flat_map(move |&r| {
                (0..phases).map(move |k| (d, r, C64::from_polar(r, 2.0 * PI * k as f64 / phases as f64)))
            })
        })
        .collect();
    let hits: Vec<Option<CollisionHit>> = points
        .par_iter()
        .map(|&(d, r, t)| match probe(&directions[d], t) {
            Ok(()) => Ok(None),
            Err(Error::EigenvalueCollision { .. }) => {
                Ok(Some(CollisionHit { distance: r, direction: directions[d].clone(), t: (t.re, t.im) }))
            }
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let nearest = hits.into_iter().flatten().min_by(|a, b| a.distance.total_cmp(&b.distance));
    Ok(CollisionScan { nearest, evaluations: points.len(), max_radius: radii.iter().copied().fold(0.0, f64::max) })
}

/// Collision scan of the discretized operator family around p⁰.
pub fn collapse_scan(tuple: &MatrixTuple, p0: &[f64], grid: &ProjectiveGrid, directions: &[Vec<f64>], radii: &[f64], phases: usize) -> Result<CollisionScan> {
    for u in directions {
        check_direction(u, tuple.len())?;
    }
    scan_for_collisions(
        |u, t| {
            let op = assemble_operator(tuple, &shifted(p0, u, t), grid, 0.0)?;
            super::leading_eigenpair(&op).map(|_| ())
        },
        directions,
        radii,
        phases,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::eigen::{dense_eigenpair, Target};

    #[test]
    fn geometric_series_radius() {
        let rho: f64 = 0.3;
        let c: Vec<C64> = (0..=16).map(|j| c64(rho.powi(-j))).collect();
        let r = estimate_sharp_radius(&c).unwrap();
        assert!((r.radius.unwrap() - rho).abs() / rho < 0.05);
    }

    #[test]
    fn noise_floor_discards_round_off() {
        let mut c: Vec<(f64, f64)> = (0..=16).map(|j| (0.5f64.powi(j), 0.0)).collect();
        let tc = TaylorCoefficients { radius: 0.1, nodes: 64, coefficients: c.clone() };
        assert!((tc.sharp_radius(1e-12).unwrap().radius.unwrap() - 2.0).abs() < 0.1);
        for x in c.iter_mut().skip(3) {
            x.0 = 1e-17 * 10f64.powi(3);
        }
        let tc = TaylorCoefficients { radius: 0.1, nodes: 64, coefficients: c };
        assert!(tc.sharp_radius(1e-12).unwrap().indeterminate);
    }

    #[test]
    fn polynomial_is_indeterminate() {
        let mut c = vec![c64(0.0); 17];
        c[0] = c64(1.0);
        c[2] = c64(3.0);
        let r = estimate_sharp_radius(&c).unwrap();
        assert!(r.indeterminate && r.radius.is_none());
        assert!(estimate_sharp_radius(&c[..5]).is_err());
    }

    #[test]
    fn contour_recovers_known_series() {
        // 1/(1 − t/2): c_j = 2^{-j}
        let c = cauchy_coefficients(|t| Ok(c64(1.0) / (c64(1.0) - t / 2.0)), 8, 0.5, 64).unwrap();
        for (j, cj) in c.iter().enumerate() {
            assert!((cj - c64(0.5f64.powi(j as i32))).norm() < 1e-12, "j = {j}");
        }
        assert!(cauchy_coefficients(Ok, 8, 0.5, 16).is_err());
    }

    #[test]
    fn cr_examples() {
        let r = cr_holomorphy_check(|t| Ok(t * t), C64::new(0.3, -0.2), 1e-4).unwrap();
        assert!(r < 1e-8);
        let r = cr_holomorphy_check(|t| Ok(t.conj()), C64::new(0.3, -0.2), 1e-4).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
        assert!(cr_holomorphy_check(Ok, c64(0.0), 0.1).is_err());
    }

    #[test]
    fn direction_checks() {
        assert!(check_direction(&[0.0, 0.0], 2).is_err());
        assert!(check_direction(&[1.0, -0.5], 2).is_err());
        assert!(check_direction(&[1.0, -1.0], 2).is_ok());
    }

    #[test]
    fn synthetic_crossing_is_detected() {
        // z₁ I + z₂ C on three states; eigenvalues collapse to 1 at z = (1, 0).
        let c = DMatrix::<C64>::from_fn(3, 3, |i, j| if (i + 1) % 3 == j { c64(1.0) } else { c64(0.0) });
        let id = DMatrix::<C64>::identity(3, 3);
        let p0 = [0.5, 0.5];
        let probe = |u: &[f64], t: C64| {
            let z = shifted(&p0, u, t);
            let m = &id * z[0] + &c * z[1];
            dense_eigenpair(&m, Target::Leading).map(|_| ())
        };
        let radii: Vec<f64> = (1..=6).map(|k| 0.1 * k as f64).collect();
        let scan = scan_for_collisions(probe, &[vec![1.0, -1.0]], &radii, 1).unwrap();
        let hit = scan.nearest.unwrap();
        assert!((hit.distance - 0.5).abs() < 1e-12);
    }
}
