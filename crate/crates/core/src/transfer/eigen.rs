//! Eigen-extraction for the discretized operators.
//!
//! Small matrices go through a dense complex Schur decomposition, which exposes
//! the whole spectrum and makes the collision test exact. Larger sparse
//! operators use explicitly restarted Arnoldi with full reorthogonalization.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Operators up to this dimension are solved densely.
pub const DENSE_LIMIT: usize = 128;
/// Eigenvalues within this distance of the maximal modulus are leading candidates.
pub const MODULUS_TOL: f64 = 1e-8;
/// Two candidates whose distances to 1 agree this closely are a collision.
pub const COLLISION_TOL: f64 = 1e-8;

/// How to pick an eigenvalue out of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Maximal modulus, ties broken by distance to 1; ambiguous ties are collisions.
    Leading,
    /// Closest to the given value.
    Nearest(C64),
    /// Maximal modulus only.
    MaxModulus,
}

/// Index of the selected eigenvalue.
pub fn select(eigs: &[C64], target: Target) -> Result<usize> {
    if eigs.is_empty() {
        return Err(Error::SolverFailure("empty spectrum".into()));
    }
    let argmin = |f: &dyn Fn(&C64) -> f64, pool: &[usize]| -> usize {
        *pool
            .iter()
            .min_by(|a, b| f(&eigs[**a]).total_cmp(&f(&eigs[**b])))
            .expect("nonempty")
    };
    let all: Vec<usize> = (0..eigs.len()).collect();
    match target {
        Target::Nearest(t) => Ok(argmin(&|z| (z - t).norm(), &all)),
        Target::MaxModulus => Ok(argmin(&|z| -z.norm(), &all)),
        Target::Leading => {
            let maxmod = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let cand: Vec<usize> = all.into_iter().filter(|i| eigs[*i].norm() >= maxmod - MODULUS_TOL).collect();
            let one = C64::new(1.0, 0.0);
            let best = argmin(&|z| (z - one).norm(), &cand);
            let db = (eigs[best] - one).norm();
            if let Some(o) = cand.iter().find(|i| **i != best && ((eigs[**i] - one).norm() - db).abs() <= COLLISION_TOL) {
                return Err(Error::EigenvalueCollision { mu: eigs[best], other: eigs[*o] });
            }
            Ok(best)
        }
    }
}

fn schur(m: DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    Schur::try_new(m, f64::EPSILON, 1_000_000)
        .map(|s| s.unpack())
        .ok_or_else(|| Error::SolverFailure("Schur iteration did not converge".into()))
}

/// Eigenvector of the upper-triangular `t` for its i-th diagonal entry.
fn triangular_eigvec(t: &DMatrix<C64>, i: usize) -> DVector<C64> {
    let n = t.nrows();
    let lam = t[(i, i)];
    let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    let mut x = DVector::zeros(n);
    x[i] = C64::new(1.0, 0.0);
    for j in (0..i).rev() {
        let mut s = C64::new(0.0, 0.0);
        for l in (j + 1)..=i {
            s += t[(j, l)] * x[l];
        }
        let mut den = t[(j, j)] - lam;
        if den.norm() < small {
            den = C64::new(small, 0.0);
        }
        x[j] = -s / den;
    }
    x
}

/// All eigenvalues of a dense matrix.
pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let (_, t) = schur(m.clone())?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Selected eigenvalue, its eigenvector and the full spectrum.
pub fn dense_eigenpair(m: &DMatrix<C64>, target: Target) -> Result<(C64, DVector<C64>, Vec<C64>)> {
    let (q, t) = schur(m.clone())?;
    let eigs: Vec<C64> = t.diagonal().iter().copied().collect();
    let i = select(&eigs, target)?;
    let v = &q * triangular_eigvec(&t, i);
    let n = v.norm();
    Ok((eigs[i], v / C64::new(n, 0.0), eigs))
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovOpts {
    pub dim: usize,
    pub max_restarts: usize,
    /// Converged when ‖Ax − θx‖ ≤ tol·max(1, |θ|).
    pub tol: f64,
}

impl Default for KrylovOpts {
    fn default() -> Self {
        Self { dim: 40, max_restarts: 200, tol: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: C64,
    pub vector: Vec<C64>,
    pub residual: f64,
    pub converged: bool,
    /// Ritz values of the final cycle with their residual estimates.
    pub ritz: Vec<(C64, f64)>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Explicitly restarted Arnoldi for a single eigenpair of the operator `apply`.
pub fn arnoldi<F>(apply: F, n: usize, start: &[C64], target: Target, opts: &KrylovOpts) -> Result<RitzPair>
where
    F: Fn(&[C64], &mut [C64]),
{
    let mut x: Vec<C64> = start.to_vec();
    let s = norm(&x);
    if !(s > 0.0) {
        return Err(Error::SolverFailure("zero start vector".into()));
    }
    x.iter_mut().for_each(|v| *v /= s);
    let k = opts.dim.min(n).max(1);
    let mut w = vec![C64::new(0.0, 0.0); n];
    for restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<C64>> = vec![x.clone()];
        let mut h = DMatrix::<C64>::zeros(k + 1, k);
        let mut keff = k;
        let mut beta = 0.0;
        for j in 0..k {
            apply(&basis[j], &mut w);
            let scale = norm(&w);
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    h[(i, j)] += c;
                    axpy(-c, b, &mut w);
                }
            }
            let hn = norm(&w);
            h[(j + 1, j)] = C64::new(hn, 0.0);
            if hn <= 1e-13 * scale.max(f64::MIN_POSITIVE) || (j + 1 == n) {
                keff = j + 1;
                beta = if j + 1 == n { 0.0 } else { hn };
                break;
            }
            if j + 1 == k {
                beta = hn;
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let hk = h.view((0, 0), (keff, keff)).into_owned();
        let (q, t) = schur(hk)?;
        let eigs: Vec<C64> = t.diagonal().iter().copied().collect();
        let resid_of = |i: usize| -> (DVector<C64>, f64) {
            let mut y = &q * triangular_eigvec(&t, i);
            let yn = y.norm();
            y /= C64::new(yn, 0.0);
            let r = beta * y[keff - 1].norm();
            (y, r)
        };
        let idx = match target {
            Target::Leading => {
                // Leading selection only among Ritz values that have settled.
                let maxmod = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let cand: Vec<usize> = (0..eigs.len()).filter(|i| eigs[*i].norm() >= maxmod - 1e-3).collect();
                let settled: Vec<C64> = cand.iter().map(|i| eigs[*i]).collect();
                let local = select(&settled, Target::Leading);
                match local {
                    Ok(l) => cand[l],
                    Err(e) => {
                        // Ambiguity among unconverged values is not yet a collision.
                        let ok = cand.iter().all(|i| resid_of(*i).1 <= 1e-8 * eigs[*i].norm().max(1.0));
                        if ok {
                            return Err(e);
                        }
                        select(&eigs, Target::MaxModulus)?
                    }
                }
            }
            other => select(&eigs, other)?,
        };
        let (y, residual) = resid_of(idx);
        let theta = eigs[idx];
        let mut xn = vec![C64::new(0.0, 0.0); n];
        for (i, b) in basis.iter().take(keff).enumerate() {
            axpy(y[i], b, &mut xn);
        }
        let s = norm(&xn);
        xn.iter_mut().for_each(|v| *v /= s);
        let converged = residual <= opts.tol * theta.norm().max(1.0);
        if converged || restart == opts.max_restarts {
            let ritz = (0..eigs.len()).map(|i| (eigs[i], resid_of(i).1)).collect();
            return Ok(RitzPair { value: theta, vector: xn, residual, converged, ritz });
        }
        x = xn;
    }
    unreachable!("loop returns on the final restart")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cyclic(n: usize) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn selection_rule() {
        let eigs = [c(1.0, 0.0), c(-0.5, 0.866_025_403_784_438_6), c(0.2, 0.0)];
        assert_eq!(select(&eigs, Target::Leading).unwrap(), 0);
        let double = [c(1.0, 0.0), c(1.0, 0.0), c(0.3, 0.0)];
        assert!(matches!(select(&double, Target::Leading), Err(Error::EigenvalueCollision { .. })));
        let pair = [c(0.0, 1.0), c(0.0, -1.0)];
        assert!(select(&pair, Target::Leading).is_err());
        assert_eq!(select(&pair, Target::Nearest(c(0.1, -0.9))).unwrap(), 1);
    }

    #[test]
    fn dense_cyclic_permutation() {
        let p = cyclic(5);
        let (mu, v, eigs) = dense_eigenpair(&p, Target::Leading).unwrap();
        assert!((mu - c(1.0, 0.0)).norm() < 1e-13);
        assert_eq!(eigs.len(), 5);
        let r = &p * &v - &v * mu;
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn dense_collision_on_identity_mixture() {
        // z₁ I + z₂ C at z = (1, 0) has a triple eigenvalue 1.
        let m = DMatrix::<C64>::identity(3, 3);
        assert!(matches!(dense_eigenpair(&m, Target::Leading), Err(Error::EigenvalueCollision { .. })));
        let half = (DMatrix::<C64>::identity(3, 3) + cyclic(3)) * c(0.5, 0.0);
        let (mu, _, _) = dense_eigenpair(&half, Target::Leading).unwrap();
        assert!((mu - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn arnoldi_matches_dense() {
        let n = 60;
        let m = DMatrix::from_fn(n, n, |i, j| {
            let x = ((i * 31 + j * 17) % 23) as f64 / 23.0;
            let y = ((i * 7 + j * 3) % 11) as f64 / 50.0;
            c(x, y)
        });
        let (mu, _, _) = dense_eigenpair(&m, Target::MaxModulus).unwrap();
        let apply = |x: &[C64], y: &mut [C64]| {
            let v = &m * DVector::from_column_slice(x);
            y.copy_from_slice(v.as_slice());
        };
        let start = vec![c(1.0, 0.0); n];
        let r = arnoldi(apply, n, &start, Target::MaxModulus, &KrylovOpts { dim: 20, ..Default::default() }).unwrap();
        assert!(r.converged);
        assert!((r.value - mu).norm() < 1e-10 * mu.norm());
    }

    #[test]
    fn arnoldi_breakdown_on_eigenvector_start() {
        let p = cyclic(7);
        let apply = |x: &[C64], y: &mut [C64]| {
            let v = &p * DVector::from_column_slice(x);
            y.copy_from_slice(v.as_slice());
        };
        let r = arnoldi(apply, 7, &[c(1.0, 0.0); 7], Target::Leading, &KrylovOpts::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - c(1.0, 0.0)).norm() < 1e-14);
    }
}
