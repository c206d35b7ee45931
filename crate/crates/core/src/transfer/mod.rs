//! Discretized Markov operators on ℙ¹ and the holomorphic extension of the top
//! exponent read off their leading eigenpair.
//!
//! Functions on ℙ¹ are sampled at the angles φ_j = jπ/m. The image angle of
//! A_i v_j is linearly interpolated between its two neighbouring nodes
//! (periodically), so at real weights every row is a probability vector and
//! constants are fixed exactly.

pub mod contour;
pub mod eigen;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MatrixTuple;
pub use eigen::C64;
use eigen::{arnoldi, dense_eigenpair, KrylovOpts, Target, DENSE_LIMIT};

const WEIGHT_SUM_TOL: f64 = 1e-12;

pub fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn real_weights(p: &[f64]) -> Vec<C64> {
    p.iter().map(|x| c64(*x)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveGrid {
    m: usize,
    angles: Vec<f64>,
}

impl ProjectiveGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 8 {
            return Err(Error::InvalidInput(format!("grid needs m >= 8 nodes, got {m}")));
        }
        Ok(Self { m, angles: (0..m).map(|j| j as f64 * PI / m as f64).collect() })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        PI / self.m as f64
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn node(&self, j: usize) -> [f64; 2] {
        [self.angles[j].cos(), self.angles[j].sin()]
    }
}

/// Where A v_j lands: two neighbouring nodes with interpolation weights, plus φ(A, v_j).
#[derive(Debug, Clone, Copy)]
struct Landing {
    k0: usize,
    w0: f64,
    k1: usize,
    w1: f64,
    phi: f64,
}

fn landings(a: &DMatrix<f64>, grid: &ProjectiveGrid) -> Vec<Landing> {
    let m = grid.len();
    (0..m)
        .map(|j| {
            let [c, s] = grid.node(j);
            let x = a[(0, 0)] * c + a[(0, 1)] * s;
            let y = a[(1, 0)] * c + a[(1, 1)] * s;
            let phi = x.hypot(y).ln();
            let pos = y.atan2(x).rem_euclid(PI) / grid.spacing();
            let k = pos.floor();
            let frac = pos - k;
            let k0 = (k as usize) % m;
            Landing { k0, w0: 1.0 - frac, k1: (k0 + 1) % m, w1: frac, phi }
        })
        .collect()
}

/// Interpolation matrices T_i of each A_i (unweighted), with the log-stretches.
#[derive(Debug, Clone)]
pub struct GridDynamics {
    grid: ProjectiveGrid,
    land: Vec<Vec<Landing>>,
}

impl GridDynamics {
    pub fn new(tuple: &MatrixTuple, grid: &ProjectiveGrid) -> Result<Self> {
        if tuple.dim() != 2 {
            return Err(Error::InvalidInput(format!("operator discretization supports d = 2 only, got d = {}", tuple.dim())));
        }
        Ok(Self { grid: grid.clone(), land: tuple.matrices().iter().map(|a| landings(a, grid)).collect() })
    }

    pub fn grid(&self) -> &ProjectiveGrid {
        &self.grid
    }

    pub fn n_matrices(&self) -> usize {
        self.land.len()
    }

    /// φ(A_i, v_j).
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.land[i][j].phi
    }

    /// (T_i f)(v_j) = f interpolated at A_i v_j.
    pub fn apply_t(&self, i: usize, f: &[C64], out: &mut [C64]) {
        for (o, l) in out.iter_mut().zip(&self.land[i]) {
            *o = f[l.k0] * l.w0 + f[l.k1] * l.w1;
        }
    }

    /// Dense T_i.
    pub fn t_matrix(&self, i: usize) -> DMatrix<f64> {
        let m = self.grid.len();
        let mut t = DMatrix::zeros(m, m);
        for (j, l) in self.land[i].iter().enumerate() {
            t[(j, l.k0)] += l.w0;
            t[(j, l.k1)] += l.w1;
        }
        t
    }

    /// Row j of T_i applied to the rows of a dense matrix: Σ_k T_i[j,k] X[k, :].
    pub fn t_times_dense(&self, i: usize, x: &DMatrix<C64>) -> DMatrix<C64> {
        let m = self.grid.len();
        let mut out = DMatrix::zeros(m, x.ncols());
        for (j, l) in self.land[i].iter().enumerate() {
            let row = x.row(l.k0) * c64(l.w0) + x.row(l.k1) * c64(l.w1);
            out.set_row(j, &row);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Iid { weights: Vec<C64> },
    Chain { transition: DMatrix<C64> },
}

/// Sparse (CSR) discretized operator.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    dynamics: GridDynamics,
    kind: OperatorKind,
    twist: f64,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

fn check_weight_sum(z: &[C64]) -> Result<()> {
    let s: C64 = z.iter().sum();
    if (s - c64(1.0)).norm() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidInput(format!("weights sum to {s}, expected 1")));
    }
    Ok(())
}

/// P_z (twist s = 0) or the twisted operator L_{z,s}: row j holds Σ_i z_i e^{sφ(A_i,v_j)}·(interpolation of A_i v_j).
pub fn assemble_operator(tuple: &MatrixTuple, z: &[C64], grid: &ProjectiveGrid, twist: f64) -> Result<DiscretizedOperator> {
    if z.len() != tuple.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} matrices", z.len(), tuple.len())));
    }
    check_weight_sum(z)?;
    let dynamics = GridDynamics::new(tuple, grid)?;
    let m = grid.len();
    let n = tuple.len();
    let mut row_ptr = Vec::with_capacity(m + 1);
    let mut cols = Vec::with_capacity(2 * n * m);
    let mut vals = Vec::with_capacity(2 * n * m);
    row_ptr.push(0);
    for j in 0..m {
        for (i, zi) in z.iter().enumerate() {
            let l = dynamics.land[i][j];
            let c = zi * (twist * l.phi).exp();
            cols.extend([l.k0, l.k1]);
            vals.extend([c * l.w0, c * l.w1]);
        }
        row_ptr.push(cols.len());
    }
    Ok(DiscretizedOperator { dynamics, kind: OperatorKind::Iid { weights: z.to_vec() }, twist, dim: m, row_ptr, cols, vals })
}

/// Q_{P,A} on {1..N} × grid: block (i, j) is P_ij·T_j. State-major indexing: (i, k) ↦ i·m + k.
pub fn assemble_chain_operator(transition: &DMatrix<C64>, tuple: &MatrixTuple, grid: &ProjectiveGrid) -> Result<DiscretizedOperator> {
    let n = tuple.len();
    if transition.nrows() != n || transition.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} transition for {n} matrices", transition.nrows(), transition.ncols())));
    }
    for i in 0..n {
        let row: Vec<C64> = transition.row(i).iter().copied().collect();
        check_weight_sum(&row).map_err(|_| Error::InvalidInput(format!("transition row {i} does not sum to 1")))?;
    }
    let dynamics = GridDynamics::new(tuple, grid)?;
    let m = grid.len();
    let mut row_ptr = Vec::with_capacity(n * m + 1);
    let mut cols = Vec::with_capacity(2 * n * n * m);
    let mut vals = Vec::with_capacity(2 * n * n * m);
    row_ptr.push(0);
    for i in 0..n {
        for k in 0..m {
            for j in 0..n {
                let l = dynamics.land[j][k];
                let c = transition[(i, j)];
                cols.extend([j * m + l.k0, j * m + l.k1]);
                vals.extend([c * l.w0, c * l.w1]);
            }
            row_ptr.push(cols.len());
        }
    }
    Ok(DiscretizedOperator {
        dynamics,
        kind: OperatorKind::Chain { transition: transition.clone() },
        twist: 0.0,
        dim: n * m,
        row_ptr,
        cols,
        vals,
    })
}

impl DiscretizedOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &ProjectiveGrid {
        self.dynamics.grid()
    }

    pub fn dynamics(&self) -> &GridDynamics {
        &self.dynamics
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn twist(&self) -> f64 {
        self.twist
    }

    /// y = M x
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            *yr = s;
        }
    }

    /// y = Mᵀ x (plain transpose).
    pub fn apply_transpose(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (r, xr) in x.iter().enumerate() {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.cols[p]] += self.vals[p] * xr;
            }
        }
    }

    pub fn row_sums(&self) -> Vec<C64> {
        (0..self.dim).map(|r| self.vals[self.row_ptr[r]..self.row_ptr[r + 1]].iter().sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                a[(r, self.cols[p])] += self.vals[p];
            }
        }
        a
    }

    /// Smallest entry's real part and largest imaginary magnitude (stochasticity diagnostics).
    pub fn entry_extremes(&self) -> (f64, f64) {
        let mut min_re = f64::INFINITY;
        let mut max_im: f64 = 0.0;
        for v in &self.vals {
            min_re = min_re.min(v.re);
            max_im = max_im.max(v.im.abs());
        }
        (min_re, max_im)
    }
}

/// μ with right vector (unit sup-norm) and left functional normalized to ℓ(1) = 1.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    /// Solver residuals (right, left); 0 for the dense path.
    pub residuals: (f64, f64),
    pub dense: bool,
}

fn normalize_pair(value: C64, right: Vec<C64>, left: Vec<C64>, residuals: (f64, f64), dense: bool) -> Result<EigenPair> {
    let s: C64 = left.iter().sum();
    if !(s.norm() > 1e-14 * left.iter().map(|x| x.norm()).sum::<f64>()) {
        return Err(Error::SolverFailure("left eigenvector annihilates constants".into()));
    }
    let left: Vec<C64> = left.iter().map(|x| x / s).collect();
    let pair: C64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    let phase = if pair.norm() > 0.0 { pair.conj() / pair.norm() } else { c64(1.0) };
    let mut right: Vec<C64> = right.iter().map(|x| x * phase).collect();
    let sup = right.iter().map(|x| x.norm()).fold(0.0, f64::max);
    right.iter_mut().for_each(|x| *x /= sup);
    Ok(EigenPair { value, right, left, residuals, dense })
}

/// Leading eigenpair: maximal modulus, closest to 1; raises a collision when ambiguous.
pub fn leading_eigenpair(op: &DiscretizedOperator) -> Result<EigenPair> {
    leading_eigenpair_with(op, &KrylovOpts::default())
}

pub fn leading_eigenpair_with(op: &DiscretizedOperator, opts: &KrylovOpts) -> Result<EigenPair> {
    let n = op.dim();
    if n <= DENSE_LIMIT {
        let a = op.to_dense();
        let (mu, r, _) = dense_eigenpair(&a, Target::Leading)?;
        let (_, l, _) = dense_eigenpair(&a.transpose(), Target::Nearest(mu))?;
        return normalize_pair(mu, r.iter().copied().collect(), l.iter().copied().collect(), (0.0, 0.0), true);
    }
    let ones = vec![c64(1.0); n];
    let right = arnoldi(|x, y| op.apply(x, y), n, &ones, Target::Leading, opts)?;
    let left = arnoldi(|x, y| op.apply_transpose(x, y), n, &ones, Target::Nearest(right.value), opts)?;
    for r in [&right, &left] {
        if !r.converged && r.residual > 1e-9 {
            return Err(Error::SolverFailure(format!("Arnoldi did not converge (residual {:e})", r.residual)));
        }
    }
    if (left.value - right.value).norm() > 1e-8 * right.value.norm().max(1.0) {
        return Err(Error::SolverFailure(format!("left/right eigenvalues disagree: {} vs {}", left.value, right.value)));
    }
    normalize_pair(right.value, right.vector, left.vector, (right.residual, left.residual), false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasuredGap {
    pub leading: f64,
    pub second_modulus: f64,
    pub gap: f64,
    pub converged: bool,
}

/// Modulus ρ₂ of the second eigenvalue, via the full spectrum (small) or Arnoldi on the deflated operator.
pub fn spectral_gap_measured(op: &DiscretizedOperator) -> Result<MeasuredGap> {
    let pair = leading_eigenpair(op)?;
    let n = op.dim();
    let (rho2, converged) = if n <= DENSE_LIMIT {
        let eigs = eigen::eigenvalues(&op.to_dense())?;
        let lead = eigen::select(&eigs, Target::Nearest(pair.value))?;
        let r = eigs.iter().enumerate().filter(|(i, _)| *i != lead).map(|(_, z)| z.norm()).fold(0.0, f64::max);
        (r, true)
    } else {
        // ℓ(1) = 1 and the right vector is scaled so ℓ(r) is real positive.
        let lr: C64 = pair.left.iter().zip(&pair.right).map(|(a, b)| a * b).sum();
        let apply = |x: &[C64], y: &mut [C64]| {
            op.apply(x, y);
            let c: C64 = pair.left.iter().zip(x).map(|(a, b)| a * b).sum::<C64>() * pair.value / lr;
            for (yi, ri) in y.iter_mut().zip(&pair.right) {
                *yi -= c * ri;
            }
        };
        let start: Vec<C64> = (0..n).map(|j| c64((2.0 * PI * j as f64 / n as f64).cos() + 0.1)).collect();
        let opts = KrylovOpts { dim: 60, max_restarts: 100, tol: 1e-10 };
        let r = arnoldi(apply, n, &start, Target::MaxModulus, &opts)?;
        (r.value.norm(), r.converged)
    };
    Ok(MeasuredGap { leading: pair.value.norm(), second_modulus: rho2, gap: 1.0 - rho2, converged })
}

/// λ̃₊(z) = Σ_i z_i Σ_j ℓ_j φ(A_i, v_j).
pub fn analytic_extension_value(tuple: &MatrixTuple, z: &[C64], grid: &ProjectiveGrid) -> Result<C64> {
    let op = assemble_operator(tuple, z, grid, 0.0)?;
    let pair = leading_eigenpair(&op)?;
    Ok(extension_from_pair(&op, z, &pair))
}

pub fn extension_from_pair(op: &DiscretizedOperator, z: &[C64], pair: &EigenPair) -> C64 {
    let dy = op.dynamics();
    z.iter()
        .enumerate()
        .map(|(i, zi)| zi * pair.left.iter().enumerate().map(|(j, l)| l * dy.phi(i, j)).sum::<C64>())
        .sum()
}

/// (log μ_h − log μ_{−h})/(2h) for the twisted operator at real weights.
pub fn lyapunov_via_log_deriv(tuple: &MatrixTuple, p: &[f64], grid: &ProjectiveGrid, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::InvalidInput(format!("log-derivative step h = {h} outside (0, 0.1]")));
    }
    crate::oracles::validate_weights(p, tuple.len())?;
    let z = real_weights(p);
    let mu = |s: f64| -> Result<f64> {
        let op = assemble_operator(tuple, &z, grid, s)?;
        let v = leading_eigenpair(&op)?.value;
        Ok(v.re)
    };
    let (plus, minus) = rayon::join(|| mu(h), || mu(-h));
    Ok((plus?.ln() - minus?.ln()) / (2.0 * h))
}

/// Chain extension Σ_{i,k} ℓ_{(i,k)} Σ_j P_ij φ(A_j, v_k). The state marginal of ℓ is π(P),
/// so this is Σ_{i,j} π_i P_ij ∫ φ(A_j, ·) dη(· | i).
pub fn chain_extension_value(transition: &DMatrix<C64>, tuple: &MatrixTuple, grid: &ProjectiveGrid) -> Result<C64> {
    let op = assemble_chain_operator(transition, tuple, grid)?;
    let pair = leading_eigenpair(&op)?;
    Ok(chain_extension_from_pair(&op, transition, &pair))
}

pub fn chain_extension_from_pair(op: &DiscretizedOperator, transition: &DMatrix<C64>, pair: &EigenPair) -> C64 {
    let m = op.grid().len();
    let n = transition.nrows();
    let dy = op.dynamics();
    let mut total = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..m {
            let f: C64 = (0..n).map(|j| transition[(i, j)] * dy.phi(j, k)).sum();
            total += pair.left[i * m + k] * f;
        }
    }
    total
}

/// State marginal of the chain's left functional.
pub fn chain_state_marginal(op: &DiscretizedOperator, pair: &EigenPair) -> Vec<C64> {
    let m = op.grid().len();
    pair.left.chunks(m).map(|c| c.iter().sum()).collect()
}

/// Evaluate λ̃₊ at many weight vectors in parallel, preserving order.
pub fn extension_values(tuple: &MatrixTuple, zs: &[Vec<C64>], grid: &ProjectiveGrid) -> Vec<Result<C64>> {
    zs.par_iter().map(|z| analytic_extension_value(tuple, z, grid)).collect()
}

pub fn complex_matrix(p: &DMatrix<f64>) -> DMatrix<C64> {
    p.map(c64)
}

pub fn dvector(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::{rotation, worked_example};
    use std::f64::consts::LN_2;

    fn diag_tuple() -> MatrixTuple {
        MatrixTuple::new(vec![DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])]).unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = ProjectiveGrid::new(8).unwrap();
        assert_eq!(g.angles().len(), 8);
        assert_eq!(g.angles()[1], PI / 8.0);
        assert_eq!(g.spacing(), PI / 8.0);
        assert!(ProjectiveGrid::new(7).is_err());
    }

    #[test]
    fn rotation_by_one_node_is_a_shift() {
        let m = 16;
        let t = MatrixTuple::new(vec![rotation(PI / m as f64)]).unwrap();
        let op = assemble_operator(&t, &[c64(1.0)], &ProjectiveGrid::new(m).unwrap(), 0.0).unwrap();
        let a = op.to_dense();
        for j in 0..m {
            assert!((a[(j, (j + 1) % m)] - c64(1.0)).norm() < 1e-12, "row {j}");
        }
        let gap = spectral_gap_measured(&op).unwrap();
        assert!((gap.second_modulus - 1.0).abs() < 1e-12);
        let pair = leading_eigenpair(&op).unwrap();
        assert!((pair.value - c64(1.0)).norm() < 1e-12);
        for l in &pair.left {
            assert!((l - c64(1.0 / m as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn real_weights_are_stochastic() {
        let t = worked_example();
        let op = assemble_operator(&t, &real_weights(&[0.3, 0.7]), &ProjectiveGrid::new(64).unwrap(), 0.0).unwrap();
        for s in op.row_sums() {
            assert!((s - c64(1.0)).norm() < 1e-12);
        }
        let (min_re, max_im) = op.entry_extremes();
        assert!(min_re >= 0.0 && max_im == 0.0);
    }

    #[test]
    fn weight_sum_violation() {
        let t = worked_example();
        let g = ProjectiveGrid::new(16).unwrap();
        assert!(assemble_operator(&t, &real_weights(&[0.5, 0.6]), &g, 0.0).is_err());
        let t3 = crate::example::generic_gl3();
        assert!(assemble_operator(&t3, &real_weights(&[0.5, 0.5]), &g, 0.0).is_err());
    }

    #[test]
    fn dense_and_krylov_paths_agree() {
        let t = worked_example();
        let z = vec![C64::new(0.5, 3e-4), C64::new(0.5, -3e-4)];
        let small = assemble_operator(&t, &z, &ProjectiveGrid::new(100).unwrap(), 0.0).unwrap();
        let dense = leading_eigenpair(&small).unwrap();
        assert!(dense.dense);
        let n = small.dim();
        let r = arnoldi(|x, y| small.apply(x, y), n, &vec![c64(1.0); n], Target::Leading, &KrylovOpts::default()).unwrap();
        assert!((r.value - dense.value).norm() < 1e-11, "{} vs {}", r.value, dense.value);
    }

    #[test]
    fn diagonal_matrix_extension_is_log_two() {
        let g = ProjectiveGrid::new(512).unwrap();
        let v = analytic_extension_value(&diag_tuple(), &[c64(1.0)], &g).unwrap();
        assert!((v.re - LN_2).abs() < 1e-2 && v.im.abs() < 1e-12, "{v}");
    }

    #[test]
    fn log_derivative_matches_extension_on_worked_example() {
        let (t, p) = (crate::example::worked_example(), crate::example::WORKED_P0.to_vec());
        let g = ProjectiveGrid::new(256).unwrap();
        let v = analytic_extension_value(&t, &real_weights(&p), &g).unwrap();
        let d = lyapunov_via_log_deriv(&t, &p, &g, 1e-4).unwrap();
        assert!((v.re - d).abs() < 1e-6, "{v} vs {d}");
    }

    #[test]
    fn rotations_have_zero_extension() {
        let t = MatrixTuple::new(vec![rotation(0.3), rotation(1.1)]).unwrap();
        let g = ProjectiveGrid::new(300).unwrap();
        let v = analytic_extension_value(&t, &real_weights(&[0.4, 0.6]), &g).unwrap();
        assert!(v.norm() < 1e-12);
        let d = lyapunov_via_log_deriv(&t, &[0.4, 0.6], &g, 1e-2).unwrap();
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn conjugation_symmetry() {
        let t = worked_example();
        let g = ProjectiveGrid::new(400).unwrap();
        let z = vec![C64::new(0.5, 2e-5), C64::new(0.5, -2e-5)];
        let zc: Vec<C64> = z.iter().map(|x| x.conj()).collect();
        let a = assemble_operator(&t, &z, &g, 0.0).unwrap().to_dense();
        let b = assemble_operator(&t, &zc, &g, 0.0).unwrap().to_dense();
        assert_eq!(a.map(|x| x.conj()), b);
        let va = analytic_extension_value(&t, &z, &g).unwrap();
        let vb = analytic_extension_value(&t, &zc, &g).unwrap();
        assert!((va.conj() - vb).norm() < 1e-10);
    }

    #[test]
    fn chain_with_identical_rows_matches_iid() {
        let t = worked_example();
        let g = ProjectiveGrid::new(300).unwrap();
        let p = [0.3, 0.7];
        let rows = complex_matrix(&DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.3, 0.7]));
        let a = chain_extension_value(&rows, &t, &g).unwrap();
        let b = analytic_extension_value(&t, &real_weights(&p), &g).unwrap();
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn chain_marginal_is_stationary_distribution() {
        let t = worked_example();
        let g = ProjectiveGrid::new(100).unwrap();
        let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
        let op = assemble_chain_operator(&complex_matrix(&p), &t, &g).unwrap();
        let pair = leading_eigenpair(&op).unwrap();
        let marg = chain_state_marginal(&op, &pair);
        assert!((marg[0] - c64(2.0 / 3.0)).norm() < 1e-10);
        assert!((marg[1] - c64(1.0 / 3.0)).norm() < 1e-10);
    }

    #[test]
    fn chain_with_equal_matrices_ignores_transition() {
        let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.1, 0.7]);
        let t = MatrixTuple::new(vec![a.clone(), a]).unwrap();
        let g = ProjectiveGrid::new(120).unwrap();
        let p1 = complex_matrix(&DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]));
        let p2 = complex_matrix(&DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.6, 0.4]));
        let a = chain_extension_value(&p1, &t, &g).unwrap();
        let b = chain_extension_value(&p2, &t, &g).unwrap();
        assert!((a - b).norm() < 1e-8);
    }
}
