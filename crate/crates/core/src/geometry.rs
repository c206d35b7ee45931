//! Matrices, projective and Grassmannian geometry, exterior powers.
//!
//! Everything here is real and dense; `d` is expected to be small (≤ 6), so
//! norms come from a full SVD rather than iterative estimates.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values of `g`, sorted descending.
pub fn singular_values(g: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = g.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value.
pub fn op_norm(g: &DMatrix<f64>) -> f64 {
    singular_values(g)[0]
}

fn check_square(g: &DMatrix<f64>) -> Result<()> {
    if g.nrows() != g.ncols() || g.nrows() == 0 {
        return Err(Error::InvalidMatrix(format!(
            "expected a square matrix, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    Ok(())
}

fn check_invertible(s: &[f64]) -> Result<()> {
    let smax = s[0];
    let smin = *s.last().unwrap();
    if !(smin > 0.0) || smin <= f64::EPSILON * smax * s.len() as f64 {
        return Err(Error::InvalidMatrix(format!(
            "matrix is singular (sigma_min = {smin:e}, sigma_max = {smax:e})"
        )));
    }
    Ok(())
}

/// ecc(g) = ‖g‖·‖g⁻¹‖ = σ₁/σ_d.
pub fn eccentricity(g: &DMatrix<f64>) -> Result<f64> {
    check_square(g)?;
    let s = singular_values(g);
    check_invertible(&s)?;
    Ok(s[0] / s[s.len() - 1])
}

/// Per-matrix cached quantities.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct MatrixInfo {
    pub operator_norm: f64,
    pub inverse_norm: f64,
    pub determinant: f64,
    pub eccentricity: f64,
    pub singular_values: Vec<f64>,
}

/// A tuple (A₁, …, A_N) of invertible d×d real matrices.
#[derive(Debug, Clone)]
pub struct MatrixTuple {
    d: usize,
    matrices: Vec<DMatrix<f64>>,
    info: Vec<MatrixInfo>,
    ecc: f64,
    log_norm_sup: f64,
}

impl MatrixTuple {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidInput("matrix tuple is empty".into()));
        }
        let d = matrices[0].nrows();
        if d < 2 {
            return Err(Error::InvalidInput(format!("dimension must be >= 2, got {d}")));
        }
        let mut info = Vec::with_capacity(matrices.len());
        for (i, g) in matrices.iter().enumerate() {
            check_square(g).map_err(|e| Error::InvalidMatrix(format!("A_{}: {e}", i + 1)))?;
            if g.nrows() != d {
                return Err(Error::DimensionMismatch(format!(
                    "A_{} is {}x{}, expected {d}x{d}",
                    i + 1,
                    g.nrows(),
                    g.ncols()
                )));
            }
            let s = singular_values(g);
            check_invertible(&s).map_err(|e| Error::InvalidMatrix(format!("A_{}: {e}", i + 1)))?;
            let smin = s[d - 1];
            info.push(MatrixInfo {
                operator_norm: s[0],
                inverse_norm: 1.0 / smin,
                determinant: g.determinant(),
                eccentricity: s[0] / smin,
                singular_values: s,
            });
        }
        let ecc = info.iter().map(|m| m.eccentricity).fold(1.0, f64::max);
        let log_norm_sup = info
            .iter()
            .map(|m| m.operator_norm.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { d, matrices, info, ecc, log_norm_sup })
    }

    /// Build from row-major flat arrays.
    pub fn from_row_major(d: usize, arrays: &[Vec<f64>]) -> Result<Self> {
        let mut mats = Vec::with_capacity(arrays.len());
        for (i, a) in arrays.iter().enumerate() {
            if a.len() != d * d {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {} has {} entries, expected {}",
                    i + 1,
                    a.len(),
                    d * d
                )));
            }
            mats.push(DMatrix::from_row_slice(d, d, a));
        }
        Self::new(mats)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &DMatrix<f64> {
        &self.matrices[i]
    }

    pub fn info(&self) -> &[MatrixInfo] {
        &self.info
    }

    /// max_i ecc(A_i).
    pub fn ecc(&self) -> f64 {
        self.ecc
    }

    pub fn log_norm_sup(&self) -> f64 {
        self.log_norm_sup
    }

    /// max_i (1 + ecc(A_i)^{2θ}), the per-step Hölder operator bound.
    pub fn holder_factor(&self, theta: f64) -> f64 {
        self.info
            .iter()
            .map(|m| 1.0 + m.eccentricity.powf(2.0 * theta))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every matrix multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.matrices.iter().map(|g| g * c).collect())
    }

    /// The tuple of exterior powers Λ^k A_i.
    pub fn exterior_power(&self, k: usize) -> Result<Self> {
        Self::new(
            self.matrices
                .iter()
                .map(|g| exterior_power(g, k))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Row-major flat representation, used for hashing and reports.
    pub fn to_row_major(&self) -> Vec<Vec<f64>> {
        self.matrices
            .iter()
            .map(|g| {
                let mut v = Vec::with_capacity(self.d * self.d);
                for r in 0..self.d {
                    for c in 0..self.d {
                        v.push(g[(r, c)]);
                    }
                }
                v
            })
            .collect()
    }
}

/// A line in ℝ^d stored as a unit vector whose first nonzero coordinate is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    v: DVector<f64>,
}

impl ProjectivePoint {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("projective point needs a nonzero finite vector".into()));
        }
        let mut v = v / n;
        if let Some(first) = v.iter().copied().find(|x| *x != 0.0) {
            if first < 0.0 {
                v = -v;
            }
        }
        Ok(Self { v })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    /// The point of ℙ¹ at angle `phi` (any real; reduced mod π).
    pub fn from_angle(phi: f64) -> Self {
        Self::new(DVector::from_column_slice(&[phi.cos(), phi.sin()])).expect("unit vector")
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.v
    }

    /// Angle in [0, π) for d = 2.
    pub fn angle(&self) -> f64 {
        assert_eq!(self.v.len(), 2, "angle is defined for d = 2 only");
        let a = self.v[1].atan2(self.v[0]).rem_euclid(std::f64::consts::PI);
        if a >= std::f64::consts::PI {
            0.0
        } else {
            a
        }
    }
}

/// ‖u∧v‖ for unit vectors u, v, computed from the Plücker coordinates.
fn wedge_norm(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let d = u.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let w = u[i] * v[j] - u[j] * v[i];
            s += w * w;
        }
    }
    s.sqrt()
}

/// Fubini–Study distance ‖u∧v‖/(‖u‖‖v‖); for d = 2 this is |sin∠(u, v)|.
pub fn fs_distance(u: &ProjectivePoint, v: &ProjectivePoint) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", u.dim(), v.dim())));
    }
    Ok(wedge_norm(&u.v, &v.v).min(1.0))
}

/// g·[v] = [gv].
pub fn projective_action(g: &DMatrix<f64>, v: &ProjectivePoint) -> Result<ProjectivePoint> {
    if g.ncols() != v.dim() {
        return Err(Error::DimensionMismatch(format!("matrix {}x{} on ℙ^{}", g.nrows(), g.ncols(), v.dim() - 1)));
    }
    ProjectivePoint::new(g * &v.v).map_err(|_| Error::InvalidMatrix("g v = 0".into()))
}

/// φ(g, [v]) = log‖gv‖ for the unit representative v.
pub fn log_norm_phi(g: &DMatrix<f64>, v: &ProjectivePoint) -> f64 {
    (g * &v.v).norm().ln()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Sorted k-subsets of {0, …, d−1} in lexicographic order.
pub fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(d, k));
    if k > d {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < d - k + i {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn minor(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    DMatrix::from_fn(k, k, |a, b| g[(rows[a], cols[b])]).determinant()
}

/// Matrix of Λ^k g in the lexicographic wedge basis: entry (I, J) is the minor det g[I, J].
pub fn exterior_power(g: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    check_square(g)?;
    let d = g.nrows();
    if k == 0 || k > d {
        return Err(Error::InvalidInput(format!("exterior power k = {k} outside 1..={d}")));
    }
    let idx = combinations(d, k);
    let n = idx.len();
    Ok(DMatrix::from_fn(n, n, |a, b| minor(g, &idx[a], &idx[b])))
}

/// Wedge of the columns of a d×k matrix, in the lexicographic basis.
pub fn wedge_columns(basis: &DMatrix<f64>) -> DVector<f64> {
    let d = basis.nrows();
    let k = basis.ncols();
    let cols: Vec<usize> = (0..k).collect();
    let idx = combinations(d, k);
    DVector::from_iterator(idx.len(), idx.iter().map(|rows| minor(basis, rows, &cols)))
}

/// A k-plane in ℝ^d with orthonormal basis and unit wedge representative.
#[derive(Debug, Clone)]
pub struct GrassmannPoint {
    k: usize,
    basis: DMatrix<f64>,
    wedge: DVector<f64>,
}

impl GrassmannPoint {
    /// The span of the columns of `span` (d×k, full column rank).
    pub fn from_span(span: &DMatrix<f64>) -> Result<Self> {
        let d = span.nrows();
        let k = span.ncols();
        if k == 0 || k >= d {
            return Err(Error::InvalidInput(format!("Grassmann point needs 1 <= k <= d-1, got k = {k}, d = {d}")));
        }
        let q = span.clone().qr().q();
        let basis = q.columns(0, k).into_owned();
        let w = wedge_columns(&basis);
        let n = w.norm();
        if !(n > 0.5) {
            return Err(Error::InvalidInput("spanning vectors are linearly dependent".into()));
        }
        let mut wedge = w / n;
        if let Some(first) = wedge.iter().copied().find(|x| x.abs() > 1e-14) {
            if first < 0.0 {
                wedge = -wedge;
            }
        }
        Ok(Self { k, basis, wedge })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn wedge(&self) -> &DVector<f64> {
        &self.wedge
    }
}

/// min over sign of ‖v_V ∓ v_W‖ in Λ^k ℝ^d.
pub fn grassmann_distance(a: &GrassmannPoint, b: &GrassmannPoint) -> Result<f64> {
    if a.k != b.k || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Gr({},{}) vs Gr({},{})",
            a.k,
            a.dim(),
            b.k,
            b.dim()
        )));
    }
    Ok((&a.wedge - &b.wedge).norm().min((&a.wedge + &b.wedge).norm()))
}

/// g(V), re-orthonormalized.
pub fn grassmann_action(g: &DMatrix<f64>, v: &GrassmannPoint) -> Result<GrassmannPoint> {
    if g.ncols() != v.dim() {
        return Err(Error::DimensionMismatch(format!("matrix {}x{} on Gr(k,{})", g.nrows(), g.ncols(), v.dim())));
    }
    GrassmannPoint::from_span(&(g * &v.basis))
}

/// Random samplers shared by the lemma suites and tests.
pub mod sampling {
    use super::*;

    pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<f64> {
        loop {
            let v = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
            let n: f64 = v.norm();
            if n > 1e-8 {
                return v / n;
            }
        }
    }

    /// Haar-distributed orthogonal matrix.
    pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<f64> {
        let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
        let (q, r) = g.qr().unpack();
        let mut q = q;
        for j in 0..d {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        q
    }

    /// R₁·diag(s)·R₂ with log-uniform singular values in [smin, smax].
    pub fn matrix<R: Rng + ?Sized>(rng: &mut R, d: usize, smin: f64, smax: f64) -> DMatrix<f64> {
        let r1 = orthogonal(rng, d);
        let r2 = orthogonal(rng, d);
        let (a, b) = (smin.ln(), smax.ln());
        let s = DVector::from_fn(d, |_, _| (a + (b - a) * rng.random::<f64>()).exp());
        r1 * DMatrix::from_diagonal(&s) * r2
    }

    /// Default lemma-suite matrix: singular values in [1/5, 5].
    pub fn lemma_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<f64> {
        matrix(rng, d, 0.2, 5.0)
    }

    pub fn projective_point<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ProjectivePoint {
        ProjectivePoint::new(unit_vector(rng, d)).expect("unit vector")
    }

    pub fn grassmann_point<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> GrassmannPoint {
        loop {
            let span = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(rng));
            if let Ok(p) = GrassmannPoint::from_span(&span) {
                return p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn rot(a: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
    }

    #[test]
    fn eccentricity_examples() {
        assert_relative_eq!(eccentricity(&DMatrix::identity(3, 3)).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(eccentricity(&diag(&[2.0, 0.5])).unwrap(), 4.0, epsilon = 1e-14);
        assert_relative_eq!(eccentricity(&diag(&[3.0, 2.0, 1.0])).unwrap(), 3.0, epsilon = 1e-14);
        assert!(matches!(eccentricity(&diag(&[1.0, 0.0])), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn tuple_caches() {
        let t = MatrixTuple::new(vec![diag(&[2.0, 0.5]), rot(0.3) * 3.0]).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.len(), 2);
        assert_relative_eq!(t.ecc(), 4.0, epsilon = 1e-13);
        assert_relative_eq!(t.log_norm_sup(), 3f64.ln(), epsilon = 1e-13);
        for m in t.info() {
            assert_relative_eq!(m.inverse_norm * m.singular_values[1], 1.0, epsilon = 1e-10);
        }
        assert_relative_eq!(t.info()[1].eccentricity, 1.0, epsilon = 1e-13);
        assert_relative_eq!(t.info()[1].determinant, 9.0, epsilon = 1e-12);
        assert!(MatrixTuple::new(vec![diag(&[1.0, 1.0]), diag(&[1.0, 1.0, 1.0])]).is_err());
    }

    #[test]
    fn fs_distance_examples() {
        let e1 = ProjectivePoint::from_slice(&[1.0, 0.0]).unwrap();
        let e2 = ProjectivePoint::from_slice(&[0.0, 1.0]).unwrap();
        let d = ProjectivePoint::from_slice(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(fs_distance(&e1, &e2).unwrap(), 1.0);
        assert_eq!(fs_distance(&e1, &e1).unwrap(), 0.0);
        assert_relative_eq!(fs_distance(&e1, &d).unwrap(), FRAC_1_SQRT_2, epsilon = 1e-15);
        let e3 = ProjectivePoint::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        assert!(fs_distance(&e1, &e3).is_err());
    }

    #[test]
    fn antipodes_are_identified() {
        let a = ProjectivePoint::from_slice(&[0.3, -0.7]).unwrap();
        let b = ProjectivePoint::from_slice(&[-0.3, 0.7]).unwrap();
        assert_eq!(a, b);
        assert!(a.vector()[0] > 0.0);
    }

    #[test]
    fn projective_action_examples() {
        let v = ProjectivePoint::from_slice(&[0.6, 0.8]).unwrap();
        assert_eq!(projective_action(&DMatrix::identity(2, 2), &v).unwrap(), v);
        let e1 = ProjectivePoint::from_slice(&[1.0, 0.0]).unwrap();
        assert_eq!(projective_action(&diag(&[2.0, 0.5]), &e1).unwrap(), e1);
        let img = projective_action(&rot(PI / 3.0), &ProjectivePoint::from_angle(0.0)).unwrap();
        assert_relative_eq!(img.angle(), PI / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn log_norm_phi_examples() {
        let v = ProjectivePoint::from_slice(&[0.6, 0.8]).unwrap();
        assert_eq!(log_norm_phi(&DMatrix::identity(2, 2), &v), 0.0);
        let e1 = ProjectivePoint::from_slice(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(log_norm_phi(&diag(&[2.0, 0.5]), &e1), LN_2, epsilon = 1e-15);
        // ‖(2, 1/2)/√2‖² = (4 + 1/4)/2
        let d = ProjectivePoint::from_slice(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(log_norm_phi(&diag(&[2.0, 0.5]), &d), 0.5 * (4.25f64 / 2.0).ln(), epsilon = 1e-15);
    }

    #[test]
    fn combinations_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(5, 0), 1);
    }

    #[test]
    fn exterior_power_examples() {
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.0, 0.7, 0.1, 1.5]);
        assert_eq!(exterior_power(&g, 1).unwrap(), g);
        let top = exterior_power(&g, 3).unwrap();
        assert_eq!(top.shape(), (1, 1));
        assert_relative_eq!(top[(0, 0)], g.determinant(), epsilon = 1e-13);
        let l2 = exterior_power(&diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert_relative_eq!(l2, diag(&[6.0, 3.0, 2.0]), epsilon = 1e-14);
        assert_relative_eq!(op_norm(&l2), 6.0, epsilon = 1e-13);
        assert!(exterior_power(&g, 0).is_err());
        assert!(exterior_power(&g, 4).is_err());
    }

    #[test]
    fn exterior_power_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = sampling::lemma_matrix(&mut rng, 4);
        let b = sampling::lemma_matrix(&mut rng, 4);
        let lhs = exterior_power(&(&a * &b), 2).unwrap();
        let rhs = exterior_power(&a, 2).unwrap() * exterior_power(&b, 2).unwrap();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
    }

    #[test]
    fn grassmann_distance_examples() {
        let e = |d: usize, cols: &[usize]| {
            GrassmannPoint::from_span(&DMatrix::from_fn(d, cols.len(), |r, c| if r == cols[c] { 1.0 } else { 0.0 })).unwrap()
        };
        let v = e(4, &[0, 1]);
        assert_relative_eq!(grassmann_distance(&v, &v).unwrap(), 0.0);
        assert_relative_eq!(grassmann_distance(&v, &e(4, &[2, 3])).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        let a = e(2, &[0]);
        let b = GrassmannPoint::from_span(&DMatrix::from_column_slice(2, 1, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2])).unwrap();
        let direct = ((1.0 - FRAC_1_SQRT_2).powi(2) + 0.5).sqrt();
        assert_relative_eq!(grassmann_distance(&a, &b).unwrap(), direct, epsilon = 1e-14);
        assert!(grassmann_distance(&v, &e(4, &[0])).is_err());
    }

    #[test]
    fn grassmann_action_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = sampling::grassmann_point(&mut rng, 4, 2);
        let w = grassmann_action(&DMatrix::identity(4, 4), &v).unwrap();
        assert!(grassmann_distance(&v, &w).unwrap() < 1e-12);

        let plane = GrassmannPoint::from_span(&DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        let img = grassmann_action(&diag(&[3.0, 2.0, 1.0]), &plane).unwrap();
        assert!(grassmann_distance(&plane, &img).unwrap() < 1e-14);

        // wedge-vector oracle: Λ^k g applied to the wedge representative
        for _ in 0..20 {
            let g = sampling::lemma_matrix(&mut rng, 4);
            let v = sampling::grassmann_point(&mut rng, 4, 2);
            let img = grassmann_action(&g, &v).unwrap();
            let w = exterior_power(&g, 2).unwrap() * v.wedge();
            let w = w.normalize();
            let dist = (img.wedge() - &w).norm().min((img.wedge() + &w).norm());
            assert!(dist < 1e-10, "{dist}");
        }
    }

    #[test]
    fn sampled_matrices_respect_singular_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = sampling::lemma_matrix(&mut rng, 3);
            let s = singular_values(&g);
            assert!(s[0] <= 5.0 + 1e-12 && s[2] >= 0.2 - 1e-12);
        }
    }
}
