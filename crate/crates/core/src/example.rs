//! Fixed tuples used by the CLI `example` command, the verification suite and tests.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::geometry::MatrixTuple;
use crate::oracles::CocycleSpec;

pub const WORKED_A: f64 = 2.0;
pub const WORKED_PSI: f64 = PI / 3.0;
pub const WORKED_THETA: f64 = 0.5;
pub const WORKED_GAP: f64 = 0.26;
pub const WORKED_P0: [f64; 2] = [0.5, 0.5];

pub fn rotation(psi: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[psi.cos(), -psi.sin(), psi.sin(), psi.cos()])
}

/// A₁ = diag(a, 1/a), A₂ = R_ψ A₁ R_ψ⁻¹.
pub fn hyperbolic_pair(a: f64, psi: f64) -> MatrixTuple {
    let a1 = DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, 1.0 / a]);
    let r = rotation(psi);
    let a2 = &r * &a1 * r.transpose();
    MatrixTuple::new(vec![a1, a2]).expect("invertible by construction")
}

/// The two-matrix family at a = 2, ψ = π/3.
pub fn worked_example() -> MatrixTuple {
    hyperbolic_pair(WORKED_A, WORKED_PSI)
}

pub fn worked_example_spec() -> CocycleSpec {
    CocycleSpec::iid(worked_example(), WORKED_P0.to_vec()).expect("valid weights")
}

/// Shear and diagonal matrix sharing the fixed direction e₁. The gap is carried
/// entirely by the diagonal matrix, so it scales linearly with its weight.
pub fn shared_fixed_point_pair() -> MatrixTuple {
    let shear = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let hyp = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
    MatrixTuple::new(vec![shear, hyp]).expect("invertible by construction")
}

/// A fixed generic tuple in GL(3) with three distinct exponents.
pub fn generic_gl3() -> MatrixTuple {
    MatrixTuple::new(vec![
        DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.2, 1.0, 0.4, -0.3, 0.1, 0.6]),
        DMatrix::from_row_slice(3, 3, &[0.9, -0.5, 0.2, 0.4, 1.6, 0.0, 0.1, -0.2, 0.7]),
    ])
    .expect("invertible by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn worked_example_basics() {
        let t = worked_example();
        for m in t.info() {
            assert_relative_eq!(m.eccentricity, 4.0, epsilon = 1e-12);
            assert_relative_eq!(m.determinant, 1.0, epsilon = 1e-12);
            assert_relative_eq!(m.operator_norm, 2.0, epsilon = 1e-12);
        }
        assert_relative_eq!(t.holder_factor(0.5), 5.0, epsilon = 1e-12);
    }
}
