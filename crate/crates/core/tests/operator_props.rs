use lyocert::example::{hyperbolic_pair, worked_example};
use lyocert::transfer::{
    analytic_extension_value, assemble_chain_operator, assemble_operator, complex_matrix, real_weights, ProjectiveGrid, C64,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_weight_operator_is_row_stochastic(p in 0.05f64..0.95, a in 1.2f64..4.0, psi in 0.2f64..1.4, m in 16usize..200) {
        let t = hyperbolic_pair(a, psi);
        let op = assemble_operator(&t, &real_weights(&[p, 1.0 - p]), &ProjectiveGrid::new(m).unwrap(), 0.0).unwrap();
        for s in op.row_sums() {
            prop_assert!((s - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let (min_re, max_im) = op.entry_extremes();
        prop_assert!(min_re >= 0.0 && max_im == 0.0);
    }

    #[test]
    fn chain_operator_is_row_stochastic(a in 0.05f64..0.95, b in 0.05f64..0.95) {
        let p = DMatrix::from_row_slice(2, 2, &[a, 1.0 - a, b, 1.0 - b]);
        let op = assemble_chain_operator(&complex_matrix(&p), &worked_example(), &ProjectiveGrid::new(64).unwrap()).unwrap();
        prop_assert_eq!(op.dim(), 128);
        for s in op.row_sums() {
            prop_assert!((s - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn extension_commutes_with_conjugation(re in 0.3f64..0.7, im in -0.05f64..0.05) {
        let t = worked_example();
        let grid = ProjectiveGrid::new(96).unwrap();
        let z = vec![C64::new(re, im), C64::new(1.0 - re, -im)];
        let zc: Vec<C64> = z.iter().map(|w| w.conj()).collect();
        let a = analytic_extension_value(&t, &z, &grid).unwrap();
        let b = analytic_extension_value(&t, &zc, &grid).unwrap();
        prop_assert!((a.conj() - b).norm() < 1e-10);
    }

    #[test]
    fn extension_is_real_on_real_weights(p in 0.1f64..0.9) {
        let v = analytic_extension_value(&worked_example(), &real_weights(&[p, 1.0 - p]), &ProjectiveGrid::new(96).unwrap()).unwrap();
        prop_assert!(v.im.abs() < 1e-12 && v.re > 0.0);
    }
}

#[test]
fn weights_must_sum_to_one() {
    let g = ProjectiveGrid::new(16).unwrap();
    assert!(assemble_operator(&worked_example(), &real_weights(&[0.5, 0.6]), &g, 0.0).is_err());
}
