use num_complex::Complex64;
use proptest::prelude::*;
use smsd::linalg::{
    build_real_model, cholesky_upper, real_contract_vector, real_expand_matrix, real_expand_vector, ComplexMatrix,
    RealMatrix,
};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b)), len)
}

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_vec(rows * cols).prop_map(move |d| ComplexMatrix::from_rows(rows, cols, d).unwrap())
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

proptest! {
    #[test]
    fn expansion_commutes_with_products((h, x) in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| (complex_matrix(r, c), complex_vec(c)))) {
        let lhs = real_expand_matrix(&h).mul_vec(&real_expand_vector(&x));
        let rhs = real_expand_vector(&h.mul_vec(&x));
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expansion_preserves_norm_and_round_trips(v in (1usize..8).prop_flat_map(complex_vec)) {
        let e = real_expand_vector(&v);
        let n: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((sq(&e) - n).abs() < 1e-12);
        prop_assert_eq!(real_contract_vector(&e), v);
    }

    #[test]
    fn cholesky_reconstructs_gram(h in (1usize..5, 1usize..4).prop_flat_map(|(extra, c)| complex_matrix(c + extra, c))) {
        let hb = real_expand_matrix(&h);
        let mut g = hb.transpose().matmul(&hb);
        for i in 0..g.rows() {
            g[(i, i)] += 1e-3;
        }
        let d = cholesky_upper(&g).unwrap();
        for r in 0..d.rows() {
            for c in 0..r {
                prop_assert_eq!(d[(r, c)], 0.0);
            }
        }
        prop_assert!(d.transpose().matmul(&d).relative_error(&g) < 1e-12);
    }

    /// With no regularizer, |y - Hx|^2 and |z - Dx|^2 differ by a constant.
    #[test]
    fn metric_offset_is_constant_when_determined(
        (h, y, xs) in (1usize..4).prop_flat_map(|nt| (complex_matrix(nt + 1, nt), complex_vec(nt + 1), prop::collection::vec(complex_vec(nt), 2..6)))
    ) {
        let model = build_real_model(&h, &y, 0.1).unwrap();
        prop_assert_eq!(model.phi, 0.0);
        let yb = real_expand_vector(&y);
        let offsets: Vec<f64> = xs
            .iter()
            .map(|x| {
                let xb = real_expand_vector(x);
                let hx = model.h_bar.mul_vec(&xb);
                let full: f64 = yb.iter().zip(&hx).map(|(a, b)| (a - b) * (a - b)).sum();
                full - model.metric(&xb)
            })
            .collect();
        let scale = 1.0 + sq(&yb);
        for o in &offsets {
            prop_assert!((o - offsets[0]).abs() < 1e-9 * scale, "{offsets:?}");
        }
    }

    /// With the regularizer, |y - Hx|^2 + phi|x|^2 and |z - Dx|^2 differ by a constant.
    #[test]
    fn regularized_metric_offset_is_constant(
        (h, y, xs) in (2usize..5).prop_flat_map(|nt| (complex_matrix(nt - 1, nt), complex_vec(nt - 1), prop::collection::vec(complex_vec(nt), 2..6)))
    ) {
        let model = build_real_model(&h, &y, 0.25).unwrap();
        prop_assert_eq!(model.phi, 0.25);
        let yb = real_expand_vector(&y);
        let offsets: Vec<f64> = xs
            .iter()
            .map(|x| {
                let xb = real_expand_vector(x);
                let hx = model.h_bar.mul_vec(&xb);
                let full: f64 = yb.iter().zip(&hx).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + model.phi * sq(&xb);
                full - model.metric(&xb)
            })
            .collect();
        let scale = 1.0 + sq(&yb);
        for o in &offsets {
            prop_assert!((o - offsets[0]).abs() < 1e-9 * scale, "{offsets:?}");
        }
    }
}

#[test]
fn singular_gram_is_rejected() {
    let g = RealMatrix::from_rows(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
    assert!(cholesky_upper(&g).is_err());
}
