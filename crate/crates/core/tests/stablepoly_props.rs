use nalgebra::DMatrix;
use proptest::prelude::*;

use srks::rational::{int, rat};
use srks::stablepoly::roots::is_interlacing;
use srks::stablepoly::{
    apply_one_minus_dzz, char_poly_x2, common_interlacing_test, is_real_rooted, max_real_root,
    zx_mul, RatMatrix, UnivariatePoly, ZXPoly,
};
use srks::Rational;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn univariate(max_deg: usize) -> impl Strategy<Value = UnivariatePoly> {
    prop::collection::vec(-4i64..=4, 1..=max_deg + 1).prop_map(|c| UnivariatePoly::from_ints(&c))
}

/// Multi-affine in `z` with `m` variables.
fn multi_affine_zx(m: usize) -> impl Strategy<Value = ZXPoly> {
    prop::collection::vec((prop::collection::vec(0u8..=1, m), univariate(2)), 1..6)
        .prop_map(move |terms| ZXPoly::from_terms(m, terms).unwrap())
}

fn symmetric(n: usize) -> impl Strategy<Value = RatMatrix> {
    prop::collection::vec(-3i64..=3, n * n).prop_map(move |c| {
        let mut m = RatMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, int(c[i * n + j]));
                m.set(j, i, int(c[i * n + j]));
            }
        }
        m
    })
}

fn distinct_roots(max: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(-8i64..=8, 1..=max).prop_map(|s| s.into_iter().collect())
}

fn from_int_roots(roots: &[i64]) -> UnivariatePoly {
    UnivariatePoly::from_roots(&roots.iter().map(|&r| int(r)).collect::<Vec<_>>())
}

/// Eigenvalues of the companion matrix of a monic polynomial.
fn companion_eigenvalues(p: &UnivariatePoly) -> Vec<(f64, f64)> {
    let m = p.monic();
    let c = m.to_f64_coeffs();
    let n = c.len() - 1;
    let comp = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -c[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    comp.complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_evaluates_to_product_of_values(
        p in multi_affine_zx(3),
        q in multi_affine_zx(3),
        x in small_rational(),
        z in prop::collection::vec(small_rational(), 3),
    ) {
        let pq = zx_mul(&p, &q).unwrap();
        prop_assert_eq!(pq.eval(&x, &z).unwrap(), p.eval(&x, &z).unwrap() * q.eval(&x, &z).unwrap());
    }

    #[test]
    fn operators_on_distinct_variables_commute(p in multi_affine_zx(3), q in multi_affine_zx(3), i in 0usize..3, j in 0usize..3) {
        let pq = zx_mul(&p, &q).unwrap();
        let ij = apply_one_minus_dzz(&apply_one_minus_dzz(&pq, i).unwrap(), j).unwrap();
        let ji = apply_one_minus_dzz(&apply_one_minus_dzz(&pq, j).unwrap(), i).unwrap();
        prop_assert_eq!(ij, ji);
    }

    #[test]
    fn char_poly_x2_is_det_of_x2_minus_m(m in symmetric(3), x in small_rational()) {
        let p = char_poly_x2(&m).unwrap();
        let mut shifted = RatMatrix::identity(3).scale(&(&x * &x));
        shifted.add_assign(&m.scale(&int(-1)));
        prop_assert_eq!(p.eval(&x), shifted.det());
        prop_assert!(p.is_even());
    }

    #[test]
    fn sturm_agrees_with_companion_eigenvalues(roots in distinct_roots(4), quad in prop::option::of((-3i64..=3, 1i64..=4))) {
        let mut p = from_int_roots(&roots);
        if let Some((b, c)) = quad {
            // x² + bx + (b² + c): discriminant −3b² − 4c < 0
            p = &p * &UnivariatePoly::from_ints(&[b * b + c, b, 1]);
        }
        let complex = companion_eigenvalues(&p).iter().filter(|(_, im)| im.abs() > 1e-6).count();
        prop_assert_eq!(is_real_rooted(&p).unwrap(), complex == 0);
        prop_assert_eq!(complex, if quad.is_some() { 2 } else { 0 });
    }

    #[test]
    fn max_root_matches_the_largest_factor(roots in distinct_roots(5), scale in 1i64..=5) {
        let p = from_int_roots(&roots).scale(&int(scale));
        let want = *roots.iter().max().unwrap() as f64;
        prop_assert!((max_real_root(&p, 1e-12).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn char_poly_x2_of_a_gram_matrix_has_nonnegative_largest_root(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 1..4)) {
        let mut g = RatMatrix::zeros(2);
        for r in &rows {
            g.add_assign(&RatMatrix::outer(&[int(r[0]), int(r[1])]));
        }
        let p = char_poly_x2(&g).unwrap();
        prop_assert!(is_real_rooted(&p).unwrap());
        let top = max_real_root(&p, 1e-12).unwrap();
        prop_assert!(top >= 0.0);
        let lmax = srks::stablepoly::vectors::largest_eigenvalue(&g.to_f64());
        prop_assert!((top * top - lmax).abs() < 1e-8 * (1.0 + lmax));
    }

    #[test]
    fn common_interlacer_gives_a_common_interlacing(
        interlacer in distinct_roots(3),
        picks in prop::collection::vec((0u8..=2, 0u8..=2), 4),
    ) {
        // f roots: one per interval (−∞, a_1], [a_1, a_2], …, [a_{n−1}, ∞)
        let a: Vec<Rational> = interlacer.iter().map(|&r| int(r)).collect();
        let n = a.len() + 1;
        let root_in = |k: usize, pick: u8| -> Rational {
            let lo = if k == 0 { &a[0] - int(3) } else { a[k - 1].clone() };
            let hi = if k == n - 1 { &a[n - 2] + int(3) } else { a[k].clone() };
            &lo + (&hi - &lo) * rat(pick as i64, 2)
        };
        let f1 = UnivariatePoly::from_roots(&(0..n).map(|k| root_in(k, picks[k % 4].0)).collect::<Vec<_>>());
        let f2 = UnivariatePoly::from_roots(&(0..n).map(|k| root_in(k, picks[k % 4].1)).collect::<Vec<_>>());
        let g = UnivariatePoly::from_roots(&a);
        prop_assert!(is_interlacing(&g, &f1).unwrap());
        prop_assert!(is_interlacing(&g, &f2).unwrap());
        prop_assert!(common_interlacing_test(&[f1, f2.scale(&rat(3, 2))], 8).unwrap());
    }
}

#[test]
fn interlacing_failure_is_detected() {
    // roots {0, 1} and {3, 4}: no common interlacer, and the average has complex roots
    let f = from_int_roots(&[0, 1]);
    let g = from_int_roots(&[3, 4]);
    assert!(!common_interlacing_test(&[f, g], 4).unwrap());
}
