//! Property tests for the symbolic layer: involution algebra, cyclic
//! equivalence under commutators, evaluation homomorphism, and the
//! parser/printer round trip.

use faer::Mat;
use ncsohs::freealg::{
    cyclically_equivalent, evaluate, parse_poly, poly_to_string, Coeff, NcPolynomial, Word,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn word_strategy(nvars: u32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1..=nvars, 0..=max_len).prop_map(Word::from_letters)
}

fn rational_strategy() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=5).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn poly_strategy(nvars: u32, max_len: usize, max_terms: usize) -> impl Strategy<Value = NcPolynomial> {
    prop::collection::vec((word_strategy(nvars, max_len), rational_strategy()), 0..=max_terms)
        .prop_map(move |terms| {
            let mut p = NcPolynomial::zero(nvars as usize);
            for (w, c) in terms {
                p.add_term(w, c);
            }
            p
        })
}

fn sym_matrix_strategy(size: usize) -> impl Strategy<Value = Mat<f64>> {
    prop::collection::vec(-1.0f64..1.0, size * (size + 1) / 2).prop_map(move |vals| {
        let mut m = Mat::<f64>::zeros(size, size);
        let mut idx = 0;
        for i in 0..size {
            for j in i..size {
                m[(i, j)] = vals[idx];
                m[(j, i)] = vals[idx];
                idx += 1;
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn involution_is_an_anti_homomorphism(
        u in word_strategy(3, 5),
        v in word_strategy(3, 5),
    ) {
        prop_assert_eq!(u.concat(&v).star(), v.star().concat(&u.star()));
        prop_assert_eq!(u.star().star(), u);
    }

    #[test]
    fn commutators_are_cyclically_trivial(
        p in poly_strategy(2, 3, 4),
        q in poly_strategy(2, 3, 4),
        f in poly_strategy(2, 3, 4),
    ) {
        let comm = NcPolynomial::commutator(&p, &q);
        let shifted = &f + &comm;
        prop_assert!(cyclically_equivalent(&f, &shifted));
    }

    #[test]
    fn evaluation_is_a_homomorphism(
        f in poly_strategy(2, 3, 3),
        g in poly_strategy(2, 3, 3),
        a in sym_matrix_strategy(3),
        b in sym_matrix_strategy(3),
    ) {
        let point = [a, b];
        let fg = &f * &g;
        let left = evaluate(&fg, &point).unwrap();
        let right = {
            let fa = evaluate(&f, &point).unwrap();
            let ga = evaluate(&g, &point).unwrap();
            &fa * &ga
        };
        let scale = 1.0 + (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| left[(i, j)].abs().max(right[(i, j)].abs()))
            .fold(0.0f64, f64::max);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!(
                    (left[(i, j)] - right[(i, j)]).abs() <= 1e-10 * scale,
                    "mismatch at ({}, {}): {} vs {}", i, j, left[(i, j)], right[(i, j)]
                );
            }
        }
    }

    #[test]
    fn cyclically_equivalent_polys_share_traces(
        f in poly_strategy(2, 3, 4),
        p in poly_strategy(2, 2, 2),
        q in poly_strategy(2, 2, 2),
        a in sym_matrix_strategy(4),
        b in sym_matrix_strategy(4),
    ) {
        let g = &f + &NcPolynomial::commutator(&p, &q);
        let point = [a, b];
        let fa = evaluate(&f, &point).unwrap();
        let ga = evaluate(&g, &point).unwrap();
        let tr = |m: &Mat<f64>| (0..4).map(|i| m[(i, i)]).sum::<f64>();
        let scale = 1.0 + tr(&fa).abs().max(tr(&ga).abs());
        prop_assert!((tr(&fa) - tr(&ga)).abs() <= 1e-8 * scale);
    }

    #[test]
    fn printer_parser_round_trip(
        f in poly_strategy(4, 6, 8),
    ) {
        let text = poly_to_string(&f);
        let back = parse_poly(&text, 4).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn gram_expansion_matches_inner_products(
        coeffs in prop::collection::vec(rational_strategy(), 9),
    ) {
        // <A_w, G> over the Gram system of W_1* G W_1 reproduces the
        // symmetrized coefficients exactly
        let basis = ncsohs::freealg::enumerate_basis(2, 1).unwrap();
        let mut g = vec![vec![BigRational::from_int(0); 3]; 3];
        let mut idx = 0;
        for i in 0..3 {
            for j in i..3 {
                g[i][j] = coeffs[idx].clone();
                g[j][i] = coeffs[idx].clone();
                idx += 1;
            }
        }
        let f = ncsohs::gram::gram_to_poly_exact(&g, &basis).unwrap();
        let system = ncsohs::gram::build_gram_system(&f, 1, ncsohs::Mode::Eigenvalue).unwrap();
        for con in &system.constraints {
            prop_assert_eq!(con.inner_product(|u, v| g[u][v].clone()), con.rhs.clone());
        }
    }
}
