use proptest::prelude::*;

use tricf::cfrac::{cf_determinant, secular_two_sided_at, CfOptions};
use tricf::factor::{factorize, wavefunction_auto, Layout};
use tricf::hermitize::{count_below, double, singular_values_finite, SingularSearch};
use tricf::operator::FiniteTridiagonal;
use tricf::oracle::{jacobi_eigen, lu_det, svd_oracle};
use tricf::C64;

fn complex() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| C64::new(re, im))
}

/// General complex tridiagonal matrix with `2..=12` rows.
fn tridiagonal() -> impl Strategy<Value = FiniteTridiagonal> {
    (2usize..=12, -4i64..=4).prop_flat_map(|(n, offset)| {
        (
            prop::collection::vec(complex(), n),
            prop::collection::vec(complex(), n - 1),
            prop::collection::vec(complex(), n - 1),
        )
            .prop_map(move |(d, u, l)| FiniteTridiagonal::new(offset, d, u, l).unwrap())
    })
}

fn hermitian() -> impl Strategy<Value = FiniteTridiagonal> {
    (2usize..=12).prop_flat_map(|n| {
        (prop::collection::vec(-2.0f64..2.0, n), prop::collection::vec(complex(), n - 1)).prop_map(|(d, u)| {
            let lower = u.iter().map(|x| x.conj()).collect();
            FiniteTridiagonal::new(0, d.into_iter().map(|x| C64::new(x, 0.0)).collect(), u, lower).unwrap()
        })
    })
}

fn shifted_dense(h: &FiniteTridiagonal, z: C64) -> tricf::oracle::DenseMatrix {
    let mut m = h.to_dense();
    for i in 0..h.dim() {
        m[(i, i)] -= z;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factors_reassemble_the_shifted_matrix(h in tridiagonal(), z in complex(), pick in 0usize..12) {
        let want = shifted_dense(&h, z);
        let norm = 1.0 + want.max_abs();
        let center = h.lo() + (pick % h.dim()) as i64;
        for layout in [Layout::OneSided, Layout::TwoSidedCenter(center)] {
            let f = factorize(&h, z, layout).unwrap();
            let back = f.reassemble();
            for i in 0..h.dim() {
                for j in 0..h.dim() {
                    prop_assert!((back[(i, j)] - want[(i, j)]).norm() <= 1e-12 * norm);
                }
            }
        }
    }

    #[test]
    fn fraction_determinant_matches_lu(h in tridiagonal(), z in complex()) {
        let exact = lu_det(&h.to_dense(), z);
        let cf = cf_determinant(&h, z).value();
        let ufl = factorize(&h, z, Layout::OneSided).unwrap().determinant();
        let scale = exact.norm().max(1e-300);
        prop_assert!((cf - exact).norm() <= 1e-10 * scale);
        prop_assert!((ufl - exact).norm() <= 1e-10 * scale);
    }

    #[test]
    fn two_layouts_share_the_determinant(h in tridiagonal(), z in complex(), pick in 0usize..12) {
        let center = h.lo() + (pick % h.dim()) as i64;
        let a = factorize(&h, z, Layout::OneSided).unwrap().determinant();
        let b = factorize(&h, z, Layout::TwoSidedCenter(center)).unwrap().determinant();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn doubled_spectrum_is_symmetric(h in tridiagonal()) {
        let mut e = jacobi_eigen(&double(&h)).unwrap();
        e.sort_by(f64::total_cmp);
        let n = e.len();
        for i in 0..n {
            prop_assert!((e[i] + e[n - 1 - i]).abs() <= 1e-10 * (1.0 + h.max_abs()));
        }
    }

    #[test]
    fn inertia_splits_evenly_at_zero(h in tridiagonal()) {
        // just above zero exactly half of the doubled spectrum is below
        let sv = svd_oracle(&h.to_dense()).unwrap();
        let x = 0.5 * sv[0].max(1e-6);
        prop_assert_eq!(count_below(&h, x), h.dim());
    }

    #[test]
    fn singular_values_match_dense_svd(h in tridiagonal()) {
        let got = singular_values_finite(&h, &SingularSearch::covering(&h)).unwrap();
        let mut found: Vec<f64> = got.expanded().iter().map(|z| z.re).collect();
        found.sort_by(f64::total_cmp);
        let want = svd_oracle(&h.to_dense()).unwrap();
        prop_assert_eq!(found.len(), want.len());
        for (a, b) in found.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + h.max_abs()));
        }
    }

    #[test]
    fn hermitian_singular_values_are_absolute_eigenvalues(h in hermitian()) {
        let mut want: Vec<f64> = jacobi_eigen(&h.to_dense()).unwrap().iter().map(|e| e.abs()).collect();
        want.sort_by(f64::total_cmp);
        let got = singular_values_finite(&h, &SingularSearch::covering(&h)).unwrap();
        let mut found: Vec<f64> = got.expanded().iter().map(|z| z.re).collect();
        found.sort_by(f64::total_cmp);
        prop_assert_eq!(found.len(), want.len());
        for (a, b) in found.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn hermitian_eigenvectors_have_small_residual(h in hermitian()) {
        for e in jacobi_eigen(&h.to_dense()).unwrap() {
            let w = wavefunction_auto(&h, 0, C64::new(e, 0.0)).unwrap();
            prop_assert!(w.residual <= 1e-8, "residual {} at {}", w.residual, e);
        }
    }

    #[test]
    fn secular_value_is_a_determinant_ratio(h in hermitian(), pick in 0usize..12) {
        // S_p(z) = det(H - z) / det of the matrix with row and column p removed
        let p = (pick % h.dim()) as i64;
        let z = C64::new(0.37, 0.81);
        let s = secular_two_sided_at(&h, p, z, &CfOptions::default()).unwrap().value;
        let n = h.dim();
        let keep: Vec<usize> = (0..n).filter(|&i| i as i64 != p).collect();
        let mut minor = tricf::oracle::DenseMatrix::zeros(n - 1);
        let full = h.to_dense();
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                minor[(a, b)] = full[(i, j)];
            }
        }
        let ratio = lu_det(&full, z) / lu_det(&minor, z);
        prop_assert!((s - ratio).norm() <= 1e-10 * (1.0 + ratio.norm()));
    }
}
