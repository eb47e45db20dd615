//! Minimal dense complex linear algebra: a Cholesky solve for the Hermitian
//! positive definite systems the MMSE equalizer produces.

use ndarray::Array2;
use num_complex::Complex;

use crate::scalar::GocdmFloat;
use crate::{Error, Result};

/// Solves `A x = b` for Hermitian positive definite `A`, consuming `A` as
/// workspace for the lower Cholesky factor.
///
/// Fails with [`Error::SingularMatrix`] when a pivot is not strictly
/// positive, which is how a singular (or indefinite) system manifests here.
pub(crate) fn solve_hermitian<T: GocdmFloat>(
    mut a: Array2<Complex<T>>,
    b: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.len(), n);

    for j in 0..n {
        let mut diag = a[(j, j)].re;
        for k in 0..j {
            diag = diag - a[(j, k)].norm_sqr();
        }
        if !(diag > T::zero()) || !diag.is_finite() {
            return Err(Error::SingularMatrix);
        }
        let ljj = diag.sqrt();
        a[(j, j)] = Complex::new(ljj, T::zero());
        for i in (j + 1)..n {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc = acc - a[(i, k)] * a[(j, k)].conj();
            }
            a[(i, j)] = acc / ljj;
        }
    }

    // L y = b
    let mut y = b.to_vec();
    for i in 0..n {
        let mut acc = y[i];
        for k in 0..i {
            acc = acc - a[(i, k)] * y[k];
        }
        y[i] = acc / a[(i, i)].re;
    }
    // Lᴴ x = y
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in (i + 1)..n {
            acc = acc - a[(k, i)].conj() * y[k];
        }
        y[i] = acc / a[(i, i)].re;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    #[test]
    fn solves_random_spd_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 24;
        let g = Array2::from_shape_fn((n, n), |_| {
            C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        // G Gᴴ + I is Hermitian positive definite
        let mut a = g.dot(&g.t().mapv(|z| z.conj()));
        for i in 0..n {
            a[(i, i)] += C::new(1.0, 0.0);
        }
        let x_true: Vec<C> = (0..n)
            .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let b = a.dot(&Array1::from_vec(x_true.clone()));
        let x = solve_hermitian(a, b.as_slice().unwrap()).unwrap();
        let err = x
            .iter()
            .zip(&x_true)
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "solve error {err}");
    }

    #[test]
    fn rejects_singular() {
        let a = Array2::from_elem((3, 3), C::new(1.0, 0.0));
        let b = vec![C::new(1.0, 0.0); 3];
        assert!(matches!(solve_hermitian(a, &b), Err(Error::SingularMatrix)));
    }
}
