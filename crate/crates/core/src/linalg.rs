//! Hermitian eigendecomposition via LAPACK divide-and-conquer (`zheevd`).
//!
//! `ndarray-linalg`'s `eigh` binds the QR-iteration driver `zheev`, which is
//! several times slower at the dimensions the truncated two-mode states reach
//! (d^2 ~ 1200). The wrappers here call `zheevd` directly and are checked
//! against `eigh` in the test suite.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvals_hermitian(h: &Array2<C64>) -> Result<Array1<f64>> {
    let (w, _) = zheevd(h, false)?;
    Ok(w)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
///
/// Column `k` of the returned matrix is the eigenvector for eigenvalue `k`.
pub fn eig_hermitian(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (w, v) = zheevd(h, true)?;
    Ok((w, v.expect("vectors requested")))
}

fn zheevd(h: &Array2<C64>, vectors: bool) -> Result<(Array1<f64>, Option<Array2<C64>>)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::InvalidParam(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            n,
            h.ncols()
        )));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), vectors.then(|| Array2::zeros((0, 0)))));
    }

    // LAPACK is column-major. A row-major Hermitian buffer read column-major
    // is conj(A), whose eigenvalues match A and whose eigenvectors are the
    // conjugates of A's, so a single conjugation on output fixes everything.
    let mut a: Vec<C64> = h.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let jobz = if vectors { b'V' } else { b'N' };
    let uplo = b'L';
    let n_i = n as i32;
    let mut info: i32 = 0;

    // Workspace query.
    let mut work_q = [C64::new(0.0, 0.0)];
    let mut rwork_q = [0.0f64];
    let mut iwork_q = [0i32];
    unsafe {
        lapack_sys::zheevd_(
            &(jobz as i8),
            &(uplo as i8),
            &n_i,
            a.as_mut_ptr() as *mut _,
            &n_i,
            w.as_mut_ptr(),
            work_q.as_mut_ptr() as *mut _,
            &(-1i32),
            rwork_q.as_mut_ptr(),
            &(-1i32),
            iwork_q.as_mut_ptr(),
            &(-1i32),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::InvalidParam(format!("zheevd workspace query failed: info={info}")));
    }
    let lwork = work_q[0].re as i32;
    let lrwork = rwork_q[0] as i32;
    let liwork = iwork_q[0];
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    let mut rwork = vec![0.0f64; lrwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];

    unsafe {
        lapack_sys::zheevd_(
            &(jobz as i8),
            &(uplo as i8),
            &n_i,
            a.as_mut_ptr() as *mut _,
            &n_i,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::InvalidParam(format!("zheevd failed to converge: info={info}")));
    }

    let w = Array1::from(w);
    if !vectors {
        return Ok((w, None));
    }
    // `a` now holds Z column-major = Z^T row-major; row k of the row-major
    // view is the k-th eigenvector of conj(A). Conjugate to get A's.
    let zt = Array2::from_shape_vec((n, n), a).expect("shape");
    let v = zt.t().mapv(|z| z.conj());
    Ok((w, Some(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray_linalg::{Eigh, UPLO};

    fn test_matrix(n: usize) -> Array2<C64> {
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = C64::new(
                    ((i * 3 + j) as f64 * 0.17).sin(),
                    ((i as f64) - (j as f64)) * 0.23,
                );
            }
        }
        &a + &a.t().mapv(|z| z.conj())
    }

    #[test]
    fn matches_reference_eigh() {
        for n in [1usize, 2, 5, 24, 60] {
            let h = test_matrix(n);
            let (w, v) = eig_hermitian(&h).unwrap();
            let (w_ref, _) = h.eigh(UPLO::Lower).unwrap();
            for i in 0..n {
                assert!((w[i] - w_ref[i]).abs() < 1e-10 * (1.0 + w_ref[i].abs()));
            }
            // Reconstruct and compare.
            let mut rec = Array2::<C64>::zeros((n, n));
            for k in 0..n {
                let col = v.column(k);
                for i in 0..n {
                    for j in 0..n {
                        rec[(i, j)] += col[i] * col[j].conj() * w[k];
                    }
                }
            }
            let dev = (&rec - &h).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-9, "n={n}: reconstruction deviation {dev}");
        }
    }

    #[test]
    fn values_only_matches_full() {
        let h = test_matrix(40);
        let w1 = eigvals_hermitian(&h).unwrap();
        let (w2, _) = eig_hermitian(&h).unwrap();
        for i in 0..40 {
            assert!((w1[i] - w2[i]).abs() < 1e-11);
        }
    }
}
