//! Minimal dense linear algebra for the normal-equations solvers.

use crate::error::{Error, Result};

/// Accumulate `X^T diag(w) X` for a row-major `n x p` design. `w = None`
/// means unit weights. Returns a row-major `p x p` symmetric matrix.
pub(crate) fn xtwx(design: &[f64], n: usize, p: usize, w: Option<&[f64]>) -> Vec<f64> {
    let mut a = vec![0.0; p * p];
    for i in 0..n {
        let row = &design[i * p..(i + 1) * p];
        let wi = w.map_or(1.0, |w| w[i]);
        for j in 0..p {
            let xj = wi * row[j];
            let aj = &mut a[j * p + j..j * p + p];
            let xr = &row[j..];
            for (al, &xl) in aj.iter_mut().zip(xr) {
                *al += xj * xl;
            }
        }
    }
    // mirror the upper triangle
    for j in 1..p {
        for l in 0..j {
            a[j * p + l] = a[l * p + j];
        }
    }
    a
}

/// `X^T v` for a row-major design.
pub(crate) fn xtv(design: &[f64], n: usize, p: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p];
    for i in 0..n {
        let row = &design[i * p..(i + 1) * p];
        let vi = v[i];
        for j in 0..p {
            out[j] += row[j] * vi;
        }
    }
    out
}

/// Solve the symmetric positive-definite system `A x = b` by Cholesky
/// factorization, overwriting `a`. Rank deficiency is detected by a pivot
/// threshold relative to the largest diagonal entry.
pub(crate) fn solve_spd(a: &mut [f64], b: &[f64], p: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), p * p);
    debug_assert_eq!(b.len(), p);
    let scale = (0..p).map(|j| a[j * p + j].abs()).fold(0.0_f64, f64::max);
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::SingularDesign);
    }
    let tol = scale * 1e-12;
    // lower-triangular factor stored in place
    for j in 0..p {
        let mut d = a[j * p + j];
        for l in 0..j {
            d -= a[j * p + l] * a[j * p + l];
        }
        if d.is_nan() || d <= tol {
            return Err(Error::SingularDesign);
        }
        let d = d.sqrt();
        a[j * p + j] = d;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for l in 0..j {
                s -= a[i * p + l] * a[j * p + l];
            }
            a[i * p + j] = s / d;
        }
    }
    // forward substitution L y = b
    let mut x = b.to_vec();
    for i in 0..p {
        for l in 0..i {
            x[i] -= a[i * p + l] * x[l];
        }
        x[i] /= a[i * p + i];
    }
    // back substitution L^T x = y
    for i in (0..p).rev() {
        for l in (i + 1)..p {
            x[i] -= a[l * p + i] * x[l];
        }
        x[i] /= a[i * p + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // A = [[4,1],[1,3]], b = [1,2] -> x = [1/11, 7/11]
        let mut a = vec![4.0, 1.0, 1.0, 3.0];
        let x = solve_spd(&mut a, &[1.0, 2.0], 2).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut a = vec![1.0, 1.0, 1.0, 1.0];
        assert!(matches!(
            solve_spd(&mut a, &[1.0, 1.0], 2),
            Err(Error::SingularDesign)
        ));
    }

    #[test]
    fn xtwx_matches_direct_product() {
        let design = vec![1.0, 2.0, 1.0, -1.0, 1.0, 0.5];
        let a = xtwx(&design, 3, 2, None);
        assert!((a[0] - 3.0).abs() < 1e-14);
        assert!((a[1] - 1.5).abs() < 1e-14);
        assert!((a[2] - 1.5).abs() < 1e-14);
        assert!((a[3] - 5.25).abs() < 1e-14);
    }
}
