use alloc::vec;
use alloc::vec::Vec;

use super::LinalgError;

/// Solution of an overdetermined linear system in the least-squares sense.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// Max-norm of `design * coefficients - target`.
    pub residual: f64,
}

/// Householder-QR least squares. `design` is given row by row.
pub fn least_squares(design: &[Vec<f64>], target: &[f64]) -> Result<LeastSquares, LinalgError> {
    let rows = design.len();
    if rows == 0 || rows != target.len() {
        return Err(LinalgError::Shape("design rows must match target length"));
    }
    let cols = design[0].len();
    if cols == 0 || design.iter().any(|r| r.len() != cols) {
        return Err(LinalgError::Shape("ragged design matrix"));
    }
    if rows < cols {
        return Err(LinalgError::Shape("least squares needs rows >= cols"));
    }

    let mut a: Vec<f64> = design.iter().flatten().copied().collect();
    let mut b = target.to_vec();
    let col_norm = |a: &[f64], c: usize, from: usize| -> f64 {
        libm::sqrt(
            (from..rows)
                .map(|r| a[r * cols + c] * a[r * cols + c])
                .sum(),
        )
    };
    let scale = (0..cols).map(|c| col_norm(&a, c, 0)).fold(0.0, f64::max);

    for k in 0..cols {
        let norm = col_norm(&a, k, k);
        if !(norm > 1e-12 * scale) {
            return Err(LinalgError::RankDeficient { column: k });
        }
        let alpha = if a[k * cols + k] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; rows];
        for r in k..rows {
            v[r] = a[r * cols + k];
        }
        v[k] -= alpha;
        let vnorm2: f64 = v[k..].iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for c in k..cols {
                let dot: f64 = (k..rows).map(|r| v[r] * a[r * cols + c]).sum();
                let f = 2.0 * dot / vnorm2;
                for r in k..rows {
                    a[r * cols + c] -= f * v[r];
                }
            }
            let dot: f64 = (k..rows).map(|r| v[r] * b[r]).sum();
            let f = 2.0 * dot / vnorm2;
            for r in k..rows {
                b[r] -= f * v[r];
            }
        }
    }

    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let s: f64 = (k + 1..cols).map(|c| a[k * cols + c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k * cols + k];
    }
    let residual = design
        .iter()
        .zip(target)
        .map(|(row, t)| (row.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>() - t).abs())
        .fold(0.0, f64::max);
    Ok(LeastSquares {
        coefficients: x,
        residual,
    })
}

/// Eigenvalues of a symmetric `n x n` matrix (row-major) by cyclic Jacobi
/// rotations, in ascending order.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_design() {
        let fit = least_squares(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[3.0, -1.0]).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-15);
        assert!((fit.coefficients[1] + 1.0).abs() < 1e-15);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn overdetermined_consistent_system() {
        let fit = least_squares(&[vec![1.0], vec![1.0], vec![1.0]], &[1.0, 1.0, 1.0]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-15);
        assert!(fit.residual < 1e-15);
    }

    #[test]
    fn zero_target_fits_zero() {
        let design = [vec![1.0], vec![0.0], vec![-1.0], vec![1.0]];
        let fit = least_squares(&design, &[0.0; 4]).unwrap();
        assert_eq!(fit.coefficients[0], 0.0);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn inconsistent_system_minimizes() {
        // x = 0, x = 2 -> x = 1 with residual 1
        let fit = least_squares(&[vec![1.0], vec![1.0]], &[0.0, 2.0]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-14);
        assert!((fit.residual - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficiency_names_column() {
        let design = [vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        assert_eq!(
            least_squares(&design, &[1.0, 2.0, 3.0]),
            Err(LinalgError::RankDeficient { column: 1 })
        );
    }

    #[test]
    fn eigenvalues_of_lorentzian_metric() {
        let ev = symmetric_eigenvalues(&[2.0, 1.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 3.0], 3);
        // eigenvalues of [[2,1],[1,-1]] are (1 +- sqrt(13))/2
        let s = libm::sqrt(13.0);
        assert!((ev[0] - (1.0 - s) / 2.0).abs() < 1e-12);
        assert!((ev[1] - (1.0 + s) / 2.0).abs() < 1e-12);
        assert!((ev[2] - 3.0).abs() < 1e-12);
    }
}
