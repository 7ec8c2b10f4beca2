//! Thin LAPACK bridge for the few dense factorizations the estimators need.
//! Everything else in the crate works on [`ComplexMatrix`] directly.

use crate::error::LinalgError;
use crate::tensor::ComplexMatrix;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, JobSvd, SVDDC, UPLO};
use num_complex::Complex64;

pub(crate) fn to_array2(m: &ComplexMatrix) -> Array2<Complex64> {
    Array2::from_shape_fn((m.rows(), m.cols()), |(i, j)| m.get(i, j))
}

pub(crate) fn from_array2(a: &Array2<Complex64>) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.nrows(), a.ncols());
    for ((i, j), &v) in a.indexed_iter() {
        out.set(i, j, v);
    }
    out
}

pub(crate) struct ThinSvd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub vh: ComplexMatrix,
}

/// Economy-size complex SVD.
pub(crate) fn thin_svd(m: &ComplexMatrix) -> Result<ThinSvd, LinalgError> {
    let a = to_array2(m);
    let (u, s, vh) = a.svddc(JobSvd::Some)?;
    let u = u.ok_or_else(|| LinalgError::Backend("missing U factor".into()))?;
    let vh = vh.ok_or_else(|| LinalgError::Backend("missing V factor".into()))?;
    Ok(ThinSvd {
        u: from_array2(&u),
        s: s.to_vec(),
        vh: from_array2(&vh),
    })
}

/// Moore-Penrose pseudoinverse with relative singular-value cutoff `rcond`.
pub(crate) fn pinv(m: &ComplexMatrix, rcond: f64) -> Result<ComplexMatrix, LinalgError> {
    let svd = thin_svd(m)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(LinalgError::RankDeficient);
    }
    // pinv = V * S^+ * U^H, assembled as (S^+ U^H)^H' style loop
    let k = svd.s.len();
    let mut out = ComplexMatrix::zeros(m.cols(), m.rows());
    for l in 0..k {
        if svd.s[l] <= rcond * smax {
            continue;
        }
        let inv = 1.0 / svd.s[l];
        // column l of V is row l of vh conjugated
        for j in 0..m.rows() {
            let u_jl = svd.u.get(j, l).conj();
            for i in 0..m.cols() {
                let v_il = svd.vh.get(l, i).conj();
                let cur = out.get(i, j);
                out.set(i, j, cur + v_il * u_jl * inv);
            }
        }
    }
    Ok(out)
}

/// Smallest/largest singular value ratio; 0 for a zero matrix.
pub(crate) fn rank_gap(m: &ComplexMatrix) -> Result<(f64, f64), LinalgError> {
    let svd = thin_svd(m)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let smin = svd.s.last().copied().unwrap_or(0.0);
    Ok((smin, smax))
}

/// Least squares `argmin_X |Y - A X|_F` via the SVD pseudoinverse. Returns
/// `None` when `A` is numerically rank deficient at `rcond`.
pub(crate) fn lstsq(
    a: &ComplexMatrix,
    y: &ComplexMatrix,
    rcond: f64,
) -> Result<Option<ComplexMatrix>, LinalgError> {
    let svd = thin_svd(a)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    if smax == 0.0 || svd.s.last().copied().unwrap_or(0.0) <= rcond * smax {
        return Ok(None);
    }
    let p = pinv(a, rcond)?;
    let x = p
        .matmul(y)
        .map_err(|e| LinalgError::Backend(e.to_string()))?;
    Ok(Some(x))
}

/// Eigenvalues and right eigenvectors of a general complex square matrix.
pub(crate) fn eig(m: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix), LinalgError> {
    let a = to_array2(m);
    let (vals, vecs) = a.eig()?;
    Ok((vals.to_vec(), from_array2(&vecs)))
}

/// Inverse of a real symmetric positive-definite matrix via its spectral
/// decomposition, together with the eigenvalue condition number.
pub(crate) fn sym_inverse_with_cond(a: &Array2<f64>) -> Result<(Array2<f64>, f64), LinalgError> {
    let (w, v): (Array1<f64>, Array2<f64>) = a.eigh(UPLO::Lower)?;
    let wmax = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let wmin = w.iter().cloned().fold(f64::INFINITY, f64::min);
    if wmin <= 0.0 || wmax <= 0.0 {
        return Err(LinalgError::RankDeficient);
    }
    let n = a.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    for l in 0..n {
        let scale = 1.0 / w[l];
        for i in 0..n {
            for j in 0..n {
                inv[[i, j]] += v[[i, l]] * v[[j, l]] * scale;
            }
        }
    }
    Ok((inv, wmax / wmin))
}
