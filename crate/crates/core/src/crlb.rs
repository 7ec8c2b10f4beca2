//! Cramér-Rao lower bounds for the multidimensional modal model: the
//! general Fisher-information route through analytic derivatives of the
//! vectorized model mean, and closed forms for the single-mode case.

use crate::error::CrlbError;
use crate::linalg;
use crate::signal::SignalSpec;
use crate::tensor::ComplexMatrix;
use ndarray::Array2;
use num_complex::Complex64;

/// Real parameter vector in the fixed ordering
/// `[omega_{1,1}..omega_{F,R}, alpha_{1,1}..alpha_{F,R}, lambda_1..lambda_F,
/// phi_1..phi_F]` (mode-major within each block). Angular frequencies are in
/// radians per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    values: Vec<f64>,
    f_modes: usize,
    r_dims: usize,
}

impl ThetaVector {
    pub fn new(values: Vec<f64>, f_modes: usize, r_dims: usize) -> Result<Self, CrlbError> {
        let expected = 2 * r_dims * f_modes + 2 * f_modes;
        if values.len() != expected {
            return Err(CrlbError::ThetaLength {
                got: values.len(),
                expected,
            });
        }
        let t = Self {
            values,
            f_modes,
            r_dims,
        };
        for f in 0..f_modes {
            if t.lambda(f) <= 0.0 {
                return Err(CrlbError::NonPositiveMagnitude);
            }
        }
        Ok(t)
    }

    /// Parameters of a signal spec, with frequencies converted to radians.
    pub fn from_spec(spec: &SignalSpec) -> Result<Self, CrlbError> {
        let f_modes = spec.num_modes();
        let r_dims = spec.order();
        let mut values = Vec::with_capacity(2 * r_dims * f_modes + 2 * f_modes);
        for mode in &spec.modes {
            for &nu in &mode.freqs {
                values.push(std::f64::consts::TAU * nu);
            }
        }
        for mode in &spec.modes {
            for &alpha in &mode.damps {
                values.push(alpha);
            }
        }
        for mode in &spec.modes {
            values.push(mode.amplitude.norm());
        }
        for mode in &spec.modes {
            values.push(mode.amplitude.arg());
        }
        Self::new(values, f_modes, r_dims)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_modes(&self) -> usize {
        self.f_modes
    }

    pub fn num_dims(&self) -> usize {
        self.r_dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn omega(&self, f: usize, r: usize) -> f64 {
        self.values[f * self.r_dims + r]
    }

    pub fn alpha(&self, f: usize, r: usize) -> f64 {
        self.values[self.r_dims * self.f_modes + f * self.r_dims + r]
    }

    pub fn lambda(&self, f: usize) -> f64 {
        self.values[2 * self.r_dims * self.f_modes + f]
    }

    pub fn phi(&self, f: usize) -> f64 {
        self.values[2 * self.r_dims * self.f_modes + self.f_modes + f]
    }

    fn coordinate(&self, f: usize, r: usize) -> Complex64 {
        Complex64::from_polar(self.alpha(f, r).exp(), self.omega(f, r))
    }

    fn amplitude(&self, f: usize) -> Complex64 {
        Complex64::from_polar(self.lambda(f), self.phi(f))
    }
}

/// Per-parameter variance lower bounds, as variances (take square roots for
/// RMSE comparisons). Frequency bounds are for angular frequencies.
#[derive(Debug, Clone)]
pub struct CrlbReport {
    pub omega: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    pub phi: Vec<f64>,
    /// Eigenvalue condition number of the normalized Fisher kernel.
    pub fisher_cond: f64,
}

/// Exponent applied to the dimension-`dim` mode coordinate in entry `i`
/// (0-based) of the vectorized tensor: the multi-index digit of `i` along
/// that dimension.
pub fn sample_exponent(i: usize, dim: usize, sizes: &[usize]) -> usize {
    let trailing: usize = sizes[dim + 1..].iter().product();
    (i / trailing) % sizes[dim]
}

/// Vectorized model mean: entry `i` is `sum_f c_f prod_r a_{f,r}^{t_{i,r}}`.
pub fn model_mean(theta: &ThetaVector, sizes: &[usize]) -> Vec<Complex64> {
    let m: usize = sizes.iter().product();
    let r_dims = theta.num_dims();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for f in 0..theta.num_modes() {
        let c = theta.amplitude(f);
        let coords: Vec<Complex64> = (0..r_dims).map(|r| theta.coordinate(f, r)).collect();
        // per-dimension power tables
        let tables: Vec<Vec<Complex64>> = coords
            .iter()
            .zip(sizes)
            .map(|(&a, &mr)| crate::signal::mode_vector(a, mr))
            .collect();
        let mut idx = vec![0usize; r_dims];
        for slot in out.iter_mut() {
            let mut v = c;
            for r in 0..r_dims {
                v *= tables[r][idx[r]];
            }
            *slot += v;
            for k in (0..r_dims).rev() {
                idx[k] += 1;
                if idx[k] < sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    out
}

/// Analytic Jacobian `d mu / d theta` (rows: vectorized samples, columns:
/// parameters in the `ThetaVector` ordering).
pub fn jacobian(theta: &ThetaVector, sizes: &[usize]) -> ComplexMatrix {
    let v = assemble_v(theta, sizes);
    let d = theta.len();
    let f_modes = theta.num_modes();
    let r_dims = theta.num_dims();
    let mut out = ComplexMatrix::zeros(v.rows(), d);
    // scale columns by S = blkdiag(Lambda, Lambda, I_F, lambda)
    for k in 0..d {
        let scale = if k < 2 * r_dims * f_modes {
            let f = (k % (r_dims * f_modes)) / r_dims;
            theta.lambda(f)
        } else if k < 2 * r_dims * f_modes + f_modes {
            1.0
        } else {
            theta.lambda(k - 2 * r_dims * f_modes - f_modes)
        };
        for i in 0..v.rows() {
            out.set(i, k, v.get(i, k) * scale);
        }
    }
    out
}

/// The normalized derivative matrix whose Gram kernel drives the Fisher
/// information: columns `[j Z' Phi, Z' Phi, Z phi, j Z phi]`.
fn assemble_v(theta: &ThetaVector, sizes: &[usize]) -> ComplexMatrix {
    let m: usize = sizes.iter().product();
    let f_modes = theta.num_modes();
    let r_dims = theta.num_dims();
    let d = 2 * r_dims * f_modes + 2 * f_modes;
    let mut v = ComplexMatrix::zeros(m, d);
    let j = Complex64::new(0.0, 1.0);

    for f in 0..f_modes {
        let phase = Complex64::from_polar(1.0, theta.phi(f));
        let tables: Vec<Vec<Complex64>> = (0..r_dims)
            .map(|r| crate::signal::mode_vector(theta.coordinate(f, r), sizes[r]))
            .collect();
        let mut idx = vec![0usize; r_dims];
        for i in 0..m {
            let mut prod = Complex64::new(1.0, 0.0);
            for r in 0..r_dims {
                prod *= tables[r][idx[r]];
            }
            let z_entry = prod * phase;
            for r in 0..r_dims {
                let t = idx[r] as f64;
                // omega block then alpha block
                v.set(i, f * r_dims + r, j * t * z_entry);
                v.set(i, r_dims * f_modes + f * r_dims + r, t * z_entry);
            }
            v.set(i, 2 * r_dims * f_modes + f, z_entry);
            v.set(i, 2 * r_dims * f_modes + f_modes + f, j * z_entry);
            for k in (0..r_dims).rev() {
                idx[k] += 1;
                if idx[k] < sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    v
}

const COND_LIMIT: f64 = 1e12;

/// Bounds for every parameter from the inverse Fisher information matrix:
/// `F^{-1} = (sigma2/2) S^{-1} [Re(V^H V)]^{-1} S^{-1}`.
pub fn crlb_general(
    theta: &ThetaVector,
    sigma2: f64,
    sizes: &[usize],
) -> Result<CrlbReport, CrlbError> {
    if sigma2 <= 0.0 {
        return Err(CrlbError::BadVariance(sigma2));
    }
    let v = assemble_v(theta, sizes);
    let d = theta.len();
    let gram = v
        .hermitian_matmul(&v)
        .map_err(|e| CrlbError::Linalg(crate::error::LinalgError::Backend(e.to_string())))?;
    let mut re_gram = Array2::<f64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            re_gram[[i, j]] = gram.get(i, j).re;
        }
    }
    let (w, fisher_cond) = match linalg::sym_inverse_with_cond(&re_gram) {
        Ok(x) => x,
        Err(crate::error::LinalgError::RankDeficient) => return Err(CrlbError::SingularFisher),
        Err(e) => return Err(CrlbError::Linalg(e)),
    };
    if fisher_cond > COND_LIMIT {
        return Err(CrlbError::IllConditioned { cond: fisher_cond });
    }

    let f_modes = theta.num_modes();
    let r_dims = theta.num_dims();
    let half_s2 = sigma2 / 2.0;
    let mut omega = vec![vec![0.0; r_dims]; f_modes];
    let mut alpha = vec![vec![0.0; r_dims]; f_modes];
    let mut lambda = vec![0.0; f_modes];
    let mut phi = vec![0.0; f_modes];
    for f in 0..f_modes {
        let l2 = theta.lambda(f) * theta.lambda(f);
        for r in 0..r_dims {
            let ko = f * r_dims + r;
            let ka = r_dims * f_modes + f * r_dims + r;
            omega[f][r] = half_s2 * w[[ko, ko]] / l2;
            alpha[f][r] = half_s2 * w[[ka, ka]] / l2;
        }
        let kl = 2 * r_dims * f_modes + f;
        let kp = 2 * r_dims * f_modes + f_modes + f;
        lambda[f] = half_s2 * w[[kl, kl]];
        phi[f] = half_s2 * w[[kp, kp]] / l2;
    }
    Ok(CrlbReport {
        omega,
        alpha,
        lambda,
        phi,
        fisher_cond,
    })
}

/// Closed-form single-mode bounds. `alpha` holds the per-dimension damping
/// factors; the returned tuple is `(omega_bounds, alpha_bounds, lambda_bound,
/// phi_bound)` with `omega == alpha` bounds by the model's symmetry.
pub fn crlb_single_mode(
    alpha: &[f64],
    sizes: &[usize],
    lambda: f64,
    sigma2: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64, f64), CrlbError> {
    if sigma2 <= 0.0 {
        return Err(CrlbError::BadVariance(sigma2));
    }
    if lambda <= 0.0 {
        return Err(CrlbError::NonPositiveMagnitude);
    }
    let r_dims = alpha.len();
    // power sums of |a_r|^2 = exp(2 alpha_r): s0 = sum x^m, s1 = sum m x^m,
    // s2 = sum m^2 x^m over m = 0..M_r-1, evaluated by direct summation
    let mut s0 = vec![0.0; r_dims];
    let mut q1 = vec![0.0; r_dims];
    let mut q2 = vec![0.0; r_dims];
    for (r, (&a, &mr)) in alpha.iter().zip(sizes).enumerate() {
        let x = (2.0 * a).exp();
        let (mut p0, mut p1, mut p2) = (0.0, 0.0, 0.0);
        let mut xm = 1.0;
        for m in 0..mr {
            let mf = m as f64;
            p0 += xm;
            p1 += mf * xm;
            p2 += mf * mf * xm;
            xm *= x;
        }
        s0[r] = p0;
        q1[r] = p1 / p0;
        q2[r] = p2 / p0;
    }
    let m_alpha: f64 = s0.iter().product();

    let mut omega_bounds = Vec::with_capacity(r_dims);
    for r in 0..r_dims {
        let denom = q2[r] - q1[r] * q1[r];
        omega_bounds.push(sigma2 / (2.0 * lambda * lambda * m_alpha * denom));
    }
    let alpha_bounds = omega_bounds.clone();

    let correction: f64 = (0..r_dims)
        .map(|r| q1[r] * q1[r] / (q2[r] - q1[r] * q1[r]))
        .sum();
    let lambda_bound = sigma2 / (2.0 * m_alpha) * (1.0 + correction);
    let phi_bound = lambda_bound / (lambda * lambda);
    Ok((omega_bounds, alpha_bounds, lambda_bound, phi_bound))
}
