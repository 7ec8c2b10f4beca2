//! Multiple-tone estimator. The data tensor is separated into per-mode
//! single-tone components through the shift invariance of the dimension-1
//! mode matrix (estimated from a truncated SVD of the dimension-1
//! unfolding), each component is estimated with the single-tone multigrid
//! method plus a least-squares dimension-1 update, and the components are
//! cycled through a deflation loop whose total residual never increases.
//! Mode parameters across dimensions come out of the same component, so no
//! pairing step is needed.

use crate::error::EstimatorError;
use crate::linalg;
use crate::signal::{mode_vector, RdMode};
use crate::stsm::{stsm, MultigridConfig};
use crate::tensor::{kron_vec, ComplexMatrix, ComplexTensor};
use num_complex::Complex64;
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct MtsmConfig {
    /// Number of modes to extract.
    pub f_modes: usize,
    /// Deflation sweeps after initialization.
    pub k_iters: usize,
    pub stsm: MultigridConfig,
}

impl MtsmConfig {
    pub fn new(f_modes: usize) -> Self {
        Self {
            f_modes,
            k_iters: 2,
            stsm: MultigridConfig::default(),
        }
    }
}

/// One component's current rank-1 model.
#[derive(Debug, Clone)]
pub struct ComponentEstimate {
    /// Least-squares dimension-1 vector carrying the amplitude (its first
    /// entry is the complex amplitude estimate).
    pub dim1_vector: Vec<Complex64>,
    /// `(frequency, damping)` for dimensions `1..R`.
    pub tail_params: Vec<(f64, f64)>,
    /// The rank-1 modal reconstruction built from the fields above.
    pub y_hat: ComplexTensor,
}

#[derive(Debug, Clone, Default)]
pub struct MtsmDiagnostics {
    /// Total residual norm after initialization and after each sweep.
    pub residual_norms: Vec<f64>,
    /// Per sweep: the working residual norm before the sweep and after each
    /// component update.
    pub sweep_residuals: Vec<Vec<f64>>,
    /// Smallest pairwise distance between shift-invariance eigenvalues,
    /// relative to the largest magnitude; small values mean dimension-1
    /// modes nearly coincide.
    pub eigenvalue_separation: f64,
}

#[derive(Debug, Clone)]
pub struct MtsmOutcome {
    pub modes: Vec<RdMode>,
    pub diagnostics: MtsmDiagnostics,
}

const PINV_RCOND: f64 = 1e-12;

/// Orthonormal basis of the rank-`f` signal subspace of `y1` (its leading
/// left singular vectors).
pub fn subspace_basis(y1: &ComplexMatrix, f: usize) -> Result<ComplexMatrix, EstimatorError> {
    if f >= y1.rows() {
        return Err(EstimatorError::TooManyModes {
            f,
            m1: y1.rows(),
        });
    }
    let svd = linalg::thin_svd(y1)?;
    if svd.s.len() < f {
        return Err(EstimatorError::RankCollapse { idx: svd.s.len() });
    }
    let smax = svd.s[0];
    if smax == 0.0 || svd.s[f - 1] <= 1e-12 * smax {
        return Err(EstimatorError::RankCollapse { idx: f - 1 });
    }
    Ok(svd.u.select_columns(&(0..f).collect::<Vec<_>>()))
}

/// Estimate the dimension-1 mode matrix from the subspace basis via shift
/// invariance: the basis rows shifted by one sample are related through an
/// eigenproblem whose eigenvectors recover the mixing matrix. Columns are
/// rescaled to a leading 1 so the amplitude stays with the coefficients.
/// Also returns the eigenvalue separation diagnostic.
pub fn estimate_a1(u_f: &ComplexMatrix) -> Result<(ComplexMatrix, f64), EstimatorError> {
    let m1 = u_f.rows();
    let f = u_f.cols();
    if m1 < 2 {
        return Err(EstimatorError::DegenerateDimension { dim: 0 });
    }
    let u_over = u_f.drop_row(m1 - 1); // rows 0..M1-1
    let u_under = u_f.drop_row(0); // rows 1..M1
    let pencil = linalg::pinv(&u_over, PINV_RCOND)?
        .matmul(&u_under)
        .map_err(|e| EstimatorError::Linalg(crate::error::LinalgError::Backend(e.to_string())))?;
    let (vals, vecs) = linalg::eig(&pencil)?;

    let (smin, smax) = linalg::rank_gap(&vecs)?;
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(EstimatorError::DefectivePencil);
    }

    let mut separation = f64::INFINITY;
    let vmax = vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    for i in 0..f {
        for j in (i + 1)..f {
            separation = separation.min((vals[i] - vals[j]).norm());
        }
    }
    let separation = if f < 2 {
        f64::INFINITY
    } else if vmax > 0.0 {
        separation / vmax
    } else {
        0.0
    };

    let mut a1 = u_f
        .matmul(&vecs)
        .map_err(|e| EstimatorError::Linalg(crate::error::LinalgError::Backend(e.to_string())))?;
    for j in 0..f {
        let lead = a1.get(0, j);
        let col_norm: f64 = a1.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if lead.norm() <= 1e-12 * col_norm {
            return Err(EstimatorError::DefectivePencil);
        }
        let inv = Complex64::new(1.0, 0.0) / lead;
        for v in a1.col_mut(j) {
            *v *= inv;
        }
    }
    Ok((a1, separation))
}

/// Split `y` into per-mode targets: contract dimension 1 with the
/// pseudoinverse of the mode matrix, then re-expand each slice with its own
/// mode column.
pub fn separate(
    y: &ComplexTensor,
    a1: &ComplexMatrix,
) -> Result<Vec<ComplexTensor>, EstimatorError> {
    let (smin, smax) = linalg::rank_gap(a1)?;
    if smax == 0.0 || smin <= 1e-10 * smax {
        return Err(EstimatorError::RankDeficientModes);
    }
    let pinv = linalg::pinv(a1, PINV_RCOND)?;
    let s_hat = y.contract_mode(0, &pinv)?;
    let f = a1.cols();
    let mut out = Vec::with_capacity(f);
    for j in 0..f {
        let slice = s_hat.slice_dim0(j)?;
        let col = ComplexMatrix::from_columns(a1.rows(), &[a1.col(j).to_vec()])
            .map_err(|e| EstimatorError::Linalg(crate::error::LinalgError::Backend(e.to_string())))?;
        out.push(slice.contract_mode(0, &col)?);
    }
    Ok(out)
}

/// One component re-estimation: single-tone multigrid on dimensions `1..R`
/// of the target, least squares for the dimension-1 vector against the
/// Kronecker product of the trailing mode vectors, and a rank-1 rebuild.
pub fn component_update(
    y_bar: &ComplexTensor,
    cfg: &MultigridConfig,
) -> Result<ComponentEstimate, EstimatorError> {
    let order = y_bar.order();
    let dims: Vec<usize> = (1..order).collect();
    let estimates = stsm(y_bar, cfg, &dims)?;

    let tail_params: Vec<(f64, f64)> = estimates.iter().map(|e| (e.freq, e.damp)).collect();
    let tail_vectors: Vec<Vec<Complex64>> = estimates
        .iter()
        .map(|e| {
            let a = Complex64::from_polar(e.damp.exp(), TAU * e.freq);
            mode_vector(a, y_bar.sizes()[e.dim])
        })
        .collect();

    // Kronecker product with the last dimension outermost, matching the
    // unfolding's column order (dimension 1 fastest).
    let mut kron = tail_vectors.last().cloned().unwrap_or_default();
    for v in tail_vectors.iter().rev().skip(1) {
        kron = kron_vec(&kron, v);
    }

    // Least squares against a single row: pinv of w^T is conj(w)/|w|^2.
    let y1 = y_bar.unfold(0)?;
    let wnorm_sq: f64 = kron.iter().map(|z| z.norm_sqr()).sum();
    let m1 = y_bar.sizes()[0];
    let mut dim1_vector = vec![Complex64::new(0.0, 0.0); m1];
    for (i, slot) in dim1_vector.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &w) in kron.iter().enumerate() {
            acc += y1.get(i, j) * w.conj();
        }
        *slot = acc / wnorm_sq;
    }

    let mut factors = vec![dim1_vector.clone()];
    factors.extend(tail_vectors);
    let y_hat = ComplexTensor::rank1(Complex64::new(1.0, 0.0), &factors)?;

    Ok(ComponentEstimate {
        dim1_vector,
        tail_params,
        y_hat,
    })
}

/// Full multiple-tone estimation.
pub fn mtsm(y: &ComplexTensor, cfg: &MtsmConfig) -> Result<MtsmOutcome, EstimatorError> {
    let order = y.order();
    if order < 2 {
        return Err(EstimatorError::OrderTooLow);
    }
    let m1 = y.sizes()[0];
    if cfg.f_modes >= m1 {
        return Err(EstimatorError::TooManyModes {
            f: cfg.f_modes,
            m1,
        });
    }
    if y.sizes()[1..].iter().any(|&m| m < 2) {
        return Err(EstimatorError::TrailingDimTooShort);
    }
    let f = cfg.f_modes;

    // Initialization: subspace basis, shift-invariance mode matrix, split
    // into per-mode targets, first component fits.
    let y1 = y.unfold(0)?;
    let u_f = subspace_basis(&y1, f)?;
    let (a1, eigenvalue_separation) = estimate_a1(&u_f)?;
    let y_bars = separate(y, &a1)?;
    let mut comps: Vec<ComponentEstimate> = y_bars
        .iter()
        .map(|y_bar| component_update(y_bar, &cfg.stsm))
        .collect::<Result<_, _>>()?;

    let mut total_hat = sum_components(&comps, y.sizes())?;
    let mut carry = y.sub(&total_hat)?;
    let mut diagnostics = MtsmDiagnostics {
        residual_norms: vec![carry.frob_norm()],
        sweep_residuals: Vec::new(),
        eigenvalue_separation,
    };

    // Deflation sweeps. Each component re-fit may only replace the previous
    // estimate when it fits its target at least as well, which keeps the
    // working residual non-increasing through every step of every sweep.
    for _ in 0..cfg.k_iters {
        let mut sweep = vec![carry.frob_norm()];
        for comp in comps.iter_mut() {
            let y_bar = comp.y_hat.add(&carry)?;
            let candidate = component_update(&y_bar, &cfg.stsm)?;
            let cand_res = y_bar.sub(&candidate.y_hat)?;
            let prev_res = y_bar.sub(&comp.y_hat)?;
            if cand_res.frob_norm() <= prev_res.frob_norm() {
                *comp = candidate;
                carry = cand_res;
            } else {
                carry = prev_res;
            }
            sweep.push(carry.frob_norm());
        }
        diagnostics.sweep_residuals.push(sweep);
        total_hat = sum_components(&comps, y.sizes())?;
        diagnostics.residual_norms.push(y.sub(&total_hat)?.frob_norm());
    }

    // Final dimension-1 extraction on each component plus the leftover
    // residual; amplitudes come from the leading entry of the
    // least-squares dimension-1 vector.
    let mut modes = Vec::with_capacity(f);
    for comp in &comps {
        let target = comp.y_hat.add(&carry)?;
        let dim1 = stsm(&target, &cfg.stsm, &[0])?;
        let mut freqs = vec![dim1[0].freq];
        let mut damps = vec![dim1[0].damp];
        for &(nu, alpha) in &comp.tail_params {
            freqs.push(nu);
            damps.push(alpha);
        }
        modes.push(RdMode::new(freqs, damps, comp.dim1_vector[0]));
    }

    Ok(MtsmOutcome { modes, diagnostics })
}

fn sum_components(
    comps: &[ComponentEstimate],
    sizes: &[usize],
) -> Result<ComplexTensor, EstimatorError> {
    let mut acc = ComplexTensor::zeros(sizes)?;
    for comp in comps {
        acc = acc.add(&comp.y_hat)?;
    }
    Ok(acc)
}
