//! Simultaneous orthogonal matching pursuit over multiple measurement
//! vectors, plus the closed-form single-tone objectives used to reason about
//! (and test) atom selection.

use crate::dictionary::Dictionary;
use crate::error::SompError;
use crate::linalg;
use crate::tensor::ComplexMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// How per-column correlations are aggregated when scoring an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Sum of correlation magnitudes across measurement columns.
    L1,
    /// Euclidean norm of the correlation row.
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SompConfig {
    /// Atom budget; selection stops once this many atoms are active.
    pub max_iter: usize,
    /// Residual Frobenius-norm tolerance; 0 makes the budget binding.
    pub epsilon: f64,
    pub aggregation: Aggregation,
}

impl SompConfig {
    pub fn with_budget(max_iter: usize) -> Self {
        Self {
            max_iter,
            epsilon: 0.0,
            aggregation: Aggregation::L1,
        }
    }
}

/// Activated atoms and their least-squares coefficients.
#[derive(Debug, Clone)]
pub struct SparseSolution {
    /// Selected atom indices, in selection order.
    pub omega: Vec<usize>,
    /// Full coefficient matrix (num_atoms x num_measurements); rows outside
    /// `omega` are zero.
    pub coeffs: ComplexMatrix,
    pub residual_norm: f64,
}

const RANK_TOL: f64 = 1e-10;

/// Greedy simultaneous sparse approximation of `y` (one measurement per
/// column) against the dictionary atoms. Each iteration activates the atom
/// with the largest aggregated correlation against the current residual,
/// refits all active atoms by least squares, and stops when the atom budget
/// is reached or the residual norm drops to `epsilon`. A candidate that
/// would make the active set rank deficient (a duplicate atom) is skipped in
/// favor of the next-best score.
pub fn somp(
    y: &ComplexMatrix,
    dict: &Dictionary,
    cfg: &SompConfig,
) -> Result<SparseSolution, SompError> {
    let m = dict.atoms.rows();
    if y.rows() != m {
        return Err(SompError::DimensionMismatch {
            dict_rows: m,
            data_rows: y.rows(),
        });
    }
    let n = dict.atoms.cols();
    let mut omega: Vec<usize> = Vec::new();
    let mut coeffs = ComplexMatrix::zeros(n, y.cols());
    let mut residual = y.clone();
    let mut residual_norm = residual.frob_norm();
    let mut x_active: Option<ComplexMatrix> = None;

    while omega.len() < cfg.max_iter.min(n) && residual_norm > cfg.epsilon {
        let corr = dict
            .atoms
            .hermitian_matmul(&residual)
            .map_err(|e| SompError::Linalg(crate::error::LinalgError::Backend(e.to_string())))?;
        let mut scored: Vec<(usize, f64)> = (0..n)
            .filter(|i| !omega.contains(i))
            .map(|i| {
                let score = match cfg.aggregation {
                    Aggregation::L1 => (0..y.cols()).map(|j| corr.get(i, j).norm()).sum::<f64>(),
                    Aggregation::L2 => (0..y.cols())
                        .map(|j| corr.get(i, j).norm_sqr())
                        .sum::<f64>()
                        .sqrt(),
                };
                (i, score)
            })
            .collect();
        // highest score first, ties resolved toward the lowest index
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

        let mut advanced = false;
        for (candidate, _) in scored {
            let mut trial = omega.clone();
            trial.push(candidate);
            let active = dict.atoms.select_columns(&trial);
            match linalg::lstsq(&active, y, RANK_TOL)? {
                Some(x) => {
                    let fitted = active
                        .matmul(&x)
                        .map_err(|e| crate::error::LinalgError::Backend(e.to_string()))?;
                    residual = y.sub(&fitted)
                        .map_err(|e| crate::error::LinalgError::Backend(e.to_string()))?;
                    residual_norm = residual.frob_norm();
                    omega = trial;
                    x_active = Some(x);
                    advanced = true;
                    break;
                }
                None => continue, // linearly dependent on the selection
            }
        }
        if !advanced {
            return Err(SompError::DegenerateDictionary);
        }
    }

    if let Some(x) = x_active {
        for (k, &atom) in omega.iter().enumerate() {
            for j in 0..y.cols() {
                coeffs.set(atom, j, x.get(k, j));
            }
        }
    }

    Ok(SparseSolution {
        omega,
        coeffs,
        residual_norm,
    })
}

/// Geometric series `sum_{k=0}^{len-1} exp(z k)`; summed directly near the
/// removable singularity of the closed form.
fn geometric_sum(z: Complex64, len: usize) -> Complex64 {
    let w = z.exp();
    let one = Complex64::new(1.0, 0.0);
    if (one - w).norm() < 1e-4 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut term = one;
        for _ in 0..len {
            acc += term;
            term *= w;
        }
        acc
    } else {
        let wm = (z * len as f64).exp();
        (one - wm) / (one - w)
    }
}

fn geometric_sum_real(z: f64, len: usize) -> f64 {
    let w = z.exp();
    if (1.0 - w).abs() < 1e-4 {
        let mut acc = 0.0;
        let mut term = 1.0;
        for _ in 0..len {
            acc += term;
            term *= w;
        }
        acc
    } else {
        (1.0 - (z * len as f64).exp()) / (1.0 - w)
    }
}

/// Squared correlation of a unit-norm undamped atom at frequency `mu`
/// against a single tone with frequency `nu1`, damping `alpha1` and
/// magnitude `c1_mag`: the frequency-selection objective. At `mu == nu1`,
/// `alpha1 == 0` the value is `c1_mag^2 * len`.
pub fn freq_objective(mu: f64, nu1: f64, alpha1: f64, c1_mag: f64, len: usize) -> f64 {
    let z = Complex64::new(alpha1, TAU * (nu1 - mu));
    let g = geometric_sum(z, len);
    c1_mag * c1_mag / len as f64 * g.norm_sqr()
}

/// Squared correlation of a unit-norm modal atom with damping `beta` (at the
/// tone's own frequency) against a single tone with damping `alpha1`: the
/// damping-selection objective. Unimodal in `beta` with its maximum at
/// `beta == alpha1`.
pub fn damp_objective(beta: f64, alpha1: f64, c1_mag: f64, len: usize) -> f64 {
    let cross = geometric_sum_real(alpha1 + beta, len);
    let atom_norm_sq = geometric_sum_real(2.0 * beta, len);
    c1_mag * c1_mag * cross * cross / atom_norm_sq
}
