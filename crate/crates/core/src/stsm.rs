//! Single-tone multigrid estimator: per dimension, a frequency pass with a
//! harmonic dictionary refined around the activated atom, then a damping
//! pass with a modal dictionary anchored at the selected frequency.

use crate::dictionary::{compute_zeta, dicref, uniform_damp_grid, Dictionary, Grid1D, GridKind};
use crate::error::EstimatorError;
use crate::somp::{somp, SompConfig};
use crate::tensor::ComplexTensor;

/// Grid and refinement settings shared by both multigrid passes.
#[derive(Debug, Clone, PartialEq)]
pub struct MultigridConfig {
    /// Initial frequency grid size.
    pub n_freq0: usize,
    /// Initial damping grid size.
    pub n_damp0: usize,
    /// Damping lower bound (negative); the grid covers `[beta_min, 0]`.
    pub beta_min: f64,
    /// New frequency atoms inserted on each side of an activated atom.
    pub eta_nu: usize,
    /// New damping atoms inserted on each side of an activated atom.
    pub eta_alpha: usize,
    /// Refinement depth: the grid is refined this many times, so selection
    /// runs on `levels + 1` successively finer grids.
    pub levels: usize,
    /// Optional early stop once the local frequency spacing drops below this.
    pub freq_tol: Option<f64>,
    /// Optional early stop once the local damping spacing drops below this.
    pub damp_tol: Option<f64>,
    /// Rigid cyclic shift applied to the initial frequency grid (used by
    /// benchmark harnesses to randomize grid placement per trial).
    pub freq_grid_shift: f64,
}

impl Default for MultigridConfig {
    fn default() -> Self {
        Self {
            n_freq0: 50,
            n_damp0: 10,
            beta_min: -0.2,
            eta_nu: 21,
            eta_alpha: 11,
            levels: 2,
            freq_tol: None,
            damp_tol: None,
            freq_grid_shift: 0.0,
        }
    }
}

/// Estimate for one dimension, with the per-level selection history.
#[derive(Debug, Clone)]
pub struct DimEstimate {
    pub dim: usize,
    pub freq: f64,
    pub damp: f64,
    /// Selected frequency at each multigrid level.
    pub freq_path: Vec<f64>,
    /// Selected damping factor at each multigrid level.
    pub damp_path: Vec<f64>,
    /// Set when the dimension is too short (< 3 samples) for a meaningful
    /// damping estimate; the damping is then reported as 0.
    pub damping_skipped: bool,
    /// Set when the initial frequency grid spacing exceeds the guaranteed
    /// capture zone (2 zeta), so convergence is not assured.
    pub spacing_warning: bool,
}

/// Single-tone estimation over the requested dimensions of `y`.
pub fn stsm(
    y: &ComplexTensor,
    cfg: &MultigridConfig,
    dims: &[usize],
) -> Result<Vec<DimEstimate>, EstimatorError> {
    if dims.is_empty() {
        return Err(EstimatorError::EmptyDims);
    }
    let order = y.order();
    for &dim in dims {
        if dim >= order {
            return Err(EstimatorError::DimOutOfRange { dim, order });
        }
        if y.sizes()[dim] == 1 {
            return Err(EstimatorError::DegenerateDimension { dim });
        }
    }
    dims.iter().map(|&dim| estimate_dim(y, cfg, dim)).collect()
}

fn estimate_dim(
    y: &ComplexTensor,
    cfg: &MultigridConfig,
    dim: usize,
) -> Result<DimEstimate, EstimatorError> {
    let m = y.sizes()[dim];
    let unfolded = y.unfold(dim)?;
    if unfolded.frob_norm() == 0.0 {
        return Err(EstimatorError::ZeroData);
    }
    let single = SompConfig::with_budget(1);

    // Frequency pass on a harmonic dictionary.
    let mut grid = shifted_freq_grid(cfg.n_freq0, cfg.freq_grid_shift)?;
    let zeta = if m >= 3 { compute_zeta(m)? } else { 0.5 };
    let spacing_warning = grid.max_spacing() >= 2.0 * zeta;

    let mut freq_path = Vec::with_capacity(cfg.levels + 1);
    let mut freq = 0.0;
    for level in 0..=cfg.levels {
        let dict = Dictionary::harmonic(&grid, m)?;
        let sol = somp(&unfolded, &dict, &single)?;
        let selected = sol.omega[0];
        freq = dict.labels[selected].freq;
        freq_path.push(freq);
        if level < cfg.levels {
            let gi = grid
                .position_of(freq)
                .expect("selected atom label comes from the grid");
            if cfg.freq_tol.map_or(false, |tol| grid.local_spacing(gi) <= tol) {
                break;
            }
            grid = dicref(&grid, &[gi], cfg.eta_nu)?;
        }
    }

    // Damping pass on a modal dictionary anchored at the selected frequency.
    let mut damp = 0.0;
    let mut damp_path = Vec::new();
    let damping_skipped = m < 3;
    if !damping_skipped {
        let mut dgrid = uniform_damp_grid(cfg.n_damp0, cfg.beta_min)?;
        for level in 0..=cfg.levels {
            let dict = Dictionary::modal_at_freq(freq, &dgrid, m)?;
            let sol = somp(&unfolded, &dict, &single)?;
            damp = dict.labels[sol.omega[0]].damp;
            damp_path.push(damp);
            if level < cfg.levels {
                let gi = dgrid
                    .position_of(damp)
                    .expect("selected atom label comes from the grid");
                if cfg.damp_tol.map_or(false, |tol| dgrid.local_spacing(gi) <= tol) {
                    break;
                }
                dgrid = dicref(&dgrid, &[gi], cfg.eta_alpha)?;
            }
        }
    }

    Ok(DimEstimate {
        dim,
        freq,
        damp,
        freq_path,
        damp_path,
        damping_skipped,
        spacing_warning,
    })
}

fn shifted_freq_grid(n: usize, shift: f64) -> Result<Grid1D, EstimatorError> {
    if shift == 0.0 {
        return Ok(crate::dictionary::uniform_freq_grid(n)?);
    }
    if n < 2 {
        return Err(EstimatorError::Grid(
            crate::error::GridError::TooFewPoints { got: n, min: 2 },
        ));
    }
    let mut points: Vec<f64> = (0..n)
        .map(|i| (i as f64 / n as f64 + shift).rem_euclid(1.0))
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(Grid1D::new(points, GridKind::Frequency)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{RdMode, SignalSpec};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_tone(sizes: &[usize], freqs: &[f64], damps: &[f64]) -> ComplexTensor {
        SignalSpec::new(
            sizes.to_vec(),
            vec![RdMode::new(
                freqs.to_vec(),
                damps.to_vec(),
                Complex64::new(1.0, 0.0),
            )],
        )
        .unwrap()
        .synthesize()
        .unwrap()
    }

    #[test]
    fn recovers_on_grid_tone_exactly() {
        let y = single_tone(&[16], &[0.25], &[0.0]);
        let cfg = MultigridConfig {
            n_freq0: 20,
            levels: 2,
            eta_nu: 5,
            ..MultigridConfig::default()
        };
        let est = stsm(&y, &cfg, &[0]).unwrap();
        assert_eq!(est.len(), 1);
        assert!((est[0].freq - 0.25).abs() < 1e-15);
        assert!(est[0].damp.abs() < 1e-12);
        assert!(!est[0].damping_skipped);
    }

    #[test]
    fn two_dim_tone_within_grid_resolution() {
        let y = single_tone(&[10, 10], &[0.22, 0.34], &[-0.011, -0.015]);
        let cfg = MultigridConfig {
            n_freq0: 20,
            eta_nu: 21,
            levels: 2,
            ..MultigridConfig::default()
        };
        let est = stsm(&y, &cfg, &[0, 1]).unwrap();
        let bound = (1.0 / 20.0) / (22.0f64 * 22.0);
        assert!((est[0].freq - 0.22).abs() <= bound, "err {}", est[0].freq - 0.22);
        assert!((est[1].freq - 0.34).abs() <= bound, "err {}", est[1].freq - 0.34);
        assert!(!est[0].spacing_warning);
    }

    #[test]
    fn damping_estimate_converges() {
        let y = single_tone(&[12], &[0.4], &[-0.13]);
        let cfg = MultigridConfig {
            n_freq0: 24,
            n_damp0: 5,
            beta_min: -0.5,
            eta_nu: 7,
            eta_alpha: 7,
            levels: 3,
            ..MultigridConfig::default()
        };
        let est = stsm(&y, &cfg, &[0]).unwrap();
        // damping grid resolution: (0.5/4) / 8^3
        let bound = 0.125 / 512.0;
        assert!((est[0].damp + 0.13).abs() <= bound * 2.0, "damp {}", est[0].damp);
    }

    #[test]
    fn monotone_distance_with_fine_initial_grid() {
        // with initial spacing below the capture zone the per-level distance
        // to the true frequency never increases (noiseless)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &m in &[5usize, 10, 16] {
            for _ in 0..200 {
                let nu: f64 = rng.gen();
                let alpha: f64 = -0.2 * rng.gen::<f64>();
                let y = single_tone(&[m], &[nu], &[alpha]);
                let cfg = MultigridConfig {
                    n_freq0: m, // Fourier grid: spacing 1/M < 2 zeta
                    eta_nu: 3,
                    levels: 3,
                    ..MultigridConfig::default()
                };
                let est = stsm(&y, &cfg, &[0]).unwrap();
                let circ = |a: f64, b: f64| {
                    let d = (a - b).abs() % 1.0;
                    d.min(1.0 - d)
                };
                let mut prev = f64::INFINITY;
                for &sel in &est[0].freq_path {
                    let d = circ(sel, nu);
                    assert!(d <= prev + 1e-12, "m={m} nu={nu} path {:?}", est[0].freq_path);
                    prev = d;
                }
                assert!(!est[0].spacing_warning);
            }
        }
    }

    #[test]
    fn coarse_grid_sets_spacing_warning() {
        let y = single_tone(&[16], &[0.3], &[0.0]);
        let cfg = MultigridConfig {
            n_freq0: 4, // spacing 0.25 >> 2 zeta_16
            levels: 1,
            eta_nu: 1,
            ..MultigridConfig::default()
        };
        let est = stsm(&y, &cfg, &[0]).unwrap();
        assert!(est[0].spacing_warning);
    }

    #[test]
    fn sidelobe_lock_documented_for_coarse_grids() {
        // A cluster of atoms inside the first sidelobe violates the spacing
        // condition; refinement then localizes the sidelobe maximum and never
        // reaches the true frequency. This documents that the capture-zone
        // condition is not vacuous.
        let m = 16usize;
        let nu = 0.5;
        let y = single_tone(&[m], &[nu], &[0.0]);
        let unfolded = y.unfold(0).unwrap();
        // first sidelobe of the objective around nu - 1.43/M
        let center = nu - 1.43 / m as f64;
        let mut grid = Grid1D::new(
            vec![center - 0.01, center, center + 0.01],
            GridKind::Frequency,
        )
        .unwrap();
        let single = SompConfig::with_budget(1);
        let mut selected = center;
        for _ in 0..8 {
            let dict = Dictionary::harmonic(&grid, m).unwrap();
            let sol = somp(&unfolded, &dict, &single).unwrap();
            selected = dict.labels[sol.omega[0]].freq;
            let gi = grid.position_of(selected).unwrap();
            grid = dicref(&grid, &[gi], 1).unwrap();
        }
        assert!(
            (selected - nu).abs() > 1.0 / m as f64,
            "refinement escaped the sidelobe unexpectedly: {selected}"
        );
    }

    #[test]
    fn degenerate_and_empty_inputs() {
        let y = single_tone(&[4, 1], &[0.2, 0.0], &[0.0, 0.0]);
        assert!(matches!(
            stsm(&y, &MultigridConfig::default(), &[1]),
            Err(EstimatorError::DegenerateDimension { dim: 1 })
        ));
        assert!(matches!(
            stsm(&y, &MultigridConfig::default(), &[]),
            Err(EstimatorError::EmptyDims)
        ));
        assert!(matches!(
            stsm(&y, &MultigridConfig::default(), &[5]),
            Err(EstimatorError::DimOutOfRange { .. })
        ));
    }

    #[test]
    fn two_sample_dimension_skips_damping() {
        let y = single_tone(&[2, 8], &[0.25, 0.1], &[0.0, -0.02]);
        let cfg = MultigridConfig {
            n_freq0: 8,
            levels: 1,
            eta_nu: 3,
            ..MultigridConfig::default()
        };
        let est = stsm(&y, &cfg, &[0, 1]).unwrap();
        assert!(est[0].damping_skipped);
        assert_eq!(est[0].damp, 0.0);
        assert!(!est[1].damping_skipped);
    }

    #[test]
    fn shifted_grid_stays_sorted_in_range() {
        let g = shifted_freq_grid(10, -0.013).unwrap();
        assert_eq!(g.len(), 10);
        for w in g.points().windows(2) {
            assert!(w[1] > w[0]);
        }
        for &p in g.points() {
            assert!((0.0..1.0).contains(&p));
        }
    }
}
