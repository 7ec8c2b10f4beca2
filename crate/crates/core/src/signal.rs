//! Synthesis of multidimensional modal (damped harmonic) signals, circular
//! complex Gaussian noise, SNR bookkeeping and the total-RMSE metric with
//! mode matching.

use crate::error::SignalError;
use crate::tensor::ComplexTensor;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// One multidimensional mode: per-dimension frequency (cycles/sample, in
/// `[0,1)`) and damping factor (nonpositive), plus a complex amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct RdMode {
    pub freqs: Vec<f64>,
    pub damps: Vec<f64>,
    pub amplitude: Complex64,
}

impl RdMode {
    pub fn new(freqs: Vec<f64>, damps: Vec<f64>, amplitude: Complex64) -> Self {
        Self {
            freqs,
            damps,
            amplitude,
        }
    }

    /// Mode coordinate `exp(alpha + j*2*pi*nu)` for dimension `r`.
    pub fn coordinate(&self, r: usize) -> Complex64 {
        Complex64::from_polar(self.damps[r].exp(), TAU * self.freqs[r])
    }
}

/// Sizes plus the modes they carry; the noise-free data description.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub sizes: Vec<usize>,
    pub modes: Vec<RdMode>,
}

impl SignalSpec {
    pub fn new(sizes: Vec<usize>, modes: Vec<RdMode>) -> Result<Self, SignalError> {
        if modes.is_empty() {
            return Err(SignalError::NoModes);
        }
        for m in &modes {
            if m.freqs.len() != sizes.len() || m.damps.len() != sizes.len() {
                return Err(SignalError::ModeArity {
                    got: m.freqs.len(),
                    expected: sizes.len(),
                });
            }
        }
        Ok(Self { sizes, modes })
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn order(&self) -> usize {
        self.sizes.len()
    }

    /// Noise-free tensor: sum of rank-1 mode tensors.
    pub fn synthesize(&self) -> Result<ComplexTensor, SignalError> {
        let mut acc = ComplexTensor::zeros(&self.sizes)?;
        for mode in &self.modes {
            let vectors: Vec<Vec<Complex64>> = (0..self.order())
                .map(|r| mode_vector(mode.coordinate(r), self.sizes[r]))
                .collect();
            let term = ComplexTensor::rank1(mode.amplitude, &vectors)?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

/// Noise description: complex Gaussian with total per-sample variance
/// `sigma2`, generated from a portable seeded stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma2: f64,
    pub seed: u64,
}

/// Geometric progression `[1, a, a^2, ..., a^{len-1}]`, evaluated in polar
/// form so late entries carry no accumulated rounding.
pub fn mode_vector(a: Complex64, len: usize) -> Vec<Complex64> {
    let (r, theta) = a.to_polar();
    (0..len)
        .map(|m| Complex64::from_polar(r.powi(m as i32), theta * m as f64))
        .collect()
}

/// Add circular complex white Gaussian noise, deterministically from the
/// seed. Real and imaginary parts each carry variance `sigma2 / 2`; a
/// Box-Muller transform keeps the stream identical across platforms.
pub fn add_noise(t: &ComplexTensor, noise: &NoiseSpec) -> Result<ComplexTensor, SignalError> {
    if noise.sigma2 < 0.0 {
        return Err(SignalError::NegativeVariance(noise.sigma2));
    }
    let mut out = t.clone();
    if noise.sigma2 == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let scale = (noise.sigma2 / 2.0).sqrt();
    for v in out.data_mut() {
        let (re, im) = standard_normal_pair(&mut rng);
        *v += Complex64::new(scale * re, scale * im);
    }
    Ok(out)
}

fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    (r * (TAU * u2).cos(), r * (TAU * u2).sin())
}

/// Noise variance that puts the signal at `snr_db`, with SNR defined as mean
/// per-sample signal power over `sigma2`.
pub fn sigma_for_snr(t: &ComplexTensor, snr_db: f64) -> Result<f64, SignalError> {
    let power = t.frob_norm().powi(2) / t.num_elements() as f64;
    if power == 0.0 {
        return Err(SignalError::ZeroSignal);
    }
    Ok(power * 10f64.powf(-snr_db / 10.0))
}

/// Which per-dimension parameter the metric aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    Frequency,
    Damping,
}

const MAX_ASSIGNMENT_MODES: usize = 10;

/// Assign estimated modes to true modes by minimum total squared frequency
/// distance (exact search; mode counts here are small). Returns, for each
/// truth index, the matching estimate index.
pub fn match_modes(truth: &[RdMode], estimates: &[RdMode]) -> Result<Vec<usize>, SignalError> {
    let f = truth.len();
    if estimates.len() != f {
        return Err(SignalError::TrialModeCount {
            trial: 0,
            got: estimates.len(),
            expected: f,
        });
    }
    if f > MAX_ASSIGNMENT_MODES {
        return Err(SignalError::TooManyModes {
            got: f,
            max: MAX_ASSIGNMENT_MODES,
        });
    }
    let mut cost = vec![vec![0.0f64; f]; f];
    for (i, t) in truth.iter().enumerate() {
        for (j, e) in estimates.iter().enumerate() {
            cost[i][j] = t
                .freqs
                .iter()
                .zip(&e.freqs)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }
    }
    let mut best = vec![0usize; f];
    let mut best_cost = f64::INFINITY;
    let mut perm: Vec<usize> = (0..f).collect();
    permute_search(&mut perm, 0, &cost, &mut best, &mut best_cost);
    Ok(best)
}

fn permute_search(
    perm: &mut Vec<usize>,
    k: usize,
    cost: &[Vec<f64>],
    best: &mut Vec<usize>,
    best_cost: &mut f64,
) {
    let f = perm.len();
    if k == f {
        let total: f64 = (0..f).map(|i| cost[i][perm[i]]).sum();
        if total < *best_cost {
            *best_cost = total;
            best.clone_from(perm);
        }
        return;
    }
    for i in k..f {
        perm.swap(k, i);
        permute_search(perm, k + 1, cost, best, best_cost);
        perm.swap(k, i);
    }
}

/// Total root-mean-square error over all modes, dimensions and trials:
/// `sqrt( (1/(R F)) * mean_p sum_{f,r} (xi - xi_hat)^2 )`, with estimated
/// modes matched to true modes per trial by frequency assignment.
pub fn total_rmse(
    truth: &SignalSpec,
    trials: &[Vec<RdMode>],
    which: Parameter,
) -> Result<f64, SignalError> {
    let f = truth.num_modes();
    let r = truth.order();
    let mut per_trial_sum = 0.0f64;
    for (p, est) in trials.iter().enumerate() {
        if est.len() != f {
            return Err(SignalError::TrialModeCount {
                trial: p,
                got: est.len(),
                expected: f,
            });
        }
        let assign = match_modes(&truth.modes, est)?;
        let mut acc = 0.0;
        for (i, t) in truth.modes.iter().enumerate() {
            let e = &est[assign[i]];
            for dim in 0..r {
                let d = match which {
                    Parameter::Frequency => t.freqs[dim] - e.freqs[dim],
                    Parameter::Damping => t.damps[dim] - e.damps[dim],
                };
                acc += d * d;
            }
        }
        per_trial_sum += acc;
    }
    let mean = per_trial_sum / trials.len() as f64;
    Ok((mean / (r as f64 * f as f64)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mode_vector_constant_and_quadrature() {
        let v = mode_vector(c(1.0, 0.0), 3);
        assert_eq!(v, vec![c(1.0, 0.0); 3]);
        let a = Complex64::from_polar(1.0, PI / 2.0);
        let v = mode_vector(a, 4);
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (got, want) in v.iter().zip(expect) {
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn mode_vector_magnitude_law() {
        // dimension 1 of the 2-D single-tone benchmark signal
        let a = Complex64::from_polar((-0.011f64).exp(), TAU * 0.22);
        let v = mode_vector(a, 10);
        for (m, z) in v.iter().enumerate() {
            let want = (-0.011 * m as f64).exp();
            assert!((z.norm() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn synthesize_all_ones() {
        let spec = SignalSpec::new(vec![3, 2], vec![RdMode::new(
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            c(1.0, 0.0),
        )])
        .unwrap();
        let t = spec.synthesize().unwrap();
        assert!(t.data().iter().all(|&z| (z - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn synthesize_first_entries_of_single_tone() {
        let spec = SignalSpec::new(vec![10, 10], vec![RdMode::new(
            vec![0.22, 0.34],
            vec![-0.011, -0.015],
            c(1.0, 0.0),
        )])
        .unwrap();
        let t = spec.synthesize().unwrap();
        assert!((t.get(&[0, 0]) - c(1.0, 0.0)).norm() < 1e-14);
        let a1 = Complex64::from_polar((-0.011f64).exp(), TAU * 0.22);
        assert!((t.get(&[1, 0]) - a1).norm() < 1e-14);
    }

    #[test]
    fn synthesize_matches_elementwise_oracle() {
        // two 3-D modes, compared against a direct evaluation of the model sum
        let spec = SignalSpec::new(vec![8, 8, 8], vec![
            RdMode::new(vec![0.40, 0.1, 0.1], vec![-0.01, -0.01, -0.01], c(1.0, 0.0)),
            RdMode::new(vec![0.20, 0.3, 0.25], vec![-0.01, -0.15, -0.01], c(1.0, 0.0)),
        ])
        .unwrap();
        let t = spec.synthesize().unwrap();
        for m0 in 0..8 {
            for m1 in 0..8 {
                for m2 in 0..8 {
                    let mut want = c(0.0, 0.0);
                    for mode in &spec.modes {
                        let mut term = mode.amplitude;
                        for (r, &m) in [m0, m1, m2].iter().enumerate() {
                            let z = mode.damps[r] * m as f64;
                            let w = TAU * mode.freqs[r] * m as f64;
                            term *= Complex64::from_polar(z.exp(), w);
                        }
                        want += term;
                    }
                    let got = t.get(&[m0, m1, m2]);
                    assert!(
                        (got - want).norm() <= 1e-12 * want.norm().max(1.0),
                        "mismatch at ({m0},{m1},{m2})"
                    );
                }
            }
        }
    }

    #[test]
    fn synthesize_linear_in_amplitude() {
        let base = RdMode::new(vec![0.13, 0.31], vec![-0.02, -0.05], c(0.7, 0.3));
        let mut doubled = base.clone();
        doubled.amplitude *= 2.0;
        let s1 = SignalSpec::new(vec![5, 6], vec![base]).unwrap();
        let s2 = SignalSpec::new(vec![5, 6], vec![doubled]).unwrap();
        let t1 = s1.synthesize().unwrap();
        let t2 = s2.synthesize().unwrap();
        for (a, b) in t1.data().iter().zip(t2.data()) {
            assert_eq!(a * 2.0, *b);
        }
    }

    #[test]
    fn add_noise_zero_variance_is_identity() {
        let spec = SignalSpec::new(vec![4, 4], vec![RdMode::new(
            vec![0.2, 0.3],
            vec![0.0, 0.0],
            c(1.0, 0.0),
        )])
        .unwrap();
        let t = spec.synthesize().unwrap();
        let noisy = add_noise(&t, &NoiseSpec { sigma2: 0.0, seed: 1 }).unwrap();
        assert_eq!(noisy, t);
    }

    #[test]
    fn add_noise_deterministic_given_seed() {
        let t = ComplexTensor::zeros(&[5, 5]).unwrap();
        let spec = NoiseSpec { sigma2: 2.0, seed: 42 };
        let a = add_noise(&t, &spec).unwrap();
        let b = add_noise(&t, &spec).unwrap();
        assert_eq!(a, b);
        let c2 = add_noise(&t, &NoiseSpec { sigma2: 2.0, seed: 43 }).unwrap();
        assert_ne!(a, c2);
    }

    #[test]
    fn add_noise_negative_variance_rejected() {
        let t = ComplexTensor::zeros(&[2]).unwrap();
        assert!(matches!(
            add_noise(&t, &NoiseSpec { sigma2: -1.0, seed: 0 }),
            Err(SignalError::NegativeVariance(_))
        ));
    }

    #[test]
    fn add_noise_empirical_variance() {
        let t = ComplexTensor::zeros(&[100_000]).unwrap();
        let noisy = add_noise(&t, &NoiseSpec { sigma2: 1.0, seed: 7 }).unwrap();
        let var = noisy.frob_norm().powi(2) / 100_000.0;
        assert!(var < 1.02 && var > 1.0 / 1.02, "variance {var}");
    }

    #[test]
    fn noise_energy_statistics() {
        // E |noise|_F^2 = M * sigma2, checked at 3 sigma over 100 draws
        let m = 400usize;
        let sigma2 = 0.5;
        let t = ComplexTensor::zeros(&[m]).unwrap();
        let draws = 100;
        let mut mean = 0.0;
        for k in 0..draws {
            let n = add_noise(&t, &NoiseSpec { sigma2, seed: 1000 + k }).unwrap();
            mean += n.frob_norm().powi(2);
        }
        mean /= draws as f64;
        let want = m as f64 * sigma2;
        let std_of_mean = sigma2 * (m as f64 / draws as f64).sqrt();
        assert!(
            (mean - want).abs() <= 3.0 * std_of_mean,
            "mean {mean} vs {want}"
        );
    }

    #[test]
    fn sigma_for_snr_examples() {
        // unit-power tensor at 0 dB and 10 dB
        let t = ComplexTensor::from_data(&[4], vec![c(1.0, 0.0); 4]).unwrap();
        assert!((sigma_for_snr(&t, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((sigma_for_snr(&t, 10.0).unwrap() - 0.1).abs() < 1e-15);
        let z = ComplexTensor::zeros(&[4]).unwrap();
        assert!(matches!(
            sigma_for_snr(&z, 0.0),
            Err(SignalError::ZeroSignal)
        ));
    }

    #[test]
    fn sigma_for_snr_matches_arithmetic_oracle() {
        let spec = SignalSpec::new(vec![10, 10], vec![RdMode::new(
            vec![0.22, 0.34],
            vec![-0.011, -0.015],
            c(1.0, 0.0),
        )])
        .unwrap();
        let t = spec.synthesize().unwrap();
        let got = sigma_for_snr(&t, 20.0).unwrap();
        let power: f64 = t.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / 100.0;
        assert!((got - power * 0.01).abs() < 1e-15 * power);
    }

    fn demo_truth() -> SignalSpec {
        SignalSpec::new(vec![8, 8], vec![
            RdMode::new(vec![0.1, 0.6], vec![-0.01, -0.02], c(1.0, 0.0)),
            RdMode::new(vec![0.4, 0.2], vec![-0.03, 0.0], c(0.0, 1.0)),
        ])
        .unwrap()
    }

    #[test]
    fn total_rmse_zero_for_exact() {
        let truth = demo_truth();
        let trials = vec![truth.modes.clone(), truth.modes.clone()];
        assert_eq!(
            total_rmse(&truth, &trials, Parameter::Frequency).unwrap(),
            0.0
        );
        assert_eq!(total_rmse(&truth, &trials, Parameter::Damping).unwrap(), 0.0);
    }

    #[test]
    fn total_rmse_single_mode_reduces_to_abs_error() {
        let truth = SignalSpec::new(vec![8], vec![RdMode::new(
            vec![0.3],
            vec![0.0],
            c(1.0, 0.0),
        )])
        .unwrap();
        let est = vec![vec![RdMode::new(vec![0.31], vec![0.0], c(1.0, 0.0))]];
        let rmse = total_rmse(&truth, &est, Parameter::Frequency).unwrap();
        assert!((rmse - 0.01).abs() < 1e-12);
    }

    #[test]
    fn total_rmse_finds_permutation() {
        let truth = demo_truth();
        let swapped = vec![vec![truth.modes[1].clone(), truth.modes[0].clone()]];
        assert_eq!(
            total_rmse(&truth, &swapped, Parameter::Frequency).unwrap(),
            0.0
        );
    }

    #[test]
    fn total_rmse_invariant_to_estimate_order() {
        let truth = demo_truth();
        let est = vec![
            RdMode::new(vec![0.11, 0.59], vec![-0.01, -0.02], c(1.0, 0.0)),
            RdMode::new(vec![0.41, 0.21], vec![-0.02, 0.0], c(0.0, 1.0)),
        ];
        let rev: Vec<RdMode> = est.iter().rev().cloned().collect();
        let a = total_rmse(&truth, &[est], Parameter::Frequency).unwrap();
        let b = total_rmse(&truth, &[rev], Parameter::Frequency).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn total_rmse_rejects_wrong_mode_count() {
        let truth = demo_truth();
        let est = vec![vec![truth.modes[0].clone()]];
        assert!(matches!(
            total_rmse(&truth, &est, Parameter::Frequency),
            Err(SignalError::TrialModeCount { .. })
        ));
    }
}
