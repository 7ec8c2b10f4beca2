//! Property tests for the structural identities the estimators rely on.

use num_complex::Complex64;
use proptest::prelude::*;
use rdmodal::dictionary::{dicref, uniform_freq_grid, Grid1D, GridKind};
use rdmodal::signal::{total_rmse, Parameter, RdMode, SignalSpec};
use rdmodal::tensor::{khatri_rao, ComplexMatrix, ComplexTensor};

fn complex_strategy() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn tensor_strategy() -> impl Strategy<Value = ComplexTensor> {
    (1usize..4, 1usize..5, 1usize..5)
        .prop_flat_map(|(r, a, b)| {
            let sizes: Vec<usize> = [a, b, 3][..r].to_vec();
            let n: usize = sizes.iter().product();
            (
                Just(sizes),
                proptest::collection::vec(complex_strategy(), n),
            )
        })
        .prop_map(|(sizes, data)| ComplexTensor::from_data(&sizes, data).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frobenius_norm_preserved_by_every_unfolding(t in tensor_strategy()) {
        for dim in 0..t.order() {
            let m = t.unfold(dim).unwrap();
            prop_assert!((t.frob_norm() - m.frob_norm()).abs() <= 1e-12 * (1.0 + t.frob_norm()));
        }
    }

    #[test]
    fn contraction_commutes_with_unfolding(
        t in tensor_strategy(),
        entries in proptest::collection::vec(complex_strategy(), 16),
    ) {
        for dim in 0..t.order() {
            let k = 2usize;
            let m_dim = t.sizes()[dim];
            let mut u = ComplexMatrix::zeros(k, m_dim);
            for i in 0..k {
                for j in 0..m_dim {
                    u.set(i, j, entries[(i * m_dim + j) % entries.len()]);
                }
            }
            let contracted = t.contract_mode(dim, &u).unwrap();
            let lhs = contracted.unfold(dim).unwrap();
            let rhs = u.matmul(&t.unfold(dim).unwrap()).unwrap();
            let diff = lhs.sub(&rhs).unwrap().frob_norm();
            prop_assert!(diff <= 1e-10 * (1.0 + rhs.frob_norm()));
        }
    }

    #[test]
    fn cp_unfolding_identity(
        f_modes in 1usize..4,
        m0 in 2usize..6,
        m1 in 2usize..6,
        m2 in 2usize..6,
        seed in 0u64..1000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sizes = [m0, m1, m2];
        let mut factors: Vec<ComplexMatrix> = Vec::new();
        for &m in &sizes {
            let mut a = ComplexMatrix::zeros(m, f_modes);
            for j in 0..f_modes {
                for i in 0..m {
                    a.set(i, j, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
                }
            }
            factors.push(a);
        }
        let amps: Vec<Complex64> = (0..f_modes)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();

        // tensor as a sum of rank-1 terms
        let mut t = ComplexTensor::zeros(&sizes).unwrap();
        for f in 0..f_modes {
            let vectors: Vec<Vec<Complex64>> =
                factors.iter().map(|a| a.col(f).to_vec()).collect();
            let term = ComplexTensor::rank1(amps[f], &vectors).unwrap();
            t = t.add(&term).unwrap();
        }

        // compare each unfolding against A_r diag(c) (KR of the others)^T,
        // Khatri-Rao taken from the highest remaining dimension down
        for dim in 0..3 {
            let remaining: Vec<usize> = (0..3).filter(|&k| k != dim).rev().collect();
            let mut kr = factors[remaining[0]].clone();
            for &k in &remaining[1..] {
                kr = khatri_rao(&kr, &factors[k]).unwrap();
            }
            let unfolded = t.unfold(dim).unwrap();
            let mut rhs = ComplexMatrix::zeros(unfolded.rows(), unfolded.cols());
            for i in 0..rhs.rows() {
                for j in 0..rhs.cols() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for f in 0..f_modes {
                        acc += factors[dim].get(i, f) * amps[f] * kr.get(j, f);
                    }
                    rhs.set(i, j, acc);
                }
            }
            let diff = unfolded.sub(&rhs).unwrap().frob_norm();
            prop_assert!(
                diff <= 1e-12 * (1.0 + rhs.frob_norm()),
                "dim {} relative error {}",
                dim,
                diff / rhs.frob_norm()
            );
        }
    }

    #[test]
    fn dicref_superset_sorted_bounded(
        n in 3usize..20,
        active_frac in 0.0f64..1.0,
        eta in 1usize..5,
    ) {
        let grid = uniform_freq_grid(n).unwrap();
        let active = vec![((n - 1) as f64 * active_frac) as usize];
        let refined = dicref(&grid, &active, eta).unwrap();
        for &p in grid.points() {
            prop_assert!(refined.position_of(p).is_some());
        }
        prop_assert!(refined.len() <= grid.len() + 2 * eta * active.len());
        for w in refined.points().windows(2) {
            prop_assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn rmse_invariant_to_estimate_order(
        shuffle_seed in 0u64..100,
        off0 in -0.01f64..0.01,
        off1 in -0.01f64..0.01,
        off2 in -0.01f64..0.01,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let truth = SignalSpec::new(vec![8, 8], vec![
            RdMode::new(vec![0.1, 0.5], vec![-0.01, 0.0], Complex64::new(1.0, 0.0)),
            RdMode::new(vec![0.3, 0.2], vec![0.0, -0.02], Complex64::new(1.0, 0.0)),
            RdMode::new(vec![0.7, 0.8], vec![-0.05, 0.0], Complex64::new(1.0, 0.0)),
        ]).unwrap();
        let est: Vec<RdMode> = truth
            .modes
            .iter()
            .zip([off0, off1, off2])
            .map(|(m, off)| {
                RdMode::new(
                    m.freqs.iter().map(|v| v + off).collect(),
                    m.damps.clone(),
                    m.amplitude,
                )
            })
            .collect();
        let mut shuffled = est.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed);
        shuffled.shuffle(&mut rng);
        let a = total_rmse(&truth, &[est], Parameter::Frequency).unwrap();
        let b = total_rmse(&truth, &[shuffled], Parameter::Frequency).unwrap();
        prop_assert!((a - b).abs() <= 1e-14);
    }

    #[test]
    fn damping_grid_valid_after_refinement(
        n in 2usize..8,
        idx_frac in 0.0f64..1.0,
        eta in 1usize..4,
    ) {
        let grid = rdmodal::dictionary::uniform_damp_grid(n, -1.5).unwrap();
        let idx = ((n - 1) as f64 * idx_frac) as usize;
        let refined = dicref(&grid, &[idx], eta).unwrap();
        prop_assert_eq!(refined.kind(), GridKind::Damping);
        for &p in refined.points() {
            prop_assert!((-1.5..=0.0).contains(&p));
        }
    }
}

#[test]
fn repeated_refinement_shrinks_spacing_geometrically() {
    // spacing around a tracked point after L refinements is at most the
    // initial spacing divided by (eta+1)^L
    let eta = 3usize;
    let target = 0.512345;
    let mut grid = Grid1D::new(
        (0..16).map(|i| i as f64 / 16.0).collect(),
        GridKind::Frequency,
    )
    .unwrap();
    for level in 1..=5 {
        let idx = grid
            .points()
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - target)
                    .abs()
                    .partial_cmp(&(*b - target).abs())
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        grid = dicref(&grid, &[idx], eta).unwrap();
        let idx = grid
            .points()
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - target)
                    .abs()
                    .partial_cmp(&(*b - target).abs())
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        let bound = (1.0 / 16.0) / 4.0f64.powi(level) + 1e-12;
        assert!(
            grid.local_spacing(idx) <= bound,
            "level {level}: {} > {bound}",
            grid.local_spacing(idx)
        );
    }
}
