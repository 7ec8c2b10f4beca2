//! Normalized modal dictionaries on (frequency, damping) grids, local grid
//! refinement around activated atoms, and the capture-zone constant that
//! governs when refinement is guaranteed to converge for a single tone.

use crate::error::GridError;
use crate::somp::freq_objective;
use crate::tensor::ComplexMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

pub const MERGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Frequency,
    Damping,
}

/// Sorted one-dimensional grid of candidate frequencies or damping factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    points: Vec<f64>,
    kind: GridKind,
}

impl Grid1D {
    pub fn new(points: Vec<f64>, kind: GridKind) -> Result<Self, GridError> {
        if points.is_empty() {
            return Err(GridError::TooFewPoints { got: 0, min: 1 });
        }
        for w in points.windows(2) {
            if w[1] <= w[0] {
                return Err(GridError::NotSorted);
            }
        }
        for &p in &points {
            match kind {
                GridKind::Frequency => {
                    if !(0.0..1.0).contains(&p) {
                        return Err(GridError::FrequencyRange(p));
                    }
                }
                GridKind::Damping => {
                    if p > 0.0 {
                        return Err(GridError::DampingRange(p));
                    }
                }
            }
        }
        Ok(Self { points, kind })
    }

    pub fn singleton(value: f64, kind: GridKind) -> Result<Self, GridError> {
        Self::new(vec![value], kind)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact position of a value that came from this grid.
    pub fn position_of(&self, value: f64) -> Option<usize> {
        self.points
            .binary_search_by(|p| p.partial_cmp(&value).unwrap())
            .ok()
    }

    /// Largest gap between adjacent points; frequency grids wrap around 1.
    pub fn max_spacing(&self) -> f64 {
        let mut gap = self
            .points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max);
        if self.kind == GridKind::Frequency && self.points.len() >= 2 {
            let wrap = self.points[0] + 1.0 - self.points[self.points.len() - 1];
            gap = gap.max(wrap);
        }
        gap
    }

    /// Smallest gap adjacent to the point at `idx`.
    pub fn local_spacing(&self, idx: usize) -> f64 {
        let n = self.points.len();
        let mut best = f64::INFINITY;
        if idx > 0 {
            best = best.min(self.points[idx] - self.points[idx - 1]);
        }
        if idx + 1 < n {
            best = best.min(self.points[idx + 1] - self.points[idx]);
        }
        if self.kind == GridKind::Frequency && n >= 2 && (idx == 0 || idx == n - 1) {
            best = best.min(self.points[0] + 1.0 - self.points[n - 1]);
        }
        best
    }
}

/// Uniform frequency grid `{0, 1/n, ..., (n-1)/n}` over `[0,1)`.
pub fn uniform_freq_grid(n_mu: usize) -> Result<Grid1D, GridError> {
    if n_mu < 2 {
        return Err(GridError::TooFewPoints { got: n_mu, min: 2 });
    }
    let points = (0..n_mu).map(|i| i as f64 / n_mu as f64).collect();
    Grid1D::new(points, GridKind::Frequency)
}

/// Uniform damping grid: `n_beta` equispaced points from `beta_min` to 0
/// inclusive.
pub fn uniform_damp_grid(n_beta: usize, beta_min: f64) -> Result<Grid1D, GridError> {
    if n_beta < 2 {
        return Err(GridError::TooFewPoints {
            got: n_beta,
            min: 2,
        });
    }
    if !(beta_min < 0.0) {
        return Err(GridError::BadLowerBound(beta_min));
    }
    let step = -beta_min / (n_beta - 1) as f64;
    let points = (0..n_beta)
        .map(|i| {
            if i == n_beta - 1 {
                0.0
            } else {
                beta_min + i as f64 * step
            }
        })
        .collect();
    Grid1D::new(points, GridKind::Damping)
}

/// Grid label of one dictionary column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomLabel {
    pub freq: f64,
    pub damp: f64,
}

/// Matrix of unit-norm modal atoms over a (frequency, damping) product grid.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub atoms: ComplexMatrix,
    pub labels: Vec<AtomLabel>,
}

impl Dictionary {
    /// Harmonic dictionary: all atoms undamped.
    pub fn harmonic(freqs: &Grid1D, len: usize) -> Result<Self, GridError> {
        let damps = Grid1D::singleton(0.0, GridKind::Damping)?;
        build_dictionary(freqs, &damps, len)
    }

    /// Modal dictionary anchored at one frequency, sweeping the damping grid.
    pub fn modal_at_freq(freq: f64, damps: &Grid1D, len: usize) -> Result<Self, GridError> {
        let freqs = Grid1D::singleton(freq, GridKind::Frequency)?;
        build_dictionary(&freqs, damps, len)
    }

    pub fn num_atoms(&self) -> usize {
        self.labels.len()
    }
}

/// One normalized atom per (frequency, damping) pair. Columns are grouped by
/// damping factor (the undamped block first, then increasingly negative),
/// sweeping the frequency grid within each block.
pub fn build_dictionary(
    freqs: &Grid1D,
    damps: &Grid1D,
    len: usize,
) -> Result<Dictionary, GridError> {
    let n = freqs.len() * damps.len();
    let mut atoms = ComplexMatrix::zeros(len, n);
    let mut labels = Vec::with_capacity(n);
    let mut col = 0;
    for &beta in damps.points().iter().rev() {
        for &mu in freqs.points() {
            let column = atoms.col_mut(col);
            let mut norm_sq = 0.0;
            for (m, slot) in column.iter_mut().enumerate() {
                let v = Complex64::from_polar((beta * m as f64).exp(), TAU * mu * m as f64);
                norm_sq += v.norm_sqr();
                *slot = v;
            }
            let inv = 1.0 / norm_sq.sqrt();
            for slot in column.iter_mut() {
                *slot *= inv;
            }
            labels.push(AtomLabel {
                freq: mu,
                damp: beta,
            });
            col += 1;
        }
    }
    Ok(Dictionary { atoms, labels })
}

/// Insert `eta` equispaced new points strictly inside each interval between
/// an activated point and its neighbors; the refined grid is the sorted
/// union with the original points retained. Frequency grids treat boundary
/// neighbors modulo 1; damping grids clamp at the interval edges.
pub fn dicref(grid: &Grid1D, active: &[usize], eta: usize) -> Result<Grid1D, GridError> {
    if active.is_empty() {
        return Err(GridError::EmptyActiveSet);
    }
    if eta == 0 {
        return Err(GridError::BadEta);
    }
    let pts = grid.points();
    let n = pts.len();
    for &idx in active {
        if idx >= n {
            return Err(GridError::ActiveOutOfRange { idx, len: n });
        }
    }
    let mut all: Vec<f64> = pts.to_vec();
    for &idx in active {
        let center = pts[idx];
        let (left, right) = match grid.kind() {
            GridKind::Frequency => {
                let left = if idx > 0 { pts[idx - 1] } else { pts[n - 1] - 1.0 };
                let right = if idx + 1 < n { pts[idx + 1] } else { pts[0] + 1.0 };
                (left, right)
            }
            GridKind::Damping => {
                let left = if idx > 0 { pts[idx - 1] } else { center };
                let right = if idx + 1 < n { pts[idx + 1] } else { center };
                (left, right)
            }
        };
        for (a, b) in [(left, center), (center, right)] {
            if b - a <= MERGE_TOL {
                continue;
            }
            let step = (b - a) / (eta + 1) as f64;
            for k in 1..=eta {
                let mut p = a + step * k as f64;
                if grid.kind() == GridKind::Frequency {
                    p = p.rem_euclid(1.0);
                }
                all.push(p);
            }
        }
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<f64> = Vec::with_capacity(all.len());
    for p in all {
        if merged.last().map_or(true, |&q| p - q > MERGE_TOL) {
            merged.push(p);
        }
    }
    Grid1D::new(merged, grid.kind())
}

/// Capture-zone half-width of the undamped single-tone objective: the
/// frequency offset inside the main lobe whose objective value equals the
/// first sidelobe maximum. An initial grid with spacing below twice this
/// value guarantees single-tone refinement converges.
pub fn compute_zeta(len: usize) -> Result<f64, GridError> {
    if len < 3 {
        return Err(GridError::LengthTooShort(len));
    }
    let m = len;
    let j = |x: f64| freq_objective(x, 0.0, 0.0, 1.0, m);

    // Maximum of the first sidelobe on [1/M, 2/M] via golden-section search.
    let (mut lo, mut hi) = (1.0 / m as f64, 2.0 / m as f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (j(x1), j(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = j(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = j(x1);
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let sidelobe_max = f1.max(f2);

    // The main lobe decays monotonically from J(0) to 0 at 1/M; bisect for
    // the offset whose value equals the sidelobe maximum.
    let (mut a, mut b) = (0.0, 1.0 / m as f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if j(mid) > sidelobe_max {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
