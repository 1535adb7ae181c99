//! Periodic-grid utilities, fringe summaries, and the special-function /
//! quadrature primitives shared by every scheme.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub mod bessel;
pub mod quadrature;
pub(crate) mod special;

pub use bessel::bessel_i_scaled;
pub use quadrature::radial_gauss_quadrature;

pub const TAU: f64 = 2.0 * PI;

/// Uniform periodic grid phi_k = 2 pi k / n over [0, 2 pi).
///
/// The point count must be even and at least 8 so that phi = pi sits exactly
/// on a node (the strong-field comparisons peak there).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGrid {
    n_points: usize,
}

impl PhaseGrid {
    pub const DEFAULT_POINTS: usize = 256;

    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "grid size must be even and >= 8, got {n_points}"
            )));
        }
        Ok(Self { n_points })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integration weight per node, 2 pi / n.
    pub fn step(&self) -> f64 {
        TAU / self.n_points as f64
    }

    pub fn phi(&self, k: usize) -> f64 {
        debug_assert!(k < self.n_points);
        TAU * k as f64 / self.n_points as f64
    }

    pub fn phis(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.phi(k))
    }

    /// Index of the node nearest to `phi` (bins centered on the nodes).
    pub fn nearest_index(&self, phi: f64) -> usize {
        let t = phi.rem_euclid(TAU) / self.step();
        (t.round() as usize) % self.n_points
    }
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            n_points: Self::DEFAULT_POINTS,
        }
    }
}

/// Probability density per radian sampled on a [`PhaseGrid`]; nonnegative
/// with unit periodic-rectangle integral.
#[derive(Debug, Clone)]
pub struct PhaseDistribution {
    grid: PhaseGrid,
    density: Vec<f64>,
}

impl PhaseDistribution {
    /// Builds from raw nonnegative values and normalizes. Values in
    /// (-1e-12, 0) are treated as quadrature noise and clamped; anything more
    /// negative is rejected.
    pub fn from_unnormalized(grid: PhaseGrid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "density length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        for v in &mut values {
            if !v.is_finite() {
                return Err(Error::InvalidInput("non-finite density value".into()));
            }
            if *v < 0.0 {
                if *v > -1e-12 {
                    *v = 0.0;
                } else {
                    return Err(Error::InvalidInput(format!("negative density value {v:e}")));
                }
            }
        }
        let integral: f64 = values.iter().sum::<f64>() * grid.step();
        if integral < 1e-12 {
            return Err(Error::NoData(format!(
                "total mass {integral:e} before normalization"
            )));
        }
        for v in &mut values {
            *v /= integral;
        }
        Ok(Self {
            grid,
            density: values,
        })
    }

    pub fn uniform(grid: PhaseGrid) -> Self {
        Self {
            density: vec![1.0 / TAU; grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.step()
    }

    /// Grid index of the maximum density.
    pub fn argmax(&self) -> usize {
        self.density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }

    /// \int |p - q| dphi on the shared grid.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.step())
    }

    /// max_k |p_k - q_k| on the shared grid.
    pub fn linf_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput(format!(
                "grid mismatch: {} vs {} points",
                self.grid.len(),
                other.grid.len()
            )));
        }
        Ok(())
    }
}

/// First-harmonic summary of a phase density: the fit
/// (1/2 pi)(1 + V cos(phi - peak_phase)) plus the constant offset.
#[derive(Debug, Clone, Copy)]
pub struct FringeSummary {
    /// Mean density, 1/2 pi for a normalized input.
    pub mean_offset: f64,
    /// Visibility V >= 0.
    pub amplitude: f64,
    /// Location of the fringe maximum in [0, 2 pi); 0 when V vanishes.
    pub peak_phase: f64,
}

/// First circular Fourier coefficients of the density. On a uniform periodic
/// grid the rectangle rule is exact for any band-limited density, so a pure
/// first harmonic is recovered to machine precision.
pub fn fringe_fit(dist: &PhaseDistribution) -> FringeSummary {
    let step = dist.grid().step();
    let mut a1 = 0.0;
    let mut b1 = 0.0;
    let mut total = 0.0;
    for (phi, &d) in dist.grid().phis().zip(dist.density()) {
        a1 += d * phi.cos();
        b1 += d * phi.sin();
        total += d;
    }
    a1 *= step;
    b1 *= step;
    let amplitude = 2.0 * a1.hypot(b1);
    // cos(phi - peak) pairs a1 = (V/2) cos(peak), b1 = (V/2) sin(peak); the
    // reconstructed fringe then peaks at peak_phase as required.
    let peak_phase = if amplitude < 1e-12 {
        0.0
    } else {
        b1.atan2(a1).rem_euclid(TAU)
    };
    FringeSummary {
        mean_offset: total * step / TAU,
        amplitude,
        peak_phase,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(grid: PhaseGrid, v: f64, peak: f64) -> PhaseDistribution {
        let values = grid
            .phis()
            .map(|phi| (1.0 + v * (phi - peak).cos()) / TAU)
            .collect();
        PhaseDistribution::from_unnormalized(grid, values).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(PhaseGrid::new(8).is_ok());
        assert!(PhaseGrid::new(7).is_err());
        assert!(PhaseGrid::new(6).is_err());
        assert!(PhaseGrid::new(0).is_err());
        let g = PhaseGrid::new(64).unwrap();
        assert!((g.step() * 64.0 - TAU).abs() < 1e-15);
        assert_eq!(g.phi(0), 0.0);
        assert!((g.phi(32) - PI).abs() < 1e-15);
    }

    #[test]
    fn nearest_index_wraps() {
        let g = PhaseGrid::new(8).unwrap();
        assert_eq!(g.nearest_index(0.0), 0);
        assert_eq!(g.nearest_index(TAU - 0.01), 0);
        assert_eq!(g.nearest_index(-0.01), 0);
        assert_eq!(g.nearest_index(PI + 0.1), 4);
    }

    #[test]
    fn normalization_and_clamping() {
        let g = PhaseGrid::new(8).unwrap();
        let d = PhaseDistribution::from_unnormalized(g, vec![2.0; 8]).unwrap();
        assert!((d.integral() - 1.0).abs() < 1e-12);

        let mut v = vec![1.0; 8];
        v[3] = -1e-13; // quadrature noise
        assert!(PhaseDistribution::from_unnormalized(g, v).is_ok());

        let mut v = vec![1.0; 8];
        v[3] = -1e-6;
        assert!(PhaseDistribution::from_unnormalized(g, v).is_err());

        assert!(matches!(
            PhaseDistribution::from_unnormalized(g, vec![0.0; 8]),
            Err(Error::NoData(_))
        ));
    }

    #[test]
    fn fringe_uniform() {
        let d = PhaseDistribution::uniform(PhaseGrid::new(256).unwrap());
        let f = fringe_fit(&d);
        assert!(f.amplitude < 1e-12);
        assert_eq!(f.peak_phase, 0.0);
        assert!((f.mean_offset - 1.0 / TAU).abs() < 1e-12);
    }

    #[test]
    fn fringe_pure_first_harmonic_is_exact() {
        let d = harmonic(PhaseGrid::new(256).unwrap(), 1.0, 0.0);
        let f = fringe_fit(&d);
        assert!((f.amplitude - 1.0).abs() < 1e-10);
        assert!(f.peak_phase.abs() < 1e-10 || (f.peak_phase - TAU).abs() < 1e-10);
    }

    #[test]
    fn fringe_weak_displaced() {
        // (1/2pi)(1 + 0.02 cos(phi - pi)): visibility of equal weak fields
        // without postselection, peaked at the pi phase offset.
        let d = harmonic(PhaseGrid::new(256).unwrap(), 0.02, PI);
        let f = fringe_fit(&d);
        assert!((f.amplitude - 0.02).abs() < 1e-12);
        assert!((f.peak_phase - PI).abs() < 1e-10);
    }

    #[test]
    fn fringe_exact_on_smallest_grid() {
        for peak in [0.0, 0.5, PI / 2.0, PI, 4.9] {
            let d = harmonic(PhaseGrid::new(8).unwrap(), 0.4, peak);
            let f = fringe_fit(&d);
            assert!((f.amplitude - 0.4).abs() < 1e-10, "peak={peak}");
            let dp = (f.peak_phase - peak).rem_euclid(TAU);
            let wrapped_gap = dp.min(TAU - dp);
            assert!(wrapped_gap < 1e-10, "peak={peak} got {}", f.peak_phase);
        }
    }

    #[test]
    fn fringe_maximum_sits_at_peak_phase() {
        // Defining property: the reconstruction has its max at peak_phase.
        let d = harmonic(PhaseGrid::new(64).unwrap(), 0.7, PI / 2.0);
        let f = fringe_fit(&d);
        let k = d.argmax();
        assert!((d.grid().phi(k) - f.peak_phase).abs() <= d.grid().step() / 2.0 + 1e-12);
    }

    #[test]
    fn distances() {
        let g = PhaseGrid::new(16).unwrap();
        let a = PhaseDistribution::uniform(g);
        let b = harmonic(g, 0.5, 0.0);
        assert!(a.l1_distance(&a).unwrap() < 1e-15);
        assert!(a.l1_distance(&b).unwrap() > 0.0);
        assert!(a.linf_distance(&b).unwrap() > 0.0);
        let c = PhaseDistribution::uniform(PhaseGrid::new(32).unwrap());
        assert!(a.l1_distance(&c).is_err());
    }
}
