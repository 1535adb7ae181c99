//! The indirect scheme: measure each mode's phase separately against a
//! shared strong local oscillator, then form the relative phase.
//!
//! Each mode i yields a radially integrated marginal 𝒫ᵢ(φᵢ) peaked at
//! φ₀ − arg βᵢ, where φ₀ is the local-oscillator phase. The relative-phase
//! distribution is their circular convolution
//!
//! ```text
//! 𝒫(φ) = ∫₀^{2π} dφ₁ 𝒫₁(φ₁) 𝒫₂(φ₁ − φ)
//! ```
//!
//! in which φ₀ cancels; the result peaks at arg β₂ − arg β₁, directly
//! comparable with the direct scheme. The same distribution also has a
//! closed double-radial-integral form evaluated here by tensor
//! Gauss–Legendre quadrature with panel refinement; the two computation
//! paths cross-check each other.
//!
//! The local oscillator is taken in its strong limit throughout; finite-LO
//! corrections are out of scope. The phase-shifter setting θ of the direct
//! network plays no role in this scheme and is ignored on input states.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{CoherentEnsemble, CoherentPair};
use crate::numerics::bessel::i0e;
use crate::numerics::quadrature::panel_rule;
use crate::numerics::special::radial_gaussian_profile;
use crate::numerics::{FringeSummary, PhaseDistribution, PhaseGrid, TAU};

/// Settings for the indirect measurement.
#[derive(Debug, Clone, Copy)]
pub struct IndirectConfig {
    lo_phase: f64,
    grid: PhaseGrid,
    quadrature_tolerance: f64,
}

impl IndirectConfig {
    /// Validates the quadrature tolerance (must lie in (0, 10⁻⁴]).
    pub fn new(lo_phase: f64, grid: PhaseGrid, quadrature_tolerance: f64) -> Result<Self> {
        if !lo_phase.is_finite() {
            return Err(Error::InvalidInput(format!(
                "local-oscillator phase must be finite, got {lo_phase}"
            )));
        }
        if !(quadrature_tolerance > 0.0 && quadrature_tolerance <= 1e-4) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerance {quadrature_tolerance} outside (0, 1e-4]"
            )));
        }
        Ok(Self {
            lo_phase,
            grid,
            quadrature_tolerance,
        })
    }

    /// Zero LO phase and a 10⁻⁸ quadrature tolerance.
    pub fn with_defaults(grid: PhaseGrid) -> Self {
        Self {
            lo_phase: 0.0,
            grid,
            quadrature_tolerance: 1e-8,
        }
    }

    pub fn lo_phase(&self) -> f64 {
        self.lo_phase
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    pub fn quadrature_tolerance(&self) -> f64 {
        self.quadrature_tolerance
    }
}

/// Phase marginal of a single mode read against the local oscillator.
///
/// The radially integrated Gaussian profile peaked at φ₀ − arg β, with the
/// sharpness set by |β|; exactly the curve of
/// [`crate::direct::direct_strong_limit`] recentered.
pub fn single_mode_phase_dist(
    beta: num_complex::Complex64,
    lo_phase: f64,
    grid: PhaseGrid,
) -> PhaseDistribution {
    assert!(
        beta.re.is_finite() && beta.im.is_finite() && beta.norm() <= CoherentPair::MAX_AMPLITUDE,
        "amplitude must be finite with |beta| <= {}",
        CoherentPair::MAX_AMPLITUDE
    );
    assert!(lo_phase.is_finite(), "lo_phase must be finite");
    let a = beta.norm();
    let center = lo_phase - beta.arg();
    let values = grid
        .phis()
        .map(|phi| radial_gaussian_profile(a, phi - center))
        .collect();
    PhaseDistribution::from_unnormalized(grid, values)
        .expect("unit-mass profile cannot lose all mass")
}

/// Relative-phase distribution by circular convolution of two marginals.
///
/// Discretizes 𝒫(φ) = ∫ dφ₁ p1(φ₁) p2(φ₁ − φ) on the shared grid, so a
/// peak of p1 at a and of p2 at b lands the result's peak at a − b.
pub fn convolve_relative_phase(
    p1: &PhaseDistribution,
    p2: &PhaseDistribution,
) -> Result<PhaseDistribution> {
    let grid = p1.grid();
    if grid != p2.grid() {
        return Err(Error::InvalidInput(
            "convolution requires both distributions on the same grid".into(),
        ));
    }
    let n = grid.len();
    let d1 = p1.density();
    let d2 = p2.density();
    let step = grid.step();
    let values: Vec<f64> = (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for j in 0..n {
                // (j - k) mod n without going negative.
                acc += d1[j] * d2[(j + n - k) % n];
            }
            acc * step
        })
        .collect();
    PhaseDistribution::from_unnormalized(grid, values)
}

/// Relative-phase distribution of the indirect scheme, exact form.
///
/// Evaluates, per grid point and mixture component,
///
/// ```text
/// 𝒫(φ) = (2/π) ∬ r₁ r₂ exp(−r₁² − r₂² − |β₁|² − |β₂|² + 2q) I₀ₑ(2q) dr₁dr₂
/// q(φ) = |r₁β₁ + r₂β₂e^{−iφ}|
/// ```
///
/// with the Bessel factor in exponentially scaled form so the combined
/// exponent is ≤ 0 (triangle inequality) and nothing overflows even at the
/// edge of the amplitude envelope. Tensor Gauss–Legendre panels on
/// [0, R]², R = max|β| + 8, are doubled until the grid-integrated density
/// moves by less than the configured tolerance.
pub fn indirect_general(
    ensemble: &CoherentEnsemble,
    config: &IndirectConfig,
) -> Result<PhaseDistribution> {
    let grid = config.grid();
    let r_max = ensemble
        .components()
        .iter()
        .map(|(_, p)| p.beta1().norm().max(p.beta2().norm()))
        .fold(0.0, f64::max)
        + 8.0;

    // Per component: (weight, |β₁|, |β₂|, total energy, φ₂ − φ₁).
    let comps: Vec<(f64, f64, f64, f64, f64)> = ensemble
        .components()
        .iter()
        .map(|&(w, p)| {
            let b1 = p.beta1().norm();
            let b2 = p.beta2().norm();
            (
                w,
                b1,
                b2,
                p.total_energy(),
                p.beta2().arg() - p.beta1().arg(),
            )
        })
        .collect();

    let density_at = |phi: f64, xs: &[f64], ws: &[f64]| -> f64 {
        let mut total = 0.0;
        for &(w, b1, b2, energy, delta) in &comps {
            // q² = r₁²|β₁|² + r₂²|β₂|² + 2 r₁ r₂ |β₁||β₂| cos(φ − (φ₂−φ₁))
            let cos_rel = (phi - delta).cos();
            let mut comp = 0.0;
            for (&r1, &w1) in xs.iter().zip(ws) {
                let s1 = r1 * b1;
                let mut inner = 0.0;
                for (&r2, &w2) in xs.iter().zip(ws) {
                    let s2 = r2 * b2;
                    let q = (s1 * s1 + s2 * s2 + 2.0 * s1 * s2 * cos_rel)
                        .max(0.0)
                        .sqrt();
                    let exponent = -r1 * r1 - r2 * r2 - energy + 2.0 * q;
                    inner += w2 * r2 * exponent.exp() * i0e(2.0 * q);
                }
                comp += w1 * r1 * inner;
            }
            total += w * comp;
        }
        total * 2.0 / std::f64::consts::PI
    };

    let mut panels = (r_max.ceil() as usize).max(4);
    const MAX_PANELS: usize = 512;
    let mut previous: Option<Vec<f64>> = None;
    while panels <= MAX_PANELS {
        let (xs, ws) = panel_rule(r_max, panels, 16);
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|k| density_at(grid.phi(k), &xs, &ws))
            .collect();
        if let Some(prev) = previous {
            let change: f64 = values
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                * grid.step();
            if change <= config.quadrature_tolerance() {
                return PhaseDistribution::from_unnormalized(grid, values);
            }
        }
        previous = Some(values);
        panels *= 2;
    }
    Err(Error::NonConvergence(format!(
        "indirect quadrature still changing after {MAX_PANELS} panels per axis"
    )))
}

/// Weak-field closed form of the indirect fringe:
/// (1/2π)[1 + (π/2)|β₁||β₂| cos(φ − (φ₂−φ₁))] to lowest order.
pub fn indirect_weak_limit(pair: &CoherentPair) -> Result<FringeSummary> {
    let b1 = pair.beta1().norm();
    let b2 = pair.beta2().norm();
    if b1 > 0.3 || b2 > 0.3 {
        return Err(Error::InvalidInput(format!(
            "weak-field form needs |beta| <= 0.3, got {b1} and {b2}"
        )));
    }
    let amplitude = std::f64::consts::FRAC_PI_2 * b1 * b2;
    let peak_phase = if amplitude == 0.0 {
        0.0
    } else {
        (pair.beta2().arg() - pair.beta1().arg()).rem_euclid(TAU)
    };
    Ok(FringeSummary {
        mean_offset: 1.0 / TAU,
        amplitude,
        peak_phase,
    })
}
