//! The direct scheme: estimate the relative phase of two modes from single
//! shots of the four-detector network, one angle per shot.
//!
//! Each shot produces the count-difference pair (n₄₃, n₆₅); its lattice angle
//! is the phase estimate for that shot. Sweeping the shifter θ uniformly and
//! referring every estimate to θ turns the discrete spike pattern of a fixed
//! setting into a smooth distribution over the relative phase φ:
//!
//! ```text
//! P(φ) ∝ Σ_{(n₄₃,n₆₅)≠(0,0)} W(n₄₃, n₆₅ | angle(n₄₃,n₆₅) − φ)
//! ```
//!
//! The (0,0) event carries no angle. [`DataPolicy`] selects between dropping
//! those shots and spreading their mass uniformly, and
//! [`NormalizationPolicy`] selects whether renormalization happens after the
//! θ-average or per shifter setting before it. Closed forms for very strong
//! and very weak fields round out the module.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{joint_count_probability, CoherentEnsemble, JointCountTable};
use crate::numerics::special::radial_gaussian_profile;
use crate::numerics::{fringe_fit, FringeSummary, PhaseDistribution, PhaseGrid, TAU};

/// What to do with shots in which every count difference vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataPolicy {
    /// Drop (0,0) shots and renormalize over the rest.
    DiscardOrigin,
    /// Keep (0,0) shots, spreading their mass uniformly over all angles.
    UniformSpread,
}

/// Where renormalization happens relative to the θ-average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizationPolicy {
    /// Average the raw per-setting distributions over θ, then normalize once.
    #[default]
    AverageThenNormalize,
    /// Normalize at each shifter setting, then average the results.
    NormalizeThenAverage,
}

/// Quadrant-correct angle of the lattice point (n₄₃, n₆₅) in [0, 2π).
///
/// The origin carries no direction and is rejected; those shots are the
/// subject of [`DataPolicy`].
pub fn count_angle(n43: i64, n65: i64) -> Result<f64> {
    if n43 == 0 && n65 == 0 {
        return Err(Error::InvalidInput(
            "the count pair (0, 0) has no angle".into(),
        ));
    }
    Ok((n65 as f64).atan2(n43 as f64).rem_euclid(TAU))
}

/// Probability mass aggregated over lattice rays at a fixed shifter setting.
///
/// Every nonzero count pair lies on a unique ray from the origin; the spike
/// pattern maps each occupied ray's angle to its total mass, with the origin
/// kept separate.
#[derive(Debug, Clone)]
pub struct SpikeDistribution {
    spikes: std::collections::BTreeMap<(i64, i64), f64>,
    origin_mass: f64,
}

impl SpikeDistribution {
    /// Probability of the angle-free (0,0) event.
    pub fn origin_mass(&self) -> f64 {
        self.origin_mass
    }

    /// Number of occupied rays.
    pub fn len(&self) -> usize {
        self.spikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    /// Total mass on the ray through (n₄₃, n₆₅), zero if unoccupied.
    pub fn ray_mass(&self, n43: i64, n65: i64) -> Result<f64> {
        if n43 == 0 && n65 == 0 {
            return Err(Error::InvalidInput(
                "the origin is not a ray; use origin_mass".into(),
            ));
        }
        Ok(self
            .spikes
            .get(&reduce_ray(n43, n65))
            .copied()
            .unwrap_or(0.0))
    }

    /// Occupied rays as (angle, mass), sorted by angle.
    pub fn by_angle(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .spikes
            .iter()
            .map(|(&(n, m), &w)| {
                let angle = count_angle(n, m).expect("stored rays are never the origin");
                (angle, w)
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Total mass on all rays (excludes the origin).
    pub fn total_spike_mass(&self) -> f64 {
        self.spikes.values().sum()
    }
}

/// Direction of the ray through a nonzero lattice point, in lowest terms.
fn reduce_ray(n43: i64, n65: i64) -> (i64, i64) {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    let g = gcd(n43.unsigned_abs(), n65.unsigned_abs()) as i64;
    (n43 / g, n65 / g)
}

/// Aggregates a joint count table over lattice rays.
pub fn spike_distribution(table: &JointCountTable) -> SpikeDistribution {
    let mut spikes = std::collections::BTreeMap::new();
    let mut origin_mass = 0.0;
    for ((n43, n65), w) in table.iter() {
        if n43 == 0 && n65 == 0 {
            origin_mass = w;
        } else if w > 0.0 {
            *spikes.entry(reduce_ray(n43, n65)).or_insert(0.0) += w;
        }
    }
    SpikeDistribution {
        spikes,
        origin_mass,
    }
}

/// A source of joint count-difference statistics at any shifter setting.
///
/// The θ-averaging machinery only needs pointwise access to
/// W(n₄₃, n₆₅ | θ) plus a certified support bound, so both the coherent
/// ensemble model here and the photon-number model in [`crate::fock`]
/// implement this.
pub trait CountModel: Sync {
    /// Joint pmf of the count differences at shifter setting `theta`.
    fn joint(&self, n43: i64, n65: i64, theta: f64) -> f64;

    /// Half-width h such that mass outside |n₄₃|, |n₆₅| ≤ h is negligible
    /// (below 10⁻¹⁰) at every θ.
    fn support_half_width(&self) -> i64;

    /// θ-average of the zero-count probability W(0, 0 | θ).
    ///
    /// 64 uniform nodes integrate any trigonometric polynomial of degree
    /// < 32 in θ exactly, far beyond what the models here produce.
    fn origin_theta_average(&self) -> f64 {
        let nodes = 64;
        (0..nodes)
            .map(|j| self.joint(0, 0, TAU * j as f64 / nodes as f64))
            .sum::<f64>()
            / nodes as f64
    }
}

impl CountModel for CoherentEnsemble {
    /// The `theta` argument overrides each component's stored setting: the
    /// shifter belongs to the apparatus, not to the state.
    fn joint(&self, n43: i64, n65: i64, theta: f64) -> f64 {
        self.components()
            .iter()
            .map(|&(w, pair)| w * joint_count_probability(&pair.with_theta(theta), n43, n65))
            .sum()
    }

    fn support_half_width(&self) -> i64 {
        // Each difference channel draws on two detectors with combined mean
        // E/2 at every θ, so a Poisson tail bound on that sum caps |n|.
        let mu = self.max_energy() / 2.0;
        (mu + 10.0 * mu.sqrt() + 10.0).ceil() as i64
    }
}

/// θ-averaged phase distribution for any count model.
///
/// Evaluates, at every grid point φ, the lattice sum over nonzero count
/// pairs with the shifter at angle(n₄₃, n₆₅) − φ. Under
/// [`DataPolicy::UniformSpread`] the θ-averaged origin mass joins as a flat
/// offset; under [`NormalizationPolicy::NormalizeThenAverage`] each term is
/// divided by the per-setting non-origin mass 1 − W(0,0|θ) before summing
/// (for `UniformSpread` the per-setting distributions are already normalized,
/// so the policies coincide there).
pub fn averaged_for_model<M: CountModel>(
    model: &M,
    policy: DataPolicy,
    norm: NormalizationPolicy,
    grid: PhaseGrid,
) -> Result<PhaseDistribution> {
    let half = model.support_half_width();
    let origin_offset = match policy {
        DataPolicy::DiscardOrigin => 0.0,
        DataPolicy::UniformSpread => model.origin_theta_average(),
    };
    let rescale_per_setting =
        norm == NormalizationPolicy::NormalizeThenAverage && policy == DataPolicy::DiscardOrigin;

    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|g| {
            let phi = grid.phi(g);
            let mut acc = 0.0;
            for n43 in -half..=half {
                for n65 in -half..=half {
                    if n43 == 0 && n65 == 0 {
                        continue;
                    }
                    let angle = count_angle(n43, n65).expect("origin skipped");
                    let theta = angle - phi;
                    let w = model.joint(n43, n65, theta);
                    if w == 0.0 {
                        continue;
                    }
                    if rescale_per_setting {
                        acc += w / (1.0 - model.joint(0, 0, theta));
                    } else {
                        acc += w;
                    }
                }
            }
            acc + origin_offset
        })
        .collect();

    PhaseDistribution::from_unnormalized(grid, values)
}

/// θ-averaged phase distribution of a coherent mixture in the direct scheme.
pub fn averaged_distribution(
    ensemble: &CoherentEnsemble,
    policy: DataPolicy,
    norm: NormalizationPolicy,
    grid: PhaseGrid,
) -> Result<PhaseDistribution> {
    averaged_for_model(ensemble, policy, norm, grid)
}

/// Strong-second-field limit of the direct scheme.
///
/// When one field dominates it acts as the phase reference, and both data
/// policies collapse to the same radially integrated Gaussian profile
/// centered on the phase difference arg β₂ − arg β₁, with the first field's
/// magnitude setting the sharpness. Mixtures combine by their weights.
pub fn direct_strong_limit(ensemble: &CoherentEnsemble, grid: PhaseGrid) -> PhaseDistribution {
    let values: Vec<f64> = grid
        .phis()
        .map(|phi| {
            ensemble
                .components()
                .iter()
                .map(|(w, pair)| {
                    let a = pair.beta1().norm();
                    let peak = pair.beta2().arg() - pair.beta1().arg();
                    w * radial_gaussian_profile(a, phi - peak)
                })
                .sum()
        })
        .collect();
    PhaseDistribution::from_unnormalized(grid, values)
        .expect("mixture of unit-mass profiles cannot lose all mass")
}

/// Weak-field closed form of the direct fringe.
///
/// To quartic corrections the weak-field distribution is
/// (1/2π)[1 + A cos(φ − (φ₂−φ₁))] with
///
/// ```text
/// A = 2 / (|β₁|/|β₂| + |β₂|/|β₁|)   dropping the (0,0) shots
/// A = 2 |β₁||β₂|                     spreading them uniformly
/// ```
///
/// When either amplitude vanishes under [`DataPolicy::DiscardOrigin`] the
/// ratio form is indeterminate but its limit is flat, reported as amplitude
/// zero.
pub fn direct_weak_limit(
    pair: &crate::kernels::CoherentPair,
    policy: DataPolicy,
) -> Result<FringeSummary> {
    let b1 = pair.beta1().norm();
    let b2 = pair.beta2().norm();
    if b1 > 0.3 || b2 > 0.3 {
        return Err(Error::InvalidInput(format!(
            "weak-field form needs |beta| <= 0.3, got {b1} and {b2}"
        )));
    }
    let amplitude = match policy {
        DataPolicy::DiscardOrigin => {
            if b1 == 0.0 || b2 == 0.0 {
                0.0
            } else {
                2.0 / (b1 / b2 + b2 / b1)
            }
        }
        DataPolicy::UniformSpread => 2.0 * b1 * b2,
    };
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

/// Fits the leading fringe of a distribution; re-exported here because the
/// weak-field checks pair it with [`direct_weak_limit`].
pub fn fringe_of(dist: &PhaseDistribution) -> FringeSummary {
    fringe_fit(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_joint_table, CoherentPair};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn pair(b1: (f64, f64), b2: (f64, f64), theta: f64) -> CoherentPair {
        CoherentPair::new(
            Complex64::new(b1.0, b1.1),
            Complex64::new(b2.0, b2.1),
            theta,
        )
        .unwrap()
    }

    fn pure(b1: (f64, f64), b2: (f64, f64)) -> CoherentEnsemble {
        CoherentEnsemble::pure(pair(b1, b2, 0.0))
    }

    #[test]
    fn count_angle_quadrants() {
        assert_eq!(count_angle(1, 0).unwrap(), 0.0);
        assert!((count_angle(-1, 0).unwrap() - PI).abs() < 1e-15);
        assert!((count_angle(-1, -1).unwrap() - 5.0 * PI / 4.0).abs() < 1e-15);
        assert!((count_angle(0, 1).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((count_angle(3, 3).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(count_angle(0, 0).is_err());
    }

    #[test]
    fn vacuum_spikes_are_pure_origin() {
        let table =
            build_joint_table(&CoherentEnsemble::pure(CoherentPair::vacuum()), 1e-9).unwrap();
        let spikes = spike_distribution(&table);
        assert!(spikes.is_empty());
        assert_eq!(spikes.origin_mass(), 1.0);
    }

    #[test]
    fn balanced_input_spike_on_positive_axis() {
        // β₁ = β₂ = 1, θ = 0: detector 3 is dark, so every shot has
        // n₄₃ ≥ 0; the mass at angle 0 is the whole n₆₅ = 0, n₄₃ > 0 column.
        let e = pure((1.0, 0.0), (1.0, 0.0));
        let table = build_joint_table(&e, 1e-9).unwrap();
        let spikes = spike_distribution(&table);
        let p = pair((1.0, 0.0), (1.0, 0.0), 0.0);
        let want: f64 = (1..=30).map(|n| joint_count_probability(&p, n, 0)).sum();
        let got = spikes.ray_mass(1, 0).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        // Negative-axis ray never fires.
        assert_eq!(spikes.ray_mass(-1, 0).unwrap(), 0.0);
    }

    #[test]
    fn spike_mass_accounts_for_everything() {
        let b2 = Complex64::from_polar(0.7, PI / 3.0);
        let e =
            CoherentEnsemble::pure(CoherentPair::new(Complex64::new(0.3, 0.0), b2, 0.0).unwrap());
        let table = build_joint_table(&e, 1e-9).unwrap();
        let spikes = spike_distribution(&table);
        let total = spikes.total_spike_mass() + spikes.origin_mass();
        assert!((total - 1.0).abs() < 1e-9, "total {total}");
    }

    #[test]
    fn weak_equal_fields_give_full_fringe_when_origin_dropped() {
        let grid = PhaseGrid::new(128).unwrap();
        let dist = averaged_distribution(
            &pure((0.1, 0.0), (0.1, 0.0)),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let fringe = fringe_fit(&dist);
        assert!(
            (fringe.amplitude - 1.0).abs() < 0.02,
            "A = {}",
            fringe.amplitude
        );
        // Peak at φ₂ − φ₁ = 0.
        let peak_dist = fringe.peak_phase.min(TAU - fringe.peak_phase);
        assert!(peak_dist < grid.step(), "peak at {}", fringe.peak_phase);
        assert!((fringe.mean_offset - 1.0 / TAU).abs() < 1e-12);
    }

    #[test]
    fn weak_equal_fields_faint_fringe_when_origin_spread() {
        let grid = PhaseGrid::new(128).unwrap();
        let dist = averaged_distribution(
            &pure((0.1, 0.0), (0.1, 0.0)),
            DataPolicy::UniformSpread,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let fringe = fringe_fit(&dist);
        assert!(
            (fringe.amplitude - 0.02).abs() < 0.02 * 0.05,
            "A = {}",
            fringe.amplitude
        );
    }

    #[test]
    fn weak_unequal_fields_fringe_amplitude() {
        let grid = PhaseGrid::new(128).unwrap();
        let dist = averaged_distribution(
            &pure((0.1, 0.0), (0.2, 0.0)),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let fringe = fringe_fit(&dist);
        assert!(
            (fringe.amplitude - 0.8).abs() < 0.8 * 0.02,
            "A = {}",
            fringe.amplitude
        );
    }

    #[test]
    fn vacuum_input_has_no_angles_to_average() {
        let grid = PhaseGrid::new(64).unwrap();
        let err = averaged_distribution(
            &CoherentEnsemble::pure(CoherentPair::vacuum()),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoData(_)), "{err}");

        // Spreading the origin keeps the vacuum well-defined and flat.
        let dist = averaged_distribution(
            &CoherentEnsemble::pure(CoherentPair::vacuum()),
            DataPolicy::UniformSpread,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        for &d in dist.density() {
            assert!((d - 1.0 / TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn strong_fields_make_the_data_policy_irrelevant() {
        // At β₁ = 1, β₂ = −4 the θ-averaged origin mass is ~0.0077, and the
        // two policies differ pointwise by ~3e-3 of the peak density.
        let grid = PhaseGrid::new(128).unwrap();
        let e = pure((1.0, 0.0), (-4.0, 0.0));
        let drop = averaged_distribution(
            &e,
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let spread = averaged_distribution(
            &e,
            DataPolicy::UniformSpread,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let gap = drop.linf_distance(&spread).unwrap();
        assert!(gap < 5e-3, "policy gap {gap}");
    }

    #[test]
    fn normalization_order_changes_little_even_for_weak_fields() {
        let grid = PhaseGrid::new(64).unwrap();
        let e = pure((0.2, 0.0), (0.2, 0.0));
        let after = averaged_distribution(
            &e,
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let before = averaged_distribution(
            &e,
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::NormalizeThenAverage,
            grid,
        )
        .unwrap();
        // Distinct distributions, same fringe structure.
        let gap = after.linf_distance(&before).unwrap();
        assert!(gap < 1e-2, "normalization gap {gap}");
        let fa = fringe_fit(&after);
        let fb = fringe_fit(&before);
        assert!((fa.peak_phase - fb.peak_phase).abs() < grid.step());
    }

    #[test]
    fn shifting_the_second_phase_shifts_the_distribution() {
        let grid = PhaseGrid::new(64).unwrap();
        let shift_steps = 16usize;
        let chi = grid.step() * shift_steps as f64;
        let base = averaged_distribution(
            &pure((0.3, 0.0), (0.5, 0.0)),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let shifted = averaged_distribution(
            &CoherentEnsemble::pure(
                CoherentPair::new(
                    Complex64::new(0.3, 0.0),
                    Complex64::from_polar(0.5, chi),
                    0.0,
                )
                .unwrap(),
            ),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let n = grid.len();
        for k in 0..n {
            let diff = (shifted.density()[(k + shift_steps) % n] - base.density()[k]).abs();
            assert!(diff < 1e-6, "index {k}: {diff}");
        }
    }

    #[test]
    fn real_amplitudes_give_reflection_symmetry() {
        let grid = PhaseGrid::new(64).unwrap();
        let dist = averaged_distribution(
            &pure((0.4, 0.0), (0.8, 0.0)),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let n = grid.len();
        for k in 1..n {
            let diff = (dist.density()[k] - dist.density()[n - k]).abs();
            assert!(diff < 1e-9, "index {k}: {diff}");
        }
    }

    #[test]
    fn averaged_distribution_matches_weak_closed_form() {
        let grid = PhaseGrid::new(128).unwrap();
        let p = pair((0.05, 0.0), (0.05, 0.0), 0.0);
        let e = CoherentEnsemble::pure(p);
        for policy in [DataPolicy::DiscardOrigin, DataPolicy::UniformSpread] {
            let dist =
                averaged_distribution(&e, policy, NormalizationPolicy::AverageThenNormalize, grid)
                    .unwrap();
            let fitted = fringe_fit(&dist);
            let closed = direct_weak_limit(&p, policy).unwrap();
            let rel = (fitted.amplitude - closed.amplitude).abs() / closed.amplitude;
            assert!(
                rel < 0.01,
                "{policy:?}: fitted {} vs closed {}",
                fitted.amplitude,
                closed.amplitude
            );
        }
    }

    #[test]
    fn weak_limit_values_and_envelope() {
        let p = pair((0.1, 0.0), (0.1, 0.0), 0.0);
        let drop = direct_weak_limit(&p, DataPolicy::DiscardOrigin).unwrap();
        assert!((drop.amplitude - 1.0).abs() < 1e-15);
        let spread = direct_weak_limit(&p, DataPolicy::UniformSpread).unwrap();
        assert!((spread.amplitude - 0.02).abs() < 1e-15);

        // Dropping the origin always beats spreading it in the weak regime.
        for (b1, b2) in [(0.05, 0.25), (0.3, 0.3), (0.02, 0.02), (0.29, 0.07)] {
            let p = pair((b1, 0.0), (b2, 0.0), 0.0);
            let a_drop = direct_weak_limit(&p, DataPolicy::DiscardOrigin)
                .unwrap()
                .amplitude;
            let a_spread = direct_weak_limit(&p, DataPolicy::UniformSpread)
                .unwrap()
                .amplitude;
            assert!(a_drop > a_spread, "({b1},{b2}): {a_drop} vs {a_spread}");
        }

        // Vanishing amplitude: flat fringe, not an error.
        let dead = pair((0.0, 0.0), (0.2, 0.0), 0.0);
        let flat = direct_weak_limit(&dead, DataPolicy::DiscardOrigin).unwrap();
        assert_eq!(flat.amplitude, 0.0);
        assert_eq!(flat.peak_phase, 0.0);

        // Out of the weak envelope.
        let strong = pair((1.0, 0.0), (0.1, 0.0), 0.0);
        assert!(direct_weak_limit(&strong, DataPolicy::DiscardOrigin).is_err());
    }

    #[test]
    fn weak_limit_peak_tracks_phase_difference() {
        let p = CoherentPair::new(
            Complex64::from_polar(0.1, 0.4),
            Complex64::from_polar(0.2, 1.9),
            0.0,
        )
        .unwrap();
        let fringe = direct_weak_limit(&p, DataPolicy::DiscardOrigin).unwrap();
        assert!((fringe.peak_phase - 1.5).abs() < 1e-12);
    }

    #[test]
    fn strong_limit_uniform_for_vacuum_signal() {
        let grid = PhaseGrid::new(64).unwrap();
        let dist = direct_strong_limit(&pure((0.0, 0.0), (-4.0, 0.0)), grid);
        for &d in dist.density() {
            assert!((d - 1.0 / TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn strong_limit_peaks_at_phase_difference() {
        let grid = PhaseGrid::new(256).unwrap();
        // β₂ = −4: phase difference is π.
        let dist = direct_strong_limit(&pure((1.0, 0.0), (-4.0, 0.0)), grid);
        let peak = grid.phi(dist.argmax());
        assert!((peak - PI).abs() < grid.step() + 1e-12, "peak at {peak}");
    }

    #[test]
    fn strong_limit_depends_only_on_the_phase_difference() {
        let grid = PhaseGrid::new(64).unwrap();
        let shift_steps = 8usize;
        let chi = grid.step() * shift_steps as f64;
        let base = direct_strong_limit(&pure((1.0, 0.0), (4.0, 0.0)), grid);
        let rotated = direct_strong_limit(
            &CoherentEnsemble::pure(
                CoherentPair::new(
                    Complex64::new(1.0, 0.0),
                    Complex64::from_polar(4.0, chi),
                    0.0,
                )
                .unwrap(),
            ),
            grid,
        );
        let n = grid.len();
        for k in 0..n {
            let diff = (rotated.density()[(k + shift_steps) % n] - base.density()[k]).abs();
            assert!(diff < 1e-12, "index {k}: {diff}");
        }
    }

    #[test]
    fn averaged_approaches_strong_limit() {
        let grid = PhaseGrid::new(128).unwrap();
        let e = pure((1.0, 0.0), (-4.0, 0.0));
        let averaged = averaged_distribution(
            &e,
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let strong = direct_strong_limit(&e, grid);
        let gap = averaged.linf_distance(&strong).unwrap();
        assert!(gap < 0.02, "gap {gap}");
    }
}
