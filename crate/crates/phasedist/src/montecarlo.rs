//! Stochastic cross-validation of the analytic machinery.
//!
//! Each output mode of the network carries a coherent state, so ideal
//! photodetection yields four independent Poisson counts per shot with means
//! |a₃|² .. |a₆|². This module samples those counts, accumulates empirical
//! count-difference tables and phase histograms the way the bench procedure
//! would, and tests their agreement with the exact tables via a pooled
//! Pearson chi-square.
//!
//! Reproducibility: all randomness comes from ChaCha8 seeded with the user
//! seed, split into independent streams by `stream = (θ-node index << 24) |
//! shot-block index` with 2¹⁶ shots per block. Workers can then sample
//! blocks in any order or in parallel and still merge to a bit-identical
//! result.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::direct::{count_angle, DataPolicy};
use crate::error::{Error, Result};
use crate::kernels::{output_amplitudes, CoherentPair, JointCountTable};
use crate::numerics::special::regularized_gamma_upper;
use crate::numerics::{PhaseDistribution, PhaseGrid};

/// Shots per RNG block; one ChaCha stream serves exactly one block.
const SHOT_BLOCK: u64 = 1 << 16;

/// Node indices share the stream word with block indices.
const MAX_BLOCKS: u64 = 1 << 24;

/// Pooled cells must reach this expected count for the asymptotic
/// chi-square distribution to hold.
const MIN_EXPECTED_PER_CELL: f64 = 5.0;

/// One trial: the four detector counts at a shifter setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotRecord {
    pub counts: [u64; 4],
}

impl ShotRecord {
    pub fn n43(&self) -> i64 {
        self.counts[1] as i64 - self.counts[0] as i64
    }

    pub fn n65(&self) -> i64 {
        self.counts[3] as i64 - self.counts[2] as i64
    }
}

/// Four per-detector Poisson samplers; a zero mean is a deterministic zero
/// count (the distribution constructor rejects it).
struct ShotSampler {
    detectors: [Option<Poisson<f64>>; 4],
}

impl ShotSampler {
    fn new(pair: &CoherentPair) -> Self {
        let amps = output_amplitudes(pair);
        let make = |mu: f64| {
            if mu > 0.0 {
                Some(Poisson::new(mu).expect("finite positive mean"))
            } else {
                None
            }
        };
        Self {
            detectors: [
                make(amps.a3.norm_sqr()),
                make(amps.a4.norm_sqr()),
                make(amps.a5.norm_sqr()),
                make(amps.a6.norm_sqr()),
            ],
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ShotRecord {
        let mut counts = [0u64; 4];
        for (slot, detector) in counts.iter_mut().zip(&self.detectors) {
            if let Some(dist) = detector {
                let draw: f64 = dist.sample(rng);
                *slot = draw as u64;
            }
        }
        ShotRecord { counts }
    }
}

fn block_rng(seed: u64, node: u64, block: u64) -> ChaCha8Rng {
    debug_assert!(block < MAX_BLOCKS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((node << 24) | block);
    rng
}

/// Splits `shots` into block-sized ranges aligned with the RNG streams.
fn block_lengths(shots: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let blocks = shots.div_ceil(SHOT_BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(move |b| (b, (shots - b * SHOT_BLOCK).min(SHOT_BLOCK)))
}

/// Empirical joint count-difference table from repeated shots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalTable {
    entries: BTreeMap<(i64, i64), u64>,
    shots: u64,
    seed: u64,
}

impl EmpiricalTable {
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self, n43: i64, n65: i64) -> u64 {
        self.entries.get(&(n43, n65)).copied().unwrap_or(0)
    }

    /// Observed relative frequency of (n₄₃, n₆₅).
    pub fn frequency(&self, n43: i64, n65: i64) -> f64 {
        self.count(n43, n65) as f64 / self.shots as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i64, i64), &u64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Samples the joint count-difference distribution of a fixed input.
///
/// Deterministic for a given seed regardless of thread count: block b of
/// 2¹⁶ shots always uses ChaCha8 stream (0 << 24) | b.
pub fn sample_counts(pair: &CoherentPair, shots: u64, seed: u64) -> Result<EmpiricalTable> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    if shots.div_ceil(SHOT_BLOCK) > MAX_BLOCKS {
        return Err(Error::InvalidInput(format!(
            "shot count {shots} exceeds the stream-splitting capacity"
        )));
    }
    let sampler = ShotSampler::new(pair);
    let entries = block_lengths(shots)
        .map(|(block, len)| {
            let mut rng = block_rng(seed, 0, block);
            let mut local: HashMap<(i64, i64), u64> = HashMap::new();
            for _ in 0..len {
                let shot = sampler.sample(&mut rng);
                *local.entry((shot.n43(), shot.n65())).or_insert(0) += 1;
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (key, count) in b {
                *a.entry(key).or_insert(0) += count;
            }
            a
        });
    let entries: BTreeMap<_, _> = entries.into_iter().collect();
    debug_assert_eq!(entries.values().sum::<u64>(), shots);
    Ok(EmpiricalTable {
        entries,
        shots,
        seed,
    })
}

/// A phase histogram built the way the bench builds one, plus the
/// origin-event diagnostic.
#[derive(Debug, Clone)]
pub struct EmpiricalPhase {
    distribution: PhaseDistribution,
    bin_weights: Vec<f64>,
    discarded_fraction: f64,
    total_shots: u64,
}

impl EmpiricalPhase {
    pub fn distribution(&self) -> &PhaseDistribution {
        &self.distribution
    }

    /// Raw per-bin weights before normalization: integer event counts under
    /// `DiscardOrigin`, counts plus the uniformly spread origin weight under
    /// `UniformSpread`.
    pub fn bin_weights(&self) -> &[f64] {
        &self.bin_weights
    }

    /// Fraction of all shots that produced the zero-count-difference
    /// outcome — the postselection cost of the discard policy, reported
    /// under both policies.
    pub fn discarded_fraction(&self) -> f64 {
        self.discarded_fraction
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn kept_weight(&self) -> f64 {
        self.bin_weights.iter().sum()
    }
}

/// Emulates the full measurement procedure: sweep θ over the grid nodes,
/// sample `shots_per_theta` shots at each, assign every non-origin outcome
/// the angle of its count pair minus θ, and bin to the nearest grid node.
///
/// Origin outcomes are dropped (`DiscardOrigin`) or spread uniformly over
/// the bins (`UniformSpread`); the histogram is then normalized as a
/// density. The stored θ of `pair` is ignored — the sweep sets it.
///
/// Node t, block b uses ChaCha8 stream (t << 24) | b, so results are
/// independent of scheduling.
pub fn empirical_phase_distribution(
    pair: &CoherentPair,
    policy: DataPolicy,
    shots_per_theta: u64,
    seed: u64,
    grid: PhaseGrid,
) -> Result<EmpiricalPhase> {
    if shots_per_theta == 0 {
        return Err(Error::InvalidInput(
            "shots_per_theta must be at least 1".into(),
        ));
    }
    if shots_per_theta.div_ceil(SHOT_BLOCK) > MAX_BLOCKS {
        return Err(Error::InvalidInput(format!(
            "shot count {shots_per_theta} exceeds the stream-splitting capacity"
        )));
    }
    let n = grid.len();
    let (bins, origin_events) = (0..n)
        .into_par_iter()
        .flat_map(|node| block_lengths(shots_per_theta).map(move |(b, len)| (node, b, len)))
        .map(|(node, block, len)| {
            let theta = grid.phi(node);
            let sampler = ShotSampler::new(&pair.with_theta(theta));
            let mut rng = block_rng(seed, node as u64, block);
            let mut bins = vec![0.0f64; n];
            let mut origin = 0u64;
            for _ in 0..len {
                let shot = sampler.sample(&mut rng);
                let (n43, n65) = (shot.n43(), shot.n65());
                if n43 == 0 && n65 == 0 {
                    origin += 1;
                } else {
                    let angle = count_angle(n43, n65).expect("non-origin pair always has an angle");
                    bins[grid.nearest_index(angle - theta)] += 1.0;
                }
            }
            (bins, origin)
        })
        .reduce(
            || (vec![0.0f64; n], 0u64),
            |(mut bins_a, origin_a), (bins_b, origin_b)| {
                for (a, b) in bins_a.iter_mut().zip(&bins_b) {
                    *a += b;
                }
                (bins_a, origin_a + origin_b)
            },
        );

    let total_shots = shots_per_theta * n as u64;
    let discarded_fraction = origin_events as f64 / total_shots as f64;
    let bin_weights = match policy {
        DataPolicy::DiscardOrigin => {
            if origin_events == total_shots {
                return Err(Error::NoData(
                    "every sampled outcome sat at the origin; nothing to bin \
                     under the discard policy"
                        .into(),
                ));
            }
            bins
        }
        DataPolicy::UniformSpread => {
            let spread = origin_events as f64 / n as f64;
            bins.iter().map(|&b| b + spread).collect()
        }
    };
    let distribution = PhaseDistribution::from_unnormalized(grid, bin_weights.clone())?;
    Ok(EmpiricalPhase {
        distribution,
        bin_weights,
        discarded_fraction,
        total_shots,
    })
}

/// Result of a pooled Pearson chi-square test.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    /// Pooled cells minus one.
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson statistic over cells pooled, in ascending order of expectation,
/// until each pooled cell expects at least `MIN_EXPECTED_PER_CELL` events;
/// a final underweight remainder merges into the last closed pool.
fn pooled_pearson(mut cells: Vec<(f64, f64)>) -> Result<ChiSquareOutcome> {
    cells.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut pools: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0f64, 0.0f64);
    for (obs, exp) in cells {
        obs_acc += obs;
        exp_acc += exp;
        if exp_acc >= MIN_EXPECTED_PER_CELL {
            pools.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if obs_acc != 0.0 || exp_acc != 0.0 {
        match pools.last_mut() {
            Some(last) => {
                last.0 += obs_acc;
                last.1 += exp_acc;
            }
            None => {
                return Err(Error::InvalidInput(
                    "too few expected events for a valid chi-square test; \
                     increase the shot count"
                        .into(),
                ))
            }
        }
    }
    let statistic: f64 = pools
        .iter()
        .map(|&(obs, exp)| (obs - exp) * (obs - exp) / exp)
        .sum();
    let dof = pools.len() - 1;
    let p_value = chi_square_survival(statistic, dof);
    Ok(ChiSquareOutcome {
        statistic,
        dof,
        p_value,
    })
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom; zero degrees of freedom means nothing was free to fluctuate.
fn chi_square_survival(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    regularized_gamma_upper(dof as f64 / 2.0, statistic / 2.0)
}

/// Pearson chi-square of an empirical count table against the exact one.
///
/// Cells are the union of the analytic support and the observed outcomes
/// (an observed outcome beyond the analytic table contributes with its
/// certified-negligible expectation of zero), pooled ascending as above.
pub fn chi_square_compare(
    empirical: &EmpiricalTable,
    analytic: &JointCountTable,
) -> Result<ChiSquareOutcome> {
    if empirical.is_empty() {
        return Err(Error::InvalidInput("empty empirical table".into()));
    }
    let shots = empirical.shots() as f64;
    let mut observed: HashMap<(i64, i64), f64> = empirical
        .iter()
        .map(|(&key, &count)| (key, count as f64))
        .collect();
    let mut cells: Vec<(f64, f64)> = analytic
        .iter()
        .map(|(key, p)| (observed.remove(&key).unwrap_or(0.0), p * shots))
        .collect();
    cells.extend(observed.into_values().map(|obs| (obs, 0.0)));
    pooled_pearson(cells)
}

/// Pearson chi-square of an empirical phase histogram against an analytic
/// density on the same grid.
///
/// Valid as a multinomial test under `DiscardOrigin`, where the bin weights
/// are genuine event counts conditioned on keeping the shot; under
/// `UniformSpread` the spread origin weight is deterministic given the
/// origin count, so the p-value is conservative.
pub fn chi_square_phase_histogram(
    empirical: &EmpiricalPhase,
    analytic: &PhaseDistribution,
) -> Result<ChiSquareOutcome> {
    if empirical.distribution().grid() != analytic.grid() {
        return Err(Error::InvalidInput(
            "empirical histogram and analytic density use different grids".into(),
        ));
    }
    let kept = empirical.kept_weight();
    let step = analytic.grid().step();
    let mass: f64 = analytic.density().iter().map(|&d| d * step).sum();
    let cells: Vec<(f64, f64)> = empirical
        .bin_weights()
        .iter()
        .zip(analytic.density())
        .map(|(&obs, &d)| (obs, kept * (d * step) / mass))
        .collect();
    pooled_pearson(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::{averaged_distribution, NormalizationPolicy};
    use crate::kernels::{build_joint_table, CoherentEnsemble};
    use crate::numerics::{fringe_fit, TAU};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn pair(b1: f64, b2: f64, theta: f64) -> CoherentPair {
        CoherentPair::new(Complex64::new(b1, 0.0), Complex64::new(b2, 0.0), theta).unwrap()
    }

    #[test]
    // Reference digits are quoted verbatim from the arbitrary-precision run.
    #[allow(clippy::excessive_precision)]
    fn survival_function_reference_values() {
        // Arbitrary-precision references for the chi-square survival
        // function, spanning both internal branches and extreme tails.
        let cases = [
            (10.0, 5, 0.075235246146512179),
            (3.5, 2, 0.17377394345044513),
            (63.0, 63, 0.47630238333813013),
            (100.0, 63, 0.0020772365527847954),
            (200.0, 63, 3.6170018669952573e-16),
            (0.5, 1, 0.47950012218695346),
            (70.0, 40, 0.0023245066078420914),
        ];
        for (x, k, want) in cases {
            let got = chi_square_survival(x, k);
            assert!(
                ((got - want) / want).abs() < 1e-8,
                "sf({x}, {k}): got {got:.16e}, want {want:.16e}"
            );
        }
        assert_eq!(chi_square_survival(0.0, 4), 1.0);
    }

    #[test]
    fn vacuum_samples_sit_at_the_origin() {
        let table = sample_counts(&pair(0.0, 0.0, 0.0), 1000, 7).unwrap();
        assert_eq!(table.count(0, 0), 1000);
        assert_eq!(table.len(), 1);
        assert_eq!(table.shots(), 1000);
    }

    #[test]
    fn sampling_is_deterministic_and_exhaustive() {
        // 200_000 shots spans four RNG blocks, one of them partial.
        let p = pair(1.0, -0.7, 0.4);
        let a = sample_counts(&p, 200_000, 99).unwrap();
        let b = sample_counts(&p, 200_000, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|(_, &c)| c).sum::<u64>(), 200_000);
        let c = sample_counts(&p, 200_000, 100).unwrap();
        assert_ne!(a, c);
        assert!(sample_counts(&p, 0, 1).is_err());
    }

    #[test]
    fn origin_frequency_matches_the_analytic_kernel() {
        // W(0,0) for β₁ = 1, β₂ = 0 is e^{-1/2}[I₀(1/4)·e^{... }]² — the
        // pinned kernel-module value 0.416070500123408; 3σ binomial at 10⁶
        // shots is 0.0015.
        let table = sample_counts(&pair(1.0, 0.0, 0.0), 1_000_000, 2024).unwrap();
        let freq = table.frequency(0, 0);
        assert!(
            (freq - 0.416070500123408).abs() < 0.0015,
            "frequency {freq}"
        );
    }

    #[test]
    fn pooling_rules() {
        // Ascending expectations [3,3,3,4,7]: pools (3+3), (3+4), (7).
        let cells = vec![(6.0, 3.0), (0.0, 3.0), (3.0, 3.0), (4.0, 4.0), (7.0, 7.0)];
        let out = pooled_pearson(cells).unwrap();
        assert_eq!(out.dof, 2);
        // (6+0 vs 6): 0; (3+4 vs 7): 0; (7 vs 7): 0.
        assert!(out.statistic.abs() < 1e-12);
        assert!((out.p_value - 1.0).abs() < 1e-12);

        // A trailing underweight remainder merges into the last pool.
        let cells = vec![(5.0, 5.0), (1.0, 2.0)];
        let out = pooled_pearson(cells).unwrap();
        assert_eq!(out.dof, 0);
        assert!((out.statistic - 1.0 / 7.0).abs() < 1e-12);

        // Nothing ever reaches the pooling threshold: no valid test.
        assert!(pooled_pearson(vec![(1.0, 1.0), (0.0, 0.5)]).is_err());
    }

    #[test]
    fn chi_square_is_calibrated_on_its_own_distribution() {
        let p = pair(1.0, 1.0, 0.7);
        let ensemble = CoherentEnsemble::pure(p);
        let analytic = build_joint_table(&ensemble, 1e-9).unwrap();
        let mut p_values = Vec::new();
        for seed in 0..20 {
            let empirical = sample_counts(&p, 1_000_000, seed).unwrap();
            let out = chi_square_compare(&empirical, &analytic).unwrap();
            assert!(out.dof >= 10, "dof {}", out.dof);
            p_values.push(out.p_value);
        }
        // Every fixed seed passes at the 10⁻³ level, and the p-values are
        // spread rather than clumped at either end.
        assert!(p_values.iter().all(|&p| p > 1e-3), "{p_values:?}");
        let below_half = p_values.iter().filter(|&&p| p < 0.5).count();
        assert!(
            (3..=17).contains(&below_half),
            "p-values look miscalibrated: {p_values:?}"
        );
    }

    #[test]
    fn chi_square_rejects_a_wrong_shifter_setting() {
        let p = pair(1.0, 1.0, 0.0);
        let wrong = CoherentEnsemble::pure(p.with_theta(PI / 2.0));
        let analytic = build_joint_table(&wrong, 1e-9).unwrap();
        let empirical = sample_counts(&p, 1_000_000, 5).unwrap();
        let out = chi_square_compare(&empirical, &analytic).unwrap();
        assert!(out.p_value < 1e-6, "p = {}", out.p_value);
    }

    #[test]
    fn empirical_table_converges_to_the_analytic_kernel() {
        // Pooled z-scores behave like honest sampling noise at 10⁶ shots:
        // across 20 seeds the worst pool stays far below what any
        // systematic error would produce (a bias of even 1% on a
        // 5-expectation pool reaches z ≈ 22 at this shot count), and the
        // rate of > 4σ pools matches the Poisson tail of small pools
        // (about 7e-4) rather than indicating drift. A literal "every pool
        // within 4σ" is not a property honest sampling has: with thousands
        // of pools of expectation ≈ 5, the observed maximum is ~5σ.
        let p = pair(1.0, -4.0, 0.9);
        let ensemble = CoherentEnsemble::pure(p);
        let analytic = build_joint_table(&ensemble, 1e-9).unwrap();
        let shots = 1_000_000u64;
        let mut worst = 0.0f64;
        let mut pools = 0u64;
        let mut over_four = 0u64;
        for seed in 0..20 {
            let empirical = sample_counts(&p, shots, 1000 + seed).unwrap();
            let mut observed: HashMap<(i64, i64), f64> = empirical
                .iter()
                .map(|(&key, &count)| (key, count as f64))
                .collect();
            let mut cells: Vec<(f64, f64)> = analytic
                .iter()
                .map(|(key, prob)| (observed.remove(&key).unwrap_or(0.0), prob * shots as f64))
                .collect();
            cells.extend(observed.into_values().map(|o| (o, 0.0)));
            cells.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
            for (obs, exp) in cells {
                obs_acc += obs;
                exp_acc += exp;
                if exp_acc >= MIN_EXPECTED_PER_CELL {
                    let z = (obs_acc - exp_acc).abs() / exp_acc.sqrt();
                    worst = worst.max(z);
                    pools += 1;
                    if z > 4.0 {
                        over_four += 1;
                    }
                    obs_acc = 0.0;
                    exp_acc = 0.0;
                }
            }
        }
        let rate = over_four as f64 / pools as f64;
        assert!(
            worst <= 6.0,
            "worst pooled z-score {worst} over {pools} pools"
        );
        assert!(
            rate <= 2e-3,
            "{over_four} of {pools} pools exceed 4σ (rate {rate:.2e})"
        );
    }

    #[test]
    fn weak_fringe_and_postselection_cost() {
        // β₁ = β₂ = 0.1 under the discard policy: near-unit fringe
        // amplitude, and ~98% of shots lost to the origin. The analytic
        // θ-averaged origin mass is 0.9802231785.
        let grid = PhaseGrid::new(64).unwrap();
        let phase = empirical_phase_distribution(
            &pair(0.1, 0.1, 0.0),
            DataPolicy::DiscardOrigin,
            100_000,
            12,
            grid,
        )
        .unwrap();
        let fringe = fringe_fit(phase.distribution());
        assert!(
            (fringe.amplitude - 1.0).abs() < 0.05,
            "amplitude {}",
            fringe.amplitude
        );
        // 3σ binomial at 6.4e6 total shots is 1.7e-4.
        assert!(
            (phase.discarded_fraction() - 0.9802231785).abs() < 2.5e-4,
            "discarded {}",
            phase.discarded_fraction()
        );
    }

    #[test]
    fn vacuum_phase_histogram() {
        let grid = PhaseGrid::new(32).unwrap();
        let spread = empirical_phase_distribution(
            &pair(0.0, 0.0, 0.0),
            DataPolicy::UniformSpread,
            1000,
            3,
            grid,
        )
        .unwrap();
        for &d in spread.distribution().density() {
            assert!((d - 1.0 / TAU).abs() < 1e-12);
        }
        assert!((spread.discarded_fraction() - 1.0).abs() < 1e-15);

        let discard = empirical_phase_distribution(
            &pair(0.0, 0.0, 0.0),
            DataPolicy::DiscardOrigin,
            1000,
            3,
            grid,
        );
        assert!(matches!(discard, Err(Error::NoData(_))));
    }

    #[test]
    fn phase_histogram_agrees_with_the_analytic_average() {
        // Full-procedure consistency at β₁ = 1, β₂ = −4, with the
        // postselection diagnostic cross-checked against the θ-averaged
        // origin mass 0.007688151796.
        let grid = PhaseGrid::new(64).unwrap();
        let p = pair(1.0, -4.0, 0.0);
        let phase =
            empirical_phase_distribution(&p, DataPolicy::DiscardOrigin, 20_000, 21, grid).unwrap();
        let analytic = averaged_distribution(
            &CoherentEnsemble::pure(p),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            grid,
        )
        .unwrap();
        let out = chi_square_phase_histogram(&phase, &analytic).unwrap();
        assert!(
            out.p_value > 1e-3,
            "stat {} dof {} p {}",
            out.statistic,
            out.dof,
            out.p_value
        );
        // 3σ binomial at 1.28e6 total shots is 2.3e-4.
        assert!(
            (phase.discarded_fraction() - 0.007688151796).abs() < 2.5e-4,
            "discarded {}",
            phase.discarded_fraction()
        );

        let other_grid = PhaseGrid::new(32).unwrap();
        let mismatched = averaged_distribution(
            &CoherentEnsemble::pure(p),
            DataPolicy::DiscardOrigin,
            NormalizationPolicy::AverageThenNormalize,
            other_grid,
        )
        .unwrap();
        assert!(chi_square_phase_histogram(&phase, &mismatched).is_err());
    }

    #[test]
    fn empty_table_is_rejected() {
        let empty = EmpiricalTable {
            entries: BTreeMap::new(),
            shots: 0,
            seed: 0,
        };
        let analytic =
            build_joint_table(&CoherentEnsemble::pure(pair(0.5, 0.5, 0.0)), 1e-9).unwrap();
        assert!(chi_square_compare(&empty, &analytic).is_err());
    }
}
