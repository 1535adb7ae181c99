//! Photon-count-difference kernels for the four-detector homodyne network.
//!
//! Two input modes with coherent amplitudes β₁ and β₂ (the second carrying an
//! adjustable phase shift θ) are mixed by a balanced eight-port network onto
//! four photodetectors with output amplitudes
//!
//! ```text
//! a3 = (β₁ − β₂ e^{iθ})/2      a5 = (−iβ₁ + β₂ e^{iθ})/2
//! a4 = (β₁ + β₂ e^{iθ})/2      a6 = (−iβ₁ − β₂ e^{iθ})/2
//! ```
//!
//! Each detector fires with independent Poisson statistics of mean |aᵢ|², so
//! the count differences n₄₃ = n₄ − n₃ and n₆₅ = n₆ − n₅ follow Skellam
//! distributions, here called the kernels K₄₃ and K₆₅. Their product is the
//! joint probability W(n₄₃, n₆₅ | θ) for a pure coherent pair; classical
//! mixtures enter as convex combinations over a finite list of components.
//!
//! All kernel evaluation runs in log space through the exponentially scaled
//! Bessel function, so means of order 10⁶ (the |β| ≤ 10³ envelope) neither
//! overflow nor lose the far tails to premature underflow.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::bessel::ln_bessel_i_scaled;
use crate::numerics::special::ln_factorial;

/// A pure two-mode coherent input together with the applied phase shift θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentPair {
    beta1: Complex64,
    beta2: Complex64,
    theta: f64,
}

impl CoherentPair {
    /// Largest amplitude magnitude the count statistics are guaranteed for.
    pub const MAX_AMPLITUDE: f64 = 1e3;

    /// Validates finiteness and the amplitude envelope.
    pub fn new(beta1: Complex64, beta2: Complex64, theta: f64) -> Result<Self> {
        for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
            if !b.re.is_finite() || !b.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite, got {b}"
                )));
            }
            if b.norm() > Self::MAX_AMPLITUDE {
                return Err(Error::InvalidInput(format!(
                    "|{name}| = {} exceeds the supported envelope {}",
                    b.norm(),
                    Self::MAX_AMPLITUDE
                )));
            }
        }
        if !theta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "theta must be finite, got {theta}"
            )));
        }
        Ok(Self {
            beta1,
            beta2,
            theta,
        })
    }

    /// Convenience constructor for a vacuum input.
    pub fn vacuum() -> Self {
        Self {
            beta1: Complex64::ZERO,
            beta2: Complex64::ZERO,
            theta: 0.0,
        }
    }

    pub fn beta1(&self) -> Complex64 {
        self.beta1
    }

    pub fn beta2(&self) -> Complex64 {
        self.beta2
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The same input state with the phase shifter moved to `theta`.
    pub fn with_theta(mut self, theta: f64) -> Self {
        assert!(theta.is_finite(), "theta must be finite");
        self.theta = theta;
        self
    }

    /// Total mean photon number |β₁|² + |β₂|² entering the network.
    pub fn total_energy(&self) -> f64 {
        self.beta1.norm_sqr() + self.beta2.norm_sqr()
    }
}

/// A finite convex mixture of coherent pairs: the classical-state ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentEnsemble {
    components: Vec<(f64, CoherentPair)>,
}

impl CoherentEnsemble {
    /// Validates that weights are nonnegative and sum to 1 within 10⁻¹².
    pub fn new(components: Vec<(f64, CoherentPair)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput(
                "ensemble needs at least one component".into(),
            ));
        }
        let mut total = 0.0;
        for (w, _) in &components {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight {w} must be finite and >= 0"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { components })
    }

    /// A single pure component with weight 1.
    pub fn pure(pair: CoherentPair) -> Self {
        Self {
            components: vec![(1.0, pair)],
        }
    }

    pub fn components(&self) -> &[(f64, CoherentPair)] {
        &self.components
    }

    /// The same mixture with every component's phase shifter at `theta`.
    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|&(w, p)| (w, p.with_theta(theta)))
                .collect(),
        }
    }

    /// Largest per-component mean photon number, sizing count-table bounds.
    pub fn max_energy(&self) -> f64 {
        self.components
            .iter()
            .map(|(_, p)| p.total_energy())
            .fold(0.0, f64::max)
    }
}

/// The four detector-mode amplitudes produced by the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputAmplitudes {
    pub a3: Complex64,
    pub a4: Complex64,
    pub a5: Complex64,
    pub a6: Complex64,
}

impl OutputAmplitudes {
    /// Total detected mean photon number; equals the input energy exactly.
    pub fn total_energy(&self) -> f64 {
        self.a3.norm_sqr() + self.a4.norm_sqr() + self.a5.norm_sqr() + self.a6.norm_sqr()
    }
}

/// Splits a coherent pair across the network into the four detector modes.
pub fn output_amplitudes(pair: &CoherentPair) -> OutputAmplitudes {
    let b1 = pair.beta1;
    let b2t = pair.beta2 * Complex64::from_polar(1.0, pair.theta);
    let half = Complex64::new(0.5, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    OutputAmplitudes {
        a3: half * (b1 - b2t),
        a4: half * (b1 + b2t),
        a5: half * (minus_i * b1 + b2t),
        a6: half * (minus_i * b1 - b2t),
    }
}

/// Mean-count threshold below which a detector mode counts as dark.
///
/// The count statistics degenerate when one of the interfering combinations
/// β₁ ∓ β₂e^{iθ} vanishes; testing |amplitude| < 10⁻¹²/2, i.e. mean < 2.5e-25,
/// detects exactly that condition on the unhalved combination.
const DEGENERATE_MEAN: f64 = 2.5e-25;

/// ln of the Poisson pmf with mean `mu` at count `n`.
fn ln_poisson_pmf(mu: f64, n: u64) -> f64 {
    if n == 0 {
        -mu
    } else {
        -mu + n as f64 * mu.ln() - ln_factorial(n)
    }
}

/// Pmf of the difference (plus-count − minus-count) of two independent
/// Poisson variables, the Skellam distribution, evaluated in log space:
///
/// ```text
/// P(k) = e^{−(μ₋+μ₊)} (μ₊/μ₋)^{k/2} I_{|k|}(2√(μ₋μ₊))
/// ```
///
/// with one-sided Poisson limits when either mean vanishes.
fn skellam_pmf(mu_minus: f64, mu_plus: f64, k: i64) -> f64 {
    let minus_dark = mu_minus < DEGENERATE_MEAN;
    let plus_dark = mu_plus < DEGENERATE_MEAN;
    match (minus_dark, plus_dark) {
        (true, true) => {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        }
        (true, false) => {
            if k >= 0 {
                ln_poisson_pmf(mu_plus, k as u64).exp()
            } else {
                0.0
            }
        }
        (false, true) => {
            if k <= 0 {
                ln_poisson_pmf(mu_minus, (-k) as u64).exp()
            } else {
                0.0
            }
        }
        (false, false) => {
            let z = 2.0 * (mu_minus * mu_plus).sqrt();
            let order =
                u32::try_from(k.unsigned_abs()).expect("count difference within table range");
            let ln_p = -(mu_minus + mu_plus)
                + 0.5 * k as f64 * (mu_plus.ln() - mu_minus.ln())
                + z
                + ln_bessel_i_scaled(order, z);
            ln_p.exp()
        }
    }
}

/// Kernel K₄₃: the pmf of the count difference n₄ − n₃.
pub fn kernel_k43(pair: &CoherentPair, n43: i64) -> f64 {
    let amps = output_amplitudes(pair);
    skellam_pmf(amps.a3.norm_sqr(), amps.a4.norm_sqr(), n43)
}

/// Kernel K₆₅: the pmf of the count difference n₆ − n₅.
pub fn kernel_k65(pair: &CoherentPair, n65: i64) -> f64 {
    let amps = output_amplitudes(pair);
    skellam_pmf(amps.a5.norm_sqr(), amps.a6.norm_sqr(), n65)
}

/// Joint probability W(n₄₃, n₆₅ | θ) for a pure coherent pair.
///
/// The two difference channels draw on disjoint detectors, so the joint law
/// is the product of the kernels.
pub fn joint_count_probability(pair: &CoherentPair, n43: i64, n65: i64) -> f64 {
    let amps = output_amplitudes(pair);
    skellam_pmf(amps.a3.norm_sqr(), amps.a4.norm_sqr(), n43)
        * skellam_pmf(amps.a5.norm_sqr(), amps.a6.norm_sqr(), n65)
}

/// Joint probability for a classical mixture: the weighted component sum.
pub fn ensemble_joint_probability(ensemble: &CoherentEnsemble, n43: i64, n65: i64) -> f64 {
    ensemble
        .components()
        .iter()
        .map(|(w, pair)| w * joint_count_probability(pair, n43, n65))
        .sum()
}

/// Dense table of W(n₄₃, n₆₅ | θ) over the square |n₄₃|, |n₆₅| ≤ n_max,
/// with a certified bound on the probability mass left outside.
#[derive(Debug, Clone)]
pub struct JointCountTable {
    theta: f64,
    n_max: i64,
    dim: usize,
    probabilities: Vec<f64>,
    tail_bound: f64,
}

impl JointCountTable {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    /// Certified upper bound on the probability mass outside the table.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Stored probability at (n₄₃, n₆₅); zero outside the table square.
    pub fn probability(&self, n43: i64, n65: i64) -> f64 {
        if n43.abs() > self.n_max || n65.abs() > self.n_max {
            return 0.0;
        }
        let i = (n43 + self.n_max) as usize;
        let j = (n65 + self.n_max) as usize;
        self.probabilities[i * self.dim + j]
    }

    /// All entries in row-major order as ((n₄₃, n₆₅), probability).
    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), f64)> + '_ {
        let n_max = self.n_max;
        let dim = self.dim;
        self.probabilities.iter().enumerate().map(move |(idx, &p)| {
            let n43 = (idx / dim) as i64 - n_max;
            let n65 = (idx % dim) as i64 - n_max;
            ((n43, n65), p)
        })
    }

    /// Total stored probability mass (two-level summation keeps the
    /// accumulation error well below the certified tail).
    pub fn total_mass(&self) -> f64 {
        self.probabilities
            .chunks(self.dim)
            .map(|row| row.iter().sum::<f64>())
            .sum()
    }
}

/// Largest supported table half-width; (2·2048+1)² entries ≈ 134 MB.
const MAX_TABLE_HALF_WIDTH: i64 = 2048;

/// Builds the joint count table for a mixture at its components' θ.
///
/// The half-width follows a Poisson-tail rule on the largest component mean
/// μ: n_max = ⌈μ + 10√μ + 10⌉, which leaves omitted mass far below 10⁻¹⁰
/// everywhere in the amplitude envelope the table size permits. The realized
/// tail is certified from the stored entries and checked against
/// `tail_tolerance`.
pub fn build_joint_table(
    ensemble: &CoherentEnsemble,
    tail_tolerance: f64,
) -> Result<JointCountTable> {
    if !(tail_tolerance > 0.0 && tail_tolerance <= 1e-3) {
        return Err(Error::InvalidInput(format!(
            "tail tolerance {tail_tolerance} outside (0, 1e-3]"
        )));
    }
    let theta = ensemble.components()[0].1.theta();
    if ensemble
        .components()
        .iter()
        .any(|(_, p)| p.theta() != theta)
    {
        return Err(Error::InvalidInput(
            "all ensemble components must share the same phase-shifter setting".into(),
        ));
    }

    let mu = ensemble.max_energy();
    let n_max = (mu + 10.0 * mu.sqrt() + 10.0).ceil() as i64;
    if n_max > MAX_TABLE_HALF_WIDTH {
        return Err(Error::InvalidInput(format!(
            "count table half-width {n_max} exceeds the supported maximum \
             {MAX_TABLE_HALF_WIDTH} (mean photon number {mu:.1} is too large \
             for dense tabulation)"
        )));
    }
    let dim = (2 * n_max + 1) as usize;

    // The joint law is separable per component, so precompute each
    // component's two kernel vectors and accumulate outer products.
    let kernels: Vec<(f64, Vec<f64>, Vec<f64>)> = ensemble
        .components()
        .iter()
        .map(|&(w, ref pair)| {
            let k43 = (-n_max..=n_max).map(|k| kernel_k43(pair, k)).collect();
            let k65 = (-n_max..=n_max).map(|k| kernel_k65(pair, k)).collect();
            (w, k43, k65)
        })
        .collect();

    let mut probabilities = vec![0.0f64; dim * dim];
    probabilities
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(i, row)| {
            for (w, k43, k65) in &kernels {
                let scale = w * k43[i];
                if scale > 0.0 {
                    for (slot, k) in row.iter_mut().zip(k65) {
                        *slot += scale * k;
                    }
                }
            }
        });

    let mut table = JointCountTable {
        theta,
        n_max,
        dim,
        probabilities,
        tail_bound: 0.0,
    };
    let mass = table.total_mass();
    if mass > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "count table mass {mass} exceeds 1; kernel evaluation is inconsistent"
        )));
    }
    table.tail_bound = (1.0 - mass).max(0.0);
    if table.tail_bound >= tail_tolerance {
        return Err(Error::TailTooLarge {
            tail: table.tail_bound,
            tolerance: tail_tolerance,
        });
    }
    Ok(table)
}
