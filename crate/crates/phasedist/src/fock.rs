//! Truncated two-mode photon-number engine for nonclassical inputs.
//!
//! Arbitrary pure states on the two input modes, expressed in the Fock basis
//! up to a cutoff, propagate exactly through the four-port network: each
//! creation operator maps to a linear combination of output-mode creation
//! operators, and expanding the product state in the output number basis
//! yields the detector statistics p(n₃, n₄, n₅, n₆ | θ) without any
//! stochastic element.
//!
//! On top of that sit the count-difference law W(n₄₃, n₆₅ | θ) — plugged
//! into the same θ-averaging machinery the coherent ensembles use — the
//! vacuum-depletion transform (zeroing the vacuum coefficient provably
//! leaves the origin-discarding phase distribution untouched), rotation
//! overlaps measuring phase-shift distinguishability, and the London
//! relative-phase distribution for cross-checking against the
//! count-statistics route.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::direct::{averaged_for_model, CountModel, DataPolicy, NormalizationPolicy};
use crate::error::{Error, Result};
use crate::numerics::{PhaseDistribution, PhaseGrid, TAU};

/// Largest cutoff the propagation accepts.
const MAX_CUTOFF: usize = 8;

/// Largest cutoff for the θ-averaged phase distribution.
const MAX_PHASE_CUTOFF: usize = 6;

/// A pure state of the two input modes, truncated at `cutoff` photons per
/// mode and normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFockState {
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl TwoModeFockState {
    /// Wraps a full coefficient tensor (row-major over (n, m) with
    /// 0 ≤ n, m ≤ cutoff), checking unit norm to 10⁻¹².
    pub fn new(cutoff: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let dim = cutoff + 1;
        if coeffs.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for cutoff {cutoff}, got {}",
                dim * dim,
                coeffs.len()
            )));
        }
        let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "state norm^2 = {norm_sqr}, expected 1 within 1e-12"
            )));
        }
        Ok(Self { cutoff, coeffs })
    }

    /// Builds a state from sparse (n, m, amplitude) entries, normalizing.
    pub fn from_components(
        cutoff: usize,
        components: &[(usize, usize, Complex64)],
    ) -> Result<Self> {
        let dim = cutoff + 1;
        let mut coeffs = vec![Complex64::ZERO; dim * dim];
        for &(n, m, amp) in components {
            if n > cutoff || m > cutoff {
                return Err(Error::InvalidInput(format!(
                    "component ({n}, {m}) exceeds cutoff {cutoff}"
                )));
            }
            coeffs[n * dim + m] += amp;
        }
        let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sqr > 0.0 && norm_sqr.is_finite()) {
            return Err(Error::InvalidInput(
                "state components must carry nonzero total weight".into(),
            ));
        }
        let scale = norm_sqr.sqrt().recip();
        for c in &mut coeffs {
            *c *= scale;
        }
        Ok(Self { cutoff, coeffs })
    }

    /// The Fock basis state |n, m⟩.
    pub fn basis_state(cutoff: usize, n: usize, m: usize) -> Result<Self> {
        Self::from_components(cutoff, &[(n, m, Complex64::ONE)])
    }

    /// Product of two coherent states truncated at the cutoff and
    /// renormalized; the discarded mass is below 10⁻⁶ for |β| ≤ 0.2 at
    /// cutoff 4 and shrinks factorially with the cutoff.
    pub fn coherent_product(beta1: Complex64, beta2: Complex64, cutoff: usize) -> Result<Self> {
        let dim = cutoff + 1;
        let mode = |beta: Complex64| -> Vec<Complex64> {
            let mut amps = Vec::with_capacity(dim);
            let mut current = Complex64::ONE;
            amps.push(current);
            for n in 1..dim {
                current *= beta / (n as f64).sqrt();
                amps.push(current);
            }
            amps
        };
        let m1 = mode(beta1);
        let m2 = mode(beta2);
        let mut coeffs = vec![Complex64::ZERO; dim * dim];
        for n in 0..dim {
            for m in 0..dim {
                coeffs[n * dim + m] = m1[n] * m2[m];
            }
        }
        let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let scale = norm_sqr.sqrt().recip();
        for c in &mut coeffs {
            *c *= scale;
        }
        Ok(Self { cutoff, coeffs })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Coefficient ⟨n, m|ψ⟩; zero outside the cutoff square.
    pub fn coeff(&self, n: usize, m: usize) -> Complex64 {
        if n > self.cutoff || m > self.cutoff {
            Complex64::ZERO
        } else {
            self.coeffs[n * (self.cutoff + 1) + m]
        }
    }

    /// The vacuum coefficient c₀ = ⟨0, 0|ψ⟩.
    pub fn vacuum_amplitude(&self) -> Complex64 {
        self.coeffs[0]
    }
}

/// Zeroes the vacuum component and renormalizes.
///
/// The detector statistics of the depleted state are, on every outcome with
/// at least one count, exactly those of the original divided by the depleted
/// norm — which is why discarding the (0,0) shots makes the two states'
/// phase distributions identical.
pub fn vacuum_deplete(state: &TwoModeFockState) -> Result<TwoModeFockState> {
    let mut coeffs = state.coeffs.clone();
    coeffs[0] = Complex64::ZERO;
    let rest: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if rest <= 1e-12 {
        return Err(Error::InvalidInput(
            "cannot vacuum-deplete a (numerically) pure vacuum state".into(),
        ));
    }
    let scale = rest.sqrt().recip();
    for c in &mut coeffs {
        *c *= scale;
    }
    Ok(TwoModeFockState {
        cutoff: state.cutoff,
        coeffs,
    })
}

/// The 4×4 mode map of the network at a given shifter setting, with input
/// order (mode 1, vacuum port 1′, mode 2, vacuum port 2′) and output order
/// (detector 3, 4, 5, 6).
#[derive(Debug, Clone)]
pub struct NetworkUnitary {
    matrix: [[Complex64; 4]; 4],
    theta: f64,
}

impl NetworkUnitary {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row][col]
    }

    /// Column `col` as the output-mode image of that input's creation
    /// operator.
    pub fn column(&self, col: usize) -> [Complex64; 4] {
        [
            self.matrix[0][col],
            self.matrix[1][col],
            self.matrix[2][col],
            self.matrix[3][col],
        ]
    }

    /// max |(M M† − I)_{jk}|, for unitarity checks.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..4 {
            for k in 0..4 {
                let mut dot = Complex64::ZERO;
                for l in 0..4 {
                    dot += self.matrix[j][l] * self.matrix[k][l].conj();
                }
                let want = if j == k {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                worst = worst.max((dot - want).norm());
            }
        }
        worst
    }
}

/// Builds the network unitary at shifter setting θ.
///
/// Columns 0 and 2 (the physical inputs) are fixed by the coherent-state
/// amplitudes of the network; the two vacuum-port columns are a Gram–Schmidt
/// completion. No photons ever enter the vacuum ports, so the detector
/// statistics are independent of the completion choice; the default seeds
/// are the unit vectors on those ports.
pub fn build_network_unitary(theta: f64) -> NetworkUnitary {
    completed_network(
        theta,
        [
            [
                Complex64::ZERO,
                Complex64::ONE,
                Complex64::ZERO,
                Complex64::ZERO,
            ],
            [
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::ONE,
            ],
        ],
    )
    .expect("default completion seeds are independent of the fixed columns")
}

/// Completes the two fixed physical columns with a Gram–Schmidt
/// orthonormalization of the given seed vectors into columns 1 and 3.
fn completed_network(theta: f64, seeds: [[Complex64; 4]; 2]) -> Result<NetworkUnitary> {
    assert!(theta.is_finite(), "theta must be finite");
    let half = Complex64::new(0.5, 0.0);
    let minus_i_half = Complex64::new(0.0, -0.5);
    let phase = Complex64::from_polar(0.5, theta);
    // Physical columns: coherent input (β₁, ·, β₂, ·) must come out as
    // ((β₁ − β₂e^{iθ})/2, (β₁ + β₂e^{iθ})/2, (−iβ₁ + β₂e^{iθ})/2, (−iβ₁ − β₂e^{iθ})/2).
    let col0 = [half, half, minus_i_half, minus_i_half];
    let col2 = [-phase, phase, phase, -phase];

    let mut columns = [col0, [Complex64::ZERO; 4], col2, [Complex64::ZERO; 4]];
    let mut fixed: Vec<[Complex64; 4]> = vec![col0, col2];
    for (slot, seed) in [1usize, 3].into_iter().zip(seeds) {
        let mut v = seed;
        for basis in &fixed {
            let overlap: Complex64 = basis.iter().zip(&v).map(|(b, x)| b.conj() * x).sum();
            for (x, b) in v.iter_mut().zip(basis) {
                *x -= overlap * b;
            }
        }
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return Err(Error::InvalidInput(
                "completion seed is (nearly) spanned by the physical columns".into(),
            ));
        }
        for x in &mut v {
            *x /= norm;
        }
        columns[slot] = v;
        fixed.push(v);
    }

    let mut matrix = [[Complex64::ZERO; 4]; 4];
    for (c, col) in columns.iter().enumerate() {
        for (r, &val) in col.iter().enumerate() {
            matrix[r][c] = val;
        }
    }
    Ok(NetworkUnitary { matrix, theta })
}

/// Exact detector statistics p(n₃, n₄, n₅, n₆ | θ) of a truncated state.
#[derive(Debug, Clone)]
pub struct DetectorProbabilities {
    theta: f64,
    table: BTreeMap<[usize; 4], f64>,
}

impl DetectorProbabilities {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn probability(&self, outcome: [usize; 4]) -> f64 {
        self.table.get(&outcome).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize; 4], &f64)> {
        self.table.iter()
    }

    pub fn total_mass(&self) -> f64 {
        self.table.values().sum()
    }
}

/// Applies a creation operator Σₖ column[k] bₖ† to an amplitude map over
/// output occupation numbers.
fn apply_creation(
    amplitudes: &HashMap<[usize; 4], Complex64>,
    column: &[Complex64; 4],
) -> HashMap<[usize; 4], Complex64> {
    let mut out = HashMap::with_capacity(amplitudes.len() * 2);
    for (occ, amp) in amplitudes {
        for k in 0..4 {
            if column[k] == Complex64::ZERO {
                continue;
            }
            let mut next = *occ;
            next[k] += 1;
            // b† |n⟩ = √(n+1) |n+1⟩.
            let entry = out.entry(next).or_insert(Complex64::ZERO);
            *entry += amp * column[k] * (next[k] as f64).sqrt();
        }
    }
    out
}

/// Propagates a truncated state through the network and reads the
/// detectors.
///
/// Each input component |n, m⟩ = (a₁†)ⁿ(a₂†)ᵐ/√(n! m!) |0⟩ becomes the
/// corresponding product of mapped creation operators acting on the output
/// vacuum; amplitudes from different components interfere before squaring.
pub fn detector_probabilities(
    state: &TwoModeFockState,
    theta: f64,
) -> Result<DetectorProbabilities> {
    if state.cutoff() > MAX_CUTOFF {
        return Err(Error::InvalidInput(format!(
            "cutoff {} exceeds the supported maximum {MAX_CUTOFF}",
            state.cutoff()
        )));
    }
    let network = build_network_unitary(theta);
    detector_probabilities_via(state, &network)
}

/// Propagation against an explicit network, used to verify that the
/// vacuum-port completion cannot influence the statistics.
fn detector_probabilities_via(
    state: &TwoModeFockState,
    network: &NetworkUnitary,
) -> Result<DetectorProbabilities> {
    let col1 = network.column(0);
    let col2 = network.column(2);
    let dim = state.cutoff() + 1;

    let mut factorial = vec![1.0f64; dim];
    for n in 1..dim {
        factorial[n] = factorial[n - 1] * n as f64;
    }

    let mut total = HashMap::new();
    // mode1_raised holds (mapped a₁†)ⁿ |0⟩, advanced once per outer loop.
    let mut mode1_raised = HashMap::from([([0usize; 4], Complex64::ONE)]);
    for n in 0..dim {
        if (0..dim).any(|m| state.coeff(n, m) != Complex64::ZERO) {
            let mut both_raised = mode1_raised.clone();
            for m in 0..dim {
                let c = state.coeff(n, m);
                if c != Complex64::ZERO {
                    let scale = c / (factorial[n] * factorial[m]).sqrt();
                    for (occ, amp) in &both_raised {
                        let entry = total.entry(*occ).or_insert(Complex64::ZERO);
                        *entry += scale * amp;
                    }
                }
                if m + 1 < dim {
                    both_raised = apply_creation(&both_raised, &col2);
                }
            }
        }
        if n + 1 < dim {
            mode1_raised = apply_creation(&mode1_raised, &col1);
        }
    }

    let table: BTreeMap<[usize; 4], f64> = total
        .into_iter()
        .map(|(occ, amp)| (occ, amp.norm_sqr()))
        .filter(|&(_, p)| p > 0.0)
        .collect();
    Ok(DetectorProbabilities {
        theta: network.theta(),
        table,
    })
}

/// Count-difference statistics of a truncated state at any θ, exact in θ.
///
/// p(·|θ) is a trigonometric polynomial in θ of degree at most 2·cutoff, so
/// sampling W(n₄₃, n₆₅ | θ) at 4(cutoff+1) uniform nodes determines its
/// Fourier coefficients exactly; evaluation anywhere is then a short
/// Fourier sum.
#[derive(Debug, Clone)]
pub struct FockCountModel {
    half_width: i64,
    dim: usize,
    // Per lattice point, coefficients ŵ_k for k = 0..=2·cutoff of
    // W(θ) = ŵ₀ + 2 Σ_k Re(ŵ_k e^{ikθ}).
    coefficients: Vec<Vec<Complex64>>,
}

impl FockCountModel {
    pub fn new(state: &TwoModeFockState) -> Result<Self> {
        if state.cutoff() > MAX_PHASE_CUTOFF {
            return Err(Error::InvalidInput(format!(
                "phase distribution supports cutoff <= {MAX_PHASE_CUTOFF}, got {}",
                state.cutoff()
            )));
        }
        let degree = 2 * state.cutoff();
        let nodes = 4 * (state.cutoff() + 1);
        let half_width = degree as i64; // counts can differ by at most the total photon number
        let dim = 2 * degree + 1;

        let tables: Vec<DetectorProbabilities> = (0..nodes)
            .into_par_iter()
            .map(|j| detector_probabilities(state, TAU * j as f64 / nodes as f64))
            .collect::<Result<Vec<_>>>()?;

        // W at each node, dense over the lattice square.
        let mut node_values = vec![vec![0.0f64; dim * dim]; nodes];
        for (values, probs) in node_values.iter_mut().zip(&tables) {
            for (&[n3, n4, n5, n6], &p) in probs.iter() {
                let i = (n4 as i64 - n3 as i64 + half_width) as usize;
                let j = (n6 as i64 - n5 as i64 + half_width) as usize;
                values[i * dim + j] += p;
            }
        }

        let coefficients = (0..dim * dim)
            .map(|idx| {
                (0..=degree)
                    .map(|k| {
                        let mut acc = Complex64::ZERO;
                        for (j, values) in node_values.iter().enumerate() {
                            let angle = -TAU * (k * j) as f64 / nodes as f64;
                            acc += values[idx] * Complex64::from_polar(1.0, angle);
                        }
                        acc / nodes as f64
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            half_width,
            dim,
            coefficients,
        })
    }
}

impl CountModel for FockCountModel {
    fn joint(&self, n43: i64, n65: i64, theta: f64) -> f64 {
        if n43.abs() > self.half_width || n65.abs() > self.half_width {
            return 0.0;
        }
        let i = (n43 + self.half_width) as usize;
        let j = (n65 + self.half_width) as usize;
        let coeffs = &self.coefficients[i * self.dim + j];
        let rotor = Complex64::from_polar(1.0, theta);
        let mut power = Complex64::ONE;
        let mut value = coeffs[0].re;
        for c in &coeffs[1..] {
            power *= rotor;
            value += 2.0 * (c * power).re;
        }
        // Trigonometric interpolation of nonnegative node data can dip
        // microscopically below zero between nodes.
        value.max(0.0)
    }

    fn support_half_width(&self) -> i64 {
        self.half_width
    }
}

/// θ-averaged phase distribution of a truncated state in the direct scheme.
pub fn tm_phase_distribution(
    state: &TwoModeFockState,
    policy: DataPolicy,
    norm: NormalizationPolicy,
    grid: PhaseGrid,
) -> Result<PhaseDistribution> {
    let model = FockCountModel::new(state)?;
    averaged_for_model(&model, policy, norm, grid)
}

/// Overlap |⟨ψ| e^{iφ₀(n̂₁ − n̂₂)/2} |ψ⟩|: how distinguishable the state is
/// from its copy with the two modes counter-rotated by φ₀.
pub fn rotation_overlap(state: &TwoModeFockState, phi0: f64) -> f64 {
    assert!(phi0.is_finite(), "phi0 must be finite");
    let dim = state.cutoff() + 1;
    let mut acc = Complex64::ZERO;
    for n in 0..dim {
        for m in 0..dim {
            let w = state.coeff(n, m).norm_sqr();
            if w > 0.0 {
                acc += w * Complex64::from_polar(1.0, phi0 * (n as f64 - m as f64) / 2.0);
            }
        }
    }
    acc.norm()
}

/// London relative-phase distribution of a truncated state.
///
/// The joint London density (1/2π)² |Σ c_{n,m} e^{−inφ₁ − imφ₂}|²
/// marginalized to the mode-2-minus-mode-1 phase difference, the same
/// direction every other scheme here reports:
///
/// ```text
/// 𝒫_L(φ) = (1/2π) Σ_d g_d e^{−idφ},   g_d = Σ_{n,m} c_{n,m} c̄_{n+d, m−d}
/// ```
pub fn london_relative_phase(state: &TwoModeFockState, grid: PhaseGrid) -> PhaseDistribution {
    let cutoff = state.cutoff() as i64;
    // g_0 = 1; only d = 1..=cutoff needed since g_{-d} = conj(g_d).
    let harmonics: Vec<Complex64> = (1..=cutoff)
        .map(|d| {
            let mut g = Complex64::ZERO;
            for n in 0..=cutoff {
                for m in 0..=cutoff {
                    let (np, mp) = (n + d, m - d);
                    if np <= cutoff && mp >= 0 {
                        g += state.coeff(n as usize, m as usize)
                            * state.coeff(np as usize, mp as usize).conj();
                    }
                }
            }
            g
        })
        .collect();
    let values: Vec<f64> = grid
        .phis()
        .map(|phi| {
            let mut v = 1.0;
            for (d, g) in harmonics.iter().enumerate() {
                let rotor = Complex64::from_polar(1.0, -((d + 1) as f64) * phi);
                v += 2.0 * (g * rotor).re;
            }
            v / TAU
        })
        .collect();
    PhaseDistribution::from_unnormalized(grid, values)
        .expect("unit-mass harmonic series cannot lose all mass")
}
