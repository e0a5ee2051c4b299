//! Quasiprobability sampling of denoisers.
//!
//! Each denoiser gate is replaced per shot by its noisy unitary branch with
//! probability `|eta0| / gamma_g` or its noisy measurement branch with
//! probability `|eta1| / gamma_g`. The shot value is rescaled by
//! `gamma * sign`, which makes the estimator unbiased for the full denoiser.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{correlated_measurement, gamma_of, measurement_branch, unitary_branch, zz_dressed_unitary, NoiseModel};
use crate::circuits::{build_trotter, half_layer_bonds, DenoiserSpec, Gate, GateList, TrotterSpec};
use crate::error::{Error, Result};
use crate::kernel::LocalKernel;
use crate::observables::LinearFunctional;
use crate::pauli::{pauli_matrix, unitary_superop, DenseSuperoperator, VectorizedOperator};

/// Branch configurations are memoized when a denoiser has at most this many gates.
const MEMO_MAX_GATES: usize = 20;

/// Sample budget `ceil(2 gamma^2 / delta^2 * ln(2 / omega))` for error `delta`
/// at confidence `1 - omega`, for observables bounded by one in magnitude.
pub fn hoeffding_samples(gamma: f64, delta: f64, omega: f64) -> Result<u64> {
    if !(delta > 0.0) || !(omega > 0.0 && omega < 1.0) || !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Hoeffding budget needs delta > 0, 0 < omega < 1, finite gamma >= 0; got ({gamma}, {delta}, {omega})"
        )));
    }
    let x = 2.0 * gamma * gamma / (delta * delta) * (2.0 / omega).ln();
    // an exactly integral bound must not be pushed up by rounding
    Ok((x * (1.0 - 4.0 * f64::EPSILON)).ceil() as u64)
}

/// Branch weights of one denoiser gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateWeights {
    pub layer: usize,
    pub sites: [usize; 2],
    /// Probabilities of the unitary (0) and measurement (1) branches.
    pub probs: [f64; 2],
    pub signs: [f64; 2],
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    pub gates: Vec<GateWeights>,
    pub gamma: f64,
}

impl QuasiDistribution {
    pub fn from_spec(spec: &DenoiserSpec) -> Result<Self> {
        spec.validate()?;
        let mut gates = Vec::new();
        for (layer, params) in spec.layers.iter().enumerate() {
            let g = gamma_of(params);
            let eta = [params.eta0(), params.eta1];
            for sites in half_layer_bonds(spec.n, layer % 2) {
                gates.push(GateWeights {
                    layer,
                    sites,
                    probs: eta.map(|e| e.abs() / g),
                    signs: eta.map(|e| if e < 0.0 { -1.0 } else { 1.0 }),
                    gamma: g,
                });
            }
        }
        let gamma = gates.iter().map(|w| w.gamma).product();
        Ok(Self { gates, gamma })
    }

    /// `gamma * sign * probability` of one branch configuration.
    pub fn weight(&self, branches: &[u8]) -> f64 {
        self.gates
            .iter()
            .zip(branches)
            .map(|(w, &b)| w.gamma * w.signs[b as usize] * w.probs[b as usize])
            .product()
    }

    /// Independent per-gate branch draws and the accumulated sign.
    pub fn sample(&self, rng: &mut impl Rng) -> (Vec<u8>, f64) {
        let mut sign = 1.0;
        let branches = self
            .gates
            .iter()
            .map(|w| {
                let b = u8::from(rng.gen::<f64>() >= w.probs[0]);
                sign *= w.signs[b as usize];
                b
            })
            .collect();
        (branches, sign)
    }
}

/// Per-shot RNG stream derived from `(seed, shot)`.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Branch choices and sign for one shot of `spec`.
pub fn sample_denoiser(spec: &DenoiserSpec, seed: u64, shot: u64) -> Result<(Vec<u8>, f64)> {
    Ok(QuasiDistribution::from_spec(spec)?.sample(&mut shot_rng(seed, shot)))
}

/// The deterministic circuit realized by one branch configuration.
pub fn branch_circuit(spec: &DenoiserSpec, branches: &[u8]) -> Result<GateList> {
    let dist = QuasiDistribution::from_spec(spec)?;
    if branches.len() != dist.gates.len() {
        return Err(Error::Shape(format!("{} branch choices for {} gates", branches.len(), dist.gates.len())));
    }
    let locals: Vec<[DenseSuperoperator; 2]> =
        spec.layers.iter().map(|p| [unitary_branch(p, spec.noise), measurement_branch(p, spec.noise)]).collect();
    let gates = dist
        .gates
        .iter()
        .zip(branches)
        .map(|(w, &b)| Gate::new(locals[w.layer][b as usize].clone(), w.sites))
        .collect::<Result<Vec<_>>>()?;
    GateList::from_gates(spec.n, gates)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: u64,
    pub branches: Vec<u8>,
    pub sign: f64,
    /// `gamma * sign * <O>` for this realization.
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub mean: f64,
    pub standard_error: f64,
    pub n_shots: u64,
    pub gamma: f64,
    /// Hoeffding budget for the configured `(delta, omega)`.
    pub hoeffding_bound: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerOptions {
    pub delta: f64,
    pub omega: f64,
    /// Requests above this many shots are refused.
    pub max_shots: Option<u64>,
    /// Also sample every depolarizing channel as a random Pauli pair.
    pub pauli_unraveling: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { delta: 0.05, omega: 0.1, max_shots: None, pauli_unraveling: false }
    }
}

/// Receives every shot as it is produced.
pub type Telemetry<'a> = &'a mut dyn FnMut(&ShotRecord) -> Result<()>;

struct Accumulator {
    sum: f64,
    sum_sq: f64,
    n: u64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.n += 1;
    }

    fn finish(&self, gamma: f64, hoeffding_bound: u64) -> EstimatorResult {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 { ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        EstimatorResult { mean, standard_error: (var / n).sqrt(), n_shots: self.n, gamma, hoeffding_bound }
    }
}

fn check_budget(n_shots: u64, options: &SamplerOptions) -> Result<()> {
    if n_shots == 0 {
        return Err(Error::EmptyBudget);
    }
    if let Some(limit) = options.max_shots {
        if n_shots > limit {
            return Err(Error::BudgetExceeded { requested: n_shots, limit });
        }
    }
    Ok(())
}

/// Pauli pairs `P_a (x) P_b` as local superoperators, identity first.
fn pauli_pair_kernels() -> Vec<LocalKernel> {
    let paulis: Vec<_> = (0..4).map(|a| pauli_matrix(a).expect("pauli")).collect();
    let mut out = Vec::with_capacity(16);
    for a in &paulis {
        for b in &paulis {
            out.push(unitary_superop(&a.kron(b)).to_kernel());
        }
    }
    out
}

/// Samples a Pauli pair index for depolarizing strength `p`; `None` is the identity.
fn sample_pauli(p: f64, rng: &mut impl Rng) -> Option<usize> {
    if p == 0.0 || rng.gen::<f64>() >= p {
        None
    } else {
        Some(1 + rng.gen_range(0..15))
    }
}

/// Mitigated estimate of `observable` after `trotter` (deterministic channels)
/// followed by shot-sampled realizations of `denoiser`, starting from `initial`.
pub fn run_shots(
    trotter: &GateList,
    denoiser: &DenoiserSpec,
    observable: &LinearFunctional,
    initial: &VectorizedOperator,
    n_shots: u64,
    seed: u64,
    options: &SamplerOptions,
    mut telemetry: Option<Telemetry<'_>>,
) -> Result<EstimatorResult> {
    check_budget(n_shots, options)?;
    if denoiser.n != trotter.n_qubits() || observable.n_qubits() != denoiser.n.get() {
        return Err(Error::Shape("denoiser, circuit and observable sizes differ".into()));
    }
    let dist = QuasiDistribution::from_spec(denoiser)?;
    let bound = hoeffding_samples(dist.gamma, options.delta, options.omega)?;
    let start = trotter.apply(initial)?;
    let kernels: Vec<[LocalKernel; 2]> = denoiser
        .layers
        .iter()
        .map(|p| [unitary_branch(p, denoiser.noise).to_kernel(), measurement_branch(p, denoiser.noise).to_kernel()])
        .collect();
    let memoize = dist.gates.len() <= MEMO_MAX_GATES;
    let mut memo: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut acc = Accumulator { sum: 0.0, sum_sq: 0.0, n: 0 };

    for shot in 0..n_shots {
        let (branches, sign) = dist.sample(&mut shot_rng(seed, shot));
        let evaluate = |branches: &[u8]| {
            let mut v = start.clone();
            for (w, &b) in dist.gates.iter().zip(branches) {
                v.apply_local(&kernels[w.layer][b as usize], &w.sites);
            }
            observable.eval(&v).re
        };
        let raw = if memoize {
            *memo.entry(branches.clone()).or_insert_with(|| evaluate(&branches))
        } else {
            evaluate(&branches)
        };
        let value = dist.gamma * sign * raw;
        if !value.is_finite() {
            return Err(Error::NonFinite { iteration: shot as usize });
        }
        acc.push(value);
        if let Some(sink) = telemetry.as_mut() {
            sink(&ShotRecord { shot, branches, sign, value })?;
        }
    }
    Ok(acc.finish(dist.gamma, bound))
}

/// Like [`run_shots`], but every depolarizing channel (Trotter and denoiser)
/// is also unraveled into a randomly drawn Pauli pair, so each shot is a
/// product of unitaries and measurement channels.
pub fn run_shots_unraveled(
    trotter: &TrotterSpec,
    denoiser: &DenoiserSpec,
    observable: &LinearFunctional,
    initial: &VectorizedOperator,
    n_shots: u64,
    seed: u64,
    options: &SamplerOptions,
    mut telemetry: Option<Telemetry<'_>>,
) -> Result<EstimatorResult> {
    check_budget(n_shots, options)?;
    if denoiser.n != trotter.n {
        return Err(Error::Shape("denoiser and circuit sizes differ".into()));
    }
    let dist = QuasiDistribution::from_spec(denoiser)?;
    let bound = hoeffding_samples(dist.gamma, options.delta, options.omega)?;
    let unitary_gates = build_trotter(trotter, false)?;
    let paulis = pauli_pair_kernels();
    let branches_clean: Vec<[LocalKernel; 2]> = denoiser
        .layers
        .iter()
        .map(|p| {
            [
                unitary_superop(&zz_dressed_unitary(&p.unitary)).to_kernel(),
                correlated_measurement(&p.measure).to_kernel(),
            ]
        })
        .collect();
    let mut acc = Accumulator { sum: 0.0, sum_sq: 0.0, n: 0 };

    for shot in 0..n_shots {
        let mut rng = shot_rng(seed, shot);
        let (branches, sign) = dist.sample(&mut rng);
        let mut v = initial.clone();
        for g in unitary_gates.gates() {
            v.apply_local(g.kernel(), &g.sites());
            if let Some(k) = sample_pauli(trotter.noise.p(), &mut rng) {
                v.apply_local(&paulis[k], &g.sites());
            }
        }
        for (w, &b) in dist.gates.iter().zip(&branches) {
            v.apply_local(&branches_clean[w.layer][b as usize], &w.sites);
            if let Some(k) = sample_pauli(denoiser.noise.p(), &mut rng) {
                v.apply_local(&paulis[k], &w.sites);
            }
        }
        let value = dist.gamma * sign * observable.eval(&v).re;
        if !value.is_finite() {
            return Err(Error::NonFinite { iteration: shot as usize });
        }
        acc.push(value);
        if let Some(sink) = telemetry.as_mut() {
            sink(&ShotRecord { shot, branches, sign, value })?;
        }
    }
    Ok(acc.finish(dist.gamma, bound))
}

/// The depolarizing channel as the Pauli mixture used by the unraveling.
pub fn pauli_mixture(noise: NoiseModel) -> DenseSuperoperator {
    let p = noise.p();
    let paulis: Vec<_> = (0..4).map(|a| pauli_matrix(a).expect("pauli")).collect();
    let mut acc = DenseSuperoperator::zeros(2);
    for (k, (a, b)) in paulis.iter().flat_map(|a| paulis.iter().map(move |b| (a, b))).enumerate() {
        let w = if k == 0 { 1.0 - p } else { p / 15.0 };
        acc = acc.add(&unitary_superop(&a.kron(b)).scale(w));
    }
    acc
}
