//! Denoiser optimization: the normalized Frobenius cost
//! `eps = ||C - D * C_noisy||_F^2 / 4^L`, its exact gradient by reverse
//! accumulation through the denoiser gates, and an Adam driver.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{denoiser_local_jacobian, ChannelParams, PARAMS_PER_CHANNEL};
use crate::circuits::{build_denoiser, build_trotter, half_layer_bonds, DenoiserSpec, GateList, TrotterSpec, MAX_COMPOSE_QUBITS};
use crate::error::{Error, Result};
use crate::kernel::{local_environment, superop_bit_positions, LocalKernel};
use crate::pauli::{unitary_superop, DenseSuperoperator, QubitCount};
use crate::random::seeded;
use crate::{circuits, C64};

/// Stored intermediate states above which the gradient switches to
/// checkpointed recomputation.
const STORE_ALL_BYTES: usize = 1 << 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub learning_rate: f64,
    pub adam_betas: (f64, f64),
    pub grad_tolerance: f64,
    pub seed: u64,
    pub init_eta1: f64,
    pub init_angle_scale: f64,
    pub restarts: usize,
    /// Weight of an optional `sum |eta0| + |eta1|` penalty; zero disables it.
    pub gamma_penalty: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            learning_rate: 0.01,
            adam_betas: (0.9, 0.999),
            grad_tolerance: 1e-8,
            seed: 0,
            init_eta1: 0.01,
            init_angle_scale: 0.01,
            restarts: 1,
            gamma_penalty: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let (b1, b2) = self.adam_betas;
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&b1) || !(0.0..1.0).contains(&b2) {
            return Err(Error::InvalidArgument(format!("Adam betas ({b1}, {b2}) must lie in [0, 1)")));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("at least one restart is required".into()));
        }
        if self.gamma_penalty < 0.0 {
            return Err(Error::InvalidArgument("gamma penalty must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub final_epsilon: f64,
    /// Cost at every iterate, including the initial point.
    pub epsilon_trace: Vec<f64>,
    /// Running minimum of `epsilon_trace`.
    pub best_epsilon_trace: Vec<f64>,
    pub grad_norm_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: f64,
    pub best_params: DenoiserSpec,
}

/// Target and noisy circuit, both composed, against which denoisers are scored.
#[derive(Clone, Debug)]
pub struct CostContext {
    n: QubitCount,
    target: DenseSuperoperator,
    noisy: DenseSuperoperator,
    checkpoint_interval: Option<usize>,
}

impl CostContext {
    pub fn new(target: DenseSuperoperator, noisy: DenseSuperoperator) -> Result<Self> {
        if target.n_qubits() != noisy.n_qubits() {
            return Err(Error::Shape(format!(
                "target on {} qubits, noisy circuit on {}",
                target.n_qubits(),
                noisy.n_qubits()
            )));
        }
        let n = QubitCount::new(target.n_qubits())?;
        if n.get() > MAX_COMPOSE_QUBITS {
            return Err(Error::DimensionLimit { n: n.get(), limit: MAX_COMPOSE_QUBITS });
        }
        Ok(Self { n, target, noisy, checkpoint_interval: None })
    }

    /// Noiseless Trotter target and its noisy counterpart for `spec`.
    pub fn from_trotter(spec: &TrotterSpec) -> Result<Self> {
        if spec.n.get() > MAX_COMPOSE_QUBITS {
            return Err(Error::DimensionLimit { n: spec.n.get(), limit: MAX_COMPOSE_QUBITS });
        }
        let target = unitary_superop(&circuits::trotter_unitary(spec)?);
        let noisy = build_trotter(spec, true)?.compose()?;
        Self::new(target, noisy)
    }

    /// Forces gradient checkpoints every `k` gates instead of the automatic choice.
    pub fn with_checkpoint_interval(mut self, k: usize) -> Self {
        self.checkpoint_interval = Some(k.max(1));
        self
    }

    pub fn n_qubits(&self) -> QubitCount {
        self.n
    }

    pub fn target(&self) -> &DenseSuperoperator {
        &self.target
    }

    pub fn noisy(&self) -> &DenseSuperoperator {
        &self.noisy
    }

    fn check(&self, denoiser: &DenoiserSpec) -> Result<()> {
        denoiser.validate()?;
        if denoiser.n != self.n {
            return Err(Error::Shape(format!("denoiser on {} qubits, circuit on {}", denoiser.n, self.n)));
        }
        Ok(())
    }

    fn normalization(&self) -> f64 {
        (self.target.dim()) as f64
    }

    /// Cost of the bare noisy circuit (no denoiser).
    pub fn baseline_epsilon(&self) -> f64 {
        self.target.sub(&self.noisy).frobenius_sq() / self.normalization()
    }

    pub fn epsilon(&self, denoiser: &DenoiserSpec) -> Result<f64> {
        self.check(denoiser)?;
        let mut x = self.noisy.clone();
        build_denoiser(denoiser)?.apply_left(&mut x);
        Ok(frobenius_distance_sq(x.data(), self.target.data()) / self.normalization())
    }

    /// Cost and its gradient with respect to [`DenoiserSpec::to_vec`].
    pub fn epsilon_gradient(&self, denoiser: &DenoiserSpec) -> Result<(f64, Vec<f64>)> {
        self.check(denoiser)?;
        let l = self.n.get();
        let d = self.target.dim();
        let bits = 2 * l as u32;
        let jacobians: Vec<_> = denoiser.layers.iter().map(|p| denoiser_local_jacobian(p, denoiser.noise)).collect();
        let forward: Vec<LocalKernel> = jacobians.iter().map(|j| j.value.to_kernel()).collect();
        let backward: Vec<LocalKernel> = jacobians.iter().map(|j| j.value.adjoint().to_kernel()).collect();

        // (layer, bit positions) for every gate in application order
        let gates: Vec<(usize, Vec<u32>)> = (0..denoiser.layers.len())
            .flat_map(|layer| {
                half_layer_bonds(self.n, layer % 2)
                    .into_iter()
                    .map(move |b| (layer, superop_bit_positions(&b, l)))
            })
            .collect();
        let k_total = gates.len();
        let mut grad = vec![0.0; denoiser.n_params()];
        if k_total == 0 {
            return Ok((self.baseline_epsilon(), grad));
        }

        let seg = self.checkpoint_interval.unwrap_or_else(|| {
            let bytes = (k_total + 1) * d * d * std::mem::size_of::<C64>();
            if bytes <= STORE_ALL_BYTES {
                k_total
            } else {
                (k_total as f64).sqrt().ceil() as usize
            }
        });

        let apply = |x: &mut [C64], k: usize, kernels: &[LocalKernel]| {
            let (layer, pos) = &gates[k];
            kernels[*layer].apply_rows(x, d, bits, pos);
        };

        let mut checkpoints = Vec::with_capacity(k_total.div_ceil(seg));
        let mut x = self.noisy.data().to_vec();
        for k in 0..k_total {
            if k % seg == 0 {
                checkpoints.push(x.clone());
            }
            apply(&mut x, k, &forward);
        }
        for (r, t) in x.iter_mut().zip(self.target.data()) {
            *r -= t;
        }
        let eps = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.normalization();
        let mut lambda = x;
        let scale = 2.0 / self.normalization();

        for (j, start) in (0..k_total).step_by(seg).enumerate().rev() {
            let end = (start + seg).min(k_total);
            let mut states = Vec::with_capacity(end - start);
            states.push(std::mem::take(&mut checkpoints[j]));
            for k in start..end - 1 {
                let mut next = states.last().expect("nonempty").clone();
                apply(&mut next, k, &forward);
                states.push(next);
            }
            for k in (start..end).rev() {
                let xk = states.pop().expect("one state per gate");
                let (layer, pos) = &gates[k];
                let env = local_environment(&lambda, &xk, d, bits, pos);
                drop(xk);
                let g = &mut grad[layer * PARAMS_PER_CHANNEL..(layer + 1) * PARAMS_PER_CHANNEL];
                for (gp, partial) in g.iter_mut().zip(&jacobians[*layer].partials) {
                    let s: f64 = env.iter().zip(partial.data()).map(|(e, dg)| (e.conj() * dg).re).sum();
                    *gp += scale * s;
                }
                if k > 0 {
                    apply(&mut lambda, k, &backward);
                }
            }
        }
        Ok((eps, grad))
    }
}

fn frobenius_distance_sq(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// `||target - D * C_noisy||^2 / 4^L` with the noisy circuit given as a gate list.
pub fn epsilon(target: &DenseSuperoperator, denoiser: &DenoiserSpec, noisy_circuit: &GateList) -> Result<f64> {
    CostContext::new(target.clone(), noisy_circuit.compose()?)?.epsilon(denoiser)
}

/// Random near-identity starting point.
pub fn initial_denoiser(n: QubitCount, depth: usize, noise: crate::channels::NoiseModel, config: &OptimizerConfig, seed: u64) -> DenoiserSpec {
    let mut rng = seeded(seed);
    let s = config.init_angle_scale;
    let layers = (0..2 * depth)
        .map(|_| {
            let mut x = [0.0; PARAMS_PER_CHANNEL];
            x[0] = config.init_eta1;
            for v in &mut x[1..] {
                *v = if s > 0.0 { rng.gen_range(-s..=s) } else { 0.0 };
            }
            ChannelParams::from_array(&x)
        })
        .collect();
    DenoiserSpec { n, depth, layers, noise }
}

fn gamma_penalty(x: &[f64], weight: f64, grad: &mut [f64]) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (k, chunk) in x.chunks_exact(PARAMS_PER_CHANNEL).enumerate() {
        let eta1 = chunk[0];
        total += (1.0 - eta1).abs() + eta1.abs();
        grad[k * PARAMS_PER_CHANNEL] += weight * (eta1.signum() - (1.0 - eta1).signum());
    }
    weight * total
}

/// Adam descent from `init`, keeping the best iterate seen.
pub fn optimize_from(ctx: &CostContext, init: &DenoiserSpec, config: &OptimizerConfig) -> Result<OptimizationReport> {
    config.validate()?;
    ctx.check(init)?;
    let started = Instant::now();
    let (b1, b2) = config.adam_betas;
    let mut x = init.to_vec();
    let mut m = vec![0.0; x.len()];
    let mut v = vec![0.0; x.len()];
    let mut best = (f64::INFINITY, init.clone());
    let mut eps_trace = Vec::new();
    let mut best_trace = Vec::new();
    let mut grad_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..=config.max_iters {
        let spec = init.with_params(&x)?;
        let (eps, mut grad) = ctx.epsilon_gradient(&spec)?;
        let penalty = gamma_penalty(&x, config.gamma_penalty, &mut grad);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !eps.is_finite() || !gnorm.is_finite() {
            return Err(Error::NonFinite { iteration: it });
        }
        if eps + penalty < best.0 {
            best = (eps + penalty, spec);
        }
        eps_trace.push(eps);
        best_trace.push(best_trace.last().map_or(eps, |&b: &f64| b.min(eps)));
        grad_trace.push(gnorm);
        iterations = it;
        if gnorm < config.grad_tolerance {
            converged = true;
            break;
        }
        if it == config.max_iters {
            break;
        }
        let t = (it + 1) as i32;
        let (c1, c2) = (1.0 - b1.powi(t), 1.0 - b2.powi(t));
        for ((xi, gi), (mi, vi)) in x.iter_mut().zip(&grad).zip(m.iter_mut().zip(v.iter_mut())) {
            *mi = b1 * *mi + (1.0 - b1) * gi;
            *vi = b2 * *vi + (1.0 - b2) * gi * gi;
            *xi -= config.learning_rate * (*mi / c1) / ((*vi / c2).sqrt() + 1e-12);
        }
    }

    let best_params = best.1;
    Ok(OptimizationReport {
        final_epsilon: ctx.epsilon(&best_params)?,
        epsilon_trace: eps_trace,
        best_epsilon_trace: best_trace,
        grad_norm_trace: grad_trace,
        iterations,
        converged,
        wall_time: started.elapsed().as_secs_f64(),
        best_params,
    })
}

/// Multi-start optimization of a depth-`depth` denoiser; restart `r` uses
/// seed `config.seed + r` and the lowest final cost wins.
pub fn optimize(ctx: &CostContext, depth: usize, noise: crate::channels::NoiseModel, config: &OptimizerConfig) -> Result<OptimizationReport> {
    config.validate()?;
    let mut best: Option<OptimizationReport> = None;
    for r in 0..config.restarts {
        let init = initial_denoiser(ctx.n, depth, noise, config, config.seed.wrapping_add(r as u64));
        let report = optimize_from(ctx, &init, config)?;
        if best.as_ref().map_or(true, |b| report.final_epsilon < b.final_epsilon) {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// The same translation-invariant denoiser on a chain of different length.
pub fn transfer(spec: &DenoiserSpec, n: QubitCount) -> DenoiserSpec {
    DenoiserSpec { n, ..spec.clone() }
}
