//! Brickwall supercircuits: noisy second-order Trotter circuits for the
//! periodic Heisenberg chain and the denoiser circuits that follow them.
//!
//! Half layer `e` (0 = even, 1 = odd) acts on the bonds `(2k + e, 2k + e + 1 mod L)`.
//! A Trotter circuit of depth `m_trot` has `m_trot + 1` half layers starting on
//! even bonds; the first and last carry half the time step `tau = 2t / m_trot`.

use serde::{Deserialize, Serialize};

use crate::channels::{denoiser_local, depolarizing_local, ChannelParams, NoiseModel};
use crate::error::{Error, Result};
use crate::kernel::LocalKernel;
use crate::pauli::{embed_on_sites, pauli_matrix, unitary_superop, DenseOperator, DenseSuperoperator, QubitCount, VectorizedOperator};
use crate::C64;

/// Largest register for which full `4^L x 4^L` composition is allowed.
pub const MAX_COMPOSE_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Self { jx: 1.0, jy: 1.0, jz: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterSpec {
    pub n: QubitCount,
    pub t: f64,
    pub m_trot: usize,
    pub noise: NoiseModel,
    #[serde(default)]
    pub couplings: Couplings,
}

impl TrotterSpec {
    pub fn new(n: QubitCount, t: f64, m_trot: usize, noise: NoiseModel) -> Result<Self> {
        let spec = Self { n, t, m_trot, noise, couplings: Couplings::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_trot == 0 {
            return Err(Error::InvalidArgument("Trotter depth must be at least 1".into()));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidArgument(format!("evolution time {} is not finite", self.t)));
        }
        Ok(())
    }

    /// Full Trotter step `tau`; the outermost half layers use `tau / 2`.
    pub fn tau(&self) -> f64 {
        2.0 * self.t / self.m_trot as f64
    }

    /// The same circuit without noise.
    pub fn noiseless(&self) -> Self {
        Self { noise: NoiseModel::noiseless(), ..*self }
    }
}

/// Denoiser of depth `M`: `2M` half layers, one shared channel per half layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenoiserSpec {
    pub n: QubitCount,
    pub depth: usize,
    pub layers: Vec<ChannelParams>,
    pub noise: NoiseModel,
}

impl DenoiserSpec {
    pub fn new(n: QubitCount, depth: usize, layers: Vec<ChannelParams>, noise: NoiseModel) -> Result<Self> {
        let spec = Self { n, depth, layers, noise };
        spec.validate()?;
        Ok(spec)
    }

    /// Every channel set to the noiseless-identity parameters.
    pub fn identity(n: QubitCount, depth: usize, noise: NoiseModel) -> Self {
        Self { n, depth, layers: vec![ChannelParams::identity(); 2 * depth], noise }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() != 2 * self.depth {
            return Err(Error::Shape(format!(
                "depth {} denoiser needs {} channels, got {}",
                self.depth,
                2 * self.depth,
                self.layers.len()
            )));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.layers.len() * crate::channels::PARAMS_PER_CHANNEL
    }

    /// Flattened parameters, channel by channel.
    pub fn to_vec(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|p| p.to_array()).collect()
    }

    pub fn with_params(&self, x: &[f64]) -> Result<Self> {
        let k = crate::channels::PARAMS_PER_CHANNEL;
        if x.len() != self.n_params() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", self.n_params(), x.len())));
        }
        let layers = x
            .chunks_exact(k)
            .map(|c| ChannelParams::from_array(c.try_into().expect("chunk of 17")))
            .collect();
        Ok(Self { layers, ..self.clone() })
    }

    /// Product of channel overheads over every gate placement.
    pub fn gamma(&self) -> f64 {
        let per_layer = (self.n.get() / 2) as i32;
        self.layers.iter().map(|p| crate::channels::gamma_of(p).powi(per_layer)).product()
    }
}

/// One local two-qubit superoperator placed on a bond.
#[derive(Clone, Debug)]
pub struct Gate {
    local: DenseSuperoperator,
    kernel: LocalKernel,
    sites: [usize; 2],
}

impl Gate {
    pub fn new(local: DenseSuperoperator, sites: [usize; 2]) -> Result<Self> {
        if local.n_qubits() != 2 {
            return Err(Error::Shape(format!("gate acts on {} qubits, expected 2", local.n_qubits())));
        }
        let kernel = local.to_kernel();
        Ok(Self { local, kernel, sites })
    }

    pub fn local(&self) -> &DenseSuperoperator {
        &self.local
    }

    pub fn kernel(&self) -> &LocalKernel {
        &self.kernel
    }

    pub fn sites(&self) -> [usize; 2] {
        self.sites
    }
}

/// Ordered gate placements; gates apply in list order.
#[derive(Clone, Debug)]
pub struct GateList {
    n: QubitCount,
    gates: Vec<Gate>,
}

/// Bonds of half layer `parity` on a ring of `n` sites.
pub fn half_layer_bonds(n: QubitCount, parity: usize) -> Vec<[usize; 2]> {
    let l = n.get();
    (0..l / 2).map(|k| [(2 * k + parity) % l, (2 * k + parity + 1) % l]).collect()
}

/// `exp(-i theta (Jx XX + Jy YY + Jz ZZ))`; the three terms commute.
pub fn heisenberg_bond_gate(theta: f64, couplings: Couplings) -> DenseOperator {
    let mut g = DenseOperator::identity(2);
    for (a, j) in [(1, couplings.jx), (2, couplings.jy), (3, couplings.jz)] {
        let p = pauli_matrix(a).expect("pauli");
        let pp = p.kron(&p);
        let (s, c) = (theta * j).sin_cos();
        let factor = DenseOperator::identity(2).scale(c.into()).add(&pp.scale(C64::new(0.0, -s)));
        g = factor.matmul(&g);
    }
    g
}

/// Dense `2^L x 2^L` Heisenberg Hamiltonian with periodic boundaries.
pub fn heisenberg_hamiltonian(n: QubitCount, couplings: Couplings) -> DenseOperator {
    let l = n.get();
    let mut h = DenseOperator::zeros(l);
    // On two sites both ring bonds couple the same pair, as in the brickwall.
    let bonds: Vec<[usize; 2]> = (0..l).map(|s| [s, (s + 1) % l]).collect();
    for (a, j) in [(1, couplings.jx), (2, couplings.jy), (3, couplings.jz)] {
        let p = pauli_matrix(a).expect("pauli");
        let pp = p.kron(&p).scale(j.into());
        for b in &bonds {
            h = h.add(&embed_on_sites(&pp, b, l).expect("valid bond"));
        }
    }
    h
}

/// `(parity, time weight)` for each Trotter half layer.
fn trotter_layers(spec: &TrotterSpec) -> Vec<(usize, f64)> {
    let tau = spec.tau();
    (0..=spec.m_trot)
        .map(|k| {
            let w = if k == 0 || k == spec.m_trot { 0.5 } else { 1.0 };
            (k % 2, w * tau)
        })
        .collect()
}

/// Noiseless Trotter circuit as a `2^L x 2^L` unitary.
pub fn trotter_unitary(spec: &TrotterSpec) -> Result<DenseOperator> {
    spec.validate()?;
    let l = spec.n.get();
    let mut u = DenseOperator::identity(l);
    for (parity, dt) in trotter_layers(spec) {
        let g = heisenberg_bond_gate(dt, spec.couplings);
        for bond in half_layer_bonds(spec.n, parity) {
            u = embed_on_sites(&g, &bond, l)?.matmul(&u);
        }
    }
    Ok(u)
}

/// Second-order Trotter supercircuit; with `noisy`, each gate is followed by
/// two-qubit depolarizing noise on its bond.
pub fn build_trotter(spec: &TrotterSpec, noisy: bool) -> Result<GateList> {
    spec.validate()?;
    let noise = noisy.then(|| depolarizing_local(spec.noise));
    let mut gates = Vec::with_capacity((spec.m_trot + 1) * spec.n.get() / 2);
    for (parity, dt) in trotter_layers(spec) {
        let mut local = unitary_superop(&heisenberg_bond_gate(dt, spec.couplings));
        if let Some(n) = &noise {
            local = n.matmul(&local);
        }
        for bond in half_layer_bonds(spec.n, parity) {
            gates.push(Gate::new(local.clone(), bond)?);
        }
    }
    Ok(GateList { n: spec.n, gates })
}

/// Denoiser supercircuit: half layer `2m` is even, `2m + 1` odd, each built
/// from its own shared channel (noise included).
pub fn build_denoiser(spec: &DenoiserSpec) -> Result<GateList> {
    spec.validate()?;
    let mut gates = Vec::with_capacity(spec.layers.len() * spec.n.get() / 2);
    for (k, params) in spec.layers.iter().enumerate() {
        let local = denoiser_local(params, spec.noise);
        for bond in half_layer_bonds(spec.n, k % 2) {
            gates.push(Gate::new(local.clone(), bond)?);
        }
    }
    Ok(GateList { n: spec.n, gates })
}

impl GateList {
    pub fn empty(n: QubitCount) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn from_gates(n: QubitCount, gates: Vec<Gate>) -> Result<Self> {
        if let Some(bad) = gates.iter().find(|g| g.sites.iter().any(|&s| s >= n.get()) || g.sites[0] == g.sites[1]) {
            return Err(Error::SiteOutOfRange { site: bad.sites[0].max(bad.sites[1]), width: 2, n: n.get() });
        }
        Ok(Self { n, gates })
    }

    pub fn n_qubits(&self) -> QubitCount {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GateList) -> Result<GateList> {
        if self.n != next.n {
            return Err(Error::Shape(format!("cannot chain circuits on {} and {} qubits", self.n, next.n)));
        }
        let mut gates = self.gates.clone();
        gates.extend(next.gates.iter().cloned());
        Ok(GateList { n: self.n, gates })
    }

    /// Dense product of all embedded gates, later gates on the left.
    pub fn compose(&self) -> Result<DenseSuperoperator> {
        let l = self.n.get();
        if l > MAX_COMPOSE_QUBITS {
            return Err(Error::DimensionLimit { n: l, limit: MAX_COMPOSE_QUBITS });
        }
        let mut s = DenseSuperoperator::identity(l);
        self.apply_left(&mut s);
        Ok(s)
    }

    /// In-place `s <- C * s` for this circuit `C`.
    pub fn apply_left(&self, s: &mut DenseSuperoperator) {
        for g in &self.gates {
            s.apply_local_left(&g.kernel, &g.sites);
        }
    }

    /// Applies the circuit to a vectorized operator without composing it.
    pub fn apply(&self, v: &VectorizedOperator) -> Result<VectorizedOperator> {
        if v.n_qubits() != self.n.get() {
            return Err(Error::Shape(format!(
                "{}-qubit operator fed to a {}-qubit circuit",
                v.n_qubits(),
                self.n
            )));
        }
        let mut out = v.clone();
        for g in &self.gates {
            out.apply_local(&g.kernel, &g.sites);
        }
        Ok(out)
    }

    /// The adjoint circuit `C^dagger`: reversed order, each gate conjugate-transposed.
    pub fn adjoint(&self) -> GateList {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| Gate::new(g.local.adjoint(), g.sites).expect("two-qubit gate"))
            .collect();
        GateList { n: self.n, gates }
    }
}

/// `n` consecutive copies of `block`.
pub fn stack(block: &GateList, n: usize) -> Result<GateList> {
    if n == 0 {
        return Err(Error::InvalidArgument("stack count must be at least 1".into()));
    }
    let mut gates = Vec::with_capacity(block.len() * n);
    for _ in 0..n {
        gates.extend(block.gates.iter().cloned());
    }
    Ok(GateList { n: block.n, gates })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::channels::PARAMS_PER_CHANNEL;
    use crate::pauli::embed_superop;
    use crate::random::{random_density, random_unitary, seeded};

    fn q(n: usize) -> QubitCount {
        QubitCount::new(n).unwrap()
    }

    fn noise(p: f64) -> NoiseModel {
        NoiseModel::new(p).unwrap()
    }

    /// `exp(-i H t)` by scaling and squaring a truncated Taylor series.
    fn expm_i(h: &DenseOperator, t: f64) -> DenseOperator {
        let squarings = 10;
        let a = h.scale(C64::new(0.0, -t / f64::from(1u32 << squarings)));
        let mut term = DenseOperator::identity(h.n_qubits());
        let mut sum = term.clone();
        for k in 1..30 {
            term = term.matmul(&a).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }

    fn frobenius_distance(a: &DenseSuperoperator, b: &DenseSuperoperator) -> f64 {
        a.sub(b).frobenius_sq().sqrt()
    }

    fn random_params(rng: &mut rand_chacha::ChaCha8Rng) -> ChannelParams {
        use rand::Rng;
        let x: [f64; PARAMS_PER_CHANNEL] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        ChannelParams::from_array(&x)
    }

    #[test]
    fn zero_time_is_identity() {
        let spec = TrotterSpec::new(q(4), 0.0, 5, noise(0.0)).unwrap();
        let s = build_trotter(&spec, true).unwrap().compose().unwrap();
        assert!(s.max_abs_diff(&DenseSuperoperator::identity(4)) < 1e-14);
    }

    #[test]
    fn gate_counts() {
        let spec = TrotterSpec::new(q(6), 1.0, 16, noise(0.01)).unwrap();
        assert_eq!(build_trotter(&spec, true).unwrap().len(), 51);
        for (l, m) in [(2, 1), (4, 3), (8, 10)] {
            let spec = TrotterSpec::new(q(l), 1.0, m, noise(0.0)).unwrap();
            assert_eq!(build_trotter(&spec, false).unwrap().len(), (m + 1) * l / 2);
        }
        let d = DenoiserSpec::identity(q(4), 2, noise(0.0));
        assert_eq!(build_denoiser(&d).unwrap().len(), 8);
        assert_eq!(d.layers.len(), 4);
    }

    #[test]
    fn trotter_layers_are_symmetric_and_sum_to_t() {
        let spec = TrotterSpec::new(q(4), 0.7, 6, noise(0.0)).unwrap();
        let layers = trotter_layers(&spec);
        for parity in 0..2 {
            let total: f64 = layers.iter().filter(|l| l.0 == parity).map(|l| l.1).sum();
            assert!((total - 0.7).abs() < 1e-14);
        }
        assert_eq!(layers[0], (0, spec.tau() / 2.0));
        assert_eq!(layers.last().unwrap().1, spec.tau() / 2.0);
    }

    #[test]
    fn bond_gate_matches_exponential() {
        let couplings = Couplings { jx: 0.7, jy: -0.3, jz: 1.1 };
        let h = heisenberg_hamiltonian(q(2), couplings);
        // the two-site ring counts its single pair twice
        let g = heisenberg_bond_gate(0.37, couplings);
        assert!(g.max_abs_diff(&expm_i(&h, 0.185)) < 1e-12);
    }

    #[test]
    fn second_order_convergence() {
        let n = q(4);
        let t = 0.3;
        let exact = unitary_superop(&expm_i(&heisenberg_hamiltonian(n, Couplings::default()), t));
        let dist = |m: usize| {
            let spec = TrotterSpec::new(n, t, m, noise(0.0)).unwrap();
            frobenius_distance(&build_trotter(&spec, false).unwrap().compose().unwrap(), &exact)
        };
        let (d2, d4, d8) = (dist(2), dist(4), dist(8));
        assert!(d2 > 1e-6);
        for ratio in [d2 / d4, d4 / d8] {
            assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
        }
    }

    #[test]
    fn noiseless_trotter_is_unitary() {
        let spec = TrotterSpec::new(q(4), 1.3, 3, noise(0.0)).unwrap();
        let s = build_trotter(&spec, false).unwrap().compose().unwrap();
        assert!(s.adjoint().matmul(&s).max_abs_diff(&DenseSuperoperator::identity(4)) < 1e-10);
        let via_unitary = unitary_superop(&trotter_unitary(&spec).unwrap());
        assert!(s.max_abs_diff(&via_unitary) < 1e-12);
    }

    #[test]
    fn compose_examples() {
        assert_eq!(GateList::empty(q(2)).compose().unwrap(), DenseSuperoperator::identity(2));

        let x = pauli_matrix(1).unwrap();
        let sx = unitary_superop(&x.kron(&DenseOperator::identity(1)));
        let single = GateList::from_gates(q(4), vec![Gate::new(sx.clone(), [3, 0]).unwrap()]).unwrap();
        assert_eq!(single.compose().unwrap(), embed_superop(&sx, &[3, 0], 4).unwrap());

        // Two overlapping noisy gates against explicit density-matrix evolution.
        let mut r = seeded(21);
        let u1 = random_unitary(2, &mut r);
        let u2 = random_unitary(2, &mut r);
        let nz = depolarizing_local(noise(0.05));
        let gates = vec![
            Gate::new(nz.matmul(&unitary_superop(&u1)), [0, 1]).unwrap(),
            Gate::new(nz.matmul(&unitary_superop(&u2)), [1, 2]).unwrap(),
        ];
        let s = GateList::from_gates(q(4), gates).unwrap().compose().unwrap();
        let paulis: Vec<DenseOperator> = (0..4).map(|a| pauli_matrix(a).unwrap()).collect();
        let depolarize = |rho: &DenseOperator, a: usize, b: usize| {
            let mut out = rho.scale(C64::new(1.0 - 16.0 * 0.05 / 15.0, 0.0));
            for pa in &paulis {
                for pb in &paulis {
                    let p = embed_on_sites(&pa.kron(pb), &[a, b], 4).unwrap();
                    out = out.add(&p.matmul(rho).matmul(&p.adjoint()).scale(C64::new(0.05 / 15.0, 0.0)));
                }
            }
            out
        };
        let g1 = embed_on_sites(&u1, &[0, 1], 4).unwrap();
        let g2 = embed_on_sites(&u2, &[1, 2], 4).unwrap();
        for basis in 0..16 {
            let (i, j) = (basis / 4, basis % 4);
            let mut rho = DenseOperator::zeros(4);
            rho.set(i, j, C64::new(1.0, 0.0));
            let rho = depolarize(&g1.matmul(&rho).matmul(&g1.adjoint()), 0, 1);
            let rho = depolarize(&g2.matmul(&rho).matmul(&g2.adjoint()), 1, 2);
            let col = s.apply(&VectorizedOperator::from_operator(&{
                let mut e = DenseOperator::zeros(4);
                e.set(i, j, C64::new(1.0, 0.0));
                e
            }));
            assert!(col.to_operator().max_abs_diff(&rho) < 1e-13);
        }
    }

    #[test]
    fn compose_refuses_large_registers() {
        let spec = TrotterSpec::new(q(8), 1.0, 1, noise(0.0)).unwrap();
        let err = build_trotter(&spec, false).unwrap().compose().unwrap_err();
        assert_eq!(err, Error::DimensionLimit { n: 8, limit: 6 });
    }

    #[test]
    fn identity_denoiser_is_identity() {
        let d = DenoiserSpec::identity(q(4), 1, noise(0.0));
        let s = build_denoiser(&d).unwrap().compose().unwrap();
        assert!(s.max_abs_diff(&DenseSuperoperator::identity(4)) < 1e-15);
    }

    #[test]
    fn denoiser_is_translation_invariant_by_two_sites() {
        let mut r = seeded(3);
        let d = DenoiserSpec::new(q(6), 2, (0..4).map(|_| random_params(&mut r)).collect(), noise(0.01)).unwrap();
        let g = build_denoiser(&d).unwrap();
        let per_layer = 3;
        for (layer, chunk) in g.gates().chunks(per_layer).enumerate() {
            let mut shifted: Vec<[usize; 2]> = chunk.iter().map(|gate| gate.sites().map(|s| (s + 2) % 6)).collect();
            let mut original: Vec<[usize; 2]> = chunk.iter().map(Gate::sites).collect();
            shifted.sort_unstable();
            original.sort_unstable();
            assert_eq!(shifted, original, "layer {layer}");
            assert!(chunk.iter().all(|gate| gate.local() == chunk[0].local()));
        }
    }

    #[test]
    fn apply_matches_compose() {
        let mut r = seeded(8);
        for l in [2, 4] {
            let d = DenoiserSpec::new(q(l), 1, (0..2).map(|_| random_params(&mut r)).collect(), noise(0.02)).unwrap();
            let spec = TrotterSpec::new(q(l), 0.8, 3, noise(0.02)).unwrap();
            let g = build_trotter(&spec, true).unwrap().then(&build_denoiser(&d).unwrap()).unwrap();
            let s = g.compose().unwrap();
            let rho = VectorizedOperator::from_operator(&random_density(l, &mut r));
            let a = g.apply(&rho).unwrap();
            let b = s.apply(&rho);
            let diff = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-10);
            assert!((a.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn stacking_is_matrix_power() {
        let spec = TrotterSpec::new(q(4), 0.5, 2, noise(0.02)).unwrap();
        let g = build_trotter(&spec, true).unwrap();
        let s = g.compose().unwrap();
        let cube = s.matmul(&s).matmul(&s);
        assert!(stack(&g, 3).unwrap().compose().unwrap().max_abs_diff(&cube) < 1e-10);
        assert_eq!(stack(&g, 1).unwrap().len(), g.len());
        let id = GateList::empty(q(4));
        assert_eq!(stack(&id, 2).unwrap().compose().unwrap(), DenseSuperoperator::identity(4));
        assert!(stack(&g, 0).is_err());
    }

    #[test]
    fn adjoint_circuit_composes_to_adjoint() {
        let spec = TrotterSpec::new(q(4), 0.5, 2, noise(0.03)).unwrap();
        let g = build_trotter(&spec, true).unwrap();
        let lhs = g.adjoint().compose().unwrap();
        assert!(lhs.max_abs_diff(&g.compose().unwrap().adjoint()) < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn apply_and_compose_agree(seed in 0u64..1000, l in prop::sample::select(vec![2usize, 4]), m in 1usize..4) {
            let mut r = seeded(seed);
            let d = DenoiserSpec::new(q(l), 1, (0..2).map(|_| random_params(&mut r)).collect(), noise(0.01)).unwrap();
            let spec = TrotterSpec::new(q(l), 0.4, m, noise(0.01)).unwrap();
            let g = build_trotter(&spec, true).unwrap().then(&build_denoiser(&d).unwrap()).unwrap();
            let rho = VectorizedOperator::from_operator(&random_density(l, &mut r));
            let a = g.apply(&rho).unwrap();
            let b = g.compose().unwrap().apply(&rho);
            let diff = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-10);
        }

        #[test]
        fn noiseless_trotter_is_unitary_prop(t in -2.0f64..2.0, m in 1usize..5) {
            let spec = TrotterSpec::new(q(4), t, m, noise(0.0)).unwrap();
            let s = build_trotter(&spec, false).unwrap().compose().unwrap();
            prop_assert!(s.adjoint().matmul(&s).max_abs_diff(&DenseSuperoperator::identity(4)) < 1e-10);
        }
    }
}
