//! Depolarizing noise and the parameterized two-qubit denoiser channel.
//!
//! A denoiser channel is the signed mixture
//! `G = N * (eta0 * U(phi) + eta1 * M(zeta) (x) M(zeta))` with
//! `eta0 + eta1 = 1`, where `U` is a ZZ rotation dressed by single-qubit
//! unitaries (tied across the bond so the gate is inversion symmetric) and
//! `M` is a single-qubit measure-and-prepare channel. Every local superoperator
//! here is `16 x 16` in the local ordering `(i_a, i_b, j_a, j_b)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{
    embed_superop, kraus_superop, pauli_matrix, placement_sites, unitary_superop, Boundary,
    DenseOperator, DenseSuperoperator, QubitCount,
};
use crate::C64;

/// Number of free real parameters of one denoiser channel.
pub const PARAMS_PER_CHANNEL: usize = 17;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Parameters of the dressed ZZ rotation `(A (x) A) exp(-i alpha ZZ) (C (x) C)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitaryParams {
    pub alpha: f64,
    pub kappa_a: [f64; 3],
    pub kappa_c: [f64; 3],
}

/// Parameters of the measure-and-prepare channel: `kappa_3` fixes the
/// measurement basis, `kappa_1` / `kappa_2` the prepared states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurePrepParams {
    pub kappa_1: [f64; 3],
    pub kappa_2: [f64; 3],
    pub kappa_3: [f64; 3],
}

/// All 17 parameters of a denoiser channel. `eta0 = 1 - eta1` is derived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub eta1: f64,
    #[serde(flatten)]
    pub unitary: UnitaryParams,
    #[serde(flatten)]
    pub measure: MeasurePrepParams,
}

impl ChannelParams {
    /// Pure identity unitary branch (`eta1 = 0`, all angles zero).
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn eta0(&self) -> f64 {
        1.0 - self.eta1
    }

    /// Flat layout: `eta1, alpha, kappa_a, kappa_c, kappa_1, kappa_2, kappa_3`.
    pub fn to_array(&self) -> [f64; PARAMS_PER_CHANNEL] {
        let mut out = [0.0; PARAMS_PER_CHANNEL];
        out[0] = self.eta1;
        out[1] = self.unitary.alpha;
        out[2..5].copy_from_slice(&self.unitary.kappa_a);
        out[5..8].copy_from_slice(&self.unitary.kappa_c);
        out[8..11].copy_from_slice(&self.measure.kappa_1);
        out[11..14].copy_from_slice(&self.measure.kappa_2);
        out[14..17].copy_from_slice(&self.measure.kappa_3);
        out
    }

    pub fn from_array(x: &[f64; PARAMS_PER_CHANNEL]) -> Self {
        let tri = |k: usize| [x[k], x[k + 1], x[k + 2]];
        Self {
            eta1: x[0],
            unitary: UnitaryParams { alpha: x[1], kappa_a: tri(2), kappa_c: tri(5) },
            measure: MeasurePrepParams { kappa_1: tri(8), kappa_2: tri(11), kappa_3: tri(14) },
        }
    }
}

/// Two-qubit depolarizing strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseModel {
    p: f64,
}

impl NoiseModel {
    /// Largest `p` for which the channel is completely positive.
    pub const P_MAX: f64 = 15.0 / 16.0;

    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=Self::P_MAX).contains(&p) {
            Ok(Self { p })
        } else {
            Err(Error::NoiseStrength(p))
        }
    }

    pub fn noiseless() -> Self {
        Self { p: 0.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_noiseless(&self) -> bool {
        self.p == 0.0
    }
}

impl TryFrom<f64> for NoiseModel {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<NoiseModel> for f64 {
    fn from(n: NoiseModel) -> f64 {
        n.p
    }
}

fn rz(theta: f64) -> DenseOperator {
    let h = theta / 2.0;
    DenseOperator::from_vec(1, vec![C64::from_polar(1.0, -h), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::from_polar(1.0, h)])
        .expect("2x2")
}

fn drz(theta: f64) -> DenseOperator {
    let h = theta / 2.0;
    DenseOperator::from_vec(
        1,
        vec![-0.5 * I * C64::from_polar(1.0, -h), C64::new(0.0, 0.0), C64::new(0.0, 0.0), 0.5 * I * C64::from_polar(1.0, h)],
    )
    .expect("2x2")
}

fn ry(theta: f64) -> DenseOperator {
    let (s, c) = (theta / 2.0).sin_cos();
    DenseOperator::from_vec(1, vec![c.into(), (-s).into(), s.into(), c.into()]).expect("2x2")
}

fn dry(theta: f64) -> DenseOperator {
    let (s, c) = (theta / 2.0).sin_cos();
    DenseOperator::from_vec(1, vec![(-s / 2.0).into(), (-c / 2.0).into(), (c / 2.0).into(), (-s / 2.0).into()]).expect("2x2")
}

/// `V(kappa) = Rz(kappa_1) Ry(kappa_2) Rz(kappa_3)`, global phase dropped.
pub fn one_qubit_unitary(kappa: [f64; 3]) -> DenseOperator {
    rz(kappa[0]).matmul(&ry(kappa[1])).matmul(&rz(kappa[2]))
}

/// `V(kappa)` and its three partial derivatives.
fn one_qubit_unitary_jac(kappa: [f64; 3]) -> (DenseOperator, [DenseOperator; 3]) {
    let (a, b, c) = (rz(kappa[0]), ry(kappa[1]), rz(kappa[2]));
    let v = a.matmul(&b).matmul(&c);
    let d0 = drz(kappa[0]).matmul(&b).matmul(&c);
    let d1 = a.matmul(&dry(kappa[1])).matmul(&c);
    let d2 = a.matmul(&b).matmul(&drz(kappa[2]));
    (v, [d0, d1, d2])
}

fn zz_rotation(alpha: f64) -> DenseOperator {
    let m = C64::from_polar(1.0, -alpha);
    let p = C64::from_polar(1.0, alpha);
    DenseOperator::from_fn(2, |i, j| {
        if i != j {
            return C64::new(0.0, 0.0);
        }
        match i {
            0 | 3 => m,
            _ => p,
        }
    })
}

fn zz_operator() -> DenseOperator {
    let z = pauli_matrix(3).expect("pauli");
    z.kron(&z)
}

/// The inversion-symmetric dressed ZZ gate `(A (x) A) exp(-i alpha Z(x)Z) (C (x) C)`.
pub fn zz_dressed_unitary(params: &UnitaryParams) -> DenseOperator {
    let a = one_qubit_unitary(params.kappa_a);
    let c = one_qubit_unitary(params.kappa_c);
    a.kron(&a).matmul(&zz_rotation(params.alpha)).matmul(&c.kron(&c))
}

/// Dressed gate and its 7 partials in the order `alpha, kappa_a, kappa_c`.
fn zz_dressed_unitary_jac(params: &UnitaryParams) -> (DenseOperator, Vec<DenseOperator>) {
    let (a, da) = one_qubit_unitary_jac(params.kappa_a);
    let (c, dc) = one_qubit_unitary_jac(params.kappa_c);
    let aa = a.kron(&a);
    let cc = c.kron(&c);
    let z = zz_rotation(params.alpha);
    let zc = z.matmul(&cc);
    let u = aa.matmul(&zc);
    let mut partials = Vec::with_capacity(7);
    let dz = zz_operator().matmul(&z).scale(-I);
    partials.push(aa.matmul(&dz).matmul(&cc));
    for d in &da {
        partials.push(d.kron(&a).add(&a.kron(d)).matmul(&zc));
    }
    let aaz = aa.matmul(&z);
    for d in &dc {
        partials.push(aaz.matmul(&d.kron(&c).add(&c.kron(d))));
    }
    (u, partials)
}

fn column(op: &DenseOperator, j: usize) -> [C64; 2] {
    [op.get(0, j), op.get(1, j)]
}

fn outer(ket: [C64; 2], bra: [C64; 2]) -> DenseOperator {
    DenseOperator::from_fn(1, |i, j| ket[i] * bra[j].conj())
}

/// Kraus pair `K1 = |psi_1><psi|`, `K2 = |psi_2><psi_bar|`.
fn measure_prepare_kraus(params: &MeasurePrepParams) -> [DenseOperator; 2] {
    let v1 = one_qubit_unitary(params.kappa_1);
    let v2 = one_qubit_unitary(params.kappa_2);
    let v3 = one_qubit_unitary(params.kappa_3);
    [outer(column(&v1, 0), column(&v3, 0)), outer(column(&v2, 0), column(&v3, 1))]
}

/// Kraus pair and partials `d[param][kraus]` for the 9 measurement angles.
fn measure_prepare_kraus_jac(params: &MeasurePrepParams) -> ([DenseOperator; 2], Vec<[DenseOperator; 2]>) {
    let (v1, d1) = one_qubit_unitary_jac(params.kappa_1);
    let (v2, d2) = one_qubit_unitary_jac(params.kappa_2);
    let (v3, d3) = one_qubit_unitary_jac(params.kappa_3);
    let psi1 = column(&v1, 0);
    let psi2 = column(&v2, 0);
    let psi = column(&v3, 0);
    let psib = column(&v3, 1);
    let zero = DenseOperator::zeros(1);
    let k = [outer(psi1, psi), outer(psi2, psib)];
    let mut partials = Vec::with_capacity(9);
    for d in &d1 {
        partials.push([outer(column(d, 0), psi), zero.clone()]);
    }
    for d in &d2 {
        partials.push([zero.clone(), outer(column(d, 0), psib)]);
    }
    for d in &d3 {
        partials.push([outer(psi1, column(d, 0)), outer(psi2, column(d, 1))]);
    }
    (k, partials)
}

/// Single-qubit measure-and-prepare channel `sum_l K_l (x) K_l*`.
pub fn measure_prepare_channel(params: &MeasurePrepParams) -> DenseSuperoperator {
    kraus_superop(&measure_prepare_kraus(params)).expect("equal shapes")
}

/// `X (x) Y*` in superoperator layout.
fn superop_pair(x: &DenseOperator, y: &DenseOperator) -> DenseSuperoperator {
    let d = x.dim();
    DenseSuperoperator::from_fn(x.n_qubits(), |r, c| x.get(r / d, c / d) * y.get(r % d, c % d).conj())
}

fn two_site_kraus(k: &[DenseOperator; 2]) -> Vec<DenseOperator> {
    let mut out = Vec::with_capacity(4);
    for a in k {
        for b in k {
            out.push(a.kron(b));
        }
    }
    out
}

/// Correlated two-qubit measurement `M (x) M` as a `16 x 16` local superoperator.
pub fn correlated_measurement(params: &MeasurePrepParams) -> DenseSuperoperator {
    kraus_superop(&two_site_kraus(&measure_prepare_kraus(params))).expect("equal shapes")
}

/// Local `16 x 16` two-qubit depolarizing channel.
pub fn depolarizing_local(noise: NoiseModel) -> DenseSuperoperator {
    let p = noise.p;
    let mut acc = DenseSuperoperator::identity(2).scale(1.0 - 16.0 * p / 15.0);
    if p == 0.0 {
        return acc;
    }
    let paulis: Vec<DenseOperator> = (0..4).map(|a| pauli_matrix(a).expect("pauli")).collect();
    for a in &paulis {
        for b in &paulis {
            acc = acc.add(&unitary_superop(&a.kron(b)).scale(p / 15.0));
        }
    }
    acc
}

/// Two-qubit depolarizing channel on sites `(site, site + 1 mod L)`.
pub fn depolarizing_channel(noise: NoiseModel, n: QubitCount, site: usize) -> Result<DenseSuperoperator> {
    let sites = placement_sites(site, 2, n.get(), Boundary::Periodic)?;
    embed_superop(&depolarizing_local(noise), &sites, n.get())
}

/// Noisy unitary branch `N * (U (x) U*)` of a denoiser channel.
pub fn unitary_branch(params: &ChannelParams, noise: NoiseModel) -> DenseSuperoperator {
    let u = unitary_superop(&zz_dressed_unitary(&params.unitary));
    depolarizing_local(noise).matmul(&u)
}

/// Noisy measurement branch `N * (M (x) M)` of a denoiser channel.
pub fn measurement_branch(params: &ChannelParams, noise: NoiseModel) -> DenseSuperoperator {
    depolarizing_local(noise).matmul(&correlated_measurement(&params.measure))
}

/// Local `16 x 16` noisy denoiser channel `N (eta0 U + eta1 M(x)M)`.
pub fn denoiser_local(params: &ChannelParams, noise: NoiseModel) -> DenseSuperoperator {
    let u = unitary_superop(&zz_dressed_unitary(&params.unitary));
    let m = correlated_measurement(&params.measure);
    let mix = u.scale(params.eta0()).add(&m.scale(params.eta1));
    depolarizing_local(noise).matmul(&mix)
}

/// Denoiser channel embedded on sites `(site, site + 1 mod L)`.
pub fn denoiser_channel(
    params: &ChannelParams,
    noise: NoiseModel,
    n: QubitCount,
    site: usize,
) -> Result<DenseSuperoperator> {
    let sites = placement_sites(site, 2, n.get(), Boundary::Periodic)?;
    embed_superop(&denoiser_local(params, noise), &sites, n.get())
}

/// Local denoiser channel together with its partial derivatives with
/// respect to the 17 parameters, in [`ChannelParams::to_array`] order.
#[derive(Clone, Debug)]
pub struct ChannelJacobian {
    pub value: DenseSuperoperator,
    pub partials: Vec<DenseSuperoperator>,
}

pub fn denoiser_local_jacobian(params: &ChannelParams, noise: NoiseModel) -> ChannelJacobian {
    let noise_op = depolarizing_local(noise);
    let (u, du) = zz_dressed_unitary_jac(&params.unitary);
    let u_sup = superop_pair(&u, &u);
    let (k, dk) = measure_prepare_kraus_jac(&params.measure);
    let kraus = two_site_kraus(&k);
    let m_sup = kraus_superop(&kraus).expect("equal shapes");

    let eta0 = params.eta0();
    let eta1 = params.eta1;
    let value = noise_op.matmul(&u_sup.scale(eta0).add(&m_sup.scale(eta1)));

    let mut partials = Vec::with_capacity(PARAMS_PER_CHANNEL);
    partials.push(noise_op.matmul(&m_sup.sub(&u_sup)));
    for d in &du {
        let dsup = superop_pair(d, &u).add(&superop_pair(&u, d));
        partials.push(noise_op.matmul(&dsup).scale(eta0));
    }
    for dpair in &dk {
        // d(K_a (x) K_b) = dK_a (x) K_b + K_a (x) dK_b
        let mut dsup = DenseSuperoperator::zeros(2);
        for a in 0..2 {
            for b in 0..2 {
                let x = k[a].kron(&k[b]);
                let dx = dpair[a].kron(&k[b]).add(&k[a].kron(&dpair[b]));
                dsup = dsup.add(&superop_pair(&dx, &x)).add(&superop_pair(&x, &dx));
            }
        }
        partials.push(noise_op.matmul(&dsup).scale(eta1));
    }
    ChannelJacobian { value, partials }
}

/// Sampling overhead `|eta0| + |eta1|` of one channel.
pub fn gamma_of(params: &ChannelParams) -> f64 {
    params.eta0().abs() + params.eta1.abs()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::pauli::{choi_reshape, VectorizedOperator};
    use crate::random::{random_density, seeded};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn min_choi_eigenvalue(s: &DenseSuperoperator) -> f64 {
        choi_reshape(s).unwrap().eigenvalues().unwrap()[0]
    }

    fn swap() -> DenseOperator {
        DenseOperator::from_fn(2, |i, j| {
            let sw = ((j & 1) << 1) | (j >> 1);
            if i == sw {
                c(1.0)
            } else {
                c(0.0)
            }
        })
    }

    #[test]
    fn one_qubit_unitary_examples() {
        assert!(one_qubit_unitary([0.0; 3]).max_abs_diff(&DenseOperator::identity(1)) < 1e-15);
        let v = one_qubit_unitary([0.0, PI, 0.0]);
        assert!(v.get(0, 0).norm() < 1e-15);
        assert!((v.get(1, 0).norm() - 1.0).abs() < 1e-15);
        assert!(one_qubit_unitary([0.3, -1.2, 2.5]).is_unitary(1e-14));
    }

    #[test]
    fn zz_dressed_examples() {
        let id = zz_dressed_unitary(&UnitaryParams::default());
        assert!(id.max_abs_diff(&DenseOperator::identity(2)) < 1e-15);

        let u = zz_dressed_unitary(&UnitaryParams { alpha: PI / 4.0, ..Default::default() });
        let m = C64::from_polar(1.0, -PI / 4.0);
        let p = C64::from_polar(1.0, PI / 4.0);
        for (k, want) in [m, p, p, m].into_iter().enumerate() {
            assert!((u.get(k, k) - want).norm() < 1e-15);
        }
        assert!(u.max_abs_diff(&DenseOperator::from_fn(2, |i, j| if i == j { u.get(i, i) } else { c(0.0) })) < 1e-15);
    }

    #[test]
    fn measure_prepare_examples() {
        // prepare |0> after outcome |0>, |1> after outcome |1>: dephasing
        let deph = measure_prepare_channel(&MeasurePrepParams {
            kappa_2: [0.0, PI, 0.0],
            ..Default::default()
        });
        let rho = DenseOperator::from_vec(1, vec![c(0.4), C64::new(0.1, 0.3), C64::new(0.1, -0.3), c(0.6)]).unwrap();
        let out = deph.apply(&VectorizedOperator::from_operator(&rho)).to_operator();
        assert!(out.get(0, 1).norm() < 1e-15 && out.get(1, 0).norm() < 1e-15);
        assert!((out.get(0, 0) - c(0.4)).norm() < 1e-15);
        assert!((out.get(1, 1) - c(0.6)).norm() < 1e-15);

        // identical preparations: constant channel
        let k = [0.4, 1.1, -0.7];
        let cst = measure_prepare_channel(&MeasurePrepParams { kappa_1: k, kappa_2: k, kappa_3: [0.9, 0.2, 0.3] });
        let v = one_qubit_unitary(k);
        let target = outer(column(&v, 0), column(&v, 0));
        let mut r = seeded(4);
        for _ in 0..3 {
            let rho = random_density(1, &mut r);
            let out = cst.apply(&VectorizedOperator::from_operator(&rho)).to_operator();
            assert!(out.max_abs_diff(&target) < 1e-14);
        }
    }

    #[test]
    fn depolarizing_examples() {
        let n = QubitCount::new(2).unwrap();
        let id = depolarizing_channel(NoiseModel::noiseless(), n, 0).unwrap();
        assert_eq!(id, DenseSuperoperator::identity(2));

        let full = depolarizing_channel(NoiseModel::new(15.0 / 16.0).unwrap(), n, 0).unwrap();
        let mut r = seeded(9);
        let rho = random_density(2, &mut r);
        let out = full.apply(&VectorizedOperator::from_operator(&rho)).to_operator();
        assert!(out.max_abs_diff(&DenseOperator::identity(2).scale(c(0.25))) < 1e-15);

        // L = 4: only the pair (3, 0) is depolarized.
        let n4 = QubitCount::new(4).unwrap();
        let ch = depolarizing_channel(NoiseModel::new(15.0 / 16.0).unwrap(), n4, 3).unwrap();
        let a = random_density(1, &mut r);
        let b = random_density(1, &mut r);
        let cc = random_density(1, &mut r);
        let d = random_density(1, &mut r);
        let rho = a.kron(&b).kron(&cc).kron(&d);
        let out = ch.apply(&VectorizedOperator::from_operator(&rho)).to_operator();
        let half = DenseOperator::identity(1).scale(c(0.5));
        let want = half.kron(&b).kron(&cc).kron(&half);
        assert!(out.max_abs_diff(&want) < 1e-15);

        let weak = depolarizing_channel(NoiseModel::new(0.01).unwrap(), n, 0).unwrap();
        assert!(weak.is_trace_preserving(1e-12));
        assert!(min_choi_eigenvalue(&weak) >= -1e-12);

        assert!(NoiseModel::new(-0.1).is_err());
        assert!(NoiseModel::new(0.95).is_err());
    }

    #[test]
    fn denoiser_channel_examples() {
        let n = QubitCount::new(2).unwrap();
        let id = denoiser_channel(&ChannelParams::identity(), NoiseModel::noiseless(), n, 0).unwrap();
        assert!(id.max_abs_diff(&DenseSuperoperator::identity(2)) < 1e-15);

        let noise = NoiseModel::new(0.01).unwrap();
        let params = ChannelParams {
            eta1: 0.0,
            unitary: UnitaryParams { alpha: 0.3, kappa_a: [0.1, 0.2, 0.3], kappa_c: [-0.4, 0.5, 0.6] },
            measure: MeasurePrepParams { kappa_1: [1.0, 2.0, 3.0], ..Default::default() },
        };
        let g = denoiser_channel(&params, noise, n, 0).unwrap();
        let oracle = depolarizing_channel(noise, n, 0)
            .unwrap()
            .matmul(&unitary_superop(&zz_dressed_unitary(&params.unitary)));
        assert!(g.max_abs_diff(&oracle) < 1e-15);

        let signed = ChannelParams { eta1: -0.3, ..params };
        assert!((signed.eta0() - 1.3).abs() < 1e-15);
        let g = denoiser_channel(&signed, noise, n, 1).unwrap();
        assert!(g.is_trace_preserving(1e-12));
        assert!(min_choi_eigenvalue(&g) < 0.0);
    }

    #[test]
    fn gamma_examples() {
        let mk = |eta1: f64| ChannelParams { eta1, ..Default::default() };
        assert_eq!(gamma_of(&mk(0.0)), 1.0);
        assert!((gamma_of(&mk(-0.2)) - 1.4).abs() < 1e-15);
        assert_eq!(gamma_of(&mk(0.5)), 1.0);
    }

    #[test]
    fn flat_serialization_has_seventeen_named_reals() {
        let p = ChannelParams::from_array(&std::array::from_fn(|k| k as f64));
        assert_eq!(ChannelParams::from_array(&p.to_array()), p);
        let v: serde_json::Value = serde_json::to_value(p).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), 7);
        let count: usize = obj.values().map(|x| x.as_array().map_or(1, Vec::len)).sum();
        assert_eq!(count, PARAMS_PER_CHANNEL);
        assert_eq!(obj["kappa_3"][2], 16.0);
    }

    fn central_difference(params: &ChannelParams, noise: NoiseModel, k: usize, h: f64) -> DenseSuperoperator {
        let mut plus = params.to_array();
        let mut minus = params.to_array();
        plus[k] += h;
        minus[k] -= h;
        denoiser_local(&ChannelParams::from_array(&plus), noise)
            .sub(&denoiser_local(&ChannelParams::from_array(&minus), noise))
            .scale(0.5 / h)
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let noise = NoiseModel::new(0.02).unwrap();
        let x: [f64; 17] = std::array::from_fn(|k| 0.37 * (k as f64 + 1.0).sin() + 0.1);
        let params = ChannelParams::from_array(&x);
        let jac = denoiser_local_jacobian(&params, noise);
        assert!(jac.value.max_abs_diff(&denoiser_local(&params, noise)) < 1e-14);
        for k in 0..PARAMS_PER_CHANNEL {
            let fd = central_difference(&params, noise, k, 1e-5);
            assert!(jac.partials[k].max_abs_diff(&fd) < 1e-9, "param {k}");
        }
    }

    fn arb_angles<const N: usize>() -> impl Strategy<Value = [f64; N]> {
        prop::array::uniform(-PI..PI).prop_map(|a: [f64; N]| a)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn dressed_gate_is_unitary_and_swap_symmetric(
            alpha in -PI..PI, ka in arb_angles::<3>(), kc in arb_angles::<3>()
        ) {
            let u = zz_dressed_unitary(&UnitaryParams { alpha, kappa_a: ka, kappa_c: kc });
            prop_assert!(u.is_unitary(1e-13));
            let s = swap();
            prop_assert!(s.matmul(&u).matmul(&s).max_abs_diff(&u) < 1e-14);
        }

        #[test]
        fn measure_prepare_is_cptp(k1 in arb_angles::<3>(), k2 in arb_angles::<3>(), k3 in arb_angles::<3>()) {
            let p = MeasurePrepParams { kappa_1: k1, kappa_2: k2, kappa_3: k3 };
            let ks = measure_prepare_kraus(&p);
            let sum = ks[0].adjoint().matmul(&ks[0]).add(&ks[1].adjoint().matmul(&ks[1]));
            prop_assert!(sum.max_abs_diff(&DenseOperator::identity(1)) < 1e-14);
            let ch = measure_prepare_channel(&p);
            prop_assert!(ch.is_trace_preserving(1e-12));
            prop_assert!(min_choi_eigenvalue(&ch) >= -1e-10);
        }

        #[test]
        fn denoiser_is_trace_preserving_and_affine_in_eta(
            x in prop::array::uniform17(-2.0f64..2.0), p in 0.0f64..0.9, t in -1.5f64..1.5
        ) {
            let noise = NoiseModel::new(p).unwrap();
            let mut a = ChannelParams::from_array(&x);
            a.eta1 = 0.2;
            let b = ChannelParams { eta1: -0.7, ..a };
            let ga = denoiser_local(&a, noise);
            let gb = denoiser_local(&b, noise);
            prop_assert!(ga.is_trace_preserving(1e-12));
            prop_assert!(gb.is_trace_preserving(1e-12));
            let mid = ChannelParams { eta1: (1.0 - t) * a.eta1 + t * b.eta1, ..a };
            let interp = ga.scale(1.0 - t).add(&gb.scale(t));
            prop_assert!(denoiser_local(&mid, noise).max_abs_diff(&interp) < 1e-12);
        }
    }
}
