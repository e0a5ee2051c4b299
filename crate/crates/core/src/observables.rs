//! Benchmark observables evaluated exactly by applying supercircuits to
//! vectorized operators.
//!
//! Sites are 0-based. Infinite-temperature quantities start from the
//! vectorized identity, so `(sigma_z_j (x) 1)|1>>` is simply `vec(sigma_z_j)`.

use serde::{Deserialize, Serialize};

use crate::circuits::{stack, GateList};
use crate::error::{Error, Result};
use crate::pauli::{DenseSuperoperator, QubitCount, VectorizedOperator};
use crate::C64;

/// Largest imaginary part tolerated in a quantity that must be real.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    TwoPointZz,
    Otoc,
    DomainWallMagnetization,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub kind: ObservableKind,
    #[serde(default)]
    pub i: usize,
    #[serde(default)]
    pub j: usize,
    pub t: f64,
    #[serde(default = "one")]
    pub n_stack: usize,
}

fn one() -> usize {
    1
}

impl ObservableSpec {
    pub fn validate(&self, n: QubitCount) -> Result<()> {
        for site in [self.i, self.j] {
            if site >= n.get() {
                return Err(Error::SiteOutOfRange { site, width: 1, n: n.get() });
            }
        }
        if self.n_stack == 0 {
            return Err(Error::InvalidArgument("stack count must be at least 1".into()));
        }
        Ok(())
    }
}

/// `<sigma_z>` of site `site` in computational basis state `basis`.
fn z_sign(basis: usize, site: usize, n: usize) -> f64 {
    if basis >> (n - 1 - site) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn diagonal_operator(n: usize, f: impl Fn(usize) -> f64) -> VectorizedOperator {
    let d = 1usize << n;
    let mut data = vec![C64::new(0.0, 0.0); d * d];
    for a in 0..d {
        data[a * d + a] = C64::new(f(a), 0.0);
    }
    VectorizedOperator::from_vec(n, data).expect("square")
}

/// `vec(sigma_z)` on `site`.
pub fn sigma_z(n: QubitCount, site: usize) -> Result<VectorizedOperator> {
    let l = n.get();
    if site >= l {
        return Err(Error::SiteOutOfRange { site, width: 1, n: l });
    }
    Ok(diagonal_operator(l, |a| z_sign(a, site, l)))
}

/// A linear functional `v -> sum_k w_k v_k` on vectorized operators.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFunctional {
    n: usize,
    weights: Vec<C64>,
}

impl LinearFunctional {
    /// `X -> tr(O X) / norm` for a diagonal operator `O` given by its diagonal.
    pub fn diagonal_trace(n: QubitCount, diag: impl Fn(usize) -> f64, norm: f64) -> Self {
        let l = n.get();
        let d = 1usize << l;
        let mut weights = vec![C64::new(0.0, 0.0); d * d];
        for a in 0..d {
            weights[a * d + a] = C64::new(diag(a) / norm, 0.0);
        }
        Self { n: l, weights }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn eval(&self, v: &VectorizedOperator) -> C64 {
        debug_assert_eq!(v.n_qubits(), self.n);
        self.weights.iter().zip(v.data()).map(|(w, x)| w * x).sum()
    }
}

/// `X -> tr(sigma_z_i X) / 2^L`.
pub fn zz_functional(n: QubitCount, i: usize) -> Result<LinearFunctional> {
    let l = n.get();
    if i >= l {
        return Err(Error::SiteOutOfRange { site: i, width: 1, n: l });
    }
    Ok(LinearFunctional::diagonal_trace(n, |a| z_sign(a, i, l), n.dim() as f64))
}

/// Sign `(-1)^floor(2 i / L)` of 1-based site `i` in the domain-wall sum.
pub fn domain_wall_sign(site: usize, n: QubitCount) -> f64 {
    let one_based = site + 1;
    if (2 * one_based / n.get()) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `X -> sum_i (-1)^floor(2i/L) tr(sigma_z_i X)`.
pub fn domain_wall_functional(n: QubitCount) -> LinearFunctional {
    let l = n.get();
    LinearFunctional::diagonal_trace(n, |a| (0..l).map(|s| domain_wall_sign(s, n) * z_sign(a, s, l)).sum(), 1.0)
}

/// Computational basis index of the domain wall: sites `0..L/2` flipped to `|1>`.
pub fn domain_wall_basis_index(n: QubitCount) -> usize {
    let l = n.get();
    ((1usize << (l / 2)) - 1) << (l - l / 2)
}

/// `|dw><dw|` as a vectorized operator.
pub fn domain_wall_state(n: QubitCount) -> VectorizedOperator {
    let k = domain_wall_basis_index(n);
    diagonal_operator(n.get(), |a| if a == k { 1.0 } else { 0.0 })
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOLERANCE || !z.re.is_finite() {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// `tr(sigma_z_i S[sigma_z_j]) / 2^L`.
pub fn two_point_zz(circuit: &GateList, i: usize, j: usize) -> Result<f64> {
    let n = circuit.n_qubits();
    let out = circuit.apply(&sigma_z(n, j)?)?;
    real_part(zz_functional(n, i)?.eval(&out))
}

/// [`two_point_zz`] for an already composed supercircuit.
pub fn two_point_zz_dense(s: &DenseSuperoperator, i: usize, j: usize) -> Result<f64> {
    let n = QubitCount::new(s.n_qubits())?;
    let out = s.apply(&sigma_z(n, j)?);
    real_part(zz_functional(n, i)?.eval(&out))
}

/// `Re <<1|(sz_j (x) 1) S(-t) (sz_i (x) sz_i*) S(t) (sz_j (x) 1)|1>> / 2^L`.
pub fn otoc(forward: &GateList, backward: &GateList, i: usize, j: usize) -> Result<f64> {
    let n = forward.n_qubits();
    if backward.n_qubits() != n {
        return Err(Error::Shape(format!("forward on {} qubits, backward on {}", n, backward.n_qubits())));
    }
    let l = n.get();
    if i >= l {
        return Err(Error::SiteOutOfRange { site: i, width: 1, n: l });
    }
    let mut v = forward.apply(&sigma_z(n, j)?)?;
    // X -> sz_i X sz_i flips the sign of entries whose row and column differ at site i.
    let d = n.dim();
    for (k, x) in v.data_mut().iter_mut().enumerate() {
        let (a, b) = (k / d, k % d);
        *x *= z_sign(a, i, l) * z_sign(b, i, l);
    }
    let v = backward.apply(&v)?;
    Ok(zz_functional(n, j)?.eval(&v).re)
}

/// Domain-wall magnetization after `n_stack` repetitions of `circuit`.
pub fn domain_wall_magnetization(circuit: &GateList, n_stack: usize) -> Result<f64> {
    if n_stack == 0 {
        return Err(Error::InvalidArgument("stack count must be at least 1".into()));
    }
    let n = circuit.n_qubits();
    let mut v = domain_wall_state(n);
    for _ in 0..n_stack {
        v = circuit.apply(&v)?;
    }
    real_part(domain_wall_functional(n).eval(&v))
}

/// Evaluates `spec` on `circuit` (and `backward` for the OTOC).
pub fn evaluate(spec: &ObservableSpec, circuit: &GateList, backward: Option<&GateList>) -> Result<f64> {
    spec.validate(circuit.n_qubits())?;
    let stacked = stack(circuit, spec.n_stack)?;
    match spec.kind {
        ObservableKind::TwoPointZz => two_point_zz(&stacked, spec.i, spec.j),
        ObservableKind::DomainWallMagnetization => domain_wall_magnetization(circuit, spec.n_stack),
        ObservableKind::Otoc => {
            let back = backward.ok_or_else(|| Error::InvalidArgument("OTOC needs a backward circuit".into()))?;
            otoc(&stacked, &stack(back, spec.n_stack)?, spec.i, spec.j)
        }
    }
}
