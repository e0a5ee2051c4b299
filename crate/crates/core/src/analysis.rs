//! Spectral and entropic diagnostics of composed supercircuits.

use faer::MatRef;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{choi_reshape, hermitian_eigenvalues, DenseSuperoperator};
use crate::C64;

/// Negative Choi eigenvalues below this signal a non-CPTP input.
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted by modulus, largest first.
    pub eigenvalues: Vec<C64>,
    pub mean_unit_circle_deviation: f64,
    pub spectral_radius: f64,
}

pub fn spectrum(s: &DenseSuperoperator) -> Result<SpectrumReport> {
    let d = s.dim();
    let mut eigenvalues = MatRef::from_row_major_slice(s.data(), d, d)
        .eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(SpectrumReport::from_eigenvalues(eigenvalues))
}

impl SpectrumReport {
    pub fn from_eigenvalues(eigenvalues: Vec<C64>) -> Self {
        let n = eigenvalues.len().max(1) as f64;
        let mean_unit_circle_deviation = eigenvalues.iter().map(|l| (l.norm() - 1.0).abs()).sum::<f64>() / n;
        let spectral_radius = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        Self { eigenvalues, mean_unit_circle_deviation, spectral_radius }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitCircleComparison {
    pub noisy_deviation: f64,
    pub denoiser_deviation: f64,
    pub denoised_deviation: f64,
    pub denoiser_spectral_radius: f64,
    pub denoiser_outside_unit_circle: bool,
    pub denoised_closer_than_noisy: bool,
}

pub fn unit_circle_metrics(noisy: &SpectrumReport, denoiser: &SpectrumReport, denoised: &SpectrumReport) -> Result<UnitCircleComparison> {
    let len = noisy.eigenvalues.len();
    if denoiser.eigenvalues.len() != len || denoised.eigenvalues.len() != len {
        return Err(Error::Shape("spectra of different dimensions".into()));
    }
    Ok(UnitCircleComparison {
        noisy_deviation: noisy.mean_unit_circle_deviation,
        denoiser_deviation: denoiser.mean_unit_circle_deviation,
        denoised_deviation: denoised.mean_unit_circle_deviation,
        denoiser_spectral_radius: denoiser.spectral_radius,
        denoiser_outside_unit_circle: denoiser.spectral_radius > 1.0,
        denoised_closer_than_noisy: denoised.mean_unit_circle_deviation < noisy.mean_unit_circle_deviation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// `-tr(psi ln psi)` of the normalized Choi state, in nats.
    pub full_choi_entropy: f64,
    /// Entropy of the Choi state reduced to both legs of the first `L/2` sites.
    pub half_chain_entropy: f64,
    /// Total weight of negative eigenvalues clipped before taking logarithms.
    pub full_clipped_weight: f64,
    pub half_clipped_weight: f64,
    /// Whether any eigenvalue fell below `-POSITIVITY_TOLERANCE`.
    pub non_positive: bool,
}

/// Entropy with negative eigenvalues clipped to zero; returns `(S, clipped weight, min eigenvalue)`.
fn clipped_entropy(eigenvalues: &[f64]) -> (f64, f64, f64) {
    let mut s = 0.0;
    let mut clipped = 0.0;
    let mut min = f64::INFINITY;
    for &l in eigenvalues {
        min = min.min(l);
        if l > 0.0 {
            s -= l * l.ln();
        } else {
            clipped -= l;
        }
    }
    (s, clipped, min)
}

/// Reduces a Choi state on `(out, in)` legs of `n` sites to both legs of sites `0..keep`.
fn reduce_choi(data: &[C64], n: usize, keep: usize) -> Vec<C64> {
    let traced = n - keep;
    let dk = 1usize << keep;
    let dt = 1usize << traced;
    let dim = 1usize << (2 * n);
    let red_dim = dk * dk;
    let mut out = vec![C64::new(0.0, 0.0); red_dim * red_dim];
    // row index = a * 2^n + b, with site s at bit n-1-s of a (output) and b (input)
    let join = |kept: usize, rest: usize| (kept << traced) | rest;
    for ra in 0..dk {
        for rb in 0..dk {
            for ca in 0..dk {
                for cb in 0..dk {
                    let mut acc = C64::new(0.0, 0.0);
                    for ta in 0..dt {
                        for tb in 0..dt {
                            let r = (join(ra, ta) << n) | join(rb, tb);
                            let c = (join(ca, ta) << n) | join(cb, tb);
                            acc += data[r * dim + c];
                        }
                    }
                    out[(ra * dk + rb) * red_dim + ca * dk + cb] = acc;
                }
            }
        }
    }
    out
}

pub fn channel_entropy(s: &DenseSuperoperator) -> Result<EntropyReport> {
    let n = s.n_qubits();
    let choi = choi_reshape(s)?;
    let (full, full_clipped, full_min) = clipped_entropy(&choi.eigenvalues()?);
    let reduced = reduce_choi(choi.data(), n, n / 2);
    let red_dim = 1usize << (2 * (n / 2));
    let (half, half_clipped, half_min) = clipped_entropy(&hermitian_eigenvalues(&reduced, red_dim)?);
    Ok(EntropyReport {
        full_choi_entropy: full,
        half_chain_entropy: half,
        full_clipped_weight: full_clipped,
        half_clipped_weight: half_clipped,
        non_positive: full_min < -POSITIVITY_TOLERANCE || half_min < -POSITIVITY_TOLERANCE,
    })
}
