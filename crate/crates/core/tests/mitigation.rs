use denoiser_core::channels::NoiseModel;
use denoiser_core::circuits::{build_denoiser, build_trotter, DenoiserSpec, GateList, TrotterSpec};
use denoiser_core::observables::{domain_wall_magnetization, otoc};
use denoiser_core::optimizer::{optimize, transfer, CostContext, OptimizerConfig};
use denoiser_core::QubitCount;

fn q(n: usize) -> QubitCount {
    QubitCount::new(n).unwrap()
}

/// Optimizes on four sites and transfers to `l`.
fn denoiser(l: usize, t: f64, m_trot: usize, depth: usize, noise: NoiseModel) -> DenoiserSpec {
    let ctx = CostContext::from_trotter(&TrotterSpec::new(q(4), t, m_trot, noise).unwrap()).unwrap();
    let cfg = OptimizerConfig { max_iters: 400, ..Default::default() };
    let report = optimize(&ctx, depth, noise, &cfg).unwrap();
    transfer(&report.best_params, q(l))
}

fn circuits(l: usize, t: f64, m_trot: usize, depth: usize, noise: NoiseModel) -> (GateList, GateList, GateList) {
    let spec = TrotterSpec::new(q(l), t, m_trot, noise).unwrap();
    let clean = build_trotter(&spec.noiseless(), false).unwrap();
    let noisy = build_trotter(&spec, true).unwrap();
    let den = noisy.then(&build_denoiser(&denoiser(l, t, m_trot, depth, noise)).unwrap()).unwrap();
    (clean, noisy, den)
}

#[test]
fn denoised_otoc_is_closer_to_noiseless() {
    let noise = NoiseModel::new(0.01).unwrap();
    let (l, t, m_trot) = (6, 1.0, 8);
    let (fc, fn_, fd) = circuits(l, t, m_trot, 2, noise);
    let (bc, bn, bd) = circuits(l, -t, m_trot, 2, noise);
    let i = 2;
    let (mut err_noisy, mut err_den) = (0.0, 0.0);
    for j in 0..l {
        let exact = otoc(&fc, &bc, i, j).unwrap();
        err_noisy += (otoc(&fn_, &bn, i, j).unwrap() - exact).abs();
        err_den += (otoc(&fd, &bd, i, j).unwrap() - exact).abs();
    }
    println!("otoc error noisy {err_noisy:.4} denoised {err_den:.4}");
    assert!(err_den < err_noisy);
}

#[test]
fn denoised_domain_wall_is_closer_to_noiseless() {
    let noise = NoiseModel::new(0.01).unwrap();
    let (clean, noisy, den) = circuits(8, 1.0, 8, 1, noise);
    let exact = domain_wall_magnetization(&clean, 1).unwrap();
    let e_noisy = (domain_wall_magnetization(&noisy, 1).unwrap() - exact).abs();
    let e_den = (domain_wall_magnetization(&den, 1).unwrap() - exact).abs();
    println!("domain wall error noisy {e_noisy:.4} denoised {e_den:.4}");
    assert!(e_den < e_noisy);
}
