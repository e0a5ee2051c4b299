use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use denoiser_core::analysis::{channel_entropy, spectrum, SpectrumReport};
use denoiser_core::channels::{gamma_of, NoiseModel};
use denoiser_core::circuits::{build_denoiser, build_trotter, DenoiserSpec, GateList, TrotterSpec, MAX_COMPOSE_QUBITS};
use denoiser_core::observables::{
    domain_wall_functional, domain_wall_magnetization, domain_wall_state, evaluate, otoc, sigma_z, two_point_zz,
    zz_functional, ObservableKind, ObservableSpec,
};
use denoiser_core::optimizer::{optimize, optimize_from, transfer, CostContext, OptimizationReport, OptimizerConfig};
use denoiser_core::sampler::{hoeffding_samples, run_shots, run_shots_unraveled, ShotRecord};
use denoiser_core::{DenseSuperoperator, QubitCount};

use crate::config::{InitKind, RunConfig, SampledObservable, Task};
use crate::error::{CliError, CliResult};
use crate::output::{
    fingerprint, num, DenoiserFile, OptimizationSummary, RunArtifact, StageReport, Table, TableRecord, Timing,
    SCHEMA_VERSION, SOFTWARE_VERSION,
};

const OBSERVABLE_COLUMNS: [&str; 11] = ["kind", "circuit", "L", "t", "m_trot", "M", "p", "i", "j", "n_stack", "value"];

fn stage_report(stage: &str, l: usize, baseline: f64, r: &OptimizationReport) -> StageReport {
    StageReport {
        stage: stage.into(),
        l,
        iterations: r.iterations,
        converged: r.converged,
        baseline_epsilon: baseline,
        final_epsilon: r.final_epsilon,
        epsilon_trace: r.epsilon_trace.clone(),
        grad_norm_trace: r.grad_norm_trace.clone(),
    }
}

/// Optimizes a depth-`depth` denoiser for the configured chain at time `t`,
/// going through the shorter `optimize_L` chain when one is configured.
pub fn optimize_denoiser(
    config: &RunConfig,
    t: f64,
    depth: usize,
    noise: NoiseModel,
) -> CliResult<(DenoiserSpec, OptimizationSummary)> {
    if depth == 0 {
        return Err(CliError::Config("denoiser.M must be at least 1 to optimize".into()));
    }
    let n = config.n()?;
    let lo = config.denoiser.optimize_l.unwrap_or(n.get());
    if lo > MAX_COMPOSE_QUBITS {
        return Err(CliError::Config(format!(
            "L = {lo} is too large to optimize directly; set denoiser.optimize_L to at most {MAX_COMPOSE_QUBITS}"
        )));
    }
    let small = QubitCount::new(lo)?;
    let opt = config.optimizer_config();
    let ctx = CostContext::from_trotter(&config.trotter_spec_on(small, t, noise)?)?;
    let report = match config.denoiser.init {
        InitKind::Random => optimize(&ctx, depth, noise, &opt)?,
        InitKind::Identity => optimize_from(&ctx, &DenoiserSpec::identity(small, depth, noise), &opt)?,
    };
    let mut stages = vec![stage_report("optimize", lo, ctx.baseline_epsilon(), &report)];
    let mut spec = transfer(&report.best_params, n);
    let (baseline, final_epsilon) = if small == n {
        (Some(ctx.baseline_epsilon()), Some(report.final_epsilon))
    } else if n.get() <= MAX_COMPOSE_QUBITS {
        drop(ctx);
        let full = CostContext::from_trotter(&config.trotter_spec_on(n, t, noise)?)?;
        let base = full.baseline_epsilon();
        if config.denoiser.refine_iters > 0 {
            let refine = OptimizerConfig { max_iters: config.denoiser.refine_iters, ..opt };
            let r = optimize_from(&full, &spec, &refine)?;
            stages.push(stage_report("refine", n.get(), base, &r));
            spec = r.best_params;
            (Some(base), Some(r.final_epsilon))
        } else {
            (Some(base), Some(full.epsilon(&spec)?))
        }
    } else {
        (None, None)
    };
    Ok((spec, OptimizationSummary { t, depth, stages, baseline_epsilon: baseline, final_epsilon }))
}

/// Supplies denoisers per `(t, M)`: from a parameter file when it matches,
/// otherwise by optimizing once and caching.
pub struct Denoisers<'a> {
    config: &'a RunConfig,
    loaded: Option<(DenoiserFile, PathBuf)>,
    cache: Vec<(u64, usize, DenoiserSpec)>,
    summaries: Vec<OptimizationSummary>,
}

impl<'a> Denoisers<'a> {
    pub fn new(config: &'a RunConfig, path: Option<&Path>) -> CliResult<Self> {
        let path = path.map(Path::to_path_buf).or_else(|| config.denoiser.load.clone());
        let loaded = match path {
            Some(p) => {
                let file = DenoiserFile::load(&p)?;
                if file.l != config.system.l {
                    return Err(CliError::Config(format!(
                        "denoiser file {} is for L = {}, but the config has L = {}",
                        p.display(),
                        file.l,
                        config.system.l
                    )));
                }
                let expected = fingerprint(&config.trotter_spec(config.trotter.t)?);
                if file.fingerprint != expected {
                    return Err(CliError::Config(format!(
                        "denoiser file {} was optimized for a different circuit (fingerprint {}, config {})",
                        p.display(),
                        file.fingerprint,
                        expected
                    )));
                }
                file.spec()?;
                Some((file, p))
            }
            None => None,
        };
        Ok(Self { config, loaded, cache: Vec::new(), summaries: Vec::new() })
    }

    pub fn get(&mut self, t: f64, depth: usize) -> CliResult<DenoiserSpec> {
        let n = self.config.n()?;
        let noise = self.config.noise()?;
        if depth == 0 {
            return Ok(DenoiserSpec::identity(n, 0, noise));
        }
        if let Some((file, _)) = &self.loaded {
            if file.depth == depth && file.fingerprint == fingerprint(&self.config.trotter_spec(t)?) {
                return file.spec();
            }
        }
        if let Some((_, _, spec)) = self.cache.iter().find(|(tb, d, _)| *tb == t.to_bits() && *d == depth) {
            return Ok(spec.clone());
        }
        eprintln!("optimizing M = {depth} denoiser for t = {t}");
        let (spec, summary) = optimize_denoiser(self.config, t, depth, noise)?;
        self.summaries.push(summary);
        self.cache.push((t.to_bits(), depth, spec.clone()));
        Ok(spec)
    }

    pub fn loaded_file(&self) -> Option<&DenoiserFile> {
        self.loaded.as_ref().map(|(f, _)| f)
    }

    pub fn loaded_path(&self) -> Option<&Path> {
        self.loaded.as_ref().map(|(_, p)| p.as_path())
    }

    pub fn into_summaries(self) -> Vec<OptimizationSummary> {
        self.summaries
    }
}

struct Circuits {
    noiseless: GateList,
    noisy: GateList,
}

impl Circuits {
    fn new(spec: &TrotterSpec) -> CliResult<Self> {
        Ok(Self { noiseless: build_trotter(&spec.noiseless(), false)?, noisy: build_trotter(spec, true)? })
    }

    /// `noisy` followed by `denoiser`; the bare noisy circuit at depth 0.
    fn denoised(&self, denoiser: &DenoiserSpec) -> CliResult<GateList> {
        if denoiser.depth == 0 {
            return Ok(self.noisy.clone());
        }
        Ok(self.noisy.then(&build_denoiser(denoiser)?)?)
    }
}

fn circuit_label(depth: usize) -> &'static str {
    if depth == 0 {
        "noisy"
    } else {
        "denoised"
    }
}

struct Run<'a> {
    config: &'a RunConfig,
    command: &'static str,
    started: Instant,
    tables: Vec<TableRecord>,
}

impl<'a> Run<'a> {
    fn start(config: &'a RunConfig, command: &'static str) -> CliResult<Self> {
        std::fs::create_dir_all(&config.output).map_err(CliError::io(&config.output))?;
        Ok(Self { config, command, started: Instant::now(), tables: Vec::new() })
    }

    fn write(&mut self, table: &Table) -> CliResult<()> {
        let record = table.write(&self.config.output, self.command, self.config)?;
        eprintln!("wrote {} ({} rows)", record.file.display(), record.rows);
        self.tables.push(record);
        Ok(())
    }

    fn finish(self, denoisers: Option<Denoisers<'_>>, extra: Extra) -> CliResult<RunArtifact> {
        let (loaded, loaded_path, mut optimizations) = match denoisers {
            Some(d) => (d.loaded_file().cloned(), d.loaded_path().map(Path::to_path_buf), d.into_summaries()),
            None => (None, None, Vec::new()),
        };
        optimizations.extend(extra.optimizations);
        let artifact = RunArtifact {
            schema_version: SCHEMA_VERSION,
            software_version: SOFTWARE_VERSION.into(),
            command: self.command.into(),
            seed: self.config.seed,
            config: self.config.clone(),
            denoiser: extra.denoiser.or(loaded),
            denoiser_file: extra.denoiser_file.or(loaded_path),
            optimizations,
            tables: self.tables,
            gamma: extra.gamma,
            hoeffding_bound: extra.hoeffding_bound,
            estimator: extra.estimator,
            timing: Timing { wall_seconds: self.started.elapsed().as_secs_f64() },
        };
        let path = artifact.save(&self.config.output)?;
        eprintln!("wrote {}", path.display());
        Ok(artifact)
    }
}

#[derive(Default)]
struct Extra {
    denoiser: Option<DenoiserFile>,
    denoiser_file: Option<PathBuf>,
    optimizations: Vec<OptimizationSummary>,
    gamma: Option<f64>,
    hoeffding_bound: Option<u64>,
    estimator: Option<denoiser_core::sampler::EstimatorResult>,
}

fn budget(config: &RunConfig, gamma: f64) -> CliResult<u64> {
    Ok(hoeffding_samples(gamma, config.sampler.delta, config.sampler.omega)?)
}

/// Optimizes the configured denoiser and writes `denoiser.json` and the
/// cost trace.
pub fn cmd_optimize(config: &RunConfig) -> CliResult<RunArtifact> {
    let mut run = Run::start(config, "optimize")?;
    let target = config.trotter_spec(config.trotter.t)?;
    let (spec, summary) = optimize_denoiser(config, target.t, config.denoiser.depth, target.noise)?;

    let mut trace = Table::new("optimization", &["stage", "L", "iteration", "epsilon", "best_epsilon", "grad_norm"]);
    for stage in &summary.stages {
        let mut best = f64::INFINITY;
        for (k, (e, g)) in stage.epsilon_trace.iter().zip(&stage.grad_norm_trace).enumerate() {
            best = best.min(*e);
            trace.push(vec![stage.stage.clone(), stage.l.to_string(), k.to_string(), num(*e), num(best), num(*g)]);
        }
    }
    run.write(&trace)?;

    let file = DenoiserFile::new(&spec, &target);
    let path = config.output.join("denoiser.json");
    file.save(&path)?;
    eprintln!(
        "epsilon {} (no denoiser {}), gamma {:.6}",
        summary.final_epsilon.map_or("n/a".into(), num),
        summary.baseline_epsilon.map_or("n/a".into(), num),
        spec.gamma()
    );
    let gamma = spec.gamma();
    let extra = Extra {
        denoiser: Some(file),
        denoiser_file: Some(path),
        optimizations: vec![summary],
        gamma: Some(gamma),
        hoeffding_bound: Some(budget(config, gamma)?),
        estimator: None,
    };
    run.finish(None, extra)
}

fn observable_row(
    config: &RunConfig,
    kind: &str,
    circuit: &str,
    t: f64,
    depth: usize,
    sites: (Option<usize>, Option<usize>),
    n_stack: usize,
    value: f64,
) -> Vec<String> {
    let site = |s: Option<usize>| s.map_or(String::new(), |s| s.to_string());
    vec![
        kind.into(),
        circuit.into(),
        config.system.l.to_string(),
        num(t),
        config.trotter.m_trot.to_string(),
        depth.to_string(),
        num(config.noise.p),
        site(sites.0),
        site(sites.1),
        n_stack.to_string(),
        num(value),
    ]
}

fn observable_table(config: &RunConfig, task: &Task, denoisers: &mut Denoisers<'_>) -> CliResult<Table> {
    let mid = config.middle_site();
    let default_depths = || vec![0, config.denoiser.depth];
    let times_or = |times: &Option<Vec<f64>>| times.clone().unwrap_or_else(|| vec![config.trotter.t]);
    let mut table = Table::new(task.name(), &OBSERVABLE_COLUMNS);
    match task {
        Task::TwoPointZz { i, j, times, depths, n_stack } => {
            let (i, j) = (i.unwrap_or(mid), j.unwrap_or(mid));
            let depths = depths.clone().unwrap_or_else(default_depths);
            for t in times_or(times) {
                let obs = ObservableSpec { kind: ObservableKind::TwoPointZz, i, j, t, n_stack: *n_stack };
                let circuits = Circuits::new(&config.trotter_spec(t)?)?;
                let v = evaluate(&obs, &circuits.noiseless, None)?;
                table.push(observable_row(config, "two_point_zz", "noiseless", t, 0, (Some(i), Some(j)), *n_stack, v));
                for &m in &depths {
                    let c = circuits.denoised(&denoisers.get(t, m)?)?;
                    let v = evaluate(&obs, &c, None)?;
                    table.push(observable_row(config, "two_point_zz", circuit_label(m), t, m, (Some(i), Some(j)), *n_stack, v));
                }
            }
        }
        Task::Otoc { i, sites, times, depths } => {
            let i = i.unwrap_or(mid);
            let sites = sites.clone().unwrap_or_else(|| (0..config.system.l).collect());
            let depths = depths.clone().unwrap_or_else(default_depths);
            for t in times_or(times) {
                let fwd = Circuits::new(&config.trotter_spec(t)?)?;
                let bwd = Circuits::new(&config.trotter_spec(-t)?)?;
                for &j in &sites {
                    let v = otoc(&fwd.noiseless, &bwd.noiseless, i, j)?;
                    table.push(observable_row(config, "otoc", "noiseless", t, 0, (Some(i), Some(j)), 1, v));
                }
                for &m in &depths {
                    let f = fwd.denoised(&denoisers.get(t, m)?)?;
                    let b = bwd.denoised(&denoisers.get(-t, m)?)?;
                    for &j in &sites {
                        let v = otoc(&f, &b, i, j)?;
                        table.push(observable_row(config, "otoc", circuit_label(m), t, m, (Some(i), Some(j)), 1, v));
                    }
                }
            }
        }
        Task::DomainWallMagnetization { times, depths, n_stack } => {
            let depths = depths.clone().unwrap_or_else(default_depths);
            let kind = "domain_wall_magnetization";
            for t in times_or(times) {
                let circuits = Circuits::new(&config.trotter_spec(t)?)?;
                let v = domain_wall_magnetization(&circuits.noiseless, *n_stack)?;
                table.push(observable_row(config, kind, "noiseless", t, 0, (None, None), *n_stack, v));
                for &m in &depths {
                    let c = circuits.denoised(&denoisers.get(t, m)?)?;
                    let v = domain_wall_magnetization(&c, *n_stack)?;
                    table.push(observable_row(config, kind, circuit_label(m), t, m, (None, None), *n_stack, v));
                }
            }
        }
        Task::Stacking { i, j, max_n } => {
            let (i, j) = (i.unwrap_or(mid), j.unwrap_or(mid));
            let t = config.trotter.t;
            let m = config.denoiser.depth;
            let circuits = Circuits::new(&config.trotter_spec(t)?)?;
            let denoised = circuits.denoised(&denoisers.get(t, m)?)?;
            for n_stack in 1..=*max_n {
                let obs = ObservableSpec { kind: ObservableKind::TwoPointZz, i, j, t, n_stack };
                for (label, depth, c) in
                    [("noiseless", 0, &circuits.noiseless), ("noisy", 0, &circuits.noisy), (circuit_label(m), m, &denoised)]
                {
                    let v = evaluate(&obs, c, None)?;
                    table.push(observable_row(config, "two_point_zz", label, t, depth, (Some(i), Some(j)), n_stack, v));
                }
            }
        }
        Task::Spectrum {} | Task::Entropy {} | Task::Overhead {} => unreachable!("analysis task"),
    }
    Ok(table)
}

/// Evaluates every observable task of the config. Denoisers come from
/// `denoiser` (or `denoiser.load`) when they match, else are optimized.
pub fn cmd_evaluate(config: &RunConfig, denoiser: Option<&Path>) -> CliResult<RunArtifact> {
    let mut run = Run::start(config, "evaluate")?;
    let mut denoisers = Denoisers::new(config, denoiser)?;
    let tasks: Vec<&Task> = config.tasks.iter().filter(|t| !t.is_analysis()).collect();
    if tasks.is_empty() {
        return Err(CliError::Config("no observable tasks configured (two_point_zz, otoc, domain_wall_magnetization, stacking)".into()));
    }
    for task in tasks {
        let table = observable_table(config, task, &mut denoisers)?;
        run.write(&table)?;
    }
    run.finish(Some(denoisers), Extra::default())
}

fn spectrum_table(name: &str, report: &SpectrumReport) -> Table {
    let mut t = Table::new(name, &["index", "re", "im", "modulus"]);
    for (k, l) in report.eigenvalues.iter().enumerate() {
        t.push(vec![k.to_string(), num(l.re), num(l.im), num(l.norm())]);
    }
    t
}

/// Spectra, Choi entropies and sampling overheads of the configured
/// noisy, denoiser and denoised supercircuits.
pub fn cmd_analyze(config: &RunConfig, denoiser: Option<&Path>) -> CliResult<RunArtifact> {
    let mut run = Run::start(config, "analyze")?;
    let mut denoisers = Denoisers::new(config, denoiser)?;
    let mut tasks: Vec<Task> = config.tasks.iter().filter(|t| t.is_analysis()).cloned().collect();
    if tasks.is_empty() {
        tasks = vec![Task::Spectrum {}, Task::Entropy {}, Task::Overhead {}];
    }
    let n = config.n()?;
    let t = config.trotter.t;
    let depth = config.denoiser.depth;
    if depth == 0 {
        return Err(CliError::Config("analysis needs a denoiser with M >= 1".into()));
    }
    let spec = denoisers.get(t, depth)?;
    let needs_matrices = tasks.iter().any(|t| matches!(t, Task::Spectrum {} | Task::Entropy {}));
    if needs_matrices && n.get() > MAX_COMPOSE_QUBITS {
        return Err(CliError::Config(format!("spectrum and entropy need L <= {MAX_COMPOSE_QUBITS}")));
    }
    let matrices = if needs_matrices {
        let circuits = Circuits::new(&config.trotter_spec(t)?)?;
        let noisy = circuits.noisy.compose()?;
        let d = build_denoiser(&spec)?.compose()?;
        let denoised = d.matmul(&noisy);
        Some([("noiseless", circuits.noiseless.compose()?), ("noisy", noisy), ("denoiser", d), ("denoised", denoised)])
    } else {
        None
    };
    let matrices: Option<&[(&str, DenseSuperoperator); 4]> = matrices.as_ref();

    for task in &tasks {
        match task {
            Task::Spectrum {} => {
                let mut summary = Table::new("spectrum_summary", &["circuit", "mean_unit_circle_deviation", "spectral_radius"]);
                for (label, s) in matrices.expect("composed") {
                    let report = spectrum(s)?;
                    summary.push(vec![label.to_string(), num(report.mean_unit_circle_deviation), num(report.spectral_radius)]);
                    if *label != "noiseless" {
                        run.write(&spectrum_table(&format!("spectrum_{label}"), &report))?;
                    }
                }
                run.write(&summary)?;
            }
            Task::Entropy {} => {
                let mut table = Table::new(
                    "entropy",
                    &["circuit", "full_choi_entropy", "half_chain_entropy", "full_clipped_weight", "half_clipped_weight", "non_positive"],
                );
                for (label, s) in matrices.expect("composed") {
                    let e = channel_entropy(s)?;
                    table.push(vec![
                        label.to_string(),
                        num(e.full_choi_entropy),
                        num(e.half_chain_entropy),
                        num(e.full_clipped_weight),
                        num(e.half_clipped_weight),
                        e.non_positive.to_string(),
                    ]);
                }
                run.write(&table)?;
            }
            Task::Overhead {} => {
                let mut table = Table::new("overhead", &["layer", "parity", "eta0", "eta1", "alpha", "gamma_channel", "gates"]);
                let gates = n.get() / 2;
                for (k, p) in spec.layers.iter().enumerate() {
                    table.push(vec![
                        k.to_string(),
                        (k % 2).to_string(),
                        num(p.eta0()),
                        num(p.eta1),
                        num(p.unitary.alpha),
                        num(gamma_of(p)),
                        gates.to_string(),
                    ]);
                }
                run.write(&table)?;
            }
            _ => unreachable!("observable task"),
        }
    }
    let gamma = spec.gamma();
    let extra = Extra { gamma: Some(gamma), hoeffding_bound: Some(budget(config, gamma)?), ..Extra::default() };
    run.finish(Some(denoisers), extra)
}

/// Monte Carlo estimate of the configured observable from `n_shots`
/// signed denoiser realizations; defaults to the Hoeffding budget.
pub fn cmd_sample(config: &RunConfig, denoiser: Option<&Path>, n_shots: Option<u64>) -> CliResult<RunArtifact> {
    if n_shots == Some(0) {
        return Err(denoiser_core::Error::EmptyBudget.into());
    }
    let mut run = Run::start(config, "sample")?;
    let mut denoisers = Denoisers::new(config, denoiser)?;
    let n = config.n()?;
    let t = config.trotter.t;
    let depth = config.denoiser.depth;
    let spec = denoisers.get(t, depth)?;
    let trotter = config.trotter_spec(t)?;
    let circuits = Circuits::new(&trotter)?;
    let gamma = spec.gamma();
    let bound = budget(config, gamma)?;
    let n_shots = n_shots.unwrap_or(bound);
    eprintln!("{n_shots} shots; Hoeffding budget {bound} for delta {} at omega {} (gamma {gamma:.6})", config.sampler.delta, config.sampler.omega);

    let s = &config.sampler;
    let (i, j) = (s.i.unwrap_or(config.middle_site()), s.j.unwrap_or(config.middle_site()));
    let denoised = circuits.denoised(&spec)?;
    let (functional, initial, exact, kind, sites) = match s.observable {
        SampledObservable::TwoPointZz => (
            zz_functional(n, i)?,
            sigma_z(n, j)?,
            two_point_zz(&denoised, i, j)?,
            "two_point_zz",
            (Some(i), Some(j)),
        ),
        SampledObservable::DomainWallMagnetization => (
            domain_wall_functional(n),
            domain_wall_state(n),
            domain_wall_magnetization(&denoised, 1)?,
            "domain_wall_magnetization",
            (None, None),
        ),
    };

    let mut writer = if s.telemetry {
        let path = config.output.join("shots.jsonl");
        let f = std::fs::File::create(&path).map_err(CliError::io(&path))?;
        Some((std::io::BufWriter::new(f), path))
    } else {
        None
    };
    let mut sink = |rec: &ShotRecord| -> denoiser_core::Result<()> {
        if let Some((w, _)) = writer.as_mut() {
            let line = serde_json::json!({ "shot": rec.shot, "sign": rec.sign, "value": rec.value });
            writeln!(w, "{line}").map_err(|e| denoiser_core::Error::InvalidArgument(format!("telemetry: {e}")))?;
        }
        Ok(())
    };
    let telemetry: Option<denoiser_core::sampler::Telemetry<'_>> = if s.telemetry { Some(&mut sink) } else { None };
    let options = s.options();
    let result = if options.pauli_unraveling {
        run_shots_unraveled(&trotter, &spec, &functional, &initial, n_shots, config.seed, &options, telemetry)?
    } else {
        run_shots(&circuits.noisy, &spec, &functional, &initial, n_shots, config.seed, &options, telemetry)?
    };
    if let Some((mut w, path)) = writer {
        w.flush().map_err(CliError::io(&path))?;
    }
    eprintln!(
        "mean {} +- {} (exact {}, {:.2} standard errors)",
        num(result.mean),
        num(result.standard_error),
        num(exact),
        (result.mean - exact).abs() / result.standard_error.max(f64::MIN_POSITIVE)
    );

    let mut table = Table::new(
        "sample",
        &["observable", "L", "t", "m_trot", "M", "p", "i", "j", "n_shots", "mean", "standard_error", "exact", "gamma", "hoeffding_bound", "delta", "omega"],
    );
    let site = |s: Option<usize>| s.map_or(String::new(), |s| s.to_string());
    table.push(vec![
        kind.into(),
        n.get().to_string(),
        num(t),
        config.trotter.m_trot.to_string(),
        depth.to_string(),
        num(config.noise.p),
        site(sites.0),
        site(sites.1),
        result.n_shots.to_string(),
        num(result.mean),
        num(result.standard_error),
        num(exact),
        num(gamma),
        bound.to_string(),
        num(s.delta),
        num(s.omega),
    ]);
    run.write(&table)?;
    let extra = Extra { gamma: Some(gamma), hoeffding_bound: Some(bound), estimator: Some(result), ..Extra::default() };
    run.finish(Some(denoisers), extra)
}

/// Optimized cost and overhead across the configured noise strengths.
pub fn cmd_sweep(config: &RunConfig) -> CliResult<RunArtifact> {
    let mut run = Run::start(config, "sweep")?;
    let depths = if config.sweep.depths.is_empty() { vec![config.denoiser.depth] } else { config.sweep.depths.clone() };
    if config.sweep.ps.is_empty() {
        return Err(CliError::Config("sweep.ps is empty".into()));
    }
    let t = config.trotter.t;
    let mut table = Table::new("sweep", &["p", "M", "L", "baseline_epsilon", "epsilon", "gamma", "hoeffding_bound"]);
    let mut summaries = Vec::new();
    for &p in &config.sweep.ps {
        let noise = NoiseModel::new(p)?;
        for &m in &depths {
            eprintln!("p = {p}, M = {m}");
            let (spec, summary) = optimize_denoiser(config, t, m, noise)?;
            // Costs on the configured chain when it can be composed, otherwise on the optimization chain.
            let (l, base, eps) = match (summary.baseline_epsilon, summary.final_epsilon) {
                (Some(b), Some(e)) => (config.system.l, b, e),
                _ => {
                    let s = &summary.stages[0];
                    (s.l, s.baseline_epsilon, s.final_epsilon)
                }
            };
            let gamma = spec.gamma();
            table.push(vec![num(p), m.to_string(), l.to_string(), num(base), num(eps), num(gamma), budget(config, gamma)?.to_string()]);
            summaries.push(summary);
        }
    }
    run.write(&table)?;
    run.finish(None, Extra { optimizations: summaries, ..Extra::default() })
}
