//! Experiment files, parameter resolution (flags > file > defaults) and
//! the dispatcher that produces artifacts on disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use plurality_core::analysis::{
    check_monotonicity, detect_phases, family_from_md_targets, sweep_md, DEFAULT_EPS_TILDE,
    DEFAULT_GAMMA, DEFAULT_KAPPA,
};
use plurality_core::config::{generate_initial, AgentStates, ColorConfiguration, InitSpec};
use plurality_core::dynamics::{run, RunParams};
use plurality_core::expander::{
    required_hops, run_expander, ExpanderRunParams, PhaseParams, RegularGraph,
};
use plurality_core::oracle::{exact_absorption, exact_step_distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Mode {
    Complete,
    Expander,
    Oracle,
    Sweep,
    Phases,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Complete => "complete",
            Mode::Expander => "expander",
            Mode::Oracle => "oracle",
            Mode::Sweep => "sweep",
            Mode::Phases => "phases",
        }
    }
}

/// On-disk experiment description. Every field can also be supplied or
/// overridden by command-line flags; resolution order is flags > file >
/// defaults and the resolved set is recorded in the manifest.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    /// Explicit start configuration (oracle mode), counts by label plus q.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ColorConfiguration>,
    /// Sweep family, explicit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<InitSpec>>,
    /// Sweep family, generated: oligarchic members hitting these md targets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub md_targets: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_base: Option<FamilyBase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunFileParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expander: Option<ExpanderFileParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisFileParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleFileParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyBase {
    pub n: u64,
    pub k: u32,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunFileParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_hint: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExpanderFileParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Phase-length constant in `tau = ceil(alpha * t_bar^2 * ln n)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Concentration constant for the congestion bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laziness: Option<f64>,
    /// Walk accuracy; default 1/n^2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_phases: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnalysisFileParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OracleFileParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absorption: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

/// Flag-level overrides collected by the argument parser.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub absorption: bool,
    pub horizon: Option<u64>,
}

impl ExperimentFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("bad experiment file {}: {e}", path.display())))
    }
}

/// Fully resolved parameter set; everything that influences the artifacts,
/// recorded verbatim in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ColorConfiguration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<InitSpec>>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    pub max_rounds: u64,
    pub record_every: u64,
    pub alpha_hint: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expander: Option<ResolvedExpander>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<ResolvedAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<ResolvedOracle>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedExpander {
    pub d: usize,
    pub alpha: f64,
    pub c: f64,
    pub laziness: f64,
    pub eps: f64,
    pub max_phases: u64,
    /// Derived: mixing target and phase length actually used.
    pub t_bar: u64,
    pub tau: u64,
    pub base_mixing_rounds: u64,
    pub base_mixing_exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedAnalysis {
    pub gamma: f64,
    pub eps_tilde: f64,
    pub lambda: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedOracle {
    pub absorption: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

/// Runs one experiment end to end and writes its artifacts. Nothing is
/// written until every artifact has been produced in memory, so failed
/// runs leave no partial outputs.
pub fn run_experiment(
    mode: Mode,
    file: &ExperimentFile,
    overrides: &Overrides,
) -> Result<PathBuf, CliError> {
    if let Some(file_mode) = file.mode {
        if file_mode != mode {
            return Err(CliError::validation(format!(
                "experiment file declares mode '{}' but subcommand is '{}'",
                file_mode.as_str(),
                mode.as_str()
            )));
        }
    }
    let out_dir = overrides
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let seed = overrides.seed.or(file.seed).unwrap_or(0);
    let seeds = file.seeds.clone();
    if seeds.as_ref().is_some_and(|s| s.is_empty()) {
        return Err(CliError::validation("seed list must not be empty".into()));
    }

    let run_file = file.run.clone().unwrap_or_default();
    let run_params = RunParams {
        max_rounds: run_file.max_rounds.unwrap_or(10_000),
        record_every: run_file.record_every.unwrap_or(1),
        alpha_hint: run_file
            .alpha_hint
            .unwrap_or_else(|| file.init.as_ref().map_or(0.0, |s| s.alpha())),
        seed,
    };
    run_params.validate()?;

    let mut artifacts: BTreeMap<&'static str, Vec<u8>> = BTreeMap::new();
    let resolved = match mode {
        Mode::Complete => run_complete(file, run_params, &mut artifacts)?,
        Mode::Expander => run_expander_mode(file, run_params, &mut artifacts)?,
        Mode::Oracle => run_oracle(file, overrides, seed, run_params, &mut artifacts)?,
        Mode::Sweep => run_sweep(file, seed, run_params, &mut artifacts)?,
        Mode::Phases => run_phases(file, run_params, &mut artifacts)?,
    };

    let manifest = Manifest {
        tool: "plurality-sim",
        tool_version: TOOL_VERSION,
        resolved,
    };
    artifacts.insert("manifest.json", to_pretty_json(&manifest)?);

    write_all(&out_dir, &artifacts)?;
    Ok(out_dir)
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    tool_version: &'static str,
    resolved: Resolved,
}

fn require_init(file: &ExperimentFile) -> Result<InitSpec, CliError> {
    file.init
        .clone()
        .ok_or_else(|| CliError::validation("this mode requires an 'init' spec".into()))
}

fn build_config(spec: &InitSpec, seed: u64) -> Result<ColorConfiguration, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(generate_initial(spec, &mut rng)?)
}

fn run_complete(
    file: &ExperimentFile,
    params: RunParams,
    artifacts: &mut BTreeMap<&'static str, Vec<u8>>,
) -> Result<Resolved, CliError> {
    let spec = require_init(file)?;
    let config = build_config(&spec, params.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let trace = run(&config, &params, &mut rng);

    artifacts.insert("trace.csv", trace.to_csv().into_bytes());
    artifacts.insert("summary.json", to_pretty_json(&trace.summary())?);
    Ok(Resolved {
        mode: Mode::Complete,
        init: Some(spec),
        config: Some(config),
        family: None,
        seed: params.seed,
        seeds: None,
        max_rounds: params.max_rounds,
        record_every: params.record_every,
        alpha_hint: params.alpha_hint,
        expander: None,
        analysis: None,
        oracle: None,
    })
}

/// Per-phase summary written to phase_stats.json (histograms go to CSV).
#[derive(Serialize)]
struct PhaseStatsSummary {
    phase: u64,
    max_congestion: u64,
    tokens_completed: u64,
    all_returned: bool,
    tau: u64,
    t_bar: u64,
    active_rounds: u64,
}

fn run_expander_mode(
    file: &ExperimentFile,
    params: RunParams,
    artifacts: &mut BTreeMap<&'static str, Vec<u8>>,
) -> Result<Resolved, CliError> {
    let spec = require_init(file)?;
    let exp = file.expander.clone().unwrap_or_default();
    let d = exp
        .d
        .ok_or_else(|| CliError::validation("expander mode requires expander.d".into()))?;
    let phase_alpha = exp.alpha.unwrap_or(4.0);
    let c = exp.c.unwrap_or(3.0);
    let laziness = exp.laziness.unwrap_or(0.5);
    let n = spec.n();
    let eps = exp.eps.unwrap_or(1.0 / (n as f64 * n as f64));
    let max_phases = exp.max_phases.unwrap_or(params.max_rounds);

    let config = build_config(&spec, params.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let graph = RegularGraph::random(n as usize, d, &mut rng)?;
    if !graph.is_connected() {
        return Err(CliError::runtime(
            "generated graph is disconnected; retry with another seed or higher degree".into(),
        ));
    }
    let base = plurality_core::expander::mixing_time(
        &graph,
        plurality_core::expander::BASE_EPS,
        laziness,
    )?;
    let t_bar = required_hops(&graph, eps, laziness)?;
    let phase = PhaseParams::derive(phase_alpha, t_bar, n as usize, laziness)?;

    let states = AgentStates::from_configuration_shuffled(&config, &mut rng);
    let run_params = ExpanderRunParams {
        max_phases,
        record_every: params.record_every,
        alpha_hint: params.alpha_hint,
        seed: params.seed,
    };
    let (trace, stats) = run_expander(&graph, &states, config.k(), &phase, &run_params, &mut rng)?;

    let mut congestion_csv = String::from("phase,round,max_queue,mean_queue\n");
    let mut summaries = Vec::with_capacity(stats.len());
    for (i, s) in stats.iter().enumerate() {
        for &(round, max_q, mean_q) in &s.histogram {
            congestion_csv.push_str(&format!("{},{round},{max_q},{mean_q}\n", i + 1));
        }
        summaries.push(PhaseStatsSummary {
            phase: i as u64 + 1,
            max_congestion: s.max_congestion,
            tokens_completed: s.tokens_completed,
            all_returned: s.all_returned,
            tau: s.tau,
            t_bar: s.t_bar,
            active_rounds: s.active_rounds,
        });
    }

    artifacts.insert("graph.txt", graph.to_edge_list().into_bytes());
    artifacts.insert("trace.csv", trace.to_csv().into_bytes());
    artifacts.insert("congestion.csv", congestion_csv.into_bytes());
    artifacts.insert("phase_stats.json", to_pretty_json(&summaries)?);
    artifacts.insert("summary.json", to_pretty_json(&trace.summary())?);
    Ok(Resolved {
        mode: Mode::Expander,
        init: Some(spec),
        config: Some(config),
        family: None,
        seed: params.seed,
        seeds: None,
        max_rounds: params.max_rounds,
        record_every: params.record_every,
        alpha_hint: params.alpha_hint,
        expander: Some(ResolvedExpander {
            d,
            alpha: phase_alpha,
            c,
            laziness,
            eps,
            max_phases,
            t_bar,
            tau: phase.tau,
            base_mixing_rounds: base.rounds,
            base_mixing_exact: base.exact,
        }),
        analysis: None,
        oracle: None,
    })
}

fn run_oracle(
    file: &ExperimentFile,
    overrides: &Overrides,
    seed: u64,
    params: RunParams,
    artifacts: &mut BTreeMap<&'static str, Vec<u8>>,
) -> Result<Resolved, CliError> {
    let config = match (&file.config, &file.init) {
        (Some(config), _) => config.clone(),
        (None, Some(spec)) => build_config(spec, seed)?,
        (None, None) => {
            return Err(CliError::validation(
                "oracle mode requires 'config' or 'init'".into(),
            ))
        }
    };
    let opts = file.oracle.clone().unwrap_or_default();
    let absorption = overrides.absorption || opts.absorption.unwrap_or(false);
    let horizon = overrides.horizon.or(opts.horizon);

    let dist = exact_step_distribution(&config)?;
    artifacts.insert("distribution.json", to_pretty_json(&dist)?);
    if absorption {
        let report = exact_absorption(&config, horizon)?;
        artifacts.insert("absorption.json", to_pretty_json(&report)?);
    }
    Ok(Resolved {
        mode: Mode::Oracle,
        init: file.init.clone(),
        config: Some(config),
        family: None,
        seed,
        seeds: None,
        max_rounds: params.max_rounds,
        record_every: params.record_every,
        alpha_hint: params.alpha_hint,
        expander: None,
        analysis: None,
        oracle: Some(ResolvedOracle {
            absorption,
            horizon,
        }),
    })
}

fn run_sweep(
    file: &ExperimentFile,
    seed: u64,
    params: RunParams,
    artifacts: &mut BTreeMap<&'static str, Vec<u8>>,
) -> Result<Resolved, CliError> {
    let family = match (&file.family, &file.md_targets, &file.family_base) {
        (Some(family), _, _) => family.clone(),
        (None, Some(targets), Some(base)) => {
            family_from_md_targets(base.n, base.k, base.alpha, targets)?
        }
        _ => {
            return Err(CliError::validation(
                "sweep mode requires 'family' or 'md_targets' + 'family_base'".into(),
            ))
        }
    };
    let seeds = file
        .seeds
        .clone()
        .unwrap_or_else(|| vec![seed]);

    let result = sweep_md(&family, &seeds, &params)?;
    artifacts.insert("sweep.csv", result.to_csv().into_bytes());
    artifacts.insert("fit.json", to_pretty_json(&result.fit)?);
    Ok(Resolved {
        mode: Mode::Sweep,
        init: None,
        config: None,
        family: Some(family),
        seed,
        seeds: Some(seeds),
        max_rounds: params.max_rounds,
        record_every: params.record_every,
        alpha_hint: params.alpha_hint,
        expander: None,
        analysis: None,
        oracle: None,
    })
}

fn run_phases(
    file: &ExperimentFile,
    mut params: RunParams,
    artifacts: &mut BTreeMap<&'static str, Vec<u8>>,
) -> Result<Resolved, CliError> {
    let spec = require_init(file)?;
    // boundary detection needs every round
    params.record_every = 1;
    let ana = file.analysis.clone().unwrap_or_default();
    let gamma = ana.gamma.unwrap_or(DEFAULT_GAMMA);
    let eps_tilde = ana.eps_tilde.unwrap_or(DEFAULT_EPS_TILDE);
    let lambda = ana.lambda.unwrap_or(1.0);
    let kappa = ana.kappa.unwrap_or(DEFAULT_KAPPA);

    let config = build_config(&spec, params.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let trace = run(&config, &params, &mut rng);
    let boundaries = detect_phases(&trace, gamma, eps_tilde)?;
    let monotonicity = check_monotonicity(&trace, lambda, kappa)?;

    #[derive(Serialize)]
    struct PhasesOut<'a> {
        boundaries: &'a plurality_core::analysis::PhaseBoundaries,
        monotonicity: &'a plurality_core::analysis::MonotonicityReport,
    }
    artifacts.insert("trace.csv", trace.to_csv().into_bytes());
    artifacts.insert(
        "phases.json",
        to_pretty_json(&PhasesOut {
            boundaries: &boundaries,
            monotonicity: &monotonicity,
        })?,
    );
    artifacts.insert("summary.json", to_pretty_json(&trace.summary())?);
    Ok(Resolved {
        mode: Mode::Phases,
        init: Some(spec),
        config: Some(config),
        family: None,
        seed: params.seed,
        seeds: None,
        max_rounds: params.max_rounds,
        record_every: params.record_every,
        alpha_hint: params.alpha_hint,
        expander: None,
        analysis: Some(ResolvedAnalysis {
            gamma,
            eps_tilde,
            lambda,
            kappa,
        }),
        oracle: None,
    })
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::runtime(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes every artifact, removing anything already written on failure so
/// errors never leave partial outputs behind.
fn write_all(dir: &Path, artifacts: &BTreeMap<&'static str, Vec<u8>>) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, bytes) in artifacts {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(CliError::runtime(format!(
                "cannot write {}: {e}",
                path.display()
            )));
        }
        written.push(path);
    }
    Ok(())
}
