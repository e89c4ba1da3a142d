//! The `select`, `evaluate`, `simulate` and `oracle` workflows.

use std::fmt::Write as _;
use std::io::Write as _;

use divim_core::cascade::{RngSpec, SpreadEstimator, SpreadVector};
use divim_core::graph::CommunityStructure;
use divim_core::metrics::{coverage_all, DiagnosticsReport};
use divim_core::objective::{
    adim_upper_bounds, AdimObjective, CachedSource, CesPower, GlobalSpread, Objective,
    SdimObjective, SpreadSource,
};
use divim_core::optimize::{greedy, lazy_greedy, random_greedy, upper_greedy, SeedResult};
use divim_core::oracle::{exhaustive_best, ExactSpread, SpreadTable};
use divim_core::utility::{
    self, AdimFamily, AdimUtility, SdimFamily, SdimUtility, Similarity,
};
use divim_core::NodeId;
use serde::Serialize;

use crate::config::{AlgorithmChoice, AlphaRule, Family, RunConfig, Task};
use crate::data::Inputs;
use crate::CliError;

const EVAL_SALT: u64 = 0xe7a1;

struct Problem {
    task: Task,
    adim: Option<AdimUtility>,
    sdim: Option<SdimUtility>,
}

fn alpha(cfg: &RunConfig, rule: AlphaRule, cs: &CommunityStructure) -> Result<Vec<f64>, CliError> {
    let c = cs.count();
    if let Some(explicit) = &cfg.alpha {
        if explicit.len() != c {
            return Err(CliError::Config(format!(
                "alpha: {} weights given for {c} communities",
                explicit.len()
            )));
        }
        return Ok(explicit.clone());
    }
    Ok(match rule {
        AlphaRule::Ones => vec![1.0; c],
        AlphaRule::Uniform => vec![1.0 / c as f64; c],
        AlphaRule::InverseSize => cs
            .sizes()
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                if s == 0 {
                    Err(CliError::Config(format!("alpha_rule: community {i} is empty")))
                } else {
                    Ok(1.0 / s as f64)
                }
            })
            .collect::<Result<_, _>>()?,
    })
}

fn adim_utility(cfg: &RunConfig, family: Family, cs: &CommunityStructure) -> Result<AdimUtility, CliError> {
    let (fam, default_rule) = match family {
        Family::Ces | Family::Substitutes => (AdimFamily::Ces { rho: cfg.rho }, AlphaRule::Uniform),
        Family::Complements => (AdimFamily::Complements, AlphaRule::Ones),
        Family::CobbDouglas => (AdimFamily::CobbDouglas, AlphaRule::Ones),
    };
    let rule = cfg.alpha_rule.unwrap_or(default_rule);
    Ok(AdimUtility::new(fam, alpha(cfg, rule, cs)?)?)
}

fn sdim_utility(cfg: &RunConfig, family: Family, n: usize, budget: usize) -> Result<SdimUtility, CliError> {
    let fam = match family {
        Family::Complements => SdimFamily::Complements,
        Family::CobbDouglas => SdimFamily::CobbDouglas { a: cfg.a, b: cfg.b },
        Family::Substitutes | Family::Ces => SdimFamily::Substitutes,
    };
    Ok(SdimUtility::new(fam, beta(cfg, n), budget)?)
}

fn beta(cfg: &RunConfig, n: usize) -> f64 {
    cfg.beta.unwrap_or(0.05 * n as f64)
}

impl Problem {
    fn new(cfg: &RunConfig, inputs: &Inputs) -> Result<Self, CliError> {
        let n = inputs.network.node_count();
        Ok(match cfg.task {
            Task::Im => Self {
                task: Task::Im,
                adim: None,
                sdim: None,
            },
            Task::Adim => Self {
                task: Task::Adim,
                adim: Some(adim_utility(cfg, cfg.family, &inputs.communities)?),
                sdim: None,
            },
            Task::Sdim => Self {
                task: Task::Sdim,
                adim: None,
                sdim: Some(sdim_utility(cfg, cfg.family, n, cfg.k)?),
            },
        })
    }

    fn objective<'s>(
        &self,
        source: &'s dyn SpreadSource,
        sim: Option<&'s dyn Similarity>,
    ) -> Box<dyn Objective + 's> {
        match self.task {
            Task::Im => Box::new(GlobalSpread(source)),
            Task::Adim => Box::new(AdimObjective::new(source, self.adim.clone().unwrap())),
            Task::Sdim => Box::new(SdimObjective::new(
                source,
                sim.expect("similarity resolved for seed utilities"),
                self.sdim.unwrap(),
            )),
        }
    }

    /// What greedy maximizes: the ρ-th power for CES, the objective otherwise.
    fn search_objective<'s>(
        &self,
        source: &'s dyn SpreadSource,
        sim: Option<&'s dyn Similarity>,
    ) -> Box<dyn Objective + 's> {
        match self.adim.as_ref().and_then(|u| CesPower::new(source, u)) {
            Some(power) => Box::new(power),
            None => self.objective(source, sim),
        }
    }

    fn bound_label(&self, bound: Option<usize>) -> String {
        match (bound, self.adim.as_ref().map(AdimUtility::family)) {
            (None, _) => "objective".into(),
            (Some(i), Some(AdimFamily::Complements)) => format!("community {i}"),
            (Some(_), _) => "community mean".into(),
        }
    }

    fn note(&self) -> Option<String> {
        match self.sdim.map(|u| u.family()) {
            Some(SdimFamily::CobbDouglas { b, .. }) => Some(format!(
                "objective omits the constant factor beta^{b}; it does not change the maximizer"
            )),
            _ => None,
        }
    }
}

fn estimator<'a>(cfg: &RunConfig, inputs: &'a Inputs, trials: u64, rng: RngSpec) -> Result<SpreadEstimator<'a>, CliError> {
    Ok(
        SpreadEstimator::new(&inputs.network, &inputs.communities, cfg.model.into(), trials, rng)?
            .with_sampling(cfg.sampling.into()),
    )
}

fn eval_rng(cfg: &RunConfig) -> RngSpec {
    RngSpec::new(cfg.master_seed).derive(EVAL_SALT)
}

#[derive(Serialize)]
struct Reproducibility {
    config_hash: String,
    master_seed: u64,
    trials: u64,
    eval_trials: u64,
    model: crate::config::Model,
    sampling: crate::config::SamplingMode,
    version: &'static str,
}

impl Reproducibility {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            config_hash: cfg.hash(),
            master_seed: cfg.master_seed,
            trials: cfg.trials,
            eval_trials: cfg.eval_trials(),
            model: cfg.model,
            sampling: cfg.sampling,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Serialize)]
struct LogEntry {
    node: Option<String>,
    gain: f64,
    value: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pool: Vec<String>,
    #[serde(skip_serializing_if = "is_zero")]
    padding: usize,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

#[derive(Serialize)]
struct SandwichEntry {
    maximized: String,
    seeds: Vec<String>,
    value: f64,
    value_std_err: Option<f64>,
    bound_value: Option<f64>,
}

#[derive(Serialize)]
struct SelectOutput {
    command: &'static str,
    task: Task,
    family: Option<Family>,
    algorithm: divim_core::optimize::Algorithm,
    k: usize,
    seeds: Vec<String>,
    objective: f64,
    objective_std_err: Option<f64>,
    search_objective: f64,
    ratio_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    candidate_log: Vec<LogEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sandwich: Vec<SandwichEntry>,
    diagnostics: DiagnosticsReport,
    reproducibility: Reproducibility,
}

fn diagnostics(
    inputs: &Inputs,
    sv: &SpreadVector,
    seeds: &[NodeId],
    sim: Option<&dyn Similarity>,
) -> Result<DiagnosticsReport, CliError> {
    let coverage = match &inputs.attributes {
        Some(table) => coverage_all(table, seeds)?,
        None => Default::default(),
    };
    let d = match sim {
        Some(s) if seeds.len() >= 2 => Some(utility::diversity(s, seeds)?),
        _ => None,
    };
    Ok(DiagnosticsReport::from_spread(sv)
        .with_coverage(coverage)
        .with_seed_diversity(d))
}

fn write_id_map(cfg: &RunConfig, inputs: &Inputs) -> Result<(), CliError> {
    if let Some(path) = &cfg.id_map {
        let mut buf = Vec::new();
        inputs.network.ids().write_tsv(&mut buf).expect("writing to memory");
        write_file(path, &buf)?;
    }
    Ok(())
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Output {
        path: path.to_owned(),
        source,
    })
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    if let Some(path) = &cfg.output {
        write_file(path, text.as_bytes())?;
    }
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn optional_similarity<'a>(cfg: &RunConfig, inputs: &'a Inputs) -> Result<Option<Box<dyn Similarity + 'a>>, CliError> {
    match inputs.similarity(cfg.similarity) {
        Ok(s) => Ok(Some(s)),
        Err(e) if cfg.task == Task::Sdim => Err(e),
        Err(_) => Ok(None),
    }
}

pub fn select(cfg: &RunConfig) -> Result<(), CliError> {
    let inputs = Inputs::load(cfg)?;
    write_id_map(cfg, &inputs)?;
    let problem = Problem::new(cfg, &inputs)?;
    let sim = optional_similarity(cfg, &inputs)?;
    let sim = sim.as_deref();
    let universe: Vec<NodeId> = (0..inputs.network.node_count()).collect();
    let k = cfg.k;

    let search = CachedSource::new(estimator(cfg, &inputs, cfg.trials, RngSpec::new(cfg.master_seed))?);
    let f = problem.objective(&search, sim);
    let result: SeedResult = match cfg.algorithm() {
        AlgorithmChoice::Greedy | AlgorithmChoice::Auto => {
            greedy(&*problem.search_objective(&search, sim), k, &universe)?
        }
        AlgorithmChoice::LazyGreedy => lazy_greedy(&*problem.search_objective(&search, sim), k, &universe)?,
        AlgorithmChoice::UpperGreedy => {
            let uppers = match &problem.adim {
                Some(u) => adim_upper_bounds(&search as &dyn SpreadSource, u),
                None => Vec::new(),
            };
            upper_greedy(&*f, &uppers, k, &universe)?
        }
        AlgorithmChoice::RandomGreedy => random_greedy(&*f, k, &universe, RngSpec::new(cfg.master_seed))?,
    };
    let search_objective = f.value(&result.seeds);

    let eval = CachedSource::new(estimator(cfg, &inputs, cfg.eval_trials(), eval_rng(cfg))?);
    let fe = problem.objective(&eval, sim);
    let sv = eval.spread(&result.seeds);
    let report = diagnostics(&inputs, &sv, &result.seeds, sim)?;
    eprint!("{}", report.to_table());

    let label = |u: &Option<NodeId>| u.map(|u| inputs.network.label(u).to_owned());
    let out = SelectOutput {
        command: "select",
        task: cfg.task,
        family: (cfg.task != Task::Im).then_some(cfg.family),
        algorithm: result.algorithm,
        k,
        seeds: inputs.labels(&result.seeds),
        objective: fe.value(&result.seeds),
        objective_std_err: fe.std_err(&result.seeds),
        search_objective,
        ratio_bound: result.ratio_bound,
        note: problem.note(),
        candidate_log: result
            .candidate_log
            .iter()
            .map(|s| LogEntry {
                node: label(&s.node),
                gain: s.gain,
                value: s.value,
                pool: inputs.labels(&s.pool),
                padding: s.padding,
            })
            .collect(),
        sandwich: result
            .sandwich
            .iter()
            .map(|r| SandwichEntry {
                maximized: problem.bound_label(r.bound),
                seeds: inputs.labels(&r.seeds),
                value: r.value,
                value_std_err: r.value_std_err,
                bound_value: r.bound_value,
            })
            .collect(),
        diagnostics: report,
        reproducibility: Reproducibility::new(cfg),
    };
    emit(cfg, &to_json(&out))
}

#[derive(Serialize)]
struct AudienceValues {
    ces: f64,
    complements: f64,
    cobb_douglas: f64,
}

#[derive(Serialize)]
struct SeedValues {
    budget: usize,
    beta: f64,
    diversity: Option<f64>,
    diversity_tilde: f64,
    substitutes: f64,
    complements: f64,
    cobb_douglas: f64,
}

#[derive(Serialize)]
struct EvaluateOutput {
    command: &'static str,
    task: Task,
    seeds: Vec<String>,
    objective: f64,
    objective_std_err: Option<f64>,
    spread: f64,
    audience_utilities: AudienceValues,
    seed_utilities: Option<SeedValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    diagnostics: DiagnosticsReport,
    reproducibility: Reproducibility,
}

fn required_seeds(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<NodeId>, CliError> {
    let path = cfg
        .seeds
        .as_ref()
        .ok_or_else(|| CliError::Config("seeds: a seed file is required".into()))?;
    inputs.load_seeds(path)
}

pub fn evaluate(cfg: &RunConfig) -> Result<(), CliError> {
    let inputs = Inputs::load(cfg)?;
    write_id_map(cfg, &inputs)?;
    let seeds = required_seeds(cfg, &inputs)?;
    let sim = optional_similarity(cfg, &inputs)?;
    let sim = sim.as_deref();
    let n = inputs.network.node_count();

    let eval = CachedSource::new(estimator(cfg, &inputs, cfg.eval_trials(), eval_rng(cfg))?);
    let sv = eval.spread(&seeds);

    let cs = &inputs.communities;
    let audience = AudienceValues {
        ces: adim_utility(cfg, Family::Ces, cs)?.value(&sv.per_community),
        complements: adim_utility(cfg, Family::Complements, cs)?.value(&sv.per_community),
        cobb_douglas: adim_utility(cfg, Family::CobbDouglas, cs)?.value(&sv.per_community),
    };

    if cfg.task == Task::Sdim && seeds.len() != cfg.k {
        eprintln!(
            "warning: {} seeds with budget k = {}; using the budget-normalized diversity",
            seeds.len(),
            cfg.k
        );
    }
    let budget = cfg.k.max(seeds.len()).max(2);
    let seed_values = match sim {
        Some(s) => {
            let dt = utility::diversity_tilde(s, &seeds, budget)?;
            let value = |family| -> Result<f64, CliError> {
                Ok(sdim_utility(cfg, family, n, budget)?.value(sv.global, dt))
            };
            Some(SeedValues {
                budget,
                beta: beta(cfg, n),
                diversity: (seeds.len() >= 2)
                    .then(|| utility::diversity(s, &seeds))
                    .transpose()?,
                diversity_tilde: dt,
                substitutes: value(Family::Substitutes)?,
                complements: value(Family::Complements)?,
                cobb_douglas: value(Family::CobbDouglas)?,
            })
        }
        None => None,
    };

    let mut eval_cfg = cfg.clone();
    if cfg.task == Task::Sdim {
        eval_cfg.k = budget;
    }
    let problem = Problem::new(&eval_cfg, &inputs)?;
    let f = problem.objective(&eval, sim);
    let report = diagnostics(&inputs, &sv, &seeds, sim)?;
    eprint!("{}", report.to_table());
    let out = EvaluateOutput {
        command: "evaluate",
        task: cfg.task,
        seeds: inputs.labels(&seeds),
        objective: f.value(&seeds),
        objective_std_err: f.std_err(&seeds),
        spread: sv.global,
        audience_utilities: audience,
        seed_utilities: seed_values,
        note: problem.note(),
        diagnostics: report,
        reproducibility: Reproducibility::new(cfg),
    };
    emit(cfg, &to_json(&out))
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let inputs = Inputs::load(cfg)?;
    write_id_map(cfg, &inputs)?;
    let seeds = required_seeds(cfg, &inputs)?;
    let est = estimator(cfg, &inputs, cfg.trials, RngSpec::new(cfg.master_seed))?;
    let outcomes = est.outcomes(&seeds)?;
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# divim simulate config_hash={} master_seed={} trials={} model={}",
        cfg.hash(),
        cfg.master_seed,
        cfg.trials,
        est.model()
    );
    csv.push_str("trial,activated,in_targets");
    for c in 0..inputs.communities.count() {
        let _ = write!(csv, ",community_{c}");
    }
    csv.push('\n');
    for o in &outcomes {
        let _ = write!(csv, "{},{},{}", o.trial, o.activated, o.in_targets);
        for v in &o.per_community {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    emit(cfg, &csv)
}

#[derive(Serialize)]
struct Optimum {
    k: usize,
    seeds: Vec<String>,
    objective: f64,
}

#[derive(Serialize)]
struct OracleOutput {
    command: &'static str,
    seeds: Option<Vec<String>>,
    spread: Option<SpreadVector>,
    optimum: Option<Optimum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    reproducibility: Reproducibility,
}

pub fn oracle(cfg: &RunConfig, optimum: bool) -> Result<(), CliError> {
    let inputs = Inputs::load(cfg)?;
    write_id_map(cfg, &inputs)?;
    let model = cfg.model.into();
    let exact = ExactSpread::new(&inputs.network, model, &inputs.communities)?;
    let seeds = cfg.seeds.as_ref().map(|p| inputs.load_seeds(p)).transpose()?;
    let spread = seeds.as_ref().map(|s| exact.spread(s));

    let mut note = None;
    let best = if optimum {
        let problem = Problem::new(cfg, &inputs)?;
        note = problem.note();
        let sim = optional_similarity(cfg, &inputs)?;
        let table;
        let source: &dyn SpreadSource = if inputs.network.node_count() <= 16 {
            table = SpreadTable::build(&inputs.network, model, &inputs.communities)?;
            &table
        } else {
            &exact
        };
        let f = problem.objective(source, sim.as_deref());
        let universe: Vec<NodeId> = (0..inputs.network.node_count()).collect();
        let (set, value) = exhaustive_best(&*f, cfg.k, &universe)?;
        Some(Optimum {
            k: cfg.k,
            seeds: inputs.labels(&set),
            objective: value,
        })
    } else {
        None
    };
    let out = OracleOutput {
        command: "oracle",
        seeds: seeds.map(|s| inputs.labels(&s)),
        spread,
        optimum: best,
        note,
        reproducibility: Reproducibility::new(cfg),
    };
    emit(cfg, &to_json(&out))
}
