//! Run configuration: defaults, command-line flags and an optional config
//! file, merged in that order.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use divim_core::cascade::{Sampling, SpreadModel};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Ic,
    Lt,
}

impl From<Model> for SpreadModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Ic => SpreadModel::IndependentCascade,
            Model::Lt => SpreadModel::LinearThreshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    Cascade,
    LiveEdge,
}

impl From<SamplingMode> for Sampling {
    fn from(s: SamplingMode) -> Self {
        match s {
            SamplingMode::Cascade => Sampling::Cascade,
            SamplingMode::LiveEdge => Sampling::LiveEdge,
        }
    }
}

/// What is being maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Plain expected spread.
    Im,
    /// Utility over per-community spreads.
    Adim,
    /// Utility over spread and seed diversity.
    Sdim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Ces,
    Substitutes,
    Complements,
    CobbDouglas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaRule {
    /// α_c = 1.
    Ones,
    /// α_c = 1 / |V_c|.
    InverseSize,
    /// α_c = 1 / C.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmChoice {
    Auto,
    Greedy,
    LazyGreedy,
    UpperGreedy,
    RandomGreedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityKind {
    Community,
    Embedding,
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub network: Option<PathBuf>,
    pub undirected: bool,
    pub communities: Option<PathBuf>,
    pub community_count: Option<usize>,
    pub embeddings: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub model: Model,
    pub sampling: SamplingMode,
    pub task: Task,
    pub family: Family,
    pub rho: f64,
    pub alpha: Option<Vec<f64>>,
    pub alpha_rule: Option<AlphaRule>,
    pub beta: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub similarity: SimilarityKind,
    pub k: usize,
    pub trials: u64,
    pub eval_trials: Option<u64>,
    pub master_seed: u64,
    pub algorithm: AlgorithmChoice,
    pub output: Option<PathBuf>,
    pub id_map: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            network: None,
            undirected: false,
            communities: None,
            community_count: None,
            embeddings: None,
            attributes: None,
            seeds: None,
            model: Model::Ic,
            sampling: SamplingMode::Cascade,
            task: Task::Adim,
            family: Family::Ces,
            rho: 0.5,
            alpha: None,
            alpha_rule: None,
            beta: None,
            a: 0.5,
            b: 0.5,
            similarity: SimilarityKind::Community,
            k: 10,
            trials: 10_000,
            eval_trials: None,
            master_seed: 0,
            algorithm: AlgorithmChoice::Auto,
            output: None,
            id_map: None,
        }
    }
}

/// Flags shared by every subcommand. Unset flags leave the defaults alone.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ConfigArgs {
    /// TOML or JSON file whose settings override the flags.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Edge list `src dst [p] [b]`, optionally headed by `#nodes N`.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<PathBuf>,
    /// Treat every edge line as two directed edges.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub undirected: bool,
    /// Community file: `node index` lines or `node: w_1 ... w_C` lines.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub communities: Option<PathBuf>,
    /// Number of communities (inferred from the file when omitted).
    #[arg(long, value_name = "C")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub community_count: Option<usize>,
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    /// Categorical attributes `node name=v1,v2 ...`, reported as coverage.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attributes: Option<PathBuf>,
    /// Whitespace-separated node ids.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingMode>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    /// CES exponent in (0, 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Explicit community weights, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_rule: Option<AlphaRule>,
    /// Diversity weight (default 0.05·|V|).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Cobb-Douglas exponent on spread.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Cobb-Douglas exponent on diversity.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilarityKind>,
    /// Seed budget.
    #[arg(long, short)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Monte-Carlo trials per estimate during the search.
    #[arg(long, short = 'm')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Trials for the final, independent re-estimate (default 4·trials).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_trials: Option<u64>,
    #[arg(long, short = 's')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmChoice>,
    /// Output file (stdout only when omitted).
    #[arg(long, short, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Where to write the dense-id to label table.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id_map: Option<PathBuf>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn merge(base: &mut Map<String, Value>, overlay: Map<String, Value>) {
    for (k, v) in overlay {
        base.insert(k, v);
    }
}

fn read_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let value: Value = if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    match value {
        Value::Object(mut map) => {
            // Relative paths in a config file are relative to the file.
            let dir = path.parent().unwrap_or(Path::new(""));
            for key in ["network", "communities", "embeddings", "attributes", "seeds", "output", "id_map"] {
                if let Some(Value::String(p)) = map.get(key) {
                    let joined = dir.join(p);
                    map.insert(key.into(), Value::String(joined.to_string_lossy().into_owned()));
                }
            }
            Ok(map)
        }
        _ => Err(CliError::Config(format!("{}: expected a table of settings", path.display()))),
    }
}

impl RunConfig {
    pub fn resolve(args: &ConfigArgs) -> Result<Self, CliError> {
        let Value::Object(mut map) = serde_json::to_value(RunConfig::default()).expect("serializable") else {
            unreachable!()
        };
        let Value::Object(flags) = serde_json::to_value(args).expect("serializable") else {
            unreachable!()
        };
        merge(&mut map, flags);
        if let Some(path) = &args.config {
            merge(&mut map, read_file(path)?);
        }
        let cfg: RunConfig = serde_json::from_value(Value::Object(map))
            .map_err(|e| CliError::Config(format!("invalid setting: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: String| Err(CliError::Config(format!("{field}: {why}")));
        if self.network.is_none() {
            return bad("network", "an edge-list path is required".into());
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if self.eval_trials == Some(0) {
            return bad("eval_trials", "must be at least 1".into());
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad("rho", format!("{} is outside (0, 1]", self.rho));
        }
        if let Some(beta) = self.beta {
            if !(beta.is_finite() && beta > 0.0) {
                return bad("beta", format!("{beta} must be positive"));
            }
        }
        if self.alpha.is_some() && self.alpha_rule.is_some() {
            return bad("alpha", "give either explicit weights or a rule, not both".into());
        }
        match (self.task, self.family) {
            (Task::Adim, Family::Substitutes) | (Task::Sdim, Family::Ces) => {
                return bad(
                    "family",
                    format!("{:?} is not available for {:?}", self.family, self.task).to_lowercase(),
                )
            }
            _ => {}
        }
        if self.task == Task::Sdim && self.similarity == SimilarityKind::Embedding && self.embeddings.is_none() {
            return bad("embeddings", "embedding similarity needs an embedding file".into());
        }
        Ok(())
    }

    pub fn eval_trials(&self) -> u64 {
        self.eval_trials.unwrap_or(self.trials.saturating_mul(4))
    }

    /// SHA-256 of the settings that influence results (output paths excluded).
    pub fn hash(&self) -> String {
        let mut copy = self.clone();
        copy.output = None;
        copy.id_map = None;
        let bytes = serde_json::to_vec(&copy).expect("serializable");
        hex::encode(Sha256::digest(bytes))
    }

    /// Algorithm actually run for `auto`.
    pub fn algorithm(&self) -> AlgorithmChoice {
        match (self.algorithm, self.task, self.family) {
            (AlgorithmChoice::Auto, Task::Sdim, _) => AlgorithmChoice::RandomGreedy,
            (AlgorithmChoice::Auto, Task::Adim, Family::Complements | Family::CobbDouglas) => {
                AlgorithmChoice::UpperGreedy
            }
            (AlgorithmChoice::Auto, _, _) => AlgorithmChoice::Greedy,
            (explicit, _, _) => explicit,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> ConfigArgs {
        ConfigArgs {
            network: Some("g.edges".into()),
            ..ConfigArgs::default()
        }
    }

    #[test]
    fn auto_resolution() {
        let mut cfg = RunConfig::resolve(&args()).unwrap();
        assert_eq!(cfg.algorithm(), AlgorithmChoice::Greedy);
        cfg.family = Family::Complements;
        assert_eq!(cfg.algorithm(), AlgorithmChoice::UpperGreedy);
        cfg.family = Family::CobbDouglas;
        assert_eq!(cfg.algorithm(), AlgorithmChoice::UpperGreedy);
        cfg.task = Task::Sdim;
        assert_eq!(cfg.algorithm(), AlgorithmChoice::RandomGreedy);
        cfg.algorithm = AlgorithmChoice::Greedy;
        assert_eq!(cfg.algorithm(), AlgorithmChoice::Greedy);
    }

    #[test]
    fn file_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "k = 3\nfamily = \"complements\"\nnetwork = \"net.edges\"\n").unwrap();
        let mut a = args();
        a.k = Some(7);
        a.rho = Some(0.25);
        a.config = Some(path);
        let cfg = RunConfig::resolve(&a).unwrap();
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.rho, 0.25);
        assert_eq!(cfg.family, Family::Complements);
        assert_eq!(cfg.network.unwrap(), dir.path().join("net.edges"));
    }

    #[test]
    fn validation_names_the_field() {
        let mut a = args();
        a.rho = Some(1.5);
        let err = RunConfig::resolve(&a).unwrap_err().to_string();
        assert!(err.contains("rho"), "{err}");
        let err = RunConfig::resolve(&ConfigArgs::default()).unwrap_err().to_string();
        assert!(err.contains("network"), "{err}");
    }

    #[test]
    fn hash_ignores_output_paths() {
        let a = RunConfig::resolve(&args()).unwrap();
        let mut b = a.clone();
        b.output = Some("x.json".into());
        assert_eq!(a.hash(), b.hash());
        b.k += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
