//! JSON configuration documents. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use subbotin_core::estimator::CombinationRule;
use subbotin_core::simgen::{GraphKind, GraphSpec, HawkesParams, SignScheme, ThetaSpec};
use subbotin_core::{Error, ShapeParam};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    #[default]
    And,
    Or,
}

impl From<Rule> for CombinationRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::And => CombinationRule::And,
            Rule::Or => CombinationRule::Or,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphConfig {
    SmallWorld { cliques: usize },
    Chain,
    ErdosRenyi { edge_prob: f64 },
}

impl GraphConfig {
    pub fn spec(&self, p: usize) -> Result<GraphSpec, Error> {
        let kind = match *self {
            GraphConfig::SmallWorld { cliques } => GraphKind::SmallWorldCliques(cliques),
            GraphConfig::Chain => GraphKind::Chain,
            GraphConfig::ErdosRenyi { edge_prob } => GraphKind::ErdosRenyi(edge_prob),
        };
        GraphSpec::new(kind, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", default, deny_unknown_fields)]
pub struct ThetaConfig {
    pub magnitude: f64,
    pub random_sign: bool,
    pub pd_margin: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        let d = ThetaSpec::default();
        ThetaConfig {
            magnitude: d.magnitude,
            random_sign: d.sign_scheme == SignScheme::RandomSign,
            pd_margin: d.pd_margin,
        }
    }
}

impl ThetaConfig {
    pub fn spec(&self) -> ThetaSpec {
        ThetaSpec {
            magnitude: self.magnitude,
            sign_scheme: if self.random_sign { SignScheme::RandomSign } else { SignScheme::AllPositive },
            pd_margin: self.pd_margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", default, deny_unknown_fields)]
pub struct HawkesConfig {
    /// Baseline intensity; omitted means "match `target_rate`".
    pub baseline: Option<f64>,
    pub target_rate: f64,
    pub decay: f64,
    pub branching_radius: f64,
}

impl Default for HawkesConfig {
    fn default() -> Self {
        let d = HawkesParams::default();
        HawkesConfig { baseline: d.baseline, target_rate: d.target_rate, decay: d.decay, branching_radius: d.branching_radius }
    }
}

impl HawkesConfig {
    pub fn params(&self) -> HawkesParams {
        HawkesParams {
            baseline: self.baseline,
            target_rate: self.target_rate,
            decay: self.decay,
            branching_radius: self.branching_radius,
        }
    }
}

fn default_threshold() -> f64 {
    10.0
}

/// Which generator produces the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    /// Gibbs samples from the Subbotin graphical model.
    Subbotin { n: usize, nu: u32 },
    BlockMaxima { n_blocks: usize, block_size: usize },
    Pot {
        n: usize,
        #[serde(default = "default_threshold")]
        threshold: f64,
        #[serde(default)]
        hawkes: HawkesConfig,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Subbotin { .. } => "subbotin",
            Scenario::BlockMaxima { .. } => "block_maxima",
            Scenario::Pot { .. } => "pot",
        }
    }

    pub fn code(&self) -> u64 {
        match self {
            Scenario::Subbotin { .. } => 1,
            Scenario::BlockMaxima { .. } => 2,
            Scenario::Pot { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct GeneratorConfig {
    pub scenario: Scenario,
    pub p: usize,
    pub graph: GraphConfig,
    #[serde(default)]
    pub theta: ThetaConfig,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.graph.spec(self.p)?;
        match self.scenario {
            Scenario::Subbotin { n, nu } => {
                ShapeParam::new(nu)?;
                if n == 0 {
                    return Err(Error::InvalidParameter("n must be positive".into()));
                }
            }
            Scenario::BlockMaxima { n_blocks, block_size } => {
                if n_blocks == 0 || block_size < 2 {
                    return Err(Error::InvalidParameter("need n_blocks >= 1 and block_size >= 2".into()));
                }
            }
            Scenario::Pot { n, threshold, hawkes } => {
                hawkes.params().validate()?;
                if n == 0 || !(threshold > 0.0) {
                    return Err(Error::InvalidParameter("need n >= 1 and a positive threshold".into()));
                }
            }
        }
        if !matches!(self.scenario, Scenario::Pot { .. }) {
            self.theta.spec().validate()?;
        }
        Ok(())
    }
}

/// An estimator under comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    /// ℓν-loss neighborhood selection at a fixed shape.
    Subbotin { nu: u32 },
    /// ℓν-loss neighborhood selection with the shape chosen by stability
    /// selection (stability tuning only).
    SubbotinTuned { nu_grid: Vec<u32> },
    Gaussian,
    Quantile { tau: f64 },
    Copula { block_size: usize },
}

impl MethodConfig {
    pub fn name(&self) -> String {
        match self {
            MethodConfig::Subbotin { nu } => format!("subbotin({nu})"),
            MethodConfig::SubbotinTuned { nu_grid } => {
                let g: Vec<String> = nu_grid.iter().map(u32::to_string).collect();
                format!("subbotin({})", g.join("|"))
            }
            MethodConfig::Gaussian => "gaussian_ns".into(),
            MethodConfig::Quantile { tau } => format!("quantile({tau})"),
            MethodConfig::Copula { block_size } => format!("copula({block_size})"),
        }
    }
}

fn default_replicates() -> usize {
    subbotin_core::stability::DEFAULT_REPLICATES
}

fn default_grid_size() -> usize {
    subbotin_core::stability::DEFAULT_STABILITY_GRID_SIZE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tuning {
    /// Match the true edge count.
    Oracle,
    Stability {
        threshold: f64,
        #[serde(default = "default_replicates")]
        replicates: usize,
        #[serde(default = "default_grid_size")]
        grid_size: usize,
        /// Mean bootstrap block length; omitted means `ceil(sqrt(n))`.
        #[serde(default)]
        mean_block_len: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub methods: Vec<MethodConfig>,
    pub tuning: Tuning,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub rule: Rule,
    /// Fill the `wall_time_ms` column. Off by default because timings make
    /// otherwise identical runs differ.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.generator.validate()?;
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods configured".into()));
        }
        let mut names: Vec<String> = self.methods.iter().map(MethodConfig::name).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("duplicate method {}", w[0])));
        }
        for m in &self.methods {
            match m {
                MethodConfig::Subbotin { nu } => {
                    ShapeParam::new(*nu)?;
                }
                MethodConfig::SubbotinTuned { nu_grid } => {
                    if nu_grid.is_empty() {
                        return Err(Error::InvalidParameter("empty nu_grid".into()));
                    }
                    for nu in nu_grid {
                        ShapeParam::new(*nu)?;
                    }
                    if self.tuning == Tuning::Oracle {
                        return Err(Error::InvalidParameter(
                            "subbotin_tuned chooses the shape by stability selection and needs stability tuning".into(),
                        ));
                    }
                }
                MethodConfig::Quantile { tau } => {
                    subbotin_core::solver::RegressionLoss::check(*tau)?;
                }
                MethodConfig::Copula { block_size } => {
                    if *block_size < 2 {
                        return Err(Error::InvalidParameter("copula block size must be >= 2".into()));
                    }
                }
                MethodConfig::Gaussian => {}
            }
        }
        if let Tuning::Stability { threshold, replicates, grid_size, mean_block_len } = self.tuning {
            if !(threshold > 0.0 && threshold <= 1.0) {
                return Err(Error::InvalidParameter(format!("stability threshold {threshold} outside (0, 1]")));
            }
            if replicates < 2 || grid_size == 0 {
                return Err(Error::InvalidParameter("stability needs >= 2 replicates and a non-empty grid".into()));
            }
            if let Some(b) = mean_block_len {
                if !(b >= 1.0) {
                    return Err(Error::InvalidParameter("mean_block_len must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

/// Top-level document for the `benchmark` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    /// Worker threads; omitted means all available cores.
    #[serde(default)]
    pub threads: Option<usize>,
}

/// Document for the `simulate` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct SimulateConfig {
    pub generator: GeneratorConfig,
    pub seed: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, serde_json::Error> {
    serde_json::from_str(text)
}
