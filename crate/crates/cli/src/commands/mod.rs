pub mod bench;
pub mod certify;
pub mod oracle;
pub mod selftest;

use implicert_core::certifier::{wire_parameters, CertifierConfig};
use implicert_core::{Instance, TreeParams};

use crate::{CliError, CliResult, ModeArg};

/// Parses the '0'/'1' wire format and checks the length against the model.
pub fn parse_instance(text: &str, dimension: usize) -> CliResult<Instance> {
    let x = Instance::parse_bitstring(text)?;
    if x.dimension() != dimension {
        return Err(CliError::Usage(format!(
            "instance has {} features but the model expects {dimension}",
            x.dimension()
        )));
    }
    Ok(x)
}

/// Shared certification knobs; `--depth`/`--d-bound` feed the parameter
/// wiring, `--p`/`--eta` override the wired values afterwards.
#[derive(clap::Args, serde::Serialize, Clone)]
pub struct CertifyKnobs {
    /// Precision target
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Confidence parameter
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Explicit tree depth k, overriding the d-bound wiring
    #[arg(long)]
    pub depth: Option<usize>,
    /// Bound on the eps-error decision-tree depth of the model
    #[arg(long)]
    pub d_bound: Option<f64>,
    /// Noise rate override
    #[arg(long)]
    pub p: Option<f64>,
    /// Score tolerance override
    #[arg(long)]
    pub eta: Option<f64>,
    /// RNG seed
    #[arg(long, env = "IMPLICERT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Score estimation mode
    #[arg(long, value_enum, default_value_t = ModeArg::Mc)]
    pub mode: ModeArg,
    /// Allow early leaves on near-constant subfunctions
    #[arg(long)]
    pub prune: bool,
    /// Also run the greedy precision-gain baseline
    #[arg(long)]
    pub baseline: bool,
    /// Worker threads: 1 = serial (default), 0 = one per core
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

impl CertifyKnobs {
    pub fn build(&self, dimension: usize) -> CliResult<(CertifierConfig, TreeParams)> {
        let mut cfg = CertifierConfig::new(self.epsilon, self.delta)?
            .with_seed(self.seed)
            .with_mode(self.mode.to_score_mode())
            .with_prune(self.prune);
        if let Some(k) = self.depth {
            cfg = cfg.with_depth(k);
        }
        if let Some(b) = self.d_bound {
            cfg = cfg.with_d_bound(b);
        }
        let mut params = wire_parameters(&cfg, dimension)?;
        if let Some(p) = self.p {
            params.noise_rate = p;
        }
        if let Some(eta) = self.eta {
            params.score_tolerance = eta;
        }
        params.validate(dimension)?;
        Ok((cfg, params))
    }
}
