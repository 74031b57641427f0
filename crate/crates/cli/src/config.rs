//! Command configs: JSON file first, command-line flags on top.

use std::path::{Path, PathBuf};

use clap::Args;
use qdisorder::hopfield::AuditOptions;
use qdisorder::ion_chain::{ModePolicy, TrapSpec};
use qdisorder::lattice::LatticeKind;
use qdisorder::sweep::{NeighborDecayConfig, SpinGlassConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{ConfigFile, Failure};

/// Reads a JSON document, reporting the offending field path on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Failure::Config(format!("{}: at `{field}`: {}", path.display(), e.inner()))
    })
}

fn load<T: DeserializeOwned + Default>(file: &ConfigFile) -> Result<T, Failure> {
    match &file.config {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

fn parse_policy(s: &str) -> Result<ModePolicy, String> {
    match s {
        "require-minimum" => Ok(ModePolicy::RequireMinimum),
        "allow-saddle" => Ok(ModePolicy::AllowSaddle),
        other => Err(format!("unknown mode policy `{other}` (require-minimum | allow-saddle)")),
    }
}

macro_rules! apply {
    ($cfg:expr, $args:expr, $($field:ident),+) => {
        $(if let Some(v) = $args.$field.clone() { $cfg.$field = v.into(); })+
    };
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub file: ConfigFile,
    #[arg(long)]
    pub lattice: Option<LatticeKind>,
    /// Extents per axis, e.g. `4,4`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub periodic: Option<bool>,
    /// Mean coupling J̄.
    #[arg(long, allow_negative_numbers = true)]
    pub jbar: Option<f64>,
    /// Coupling standard deviation Δ.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<u64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Longitudinal field h.
    #[arg(long, allow_negative_numbers = true)]
    pub field: Option<f64>,
    #[arg(long)]
    pub max_bonds: Option<usize>,
    #[arg(long)]
    pub validate_invariants: Option<bool>,
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<SpinGlassConfig, Failure> {
        let mut cfg: SpinGlassConfig = load(&self.file)?;
        apply!(cfg, self, lattice, periodic, jbar, delta, seed, realizations, t_max, points, field, validate_invariants);
        if let Some(d) = &self.dims {
            cfg.dims = Some(d.clone());
        }
        if let Some(m) = self.max_bonds {
            cfg.max_bonds = Some(m);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct NeighborDecayArgs {
    #[command(flatten)]
    pub file: ConfigFile,
    /// Lattice kinds, e.g. `chain1d,honeycomb2d,square2d,cubic3d`.
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<LatticeKind>>,
    #[arg(long, allow_negative_numbers = true)]
    pub jbar: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<u64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub max_bonds: Option<usize>,
}

impl NeighborDecayArgs {
    pub fn resolve(&self) -> Result<NeighborDecayConfig, Failure> {
        let mut cfg: NeighborDecayConfig = load(&self.file)?;
        apply!(cfg, self, kinds, jbar, delta, seed, realizations, t_max, points);
        if let Some(m) = self.max_bonds {
            cfg.max_bonds = Some(m);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IonChainConfig {
    pub n_ions: usize,
    pub amplitude: f64,
    pub exponent: f64,
    pub force: f64,
    pub mass: f64,
    pub mode_policy: ModePolicy,
}

impl Default for IonChainConfig {
    fn default() -> Self {
        Self { n_ions: 20, amplitude: 1.0, exponent: 0.5, force: 1.0, mass: 1.0, mode_policy: ModePolicy::AllowSaddle }
    }
}

impl IonChainConfig {
    pub fn trap(&self) -> Result<TrapSpec<f64>, Failure> {
        let trap = TrapSpec { mass: self.mass, ..TrapSpec::new(self.n_ions, self.amplitude, self.exponent)? }
            .with_force(self.force);
        trap.validate()?;
        Ok(trap)
    }
}

#[derive(Debug, Clone, Args)]
pub struct IonChainArgs {
    #[command(flatten)]
    pub file: ConfigFile,
    /// Number of ions.
    #[arg(long = "n")]
    pub n_ions: Option<usize>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub force: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    /// `require-minimum` or `allow-saddle`.
    #[arg(long, value_parser = parse_policy)]
    pub mode_policy: Option<ModePolicy>,
}

impl IonChainArgs {
    pub fn resolve(&self) -> Result<IonChainConfig, Failure> {
        let mut cfg: IonChainConfig = load(&self.file)?;
        apply!(cfg, self, n_ions, amplitude, exponent, force, mass, mode_policy);
        cfg.trap()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub from_ion_chain: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub seed: u64,
    pub basin_flips: Vec<usize>,
    pub basin_trials: usize,
    pub random_starts: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        let o = AuditOptions::default();
        Self {
            from_ion_chain: None,
            patterns: None,
            seed: o.seed,
            basin_flips: o.basin_flips,
            basin_trials: o.basin_trials,
            random_starts: o.random_starts,
        }
    }
}

impl AuditConfig {
    pub fn options(&self) -> AuditOptions {
        AuditOptions {
            basin_flips: self.basin_flips.clone(),
            basin_trials: self.basin_trials,
            random_starts: self.random_starts,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub file: ConfigFile,
    /// JSON report written by `ion-chain solve`.
    #[arg(long, conflicts_with = "patterns")]
    pub from_ion_chain: Option<PathBuf>,
    /// JSON array of ±1 patterns; couplings follow the Hebbian rule.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub basin_flips: Option<Vec<usize>>,
    #[arg(long)]
    pub basin_trials: Option<usize>,
    #[arg(long)]
    pub random_starts: Option<usize>,
}

impl AuditArgs {
    pub fn resolve(&self) -> Result<AuditConfig, Failure> {
        let mut cfg: AuditConfig = load(&self.file)?;
        apply!(cfg, self, seed, basin_flips, basin_trials, random_starts);
        if self.from_ion_chain.is_some() || self.patterns.is_some() {
            cfg.from_ion_chain = self.from_ion_chain.clone();
            cfg.patterns = self.patterns.clone();
        }
        match (&cfg.from_ion_chain, &cfg.patterns) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => {
                return Err(Failure::Config(
                    "exactly one of --from-ion-chain and --patterns is required".into(),
                ))
            }
        }
        if cfg.basin_trials == 0 {
            return Err(Failure::Config("basin_trials must be positive".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnnConfig {
    pub n_ions: usize,
    pub amplitude: f64,
    pub exponent: f64,
    pub force: f64,
    pub pair: (usize, usize),
    pub bprime: f64,
    /// Grid span in units of `1 / max|J|`.
    pub span: f64,
    pub points: usize,
    pub mode_policy: ModePolicy,
}

impl Default for QnnConfig {
    fn default() -> Self {
        Self {
            n_ions: 6,
            amplitude: 0.5,
            exponent: 2.0,
            force: 1.0,
            pair: (0, 1),
            bprime: 0.0,
            span: qdisorder::qnn::DEFAULT_GRID_SPAN,
            points: qdisorder::qnn::DEFAULT_GRID_POINTS,
            mode_policy: ModePolicy::RequireMinimum,
        }
    }
}

impl QnnConfig {
    pub fn trap(&self) -> Result<TrapSpec<f64>, Failure> {
        Ok(TrapSpec::new(self.n_ions, self.amplitude, self.exponent)?.with_force(self.force))
    }
}

#[derive(Debug, Clone, Args)]
pub struct QnnArgs {
    #[command(flatten)]
    pub file: ConfigFile,
    #[arg(long = "n")]
    pub n_ions: Option<usize>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub force: Option<f64>,
    /// Two ion indices.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub pair: Option<Vec<usize>>,
    #[arg(long, allow_negative_numbers = true)]
    pub bprime: Option<f64>,
    #[arg(long)]
    pub span: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_parser = parse_policy)]
    pub mode_policy: Option<ModePolicy>,
}

impl QnnArgs {
    pub fn resolve(&self) -> Result<QnnConfig, Failure> {
        let mut cfg: QnnConfig = load(&self.file)?;
        apply!(cfg, self, n_ions, amplitude, exponent, force, bprime, span, points, mode_policy);
        if let Some(p) = &self.pair {
            cfg.pair = (p[0], p[1]);
        }
        cfg.trap()?;
        if !(cfg.span > 0.0) || cfg.points < 2 {
            return Err(Failure::Config("time grid needs span > 0 and at least 2 points".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnnSizesConfig {
    pub sizes: Vec<usize>,
    pub amplitude: f64,
    pub exponent: f64,
    pub mode_policy: ModePolicy,
}

impl Default for QnnSizesConfig {
    fn default() -> Self {
        Self { sizes: vec![3, 4, 5, 6, 7, 8], amplitude: 0.5, exponent: 2.0, mode_policy: ModePolicy::RequireMinimum }
    }
}

#[derive(Debug, Clone, Args)]
pub struct QnnSizesArgs {
    #[command(flatten)]
    pub file: ConfigFile,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long, value_parser = parse_policy)]
    pub mode_policy: Option<ModePolicy>,
}

impl QnnSizesArgs {
    pub fn resolve(&self) -> Result<QnnSizesConfig, Failure> {
        let mut cfg: QnnSizesConfig = load(&self.file)?;
        apply!(cfg, self, sizes, amplitude, exponent, mode_policy);
        if cfg.sizes.iter().any(|&n| n < 2) || cfg.sizes.is_empty() {
            return Err(Failure::Config("sizes must be a nonempty list of chain lengths ≥ 2".into()));
        }
        Ok(cfg)
    }
}
