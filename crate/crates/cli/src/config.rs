use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use dog_lcu::analysis::{FieldKind, SmoothField};
use dog_lcu::{GridSpec, KernelPair, Stencil, StencilShape};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Default ceiling on the full register dimension `2^{1+s}·N^D`.
pub const DEFAULT_MAX_DIM_CAP: usize = 1 << 14;

/// Everything a command needs. The TOML form uses the same names as the
/// command-line flags, with underscores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub n_points: Vec<usize>,
    pub radius: usize,
    pub shape: StencilShape,
    pub sigma_p: f64,
    pub sigma_q: f64,
    pub field: FieldKind,
    pub out: PathBuf,
    pub tol: f64,
    pub max_dim_cap: usize,
    /// Worker threads for sweeps; `0` uses every core.
    pub threads: usize,
    pub seed: u64,
    pub inject_asymmetry: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            n_points: vec![16],
            radius: 3,
            shape: StencilShape::Hypercube,
            sigma_p: 0.8,
            sigma_q: 1.6,
            field: FieldKind::Sin1d,
            out: PathBuf::from("out"),
            tol: 1e-10,
            max_dim_cap: DEFAULT_MAX_DIM_CAP,
            threads: 0,
            seed: 0,
            inject_asymmetry: false,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Spatial dimension D
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Grid points per axis; repeat or comma-separate for sweeps
    #[arg(long = "n-points", global = true, value_delimiter = ',')]
    pub n_points: Vec<usize>,
    /// Stencil radius R
    #[arg(long, global = true)]
    pub radius: Option<usize>,
    /// Stencil shape: hypercube or cross
    #[arg(long, global = true)]
    pub shape: Option<StencilShape>,
    #[arg(long, global = true)]
    pub sigma_p: Option<f64>,
    #[arg(long, global = true)]
    pub sigma_q: Option<f64>,
    /// Test field: sin1d, sin-product, constant or gaussian-bump
    #[arg(long, global = true)]
    pub field: Option<FieldKind>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Residual tolerance for verification checks
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest full register dimension simulated
    #[arg(long, global = true)]
    pub max_dim_cap: Option<usize>,
    /// Sweep worker threads (0 = all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized checks
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig { path: path.into(), source })?;
        Self::from_toml(&text).map_err(|source| CliError::ParseConfig { path: path.into(), source })
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// Flags win over file values.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.dim {
            self.dim = v;
        }
        if !o.n_points.is_empty() {
            self.n_points = o.n_points.clone();
        }
        if let Some(v) = o.radius {
            self.radius = v;
        }
        if let Some(v) = o.shape {
            self.shape = v;
        }
        if let Some(v) = o.sigma_p {
            self.sigma_p = v;
        }
        if let Some(v) = o.sigma_q {
            self.sigma_q = v;
        }
        if let Some(v) = o.field {
            self.field = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.tol {
            self.tol = v;
        }
        if let Some(v) = o.max_dim_cap {
            self.max_dim_cap = v;
        }
        if let Some(v) = o.threads {
            self.threads = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.dim == 0 {
            return Err(CliError::Config("dim must be at least 1".into()));
        }
        if self.n_points.is_empty() {
            return Err(CliError::Config("n_points must list at least one grid size".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_dim_cap == 0 {
            return Err(CliError::Config("max_dim_cap must be positive".into()));
        }
        for &n in &self.n_points {
            GridSpec::with_points(self.dim, n)?;
        }
        self.kernel()?;
        Ok(())
    }

    pub fn stencil(&self) -> CliResult<Stencil> {
        Ok(Stencil::new(self.dim, self.radius, self.shape)?)
    }

    /// Gaussian pair, or with `inject_asymmetry` a pair whose `p` is tilted
    /// along the first axis so that `A_h` stops being Hermitian.
    pub fn kernel(&self) -> CliResult<KernelPair> {
        let stencil = self.stencil()?;
        let kp = KernelPair::gaussian(stencil.clone(), self.sigma_p, self.sigma_q)?;
        if !self.inject_asymmetry {
            return Ok(kp);
        }
        let span = self.radius as f64 + 1.0;
        let tilted: Vec<f64> = kp
            .p()
            .iter()
            .zip(stencil.offsets())
            .map(|(w, t)| w * (1.0 + 0.5 * t[0] as f64 / span))
            .collect();
        let total: f64 = tilted.iter().sum();
        let p = tilted.iter().map(|w| w / total).collect();
        Ok(KernelPair::from_weights(stencil, p, kp.q().to_vec())?)
    }

    pub fn grid(&self, points: usize) -> CliResult<GridSpec> {
        Ok(GridSpec::with_points(self.dim, points)?)
    }

    pub fn smooth_field(&self) -> SmoothField {
        self.field.build(self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn awkward_values_round_trip() {
        let cfg = ExperimentConfig {
            dim: 2,
            n_points: vec![4, 8, 1024],
            shape: StencilShape::Cross,
            sigma_p: 0.1 + 0.2,
            sigma_q: 1.0 / 3.0,
            field: FieldKind::GaussianBump,
            tol: 2.5e-13,
            seed: u32::MAX as u64 + 7,
            inject_asymmetry: true,
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = ExperimentConfig::from_toml("radius = 1\nshape = \"cross\"\n").unwrap();
        assert_eq!(cfg.radius, 1);
        assert_eq!(cfg.shape, StencilShape::Cross);
        assert_eq!(cfg.n_points, vec![16]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("sigma = 1.0\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = ExperimentConfig::from_toml("dim = 2\nn_points = [4]\n").unwrap();
        cfg.apply(&Overrides { n_points: vec![8, 16], sigma_q: Some(2.0), ..Default::default() });
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.n_points, vec![8, 16]);
        assert_eq!(cfg.sigma_q, 2.0);
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = [
            ExperimentConfig { dim: 0, ..Default::default() },
            ExperimentConfig { n_points: vec![], ..Default::default() },
            ExperimentConfig { n_points: vec![12], ..Default::default() },
            ExperimentConfig { sigma_p: -1.0, ..Default::default() },
            ExperimentConfig { tol: 0.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn injected_asymmetry_breaks_symmetry() {
        let cfg = ExperimentConfig { inject_asymmetry: true, ..Default::default() };
        let kp = cfg.kernel().unwrap();
        assert!(!kp.is_symmetric());
        assert!((kp.p().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
