//! Run settings: command-line flags and config-file keys share one schema.
//! Flags override the file; everything left unset falls back to defaults that
//! are resolved up front so that output headers can print them.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    BoseHubbard,
    NonBhK5,
    DiscreteSchrodinger,
    SinghLike,
    Random,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::BoseHubbard => "bose-hubbard",
            ModelKind::NonBhK5 => "non-bh-k5",
            ModelKind::DiscreteSchrodinger => "discrete-schrodinger",
            ModelKind::SinghLike => "singh-like",
            ModelKind::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Harmonic,
    BgReal,
    BgComplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridFunction {
    /// `S_p(z)` at the anchor row.
    Secular,
    /// Rescaled `det(H - z)` from the fraction.
    Determinant,
}

/// Every key is optional here; see [`Resolved`] for the defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Config file (TOML) with the same keys as the flags, in snake_case.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Gain/loss strength of the Bose-Hubbard and non-BH models.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n_bosons: Option<u32>,
    /// Lattice potential of the discrete Schrödinger model.
    #[arg(long, value_enum)]
    pub potential: Option<PotentialKind>,
    /// Imaginary shift of the complex quartic potential.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Lattice spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Keep rows `-M..=N` of the model.
    #[arg(long, num_args = 2, value_names = ["M", "N"])]
    pub window: Option<Vec<u64>>,
    /// Rows of the random model.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Search box in physical energy units.
    #[arg(long, num_args = 4, value_names = ["RE0", "RE1", "IM0", "IM1"], allow_negative_numbers = true)]
    pub region: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    pub grid: Option<Vec<usize>>,
    /// Fraction tail tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    #[arg(long)]
    pub breakdown_eps: Option<f64>,
    /// Residual and verification threshold deciding the exit code.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub anchor: Option<i64>,
    /// Energy for `wavefunction`.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub energy: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub function: Option<GridFunction>,
    /// Number of random shifts for `factor-check`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Compare against the dense oracle.
    #[arg(long, num_args = 0, default_missing_value = "true")]
    pub verify: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { config: None, $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    /// `self` on top of the keys read from its `--config` file, if any.
    pub fn with_file(self) -> Result<Settings> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_file(&path)?;
        Ok(overlay!(
            file, self, model, gamma, n_bosons, potential, eta, h, window, dim, region, grid, tol, max_depth,
            newton_tol, breakdown_eps, threshold, anchor, energy, function, samples, verify, seed, out, format
        ))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let model = self.model.unwrap_or(ModelKind::BoseHubbard);
        let pair = |v: &Option<Vec<u64>>, name: &str| -> Result<Option<[u64; 2]>> {
            match v.as_deref() {
                None => Ok(None),
                Some([a, b]) => Ok(Some([*a, *b])),
                Some(other) => bail!("{name} needs 2 values, got {}", other.len()),
            }
        };
        let window = pair(&self.window, "window")?;
        let region = match self.region.as_deref() {
            None => None,
            Some([a, b, c, d]) => {
                if !(a < b) || !(c <= d) {
                    bail!("region needs re0 < re1 and im0 <= im1, got {a} {b} {c} {d}");
                }
                Some([*a, *b, *c, *d])
            }
            Some(other) => bail!("region needs 4 values, got {}", other.len()),
        };
        let grid = match self.grid.as_deref() {
            None => [101, 101],
            Some([nx, ny]) if *nx >= 2 && *ny >= 1 => [*nx, *ny],
            Some(other) => bail!("grid needs 2 values nx >= 2, ny >= 1, got {other:?}"),
        };
        let energy = match self.energy.as_deref() {
            None => None,
            Some([re, im]) => Some([*re, *im]),
            Some(other) => bail!("energy needs 2 values, got {}", other.len()),
        };
        let lattice = model == ModelKind::DiscreteSchrodinger;
        let potential = lattice.then(|| self.potential.unwrap_or(PotentialKind::Harmonic));
        let r = Resolved {
            model,
            gamma: matches!(model, ModelKind::BoseHubbard | ModelKind::NonBhK5).then(|| self.gamma.unwrap_or(0.5)),
            n_bosons: (model == ModelKind::BoseHubbard).then(|| self.n_bosons.unwrap_or(2)),
            potential,
            eta: (potential == Some(PotentialKind::BgComplex)).then(|| self.eta.unwrap_or(1.0)),
            h: lattice.then(|| self.h.unwrap_or(0.02)),
            window: if lattice { Some(window.unwrap_or([400, 400])) } else { window },
            dim: (model == ModelKind::Random).then(|| self.dim.unwrap_or(8)),
            region,
            grid,
            tol: self.tol.unwrap_or(1e-13),
            max_depth: self.max_depth.unwrap_or(1_000_000),
            newton_tol: self.newton_tol.unwrap_or(1e-14),
            breakdown_eps: self.breakdown_eps.unwrap_or(1e-14),
            threshold: self.threshold.unwrap_or(1e-8),
            anchor: self.anchor,
            energy,
            function: self.function.unwrap_or(GridFunction::Secular),
            samples: self.samples.unwrap_or(20),
            verify: self.verify.unwrap_or(false),
            seed: self.seed.unwrap_or(42),
            format: self.format.unwrap_or(Format::Csv),
            out: self.out.clone(),
        };
        r.validate()?;
        Ok(r)
    }
}

fn read_file(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Settings with every default filled in. Model-specific keys are present
/// only for the model they belong to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bosons: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[u64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<[f64; 4]>,
    pub grid: [usize; 2],
    pub tol: f64,
    pub max_depth: usize,
    pub newton_tol: f64,
    pub breakdown_eps: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<[f64; 2]>,
    pub function: GridFunction,
    pub samples: usize,
    pub verify: bool,
    pub seed: u64,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Resolved {
    fn validate(&self) -> Result<()> {
        let positive = |v: Option<f64>, name: &str| -> Result<()> {
            match v {
                Some(x) if !(x > 0.0) || !x.is_finite() => bail!("{name} must be positive and finite, got {x}"),
                _ => Ok(()),
            }
        };
        positive(self.h, "h")?;
        positive(self.eta, "eta")?;
        positive(Some(self.tol), "tol")?;
        positive(Some(self.newton_tol), "newton_tol")?;
        positive(Some(self.breakdown_eps), "breakdown_eps")?;
        positive(Some(self.threshold), "threshold")?;
        if self.n_bosons == Some(0) {
            bail!("n_bosons must be at least 1");
        }
        if matches!(self.dim, Some(d) if d < 1) {
            bail!("dim must be at least 1");
        }
        if self.max_depth == 0 {
            bail!("max_depth must be at least 1");
        }
        if self.samples == 0 {
            bail!("samples must be at least 1");
        }
        Ok(())
    }

    /// The resolved keys as TOML, in the format accepted by `--config`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data serializes")
    }
}
