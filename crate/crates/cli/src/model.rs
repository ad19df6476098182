//! Model construction from resolved settings.

use anyhow::{anyhow, bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tricf::operator::{
    bose_hubbard, discrete_schrodinger, non_bh_k5, singh_like, truncate, FiniteTridiagonal, LazySource, PotentialSpec,
};
use tricf::C64;

use crate::settings::{ModelKind, PotentialKind, Resolved};

/// Operator in the units the solvers work in, plus the constant that turns
/// its eigenvalues into physical energies.
pub enum Model {
    Finite { matrix: FiniteTridiagonal, shift: f64 },
    Unbounded(LazySource),
}

pub struct Catalogue {
    pub name: &'static str,
    pub keys: &'static str,
    pub about: &'static str,
}

pub const CATALOGUE: [Catalogue; 5] = [
    Catalogue {
        name: "bose-hubbard",
        keys: "n_bosons gamma window",
        about: "two-mode Bose-Hubbard chain, n_bosons + 1 rows, diagonal -i gamma (n - 2k)",
    },
    Catalogue {
        name: "non-bh-k5",
        keys: "gamma",
        about: "5x5 complex-symmetric alternative with couplings 8 and i sqrt(54)",
    },
    Catalogue {
        name: "discrete-schrodinger",
        keys: "potential eta h window",
        about: "three-point lattice -psi'' + V psi on x = k h, k = -M..=N; energies reported un-shifted",
    },
    Catalogue {
        name: "singh-like",
        keys: "window",
        about: "unbounded one-sided chain a_n = n, b_n = 4 n^2, c_(n+1) = -n; evaluated lazily unless a window is given",
    },
    Catalogue {
        name: "random",
        keys: "dim seed",
        about: "complex tridiagonal matrix with entries uniform in [-1, 1] + i [-1, 1], reproducible from the seed",
    },
];

fn potential(cfg: &Resolved) -> PotentialSpec {
    match cfg.potential.unwrap_or(PotentialKind::Harmonic) {
        PotentialKind::Harmonic => PotentialSpec::HarmonicTest,
        PotentialKind::BgReal => PotentialSpec::BuslaevGrecchiReal,
        PotentialKind::BgComplex => PotentialSpec::BuslaevGrecchiComplex {
            eta: cfg.eta.unwrap_or(1.0),
        },
    }
}

/// Random complex tridiagonal matrix on rows `0..dim`.
pub fn random_matrix(dim: usize, seed: u64) -> FiniteTridiagonal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let diag = (0..dim).map(&mut draw).collect();
    let upper = (1..dim).map(&mut draw).collect();
    let lower = (1..dim).map(&mut draw).collect();
    FiniteTridiagonal::new(0, diag, upper, lower).expect("consistent lengths")
}

pub fn build(cfg: &Resolved) -> Result<Model> {
    let cut = |m: FiniteTridiagonal| -> Result<FiniteTridiagonal> {
        match cfg.window {
            Some([a, b]) => truncate(&m, a, b).map_err(|e| anyhow!("window: {e}")),
            None => Ok(m),
        }
    };
    let finite = |matrix| Model::Finite { matrix, shift: 0.0 };
    Ok(match cfg.model {
        ModelKind::BoseHubbard => finite(cut(bose_hubbard(cfg.n_bosons.unwrap_or(2), cfg.gamma.unwrap_or(0.5))?)?),
        ModelKind::NonBhK5 => finite(cut(non_bh_k5(cfg.gamma.unwrap_or(0.5)))?),
        ModelKind::Random => finite(cut(random_matrix(cfg.dim.unwrap_or(8), cfg.seed))?),
        ModelKind::DiscreteSchrodinger => {
            let [m, n] = cfg.window.unwrap_or([400, 400]);
            if m + n == 0 {
                bail!("the lattice needs at least two sites");
            }
            let lat = discrete_schrodinger(&potential(cfg), -(m as i64), n as i64, cfg.h.unwrap_or(0.02))?;
            Model::Finite {
                matrix: lat.matrix,
                shift: lat.shift,
            }
        }
        ModelKind::SinghLike => match cfg.window {
            Some([a, b]) => finite(truncate(&singh_like(), a, b).map_err(|e| anyhow!("window: {e}"))?),
            None => Model::Unbounded(singh_like()),
        },
    })
}

impl Model {
    pub fn shift(&self) -> f64 {
        match self {
            Model::Finite { shift, .. } => *shift,
            Model::Unbounded(_) => 0.0,
        }
    }

    pub fn finite(&self, task: &str) -> Result<&FiniteTridiagonal> {
        match self {
            Model::Finite { matrix, .. } => Ok(matrix),
            Model::Unbounded(_) => bail!("{task} needs a finite operator; pass --window M N"),
        }
    }

    /// The operator with the shift folded back into the diagonal.
    pub fn physical(&self, task: &str) -> Result<FiniteTridiagonal> {
        let m = self.finite(task)?;
        let s = self.shift();
        if s == 0.0 {
            return Ok(m.clone());
        }
        let diag = m.diag_slice().iter().map(|a| a + s).collect();
        Ok(FiniteTridiagonal::new(m.offset(), diag, m.upper_slice().to_vec(), m.lower_slice().to_vec())?)
    }
}
