//! Tridiagonal operators, index windows and the model families.
//!
//! Row `j` of an operator carries the diagonal entry `a_j`, the superdiagonal
//! entry `b_j` (coupling to `j + 1`) and the subdiagonal entry `c_j` (coupling
//! to `j - 1`). Rows are labelled by signed integers so that the same storage
//! serves chains starting at row 1 and doubly-infinite chains centred on row 0.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::DenseMatrix;
use crate::{C64, I};

/// Inclusive range of row labels, possibly unbounded on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Window {
    pub fn finite(lo: i64, hi: i64) -> Self {
        Window {
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    pub fn unbounded() -> Self {
        Window { lo: None, hi: None }
    }

    pub fn contains(&self, j: i64) -> bool {
        self.lo.is_none_or(|lo| j >= lo) && self.hi.is_none_or(|hi| j <= hi)
    }

    /// True when both `j` and `j + 1` are rows, i.e. `b_j` and `c_{j+1}` exist.
    pub fn has_link(&self, j: i64) -> bool {
        self.contains(j) && self.contains(j + 1)
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    /// Number of rows, `None` if unbounded.
    pub fn len(&self) -> Option<usize> {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) if hi >= lo => Some((hi - lo + 1) as usize),
            (Some(_), Some(_)) => Some(0),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn intersect(&self, other: &Window) -> Window {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Window { lo, hi }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Some(lo) => write!(f, "[{lo}, ")?,
            None => write!(f, "(-inf, ")?,
        }
        match self.hi {
            Some(hi) => write!(f, "{hi}]"),
            None => write!(f, "+inf)"),
        }
    }
}

/// Declared divergence of `|a_j|` towards the ends of the window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Growth {
    pub down: bool,
    pub up: bool,
}

/// Lazily evaluated tridiagonal coefficients.
///
/// `upper(j)` may only be queried when `j` and `j + 1` are both in the window,
/// `lower(j)` when `j - 1` and `j` are. Implementations panic otherwise.
/// Evaluation must be pure: repeated and concurrent queries return identical
/// values.
pub trait CoefficientSource: Send + Sync {
    fn window(&self) -> Window;
    fn diag(&self, j: i64) -> C64;
    fn upper(&self, j: i64) -> C64;
    fn lower(&self, j: i64) -> C64;
    fn growth(&self) -> Growth {
        Growth::default()
    }
}

impl<S: CoefficientSource + ?Sized> CoefficientSource for &S {
    fn window(&self) -> Window {
        (**self).window()
    }
    fn diag(&self, j: i64) -> C64 {
        (**self).diag(j)
    }
    fn upper(&self, j: i64) -> C64 {
        (**self).upper(j)
    }
    fn lower(&self, j: i64) -> C64 {
        (**self).lower(j)
    }
    fn growth(&self) -> Growth {
        (**self).growth()
    }
}

impl<S: CoefficientSource + ?Sized> CoefficientSource for Arc<S> {
    fn window(&self) -> Window {
        (**self).window()
    }
    fn diag(&self, j: i64) -> C64 {
        (**self).diag(j)
    }
    fn upper(&self, j: i64) -> C64 {
        (**self).upper(j)
    }
    fn lower(&self, j: i64) -> C64 {
        (**self).lower(j)
    }
    fn growth(&self) -> Growth {
        (**self).growth()
    }
}

/// Dense snapshot of a finite tridiagonal operator.
///
/// `diag[k]` is `a_{offset+k}`, `upper[k]` is `b_{offset+k}` and `lower[k]` is
/// `c_{offset+k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTridiagonal {
    offset: i64,
    diag: Vec<C64>,
    upper: Vec<C64>,
    lower: Vec<C64>,
}

impl FiniteTridiagonal {
    pub fn new(offset: i64, diag: Vec<C64>, upper: Vec<C64>, lower: Vec<C64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if upper.len() + 1 != diag.len() || lower.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "inconsistent lengths: diag {}, upper {}, lower {}",
                diag.len(),
                upper.len(),
                lower.len()
            )));
        }
        Ok(FiniteTridiagonal {
            offset,
            diag,
            upper,
            lower,
        })
    }

    /// Operator with all off-diagonal couplings zero.
    pub fn diagonal(offset: i64, diag: Vec<C64>) -> Result<Self> {
        let n = diag.len().saturating_sub(1);
        Self::new(offset, diag, vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n])
    }

    /// Complex-symmetric operator (`b_j = c_{j+1}`).
    pub fn symmetric(offset: i64, diag: Vec<C64>, off: Vec<C64>) -> Result<Self> {
        Self::new(offset, diag, off.clone(), off)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn lo(&self) -> i64 {
        self.offset
    }

    pub fn hi(&self) -> i64 {
        self.offset + self.diag.len() as i64 - 1
    }

    pub fn diag_slice(&self) -> &[C64] {
        &self.diag
    }

    pub fn upper_slice(&self) -> &[C64] {
        &self.upper
    }

    pub fn lower_slice(&self) -> &[C64] {
        &self.lower
    }

    /// Same coefficients, first row relabelled to `offset`.
    pub fn reindexed(&self, offset: i64) -> Self {
        FiniteTridiagonal {
            offset,
            ..self.clone()
        }
    }

    /// Transpose: superdiagonal and subdiagonal swapped.
    pub fn transpose(&self) -> Self {
        FiniteTridiagonal {
            offset: self.offset,
            diag: self.diag.clone(),
            upper: self.lower.clone(),
            lower: self.upper.clone(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        FiniteTridiagonal {
            offset: self.offset,
            diag: self.diag.iter().map(|x| x.conj()).collect(),
            upper: self.lower.iter().map(|x| x.conj()).collect(),
            lower: self.upper.iter().map(|x| x.conj()).collect(),
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.upper)
            .chain(&self.lower)
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n);
        for k in 0..n {
            m[(k, k)] = self.diag[k];
            if k + 1 < n {
                m[(k, k + 1)] = self.upper[k];
                m[(k + 1, k)] = self.lower[k];
            }
        }
        m
    }

    /// `(H - z) x` for a vector laid out from row `lo()`.
    pub fn apply_shifted(&self, z: C64, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|k| {
                let mut acc = (self.diag[k] - z) * x[k];
                if k + 1 < n {
                    acc += self.upper[k] * x[k + 1];
                }
                if k > 0 {
                    acc += self.lower[k - 1] * x[k - 1];
                }
                acc
            })
            .collect()
    }

    fn pos(&self, j: i64) -> usize {
        assert!(
            j >= self.lo() && j <= self.hi(),
            "row {j} outside window [{}, {}]",
            self.lo(),
            self.hi()
        );
        (j - self.offset) as usize
    }
}

impl CoefficientSource for FiniteTridiagonal {
    fn window(&self) -> Window {
        Window::finite(self.lo(), self.hi())
    }

    fn diag(&self, j: i64) -> C64 {
        self.diag[self.pos(j)]
    }

    fn upper(&self, j: i64) -> C64 {
        assert!(j < self.hi(), "b_{j} requested at the upper edge");
        self.upper[self.pos(j)]
    }

    fn lower(&self, j: i64) -> C64 {
        assert!(j > self.lo(), "c_{j} requested at the lower edge");
        self.lower[self.pos(j) - 1]
    }
}

type CoefFn = Arc<dyn Fn(i64) -> C64 + Send + Sync>;

/// Coefficient source defined by closures over a possibly unbounded window.
#[derive(Clone)]
pub struct LazySource {
    label: String,
    window: Window,
    growth: Growth,
    a: CoefFn,
    b: CoefFn,
    c: CoefFn,
}

impl LazySource {
    pub fn new(
        label: impl Into<String>,
        window: Window,
        growth: Growth,
        a: impl Fn(i64) -> C64 + Send + Sync + 'static,
        b: impl Fn(i64) -> C64 + Send + Sync + 'static,
        c: impl Fn(i64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        LazySource {
            label: label.into(),
            window,
            growth,
            a: Arc::new(a),
            b: Arc::new(b),
            c: Arc::new(c),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same coefficients on a narrower window.
    pub fn restricted(&self, window: Window) -> Self {
        LazySource {
            window: self.window.intersect(&window),
            ..self.clone()
        }
    }
}

impl fmt::Debug for LazySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazySource")
            .field("label", &self.label)
            .field("window", &self.window)
            .field("growth", &self.growth)
            .finish()
    }
}

impl CoefficientSource for LazySource {
    fn window(&self) -> Window {
        self.window
    }

    fn diag(&self, j: i64) -> C64 {
        assert!(self.window.contains(j), "row {j} outside {}", self.window);
        (self.a)(j)
    }

    fn upper(&self, j: i64) -> C64 {
        assert!(self.window.has_link(j), "b_{j} outside {}", self.window);
        (self.b)(j)
    }

    fn lower(&self, j: i64) -> C64 {
        assert!(self.window.has_link(j - 1), "c_{j} outside {}", self.window);
        (self.c)(j)
    }

    fn growth(&self) -> Growth {
        self.growth
    }
}

/// Copy of the source restricted to rows `[-m, n]`.
pub fn truncate<S: CoefficientSource + ?Sized>(source: &S, m: u64, n: u64) -> Result<FiniteTridiagonal> {
    let want = Window::finite(-(m as i64), n as i64);
    truncate_window(source, want)
}

/// Copy of the source on the intersection of its window with `want`.
pub fn truncate_window<S: CoefficientSource + ?Sized>(source: &S, want: Window) -> Result<FiniteTridiagonal> {
    let w = source.window().intersect(&want);
    let (lo, hi) = match (w.lo, w.hi) {
        (Some(lo), Some(hi)) if lo <= hi => (lo, hi),
        _ => {
            return Err(Error::EmptyWindow {
                lo: want.lo.unwrap_or(i64::MIN),
                hi: want.hi.unwrap_or(i64::MAX),
            })
        }
    };
    let diag = (lo..=hi).map(|j| source.diag(j)).collect();
    let upper = (lo..hi).map(|j| source.upper(j)).collect();
    let lower = (lo + 1..=hi).map(|j| source.lower(j)).collect();
    FiniteTridiagonal::new(lo, diag, upper, lower)
}

/// Two-mode Bose-Hubbard Hamiltonian with `n` bosons and gain/loss `gamma`,
/// non-interacting and with unit tunnelling.
///
/// Row `k = 0..=n` (top to bottom) has `a = -i gamma (n - 2k)` and couples to
/// row `k + 1` with `sqrt((k + 1)(n - k))` symmetrically. Rows are labelled
/// from `-ceil(n / 2)`, so even `n` is centred on row 0.
pub fn bose_hubbard(n: u32, gamma: f64) -> Result<FiniteTridiagonal> {
    bose_hubbard_interacting(n, gamma, 0.0)
}

/// Bose-Hubbard model with an additional on-site interaction entering the
/// diagonal as `(c / 2)(n - 2k)^2`. Experimental: only `c = 0` is verified
/// against closed forms.
pub fn bose_hubbard_interacting(n: u32, gamma: f64, c: f64) -> Result<FiniteTridiagonal> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "Bose-Hubbard model needs at least one boson".into(),
        ));
    }
    let nb = n as f64;
    let diag = (0..=n)
        .map(|k| {
            let m = nb - 2.0 * k as f64;
            -I * gamma * m + C64::new(0.5 * c * m * m, 0.0)
        })
        .collect();
    let off: Vec<C64> = (0..n)
        .map(|k| C64::new((((k + 1) * (n - k)) as f64).sqrt(), 0.0))
        .collect();
    let offset = -(n.div_ceil(2) as i64);
    FiniteTridiagonal::symmetric(offset, diag, off)
}

/// The 5×5 complex-symmetric non-Bose-Hubbard alternative, rows `-2..=2`.
pub fn non_bh_k5(gamma: f64) -> FiniteTridiagonal {
    let diag = [-4.0, -2.0, 0.0, 2.0, 4.0]
        .iter()
        .map(|&m| I * gamma * m)
        .collect();
    let s = I * 54f64.sqrt();
    let eight = C64::new(8.0, 0.0);
    FiniteTridiagonal::symmetric(-2, diag, vec![eight, s, s, eight]).expect("fixed 5x5 shape")
}

/// Potential tabulated at increasing abscissae, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    points: Vec<(f64, C64)>,
}

impl PotentialTable {
    pub fn new(mut points: Vec<(f64, C64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "potential table needs at least two points".into(),
            ));
        }
        if points.iter().any(|(x, v)| !x.is_finite() || !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite potential table entry".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate abscissa in potential table".into()));
        }
        Ok(PotentialTable { points })
    }

    /// Parses whitespace- or comma-separated columns `x re [im]`. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 2 or 3 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let x = num(cols[0])?;
            let re = num(cols[1])?;
            let im = if cols.len() == 3 { num(cols[2])? } else { 0.0 };
            points.push((x, C64::new(re, im)));
        }
        Self::new(points)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    pub fn eval(&self, x: f64) -> Option<C64> {
        let (lo, hi) = self.range();
        if x < lo || x > hi {
            return None;
        }
        let idx = self.points.partition_point(|p| p.0 <= x);
        if idx == self.points.len() {
            return Some(self.points[idx - 1].1);
        }
        let (x0, v0) = self.points[idx - 1];
        let (x1, v1) = self.points[idx];
        let t = (x - x0) / (x1 - x0);
        Some(v0 + (v1 - v0) * t)
    }
}

/// Local potentials for the lattice Schrödinger operator.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `x^2 (x - 1)^2 - x + 1/2`.
    BuslaevGrecchiReal,
    /// `-(x - i eta)^4 / 4 + (x - i eta)^2 / 4`, `eta > 0`.
    BuslaevGrecchiComplex { eta: f64 },
    /// `x^2`; the continuum spectrum is `1, 3, 5, ...`.
    HarmonicTest,
    Custom(PotentialTable),
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::BuslaevGrecchiComplex { eta } if !(*eta > 0.0) => Err(
                Error::InvalidParameter(format!("eta must be positive, got {eta}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> Result<C64> {
        match self {
            PotentialSpec::BuslaevGrecchiReal => {
                Ok(C64::new(x * x * (x - 1.0) * (x - 1.0) - x + 0.5, 0.0))
            }
            PotentialSpec::BuslaevGrecchiComplex { eta } => {
                let w = C64::new(x, -eta);
                let w2 = w * w;
                Ok(-w2 * w2 / 4.0 + w2 / 4.0)
            }
            PotentialSpec::HarmonicTest => Ok(C64::new(x * x, 0.0)),
            PotentialSpec::Custom(table) => table.eval(x).ok_or_else(|| {
                let (lo, hi) = table.range();
                Error::InvalidParameter(format!("x = {x} outside potential table [{lo}, {hi}]"))
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::BuslaevGrecchiReal => "buslaev-grecchi-real",
            PotentialSpec::BuslaevGrecchiComplex { .. } => "buslaev-grecchi-complex",
            PotentialSpec::HarmonicTest => "harmonic",
            PotentialSpec::Custom(_) => "custom",
        }
    }
}

/// Lattice Hamiltonian together with the energy shift it absorbed.
///
/// Physical energies are `eigenvalue(matrix) + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSchrodinger {
    pub matrix: FiniteTridiagonal,
    pub shift: f64,
    pub h: f64,
}

impl DiscreteSchrodinger {
    pub fn unshift(&self, e: C64) -> C64 {
        e + self.shift
    }
}

/// Three-point discretisation of `-psi'' + V psi` on `x_k = k h`, `k = lo..=hi`.
///
/// The diagonal is `V(x_k)` and every coupling is `-1/h^2`; the `2/h^2` from
/// the second difference is returned as `shift`.
pub fn discrete_schrodinger(
    potential: &PotentialSpec,
    lo: i64,
    hi: i64,
    h: f64,
) -> Result<DiscreteSchrodinger> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("lattice spacing must be positive, got {h}")));
    }
    if lo >= hi {
        return Err(Error::InvalidParameter(format!("empty lattice [{lo}, {hi}]")));
    }
    potential.validate()?;
    let diag = (lo..=hi)
        .map(|k| potential.eval(k as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    let hop = C64::new(-1.0 / (h * h), 0.0);
    let n = (hi - lo) as usize;
    let matrix = FiniteTridiagonal::symmetric(lo, diag, vec![hop; n])?;
    Ok(DiscreteSchrodinger {
        matrix,
        shift: 2.0 / (h * h),
        h,
    })
}

/// The same lattice operator on the whole of `Z`, evaluated lazily.
/// Tabulated potentials have finite support and are rejected.
pub fn schrodinger_lattice(potential: &PotentialSpec, h: f64) -> Result<LazySource> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("lattice spacing must be positive, got {h}")));
    }
    potential.validate()?;
    if matches!(potential, PotentialSpec::Custom(_)) {
        return Err(Error::InvalidParameter(
            "tabulated potentials cannot define an unbounded lattice".into(),
        ));
    }
    let pot = potential.clone();
    let hop = C64::new(-1.0 / (h * h), 0.0);
    Ok(LazySource::new(
        format!("lattice:{}", potential.name()),
        Window::unbounded(),
        Growth { down: true, up: true },
        move |j| pot.eval(j as f64 * h).expect("analytic potential"),
        move |_| hop,
        move |_| hop,
    ))
}

/// Synthetic one-sided chain with the growth pattern `a_n ~ n`,
/// `b_n ~ 4 n^2`, `c_{n+1} ~ n`: `a_n = n`, `b_n = 4 n^2`, `c_{n+1} = -n`,
/// rows `1, 2, ...`.
///
/// Not a model of any particular oscillator; it exists to exercise adaptive
/// depth control on a convergent unbounded fraction.
pub fn singh_like() -> LazySource {
    LazySource::new(
        "singh-like",
        Window {
            lo: Some(1),
            hi: None,
        },
        Growth { down: false, up: true },
        |n| C64::new(n as f64, 0.0),
        |n| C64::new(4.0 * (n * n) as f64, 0.0),
        |n| C64::new(-((n - 1) as f64), 0.0),
    )
}

/// Same chain with `c_{n+1} = +n`. The partial numerators `b_n c_{n+1}`
/// are then positive and grow like `4 n^3`, and the fraction oscillates
/// without converging; used to check that divergence is reported.
pub fn singh_like_divergent() -> LazySource {
    LazySource::new(
        "singh-like-divergent",
        Window {
            lo: Some(1),
            hi: None,
        },
        Growth { down: false, up: true },
        |n| C64::new(n as f64, 0.0),
        |n| C64::new(4.0 * (n * n) as f64, 0.0),
        |n| C64::new((n - 1) as f64, 0.0),
    )
}
