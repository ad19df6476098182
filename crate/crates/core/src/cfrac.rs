//! Scalar continued fractions over a tridiagonal coefficient source.
//!
//! Downward: `f_k = 1/(a_k - z - b_k f_{k+1} c_{k+1})`, started from zero past
//! the last row used. Upward: `f_j = 1/(a_j - z - c_j f_{j-1} b_{j-1})`.
//! The two meet at an anchor row `p` in the secular function
//! `S_p(z) = a_p - z - c_p f_{p-1} b_{p-1} - b_p f_{p+1} c_{p+1}`.

use crate::error::{Error, Result};
use crate::operator::{truncate_window, CoefficientSource, FiniteTridiagonal};
use crate::roots::{locate_roots, RootOptions, SearchRegion, Secular, SpectrumResult};
use crate::C64;

/// How deep a continued fraction over an unbounded (or very long) window is
/// evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthGrowth {
    /// Evaluate at depth `d`; depth `d/2` provides the tail estimate.
    Fixed(usize),
    /// Start at depth 16 and double until the tail is below `tol_tail`.
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfOptions {
    /// Convergence threshold on `|f(2d) - f(d)| / max(1, |f(2d)|)`.
    pub tol_tail: f64,
    pub max_depth: usize,
    /// Denominators smaller than this in magnitude raise the breakdown flag.
    pub breakdown_eps: f64,
    pub depth_growth: DepthGrowth,
}

impl Default for CfOptions {
    fn default() -> Self {
        CfOptions {
            tol_tail: 1e-13,
            max_depth: 1_000_000,
            breakdown_eps: 1e-14,
            depth_growth: DepthGrowth::Doubling,
        }
    }
}

impl CfOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_tail > 0.0) {
            return Err(Error::InvalidParameter(format!("tol_tail must be positive, got {}", self.tol_tail)));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
        }
        if !(self.breakdown_eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "breakdown_eps must be positive, got {}",
                self.breakdown_eps
            )));
        }
        if let DepthGrowth::Fixed(0) = self.depth_growth {
            return Err(Error::InvalidParameter("fixed depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// Value of a secular function (or of a single fraction) with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularEvaluation {
    pub value: C64,
    pub depth_down: usize,
    pub depth_up: usize,
    /// Magnitude of the last depth-increment change.
    pub tail_estimate: f64,
    pub breakdown: bool,
    /// False when `max_depth` was reached before the tail settled.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Level {
    Finite(C64),
    Pole,
}

/// One evaluation of a chain at a fixed depth. `den` is the denominator at the
/// start row (infinite when the start row sits on the far side of a pole).
#[derive(Debug, Clone, Copy)]
struct Chain {
    den: C64,
    f: Level,
    breakdown: bool,
    depth: usize,
}

fn inf() -> C64 {
    C64::new(f64::INFINITY, 0.0)
}

/// Product `b_j c_{j+1}` of the two couplings across link `(j, j + 1)`.
fn link<S: CoefficientSource + ?Sized>(s: &S, j: i64) -> C64 {
    s.upper(j) * s.lower(j + 1)
}

/// Evaluates the chain `start, start + step, ...` for at most `depth` rows.
fn chain_fixed<S: CoefficientSource + ?Sized>(s: &S, start: i64, step: i64, z: C64, depth: usize, eps: f64) -> Chain {
    let w = s.window();
    let mut last = start;
    let mut used = 1usize;
    while used < depth && w.contains(last + step) {
        last += step;
        used += 1;
    }
    let mut next = Level::Finite(C64::new(0.0, 0.0));
    let mut breakdown = false;
    let mut k = last;
    let mut den;
    loop {
        let coupling = if k == last {
            C64::new(0.0, 0.0)
        } else if step > 0 {
            link(s, k)
        } else {
            link(s, k - 1)
        };
        let base = s.diag(k) - z;
        den = match next {
            Level::Finite(f) => base - coupling * f,
            Level::Pole if coupling == C64::new(0.0, 0.0) => base,
            Level::Pole => inf(),
        };
        next = if den.re.is_infinite() {
            Level::Finite(C64::new(0.0, 0.0))
        } else if den == C64::new(0.0, 0.0) {
            breakdown = true;
            Level::Pole
        } else {
            if den.norm() < eps {
                breakdown = true;
            }
            Level::Finite(den.inv())
        };
        if k == start {
            break;
        }
        k -= step;
    }
    Chain {
        den,
        f: next,
        breakdown,
        depth: used,
    }
}

fn level_value(l: Level) -> C64 {
    match l {
        Level::Finite(f) => f,
        Level::Pole => inf(),
    }
}

fn rows_available<S: CoefficientSource + ?Sized>(s: &S, start: i64, step: i64) -> Option<usize> {
    let w = s.window();
    let end = if step > 0 { w.hi } else { w.lo };
    end.map(|e| ((e - start) * step + 1).max(0) as usize)
}

/// Evaluates the chain starting at `start` with the depth policy of `opts`.
fn chain<S: CoefficientSource + ?Sized>(s: &S, start: i64, step: i64, z: C64, opts: &CfOptions) -> (Chain, f64, bool) {
    let eps = opts.breakdown_eps;
    let avail = rows_available(s, start, step);
    if let Some(n) = avail {
        if n <= opts.max_depth && !matches!(opts.depth_growth, DepthGrowth::Fixed(d) if d < n) {
            return (chain_fixed(s, start, step, z, n, eps), 0.0, true);
        }
    }
    let change = |a: &Chain, b: &Chain| -> f64 {
        let (fa, fb) = (level_value(a.f), level_value(b.f));
        if fa == fb {
            return 0.0;
        }
        let d = (fa - fb).norm();
        if d.is_finite() {
            d / fb.norm().max(1.0)
        } else {
            f64::INFINITY
        }
    };
    match opts.depth_growth {
        DepthGrowth::Fixed(d) => {
            let d = d.min(opts.max_depth);
            let full = chain_fixed(s, start, step, z, d, eps);
            let half = chain_fixed(s, start, step, z, (d / 2).max(1), eps);
            let tail = change(&half, &full);
            (full, tail, tail < opts.tol_tail)
        }
        DepthGrowth::Doubling => {
            let mut d = 16.min(opts.max_depth);
            let mut prev = chain_fixed(s, start, step, z, d, eps);
            loop {
                if avail.is_some_and(|n| d >= n) {
                    return (prev, 0.0, true);
                }
                if d >= opts.max_depth {
                    return (prev, f64::INFINITY, false);
                }
                d = (2 * d).min(opts.max_depth);
                let cur = chain_fixed(s, start, step, z, d, eps);
                let tail = change(&prev, &cur);
                if tail < opts.tol_tail {
                    return (cur, tail, true);
                }
                if d >= opts.max_depth {
                    return (cur, tail, false);
                }
                prev = cur;
            }
        }
    }
}

fn require(s: &impl CoefficientSource, j: i64) -> Result<()> {
    if s.window().contains(j) {
        Ok(())
    } else {
        Err(Error::OutOfWindow { index: j })
    }
}

/// `f_start` from the downward recurrence over rows `start, start + 1, ...`.
pub fn descend_from<S: CoefficientSource>(source: &S, start: i64, z: C64, opts: &CfOptions) -> Result<(C64, SecularEvaluation)> {
    require(source, start)?;
    let (c, tail, converged) = chain(source, start, 1, z, opts);
    let f = level_value(c.f);
    Ok((
        f,
        SecularEvaluation {
            value: f,
            depth_down: c.depth,
            depth_up: 0,
            tail_estimate: tail,
            breakdown: c.breakdown,
            converged,
        },
    ))
}

/// `f_start` from the upward recurrence over rows `start, start - 1, ...`.
pub fn ascend_from<S: CoefficientSource>(source: &S, start: i64, z: C64, opts: &CfOptions) -> Result<(C64, SecularEvaluation)> {
    require(source, start)?;
    let (c, tail, converged) = chain(source, start, -1, z, opts);
    let f = level_value(c.f);
    Ok((
        f,
        SecularEvaluation {
            value: f,
            depth_down: 0,
            depth_up: c.depth,
            tail_estimate: tail,
            breakdown: c.breakdown,
            converged,
        },
    ))
}

/// `f_1(z)`.
pub fn descend<S: CoefficientSource>(source: &S, z: C64, opts: &CfOptions) -> Result<(C64, SecularEvaluation)> {
    descend_from(source, 1, z, opts)
}

/// `f_{-1}(z)`.
pub fn ascend<S: CoefficientSource>(source: &S, z: C64, opts: &CfOptions) -> Result<(C64, SecularEvaluation)> {
    ascend_from(source, -1, z, opts)
}

/// `S_0(z) = 1/f_0(z)`.
pub fn secular_two_sided<S: CoefficientSource>(source: &S, z: C64, opts: &CfOptions) -> Result<SecularEvaluation> {
    secular_two_sided_at(source, 0, z, opts)
}

/// `S_p(z) = a_p - z - c_p f_{p-1} b_{p-1} - b_p f_{p+1} c_{p+1}`.
///
/// The anchor may sit at an edge of the window; the missing branch then
/// contributes nothing. Zeros of `S_p` are the eigenvalues whose eigenvectors
/// do not vanish at row `p`.
pub fn secular_two_sided_at<S: CoefficientSource>(source: &S, anchor: i64, z: C64, opts: &CfOptions) -> Result<SecularEvaluation> {
    require(source, anchor)?;
    let w = source.window();
    let mut value = source.diag(anchor) - z;
    let mut out = SecularEvaluation {
        value,
        depth_down: 0,
        depth_up: 0,
        tail_estimate: 0.0,
        breakdown: false,
        converged: true,
    };
    for step in [1i64, -1] {
        let next = anchor + step;
        if !w.contains(next) {
            continue;
        }
        let coupling = if step > 0 { link(source, anchor) } else { link(source, anchor - 1) };
        let (c, tail, converged) = chain(source, next, step, z, opts);
        if step > 0 {
            out.depth_down = c.depth;
        } else {
            out.depth_up = c.depth;
        }
        out.tail_estimate = out.tail_estimate.max(tail);
        out.breakdown |= c.breakdown;
        out.converged &= converged;
        value -= match c.f {
            Level::Finite(f) => coupling * f,
            Level::Pole if coupling == C64::new(0.0, 0.0) => C64::new(0.0, 0.0),
            Level::Pole => inf(),
        };
    }
    out.value = value;
    Ok(out)
}

/// One-sided Green's function `G(z) = f_1(z)` for a window starting at row 1.
pub fn one_sided_green<S: CoefficientSource>(source: &S, z: C64, opts: &CfOptions) -> Result<C64> {
    check_one_sided(source)?;
    descend(source, z, opts).map(|r| r.0)
}

/// `1/f_1(z)`, evaluated as the top denominator so that poles of `G` are
/// plain zeros.
pub fn one_sided_secular<S: CoefficientSource>(source: &S, z: C64, opts: &CfOptions) -> Result<SecularEvaluation> {
    check_one_sided(source)?;
    let (c, tail, converged) = chain(source, 1, 1, z, opts);
    Ok(SecularEvaluation {
        value: c.den,
        depth_down: c.depth,
        depth_up: 0,
        tail_estimate: tail,
        breakdown: c.breakdown,
        converged,
    })
}

fn check_one_sided<S: CoefficientSource>(source: &S) -> Result<()> {
    match source.window().lo {
        Some(1) => Ok(()),
        lo => Err(Error::InvalidParameter(format!(
            "one-sided fraction needs a window starting at row 1, found {lo:?}"
        ))),
    }
}

/// Smallest `K <= kmax` (scanning from the first row of the window, or from
/// row 1 when the window is unbounded below) with `|c_{K+1}| <= eps` and
/// `|b_K c_{K+1}| <= eps^2`. The downward fraction from row 1 then terminates
/// exactly at depth `K`.
pub fn detect_termination<S: CoefficientSource>(source: &S, kmax: i64, eps: f64) -> Option<i64> {
    let w = source.window();
    let first = w.lo.unwrap_or(1);
    (first..=kmax)
        .take_while(|&k| w.contains(k))
        .find(|&k| {
            w.contains(k + 1) && {
                let c = source.lower(k + 1);
                c.norm() <= eps && (source.upper(k) * c).norm() <= eps * eps
            }
        })
}

/// `det(H - z)` as the product of all denominators of the downward fraction
/// over the whole window, kept as a unit phase and a logarithmic modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfDeterminant {
    pub phase: C64,
    pub log_abs: f64,
}

impl CfDeterminant {
    pub fn value(&self) -> C64 {
        self.phase * self.log_abs.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }
}

pub fn cf_determinant(h: &FiniteTridiagonal, z: C64) -> CfDeterminant {
    let (lo, hi) = (h.lo(), h.hi());
    let mut phase = C64::new(1.0, 0.0);
    let mut log_abs = 0.0;
    let acc = |v: C64, phase: &mut C64, log_abs: &mut f64| {
        let r = v.norm();
        if r == 0.0 {
            *log_abs = f64::NEG_INFINITY;
        } else {
            *phase *= v / r;
            *log_abs += r.ln();
        }
    };
    let mut f_next = C64::new(0.0, 0.0);
    let mut k = hi;
    while k >= lo {
        let coupling = if k == hi { C64::new(0.0, 0.0) } else { link(h, k) };
        let den = h.diag(k) - z - coupling * f_next;
        if den == C64::new(0.0, 0.0) && k > lo {
            // the pair (k, k - 1) contributes den_k * den_{k-1} = -b_{k-1} c_k
            let p = link(h, k - 1);
            if p == C64::new(0.0, 0.0) {
                acc(den, &mut phase, &mut log_abs);
                f_next = C64::new(0.0, 0.0);
                k -= 1;
                continue;
            }
            acc(-p, &mut phase, &mut log_abs);
            f_next = C64::new(0.0, 0.0);
            k -= 2;
            continue;
        }
        acc(den, &mut phase, &mut log_abs);
        if den != C64::new(0.0, 0.0) {
            f_next = den.inv();
        }
        k -= 1;
    }
    CfDeterminant { phase, log_abs }
}

/// `z -> det(H - z)` from the fraction, rescaled by a constant so that values
/// stay finite for long windows. Entire in `z` with exactly the eigenvalues as
/// zeros, hence suitable for the argument principle.
pub struct DeterminantSecular<'a> {
    h: &'a FiniteTridiagonal,
    log_ref: f64,
}

impl<'a> DeterminantSecular<'a> {
    pub fn new(h: &'a FiniteTridiagonal) -> Self {
        let scale = h.max_abs().max(f64::MIN_POSITIVE);
        DeterminantSecular {
            h,
            log_ref: h.dim() as f64 * scale.ln(),
        }
    }

    /// Scale fixed so that `|value| = 1` at `z_ref`. Keeps values near unity
    /// over a search region around `z_ref` when the entries are large and a
    /// norm-based scale would push them against the exponent clamp.
    pub fn anchored(h: &'a FiniteTridiagonal, z_ref: C64) -> Self {
        let d = cf_determinant(h, z_ref);
        if d.is_zero() || !d.log_abs.is_finite() {
            return Self::new(h);
        }
        DeterminantSecular { h, log_ref: d.log_abs }
    }
}

impl Secular for DeterminantSecular<'_> {
    fn eval(&self, z: C64) -> C64 {
        let d = cf_determinant(self.h, z);
        if d.is_zero() {
            return C64::new(0.0, 0.0);
        }
        d.phase * (d.log_abs - self.log_ref).clamp(-700.0, 700.0).exp()
    }
}

/// `z -> S_p(z)` as a root-finder handle.
pub struct TwoSidedSecular<'a, S> {
    pub source: &'a S,
    pub anchor: i64,
    pub opts: CfOptions,
}

impl<S: CoefficientSource> Secular for TwoSidedSecular<'_, S> {
    fn eval(&self, z: C64) -> C64 {
        self.eval_flagged(z).0
    }

    fn eval_flagged(&self, z: C64) -> (C64, bool) {
        match secular_two_sided_at(self.source, self.anchor, z, &self.opts) {
            Ok(e) => (e.value, e.breakdown),
            Err(_) => (C64::new(f64::NAN, f64::NAN), true),
        }
    }
}

/// `z -> 1/f_1(z)` as a root-finder handle.
pub struct OneSidedSecular<'a, S> {
    pub source: &'a S,
    pub opts: CfOptions,
}

impl<S: CoefficientSource> Secular for OneSidedSecular<'_, S> {
    fn eval(&self, z: C64) -> C64 {
        self.eval_flagged(z).0
    }

    fn eval_flagged(&self, z: C64) -> (C64, bool) {
        match one_sided_secular(self.source, z, &self.opts) {
            Ok(e) => (e.value, e.breakdown),
            Err(_) => (C64::new(f64::NAN, f64::NAN), true),
        }
    }
}

/// Default anchor rows: row 0 (or the nearest window row) and a second row a
/// little above it. An eigenvector of an irreducible chain cannot vanish on
/// two neighbouring rows, so together they resolve every eigenvalue.
pub fn default_anchors<S: CoefficientSource>(source: &S) -> Vec<i64> {
    let w = source.window();
    let clip = |j: i64| j.clamp(w.lo.unwrap_or(i64::MIN), w.hi.unwrap_or(i64::MAX));
    let center = clip(0);
    let step = w.len().map_or(1, |n| (n as i64 / 50).max(1));
    let second = if w.contains(center + step) { center + step } else { clip(center - step) };
    let mut out = vec![center];
    if second != center {
        out.push(second);
    }
    out
}

/// Eigenvalues inside `region` from the zeros of `S_p` over several anchors.
///
/// For finite windows the fraction determinant `prod 1/f_k` serves as the
/// argument-principle counter, and eigenvalues missed by every anchor are
/// recovered by deflating it.
pub fn spectrum<S: CoefficientSource>(
    source: &S,
    region: &SearchRegion,
    anchors: &[i64],
    opts: &CfOptions,
    ropts: &RootOptions,
) -> Result<SpectrumResult> {
    opts.validate()?;
    if anchors.is_empty() {
        return Err(Error::InvalidParameter("at least one anchor row is required".into()));
    }
    for &p in anchors {
        require(source, p)?;
    }
    let secs: Vec<TwoSidedSecular<'_, S>> = anchors
        .iter()
        .map(|&anchor| TwoSidedSecular {
            source,
            anchor,
            opts: *opts,
        })
        .collect();
    let handles: Vec<&dyn Secular> = secs.iter().map(|s| s as &dyn Secular).collect();
    let w = source.window();
    if w.is_finite() {
        let h = truncate_window(source, w)?;
        let det = DeterminantSecular::anchored(&h, region.reference_point());
        Ok(locate_roots(&handles, Some(&det), region, ropts))
    } else {
        Ok(locate_roots(&handles, None, region, ropts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{bose_hubbard, non_bh_k5, singh_like, singh_like_divergent, FiniteTridiagonal};
    use crate::oracle::lu_det;
    use crate::roots::SearchRegion;
    use crate::I;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_by_two() -> FiniteTridiagonal {
        FiniteTridiagonal::new(1, vec![c(0.0, -0.5), c(0.0, 0.5)], vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn two_by_two_closed_form() {
        let h = two_by_two();
        let o = CfOptions::default();
        let (f2, _) = descend_from(&h, 2, c(0.0, 0.0), &o).unwrap();
        assert!((f2 - c(0.0, -2.0)).norm() < 1e-15);
        let (f1, diag) = descend(&h, c(0.0, 0.0), &o).unwrap();
        assert!((f1 - c(0.0, -2.0 / 3.0)).norm() < 1e-15);
        assert!(!diag.breakdown && diag.converged);
        assert_eq!(one_sided_green(&h, c(0.0, 0.0), &o).unwrap(), f1);
    }

    #[test]
    fn green_function_blows_up_at_eigenvalues() {
        let h = two_by_two();
        let e = 0.75f64.sqrt();
        let o = CfOptions::default();
        for s in [1.0, -1.0] {
            let g = one_sided_green(&h, c(s * e + 1e-9, 0.0), &o).unwrap();
            assert!(g.norm() > 1e7);
        }
    }

    #[test]
    fn decoupled_chains() {
        let d = FiniteTridiagonal::diagonal(-2, vec![c(1.0, 0.0), c(2.0, 1.0), c(3.0, 0.0), c(4.0, 0.0), c(5.0, -1.0)]).unwrap();
        let o = CfOptions::default();
        let z = c(0.3, 0.2);
        let (f1, _) = descend(&d, z, &o).unwrap();
        assert!((f1 - (c(4.0, 0.0) - z).inv()).norm() < 1e-15);
        let (fm1, _) = ascend(&d, z, &o).unwrap();
        assert!((fm1 - (c(2.0, 1.0) - z).inv()).norm() < 1e-15);
        let s = secular_two_sided(&d, z, &o).unwrap();
        assert!((s.value - (c(3.0, 0.0) - z)).norm() < 1e-15);
    }

    #[test]
    fn ascend_at_window_edge() {
        let gamma = 0.5;
        let h = bose_hubbard(2, gamma).unwrap();
        let (fm1, _) = ascend(&h, c(0.0, 0.0), &CfOptions::default()).unwrap();
        assert!((fm1 - I / (2.0 * gamma)).norm() < 1e-15);
    }

    #[test]
    fn mirrored_source_gives_mirrored_fractions() {
        let a = [c(1.0, 0.5), c(-0.3, 0.1), c(0.2, 0.0), c(-0.3, 0.1), c(1.0, 0.5)];
        let b = [c(0.4, 0.0), c(0.7, 0.2), c(0.9, -0.1), c(0.1, 0.3)];
        let cc = [c(0.1, 0.3), c(0.9, -0.1), c(0.7, 0.2), c(0.4, 0.0)];
        // reflection j -> -j swaps the roles of b and c
        let h = FiniteTridiagonal::new(-2, a.to_vec(), b.to_vec(), cc.to_vec()).unwrap();
        let o = CfOptions::default();
        let z = c(0.05, -0.2);
        let (up, _) = ascend(&h, z, &o).unwrap();
        let (down, _) = descend(&h, z, &o).unwrap();
        assert!((up - down).norm() < 1e-14);
    }

    #[test]
    fn secular_root_of_three_boson_chain() {
        let h = bose_hubbard(2, 0.5).unwrap();
        let s = secular_two_sided(&h, c(0.0, 0.0), &CfOptions::default()).unwrap();
        assert!(s.value.norm() < 1e-14);
        let s = secular_two_sided(&h, c(0.3, 0.0), &CfOptions::default()).unwrap();
        assert!(s.value.norm() > 1e-3 && s.value.norm().is_finite());
    }

    #[test]
    fn determinant_product_matches_lu() {
        let h = non_bh_k5(0.3);
        for z in [c(0.1, 0.2), c(-3.0, 1.0), c(7.0, -2.5)] {
            let got = cf_determinant(&h, z).value();
            let want = lu_det(&h.to_dense(), z);
            assert!((got - want).norm() <= 1e-10 * want.norm());
        }
    }

    #[test]
    fn determinant_survives_exact_zero_denominator() {
        // bottom row a_2 - z = 0 at z = 1
        let h = FiniteTridiagonal::new(1, vec![c(3.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0)], vec![c(0.5, 0.0)]).unwrap();
        let z = c(1.0, 0.0);
        let got = cf_determinant(&h, z).value();
        let want = lu_det(&h.to_dense(), z);
        assert!((got - want).norm() < 1e-14, "{got} vs {want}");
        let (f1, diag) = descend(&h, z, &CfOptions::default()).unwrap();
        assert!(diag.breakdown);
        assert_eq!(f1, c(0.0, 0.0));
    }

    #[test]
    fn termination_detection() {
        let mut lower = vec![c(1.0, 0.0); 5];
        lower[2] = c(0.0, 0.0); // c_4
        let h = FiniteTridiagonal::new(1, vec![c(0.0, 0.0); 6], vec![c(1.0, 0.0); 5], lower.clone()).unwrap();
        assert_eq!(detect_termination(&h, 5, 0.0), Some(3));
        lower[2] = c(1e-18, 0.0);
        let h = FiniteTridiagonal::new(1, vec![c(0.0, 0.0); 6], vec![c(1.0, 0.0); 5], lower).unwrap();
        // the product b_3 c_4 = 1e-18 must also fall below eps^2
        assert_eq!(detect_termination(&h, 5, 1e-9), Some(3));
        assert_eq!(detect_termination(&h, 5, 1e-15), None);
        assert_eq!(detect_termination(&bose_hubbard(4, 0.5).unwrap(), 2, 1e-15), None);
    }

    #[test]
    fn growing_source_converges_under_doubling() {
        let s = singh_like();
        let (f1, diag) = descend(&s, c(0.5, 0.0), &CfOptions::default()).unwrap();
        assert!(diag.converged, "{diag:?}");
        assert!(diag.depth_down <= 16384);
        assert!((f1 - c(0.7540813778968699, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn divergent_source_is_reported() {
        let s = singh_like_divergent();
        let o = CfOptions {
            max_depth: 1 << 14,
            ..CfOptions::default()
        };
        let (_, diag) = descend(&s, c(0.5, 0.0), &o).unwrap();
        assert!(!diag.converged);
        assert_eq!(diag.depth_down, 1 << 14);
    }

    #[test]
    fn fixed_depth_reports_tail() {
        let s = singh_like();
        let o = CfOptions {
            depth_growth: DepthGrowth::Fixed(64),
            ..CfOptions::default()
        };
        let (_, diag) = descend(&s, c(0.5, 0.0), &o).unwrap();
        assert_eq!(diag.depth_down, 64);
        assert!(diag.tail_estimate > 0.0 && !diag.converged);
    }

    #[test]
    fn options_are_validated() {
        assert!(CfOptions::default().validate().is_ok());
        let bad = CfOptions {
            tol_tail: 0.0,
            ..CfOptions::default()
        };
        assert!(bad.validate().is_err());
        let bad = CfOptions {
            depth_growth: DepthGrowth::Fixed(0),
            ..CfOptions::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn five_row_spectrum_with_winding() {
        let h = bose_hubbard(4, 0.5).unwrap();
        let region = crate::roots::gershgorin_region(&h);
        let res = spectrum(&h, &region, &default_anchors(&h), &CfOptions::default(), &RootOptions::default()).unwrap();
        assert_eq!(res.count_by_winding, Some(5));
        let e = 3.0f64.sqrt();
        let want = [-2.0 * e, -e, 0.0, e, 2.0 * e];
        assert_eq!(res.roots.len(), 5, "{res:?}");
        for (r, w) in res.roots.iter().zip(want) {
            assert!((r.z - c(w, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn hermitian_limit_needs_second_anchor() {
        let h = bose_hubbard(2, 0.0).unwrap();
        let region = SearchRegion::new(-2.7, 2.9, -0.6, 0.7, 57, 13).unwrap();
        let only_center = spectrum(&h, &region, &[0], &CfOptions::default(), &RootOptions { deflation_rounds: 0, ..RootOptions::default() }).unwrap();
        assert_eq!(only_center.roots.len(), 2);
        let res = spectrum(&h, &region, &default_anchors(&h), &CfOptions::default(), &RootOptions::default()).unwrap();
        assert_eq!(res.roots.len(), 3);
        assert!(res.roots.iter().any(|r| r.z.norm() < 1e-10));
    }

    #[test]
    fn out_of_window_anchor_is_an_error() {
        let h = bose_hubbard(1, 0.5).unwrap();
        assert!(matches!(
            secular_two_sided_at(&h, 3, c(0.0, 0.0), &CfOptions::default()),
            Err(Error::OutOfWindow { index: 3 })
        ));
        assert!(one_sided_green(&h, c(0.0, 0.0), &CfOptions::default()).is_err());
    }
}
