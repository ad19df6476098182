//! Singular values through the Hermitian doubling `[[0, H], [H†, 0]]`.
//!
//! Interleaving rows of `H` with rows of `H†` turns the doubled matrix into a
//! block-tridiagonal operator with antidiagonal 2×2 blocks
//! `A_k = [[0, a_k], [a_k*, 0]]`, `B_k = [[0, b_k], [c_{k+1}*, 0]]`,
//! `C_{k+1} = B_k†`, whose eigenvalues are `±σ_n`.

use std::ops::{Add, Mul, Sub};

use crate::cfrac::{CfOptions, DepthGrowth, SecularEvaluation};
use crate::error::{Error, Result};
use crate::operator::{truncate_window, CoefficientSource, FiniteTridiagonal, Window};
use crate::oracle::DenseMatrix;
use crate::roots::{Root, SearchRegion, SpectrumResult};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// 2×2 complex matrix, `m[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn scalar(s: C64) -> Self {
        Mat2::new(s, ZERO, ZERO, s)
    }

    pub fn identity() -> Self {
        Mat2::scalar(C64::new(1.0, 0.0))
    }

    /// `[[0, x], [y, 0]]`.
    pub fn antidiagonal(x: C64, y: C64) -> Self {
        Mat2::new(ZERO, x, y, ZERO)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    /// Adjugate inverse; `None` when the determinant vanishes exactly.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO || !d.re.is_finite() || !d.im.is_finite() {
            return None;
        }
        let m = &self.m;
        let r = d.inv();
        Some(Mat2::new(m[1][1] * r, -m[0][1] * r, -m[1][0] * r, m[0][0] * r))
    }

    /// Number of negative eigenvalues of a Hermitian matrix (0, 1 or 2).
    /// A zero eigenvalue is not counted.
    pub fn negative_count(&self) -> usize {
        let d = self.det().re;
        let t = self.trace().re;
        if d < 0.0 {
            1
        } else if d > 0.0 {
            if t < 0.0 {
                2
            } else {
                0
            }
        } else if t < 0.0 {
            1
        } else {
            0
        }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.m, &o.m);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.m, &o.m);
        Mat2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.m, &o.m);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// `[[0, H], [H†, 0]]`.
pub fn double(h: &FiniteTridiagonal) -> DenseMatrix {
    let hd = h.to_dense();
    let n = h.dim();
    let mut out = DenseMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            out[(i, n + j)] = hd[(i, j)];
            out[(n + i, j)] = hd[(j, i)].conj();
        }
    }
    out
}

/// `perm[new] = old`: new position `2r` holds row `r` of `H`, position
/// `2r + 1` holds row `r` of `H†`.
pub fn interleave_permutation(dim: usize) -> Vec<usize> {
    (0..2 * dim).map(|p| if p % 2 == 0 { p / 2 } else { dim + p / 2 }).collect()
}

/// `V` with `V[perm[j], j] = 1`, so that `V^T M V` reorders `M` by `perm`.
pub fn permutation_matrix(perm: &[usize]) -> DenseMatrix {
    let mut v = DenseMatrix::zeros(perm.len());
    for (j, &i) in perm.iter().enumerate() {
        v[(i, j)] = C64::new(1.0, 0.0);
    }
    v
}

/// Lazy block view of the interleaved doubled operator.
#[derive(Debug, Clone)]
pub struct BlockTridiagonalOperator<S> {
    source: S,
}

/// Block form of a tridiagonal source; same window as the source.
pub fn block_form<S: CoefficientSource>(source: S) -> BlockTridiagonalOperator<S> {
    BlockTridiagonalOperator { source }
}

impl<S: CoefficientSource> BlockTridiagonalOperator<S> {
    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn window(&self) -> Window {
        self.source.window()
    }

    pub fn a(&self, k: i64) -> Mat2 {
        let a = self.source.diag(k);
        Mat2::antidiagonal(a, a.conj())
    }

    /// Coupling from block `k` to block `k + 1`.
    pub fn b(&self, k: i64) -> Mat2 {
        Mat2::antidiagonal(self.source.upper(k), self.source.lower(k + 1).conj())
    }

    /// Coupling from block `k` to block `k - 1`; equals `B_{k-1}†`.
    pub fn c(&self, k: i64) -> Mat2 {
        Mat2::antidiagonal(self.source.lower(k), self.source.upper(k - 1).conj())
    }

    /// Dense assembly over a finite window.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let w = self.window();
        let (lo, hi) = match (w.lo, w.hi) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(Error::InvalidParameter("dense assembly needs a finite window".into())),
        };
        let n = (hi - lo + 1) as usize;
        let mut out = DenseMatrix::zeros(2 * n);
        let mut put = |r: usize, c: usize, m: Mat2| {
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * r + i, 2 * c + j)] = m.m[i][j];
                }
            }
        };
        for k in lo..=hi {
            let r = (k - lo) as usize;
            put(r, r, self.a(k));
            if k < hi {
                put(r, r + 1, self.b(k));
                put(r + 1, r, self.c(k + 1));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
struct BlockChain {
    f: Mat2,
    breakdown: bool,
    depth: usize,
}

fn block_chain_fixed<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    start: i64,
    step: i64,
    sigma: f64,
    depth: usize,
    eps: f64,
) -> BlockChain {
    let w = blocks.window();
    let mut last = start;
    let mut used = 1usize;
    while used < depth && w.contains(last + step) {
        last += step;
        used += 1;
    }
    let shift = Mat2::scalar(C64::new(sigma, 0.0));
    let mut next = Mat2::zero();
    let mut breakdown = false;
    let mut k = last;
    loop {
        let mut d = blocks.a(k) - shift;
        if k != last {
            d = if step > 0 {
                d - blocks.b(k) * next * blocks.c(k + 1)
            } else {
                d - blocks.c(k) * next * blocks.b(k - 1)
            };
        }
        let scale = 1.0 + d.max_abs();
        if d.det().norm() < eps * scale * scale {
            breakdown = true;
        }
        next = match d.inverse() {
            Some(inv) => inv,
            None => {
                breakdown = true;
                (d + Mat2::scalar(C64::new(eps * scale, 0.0))).inverse().unwrap_or(Mat2::zero())
            }
        };
        if k == start {
            break;
        }
        k -= step;
    }
    BlockChain {
        f: next,
        breakdown,
        depth: used,
    }
}

fn block_chain<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    start: i64,
    step: i64,
    sigma: f64,
    opts: &CfOptions,
) -> (BlockChain, f64, bool) {
    let eps = opts.breakdown_eps;
    let w = blocks.window();
    let end = if step > 0 { w.hi } else { w.lo };
    let avail = end.map(|e| ((e - start) * step + 1).max(0) as usize);
    if let Some(n) = avail {
        if n <= opts.max_depth && !matches!(opts.depth_growth, DepthGrowth::Fixed(d) if d < n) {
            return (block_chain_fixed(blocks, start, step, sigma, n, eps), 0.0, true);
        }
    }
    let change = |a: &BlockChain, b: &BlockChain| (a.f - b.f).max_abs() / b.f.max_abs().max(1.0);
    match opts.depth_growth {
        DepthGrowth::Fixed(d) => {
            let d = d.min(opts.max_depth);
            let full = block_chain_fixed(blocks, start, step, sigma, d, eps);
            let half = block_chain_fixed(blocks, start, step, sigma, (d / 2).max(1), eps);
            let tail = change(&half, &full);
            (full, tail, tail < opts.tol_tail)
        }
        DepthGrowth::Doubling => {
            let mut d = 16.min(opts.max_depth);
            let mut prev = block_chain_fixed(blocks, start, step, sigma, d, eps);
            loop {
                if avail.is_some_and(|n| d >= n) {
                    return (prev, 0.0, true);
                }
                if d >= opts.max_depth {
                    return (prev, f64::INFINITY, false);
                }
                d = (2 * d).min(opts.max_depth);
                let cur = block_chain_fixed(blocks, start, step, sigma, d, eps);
                let tail = change(&prev, &cur);
                if tail < opts.tol_tail || d >= opts.max_depth {
                    return (cur, tail, tail < opts.tol_tail);
                }
                prev = cur;
            }
        }
    }
}

fn require<S: CoefficientSource>(blocks: &BlockTridiagonalOperator<S>, j: i64) -> Result<()> {
    if blocks.window().contains(j) {
        Ok(())
    } else {
        Err(Error::OutOfWindow { index: j })
    }
}

fn diag_of(c: &BlockChain, tail: f64, converged: bool, down: bool) -> SecularEvaluation {
    SecularEvaluation {
        value: c.f.det(),
        depth_down: if down { c.depth } else { 0 },
        depth_up: if down { 0 } else { c.depth },
        tail_estimate: tail,
        breakdown: c.breakdown,
        converged,
    }
}

/// `F_start` from `F_k = (A_k - σ - B_k F_{k+1} C_{k+1})^{-1}`.
pub fn mcf_descend_from<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    start: i64,
    sigma: f64,
    opts: &CfOptions,
) -> Result<(Mat2, SecularEvaluation)> {
    require(blocks, start)?;
    let (c, tail, conv) = block_chain(blocks, start, 1, sigma, opts);
    Ok((c.f, diag_of(&c, tail, conv, true)))
}

/// `F_start` from `F_j = (A_j - σ - C_j F_{j-1} B_{j-1})^{-1}`.
pub fn mcf_ascend_from<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    start: i64,
    sigma: f64,
    opts: &CfOptions,
) -> Result<(Mat2, SecularEvaluation)> {
    require(blocks, start)?;
    let (c, tail, conv) = block_chain(blocks, start, -1, sigma, opts);
    Ok((c.f, diag_of(&c, tail, conv, false)))
}

/// `F_1(σ)`.
pub fn mcf_descend<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    sigma: f64,
    opts: &CfOptions,
) -> Result<(Mat2, SecularEvaluation)> {
    mcf_descend_from(blocks, 1, sigma, opts)
}

/// `F_{-1}(σ)`.
pub fn mcf_ascend<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    sigma: f64,
    opts: &CfOptions,
) -> Result<(Mat2, SecularEvaluation)> {
    mcf_ascend_from(blocks, -1, sigma, opts)
}

/// `S = F_0^{-1}(σ) = A_0 - σ - C_0 F_{-1} B_{-1} - B_0 F_1 C_1` and its
/// (real) determinant.
pub fn secular_block<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    sigma: f64,
    opts: &CfOptions,
) -> Result<(Mat2, f64, SecularEvaluation)> {
    secular_block_at(blocks, 0, sigma, opts)
}

/// Block secular matrix at an arbitrary anchor; an anchor on the window edge
/// simply drops the missing branch.
pub fn secular_block_at<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    anchor: i64,
    sigma: f64,
    opts: &CfOptions,
) -> Result<(Mat2, f64, SecularEvaluation)> {
    require(blocks, anchor)?;
    let w = blocks.window();
    let mut s = blocks.a(anchor) - Mat2::scalar(C64::new(sigma, 0.0));
    let mut ev = SecularEvaluation {
        value: ZERO,
        depth_down: 0,
        depth_up: 0,
        tail_estimate: 0.0,
        breakdown: false,
        converged: true,
    };
    if w.contains(anchor + 1) {
        let (c, tail, conv) = block_chain(blocks, anchor + 1, 1, sigma, opts);
        s = s - blocks.b(anchor) * c.f * blocks.c(anchor + 1);
        ev.depth_down = c.depth;
        ev.tail_estimate = ev.tail_estimate.max(tail);
        ev.breakdown |= c.breakdown;
        ev.converged &= conv;
    }
    if w.contains(anchor - 1) {
        let (c, tail, conv) = block_chain(blocks, anchor - 1, -1, sigma, opts);
        s = s - blocks.c(anchor) * c.f * blocks.b(anchor - 1);
        ev.depth_up = c.depth;
        ev.tail_estimate = ev.tail_estimate.max(tail);
        ev.breakdown |= c.breakdown;
        ev.converged &= conv;
    }
    let det = s.det().re;
    ev.value = C64::new(det, 0.0);
    Ok((s, det, ev))
}

/// One-sided form `det F_1^{-1}(σ)` for a window starting at row 1.
pub fn secular_block_one_sided<S: CoefficientSource>(
    blocks: &BlockTridiagonalOperator<S>,
    sigma: f64,
    opts: &CfOptions,
) -> Result<f64> {
    if blocks.window().lo != Some(1) {
        return Err(Error::InvalidParameter("one-sided block fraction needs a window starting at row 1".into()));
    }
    let (f1, _) = mcf_descend(blocks, sigma, opts)?;
    Ok(f1.inverse().map(|s| s.det().re).unwrap_or(f64::INFINITY))
}

type Mat4 = [[C64; 4]; 4];

/// Pivots whose smallest-to-largest eigenvalue ratio falls below this are
/// merged with the next block, since the Schur complement built from their
/// inverse would lose the sign of its determinant to cancellation.
const MERGE_RATIO: f64 = 1e-6;

fn assemble4(tl: Mat2, tr: Mat2, bl: Mat2, br: Mat2) -> Mat4 {
    let mut p = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            p[i][j] = tl.m[i][j];
            p[i][j + 2] = tr.m[i][j];
            p[i + 2][j] = bl.m[i][j];
            p[i + 2][j + 2] = br.m[i][j];
        }
    }
    p
}

/// Eigenvalues of a Hermitian 4×4 matrix by cyclic Jacobi rotations.
fn eigenvalues4(mut a: Mat4) -> [f64; 4] {
    let norm: f64 = a.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for i in 0..4 {
        a[i][i].im = 0.0;
    }
    for _ in 0..60 {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                let r = a[p][q].norm();
                if r == 0.0 {
                    continue;
                }
                let phase = a[p][q] / r;
                let theta = (a[q][q].re - a[p][p].re) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let (gpp, gpq, gqp, gqq) = (C64::new(c, 0.0), C64::new(s, 0.0), -phase.conj() * s, phase.conj() * c);
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = x * gpp + y * gqp;
                    row[q] = x * gpq + y * gqq;
                }
                for k in 0..4 {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = gpp.conj() * x + gqp.conj() * y;
                    a[q][k] = gpq.conj() * x + gqq.conj() * y;
                }
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                a[p][p].im = 0.0;
                a[q][q].im = 0.0;
            }
        }
    }
    [a[0][0].re, a[1][1].re, a[2][2].re, a[3][3].re]
}

/// Top-left 2×2 block of the inverse of `p`, by Gauss-Jordan elimination with
/// partial pivoting. A singular `p` is nudged by `tiny` on the diagonal.
fn inverse4_top_left(mut p: Mat4, tiny: f64) -> Mat2 {
    let mut inv = [[ZERO; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&r, &s| p[r][col].norm().total_cmp(&p[s][col].norm())).unwrap_or(col);
        p.swap(col, piv);
        inv.swap(col, piv);
        if p[col][col] == ZERO {
            p[col][col] = C64::new(tiny, 0.0);
        }
        let d = p[col][col].inv();
        for j in 0..4 {
            p[col][j] *= d;
            inv[col][j] *= d;
        }
        for r in 0..4 {
            if r != col {
                let f = p[r][col];
                if f != ZERO {
                    for j in 0..4 {
                        let (pc, ic) = (p[col][j], inv[col][j]);
                        p[r][j] -= f * pc;
                        inv[r][j] -= f * ic;
                    }
                }
            }
        }
    }
    Mat2::new(inv[0][0], inv[0][1], inv[1][0], inv[1][1])
}

/// Inertia and determinant of `ℍ - σ` from a downward block `LDL†`
/// elimination with 2×2 pivots, merged into 4×4 pivots when ill-conditioned.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Elimination {
    negative: usize,
    log_abs_det: f64,
}

fn eliminate(h: &FiniteTridiagonal, sigma: f64) -> Elimination {
    let blocks = block_form(h);
    let (lo, hi) = (h.lo(), h.hi());
    let shift = Mat2::scalar(C64::new(sigma, 0.0));
    let tiny = 1e-300f64.max(f64::EPSILON * 1e-6 * (1.0 + h.max_abs()));
    let mut out = Elimination {
        negative: 0,
        log_abs_det: 0.0,
    };
    let mut f_next: Option<Mat2> = None;
    let mut k = hi;
    while k >= lo {
        let mut d = blocks.a(k) - shift;
        if let Some(f) = f_next {
            d = d - blocks.b(k) * f * blocks.c(k + 1);
        }
        // Hermitian up to rounding
        d.m[0][0].im = 0.0;
        d.m[1][1].im = 0.0;
        let avg = 0.5 * (d.m[0][1] + d.m[1][0].conj());
        d.m[0][1] = avg;
        d.m[1][0] = avg.conj();
        let norm = d.max_abs();
        let det = d.det().re;
        if k == lo || det.abs() > MERGE_RATIO * norm * norm {
            out.negative += d.negative_count();
            out.log_abs_det += det.abs().ln();
            f_next = Some(
                d.inverse()
                    .or_else(|| (d + Mat2::scalar(C64::new(tiny, 0.0))).inverse())
                    .unwrap_or(Mat2::zero()),
            );
            k -= 1;
        } else {
            let p = assemble4(blocks.a(k - 1) - shift, blocks.b(k - 1), blocks.c(k), d);
            let ev = eigenvalues4(p);
            out.negative += ev.iter().filter(|&&x| x < 0.0).count();
            out.log_abs_det += ev.iter().map(|x| x.abs().ln()).sum::<f64>();
            f_next = Some(inverse4_top_left(p, tiny));
            k -= 2;
        }
    }
    out
}

/// Number of eigenvalues of the doubled operator below `sigma`.
pub fn count_below(h: &FiniteTridiagonal, sigma: f64) -> usize {
    eliminate(h, sigma).negative
}

/// `|det(ℍ - σ)|` divided by `scale^{2 dim}`.
pub fn block_determinant_residual(h: &FiniteTridiagonal, sigma: f64) -> f64 {
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    (eliminate(h, sigma).log_abs_det - 2.0 * h.dim() as f64 * scale.ln()).exp()
}

/// Real-axis search for singular values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSearch {
    pub lo: f64,
    pub hi: f64,
    /// Number of initial subintervals.
    pub resolution: usize,
    /// Bisection width at which a root is accepted.
    pub tol: f64,
}

impl SingularSearch {
    /// `[0, hi]` with `hi` just above the largest possible singular value.
    pub fn covering(h: &FiniteTridiagonal) -> Self {
        let n = h.dim();
        let (d, up, low) = (h.diag_slice(), h.upper_slice(), h.lower_slice());
        // row-sum bound on the spectral norm of the doubled operator
        let bound = (0..n)
            .map(|k| {
                let mut r = d[k].norm();
                if k + 1 < n {
                    r += up[k].norm().max(low[k].norm());
                }
                if k > 0 {
                    r += low[k - 1].norm().max(up[k - 1].norm());
                }
                r
            })
            .fold(0.0, f64::max);
        let hi = 1.1 * bound + 1e-3;
        SingularSearch {
            lo: 0.0,
            hi,
            resolution: 64,
            tol: 1e-14 * hi.max(1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo >= 0.0) || !(self.hi > self.lo) || self.resolution == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "singular-value search needs 0 <= lo < hi, positive resolution and tolerance; got {self:?}"
            )));
        }
        Ok(())
    }
}

fn count_in(h: &FiniteTridiagonal, x: f64) -> usize {
    // singular values strictly below x (x > 0); all of -σ lie below x
    if x <= 0.0 {
        0
    } else {
        count_below(h, x).saturating_sub(h.dim())
    }
}

fn bisect(h: &FiniteTridiagonal, a: f64, b: f64, na: usize, nb: usize, tol: f64, out: &mut Vec<(f64, usize)>) {
    let k = nb - na;
    if k == 0 {
        return;
    }
    if b - a <= tol {
        out.push((0.5 * (a + b), k));
        return;
    }
    // off-centre split keeps midpoints away from round numbers
    let m = a + 0.4999999999999 * (b - a);
    if m <= a || m >= b {
        out.push((0.5 * (a + b), k));
        return;
    }
    let nm = count_in(h, m);
    bisect(h, a, m, na, nm, tol, out);
    bisect(h, m, b, nm, nb, tol, out);
}

/// Singular values of a finite operator inside `[lo, hi]` by bisection on
/// the inertia count of the doubled block operator. Multiplicities are exact
/// counts; zero singular values are reported at the origin.
pub fn singular_values_finite(h: &FiniteTridiagonal, search: &SingularSearch) -> Result<SpectrumResult> {
    search.validate()?;
    let tol = search.tol;
    let n = search.resolution;
    let xs: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                search.hi
            } else {
                search.lo + (search.hi - search.lo) * i as f64 / n as f64
            }
        })
        .collect();
    let mut found: Vec<(f64, usize)> = Vec::new();
    // zero singular values: count below a tiny positive threshold
    let zero_band = tol;
    let start = if search.lo == 0.0 {
        let nz = count_in(h, zero_band);
        if nz > 0 {
            found.push((0.0, nz));
        }
        zero_band
    } else {
        search.lo
    };
    let mut pts = vec![start];
    pts.extend(xs.into_iter().filter(|&x| x > start));
    let counts: Vec<usize> = pts.iter().map(|&x| count_in(h, x)).collect();
    // include a root sitting exactly at hi
    let top = search.hi + tol;
    let n_top = count_in(h, top);
    for i in 0..pts.len() - 1 {
        bisect(h, pts[i], pts[i + 1], counts[i], counts[i + 1], tol, &mut found);
    }
    bisect(h, *pts.last().unwrap(), top, *counts.last().unwrap(), n_top, tol, &mut found);

    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut roots: Vec<Root> = Vec::new();
    for (x, k) in found {
        match roots.last_mut() {
            Some(r) if (x - r.z.re).abs() <= 2.0 * tol => r.multiplicity_hint += k,
            _ => roots.push(Root {
                z: C64::new(x, 0.0),
                residual: block_determinant_residual(h, x),
                newton_iters: 0,
                multiplicity_hint: k,
            }),
        }
    }
    let dedup = (1e-7 * (search.hi - search.lo)).max(tol);
    let mut warnings = Vec::new();
    for r in &roots {
        if r.multiplicity_hint > 1 {
            warnings.push(format!(
                "cluster: singular value {} has multiplicity {}",
                r.z.re, r.multiplicity_hint
            ));
        }
    }
    for w in roots.windows(2) {
        let d = w[1].z.re - w[0].z.re;
        if d < dedup {
            warnings.push(format!("cluster: singular values {} and {} are {d:.3e} apart", w[0].z.re, w[1].z.re));
        }
    }
    Ok(SpectrumResult {
        roots,
        region: SearchRegion {
            re_min: search.lo,
            re_max: search.hi,
            im_min: 0.0,
            im_max: 0.0,
            nx: search.resolution + 1,
            ny: 1,
        },
        count_by_winding: None,
        warnings,
    })
}

/// Singular values of an arbitrary source. Finite windows are handled
/// exactly; unbounded directions are truncated at doubling depths until the
/// located values agree to `opts.tol_tail` (relative) between successive
/// truncations.
pub fn singular_values<S: CoefficientSource>(source: &S, opts: &CfOptions, search: &SingularSearch) -> Result<SpectrumResult> {
    opts.validate()?;
    let w = source.window();
    if w.is_finite() {
        let h = truncate_window(source, w)?;
        return singular_values_finite(&h, search);
    }
    let center = w.lo.or(w.hi).unwrap_or(0).clamp(w.lo.unwrap_or(i64::MIN), w.hi.unwrap_or(i64::MAX));
    let mut depth = 16i64;
    let mut prev: Option<SpectrumResult> = None;
    loop {
        let want = Window::finite(
            w.lo.unwrap_or(center - depth).max(center - depth),
            w.hi.unwrap_or(center + depth).min(center + depth),
        );
        let h = truncate_window(source, want)?;
        let cur = singular_values_finite(&h, search)?;
        if let Some(p) = &prev {
            let same = p.total_multiplicity() == cur.total_multiplicity()
                && p.roots.len() == cur.roots.len()
                && p.roots
                    .iter()
                    .zip(&cur.roots)
                    .all(|(a, b)| (a.z - b.z).norm() <= opts.tol_tail.max(search.tol) * b.z.norm().max(1.0) * 10.0);
            if same {
                return Ok(cur);
            }
        }
        if 2 * depth as usize > opts.max_depth {
            let mut cur = cur;
            cur.warnings.push(format!("truncated at depth {depth} without settling"));
            return Ok(cur);
        }
        prev = Some(cur);
        depth *= 2;
    }
}
