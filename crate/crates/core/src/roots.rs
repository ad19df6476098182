//! Root localisation for secular functions: grid seeding, Newton refinement,
//! argument-principle counting, deflation and real-axis bisection.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::FiniteTridiagonal;
use crate::C64;

/// A complex function whose zeros are sought.
///
/// `eval_flagged` additionally reports whether the evaluation hit a
/// near-singular intermediate step (continued-fraction breakdown).
pub trait Secular: Sync {
    fn eval(&self, z: C64) -> C64;

    fn eval_flagged(&self, z: C64) -> (C64, bool) {
        (self.eval(z), false)
    }
}

impl<F: Fn(C64) -> C64 + Sync> Secular for F {
    fn eval(&self, z: C64) -> C64 {
        self(z)
    }
}

/// Rectangle in the complex plane plus the grid used to scan it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl SearchRegion {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(re_min < re_max) || !(im_min <= im_max) {
            return Err(Error::InvalidParameter(format!(
                "degenerate region [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        if nx < 2 || ny < 1 || (im_min < im_max && ny < 2) {
            return Err(Error::InvalidParameter(format!("grid {nx} x {ny} too small")));
        }
        Ok(SearchRegion {
            re_min,
            re_max,
            im_min,
            im_max,
            nx,
            ny,
        })
    }

    /// Segment of the real axis.
    pub fn real_axis(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, 0.0, 0.0, n, 1)
    }

    pub fn is_real_axis(&self) -> bool {
        self.im_min == self.im_max
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Rectangle grown by `frac` of the diameter on every side.
    pub fn padded(&self, frac: f64) -> Self {
        let p = frac * self.diameter();
        SearchRegion {
            re_min: self.re_min - p,
            re_max: self.re_max + p,
            im_min: self.im_min - p,
            im_max: self.im_max + p,
            ..*self
        }
    }

    /// Upper right corner. On the winding contour and away from the
    /// symmetry lines where spectra tend to sit.
    pub fn reference_point(&self) -> C64 {
        C64::new(self.re_max, self.im_max)
    }

    pub fn with_grid(&self, nx: usize, ny: usize) -> Self {
        SearchRegion { nx, ny, ..*self }
    }

    /// Grid nodes in row-major order (imaginary part outer).
    pub fn nodes(&self) -> Vec<C64> {
        let xs = linspace(self.re_min, self.re_max, self.nx);
        let ys = if self.is_real_axis() {
            vec![self.im_min]
        } else {
            linspace(self.im_min, self.im_max, self.ny)
        };
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| C64::new(x, y)))
            .collect()
    }

    fn grid_shape(&self) -> (usize, usize) {
        if self.is_real_axis() {
            (self.nx, 1)
        } else {
            (self.nx, self.ny)
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// One located root.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub z: C64,
    /// `|S(z)|` at the reported point.
    pub residual: f64,
    pub newton_iters: usize,
    pub multiplicity_hint: usize,
}

/// Located roots together with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub roots: Vec<Root>,
    pub region: SearchRegion,
    pub count_by_winding: Option<i64>,
    pub warnings: Vec<String>,
}

impl SpectrumResult {
    /// Root locations repeated according to their multiplicity hints.
    pub fn expanded(&self) -> Vec<C64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.z, r.multiplicity_hint.max(1)))
            .collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity_hint.max(1)).sum()
    }

    pub fn has_cluster_warning(&self) -> bool {
        self.warnings.iter().any(|w| w.starts_with("cluster"))
    }
}

/// Bounding box of the Gershgorin discs (row sums of the off-diagonal
/// magnitudes), padded by 10% of its extent in each direction.
pub fn gershgorin_region(h: &FiniteTridiagonal) -> SearchRegion {
    let n = h.dim();
    let (d, up, low) = (h.diag_slice(), h.upper_slice(), h.lower_slice());
    let mut re = (f64::INFINITY, f64::NEG_INFINITY);
    let mut im = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..n {
        let mut r = 0.0;
        if k + 1 < n {
            r += up[k].norm();
        }
        if k > 0 {
            r += low[k - 1].norm();
        }
        re = (re.0.min(d[k].re - r), re.1.max(d[k].re + r));
        im = (im.0.min(d[k].im - r), im.1.max(d[k].im + r));
    }
    let (w, ht) = (re.1 - re.0, im.1 - im.0);
    let diam = w.hypot(ht);
    let floor = if diam > 0.0 { 0.05 * diam } else { 0.1 * (1.0 + d[0].norm()) };
    let px = (0.1 * w).max(floor);
    let py = (0.1 * ht).max(floor);
    SearchRegion {
        re_min: re.0 - px,
        re_max: re.1 + px,
        im_min: im.0 - py,
        im_max: im.1 + py,
        nx: 101,
        ny: 101,
    }
}

/// Outcome of a converged Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResult {
    pub z: C64,
    pub residual: f64,
    pub iters: usize,
}

fn fd_step(z: C64) -> f64 {
    (1e-7f64).max(1e-7 * z.norm())
}

/// Relative step below which a non-contracting Newton iteration is accepted.
const STALL_TOL: f64 = 1e-9;

/// Central finite-difference derivative along the real direction.
pub fn derivative<S: Secular + ?Sized>(s: &S, z: C64) -> C64 {
    let h = fd_step(z);
    (s.eval(z + h) - s.eval(z - h)) / (2.0 * h)
}

/// Newton iteration with a finite-difference derivative.
///
/// Stops when `|dz| < tol * max(1, |z|)`, when steps below `1e-9 * max(1, |z|)`
/// stop contracting, or when `S(z)` is exactly zero. No
/// absolute threshold on `|S|`: rescaled determinants can be tiny far from
/// any zero. Leaving `bounds` or producing non-finite values is reported as
/// divergence.
pub fn newton_refine<S: Secular + ?Sized>(
    s: &S,
    z0: C64,
    tol: f64,
    max_iter: usize,
    bounds: Option<&SearchRegion>,
) -> Result<NewtonResult> {
    let diverged = |iters| Error::Divergence {
        start: format!("{z0}"),
        iters,
    };
    let mut z = z0;
    let mut last_step = f64::INFINITY;
    for it in 0..max_iter {
        let v = s.eval(z);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(diverged(it));
        }
        if v.norm() == 0.0 {
            return Ok(NewtonResult {
                z,
                residual: v.norm(),
                iters: it,
            });
        }
        let d = derivative(s, z);
        if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
            return Err(diverged(it));
        }
        // divide through by |v| first: tiny values would underflow |d|^2
        let scale = v.norm();
        let dz = -(v / scale) / (d / scale);
        z += dz;
        if bounds.is_some_and(|b| !b.contains(z)) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(diverged(it + 1));
        }
        let step = dz.norm();
        // steps that stop contracting below the noise threshold mean the
        // evaluation noise of an ill-conditioned root has been reached
        let stalled = it > 2 && step >= 0.5 * last_step && step < STALL_TOL * z.norm().max(1.0);
        last_step = step;
        if step < tol * z.norm().max(1.0) || stalled {
            let r = s.eval(z).norm();
            if !r.is_finite() {
                return Err(diverged(it + 1));
            }
            return Ok(NewtonResult {
                z,
                residual: r,
                iters: it + 1,
            });
        }
    }
    Err(diverged(max_iter))
}

/// Local minima of `|S|` on the grid that lie below the grid median, nudged
/// by a small fraction of a cell so that no seed sits on a symmetry line of
/// the region (Newton started midway between a close pair never leaves it).
pub fn grid_seed<S: Secular + ?Sized>(s: &S, region: &SearchRegion) -> Vec<C64> {
    let nodes = region.nodes();
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&z| {
            let v = s.eval(z).norm();
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut sorted: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return Vec::new();
    }
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let (nx, ny) = region.grid_shape();
    let jitter = C64::new(
        0.0137 * region.width() / (nx.max(2) - 1) as f64,
        0.0071 * region.height() / (ny.max(2) - 1) as f64,
    );
    let mut seeds = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let v = vals[iy * nx + ix];
            if !(v < median) {
                continue;
            }
            let mut is_min = true;
            let mut strictly_below_one = false;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                    if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                        continue;
                    }
                    let w = vals[jy as usize * nx + jx as usize];
                    if w < v {
                        is_min = false;
                    }
                    if v < w {
                        strictly_below_one = true;
                    }
                }
            }
            if is_min && strictly_below_one {
                seeds.push(nodes[iy * nx + ix] + jitter);
            }
        }
    }
    seeds
}

fn boundary(region: &SearchRegion, per_edge: usize) -> Vec<C64> {
    let (a, b, c, d) = (region.re_min, region.re_max, region.im_min, region.im_max);
    let corners = [C64::new(a, c), C64::new(b, c), C64::new(b, d), C64::new(a, d)];
    let mut pts = Vec::with_capacity(4 * per_edge);
    for e in 0..4 {
        let (p, q) = (corners[e], corners[(e + 1) % 4]);
        for i in 0..per_edge {
            pts.push(p + (q - p) * (i as f64 / per_edge as f64));
        }
    }
    pts
}

fn winding_once<S: Secular + ?Sized>(s: &S, region: &SearchRegion, per_edge: usize) -> Result<(i64, f64)> {
    let pts = boundary(region, per_edge);
    let vals: Vec<(C64, bool)> = pts.par_iter().map(|&z| s.eval_flagged(z)).collect();
    if vals
        .iter()
        .any(|(v, brk)| *brk || v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::ContourSingular);
    }
    // unit phases: dividing raw values underflows once |S|^2 < f64::MIN_POSITIVE
    let units: Vec<C64> = vals.iter().map(|(v, _)| v / v.norm()).collect();
    let mut total = 0.0;
    let mut largest = 0.0f64;
    for i in 0..units.len() {
        let step = (units[(i + 1) % units.len()] * units[i].conj()).arg();
        if !step.is_finite() {
            return Err(Error::ContourSingular);
        }
        largest = largest.max(step.abs());
        total += step;
    }
    Ok(((total / std::f64::consts::TAU).round() as i64, largest))
}

/// Number of zeros minus poles inside the rectangle, from the change of
/// `arg S` along its boundary. Sampling is doubled until the count is stable
/// for two consecutive refinements.
pub fn winding_count<S: Secular + ?Sized>(s: &S, region: &SearchRegion, samples_per_edge: usize) -> Result<i64> {
    if region.is_real_axis() {
        return Err(Error::InvalidParameter(
            "winding number needs a two-dimensional region".into(),
        ));
    }
    let mut n = samples_per_edge.max(4);
    let mut history: Vec<i64> = Vec::new();
    for _ in 0..14 {
        let (count, largest) = winding_once(s, region, n)?;
        if largest < 1.0 {
            history.push(count);
        } else {
            history.clear();
        }
        if history.len() >= 3 && history[history.len() - 3..].iter().all(|&c| c == count) {
            return Ok(count);
        }
        n *= 2;
    }
    Err(Error::ContourSingular)
}

/// Tuning of [`locate_roots`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Roots closer than this are the same root. Defaults to `1e-7` times the
    /// region diameter.
    pub dedup_tol: Option<f64>,
    /// Distinct roots closer than this trigger a cluster warning. Defaults to
    /// `1e-2` times the region diameter.
    pub cluster_tol: Option<f64>,
    pub samples_per_edge: usize,
    pub deflation_rounds: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            newton_tol: 1e-14,
            max_iter: 200,
            dedup_tol: None,
            cluster_tol: None,
            samples_per_edge: 64,
            deflation_rounds: 4,
        }
    }
}

struct Deflated<'a, S: ?Sized> {
    inner: &'a S,
    roots: Vec<C64>,
}

impl<S: Secular + ?Sized> Secular for Deflated<'_, S> {
    fn eval(&self, z: C64) -> C64 {
        self.roots.iter().fold(self.inner.eval(z), |acc, r| acc / (z - r))
    }
}

fn best_residual(secs: &[&dyn Secular], z: C64) -> (usize, f64) {
    secs.iter()
        .enumerate()
        .map(|(i, s)| {
            let r = s.eval(z).norm();
            (i, if r.is_finite() { r } else { f64::INFINITY })
        })
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

fn sort_canonical(roots: &mut [Root]) {
    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
}

/// Finds the zeros of one or more secular functions inside `region`.
///
/// Every function in `secs` must have only true eigenvalues as zeros (they
/// may differ in which eigenvalues they resolve, e.g. different anchor rows).
/// `counter`, when given, must be entire inside the region with exactly the
/// sought zeros counted with multiplicity; its winding number certifies
/// completeness and missing roots are hunted by deflating it.
pub fn locate_roots(
    secs: &[&dyn Secular],
    counter: Option<&dyn Secular>,
    region: &SearchRegion,
    opts: &RootOptions,
) -> SpectrumResult {
    let diam = region.diameter();
    let dedup = opts.dedup_tol.unwrap_or(1e-7 * diam);
    let cluster = opts.cluster_tol.unwrap_or(1e-2 * diam);
    let bounds = region.padded(0.25);
    let mut warnings = Vec::new();

    let mut candidates: Vec<(C64, usize)> = secs
        .par_iter()
        .flat_map_iter(|s| {
            grid_seed(*s, region)
                .into_iter()
                .filter_map(|z0| newton_refine(*s, z0, opts.newton_tol, opts.max_iter, Some(&bounds)).ok())
                .map(|r| (r.z, r.iters))
                .collect::<Vec<_>>()
        })
        .collect();
    candidates.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));

    let mut roots: Vec<Root> = Vec::new();
    for (z, iters) in candidates {
        if !region.contains(z) {
            continue;
        }
        let (_, residual) = best_residual(secs, z);
        match roots.iter_mut().find(|r| (r.z - z).norm() < dedup) {
            Some(r) => {
                if residual < r.residual {
                    r.z = z;
                    r.residual = residual;
                    r.newton_iters = iters;
                }
            }
            None => roots.push(Root {
                z,
                residual,
                newton_iters: iters,
                multiplicity_hint: 1,
            }),
        }
    }

    let mut count_by_winding = None;
    if let Some(counter) = counter.filter(|_| !region.is_real_axis()) {
        match winding_count(counter, region, opts.samples_per_edge) {
            Ok(count) => {
                count_by_winding = Some(count);
                deflate_missing(secs, counter, region, &bounds, opts, dedup, count, &mut roots);
                let found = roots.iter().map(|r| r.multiplicity_hint).sum::<usize>() as i64;
                if found != count {
                    warnings.push(format!(
                        "winding count {count} differs from {found} located roots"
                    ));
                }
            }
            Err(e) => warnings.push(format!("winding count unavailable: {e}")),
        }
    }

    sort_canonical(&mut roots);
    for r in &roots {
        if r.multiplicity_hint > 1 {
            warnings.push(format!(
                "cluster: root {} carries multiplicity hint {}",
                r.z, r.multiplicity_hint
            ));
        }
    }
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = (roots[i].z - roots[j].z).norm();
            if d < cluster {
                warnings.push(format!(
                    "cluster: roots {} and {} are {d:.3e} apart",
                    roots[i].z, roots[j].z
                ));
            }
        }
    }

    SpectrumResult {
        roots,
        region: *region,
        count_by_winding,
        warnings,
    }
}

#[allow(clippy::too_many_arguments)]
fn deflate_missing(
    secs: &[&dyn Secular],
    counter: &dyn Secular,
    region: &SearchRegion,
    bounds: &SearchRegion,
    opts: &RootOptions,
    dedup: f64,
    count: i64,
    roots: &mut Vec<Root>,
) {
    let offset = (1e-3 * region.diameter()).max(1e-6);
    for _ in 0..opts.deflation_rounds {
        let found: usize = roots.iter().map(|r| r.multiplicity_hint).sum();
        if found as i64 >= count {
            return;
        }
        let known: Vec<C64> = roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.z, r.multiplicity_hint))
            .collect();
        let deflated = Deflated {
            inner: counter,
            roots: known,
        };
        let mut seeds = grid_seed(&deflated, region);
        for r in roots.iter() {
            for dir in [C64::new(1.0, 1.0), C64::new(-1.0, -1.0), C64::new(1.0, -1.0), C64::new(-1.0, 1.0)] {
                seeds.push(r.z + dir * offset);
            }
        }
        let hits: Vec<NewtonResult> = seeds
            .par_iter()
            .filter_map(|&z0| newton_refine(&deflated, z0, opts.newton_tol, opts.max_iter, Some(bounds)).ok())
            .collect();
        let mut progress = false;
        let mut bumped: Vec<usize> = Vec::new();
        // roots added in this round are not deflated yet
        let known = roots.len();
        for hit in hits {
            if !region.contains(hit.z) {
                continue;
            }
            // polish on whichever secular function resolves this root best
            let (which, _) = best_residual(secs, hit.z);
            let z = secs
                .get(which)
                .and_then(|s| newton_refine(*s, hit.z, opts.newton_tol, opts.max_iter, Some(bounds)).ok())
                .map(|r| r.z)
                .filter(|z| (z - hit.z).norm() < 1e3 * dedup.max(1e-10))
                .unwrap_or(hit.z);
            let (_, residual) = best_residual(secs, z);
            if let Some(idx) = roots.iter().position(|r| (r.z - z).norm() < dedup) {
                // a simple root leaves only a zero-pole dipole in the deflated
                // function; a repeated root leaves a net zero nearby
                if idx < known && !bumped.contains(&idx) && net_zeros_near(&deflated, roots[idx].z, 10.0 * dedup) > 0 {
                    bumped.push(idx);
                    roots[idx].multiplicity_hint += 1;
                    progress = true;
                }
            } else if !roots.iter().any(|r| (r.z - z).norm() < dedup) {
                roots.push(Root {
                    z,
                    residual,
                    newton_iters: hit.iters,
                    multiplicity_hint: 1,
                });
                progress = true;
            }
            let found: usize = roots.iter().map(|r| r.multiplicity_hint).sum();
            if found as i64 >= count {
                return;
            }
        }
        if !progress {
            return;
        }
    }
}

fn net_zeros_near<S: Secular + ?Sized>(s: &S, center: C64, half: f64) -> i64 {
    let square = SearchRegion {
        re_min: center.re - half,
        re_max: center.re + half,
        im_min: center.im - half,
        im_max: center.im + half,
        nx: 2,
        ny: 2,
    };
    winding_once(s, &square, 32).map(|(n, _)| n).unwrap_or(0)
}

/// Greedy closest-pair matching of two root sets. Returns `(i, j, |a_i - b_j|)`
/// for `min(len)` pairs, pairing globally nearest points first.
pub fn match_closest(a: &[C64], b: &[C64]) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(usize, usize, f64)> = a
        .iter()
        .enumerate()
        .flat_map(|(i, x)| b.iter().enumerate().map(move |(j, y)| (i, j, (x - y).norm())))
        .collect();
    pairs.sort_by(|p, q| p.2.total_cmp(&q.2).then(p.0.cmp(&q.0)).then(p.1.cmp(&q.1)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    for (i, j, d) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j, d));
        }
    }
    out.sort_by_key(|p| p.0);
    out
}

/// Real roots found by scanning and bisection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealRoots {
    /// Sign-changing zeros, bisected to tolerance.
    pub roots: Vec<f64>,
    /// Local minima of `|f|` below the even-multiplicity threshold without a
    /// sign change.
    pub even_candidates: Vec<f64>,
}

/// Scans `f` on `resolution` equal intervals, bisects every sign change to
/// `tol` and reports local minima of `|f|` below `1e-12` as
/// even-multiplicity candidates. Sign changes across poles (where `|f|`
/// grows during bisection) are discarded.
pub fn real_bisect<F: Fn(f64) -> f64 + Sync + ?Sized>(
    f: &F,
    interval: (f64, f64),
    resolution: usize,
    tol: f64,
) -> RealRoots {
    real_bisect_with(f, interval, resolution, tol, 1e-12)
}

pub fn real_bisect_with<F: Fn(f64) -> f64 + Sync + ?Sized>(
    f: &F,
    interval: (f64, f64),
    resolution: usize,
    tol: f64,
    even_tol: f64,
) -> RealRoots {
    let (lo, hi) = interval;
    let n = resolution.max(1);
    let xs = linspace(lo, hi, n + 1);
    let ys: Vec<f64> = xs.par_iter().map(|&x| f(x)).collect();
    let mut out = RealRoots::default();
    let finite = |y: f64| y.is_finite();

    for i in 0..n {
        let (a, b) = (xs[i], xs[i + 1]);
        let (fa, fb) = (ys[i], ys[i + 1]);
        if !finite(fa) || !finite(fb) {
            continue;
        }
        if fa == 0.0 {
            out.roots.push(a);
            continue;
        }
        if i == n - 1 && fb == 0.0 {
            out.roots.push(b);
            continue;
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        let (mut l, mut r, mut fl) = (a, b, fa);
        while r - l > tol {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                break;
            }
            let fm = f(m);
            if fm == 0.0 {
                l = m;
                r = m;
                break;
            }
            if fm.signum() == fl.signum() {
                l = m;
                fl = fm;
            } else {
                r = m;
            }
        }
        let x = 0.5 * (l + r);
        let fx = f(x).abs();
        if fx.is_finite() && fx <= fa.abs().min(fb.abs()) {
            out.roots.push(x);
        }
    }

    for i in 1..n {
        let (yl, y, yr) = (ys[i - 1].abs(), ys[i].abs(), ys[i + 1].abs());
        if !(y < yl && y <= yr) || ys[i] == 0.0 {
            continue;
        }
        if ys[i - 1].signum() != ys[i].signum() || ys[i].signum() != ys[i + 1].signum() {
            continue;
        }
        let (x, fx) = golden_min(|x| f(x).abs(), xs[i - 1], xs[i + 1], tol);
        if fx < even_tol {
            out.even_candidates.push(x);
        }
    }
    // endpoint minimum (e.g. a zero singular value sitting at the origin)
    if ys[0].abs() < even_tol && ys[0] != 0.0 && !out.roots.contains(&xs[0]) {
        out.even_candidates.push(xs[0]);
    }
    out.roots.sort_by(f64::total_cmp);
    out.roots.dedup();
    out
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
