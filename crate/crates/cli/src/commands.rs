//! One function per subcommand. Each returns a [`Report`]; threshold
//! violations go into `failures`, hard errors are returned.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tricf::cfrac::{
    cf_determinant, default_anchors, secular_two_sided_at, spectrum, CfOptions, DepthGrowth, DeterminantSecular,
};
use tricf::factor::{factorize, wavefunction_auto, Layout, Normalization};
use tricf::hermitize::{singular_values, singular_values_finite, SingularSearch};
use tricf::operator::{truncate_window, CoefficientSource, FiniteTridiagonal, Window};
use tricf::oracle::{det_scan_spectrum_with, jacobi_eigen, lu_det, svd_oracle, ORACLE_LIMIT};
use tricf::roots::{gershgorin_region, match_closest, newton_refine, RootOptions, SearchRegion, Secular, SpectrumResult};
use tricf::C64;

use crate::model::{build, Model, CATALOGUE};
use crate::report::{Cell, Report};
use crate::settings::{GridFunction, ModelKind, Resolved};

const RECONSTRUCTION_TOL: f64 = 1e-12;
const DETERMINANT_TOL: f64 = 1e-10;

fn cf_options(cfg: &Resolved) -> CfOptions {
    CfOptions {
        tol_tail: cfg.tol,
        max_depth: cfg.max_depth,
        breakdown_eps: cfg.breakdown_eps,
        depth_growth: DepthGrowth::Doubling,
    }
}

fn root_options(cfg: &Resolved) -> RootOptions {
    RootOptions {
        newton_tol: cfg.newton_tol,
        ..RootOptions::default()
    }
}

/// Search box in solver units: the configured physical box minus the shift,
/// or the Gershgorin box of a finite operator.
fn region_for(cfg: &Resolved, model: &Model) -> Result<SearchRegion> {
    let [nx, ny] = cfg.grid;
    let s = model.shift();
    match (cfg.region, model) {
        (Some([a, b, c, d]), _) => Ok(SearchRegion::new(a - s, b - s, c, d, nx, ny)?),
        (None, Model::Finite { matrix, .. }) => Ok(gershgorin_region(matrix).with_grid(nx, ny)),
        (None, Model::Unbounded(_)) => bail!("unbounded operators need an explicit --region"),
    }
}

fn describe(region: &SearchRegion, shift: f64) -> String {
    format!(
        "[{}, {}] x [{}, {}]",
        region.re_min + shift,
        region.re_max + shift,
        region.im_min,
        region.im_max
    )
}

fn anchors<S: CoefficientSource>(cfg: &Resolved, source: &S) -> Vec<i64> {
    let mut out: Vec<i64> = cfg.anchor.into_iter().collect();
    for p in default_anchors(source) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn located(cfg: &Resolved, model: &Model, region: &SearchRegion) -> Result<(SpectrumResult, Vec<i64>)> {
    let (cf, ro) = (cf_options(cfg), root_options(cfg));
    Ok(match model {
        Model::Finite { matrix, .. } => {
            let a = anchors(cfg, matrix);
            (spectrum(matrix, region, &a, &cf, &ro)?, a)
        }
        Model::Unbounded(src) => {
            let a = anchors(cfg, src);
            (spectrum(src, region, &a, &cf, &ro)?, a)
        }
    })
}

fn secular_at(model: &Model, anchor: i64, z: C64, cf: &CfOptions) -> tricf::error::Result<tricf::cfrac::SecularEvaluation> {
    match model {
        Model::Finite { matrix, .. } => secular_two_sided_at(matrix, anchor, z, cf),
        Model::Unbounded(src) => secular_two_sided_at(src, anchor, z, cf),
    }
}

pub fn spectrum_cmd(cfg: &Resolved) -> Result<Report> {
    let model = build(cfg)?;
    let region = region_for(cfg, &model)?;
    let shift = model.shift();
    let cf = cf_options(cfg);
    let (res, anchor_rows) = located(cfg, &model, &region)?;

    let mut columns = vec!["re", "im", "multiplicity", "secular_residual", "vector_residual", "converged", "newton_iters"];
    if cfg.verify {
        columns.push("oracle_distance");
    }
    let mut rep = Report::new("spectrum", cfg, columns);
    rep.diag("region", describe(&region, shift).as_str());
    rep.diag("anchors", format!("{anchor_rows:?}").as_str());
    rep.diag("energy_shift", shift);
    rep.diag("roots", res.total_multiplicity());
    match res.count_by_winding {
        Some(n) => {
            rep.diag("winding_count", n);
            if n != res.total_multiplicity() as i64 {
                rep.failures.push(format!("winding count {n} but {} roots located", res.total_multiplicity()));
            }
        }
        None => rep.diag("winding_count", "n/a"),
    }
    rep.warnings.extend(res.warnings.iter().cloned());

    let oracle = if cfg.verify { oracle_roots(cfg, &model, &region, &mut rep)? } else { None };
    if let Some(o) = &oracle {
        rep.diag("oracle_roots", o.len());
        if o.len() != res.total_multiplicity() {
            rep.failures.push(format!("oracle finds {} roots, fraction finds {}", o.len(), res.total_multiplicity()));
        }
    }
    if matches!(model, Model::Unbounded(_)) {
        rep.warnings.push("vector residuals are not available for unbounded operators".into());
    }

    let mut worst = 0.0f64;
    for r in &res.roots {
        let (best, converged) = anchor_rows
            .iter()
            .filter_map(|&p| secular_at(&model, p, r.z, &cf).ok())
            .fold((f64::INFINITY, true), |(b, c), e| (b.min(e.value.norm()), c && e.converged));
        let vector = match &model {
            Model::Finite { matrix, .. } => {
                let v = wavefunction_auto(matrix, anchor_rows[0], r.z).map_or(f64::NAN, |w| w.residual);
                worst = worst.max(v);
                if !(v <= cfg.threshold) {
                    rep.failures.push(format!("eigenvector residual {v:e} at E = {} exceeds {:e}", r.z + shift, cfg.threshold));
                }
                v
            }
            Model::Unbounded(_) => f64::NAN,
        };
        if !converged {
            rep.failures.push(format!("fraction did not converge at E = {}", r.z + shift));
        }
        let mut row: Vec<Cell> = vec![
            (r.z.re + shift).into(),
            r.z.im.into(),
            r.multiplicity_hint.into(),
            best.into(),
            vector.into(),
            (converged as i64).into(),
            r.newton_iters.into(),
        ];
        if cfg.verify {
            let d = oracle
                .as_ref()
                .map(|o| o.iter().map(|w| (w - r.z).norm()).fold(f64::INFINITY, f64::min))
                .unwrap_or(f64::NAN);
            if d > cfg.threshold {
                rep.failures.push(format!("root {} is {d:e} from the nearest oracle root", r.z + shift));
            }
            row.push(d.into());
        }
        rep.row(row);
    }
    rep.diag("max_vector_residual", worst);
    Ok(rep)
}

/// Oracle roots in solver units, or `None` (with a warning) when the dense
/// oracle cannot handle the operator.
fn oracle_roots(cfg: &Resolved, model: &Model, region: &SearchRegion, rep: &mut Report) -> Result<Option<Vec<C64>>> {
    let matrix = match model {
        Model::Finite { matrix, .. } if matrix.dim() <= ORACLE_LIMIT => matrix,
        Model::Finite { matrix, .. } => {
            rep.warnings.push(format!("verification skipped: dimension {} exceeds {ORACLE_LIMIT}", matrix.dim()));
            return Ok(None);
        }
        Model::Unbounded(_) => {
            rep.warnings.push("verification skipped: the operator is unbounded".into());
            return Ok(None);
        }
    };
    let o = det_scan_spectrum_with(&matrix.to_dense(), region, &root_options(cfg))?;
    Ok(Some(o.expanded()))
}

fn is_hermitian(h: &FiniteTridiagonal) -> bool {
    let eps = 1e-14 * (1.0 + h.max_abs());
    h.diag_slice().iter().all(|a| a.im.abs() <= eps)
        && h.upper_slice().iter().zip(h.lower_slice()).all(|(b, c)| (b - c.conj()).norm() <= eps)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn singular_cmd(cfg: &Resolved) -> Result<Report> {
    let model = build(cfg)?;
    let search = |covering: Option<SingularSearch>| -> Result<SingularSearch> {
        match (cfg.region, covering) {
            (Some([a, b, _, _]), _) => Ok(SingularSearch {
                lo: a.max(0.0),
                hi: b,
                resolution: 64,
                tol: 1e-14 * b.abs().max(1.0),
            }),
            (None, Some(s)) => Ok(s),
            (None, None) => bail!("unbounded operators need an explicit --region RE0 RE1 IM0 IM1 (the real part bounds sigma)"),
        }
    };
    let (res, dense) = match &model {
        Model::Finite { .. } => {
            let h = model.physical("singular")?;
            let s = search(Some(SingularSearch::covering(&h)))?;
            (singular_values_finite(&h, &s)?, Some((h, s)))
        }
        Model::Unbounded(src) => (singular_values(src, &cf_options(cfg), &search(None)?)?, None),
    };
    let sigma = sorted(res.expanded().iter().map(|z| z.re).collect());

    let hermitian = dense.as_ref().is_some_and(|(h, _)| is_hermitian(h) && h.dim() <= ORACLE_LIMIT);
    let mut columns = vec!["index", "sigma", "multiplicity"];
    if cfg.verify {
        columns.extend(["oracle_sigma", "delta"]);
    }
    if hermitian {
        columns.push("hermitian_delta");
    }
    let mut rep = Report::new("singular", cfg, columns);
    rep.diag("count", sigma.len());
    rep.warnings.extend(res.warnings.iter().cloned());
    if let Some((h, s)) = &dense {
        rep.diag("interval", format!("[{}, {}]", s.lo, s.hi).as_str());
        rep.diag("dimension", h.dim());
    }

    let oracle = match (&dense, cfg.verify) {
        (Some((h, s)), true) if h.dim() <= ORACLE_LIMIT => {
            let margin = 1e-12 * s.hi.max(1.0);
            let o: Vec<f64> = svd_oracle(&h.to_dense())?
                .into_iter()
                .filter(|x| *x >= s.lo - margin && *x <= s.hi + margin)
                .collect();
            if o.len() != sigma.len() {
                rep.failures.push(format!("oracle finds {} singular values, fraction finds {}", o.len(), sigma.len()));
            }
            Some(o)
        }
        (_, true) => {
            rep.warnings.push(format!("verification skipped: needs a finite operator of dimension <= {ORACLE_LIMIT}"));
            None
        }
        _ => None,
    };
    let absolute = if hermitian {
        let h = &dense.as_ref().expect("hermitian implies finite").0;
        Some(sorted(jacobi_eigen(&h.to_dense())?.iter().map(|e| e.abs()).collect()))
    } else {
        None
    };

    let mult = |x: f64| res.roots.iter().find(|r| r.z.re == x).map_or(1, |r| r.multiplicity_hint);
    let (mut worst, mut worst_h) = (0.0f64, 0.0f64);
    for (i, &x) in sigma.iter().enumerate() {
        let mut row: Vec<Cell> = vec![i.into(), x.into(), mult(x).into()];
        if cfg.verify {
            let o = oracle.as_ref().and_then(|o| o.get(i).copied()).unwrap_or(f64::NAN);
            let d = (x - o).abs();
            worst = worst.max(d);
            row.extend([o.into(), d.into()]);
        }
        if let Some(abs) = &absolute {
            let d = abs.get(i).map_or(f64::NAN, |e| (x - e).abs());
            worst_h = worst_h.max(d);
            row.push(d.into());
        }
        rep.row(row);
    }
    if cfg.verify && oracle.is_some() {
        rep.diag("max_oracle_delta", worst);
        if !(worst <= cfg.threshold) {
            rep.failures.push(format!("max |sigma - oracle| = {worst:e} exceeds {:e}", cfg.threshold));
        }
    }
    if absolute.is_some() {
        rep.diag("max_hermitian_delta", worst_h);
        if !(worst_h <= cfg.threshold) {
            rep.failures.push(format!("max |sigma - |E|| = {worst_h:e} exceeds {:e}", cfg.threshold));
        }
    }
    Ok(rep)
}

pub fn wavefunction_cmd(cfg: &Resolved) -> Result<Report> {
    let model = build(cfg)?;
    let h = model.finite("wavefunction")?;
    let shift = model.shift();
    let Some([re, im]) = cfg.energy else {
        bail!("wavefunction needs --energy RE IM");
    };
    let e0 = C64::new(re - shift, im);
    // one Newton polish on det(H - z); kept only if it stays close
    let det = DeterminantSecular::anchored(h, e0 + C64::new(0.0, 1e-3 * e0.norm().max(1.0)));
    let e = newton_refine(&det, e0, cfg.newton_tol, 100, None)
        .ok()
        .map(|r| r.z)
        .filter(|z| (z - e0).norm() <= 1e-6 * e0.norm().max(1.0))
        .unwrap_or(e0);
    let anchor = cfg.anchor.unwrap_or_else(|| default_anchors(h)[0]);
    let right = wavefunction_auto(h, anchor, e)?;
    let left = wavefunction_auto(&h.transpose(), anchor, e)?;

    let mut rep = Report::new("wavefunction", cfg, vec!["row", "x", "psi_re", "psi_im", "psi_abs", "left_re", "left_im"]);
    rep.diag("energy_re", e.re + shift);
    rep.diag("energy_im", e.im);
    rep.diag("polish_shift", (e - e0).norm());
    let pinned = match right.normalization {
        Normalization::Psi0(p) => p,
        Normalization::Psi1 => h.lo(),
    };
    rep.diag("normalized_row", pinned);
    rep.diag("residual", right.residual);
    rep.diag("left_residual", left.residual);
    for (what, r) in [("right", right.residual), ("left", left.residual)] {
        if !(r <= cfg.threshold) {
            rep.failures.push(format!("{what} eigenvector residual {r:e} exceeds {:e}", cfg.threshold));
        }
    }
    let spacing = cfg.h.unwrap_or(1.0);
    for (i, (p, l)) in right.values.iter().zip(&left.values).enumerate() {
        let k = h.lo() + i as i64;
        rep.row(vec![k.into(), (k as f64 * spacing).into(), p.re.into(), p.im.into(), p.norm().into(), l.re.into(), l.im.into()]);
    }
    Ok(rep)
}

pub fn green_grid_cmd(cfg: &Resolved) -> Result<Report> {
    let model = build(cfg)?;
    let region = region_for(cfg, &model)?;
    let shift = model.shift();
    let cf = cf_options(cfg);
    let anchor = match &model {
        Model::Finite { matrix, .. } => cfg.anchor.unwrap_or_else(|| default_anchors(matrix)[0]),
        Model::Unbounded(src) => cfg.anchor.unwrap_or_else(|| default_anchors(src)[0]),
    };
    let det = match (cfg.function, &model) {
        (GridFunction::Determinant, Model::Finite { matrix, .. }) => Some(matrix),
        (GridFunction::Determinant, Model::Unbounded(_)) => bail!("the determinant needs a finite operator"),
        _ => None,
    };
    let mut rep = Report::new("green-grid", cfg, vec!["re", "im", "s_re", "s_im", "s_abs", "breakdown", "converged"]);
    rep.diag("region", describe(&region, shift).as_str());
    rep.diag("anchor", anchor);
    let mut breakdowns = 0usize;
    let counter = det.map(|m| DeterminantSecular::anchored(m, region.reference_point()));
    for z in region.nodes() {
        let (v, breakdown, converged) = match det {
            Some(m) => {
                let scaled = counter.as_ref().expect("finite").eval(z);
                (scaled, cf_determinant(m, z).is_zero(), true)
            }
            None => match secular_at(&model, anchor, z, &cf) {
                Ok(e) => (e.value, e.breakdown, e.converged),
                Err(_) => (C64::new(f64::NAN, f64::NAN), true, false),
            },
        };
        breakdowns += breakdown as usize;
        rep.row(vec![
            (z.re + shift).into(),
            z.im.into(),
            v.re.into(),
            v.im.into(),
            v.norm().into(),
            (breakdown as i64).into(),
            (converged as i64).into(),
        ]);
    }
    rep.diag("breakdowns", breakdowns);
    Ok(rep)
}

fn relative_gap(a: &tricf::oracle::DenseMatrix, b: &tricf::oracle::DenseMatrix) -> f64 {
    let n = a.dim();
    let norm = 1.0 + b.max_abs();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (a[(i, j)] - b[(i, j)]).norm())
        .fold(0.0, f64::max)
        / norm
}

pub fn factor_check_cmd(cfg: &Resolved) -> Result<Report> {
    let model = build(cfg)?;
    let h = model.physical("factor-check")?;
    if h.dim() > ORACLE_LIMIT {
        bail!("factor-check assembles dense factors; dimension {} exceeds {ORACLE_LIMIT}", h.dim());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // separate stream from the one that drew the random model
    rng.set_stream(1);
    let scale = 1.0 + h.max_abs();
    let mut rep = Report::new(
        "factor-check",
        cfg,
        vec!["sample", "z_re", "z_im", "layout", "reconstruction_error", "determinant_error"],
    );
    rep.diag("dimension", h.dim());
    rep.diag("reconstruction_tol", RECONSTRUCTION_TOL);
    rep.diag("determinant_tol", DETERMINANT_TOL);
    let (mut worst_r, mut worst_d) = (0.0f64, 0.0f64);
    for sample in 0..cfg.samples {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
        let center = h.lo() + rng.gen_range(0..h.dim() as i64);
        let mut shifted = h.to_dense();
        for i in 0..h.dim() {
            shifted[(i, i)] -= z;
        }
        let exact = lu_det(&h.to_dense(), z);
        for layout in [Layout::OneSided, Layout::TwoSidedCenter(center)] {
            let name = match layout {
                Layout::OneSided => "one-sided".to_string(),
                Layout::TwoSidedCenter(p) => format!("two-sided:{p}"),
            };
            let (r, d) = match factorize(&h, z, layout) {
                Ok(f) => (
                    relative_gap(&f.reassemble(), &shifted),
                    (f.determinant() - exact).norm() / exact.norm().max(f64::MIN_POSITIVE),
                ),
                Err(e) => {
                    rep.failures.push(format!("sample {sample} ({name}): {e}"));
                    (f64::NAN, f64::NAN)
                }
            };
            worst_r = worst_r.max(r);
            worst_d = worst_d.max(d);
            rep.row(vec![sample.into(), z.re.into(), z.im.into(), name.as_str().into(), r.into(), d.into()]);
        }
    }
    rep.diag("max_reconstruction_error", worst_r);
    rep.diag("max_determinant_error", worst_d);
    if worst_r > RECONSTRUCTION_TOL {
        rep.failures.push(format!("reconstruction error {worst_r:e} exceeds {RECONSTRUCTION_TOL:e}"));
    }
    if worst_d > DETERMINANT_TOL {
        rep.failures.push(format!("determinant error {worst_d:e} exceeds {DETERMINANT_TOL:e}"));
    }
    Ok(rep)
}

pub fn oracle_compare_cmd(cfg: &Resolved) -> Result<Report> {
    let model = build(cfg)?;
    let h = model.finite("oracle-compare")?;
    if h.dim() > ORACLE_LIMIT {
        bail!("dimension {} exceeds the dense oracle limit {ORACLE_LIMIT}", h.dim());
    }
    let region = region_for(cfg, &model)?;
    let shift = model.shift();
    let (res, _) = located(cfg, &model, &region)?;
    let oracle = det_scan_spectrum_with(&h.to_dense(), &region, &root_options(cfg))?;
    let (a, b) = (res.expanded(), oracle.expanded());
    let mut rep = Report::new("oracle-compare", cfg, vec!["cf_re", "cf_im", "oracle_re", "oracle_im", "distance"]);
    rep.diag("region", describe(&region, shift).as_str());
    rep.diag("cf_roots", a.len());
    rep.diag("oracle_roots", b.len());
    rep.warnings.extend(res.warnings.iter().map(|w| format!("fraction: {w}")));
    rep.warnings.extend(oracle.warnings.iter().map(|w| format!("oracle: {w}")));
    let pairs = match_closest(&a, &b);
    let worst = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    for &(i, j, d) in &pairs {
        rep.row(vec![(a[i].re + shift).into(), a[i].im.into(), (b[j].re + shift).into(), b[j].im.into(), d.into()]);
    }
    let nan = || Cell::Num(f64::NAN);
    for (_, z) in a.iter().enumerate().filter(|(i, _)| !pairs.iter().any(|p| p.0 == *i)) {
        rep.row(vec![(z.re + shift).into(), z.im.into(), nan(), nan(), nan()]);
    }
    for (_, z) in b.iter().enumerate().filter(|(j, _)| !pairs.iter().any(|p| p.1 == *j)) {
        rep.row(vec![nan(), nan(), (z.re + shift).into(), z.im.into(), nan()]);
    }
    rep.diag("matched", pairs.len());
    rep.diag("max_distance", worst);
    if a.len() != b.len() {
        rep.failures.push(format!("fraction finds {} roots, oracle finds {}", a.len(), b.len()));
    }
    if worst > cfg.threshold {
        rep.failures.push(format!("max distance {worst:e} exceeds {:e}", cfg.threshold));
    }
    Ok(rep)
}

/// Catalogue of models, or the coefficient table of the selected one.
pub fn models_cmd(cfg: &Resolved, explicit: bool) -> Result<Report> {
    if !explicit {
        let mut rep = Report::new("models", cfg, vec!["model", "keys", "description"]);
        for m in CATALOGUE {
            rep.row(vec![m.name.into(), m.keys.into(), m.about.into()]);
        }
        return Ok(rep);
    }
    let model = build(cfg)?;
    let h = match &model {
        Model::Finite { .. } => model.physical("models")?,
        Model::Unbounded(src) => truncate_window(src, Window::finite(1, 16))?,
    };
    let mut rep = Report::new("models", cfg, vec!["row", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im"]);
    rep.diag("model", cfg.model.name());
    rep.diag("dimension", h.dim());
    if cfg.model == ModelKind::SinghLike && matches!(model, Model::Unbounded(_)) {
        rep.warnings.push("unbounded chain; first 16 rows shown".into());
    }
    let nan = f64::NAN;
    for k in h.lo()..=h.hi() {
        let a = h.diag(k);
        let b = if k < h.hi() { h.upper(k) } else { C64::new(nan, nan) };
        let c = if k > h.lo() { h.lower(k) } else { C64::new(nan, nan) };
        rep.row(vec![k.into(), a.re.into(), a.im.into(), b.re.into(), b.im.into(), c.re.into(), c.im.into()]);
    }
    Ok(rep)
}
