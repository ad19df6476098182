//! `H - z = U F L` with unit bidiagonal outer factors and
//! `F = diag(1/f_k)`, plus eigenvector reconstruction by cumulative products.

use crate::error::{Error, Result};
use crate::operator::{CoefficientSource, FiniteTridiagonal};
use crate::oracle::DenseMatrix;
use crate::C64;

/// Where the two recurrences meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// A single downward recurrence; `U` upper and `L` lower bidiagonal.
    OneSided,
    /// Downward above the given row, upward below it.
    TwoSidedCenter(i64),
}

/// The three factors. Link `i` joins rows `lo + i` and `lo + i + 1`.
///
/// Above the center (and everywhere in the one-sided layout)
/// `u = -b_k f_{k+1}` sits at `U[k, k+1]` as `-u` and `v = -f_{k+1} c_{k+1}`
/// sits at `L[k+1, k]` as `-v`. Below the center `u = -c_j f_{j-1}` sits at
/// `U[j, j-1]` and `v = -f_{j-1} b_{j-1}` at `L[j-1, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UflFactors {
    pub offset: i64,
    pub u: Vec<C64>,
    pub f: Vec<C64>,
    pub v: Vec<C64>,
    pub layout: Layout,
}

fn breakdown_floor(h: &FiniteTridiagonal) -> f64 {
    1e-14 * (1.0 + h.max_abs())
}

/// With a floor, denominators at or below it are an error. Without one, an
/// exactly vanishing denominator is replaced by a tiny value so that
/// cumulative products stay finite.
fn guard(den: C64, index: i64, floor: Option<f64>, h: &FiniteTridiagonal) -> Result<C64> {
    if !den.norm().is_finite() {
        return Err(Error::Breakdown {
            index,
            magnitude: den.norm(),
        });
    }
    match floor {
        Some(fl) if den.norm() <= fl => Err(Error::Breakdown {
            index,
            magnitude: den.norm(),
        }),
        None if den == C64::new(0.0, 0.0) => Ok(C64::new(1e-3 * breakdown_floor(h), 0.0)),
        _ => Ok(den),
    }
}

/// `f_k` for `k = from..=hi` by the downward recurrence, indexed from `from`.
fn downward(h: &FiniteTridiagonal, z: C64, from: i64, floor: Option<f64>) -> Result<Vec<C64>> {
    let hi = h.hi();
    let n = (hi - from + 1).max(0) as usize;
    let mut f = vec![C64::new(0.0, 0.0); n];
    let mut next = C64::new(0.0, 0.0);
    for k in (from..=hi).rev() {
        let coupling = if k == hi { C64::new(0.0, 0.0) } else { h.upper(k) * h.lower(k + 1) };
        let den = h.diag(k) - z - coupling * next;
        let den = guard(den, k, floor, h)?;
        next = den.inv();
        f[(k - from) as usize] = next;
    }
    Ok(f)
}

/// `f_j` for `j = lo..=to` by the upward recurrence, indexed from `lo`.
fn upward(h: &FiniteTridiagonal, z: C64, to: i64, floor: Option<f64>) -> Result<Vec<C64>> {
    let lo = h.lo();
    let n = (to - lo + 1).max(0) as usize;
    let mut f = vec![C64::new(0.0, 0.0); n];
    let mut next = C64::new(0.0, 0.0);
    for j in lo..=to {
        let coupling = if j == lo { C64::new(0.0, 0.0) } else { h.lower(j) * h.upper(j - 1) };
        let den = h.diag(j) - z - coupling * next;
        let den = guard(den, j, floor, h)?;
        next = den.inv();
        f[(j - lo) as usize] = next;
    }
    Ok(f)
}

fn check_center(h: &FiniteTridiagonal, p: i64) -> Result<()> {
    if p < h.lo() || p > h.hi() {
        Err(Error::OutOfWindow { index: p })
    } else {
        Ok(())
    }
}

/// Factorizes `H - z`. Fails with [`Error::Breakdown`] when a denominator is
/// numerically zero, i.e. `z` sits at an eigenvalue of a partial chain.
pub fn factorize(h: &FiniteTridiagonal, z: C64, layout: Layout) -> Result<UflFactors> {
    let floor = breakdown_floor(h);
    let (lo, hi) = (h.lo(), h.hi());
    let p = match layout {
        Layout::OneSided => lo,
        Layout::TwoSidedCenter(p) => {
            check_center(h, p)?;
            p
        }
    };
    let mut f = upward(h, z, p - 1, Some(floor))?;
    let above = downward(h, z, p + 1, Some(floor))?;
    let mut s = h.diag(p) - z;
    if p > lo {
        s -= h.lower(p) * f[(p - 1 - lo) as usize] * h.upper(p - 1);
    }
    if p < hi {
        s -= h.upper(p) * above[0] * h.lower(p + 1);
    }
    if s.norm() <= floor {
        return Err(Error::Breakdown {
            index: p,
            magnitude: s.norm(),
        });
    }
    f.push(s.inv());
    f.extend(above);

    let fk = |k: i64| f[(k - lo) as usize];
    let mut u = Vec::with_capacity(h.dim().saturating_sub(1));
    let mut v = Vec::with_capacity(h.dim().saturating_sub(1));
    for k in lo..hi {
        if k >= p {
            u.push(-h.upper(k) * fk(k + 1));
            v.push(-fk(k + 1) * h.lower(k + 1));
        } else {
            let j = k + 1;
            u.push(-h.lower(j) * fk(j - 1));
            v.push(-fk(j - 1) * h.upper(j - 1));
        }
    }
    Ok(UflFactors {
        offset: lo,
        u,
        f,
        v,
        layout,
    })
}

impl UflFactors {
    pub fn dim(&self) -> usize {
        self.f.len()
    }

    fn center(&self) -> i64 {
        match self.layout {
            Layout::OneSided => self.offset,
            Layout::TwoSidedCenter(p) => p,
        }
    }

    /// Dense `U`, `F`, `L`.
    pub fn dense_factors(&self) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
        let n = self.dim();
        let mut u = DenseMatrix::identity(n);
        let mut l = DenseMatrix::identity(n);
        let mut fm = DenseMatrix::zeros(n);
        for (i, f) in self.f.iter().enumerate() {
            fm[(i, i)] = f.inv();
        }
        let p = (self.center() - self.offset) as usize;
        for i in 0..n.saturating_sub(1) {
            if i >= p {
                u[(i, i + 1)] = -self.u[i];
                l[(i + 1, i)] = -self.v[i];
            } else {
                u[(i + 1, i)] = -self.u[i];
                l[(i, i + 1)] = -self.v[i];
            }
        }
        (u, fm, l)
    }

    /// `U F L` as a dense matrix.
    pub fn reassemble(&self) -> DenseMatrix {
        let (u, f, l) = self.dense_factors();
        &(&u * &f) * &l
    }

    /// `det(H - z) = prod 1/f_k`.
    pub fn determinant(&self) -> C64 {
        self.f.iter().map(|f| f.inv()).product()
    }
}

/// Which entry of a wavefunction is pinned to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// First row of the window.
    Psi1,
    /// The given anchor row.
    Psi0(i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub offset: i64,
    pub values: Vec<C64>,
    pub normalization: Normalization,
    /// `||(H - E) psi|| / ||psi||`.
    pub residual: f64,
}

impl Wavefunction {
    pub fn get(&self, k: i64) -> Option<C64> {
        let i = k - self.offset;
        (i >= 0).then(|| self.values.get(i as usize).copied()).flatten()
    }

    /// Largest deviation of `self` from `other` after matching the overall
    /// scale on the largest common entry, relative to the largest entry.
    pub fn scale_mismatch(&self, other: &Wavefunction) -> f64 {
        if self.values.len() != other.values.len() || self.values.is_empty() {
            return f64::INFINITY;
        }
        let (imax, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, x)| if x.norm() > acc.1 { (i, x.norm()) } else { acc });
        if other.values[imax].norm() == 0.0 {
            return f64::INFINITY;
        }
        let ratio = self.values[imax] / other.values[imax];
        let big = self.values[imax].norm();
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b * ratio).norm() / big)
            .fold(0.0, f64::max)
    }
}

fn residual(h: &FiniteTridiagonal, e: C64, psi: &[C64]) -> f64 {
    let r = h.apply_shifted(e, psi);
    let rn = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let pn = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if pn == 0.0 || !pn.is_finite() {
        f64::INFINITY
    } else {
        rn / pn
    }
}

/// `psi_1 = 1`, `psi_k = -f_k c_k psi_{k-1}`, forward substitution through `L`.
/// Meaningful when `E` is a root of `1/f_1`.
pub fn wavefunction_one_sided(h: &FiniteTridiagonal, e: C64) -> Result<Wavefunction> {
    let lo = h.lo();
    let f = if h.dim() > 1 {
        downward(h, e, lo + 1, None)?
    } else {
        Vec::new()
    };
    let mut psi = Vec::with_capacity(h.dim());
    psi.push(C64::new(1.0, 0.0));
    for (i, fk) in f.iter().enumerate() {
        let k = lo + 1 + i as i64;
        let prev = psi[i];
        psi.push(-fk * h.lower(k) * prev);
    }
    Ok(Wavefunction {
        offset: lo,
        residual: residual(h, e, &psi),
        values: psi,
        normalization: Normalization::Psi1,
    })
}

/// `psi_0 = 1`; above row 0 `psi_k = -c_k f_k psi_{k-1}` with downward `f`,
/// below it `psi_j = -f_j b_j psi_{j+1}` with upward `f`.
pub fn wavefunction_two_sided(h: &FiniteTridiagonal, e: C64) -> Result<Wavefunction> {
    wavefunction_two_sided_at(h, 0, e)
}

pub fn wavefunction_two_sided_at(h: &FiniteTridiagonal, anchor: i64, e: C64) -> Result<Wavefunction> {
    check_center(h, anchor)?;
    let (lo, hi) = (h.lo(), h.hi());
    let below = upward(h, e, anchor - 1, None)?;
    let above = downward(h, e, anchor + 1, None)?;
    let mut psi = vec![C64::new(0.0, 0.0); h.dim()];
    let idx = |k: i64| (k - lo) as usize;
    psi[idx(anchor)] = C64::new(1.0, 0.0);
    for k in anchor + 1..=hi {
        psi[idx(k)] = -h.lower(k) * above[(k - anchor - 1) as usize] * psi[idx(k - 1)];
    }
    for j in (lo..anchor).rev() {
        psi[idx(j)] = -below[(j - lo) as usize] * h.upper(j) * psi[idx(j + 1)];
    }
    Ok(Wavefunction {
        offset: lo,
        residual: residual(h, e, &psi),
        values: psi,
        normalization: Normalization::Psi0(anchor),
    })
}

/// Two-sided reconstruction at the preferred anchor, falling back to other
/// anchors when the eigenvector (nearly) vanishes there. Returns the
/// candidate with the smallest residual.
pub fn wavefunction_auto(h: &FiniteTridiagonal, anchor: i64, e: C64) -> Result<Wavefunction> {
    check_center(h, anchor)?;
    let candidates = |ps: &mut dyn Iterator<Item = i64>, best: &mut Option<Wavefunction>| {
        for p in ps {
            if let Ok(w) = wavefunction_two_sided_at(h, p, e) {
                if best.as_ref().is_none_or(|b| w.residual < b.residual) {
                    *best = Some(w);
                }
            }
        }
    };
    let mut best: Option<Wavefunction> = None;
    let near = [anchor, anchor + 1, anchor - 1];
    candidates(&mut near.into_iter().filter(|p| *p >= h.lo() && *p <= h.hi()), &mut best);
    if best.as_ref().is_none_or(|b| b.residual > 1e-10) {
        candidates(&mut (h.lo()..=h.hi()).filter(|p| !near.contains(p)), &mut best);
    }
    best.ok_or(Error::Breakdown {
        index: anchor,
        magnitude: 0.0,
    })
}

/// Left eigenvector `phi^T (H - E) = 0`, from the right eigenvector of `H^T`.
pub fn left_eigenvector(h: &FiniteTridiagonal, e: C64) -> Result<Wavefunction> {
    wavefunction_two_sided(&h.transpose(), e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::bose_hubbard;
    use crate::oracle::lu_det;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn one_by_one() {
        let h = FiniteTridiagonal::diagonal(0, vec![c(2.0, 1.0)]).unwrap();
        let z = c(0.5, 0.0);
        for layout in [Layout::OneSided, Layout::TwoSidedCenter(0)] {
            let fac = factorize(&h, z, layout).unwrap();
            assert_eq!(fac.f, vec![(c(2.0, 1.0) - z).inv()]);
            assert!(fac.u.is_empty() && fac.v.is_empty());
        }
    }

    #[test]
    fn two_by_two_entries() {
        let h = bose_hubbard(1, 0.5).unwrap().reindexed(1);
        let fac = factorize(&h, c(0.0, 0.0), Layout::OneSided).unwrap();
        assert!((fac.f[1] - c(0.0, -2.0)).norm() < 1e-15);
        assert!((fac.f[0] - c(0.0, -2.0 / 3.0)).norm() < 1e-15);
        assert!((fac.u[0] - c(0.0, 2.0)).norm() < 1e-15);
        assert!((fac.v[0] - c(0.0, 2.0)).norm() < 1e-15);
        let back = fac.reassemble();
        let want = h.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                assert!((back[(i, j)] - want[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn both_layouts_reassemble_and_give_determinant() {
        let h = bose_hubbard(4, 0.3).unwrap();
        let z = c(0.4, 0.7);
        let mut shifted = h.to_dense();
        for i in 0..h.dim() {
            shifted[(i, i)] -= z;
        }
        for layout in [Layout::OneSided, Layout::TwoSidedCenter(0), Layout::TwoSidedCenter(2), Layout::TwoSidedCenter(-2)] {
            let fac = factorize(&h, z, layout).unwrap();
            let back = fac.reassemble();
            for i in 0..h.dim() {
                for j in 0..h.dim() {
                    assert!((back[(i, j)] - shifted[(i, j)]).norm() < 1e-12, "{layout:?}");
                }
            }
            let det = lu_det(&h.to_dense(), z);
            assert!((fac.determinant() - det).norm() < 1e-10 * det.norm());
            let (u, _, l) = fac.dense_factors();
            assert!((lu_det(&u, c(0.0, 0.0)) - 1.0).norm() < 1e-14);
            assert!((lu_det(&l, c(0.0, 0.0)) - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn breakdown_is_reported() {
        let h = FiniteTridiagonal::diagonal(0, vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!(matches!(
            factorize(&h, c(2.0, 0.0), Layout::OneSided),
            Err(Error::Breakdown { index: 1, .. })
        ));
    }

    #[test]
    fn two_boson_wavefunction_by_hand() {
        let gamma = 0.5;
        let h = bose_hubbard(1, gamma).unwrap();
        let e = c(0.75f64.sqrt(), 0.0);
        let w = wavefunction_one_sided(&h, e).unwrap();
        assert_eq!(w.values[0], c(1.0, 0.0));
        assert!((w.values[1] - (e + c(0.0, gamma))).norm() < 1e-14);
        assert!(w.residual < 1e-10);
    }

    #[test]
    fn diagonal_layout_limitation() {
        let h = FiniteTridiagonal::diagonal(1, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!(wavefunction_one_sided(&h, c(1.0, 0.0)).unwrap().residual == 0.0);
        assert!(wavefunction_one_sided(&h, c(2.0, 0.0)).unwrap().residual > 0.1);
        let h0 = h.reindexed(-1);
        let w = wavefunction_two_sided(&h0, c(2.0, 0.0)).unwrap();
        assert_eq!(w.residual, 0.0);
        assert_eq!(w.values, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn three_boson_zero_mode() {
        let h = bose_hubbard(2, 0.5).unwrap();
        let w2 = wavefunction_two_sided(&h, c(0.0, 0.0)).unwrap();
        assert!(w2.residual < 1e-10);
        let w1 = wavefunction_one_sided(&h, c(0.0, 0.0)).unwrap();
        assert!(w1.residual < 1e-10);
        assert!(w1.scale_mismatch(&w2) < 1e-12);
        // PT-like parity: psi_{-1} and psi_1 related by reflection
        let (a, b) = (w2.get(-1).unwrap(), w2.get(1).unwrap());
        assert!((a.norm() - b.norm()).abs() < 1e-12);
    }

    #[test]
    fn auto_anchor_handles_vanishing_center() {
        // gamma = 0: the E = 0 eigenvector of the 3x3 vanishes at row 0
        let h = bose_hubbard(2, 0.0).unwrap();
        let e = c(0.0, 0.0);
        let w = wavefunction_auto(&h, 0, e).unwrap();
        assert!(w.residual < 1e-10, "{}", w.residual);
    }

    #[test]
    fn left_equals_right_for_complex_symmetric() {
        let h = bose_hubbard(4, 0.5).unwrap();
        let e = c(3.0f64.sqrt(), 0.0);
        let r = wavefunction_two_sided(&h, e).unwrap();
        let l = left_eigenvector(&h, e).unwrap();
        assert_eq!(r.values, l.values);
    }
}
