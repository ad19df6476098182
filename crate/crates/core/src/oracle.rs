//! Dense reference algorithms used to cross-check the continued-fraction
//! engines. Nothing here calls into `cfrac`, `factor` or `hermitize`.

use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};
use crate::roots::{locate_roots, RootOptions, SearchRegion, Secular, SpectrumResult};
use crate::C64;

/// Largest dimension the dense routines accept.
pub const ORACLE_LIMIT: usize = 64;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("matrix rows must form a square".into()));
        }
        Ok(DenseMatrix {
            dim,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conj_transpose(&self) -> Self {
        let n = self.dim;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn scaled(&self, s: C64) -> Self {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise deviation from `self == self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut d = 0.0f64;
        for i in 0..n {
            for j in i..n {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn mat_vec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    fn check_size(&self) -> Result<()> {
        if self.dim > ORACLE_LIMIT {
            Err(Error::OracleTooLarge {
                dim: self.dim,
                limit: ORACLE_LIMIT,
            })
        } else {
            Ok(())
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// `det(m - z I)` by LU decomposition with partial pivoting.
pub fn lu_det(m: &DenseMatrix, z: C64) -> C64 {
    let n = m.dim;
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= z;
    }
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[(r, col)].norm().total_cmp(&a[(s, col)].norm()))
            .unwrap_or(col);
        if a[(pivot, col)].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                a.data.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[(col, col)];
        det *= p;
        for r in col + 1..n {
            let factor = a[(r, col)] / p;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = a[(col, j)];
                a[(r, j)] -= factor * v;
            }
        }
    }
    det
}

struct ScaledDet<'a> {
    m: &'a DenseMatrix,
    scale: f64,
}

impl Secular for ScaledDet<'_> {
    fn eval(&self, z: C64) -> C64 {
        lu_det(self.m, z / self.scale)
    }
}

/// Spectrum of `m` inside `region` by seeding and Newton refinement on the LU
/// determinant, with the argument principle over the same determinant as the
/// completeness check.
pub fn det_scan_spectrum(m: &DenseMatrix, region: &SearchRegion) -> Result<SpectrumResult> {
    det_scan_spectrum_with(m, region, &RootOptions::default())
}

pub fn det_scan_spectrum_with(m: &DenseMatrix, region: &SearchRegion, opts: &RootOptions) -> Result<SpectrumResult> {
    m.check_size()?;
    // work with det(m/s - z/s) so that values stay O(1) per factor
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let scaled = m.scaled(C64::new(1.0 / scale, 0.0));
    let f = ScaledDet {
        m: &scaled,
        scale,
    };
    Ok(locate_roots(&[&f], Some(&f), region, opts))
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted ascending.
pub fn jacobi_eigen(m: &DenseMatrix) -> Result<Vec<f64>> {
    m.check_size()?;
    let n = m.dim;
    let norm = m.frobenius();
    let defect = m.hermiticity_defect();
    if defect > 1e-12 * norm.max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let off = |a: &DenseMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(&a) <= 1e-13 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // columns p, q of G = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * g_pp + y * g_qp;
                    a[(k, q)] = x * g_pq + y * g_qq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g_pp.conj() * x + g_qp.conj() * y;
                    a[(q, k)] = g_pq.conj() * x + g_qq.conj() * y;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Singular values of `h` by one-sided (Hestenes) Jacobi: plane rotations
/// orthogonalise the columns, whose norms are then the singular values.
/// Absolute accuracy is about `eps * ||h||`, also for zero singular values.
/// Sorted ascending.
pub fn svd_oracle(h: &DenseMatrix) -> Result<Vec<f64>> {
    h.check_size()?;
    let n = h.dim;
    let mut a = h.clone();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, C64::new(0.0, 0.0));
                for i in 0..n {
                    alpha += a[(i, p)].norm_sqr();
                    beta += a[(i, q)].norm_sqr();
                    gamma += a[(i, p)].conj() * a[(i, q)];
                }
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // rotate column q by the phase of gamma, then a real rotation
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)] * phase.conj();
                    a[(i, p)] = x * cs - y * sn;
                    a[(i, q)] = x * sn + y * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(f64::total_cmp);
    Ok(sv)
}
