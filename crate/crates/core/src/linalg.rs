//! Sparse symmetric operators, banded LU with partial pivoting, and
//! conjugate gradients. Everything here works on unknown-indexed vectors
//! (interior nodes only).

use crate::error::{Error, Result};

/// Symmetric sparse matrix stored as a diagonal plus one copy of each
/// off-diagonal pair `(i, j, value)` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    pub diag: Vec<f64>,
    pub off: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        for ((yi, di), xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = di * xi;
        }
        for &(i, j, v) in &self.off {
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }

    /// `x^T A y`
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc: f64 = self
            .diag
            .iter()
            .zip(x)
            .zip(y)
            .map(|((d, a), b)| d * a * b)
            .sum();
        for &(i, j, v) in &self.off {
            acc += v * (x[i] * y[j] + x[j] * y[i]);
        }
        acc
    }

    /// Half bandwidth of the matrix in the current unknown ordering.
    pub fn bandwidth(&self) -> usize {
        self.off
            .iter()
            .map(|&(i, j, _)| i.abs_diff(j))
            .max()
            .unwrap_or(0)
    }

    /// Copy with `shift[i]` added to the diagonal.
    pub fn with_diagonal_shift(&self, shift: &[f64]) -> SparseSym {
        let mut out = self.clone();
        for (d, s) in out.diag.iter_mut().zip(shift) {
            *d += s;
        }
        out
    }

    pub fn factor(&self) -> Result<BandedLu> {
        BandedLu::new(self)
    }
}

/// LU factorization of a banded matrix with partial (row) pivoting.
///
/// Row `i` stores columns `i - kl ..= i + 2*kl` (upper band grows by `kl`
/// under pivoting); multipliers of column `c` stay in the rows where they were
/// produced, and the permutation is replayed during the forward solve.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn new(a: &SparseSym) -> Result<BandedLu> {
        let n = a.dim();
        let kl = a.bandwidth();
        let width = 3 * kl + 1;
        let mut lu = BandedLu {
            n,
            kl,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
        };
        for i in 0..n {
            *lu.at(i, i) = a.diag[i];
        }
        for &(i, j, v) in &a.off {
            *lu.at(i, j) += v;
            *lu.at(j, i) += v;
        }
        let scale = a
            .diag
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()))
            .max(f64::MIN_POSITIVE);
        lu.decompose(scale)?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + 2 * self.kl);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    fn decompose(&mut self, scale: f64) -> Result<()> {
        let (n, kl) = (self.n, self.kl);
        for c in 0..n {
            let last_row = (c + kl).min(n - 1);
            let mut piv = c;
            let mut best = self.get(c, c).abs();
            for r in c + 1..=last_row {
                let v = self.get(r, c).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= 1e-300_f64.max(scale * 1e-15) {
                return Err(Error::SingularMatrix {
                    row: c,
                    pivot: best,
                });
            }
            self.pivots[c] = piv;
            let last_col = (c + 2 * kl).min(n - 1);
            if piv != c {
                for j in c..=last_col {
                    let (a, b) = (self.idx(c, j), self.idx(piv, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(c, c);
            for r in c + 1..=last_row {
                let l = self.get(r, c) / pivot;
                *self.at(r, c) = l;
                if l != 0.0 {
                    for j in c + 1..=last_col {
                        let u = self.get(c, j);
                        *self.at(r, j) -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl) = (self.n, self.kl);
        for c in 0..n {
            let p = self.pivots[c];
            if p != c {
                b.swap(c, p);
            }
            let bc = b[c];
            if bc != 0.0 {
                for r in c + 1..=(c + kl).min(n - 1) {
                    b[r] -= self.get(r, c) * bc;
                }
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..=(i + 2 * kl).min(n - 1) {
                acc -= self.get(i, j) * b[j];
            }
            b[i] = acc / self.get(i, i);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`; `x` holds the
/// initial guess on entry and the solution on exit.
pub fn conjugate_gradient(
    a: &SparseSym,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgStats> {
    let n = a.dim();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = a.mul(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let inv_diag: Vec<f64> = a.diag.iter().map(|d| 1.0 / d).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rel = norm(&r) / b_norm;
        if rel <= tol {
            return Ok(CgStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::InvalidArgument(
                "conjugate gradient met a non-positive curvature direction".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = norm(&r) / b_norm;
    if rel <= tol {
        Ok(CgStats {
            iterations: max_iter,
            relative_residual: rel,
        })
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual: rel,
        })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
