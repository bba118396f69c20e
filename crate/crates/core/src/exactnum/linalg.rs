use super::cyclo::{CoeffScalar, CycloCtx};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Small dense matrix over `CoeffScalar`; exact Gaussian elimination only,
/// sized for representation tables (dimensions stay in the double digits).
#[derive(Clone, PartialEq, Eq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub e: Vec<CoeffScalar>,
}

impl CMat {
    pub fn zero(ctx: &Arc<CycloCtx>, rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            e: vec![CoeffScalar::zero(ctx); rows * cols],
        }
    }

    pub fn identity(ctx: &Arc<CycloCtx>, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = CoeffScalar::one(ctx);
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &CoeffScalar {
        &self.e[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut CoeffScalar {
        &mut self.e[i * self.cols + j]
    }

    pub fn ctx(&self) -> Arc<CycloCtx> {
        self.e[0].ctx.clone()
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        let ctx = self.ctx();
        let mut out = Self::zero(&ctx, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    *out.at_mut(i, j) = out.at(i, j).add(&a.mul(b));
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn scale(&self, s: &CoeffScalar) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            e: self.e.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let ctx = self.ctx();
        let mut out = Self::zero(&ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn trace(&self) -> CoeffScalar {
        let ctx = self.ctx();
        let mut t = CoeffScalar::zero(&ctx);
        for i in 0..self.rows.min(self.cols) {
            t = t.add(self.at(i, i));
        }
        t
    }

    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let ctx = self.ctx();
        let mut a = self.clone();
        let mut inv = Self::identity(&ctx, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.at(r, col).is_zero())
                .ok_or(Error::DivisionByZero)?;
            if pivot != col {
                for j in 0..n {
                    let tmp = a.at(pivot, j).clone();
                    *a.at_mut(pivot, j) = a.at(col, j).clone();
                    *a.at_mut(col, j) = tmp;
                    let tmp = inv.at(pivot, j).clone();
                    *inv.at_mut(pivot, j) = inv.at(col, j).clone();
                    *inv.at_mut(col, j) = tmp;
                }
            }
            let pinv = a.at(col, col).inv()?;
            for j in 0..n {
                *a.at_mut(col, j) = a.at(col, j).mul(&pinv);
                *inv.at_mut(col, j) = inv.at(col, j).mul(&pinv);
            }
            for r in 0..n {
                if r == col || a.at(r, col).is_zero() {
                    continue;
                }
                let f = a.at(r, col).clone();
                for j in 0..n {
                    *a.at_mut(r, j) = a.at(r, j).sub(&f.mul(a.at(col, j)));
                    *inv.at_mut(r, j) = inv.at(r, j).sub(&f.mul(inv.at(col, j)));
                }
            }
        }
        Ok(inv)
    }

    /// Basis of the column space, as a rows × rank matrix.
    pub fn column_space_basis(&self) -> Result<Self> {
        let ctx = self.ctx();
        // row-reduce a copy to find pivot columns
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            if r >= self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !a.at(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    let tmp = a.at(pr, j).clone();
                    *a.at_mut(pr, j) = a.at(r, j).clone();
                    *a.at_mut(r, j) = tmp;
                }
            }
            let pinv = a.at(r, c).inv()?;
            for j in 0..self.cols {
                *a.at_mut(r, j) = a.at(r, j).mul(&pinv);
            }
            for i in 0..self.rows {
                if i == r || a.at(i, c).is_zero() {
                    continue;
                }
                let f = a.at(i, c).clone();
                for j in 0..self.cols {
                    *a.at_mut(i, j) = a.at(i, j).sub(&f.mul(a.at(r, j)));
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut out = Self::zero(&ctx, self.rows, pivots.len());
        for (k, &c) in pivots.iter().enumerate() {
            for i in 0..self.rows {
                *out.at_mut(i, k) = self.at(i, c).clone();
            }
        }
        Ok(out)
    }

    /// Solve B·X = C for X where B (rows × d) has full column rank d.
    /// The solution is checked exactly; an inconsistent system errors.
    pub fn solve_full_rank(b: &CMat, c: &CMat) -> Result<CMat> {
        assert_eq!(b.rows, c.rows);
        let d = b.cols;
        // Gaussian elimination on the augmented system [B | C].
        let ctx = b.ctx();
        let mut aug = CMat::zero(&ctx, b.rows, d + c.cols);
        for i in 0..b.rows {
            for j in 0..d {
                *aug.at_mut(i, j) = b.at(i, j).clone();
            }
            for j in 0..c.cols {
                *aug.at_mut(i, d + j) = c.at(i, j).clone();
            }
        }
        let mut r = 0usize;
        for cc in 0..d {
            let Some(pr) = (r..b.rows).find(|&i| !aug.at(i, cc).is_zero()) else {
                return Err(Error::Internal("rank-deficient solve".into()));
            };
            if pr != r {
                for j in 0..aug.cols {
                    let tmp = aug.at(pr, j).clone();
                    *aug.at_mut(pr, j) = aug.at(r, j).clone();
                    *aug.at_mut(r, j) = tmp;
                }
            }
            let pinv = aug.at(r, cc).inv()?;
            for j in 0..aug.cols {
                *aug.at_mut(r, j) = aug.at(r, j).mul(&pinv);
            }
            for i in 0..b.rows {
                if i == r || aug.at(i, cc).is_zero() {
                    continue;
                }
                let f = aug.at(i, cc).clone();
                for j in 0..aug.cols {
                    *aug.at_mut(i, j) = aug.at(i, j).sub(&f.mul(aug.at(r, j)));
                }
            }
            r += 1;
        }
        let mut x = CMat::zero(&ctx, d, c.cols);
        for i in 0..d {
            for j in 0..c.cols {
                *x.at_mut(i, j) = aug.at(i, d + j).clone();
            }
        }
        // exact verification
        let bx = b.mul(&x);
        if &bx != c {
            return Err(Error::Internal("inconsistent linear system".into()));
        }
        Ok(x)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{}, ", self.at(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
