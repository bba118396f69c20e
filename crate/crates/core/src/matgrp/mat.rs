use crate::error::{Error, Result};
use crate::exactnum::{rat_pow_p, Rat};
use crate::padic::{class_mod, val_p_rat};
use num::traits::{One, Zero};
use std::fmt;

fn pow_u(p: u64, k: u32) -> u64 {
    p.checked_pow(k).expect("modulus overflow")
}

/// A rectangular matrix over Z/p^k with entries stored as reduced residues.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ResMat {
    pub rows: usize,
    pub cols: usize,
    pub p: u64,
    pub k: u32,
    pub e: Vec<u64>,
}

impl ResMat {
    pub fn zero(rows: usize, cols: usize, p: u64, k: u32) -> Self {
        ResMat {
            rows,
            cols,
            p,
            k,
            e: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, p: u64, k: u32) -> Self {
        let mut m = Self::zero(n, n, p, k);
        for i in 0..n {
            m.e[i * n + i] = 1 % pow_u(p, k);
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, p: u64, k: u32, e: Vec<i64>) -> Self {
        let m = pow_u(p, k) as i64;
        ResMat {
            rows,
            cols,
            p,
            k,
            e: e.into_iter().map(|x| x.rem_euclid(m) as u64).collect(),
        }
    }

    pub fn modulus(&self) -> u64 {
        pow_u(self.p, self.k)
    }

    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.e[i * self.cols + j] = v % self.modulus();
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        assert_eq!((self.p, self.k), (o.p, o.k));
        let m = self.modulus() as u128;
        let mut out = Self::zero(self.rows, o.cols, self.p, self.k);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc: u128 = 0;
                for t in 0..self.cols {
                    acc += self.at(i, t) as u128 * o.at(t, j) as u128;
                }
                out.e[i * o.cols + j] = (acc % m) as u64;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows, self.p, self.k);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.e[j * self.rows + i] = self.at(i, j);
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols, self.p, self.k), (o.rows, o.cols, o.p, o.k));
        let m = self.modulus();
        ResMat {
            rows: self.rows,
            cols: self.cols,
            p: self.p,
            k: self.k,
            e: self.e.iter().zip(&o.e).map(|(a, b)| (a + b) % m).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols, self.p, self.k), (o.rows, o.cols, o.p, o.k));
        let m = self.modulus();
        ResMat {
            rows: self.rows,
            cols: self.cols,
            p: self.p,
            k: self.k,
            e: self.e.iter().zip(&o.e).map(|(a, b)| (a + m - b) % m).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        ResMat {
            rows: self.rows,
            cols: self.cols,
            p: self.p,
            k: self.k,
            e: self.e.iter().map(|&a| (m - a) % m).collect(),
        }
    }

    /// Reduce to a smaller modulus p^k2.
    pub fn reduce_to(&self, k2: u32) -> Self {
        assert!(k2 <= self.k);
        let m = pow_u(self.p, k2);
        ResMat {
            rows: self.rows,
            cols: self.cols,
            p: self.p,
            k: k2,
            e: self.e.iter().map(|x| x % m).collect(),
        }
    }

    fn unit_inverse(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            return None;
        }
        let m = self.modulus();
        // extended Euclid on small integers
        let (mut t, mut new_t): (i128, i128) = (0, 1);
        let (mut r, mut new_r): (i128, i128) = (m as i128, a as i128);
        while new_r != 0 {
            let q = r / new_r;
            let tmp = t - q * new_t;
            t = std::mem::replace(&mut new_t, tmp);
            let tmp = r - q * new_r;
            r = std::mem::replace(&mut new_r, tmp);
        }
        if r != 1 {
            return None;
        }
        Some(t.rem_euclid(m as i128) as u64)
    }

    /// Determinant in Z/p^k by elimination with unit pivots; pivots divisible
    /// by p trigger a fallback expansion (matrices here are tiny).
    pub fn det(&self) -> u64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let m = self.modulus() as i128;
        // cofactor expansion; n ≤ 6 in this crate
        fn cof(e: &[i128], n: usize, m: i128) -> i128 {
            if n == 1 {
                return e[0].rem_euclid(m);
            }
            let mut acc: i128 = 0;
            for j in 0..n {
                if e[j] == 0 {
                    continue;
                }
                let mut sub = Vec::with_capacity((n - 1) * (n - 1));
                for i in 1..n {
                    for jj in 0..n {
                        if jj != j {
                            sub.push(e[i * n + jj]);
                        }
                    }
                }
                let term = e[j] * cof(&sub, n - 1, m) % m;
                acc = (acc + if j % 2 == 0 { term } else { -term }).rem_euclid(m);
            }
            acc
        }
        let e: Vec<i128> = self.e.iter().map(|&x| x as i128).collect();
        cof(&e, n, m).rem_euclid(m) as u64
    }

    pub fn det_is_unit(&self) -> bool {
        self.det() % self.p != 0
    }

    /// Inverse over the local ring Z/p^k (exists iff det is a unit).
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let m = self.modulus();
        let mut a = self.clone();
        let mut inv = Self::identity(n, self.p, self.k);
        for col in 0..n {
            let pr = (col..n)
                .find(|&r| a.at(r, col) % self.p != 0)
                .ok_or_else(|| Error::NotInSet("matrix not invertible mod p".into()))?;
            if pr != col {
                for j in 0..n {
                    let t = a.at(pr, j);
                    a.set(pr, j, a.at(col, j));
                    a.set(col, j, t);
                    let t = inv.at(pr, j);
                    inv.set(pr, j, inv.at(col, j));
                    inv.set(col, j, t);
                }
            }
            let pinv = a.unit_inverse(a.at(col, col)).unwrap();
            for j in 0..n {
                a.set(col, j, ((a.at(col, j) as u128 * pinv as u128) % m as u128) as u64);
                inv.set(col, j, ((inv.at(col, j) as u128 * pinv as u128) % m as u128) as u64);
            }
            for r in 0..n {
                if r == col || a.at(r, col) == 0 {
                    continue;
                }
                let f = a.at(r, col) as u128;
                for j in 0..n {
                    let av = (a.at(r, j) as u128 + (m as u128 - (f * a.at(col, j) as u128) % m as u128)) % m as u128;
                    a.set(r, j, av as u64);
                    let iv = (inv.at(r, j) as u128
                        + (m as u128 - (f * inv.at(col, j) as u128) % m as u128))
                        % m as u128;
                    inv.set(r, j, iv as u64);
                }
            }
        }
        Ok(inv)
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        let mut out = Self::zero(h, w, self.p, self.k);
        for i in 0..h {
            for j in 0..w {
                out.e[i * w + j] = self.at(r0 + i, c0 + j);
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &ResMat) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.at(i, j));
            }
        }
    }

    /// Mixed-radix encoding; fits u128 for the sizes used here.
    pub fn encode(&self) -> u128 {
        let m = self.modulus() as u128;
        let mut acc: u128 = 0;
        for &x in &self.e {
            acc = acc * m + x as u128;
        }
        acc
    }

    pub fn to_qmat(&self) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            e: self
                .e
                .iter()
                .map(|&x| Rat::from_integer((x as i64).into()))
                .collect(),
        }
    }
}

impl fmt::Debug for ResMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ResMat mod {}^{} ", self.p, self.k)?;
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                write!(f, "{}{}", self.at(i, j), if j + 1 < self.cols { " " } else { "" })?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// Exact rational matrix: the working model for matrices over K_w = Q_p,
/// using Q ⊂ Q_p (all constructions in this crate stay inside Q).
#[derive(Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub e: Vec<Rat>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            e: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.e[i * n + i] = Rat::one();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, e: &[i64]) -> Self {
        QMat {
            rows,
            cols,
            e: e.iter().map(|&x| Rat::from_integer(x.into())).collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.e[i * self.cols + j] = v;
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        let mut out = Self::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.at(i, t);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let v = &out.e[i * o.cols + j] + &(a * o.at(t, j));
                    out.e[i * o.cols + j] = v;
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        QMat {
            rows: self.rows,
            cols: self.cols,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        QMat {
            rows: self.rows,
            cols: self.cols,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        QMat {
            rows: self.rows,
            cols: self.cols,
            e: self.e.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> Self {
        QMat {
            rows: self.rows,
            cols: self.cols,
            e: self.e.iter().map(|a| a * s).collect(),
        }
    }

    /// Multiply by p^k.
    pub fn scale_pow_p(&self, p: u64, k: i64) -> Self {
        self.scale(&rat_pow_p(p, k))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).clone());
            }
        }
        out
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.e.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let Some(pr) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Rat::zero();
            };
            if pr != col {
                for j in 0..n {
                    a.swap(pr * n + j, col * n + j);
                }
                det = -det;
            }
            let piv = a[col * n + col].clone();
            det *= &piv;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let f = &a[r * n + col] / &piv;
                for j in col..n {
                    let v = &a[r * n + j] - &(&f * &a[col * n + j]);
                    a[r * n + j] = v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pr = (col..n)
                .find(|&r| !a.at(r, col).is_zero())
                .ok_or(Error::DivisionByZero)?;
            if pr != col {
                for j in 0..n {
                    a.e.swap(pr * n + j, col * n + j);
                    inv.e.swap(pr * n + j, col * n + j);
                }
            }
            let pinv = a.at(col, col).recip();
            for j in 0..n {
                let v = a.at(col, j) * &pinv;
                a.set(col, j, v);
                let v = inv.at(col, j) * &pinv;
                inv.set(col, j, v);
            }
            for r in 0..n {
                if r == col || a.at(r, col).is_zero() {
                    continue;
                }
                let f = a.at(r, col).clone();
                for j in 0..n {
                    let v = a.at(r, j) - &(&f * a.at(col, j));
                    a.set(r, j, v);
                    let v = inv.at(r, j) - &(&f * inv.at(col, j));
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        let mut out = Self::zero(h, w);
        for i in 0..h {
            for j in 0..w {
                out.set(i, j, self.at(r0 + i, c0 + j).clone());
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &QMat) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.at(i, j).clone());
            }
        }
    }

    /// Minimum p-valuation over nonzero entries (None for the zero matrix).
    pub fn min_val(&self, p: u64) -> Option<i64> {
        self.e.iter().filter_map(|x| val_p_rat(x, p)).min()
    }

    pub fn is_integral(&self, p: u64) -> bool {
        self.e
            .iter()
            .all(|x| val_p_rat(x, p).map(|v| v >= 0).unwrap_or(true))
    }

    pub fn det_val(&self, p: u64) -> Option<i64> {
        val_p_rat(&self.det(), p)
    }

    /// Residue class mod p^k; all entries must have valuation ≥ 0.
    pub fn to_res(&self, p: u64, k: u32) -> Result<ResMat> {
        let mut out = ResMat::zero(self.rows, self.cols, p, k);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, class_mod(self.at(i, j), p, k)?);
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QMat ")?;
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                write!(
                    f,
                    "{}{}",
                    self.at(i, j),
                    if j + 1 < self.cols { " " } else { "" }
                )?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resmat_inverse_mod_9() {
        let m = ResMat::from_entries(2, 2, 3, 2, vec![1, 2, 1, 1]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), ResMat::identity(2, 3, 2));
        assert!(m.det_is_unit());
    }

    #[test]
    fn resmat_singular_detected() {
        let m = ResMat::from_entries(2, 2, 3, 2, vec![3, 1, 3, 1]);
        assert!(!m.det_is_unit());
        assert!(m.inverse().is_err());
    }

    #[test]
    fn qmat_inverse_roundtrip() {
        let m = QMat::from_i64(3, 3, &[1, 2, 0, 0, 1, 5, 7, 0, 1]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(3));
        assert_eq!(m.det() * inv.det(), Rat::one());
    }

    #[test]
    fn qmat_class_reduction() {
        let m = QMat::from_i64(2, 2, &[10, 2, 3, 4]);
        let r = m.to_res(3, 2).unwrap();
        assert_eq!(r.at(0, 0), 1);
        assert_eq!(r.at(1, 1), 4);
    }
}
