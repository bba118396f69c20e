use super::cyclo::{CoeffScalar, CycloCtx};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Dense polynomial in one variable over `CoeffScalar`, trailing zeros
/// trimmed (empty coefficient vector = the zero polynomial).
#[derive(Clone)]
pub struct Poly {
    pub ctx: Arc<CycloCtx>,
    pub c: Vec<CoeffScalar>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c
    }
}
impl Eq for Poly {}

impl Poly {
    pub fn zero(ctx: &Arc<CycloCtx>) -> Self {
        Poly {
            ctx: ctx.clone(),
            c: vec![],
        }
    }

    pub fn one(ctx: &Arc<CycloCtx>) -> Self {
        Poly::constant(CoeffScalar::one(ctx))
    }

    pub fn constant(c: CoeffScalar) -> Self {
        let ctx = c.ctx.clone();
        let mut p = Poly { ctx, c: vec![c] };
        p.trim();
        p
    }

    /// c · x^k.
    pub fn monomial(c: CoeffScalar, k: usize) -> Self {
        let ctx = c.ctx.clone();
        if c.is_zero() {
            return Poly::zero(&ctx);
        }
        let mut v = vec![CoeffScalar::zero(&ctx); k + 1];
        v[k] = c;
        Poly { ctx, c: v }
    }

    pub fn from_coeffs(ctx: &Arc<CycloCtx>, c: Vec<CoeffScalar>) -> Self {
        let mut p = Poly {
            ctx: ctx.clone(),
            c,
        };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.c.last().map(|x| x.is_zero()).unwrap_or(false) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn lead(&self) -> Option<&CoeffScalar> {
        self.c.last()
    }

    /// Order of vanishing at 0 (index of the first nonzero coefficient).
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn coeff(&self, k: usize) -> CoeffScalar {
        self.c
            .get(k)
            .cloned()
            .unwrap_or_else(|| CoeffScalar::zero(&self.ctx))
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i).add(&o.coeff(i)));
        }
        Poly::from_coeffs(&self.ctx, c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i).sub(&o.coeff(i)));
        }
        Poly::from_coeffs(&self.ctx, c)
    }

    pub fn neg(&self) -> Self {
        Poly::from_coeffs(&self.ctx, self.c.iter().map(|x| x.neg()).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.ctx);
        }
        let mut c = vec![CoeffScalar::zero(&self.ctx); self.c.len() + o.c.len() - 1];
        for (i, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.c.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                c[i + j] = c[i + j].add(&x.mul(y));
            }
        }
        Poly::from_coeffs(&self.ctx, c)
    }

    pub fn scale(&self, s: &CoeffScalar) -> Self {
        Poly::from_coeffs(&self.ctx, self.c.iter().map(|x| x.mul(s)).collect())
    }

    /// Multiply by x^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![CoeffScalar::zero(&self.ctx); k];
        c.extend(self.c.iter().cloned());
        Poly { ctx: self.ctx.clone(), c }
    }

    /// Euclidean division; needs the divisor's leading coefficient to be
    /// invertible in the coefficient ring.
    pub fn div_rem(&self, den: &Self) -> Result<(Self, Self)> {
        let dd = den.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = den.lead().unwrap().inv()?;
        let mut rem = self.clone();
        let mut quot = vec![
            CoeffScalar::zero(&self.ctx);
            self.c.len().saturating_sub(dd).max(1)
        ];
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let c = rem.lead().unwrap().mul(&lead_inv);
            let k = dr - dd;
            quot[k] = quot[k].add(&c);
            let sub = den.mul(&Poly::monomial(c, k));
            rem = rem.sub(&sub);
        }
        Ok((Poly::from_coeffs(&self.ctx, quot), rem))
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(&self, o: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return Ok(a);
        }
        let li = a.lead().unwrap().inv()?;
        Ok(a.scale(&li))
    }

    pub fn eval(&self, x: &CoeffScalar) -> CoeffScalar {
        let mut acc = CoeffScalar::zero(&self.ctx);
        for c in self.c.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*t")?,
                _ => write!(f, "({c})*t^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn div_rem_roundtrip() {
        let ctx = CycloCtx::new(4, 3);
        let one = CoeffScalar::one(&ctx);
        let two = CoeffScalar::from_i64(&ctx, 2);
        // (x² + 2x + 1) / (x + 1) = (x + 1)
        let num = Poly::from_coeffs(&ctx, vec![one.clone(), two, one.clone()]);
        let den = Poly::from_coeffs(&ctx, vec![one.clone(), one.clone()]);
        let (q, r) = num.div_rem(&den).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, den);
        assert_eq!(q.mul(&den), num);
    }

    #[test]
    fn gcd_of_common_factor() {
        let ctx = CycloCtx::new(4, 3);
        let one = CoeffScalar::one(&ctx);
        let f = Poly::from_coeffs(&ctx, vec![one.neg(), one.clone()]); // x - 1
        let a = f.mul(&Poly::from_coeffs(&ctx, vec![one.clone(), one.clone()]));
        let b = f.mul(&Poly::from_coeffs(&ctx, vec![CoeffScalar::from_i64(&ctx, 2), one.clone()]));
        let g = a.gcd(&b).unwrap();
        assert_eq!(g, f);
    }
}
