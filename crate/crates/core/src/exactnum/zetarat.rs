use super::cyclo::{CoeffScalar, CycloCtx};
use super::poly::Poly;
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// A monomial `c · t^k` in the zeta variable, k ∈ Z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauMono {
    pub c: CoeffScalar,
    pub k: i64,
}

impl TauMono {
    pub fn new(c: CoeffScalar, k: i64) -> Self {
        TauMono { c, k }
    }

    pub fn one(ctx: &Arc<CycloCtx>) -> Self {
        TauMono {
            c: CoeffScalar::one(ctx),
            k: 0,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        TauMono {
            c: self.c.mul(&o.c),
            k: self.k + o.k,
        }
    }

    pub fn to_zeta(&self) -> ZetaRational {
        let ctx = self.c.ctx.clone();
        if self.k >= 0 {
            ZetaRational::new(Poly::monomial(self.c.clone(), self.k as usize), Poly::one(&ctx))
        } else {
            ZetaRational::new(
                Poly::constant(self.c.clone()),
                Poly::monomial(CoeffScalar::one(&ctx), (-self.k) as usize),
            )
        }
    }
}

/// A rational function in the zeta variable `t = p^(−s/2)`, kept in a
/// gcd-reduced form with monic denominator whenever the coefficient ring
/// allows the reduction.
#[derive(Clone)]
pub struct ZetaRational {
    num: Poly,
    den: Poly,
}

impl ZetaRational {
    /// Build num/den, reducing when possible. Panics on a zero denominator
    /// (callers divide through `div`, which checks).
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut z = ZetaRational { num, den };
        z.reduce();
        z
    }

    pub fn zero(ctx: &Arc<CycloCtx>) -> Self {
        ZetaRational {
            num: Poly::zero(ctx),
            den: Poly::one(ctx),
        }
    }

    pub fn one(ctx: &Arc<CycloCtx>) -> Self {
        ZetaRational {
            num: Poly::one(ctx),
            den: Poly::one(ctx),
        }
    }

    pub fn from_scalar(c: CoeffScalar) -> Self {
        let ctx = c.ctx.clone();
        ZetaRational {
            num: Poly::constant(c),
            den: Poly::one(&ctx),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        let ctx = p.ctx.clone();
        ZetaRational {
            num: p,
            den: Poly::one(&ctx),
        }
    }

    pub fn ctx(&self) -> &Arc<CycloCtx> {
        &self.num.ctx
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// Best-effort canonicalization: divide out the gcd and make the
    /// denominator monic. If the coefficient ring obstructs an inversion
    /// (zero divisor), the representative is kept as is; equality stays
    /// exact through cross-multiplication.
    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one(&self.num.ctx);
            return;
        }
        if let Ok(g) = self.num.gcd(&self.den) {
            if g.degree().map(|d| d > 0).unwrap_or(false) {
                if let (Ok((qn, rn)), Ok((qd, rd))) = (self.num.div_rem(&g), self.den.div_rem(&g)) {
                    if rn.is_zero() && rd.is_zero() {
                        self.num = qn;
                        self.den = qd;
                    }
                }
            }
        }
        if let Some(l) = self.den.lead() {
            if !l.is_one() {
                if let Ok(li) = l.inv() {
                    self.num = self.num.scale(&li);
                    self.den = self.den.scale(&li);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        ZetaRational::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        ZetaRational::new(
            self.num.mul(&o.den).sub(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn neg(&self) -> Self {
        ZetaRational {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ZetaRational::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn mul_scalar(&self, s: &CoeffScalar) -> Self {
        ZetaRational::new(self.num.scale(s), self.den.clone())
    }

    pub fn mul_mono(&self, m: &TauMono) -> Self {
        self.mul(&m.to_zeta())
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(ZetaRational::new(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut out = Self::one(self.ctx());
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Exact equality by cross-multiplication.
    pub fn eq_exact(&self, o: &Self) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }

    /// Substitute a scalar value for t; fails if the denominator vanishes.
    pub fn substitute(&self, t: &CoeffScalar) -> Result<CoeffScalar> {
        let d = self.den.eval(t);
        self.num.eval(t).div(&d)
    }

    /// Some(monomial) iff the reduced fraction is `c · t^k`.
    pub fn as_monomial(&self) -> Option<TauMono> {
        let nv = self.num.valuation()?;
        if self.num.degree() != Some(nv) {
            return None;
        }
        let dv = self.den.valuation()?;
        if self.den.degree() != Some(dv) {
            return None;
        }
        let c = self.num.coeff(nv).div(&self.den.coeff(dv)).ok()?;
        Some(TauMono {
            c,
            k: nv as i64 - dv as i64,
        })
    }

    /// Laurent coefficients of the expansion around t = 0, degrees lo..=hi.
    pub fn laurent_coeffs(&self, lo: i64, hi: i64) -> Result<Vec<CoeffScalar>> {
        let ctx = self.ctx().clone();
        if self.is_zero() {
            return Ok(vec![CoeffScalar::zero(&ctx); (hi - lo + 1).max(0) as usize]);
        }
        let nv = self.num.valuation().unwrap() as i64;
        let dv = self.den.valuation().ok_or(Error::DivisionByZero)? as i64;
        let shift = nv - dv;
        let n0: Vec<CoeffScalar> = self.num.c[nv as usize..].to_vec();
        let d0: Vec<CoeffScalar> = self.den.c[dv as usize..].to_vec();
        let d0_inv = d0[0].inv()?;
        // power series of n0/d0 to the needed degree
        let need = (hi - shift).max(-1);
        let mut s: Vec<CoeffScalar> = Vec::new();
        for k in 0..=need.max(0) as usize {
            if need < 0 {
                break;
            }
            let mut acc = n0
                .get(k)
                .cloned()
                .unwrap_or_else(|| CoeffScalar::zero(&ctx));
            for j in 1..=k {
                if let Some(dj) = d0.get(j) {
                    acc = acc.sub(&dj.mul(&s[k - j]));
                }
            }
            s.push(acc.mul(&d0_inv));
        }
        let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        for m in lo..=hi {
            let idx = m - shift;
            if idx < 0 || idx as usize >= s.len() {
                out.push(CoeffScalar::zero(&ctx));
            } else {
                out.push(s[idx as usize].clone());
            }
        }
        Ok(out)
    }
}

impl PartialEq for ZetaRational {
    fn eq(&self, other: &Self) -> bool {
        self.eq_exact(other)
    }
}
impl Eq for ZetaRational {}

impl fmt::Display for ZetaRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one(self.ctx()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "[{}] / [{}]", self.num, self.den)
        }
    }
}

impl fmt::Debug for ZetaRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Σ_{v ≥ v0} (c·t^k)^v as a rational function, for k ≥ 1:
/// `(c t^k)^{v0} / (1 − c t^k)`.
pub fn geometric_series(ratio: &TauMono, v0: i64) -> Result<ZetaRational> {
    if ratio.k < 1 {
        return Err(Error::DegenerateSeries);
    }
    geometric_series_signed(ratio, v0)
}

/// The same closed form for any nonzero tau-exponent; for k ≤ −1 this is the
/// rational continuation of the shell sum taken in the opposite formal
/// topology (used by the dual side of the functional equation).
pub fn geometric_series_signed(ratio: &TauMono, v0: i64) -> Result<ZetaRational> {
    if ratio.k == 0 {
        return Err(Error::DegenerateSeries);
    }
    let ctx = ratio.c.ctx.clone();
    let u = ratio.to_zeta();
    let head = if v0 >= 0 {
        u.pow(v0)?
    } else {
        // ratio must be invertible to start the sum below 0
        u.inv()?.pow(-v0)?
    };
    let tail = ZetaRational::one(&ctx).sub(&u);
    head.div(&tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<CycloCtx> {
        CycloCtx::new(4, 3)
    }

    #[test]
    fn inverse_pair_cancels() {
        let c = ctx();
        let t2 = TauMono::new(CoeffScalar::one(&c), 2).to_zeta();
        let one = ZetaRational::one(&c);
        let f = one.sub(&t2); // 1 - t²
        let g = f.inv().unwrap();
        assert!(f.mul(&g).eq_exact(&one));
    }

    #[test]
    fn geometric_series_closed_form_matches_partial_sums() {
        // Σ_{v≥0} t^{2v} = 1/(1−t²), checked against partial sums to degree 20.
        let c = ctx();
        let ratio = TauMono::new(CoeffScalar::one(&c), 2);
        let s = geometric_series(&ratio, 0).unwrap();
        let coeffs = s.laurent_coeffs(0, 20).unwrap();
        for (d, v) in coeffs.iter().enumerate() {
            let expect = if d % 2 == 0 { 1 } else { 0 };
            assert_eq!(*v, CoeffScalar::from_i64(&c, expect), "degree {d}");
        }
    }

    #[test]
    fn geometric_series_negative_ratio_shifted() {
        // Σ_{v≥1} (−t²)^v = −t²/(1+t²), partial-sum oracle to degree 20.
        let c = ctx();
        let ratio = TauMono::new(CoeffScalar::from_i64(&c, -1), 2);
        let s = geometric_series(&ratio, 1).unwrap();
        let coeffs = s.laurent_coeffs(0, 20).unwrap();
        for (d, v) in coeffs.iter().enumerate() {
            let expect = if d % 2 == 0 || d == 0 {
                if d == 0 {
                    0
                } else {
                    // even degree 2v: coefficient (−1)^v
                    if (d / 2) % 2 == 0 {
                        1
                    } else {
                        -1
                    }
                }
            } else {
                0
            };
            assert_eq!(*v, CoeffScalar::from_i64(&c, expect), "degree {d}");
        }
    }

    #[test]
    fn degenerate_ratio_errors() {
        let c = ctx();
        let ratio = TauMono::new(CoeffScalar::from_i64(&c, 5), 0);
        assert!(geometric_series(&ratio, 0).is_err());
        assert!(geometric_series_signed(&ratio, 0).is_err());
    }

    #[test]
    fn series_times_complement_is_shift_monomial() {
        let c = ctx();
        let ratio = TauMono::new(CoeffScalar::from_i64(&c, 2), 3);
        for v0 in [-2i64, 0, 1, 4] {
            let s = geometric_series_signed(&ratio, v0).unwrap();
            let lhs = s.mul(&ZetaRational::one(&c).sub(&ratio.to_zeta()));
            let rhs = ratio.to_zeta().pow(v0).unwrap();
            assert!(lhs.eq_exact(&rhs));
        }
    }

    #[test]
    fn f_div_f_is_one() {
        let c = ctx();
        let f = TauMono::new(CoeffScalar::from_i64(&c, 7), 1)
            .to_zeta()
            .add(&ZetaRational::one(&c));
        assert!(f.div(&f).unwrap().eq_exact(&ZetaRational::one(&c)));
    }

    #[test]
    fn substitution_commutes_with_arithmetic() {
        let c = ctx();
        let i = CoeffScalar::root_of_unity(&c, 4, 1).unwrap();
        let f = geometric_series(&TauMono::new(CoeffScalar::from_i64(&c, 2), 1), 0).unwrap();
        let g = TauMono::new(CoeffScalar::from_i64(&c, 3), 2)
            .to_zeta()
            .add(&ZetaRational::one(&c));
        let lhs = f.mul(&g).substitute(&i).unwrap();
        let rhs = f.substitute(&i).unwrap().mul(&g.substitute(&i).unwrap());
        assert_eq!(lhs, rhs);
    }
}
