use super::{rat_i64, rat_pow_p, Rat};
use crate::error::{Error, Result};
use num::traits::{One, Zero};
use num::BigInt;
use std::fmt;
use std::sync::Arc;

/// Shared arithmetic context: the cyclotomic order `N`, the working prime
/// `p` (for `ρ² = p`), the minimal polynomial `Φ_N`, and lookup tables for
/// powers of `ζ_N` in normal form.
#[derive(Debug)]
pub struct CycloCtx {
    pub n: u64,
    pub p: u64,
    pub phi: usize,
    /// Monic Φ_N, length phi + 1, integer coefficients as rationals.
    min_poly: Vec<Rat>,
    /// Normal form of ζ_N^j for j in 0..N, each of length phi.
    zeta_pows: Vec<Vec<Rat>>,
}

fn poly_mul_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division of integer polynomials, panics on nonzero remainder
/// (only used with inputs where divisibility is guaranteed).
fn poly_div_exact_int(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = den.len() - 1;
    assert!(den[dn].is_one() || den[dn] == -BigInt::one());
    let lead = den[dn].clone();
    assert!(rem.len() > dn);
    let mut quot = vec![BigInt::zero(); rem.len() - dn];
    for k in (0..quot.len()).rev() {
        let c = &rem[k + dn] / &lead;
        quot[k] = c.clone();
        for (i, d) in den.iter().enumerate() {
            let v = &rem[k + i] - &c * d;
            rem[k + i] = v;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "non-exact division");
    quot
}

/// Φ_n over the integers, computed by dividing x^n − 1 by the proper
/// cyclotomic factors.
fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    let mut xn1 = vec![BigInt::zero(); n as usize + 1];
    xn1[0] = -BigInt::one();
    xn1[n as usize] = BigInt::one();
    let mut den = vec![BigInt::one()];
    for d in 1..n {
        if n % d == 0 {
            den = poly_mul_int(&den, &cyclotomic_poly(d));
        }
    }
    poly_div_exact_int(&xn1, &den)
}

impl CycloCtx {
    pub fn new(n: u64, p: u64) -> Arc<Self> {
        assert!(n >= 1 && p >= 2);
        let phi_poly: Vec<Rat> = cyclotomic_poly(n)
            .into_iter()
            .map(Rat::from_integer)
            .collect();
        let phi = phi_poly.len() - 1;
        // ζ^j tables by repeated shift-and-reduce.
        let mut zeta_pows = Vec::with_capacity(n as usize);
        let mut cur = vec![Rat::zero(); phi];
        cur[0] = Rat::one();
        zeta_pows.push(cur.clone());
        for _ in 1..n {
            // multiply by x
            let mut next = vec![Rat::zero(); phi + 1];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] = c.clone();
            }
            // reduce the degree-phi coefficient against the monic Φ_N
            let top = next[phi].clone();
            if !top.is_zero() {
                for i in 0..phi {
                    let v = &next[i] - &top * &phi_poly[i];
                    next[i] = v;
                }
            }
            next.truncate(phi);
            cur = next;
            zeta_pows.push(cur.clone());
        }
        Arc::new(CycloCtx {
            n,
            p,
            phi,
            min_poly: phi_poly,
            zeta_pows,
        })
    }

    fn vec_zero(&self) -> Vec<Rat> {
        vec![Rat::zero(); self.phi]
    }

    /// Product of two cyclotomic-field elements in normal form.
    fn vec_mul(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut conv = vec![Rat::zero(); 2 * self.phi - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let v = &conv[i + j] + &(x * y);
                conv[i + j] = v;
            }
        }
        // reduce mod the monic Φ_N from the top down
        for k in (self.phi..conv.len()).rev() {
            let c = conv[k].clone();
            if c.is_zero() {
                continue;
            }
            conv[k] = Rat::zero();
            for i in 0..self.phi {
                let v = &conv[k - self.phi + i] - &c * &self.min_poly[i];
                conv[k - self.phi + i] = v;
            }
        }
        conv.truncate(self.phi);
        conv
    }

    /// Inverse in Q(ζ_N) by the extended Euclidean algorithm against Φ_N.
    fn vec_inv(&self, a: &[Rat]) -> Result<Vec<Rat>> {
        type QP = Vec<Rat>;
        fn deg(f: &QP) -> Option<usize> {
            f.iter().rposition(|c| !c.is_zero())
        }
        fn trim(mut f: QP) -> QP {
            while f.last().map(|c| c.is_zero()).unwrap_or(false) {
                f.pop();
            }
            f
        }
        fn sub_scaled(f: &mut QP, g: &QP, c: &Rat, shift: usize) {
            if f.len() < g.len() + shift {
                f.resize(g.len() + shift, Rat::zero());
            }
            for (i, gc) in g.iter().enumerate() {
                let v = &f[i + shift] - &(c * gc);
                f[i + shift] = v;
            }
        }
        // r0 = Φ, r1 = a; maintain t-coefficients so that t_i * a ≡ r_i (mod Φ)
        let mut r0: QP = trim(self.min_poly.clone());
        let mut r1: QP = trim(a.to_vec());
        if deg(&r1).is_none() {
            return Err(Error::DivisionByZero);
        }
        let mut t0: QP = vec![];
        let mut t1: QP = vec![Rat::one()];
        while let Some(d1) = deg(&r1) {
            if d1 == 0 {
                // r1 is a nonzero constant: inverse = t1 / r1
                let c = r1[0].clone();
                let inv: Vec<Rat> = t1.iter().map(|x| x / &c).collect();
                let mut out = self.vec_zero();
                // reduce t1/c mod Φ (degree may reach phi-1 only, but be safe)
                let red = {
                    let mut f = inv;
                    for k in (self.phi..f.len().max(self.phi)).rev() {
                        if k >= f.len() {
                            continue;
                        }
                        let c = f[k].clone();
                        if c.is_zero() {
                            continue;
                        }
                        f[k] = Rat::zero();
                        for i in 0..self.phi {
                            let v = &f[k - self.phi + i] - &c * &self.min_poly[i];
                            f[k - self.phi + i] = v;
                        }
                    }
                    f
                };
                for (i, c) in red.iter().enumerate().take(self.phi) {
                    out[i] = c.clone();
                }
                return Ok(out);
            }
            // divide r0 by r1
            let mut rem = r0.clone();
            let mut t_acc = t0.clone();
            let lead = r1[d1].clone();
            while let Some(dr) = deg(&rem) {
                if dr < d1 {
                    break;
                }
                let c = &rem[dr] / &lead;
                sub_scaled(&mut rem, &r1, &c, dr - d1);
                // t_acc -= c * x^(dr-d1) * t1
                sub_scaled(&mut t_acc, &t1, &c, dr - d1);
                rem = trim(rem);
            }
            r0 = std::mem::replace(&mut r1, trim(rem));
            t0 = std::mem::replace(&mut t1, trim(t_acc));
        }
        // a shares a factor with Φ (impossible over Q with Φ irreducible)
        Err(Error::Internal("gcd with the cyclotomic polynomial".into()))
    }

    /// Normal form of ζ_N^j (j taken mod N).
    pub fn zeta_vec(&self, j: i64) -> Vec<Rat> {
        let jj = j.rem_euclid(self.n as i64) as usize;
        self.zeta_pows[jj].clone()
    }
}

/// An exact scalar `a + b·ρ` with `a, b ∈ Q(ζ_N)` and `ρ² = p`.
#[derive(Clone)]
pub struct CoeffScalar {
    pub ctx: Arc<CycloCtx>,
    a: Vec<Rat>,
    b: Vec<Rat>,
}

impl PartialEq for CoeffScalar {
    fn eq(&self, other: &Self) -> bool {
        debug_assert_eq!(self.ctx.n, other.ctx.n);
        self.a == other.a && self.b == other.b
    }
}
impl Eq for CoeffScalar {}

impl CoeffScalar {
    pub fn zero(ctx: &Arc<CycloCtx>) -> Self {
        CoeffScalar {
            ctx: ctx.clone(),
            a: ctx.vec_zero(),
            b: ctx.vec_zero(),
        }
    }

    pub fn one(ctx: &Arc<CycloCtx>) -> Self {
        Self::from_rat(ctx, Rat::one())
    }

    pub fn from_rat(ctx: &Arc<CycloCtx>, r: Rat) -> Self {
        let mut a = ctx.vec_zero();
        a[0] = r;
        CoeffScalar {
            ctx: ctx.clone(),
            a,
            b: ctx.vec_zero(),
        }
    }

    pub fn from_i64(ctx: &Arc<CycloCtx>, v: i64) -> Self {
        Self::from_rat(ctx, rat_i64(v))
    }

    /// ζ_N^j.
    pub fn zeta(ctx: &Arc<CycloCtx>, j: i64) -> Self {
        CoeffScalar {
            ctx: ctx.clone(),
            a: ctx.zeta_vec(j),
            b: ctx.vec_zero(),
        }
    }

    /// ζ_order^pow, requiring order | N.
    pub fn root_of_unity(ctx: &Arc<CycloCtx>, order: u64, pow: i64) -> Result<Self> {
        if order == 0 || ctx.n % order != 0 {
            return Err(Error::Config(format!(
                "root order {order} does not divide the cyclotomic order {}",
                ctx.n
            )));
        }
        let step = (ctx.n / order) as i64;
        Ok(Self::zeta(ctx, step * pow))
    }

    /// ρ^k, with ρ^(−1) = ρ/p; even powers collapse to powers of p.
    pub fn rho_pow(ctx: &Arc<CycloCtx>, k: i64) -> Self {
        let half = k.div_euclid(2);
        let odd = k.rem_euclid(2) == 1;
        let scale = rat_pow_p(ctx.p, half);
        if odd {
            let mut b = ctx.vec_zero();
            b[0] = scale;
            CoeffScalar {
                ctx: ctx.clone(),
                a: ctx.vec_zero(),
                b,
            }
        } else {
            Self::from_rat(ctx, scale)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|c| c.is_zero()) && self.b.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self == &Self::one(&self.ctx)
    }

    /// Some(r) iff the scalar is a plain rational.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.b.iter().all(|c| c.is_zero()) && self.a[1..].iter().all(|c| c.is_zero()) {
            Some(self.a[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        CoeffScalar {
            ctx: self.ctx.clone(),
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&o.b).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CoeffScalar {
            ctx: self.ctx.clone(),
            a: self.a.iter().zip(&o.a).map(|(x, y)| x - y).collect(),
            b: self.b.iter().zip(&o.b).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        CoeffScalar {
            ctx: self.ctx.clone(),
            a: self.a.iter().map(|x| -x).collect(),
            b: self.b.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let ctx = &self.ctx;
        // (a1 + b1 ρ)(a2 + b2 ρ) = a1a2 + p·b1b2 + (a1b2 + b1a2) ρ
        let a1a2 = ctx.vec_mul(&self.a, &o.a);
        let b1b2 = ctx.vec_mul(&self.b, &o.b);
        let a1b2 = ctx.vec_mul(&self.a, &o.b);
        let b1a2 = ctx.vec_mul(&self.b, &o.a);
        let p = rat_i64(ctx.p as i64);
        let a = a1a2
            .iter()
            .zip(&b1b2)
            .map(|(x, y)| x + &(&p * y))
            .collect();
        let b = a1b2.iter().zip(&b1a2).map(|(x, y)| x + y).collect();
        CoeffScalar {
            ctx: ctx.clone(),
            a,
            b,
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> Self {
        CoeffScalar {
            ctx: self.ctx.clone(),
            a: self.a.iter().map(|x| x * r).collect(),
            b: self.b.iter().map(|x| x * r).collect(),
        }
    }

    /// Multiplicative inverse; fails on zero and on zero divisors of the
    /// (not necessarily integral) ring Q(ζ_N)[ρ]/(ρ²−p).
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ctx = &self.ctx;
        // (a + bρ)^(-1) = (a − bρ) / (a² − p b²)
        let a2 = ctx.vec_mul(&self.a, &self.a);
        let b2 = ctx.vec_mul(&self.b, &self.b);
        let p = rat_i64(ctx.p as i64);
        let norm: Vec<Rat> = a2.iter().zip(&b2).map(|(x, y)| x - &(&p * y)).collect();
        if norm.iter().all(|c| c.is_zero()) {
            return Err(Error::ZeroDivisor(format!("{self}")));
        }
        let ninv = ctx.vec_inv(&norm)?;
        let a = ctx.vec_mul(&self.a, &ninv);
        let b: Vec<Rat> = ctx
            .vec_mul(&self.b, &ninv)
            .into_iter()
            .map(|x| -x)
            .collect();
        Ok(CoeffScalar {
            ctx: ctx.clone(),
            a,
            b,
        })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut out = Self::one(&self.ctx);
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Ring involution ζ_N → ζ_N^(−1), ρ → ρ.
    pub fn conj(&self) -> Self {
        let ctx = &self.ctx;
        let conj_vec = |v: &[Rat]| -> Vec<Rat> {
            let mut out = ctx.vec_zero();
            for (i, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let zi = ctx.zeta_vec(-(i as i64));
                for (k, z) in zi.iter().enumerate() {
                    let v = &out[k] + &(c * z);
                    out[k] = v;
                }
            }
            out
        };
        CoeffScalar {
            ctx: ctx.clone(),
            a: conj_vec(&self.a),
            b: conj_vec(&self.b),
        }
    }

    /// |x|² = x·conj(x); rational-valued for roots of unity.
    pub fn norm_sq(&self) -> Self {
        self.mul(&self.conj())
    }
}

fn fmt_part(f: &mut fmt::Formatter<'_>, v: &[Rat], first: &mut bool) -> fmt::Result {
    for (i, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if *first {
            *first = false;
        } else {
            write!(f, " + ")?;
        }
        match i {
            0 => write!(f, "{c}")?,
            1 => write!(f, "{c}*z")?,
            _ => write!(f, "{c}*z^{i}")?,
        }
    }
    Ok(())
}

impl fmt::Display for CoeffScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        fmt_part(f, &self.a, &mut first)?;
        if self.b.iter().any(|c| !c.is_zero()) {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "(")?;
            let mut bf = true;
            fmt_part(f, &self.b, &mut bf)?;
            write!(f, ")*r")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CoeffScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx12() -> Arc<CycloCtx> {
        CycloCtx::new(12, 2)
    }

    #[test]
    fn cyclotomic_relation_zeta3() {
        // ζ_3 + ζ_3² + 1 = 0
        let ctx = ctx12();
        let z3 = CoeffScalar::root_of_unity(&ctx, 3, 1).unwrap();
        let z32 = CoeffScalar::root_of_unity(&ctx, 3, 2).unwrap();
        let s = z3.add(&z32).add(&CoeffScalar::one(&ctx));
        assert!(s.is_zero());
    }

    #[test]
    fn zeta4_squares_to_minus_one() {
        let ctx = ctx12();
        let i = CoeffScalar::root_of_unity(&ctx, 4, 1).unwrap();
        assert_eq!(i.mul(&i), CoeffScalar::from_i64(&ctx, -1));
    }

    #[test]
    fn rho_squares_to_p() {
        let ctx = ctx12();
        let r = CoeffScalar::rho_pow(&ctx, 1);
        assert_eq!(r.mul(&r), CoeffScalar::from_i64(&ctx, 2));
        // ρ · ρ^(-1) = 1
        let rinv = CoeffScalar::rho_pow(&ctx, -1);
        assert!(r.mul(&rinv).is_one());
    }

    #[test]
    fn inverse_roundtrip() {
        let ctx = CycloCtx::new(18, 3);
        let x = CoeffScalar::zeta(&ctx, 5)
            .add(&CoeffScalar::from_i64(&ctx, 2))
            .add(&CoeffScalar::rho_pow(&ctx, 1).mul_rat(&rat_i64(3)));
        let y = x.inv().unwrap();
        assert!(x.mul(&y).is_one());
    }

    #[test]
    fn conj_is_involution_and_unit_norm() {
        let ctx = CycloCtx::new(9, 3);
        let z = CoeffScalar::zeta(&ctx, 4);
        assert_eq!(z.conj().conj(), z);
        assert!(z.norm_sq().is_one());
    }

    #[test]
    fn zero_divisor_detected() {
        // √3 ∈ Q(ζ_12), so ρ² − 3 splits there and ρ − √3 is a zero divisor.
        let ctx = CycloCtx::new(12, 3);
        // √3 = ζ_12 + ζ_12^(-1)
        let s3 = CoeffScalar::zeta(&ctx, 1).add(&CoeffScalar::zeta(&ctx, -1));
        assert_eq!(s3.mul(&s3), CoeffScalar::from_i64(&ctx, 3));
        let x = CoeffScalar::rho_pow(&ctx, 1).sub(&s3);
        assert!(matches!(x.inv(), Err(Error::ZeroDivisor(_))));
    }
}
