//! Truncated p-adic scalars, valuation helpers for exact rationals viewed
//! inside Q_p, the additive character `e_w`, and lattice bookkeeping.
//!
//! The additive character has conductor O: trivial on Z_p, and
//! `e_w(k/p^m) = ζ_{p^m}^k`. The self-dual additive measure then gives
//! Vol(M(O)) = 1, which the Fourier module relies on.

use crate::error::{Error, Result};
use crate::exactnum::{CoeffScalar, CycloCtx, Rat, TauMono};
use num::traits::{Signed, Zero};
use num::BigInt;
use std::sync::Arc;

/// A truncated p-adic number: zero, or `p^val · unit` with the unit known
/// mod `p^prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PAdicScalar {
    Zero { p: u64, prec: u32 },
    Unit { p: u64, val: i64, unit: u64, prec: u32 },
}

fn pow_u(p: u64, k: u32) -> u64 {
    p.checked_pow(k).expect("modulus overflow")
}

/// p-adic valuation of a nonzero rational; None for zero.
pub fn val_p_rat(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0i64;
    let mut n = x.numer().abs();
    while (&n % &pb).is_zero() {
        n /= &pb;
        v += 1;
    }
    let mut d = x.denom().abs();
    while (&d % &pb).is_zero() {
        d /= &pb;
        v -= 1;
    }
    Some(v)
}

/// Unit part of a nonzero rational mod p^k: write x = p^v·(n'/d') with n', d'
/// prime to p and return n'·(d')^{-1} mod p^k.
pub fn unit_class(x: &Rat, p: u64, k: u32) -> Result<u64> {
    if x.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let pb = BigInt::from(p);
    let m = BigInt::from(pow_u(p, k));
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    while (&n % &pb).is_zero() {
        n /= &pb;
    }
    while (&d % &pb).is_zero() {
        d /= &pb;
    }
    let n_red = ((n % &m) + &m) % &m;
    let d_red = ((d % &m) + &m) % &m;
    let d_inv = mod_inverse(&d_red, &m).ok_or_else(|| {
        Error::Internal("denominator not invertible after removing p-part".into())
    })?;
    let u = (n_red * d_inv) % &m;
    Ok(u64::try_from(((u.clone() % &m) + &m) % &m).unwrap())
}

/// Residue of a rational with val ≥ 0 mod p^k.
pub fn class_mod(x: &Rat, p: u64, k: u32) -> Result<u64> {
    if x.is_zero() {
        return Ok(0);
    }
    let v = val_p_rat(x, p).unwrap();
    if v < 0 {
        return Err(Error::Precision { needed: -v, have: 0 });
    }
    if v >= k as i64 {
        return Ok(0);
    }
    let u = unit_class(x, p, k)?;
    Ok((u * pow_u(p, v as u32)) % pow_u(p, k))
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let (mut t, mut new_t) = (BigInt::zero(), BigInt::from(1));
    let (mut r, mut new_r) = (m.clone(), ((a % m) + m) % m);
    while !new_r.is_zero() {
        let q = &r / &new_r;
        let tmp_t = &t - &q * &new_t;
        t = std::mem::replace(&mut new_t, tmp_t);
        let tmp_r = &r - &q * &new_r;
        r = std::mem::replace(&mut new_r, tmp_r);
    }
    if r != BigInt::from(1) {
        return None;
    }
    Some(((t % m) + m) % m)
}

impl PAdicScalar {
    pub fn zero(p: u64, prec: u32) -> Self {
        PAdicScalar::Zero { p, prec }
    }

    pub fn from_parts(p: u64, val: i64, unit: u64, prec: u32) -> Self {
        let m = pow_u(p, prec);
        let u = unit % m;
        assert!(u % p != 0, "unit part divisible by p");
        PAdicScalar::Unit { p, val, unit: u, prec }
    }

    pub fn from_rat(x: &Rat, p: u64, prec: u32) -> Self {
        match val_p_rat(x, p) {
            None => PAdicScalar::Zero { p, prec },
            Some(v) => {
                let u = unit_class(x, p, prec).expect("unit class");
                PAdicScalar::Unit { p, val: v, unit: u, prec }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PAdicScalar::Zero { .. })
    }

    pub fn valuation(&self) -> Option<i64> {
        match self {
            PAdicScalar::Zero { .. } => None,
            PAdicScalar::Unit { val, .. } => Some(*val),
        }
    }

    pub fn precision(&self) -> u32 {
        match self {
            PAdicScalar::Zero { prec, .. } | PAdicScalar::Unit { prec, .. } => *prec,
        }
    }

    /// Multiplication adds valuations and multiplies units; the precision of
    /// the result is the minimum of the operands'.
    pub fn mul(&self, o: &Self) -> Self {
        match (self, o) {
            (PAdicScalar::Zero { p, prec }, other) | (other, PAdicScalar::Zero { p, prec }) => {
                PAdicScalar::Zero {
                    p: *p,
                    prec: (*prec).min(other.precision()),
                }
            }
            (
                PAdicScalar::Unit { p, val: v1, unit: u1, prec: k1 },
                PAdicScalar::Unit { val: v2, unit: u2, prec: k2, .. },
            ) => {
                let prec = (*k1).min(*k2);
                let m = pow_u(*p, prec) as u128;
                let u = ((*u1 as u128 % m) * (*u2 as u128 % m) % m) as u64;
                PAdicScalar::Unit { p: *p, val: v1 + v2, unit: u, prec }
            }
        }
    }

    /// Equality at the joint precision: valuations match and units agree
    /// mod p^min(prec).
    pub fn eq_at_prec(&self, o: &Self) -> bool {
        match (self, o) {
            (PAdicScalar::Zero { .. }, PAdicScalar::Zero { .. }) => true,
            (PAdicScalar::Unit { val: v1, unit: u1, p, prec: k1 },
             PAdicScalar::Unit { val: v2, unit: u2, prec: k2, .. }) => {
                if v1 != v2 {
                    return false;
                }
                let m = pow_u(*p, (*k1).min(*k2));
                u1 % m == u2 % m
            }
            _ => false,
        }
    }
}

/// |x|_w = p^(−val x) as an exact rational; errors on zero.
pub fn abs_w(x: &PAdicScalar) -> Result<Rat> {
    match x.valuation() {
        None => Err(Error::DivisionByZero),
        Some(v) => Ok(crate::exactnum::rat_pow_p(
            match x {
                PAdicScalar::Zero { p, .. } | PAdicScalar::Unit { p, .. } => *p,
            },
            -v,
        )),
    }
}

/// |x|^(s + h/2) for val(x) = v, as the monomial t^{2v}·ρ^(−v·h):
/// under t = p^(−s/2) one has |x|^s = t^{2v} and |x|^(1/2) = ρ^(−v).
pub fn abs_pow_shifted(ctx: &Arc<CycloCtx>, v: i64, half_shift: i64) -> TauMono {
    TauMono::new(CoeffScalar::rho_pow(ctx, -v * half_shift), 2 * v)
}

/// e_w(x): ζ_{p^m}^k where x ≡ k·p^(−m) mod Z_p; trivial on Z_p.
/// Needs unit precision at least −val(x) when val(x) < 0.
pub fn additive_character(ctx: &Arc<CycloCtx>, x: &PAdicScalar) -> Result<CoeffScalar> {
    match x {
        PAdicScalar::Zero { .. } => Ok(CoeffScalar::one(ctx)),
        PAdicScalar::Unit { p, val, unit, prec } => {
            debug_assert_eq!(*p, ctx.p);
            if *val >= 0 {
                return Ok(CoeffScalar::one(ctx));
            }
            let m = (-*val) as u32;
            if (*prec as i64) < m as i64 {
                return Err(Error::Precision { needed: m as i64, have: *prec as i64 });
            }
            let pm = pow_u(*p, m);
            let k = (unit % pm) as i64;
            CoeffScalar::root_of_unity(ctx, pm, k)
        }
    }
}

/// e_w of an exact rational.
pub fn additive_character_rat(ctx: &Arc<CycloCtx>, x: &Rat) -> Result<CoeffScalar> {
    match val_p_rat(x, ctx.p) {
        None => Ok(CoeffScalar::one(ctx)),
        Some(v) if v >= 0 => Ok(CoeffScalar::one(ctx)),
        Some(v) => {
            let m = (-v) as u32;
            let pm = pow_u(ctx.p, m);
            let u = unit_class(x, ctx.p, m)?;
            CoeffScalar::root_of_unity(ctx, pm, u as i64)
        }
    }
}

/// A lattice p^scale · M_{rows×cols}(O).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    pub scale: i64,
}

impl LatticeSpec {
    pub fn new(rows: usize, cols: usize, scale: i64) -> Self {
        LatticeSpec { rows, cols, scale }
    }

    /// p^a M ⊇ p^b M iff a ≤ b.
    pub fn contains(&self, other: &LatticeSpec) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.scale <= other.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat_pow_p;

    fn ctx() -> Arc<CycloCtx> {
        CycloCtx::new(9, 3)
    }

    #[test]
    fn abs_examples() {
        let p = 3;
        let x = PAdicScalar::from_rat(&Rat::from_integer(3.into()), p, 4);
        assert_eq!(abs_w(&x).unwrap(), rat_pow_p(3, -1));
        let u = PAdicScalar::from_rat(&Rat::from_integer(5.into()), p, 4);
        assert_eq!(abs_w(&u).unwrap(), rat_pow_p(3, 0));
        let y = PAdicScalar::from_rat(&rat_pow_p(3, -2), p, 4);
        assert_eq!(abs_w(&y).unwrap(), rat_pow_p(3, 2));
        assert!(abs_w(&PAdicScalar::zero(p, 4)).is_err());
    }

    #[test]
    fn additive_character_normalization() {
        let ctx = ctx();
        // e(0) = 1, e(z) = 1 for z integral
        assert!(additive_character_rat(&ctx, &Rat::zero()).unwrap().is_one());
        assert!(additive_character_rat(&ctx, &Rat::from_integer(7.into()))
            .unwrap()
            .is_one());
        // e(1/3) = ζ_3
        let z3 = CoeffScalar::root_of_unity(&ctx, 3, 1).unwrap();
        assert_eq!(
            additive_character_rat(&ctx, &Rat::new(1.into(), 3.into())).unwrap(),
            z3
        );
        // e(1/9) = ζ_9
        let z9 = CoeffScalar::root_of_unity(&ctx, 9, 1).unwrap();
        assert_eq!(
            additive_character_rat(&ctx, &Rat::new(1.into(), 9.into())).unwrap(),
            z9
        );
    }

    #[test]
    fn additive_character_is_homomorphism() {
        let ctx = ctx();
        let samples = [
            Rat::new(1.into(), 9.into()),
            Rat::new(2.into(), 3.into()),
            Rat::new((-5).into(), 9.into()),
            Rat::from_integer(4.into()),
            Rat::new(7.into(), 3.into()),
        ];
        for x in &samples {
            for y in &samples {
                let lhs = additive_character_rat(&ctx, &(x + y)).unwrap();
                let rhs = additive_character_rat(&ctx, x)
                    .unwrap()
                    .mul(&additive_character_rat(&ctx, y).unwrap());
                assert_eq!(lhs, rhs, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn insufficient_precision_errors() {
        let ctx = ctx();
        let x = PAdicScalar::from_parts(3, -3, 1, 2);
        assert!(matches!(
            additive_character(&ctx, &x),
            Err(Error::Precision { .. })
        ));
    }

    #[test]
    fn truncated_equality_and_multiplication() {
        let p = 3;
        let a = PAdicScalar::from_parts(p, 1, 4, 3);
        let b = PAdicScalar::from_parts(p, 1, 4 + 9, 2);
        assert!(a.eq_at_prec(&b));
        let c = a.mul(&b);
        assert_eq!(c.valuation(), Some(2));
        assert_eq!(c.precision(), 2);
    }

    #[test]
    fn lattice_containment() {
        let a = LatticeSpec::new(2, 2, -1);
        let b = LatticeSpec::new(2, 2, 1);
        assert!(a.contains(&b));
        assert!(!b.contains(&a));
    }
}
