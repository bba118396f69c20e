//! Locally constant compactly supported functions on p-adic matrix spaces,
//! stored as dense value tables on a quotient of lattices, with exact
//! Fourier transforms against e_w(tr(y·x)) and the self-dual additive
//! measure Vol(M(O)) = 1.

use crate::error::{Error, Result};
use crate::exactnum::{rat_pow_p, CoeffScalar, CycloCtx, Rat};
use crate::matgrp::{Pattern, QMat};
use crate::padic::{additive_character_rat, val_p_rat};
use crate::types::TypeDatum;
use num::traits::Zero;
use rand::Rng;
use std::sync::Arc;

/// A Schwartz function on M_{rows×cols}(K): supported in p^sup·M(O),
/// constant on cosets of p^con·M(O), values tabulated on the finite quotient.
#[derive(Clone)]
pub struct SchwartzFunction {
    pub ctx: Arc<CycloCtx>,
    pub rows: usize,
    pub cols: usize,
    /// support lattice exponent: supp ⊆ p^sup M(O)
    pub sup: i64,
    /// constancy lattice exponent, con ≥ sup
    pub con: i64,
    table: Vec<CoeffScalar>,
}

impl SchwartzFunction {
    fn digits(&self) -> u64 {
        self.ctx.p.pow((self.con - self.sup) as u32)
    }

    pub fn table_len(rows: usize, cols: usize, p: u64, sup: i64, con: i64) -> u128 {
        (p as u128).pow(((con - sup) as u32) * (rows * cols) as u32)
    }

    /// Build from a value rule evaluated on class representatives
    /// p^sup·(digit vector), digits < p^(con−sup).
    pub fn from_fn(
        ctx: &Arc<CycloCtx>,
        rows: usize,
        cols: usize,
        sup: i64,
        con: i64,
        budget: u128,
        mut f: impl FnMut(&QMat) -> Result<CoeffScalar>,
    ) -> Result<Self> {
        assert!(con >= sup);
        let len = Self::table_len(rows, cols, ctx.p, sup, con);
        if len > budget {
            return Err(Error::Budget { required: len, budget });
        }
        let d = ctx.p.pow((con - sup) as u32);
        let mut table = Vec::with_capacity(len as usize);
        let mut digits = vec![0u64; rows * cols];
        loop {
            let mut x = QMat::zero(rows, cols);
            for (pos, &dg) in digits.iter().enumerate() {
                x.e[pos] = Rat::from_integer((dg as i64).into()) * rat_pow_p(ctx.p, sup);
            }
            table.push(f(&x)?);
            // odometer
            let mut pos = rows * cols;
            loop {
                if pos == 0 {
                    let sf = SchwartzFunction {
                        ctx: ctx.clone(),
                        rows,
                        cols,
                        sup,
                        con,
                        table,
                    };
                    return Ok(sf);
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < d {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Indicator of the lattice p^scale·M(O).
    pub fn indicator(ctx: &Arc<CycloCtx>, rows: usize, cols: usize, scale: i64) -> Self {
        SchwartzFunction {
            ctx: ctx.clone(),
            rows,
            cols,
            sup: scale,
            con: scale,
            table: vec![CoeffScalar::one(ctx)],
        }
    }

    /// Indicator of a single coset x0 + p^con·M(O).
    pub fn coset_indicator(ctx: &Arc<CycloCtx>, x0: &QMat, con: i64, budget: u128) -> Result<Self> {
        let p = ctx.p;
        let sup = x0.min_val(p).unwrap_or(con).min(con);
        Self::from_fn(ctx, x0.rows, x0.cols, sup, con, budget, |x| {
            let diff = x.sub(x0);
            let inside = diff
                .min_val(p)
                .map(|v| v >= con)
                .unwrap_or(true);
            Ok(if inside {
                CoeffScalar::one(ctx)
            } else {
                CoeffScalar::zero(ctx)
            })
        })
    }

    pub fn random(
        ctx: &Arc<CycloCtx>,
        rows: usize,
        cols: usize,
        sup: i64,
        con: i64,
        rng: &mut impl Rng,
        budget: u128,
    ) -> Result<Self> {
        let n = ctx.n as i64;
        Self::from_fn(ctx, rows, cols, sup, con, budget, |_| {
            let num = rng.gen_range(-4i64..=4);
            let den = rng.gen_range(1i64..=3);
            let zp = rng.gen_range(0..n);
            Ok(CoeffScalar::zeta(ctx, zp).mul_rat(&Rat::new(num.into(), den.into())))
        })
    }

    pub fn zero_fn(ctx: &Arc<CycloCtx>, rows: usize, cols: usize) -> Self {
        SchwartzFunction {
            ctx: ctx.clone(),
            rows,
            cols,
            sup: 0,
            con: 0,
            table: vec![CoeffScalar::zero(ctx)],
        }
    }

    fn index_of(&self, x: &QMat) -> Result<Option<usize>> {
        let p = self.ctx.p;
        let d = self.digits();
        let mut idx: usize = 0;
        for pos in 0..self.rows * self.cols {
            let v = &x.e[pos];
            if !v.is_zero() {
                let val = val_p_rat(v, p).unwrap();
                if val < self.sup {
                    return Ok(None);
                }
            }
            let scaled = v * rat_pow_p(p, -self.sup);
            let digit = crate::padic::class_mod(&scaled, p, (self.con - self.sup) as u32)?;
            idx = idx * d as usize + digit as usize;
        }
        Ok(Some(idx))
    }

    /// Exact evaluation; zero outside the support lattice.
    pub fn eval(&self, x: &QMat) -> Result<CoeffScalar> {
        match self.index_of(x)? {
            None => Ok(CoeffScalar::zero(&self.ctx)),
            Some(i) => Ok(self.table[i].clone()),
        }
    }

    /// Value at 0 (deep constancy value).
    pub fn at_zero(&self) -> CoeffScalar {
        self.table[0].clone()
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|c| c.is_zero())
    }

    fn class_reps(&self) -> ClassIter {
        ClassIter {
            rows: self.rows,
            cols: self.cols,
            p: self.ctx.p,
            sup: self.sup,
            d: self.digits(),
            digits: Some(vec![0u64; self.rows * self.cols]),
        }
    }

    /// Fourier transform Φ̂(x) = ∫ Φ(y)·e_w(⟨y, x⟩) dy, with ⟨y,x⟩ = tr(y·x)
    /// on square spaces and the entrywise pairing Σ y_ij·x_ij on rectangular
    /// ones. Output is supported in p^(−con)M, constant mod p^(−sup)M.
    pub fn fourier(&self, budget: u128) -> Result<SchwartzFunction> {
        let ctx = &self.ctx;
        let vol = rat_pow_p(ctx.p, -(self.con as i64) * (self.rows * self.cols) as i64);
        let square = self.rows == self.cols;
        let ins: Vec<(QMat, &CoeffScalar)> = self
            .class_reps()
            .zip(self.table.iter())
            .filter(|(_, v)| !v.is_zero())
            .collect();
        let out = Self::from_fn(
            ctx,
            self.rows,
            self.cols,
            -self.con,
            -self.sup,
            budget,
            |x| {
                let mut acc = CoeffScalar::zero(ctx);
                for (y, v) in &ins {
                    let pairing = if square {
                        y.mul(x).trace_rat()
                    } else {
                        y.e.iter().zip(&x.e).map(|(a, b)| a * b).sum()
                    };
                    acc = acc.add(&v.mul(&additive_character_rat(ctx, &pairing)?));
                }
                Ok(acc.mul_rat(&vol))
            },
        )?;
        Ok(out)
    }

    /// Σ_x Φ(x)·conj(Ψ(x))·Vol(classes) — the L² pairing.
    pub fn l2_pairing(&self, other: &SchwartzFunction) -> Result<CoeffScalar> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Config("shape mismatch in L² pairing".into()));
        }
        let ctx = &self.ctx;
        let mut acc = CoeffScalar::zero(ctx);
        for (x, v) in self.class_reps().zip(self.table.iter()) {
            if v.is_zero() {
                continue;
            }
            let w = other.eval(&x)?;
            if w.is_zero() {
                continue;
            }
            acc = acc.add(&v.mul(&w.conj()));
        }
        let vol = rat_pow_p(ctx.p, -(self.con as i64) * (self.rows * self.cols) as i64);
        Ok(acc.mul_rat(&vol))
    }

    /// Φ(−x) as a table.
    pub fn reflect(&self) -> Result<SchwartzFunction> {
        Self::from_fn(
            &self.ctx,
            self.rows,
            self.cols,
            self.sup,
            self.con,
            u128::MAX,
            |x| self.eval(&x.neg()),
        )
    }

    pub fn eq_pointwise(&self, other: &SchwartzFunction) -> Result<bool> {
        for (x, v) in self.class_reps().zip(self.table.iter()) {
            if other.eval(&x)? != *v {
                return Ok(false);
            }
        }
        for (x, v) in other.class_reps().zip(other.table.iter()) {
            if self.eval(&x)? != *v {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

struct ClassIter {
    rows: usize,
    cols: usize,
    p: u64,
    sup: i64,
    d: u64,
    digits: Option<Vec<u64>>,
}

impl Iterator for ClassIter {
    type Item = QMat;

    fn next(&mut self) -> Option<QMat> {
        let digits = self.digits.as_mut()?;
        let mut x = QMat::zero(self.rows, self.cols);
        for (pos, &dg) in digits.iter().enumerate() {
            x.e[pos] = Rat::from_integer((dg as i64).into()) * rat_pow_p(self.p, self.sup);
        }
        // advance
        let mut pos = self.rows * self.cols;
        loop {
            if pos == 0 {
                self.digits = None;
                break;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < self.d {
                break;
            }
            digits[pos] = 0;
        }
        Some(x)
    }
}

impl QMat {
    fn trace_rat(&self) -> Rat {
        let mut t = Rat::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self.at(i, i);
        }
        t
    }
}

/// Φ_{1,w}: μ_w restricted to 𝔊_w, as a table on M_n(O)/p^r.
pub fn build_phi1(td: &TypeDatum, budget: u128) -> Result<SchwartzFunction> {
    let n = td.n();
    let r = td.r as i64;
    let gothic = Pattern::gothic_g(&td.da, &td.db, td.r);
    SchwartzFunction::from_fn(&td.ctx, n, n, 0, r, budget, |x| {
        let xr = x.to_res(td.ctx.p, td.r)?;
        if !gothic.is_member(&xr) {
            return Ok(CoeffScalar::zero(&td.ctx));
        }
        td.mu_w(&xr)
    })
}

/// The four factors of Φ_{2,w}: block-marginal Fourier transforms of the
/// reflected twisted coefficients, and the two integral-lattice indicators.
pub struct Phi2Factored {
    pub f1: SchwartzFunction,
    pub f2_indicator: SchwartzFunction,
    pub f3_indicator: SchwartzFunction,
    pub f4: SchwartzFunction,
    pub a: usize,
    pub b: usize,
}

impl Phi2Factored {
    /// Φ₂ at an n×n point through the factored form.
    pub fn eval(&self, x: &QMat) -> Result<CoeffScalar> {
        let (a, b) = (self.a, self.b);
        let va = self.f1.eval(&x.block(0, 0, a, a))?;
        if va.is_zero() {
            return Ok(va);
        }
        let vb = self.f2_indicator.eval(&x.block(0, a, a, b))?;
        if vb.is_zero() {
            return Ok(vb);
        }
        let vc = self.f3_indicator.eval(&x.block(a, 0, b, a))?;
        if vc.is_zero() {
            return Ok(vc);
        }
        let vd = self.f4.eval(&x.block(a, a, b, b))?;
        Ok(va.mul(&vb).mul(&vc).mul(&vd))
    }
}

/// Marginal transform: p^{-r·m²}·Σ_{α mod p^r} φ_ν(α)·e_w(tr(α·A)) as a
/// table over p^{-r}M_m/M_m.
fn marginal_transform(
    td: &TypeDatum,
    m: usize,
    phi_nu: impl Fn(&crate::matgrp::ResMat) -> Result<CoeffScalar>,
    budget: u128,
) -> Result<SchwartzFunction> {
    let ctx = &td.ctx;
    let p = ctx.p;
    let r = td.r;
    // gather nonzero φ_ν values on M_m(Z/p^r)
    let mut support: Vec<(QMat, CoeffScalar)> = Vec::new();
    let d = p.pow(r);
    let mut digits = vec![0u64; m * m];
    loop {
        let alpha = crate::matgrp::ResMat {
            rows: m,
            cols: m,
            p,
            k: r,
            e: digits.clone(),
        };
        let v = phi_nu(&alpha)?;
        if !v.is_zero() {
            support.push((alpha.to_qmat(), v));
        }
        let mut pos = m * m;
        loop {
            if pos == 0 {
                let vol = rat_pow_p(p, -(r as i64) * (m * m) as i64);
                return SchwartzFunction::from_fn(ctx, m, m, -(r as i64), 0, budget, |x| {
                    let mut acc = CoeffScalar::zero(ctx);
                    for (alpha, v) in &support {
                        let tr = alpha.mul(x).trace_rat();
                        acc = acc.add(&v.mul(&additive_character_rat(ctx, &tr)?));
                    }
                    Ok(acc.mul_rat(&vol))
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < d {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Φ_{2,w} in factored form, built blockwise per the support lemma's
/// marginal structure (tables stay at block size).
pub fn build_phi2(td: &TypeDatum, budget: u128) -> Result<Phi2Factored> {
    let a = td.a();
    let b = td.b();
    let f1 = marginal_transform(td, a, |x| td.phi_nu_a(x), budget)?;
    let f4 = marginal_transform(td, b, |x| td.phi_nu_b(x), budget)?;
    Ok(Phi2Factored {
        f1,
        f2_indicator: SchwartzFunction::indicator(&td.ctx, a, b, 0),
        f3_indicator: SchwartzFunction::indicator(&td.ctx, b, a, 0),
        f4,
        a,
        b,
    })
}

/// Φ_{2,w} as a single full table on p^{-r}M_n/M_n via its defining Fourier
/// sum over 𝔛_w mod p^r — the independent oracle for the factorization.
pub fn phi2_full_oracle(td: &TypeDatum, budget: u128) -> Result<SchwartzFunction> {
    let ctx = &td.ctx;
    let n = td.n();
    let p = ctx.p;
    let r = td.r;
    let mut support: Vec<(QMat, CoeffScalar)> = Vec::new();
    let d = p.pow(r);
    let mut digits = vec![0u64; n * n];
    loop {
        let y = crate::matgrp::ResMat {
            rows: n,
            cols: n,
            p,
            k: r,
            e: digits.clone(),
        };
        let v = td.phi_nu_w(&y)?;
        if !v.is_zero() {
            support.push((y.to_qmat(), v));
        }
        let mut pos = n * n;
        loop {
            if pos == 0 {
                let vol = rat_pow_p(p, -(r as i64) * (n * n) as i64);
                return SchwartzFunction::from_fn(ctx, n, n, -(r as i64), 0, budget, |x| {
                    let mut acc = CoeffScalar::zero(ctx);
                    for (y, v) in &support {
                        let tr = y.mul(x).trace_rat();
                        acc = acc.add(&v.mul(&additive_character_rat(ctx, &tr)?));
                    }
                    Ok(acc.mul_rat(&vol))
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < d {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// The support-lemma verification: build the factors, reconstruct the full
/// Φ₂ pointwise on the whole grid p^{-r}M_n/M_n against the independent
/// oracle, and return the factors. A nonzero residual is an error.
pub fn factor_phi2(td: &TypeDatum, budget: u128) -> Result<Phi2Factored> {
    let factored = build_phi2(td, budget)?;
    let oracle = phi2_full_oracle(td, budget)?;
    for (x, v) in oracle.class_reps().zip(oracle.table.iter()) {
        let w = factored.eval(&x)?;
        if w != *v {
            return Err(Error::Internal(format!(
                "support-lemma factorization residual at a grid point: {w} vs {v}"
            )));
        }
    }
    Ok(factored)
}

/// Φ_w(X₁, X₂) = (dim τ_w)²/Vol(𝔊_w) · Φ_{1,w}(−X₁) · Φ_{2,w}(X₂).
pub struct PhiW {
    pub scale: Rat,
    pub phi1: SchwartzFunction,
    pub phi2: Phi2Factored,
}

pub fn build_phi_w(td: &TypeDatum, budget: u128) -> Result<PhiW> {
    let dim = td.dim_tau_w() as i64;
    let vol_g = crate::matgrp::volume(
        &crate::matgrp::SetSpec::Pattern(Pattern::gothic_g(&td.da, &td.db, td.r)),
        &crate::matgrp::SetSpec::Pattern(Pattern::gl(td.n())),
        td.ctx.p,
    )?;
    let scale = Rat::from_integer((dim * dim).into()) / vol_g;
    Ok(PhiW {
        scale,
        phi1: build_phi1(td, budget)?,
        phi2: build_phi2(td, budget)?,
    })
}

impl PhiW {
    pub fn eval(&self, x1: &QMat, x2: &QMat) -> Result<CoeffScalar> {
        let v1 = self.phi1.eval(&x1.neg())?;
        if v1.is_zero() {
            return Ok(v1);
        }
        let v2 = self.phi2.eval(x2)?;
        Ok(v1.mul(&v2).mul_rat(&self.scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::CharacterDatum;
    use crate::types::BlockRep;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const BUDGET: u128 = 1 << 22;

    #[test]
    fn fourier_of_lattice_indicators() {
        let ctx = CycloCtx::new(9, 3);
        // M(O) indicator is self-dual
        let ind = SchwartzFunction::indicator(&ctx, 2, 2, 0);
        let hat = ind.fourier(BUDGET).unwrap();
        assert!(hat.eq_pointwise(&ind).unwrap());
        // p·M_k(O) → p^{-k²}·char(p^{-1}M_k(O))
        let small = SchwartzFunction::indicator(&ctx, 2, 2, 1);
        let hat = small.fourier(BUDGET).unwrap();
        assert_eq!(hat.sup, -1);
        let expect = CoeffScalar::from_rat(&ctx, rat_pow_p(3, -4));
        let probe = QMat::from_i64(2, 2, &[1, 0, 0, 0]).scale(&Rat::new(1.into(), 3.into()));
        assert_eq!(hat.eval(&probe).unwrap(), expect);
        // zero goes to zero
        let z = SchwartzFunction::zero_fn(&ctx, 1, 1);
        assert!(z.fourier(BUDGET).unwrap().is_zero());
    }

    #[test]
    fn fourier_involution_and_parseval_randomized() {
        for (p, n_root) in [(2u64, 8u64), (3, 27)] {
            let ctx = CycloCtx::new(n_root, p);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for (rows, cols, sup, con) in [(1, 1, -1, 2), (2, 2, -1, 0), (2, 1, 0, 1)] {
                for _ in 0..8 {
                    let f =
                        SchwartzFunction::random(&ctx, rows, cols, sup, con, &mut rng, BUDGET)
                            .unwrap();
                    let g =
                        SchwartzFunction::random(&ctx, rows, cols, sup, con, &mut rng, BUDGET)
                            .unwrap();
                    // involution: f̂̂(x) = f(−x)
                    let ff = f.fourier(BUDGET).unwrap().fourier(BUDGET).unwrap();
                    assert!(ff.eq_pointwise(&f.reflect().unwrap()).unwrap());
                    // Parseval
                    let lhs = f.l2_pairing(&g).unwrap();
                    let rhs = f
                        .fourier(BUDGET)
                        .unwrap()
                        .l2_pairing(&g.fourier(BUDGET).unwrap())
                        .unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    fn abelian_td(p: u64) -> TypeDatum {
        let n_root = if p == 2 { 4 } else { 9 };
        let ctx = CycloCtx::new(n_root, p);
        TypeDatum::new(
            &ctx,
            vec![1],
            vec![1],
            vec![BlockRep::Char(CharacterDatum::trivial(&ctx))],
            vec![BlockRep::Char(CharacterDatum::trivial(&ctx))],
            CharacterDatum::trivial(&ctx),
            CharacterDatum::trivial(&ctx),
            1,
        )
        .unwrap()
    }

    #[test]
    fn phi1_values() {
        let td = abelian_td(3);
        let phi1 = build_phi1(&td, BUDGET).unwrap();
        assert!(phi1.eval(&QMat::identity(2)).unwrap().is_one());
        // off 𝔊_w: unit entry in the lower-left corner
        let x = QMat::from_i64(2, 2, &[1, 0, 1, 1]);
        assert!(phi1.eval(&x).unwrap().is_zero());
        // off M(O)
        let y = QMat::identity(2).scale(&Rat::new(1.into(), 3.into()));
        assert!(phi1.eval(&y).unwrap().is_zero());
    }

    #[test]
    fn phi2_factorization_reconstructs_pointwise() {
        for p in [2u64, 3] {
            let td = abelian_td(p);
            let factored = factor_phi2(&td, BUDGET).unwrap();
            // Φ^{(2)} is the integral-lattice indicator
            assert!(factored
                .f2_indicator
                .eval(&QMat::from_i64(1, 1, &[1]))
                .unwrap()
                .is_one());
            // Φ^{(1)} window: vanishes outside p^{-r}M
            let deep = QMat::from_i64(1, 1, &[1]).scale(&Rat::new(1.into(), ((p * p) as i64).into()));
            assert!(factored.f1.eval(&deep).unwrap().is_zero());
        }
    }

    #[test]
    fn phi2_trivial_config_is_gauss_type() {
        // all characters trivial, n = 1 blocks: Φ^{(1)} is the Fourier
        // transform of char(O^*) = char(O) − p^{-1}·char(p^{-1}O)-scaled
        let td = abelian_td(3);
        let f1 = marginal_transform(&td, 1, |x| td.phi_nu_a(x), BUDGET).unwrap();
        let one = QMat::from_i64(1, 1, &[1]);
        let third = one.scale(&Rat::new(1.into(), 3.into()));
        // value on O: 1 − 1/p
        assert_eq!(
            f1.eval(&one).unwrap(),
            CoeffScalar::from_rat(&td.ctx, Rat::new(2.into(), 3.into()))
        );
        // value at val = −1: −1/p
        assert_eq!(
            f1.eval(&third).unwrap(),
            CoeffScalar::from_rat(&td.ctx, Rat::new((-1).into(), 3.into()))
        );
    }

    #[test]
    fn phi_w_scale_and_support() {
        let td = abelian_td(3);
        let pw = build_phi_w(&td, BUDGET).unwrap();
        // Vol(𝔊_w) at p=3, r=1 is 1/12; dim τ = 1
        assert_eq!(pw.scale, Rat::new(12.into(), 1.into()));
        // vanishes unless −X₁ ∈ 𝔊_w
        let x1 = QMat::from_i64(2, 2, &[1, 0, 1, 1]);
        assert!(pw.eval(&x1, &QMat::identity(2)).unwrap().is_zero());
        let ok = pw
            .eval(&QMat::identity(2).neg(), &QMat::identity(2))
            .unwrap();
        assert!(!ok.is_zero());
    }
}
