//! Assembly of the type data: per-block representations with distinguished
//! vectors, the characters χ_{w,1}, χ_{w,2}, and the extension of their
//! matrix coefficients to the locally constant functions μ′, μ, ν supported
//! on the 𝔛-sets.

use crate::error::{Error, Result};
use crate::exactnum::{CoeffScalar, CycloCtx};
use crate::matgrp::{x_set_factorize, QMat, ResMat};
use crate::padic::val_p_rat;
use crate::reps::{CharacterDatum, SupercuspidalDatum};
use std::sync::Arc;

/// A block representation: a character of Q_p^* for size-1 blocks, a
/// depth-zero supercuspidal datum for size-2 blocks. The distinguished
/// vectors are φ⁰ = e_0 and its dual, normalized to ⟨φ⁰, φ̃⁰⟩ = 1.
pub enum BlockRep {
    Char(CharacterDatum),
    Cusp(SupercuspidalDatum),
}

impl BlockRep {
    pub fn size(&self) -> usize {
        match self {
            BlockRep::Char(_) => 1,
            BlockRep::Cusp(sc) => sc.m,
        }
    }

    /// Dimension of the finite type.
    pub fn dim(&self) -> usize {
        match self {
            BlockRep::Char(_) => 1,
            BlockRep::Cusp(sc) => sc.fin.dim,
        }
    }

    /// Congruence level mod which the finite type factors.
    pub fn level(&self) -> u32 {
        match self {
            BlockRep::Char(chi) => chi.cond.max(1),
            BlockRep::Cusp(_) => 1,
        }
    }

    /// ⟨σ(k)φ⁰, φ̃⁰⟩ on an integral residue class.
    pub fn coeff_res(&self, k: &ResMat) -> Result<CoeffScalar> {
        match self {
            BlockRep::Char(chi) => Ok(chi.eval_unit(k.at(0, 0))),
            BlockRep::Cusp(sc) => Ok(sc.fin.apply(k)?.at(0, 0).clone()),
        }
    }

    /// ⟨σ(g)φ⁰, φ̃⁰⟩ for g ∈ GL(K) exact; zero off the coefficient support.
    pub fn coeff_q(&self, g: &QMat) -> Result<CoeffScalar> {
        match self {
            BlockRep::Char(chi) => chi.eval_rat(g.at(0, 0)),
            BlockRep::Cusp(sc) => sc.coefficient(g, 0, 0),
        }
    }

    /// The contragredient datum (φ̃⁰-side).
    pub fn dual(&self) -> Result<BlockRep> {
        Ok(match self {
            BlockRep::Char(chi) => BlockRep::Char(chi.inverse()),
            BlockRep::Cusp(sc) => BlockRep::Cusp(sc.contragredient()?),
        })
    }

    /// Some(λ) iff σ(g)φ⁰ = λ·φ⁰ as vectors.
    pub fn translate_scalar(&self, g: &QMat) -> Result<Option<CoeffScalar>> {
        match self {
            BlockRep::Char(chi) => Ok(Some(chi.eval_rat(g.at(0, 0))?)),
            BlockRep::Cusp(sc) => {
                let Some((t, h)) = sc.central_split(g)? else {
                    return Ok(None);
                };
                let m = sc.fin.apply(&h)?;
                for i in 1..sc.fin.dim {
                    if !m.at(i, 0).is_zero() {
                        return Ok(None);
                    }
                }
                Ok(Some(sc.omega_p.pow(t)?.mul(m.at(0, 0))))
            }
        }
    }
}

/// The full type datum of one place: fine partitions of the two sides,
/// per-block representations, the twisting characters and the level.
pub struct TypeDatum {
    pub ctx: Arc<CycloCtx>,
    pub da: Vec<usize>,
    pub db: Vec<usize>,
    pub blocks_a: Vec<BlockRep>,
    pub blocks_b: Vec<BlockRep>,
    pub duals_a: Vec<BlockRep>,
    pub duals_b: Vec<BlockRep>,
    pub chi1: CharacterDatum,
    pub chi2: CharacterDatum,
    pub r: u32,
}

impl TypeDatum {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ctx: &Arc<CycloCtx>,
        da: Vec<usize>,
        db: Vec<usize>,
        blocks_a: Vec<BlockRep>,
        blocks_b: Vec<BlockRep>,
        chi1: CharacterDatum,
        chi2: CharacterDatum,
        r: u32,
    ) -> Result<Self> {
        let min_r = 1u32.max(chi1.cond).max(chi2.cond);
        if r < min_r {
            return Err(Error::Config(format!(
                "level r = {r} is below the required bound max(1, cond chi1, cond chi2) = {min_r}"
            )));
        }
        if da.len() != blocks_a.len() || db.len() != blocks_b.len() {
            return Err(Error::Config("partition/block count mismatch".into()));
        }
        for (sz, blk) in da.iter().zip(&blocks_a).chain(db.iter().zip(&blocks_b)) {
            if *sz != blk.size() {
                return Err(Error::Config(format!(
                    "block of size {} attached to a partition entry {sz}",
                    blk.size()
                )));
            }
            if blk.level() > r {
                return Err(Error::Config(format!(
                    "block type of level {} does not factor through level r = {r}",
                    blk.level()
                )));
            }
        }
        let duals_a = blocks_a.iter().map(|b| b.dual()).collect::<Result<_>>()?;
        let duals_b = blocks_b.iter().map(|b| b.dual()).collect::<Result<_>>()?;
        Ok(TypeDatum {
            ctx: ctx.clone(),
            da,
            db,
            blocks_a,
            blocks_b,
            duals_a,
            duals_b,
            chi1,
            chi2,
            r,
        })
    }

    pub fn a(&self) -> usize {
        self.da.iter().sum()
    }

    pub fn b(&self) -> usize {
        self.db.iter().sum()
    }

    pub fn n(&self) -> usize {
        self.a() + self.b()
    }

    pub fn dim_tau_a(&self) -> usize {
        self.blocks_a.iter().map(|b| b.dim()).product()
    }

    pub fn dim_tau_b(&self) -> usize {
        self.blocks_b.iter().map(|b| b.dim()).product()
    }

    pub fn dim_tau_w(&self) -> usize {
        self.dim_tau_a() * self.dim_tau_b()
    }

    pub(crate) fn levi_product(
        &self,
        levi: &ResMat,
        parts: &[usize],
        blocks: &[BlockRep],
        invert: bool,
    ) -> Result<CoeffScalar> {
        let mut acc = CoeffScalar::one(&self.ctx);
        let mut start = 0usize;
        for (sz, blk) in parts.iter().zip(blocks) {
            let k = levi.block(start, start, *sz, *sz);
            let k = if invert { k.inverse()? } else { k };
            acc = acc.mul(&blk.coeff_res(&k)?);
            start += sz;
        }
        Ok(acc)
    }

    /// μ′_{a_w}(X): for X = γ₁γ₂ with ᵗγ₁, γ₂ ∈ I⁰_{a_w,r}, the pairing
    /// (τ_a(γ₁⁻¹)φ⁰, τ̃_a(γ₂)φ̃⁰); evaluated through the canonical X-set
    /// factorization (Levi part K), giving Π_j ⟨σ_j(K_j⁻¹)φ⁰_j, φ̃⁰_j⟩.
    /// Total on M_a(O)-classes: zero off 𝔛^{(1)}.
    pub fn mu_prime_a(&self, x: &ResMat) -> Result<CoeffScalar> {
        match x_set_factorize(x, &self.da) {
            Err(Error::NotInSet(_)) => Ok(CoeffScalar::zero(&self.ctx)),
            Err(e) => Err(e),
            Ok((_, k, _)) => self.levi_product(&k, &self.da, &self.blocks_a, true),
        }
    }

    /// μ′_{b_w}(X): the mirror, with the roles of γ₁, γ₂ swapped, so the
    /// Levi part is not inverted.
    pub fn mu_prime_b(&self, x: &ResMat) -> Result<CoeffScalar> {
        match x_set_factorize(x, &self.db) {
            Err(Error::NotInSet(_)) => Ok(CoeffScalar::zero(&self.ctx)),
            Err(e) => Err(e),
            Ok((_, k, _)) => self.levi_product(&k, &self.db, &self.blocks_b, false),
        }
    }

    fn det_unit_value(&self, chi: &CharacterDatum, x: &ResMat) -> Result<CoeffScalar> {
        let d = x.det();
        if d % x.p == 0 {
            return Err(Error::Internal("determinant not a unit on the X-set".into()));
        }
        Ok(chi.eval_unit(d))
    }

    /// μ_{a_w} = χ_{w,2}^{-1}(det)·μ′_{a_w}.
    pub fn mu_a(&self, x: &ResMat) -> Result<CoeffScalar> {
        let m = self.mu_prime_a(x)?;
        if m.is_zero() {
            return Ok(m);
        }
        Ok(self.det_unit_value(&self.chi2.inverse(), x)?.mul(&m))
    }

    /// μ_{b_w} = χ_{w,1}(det)·μ′_{b_w}.
    pub fn mu_b(&self, x: &ResMat) -> Result<CoeffScalar> {
        let m = self.mu_prime_b(x)?;
        if m.is_zero() {
            return Ok(m);
        }
        Ok(self.det_unit_value(&self.chi1, x)?.mul(&m))
    }

    /// μ_w([[A,B],[C,D]]) = μ_{a_w}(A)·μ_{b_w}(D) on 𝔛_w, zero elsewhere
    /// (the off-diagonal blocks of a residue class are always integral).
    pub fn mu_w(&self, x: &ResMat) -> Result<CoeffScalar> {
        let a = self.a();
        let b = self.b();
        debug_assert_eq!(x.rows, a + b);
        let ma = self.mu_a(&x.block(0, 0, a, a))?;
        if ma.is_zero() {
            return Ok(ma);
        }
        let mb = self.mu_b(&x.block(a, a, b, b))?;
        Ok(ma.mul(&mb))
    }

    fn nu_twist(&self, x: &ResMat, mu: CoeffScalar) -> Result<CoeffScalar> {
        if mu.is_zero() {
            return Ok(mu);
        }
        let tw = self.chi1.inverse().mul(&self.chi2);
        Ok(self.det_unit_value(&tw, x)?.mul(&mu))
    }

    /// ν_{a_w} = χ_{w,1}^{-1}χ_{w,2}·μ_{a_w}.
    pub fn nu_a(&self, x: &ResMat) -> Result<CoeffScalar> {
        let mu = self.mu_a(x)?;
        self.nu_twist(x, mu)
    }

    pub fn nu_b(&self, x: &ResMat) -> Result<CoeffScalar> {
        let mu = self.mu_b(x)?;
        self.nu_twist(x, mu)
    }

    /// ν_w with the twist evaluated blockwise, ν_w(X) = ν_a(A)·ν_b(D); on
    /// 𝔊_w this agrees with a full-determinant twist since the conductors
    /// are at most r.
    pub fn nu_w(&self, x: &ResMat) -> Result<CoeffScalar> {
        let a = self.a();
        let b = self.b();
        let na = self.nu_a(&x.block(0, 0, a, a))?;
        if na.is_zero() {
            return Ok(na);
        }
        let nb = self.nu_b(&x.block(a, a, b, b))?;
        Ok(na.mul(&nb))
    }

    /// φ_ν(z) = ν(−z), for each of the three flavors.
    pub fn phi_nu_a(&self, x: &ResMat) -> Result<CoeffScalar> {
        self.nu_a(&x.neg())
    }

    pub fn phi_nu_b(&self, x: &ResMat) -> Result<CoeffScalar> {
        self.nu_b(&x.neg())
    }

    pub fn phi_nu_w(&self, x: &ResMat) -> Result<CoeffScalar> {
        self.nu_w(&x.neg())
    }

    /// Single-block accessors for the zeta pipeline (v1 scope).
    pub fn single_block_a(&self) -> Result<&BlockRep> {
        if self.blocks_a.len() != 1 {
            return Err(Error::Unsupported(
                "the zeta pipeline requires a single block on the a-side".into(),
            ));
        }
        Ok(&self.blocks_a[0])
    }

    pub fn single_block_b(&self) -> Result<&BlockRep> {
        if self.blocks_b.len() != 1 {
            return Err(Error::Unsupported(
                "the zeta pipeline requires a single block on the b-side".into(),
            ));
        }
        Ok(&self.blocks_b[0])
    }

    /// ⟨π_a(g)φ_a, φ̃_a⟩ for the single-block a-side.
    pub fn coeff_a(&self, g: &QMat) -> Result<CoeffScalar> {
        self.single_block_a()?.coeff_q(g)
    }

    pub fn coeff_b(&self, g: &QMat) -> Result<CoeffScalar> {
        self.single_block_b()?.coeff_q(g)
    }

    /// ⟨π_a(A₁)φ_a, π̃_a(A₂)φ̃_a⟩ = coeff_a(A₂⁻¹·A₁).
    pub fn pair_a(&self, a1: &QMat, a2: &QMat) -> Result<CoeffScalar> {
        self.coeff_a(&a2.inverse()?.mul(a1))
    }

    pub fn pair_b(&self, d1: &QMat, d2: &QMat) -> Result<CoeffScalar> {
        self.coeff_b(&d2.inverse()?.mul(d1))
    }

    /// Some(λ) iff π_a(A)φ_a ⊗ π_b(D)φ_b = λ·(φ_a ⊗ φ_b) as vectors.
    pub fn levi_translate_scalar(&self, av: &QMat, dv: &QMat) -> Result<Option<CoeffScalar>> {
        let Some(la) = self.single_block_a()?.translate_scalar(av)? else {
            return Ok(None);
        };
        let Some(lb) = self.single_block_b()?.translate_scalar(dv)? else {
            return Ok(None);
        };
        Ok(Some(la.mul(&lb)))
    }
}

/// Valuation spread of an exact matrix and its inverse, used to size the
/// congruence level needed for translated integrands.
pub fn val_spread(g: &QMat, p: u64) -> u32 {
    let down = g.min_val(p).map(|v| (-v).max(0)).unwrap_or(0);
    let up = g
        .inverse()
        .ok()
        .and_then(|gi| gi.min_val(p))
        .map(|v| (-v).max(0))
        .unwrap_or(0);
    (down + up) as u32
}

pub fn val_of_det(g: &QMat, p: u64) -> Result<i64> {
    val_p_rat(&g.det(), p).ok_or(Error::DivisionByZero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgrp::{enumerate, Pattern, SetSpec, Shape};
    use crate::reps::cuspidal_gl2;

    const BUDGET: u128 = 1 << 22;

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

    fn cuspidal_td() -> TypeDatum {
        let ctx = CycloCtx::new(12, 2);
        let cusp = cuspidal_gl2(&ctx, 1, BUDGET).unwrap();
        let sc = SupercuspidalDatum::new(cusp, CoeffScalar::from_i64(&ctx, -1)).unwrap();
        TypeDatum::new(
            &ctx,
            vec![2],
            vec![1],
            vec![BlockRep::Cusp(sc)],
            vec![BlockRep::Char(CharacterDatum::trivial(&ctx))],
            CharacterDatum::trivial(&ctx),
            CharacterDatum::trivial(&ctx),
            1,
        )
        .unwrap()
    }

    #[test]
    fn non_minimal_conductor_rejected() {
        let ctx = CycloCtx::new(18, 3);
        let quad = CharacterDatum::from_generator_images(&ctx, 1, &[0], CoeffScalar::one(&ctx));
        assert!(quad.is_err());
    }

    #[test]
    fn mu_prime_identity_and_support() {
        let td = abelian_td(3);
        let id = ResMat::identity(1, 3, 2);
        assert!(td.mu_prime_a(&id).unwrap().is_one());
        assert!(td.mu_prime_b(&id).unwrap().is_one());
        let z = ResMat::from_entries(1, 1, 3, 2, vec![3]);
        assert!(td.mu_prime_a(&z).unwrap().is_zero());
        let idn = ResMat::identity(2, 3, 2);
        assert!(td.mu_w(&idn).unwrap().is_one());
    }

    #[test]
    fn mu_w_support_scan_p2() {
        // exhaustive support scan over M_2(Z/2): μ_w ≠ 0 exactly on 𝔛_w,
        // here the matrices with unit diagonal entries
        let td = abelian_td(2);
        for a in 0..2i64 {
            for b in 0..2i64 {
                for c in 0..2i64 {
                    for d in 0..2i64 {
                        let x = ResMat::from_entries(2, 2, 2, 1, vec![a, b, c, d]);
                        let v = td.mu_w(&x).unwrap();
                        let in_x = a == 1 && d == 1;
                        assert_eq!(!v.is_zero(), in_x, "at [[{a},{b}],[{c},{d}]]");
                    }
                }
            }
        }
    }

    #[test]
    fn factorization_independence_exhaustive() {
        // For X = γ₁γ₂ with ᵗγ₁, γ₂ ∈ I⁰_{B,1} in GL_2(Z/9): the pairing
        // value is independent of the chosen factorization and equals the
        // canonical evaluation.
        let ctx = CycloCtx::new(18, 3);
        let quad =
            CharacterDatum::from_generator_images(&ctx, 1, &[1], CoeffScalar::one(&ctx)).unwrap();
        let td = TypeDatum::new(
            &ctx,
            vec![1, 1],
            vec![1],
            vec![
                BlockRep::Char(quad.clone()),
                BlockRep::Char(CharacterDatum::trivial(&ctx)),
            ],
            vec![BlockRep::Char(CharacterDatum::trivial(&ctx))],
            CharacterDatum::trivial(&ctx),
            CharacterDatum::trivial(&ctx),
            1,
        )
        .unwrap();
        let shape = Shape::standard(&[1, 1]);
        let i0 = enumerate(&SetSpec::Pattern(Pattern::iwahori0(&shape, 1)), 3, 2, BUDGET).unwrap();
        for g1t in i0.iter().step_by(3) {
            let g1 = g1t.transpose();
            for g2 in i0.iter().step_by(5) {
                let x = g1.mul(g2);
                let (_, k1, _) =
                    crate::matgrp::block_ldu(&g1, &Shape::opposite(&[1, 1]), Some(1)).unwrap();
                let (_, k2, _) = crate::matgrp::block_ldu(g2, &shape, Some(1)).unwrap();
                let levi = k1.mul(&k2);
                let direct = td
                    .levi_product(&levi, &td.da.clone(), &td.blocks_a, true)
                    .unwrap();
                let canonical = td.mu_prime_a(&x).unwrap();
                assert_eq!(direct, canonical);
            }
        }
    }

    #[test]
    fn nu_reflection_and_trivial_twist() {
        let td = cuspidal_td();
        let id = ResMat::identity(2, 2, 1);
        assert!(td.nu_a(&id).unwrap().is_one());
        assert_eq!(td.phi_nu_a(&id.neg()).unwrap(), td.nu_a(&id).unwrap());
        // with trivial characters ν_• = μ_•
        for x in enumerate(&SetSpec::Pattern(Pattern::gl(2)), 2, 1, BUDGET).unwrap() {
            assert_eq!(td.nu_a(&x).unwrap(), td.mu_a(&x).unwrap());
        }
    }

    #[test]
    fn mu_restriction_matches_block_coefficient() {
        // restricted to the Levi K_a, μ′_a is the plain matrix coefficient
        let td = cuspidal_td();
        for k in enumerate(&SetSpec::Pattern(Pattern::gl(2)), 2, 1, BUDGET).unwrap() {
            let mu = td.mu_prime_a(&k).unwrap();
            let expect = td.blocks_a[0].coeff_res(&k.inverse().unwrap()).unwrap();
            assert_eq!(mu, expect);
        }
    }
}
