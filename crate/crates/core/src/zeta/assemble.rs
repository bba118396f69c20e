use super::config::Place;
use super::factors::{gauss_sum_epsilon, local_factors, tate_l_factor};
use super::integrals::{gj_cuspidal_integral, tate_integral};
use crate::error::{Error, Result};
use crate::exactnum::{CoeffScalar, Rat, ZetaRational};
use crate::matgrp::{
    big_cell_constant, enumerate, volume, Pattern, QMat, SetSpec, Shape,
};
use crate::schwartz::build_phi2;
use crate::types::BlockRep;

fn class_weight(order: usize) -> Rat {
    Rat::new(1.into(), (order as i64).into())
}

/// 𝓘_{a_w}: the outer sum over I⁰_{a_w,r} classes of μ_{a_w}·χ_{w,2}
/// against the inner Godement-Jacquet shell sum of Φ^{(1)} with the
/// χ_{w,1}⁻¹-twisted coefficient of the translated pairing.
pub fn compute_i_a(place: &Place) -> Result<ZetaRational> {
    let td = &place.td;
    let ctx = &place.ctx;
    let p = ctx.p;
    let phi2 = build_phi2(td, place.budget)?;
    let f1 = &phi2.f1;
    let a = td.a();
    let i0 = enumerate(
        &SetSpec::Pattern(Pattern::iwahori0(&Shape::standard(&td.da), td.r)),
        p,
        td.r,
        place.budget,
    )?;
    let weight = class_weight(crate::matgrp::gl_count(a, p, td.r)? as usize);
    let chi1_inv = td.chi1.inverse();
    let block = td.single_block_a()?;
    let mut acc = ZetaRational::zero(ctx);
    for a1 in &i0 {
        let outer = td.mu_a(a1)?.mul(&td.chi2.eval_unit(a1.det()));
        if outer.is_zero() {
            continue;
        }
        let a1q = a1.to_qmat();
        let inner = match block {
            BlockRep::Char(chi_pi) => {
                let total = chi_pi.mul(&td.chi1).inverse();
                let const_part = chi_pi.eval_rat(a1q.at(0, 0))?;
                tate_integral(f1, &total, 1, a as i64)?.mul_scalar(&const_part)
            }
            BlockRep::Cusp(sc) => {
                let level = sc.fin.grp.k.max(td.chi1.cond).max(1);
                let closure = |g: &QMat| -> Result<CoeffScalar> {
                    let tw = chi1_inv.eval_det(g)?;
                    Ok(tw.mul(&sc.coefficient(&g.inverse()?.mul(&a1q), 0, 0)?))
                };
                gj_cuspidal_integral(f1, &closure, level, 1, a as i64, place.budget)?
            }
        };
        acc = acc.add(&inner.mul_scalar(&outer.mul_rat(&weight)));
    }
    Ok(acc)
}

/// 𝓘_{b_w}: the mirror sum, outer over D₂ ∈ I⁰_{b_w,r} with μ_{b_w}·χ_{w,1}⁻¹
/// and inner over D₁ against Φ^{(4)} with the χ_{w,2}-twisted coefficient.
/// The empty b-side contributes 1.
pub fn compute_i_b(place: &Place) -> Result<ZetaRational> {
    let td = &place.td;
    let ctx = &place.ctx;
    if td.b() == 0 {
        return Ok(ZetaRational::one(ctx));
    }
    let p = ctx.p;
    let phi2 = build_phi2(td, place.budget)?;
    let f4 = &phi2.f4;
    let b = td.b();
    let i0 = enumerate(
        &SetSpec::Pattern(Pattern::iwahori0(&Shape::standard(&td.db), td.r)),
        p,
        td.r,
        place.budget,
    )?;
    let weight = class_weight(crate::matgrp::gl_count(b, p, td.r)? as usize);
    let block = td.single_block_b()?;
    let mut acc = ZetaRational::zero(ctx);
    for d2 in &i0 {
        let outer = td
            .mu_b(d2)?
            .mul(&td.chi1.inverse().eval_unit(d2.det()));
        if outer.is_zero() {
            continue;
        }
        let d2q = d2.to_qmat();
        let inner = match block {
            BlockRep::Char(chi_pi) => {
                let total = chi_pi.mul(&td.chi2);
                let const_part = chi_pi.inverse().eval_rat(d2q.at(0, 0))?;
                tate_integral(f4, &total, 1, b as i64)?.mul_scalar(&const_part)
            }
            BlockRep::Cusp(sc) => {
                let level = sc.fin.grp.k.max(td.chi2.cond).max(1);
                let chi2 = td.chi2.clone();
                let closure = |g: &QMat| -> Result<CoeffScalar> {
                    let tw = chi2.eval_det(g)?;
                    Ok(tw.mul(&sc.coefficient(&d2q.inverse()?.mul(g), 0, 0)?))
                };
                gj_cuspidal_integral(f4, &closure, level, 1, b as i64, place.budget)?
            }
        };
        acc = acc.add(&inner.mul_scalar(&outer.mul_rat(&weight)));
    }
    Ok(acc)
}

/// Vol(I⁰_{w,r})·Vol(ᵗI⁰_{w,r})/Vol(I⁰_{w,r} ∩ ᵗI⁰_{w,r}) for the mixed
/// parahoric shape of the configuration.
pub fn n_level_volume_ratio(place: &Place) -> Result<Rat> {
    let td = &place.td;
    let p = place.ctx.p;
    let shape = Shape::mixed(&td.da, &td.db);
    let gl = SetSpec::Pattern(Pattern::gl(td.n()));
    let i0 = Pattern::iwahori0(&shape, td.r);
    let ti0 = i0.transpose();
    let cap = i0.intersect(&ti0)?;
    let v1 = volume(&SetSpec::Pattern(i0), &gl, p)?;
    let v2 = volume(&SetSpec::Pattern(ti0), &gl, p)?;
    let v3 = volume(&SetSpec::Pattern(cap), &gl, p)?;
    Ok(v1 * v2 / v3)
}

/// The two closed-form quotients of the main computation:
/// L_{a,ord} = 1/γ(π̃_a ⊗ χ_{w,1}⁻¹) and L_{b,ord} = 1/γ(π_b ⊗ χ_{w,2})
/// via the functional-equation oracle (unit quotient for an empty b-side).
pub fn l_ord_quotients(place: &Place) -> Result<(ZetaRational, ZetaRational)> {
    let td = &place.td;
    let ctx = &place.ctx;
    let lf_a = local_factors(
        ctx,
        &td.duals_a[0],
        &td.chi1.inverse(),
        place.budget,
    )?;
    let l_a = lf_a.gamma.inv()?;
    let l_b = if td.b() == 0 {
        ZetaRational::one(ctx)
    } else {
        local_factors(ctx, &td.blocks_b[0], &td.chi2, place.budget)?
            .gamma
            .inv()?
    };
    Ok((l_a, l_b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZwMode {
    Bruteforce,
    ClosedForm,
}

/// The local integral Z_w.
///
/// Bruteforce assembles the two block integrals with the volume prefactor
/// (dim τ_w)²·c_{a,b}·Vol(I⁰_{a,b,r})/(Vol(I⁰_{a_w,r})·Vol(I⁰_{b_w,r})),
/// all volumes by counting; c_{a,b} is the big-cell constant of the chart
/// measure. Closed form assembles the functional-equation quotients with the
/// parahoric volume ratio and the computed pairing ⟨φ_w, φ̃_w⟩.
pub fn compute_zw(place: &Place, mode: ZwMode) -> Result<ZetaRational> {
    let td = &place.td;
    let ctx = &place.ctx;
    let p = ctx.p;
    match mode {
        ZwMode::Bruteforce => {
            let dim = td.dim_tau_w() as i64;
            let gl_n = SetSpec::Pattern(Pattern::gl(td.n()));
            let vol_two_block = volume(
                &SetSpec::Pattern(Pattern::iwahori0(
                    &Shape::standard(&[td.a(), td.b()]),
                    td.r,
                )),
                &gl_n,
                p,
            )?;
            let vol_ia = volume(
                &SetSpec::Pattern(Pattern::iwahori0(&Shape::standard(&td.da), td.r)),
                &SetSpec::Pattern(Pattern::gl(td.a())),
                p,
            )?;
            let vol_ib = if td.b() == 0 {
                Rat::from_integer(1.into())
            } else {
                volume(
                    &SetSpec::Pattern(Pattern::iwahori0(&Shape::standard(&td.db), td.r)),
                    &SetSpec::Pattern(Pattern::gl(td.b())),
                    p,
                )?
            };
            let pref = Rat::from_integer((dim * dim).into())
                * big_cell_constant(td.a(), td.b(), p)
                * vol_two_block
                / (vol_ia * vol_ib);
            let ia = compute_i_a(place)?;
            let ib = compute_i_b(place)?;
            Ok(ia.mul(&ib).mul_scalar(&CoeffScalar::from_rat(ctx, pref)))
        }
        ZwMode::ClosedForm => {
            let (l_a, l_b) = l_ord_quotients(place)?;
            let ratio = n_level_volume_ratio(place)?;
            let pairing = place.tv.self_pairing(place.budget)?;
            Ok(l_a
                .mul(&l_b)
                .mul_scalar(&CoeffScalar::from_rat(ctx, ratio))
                .mul_scalar(&pairing))
        }
    }
}

/// The independently coded character-only (ordinary-case) closed form:
/// explicit Tate L-factors and Gauss-sum ε-factors, no functional-equation
/// oracle. Only valid when every block is a character.
pub fn l_ord_char_path(place: &Place) -> Result<(ZetaRational, ZetaRational)> {
    let td = &place.td;
    let ctx = &place.ctx;
    let BlockRep::Char(chi_pa) = td.single_block_a()? else {
        return Err(Error::Unsupported(
            "ordinary-case path requires character blocks".into(),
        ));
    };
    let total_a = chi_pa.mul(&td.chi1);
    // L(s+1/2, (χ_a χ₁)⁻¹) / (ε(s+1/2, (χ_a χ₁)⁻¹)·L(−s+1/2, χ_a χ₁))
    let la = tate_l_factor(ctx, &total_a.inverse(), 1).div(
        &gauss_sum_epsilon(ctx, &total_a.inverse(), 1)?
            .to_zeta()
            .mul(&tate_l_factor(ctx, &total_a, -1)),
    )?;
    let lb = if td.b() == 0 {
        ZetaRational::one(ctx)
    } else {
        let BlockRep::Char(chi_pb) = td.single_block_b()? else {
            return Err(Error::Unsupported(
                "ordinary-case path requires character blocks".into(),
            ));
        };
        let total_b = chi_pb.mul(&td.chi2);
        tate_l_factor(ctx, &total_b, 1).div(
            &gauss_sum_epsilon(ctx, &total_b, 1)?
                .to_zeta()
                .mul(&tate_l_factor(ctx, &total_b.inverse(), -1)),
        )?
    };
    Ok((la, lb))
}

/// E_p: the product over the configured places of the closed-form quotients.
pub fn compute_ep(places: &[Place]) -> Result<ZetaRational> {
    if places.is_empty() {
        return Err(Error::Config("E_p needs at least one place".into()));
    }
    let ctx = &places[0].ctx;
    let mut acc = ZetaRational::one(ctx);
    for pl in places {
        let (la, lb) = l_ord_quotients(pl)?;
        acc = acc.mul(&la).mul(&lb);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::config::{BlockSpec, CharSpec, ZetaConfigSpec};

    const BUDGET: u128 = 1 << 22;

    pub fn abelian_spec(p: u64) -> ZetaConfigSpec {
        ZetaConfigSpec {
            prime: p,
            n: 2,
            a: 1,
            b: 1,
            partition_a: vec![1],
            partition_b: vec![1],
            level_r: 1,
            chi1: CharSpec::trivial(),
            chi2: CharSpec::trivial(),
            blocks: vec![
                BlockSpec::Character { chi: CharSpec::trivial() },
                BlockSpec::Character { chi: CharSpec::trivial() },
            ],
            suites: vec![],
            truncation: None,
        }
    }

    #[test]
    fn i_a_equals_l_quotient_at_trivial_config() {
        // 𝓘_a at the all-trivial config equals its closed form:
        // the L-quotient times Vol(𝔛^{(1)})·Vol(I⁰_{a,r})·⟨φ_a,φ̃_a⟩ = 1·1·1.
        for p in [2u64, 3] {
            let place = abelian_spec(p).build(BUDGET).unwrap();
            let ia = compute_i_a(&place).unwrap();
            let (la, _) = l_ord_quotients(&place).unwrap();
            assert!(ia.eq_exact(&la), "p = {p}: {ia} vs {la}");
        }
    }

    #[test]
    fn b_side_symmetry_at_trivial_config() {
        for p in [2u64, 3] {
            let place = abelian_spec(p).build(BUDGET).unwrap();
            let ia = compute_i_a(&place).unwrap();
            let ib = compute_i_b(&place).unwrap();
            assert!(ia.eq_exact(&ib));
        }
    }

    #[test]
    fn main_theorem_all_trivial() {
        for p in [2u64, 3] {
            let place = abelian_spec(p).build(BUDGET).unwrap();
            let brute = compute_zw(&place, ZwMode::Bruteforce).unwrap();
            let closed = compute_zw(&place, ZwMode::ClosedForm).unwrap();
            assert!(brute.eq_exact(&closed), "p = {p}:\n  {brute}\n  {closed}");
            assert!(!brute.is_zero());
        }
    }

    #[test]
    fn char_path_matches_gamma_path_trivial() {
        for p in [2u64, 3] {
            let place = abelian_spec(p).build(BUDGET).unwrap();
            let (ga, gb) = l_ord_quotients(&place).unwrap();
            let (ca, cb) = l_ord_char_path(&place).unwrap();
            assert!(ga.eq_exact(&ca), "a-side p={p}");
            assert!(gb.eq_exact(&cb), "b-side p={p}");
        }
    }
}
