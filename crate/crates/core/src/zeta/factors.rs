use super::integrals::{gj_cuspidal_integral, tate_integral};
use num::traits::Zero;
use crate::error::{Error, Result};
use crate::exactnum::{CoeffScalar, CycloCtx, TauMono, ZetaRational};
use crate::matgrp::QMat;
use crate::reps::CharacterDatum;
use crate::schwartz::SchwartzFunction;
use crate::types::BlockRep;
use std::sync::Arc;

/// L- and ε-data of one block twisted by a character, evaluated at the two
/// points s+1/2 and −s+1/2 of the functional equation.
pub struct LocalFactor {
    /// L(s+1/2, π⊗χ)
    pub l_plus: ZetaRational,
    /// L(−s+1/2, π̃⊗χ⁻¹)
    pub l_dual: ZetaRational,
    /// γ = Z(Φ̂, coeff∨, −s side) / Z(Φ, coeff, +s side) — test-function
    /// independent (asserted on two test functions).
    pub gamma: ZetaRational,
    /// ε(s+1/2, π⊗χ) = γ·L(s+1/2)/L(−s+1/2, dual): a unit monomial.
    pub epsilon: TauMono,
}

/// Tate L-factor at the point sign·s + 1/2:
/// (1 − χ(p)·ρ⁻¹·t^{2·sign})⁻¹ for unramified χ, else 1.
pub fn tate_l_factor(ctx: &Arc<CycloCtx>, chi: &CharacterDatum, sign: i64) -> ZetaRational {
    if !chi.is_unramified() {
        return ZetaRational::one(ctx);
    }
    let ratio = TauMono::new(
        chi.value_at_p.mul(&CoeffScalar::rho_pow(ctx, -1)),
        2 * sign,
    );
    ZetaRational::one(ctx)
        .sub(&ratio.to_zeta())
        .inv()
        .expect("1 − c·t^k is invertible")
}

/// Gauss-sum ε oracle for characters with our normalizations
/// (ψ of conductor O, Vol_add(O) = 1, Vol×(O^*) = 1):
/// ε(sign·s + 1/2, χ) = χ(p)^m · p^{−m(sign·s+1/2)} · Σ_{u mod p^m} χ⁻¹(u)·ζ_{p^m}^u,
/// and 1 for unramified χ.
pub fn gauss_sum_epsilon(ctx: &Arc<CycloCtx>, chi: &CharacterDatum, sign: i64) -> Result<TauMono> {
    let m = chi.cond;
    if m == 0 {
        return Ok(TauMono::one(ctx));
    }
    let p = ctx.p;
    let pm = p.pow(m);
    let chi_inv = chi.inverse();
    let mut gauss = CoeffScalar::zero(ctx);
    for u in 1..pm {
        if u % p == 0 {
            continue;
        }
        let zeta = CoeffScalar::root_of_unity(ctx, pm, u as i64)?;
        gauss = gauss.add(&chi_inv.eval_unit(u).mul(&zeta));
    }
    // p^{−m·(sign·s)} = t^{2·m·sign}; p^{−m/2} = ρ^{−m}
    let c = chi
        .value_at_p
        .pow(m as i64)?
        .mul(&CoeffScalar::rho_pow(ctx, -(m as i64)))
        .mul(&gauss);
    Ok(TauMono::new(c, 2 * sign * m as i64))
}

/// Canonical pair of test functions for the γ oracle of one block class.
fn test_functions(
    ctx: &Arc<CycloCtx>,
    block: &BlockRep,
    twist: &CharacterDatum,
    budget: u128,
) -> Result<Vec<(String, SchwartzFunction)>> {
    match block {
        BlockRep::Char(chi_pi) => {
            let total = chi_pi.mul(twist);
            if total.is_unramified() {
                Ok(vec![
                    ("char(O)".into(), SchwartzFunction::indicator(ctx, 1, 1, 0)),
                    (
                        "char(p^{-1}O)".into(),
                        SchwartzFunction::indicator(ctx, 1, 1, -1),
                    ),
                ])
            } else {
                let m = total.cond as i64;
                let one = QMat::identity(1);
                let f1 = SchwartzFunction::coset_indicator(ctx, &one, m, budget)?;
                // a second coset: u0·(1 + p^m O) for the smallest unit u0 ≠ 1
                let u0 = (2..).find(|u| u % ctx.p != 0).unwrap();
                let x0 = QMat::from_i64(1, 1, &[u0 as i64]);
                let f2 = SchwartzFunction::coset_indicator(ctx, &x0, m, budget)?;
                Ok(vec![
                    ("char(1+p^m O)".into(), f1),
                    (format!("char({u0}·(1+p^m O))"), f2),
                ])
            }
        }
        BlockRep::Cusp(sc) => {
            let level = sc.fin.grp.k.max(twist.cond).max(1) as i64;
            let tw_inv = twist.inverse();
            let f1 = SchwartzFunction::from_fn(ctx, 2, 2, 0, level, budget, |x| {
                if x.det().is_zero() || x.det_val(ctx.p) != Some(0) {
                    return Ok(CoeffScalar::zero(ctx));
                }
                Ok(tw_inv.eval_det(x)?.mul(&sc.coefficient(&x.inverse()?, 0, 0)?))
            })?;
            // the p-scaled copy supported on p·GL(O)
            let f2 = SchwartzFunction::from_fn(ctx, 2, 2, 1, level + 1, budget, |x| {
                f1.eval(&x.scale_pow_p(ctx.p, -1))
            })?;
            Ok(vec![
                ("dual coefficient on GL(O)".into(), f1),
                ("p-scaled dual coefficient".into(), f2),
            ])
        }
    }
}

/// Z(s-side) and Z(dual side) of the functional equation on a test function:
///   Z₊ = ∫ Φ(g)·χ(det g)·⟨σ(g)φ⁰, φ̃⁰⟩·|det g|^{s+m/2} d×g
///   Z₋ = ∫ Φ̂(g)·χ⁻¹(det g)·⟨σ(g⁻¹)φ⁰, φ̃⁰⟩·|det g|^{−s+m/2} d×g
fn fe_pair(
    block: &BlockRep,
    twist: &CharacterDatum,
    phi: &SchwartzFunction,
    budget: u128,
) -> Result<(ZetaRational, ZetaRational)> {
    let phi_hat = phi.fourier(budget)?;
    match block {
        BlockRep::Char(chi_pi) => {
            let total = chi_pi.mul(twist);
            let z_plus = tate_integral(phi, &total, 1, 1)?;
            let z_minus = tate_integral(&phi_hat, &total.inverse(), -1, 1)?;
            Ok((z_plus, z_minus))
        }
        BlockRep::Cusp(sc) => {
            let m = sc.m as i64;
            let level = sc.fin.grp.k.max(twist.cond).max(1);
            let closure_plus = |g: &QMat| -> Result<CoeffScalar> {
                Ok(twist.eval_det(g)?.mul(&sc.coefficient(g, 0, 0)?))
            };
            let tw_inv = twist.inverse();
            let closure_minus = |g: &QMat| -> Result<CoeffScalar> {
                Ok(tw_inv.eval_det(g)?.mul(&sc.coefficient(&g.inverse()?, 0, 0)?))
            };
            let z_plus = gj_cuspidal_integral(phi, &closure_plus, level, 1, m, budget)?;
            let z_minus = gj_cuspidal_integral(&phi_hat, &closure_minus, level, -1, m, budget)?;
            Ok((z_plus, z_minus))
        }
    }
}

/// The L-factors of a block⊗twist at both functional-equation points.
fn l_factors(ctx: &Arc<CycloCtx>, block: &BlockRep, twist: &CharacterDatum) -> (ZetaRational, ZetaRational) {
    match block {
        BlockRep::Char(chi_pi) => {
            let total = chi_pi.mul(twist);
            (
                tate_l_factor(ctx, &total, 1),
                tate_l_factor(ctx, &total.inverse(), -1),
            )
        }
        BlockRep::Cusp(_) => (ZetaRational::one(ctx), ZetaRational::one(ctx)),
    }
}

/// Compute the local factor of block⊗twist via the functional-equation
/// oracle, asserting γ agreement across the two canonical test functions
/// and that ε reduces to a unit monomial.
pub fn local_factors(
    ctx: &Arc<CycloCtx>,
    block: &BlockRep,
    twist: &CharacterDatum,
    budget: u128,
) -> Result<LocalFactor> {
    let pairs = test_functions(ctx, block, twist, budget)?;
    let mut gamma: Option<ZetaRational> = None;
    for (name, phi) in &pairs {
        let (z_plus, z_minus) = fe_pair(block, twist, phi, budget)?;
        if z_plus.is_zero() {
            if z_minus.is_zero() {
                return Err(Error::GammaIllDefined(name.clone()));
            }
            return Err(Error::GammaIllDefined(format!("{name} (zero primal side)")));
        }
        let g = z_minus.div(&z_plus)?;
        match &gamma {
            None => gamma = Some(g),
            Some(prev) => {
                if !prev.eq_exact(&g) {
                    return Err(Error::Internal(format!(
                        "gamma depends on the test function at {name}"
                    )));
                }
            }
        }
    }
    let gamma = gamma.unwrap();
    let (l_plus, l_dual) = l_factors(ctx, block, twist);
    let eps_rat = gamma.mul(&l_plus).div(&l_dual)?;
    let epsilon = eps_rat.as_monomial().ok_or_else(|| {
        Error::Internal("epsilon factor did not reduce to a unit monomial".into())
    })?;
    if epsilon.c.is_zero() {
        return Err(Error::Internal("epsilon factor vanishes".into()));
    }
    Ok(LocalFactor {
        l_plus,
        l_dual,
        gamma,
        epsilon,
    })
}

/// ε evaluated at the dual point −s+1/2: the τ-power of the monomial flips
/// sign (the ρ part stays), matching ε(s') = u·p^{−e·s'/2-form}.
pub fn epsilon_at_dual_point(eps: &TauMono) -> TauMono {
    TauMono::new(eps.c.clone(), -eps.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::Rat;

    const BUDGET: u128 = 1 << 22;

    fn quad_mod3(ctx: &Arc<CycloCtx>) -> CharacterDatum {
        CharacterDatum::from_generator_images(ctx, 1, &[1], CoeffScalar::one(ctx)).unwrap()
    }

    #[test]
    fn unramified_trivial_has_unit_epsilon() {
        let ctx = CycloCtx::new(9, 3);
        let triv = CharacterDatum::trivial(&ctx);
        let lf = local_factors(
            &ctx,
            &BlockRep::Char(triv.clone()),
            &CharacterDatum::trivial(&ctx),
            BUDGET,
        )
        .unwrap();
        assert_eq!(lf.epsilon, TauMono::one(&ctx));
        // and L(s+1/2) = 1/(1 − ρ⁻¹t²)
        assert!(lf.l_plus.eq_exact(&tate_l_factor(&ctx, &triv, 1)));
        // γ for the trivial character is L(−s+1/2,triv)/L(s+1/2,triv)
        let expect = tate_l_factor(&ctx, &triv, -1)
            .div(&tate_l_factor(&ctx, &triv, 1))
            .unwrap();
        assert!(lf.gamma.eq_exact(&expect));
    }

    #[test]
    fn ramified_epsilon_matches_gauss_sum_oracle() {
        let ctx = CycloCtx::new(18, 3);
        let quad = quad_mod3(&ctx);
        let lf = local_factors(
            &ctx,
            &BlockRep::Char(quad.clone()),
            &CharacterDatum::trivial(&ctx),
            BUDGET,
        )
        .unwrap();
        let oracle = gauss_sum_epsilon(&ctx, &quad, 1).unwrap();
        assert_eq!(lf.epsilon, oracle);
        // the Gauss sum for the quadratic character mod 3: ζ_3 − ζ_3²
        let g = CoeffScalar::root_of_unity(&ctx, 3, 1)
            .unwrap()
            .sub(&CoeffScalar::root_of_unity(&ctx, 3, 2).unwrap());
        assert_eq!(oracle.c, g.mul(&CoeffScalar::rho_pow(&ctx, -1)));
        assert_eq!(oracle.k, 2);
    }

    #[test]
    fn epsilon_duality_relation() {
        // ε(s+1/2, χ)·ε(−s+1/2, χ⁻¹) = χ(−1), for every character of
        // conductor ≤ 1 at p ∈ {2, 3} and several values at p
        for (p, n_root) in [(2u64, 4u64), (3, 18)] {
            let ctx = CycloCtx::new(n_root, p);
            let mut chars = vec![
                CharacterDatum::trivial(&ctx),
                CharacterDatum::unramified(&ctx, CoeffScalar::from_i64(&ctx, -1)).unwrap(),
                CharacterDatum::unramified(&ctx, CoeffScalar::from_rat(&ctx, Rat::new(2.into(), 3.into())))
                    .unwrap(),
            ];
            if p == 3 {
                chars.push(quad_mod3(&ctx));
                chars.push(
                    CharacterDatum::from_generator_images(
                        &ctx,
                        1,
                        &[1],
                        CoeffScalar::from_i64(&ctx, 2),
                    )
                    .unwrap(),
                );
            }
            for chi in &chars {
                let e1 = gauss_sum_epsilon(&ctx, chi, 1).unwrap();
                let e2_dual = epsilon_at_dual_point(&gauss_sum_epsilon(&ctx, &chi.inverse(), 1).unwrap());
                let prod = e1.mul(&e2_dual);
                assert_eq!(prod.k, 0, "tau power must cancel");
                assert_eq!(prod.c, chi.at_minus_one(), "χ(−1) relation at p={p}");
            }
        }
    }

    #[test]
    fn gamma_independence_across_test_functions_ramified() {
        // exercised inside local_factors (two test functions asserted equal);
        // run it for the quadratic twist of an unramified block
        let ctx = CycloCtx::new(18, 3);
        let chi_pi = CharacterDatum::unramified(&ctx, CoeffScalar::from_i64(&ctx, 2)).unwrap();
        let lf = local_factors(&ctx, &BlockRep::Char(chi_pi), &quad_mod3(&ctx), BUDGET).unwrap();
        // ramified total: both L factors are 1 and γ = ε
        assert!(lf.l_plus.eq_exact(&ZetaRational::one(&ctx)));
        assert!(lf.gamma.eq_exact(&lf.epsilon.to_zeta()));
    }

    #[test]
    fn supercuspidal_local_factor() {
        let ctx = CycloCtx::new(12, 2);
        let cusp = crate::reps::cuspidal_gl2(&ctx, 1, BUDGET).unwrap();
        let sc = crate::reps::SupercuspidalDatum::new(cusp, CoeffScalar::from_i64(&ctx, -1)).unwrap();
        let lf = local_factors(
            &ctx,
            &BlockRep::Cusp(sc),
            &CharacterDatum::trivial(&ctx),
            BUDGET,
        )
        .unwrap();
        // L = 1 on both sides; ε is a unit monomial
        assert!(lf.l_plus.eq_exact(&ZetaRational::one(&ctx)));
        assert!(lf.l_dual.eq_exact(&ZetaRational::one(&ctx)));
        assert!(!lf.epsilon.c.is_zero());
    }
}
