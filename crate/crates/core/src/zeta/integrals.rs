use num::traits::Zero;
use crate::error::{Error, Result};
use crate::exactnum::{geometric_series_signed, CoeffScalar, Rat, TauMono, ZetaRational};
use crate::matgrp::QMat;
use crate::reps::{CharacterDatum, FinGL};
use crate::schwartz::SchwartzFunction;
use crate::types::BlockRep;
use std::sync::Arc;

/// Per-shell tau monomial: |det g|^(sign·s + half/2) on the shell
/// val(det g) = v gives t^(2·sign·v)·ρ^(−v·half).
fn shell_mono(ctx: &Arc<crate::exactnum::CycloCtx>, v: i64, sign: i64, half: i64) -> TauMono {
    TauMono::new(CoeffScalar::rho_pow(ctx, -v * half), 2 * sign * v)
}

/// Tate shell sum Z = ∫ Φ(x)·χ(x)·|x|^(sign·s + half/2) d×x over Q_p^*,
/// as an exact rational function: finitely many explicit valuation shells
/// plus a geometric tail once Φ is constant.
pub fn tate_integral(
    phi: &SchwartzFunction,
    chi: &CharacterDatum,
    sign: i64,
    half: i64,
) -> Result<ZetaRational> {
    assert_eq!((phi.rows, phi.cols), (1, 1));
    let ctx = &phi.ctx;
    let p = ctx.p;
    let mut acc = ZetaRational::zero(ctx);
    // explicit shells sup ≤ v < con
    for v in phi.sup..phi.con {
        let unit_level = chi.cond.max((phi.con - v) as u32).max(1);
        let pm = p.pow(unit_level);
        let mut shell = CoeffScalar::zero(ctx);
        let mut u = 1u64;
        while u < pm {
            if u % p != 0 {
                let x = QMat::from_i64(1, 1, &[u as i64]).scale_pow_p(p, v);
                let val = phi.eval(&x)?;
                if !val.is_zero() {
                    shell = shell.add(&val.mul(&chi.eval_unit(u)));
                }
            }
            u += 1;
        }
        let phi_count = pm / p * (p - 1);
        let weight = Rat::new(1.into(), (phi_count as i64).into());
        let term = shell
            .mul_rat(&weight)
            .mul(&chi.value_at_p.pow(v)?)
            .mul(&shell_mono(ctx, v, sign, half).c);
        acc = acc.add(
            &TauMono::new(term, 2 * sign * v).to_zeta(),
        );
    }
    // geometric tail: Φ ≡ Φ(0) for v ≥ con; the unit average of χ is
    // nonzero only when χ is unramified.
    let deep = phi.at_zero();
    if !deep.is_zero() && chi.is_unramified() {
        let ratio = TauMono::new(
            chi.value_at_p.mul(&CoeffScalar::rho_pow(ctx, -half)),
            2 * sign,
        );
        let tail = geometric_series_signed(&ratio, phi.con)?;
        acc = acc.add(&tail.mul_scalar(&deep));
    }
    Ok(acc)
}

/// Godement-Jacquet shell sum for a compact-mod-center coefficient on
/// GL_m(Q_p): Z = ∫ Φ(g)·coeff(g)·|det g|^(sign·s + half/2) d×g, summed over
/// the central shells p^v·GL_m(Z_p). The shell at v = con (where Φ is
/// constant) is computed and must vanish (the evaluated cuspidality sum);
/// otherwise the series would not terminate and the coefficient class is
/// unsupported.
pub fn gj_cuspidal_integral(
    phi: &SchwartzFunction,
    coeff: &dyn Fn(&QMat) -> Result<CoeffScalar>,
    class_level: u32,
    sign: i64,
    half: i64,
    budget: u128,
) -> Result<ZetaRational> {
    let ctx = &phi.ctx;
    let p = ctx.p;
    let m = phi.rows;
    assert_eq!(phi.rows, phi.cols);
    let mut acc = ZetaRational::zero(ctx);
    for v in phi.sup..=phi.con {
        let c = class_level.max((phi.con - v).max(1) as u32);
        let grp = FinGL::new(m, p, c, budget)?;
        let weight = Rat::new(1.into(), (grp.order() as i64).into());
        let mut shell = CoeffScalar::zero(ctx);
        for k in &grp.elems {
            let g = k.to_qmat().scale_pow_p(p, v);
            let phival = phi.eval(&g)?;
            if phival.is_zero() {
                continue;
            }
            let cf = coeff(&g)?;
            if cf.is_zero() {
                continue;
            }
            shell = shell.add(&phival.mul(&cf));
        }
        if v == phi.con {
            if !shell.is_zero() {
                return Err(Error::Unsupported(
                    "coefficient shell sum does not terminate (not compact mod center after \
                     twisting)"
                        .into(),
                ));
            }
            break;
        }
        let vm = v * m as i64;
        let term = shell
            .mul_rat(&weight)
            .mul(&CoeffScalar::rho_pow(ctx, -vm * half));
        acc = acc.add(&TauMono::new(term, 2 * sign * vm).to_zeta());
    }
    Ok(acc)
}

/// The Godement-Jacquet integral for a block representation twisted by a
/// character: reduces to the Tate sum for size-1 blocks and to the central
/// shell sum for depth-zero supercuspidal blocks. `pre` composes the
/// coefficient with a fixed outer translate: coeff(g) = ⟨σ(pre·g)φ⁰, φ̃⁰⟩.
pub fn gj_integral(
    phi: &SchwartzFunction,
    block: &BlockRep,
    twist: &CharacterDatum,
    pre: Option<&QMat>,
    sign: i64,
    half: i64,
    budget: u128,
) -> Result<ZetaRational> {
    match block {
        BlockRep::Char(chi_pi) => {
            let total = chi_pi.mul(twist);
            let outer = match pre {
                None => CoeffScalar::one(&phi.ctx),
                Some(t) => chi_pi.eval_rat(t.at(0, 0))?,
            };
            Ok(tate_integral(phi, &total, sign, half)?.mul_scalar(&outer))
        }
        BlockRep::Cusp(sc) => {
            let level = sc.fin.grp.k.max(twist.cond).max(1);
            let closure = |g: &QMat| -> Result<CoeffScalar> {
                let tw = twist.eval_det(g)?;
                let arg = match pre {
                    None => g.clone(),
                    Some(t) => t.mul(g),
                };
                Ok(tw.mul(&sc.coefficient(&arg, 0, 0)?))
            };
            gj_cuspidal_integral(phi, &closure, level, sign, half, budget)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{geometric_series, CycloCtx};
    use crate::reps::cuspidal_gl2;
    use crate::reps::SupercuspidalDatum;

    const BUDGET: u128 = 1 << 22;

    #[test]
    fn tate_of_integral_indicator_is_geometric() {
        let ctx = CycloCtx::new(9, 3);
        let phi = SchwartzFunction::indicator(&ctx, 1, 1, 0);
        let chi = CharacterDatum::trivial(&ctx);
        let z = tate_integral(&phi, &chi, 1, 0).unwrap();
        // 1/(1−t²), checked against the geometric oracle
        let oracle = geometric_series(&TauMono::new(CoeffScalar::one(&ctx), 2), 0).unwrap();
        assert!(z.eq_exact(&oracle));
    }

    #[test]
    fn tate_of_unit_indicator_is_one() {
        let ctx = CycloCtx::new(9, 3);
        // char(O^*) = char(O) − char(pO)
        let phi = SchwartzFunction::from_fn(&ctx, 1, 1, 0, 1, BUDGET, |x| {
            let v = crate::padic::val_p_rat(x.at(0, 0), 3);
            Ok(match v {
                Some(0) => CoeffScalar::one(&ctx),
                _ => CoeffScalar::zero(&ctx),
            })
        })
        .unwrap();
        let chi = CharacterDatum::trivial(&ctx);
        let z = tate_integral(&phi, &chi, 1, 0).unwrap();
        assert!(z.eq_exact(&ZetaRational::one(&ctx)));
    }

    #[test]
    fn tate_ramified_character_kills_lattice_indicator() {
        let ctx = CycloCtx::new(18, 3);
        let phi = SchwartzFunction::indicator(&ctx, 1, 1, 0);
        let quad =
            CharacterDatum::from_generator_images(&ctx, 1, &[1], CoeffScalar::one(&ctx)).unwrap();
        let z = tate_integral(&phi, &quad, 1, 0).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn gj_reduces_to_tate_at_block_size_one() {
        let ctx = CycloCtx::new(18, 3);
        let phi = SchwartzFunction::indicator(&ctx, 1, 1, -1);
        let quad =
            CharacterDatum::from_generator_images(&ctx, 1, &[1], CoeffScalar::from_i64(&ctx, -2))
                .unwrap();
        let tw = CharacterDatum::unramified(&ctx, CoeffScalar::from_i64(&ctx, 3)).unwrap();
        let via_gj = gj_integral(
            &phi,
            &BlockRep::Char(quad.clone()),
            &tw,
            None,
            1,
            1,
            BUDGET,
        )
        .unwrap();
        let via_tate = tate_integral(&phi, &quad.mul(&tw), 1, 1).unwrap();
        assert!(via_gj.eq_exact(&via_tate));
    }

    #[test]
    fn gj_supercuspidal_is_shell_finite() {
        // Φ = char(M_2(O)), depth-zero supercuspidal of GL_2(F_2): the sum
        // collapses to finitely many central shells (cuspidality kills the
        // constant tail), in fact to zero for this Φ.
        let ctx = CycloCtx::new(12, 2);
        let cusp = cuspidal_gl2(&ctx, 1, BUDGET).unwrap();
        let sc = SupercuspidalDatum::new(cusp, CoeffScalar::from_i64(&ctx, -1)).unwrap();
        let phi = SchwartzFunction::indicator(&ctx, 2, 2, 0);
        let block = BlockRep::Cusp(sc);
        let triv = CharacterDatum::trivial(&ctx);
        let z = gj_integral(&phi, &block, &triv, None, 1, 2, BUDGET).unwrap();
        assert!(z.is_zero());
        // a matrix-coefficient test function sees the representation
        let BlockRep::Cusp(ref sc) = block else { unreachable!() };
        let phi2 = SchwartzFunction::from_fn(&ctx, 2, 2, 0, 1, BUDGET, |x| {
            if x.det().is_zero() {
                return Ok(CoeffScalar::zero(&ctx));
            }
            sc.coefficient(&x.inverse()?, 0, 0)
        })
        .unwrap();
        let z2 = gj_integral(&phi2, &block, &triv, None, 1, 2, BUDGET).unwrap();
        assert!(!z2.is_zero());
        // cross-check at two truncations: the shell sum is already exact,
        // widening the window does not change it
        let phi2_wide = SchwartzFunction::from_fn(&ctx, 2, 2, 0, 2, BUDGET, |x| phi2.eval(x)).unwrap();
        let z2w = gj_integral(&phi2_wide, &block, &triv, None, 1, 2, BUDGET).unwrap();
        assert!(z2.eq_exact(&z2w));
    }

    #[test]
    fn gj_disjoint_supports_vanish() {
        let ctx = CycloCtx::new(12, 2);
        let cusp = cuspidal_gl2(&ctx, 1, BUDGET).unwrap();
        let sc = SupercuspidalDatum::new(cusp, CoeffScalar::from_i64(&ctx, -1)).unwrap();
        // Φ supported on det-valuation 1 shells only: diag(p,1)·GL(O) misses
        // Z·GL_2(Z_p)
        let phi = SchwartzFunction::from_fn(&ctx, 2, 2, 0, 2, BUDGET, |x| {
            Ok(match x.det_val(2) {
                Some(1) => CoeffScalar::one(&ctx),
                _ => CoeffScalar::zero(&ctx),
            })
        })
        .unwrap();
        let z = gj_integral(
            &phi,
            &BlockRep::Cusp(sc),
            &CharacterDatum::trivial(&ctx),
            None,
            1,
            2,
            BUDGET,
        )
        .unwrap();
        assert!(z.is_zero());
    }
}
