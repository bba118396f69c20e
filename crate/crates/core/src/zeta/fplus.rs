use super::config::Place;
use crate::error::Result;
use crate::exactnum::{CoeffScalar, Rat, TauMono, ZetaRational};
use crate::matgrp::{enumerate, gl_count, Pattern, QMat, SetSpec};
use crate::padic::val_p_rat;
use crate::schwartz::{build_phi1, phi2_full_oracle};
use crate::types::{val_of_det, val_spread};
use num::traits::Zero;

/// Columns j < a from `left`, columns j ≥ a from `right`.
fn mix_columns(left: &QMat, right: &QMat, a: usize) -> QMat {
    let n = left.rows;
    let mut out = QMat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if j < a { left.at(i, j) } else { right.at(i, j) };
            out.set(i, j, v.clone());
        }
    }
    out
}

fn phi_w_scale(place: &Place) -> Result<Rat> {
    let td = &place.td;
    let dim = td.dim_tau_w() as i64;
    let vol_g = crate::matgrp::volume(
        &SetSpec::Pattern(Pattern::gothic_g(&td.da, &td.db, td.r)),
        &SetSpec::Pattern(Pattern::gl(td.n())),
        place.ctx.p,
    )?;
    Ok(Rat::from_integer((dim * dim).into()) / vol_g)
}

fn outer_prefactor(place: &Place, u: &QMat) -> Result<TauMono> {
    let td = &place.td;
    let ctx = &place.ctx;
    let n = td.n() as i64;
    let vu = val_of_det(u, ctx.p)?;
    let c = td
        .chi2
        .eval_rat(&u.det())?
        .mul(&CoeffScalar::rho_pow(ctx, -vu * n))
        .mul_rat(&phi_w_scale(place)?);
    Ok(TauMono::new(c, 2 * vu))
}

/// The local Siegel-Weil section at (u, 1):
///
///   f⁺(u,1) = χ_{w,2}(det u)·|det u|^{n/2+s} ·
///             ∫ Φ_w((Xu, X)·S_w)·(χ_{w,1}⁻¹χ_{w,2})(det X)·|det X|^{n+2s} d×X.
///
/// The S_w shuffle sends (Xu, X) to the column mixes
/// ([Xu|_a, X|_b], [X|_a, Xu|_b]). The first must land in −𝔊_w, which pins
/// X = T·W₁(u)⁻¹ with T ∈ −𝔊_w and W₁(u) = [u|_a, e|_b], turning the
/// integral into a finite class sum by Haar invariance.
pub fn siegel_weil_f_plus(place: &Place, u: &QMat) -> Result<ZetaRational> {
    let td = &place.td;
    let ctx = &place.ctx;
    let p = ctx.p;
    let n = td.n();
    let a = td.a();
    let w1 = mix_columns(u, &QMat::identity(n), a);
    let w2 = mix_columns(&QMat::identity(n), u, a);
    if w1.det().is_zero() {
        return Ok(ZetaRational::zero(ctx));
    }
    let w1_inv = w1.inverse()?;
    let v = w1_inv.mul(&w2);

    let phi1 = build_phi1(td, place.budget)?;
    let phi2 = phi2_full_oracle(td, place.budget)?;
    let tw = td.chi1.inverse().mul(&td.chi2);

    let level = td.r + val_spread(&v, p) + val_spread(&w1_inv, p);
    let gothic = enumerate(
        &SetSpec::Pattern(Pattern::gothic_g(&td.da, &td.db, td.r)),
        p,
        level,
        place.budget,
    )?;
    let weight = Rat::new(1.into(), (gl_count(n, p, level)? as i64).into());
    let mut acc = ZetaRational::zero(ctx);
    for g in &gothic {
        let t = g.to_qmat().neg();
        let phi1_val = phi1.eval(&t.neg())?;
        if phi1_val.is_zero() {
            continue;
        }
        let phi2_val = phi2.eval(&t.mul(&v))?;
        if phi2_val.is_zero() {
            continue;
        }
        let x = t.mul(&w1_inv);
        let det_x = x.det();
        let vx = val_p_rat(&det_x, p).expect("invertible");
        let chi_val = tw.eval_rat(&det_x)?;
        // |det X|^{n+2s} = ρ^{−2n·vx}·t^{4vx}
        let mono = TauMono::new(
            phi1_val
                .mul(&phi2_val)
                .mul(&chi_val)
                .mul(&CoeffScalar::rho_pow(ctx, -2 * (n as i64) * vx))
                .mul_rat(&weight),
            4 * vx,
        );
        acc = acc.add(&mono.to_zeta());
    }
    Ok(acc.mul_mono(&outer_prefactor(place, u)?))
}

/// Independent direct sum for f⁺(u, 1): X runs over every class of the
/// lattice window p^{window_scale}·M mod p^{level}, weighted by the exact
/// class measure of d×X, with supports enforced by evaluation only. The
/// cross-oracle for the change-of-variables route.
pub fn f_plus_direct_window(
    place: &Place,
    u: &QMat,
    window_scale: i64,
    level: u32,
) -> Result<ZetaRational> {
    let td = &place.td;
    let ctx = &place.ctx;
    let p = ctx.p;
    let n = td.n();
    let a = td.a();
    let phi1 = build_phi1(td, place.budget)?;
    let phi2 = phi2_full_oracle(td, place.budget)?;
    let tw = td.chi1.inverse().mul(&td.chi2);
    let digits = p.pow(level);
    let mut digit_vec = vec![0u64; n * n];
    let mut acc = ZetaRational::zero(ctx);
    let v_n = Rat::new(
        (gl_count(n, p, 1)? as i64).into(),
        ((p as i64).pow((n * n) as u32)).into(),
    );
    loop {
        let mut x = QMat::zero(n, n);
        for (pos, &d) in digit_vec.iter().enumerate() {
            x.e[pos] =
                Rat::from_integer((d as i64).into()) * crate::exactnum::rat_pow_p(p, window_scale);
        }
        let det = x.det();
        if !det.is_zero() {
            let vx = val_p_rat(&det, p).unwrap();
            // only classes whose determinant valuation is pinned by the class
            if vx < window_scale * n as i64 + level as i64 {
                let xu = x.mul(u);
                let arg1 = mix_columns(&xu, &x, a);
                let arg2 = mix_columns(&x, &xu, a);
                let p1 = phi1.eval(&arg1.neg())?;
                if !p1.is_zero() {
                    let p2 = phi2.eval(&arg2)?;
                    if !p2.is_zero() {
                        let v_y = vx - window_scale * n as i64;
                        let meas = crate::exactnum::rat_pow_p(p, n as i64 * v_y)
                            * crate::exactnum::rat_pow_p(p, -(level as i64) * (n * n) as i64)
                            / v_n.clone();
                        let chi_val = tw.eval_rat(&det)?;
                        let c = p1
                            .mul(&p2)
                            .mul(&chi_val)
                            .mul(&CoeffScalar::rho_pow(ctx, -2 * (n as i64) * vx))
                            .mul_rat(&meas);
                        acc = acc.add(&TauMono::new(c, 4 * vx).to_zeta());
                    }
                }
            }
        }
        let mut pos = n * n;
        loop {
            if pos == 0 {
                return Ok(acc.mul_mono(&outer_prefactor(place, u)?));
            }
            pos -= 1;
            digit_vec[pos] += 1;
            if digit_vec[pos] < digits {
                break;
            }
            digit_vec[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::config::{BlockSpec, CharSpec, ZetaConfigSpec};

    const BUDGET: u128 = 1 << 24;

    fn abelian_place(p: u64) -> Place {
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
        .build(BUDGET)
        .unwrap()
    }

    #[test]
    fn f_plus_matches_direct_window_sum_at_identity() {
        for p in [2u64, 3] {
            let place = abelian_place(p);
            let fast = siegel_weil_f_plus(&place, &QMat::identity(2)).unwrap();
            let direct = f_plus_direct_window(&place, &QMat::identity(2), 0, 2).unwrap();
            assert!(fast.eq_exact(&direct), "p = {p}: {fast} vs {direct}");
            assert!(!fast.is_zero());
        }
    }

    #[test]
    fn f_plus_vanishes_far_outside_the_window() {
        let place = abelian_place(3);
        let u = QMat::identity(2).scale_pow_p(3, -4);
        let f = siegel_weil_f_plus(&place, &u).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn f_plus_central_scaling_matches_direct_sum() {
        let place = abelian_place(2);
        let u = QMat::identity(2).scale_pow_p(2, 1);
        let fast = siegel_weil_f_plus(&place, &u).unwrap();
        let direct = f_plus_direct_window(&place, &u, -1, 3).unwrap();
        assert!(fast.eq_exact(&direct), "{fast} vs {direct}");
        assert!(!fast.is_zero());
    }
}
