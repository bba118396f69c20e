use super::config::Place;
use crate::error::{Error, Result};
use crate::exactnum::{CoeffScalar, Rat, TauMono, ZetaRational};
use crate::matgrp::{big_cell_constant, gl_count_fp, QMat};
use crate::schwartz::{build_phi1, phi2_full_oracle};
use crate::testvec::VectorSide;
use crate::types::BlockRep;
use std::collections::HashMap;
use std::sync::Arc;

/// The raw (pre-reduction) local integral, truncated to determinant
/// valuation shells |val det Z_i| ≤ V: the double chart sum
///
///   Z_w = (dim τ_w)²/Vol(𝔊_w) · c² ·
///         ΣΣ χ₂(det Z₁)·χ₁⁻¹(det Z₂)·|det Z₁Z₂|^{s+n/2} ·
///            Φ₁([Z₁|_a, Z₂|_b])·Φ₂([Z₂|_a, Z₁|_b])·⟨π(Z₁)φ_w, π̃(Z₂)φ̃_w⟩
///
/// over the (C, A, D, B)-coordinate classes of the two big cells, with the
/// calibrated chart constant c = c_{a,b}, the full Φ₂ table from its
/// defining Fourier sum (never the support lemma), and the pairing evaluated
/// through the flag-variety chart. Scoped to n = 2, (a,b) = (1,1),
/// character blocks — the configurations of the raw cross-check.
///
/// The class granularity (unit level, congruence windows, flag level) is
/// self-validated: the sum is computed at two successive refinements and
/// must agree exactly.
pub fn raw_zw_truncated(place: &Place, v_max: i64) -> Result<ZetaRational> {
    let z0 = raw_run(place, v_max, 0)?;
    let z1 = raw_run(place, v_max, 1)?;
    if !z0.eq_exact(&z1) {
        return Err(Error::Internal(
            "raw shell sum changed under class refinement; granularity insufficient".into(),
        ));
    }
    Ok(z0)
}

/// Test-only access to a single granularity run.
pub fn raw_run_at_margin(place: &Place, v_max: i64, margin: u32) -> Result<ZetaRational> {
    raw_run(place, v_max, margin)
}

struct SideData {
    /// accumulated weight·u[x] keyed by (x index, col key for Φ₁-side,
    /// col key for Φ₂-side, det shell)
    m: Vec<HashMap<(u64, u64, i64), CoeffScalar>>,
}

/// Coset representatives of P(O)\K at level p^cf: the affine chart
/// [c : 1] plus the deep chart [1 : c'] with c' ≡ 0 mod p; each ball has
/// measure 1/((p+1)·p^(cf−1)).
fn flag_probes(p: u64, cf: u32) -> (Vec<QMat>, Rat) {
    let mut xs = Vec::new();
    let pc = p.pow(cf);
    for c in 0..pc {
        xs.push(QMat::from_i64(2, 2, &[1, 0, c as i64, 1]));
    }
    for c in (0..pc).step_by(p as usize) {
        xs.push(QMat::from_i64(2, 2, &[0, 1, 1, c as i64]));
    }
    let w = Rat::new(1.into(), (((p + 1) * p.pow(cf - 1)) as i64).into());
    (xs, w)
}

/// Column key mod p^r at lattice scale `scale`; None when an entry falls
/// below the scale (the table value is zero for every partner column).
fn col_key(col: &[Rat], p: u64, r: u32, scale: i64) -> Result<Option<u64>> {
    let mut key = 0u64;
    for e in col {
        let scaled = e * crate::exactnum::rat_pow_p(p, -scale);
        match crate::padic::val_p_rat(&scaled, p) {
            Some(v) if v < 0 => return Ok(None),
            _ => {}
        }
        let d = crate::padic::class_mod(&scaled, p, r)?;
        key = key * p.pow(r) + d;
    }
    Ok(Some(key))
}

#[allow(clippy::too_many_arguments)]
fn raw_run(place: &Place, v_max: i64, margin: u32) -> Result<ZetaRational> {
    let td = &place.td;
    let ctx: &Arc<crate::exactnum::CycloCtx> = &place.ctx;
    let p = ctx.p;
    if td.n() != 2 || td.a() != 1 || td.b() != 1 {
        return Err(Error::Unsupported(
            "raw evaluator is scoped to n = 2, (a,b) = (1,1)".into(),
        ));
    }
    let (BlockRep::Char(_), BlockRep::Char(_)) = (td.single_block_a()?, td.single_block_b()?)
    else {
        return Err(Error::Unsupported(
            "raw evaluator is scoped to character blocks".into(),
        ));
    };
    let r = td.r;
    let phi1 = build_phi1(td, place.budget)?;
    let phi2 = phi2_full_oracle(td, place.budget)?;

    // granularity
    let m_unit = r + margin; // unit classes mod p^{m_unit}
    let m_cong = r + 1 + margin; // p^r-congruence windows mod p^{m_cong}
    let m_frac = margin; // p^{-r}-windows mod p^{m_frac}
    let cf = r + 1 + margin; // flag level
    let (xs, w_x) = flag_probes(p, cf);
    let _ = &w_x;

    let units: Vec<u64> = (1..p.pow(m_unit)).filter(|u| u % p != 0).collect();
    let unit_vol = Rat::new(1.into(), (units.len() as i64).into());

    // per-side accumulation
    let mut sides: Vec<SideData> = Vec::new();
    for side in [VectorSide::Primal, VectorSide::Dual] {
        let mut m: Vec<HashMap<(u64, u64, i64), CoeffScalar>> =
            vec![HashMap::new(); xs.len()];
        // diagonal shells
        for v_a in -v_max..=v_max {
            for &u_a in &units {
                for v_d in -v_max..=v_max {
                    // the outer det shell filter: |val det Z| ≤ V
                    if (v_a + v_d).abs() > v_max {
                        continue;
                    }
                    for &u_d in &units {
                        // congruence window: side 1 uses C ∈ p^r·(.) below and
                        // B ∈ p^{-r}·(.) above; side 2 is the transpose layout
                        let lo_c = r as i64 - margin as i64;
                        let lo_b = -(r as i64) - margin as i64;
                        for tc in 0..p.pow((m_cong as i64 - lo_c) as u32).max(1) {
                            let c_val = Rat::from_integer((tc as i64).into())
                                * crate::exactnum::rat_pow_p(p, lo_c);
                            if !in_window(&c_val, p, m_cong as i64) {
                                continue;
                            }
                            for tb in 0..p.pow((m_frac as i64 - lo_b).max(0) as u32).max(1) {
                                let b_val = Rat::from_integer((tb as i64).into())
                                    * crate::exactnum::rat_pow_p(p, lo_b);
                                if !in_window(&b_val, p, m_frac as i64) {
                                    continue;
                                }
                                accumulate_class(
                                    place, &phi1, &phi2, side, &xs, &mut m, v_a, u_a, v_d, u_d,
                                    &c_val, lo_c, m_cong, &b_val, lo_b, m_frac, &unit_vol,
                                )?;
                            }
                        }
                    }
                }
            }
        }
        sides.push(SideData { m });
    }

    // Φ table lookups by column keys, memoized
    let mut phi1_tab: HashMap<(u64, u64), CoeffScalar> = HashMap::new();
    let mut phi2_tab: HashMap<(u64, u64), CoeffScalar> = HashMap::new();
    let pr = p.pow(r);
    let decode = |key: u64, scale: i64| -> QMat {
        let hi = (key / pr) as i64;
        let lo = (key % pr) as i64;
        let mut col = QMat::zero(2, 1);
        col.set(0, 0, Rat::from_integer(hi.into()) * crate::exactnum::rat_pow_p(p, scale));
        col.set(1, 0, Rat::from_integer(lo.into()) * crate::exactnum::rat_pow_p(p, scale));
        col
    };
    // side tuples carry (Φ₁-portion key, Φ₂-portion key, det shell):
    // Φ₁ pairs Z₁'s a-column with Z₂'s b-column (integral scale), Φ₂ pairs
    // Z₂'s a-column with Z₁'s b-column (p^{-r} scale).
    let mut acc = ZetaRational::zero(ctx);
    for (xi, _) in xs.iter().enumerate() {
        for ((k1_phi1, k1_phi2, v1), m1) in &sides[0].m[xi] {
            for ((k2_phi1, k2_phi2, v2), m2) in &sides[1].m[xi] {
                let f1 = phi1_tab
                    .entry((*k1_phi1, *k2_phi1))
                    .or_insert_with(|| {
                        let c1 = decode(*k1_phi1, 0);
                        let c2 = decode(*k2_phi1, 0);
                        let mut mat = QMat::zero(2, 2);
                        mat.set_block(0, 0, &c1);
                        mat.set_block(0, 1, &c2);
                        phi1.eval(&mat).expect("table eval")
                    })
                    .clone();
                if f1.is_zero() {
                    continue;
                }
                let f2 = phi2_tab
                    .entry((*k2_phi2, *k1_phi2))
                    .or_insert_with(|| {
                        let c1 = decode(*k2_phi2, -(r as i64));
                        let c2 = decode(*k1_phi2, -(r as i64));
                        let mut mat = QMat::zero(2, 2);
                        mat.set_block(0, 0, &c1);
                        mat.set_block(0, 1, &c2);
                        phi2.eval(&mat).expect("table eval")
                    })
                    .clone();
                if f2.is_zero() {
                    continue;
                }
                let c = m1.mul(m2).mul(&f1).mul(&f2);
                acc = acc.add(&TauMono::new(c, 2 * (v1 + v2)).to_zeta());
            }
        }
    }
    let dim = td.dim_tau_w() as i64;
    let vol_g = crate::matgrp::volume(
        &crate::matgrp::SetSpec::Pattern(crate::matgrp::Pattern::gothic_g(&td.da, &td.db, td.r)),
        &crate::matgrp::SetSpec::Pattern(crate::matgrp::Pattern::gl(2)),
        p,
    )?;
    let c_chart = big_cell_constant(1, 1, p);
    let pref = Rat::from_integer((dim * dim).into()) / vol_g * c_chart.clone() * c_chart;
    Ok(acc
        .mul_scalar(&CoeffScalar::from_rat(ctx, pref))
        .mul_scalar(&CoeffScalar::from_rat(ctx, w_x)))
}

fn in_window(x: &Rat, p: u64, hi: i64) -> bool {
    use num::traits::Zero;
    if x.is_zero() {
        return true;
    }
    crate::padic::val_p_rat(x, p).unwrap() < hi
}

#[allow(clippy::too_many_arguments)]
fn accumulate_class(
    place: &Place,
    _phi1: &crate::schwartz::SchwartzFunction,
    _phi2: &crate::schwartz::SchwartzFunction,
    side: VectorSide,
    xs: &[QMat],
    m: &mut [HashMap<(u64, u64, i64), CoeffScalar>],
    v_a: i64,
    u_a: u64,
    v_d: i64,
    u_d: u64,
    c_val: &Rat,
    _lo_c: i64,
    m_cong: u32,
    b_val: &Rat,
    _lo_b: i64,
    m_frac: u32,
    unit_vol: &Rat,
) -> Result<()> {
    let td = &place.td;
    let ctx = &place.ctx;
    let p = ctx.p;
    let r = td.r;
    let a_scalar = Rat::from_integer((u_a as i64).into()) * crate::exactnum::rat_pow_p(p, v_a);
    let d_scalar = Rat::from_integer((u_d as i64).into()) * crate::exactnum::rat_pow_p(p, v_d);
    // assemble Z in the side's chart
    let mut z = QMat::zero(2, 2);
    match side {
        VectorSide::Primal => {
            // Z₁ = ℓ_{C}·diag(A, D)·u_{B}: C from the p^r window, B from
            // the p^{-r} window
            z.set(0, 0, a_scalar.clone());
            z.set(0, 1, &a_scalar * b_val);
            z.set(1, 0, c_val * &a_scalar);
            z.set(1, 1, c_val * &a_scalar * b_val + &d_scalar);
        }
        VectorSide::Dual => {
            // Z₂ = u_{B}·diag(A, D)·ℓ_{C}: the window roles transpose,
            // B₂ runs over the p^r window (c_val), C₂ over p^{-r} (b_val)
            z.set(0, 0, &a_scalar + c_val * &d_scalar * b_val);
            z.set(0, 1, c_val * &d_scalar);
            z.set(1, 0, &d_scalar * b_val);
            z.set(1, 1, d_scalar.clone());
        }
    }
    // column keys: Φ₁ sees column a of Z₁ / column b of Z₂;
    //              Φ₂ sees column b of Z₁ / column a of Z₂.
    let (k_phi1, k_phi2) = match side {
        VectorSide::Primal => (
            col_key(&[z.at(0, 0).clone(), z.at(1, 0).clone()], p, r, 0)?,
            col_key(
                &[z.at(0, 1).clone(), z.at(1, 1).clone()],
                p,
                r,
                -(r as i64),
            )?,
        ),
        VectorSide::Dual => (
            col_key(&[z.at(0, 1).clone(), z.at(1, 1).clone()], p, r, 0)?,
            col_key(
                &[z.at(0, 0).clone(), z.at(1, 0).clone()],
                p,
                r,
                -(r as i64),
            )?,
        ),
    };
    let (Some(k1), Some(k2)) = (k_phi1, k_phi2) else {
        return Ok(());
    };
    // chart measure and character weights
    let v_det = v_a + v_d;
    let chi = match side {
        VectorSide::Primal => td.chi2.clone(),
        VectorSide::Dual => td.chi1.inverse(),
    };
    let udet = (u_a as u128 * u_d as u128 % p.pow(chi.cond.max(1)) as u128) as u64;
    let chi_val = chi.eval_unit(udet).mul(&chi.value_at_p.pow(v_det)?);
    // |det A|^{b}|det D|^{−a} = p^{−v_a + v_d}; |det Z|^{n/2} = p^{−v_det}
    let meas = unit_vol.clone()
        * unit_vol.clone()
        * crate::exactnum::rat_pow_p(p, -(m_cong as i64))
        * crate::exactnum::rat_pow_p(p, -(m_frac as i64))
        * crate::exactnum::rat_pow_p(p, v_d - v_a)
        * crate::exactnum::rat_pow_p(p, -v_det);
    let base = chi_val.mul_rat(&meas);
    // flag-chart probe scalars
    for (xi, x) in xs.iter().enumerate() {
        let y = x.mul(&z);
        let Some(val) = place.tv.value(side, &y)? else {
            continue;
        };
        let coeff = match side {
            VectorSide::Primal => td
                .coeff_a(&val.a_translate)?
                .mul(&td.coeff_b(&val.d_translate)?),
            VectorSide::Dual => {
                let da = td.duals_a[0].coeff_q(&val.a_translate)?;
                let db = td.duals_b[0].coeff_q(&val.d_translate)?;
                da.mul(&db)
            }
        };
        let u_scalar = val.scalar.mul(&coeff);
        if u_scalar.is_zero() {
            continue;
        }
        let entry = m[xi]
            .entry((k1, k2, v_det))
            .or_insert_with(|| CoeffScalar::zero(ctx));
        *entry = entry.add(&base.mul(&u_scalar));
    }
    Ok(())
}

/// Compare the raw truncated sum against the series expansion of a rational
/// function on the degrees stabilized between V−1 and V. Returns the list of
/// compared degrees (non-empty on success).
pub fn raw_matches_series(
    place: &Place,
    v_max: i64,
    reference: &ZetaRational,
) -> Result<Vec<i64>> {
    let lo = -6 * v_max;
    let hi = 6 * v_max;
    let raw_v = raw_zw_truncated(place, v_max)?;
    let raw_prev = raw_zw_truncated(place, v_max - 1)?;
    let cv = raw_v.laurent_coeffs(lo, hi)?;
    let cp = raw_prev.laurent_coeffs(lo, hi)?;
    let cr = reference.laurent_coeffs(lo, hi)?;
    let mut compared = Vec::new();
    for (i, d) in (lo..=hi).enumerate() {
        if cv[i] == cp[i] {
            if cv[i] != cr[i] {
                return Err(Error::Internal(format!(
                    "stabilized coefficient at degree {d} disagrees with the reference expansion"
                )));
            }
            compared.push(d);
        }
    }
    if compared.is_empty() {
        return Err(Error::Internal(
            "no stabilized coefficients to compare".into(),
        ));
    }
    Ok(compared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::assemble::{compute_zw, ZwMode};
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
            truncation: Some(2),
        }
        .build(BUDGET)
        .unwrap()
    }

    #[test]
    fn raw_cross_check_p2_trivial() {
        let place = abelian_place(2);
        let brute = compute_zw(&place, ZwMode::Bruteforce).unwrap();
        let compared = raw_matches_series(&place, 2, &brute).unwrap();
        assert!(!compared.is_empty());
        // degree 0 must be among the stabilized ones at V = 2
        assert!(compared.contains(&0), "{compared:?}");
    }

    #[test]
    fn raw_monotone_stabilization() {
        // increasing V never changes already-stabilized coefficients
        let place = abelian_place(2);
        let z1 = raw_zw_truncated(&place, 1).unwrap();
        let z2 = raw_zw_truncated(&place, 2).unwrap();
        let c1 = z1.laurent_coeffs(-8, 8).unwrap();
        let c2 = z2.laurent_coeffs(-8, 8).unwrap();
        // at least the middle degrees agree between truncations
        let mid: Vec<usize> = (6..=10).collect();
        for i in mid {
            assert_eq!(c1[i], c2[i], "degree {}", i as i64 - 8);
        }
    }
}
