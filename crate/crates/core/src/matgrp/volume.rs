use super::mat::ResMat;
use super::spec::{gl_count_fp, EntryReq, Pattern, SetSpec, Shape};
use crate::error::{Error, Result};
use crate::exactnum::Rat;
use num::BigInt;

fn rat_u128(x: u128) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

/// Exact member count of a set at working level R (≥ the set's own level).
pub fn count(spec: &SetSpec, p: u64, level: u32) -> Result<u128> {
    assert!(level >= spec.level(), "working level below the set's level");
    spec.count(p, level)
}

/// Haar volume of `spec` inside `ambient`, normalized by counting at a
/// common working level.
pub fn volume(spec: &SetSpec, ambient: &SetSpec, p: u64) -> Result<Rat> {
    let level = spec.level().max(ambient.level());
    Ok(rat_u128(count(spec, p, level)?) / rat_u128(count(ambient, p, level)?))
}

/// Volume of `spec` inside GL_n(O).
pub fn volume_in_gl(spec: &SetSpec, p: u64) -> Result<Rat> {
    volume(spec, &SetSpec::Pattern(Pattern::gl(spec.n())), p)
}

/// Enumerate all members at level R (modulus p^R), emitted in lexicographic
/// order on the entry vector. Errors when the candidate space exceeds the
/// budget.
pub fn enumerate(spec: &SetSpec, p: u64, level: u32, budget: u128) -> Result<Vec<ResMat>> {
    let n = spec.n();
    let m = (p as u128).pow(level);
    // per-entry candidate lists (pattern congruences prune the space)
    let mut cands: Vec<Vec<u64>> = Vec::with_capacity(n * n);
    match spec {
        SetSpec::Pattern(pat) => {
            for idx in 0..n * n {
                let list: Vec<u64> = match pat.req[idx] {
                    EntryReq::Free => (0..m as u64).collect(),
                    EntryReq::ZeroMod(k) => {
                        let step = p.pow(k.min(level));
                        (0..m as u64).step_by(step as usize).collect()
                    }
                    EntryReq::OneMod(k) => {
                        let step = p.pow(k.min(level));
                        (0..m as u64)
                            .step_by(step as usize)
                            .map(|x| (x + 1) % m as u64)
                            .map(|x| x)
                            .collect::<Vec<_>>()
                            .into_iter()
                            .collect()
                    }
                };
                cands.push(list);
            }
        }
        SetSpec::XSet { .. } => {
            for _ in 0..n * n {
                cands.push((0..m as u64).collect());
            }
        }
    }
    let mut space: u128 = 1;
    for c in &cands {
        space = space
            .checked_mul(c.len() as u128)
            .ok_or(Error::Budget { required: u128::MAX, budget })?;
    }
    if space > budget {
        return Err(Error::Budget { required: space, budget });
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; n * n];
    'outer: loop {
        let mut g = ResMat::zero(n, n, p, level);
        for (pos, &i) in idx.iter().enumerate() {
            g.e[pos] = cands[pos][i];
        }
        if spec.is_member(&g) {
            out.push(g);
        }
        // odometer, last entry fastest (yields lexicographic order)
        let mut pos = n * n;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cands[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
    Ok(out)
}

/// The big-cell constant c_{a,b} = p^{2ab}·|GL_a(F_p)|·|GL_b(F_p)|/|GL_n(F_p)|:
/// the additive volume of the (a,b) cell, i.e. the ratio between the standard
/// GL_n Haar measure and the product chart measure dC·d×A·d×D·dB. It equals
/// the (a,b) two-block ratio Vol(I⁰)Vol(ᵗI⁰)/Vol(I⁰∩ᵗI⁰) at any level.
pub fn big_cell_constant(a: usize, b: usize, p: u64) -> Rat {
    let n = a + b;
    rat_u128((p as u128).pow(2 * (a * b) as u32) * gl_count_fp(a, p) * gl_count_fp(b, p))
        / rat_u128(gl_count_fp(n, p))
}

#[derive(Debug, Clone)]
pub struct VolumeIdentityReport {
    pub p: u64,
    pub r: u32,
    pub da: Vec<usize>,
    pub db: Vec<usize>,
    /// (Vol 𝔛, block ratio, brute count if within budget) per side.
    pub side_a: (Rat, Rat, Option<u128>),
    pub side_b: (Rat, Rat, Option<u128>),
    pub assembled_lhs: Rat,
    pub assembled_rhs: Rat,
    pub pass: bool,
}

fn block_ratio(parts: &[usize], p: u64, r: u32) -> Result<Rat> {
    let shape = Shape::standard(parts);
    let i0 = Pattern::iwahori0(&shape, r);
    let ti0 = i0.transpose();
    let cap = i0.intersect(&ti0)?;
    let m: usize = parts.iter().sum();
    let gl = SetSpec::Pattern(Pattern::gl(m));
    let v_i0 = volume(&SetSpec::Pattern(i0), &gl, p)?;
    let v_ti0 = volume(&SetSpec::Pattern(ti0), &gl, p)?;
    let v_cap = volume(&SetSpec::Pattern(cap), &gl, p)?;
    Ok(v_i0 * v_ti0 / v_cap)
}

fn mixed_ratio(da: &[usize], db: &[usize], p: u64, r: u32) -> Result<Rat> {
    let shape = Shape::mixed(da, db);
    let i0 = Pattern::iwahori0(&shape, r);
    let ti0 = i0.transpose();
    let cap = i0.intersect(&ti0)?;
    let n = shape.n();
    let gl = SetSpec::Pattern(Pattern::gl(n));
    let v_i0 = volume(&SetSpec::Pattern(i0), &gl, p)?;
    let v_ti0 = volume(&SetSpec::Pattern(ti0), &gl, p)?;
    let v_cap = volume(&SetSpec::Pattern(cap), &gl, p)?;
    Ok(v_i0 * v_ti0 / v_cap)
}

/// Verify, exactly:
///   per block side: Vol(𝔛) = Vol(I⁰)·Vol(ᵗI⁰)/Vol(I⁰ ∩ ᵗI⁰),
///   assembled:      Vol(𝔛^{(1)})·Vol(𝔛^{(4)})·c_{a,b} = n-level ratio for
///                   the mixed parahoric subgroup.
/// Brute enumeration cross-checks the 𝔛 counts whenever the candidate space
/// fits the budget.
pub fn volume_identity_check(
    da: &[usize],
    db: &[usize],
    p: u64,
    r: u32,
    budget: u128,
) -> Result<VolumeIdentityReport> {
    let a: usize = da.iter().sum();
    let b: usize = db.iter().sum();
    let side = |parts: &[usize]| -> Result<(Rat, Rat, Option<u128>)> {
        let m: usize = parts.iter().sum();
        let x = SetSpec::XSet {
            parts: parts.to_vec(),
            level: r,
        };
        let vol_x = volume_in_gl(&x, p)?;
        let ratio = block_ratio(parts, p, r)?;
        let brute = match enumerate(&x, p, r.max(1), budget) {
            Ok(list) => {
                let formula = count(&x, p, r.max(1))?;
                if list.len() as u128 != formula {
                    return Err(Error::Internal(format!(
                        "X-set count mismatch: brute {} vs formula {formula}",
                        list.len()
                    )));
                }
                Some(list.len() as u128)
            }
            Err(Error::Budget { .. }) => None,
            Err(e) => return Err(e),
        };
        let _ = m;
        Ok((vol_x, ratio, brute))
    };
    let side_a = side(da)?;
    let side_b = side(db)?;
    let c = big_cell_constant(a, b, p);
    let lhs = side_a.0.clone() * side_b.0.clone() * c;
    let rhs = mixed_ratio(da, db, p, r)?;
    let pass = side_a.0 == side_a.1 && side_b.0 == side_b.1 && lhs == rhs;
    Ok(VolumeIdentityReport {
        p,
        r,
        da: da.to_vec(),
        db: db.to_vec(),
        side_a,
        side_b,
        assembled_lhs: lhs,
        assembled_rhs: rhs,
        pass,
    })
}
