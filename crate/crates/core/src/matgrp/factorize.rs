use super::mat::{QMat, ResMat};
use super::spec::{Pattern, Shape};
use crate::error::{Error, Result};
use crate::padic::val_p_rat;
use num::traits::Zero;

fn cumulative(sizes: &[usize]) -> Vec<usize> {
    let mut starts = vec![0];
    for &s in sizes {
        starts.push(starts.last().unwrap() + s);
    }
    starts.pop();
    starts
}

/// Block LDU factorization of `g` relative to `shape`: g = lower·levi·upper
/// with `lower` in the opposite unipotent part, `levi` block-diagonal and
/// `upper` in the unipotent radical. Errors when some pivot block is not
/// invertible (i.e. g is outside the big cell 𝔛 = ᵗI⁰·I⁰).
///
/// When `strict_level = Some(r)` the input must lie in I⁰_{P,r}; the lower
/// factor then automatically has its entries in p^r.
pub fn block_ldu(
    g: &ResMat,
    shape: &Shape,
    strict_level: Option<u32>,
) -> Result<(ResMat, ResMat, ResMat)> {
    let n = shape.n();
    assert_eq!(g.rows, n);
    if let Some(r) = strict_level {
        if !Pattern::iwahori0(shape, r).is_member(g) {
            return Err(Error::NotInSet(format!(
                "matrix is not in the level-{r} parahoric congruence subgroup"
            )));
        }
    }
    let fine = shape.fine();
    let order = shape.elim_order();
    let sizes: Vec<usize> = order.iter().map(|&b| fine[b]).collect();
    let old_starts = cumulative(&fine);
    // perm[new index] = old index
    let mut perm = Vec::with_capacity(n);
    for &b in &order {
        for i in 0..fine[b] {
            perm.push(old_starts[b] + i);
        }
    }
    let permute = |m: &ResMat| -> ResMat {
        let mut out = ResMat::zero(n, n, g.p, g.k);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, m.at(perm[i], perm[j]));
            }
        }
        out
    };
    let unpermute = |m: &ResMat| -> ResMat {
        let mut out = ResMat::zero(n, n, g.p, g.k);
        for i in 0..n {
            for j in 0..n {
                out.set(perm[i], perm[j], m.at(i, j));
            }
        }
        out
    };

    let h = permute(g);
    let t = sizes.len();
    let starts = cumulative(&sizes);
    let mut m = h.clone();
    let mut l = ResMat::identity(n, g.p, g.k);
    for j in 0..t {
        let pj = m.block(starts[j], starts[j], sizes[j], sizes[j]);
        let pj_inv = pj
            .inverse()
            .map_err(|_| Error::NotInSet("pivot block not invertible (outside the X-set)".into()))?;
        for i in j + 1..t {
            let f = m.block(starts[i], starts[j], sizes[i], sizes[j]).mul(&pj_inv);
            l.set_block(starts[i], starts[j], &f);
            for k in j..t {
                let cur = m.block(starts[i], starts[k], sizes[i], sizes[k]);
                let sub = f.mul(&m.block(starts[j], starts[k], sizes[j], sizes[k]));
                m.set_block(starts[i], starts[k], &cur.sub(&sub));
            }
        }
    }
    // m is block upper; split into diag · unipotent-upper
    let mut d = ResMat::identity(n, g.p, g.k);
    let mut u = ResMat::identity(n, g.p, g.k);
    for j in 0..t {
        let dj = m.block(starts[j], starts[j], sizes[j], sizes[j]);
        d.set_block(starts[j], starts[j], &dj);
        let dj_inv = dj.inverse().map_err(|_| {
            Error::NotInSet("diagonal block not invertible (outside the X-set)".into())
        })?;
        for k in j + 1..t {
            let blk = dj_inv.mul(&m.block(starts[j], starts[k], sizes[j], sizes[k]));
            u.set_block(starts[j], starts[k], &blk);
        }
    }
    let (lower, levi, upper) = (unpermute(&l), unpermute(&d), unpermute(&u));
    debug_assert_eq!(lower.mul(&levi).mul(&upper), *g);
    Ok((lower, levi, upper))
}

/// Factor g ∈ I⁰_{P,r'} as (lower, levi, upper); errors off the subgroup.
pub fn iwahori_factorize(
    g: &ResMat,
    shape: &Shape,
    level: u32,
) -> Result<(ResMat, ResMat, ResMat)> {
    block_ldu(g, shape, Some(level))
}

/// Factor X ∈ 𝔛 = ᵗI⁰·I⁰ (standard parabolic of `parts`) as (γ₁, k, γ₂)
/// with γ₁ lower-unipotent, k in the Levi, γ₂ upper-unipotent. The failure
/// of a pivot block is exactly non-membership, which makes this the
/// membership test used by the extended matrix coefficients.
pub fn x_set_factorize(x: &ResMat, parts: &[usize]) -> Result<(ResMat, ResMat, ResMat)> {
    block_ldu(x, &Shape::standard(parts), None)
}

/// δ_P(l) for block-diagonal l as an exponent: δ_P(l) = p^e with
/// e = −Σ_k v_k·c_k, where v_k = val_p(det l_k) and
/// c_k = −Σ_{i<k} n_i + Σ_{j>k} n_j.
pub fn modulus_character(l: &QMat, parts: &[usize], p: u64) -> Result<i64> {
    let n: usize = parts.iter().sum();
    assert_eq!(l.rows, n);
    let starts = cumulative(parts);
    // reject off-block entries
    for i in 0..n {
        for j in 0..n {
            let inside = starts
                .iter()
                .zip(parts)
                .any(|(&s, &sz)| i >= s && i < s + sz && j >= s && j < s + sz);
            if !inside && !l.at(i, j).is_zero() {
                return Err(Error::NotInSet("matrix is not block-diagonal".into()));
            }
        }
    }
    let mut e: i64 = 0;
    for (k, (&s, &sz)) in starts.iter().zip(parts).enumerate() {
        let det = l.block(s, s, sz, sz).det();
        let v = val_p_rat(&det, p).ok_or(Error::DivisionByZero)?;
        let before: usize = parts[..k].iter().sum();
        let after: usize = parts[k + 1..].iter().sum();
        let c = -(before as i64) + after as i64;
        e -= v * c;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::Rat;

    #[test]
    fn identity_factors_trivially() {
        let g = ResMat::identity(2, 3, 2);
        let (l, d, u) = iwahori_factorize(&g, &Shape::standard(&[1, 1]), 1).unwrap();
        assert_eq!(l, g);
        assert_eq!(d, g);
        assert_eq!(u, g);
    }

    #[test]
    fn antidiagonal_is_rejected() {
        let g = ResMat::from_entries(2, 2, 3, 1, vec![0, 1, 1, 0]);
        assert!(iwahori_factorize(&g, &Shape::standard(&[1, 1]), 1).is_err());
        // and it is outside the X-set as well (pivot 0)
        assert!(x_set_factorize(&g, &[1, 1]).is_err());
    }

    #[test]
    fn factorization_multiplies_back_exhaustively() {
        // every member of I⁰_{B,1} in GL_2(Z/9) factors and multiplies back
        let shape = Shape::standard(&[1, 1]);
        let pat = Pattern::iwahori0(&shape, 1);
        let all = super::super::volume::enumerate(
            &super::super::spec::SetSpec::Pattern(pat.clone()),
            3,
            2,
            1 << 20,
        )
        .unwrap();
        let mut count = 0;
        for g in &all {
            let (l, d, u) = iwahori_factorize(g, &shape, 1).unwrap();
            assert_eq!(l.mul(&d).mul(&u), *g);
            // lower part has its entry in p^1
            assert_eq!(l.at(1, 0) % 3, 0);
            assert_eq!(u.at(1, 0), 0);
            count += 1;
        }
        assert_eq!(count as u128, pat.count(3, 2).unwrap());
    }

    #[test]
    fn x_set_cross_oracle_with_iwahori() {
        // X ∈ I⁰ factors with trivial lower part matching iwahori_factorize
        let g = ResMat::from_entries(2, 2, 3, 2, vec![2, 5, 3, 4]);
        let shape = Shape::standard(&[1, 1]);
        assert!(Pattern::iwahori0(&shape, 1).is_member(&g));
        let (l1, d1, u1) = iwahori_factorize(&g, &shape, 1).unwrap();
        let (l2, d2, u2) = x_set_factorize(&g, &[1, 1]).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(d1, d2);
        assert_eq!(u1, u2);
    }

    #[test]
    fn mixed_shape_factorization() {
        // n = 2 mixed shape (1),(1): P_w = upper Borel
        let shape = Shape::mixed(&[1], &[1]);
        let g = ResMat::from_entries(2, 2, 3, 2, vec![1, 4, 3, 2]);
        let (l, d, u) = iwahori_factorize(&g, &shape, 1).unwrap();
        assert_eq!(l.mul(&d).mul(&u), g);
        // lower-left entry of l in p^r, upper of u free
        assert_eq!(l.at(0, 1), 0);
        assert_eq!(l.at(1, 0) % 3, 0);
        assert_eq!(u.at(1, 0), 0);
    }

    #[test]
    fn modulus_character_examples() {
        // GL_2, B, l = diag(p, 1): δ = p^{-1}
        let mut l = QMat::identity(2);
        l.set(0, 0, Rat::from_integer(3.into()));
        assert_eq!(modulus_character(&l, &[1, 1], 3).unwrap(), -1);
        // identity: exponent 0
        assert_eq!(modulus_character(&QMat::identity(2), &[1, 1], 3).unwrap(), 0);
        // scalar z·id: exponents cancel
        let z = QMat::identity(2).scale(&Rat::from_integer(9.into()));
        assert_eq!(modulus_character(&z, &[1, 1], 3).unwrap(), 0);
        // non-block-diagonal input rejected
        let bad = QMat::from_i64(2, 2, &[1, 1, 0, 1]);
        assert!(modulus_character(&bad, &[1, 1], 3).is_err());
    }
}
