use super::mat::ResMat;
use crate::error::{Error, Result};

/// Congruence level standing for "at every working modulus".
pub const FULL: u32 = 1_000_000;

/// Entry-wise congruence requirement at a working level R: `ZeroMod(k)`
/// means ≡ 0 mod p^min(k,R), `OneMod(k)` means ≡ 1 mod p^min(k,R).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryReq {
    Free,
    ZeroMod(u32),
    OneMod(u32),
}

/// Block-diagonal shape data: a fine partition with an orientation rule.
///
/// `Standard { parts, lower: false }` is the standard block-upper parabolic
/// frame in GL_m; `lower: true` its opposite. `Mixed { da, db }` is the
/// n = a+b frame with a block-upper (a,b) skeleton whose A-corner carries the
/// standard parabolic of `da` and whose D-corner carries the opposite
/// parabolic of `db`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Standard { parts: Vec<usize>, lower: bool },
    Mixed { da: Vec<usize>, db: Vec<usize> },
}

/// Which side of the shape an off-block entry lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Block(usize),
    Radical,
    Opposite,
}

impl Shape {
    pub fn standard(parts: &[usize]) -> Self {
        Shape::Standard {
            parts: parts.to_vec(),
            lower: false,
        }
    }

    pub fn opposite(parts: &[usize]) -> Self {
        Shape::Standard {
            parts: parts.to_vec(),
            lower: true,
        }
    }

    pub fn mixed(da: &[usize], db: &[usize]) -> Self {
        Shape::Mixed {
            da: da.to_vec(),
            db: db.to_vec(),
        }
    }

    pub fn fine(&self) -> Vec<usize> {
        match self {
            Shape::Standard { parts, .. } => parts.clone(),
            Shape::Mixed { da, db } => {
                let mut v = da.clone();
                v.extend_from_slice(db);
                v
            }
        }
    }

    pub fn n(&self) -> usize {
        self.fine().iter().sum()
    }

    pub fn a_side_len(&self) -> usize {
        match self {
            Shape::Standard { .. } => self.fine().len(),
            Shape::Mixed { da, .. } => da.len(),
        }
    }

    fn block_of(&self, idx: usize) -> usize {
        let mut acc = 0;
        for (b, sz) in self.fine().iter().enumerate() {
            acc += sz;
            if idx < acc {
                return b;
            }
        }
        unreachable!("index out of range")
    }

    pub fn block_starts(&self) -> Vec<usize> {
        let mut starts = vec![0];
        for sz in self.fine() {
            starts.push(starts.last().unwrap() + sz);
        }
        starts.pop();
        starts
    }

    /// Classify entry (i, j).
    pub fn region(&self, i: usize, j: usize) -> Region {
        let bi = self.block_of(i);
        let bj = self.block_of(j);
        if bi == bj {
            return Region::Block(bi);
        }
        match self {
            Shape::Standard { lower, .. } => {
                let upper = bi < bj;
                if upper != *lower {
                    Region::Radical
                } else {
                    Region::Opposite
                }
            }
            Shape::Mixed { da, .. } => {
                let t = da.len();
                let a_i = bi < t;
                let a_j = bj < t;
                match (a_i, a_j) {
                    (true, true) => {
                        if bi < bj {
                            Region::Radical
                        } else {
                            Region::Opposite
                        }
                    }
                    // D-corner carries the opposite orientation
                    (false, false) => {
                        if bi > bj {
                            Region::Radical
                        } else {
                            Region::Opposite
                        }
                    }
                    (true, false) => Region::Radical,  // B corner
                    (false, true) => Region::Opposite, // C corner
                }
            }
        }
    }

    /// An order of the fine blocks in which the radical sits strictly above
    /// the diagonal; every shape here is triangularizable this way.
    pub fn elim_order(&self) -> Vec<usize> {
        match self {
            Shape::Standard { parts, lower } => {
                if *lower {
                    (0..parts.len()).rev().collect()
                } else {
                    (0..parts.len()).collect()
                }
            }
            Shape::Mixed { da, db } => {
                let mut v: Vec<usize> = (0..da.len()).collect();
                v.extend((da.len()..da.len() + db.len()).rev());
                v
            }
        }
    }
}

fn eff(k: u32, level: u32) -> u32 {
    k.min(level)
}

/// How a diagonal block is constrained (for exact counting).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockMode {
    Gl,
    One(u32),
}

/// A congruence-pattern subset of GL_n(O): each entry carries a congruence
/// requirement, diagonal fine blocks are either full GL or pro-p congruent
/// to the identity. Membership additionally demands a unit determinant.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub n: usize,
    pub req: Vec<EntryReq>,
    /// (start, size) of the fine diagonal blocks.
    pub blocks: Vec<(usize, usize)>,
    pub mode: Vec<BlockMode>,
}

impl Pattern {
    fn from_shape(shape: &Shape, radical: EntryReq, opposite: EntryReq, mode: BlockMode) -> Self {
        let n = shape.n();
        let mut req = vec![EntryReq::Free; n * n];
        for i in 0..n {
            for j in 0..n {
                req[i * n + j] = match shape.region(i, j) {
                    Region::Block(_) => match mode {
                        BlockMode::Gl => EntryReq::Free,
                        BlockMode::One(k) => {
                            if i == j {
                                EntryReq::OneMod(k)
                            } else {
                                EntryReq::ZeroMod(k)
                            }
                        }
                    },
                    Region::Radical => radical,
                    Region::Opposite => opposite,
                };
            }
        }
        let starts = shape.block_starts();
        let fine = shape.fine();
        Pattern {
            n,
            req,
            blocks: starts.into_iter().zip(fine).collect(),
            mode: vec![mode; shape.fine().len()],
        }
    }

    /// GL_n(O).
    pub fn gl(n: usize) -> Self {
        Self::from_shape(
            &Shape::standard(&[n]),
            EntryReq::Free,
            EntryReq::Free,
            BlockMode::Gl,
        )
    }

    /// P(O): block-triangular integral matrices for the shape.
    pub fn parabolic(shape: &Shape) -> Self {
        Self::from_shape(shape, EntryReq::Free, EntryReq::ZeroMod(FULL), BlockMode::Gl)
    }

    /// The Levi L(O): block-diagonal.
    pub fn levi(shape: &Shape) -> Self {
        Self::from_shape(
            shape,
            EntryReq::ZeroMod(FULL),
            EntryReq::ZeroMod(FULL),
            BlockMode::Gl,
        )
    }

    /// I⁰_{P,r}: congruent to P mod p^r.
    pub fn iwahori0(shape: &Shape, r: u32) -> Self {
        Self::from_shape(shape, EntryReq::Free, EntryReq::ZeroMod(r), BlockMode::Gl)
    }

    /// I_{P,r}: congruent to the unipotent radical mod p^r.
    pub fn pro_p(shape: &Shape, r: u32) -> Self {
        Self::from_shape(shape, EntryReq::Free, EntryReq::ZeroMod(r), BlockMode::One(r))
    }

    /// 𝔊_w(r) inside GL_{a+b}: entries below the fine diagonal blocks in p^r
    /// and the upper-right a×b corner in p^r; other off-block entries free.
    pub fn gothic_g(da: &[usize], db: &[usize], r: u32) -> Self {
        let shape = Shape::mixed(da, db);
        let n = shape.n();
        let a: usize = da.iter().sum();
        let mut pat = Self::from_shape(&shape, EntryReq::Free, EntryReq::Free, BlockMode::Gl);
        let fine = shape.fine();
        let starts = shape.block_starts();
        let block_of = |idx: usize| -> usize {
            let mut b = 0;
            for (bb, (&s, &sz)) in starts.iter().zip(fine.iter()).enumerate() {
                if idx >= s && idx < s + sz {
                    b = bb;
                }
            }
            b
        };
        for i in 0..n {
            for j in 0..n {
                let bi = block_of(i);
                let bj = block_of(j);
                if bi > bj {
                    pat.req[i * n + j] = EntryReq::ZeroMod(r);
                } else if bi < bj && i < a && j >= a {
                    // upper-right a×b corner
                    pat.req[i * n + j] = EntryReq::ZeroMod(r);
                }
            }
        }
        pat
    }

    /// 𝔊_l: [[1,0],[C,1]] with C ∈ p^r M_{b×a}(O).
    pub fn gothic_l(a: usize, b: usize, r: u32) -> Self {
        let n = a + b;
        let mut req = vec![EntryReq::ZeroMod(FULL); n * n];
        for i in 0..n {
            req[i * n + i] = EntryReq::OneMod(FULL);
        }
        for i in a..n {
            for j in 0..a {
                req[i * n + j] = EntryReq::ZeroMod(r);
            }
        }
        Pattern {
            n,
            req,
            blocks: (0..n).map(|i| (i, 1)).collect(),
            mode: vec![BlockMode::One(FULL); n],
        }
    }

    /// 𝔊_u: [[1,B],[0,1]] with B ∈ p^r M_{a×b}(O).
    pub fn gothic_u(a: usize, b: usize, r: u32) -> Self {
        Self::gothic_l(a, b, r).transpose()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut req = vec![EntryReq::Free; n * n];
        for i in 0..n {
            for j in 0..n {
                req[j * n + i] = self.req[i * n + j];
            }
        }
        Pattern {
            n,
            req,
            blocks: self.blocks.clone(),
            mode: self.mode.clone(),
        }
    }

    /// Entry-wise intersection; requires matching fine block structure.
    pub fn intersect(&self, o: &Pattern) -> Result<Pattern> {
        if self.n != o.n || self.blocks != o.blocks {
            return Err(Error::Unsupported(
                "intersection of patterns with different block structure".into(),
            ));
        }
        let merge = |a: EntryReq, b: EntryReq| -> Result<EntryReq> {
            use EntryReq::*;
            Ok(match (a, b) {
                (Free, x) | (x, Free) => x,
                (ZeroMod(x), ZeroMod(y)) => ZeroMod(x.max(y)),
                (OneMod(x), OneMod(y)) => OneMod(x.max(y)),
                (ZeroMod(_), OneMod(_)) | (OneMod(_), ZeroMod(_)) => {
                    return Err(Error::Unsupported("contradictory entry requirements".into()))
                }
            })
        };
        let mut req = Vec::with_capacity(self.req.len());
        for (a, b) in self.req.iter().zip(&o.req) {
            req.push(merge(*a, *b)?);
        }
        let mode = self
            .mode
            .iter()
            .zip(&o.mode)
            .map(|(a, b)| match (a, b) {
                (BlockMode::Gl, BlockMode::Gl) => BlockMode::Gl,
                (BlockMode::One(x), BlockMode::Gl) | (BlockMode::Gl, BlockMode::One(x)) => {
                    BlockMode::One(*x)
                }
                (BlockMode::One(x), BlockMode::One(y)) => BlockMode::One(*x.max(y)),
            })
            .collect();
        Ok(Pattern {
            n: self.n,
            req,
            blocks: self.blocks.clone(),
            mode,
        })
    }

    /// Largest finite congruence level appearing in the requirements.
    pub fn level(&self) -> u32 {
        self.req
            .iter()
            .filter_map(|r| match r {
                EntryReq::Free => None,
                EntryReq::ZeroMod(k) | EntryReq::OneMod(k) => {
                    if *k == FULL {
                        None
                    } else {
                        Some(*k)
                    }
                }
            })
            .max()
            .unwrap_or(0)
            .max(1)
    }

    pub fn is_member(&self, g: &ResMat) -> bool {
        debug_assert_eq!(g.rows, self.n);
        let level = g.k;
        let p = g.p;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = g.at(i, j);
                match self.req[i * self.n + j] {
                    EntryReq::Free => {}
                    EntryReq::ZeroMod(k) => {
                        let m = p.pow(eff(k, level));
                        if v % m != 0 {
                            return false;
                        }
                    }
                    EntryReq::OneMod(k) => {
                        let m = p.pow(eff(k, level));
                        if v % m != 1 % m {
                            return false;
                        }
                    }
                }
            }
        }
        g.det_is_unit()
    }

    /// A topological order of blocks witnessing block-triangularity mod p
    /// (all entries below the order are ≡ 0 mod p). None if no such order.
    pub fn triangular_order(&self) -> Option<Vec<usize>> {
        let b = self.blocks.len();
        let zero_mod_p = |bi: usize, bj: usize| -> bool {
            let (si, szi) = self.blocks[bi];
            let (sj, szj) = self.blocks[bj];
            (si..si + szi).all(|i| {
                (sj..sj + szj).all(|j| {
                    matches!(self.req[i * self.n + j], EntryReq::ZeroMod(k) if k >= 1)
                })
            })
        };
        // Kahn's algorithm on the "must precede" relation: bi precedes bj
        // when the (bj, bi) region is ≡ 0 mod p.
        let mut order = Vec::new();
        let mut placed = vec![false; b];
        for _ in 0..b {
            let mut found = None;
            'cand: for c in 0..b {
                if placed[c] {
                    continue;
                }
                for other in 0..b {
                    if other == c || placed[other] {
                        continue;
                    }
                    // entries in region (other, c) must vanish mod p
                    if !zero_mod_p(other, c) {
                        continue 'cand;
                    }
                }
                found = Some(c);
                break;
            }
            let c = found?;
            placed[c] = true;
            order.push(c);
        }
        Some(order)
    }

    /// Exact count of members at working level R (modulus p^R).
    pub fn count(&self, p: u64, level: u32) -> Result<u128> {
        if self.triangular_order().is_none() {
            return Err(Error::Unsupported(
                "pattern is not block-triangularizable; no product count".into(),
            ));
        }
        let mut acc: u128 = 1;
        // off-block entries
        for i in 0..self.n {
            for j in 0..self.n {
                if self
                    .blocks
                    .iter()
                    .any(|&(s, sz)| i >= s && i < s + sz && j >= s && j < s + sz)
                {
                    continue;
                }
                let free_digits = match self.req[i * self.n + j] {
                    EntryReq::Free => level,
                    EntryReq::ZeroMod(k) | EntryReq::OneMod(k) => level - eff(k, level),
                };
                acc = acc
                    .checked_mul((p as u128).pow(free_digits))
                    .ok_or(Error::Internal("count overflow".into()))?;
            }
        }
        for (b, &(_, sz)) in self.blocks.iter().enumerate() {
            let f = match self.mode[b] {
                BlockMode::Gl => gl_count(sz, p, level)?,
                BlockMode::One(k) => (p as u128).pow((level - eff(k, level)) * (sz * sz) as u32),
            };
            acc = acc
                .checked_mul(f)
                .ok_or(Error::Internal("count overflow".into()))?;
        }
        Ok(acc)
    }
}

/// |GL_m(F_p)| = Π_{i<m} (p^m − p^i).
pub fn gl_count_fp(m: usize, p: u64) -> u128 {
    let pm = (p as u128).pow(m as u32);
    (0..m).fold(1u128, |acc, i| acc * (pm - (p as u128).pow(i as u32)))
}

/// |GL_m(Z/p^R)| = p^{(R−1)m²} · |GL_m(F_p)|.
pub fn gl_count(m: usize, p: u64, level: u32) -> Result<u128> {
    assert!(level >= 1);
    let base = (p as u128)
        .checked_pow((level - 1) * (m * m) as u32)
        .ok_or(Error::Internal("count overflow".into()))?;
    base.checked_mul(gl_count_fp(m, p))
        .ok_or(Error::Internal("count overflow".into()))
}

/// A finite subset of GL_m(O) described at some congruence level:
/// a congruence pattern, or the product set 𝔛 = ᵗI⁰·I⁰ of a standard
/// parabolic (whose membership test is block-LU decomposability with unit
/// pivot blocks).
#[derive(Clone, Debug)]
pub enum SetSpec {
    Pattern(Pattern),
    XSet { parts: Vec<usize>, level: u32 },
}

impl SetSpec {
    pub fn n(&self) -> usize {
        match self {
            SetSpec::Pattern(p) => p.n,
            SetSpec::XSet { parts, .. } => parts.iter().sum(),
        }
    }

    pub fn level(&self) -> u32 {
        match self {
            SetSpec::Pattern(p) => p.level(),
            SetSpec::XSet { level, .. } => (*level).max(1),
        }
    }

    pub fn is_member(&self, g: &ResMat) -> bool {
        match self {
            SetSpec::Pattern(p) => p.is_member(g),
            SetSpec::XSet { parts, .. } => {
                super::factorize::block_ldu(g, &Shape::standard(parts), None).is_ok()
            }
        }
    }

    pub fn count(&self, p: u64, level: u32) -> Result<u128> {
        match self {
            SetSpec::Pattern(pat) => pat.count(p, level),
            SetSpec::XSet { parts, .. } => {
                // unique factorization 𝔛 = 𝔛_l · K · 𝔛_u
                let mut off = 0usize;
                for (i, a) in parts.iter().enumerate() {
                    for (j, b) in parts.iter().enumerate() {
                        if i < j {
                            off += a * b;
                        }
                    }
                }
                let mut acc = (p as u128)
                    .checked_pow(2 * (off as u32) * level)
                    .ok_or(Error::Internal("count overflow".into()))?;
                for &sz in parts {
                    acc = acc
                        .checked_mul(gl_count(sz, p, level)?)
                        .ok_or(Error::Internal("count overflow".into()))?;
                }
                Ok(acc)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_counts() {
        assert_eq!(gl_count_fp(1, 3), 2);
        assert_eq!(gl_count_fp(2, 2), 6);
        assert_eq!(gl_count_fp(2, 3), 48);
        assert_eq!(gl_count_fp(3, 2), 168);
        assert_eq!(gl_count(2, 2, 2).unwrap(), 96);
    }

    #[test]
    fn borel_iwahori_counts_gl2_p3() {
        let b = Shape::standard(&[1, 1]);
        // |I⁰_{B,1} mod 3| = |B(F_3)| = 12
        assert_eq!(Pattern::iwahori0(&b, 1).count(3, 1).unwrap(), 12);
        // |I_{B,1} mod 3| = 3 (unipotent)
        assert_eq!(Pattern::pro_p(&b, 1).count(3, 1).unwrap(), 3);
        // torus congruence subgroup
        let t = Pattern::iwahori0(&b, 1)
            .intersect(&Pattern::iwahori0(&b, 1).transpose())
            .unwrap();
        assert_eq!(t.count(3, 1).unwrap(), 4);
    }

    #[test]
    fn mixed_shape_regions() {
        // n = 3, da = (2), db = (1): B-corner radical, C opposite,
        // D-side trivial (single block).
        let s = Shape::mixed(&[2], &[1]);
        assert_eq!(s.region(0, 1), Region::Block(0));
        assert_eq!(s.region(0, 2), Region::Radical);
        assert_eq!(s.region(2, 0), Region::Opposite);
        assert_eq!(s.elim_order(), vec![0, 1]);

        // da = (1,1), db = (1,1): D-corner opposite orientation
        let s = Shape::mixed(&[1, 1], &[1, 1]);
        assert_eq!(s.region(2, 3), Region::Opposite);
        assert_eq!(s.region(3, 2), Region::Radical);
        assert_eq!(s.elim_order(), vec![0, 1, 3, 2]);
    }

    #[test]
    fn mixed_iwahori_count_stability() {
        // volume of a pattern is stable when the working level rises
        let s = Shape::mixed(&[1], &[1]);
        let iw = Pattern::iwahori0(&s, 1);
        let v1 = Rat_from(iw.count(3, 1).unwrap()) / Rat_from(gl_count(2, 3, 1).unwrap());
        let v2 = Rat_from(iw.count(3, 2).unwrap()) / Rat_from(gl_count(2, 3, 2).unwrap());
        assert_eq!(v1, v2);
    }

    fn Rat_from(x: u128) -> crate::exactnum::Rat {
        crate::exactnum::Rat::from_integer(num::BigInt::from(x))
    }
}
