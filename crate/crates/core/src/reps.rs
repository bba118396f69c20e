//! Exact finite-dimensional representations: multiplicative characters of
//! Q_p^*, representation tables of finite matrix groups, depth-zero cuspidal
//! representations of GL_2(F_p) cut out of the Gelfand-Graev module by the
//! central idempotent of the corresponding cuspidal character, and compactly
//! induced supercuspidal matrix coefficients.

use crate::error::{Error, Result};
use crate::exactnum::{CMat, CoeffScalar, CycloCtx, Rat};
use crate::matgrp::{enumerate, Pattern, QMat, ResMat, SetSpec};
use crate::padic::{unit_class, val_p_rat};
use std::collections::HashMap;
use std::sync::Arc;

/// A multiplicative character of Q_p^*: conductor exponent, value table on
/// (Z/p^cond)^* and the (free) value at p.
#[derive(Clone)]
pub struct CharacterDatum {
    pub p: u64,
    pub cond: u32,
    /// values on units mod p^cond, indexed by the residue itself; empty for
    /// conductor 0.
    table: HashMap<u64, CoeffScalar>,
    pub value_at_p: CoeffScalar,
    pub ctx: Arc<CycloCtx>,
}

/// Generators of (Z/p^m)^* with their orders: a primitive root for odd p;
/// (-1, 5) for p = 2, m ≥ 3; (-1) alone for p = 2, m = 2.
pub fn unit_group_generators(p: u64, m: u32) -> Vec<(u64, u64)> {
    if m == 0 {
        return vec![];
    }
    let pm = p.pow(m);
    if p == 2 {
        return match m {
            1 => vec![],
            2 => vec![(3, 2)],
            _ => vec![(pm - 1, 2), (5, 1u64 << (m - 2))],
        };
    }
    let phi = pm / p * (p - 1);
    'cand: for g in 2..pm {
        if g % p == 0 {
            continue;
        }
        let mut x = g;
        for _ in 1..phi {
            if x == 1 {
                continue 'cand;
            }
            x = (x as u128 * g as u128 % pm as u128) as u64;
        }
        if x == 1 {
            return vec![(g, phi)];
        }
    }
    unreachable!("no primitive root found");
}

impl CharacterDatum {
    /// The unramified character with a given value at p.
    pub fn unramified(ctx: &Arc<CycloCtx>, value_at_p: CoeffScalar) -> Result<Self> {
        if value_at_p.is_zero() {
            return Err(Error::Config("character value at p must be nonzero".into()));
        }
        Ok(CharacterDatum {
            p: ctx.p,
            cond: 0,
            table: HashMap::new(),
            value_at_p,
            ctx: ctx.clone(),
        })
    }

    pub fn trivial(ctx: &Arc<CycloCtx>) -> Self {
        Self::unramified(ctx, CoeffScalar::one(ctx)).unwrap()
    }

    /// Build from images of the standard generators of (Z/p^cond)^*; each
    /// image is the stated power of ζ_{order of that generator}. The stated
    /// conductor must be minimal; a non-minimal table is rejected.
    pub fn from_generator_images(
        ctx: &Arc<CycloCtx>,
        cond: u32,
        image_pows: &[i64],
        value_at_p: CoeffScalar,
    ) -> Result<Self> {
        if value_at_p.is_zero() {
            return Err(Error::Config("character value at p must be nonzero".into()));
        }
        let p = ctx.p;
        let gens = unit_group_generators(p, cond);
        if gens.len() != image_pows.len() {
            return Err(Error::Config(format!(
                "(Z/{p}^{cond})^* needs {} generator image(s), got {}",
                gens.len(),
                image_pows.len()
            )));
        }
        let pm = p.pow(cond.max(1));
        let mut table = HashMap::new();
        if cond >= 1 {
            let mut stack: Vec<(u64, CoeffScalar)> = vec![(1, CoeffScalar::one(ctx))];
            for (&(g, ord), &pow) in gens.iter().zip(image_pows) {
                let img = CoeffScalar::root_of_unity(ctx, ord, pow)?;
                let mut next = Vec::new();
                for (u, v) in &stack {
                    let mut cu = *u;
                    let mut cv = v.clone();
                    for _ in 0..ord {
                        next.push((cu, cv.clone()));
                        cu = (cu as u128 * g as u128 % pm as u128) as u64;
                        cv = cv.mul(&img);
                    }
                }
                stack = next;
            }
            for (u, v) in stack {
                table.insert(u, v);
            }
            let phi = if p == 2 { pm / 2 } else { pm / p * (p - 1) };
            if table.len() as u64 != phi {
                return Err(Error::Internal("unit table incomplete".into()));
            }
        }
        let chi = CharacterDatum {
            p,
            cond,
            table,
            value_at_p,
            ctx: ctx.clone(),
        };
        if !chi.conductor_is_minimal() {
            return Err(Error::Config(format!(
                "stated conductor {cond} is not minimal for the given table"
            )));
        }
        Ok(chi)
    }

    /// Conductor minimality: the table is nontrivial on units ≡ 1 mod p^(cond−1).
    fn conductor_is_minimal(&self) -> bool {
        if self.cond == 0 {
            return true;
        }
        let pm = self.p.pow(self.cond);
        let step = self.p.pow(self.cond - 1);
        (0..self.p)
            .map(|t| (1 + t * step) % pm)
            .filter(|u| u % self.p != 0)
            .any(|u| !self.table[&u].is_one())
    }

    pub fn is_unramified(&self) -> bool {
        self.cond == 0
    }

    /// Value on a unit residue (any representative prime to p).
    pub fn eval_unit(&self, u: u64) -> CoeffScalar {
        if self.cond == 0 {
            return CoeffScalar::one(&self.ctx);
        }
        let pm = self.p.pow(self.cond);
        self.table[&(u % pm)].clone()
    }

    /// χ(x) = value_at_p^{val(x)} · table(unit part); errors on 0.
    pub fn eval_rat(&self, x: &Rat) -> Result<CoeffScalar> {
        let v = val_p_rat(x, self.p).ok_or(Error::DivisionByZero)?;
        let u = unit_class(x, self.p, self.cond.max(1))?;
        Ok(self.value_at_p.pow(v)?.mul(&self.eval_unit(u)))
    }

    /// χ(det g) for an exact matrix.
    pub fn eval_det(&self, g: &QMat) -> Result<CoeffScalar> {
        self.eval_rat(&g.det())
    }

    pub fn inverse(&self) -> Self {
        CharacterDatum {
            p: self.p,
            cond: self.cond,
            table: self
                .table
                .iter()
                .map(|(u, v)| (*u, v.inv().expect("root of unity")))
                .collect(),
            value_at_p: self.value_at_p.inv().expect("nonzero"),
            ctx: self.ctx.clone(),
        }
    }

    /// Pointwise product, with the conductor re-minimized (e.g. the square
    /// of the quadratic character is unramified).
    pub fn mul(&self, o: &Self) -> Self {
        let cond = self.cond.max(o.cond);
        let mut out = CharacterDatum {
            p: self.p,
            cond,
            table: HashMap::new(),
            value_at_p: self.value_at_p.mul(&o.value_at_p),
            ctx: self.ctx.clone(),
        };
        if cond >= 1 {
            let pm = self.p.pow(cond);
            for u in 0..pm {
                if u % self.p == 0 {
                    continue;
                }
                out.table.insert(u, self.eval_unit(u).mul(&o.eval_unit(u)));
            }
        }
        out.minimize();
        out
    }

    fn minimize(&mut self) {
        while self.cond >= 1 && !self.conductor_is_minimal() {
            let new_cond = self.cond - 1;
            let pm_new = self.p.pow(new_cond.max(1));
            let mut table = HashMap::new();
            if new_cond >= 1 {
                for u in 0..pm_new {
                    if u % self.p == 0 {
                        continue;
                    }
                    table.insert(u, self.eval_unit(u));
                }
            }
            self.cond = new_cond;
            self.table = table;
        }
    }

    pub fn at_minus_one(&self) -> CoeffScalar {
        if self.cond == 0 {
            CoeffScalar::one(&self.ctx)
        } else {
            self.eval_unit(self.p.pow(self.cond) - 1)
        }
    }
}

/// A finite matrix group GL_m(Z/p^k), fully enumerated with an index.
pub struct FinGL {
    pub m: usize,
    pub p: u64,
    pub k: u32,
    pub elems: Vec<ResMat>,
    index: HashMap<u128, usize>,
}

impl FinGL {
    pub fn new(m: usize, p: u64, k: u32, budget: u128) -> Result<Arc<Self>> {
        let elems = enumerate(&SetSpec::Pattern(Pattern::gl(m)), p, k, budget)?;
        let index = elems
            .iter()
            .enumerate()
            .map(|(i, g)| (g.encode(), i))
            .collect();
        Ok(Arc::new(FinGL { m, p, k, elems, index }))
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn index_of(&self, g: &ResMat) -> Result<usize> {
        let g = if g.k == self.k { g.clone() } else { g.reduce_to(self.k) };
        self.index
            .get(&g.encode())
            .copied()
            .ok_or_else(|| Error::NotInSet("matrix not in the finite group".into()))
    }
}

/// An exact matrix representation of a finite matrix group.
pub struct GroupRep {
    pub grp: Arc<FinGL>,
    pub dim: usize,
    pub mats: Vec<CMat>,
    pub ctx: Arc<CycloCtx>,
}

impl GroupRep {
    pub fn apply(&self, g: &ResMat) -> Result<&CMat> {
        Ok(&self.mats[self.grp.index_of(g)?])
    }

    pub fn trace(&self, g: &ResMat) -> Result<CoeffScalar> {
        Ok(self.apply(g)?.trace())
    }

    /// ρ(gh) = ρ(g)ρ(h), exhaustively (the groups here are small).
    pub fn check_multiplicative(&self) -> Result<()> {
        for (i, g) in self.grp.elems.iter().enumerate() {
            for (j, h) in self.grp.elems.iter().enumerate() {
                let gh = self.grp.index_of(&g.mul(h))?;
                if self.mats[i].mul(&self.mats[j]) != self.mats[gh] {
                    return Err(Error::Internal(format!(
                        "representation not multiplicative at pair ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Σ_g |tr ρ(g)|² = |G| certifies irreducibility.
    pub fn check_irreducible(&self) -> Result<()> {
        let ctx = &self.ctx;
        let mut acc = CoeffScalar::zero(ctx);
        for m in &self.mats {
            acc = acc.add(&m.trace().norm_sq());
        }
        let expect = CoeffScalar::from_i64(ctx, self.grp.order() as i64);
        if acc != expect {
            return Err(Error::Internal(format!(
                "irreducibility certificate failed: sum of |tr|^2 = {acc}, |G| = {expect}"
            )));
        }
        Ok(())
    }

    /// Inverse-transpose model of the contragredient.
    pub fn contragredient(&self) -> Result<GroupRep> {
        let mut mats = Vec::with_capacity(self.mats.len());
        for m in &self.mats {
            mats.push(m.inverse()?.transpose());
        }
        Ok(GroupRep {
            grp: self.grp.clone(),
            dim: self.dim,
            mats,
            ctx: self.ctx.clone(),
        })
    }

    pub fn character(&self) -> Vec<CoeffScalar> {
        self.mats.iter().map(|m| m.trace()).collect()
    }
}

/// g ↦ χ(det g) as a one-dimensional representation of GL_block(Z/p^level).
pub fn character_rep(chi: &CharacterDatum, block: usize, budget: u128) -> Result<GroupRep> {
    let level = chi.cond.max(1);
    let grp = FinGL::new(block, chi.p, level, budget)?;
    let ctx = chi.ctx.clone();
    let mut mats = Vec::with_capacity(grp.order());
    for g in &grp.elems {
        let mut m = CMat::zero(&ctx, 1, 1);
        *m.at_mut(0, 0) = chi.eval_unit(g.det());
        mats.push(m);
    }
    Ok(GroupRep { grp, dim: 1, mats, ctx })
}

/// Arithmetic in F_{p²} = F_p[t]/(t² − c1·t − c0), elements indexed a + p·b.
struct Fp2 {
    p: u64,
    c0: u64,
    c1: u64,
}

impl Fp2 {
    fn new(p: u64) -> Self {
        for c1 in 0..p {
            'c0: for c0 in 0..p {
                for x in 0..p {
                    if (x * x % p + (p - 1) * c1 % p * x % p + (p - c0) % p) % p == 0 {
                        continue 'c0;
                    }
                }
                return Fp2 { p, c0, c1 };
            }
        }
        unreachable!("no irreducible quadratic over F_p");
    }

    fn card(&self) -> u64 {
        self.p * self.p
    }

    fn embed(&self, z: u64) -> u64 {
        z % self.p
    }

    fn mul(&self, x: u64, y: u64) -> u64 {
        let p = self.p;
        let (a, b) = (x % p, x / p);
        let (c, d) = (y % p, y / p);
        let bd = b * d % p;
        let lo = (a * c + bd * self.c0) % p;
        let hi = (a * d + b * c + bd * self.c1) % p;
        lo + p * hi
    }

    fn pow(&self, x: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// x² − tr·x + det at x ∈ F_{p²} (tr, det ∈ F_p).
    fn charpoly_at(&self, x: u64, tr: u64, det: u64) -> u64 {
        let p = self.p;
        let x2 = self.mul(x, x);
        let tx = self.mul(self.embed(tr), x);
        let lo = ((x2 % p) + p - (tx % p) + det % p) % p;
        let hi = ((x2 / p) + p - (tx / p)) % p;
        lo + p * hi
    }

    fn generator(&self) -> u64 {
        let n = self.card() - 1;
        'cand: for x in 1..self.card() {
            for d in 1..n {
                if n % d == 0 && self.pow(x, d) == 1 {
                    continue 'cand;
                }
            }
            return x;
        }
        unreachable!("multiplicative group is cyclic");
    }
}

/// Depth-zero cuspidal representation of GL_2(F_p) attached to the character
/// θ = (generator ↦ ζ_{p²−1}^{theta_pow}) of the quadratic unramified torus
/// F_{p²}^*: the θ-component of the Gelfand-Graev module Ind_U^G ψ, which
/// contains it with multiplicity one. Rejects non-regular θ.
pub fn cuspidal_gl2(ctx: &Arc<CycloCtx>, theta_pow: i64, budget: u128) -> Result<GroupRep> {
    let p = ctx.p;
    let q2 = p * p - 1;
    if ctx.n % q2 != 0 {
        return Err(Error::Config(format!(
            "cyclotomic order {} must be divisible by p^2 - 1 = {q2}",
            ctx.n
        )));
    }
    if ctx.n % p != 0 {
        return Err(Error::Config(
            "cyclotomic order must be divisible by p for the Whittaker character".into(),
        ));
    }
    // regularity: θ ≠ θ∘Frob ⟺ (p+1) ∤ theta_pow
    if theta_pow.rem_euclid((p + 1) as i64) == 0 {
        return Err(Error::Config(format!(
            "torus character power {theta_pow} factors through the norm (not regular)"
        )));
    }
    let f = Fp2::new(p);
    let gen = f.generator();
    let mut dlog: HashMap<u64, u64> = HashMap::new();
    let mut x = 1u64;
    for e in 0..q2 {
        dlog.insert(x, e);
        x = f.mul(x, gen);
    }
    let theta = |x: u64| -> Result<CoeffScalar> {
        let e = *dlog
            .get(&x)
            .ok_or_else(|| Error::Internal("dlog of zero".into()))?;
        CoeffScalar::root_of_unity(ctx, q2, theta_pow * e as i64)
    };

    let grp = FinGL::new(2, p, 1, budget)?;
    // cuspidal character values by conjugacy type
    let mut green = Vec::with_capacity(grp.order());
    for g in &grp.elems {
        let tr = (g.at(0, 0) + g.at(1, 1)) % p;
        let det = g.det() % p;
        let roots: Vec<u64> = (0..p)
            .filter(|&x| (x * x % p + (p - 1) * tr % p * x % p + det) % p == 0)
            .collect();
        let val = match roots.len() {
            2 => CoeffScalar::zero(ctx),
            1 => {
                let z = roots[0];
                let scalar = g.at(0, 1) == 0 && g.at(1, 0) == 0 && g.at(0, 0) == g.at(1, 1);
                let tz = theta(f.embed(z))?;
                if scalar {
                    tz.mul_rat(&Rat::from_integer(((p - 1) as i64).into()))
                } else {
                    tz.neg()
                }
            }
            0 => {
                let lam = (p..f.card())
                    .find(|&x| f.charpoly_at(x, tr, det) == 0)
                    .ok_or_else(|| Error::Internal("no eigenvalue in F_{p^2}".into()))?;
                let lam_p = f.pow(lam, p);
                theta(lam)?.add(&theta(lam_p)?).neg()
            }
            _ => unreachable!(),
        };
        green.push(val);
    }

    // Gelfand-Graev module Ind_U^G ψ, ψ(b) = ζ_p^b
    let u_elems: Vec<ResMat> = (0..p)
        .map(|b| ResMat::from_entries(2, 2, p, 1, vec![1, b as i64, 0, 1]))
        .collect();
    let mut coset_of: HashMap<u128, usize> = HashMap::new();
    let mut reps: Vec<ResMat> = Vec::new();
    for g in &grp.elems {
        if coset_of.contains_key(&g.encode()) {
            continue;
        }
        let id = reps.len();
        for u in &u_elems {
            coset_of.insert(u.mul(g).encode(), id);
        }
        reps.push(g.clone());
    }
    let gg_dim = reps.len();
    let psi = |b: u64| CoeffScalar::root_of_unity(ctx, p, b as i64);

    // right regular action: ρ(g) e_i = ψ(u₀) e_j with rep_j · g = u₀ · rep_i
    let mut gg_mats = Vec::with_capacity(grp.order());
    for g in &grp.elems {
        let mut m = CMat::zero(ctx, gg_dim, gg_dim);
        for (j, rj) in reps.iter().enumerate() {
            let xg = rj.mul(g);
            let i = coset_of[&xg.encode()];
            let u0 = xg.mul(&reps[i].inverse()?);
            debug_assert!(u0.at(0, 0) == 1 && u0.at(1, 1) == 1 && u0.at(1, 0) == 0);
            *m.at_mut(j, i) = psi(u0.at(0, 1))?;
        }
        gg_mats.push(m);
    }

    // central idempotent of the cuspidal character
    let dim = (p - 1) as usize;
    let scale = Rat::new((dim as i64).into(), (grp.order() as i64).into());
    let mut proj = CMat::zero(ctx, gg_dim, gg_dim);
    for (gi, m) in gg_mats.iter().enumerate() {
        let c = green[gi].conj().mul_rat(&scale);
        proj = proj.add(&m.scale(&c));
    }
    let basis = proj.column_space_basis()?;
    if basis.cols != dim {
        return Err(Error::Internal(format!(
            "multiplicity in the Whittaker module is {} (expected a single copy of dimension {dim})",
            basis.cols
        )));
    }
    let mut mats = Vec::with_capacity(grp.order());
    for m in &gg_mats {
        mats.push(CMat::solve_full_rank(&basis, &m.mul(&basis))?);
    }
    let rep = GroupRep {
        grp,
        dim,
        mats,
        ctx: ctx.clone(),
    };
    rep.check_multiplicative()?;
    rep.check_irreducible()?;
    // cuspidality certificate: orthogonal to every Borel-induced character
    for c1 in 0..(p - 1) as i64 {
        for c2 in 0..(p - 1) as i64 {
            let ip = inner_with_borel_induced(&rep, &green, c1, c2)?;
            if !ip.is_zero() {
                return Err(Error::Internal(
                    "cuspidality certificate failed: overlaps a principal series".into(),
                ));
            }
        }
    }
    Ok(rep)
}

/// ⟨green, Ind_B^G(χ_{c1} ⊠ χ_{c2})⟩ over GL_2(F_p), with χ_c the character
/// u ↦ ζ_{p−1}^{c·dlog u} of F_p^*.
fn inner_with_borel_induced(
    rep: &GroupRep,
    green: &[CoeffScalar],
    c1: i64,
    c2: i64,
) -> Result<CoeffScalar> {
    let ctx = &rep.ctx;
    let p = rep.grp.p;
    let gen = unit_group_generators(p, 1)
        .first()
        .map(|&(g, _)| g)
        .unwrap_or(1);
    let mut dlog = HashMap::new();
    let mut x = 1u64;
    for e in 0..(p - 1) {
        dlog.insert(x, e);
        x = x * gen % p;
    }
    let chi = |c: i64, u: u64| CoeffScalar::root_of_unity(ctx, p - 1, c * dlog[&u] as i64);
    let order_b = ((p - 1) * (p - 1) * p) as i64;
    let mut ip = CoeffScalar::zero(ctx);
    for (gi, g) in rep.grp.elems.iter().enumerate() {
        let mut ind_val = CoeffScalar::zero(ctx);
        for x in &rep.grp.elems {
            let y = x.mul(g).mul(&x.inverse()?);
            if y.at(1, 0) == 0 {
                ind_val = ind_val.add(&chi(c1, y.at(0, 0))?.mul(&chi(c2, y.at(1, 1))?));
            }
        }
        ind_val = ind_val.mul_rat(&Rat::new(1.into(), order_b.into()));
        ip = ip.add(&green[gi].mul(&ind_val.conj()));
    }
    Ok(ip.mul_rat(&Rat::new(1.into(), (rep.grp.order() as i64).into())))
}

/// Compactly induced depth-zero supercuspidal data on GL_m(Q_p): the finite
/// cuspidal representation inflated to GL_m(Z_p), plus the free central value
/// ω(p). Matrix coefficients vanish off Z·GL_m(Z_p).
pub struct SupercuspidalDatum {
    pub m: usize,
    pub fin: GroupRep,
    pub omega_p: CoeffScalar,
}

impl SupercuspidalDatum {
    pub fn new(fin: GroupRep, omega_p: CoeffScalar) -> Result<Self> {
        if omega_p.is_zero() {
            return Err(Error::Config("central value at p must be nonzero".into()));
        }
        let m = fin.grp.m;
        Ok(SupercuspidalDatum { m, fin, omega_p })
    }

    /// Decompose g = p^t·h with h ∈ GL_m(Z_p); None off the support Z·GL_m(Z_p).
    pub fn central_split(&self, g: &QMat) -> Result<Option<(i64, ResMat)>> {
        let p = self.fin.grp.p;
        let Some(dv) = g.det_val(p) else {
            return Err(Error::DivisionByZero);
        };
        if dv.rem_euclid(self.m as i64) != 0 {
            return Ok(None);
        }
        let t = dv.div_euclid(self.m as i64);
        let h = g.scale_pow_p(p, -t);
        if !h.is_integral(p) {
            return Ok(None);
        }
        let hr = h.to_res(p, self.fin.grp.k)?;
        if !hr.det_is_unit() {
            return Ok(None);
        }
        Ok(Some((t, hr)))
    }

    /// ⟨σ(g)·e_j, e_i^*⟩ = ω(p)^t · (σ(h))_{ij} on the support, 0 elsewhere.
    pub fn coefficient(&self, g: &QMat, i: usize, j: usize) -> Result<CoeffScalar> {
        match self.central_split(g)? {
            None => Ok(CoeffScalar::zero(&self.fin.ctx)),
            Some((t, h)) => {
                let m = self.fin.apply(&h)?;
                Ok(self.omega_p.pow(t)?.mul(m.at(i, j)))
            }
        }
    }

    pub fn contragredient(&self) -> Result<SupercuspidalDatum> {
        Ok(SupercuspidalDatum {
            m: self.m,
            fin: self.fin.contragredient()?,
            omega_p: self.omega_p.inv()?,
        })
    }
}

/// Σ_{g∈G} ρ(g)_{ij} · ρ'(g⁻¹)_{kl}: equals (|G|/dim)·δ_{il}δ_{jk} when
/// ρ' = ρ, and vanishes identically for inequivalent irreducibles. Inputs
/// must carry irreducibility certificates.
pub fn schur_check(rho: &GroupRep, rho2: &GroupRep, expect_equal: bool) -> Result<()> {
    rho.check_irreducible()?;
    rho2.check_irreducible()?;
    let ctx = &rho.ctx;
    let order = rho.grp.order();
    for i in 0..rho.dim {
        for j in 0..rho.dim {
            for k in 0..rho2.dim {
                for l in 0..rho2.dim {
                    let mut acc = CoeffScalar::zero(ctx);
                    for g in &rho.grp.elems {
                        let a = rho.apply(g)?.at(i, j).clone();
                        let b = rho2.apply(&g.inverse()?)?.at(k, l).clone();
                        acc = acc.add(&a.mul(&b));
                    }
                    let expect = if expect_equal && i == l && j == k {
                        CoeffScalar::from_rat(
                            ctx,
                            Rat::new((order as i64).into(), (rho.dim as i64).into()),
                        )
                    } else {
                        CoeffScalar::zero(ctx)
                    };
                    if acc != expect {
                        return Err(Error::Internal(format!(
                            "Schur sum at ({i},{j},{k},{l}): got {acc}, expected {expect}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUDGET: u128 = 1 << 22;

    #[test]
    fn quadratic_character_mod_3() {
        let ctx = CycloCtx::new(18, 3);
        let chi =
            CharacterDatum::from_generator_images(&ctx, 1, &[1], CoeffScalar::one(&ctx)).unwrap();
        assert_eq!(chi.eval_unit(1), CoeffScalar::one(&ctx));
        assert_eq!(chi.eval_unit(2), CoeffScalar::from_i64(&ctx, -1));
        assert_eq!(
            chi.eval_unit(2).mul(&chi.eval_unit(2)),
            chi.eval_unit(2 * 2 % 3)
        );
        assert_eq!(chi.mul(&chi).cond, 0);
        assert_eq!(chi.at_minus_one(), CoeffScalar::from_i64(&ctx, -1));
    }

    #[test]
    fn character_rep_examples() {
        let ctx = CycloCtx::new(18, 3);
        let chi =
            CharacterDatum::from_generator_images(&ctx, 1, &[1], CoeffScalar::one(&ctx)).unwrap();
        let rep = character_rep(&chi, 2, BUDGET).unwrap();
        rep.check_multiplicative().unwrap();
        // diag(2,2) has det 4 ≡ 1 mod 3
        let g = ResMat::from_entries(2, 2, 3, 1, vec![2, 0, 0, 2]);
        assert!(rep.apply(&g).unwrap().at(0, 0).is_one());
        let triv = character_rep(&CharacterDatum::trivial(&ctx), 1, BUDGET).unwrap();
        assert!(triv.mats.iter().all(|m| m.at(0, 0).is_one()));
    }

    #[test]
    fn cuspidal_gl2_f2_is_the_sign_character() {
        // GL_2(F_2) ≅ S_3; the cuspidal representation has dimension p−1 = 1
        // and is the nontrivial character not factoring through det.
        let ctx = CycloCtx::new(12, 2);
        let rep = cuspidal_gl2(&ctx, 1, BUDGET).unwrap();
        assert_eq!(rep.dim, 1);
        let u = ResMat::from_entries(2, 2, 2, 1, vec![1, 1, 0, 1]);
        assert_eq!(
            rep.apply(&u).unwrap().at(0, 0),
            &CoeffScalar::from_i64(&ctx, -1)
        );
        let c = ResMat::from_entries(2, 2, 2, 1, vec![0, 1, 1, 1]);
        assert!(rep.apply(&c).unwrap().at(0, 0).is_one());
    }

    #[test]
    fn cuspidal_gl2_f3_has_dimension_two() {
        let ctx = CycloCtx::new(72, 3);
        let rep = cuspidal_gl2(&ctx, 1, BUDGET).unwrap();
        assert_eq!(rep.dim, 2);
        // contragredient character = character at inverse argument
        let dual = rep.contragredient().unwrap();
        for g in rep.grp.elems.iter().take(12) {
            let a = rep.trace(&g.inverse().unwrap()).unwrap();
            let b = dual.trace(g).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn non_regular_theta_rejected() {
        let ctx = CycloCtx::new(12, 2);
        assert!(cuspidal_gl2(&ctx, 3, BUDGET).is_err());
        let ctx = CycloCtx::new(72, 3);
        assert!(cuspidal_gl2(&ctx, 4, BUDGET).is_err());
    }

    #[test]
    fn schur_orthogonality() {
        let ctx = CycloCtx::new(18, 3);
        let triv = character_rep(&CharacterDatum::trivial(&ctx), 1, BUDGET).unwrap();
        schur_check(&triv, &triv, true).unwrap();
        let quad = character_rep(
            &CharacterDatum::from_generator_images(&ctx, 1, &[1], CoeffScalar::one(&ctx)).unwrap(),
            1,
            BUDGET,
        )
        .unwrap();
        schur_check(&triv, &quad, false).unwrap();
        let ctx = CycloCtx::new(72, 3);
        let cusp = cuspidal_gl2(&ctx, 1, BUDGET).unwrap();
        schur_check(&cusp, &cusp, true).unwrap();
    }

    #[test]
    fn supercuspidal_coefficient_support() {
        let ctx = CycloCtx::new(12, 2);
        let rep = cuspidal_gl2(&ctx, 1, BUDGET).unwrap();
        let sc = SupercuspidalDatum::new(rep, CoeffScalar::from_i64(&ctx, -1)).unwrap();
        assert!(sc.coefficient(&QMat::identity(2), 0, 0).unwrap().is_one());
        let zp = QMat::identity(2).scale_pow_p(2, 1);
        assert_eq!(
            sc.coefficient(&zp, 0, 0).unwrap(),
            CoeffScalar::from_i64(&ctx, -1)
        );
        let mut d = QMat::identity(2);
        d.set(0, 0, Rat::from_integer(2.into()));
        assert!(sc.coefficient(&d, 0, 0).unwrap().is_zero());
        // zero off Z·GL_2(Z_p) across a valuation window
        for v in -3i64..=3 {
            let g = QMat::from_i64(2, 2, &[1, 1, 1, 2]).scale_pow_p(2, v);
            assert!(!sc.coefficient(&g, 0, 0).is_err());
            // scale one row by p: determinant valuation becomes odd
            let mut h = g.clone();
            h.set(0, 0, h.at(0, 0) * Rat::from_integer(2.into()));
            h.set(0, 1, h.at(0, 1) * Rat::from_integer(2.into()));
            assert!(sc.coefficient(&h, 0, 0).unwrap().is_zero());
        }
    }
}
