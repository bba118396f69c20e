use crate::error::{Error, Result};
use crate::exactnum::{CoeffScalar, CycloCtx, Rat};
use crate::reps::{cuspidal_gl2, unit_group_generators, CharacterDatum, SupercuspidalDatum};
use crate::testvec::TestVectors;
use crate::types::{BlockRep, TypeDatum};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A character serialized as (conductor, generator images, value at p).
/// Each generator image is the stated power of ζ_{order of that generator};
/// `value_at_p` is an exact expression like "1", "-1", "2/3", "rho^-1",
/// "zeta(8)^3*rho".
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CharSpec {
    pub conductor: u32,
    #[serde(default)]
    pub unit_image_pows: Vec<i64>,
    pub value_at_p: String,
}

impl CharSpec {
    pub fn trivial() -> Self {
        CharSpec {
            conductor: 0,
            unit_image_pows: vec![],
            value_at_p: "1".into(),
        }
    }

    /// Orders of roots of unity this character needs in the coefficient field.
    fn root_orders(&self, p: u64) -> Vec<u64> {
        let mut orders: Vec<u64> = unit_group_generators(p, self.conductor)
            .iter()
            .map(|&(_, ord)| ord)
            .collect();
        orders.extend(scalar_expr_root_orders(&self.value_at_p));
        orders
    }

    pub fn build(&self, ctx: &Arc<CycloCtx>) -> Result<CharacterDatum> {
        let vp = parse_scalar_expr(ctx, &self.value_at_p)?;
        if self.conductor == 0 {
            CharacterDatum::unramified(ctx, vp)
        } else {
            CharacterDatum::from_generator_images(ctx, self.conductor, &self.unit_image_pows, vp)
        }
    }
}

/// A block of the supercuspidal support: a character for size-1 blocks or a
/// depth-zero supercuspidal for size-2 blocks.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BlockSpec {
    Character {
        #[serde(flatten)]
        chi: CharSpec,
    },
    Supercuspidal {
        theta_pow: i64,
        omega_p: String,
    },
}

impl BlockSpec {
    pub fn size(&self) -> usize {
        match self {
            BlockSpec::Character { .. } => 1,
            BlockSpec::Supercuspidal { .. } => 2,
        }
    }
}

/// One place's configuration, the unit of the manifest.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZetaConfigSpec {
    pub prime: u64,
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub partition_a: Vec<usize>,
    pub partition_b: Vec<usize>,
    pub level_r: u32,
    pub chi1: CharSpec,
    pub chi2: CharSpec,
    /// a-side blocks then b-side blocks.
    pub blocks: Vec<BlockSpec>,
    #[serde(default)]
    pub suites: Vec<String>,
    /// shell truncation for the raw evaluator; enables the raw cross-check.
    #[serde(default)]
    pub truncation: Option<i64>,
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Root orders mentioned by a scalar expression (the zeta(d) factors).
fn scalar_expr_root_orders(s: &str) -> Vec<u64> {
    let mut orders = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i + 5 <= bytes.len() {
        if &s[i..i + 5] == "zeta(" {
            let rest = &s[i + 5..];
            if let Some(close) = rest.find(')') {
                if let Ok(d) = rest[..close].trim().parse::<u64>() {
                    orders.push(d);
                }
            }
        }
        i += 1;
    }
    orders
}

/// Parse an exact scalar: product of factors `rational`, `rho`, `zeta(d)`,
/// each optionally raised to an integer power.
pub fn parse_scalar_expr(ctx: &Arc<CycloCtx>, s: &str) -> Result<CoeffScalar> {
    let mut acc = CoeffScalar::one(ctx);
    for raw in s.split('*') {
        let tok = raw.trim();
        if tok.is_empty() {
            return Err(Error::Config(format!("empty factor in scalar '{s}'")));
        }
        let (base, pow) = match tok.rsplit_once('^') {
            Some((b, e)) => {
                let e: i64 = e
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad exponent in '{tok}'")))?;
                (b.trim(), e)
            }
            None => (tok, 1),
        };
        let val = if base == "rho" {
            CoeffScalar::rho_pow(ctx, pow)
        } else if let Some(rest) = base.strip_prefix("zeta(") {
            let d: u64 = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("unclosed zeta in '{base}'")))?
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad root order in '{base}'")))?;
            CoeffScalar::root_of_unity(ctx, d, pow)?
        } else {
            let rat: Rat = base
                .parse()
                .map_err(|_| Error::Config(format!("bad rational '{base}'")))?;
            if rat.denom() == &num::BigInt::from(0) {
                return Err(Error::Config("zero denominator".into()));
            }
            let c = CoeffScalar::from_rat(ctx, rat);
            c.pow(pow)?
        };
        acc = acc.mul(&val);
    }
    Ok(acc)
}

/// A materialized place: shared arithmetic context, type datum and the
/// test-vector pair, ready for the integral pipeline.
pub struct Place {
    pub spec: ZetaConfigSpec,
    pub ctx: Arc<CycloCtx>,
    pub td: Arc<TypeDatum>,
    pub tv: TestVectors,
    pub budget: u128,
}

impl ZetaConfigSpec {
    pub fn validate(&self) -> Result<()> {
        let p = self.prime;
        if p < 2 || !is_prime(p) {
            return Err(Error::Config(format!("prime field: {p} is not prime")));
        }
        if self.a + self.b != self.n {
            return Err(Error::Config(format!(
                "signature mismatch: a + b = {} but n = {}",
                self.a + self.b,
                self.n
            )));
        }
        if self.partition_a.iter().sum::<usize>() != self.a {
            return Err(Error::Config("partition_a does not sum to a".into()));
        }
        if self.partition_b.iter().sum::<usize>() != self.b {
            return Err(Error::Config("partition_b does not sum to b".into()));
        }
        if self.blocks.len() != self.partition_a.len() + self.partition_b.len() {
            return Err(Error::Config(
                "blocks must list one entry per partition part (a-side then b-side)".into(),
            ));
        }
        let need = 1u32.max(self.chi1.conductor).max(self.chi2.conductor);
        if self.level_r < need {
            return Err(Error::Config(format!(
                "level_r = {} violates the bound level_r >= max(1, cond chi1, cond chi2) = {need}",
                self.level_r
            )));
        }
        Ok(())
    }

    /// The cyclotomic order: lcm of p^(2r) (additive character window), the
    /// orders of all configured character tables and expression roots, and
    /// p²−1 when a supercuspidal block is present.
    pub fn root_order(&self) -> u64 {
        let p = self.prime;
        let mut n = p.pow(2 * self.level_r);
        for chi in [&self.chi1, &self.chi2] {
            for d in chi.root_orders(p) {
                n = lcm(n, d);
            }
        }
        for b in &self.blocks {
            match b {
                BlockSpec::Character { chi } => {
                    for d in chi.root_orders(p) {
                        n = lcm(n, d);
                    }
                }
                BlockSpec::Supercuspidal { omega_p, .. } => {
                    n = lcm(n, p * p - 1);
                    for d in scalar_expr_root_orders(omega_p) {
                        n = lcm(n, d);
                    }
                }
            }
        }
        n
    }

    pub fn build(&self, budget: u128) -> Result<Place> {
        self.validate()?;
        let ctx = CycloCtx::new(self.root_order(), self.prime);
        let build_block = |spec: &BlockSpec| -> Result<BlockRep> {
            Ok(match spec {
                BlockSpec::Character { chi } => BlockRep::Char(chi.build(&ctx)?),
                BlockSpec::Supercuspidal { theta_pow, omega_p } => {
                    let fin = cuspidal_gl2(&ctx, *theta_pow, budget)?;
                    let om = parse_scalar_expr(&ctx, omega_p)?;
                    BlockRep::Cusp(SupercuspidalDatum::new(fin, om)?)
                }
            })
        };
        let t = self.partition_a.len();
        let blocks_a: Vec<BlockRep> =
            self.blocks[..t].iter().map(build_block).collect::<Result<_>>()?;
        let blocks_b: Vec<BlockRep> =
            self.blocks[t..].iter().map(build_block).collect::<Result<_>>()?;
        let td = Arc::new(TypeDatum::new(
            &ctx,
            self.partition_a.clone(),
            self.partition_b.clone(),
            blocks_a,
            blocks_b,
            self.chi1.build(&ctx)?,
            self.chi2.build(&ctx)?,
            self.level_r,
        )?);
        let tv = TestVectors::new(td.clone())?;
        Ok(Place {
            spec: self.clone(),
            ctx,
            td,
            tv,
            budget,
        })
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_expr_parsing() {
        let ctx = CycloCtx::new(24, 2);
        assert!(parse_scalar_expr(&ctx, "1").unwrap().is_one());
        assert_eq!(
            parse_scalar_expr(&ctx, "-3/4").unwrap(),
            CoeffScalar::from_rat(&ctx, Rat::new((-3).into(), 4.into()))
        );
        let r = parse_scalar_expr(&ctx, "rho^2").unwrap();
        assert_eq!(r, CoeffScalar::from_i64(&ctx, 2));
        let z = parse_scalar_expr(&ctx, "zeta(8)^2*zeta(8)^2").unwrap();
        assert_eq!(z, CoeffScalar::root_of_unity(&ctx, 2, 1).unwrap());
        assert!(parse_scalar_expr(&ctx, "zeta(5)").is_err());
        assert!(parse_scalar_expr(&ctx, "").is_err());
    }

    #[test]
    fn validation_errors_name_the_bound() {
        let mut spec = ZetaConfigSpec {
            prime: 3,
            n: 2,
            a: 1,
            b: 1,
            partition_a: vec![1],
            partition_b: vec![1],
            level_r: 0,
            chi1: CharSpec::trivial(),
            chi2: CharSpec::trivial(),
            blocks: vec![
                BlockSpec::Character { chi: CharSpec::trivial() },
                BlockSpec::Character { chi: CharSpec::trivial() },
            ],
            suites: vec![],
            truncation: None,
        };
        let err = spec.validate().unwrap_err();
        assert!(format!("{err}").contains("max(1, cond chi1, cond chi2)"));
        spec.level_r = 1;
        assert!(spec.validate().is_ok());
        assert_eq!(spec.root_order(), 9);
    }
}
