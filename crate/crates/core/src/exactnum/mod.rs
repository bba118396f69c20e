//! Exact coefficient arithmetic.
//!
//! Scalars are elements of `Q(ζ_N)[ρ]/(ρ² − p)`: a pair of vectors over `Q`
//! in the power basis of the `N`-th cyclotomic field, the second vector
//! carrying the formal `ρ = √p`. Zeta quantities are rational functions in
//! one variable `t`, the stand-in for `p^(−s/2)`, with those scalars as
//! coefficients.

mod cyclo;
mod linalg;
mod poly;
mod zetarat;

pub use cyclo::{CoeffScalar, CycloCtx};
pub use linalg::CMat;
pub use poly::Poly;
pub use zetarat::{geometric_series, geometric_series_signed, TauMono, ZetaRational};

pub type Rat = num::BigRational;

pub(crate) fn rat_i64(v: i64) -> Rat {
    Rat::from_integer(num::BigInt::from(v))
}

/// p^k as an exact rational, k may be negative.
pub fn rat_pow_p(p: u64, k: i64) -> Rat {
    let base = num::BigInt::from(p);
    if k >= 0 {
        Rat::from_integer(base.pow(k as u32))
    } else {
        Rat::new(num::BigInt::from(1), base.pow((-k) as u32))
    }
}
