//! Exact computation engine for local zeta integrals at p.
//!
//! Everything is exact: scalars live in `Q(ζ_N)[ρ]/(ρ² − p)`, zeta quantities
//! are rational functions in the formal variable `t = p^(−s/2)`, volumes are
//! rational numbers obtained by counting matrix groups over `Z/p^r`, and every
//! identity the crate verifies is decided by exact equality of reduced
//! rational functions.

pub mod error;
pub mod exactnum;
pub mod matgrp;
pub mod padic;
pub mod reps;
pub mod schwartz;
pub mod testvec;
pub mod types;
pub mod zeta;

pub use error::{Error, Result};
pub use exactnum::{CoeffScalar, CycloCtx, Poly, Rat, TauMono, ZetaRational};
pub use matgrp::{QMat, ResMat};
