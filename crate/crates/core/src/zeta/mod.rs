//! Local zeta integrals as exact rational functions in t = p^(−s/2):
//! Tate and Godement-Jacquet shell sums, L- and ε-factors through the
//! functional-equation oracle, assembly of the two block integrals and of
//! the local integral itself (raw, bruteforce and closed form), and the
//! verification suites.

mod assemble;
mod config;
mod factors;
mod fplus;
mod integrals;
mod raw;
mod report;

pub use assemble::{
    compute_ep, compute_i_a, compute_i_b, compute_zw, l_ord_char_path, l_ord_quotients,
    n_level_volume_ratio, ZwMode,
};
pub use config::{parse_scalar_expr, BlockSpec, CharSpec, Place, ZetaConfigSpec};
pub use factors::{gauss_sum_epsilon, local_factors, tate_l_factor, LocalFactor};
pub use fplus::{f_plus_direct_window, siegel_weil_f_plus};
pub use integrals::{gj_cuspidal_integral, gj_integral, tate_integral};
pub use raw::{raw_matches_series, raw_run_at_margin, raw_zw_truncated};
