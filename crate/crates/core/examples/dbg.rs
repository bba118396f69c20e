use pzeta_core::zeta::*;
use pzeta_core::matgrp::QMat;

fn main() {
    let budget: u128 = 1 << 24;
    let spec = ZetaConfigSpec {
        prime: 2, n: 2, a: 1, b: 1,
        partition_a: vec![1], partition_b: vec![1], level_r: 1,
        chi1: CharSpec::trivial(), chi2: CharSpec::trivial(),
        blocks: vec![
            BlockSpec::Character { chi: CharSpec::trivial() },
            BlockSpec::Character { chi: CharSpec::trivial() },
        ],
        suites: vec![], truncation: Some(2),
    };
    let place = spec.build(budget).unwrap();
    let brute = compute_zw(&place, ZwMode::Bruteforce).unwrap();
    println!("brute = {brute}");
    for v in [2i64] {
        for margin in [0u32, 1, 2, 3] {
            let z = raw_run_at_margin(&place, v, margin).unwrap();
            println!("margin {margin}: {z}");
        }
        let raw = raw_run_at_margin(&place, v, 2).unwrap();
        let cb = brute.laurent_coeffs(-10, 10).unwrap();
        let cr = raw.laurent_coeffs(-10, 10).unwrap();
        println!("V = {v}:");
        for (i, d) in (-10i64..=10).enumerate() {
            if !cb[i].is_zero() || !cr[i].is_zero() {
                let m = if cb[i] == cr[i] { "ok " } else { "DIF" };
                println!("  {m} deg {d:3}: brute {}   raw {}", cb[i], cr[i]);
            }
        }
    }
    // also check Z_w via the f+ route with a tiny direct g-sum? skip for now
    let _ = QMat::identity(2);
}
