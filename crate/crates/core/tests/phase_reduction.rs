//! Phase reduction against exact big-integer arithmetic.

use hoamp_core::dynamics::{phase_delta, OscillatorParams};
use num_bigint::BigInt;
use proptest::prelude::*;

/// floor(2π·2^256).
const TWO_PI_256: &str = "6487ed5110b4611a62633145c06e0e68948127044533e63a0105df531d89cd912";
const SCALE_BITS: u32 = 400;

/// `(m, e)` with `x = m·2^e` exactly.
fn decode(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (sign * frac as i64, -1074)
    } else {
        (sign * (frac | (1u64 << 52)) as i64, exp - 1075)
    }
}

/// `Σ_k g_k·t·d_k` scaled by `2^SCALE_BITS`, exactly.
fn scaled_phase(couplings: &[f64], t: f64, diffs: &[i128]) -> BigInt {
    let (mt, et) = decode(t);
    couplings
        .iter()
        .zip(diffs)
        .filter(|(&g, _)| g != 0.0)
        .map(|(&g, &d)| {
            let (mg, eg) = decode(g);
            let shift = eg + et + SCALE_BITS as i32;
            assert!(shift >= 0);
            (BigInt::from(mg) * BigInt::from(mt) * BigInt::from(d)) << shift as u32
        })
        .sum()
}

fn exact_reduced(couplings: &[f64], t: f64, diffs: &[i128]) -> f64 {
    let two_pi = BigInt::parse_bytes(TWO_PI_256.as_bytes(), 16).unwrap() << (SCALE_BITS - 256);
    let x = scaled_phase(couplings, t, diffs);
    let mut r = ((x % &two_pi) + &two_pi) % &two_pi;
    if r > (&two_pi >> 1u32) {
        r -= &two_pi;
    }
    let top = i128::try_from(r >> (SCALE_BITS - 100)).unwrap();
    top as f64 * 2f64.powi(-100)
}

fn raw_magnitude(couplings: &[f64], t: f64, diffs: &[i128]) -> f64 {
    couplings
        .iter()
        .zip(diffs)
        .map(|(g, &d)| (g * t * d as f64).abs())
        .sum()
}

fn check(couplings: &[f64], t: f64, target: i128, trial: i128) {
    let params = OscillatorParams::new(vec![0.0], couplings.to_vec()).unwrap();
    let got = phase_delta(&params, target, trial, t).unwrap();
    let diffs: Vec<i128> = (1..=couplings.len() as u32)
        .map(|k| target.pow(k) - trial.pow(k))
        .collect();
    let want = exact_reduced(couplings, t, &diffs);
    let raw = raw_magnitude(couplings, t, &diffs);
    assert!(got.angle > -std::f64::consts::PI && got.angle <= std::f64::consts::PI);
    assert_eq!(got.raw_integer, target - trial);
    let err = (got.angle - want).abs();
    assert!(err < 1e-9, "raw {raw:e}: {} vs {want}", got.angle);
    if raw < 2f64.powi(40) {
        assert!(err < 1e-14, "raw {raw:e}: err {err:e}");
    }
}

#[test]
fn reference_products() {
    // largest table-sized phases
    for &(trial, t) in &[
        (1_030_189i128 + 1, 1.704),
        (1_030_189 * 2 + 17, 6.046),
        (3, 5.089),
        (2_122_849, 0.708),
    ] {
        check(&[1.0], t, 1_030_189, trial);
    }
}

#[test]
fn near_two_to_sixty() {
    let d = 1i128 << 59;
    check(&[1.0], 1.999_999_999, d, -1);
    check(&[0.75], 1.3, d + 12345, 0);
}

#[test]
fn exact_multiple_of_pi() {
    let p = OscillatorParams::linear(1.0).unwrap();
    let d = phase_delta(&p, 35, 36, std::f64::consts::PI).unwrap();
    assert!((d.angle.abs() - std::f64::consts::PI).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn linear_matches_exact(g in 0.05f64..10.0, t in 0.001f64..100.0, target in 0i128..(1 << 40), trial in 0i128..(1 << 40)) {
        check(&[g], t, target, trial);
    }

    #[test]
    fn quadratic_matches_exact(g1 in -2.0f64..2.0, g2 in 0.1f64..2.0, t in 0.001f64..10.0, target in 0i128..(1 << 24), trial in 0i128..(1 << 24)) {
        check(&[g1, g2], t, target, trial);
    }

    #[test]
    fn cubic_matches_exact(g in 0.1f64..2.0, t in 0.001f64..10.0, target in 0i128..(1 << 16), trial in 0i128..(1 << 16)) {
        check(&[0.0, 0.0, g], t, target, trial);
    }
}
