//! The waiting-time ledger of the inductive construction: how long each stage
//! of the argument needs, and why those scales rule out direct simulation.

use crate::graphs::compute_sequences;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// Time scales attached to stage `i` of the construction.
///
/// `tau` is the stage's survival horizon `exp((i/2)(d_2 + d_4 + ... + d_i))`;
/// its raw value overflows every float already at i = 4, so only the exact
/// integer log is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofSchedule {
    pub i: usize,
    pub lambda: f64,
    /// `(i/2) * (d_2 + d_4 + ... + d_i)`, exact.
    pub log_tau: BigInt,
    /// Extinction deadline `3 ln(1/lambda)` used by the star arguments.
    pub t1: f64,
    /// Relay deadline `i * ln(i * (d_2 + d_4 + ... + d_i))`.
    pub big_l: f64,
}

/// Evaluates the stage-`i` time scales at rate `lambda`.
pub fn compute_proof_schedule(i: usize, lambda: f64) -> ProofSchedule {
    assert!(i >= 2 && i % 2 == 0, "stages are even indices from 2");
    assert!(
        lambda > 0.0 && lambda < 1.0,
        "time scales need a rate strictly inside (0, 1)"
    );
    let table = compute_sequences(i);
    let even_sum = table.even_leaf_sum(i);
    let log_tau = &even_sum * BigInt::from(i / 2);
    let t1 = 3.0 * (1.0 / lambda).ln();
    let big_l = i as f64 * big_ln(&(even_sum * BigInt::from(i)));
    ProofSchedule {
        i,
        lambda,
        log_tau,
        t1,
        big_l,
    }
}

/// Natural log of a positive big integer: the top 53 bits carry the mantissa,
/// the remaining bit count contributes `ln 2` each.
fn big_ln(x: &BigInt) -> f64 {
    assert!(x.sign() == num_bigint::Sign::Plus, "log of a positive value");
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().expect("small value fits f64").ln();
    }
    let shift = bits - 53;
    let top: BigInt = x >> shift;
    top.to_f64().expect("53 bits fit f64").ln() + shift as f64 * std::f64::consts::LN_2
}
