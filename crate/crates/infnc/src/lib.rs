//! Exact combinatorics of real infinitesimal free probability.
//!
//! The crate has two halves. The exact half works over arbitrary-precision
//! rationals: permutations of `[n]` and `[±n]` ([`perm`]), the non-crossing
//! partition lattice ([`nc`]), symmetric non-crossing annular permutations
//! ([`annular`]), moment–cumulant transforms with the annular correction
//! ([`cumulant`]), cumulants with products as entries ([`product`]), and
//! free products built from vanishing mixed cumulants ([`freeness`]).
//! The numeric half ([`rmt`]) is a Monte Carlo harness for GOE, Wishart and
//! Haar-orthogonal ensembles that checks the exact predictions against
//! finite-dimensional random matrices.

pub mod annular;
pub mod cli;
pub mod cumulant;
pub mod dist;
pub mod error;
pub mod freeness;
pub mod nc;
pub mod perm;
pub mod poly;
pub mod product;
pub mod rmt;
pub mod word;

pub use error::{Error, Result};

/// Default cap on `n` for brute-force annular enumeration.
pub const ANNULAR_CAP: usize = 8;
/// Default cap on `n` for non-crossing partition enumeration.
pub const NC_CAP: usize = 12;
/// Default cap on `n` for the all-through annular enumeration.
pub const ALL_THROUGH_CAP: usize = 12;

/// Effective enumeration cap: `INFNC_MAX_N` overrides `default_cap` (with a
/// warning on stderr) when set to a parseable positive integer.
pub fn effective_cap(default_cap: usize) -> usize {
    match std::env::var("INFNC_MAX_N") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if n != default_cap {
                    eprintln!(
                        "warning: INFNC_MAX_N={} overrides enumeration cap {}",
                        n, default_cap
                    );
                }
                n
            }
            _ => default_cap,
        },
        Err(_) => default_cap,
    }
}
