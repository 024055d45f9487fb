//! Dependent rounding of fractional points in matroid polytopes.

mod pipage;
mod swap;
pub mod trace;

use rand::Rng;

pub use pipage::{
    adjust, adjust_pipage, hit_constraint, pipage_round, pipage_round_unchecked, Adjusted, PipageOutcome, TightSet,
    CLAMP_EPS, INTEGRAL_EPS,
};
pub use swap::{
    merge_bases, merge_indep_sets, swap_round, swap_round_point, swap_round_point_unchecked, swap_round_unchecked,
};
pub use trace::{RoundingTrace, TraceCheck, TraceStep};

use crate::set::ElementSet;

/// Includes each `i` independently with probability `x_i`.
pub fn independent_round<R: Rng>(x: &[f64], rng: &mut R) -> ElementSet {
    crate::submodular::sample_set(x, rng)
}
