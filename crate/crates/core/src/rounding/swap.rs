//! Randomized swap rounding.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::polytope::{ConvexCombination, Mode};
use crate::rounding::trace::RoundingTrace;
use crate::set::ElementSet;

/// Merges two bases by random exchanges; the result is a base.
///
/// Each iteration takes the lowest `i ∈ b1 \ b2` and its first exchange partner
/// `j`; with probability `β1/(β1+β2)` it moves `i` into `b2`, otherwise `j` into `b1`.
pub fn merge_bases<R: Rng>(
    beta1: f64,
    b1: &ElementSet,
    beta2: f64,
    b2: &ElementSet,
    m: &Matroid,
    rng: &mut R,
) -> Result<ElementSet> {
    check_weights(beta1, beta2)?;
    for b in [b1, b2] {
        m.check_set(b)?;
        if !m.is_base(b) {
            return Err(Error::Contract(format!("{b:?} is not a base")));
        }
    }
    merge_bases_impl(beta1, b1.clone(), beta2, b2.clone(), m, rng, None)
}

fn check_weights(beta1: f64, beta2: f64) -> Result<()> {
    if !(beta1 > 0.0 && beta2 > 0.0 && beta1.is_finite() && beta2.is_finite()) {
        return Err(Error::Contract(format!(
            "merge weights must be positive, got {beta1} and {beta2}"
        )));
    }
    Ok(())
}

fn merge_bases_impl<R: Rng>(
    beta1: f64,
    mut b1: ElementSet,
    beta2: f64,
    mut b2: ElementSet,
    m: &Matroid,
    rng: &mut R,
    mut trace: Option<&mut RoundingTrace>,
) -> Result<ElementSet> {
    let p = beta1 / (beta1 + beta2);
    let limit = b1.len();
    for _ in 0..=limit {
        let Some(i) = b1.difference(&b2).first() else {
            return Ok(b1);
        };
        let j = m
            .find_exchange_unchecked(&b1, &b2, i)
            .ok_or_else(|| Error::Contract(format!("no exchange partner for {i}; inputs were not bases")))?;
        let keep_b1 = rng.gen::<f64>() < p;
        if let Some(t) = trace.as_deref_mut() {
            let (xi, xj) = (t.current()[i], t.current()[j]);
            t.record(
                &[i, j],
                [vec![xi + beta2, xj - beta2], vec![xi - beta1, xj + beta1]],
                [p, 1.0 - p],
                usize::from(!keep_b1),
            );
        }
        if keep_b1 {
            b2.remove(j);
            b2.insert(i);
        } else {
            b1.remove(i);
            b1.insert(j);
        }
    }
    Err(Error::Numerical("merge did not terminate within |B1| exchanges".into()))
}

/// Rounds `Σ β_ℓ 1_{B_ℓ}` to a base by folding [`merge_bases`] left to right.
pub fn swap_round<R: Rng>(
    c: &ConvexCombination,
    m: &Matroid,
    rng: &mut R,
    trace: Option<&mut RoundingTrace>,
) -> Result<ElementSet> {
    c.validate(m, Mode::B)?;
    Ok(swap_round_unchecked(c, m, rng, trace))
}

/// [`swap_round`] for a combination already known to be valid.
pub fn swap_round_unchecked<R: Rng>(
    c: &ConvexCombination,
    m: &Matroid,
    rng: &mut R,
    mut trace: Option<&mut RoundingTrace>,
) -> ElementSet {
    let mut current = c.terms[0].set.clone();
    let mut weight = c.terms[0].weight;
    for t in &c.terms[1..] {
        current = merge_bases_impl(weight, current, t.weight, t.set.clone(), m, rng, trace.as_deref_mut())
            .expect("bases of a validated combination always merge");
        weight += t.weight;
    }
    current
}

/// Merges two independent sets; the result is independent.
///
/// The smaller set is padded from the larger one, the two are merged by exchanges
/// inside the truncation to the larger size, and every padding element is then
/// dropped with probability `β2/(β1+β2)`.
pub fn merge_indep_sets<R: Rng>(
    beta1: f64,
    i1: &ElementSet,
    beta2: f64,
    i2: &ElementSet,
    m: &Matroid,
    rng: &mut R,
) -> Result<ElementSet> {
    check_weights(beta1, beta2)?;
    for s in [i1, i2] {
        m.check_set(s)?;
        if !m.is_independent(s) {
            return Err(Error::Contract(format!("{s:?} is not independent")));
        }
    }
    Ok(merge_indep_impl(beta1, i1, beta2, i2, m, rng))
}

fn merge_indep_impl<R: Rng>(
    beta1: f64,
    i1: &ElementSet,
    beta2: f64,
    i2: &ElementSet,
    m: &Matroid,
    rng: &mut R,
) -> ElementSet {
    let (beta1, i1, beta2, i2) = if i1.len() >= i2.len() {
        (beta1, i1, beta2, i2)
    } else {
        (beta2, i2, beta1, i1)
    };
    let mut padded = i2.clone();
    let mut pad = m.empty_set();
    for e in i1.difference(i2).iter() {
        if padded.len() == i1.len() {
            break;
        }
        if m.is_independent(&padded.with(e)) {
            padded.insert(e);
            pad.insert(e);
        }
    }
    debug_assert_eq!(padded.len(), i1.len());
    let p = beta1 / (beta1 + beta2);
    let mut a = i1.clone();
    let mut b = padded;
    while let Some(i) = a.difference(&b).first() {
        let j = m
            .find_exchange_unchecked(&a, &b, i)
            .expect("equal-size independent sets admit a strong exchange");
        if rng.gen::<f64>() < p {
            b.remove(j);
            b.insert(i);
        } else {
            a.remove(i);
            a.insert(j);
        }
    }
    let q = beta2 / (beta1 + beta2);
    for s in pad.iter() {
        if rng.gen::<f64>() < q {
            a.remove(s);
        }
    }
    a
}

/// Rounds `Σ β_ℓ 1_{I_ℓ}` to an independent set by folding [`merge_indep_sets`].
pub fn swap_round_point<R: Rng>(c: &ConvexCombination, m: &Matroid, rng: &mut R) -> Result<ElementSet> {
    c.validate(m, Mode::P)?;
    Ok(swap_round_point_unchecked(c, m, rng))
}

/// [`swap_round_point`] for a combination already known to be valid.
pub fn swap_round_point_unchecked<R: Rng>(c: &ConvexCombination, m: &Matroid, rng: &mut R) -> ElementSet {
    let mut current = c.terms[0].set.clone();
    let mut weight = c.terms[0].weight;
    for t in &c.terms[1..] {
        current = merge_indep_impl(weight, &current, t.weight, &t.set, m, rng);
        weight += t.weight;
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Term;
    use crate::rng::{stream, Domain};
    use std::collections::BTreeMap;

    fn set(n: usize, v: &[usize]) -> ElementSet {
        ElementSet::from_indices(n, v.iter().copied())
    }

    fn histogram(trials: u64, mut f: impl FnMut(&mut crate::rng::TrialRng) -> ElementSet) -> BTreeMap<Vec<usize>, f64> {
        let mut h = BTreeMap::new();
        for t in 0..trials {
            let mut rng = stream(11, Domain::Rounding, t);
            *h.entry(f(&mut rng).to_vec()).or_insert(0.0) += 1.0 / trials as f64;
        }
        h
    }

    #[test]
    fn merge_identical_bases_is_deterministic() {
        let m = Matroid::uniform(4, 2).unwrap();
        let b = set(4, &[1, 3]);
        let mut rng = stream(0, Domain::Rounding, 0);
        assert_eq!(merge_bases(0.5, &b, 0.5, &b, &m, &mut rng).unwrap(), b);
    }

    #[test]
    fn merge_single_swap() {
        let m = Matroid::uniform(2, 1).unwrap();
        let h = histogram(20_000, |r| {
            merge_bases(0.5, &set(2, &[0]), 0.5, &set(2, &[1]), &m, r).unwrap()
        });
        assert_eq!(h.len(), 2);
        for p in h.values() {
            assert!((p - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn merge_uniform_four_paths() {
        // Two coin flips: i=0 pairs with j=2, then the remaining pair swaps.
        let m = Matroid::uniform(4, 2).unwrap();
        let h = histogram(40_000, |r| {
            merge_bases(0.5, &set(4, &[0, 1]), 0.5, &set(4, &[2, 3]), &m, r).unwrap()
        });
        let keys: Vec<Vec<usize>> = h.keys().cloned().collect();
        assert_eq!(keys, vec![vec![0, 1], vec![0, 3], vec![1, 2], vec![2, 3]]);
        for p in h.values() {
            assert!((p - 0.25).abs() < 0.015, "{h:?}");
        }
    }

    #[test]
    fn merge_rejects_non_bases() {
        let m = Matroid::uniform(4, 2).unwrap();
        let mut rng = stream(0, Domain::Rounding, 0);
        assert!(merge_bases(0.5, &set(4, &[0]), 0.5, &set(4, &[2, 3]), &m, &mut rng).is_err());
    }

    #[test]
    fn swap_round_single_term() {
        let m = Matroid::complete_graph(3).unwrap();
        let c = ConvexCombination::single(set(3, &[0, 2]));
        let mut rng = stream(0, Domain::Rounding, 0);
        assert_eq!(swap_round(&c, &m, &mut rng, None).unwrap(), set(3, &[0, 2]));
    }

    #[test]
    fn traced_swap_round_is_a_martingale() {
        let m = Matroid::complete_graph(4).unwrap();
        let x = vec![0.5; 6];
        let c = crate::polytope::decompose_base(&m, &x).unwrap();
        for t in 0..50 {
            let mut rng = stream(5, Domain::Rounding, t);
            let mut trace = RoundingTrace::new(c.recompose(6));
            let b = swap_round(&c, &m, &mut rng, Some(&mut trace)).unwrap();
            assert!(trace.check().passed());
            assert!(trace.steps.len() <= (c.len() - 1) * m.rank_full());
            for (i, v) in trace.current().iter().enumerate() {
                assert!((v - f64::from(u8::from(b.contains(i)))).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn merge_indep_examples() {
        let m = Matroid::uniform(2, 1).unwrap();
        let mut rng = stream(0, Domain::Rounding, 0);
        let i = set(2, &[1]);
        assert_eq!(merge_indep_sets(0.5, &i, 0.5, &i, &m, &mut rng).unwrap(), i);
        let e = set(2, &[]);
        assert_eq!(merge_indep_sets(0.5, &e, 0.5, &e, &m, &mut rng).unwrap(), e);
        let h = histogram(20_000, |r| {
            merge_indep_sets(0.5, &set(2, &[0]), 0.5, &e, &m, r).unwrap()
        });
        assert!((h[&vec![0]] - 0.5).abs() < 0.02);
        assert!((h[&vec![]] - 0.5).abs() < 0.02);
    }

    #[test]
    fn swap_round_point_marginals() {
        let m = Matroid::uniform(2, 1).unwrap();
        let c = ConvexCombination {
            terms: vec![
                Term {
                    weight: 0.3,
                    set: set(2, &[0]),
                },
                Term {
                    weight: 0.3,
                    set: set(2, &[1]),
                },
                Term {
                    weight: 0.4,
                    set: set(2, &[]),
                },
            ],
        };
        let h = histogram(20_000, |r| swap_round_point(&c, &m, r).unwrap());
        assert!((h[&vec![0]] - 0.3).abs() < 0.02);
        assert!((h[&vec![1]] - 0.3).abs() < 0.02);
    }
}
