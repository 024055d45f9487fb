//! Randomized pipage rounding, HitConstraint and Adjust.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::polytope::{membership_violation, Mode};
use crate::rounding::trace::RoundingTrace;
use crate::set::ElementSet;

/// Values this close to 0 or 1 are snapped to the boundary.
pub const CLAMP_EPS: f64 = 1e-12;

/// A coordinate within this distance of {0, 1} counts as integral.
pub const INTEGRAL_EPS: f64 = 1e-9;

/// A set attaining the minimum slack when a HitConstraint move stops.
#[derive(Clone, Debug, PartialEq)]
pub struct TightSet {
    pub set: ElementSet,
    pub slack: f64,
}

fn is_fractional(v: f64) -> bool {
    v > INTEGRAL_EPS && v < 1.0 - INTEGRAL_EPS
}

fn clamp(v: f64) -> f64 {
    if v.abs() <= CLAMP_EPS {
        0.0
    } else if (v - 1.0).abs() <= CLAMP_EPS {
        1.0
    } else {
        v
    }
}

fn require(m: &Matroid, y: &[f64], mode: Mode) -> Result<()> {
    match membership_violation(m, y, mode)? {
        None => Ok(()),
        Some(reason) => Err(Error::NotInPolytope {
            polytope: mode.name(),
            reason,
        }),
    }
}

/// Moves mass from `j` to `i` until a rank constraint through `i` but not `j`
/// becomes tight, or `y_j` reaches zero.
pub fn hit_constraint(m: &Matroid, y: &[f64], i: usize, j: usize) -> Result<(Vec<f64>, TightSet)> {
    if i == j || i >= m.n() || j >= m.n() {
        return Err(Error::Contract(format!("need two distinct elements, got {i} and {j}")));
    }
    require(m, y, Mode::B)?;
    let (delta, tight) = hit_delta(m, y, i, j)?;
    let mut out = y.to_vec();
    out[i] = clamp(out[i] + delta);
    out[j] = clamp(out[j] - delta);
    Ok((out, tight))
}

/// The step size and limiting set of a HitConstraint move, without applying it.
fn hit_delta(m: &Matroid, y: &[f64], i: usize, j: usize) -> Result<(f64, TightSet)> {
    let n = m.n();
    let cand = m
        .min_slack(y, &ElementSet::from_indices(n, [i]), &ElementSet::from_indices(n, [j]))?
        .ok_or_else(|| Error::Numerical("no set separates the pair".into()))?;
    let mut delta = cand.slack.max(0.0);
    let mut set = cand.set;
    // At y_j = 0 the bound y_j >= 0 binds together with any tight rank constraint.
    if y[j] < delta || y[j] == 0.0 {
        delta = y[j];
        set = ElementSet::from_indices(n, [j]);
    }
    Ok((delta, TightSet { set, slack: 0.0 }))
}

/// Result of a pipage rounding run.
#[derive(Clone, Debug, PartialEq)]
pub struct PipageOutcome {
    pub base: ElementSet,
    pub iterations: usize,
}

/// Rounds `y ∈ B(M)` to a base with `Pr[i ∈ B] = y_i`.
pub fn pipage_round<R: Rng>(
    m: &Matroid,
    y: &[f64],
    rng: &mut R,
    trace: Option<&mut RoundingTrace>,
) -> Result<PipageOutcome> {
    require(m, y, Mode::B)?;
    pipage_round_unchecked(m, y, rng, trace)
}

/// [`pipage_round`] for a point already known to lie in `B(M)`.
pub fn pipage_round_unchecked<R: Rng>(
    m: &Matroid,
    y: &[f64],
    rng: &mut R,
    mut trace: Option<&mut RoundingTrace>,
) -> Result<PipageOutcome> {
    let n = m.n();
    let mut y: Vec<f64> = y.iter().map(|&v| clamp(v.clamp(0.0, 1.0))).collect();
    let limit = n * n;
    let mut iterations = 0;
    while y.iter().any(|&v| is_fractional(v)) {
        let mut t = m.full_set();
        loop {
            let frac: Vec<usize> = t.iter().filter(|&e| is_fractional(y[e])).take(2).collect();
            if frac.len() < 2 {
                if let Some(&e) = frac.first() {
                    // A tight set holds an integral total, so a lone fractional value is noise.
                    let v = y[e].round();
                    if (y[e] - v).abs() > 1e-6 {
                        return Err(Error::Numerical(format!(
                            "lone fractional coordinate {e} = {} in a tight set",
                            y[e]
                        )));
                    }
                    y[e] = v;
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.snap(e, v);
                    }
                }
                break;
            }
            iterations += 1;
            if iterations > limit.max(1) {
                return Err(Error::Numerical(format!("pipage exceeded {limit} iterations")));
            }
            let (i, j) = (frac[0], frac[1]);
            let (up, a_up) = hit_delta(m, &y, i, j)?;
            let (down, a_down) = hit_delta(m, &y, j, i)?;
            // p = |y+ - y| / |y+ - y-| picks y-, the move toward j.
            let (p, take_down) = if up + down > 0.0 {
                let p = up / (up + down);
                (p, rng.gen::<f64>() < p)
            } else {
                (0.0, false)
            };
            let (yi_up, yj_up) = (clamp(y[i] + up), clamp(y[j] - up));
            let (yi_down, yj_down) = (clamp(y[i] - down), clamp(y[j] + down));
            if let Some(tr) = trace.as_deref_mut() {
                tr.record(
                    &[i, j],
                    [vec![y[i] - down, y[j] + down], vec![y[i] + up, y[j] - up]],
                    [p, 1.0 - p],
                    usize::from(!take_down),
                );
            }
            if take_down {
                y[i] = yi_down;
                y[j] = yj_down;
                t = t.intersection(&a_down.set);
            } else {
                y[i] = yi_up;
                y[j] = yj_up;
                t = t.intersection(&a_up.set);
            }
            if let Some(tr) = trace.as_deref_mut() {
                tr.snap(i, y[i]);
                tr.snap(j, y[j]);
            }
        }
    }
    let base = ElementSet::from_indices(n, (0..n).filter(|&e| y[e] > 0.5));
    if !m.is_base(&base) {
        return Err(Error::Numerical(format!("pipage produced a non-base {base:?}")));
    }
    Ok(PipageOutcome { base, iterations })
}

/// Result of [`adjust`]: the matroid with zeroed elements deleted and a point in its base polytope.
#[derive(Clone, Debug)]
pub struct Adjusted {
    pub matroid: Matroid,
    pub point: Vec<f64>,
    pub deleted: ElementSet,
}

/// Randomly raises or zeroes coordinates of `x ∈ P(M)` until it lies in the base
/// polytope of `M` with the zeroed elements deleted; every coordinate keeps its mean.
pub fn adjust<R: Rng>(m: &Matroid, x: &[f64], rng: &mut R, mut trace: Option<&mut RoundingTrace>) -> Result<Adjusted> {
    require(m, x, Mode::P)?;
    let n = m.n();
    let mut x: Vec<f64> = x.iter().map(|&v| clamp(v.clamp(0.0, 1.0))).collect();
    let mut deleted = m.empty_set();
    let mut cur = m.clone();
    let none = m.empty_set();
    for _ in 0..2 * n + 2 {
        let zeros = ElementSet::from_indices(n, (0..n).filter(|&e| x[e] == 0.0 && !deleted.contains(e)));
        if !zeros.is_empty() {
            deleted = deleted.union(&zeros);
            cur = m.delete(&deleted);
        }
        let total: f64 = x.iter().sum();
        if (total - cur.rank_full() as f64).abs() <= crate::polytope::TOL {
            return Ok(Adjusted {
                matroid: cur,
                point: x,
                deleted,
            });
        }
        let mut raised = false;
        for i in (0..n).filter(|&e| !deleted.contains(e)) {
            let room = cur
                .min_slack(&x, &ElementSet::from_indices(n, [i]), &none)?
                .map_or(0.0, |s| s.slack);
            if room <= CLAMP_EPS {
                continue;
            }
            let x_max = x[i] + room;
            let p = x[i] / x_max;
            let up = rng.gen::<f64>() < p;
            if let Some(tr) = trace.as_deref_mut() {
                tr.record(&[i], [vec![x_max], vec![0.0]], [p, 1.0 - p], usize::from(!up));
            }
            x[i] = if up { clamp(x_max) } else { 0.0 };
            if let Some(tr) = trace.as_deref_mut() {
                tr.snap(i, x[i]);
            }
            raised = true;
            break;
        }
        if !raised {
            // Every element lies in a tight set, so the whole ground set is tight.
            return Ok(Adjusted {
                matroid: cur,
                point: x,
                deleted,
            });
        }
    }
    Err(Error::Numerical("adjust did not terminate".into()))
}

/// [`adjust`] followed by [`pipage_round`] on the reduced matroid: an independent
/// set of `M` with `Pr[i ∈ I] = x_i`.
pub fn adjust_pipage<R: Rng>(
    m: &Matroid,
    x: &[f64],
    rng: &mut R,
    mut trace: Option<&mut RoundingTrace>,
) -> Result<PipageOutcome> {
    let adjusted = adjust(m, x, rng, trace.as_deref_mut())?;
    pipage_round_unchecked(&adjusted.matroid, &adjusted.point, rng, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    fn set(n: usize, v: &[usize]) -> ElementSet {
        ElementSet::from_indices(n, v.iter().copied())
    }

    #[test]
    fn hit_constraint_examples() {
        let m = Matroid::uniform(3, 2).unwrap();
        let (y, a) = hit_constraint(&m, &[1.0, 0.5, 0.5], 1, 2).unwrap();
        assert_eq!(y, vec![1.0, 1.0, 0.0]);
        assert_eq!(a.set, set(3, &[1]));

        // y_0 already sits on a tight constraint through 0 avoiding 1
        let (y, a) = hit_constraint(&m, &[1.0, 0.5, 0.5], 0, 1).unwrap();
        assert_eq!(y, vec![1.0, 0.5, 0.5]);
        assert_eq!(a.set, set(3, &[0]));

        let u = Matroid::uniform(3, 1).unwrap();
        let (y, a) = hit_constraint(&u, &[0.5, 0.5, 0.0], 0, 2).unwrap();
        assert_eq!(y, vec![0.5, 0.5, 0.0]);
        assert_eq!(a.set, set(3, &[2]));
    }

    #[test]
    fn pipage_integral_input_returns_immediately() {
        let m = Matroid::complete_graph(3).unwrap();
        let mut rng = stream(0, Domain::Rounding, 0);
        let out = pipage_round(&m, &[1.0, 0.0, 1.0], &mut rng, None).unwrap();
        assert_eq!(out.base, set(3, &[0, 2]));
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn pipage_single_step() {
        let m = Matroid::uniform(2, 1).unwrap();
        let mut zeros = 0;
        for t in 0..10_000 {
            let mut rng = stream(1, Domain::Rounding, t);
            let out = pipage_round(&m, &[0.5, 0.5], &mut rng, None).unwrap();
            assert_eq!(out.iterations, 1);
            zeros += usize::from(out.base.contains(0));
        }
        assert!((zeros as f64 / 10_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn pipage_trace_is_a_martingale() {
        let m = Matroid::complete_graph(4).unwrap();
        let y = vec![0.5; 6];
        for t in 0..50 {
            let mut rng = stream(2, Domain::Rounding, t);
            let mut trace = RoundingTrace::new(y.clone());
            let out = pipage_round(&m, &y, &mut rng, Some(&mut trace)).unwrap();
            assert!(trace.check().passed(), "{:?}", trace.check());
            assert!(out.iterations <= 36);
        }
    }

    #[test]
    fn adjust_examples() {
        let m = Matroid::uniform(4, 2).unwrap();
        let mut rng = stream(0, Domain::Rounding, 0);
        let a = adjust(&m, &[0.5; 4], &mut rng, None).unwrap();
        assert_eq!(a.point, vec![0.5; 4]);
        assert!(a.deleted.is_empty());

        let a = adjust(&m, &[0.0; 4], &mut rng, None).unwrap();
        assert_eq!(a.deleted.len(), 4);
        assert_eq!(a.matroid.rank_full(), 0);
        let out = pipage_round_unchecked(&a.matroid, &a.point, &mut rng, None).unwrap();
        assert!(out.base.is_empty());
    }

    #[test]
    fn adjust_first_step() {
        let m = Matroid::uniform(2, 1).unwrap();
        let mut raised = 0usize;
        let trials = 20_000;
        for t in 0..trials {
            let mut rng = stream(3, Domain::Rounding, t);
            let mut trace = RoundingTrace::new(vec![0.3, 0.3]);
            adjust(&m, &[0.3, 0.3], &mut rng, Some(&mut trace)).unwrap();
            let first = &trace.steps[0];
            assert_eq!(first.indices, vec![0]);
            assert!((first.outcomes[0][0] - 0.7).abs() < 1e-12);
            assert!((first.probs[0] - 3.0 / 7.0).abs() < 1e-12);
            raised += usize::from(first.taken == 0);
            assert!(trace.check().passed());
        }
        assert!((raised as f64 / trials as f64 - 3.0 / 7.0).abs() < 0.015);
    }

    #[test]
    fn rejects_points_outside() {
        let m = Matroid::uniform(3, 2).unwrap();
        let mut rng = stream(0, Domain::Rounding, 0);
        assert!(pipage_round(&m, &[0.9; 3], &mut rng, None).is_err());
        assert!(adjust(&m, &[0.9; 3], &mut rng, None).is_err());
    }
}
