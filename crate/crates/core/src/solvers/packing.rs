//! Congestion minimization and min-cost packing over matroid bases.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{Region, Sense};
use crate::matroid::Matroid;
use crate::polytope::Mode;
use crate::set::ElementSet;
use crate::solvers::{PackingSystem, Rounder, SolverParams, LOAD_TOL};

#[derive(Clone, Debug, Serialize)]
pub struct MinimaxReport {
    /// Smallest congestion found fractionally feasible.
    pub lambda: f64,
    /// Largest congestion shown fractionally infeasible.
    pub lambda_lower: f64,
    pub fractional: Vec<f64>,
    pub base: ElementSet,
    pub loads: Vec<f64>,
    pub congestion: f64,
    pub ratio: f64,
    pub trials: usize,
    /// Rounded congestion of every trial, in trial order.
    pub trial_congestion: Vec<f64>,
    pub searches: usize,
}

/// Elements with some entry above `lambda`.
fn heavy(matrix: &[Vec<f64>], n: usize, lambda: f64) -> ElementSet {
    ElementSet::from_indices(n, (0..n).filter(|&j| matrix.iter().any(|row| row[j] > lambda)))
}

fn fractional_at(m: &Matroid, matrix: &[Vec<f64>], lambda: f64) -> Result<Option<Vec<f64>>> {
    let n = m.n();
    let sys = PackingSystem::uniform_rhs(matrix.to_vec(), lambda)?;
    let mut region = Region::new(m, Mode::B, sys.lp_rows(1.0));
    region.fixed_zero = heavy(matrix, n, lambda);
    region.greedy_shortcut = false;
    let out = region.optimize(&vec![0.0; n], Sense::Max)?;
    Ok(out.is_optimal().then_some(out.x))
}

/// Binary search for the least `λ` with `B(M) ∩ {Ax <= λ}` nonempty (elements with
/// an entry above `λ` removed), followed by swap rounding of the fractional point.
pub fn solve_minimax(m: &Matroid, matrix: &[Vec<f64>], params: &SolverParams) -> Result<MinimaxReport> {
    params.validate()?;
    let n = m.n();
    let sys = PackingSystem::uniform_rhs(matrix.to_vec(), 1.0)?;
    sys.validate(n)?;
    let eps = params.epsilon;
    let mut searches = 1;
    let (mut lo, mut hi, mut point) = match fractional_at(m, matrix, 0.0)? {
        Some(x) => (0.0, 0.0, x),
        None => {
            let hi = matrix
                .iter()
                .map(|row| row.iter().sum::<f64>())
                .fold(0.0, f64::max)
                .max(1.0);
            searches += 1;
            let x = fractional_at(m, matrix, hi)?
                .ok_or_else(|| Error::SolverFailure("no base is feasible even at the largest row sum".into()))?;
            (0.0, hi, x)
        }
    };
    while !(hi <= (1.0 + eps) * lo && hi - lo <= eps) && hi > 0.0 {
        let mid = 0.5 * (lo + hi);
        searches += 1;
        match fractional_at(m, matrix, mid)? {
            Some(x) => {
                hi = mid;
                point = x;
            }
            None => lo = mid,
        }
        if searches > 200 {
            break;
        }
    }
    let restricted = m.delete(&heavy(matrix, n, hi));
    let rounder = Rounder::new(&restricted, &point, Mode::B)?;
    let mut best: Option<(f64, ElementSet)> = None;
    let mut trial_congestion = Vec::with_capacity(params.trials);
    for t in 0..params.trials {
        let b = rounder.round(&restricted, &mut params.trial_rng(0, t));
        let c = sys.loads(&b).into_iter().fold(0.0, f64::max);
        trial_congestion.push(c);
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, b));
        }
    }
    let (congestion, base) = best.expect("at least one trial");
    Ok(MinimaxReport {
        lambda: hi,
        lambda_lower: lo,
        fractional: rounder.point.clone(),
        loads: sys.loads(&base),
        ratio: if hi > 0.0 {
            congestion / hi
        } else if congestion > 0.0 {
            f64::INFINITY
        } else {
            1.0
        },
        base,
        congestion,
        trials: params.trials,
        trial_congestion,
        searches,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MincostReport {
    pub base: ElementSet,
    pub cost: f64,
    pub lp_cost: f64,
    pub fractional: Vec<f64>,
    pub loads: Vec<f64>,
    /// `max_i load_i / b_i`.
    pub overflow: f64,
    pub deleted: ElementSet,
    pub attempts: usize,
    /// Whether some attempt met `cost <= (1+ε) · LP`.
    pub cost_target_met: bool,
}

/// Minimizes `c·x` over `B(M) ∩ {Ax <= b}` after deleting elements that alone
/// overflow a row, then swap-rounds until the cost is within `1+ε` of the LP.
pub fn solve_mincost_packing(m: &Matroid, sys: &PackingSystem, params: &SolverParams) -> Result<MincostReport> {
    params.validate()?;
    let n = m.n();
    sys.validate(n)?;
    let cost = sys.cost.clone().ok_or_else(|| Error::Schema {
        field: "packing.cost".into(),
        reason: "min-cost packing needs a cost vector".into(),
    })?;
    let deleted = ElementSet::from_indices(
        n,
        (0..n).filter(|&j| sys.matrix.iter().zip(&sys.rhs).any(|(row, &b)| row[j] > b + LOAD_TOL)),
    );
    let mut region = Region::new(m, Mode::B, sys.lp_rows(1.0));
    region.fixed_zero = deleted.clone();
    let out = region.optimize(&cost, Sense::Min)?;
    if !out.is_optimal() {
        return Err(Error::Infeasible);
    }
    let restricted = m.delete(&deleted);
    let rounder = Rounder::new(&restricted, &out.x, Mode::B)?;
    let target = out.value + params.epsilon * out.value.abs() + 1e-9;
    let mut best: Option<(f64, ElementSet)> = None;
    let mut attempts = 0;
    for t in 0..params.trials {
        attempts += 1;
        let b = rounder.round(&restricted, &mut params.trial_rng(0, t));
        let c = b.weight(&cost);
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, b));
        }
        if c <= target {
            break;
        }
    }
    let (c, base) = best.expect("at least one trial");
    let loads = sys.loads(&base);
    Ok(MincostReport {
        overflow: sys.overflow(&loads),
        loads,
        cost: c,
        lp_cost: out.value,
        fractional: rounder.point.clone(),
        base,
        deleted,
        attempts,
        cost_target_met: c <= target,
    })
}
