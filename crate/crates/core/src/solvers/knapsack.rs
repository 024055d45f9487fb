//! Submodular maximization under a matroid and packing constraints.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::lp::{Region, Row};
use crate::matroid::{order_by_weight, Matroid};
use crate::polytope::Mode;
use crate::set::ElementSet;
use crate::solvers::{continuous_greedy, guess_sets, PackingSystem, Rounder, SolverParams, LOAD_TOL};
use crate::submodular::Submodular;

/// The best set that violated some constraint, kept when nothing feasible was found.
#[derive(Clone, Debug, Serialize)]
pub struct InfeasibleCandidate {
    pub set: ElementSet,
    pub value: f64,
    pub overflow: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KnapsackReport {
    pub feasible: bool,
    pub set: Option<ElementSet>,
    pub value: f64,
    pub loads: Vec<f64>,
    /// Guess set of the branch that produced `set`.
    pub guess: Option<ElementSet>,
    pub fractional_value: f64,
    pub guesses_tried: usize,
    pub trials_per_guess: usize,
    pub feasible_trials: usize,
    /// `full` when the enumeration depth reaches `1/ε⁴`, `truncated` otherwise.
    pub regime: String,
    pub required_depth: f64,
    pub best_infeasible: Option<InfeasibleCandidate>,
}

/// Sizes `A_ij / b_i`; rows with `b_i = 0` make every positive entry infinite.
fn normalized(sys: &PackingSystem) -> Vec<Vec<f64>> {
    sys.matrix
        .iter()
        .zip(&sys.rhs)
        .map(|(row, &b)| {
            row.iter()
                .map(|&a| {
                    if a == 0.0 {
                        0.0
                    } else if b > 0.0 {
                        a / b
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect()
}

/// Marginal value of the last element when `a` is built greedily.
fn greedy_prefix_threshold(f: &Submodular, a: &ElementSet) -> f64 {
    let mut chosen = ElementSet::empty(f.n());
    let mut rest: Vec<usize> = a.to_vec();
    let mut last = f64::INFINITY;
    while !rest.is_empty() {
        let (pos, gain) = rest
            .iter()
            .enumerate()
            .map(|(p, &e)| (p, f.evaluate(&chosen.with(e)) - f.evaluate(&chosen)))
            .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        chosen.insert(rest.remove(pos));
        last = gain;
    }
    last
}

struct Best {
    value: f64,
    set: ElementSet,
    guess: ElementSet,
}

/// Enumerates small guess sets `A`, contracts them, discards large or valuable
/// items, runs continuous greedy over `(1-ε)` times the residual region and keeps
/// the best feasible rounded set `A ∪ R` over all guesses and trials.
pub fn solve_matroid_knapsacks(
    f: &Arc<Submodular>,
    m: &Matroid,
    sys: &PackingSystem,
    params: &SolverParams,
) -> Result<KnapsackReport> {
    params.validate()?;
    let n = m.n();
    sys.validate(n)?;
    let k = sys.rows().max(1) as f64;
    let eps = params.epsilon;
    let sizes = normalized(sys);

    let singles: Vec<f64> = (0..n).map(|i| f.evaluate(&ElementSet::empty(n).with(i))).collect();
    let order = order_by_weight(&singles);
    let guesses = guess_sets(n, &order, params.depth, |a| {
        m.is_independent(a) && sizes.iter().all(|row| a.weight(row) <= 1.0 + LOAD_TOL)
    });

    let mut best: Option<Best> = None;
    let mut best_bad: Option<InfeasibleCandidate> = None;
    let mut fractional_value = 0.0;
    let mut feasible_trials = 0;
    for (b, a) in guesses.iter().enumerate() {
        let contracted = m.contract(a)?;
        let capacity: Vec<f64> = sizes.iter().map(|row| (1.0 - a.weight(row)).max(0.0)).collect();
        let fa = f.conditioned(a);
        let threshold = if a.is_empty() {
            f64::INFINITY
        } else {
            greedy_prefix_threshold(f, a)
        };
        let mut removed = a.clone();
        for i in (0..n).filter(|&i| !a.contains(i)) {
            let gain = fa.evaluate(&ElementSet::empty(n).with(i));
            let too_big = sizes
                .iter()
                .zip(&capacity)
                .any(|(row, &cj)| row[i] > k * eps.powi(3) * cj);
            if gain > threshold + 1e-12 || too_big {
                removed.insert(i);
            }
        }
        let rows: Vec<Row> = sizes
            .iter()
            .zip(&capacity)
            .map(|(row, &cj)| {
                let coeffs = (0..n).map(|i| if removed.contains(i) { 0.0 } else { row[i] }).collect();
                Row::le(coeffs, (1.0 - eps) * cj)
            })
            .collect();
        let x = if removed.len() == n {
            vec![0.0; n]
        } else {
            let mut region = Region::new(&contracted, Mode::P, rows).with_scale(1.0 - eps);
            region.fixed_zero = removed.clone();
            let out = continuous_greedy(&fa, &mut region, params, &mut params.fractional_rng(b as u64))?;
            out.x
        };
        let rounder = Rounder::new(&contracted, &x, Mode::P)?;
        for t in 0..params.trials {
            let r = rounder.round(&contracted, &mut params.trial_rng(b as u64, t));
            let s = r.difference(&removed).union(a);
            let value = f.evaluate(&s);
            if m.is_independent(&s) && sys.is_feasible(&s) {
                feasible_trials += 1;
                if best.as_ref().is_none_or(|bst| value > bst.value) {
                    fractional_value = fa.multilinear_exact(&x).unwrap_or(f64::NAN) + f.evaluate(a);
                    best = Some(Best {
                        value,
                        set: s,
                        guess: a.clone(),
                    });
                }
            } else {
                let overflow = sys.overflow(&sys.loads(&s));
                if best_bad.as_ref().is_none_or(|c| overflow < c.overflow) {
                    best_bad = Some(InfeasibleCandidate {
                        set: s,
                        value,
                        overflow,
                    });
                }
            }
        }
    }
    let required_depth = eps.powi(-4);
    let regime = if params.depth as f64 >= required_depth {
        "full"
    } else {
        "truncated"
    }
    .to_string();
    Ok(match best {
        Some(bst) => KnapsackReport {
            feasible: true,
            loads: sys.loads(&bst.set),
            value: bst.value,
            set: Some(bst.set),
            guess: Some(bst.guess),
            fractional_value,
            guesses_tried: guesses.len(),
            trials_per_guess: params.trials,
            feasible_trials,
            regime,
            required_depth,
            best_infeasible: None,
        },
        None => KnapsackReport {
            feasible: false,
            set: None,
            value: 0.0,
            loads: vec![0.0; sys.rows()],
            guess: None,
            fractional_value,
            guesses_tried: guesses.len(),
            trials_per_guess: params.trials,
            feasible_trials,
            regime,
            required_depth,
            best_infeasible: best_bad,
        },
    })
}

/// Looseness `b_i >= A_ij · c · ln k` with `c = 6/ε²`.
#[derive(Clone, Debug, Serialize)]
pub struct Looseness {
    pub c: f64,
    pub satisfied: bool,
    /// `min_ij b_i / (A_ij c ln k)` over positive entries; absent when no entry constrains.
    pub worst_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LooseReport {
    pub feasible: bool,
    pub set: Option<ElementSet>,
    pub value: f64,
    pub loads: Vec<f64>,
    pub fractional_value: f64,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub looseness: Looseness,
    pub warnings: Vec<String>,
}

pub fn looseness(sys: &PackingSystem, epsilon: f64) -> Looseness {
    let c = 6.0 / (epsilon * epsilon);
    let log_k = (sys.rows().max(1) as f64).ln();
    let mut worst = f64::INFINITY;
    for (row, &b) in sys.matrix.iter().zip(&sys.rhs) {
        for &a in row.iter().filter(|&&a| a > 0.0) {
            if log_k > 0.0 {
                worst = worst.min(b / (a * log_k) / c);
            }
        }
    }
    let worst_ratio = worst.is_finite().then_some(worst);
    Looseness {
        c,
        satisfied: worst_ratio.is_none_or(|w| w >= 1.0),
        worst_ratio,
    }
}

/// Continuous greedy over `(1-ε)(P(M) ∩ {Ax <= b})` followed by swap rounding;
/// a trial fails when the rounded set overflows some row.
pub fn solve_loose_packing(
    f: &Arc<Submodular>,
    m: &Matroid,
    sys: &PackingSystem,
    params: &SolverParams,
) -> Result<LooseReport> {
    params.validate()?;
    let n = m.n();
    sys.validate(n)?;
    let eps = params.epsilon;
    let loose = looseness(sys, eps);
    let mut warnings = Vec::new();
    if !loose.satisfied {
        warnings.push(format!(
            "rows are not loose enough: b_i / (A_ij ln k) reaches only {:.3} of c = {:.3}",
            loose.worst_ratio.unwrap_or(0.0),
            loose.c
        ));
    }
    let mut region = Region::new(m, Mode::P, sys.lp_rows(1.0 - eps)).with_scale(1.0 - eps);
    let out = continuous_greedy(f, &mut region, params, &mut params.fractional_rng(0))?;
    let rounder = Rounder::new(m, &out.x, Mode::P)?;
    let mut best: Option<(f64, ElementSet)> = None;
    let mut failures = 0;
    for t in 0..params.trials {
        let r = rounder.round(m, &mut params.trial_rng(0, t));
        if sys.is_feasible(&r) {
            let v = f.evaluate(&r);
            if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, r));
            }
        } else {
            failures += 1;
        }
    }
    let (value, set) = match best {
        Some((v, s)) => (v, Some(s)),
        None => (0.0, None),
    };
    Ok(LooseReport {
        feasible: set.is_some(),
        loads: set.as_ref().map_or(vec![0.0; sys.rows()], |s| sys.loads(s)),
        set,
        value,
        fractional_value: out.value(),
        trials: params.trials,
        failures,
        failure_rate: failures as f64 / params.trials as f64,
        looseness: loose,
        warnings,
    })
}
