//! Target queries for several monotone submodular objectives.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::Region;
use crate::matroid::{order_by_weight, Matroid};
use crate::polytope::Mode;
use crate::set::ElementSet;
use crate::solvers::{
    guess_sets, multiobjective_continuous_greedy, MultiCertificate, MultiOutcome, Rounder, SolverParams, TargetVector,
};
use crate::submodular::Submodular;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ParetoOutcome {
    /// A set meeting every relaxed target `(1 - 1/e - ε) V_i`.
    Found {
        set: ElementSet,
        values: Vec<f64>,
    },
    /// No independent set reaches every target `V_i`.
    Certificate(MultiCertificate),
    Failure {
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ParetoReport {
    pub outcome: ParetoOutcome,
    /// Multiplier applied to the targets when accepting a set.
    pub factor: f64,
    pub branches_tried: usize,
    pub trials_run: usize,
    pub inconclusive_branches: usize,
}

impl ParetoReport {
    pub fn found(&self) -> Option<&ElementSet> {
        match &self.outcome {
            ParetoOutcome::Found { set, .. } => Some(set),
            _ => None,
        }
    }
}

/// Guesses a few high-value elements, runs multiobjective continuous greedy on
/// the contracted matroid and swap-rounds. Returns the first set reaching every
/// relaxed target; otherwise the certificate from the unguessed run, if any.
pub fn pareto_query(
    fs: &[Arc<Submodular>],
    m: &Matroid,
    targets: &TargetVector,
    params: &SolverParams,
) -> Result<ParetoReport> {
    params.validate()?;
    let n = m.n();
    if fs.len() != targets.len() {
        return Err(Error::Schema {
            field: "targets".into(),
            reason: format!("{} targets for {} functions", targets.len(), fs.len()),
        });
    }
    if let Some(f) = fs.iter().find(|f| f.n() != n) {
        return Err(Error::Inconsistent(format!(
            "function over {} elements for a matroid over {n}",
            f.n()
        )));
    }
    let factor = 1.0 - (-1.0f64).exp() - params.epsilon;
    let goals: Vec<f64> = targets.0.iter().map(|v| factor * v).collect();
    let meets = |s: &ElementSet| -> Option<Vec<f64>> {
        let values: Vec<f64> = fs.iter().map(|f| f.evaluate(s)).collect();
        values.iter().zip(&goals).all(|(v, g)| v >= g).then_some(values)
    };

    let score: Vec<f64> = (0..n)
        .map(|j| {
            let s = ElementSet::empty(n).with(j);
            fs.iter().zip(&targets.0).map(|(f, v)| f.evaluate(&s) / v).sum()
        })
        .collect();
    let order = order_by_weight(&score);
    let branches = guess_sets(n, &order, params.depth, |a| m.is_independent(a));

    let mut root_certificate = None;
    let mut trials_run = 0;
    let mut inconclusive = 0;
    for (b, a) in branches.iter().enumerate() {
        if let Some(values) = meets(a) {
            return Ok(ParetoReport {
                outcome: ParetoOutcome::Found { set: a.clone(), values },
                factor,
                branches_tried: b + 1,
                trials_run,
                inconclusive_branches: inconclusive,
            });
        }
        let contracted = m.contract(a)?;
        let conditioned: Vec<Submodular> = fs.iter().map(|f| f.conditioned(a)).collect();
        let residual = TargetVector(
            targets
                .0
                .iter()
                .zip(fs)
                .map(|(v, f)| (v - f.evaluate(a)).max(1e-9 * v))
                .collect(),
        );
        let mut region = Region::new(&contracted, Mode::P, vec![]);
        region.fixed_zero = a.clone();
        let refs: Vec<&Submodular> = conditioned.iter().collect();
        let out = multiobjective_continuous_greedy(
            &refs,
            &residual,
            &mut region,
            params,
            &mut params.fractional_rng(b as u64),
        )?;
        match out {
            MultiOutcome::Point(p) => {
                let rounder = Rounder::new(&contracted, &p.x, Mode::P)?;
                for t in 0..params.trials {
                    trials_run += 1;
                    let s = rounder
                        .round(&contracted, &mut params.trial_rng(b as u64, t))
                        .difference(a)
                        .union(a);
                    if !m.is_independent(&s) {
                        continue;
                    }
                    if let Some(values) = meets(&s) {
                        return Ok(ParetoReport {
                            outcome: ParetoOutcome::Found { set: s, values },
                            factor,
                            branches_tried: b + 1,
                            trials_run,
                            inconclusive_branches: inconclusive,
                        });
                    }
                }
            }
            MultiOutcome::Certificate(c) => {
                if a.is_empty() {
                    root_certificate = Some(c);
                }
            }
            MultiOutcome::Inconclusive { .. } => inconclusive += 1,
        }
    }
    let outcome = match root_certificate {
        Some(c) => ParetoOutcome::Certificate(c),
        None => ParetoOutcome::Failure {
            reason: format!(
                "no rounded set met every target after {} branches and {trials_run} trials",
                branches.len()
            ),
        },
    };
    Ok(ParetoReport {
        outcome,
        factor,
        branches_tried: branches.len(),
        trials_run,
        inconclusive_branches: inconclusive,
    })
}
