//! Elementary-operation traces of a rounding run.
//!
//! Each step records the coordinates it touched, their values before the step,
//! the values under both branches with the branch probabilities, and the branch
//! taken. That is enough to check, step by step, that the process is a
//! martingale that moves at most two coordinates and preserves their sum.

use serde::{Deserialize, Serialize};

/// Sums and conditional expectations must match to this precision.
pub const TRACE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub indices: Vec<usize>,
    pub old: Vec<f64>,
    /// New values of `indices` under each branch.
    pub outcomes: [Vec<f64>; 2],
    pub probs: [f64; 2],
    pub taken: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundingTrace {
    pub initial: Vec<f64>,
    pub steps: Vec<TraceStep>,
    #[serde(skip)]
    current: Vec<f64>,
}

/// Violations found by [`RoundingTrace::check`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TraceCheck {
    pub steps: usize,
    pub too_many_coordinates: usize,
    pub sum_not_preserved: usize,
    pub not_martingale: usize,
    pub inconsistent: usize,
}

impl TraceCheck {
    pub fn passed(&self) -> bool {
        self.too_many_coordinates == 0
            && self.sum_not_preserved == 0
            && self.not_martingale == 0
            && self.inconsistent == 0
    }

    pub fn absorb(&mut self, other: &TraceCheck) {
        self.steps += other.steps;
        self.too_many_coordinates += other.too_many_coordinates;
        self.sum_not_preserved += other.sum_not_preserved;
        self.not_martingale += other.not_martingale;
        self.inconsistent += other.inconsistent;
    }
}

impl RoundingTrace {
    pub fn new(initial: Vec<f64>) -> Self {
        Self {
            current: initial.clone(),
            initial,
            steps: Vec::new(),
        }
    }

    /// The state after every recorded step.
    pub fn current(&self) -> &[f64] {
        &self.current
    }

    /// Records a step and applies the taken branch.
    pub fn record(&mut self, indices: &[usize], outcomes: [Vec<f64>; 2], probs: [f64; 2], taken: usize) {
        let old = indices.iter().map(|&i| self.current[i]).collect();
        for (k, &i) in indices.iter().enumerate() {
            self.current[i] = outcomes[taken][k];
        }
        self.steps.push(TraceStep {
            indices: indices.to_vec(),
            old,
            outcomes,
            probs,
            taken,
        });
    }

    /// Overwrites a coordinate without recording a step (floating-point clamping).
    pub fn snap(&mut self, i: usize, v: f64) {
        self.current[i] = v;
    }

    /// Replays the trace from `initial` and checks every step.
    pub fn check(&self) -> TraceCheck {
        let mut state = self.initial.clone();
        let mut out = TraceCheck {
            steps: self.steps.len(),
            ..Default::default()
        };
        for s in &self.steps {
            if s.indices.len() > 2 || s.indices.is_empty() {
                out.too_many_coordinates += 1;
            }
            let consistent = s.indices.len() == s.old.len()
                && s.outcomes.iter().all(|o| o.len() == s.indices.len())
                && s.taken < 2
                && s.indices
                    .iter()
                    .zip(&s.old)
                    .all(|(&i, &v)| i < state.len() && (state[i] - v).abs() <= TRACE_TOL);
            if !consistent {
                out.inconsistent += 1;
                continue;
            }
            if (s.probs[0] + s.probs[1] - 1.0).abs() > TRACE_TOL || s.probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                out.not_martingale += 1;
            }
            if s.indices.len() == 2 {
                let before = s.old[0] + s.old[1];
                if s.outcomes.iter().any(|o| (o[0] + o[1] - before).abs() > TRACE_TOL) {
                    out.sum_not_preserved += 1;
                }
            }
            for k in 0..s.indices.len() {
                let mean = s.probs[0] * s.outcomes[0][k] + s.probs[1] * s.outcomes[1][k];
                if (mean - s.old[k]).abs() > TRACE_TOL {
                    out.not_martingale += 1;
                }
            }
            for (k, &i) in s.indices.iter().enumerate() {
                state[i] = s.outcomes[s.taken][k];
            }
        }
        out
    }
}
