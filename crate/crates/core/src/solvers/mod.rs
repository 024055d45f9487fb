//! Optimization pipelines built on the rounding procedures: continuous greedy
//! (single and multiobjective), submodular maximization under a matroid and
//! knapsack constraints, loose packing, minimax congestion, min-cost packing and
//! pareto target queries.

mod greedy;
mod knapsack;
mod packing;
mod pareto;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use greedy::{continuous_greedy, multiobjective_continuous_greedy, GreedyOutcome, MultiCertificate, MultiOutcome};
pub use knapsack::{solve_loose_packing, solve_matroid_knapsacks, KnapsackReport, LooseReport};
pub use packing::{solve_mincost_packing, solve_minimax, MincostReport, MinimaxReport};
pub use pareto::{pareto_query, ParetoOutcome, ParetoReport};

use crate::error::{Error, Result};
use crate::lp::Row;
use crate::matroid::Matroid;
use crate::polytope::{decompose_base, decompose_point, separate, ConvexCombination, Mode};
use crate::rng::{stream, Domain, TrialRng};
use crate::rounding::{swap_round_point_unchecked, swap_round_unchecked};
use crate::set::ElementSet;

/// Tolerance for packing feasibility of rounded sets.
pub const LOAD_TOL: f64 = 1e-9;

/// Constraint matrix `A` with right-hand side `b` and an optional cost vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Vec<f64>>,
}

impl PackingSystem {
    pub fn new(matrix: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let n = matrix.first().map_or(0, Vec::len);
        let sys = Self {
            matrix,
            rhs,
            cost: None,
        };
        sys.validate(n)?;
        Ok(sys)
    }

    pub fn with_cost(mut self, cost: Vec<f64>) -> Result<Self> {
        let n = self.matrix.first().map_or(cost.len(), Vec::len);
        self.cost = Some(cost);
        self.validate(n)?;
        Ok(self)
    }

    /// `A` with every row of `rhs` equal to `lambda`.
    pub fn uniform_rhs(matrix: Vec<Vec<f64>>, lambda: f64) -> Result<Self> {
        let m = matrix.len();
        Self::new(matrix, vec![lambda; m])
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    /// Checks dimensions against a ground set of size `n` and entry ranges.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.rhs.len() != self.matrix.len() {
            return Err(schema(
                "packing.rhs",
                format!("{} entries for {} rows", self.rhs.len(), self.matrix.len()),
            ));
        }
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(schema(
                    format!("packing.matrix[{r}]"),
                    format!("length {} does not match ground set size {n}", row.len()),
                ));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(schema(
                    format!("packing.matrix[{r}]"),
                    format!("entry {v} outside [0,1]"),
                ));
            }
        }
        if let Some(b) = self.rhs.iter().find(|b| !b.is_finite() || **b < 0.0) {
            return Err(schema("packing.rhs", format!("entry {b} is negative or not finite")));
        }
        if let Some(c) = &self.cost {
            if c.len() != n {
                return Err(schema(
                    "packing.cost",
                    format!("length {} does not match ground set size {n}", c.len()),
                ));
            }
            if let Some(v) = c.iter().find(|v| !v.is_finite()) {
                return Err(schema("packing.cost", format!("entry {v} is not finite")));
            }
        }
        Ok(())
    }

    /// `A·1_S`.
    pub fn loads(&self, s: &ElementSet) -> Vec<f64> {
        self.matrix.iter().map(|row| s.weight(row)).collect()
    }

    /// `A·x`.
    pub fn loads_of(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_feasible(&self, s: &ElementSet) -> bool {
        self.loads(s).iter().zip(&self.rhs).all(|(l, b)| *l <= b + LOAD_TOL)
    }

    /// `max_i load_i / b_i`, with `0/0 = 0`.
    pub fn overflow(&self, loads: &[f64]) -> f64 {
        loads
            .iter()
            .zip(&self.rhs)
            .map(|(&l, &b)| {
                if l <= LOAD_TOL {
                    0.0
                } else if b <= 0.0 {
                    f64::INFINITY
                } else {
                    l / b
                }
            })
            .fold(0.0, f64::max)
    }

    /// The rows `A x <= factor · b`.
    pub fn lp_rows(&self, factor: f64) -> Vec<Row> {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| Row::le(row.clone(), factor * b))
            .collect()
    }
}

fn schema(field: impl Into<String>, reason: String) -> Error {
    Error::Schema {
        field: field.into(),
        reason,
    }
}

/// Target values `V_1..V_k` for a pareto query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetVector(pub Vec<f64>);

impl TargetVector {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(schema("targets", "at least one target is required".into()));
        }
        if let Some(t) = v.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(schema("targets", format!("target {t} is not positive")));
        }
        Ok(Self(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Parameters shared by the solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub epsilon: f64,
    /// Continuous greedy step count `T`.
    pub steps: usize,
    /// Samples per gradient estimate.
    pub samples: usize,
    /// Largest guess set enumerated.
    pub depth: usize,
    /// Rounding repetitions.
    pub trials: usize,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            steps: 100,
            samples: 2000,
            depth: 2,
            trials: 25,
            seed: 0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(schema("epsilon", format!("{} is not in (0, 1/2)", self.epsilon)));
        }
        if self.steps < 10 {
            return Err(schema("steps", format!("{} is below the minimum of 10", self.steps)));
        }
        if self.samples == 0 {
            return Err(schema("samples", "must be positive".into()));
        }
        if self.trials == 0 {
            return Err(schema("trials", "must be positive".into()));
        }
        Ok(())
    }

    /// RNG for the fractional phase of branch `branch`.
    pub(crate) fn fractional_rng(&self, branch: u64) -> TrialRng {
        stream(self.seed, Domain::Solver, (branch << 32) | 0xffff_ffff)
    }

    /// RNG for rounding trial `trial` of branch `branch`.
    pub(crate) fn trial_rng(&self, branch: u64, trial: usize) -> TrialRng {
        stream(self.seed, Domain::Solver, (branch << 32) | trial as u64)
    }
}

/// Pulls a nearly feasible LP output into `P(M)` (or `B(M)`): clamps to `[0,1]`,
/// scales down violated rank constraints and, for bases, raises coordinates until
/// the point is maximal.
pub fn project_to_polytope(m: &Matroid, x: &[f64], mode: Mode) -> Result<Vec<f64>> {
    let n = m.n();
    let mut y: Vec<f64> = x
        .iter()
        .map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 })
        .collect();
    for v in &mut y {
        if *v < 1e-13 {
            *v = 0.0;
        }
    }
    let empty = m.empty_set();
    for _ in 0..4 * n + 8 {
        let violated = m.min_slack(&y, &empty, &empty)?.filter(|s| s.slack < -1e-13);
        let Some(v) = violated else { break };
        let r = m.rank(&v.set) as f64;
        let total = v.set.weight(&y);
        let factor = if total > 0.0 { (r / total) * (1.0 - 1e-15) } else { 0.0 };
        for i in v.set.iter() {
            y[i] *= factor;
        }
    }
    if separate(m, &y)?.is_some() {
        return Err(Error::Numerical(
            "could not project the point into the matroid polytope".into(),
        ));
    }
    if mode == Mode::B {
        for i in 0..n {
            let room = m
                .min_slack(&y, &ElementSet::from_indices(n, [i]), &empty)?
                .map_or(0.0, |s| s.slack.max(0.0));
            y[i] = (y[i] + room).min(1.0);
        }
    }
    Ok(y)
}

/// A point prepared for repeated swap rounding.
#[derive(Clone, Debug)]
pub struct Rounder {
    pub mode: Mode,
    pub point: Vec<f64>,
    pub combination: ConvexCombination,
}

impl Rounder {
    pub fn new(m: &Matroid, x: &[f64], mode: Mode) -> Result<Self> {
        let point = project_to_polytope(m, x, mode)?;
        let combination = match mode {
            Mode::B => decompose_base(m, &point)?,
            Mode::P => decompose_point(m, &point)?,
        };
        Ok(Self {
            mode,
            point,
            combination,
        })
    }

    pub fn round<R: Rng>(&self, m: &Matroid, rng: &mut R) -> ElementSet {
        match self.mode {
            Mode::B => swap_round_unchecked(&self.combination, m, rng, None),
            Mode::P => swap_round_point_unchecked(&self.combination, m, rng),
        }
    }
}

/// Subsets of `0..n` of size at most `depth` that pass `keep`, by size and then
/// in the lexicographic order of their positions in `order`.
pub(crate) fn guess_sets(
    n: usize,
    order: &[usize],
    depth: usize,
    mut keep: impl FnMut(&ElementSet) -> bool,
) -> Vec<ElementSet> {
    let mut out = vec![ElementSet::empty(n)];
    let mut frontier: Vec<(ElementSet, usize)> = vec![(ElementSet::empty(n), 0)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (s, start) in &frontier {
            for (pos, &e) in order.iter().enumerate().skip(*start) {
                let t = s.with(e);
                if keep(&t) {
                    next.push((t, pos + 1));
                }
            }
        }
        out.extend(next.iter().map(|(s, _)| s.clone()));
        frontier = next;
    }
    out
}
