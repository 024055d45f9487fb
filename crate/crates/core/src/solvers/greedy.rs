//! Continuous greedy over a down-monotone region.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::lp::Region;
use crate::lp::{Certificate, Row, Sense};
use crate::solvers::{SolverParams, TargetVector};
use crate::submodular::{Estimate, Submodular};

/// Result of a continuous greedy run.
#[derive(Clone, Debug, Serialize)]
pub struct GreedyOutcome {
    pub x: Vec<f64>,
    /// `F(x)` per objective; exact when a closed form exists.
    pub values: Vec<Estimate>,
    pub steps: usize,
    pub cuts: usize,
}

impl GreedyOutcome {
    pub fn value(&self) -> f64 {
        self.values.first().map_or(0.0, |e| e.value)
    }
}

/// Evidence that no point of the region reaches every target.
#[derive(Clone, Debug, Serialize)]
pub struct MultiCertificate {
    /// Step at which the direction LP became infeasible.
    pub step: usize,
    pub point: Vec<f64>,
    /// Exact gradients used in the failing LP.
    pub gradients: Vec<Vec<f64>>,
    /// Exact `F_i` at `point`.
    pub values: Vec<f64>,
    /// Required gains `V_i - F_i(point)`.
    pub required: Vec<f64>,
    pub lp: Option<Certificate>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MultiOutcome {
    Point(GreedyOutcome),
    Certificate(MultiCertificate),
    /// The sampled LP was infeasible but exact gradients are unavailable.
    Inconclusive {
        step: usize,
        reason: String,
    },
}

struct Observation {
    gradient: Vec<f64>,
    gradient_se: f64,
    value: f64,
    value_se: f64,
}

fn observe<R: Rng>(f: &Submodular, y: &[f64], samples: usize, rng: &mut R) -> Result<Observation> {
    if f.has_closed_form() {
        return Ok(Observation {
            gradient: f.gradient_exact(y)?,
            gradient_se: 0.0,
            value: f.multilinear_exact(y)?,
            value_se: 0.0,
        });
    }
    let g = f.gradient_estimate(y, samples, rng)?;
    let v = f.multilinear_estimate(y, samples, rng)?;
    Ok(Observation {
        gradient_se: g.iter().map(|e| e.stderr).fold(0.0, f64::max),
        gradient: g.into_iter().map(|e| e.value).collect(),
        value: v.value,
        value_se: v.stderr,
    })
}

fn final_value<R: Rng>(f: &Submodular, x: &[f64], samples: usize, rng: &mut R) -> Result<Estimate> {
    if f.has_closed_form() {
        Ok(Estimate::exact(f.multilinear_exact(x)?))
    } else {
        f.multilinear_estimate(x, samples, rng)
    }
}

fn clamp_unit(y: &mut [f64]) {
    for v in y {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Ascends `F` over `region` in `params.steps` steps of size `1/T`, each along the
/// vertex maximizing the estimated gradient.
pub fn continuous_greedy<R: Rng>(
    f: &Submodular,
    region: &mut Region<'_>,
    params: &SolverParams,
    rng: &mut R,
) -> Result<GreedyOutcome> {
    let n = region.n();
    let t = params.steps.max(1);
    let mut y = vec![0.0; n];
    for _ in 0..t {
        let g: Vec<f64> = f
            .gradient_estimate(&y, params.samples, rng)?
            .into_iter()
            .map(|e| e.value)
            .collect();
        let out = region.optimize(&g, Sense::Max)?;
        if !out.is_optimal() {
            return Err(crate::error::Error::Infeasible);
        }
        for (yi, vi) in y.iter_mut().zip(&out.x) {
            *yi += vi / t as f64;
        }
    }
    clamp_unit(&mut y);
    let value = final_value(f, &y, params.samples, rng)?;
    Ok(GreedyOutcome {
        x: y,
        values: vec![value],
        steps: t,
        cuts: region.cuts().len(),
    })
}

/// Continuous greedy toward several targets at once. Each step needs a direction
/// `v` in the region with `v·∇F_i(y) >= V_i - F_i(y)` for every `i`; when no such
/// direction exists under exact gradients, the targets are unreachable.
pub fn multiobjective_continuous_greedy<R: Rng>(
    fs: &[&Submodular],
    targets: &TargetVector,
    region: &mut Region<'_>,
    params: &SolverParams,
    rng: &mut R,
) -> Result<MultiOutcome> {
    if fs.len() != targets.len() {
        return Err(crate::error::Error::Schema {
            field: "targets".into(),
            reason: format!("{} targets for {} functions", targets.len(), fs.len()),
        });
    }
    let n = region.n();
    let t = params.steps.max(1);
    let mut y = vec![0.0; n];
    for step in 0..t {
        let obs = fs
            .iter()
            .map(|f| observe(f, &y, params.samples, rng))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Row> = obs
            .iter()
            .zip(&targets.0)
            .map(|(o, &v)| {
                let slack = 4.0 * o.gradient_se * n as f64 + 4.0 * o.value_se;
                Row::ge(o.gradient.clone(), v - o.value - slack)
            })
            .collect();
        let objective = progress_objective(&obs.iter().map(|o| &o.gradient[..]).collect::<Vec<_>>(), targets, n);
        let sampled = obs.iter().any(|o| o.gradient_se > 0.0 || o.value_se > 0.0);
        let mut out = region.optimize_with(&objective, Sense::Max, &rows)?;
        if !out.is_optimal() {
            let exact = match exact_observations(fs, &y) {
                Ok(e) => e,
                Err(err) if sampled => {
                    return Ok(MultiOutcome::Inconclusive {
                        step,
                        reason: format!("sampled direction LP infeasible and exact gradients unavailable: {err}"),
                    })
                }
                Err(err) => return Err(err),
            };
            let required: Vec<f64> = exact.iter().zip(&targets.0).map(|(o, &v)| v - o.value).collect();
            // Relax slightly so that ties never produce a certificate.
            let rows: Vec<Row> = exact
                .iter()
                .zip(&required)
                .map(|(o, &r)| Row::ge(o.gradient.clone(), r - 1e-7 * (1.0 + r.abs())))
                .collect();
            let objective = progress_objective(&exact.iter().map(|o| &o.gradient[..]).collect::<Vec<_>>(), targets, n);
            out = region.optimize_with(&objective, Sense::Max, &rows)?;
            if !out.is_optimal() {
                return Ok(MultiOutcome::Certificate(MultiCertificate {
                    step,
                    point: y,
                    gradients: exact.iter().map(|o| o.gradient.clone()).collect(),
                    values: exact.iter().map(|o| o.value).collect(),
                    required,
                    lp: out.certificate,
                }));
            }
        }
        for (yi, vi) in y.iter_mut().zip(&out.x) {
            *yi += vi / t as f64;
        }
    }
    clamp_unit(&mut y);
    let values = fs
        .iter()
        .map(|f| final_value(f, &y, params.samples, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiOutcome::Point(GreedyOutcome {
        x: y,
        values,
        steps: t,
        cuts: region.cuts().len(),
    }))
}

fn exact_observations(fs: &[&Submodular], y: &[f64]) -> Result<Vec<Observation>> {
    fs.iter()
        .map(|f| {
            Ok(Observation {
                gradient: f.gradient_exact(y)?,
                gradient_se: 0.0,
                value: f.multilinear_exact(y)?,
                value_se: 0.0,
            })
        })
        .collect()
}

/// `Σ_i ∇F_i / V_i`, so the chosen direction favors progress on every target.
fn progress_objective(gradients: &[&[f64]], targets: &TargetVector, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n];
    for (g, v) in gradients.iter().zip(&targets.0) {
        for (ci, gi) in c.iter_mut().zip(g.iter()) {
            *ci += gi / v;
        }
    }
    c
}
