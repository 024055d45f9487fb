//! Monte Carlo checks of the rounding guarantees: marginals, negative
//! correlation, Chernoff-type tails for linear functions and lower tails for
//! monotone submodular functions.
//!
//! Every check is one-sided with a `4·SE` allowance. Trials draw from
//! per-trial streams and are aggregated in trial order, so reports depend only
//! on the seed, never on the number of workers.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::polytope::{check_membership, decompose_base, decompose_point, ConvexCombination, Mode};
use crate::rng::{stream, Domain};
use crate::rounding::{
    adjust_pipage, independent_round, pipage_round_unchecked, swap_round_point_unchecked, swap_round_unchecked,
    RoundingTrace, TraceCheck,
};
use crate::set::ElementSet;
use crate::submodular::Submodular;

/// Standard errors allowed before a check fails.
pub const SLACK_SE: f64 = 4.0;

/// Absolute allowance for ties and rounding of thresholds.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Swap rounding of a base-polytope point.
    Swap,
    /// Pipage rounding of a base-polytope point.
    Pipage,
    /// Adjust to a base polytope, then pipage rounding.
    AdjustPipage,
    /// Swap rounding of a matroid-polytope point via independent sets.
    SwapPoint,
    Independent,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Swap,
        Method::Pipage,
        Method::AdjustPipage,
        Method::SwapPoint,
        Method::Independent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Swap => "swap",
            Method::Pipage => "pipage",
            Method::AdjustPipage => "adjust-pipage",
            Method::SwapPoint => "swap-point",
            Method::Independent => "independent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    /// The polytope the input point must lie in, if any.
    pub fn polytope(self) -> Option<Mode> {
        match self {
            Method::Swap | Method::Pipage => Some(Mode::B),
            Method::AdjustPipage | Method::SwapPoint => Some(Mode::P),
            Method::Independent => None,
        }
    }

    pub fn is_swap(self) -> bool {
        matches!(self, Method::Swap | Method::SwapPoint)
    }
}

/// A point prepared for repeated rounding by one method.
#[derive(Clone, Debug)]
pub struct Sampler {
    pub method: Method,
    pub matroid: Matroid,
    pub point: Vec<f64>,
    pub combination: Option<ConvexCombination>,
}

impl Sampler {
    /// Checks the point against the method's polytope and decomposes it once
    /// for the swap methods. A supplied combination is used as is.
    pub fn new(method: Method, m: &Matroid, x: &[f64], combination: Option<&ConvexCombination>) -> Result<Self> {
        if x.len() != m.n() {
            return Err(Error::Schema {
                field: "point".into(),
                reason: format!("length {} does not match ground set size {}", x.len(), m.n()),
            });
        }
        if let Some(mode) = method.polytope() {
            if !check_membership(m, x, mode)? {
                return Err(Error::NotInPolytope {
                    polytope: mode.name(),
                    reason: format!("{} rounding needs a point of this polytope", method.name()),
                });
            }
        } else if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Schema {
                field: "point".into(),
                reason: "coordinates must lie in [0,1]".into(),
            });
        }
        let combination = match method {
            Method::Swap | Method::SwapPoint => {
                let mode = method.polytope().unwrap();
                Some(match combination {
                    Some(c) => {
                        c.validate(m, mode)?;
                        c.clone()
                    }
                    None if mode == Mode::B => decompose_base(m, x)?,
                    None => decompose_point(m, x)?,
                })
            }
            _ => None,
        };
        Ok(Self {
            method,
            matroid: m.clone(),
            point: x.to_vec(),
            combination,
        })
    }

    /// Whether every output is a base.
    pub fn outputs_bases(&self) -> bool {
        matches!(self.method, Method::Swap | Method::Pipage)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<ElementSet> {
        self.sample_impl(rng, None)
    }

    /// A sample with its elementary-step trace. Swap rounding of independent sets
    /// and independent rounding are not traced.
    pub fn sample_traced<R: Rng>(&self, rng: &mut R) -> Result<(ElementSet, Option<RoundingTrace>)> {
        match self.method {
            Method::Swap | Method::Pipage | Method::AdjustPipage => {
                let mut trace = RoundingTrace::new(self.point.clone());
                let s = self.sample_impl(rng, Some(&mut trace))?;
                Ok((s, Some(trace)))
            }
            _ => Ok((self.sample_impl(rng, None)?, None)),
        }
    }

    fn sample_impl<R: Rng>(&self, rng: &mut R, trace: Option<&mut RoundingTrace>) -> Result<ElementSet> {
        let m = &self.matroid;
        match self.method {
            Method::Swap => Ok(swap_round_unchecked(self.combination.as_ref().unwrap(), m, rng, trace)),
            Method::SwapPoint => Ok(swap_round_point_unchecked(self.combination.as_ref().unwrap(), m, rng)),
            Method::Pipage => Ok(pipage_round_unchecked(m, &self.point, rng, trace)?.base),
            Method::AdjustPipage => Ok(adjust_pipage(m, &self.point, rng, trace)?.base),
            Method::Independent => Ok(independent_round(&self.point, rng)),
        }
    }

    /// Sample number `trial` under `seed`.
    pub fn trial(&self, seed: u64, trial: usize) -> Result<ElementSet> {
        self.sample(&mut stream(seed, Domain::Rounding, trial as u64))
    }
}

/// Trial count, seed and worker count for a batch of checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Harness {
    pub trials: usize,
    pub seed: u64,
    #[serde(skip)]
    pub jobs: usize,
}

impl Harness {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self { trials, seed, jobs: 1 }
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    /// `f(0), …, f(trials-1)` in order, fanned out over `jobs` workers.
    pub fn map<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.jobs > 1 {
            use rayon::prelude::*;
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build() {
                return pool.install(|| (0..self.trials).into_par_iter().map(&f).collect());
            }
        }
        (0..self.trials).map(f).collect()
    }

    /// All samples of `sampler`, in trial order.
    pub fn samples(&self, sampler: &Sampler) -> Result<Vec<ElementSet>> {
        self.map(|t| sampler.trial(self.seed, t)).into_iter().collect()
    }
}

/// Wilson score interval for `k` successes in `n` trials at `z` standard deviations.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Binomial standard error `sqrt(p(1-p)/n)`.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// `(e^δ / (1+δ)^{1+δ})^μ`.
pub fn chernoff_upper(mu: f64, delta: f64) -> f64 {
    if delta <= 0.0 {
        return 1.0;
    }
    (mu * (delta - (1.0 + delta) * (1.0 + delta).ln())).exp().min(1.0)
}

/// `e^{-μδ²/3}`, valid for `δ <= 1`.
pub fn chernoff_upper_simple(mu: f64, delta: f64) -> f64 {
    (-mu * delta * delta / 3.0).exp()
}

/// `e^{-μδ²/2}`.
pub fn chernoff_lower(mu: f64, delta: f64) -> f64 {
    (-mu * delta * delta / 2.0).exp()
}

/// `e^{-μ₀δ²/8}`.
pub fn submodular_lower(mu0: f64, delta: f64) -> f64 {
    (-mu0 * delta * delta / 8.0).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalEntry {
    pub element: usize,
    pub x: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub ci: (f64, f64),
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalReport {
    pub method: Method,
    pub trials: usize,
    pub seed: u64,
    pub elements: Vec<MarginalEntry>,
    /// Outputs that were dependent or, for base methods, of the wrong size.
    pub structural_violations: usize,
    pub passed: bool,
}

/// Per-element inclusion frequencies; element `i` fails when
/// `|p̂_i - x_i| > 4·sqrt(x_i(1-x_i)/N)`.
pub fn estimate_marginals(sampler: &Sampler, harness: &Harness) -> Result<MarginalReport> {
    let samples = harness.samples(sampler)?;
    Ok(marginals_from_samples(sampler, harness, &samples))
}

pub fn marginals_from_samples(sampler: &Sampler, harness: &Harness, samples: &[ElementSet]) -> MarginalReport {
    let n = sampler.point.len();
    let d = sampler.matroid.rank_full();
    let mut counts = vec![0usize; n];
    let mut structural = 0;
    for s in samples {
        for i in s.iter() {
            counts[i] += 1;
        }
        let bad_size = sampler.outputs_bases() && s.len() != d;
        if bad_size || !sampler.matroid.is_independent(s) {
            structural += 1;
        }
    }
    let trials = samples.len();
    let elements: Vec<MarginalEntry> = (0..n)
        .map(|i| {
            let x = sampler.point[i];
            let estimate = counts[i] as f64 / trials as f64;
            let stderr = binomial_se(x, trials);
            MarginalEntry {
                element: i,
                x,
                estimate,
                stderr,
                ci: wilson_interval(counts[i], trials, SLACK_SE),
                pass: (estimate - x).abs() <= SLACK_SE * stderr + TIE_TOL,
            }
        })
        .collect();
    let passed = structural == 0 && elements.iter().all(|e| e.pass);
    MarginalReport {
        method: sampler.method,
        trials,
        seed: harness.seed,
        elements,
        structural_violations: structural,
        passed,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationCheck {
    pub subset: Vec<usize>,
    /// Whether the check is on `Π (1 - X_i)`.
    pub complement: bool,
    pub estimate: f64,
    pub product: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationReport {
    pub method: Method,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CorrelationCheck>,
    pub passed: bool,
}

/// Every pair of elements and `extra` random subsets of size 3 to 5.
pub fn default_subsets(n: usize, extra: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(vec![i, j]);
        }
    }
    if n >= 3 {
        let mut rng = stream(seed, Domain::Subsets, 0);
        let elems: Vec<usize> = (0..n).collect();
        for _ in 0..extra {
            let size = rng.gen_range(3..=n.min(5));
            let mut s: Vec<usize> = elems.choose_multiple(&mut rng, size).copied().collect();
            s.sort_unstable();
            out.push(s);
        }
    }
    out
}

/// One-sided checks `Ê[Π X_i] <= Π x_i + 4·SE` and the same for complements.
pub fn test_negative_correlation(
    sampler: &Sampler,
    subsets: &[Vec<usize>],
    harness: &Harness,
) -> Result<CorrelationReport> {
    let samples = harness.samples(sampler)?;
    correlation_from_samples(sampler, subsets, harness, &samples)
}

pub fn correlation_from_samples(
    sampler: &Sampler,
    subsets: &[Vec<usize>],
    harness: &Harness,
    samples: &[ElementSet],
) -> Result<CorrelationReport> {
    let n = sampler.point.len();
    if subsets.is_empty() {
        return Err(Error::Contract("at least one subset is required".into()));
    }
    let sets = subsets
        .iter()
        .map(|s| {
            if let Some(&i) = s.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if s.is_empty() {
                return Err(Error::Contract("subsets must be nonempty".into()));
            }
            Ok(ElementSet::from_indices(n, s.iter().copied()))
        })
        .collect::<Result<Vec<_>>>()?;
    let trials = samples.len();
    let mut checks = Vec::with_capacity(2 * sets.len());
    for (raw, t) in subsets.iter().zip(&sets) {
        let all = samples.iter().filter(|s| t.is_subset(s)).count();
        let none = samples.iter().filter(|s| t.is_disjoint(s)).count();
        for (complement, hits) in [(false, all), (true, none)] {
            let product: f64 = t
                .iter()
                .map(|i| {
                    if complement {
                        1.0 - sampler.point[i]
                    } else {
                        sampler.point[i]
                    }
                })
                .product();
            let estimate = hits as f64 / trials as f64;
            let stderr = binomial_se(product, trials);
            checks.push(CorrelationCheck {
                subset: {
                    let mut v = raw.clone();
                    v.sort_unstable();
                    v.dedup();
                    v
                },
                complement,
                estimate,
                product,
                stderr,
                pass: estimate <= product + SLACK_SE * stderr + TIE_TOL,
            });
        }
    }
    Ok(CorrelationReport {
        method: sampler.method,
        trials,
        seed: harness.seed,
        passed: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub delta: f64,
    pub side: Side,
    /// Name of the closed form the tail is compared against.
    pub bound_name: String,
    pub threshold: f64,
    pub estimate: f64,
    pub ci_upper: f64,
    pub bound: f64,
    pub pass: bool,
    /// Recorded but excluded from `passed`.
    pub informational: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanCheck {
    pub mean: f64,
    pub stderr: f64,
    pub expected: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub kind: String,
    pub method: Method,
    pub trials: usize,
    pub seed: u64,
    pub mu: f64,
    /// The function was divided by this factor so that marginals lie in `[0,1]`.
    pub scale: f64,
    pub rows: Vec<TailRow>,
    pub mean: Option<MeanCheck>,
    pub passed: bool,
}

impl TailReport {
    fn finish(mut self) -> Self {
        self.passed =
            self.rows.iter().filter(|r| !r.informational).all(|r| r.pass) && self.mean.as_ref().is_none_or(|m| m.pass);
        self
    }
}

struct TailBuilder<'a> {
    values: &'a [f64],
    rows: Vec<TailRow>,
}

impl TailBuilder<'_> {
    fn add(&mut self, delta: f64, side: Side, name: &str, threshold: f64, bound: f64, informational: bool) {
        let hits = match side {
            Side::Upper => self.values.iter().filter(|&&v| v >= threshold - TIE_TOL).count(),
            Side::Lower => self.values.iter().filter(|&&v| v <= threshold + TIE_TOL).count(),
        };
        let trials = self.values.len();
        let ci_upper = wilson_interval(hits, trials, SLACK_SE).1;
        self.rows.push(TailRow {
            delta,
            side,
            bound_name: name.to_string(),
            threshold,
            estimate: hits as f64 / trials as f64,
            ci_upper,
            bound,
            pass: ci_upper <= bound + TIE_TOL,
            informational,
        });
    }

    fn linear(&mut self, mu: f64, deltas: &[f64], informational: bool) {
        for &d in deltas {
            self.add(
                d,
                Side::Upper,
                "chernoff",
                (1.0 + d) * mu,
                chernoff_upper(mu, d),
                informational,
            );
            if d <= 1.0 {
                self.add(
                    d,
                    Side::Upper,
                    "exp(-mu d^2/3)",
                    (1.0 + d) * mu,
                    chernoff_upper_simple(mu, d),
                    informational,
                );
                self.add(
                    d,
                    Side::Lower,
                    "exp(-mu d^2/2)",
                    (1.0 - d) * mu,
                    chernoff_lower(mu, d),
                    informational,
                );
            }
        }
    }
}

fn mean_check(values: &[f64], expected: f64) -> MeanCheck {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let stderr = (var / n).sqrt();
    MeanCheck {
        mean,
        stderr,
        expected,
        pass: mean >= expected - SLACK_SE * stderr - TIE_TOL,
    }
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if let Some(d) = deltas.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::Schema {
            field: "deltas".into(),
            reason: format!("{d} is not a nonnegative number"),
        });
    }
    Ok(())
}

/// Upper and lower tails of `X = Σ a_i X_i` against the Chernoff bounds with
/// `μ = Σ a_i x_i`.
pub fn test_linear_tails(sampler: &Sampler, a: &[f64], deltas: &[f64], harness: &Harness) -> Result<TailReport> {
    check_deltas(deltas)?;
    if a.len() != sampler.point.len() {
        return Err(Error::Schema {
            field: "weights".into(),
            reason: format!(
                "length {} does not match ground set size {}",
                a.len(),
                sampler.point.len()
            ),
        });
    }
    if let Some(v) = a.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Schema {
            field: "weights".into(),
            reason: format!("weight {v} outside [0,1]"),
        });
    }
    let mu: f64 = a.iter().zip(&sampler.point).map(|(w, x)| w * x).sum();
    let values: Vec<f64> = harness
        .map(|t| sampler.trial(harness.seed, t).map(|s| s.weight(a)))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut b = TailBuilder {
        values: &values,
        rows: Vec::new(),
    };
    b.linear(mu, deltas, false);
    Ok(TailReport {
        kind: "linear".into(),
        method: sampler.method,
        trials: values.len(),
        seed: harness.seed,
        mu,
        scale: 1.0,
        rows: b.rows,
        mean: None,
        passed: false,
    }
    .finish())
}

/// `f` divided by its largest singleton value when that exceeds one.
fn unit_marginals(f: &Arc<Submodular>) -> (Submodular, f64) {
    let scale = f.max_singleton().max(1.0);
    (f.scaled(1.0 / scale), scale)
}

/// `F(x)` exactly when possible, else from `samples` independent draws.
fn multilinear_value(f: &Submodular, x: &[f64], seed: u64) -> Result<f64> {
    match f.multilinear_exact(x) {
        Ok(v) => Ok(v),
        Err(Error::TooLarge { .. }) => {
            let mut rng = stream(seed, Domain::Sampling, u64::MAX);
            Ok(f.multilinear_estimate(x, 200_000, &mut rng)?.value)
        }
        Err(e) => Err(e),
    }
}

/// Lower tail of `f(R)` against `e^{-μ₀δ²/8}` with `μ₀ = F(x)`, plus the check
/// `mean f(R) >= μ₀ - 4·SE`. For modular `f` the Chernoff lower bound is also
/// asserted. Bounds are informational for methods other than swap rounding.
pub fn test_submodular_lower_tail(
    f: &Arc<Submodular>,
    sampler: &Sampler,
    deltas: &[f64],
    harness: &Harness,
) -> Result<TailReport> {
    check_deltas(deltas)?;
    if f.n() != sampler.point.len() {
        return Err(Error::Inconsistent(format!(
            "function over {} elements for a point of length {}",
            f.n(),
            sampler.point.len()
        )));
    }
    let (g, scale) = unit_marginals(f);
    let mu0 = multilinear_value(&g, &sampler.point, harness.seed)?;
    let values: Vec<f64> = harness
        .map(|t| sampler.trial(harness.seed, t).map(|s| g.evaluate(&s)))
        .into_iter()
        .collect::<Result<_>>()?;
    let informational = !sampler.method.is_swap();
    let mut b = TailBuilder {
        values: &values,
        rows: Vec::new(),
    };
    let modular = g.modular_weights().is_some();
    for &d in deltas.iter().filter(|&&d| d <= 1.0) {
        b.add(
            d,
            Side::Lower,
            "exp(-mu0 d^2/8)",
            (1.0 - d) * mu0,
            submodular_lower(mu0, d),
            informational,
        );
        if modular {
            b.add(
                d,
                Side::Lower,
                "exp(-mu d^2/2)",
                (1.0 - d) * mu0,
                chernoff_lower(mu0, d),
                false,
            );
        }
    }
    Ok(TailReport {
        kind: "submodular-lower".into(),
        method: sampler.method,
        trials: values.len(),
        seed: harness.seed,
        mu: mu0,
        scale,
        mean: Some(mean_check(&values, mu0)),
        rows: b.rows,
        passed: false,
    }
    .finish())
}

/// Tails of `f(X)` under independent rounding of `x`: upper against the
/// Chernoff form and lower against `e^{-μδ²/2}`, with `μ = F(x)`.
pub fn test_independent_submodular_tails(
    f: &Arc<Submodular>,
    x: &[f64],
    deltas: &[f64],
    harness: &Harness,
) -> Result<TailReport> {
    check_deltas(deltas)?;
    if f.n() != x.len() {
        return Err(Error::Inconsistent(format!(
            "function over {} elements for a point of length {}",
            f.n(),
            x.len()
        )));
    }
    let (g, scale) = unit_marginals(f);
    let mu = multilinear_value(&g, x, harness.seed)?;
    let values: Vec<f64> = harness
        .map(|t| {
            g.evaluate(&independent_round(
                x,
                &mut stream(harness.seed, Domain::Rounding, t as u64),
            ))
        })
        .into_iter()
        .collect();
    let mut b = TailBuilder {
        values: &values,
        rows: Vec::new(),
    };
    for &d in deltas {
        b.add(d, Side::Upper, "chernoff", (1.0 + d) * mu, chernoff_upper(mu, d), false);
        if d <= 1.0 {
            b.add(
                d,
                Side::Lower,
                "exp(-mu d^2/2)",
                (1.0 - d) * mu,
                chernoff_lower(mu, d),
                false,
            );
        }
    }
    Ok(TailReport {
        kind: "independent-submodular".into(),
        method: Method::Independent,
        trials: values.len(),
        seed: harness.seed,
        mu,
        scale,
        mean: None,
        rows: b.rows,
        passed: false,
    }
    .finish())
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub method: Method,
    pub runs: usize,
    pub seed: u64,
    pub check: TraceCheck,
    pub passed: bool,
}

/// Replays `runs` traced roundings and counts steps that change more than two
/// coordinates, break a pair sum, or fail the martingale identity.
pub fn check_traces(sampler: &Sampler, harness: &Harness) -> Result<TraceReport> {
    let checks = harness
        .map(|t| {
            let mut rng = stream(harness.seed, Domain::Rounding, t as u64);
            sampler
                .sample_traced(&mut rng)
                .map(|(_, tr)| tr.map(|tr| tr.check()).unwrap_or_default())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut total = TraceCheck::default();
    for c in &checks {
        total.absorb(c);
    }
    Ok(TraceReport {
        method: sampler.method,
        runs: harness.trials,
        seed: harness.seed,
        passed: total.passed(),
        check: total,
    })
}
