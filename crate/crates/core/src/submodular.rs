//! Monotone submodular functions and their multilinear extensions.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{Matroid, MatroidSpec};
use crate::set::ElementSet;

/// Largest ground set for exact enumeration of the multilinear extension.
pub const ENUMERATION_LIMIT: usize = 20;

/// Largest ground set for exhaustive axiom checks.
pub const EXHAUSTIVE_CHECK_LIMIT: usize = 12;

const TOL: f64 = 1e-9;

/// JSON description of a submodular function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SubmodularSpec {
    Modular {
        weights: Vec<f64>,
    },
    Coverage {
        item_weights: Vec<f64>,
        /// `covers[e]` lists the items covered by element `e`.
        covers: Vec<Vec<usize>>,
    },
    MatroidRank {
        matroid: MatroidSpec,
    },
    Explicit {
        n: usize,
        /// `values[mask]` is `f` of the set with bitmask `mask`.
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
enum Kind {
    Modular(Vec<f64>),
    Coverage {
        item_weights: Vec<f64>,
        covers: Vec<Vec<usize>>,
    },
    Rank(Arc<Matroid>),
    Explicit(Arc<Vec<f64>>),
    /// `f_A(S) = f(S ∪ A) - f(A)`.
    Conditioned {
        inner: Arc<Submodular>,
        base: ElementSet,
        base_value: f64,
    },
    Scaled {
        inner: Arc<Submodular>,
        factor: f64,
    },
}

/// A monotone submodular function on `0..n` with `f(∅) = 0`.
#[derive(Clone, Debug)]
pub struct Submodular {
    n: usize,
    kind: Kind,
}

/// A Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            samples: 0,
        }
    }

    fn from_moments(sum: f64, sum_sq: f64, samples: usize) -> Self {
        let k = samples as f64;
        let mean = sum / k;
        let var = if samples > 1 {
            ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            stderr: (var / k).sqrt(),
            samples,
        }
    }
}

/// Outcome of the axiom checks on a function.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FunctionReport {
    pub exhaustive: bool,
    pub violations: Vec<String>,
}

impl Submodular {
    pub fn modular(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidFunction("empty ground set".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidFunction(format!(
                "modular weight {w} is negative; the function would not be monotone"
            )));
        }
        Ok(Self {
            n: weights.len(),
            kind: Kind::Modular(weights),
        })
    }

    pub fn coverage(item_weights: Vec<f64>, covers: Vec<Vec<usize>>) -> Result<Self> {
        if covers.is_empty() {
            return Err(Error::InvalidFunction("empty ground set".into()));
        }
        if let Some(w) = item_weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidFunction(format!("item weight {w} is negative")));
        }
        for (e, items) in covers.iter().enumerate() {
            if let Some(&u) = items.iter().find(|&&u| u >= item_weights.len()) {
                return Err(Error::InvalidFunction(format!(
                    "element {e} covers item {u}, but there are {} items",
                    item_weights.len()
                )));
            }
        }
        let covers = covers
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect::<Vec<_>>();
        Ok(Self {
            n: covers.len(),
            kind: Kind::Coverage { item_weights, covers },
        })
    }

    pub fn matroid_rank(m: Arc<Matroid>) -> Self {
        Self {
            n: m.n(),
            kind: Kind::Rank(m),
        }
    }

    /// A function given by its full value table; the axioms are verified.
    pub fn explicit(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: ENUMERATION_LIMIT,
            });
        }
        if values.len() != 1 << n {
            return Err(Error::InvalidFunction(format!(
                "value table has {} entries, expected {}",
                values.len(),
                1usize << n
            )));
        }
        let f = Self {
            n,
            kind: Kind::Explicit(Arc::new(values)),
        };
        let mut rng = crate::rng::stream(0, crate::rng::Domain::Sampling, 0);
        let report = f.validate(2000, &mut rng);
        if !report.violations.is_empty() {
            return Err(Error::InvalidFunction(report.violations.join("; ")));
        }
        Ok(f)
    }

    pub fn from_spec(spec: &SubmodularSpec) -> Result<Self> {
        match spec {
            SubmodularSpec::Modular { weights } => Self::modular(weights.clone()),
            SubmodularSpec::Coverage { item_weights, covers } => Self::coverage(item_weights.clone(), covers.clone()),
            SubmodularSpec::MatroidRank { matroid } => Ok(Self::matroid_rank(Arc::new(Matroid::from_spec(matroid)?))),
            SubmodularSpec::Explicit { n, values } => Self::explicit(*n, values.clone()),
        }
    }

    /// The JSON form; conditioned and scaled functions are tabulated when small.
    pub fn to_spec(&self) -> Option<SubmodularSpec> {
        match &self.kind {
            Kind::Modular(w) => Some(SubmodularSpec::Modular { weights: w.clone() }),
            Kind::Coverage { item_weights, covers } => Some(SubmodularSpec::Coverage {
                item_weights: item_weights.clone(),
                covers: covers.clone(),
            }),
            Kind::Rank(m) => m.to_spec().map(|matroid| SubmodularSpec::MatroidRank { matroid }),
            Kind::Explicit(v) => Some(SubmodularSpec::Explicit {
                n: self.n,
                values: v.as_ref().clone(),
            }),
            Kind::Conditioned { .. } | Kind::Scaled { .. } => {
                (self.n <= ENUMERATION_LIMIT).then(|| SubmodularSpec::Explicit {
                    n: self.n,
                    values: (0..1u64 << self.n)
                        .map(|mask| self.evaluate(&ElementSet::from_mask(self.n, mask)))
                        .collect(),
                })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::Modular(_) => "modular",
            Kind::Coverage { .. } => "coverage",
            Kind::Rank(_) => "matroid_rank",
            Kind::Explicit(_) => "explicit",
            Kind::Conditioned { inner, .. } | Kind::Scaled { inner, .. } => inner.kind_name(),
        }
    }

    /// `f_A`, the marginal function `S ↦ f(S ∪ A) - f(A)`.
    pub fn conditioned(self: &Arc<Self>, a: &ElementSet) -> Submodular {
        Submodular {
            n: self.n,
            kind: Kind::Conditioned {
                inner: self.clone(),
                base: a.clone(),
                base_value: self.evaluate(a),
            },
        }
    }

    /// `factor · f`.
    pub fn scaled(self: &Arc<Self>, factor: f64) -> Submodular {
        Submodular {
            n: self.n,
            kind: Kind::Scaled {
                inner: self.clone(),
                factor,
            },
        }
    }

    pub fn evaluate(&self, s: &ElementSet) -> f64 {
        debug_assert_eq!(s.universe(), self.n);
        match &self.kind {
            Kind::Modular(w) => s.weight(w),
            Kind::Coverage { item_weights, covers } => {
                let mut hit = vec![false; item_weights.len()];
                let mut total = 0.0;
                for e in s.iter() {
                    for &u in &covers[e] {
                        if !hit[u] {
                            hit[u] = true;
                            total += item_weights[u];
                        }
                    }
                }
                total
            }
            Kind::Rank(m) => m.rank(s) as f64,
            Kind::Explicit(v) => v[s.to_mask().expect("explicit functions have n <= 20") as usize],
            Kind::Conditioned {
                inner,
                base,
                base_value,
            } => inner.evaluate(&s.union(base)) - base_value,
            Kind::Scaled { inner, factor } => factor * inner.evaluate(s),
        }
    }

    /// `f(S + i) - f(S)`.
    pub fn marginal(&self, i: usize, s: &ElementSet) -> Result<f64> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        if s.contains(i) {
            return Err(Error::Contract(format!("element {i} is already in the set")));
        }
        Ok(self.evaluate(&s.with(i)) - self.evaluate(s))
    }

    /// `f(R + i) - f(R - i)` for every `i`.
    pub fn differences(&self, r: &ElementSet) -> Vec<f64> {
        match &self.kind {
            Kind::Modular(w) => w.clone(),
            Kind::Coverage { item_weights, covers } => {
                let mut count = vec![0u32; item_weights.len()];
                for e in r.iter() {
                    for &u in &covers[e] {
                        count[u] += 1;
                    }
                }
                (0..self.n)
                    .map(|i| {
                        let own = u32::from(r.contains(i));
                        covers[i]
                            .iter()
                            .filter(|&&u| count[u] == own)
                            .map(|&u| item_weights[u])
                            .sum()
                    })
                    .collect()
            }
            Kind::Conditioned { inner, base, .. } => {
                let mut d = inner.differences(&r.union(base));
                for i in base.iter() {
                    d[i] = 0.0;
                }
                d
            }
            Kind::Scaled { inner, factor } => inner.differences(r).into_iter().map(|v| v * factor).collect(),
            Kind::Rank(_) | Kind::Explicit(_) => (0..self.n)
                .map(|i| self.evaluate(&r.with(i)) - self.evaluate(&r.without(i)))
                .collect(),
        }
    }

    /// Whether the multilinear extension has a closed form.
    pub fn has_closed_form(&self) -> bool {
        match &self.kind {
            Kind::Modular(_) | Kind::Coverage { .. } => true,
            Kind::Conditioned { inner, .. } | Kind::Scaled { inner, .. } => inner.has_closed_form(),
            Kind::Rank(_) | Kind::Explicit(_) => false,
        }
    }

    /// `F(x) = E[f(x̂)]`, exactly: closed forms for modular and coverage functions,
    /// enumeration over `2^n` sets otherwise.
    pub fn multilinear_exact(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        match &self.kind {
            Kind::Modular(w) => Ok(w.iter().zip(x).map(|(a, b)| a * b).sum()),
            Kind::Coverage { item_weights, covers } => {
                let mut miss = vec![1.0f64; item_weights.len()];
                for (e, items) in covers.iter().enumerate() {
                    for &u in items {
                        miss[u] *= 1.0 - x[e];
                    }
                }
                Ok(item_weights.iter().zip(&miss).map(|(w, m)| w * (1.0 - m)).sum())
            }
            Kind::Conditioned {
                inner,
                base,
                base_value,
            } if inner.has_closed_form() => {
                let mut lifted = x.to_vec();
                for i in base.iter() {
                    lifted[i] = 1.0;
                }
                Ok(inner.multilinear_exact(&lifted)? - base_value)
            }
            Kind::Scaled { inner, factor } => Ok(factor * inner.multilinear_exact(x)?),
            _ => self.multilinear_enumerate(x),
        }
    }

    /// `F(x)` by summing `f(S) Π x_i Π (1 - x_j)` over every subset.
    pub fn multilinear_enumerate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let n = self.n;
        if n > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: ENUMERATION_LIMIT,
            });
        }
        let mut probs = vec![1.0f64];
        for &xi in x {
            let mut next = Vec::with_capacity(probs.len() * 2);
            next.extend(probs.iter().map(|p| p * (1.0 - xi)));
            next.extend(probs.iter().map(|p| p * xi));
            probs = next;
        }
        // next[] lists masks with element i as the high bit, so probs[mask] is in bit order.
        let table;
        let value_of: Box<dyn Fn(u64) -> f64> = match &self.kind {
            Kind::Explicit(v) => Box::new(move |m| v[m as usize]),
            Kind::Rank(mat) => {
                table = mat.rank_table();
                match &table {
                    Some(t) => Box::new(move |m| t[m as usize] as f64),
                    None => Box::new(move |m| self.evaluate(&ElementSet::from_mask(n, m))),
                }
            }
            _ => Box::new(move |m| self.evaluate(&ElementSet::from_mask(n, m))),
        };
        Ok(probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(mask, p)| p * value_of(mask as u64))
            .sum())
    }

    /// `∂F/∂x_i = F(x | x_i = 1) - F(x | x_i = 0)`, exactly.
    pub fn gradient_exact(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        match &self.kind {
            Kind::Modular(w) => Ok(w.clone()),
            Kind::Coverage { item_weights, covers } => {
                // Π over the other coverers of u, computed without dividing by (1 - x_i).
                let mut coverers: Vec<Vec<usize>> = vec![Vec::new(); item_weights.len()];
                for (e, items) in covers.iter().enumerate() {
                    for &u in items {
                        coverers[u].push(e);
                    }
                }
                Ok((0..self.n)
                    .map(|i| {
                        covers[i]
                            .iter()
                            .map(|&u| {
                                let miss: f64 = coverers[u].iter().filter(|&&e| e != i).map(|&e| 1.0 - x[e]).product();
                                item_weights[u] * miss
                            })
                            .sum()
                    })
                    .collect())
            }
            Kind::Scaled { inner, factor } => Ok(inner.gradient_exact(x)?.into_iter().map(|g| g * factor).collect()),
            _ => (0..self.n)
                .map(|i| {
                    let mut hi = x.to_vec();
                    let mut lo = x.to_vec();
                    hi[i] = 1.0;
                    lo[i] = 0.0;
                    Ok(self.multilinear_exact(&hi)? - self.multilinear_exact(&lo)?)
                })
                .collect(),
        }
    }

    /// Sample mean of `f` over independent roundings of `x`.
    pub fn multilinear_estimate<R: Rng>(&self, x: &[f64], samples: usize, rng: &mut R) -> Result<Estimate> {
        self.check_point(x)?;
        if samples == 0 {
            return Err(Error::Contract("at least one sample is required".into()));
        }
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..samples {
            let v = self.evaluate(&sample_set(x, rng));
            sum += v;
            sum_sq += v * v;
        }
        Ok(Estimate::from_moments(sum, sum_sq, samples))
    }

    /// Coupled estimates of `∂F/∂x_i`: every sample `R` contributes
    /// `f(R + i) - f(R - i)` to every coordinate.
    pub fn gradient_estimate<R: Rng>(&self, x: &[f64], samples: usize, rng: &mut R) -> Result<Vec<Estimate>> {
        self.check_point(x)?;
        if samples == 0 {
            return Err(Error::Contract("at least one sample is required".into()));
        }
        if let Some(w) = self.modular_weights() {
            return Ok(w.into_iter().map(Estimate::exact).collect());
        }
        let mut sum = vec![0.0; self.n];
        let mut sum_sq = vec![0.0; self.n];
        for _ in 0..samples {
            let d = self.differences(&sample_set(x, rng));
            for i in 0..self.n {
                sum[i] += d[i];
                sum_sq[i] += d[i] * d[i];
            }
        }
        Ok((0..self.n)
            .map(|i| Estimate::from_moments(sum[i], sum_sq[i], samples))
            .collect())
    }

    /// Effective weights when `f` is modular (including conditioned or scaled modular).
    pub fn modular_weights(&self) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Modular(w) => Some(w.clone()),
            Kind::Conditioned { inner, base, .. } => inner.modular_weights().map(|mut w| {
                for i in base.iter() {
                    w[i] = 0.0;
                }
                w
            }),
            Kind::Scaled { inner, factor } => inner
                .modular_weights()
                .map(|w| w.into_iter().map(|v| v * factor).collect()),
            _ => None,
        }
    }

    /// `max_i f({i})`, an upper bound on every marginal value.
    pub fn max_singleton(&self) -> f64 {
        let empty = ElementSet::empty(self.n);
        (0..self.n).map(|i| self.evaluate(&empty.with(i))).fold(0.0, f64::max)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Schema {
                field: "point".into(),
                reason: format!("length {} does not match function size {}", x.len(), self.n),
            });
        }
        Ok(())
    }

    /// Checks normalization, monotonicity and submodularity: exhaustively for
    /// `n <= 12`, on `samples` random configurations otherwise.
    pub fn validate<R: Rng>(&self, samples: usize, rng: &mut R) -> FunctionReport {
        let n = self.n;
        let mut report = FunctionReport {
            exhaustive: n <= EXHAUSTIVE_CHECK_LIMIT,
            violations: Vec::new(),
        };
        let empty = ElementSet::empty(n);
        let f0 = self.evaluate(&empty);
        if f0.abs() > TOL {
            report.violations.push(format!("f(∅) = {f0}, expected 0"));
        }
        let check = |s: &ElementSet, i: usize, j: usize, report: &mut FunctionReport| {
            let fs = self.evaluate(s);
            let fi = self.evaluate(&s.with(i));
            if fi < fs - TOL {
                report
                    .violations
                    .push(format!("monotonicity violated at S = {s:?}, i = {i}"));
            }
            if i != j {
                let fj = self.evaluate(&s.with(j));
                let fij = self.evaluate(&s.with(i).with(j));
                if fi + fj < fij + fs - TOL {
                    report
                        .violations
                        .push(format!("submodularity violated at S = {s:?}, i = {i}, j = {j}"));
                }
            }
        };
        if report.exhaustive {
            for mask in 0u64..(1 << n) {
                let s = ElementSet::from_mask(n, mask);
                for i in (0..n).filter(|&i| !s.contains(i)) {
                    for j in (i..n).filter(|&j| !s.contains(j)) {
                        check(&s, i, j, &mut report);
                    }
                }
                if report.violations.len() > 20 {
                    break;
                }
            }
        } else {
            for _ in 0..samples {
                let s = ElementSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.5)));
                let outside: Vec<usize> = (0..n).filter(|&e| !s.contains(e)).collect();
                if outside.is_empty() {
                    continue;
                }
                let i = outside[rng.gen_range(0..outside.len())];
                let j = outside[rng.gen_range(0..outside.len())];
                check(&s, i, j, &mut report);
            }
        }
        report
    }
}

/// Includes each `i` independently with probability `x_i`.
pub fn sample_set<R: Rng>(x: &[f64], rng: &mut R) -> ElementSet {
    let mut s = ElementSet::empty(x.len());
    for (i, &p) in x.iter().enumerate() {
        if rng.gen::<f64>() < p {
            s.insert(i);
        }
    }
    s
}
