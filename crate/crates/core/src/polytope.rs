//! Membership, separation and convex decomposition for `P(M)` and `B(M)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{order_by_weight, Matroid, SlackSet};
use crate::set::{ElementSet, IndexList};

/// Tolerance for membership and recomposition checks.
pub const TOL: f64 = 1e-9;

/// Violations below this magnitude are treated as numerical noise by [`separate`].
pub const SEPARATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// The matroid polytope `P(M)`.
    #[serde(rename = "matroid", alias = "p")]
    P,
    /// The base polytope `B(M)`.
    #[serde(rename = "base", alias = "b")]
    B,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::P => "matroid",
            Mode::B => "base",
        }
    }
}

/// One term `β · 1_B` of a convex combination.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub weight: f64,
    pub set: ElementSet,
}

/// A convex combination of independent sets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvexCombination {
    pub terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct TermWire {
    weight: f64,
    set: IndexList,
}

impl Serialize for ConvexCombination {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.terms.iter().map(|t| TermWire {
            weight: t.weight,
            set: IndexList(t.set.to_vec()),
        }))
    }
}

impl<'de> Deserialize<'de> for ConvexCombination {
    /// Sets come back over the universe `max index + 1`; call
    /// [`ConvexCombination::resized`] once the ground set is known.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = Vec::<TermWire>::deserialize(d)?;
        let n = wire.iter().flat_map(|t| t.set.0.iter()).max().map_or(0, |&m| m + 1);
        Ok(Self {
            terms: wire
                .into_iter()
                .map(|t| Term {
                    weight: t.weight,
                    set: ElementSet::from_indices(n, t.set.0),
                })
                .collect(),
        })
    }
}

impl ConvexCombination {
    pub fn single(set: ElementSet) -> Self {
        Self {
            terms: vec![Term { weight: 1.0, set }],
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Re-embeds every set into the ground set `0..n`.
    pub fn resized(&self, n: usize) -> Result<Self> {
        for t in &self.terms {
            if let Some(bad) = t.set.iter().find(|&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: bad, n });
            }
        }
        Ok(Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    weight: t.weight,
                    set: t.set.resized(n),
                })
                .collect(),
        })
    }

    /// `Σ β_ℓ 1_{B_ℓ}` as a vector of length `n`.
    pub fn recompose(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for t in &self.terms {
            for i in t.set.iter() {
                x[i] += t.weight;
            }
        }
        x
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Checks weights, total mass and independence (bases in mode `B`).
    pub fn validate(&self, m: &Matroid, mode: Mode) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidCombination("no terms".into()));
        }
        for (k, t) in self.terms.iter().enumerate() {
            if !t.weight.is_finite() || t.weight <= 0.0 {
                return Err(Error::InvalidCombination(format!(
                    "term {k} has non-positive weight {}",
                    t.weight
                )));
            }
            m.check_set(&t.set)?;
            let ok = match mode {
                Mode::P => m.is_independent(&t.set),
                Mode::B => m.is_base(&t.set),
            };
            if !ok {
                let what = if mode == Mode::B { "a base" } else { "independent" };
                return Err(Error::InvalidCombination(format!(
                    "term {k} set {:?} is not {what}",
                    t.set
                )));
            }
        }
        let total = self.total_weight();
        if (total - 1.0).abs() > TOL {
            return Err(Error::InvalidCombination(format!("weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    /// Merges repeated sets and drops zero weights, keeping first-occurrence order.
    fn merge_duplicates(&mut self) {
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            if t.weight <= 0.0 {
                continue;
            }
            match out.iter_mut().find(|o| o.set == t.set) {
                Some(o) => o.weight += t.weight,
                None => out.push(t),
            }
        }
        self.terms = out;
    }

    fn normalize(&mut self) {
        let total = self.total_weight();
        for t in &mut self.terms {
            t.weight /= total;
        }
    }
}

/// Checks `x ∈ P(M)` or `x ∈ B(M)` within [`TOL`].
pub fn check_membership(m: &Matroid, x: &[f64], mode: Mode) -> Result<bool> {
    Ok(membership_violation(m, x, mode)?.is_none())
}

/// Why `x` fails membership, if it does.
pub fn membership_violation(m: &Matroid, x: &[f64], mode: Mode) -> Result<Option<String>> {
    if x.len() != m.n() {
        return Err(Error::Schema {
            field: "point".into(),
            reason: format!("length {} does not match ground set size {}", x.len(), m.n()),
        });
    }
    if let Some((i, v)) = x
        .iter()
        .enumerate()
        .find(|(_, &v)| !v.is_finite() || !(-TOL..=1.0 + TOL).contains(&v))
    {
        return Ok(Some(format!("coordinate {i} = {v} outside [0,1]")));
    }
    if mode == Mode::B {
        let total: f64 = x.iter().sum();
        let d = m.rank_full() as f64;
        if (total - d).abs() > TOL {
            return Ok(Some(format!("x(N) = {total} but the rank is {d}")));
        }
    }
    let clamped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    if let Some(v) = separate(m, &clamped)? {
        return Ok(Some(format!("x(S) exceeds r(S) by {} at S = {:?}", -v.slack, v.set)));
    }
    Ok(None)
}

/// The most violated rank constraint `x(S) <= r(S)`, if any violation exceeds
/// [`SEPARATION_TOL`].
pub fn separate(m: &Matroid, x: &[f64]) -> Result<Option<SlackSet>> {
    let empty = m.empty_set();
    Ok(m.min_slack(x, &empty, &empty)?.filter(|s| s.slack < -SEPARATION_TOL))
}

/// Exhaustive rank-constraint check for `n <= 22`; used to cross-validate [`separate`].
pub fn violates_some_constraint_exhaustive(m: &Matroid, x: &[f64]) -> Result<bool> {
    let table = m.rank_table().ok_or(Error::TooLarge {
        n: m.n(),
        limit: crate::matroid::EXHAUSTIVE_LIMIT,
    })?;
    let n = m.n();
    Ok((1u64..(1 << n)).any(|mask| {
        let s = ElementSet::from_mask(n, mask);
        s.weight(x) - table[mask as usize] as f64 > SEPARATION_TOL
    }))
}

fn require(m: &Matroid, x: &[f64], mode: Mode) -> Result<()> {
    match membership_violation(m, x, mode)? {
        None => Ok(()),
        Some(reason) => Err(Error::NotInPolytope {
            polytope: mode.name(),
            reason,
        }),
    }
}

/// Writes `x ∈ B(M)` as a convex combination of at most `n` bases.
///
/// Each round takes a base `B` on the minimal face of the residual point and
/// the largest step `β` along `1_B` that keeps the remainder in the scaled base
/// polytope. The step is located by iterating on the most violated constraint.
pub fn decompose_base(m: &Matroid, x: &[f64]) -> Result<ConvexCombination> {
    require(m, x, Mode::B)?;
    let n = m.n();
    let mut res: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut mass = 1.0f64;
    let mut combo = ConvexCombination::default();

    for _ in 0..4 * n + 8 {
        if mass < 1e-12 {
            break;
        }
        let greedy = m.greedy_max_weight_base(&res);
        let mut step = max_step(m, &res, mass, &greedy)?;
        let mut base = greedy;
        if step.1 < 1e-9 * mass {
            base = face_base(m, &res, mass)?;
            step = max_step(m, &res, mass, &base)?;
        }
        let (done, beta) = step;
        if beta <= 0.0 {
            return Err(Error::Numerical(format!(
                "decomposition stalled with residual mass {mass}"
            )));
        }
        for i in base.iter() {
            res[i] -= beta;
        }
        for v in &mut res {
            if v.abs() < 1e-13 {
                *v = 0.0;
            }
        }
        mass -= beta;
        combo.terms.push(Term {
            weight: beta,
            set: base,
        });
        if done {
            mass = 0.0;
            break;
        }
    }
    if mass > 1e-9 {
        return Err(Error::Numerical(format!(
            "decomposition did not converge; residual mass {mass}"
        )));
    }
    finish(combo, x, n, n)
}

/// Writes `x ∈ P(M)` as a convex combination of at most `n + 1` independent sets,
/// by padding with dummy elements and decomposing in the extended base polytope.
pub fn decompose_point(m: &Matroid, x: &[f64]) -> Result<ConvexCombination> {
    require(m, x, Mode::P)?;
    let n = m.n();
    let ext = m.with_dummies();
    let d = m.rank_full();
    let mut deficit = d as f64 - x.iter().map(|v| v.clamp(0.0, 1.0)).sum::<f64>();
    let mut padded: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    for _ in 0..d {
        let v = deficit.clamp(0.0, 1.0);
        padded.push(v);
        deficit -= v;
    }
    let lifted = decompose_base(&ext, &padded)?;
    let projected = ConvexCombination {
        terms: lifted
            .terms
            .into_iter()
            .map(|t| Term {
                weight: t.weight,
                set: t.set.resized(n),
            })
            .collect(),
    };
    finish(projected, x, n, n + 1)
}

fn finish(mut combo: ConvexCombination, x: &[f64], n: usize, max_terms: usize) -> Result<ConvexCombination> {
    combo.merge_duplicates();
    if combo.terms.len() > max_terms {
        reduce_caratheodory(&mut combo, n);
    }
    combo.normalize();
    let back = combo.recompose(n);
    let err = back.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if err > TOL {
        return Err(Error::Numerical(format!("recomposition error {err} exceeds {TOL}")));
    }
    Ok(combo)
}

/// Largest `β` with `(res - β 1_B) / (mass - β)` in `B(M)`.
///
/// Returns `(true, mass)` when `res = mass · 1_B`, which ends the decomposition.
fn max_step(m: &Matroid, res: &[f64], mass: f64, base: &ElementSet) -> Result<(bool, f64)> {
    let min_on_base = base.iter().map(|i| res[i]).fold(f64::INFINITY, f64::min);
    let mut beta = min_on_base.min(mass);
    if beta >= mass - 1e-12 {
        let rest_is_base: bool = (0..m.n()).all(|i| {
            let target = if base.contains(i) { mass } else { 0.0 };
            (res[i] - target).abs() < 1e-10
        });
        if rest_is_base {
            return Ok((true, mass));
        }
        beta = mass * (1.0 - 1e-9);
    }
    let empty = m.empty_set();
    for _ in 0..4 * m.n() + 16 {
        let scale = mass - beta;
        let z: Vec<f64> = (0..m.n())
            .map(|i| {
                let v = res[i] - if base.contains(i) { beta } else { 0.0 };
                (v / scale).max(0.0)
            })
            .collect();
        let Some(v) = m.min_slack(&z, &empty, &empty)? else {
            break;
        };
        if v.slack >= -1e-12 {
            break;
        }
        let r = m.rank(&v.set) as f64;
        let inside = v.set.intersection(base).len() as f64;
        let denom = r - inside;
        if denom <= 0.0 {
            break;
        }
        let bound = (mass * r - v.set.weight(res)) / denom;
        if bound >= beta {
            break;
        }
        beta = bound.max(0.0);
    }
    Ok((false, beta))
}

/// A base lying on the minimal face of `B(M)` containing `res / mass`: tight on a
/// maximal chain of tight sets, built greedily block by block.
///
/// Tight sets are closed under union and intersection, so the smallest tight set
/// containing `chain + e` is `chain` joined with the smallest tight set containing `e`.
fn face_base(m: &Matroid, res: &[f64], mass: f64) -> Result<ElementSet> {
    let n = m.n();
    let y: Vec<f64> = res.iter().map(|v| v / mass).collect();
    let tight: Vec<ElementSet> = (0..n).map(|e| smallest_tight(m, &y, e)).collect::<Result<_>>()?;
    let mut chain = m.empty_set();
    let mut base = m.empty_set();
    while chain.len() < n {
        let mut next: Option<ElementSet> = None;
        for e in (0..n).filter(|&e| !chain.contains(e)) {
            let cand = chain.union(&tight[e]);
            if next.as_ref().is_none_or(|c| cand.len() < c.len()) {
                next = Some(cand);
            }
        }
        let block = next.expect("chain is a proper subset");
        let order: Vec<usize> = order_by_weight(&y)
            .into_iter()
            .filter(|&i| block.contains(i) && !chain.contains(i))
            .collect();
        for i in order {
            if m.is_independent(&base.with(i)) {
                base.insert(i);
            }
        }
        chain = block;
    }
    Ok(base)
}

/// The intersection of all tight sets containing `e`, or the full set if none is tight.
fn smallest_tight(m: &Matroid, y: &[f64], e: usize) -> Result<ElementSet> {
    let empty = m.empty_set();
    let include = empty.with(e);
    let mut set = match m.min_slack(y, &include, &empty)? {
        Some(s) if s.slack <= 1e-9 => s.set,
        _ => return Ok(m.full_set()),
    };
    for f in set.to_vec() {
        if f == e || !set.contains(f) {
            continue;
        }
        if let Some(s) = m.min_slack(y, &include, &empty.with(f))? {
            if s.slack <= 1e-9 {
                set = set.intersection(&s.set);
            }
        }
    }
    Ok(set)
}

/// Shrinks a combination to affinely independent terms without changing the point.
fn reduce_caratheodory(combo: &mut ConvexCombination, n: usize) {
    loop {
        let k = combo.terms.len();
        if k <= 1 {
            return;
        }
        // Find λ ≠ 0 with Σ λ_ℓ (1_{B_ℓ}, 1) = 0 by elimination on the (n+1) × k system.
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                combo
                    .terms
                    .iter()
                    .map(|t| if t.set.contains(i) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        rows.push(vec![1.0; k]);
        let Some(lambda) = null_vector(&mut rows, k) else {
            return;
        };
        // Move along λ until a weight hits zero.
        let t = combo
            .terms
            .iter()
            .zip(&lambda)
            .filter(|(_, &l)| l > 1e-12)
            .map(|(term, &l)| term.weight / l)
            .fold(f64::INFINITY, f64::min);
        if !t.is_finite() {
            return;
        }
        for (term, &l) in combo.terms.iter_mut().zip(&lambda) {
            term.weight -= t * l;
        }
        let before = combo.terms.len();
        combo.terms.retain(|term| term.weight > 1e-14);
        if combo.terms.len() == before {
            return;
        }
    }
}

/// A nonzero vector in the null space of `rows` (k columns), if the columns are dependent.
#[allow(clippy::needless_range_loop)]
fn null_vector(rows: &mut [Vec<f64>], k: usize) -> Option<Vec<f64>> {
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else {
            break;
        };
        if rows[p][c].abs() < 1e-9 {
            continue;
        }
        rows.swap(r, p);
        let pv = rows[r][c];
        for v in rows[r].iter_mut() {
            *v /= pv;
        }
        for rr in 0..rows.len() {
            if rr != r && rows[rr][c].abs() > 0.0 {
                let f = rows[rr][c];
                for cc in 0..k {
                    rows[rr][cc] -= f * rows[r][cc];
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let free = (0..k).find(|c| !pivot_cols.contains(c))?;
    let mut lambda = vec![0.0; k];
    lambda[free] = 1.0;
    for (row, &pc) in pivot_cols.iter().enumerate() {
        lambda[pc] = -rows[row][free];
    }
    Some(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, v: &[usize]) -> ElementSet {
        ElementSet::from_indices(n, v.iter().copied())
    }

    fn assert_recomposes(m: &Matroid, c: &ConvexCombination, x: &[f64], mode: Mode) {
        c.validate(m, mode).unwrap();
        for (a, b) in c.recompose(m.n()).iter().zip(x) {
            assert!((a - b).abs() <= TOL, "{a} vs {b}");
        }
    }

    #[test]
    fn membership_examples() {
        let u24 = Matroid::uniform(4, 2).unwrap();
        assert!(check_membership(&u24, &[0.5; 4], Mode::B).unwrap());
        let u23 = Matroid::uniform(3, 2).unwrap();
        assert!(!check_membership(&u23, &[0.9; 3], Mode::B).unwrap());
        assert!(check_membership(&u23, &[0.0; 3], Mode::P).unwrap());
    }

    #[test]
    fn separation_examples() {
        let u23 = Matroid::uniform(3, 2).unwrap();
        let s = separate(&u23, &[0.9; 3]).unwrap().unwrap();
        assert_eq!(s.set.to_vec(), vec![0, 1, 2]);
        assert!((s.slack + 0.7).abs() < 1e-12);
        assert!(separate(&Matroid::uniform(4, 2).unwrap(), &[0.5; 4]).unwrap().is_none());
        let p = Matroid::partition(vec![vec![0], vec![1]], vec![1, 1]).unwrap();
        let s = separate(&p, &[1.2, 0.0]).unwrap().unwrap();
        assert_eq!(s.set.to_vec(), vec![0]);
        assert!((s.slack + 0.2).abs() < 1e-12);
    }

    #[test]
    fn decompose_examples() {
        let u24 = Matroid::uniform(4, 2).unwrap();
        let c = decompose_base(&u24, &[0.5; 4]).unwrap();
        assert_recomposes(&u24, &c, &[0.5; 4], Mode::B);

        let k3 = Matroid::complete_graph(3).unwrap();
        let x = [2.0 / 3.0; 3];
        let c = decompose_base(&k3, &x).unwrap();
        assert_eq!(c.len(), 3);
        assert_recomposes(&k3, &c, &x, Mode::B);

        let b = set(3, &[0, 2]);
        let c = decompose_base(&k3, &b.indicator()).unwrap();
        assert_eq!(c, ConvexCombination::single(b));
    }

    #[test]
    fn decompose_point_examples() {
        let u12 = Matroid::uniform(2, 1).unwrap();
        let c = decompose_point(&u12, &[0.3, 0.3]).unwrap();
        assert_recomposes(&u12, &c, &[0.3, 0.3], Mode::P);
        let empty = c.terms.iter().find(|t| t.set.is_empty()).unwrap();
        assert!((empty.weight - 0.4).abs() < 1e-12);

        let m = Matroid::complete_graph(4).unwrap();
        let i = set(6, &[0, 5]);
        assert_eq!(
            decompose_point(&m, &i.indicator()).unwrap(),
            ConvexCombination::single(i)
        );
        assert_eq!(
            decompose_point(&m, &[0.0; 6]).unwrap(),
            ConvexCombination::single(m.empty_set())
        );
    }

    #[test]
    fn rejects_points_outside() {
        let u23 = Matroid::uniform(3, 2).unwrap();
        assert!(matches!(
            decompose_base(&u23, &[0.9; 3]),
            Err(Error::NotInPolytope { .. })
        ));
        assert!(matches!(
            decompose_point(&u23, &[0.9; 3]),
            Err(Error::NotInPolytope { .. })
        ));
    }

    #[test]
    fn combination_json_roundtrip() {
        let c = ConvexCombination {
            terms: vec![
                Term {
                    weight: 0.25,
                    set: set(4, &[0, 1]),
                },
                Term {
                    weight: 0.75,
                    set: set(4, &[2, 3]),
                },
            ],
        };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"[{"weight":0.25,"set":[0,1]},{"weight":0.75,"set":[2,3]}]"#);
        let back: ConvexCombination = serde_json::from_str(&s).unwrap();
        assert_eq!(back.resized(4).unwrap(), c);
    }

    #[test]
    fn caratheodory_reduction_keeps_point() {
        let n = 4;
        let mut c = ConvexCombination {
            terms: [[0, 1], [2, 3], [0, 2], [1, 3], [0, 3], [1, 2]]
                .iter()
                .map(|p| Term {
                    weight: 1.0 / 6.0,
                    set: set(n, p),
                })
                .collect(),
        };
        reduce_caratheodory(&mut c, n);
        assert!(c.len() <= n);
        for v in c.recompose(n) {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }
}
