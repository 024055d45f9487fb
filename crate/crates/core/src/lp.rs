//! A dense two-phase simplex and cutting-plane optimization over matroid polytopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::polytope::{separate, Mode};
use crate::set::ElementSet;

/// Rows must hold to this precision at an optimum.
pub const FEAS_TOL: f64 = 1e-7;

/// Residuals above this are reported as numerical failures.
pub const FAIL_TOL: f64 = 1e-6;

const PIVOT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;
const MAX_CUT_ROUNDS: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn le(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self {
            coeffs,
            rel: Relation::Le,
            rhs,
        }
    }

    pub fn ge(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self {
            coeffs,
            rel: Relation::Ge,
            rhs,
        }
    }

    pub fn eq(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self {
            coeffs,
            rel: Relation::Eq,
            rhs,
        }
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.rel {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub rows: Vec<Row>,
    /// Finite `[lo, hi]` per variable.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// `optimize c·x` over the unit box with the given rows.
    pub fn in_unit_box(objective: Vec<f64>, sense: Sense, rows: Vec<Row>) -> Self {
        let n = objective.len();
        Self {
            objective,
            sense,
            rows,
            bounds: vec![(0.0, 1.0); n],
        }
    }

    pub fn n(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Evidence attached to a non-optimal outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Minimum total artificial value found by phase one.
    pub infeasibility: f64,
    /// Matroid cuts `x(S) <= r(S)` active in the LP when infeasibility was proven.
    pub cuts: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: Status,
    pub x: Vec<f64>,
    pub value: f64,
    pub certificate: Option<Certificate>,
    pub max_residual: f64,
    pub cuts: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    fn infeasible(n: usize, infeasibility: f64) -> Self {
        Self {
            status: Status::Infeasible,
            x: vec![0.0; n],
            value: f64::NAN,
            certificate: Some(Certificate {
                infeasibility,
                cuts: Vec::new(),
            }),
            max_residual: 0.0,
            cuts: 0,
        }
    }
}

struct Tableau {
    /// `rows[r]` holds the constraint coefficients followed by the right-hand side.
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
    banned: Vec<bool>,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= pv;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Sets the objective row for `max c·x` and prices out the basis.
    fn set_objective(&mut self, c: &[f64]) {
        self.obj = vec![0.0; self.cols + 1];
        for (j, &cj) in c.iter().enumerate() {
            self.obj[j] = -cj;
        }
        for r in 0..self.rows.len() {
            let b = self.basis[r];
            let f = self.obj[b];
            if f != 0.0 {
                for (v, p) in self.obj.iter_mut().zip(&self.rows[r]) {
                    *v -= f * p;
                }
            }
        }
    }

    /// Bland's rule: lowest-index improving column, then lowest-index basic variable among ties.
    fn optimize(&mut self) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..self.cols).find(|&j| !self.banned[j] && self.obj[j] < -PIVOT_EPS) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match best {
                        None => true,
                        Some((br, bv)) => ratio < bv - 1e-12 || (ratio <= bv + 1e-12 && self.basis[r] < self.basis[br]),
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            match best {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::Numerical("simplex exceeded the pivot limit".into()))
    }
}

/// Solves a linear program by the two-phase simplex method with Bland's rule.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.n();
    if lp.bounds.len() != n {
        return Err(Error::Schema {
            field: "bounds".into(),
            reason: format!("{} bounds for {} variables", lp.bounds.len(), n),
        });
    }
    for (k, row) in lp.rows.iter().enumerate() {
        if row.coeffs.len() != n {
            return Err(Error::Schema {
                field: format!("rows[{k}]"),
                reason: format!("{} coefficients for {} variables", row.coeffs.len(), n),
            });
        }
    }
    for (i, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Schema {
                field: format!("bounds[{i}]"),
                reason: "bounds must be finite".into(),
            });
        }
        if lo > hi + FEAS_TOL {
            return Ok(LpOutcome::infeasible(n, lo - hi));
        }
    }

    // Shift x = lo + x' and write the upper bounds as rows.
    let lo: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(lp.rows.len() + n);
    for row in &lp.rows {
        let shift: f64 = row.coeffs.iter().zip(&lo).map(|(a, l)| a * l).sum();
        rows.push((row.coeffs.clone(), row.rel, row.rhs - shift));
    }
    for (i, &(l, h)) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push((e, Relation::Le, (h - l).max(0.0)));
    }
    for r in rows.iter_mut() {
        if r.2 < 0.0 {
            for v in r.0.iter_mut() {
                *v = -*v;
            }
            r.2 = -r.2;
            r.1 = match r.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + slack_count + art_count;
    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        obj: Vec::new(),
        basis: Vec::with_capacity(m),
        cols,
        banned: vec![false; cols],
    };
    let (mut next_slack, mut next_art) = (n, n + slack_count);
    for (coeffs, rel, rhs) in &rows {
        let mut row = vec![0.0; cols + 1];
        row[..n].copy_from_slice(coeffs);
        row[cols] = *rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = 1.0;
                t.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                t.basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                t.basis.push(next_art);
                next_art += 1;
            }
        }
        t.rows.push(row);
    }
    let is_art = |j: usize| j >= n + slack_count;

    if art_count > 0 {
        let mut c1 = vec![0.0; cols];
        for v in c1.iter_mut().skip(n + slack_count) {
            *v = -1.0;
        }
        t.set_objective(&c1);
        t.optimize()?;
        let infeasibility = -t.obj[cols];
        if infeasibility > 1e-8 {
            return Ok(LpOutcome::infeasible(n, infeasibility));
        }
        // Drive artificials out of the basis; rows where that fails are redundant.
        let mut r = 0;
        while r < t.rows.len() {
            if is_art(t.basis[r]) {
                if let Some(c) = (0..n + slack_count).find(|&c| t.rows[r][c].abs() > PIVOT_EPS) {
                    t.pivot(r, c);
                } else {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
        for j in n + slack_count..cols {
            t.banned[j] = true;
        }
    }

    let sign = if lp.sense == Sense::Max { 1.0 } else { -1.0 };
    let mut c2 = vec![0.0; cols];
    for (j, &cj) in lp.objective.iter().enumerate() {
        c2[j] = sign * cj;
    }
    t.set_objective(&c2);
    if !t.optimize()? {
        return Ok(LpOutcome {
            status: Status::Unbounded,
            x: vec![0.0; n],
            value: sign * f64::INFINITY,
            certificate: None,
            max_residual: 0.0,
            cuts: 0,
        });
    }
    let mut x = lo.clone();
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] += t.rhs(r);
        }
    }
    for (i, v) in x.iter_mut().enumerate() {
        *v = v.clamp(lp.bounds[i].0, lp.bounds[i].1);
    }
    let max_residual = lp.rows.iter().map(|r| r.violation(&x)).fold(0.0, f64::max);
    if max_residual > FAIL_TOL {
        return Err(Error::Numerical(format!(
            "simplex solution violates a row by {max_residual}"
        )));
    }
    let value = lp.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpOutcome {
        status: Status::Optimal,
        x,
        value,
        certificate: None,
        max_residual,
        cuts: 0,
    })
}

/// `scale · P(M)` or `scale · B(M)` intersected with extra rows, with some
/// coordinates fixed to zero. Violated rank constraints found by separation are
/// kept as cuts and reused by later solves.
#[derive(Clone, Debug)]
pub struct Region<'a> {
    pub matroid: &'a Matroid,
    pub mode: Mode,
    pub rows: Vec<Row>,
    pub scale: f64,
    pub fixed_zero: ElementSet,
    cuts: Vec<ElementSet>,
    /// Solve row-free instances by the greedy algorithm instead of the LP.
    pub greedy_shortcut: bool,
}

impl<'a> Region<'a> {
    pub fn new(matroid: &'a Matroid, mode: Mode, rows: Vec<Row>) -> Self {
        Self {
            matroid,
            mode,
            rows,
            scale: 1.0,
            fixed_zero: matroid.empty_set(),
            cuts: Vec::new(),
            greedy_shortcut: true,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn cuts(&self) -> &[ElementSet] {
        &self.cuts
    }

    pub fn n(&self) -> usize {
        self.matroid.n()
    }

    /// Whether `x` lies in the region within `tol` (rows) and the polytope tolerance.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        if x.len() != self.n() {
            return Ok(false);
        }
        if self.rows.iter().any(|r| r.violation(x) > tol) {
            return Ok(false);
        }
        if self.fixed_zero.iter().any(|i| x[i].abs() > tol) {
            return Ok(false);
        }
        if self.scale <= 0.0 {
            return Ok(x.iter().all(|v| v.abs() <= tol));
        }
        let z: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        let mode_ok = match self.mode {
            Mode::P => true,
            Mode::B => {
                let total: f64 = z.iter().sum();
                (total - self.matroid.rank_full() as f64).abs() <= tol / self.scale.max(1e-300)
            }
        };
        Ok(mode_ok && z.iter().all(|&v| v >= -tol && v <= 1.0 + tol) && separate(self.matroid, &z)?.is_none())
    }

    pub fn optimize(&mut self, c: &[f64], sense: Sense) -> Result<LpOutcome> {
        self.optimize_with(c, sense, &[])
    }

    /// Optimizes with `extra` rows added for this solve only.
    pub fn optimize_with(&mut self, c: &[f64], sense: Sense, extra: &[Row]) -> Result<LpOutcome> {
        let n = self.n();
        if c.len() != n {
            return Err(Error::Schema {
                field: "objective".into(),
                reason: format!("length {} does not match ground set size {}", c.len(), n),
            });
        }
        if self.greedy_shortcut && self.rows.is_empty() && extra.is_empty() {
            return Ok(self.greedy(c, sense));
        }
        let d = self.matroid.rank_full() as f64;
        let mut bounds = vec![(0.0, self.scale.clamp(0.0, 1.0)); n];
        for i in self.fixed_zero.iter() {
            bounds[i] = (0.0, 0.0);
        }
        let mut base_rows: Vec<Row> = self.rows.iter().chain(extra).cloned().collect();
        if self.mode == Mode::B {
            base_rows.push(Row::eq(vec![1.0; n], self.scale * d));
        }
        for _ in 0..MAX_CUT_ROUNDS {
            let mut rows = base_rows.clone();
            for s in &self.cuts {
                rows.push(Row::le(s.indicator(), self.scale * self.matroid.rank(s) as f64));
            }
            let lp = LinearProgram {
                objective: c.to_vec(),
                sense,
                rows,
                bounds: bounds.clone(),
            };
            let mut out = simplex_solve(&lp)?;
            out.cuts = self.cuts.len();
            if !out.is_optimal() {
                if let Some(cert) = out.certificate.as_mut() {
                    cert.cuts = self.cuts.iter().map(ElementSet::to_vec).collect();
                }
                return Ok(out);
            }
            if self.scale <= 0.0 {
                return Ok(out);
            }
            let z: Vec<f64> = out.x.iter().map(|v| (v / self.scale).max(0.0)).collect();
            match separate(self.matroid, &z)? {
                None => return Ok(out),
                Some(v) => {
                    if self.cuts.contains(&v.set) {
                        // The LP already enforces this cut; the residual is solver noise.
                        return Ok(out);
                    }
                    self.cuts.push(v.set);
                }
            }
        }
        Err(Error::SolverFailure("cutting-plane loop did not converge".into()))
    }

    fn greedy(&self, c: &[f64], sense: Sense) -> LpOutcome {
        let n = self.n();
        let m = if self.fixed_zero.is_empty() {
            self.matroid.clone()
        } else {
            self.matroid.delete(&self.fixed_zero)
        };
        if self.mode == Mode::B && m.rank_full() < self.matroid.rank_full() {
            return LpOutcome::infeasible(n, 1.0);
        }
        let w: Vec<f64> = match sense {
            Sense::Max => c.to_vec(),
            Sense::Min => c.iter().map(|v| -v).collect(),
        };
        let mut w_masked = w.clone();
        for i in self.fixed_zero.iter() {
            w_masked[i] = f64::NEG_INFINITY;
        }
        let set = match self.mode {
            Mode::B => m.greedy_max_weight_base(&w_masked),
            Mode::P => m.greedy_max_weight_independent(&w_masked),
        };
        let x: Vec<f64> = (0..n).map(|i| if set.contains(i) { self.scale } else { 0.0 }).collect();
        let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        LpOutcome {
            status: Status::Optimal,
            x,
            value,
            certificate: None,
            max_residual: 0.0,
            cuts: 0,
        }
    }
}

/// Optimizes `c·x` over `P(M)` or `B(M)` intersected with `extra_rows`.
pub fn optimize_over_matroid_intersection(
    m: &Matroid,
    mode: Mode,
    extra_rows: &[Row],
    c: &[f64],
    sense: Sense,
) -> Result<LpOutcome> {
    Region::new(m, mode, extra_rows.to_vec()).optimize(c, sense)
}

/// [`optimize_over_matroid_intersection`] always using the cutting-plane loop.
pub fn cutting_plane(m: &Matroid, mode: Mode, extra_rows: &[Row], c: &[f64], sense: Sense) -> Result<LpOutcome> {
    let mut region = Region::new(m, mode, extra_rows.to_vec());
    region.greedy_shortcut = false;
    region.optimize(c, sense)
}

/// A point of the polytope satisfying `rows`, or infeasibility.
pub fn feasibility_check(m: &Matroid, mode: Mode, rows: &[Row]) -> Result<LpOutcome> {
    optimize_over_matroid_intersection(m, mode, rows, &vec![0.0; m.n()], Sense::Max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_examples() {
        let lp = LinearProgram {
            objective: vec![3.0, 2.0],
            sense: Sense::Max,
            rows: vec![Row::le(vec![1.0, 1.0], 4.0), Row::le(vec![1.0, 0.0], 2.0)],
            bounds: vec![(0.0, 10.0); 2],
        };
        let out = simplex_solve(&lp).unwrap();
        assert!((out.value - 10.0).abs() < 1e-9);
        assert!((out.x[0] - 2.0).abs() < 1e-9 && (out.x[1] - 2.0).abs() < 1e-9);

        let lp = LinearProgram {
            objective: vec![1.0],
            sense: Sense::Max,
            rows: vec![Row::le(vec![1.0], 1.0)],
            bounds: vec![(0.0, 10.0)],
        };
        assert!((simplex_solve(&lp).unwrap().value - 1.0).abs() < 1e-12);

        let lp = LinearProgram {
            objective: vec![1.0],
            sense: Sense::Max,
            rows: vec![Row::le(vec![1.0], 0.0), Row::ge(vec![1.0], 1.0)],
            bounds: vec![(0.0, 10.0)],
        };
        assert_eq!(simplex_solve(&lp).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn equality_and_negative_bounds() {
        // min x - y, x + y = 1, x in [-1, 1], y in [0, 3]
        let lp = LinearProgram {
            objective: vec![1.0, -1.0],
            sense: Sense::Min,
            rows: vec![Row::eq(vec![1.0, 1.0], 1.0)],
            bounds: vec![(-1.0, 1.0), (0.0, 3.0)],
        };
        let out = simplex_solve(&lp).unwrap();
        assert!((out.value + 3.0).abs() < 1e-9, "{out:?}");
    }

    #[test]
    fn matroid_lp_examples() {
        let u = Matroid::uniform(4, 2).unwrap();
        let out = cutting_plane(&u, Mode::B, &[], &[1.0; 4], Sense::Max).unwrap();
        assert!((out.value - 2.0).abs() < 1e-9);

        let row = Row::le(vec![1.0, 1.0, 0.0, 0.0], 0.5);
        let out =
            optimize_over_matroid_intersection(&u, Mode::P, std::slice::from_ref(&row), &[1.0; 4], Sense::Max).unwrap();
        assert!((out.value - 2.0).abs() < 1e-9);
        assert!(out.x.iter().sum::<f64>() <= 2.0 + 1e-9);
        assert!(row.violation(&out.x) <= 1e-9);

        let bad = [Row::ge(vec![1.0, 0.0, 0.0, 0.0], 2.0)];
        let out = optimize_over_matroid_intersection(&u, Mode::P, &bad, &[1.0; 4], Sense::Max).unwrap();
        assert_eq!(out.status, Status::Infeasible);
    }

    fn k3_loads(lambda: f64) -> Vec<Row> {
        // Edges (0,1), (0,2), (1,2); one row per vertex.
        vec![
            Row::le(vec![1.0, 1.0, 0.0], lambda),
            Row::le(vec![1.0, 0.0, 1.0], lambda),
            Row::le(vec![0.0, 1.0, 1.0], lambda),
        ]
    }

    #[test]
    fn feasibility_examples() {
        let k3 = Matroid::complete_graph(3).unwrap();
        let out = feasibility_check(&k3, Mode::B, &k3_loads(4.0 / 3.0)).unwrap();
        assert!(out.is_optimal());
        for v in &out.x {
            assert!((v - 2.0 / 3.0).abs() < 1e-7);
        }
        let out = feasibility_check(&k3, Mode::B, &k3_loads(0.5)).unwrap();
        assert_eq!(out.status, Status::Infeasible);
        assert!(feasibility_check(&k3, Mode::B, &[]).unwrap().is_optimal());
    }

    #[test]
    fn greedy_shortcut_matches_cutting_plane() {
        let m = Matroid::complete_graph(4).unwrap();
        let w = [0.3, -0.2, 0.9, 0.1, 0.5, 0.4];
        for mode in [Mode::P, Mode::B] {
            for sense in [Sense::Max, Sense::Min] {
                let a = optimize_over_matroid_intersection(&m, mode, &[], &w, sense).unwrap();
                let b = cutting_plane(&m, mode, &[], &w, sense).unwrap();
                assert!((a.value - b.value).abs() < 1e-7, "{mode:?} {sense:?}");
            }
        }
    }

    #[test]
    fn scaled_region() {
        let u = Matroid::uniform(3, 1).unwrap();
        let mut r = Region::new(&u, Mode::P, vec![Row::le(vec![0.0, 0.0, 1.0], 0.1)]).with_scale(0.5);
        let out = r.optimize(&[1.0, 1.0, 1.0], Sense::Max).unwrap();
        assert!((out.value - 0.5).abs() < 1e-9);
        assert!(r.contains(&out.x, 1e-9).unwrap());
        assert!(!r.contains(&[0.6, 0.0, 0.0], 1e-9).unwrap());
    }
}
