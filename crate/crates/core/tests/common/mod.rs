#![allow(dead_code)]

use std::path::PathBuf;

use matround::instance::{parse_instance, Instance};
use matround::lp::{LinearProgram, Row, Sense};
use matround::{ElementSet, Matroid};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Instance {
    parse_instance(&fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every subset of `0..n` as a bitmask set.
pub fn all_subsets(n: usize) -> impl Iterator<Item = ElementSet> {
    assert!(n < 24);
    (0u64..1 << n).map(move |mask| ElementSet::from_mask(n, mask))
}

pub fn independent_sets(m: &Matroid) -> Vec<ElementSet> {
    all_subsets(m.n()).filter(|s| m.is_independent(s)).collect()
}

/// Rank as the largest independent subset, by enumeration.
pub fn brute_rank(indep: &[ElementSet], s: &ElementSet) -> usize {
    indep
        .iter()
        .filter(|i| i.is_subset(s))
        .map(|i| i.len())
        .max()
        .unwrap_or(0)
}

/// Whether `x(S) <= r(S) + tol` for every `S`, by enumeration.
pub fn in_matroid_polytope_brute(m: &Matroid, x: &[f64], tol: f64) -> bool {
    let indep = independent_sets(m);
    x.iter().all(|&v| v >= -tol) && all_subsets(m.n()).all(|s| s.weight(x) <= brute_rank(&indep, &s) as f64 + tol)
}

/// A random sparse graph on at most `max_edges` edges, parallel edges allowed.
pub fn random_graph<R: Rng>(rng: &mut R, vertices: usize, edges: usize) -> Vec<(usize, usize)> {
    (0..edges)
        .map(|_| {
            let u = rng.gen_range(0..vertices);
            let mut v = rng.gen_range(0..vertices - 1);
            if v >= u {
                v += 1;
            }
            (u.min(v), u.max(v))
        })
        .collect()
}

pub fn random_partition<R: Rng>(rng: &mut R, n: usize) -> Matroid {
    let blocks_count = rng.gen_range(1..=n.min(4));
    let mut blocks = vec![Vec::new(); blocks_count];
    let mut elems: Vec<usize> = (0..n).collect();
    elems.shuffle(rng);
    for (i, e) in elems.into_iter().enumerate() {
        let b = if i < blocks_count {
            i
        } else {
            rng.gen_range(0..blocks_count)
        };
        blocks[b].push(e);
    }
    let mut caps: Vec<usize> = blocks.iter().map(|b| rng.gen_range(0..=b.len())).collect();
    if caps.iter().all(|&c| c == 0) {
        caps[0] = 1;
    }
    Matroid::partition(blocks, caps).unwrap()
}

/// One of uniform, partition, graphic or explicit (`kind` modulo 4) on at most `max_n` elements.
pub fn random_matroid<R: Rng>(rng: &mut R, kind: usize, max_n: usize) -> Matroid {
    let n = rng.gen_range(2..=max_n);
    match kind % 4 {
        0 => Matroid::uniform(n, rng.gen_range(1..=n)).unwrap(),
        1 => random_partition(rng, n),
        2 => {
            let v = rng.gen_range(3..=6);
            Matroid::graphic(v, random_graph(rng, v, n)).unwrap()
        }
        _ => {
            let inner = if rng.gen_bool(0.5) {
                random_partition(rng, n.min(8))
            } else {
                let v = rng.gen_range(3..=5);
                Matroid::graphic(v, random_graph(rng, v, n.min(8))).unwrap()
            };
            let sets: Vec<Vec<usize>> = independent_sets(&inner).iter().map(|s| s.to_vec()).collect();
            Matroid::from_independent_sets(inner.n(), &sets).unwrap()
        }
    }
}

/// Random convex combination of `terms` greedy bases.
pub fn random_base_point<R: Rng>(rng: &mut R, m: &Matroid, terms: usize) -> Vec<f64> {
    let n = m.n();
    let weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut x = vec![0.0; n];
    for w in weights {
        let order: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let b = m.greedy_max_weight_base(&order);
        for i in b.iter() {
            x[i] += w / total;
        }
    }
    for v in &mut x {
        *v = v.clamp(0.0, 1.0);
    }
    x
}

/// A base-polytope point scaled into the matroid polytope.
pub fn random_independent_point<R: Rng>(rng: &mut R, m: &Matroid, terms: usize) -> Vec<f64> {
    let s: f64 = rng.gen_range(0.2..1.0);
    random_base_point(rng, m, terms).into_iter().map(|v| v * s).collect()
}

/// Random coverage function: `items` items with weights in `[0.5, 2]`, each element covering 1 to 3 items.
pub fn random_coverage<R: Rng>(rng: &mut R, n: usize, items: usize) -> matround::submodular::Submodular {
    let weights: Vec<f64> = (0..items).map(|_| rng.gen_range(0.5..2.0)).collect();
    let covers: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3.min(items));
            let mut c: Vec<usize> = (0..items)
                .collect::<Vec<_>>()
                .choose_multiple(rng, k)
                .copied()
                .collect();
            c.sort_unstable();
            c
        })
        .collect();
    matround::submodular::Submodular::coverage(weights, covers).unwrap()
}

// ---------------------------------------------------------------------------
// Linear programs

/// `(coeffs, relation, rhs)` with relation -1 for `<=`, 0 for `=`, 1 for `>=`.
pub type Constraint = (Vec<f64>, i8, f64);

/// Solves the square system `A x = b` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Optimum over a bounded polyhedron by enumerating all basic solutions.
pub fn vertex_enumeration(c: &[f64], sense: Sense, cons: &[Constraint], bounds: &[(f64, f64)]) -> Option<f64> {
    let n = c.len();
    let mut all: Vec<Constraint> = cons.to_vec();
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        all.push((e.clone(), 1, lo));
        all.push((e, -1, hi));
    }
    let feasible = |x: &[f64]| {
        all.iter().all(|(a, rel, b)| {
            let lhs: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            match rel {
                -1 => lhs <= b + 1e-9,
                1 => lhs >= b - 1e-9,
                _ => (lhs - b).abs() <= 1e-9,
            }
        })
    };
    let mut best: Option<f64> = None;
    for active in combinations(all.len(), n) {
        let a = active.iter().map(|&i| all[i].0.clone()).collect();
        let b = active.iter().map(|&i| all[i].2).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(match (best, sense) {
                    (None, _) => v,
                    (Some(b), Sense::Max) => b.max(v),
                    (Some(b), Sense::Min) => b.min(v),
                });
            }
        }
    }
    best
}

/// A random LP with 1 to 4 variables, 1 to 5 rows and finite bounds.
pub fn random_lp<R: Rng>(r: &mut R) -> (LinearProgram, Vec<Constraint>) {
    let n = r.gen_range(1..=4);
    let m = r.gen_range(1..=5);
    let coeff = |r: &mut R| -> f64 {
        if r.gen_bool(0.5) {
            r.gen_range(-3i32..=3) as f64
        } else {
            r.gen_range(-2.0..2.0)
        }
    };
    let c: Vec<f64> = (0..n).map(|_| coeff(r)).collect();
    let cons: Vec<Constraint> = (0..m)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| coeff(r)).collect();
            let rel = [-1i8, -1, -1, 1, 0][r.gen_range(0..5)];
            (a, rel, r.gen_range(-1.0..3.0))
        })
        .collect();
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            if r.gen_bool(0.7) {
                (0.0, 1.0)
            } else {
                (r.gen_range(-2.0..0.0), r.gen_range(0.5..3.0))
            }
        })
        .collect();
    let sense = if r.gen_bool(0.5) { Sense::Max } else { Sense::Min };
    let rows = cons
        .iter()
        .map(|(a, rel, b)| match rel {
            -1 => Row::le(a.clone(), *b),
            1 => Row::ge(a.clone(), *b),
            _ => Row::eq(a.clone(), *b),
        })
        .collect();
    let lp = LinearProgram {
        objective: c,
        sense,
        rows,
        bounds,
    };
    (lp, cons)
}
