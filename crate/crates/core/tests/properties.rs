mod common;

use common::*;
use matround::instance::{Instance, InstanceFile, FORMAT};
use matround::lp::{Region, Sense};
use matround::polytope::{check_membership, decompose_base, decompose_point, separate, Mode};
use matround::rounding::{adjust_pipage, independent_round, pipage_round, swap_round, swap_round_point};
use matround::stats::{check_traces, Harness, Method, Sampler};
use matround::{ElementSet, Matroid};
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Matroid oracles

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn rank_is_normalized_monotone_submodular(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 8);
        let n = m.n();
        prop_assert_eq!(m.rank(&ElementSet::empty(n)), 0);
        let sets: Vec<ElementSet> = all_subsets(n).collect();
        let ranks: Vec<usize> = sets.iter().map(|s| m.rank(s)).collect();
        for (a, s) in sets.iter().enumerate() {
            prop_assert!(ranks[a] <= s.len());
            for i in 0..n {
                if !s.contains(i) {
                    let b = s.with(i).to_mask().unwrap() as usize;
                    prop_assert!(ranks[b] >= ranks[a] && ranks[b] <= ranks[a] + 1);
                }
            }
        }
        for a in 0..sets.len() {
            for b in 0..sets.len() {
                let u = a | b;
                let i = a & b;
                prop_assert!(ranks[u] + ranks[i] <= ranks[a] + ranks[b]);
            }
        }
    }

    #[test]
    fn independence_agrees_with_rank(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let indep = independent_sets(&m);
        for s in all_subsets(m.n()) {
            prop_assert_eq!(m.is_independent(&s), m.rank(&s) == s.len());
            prop_assert_eq!(m.rank(&s), brute_rank(&indep, &s));
        }
    }

    #[test]
    fn bases_satisfy_the_exchange_property(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let n = m.n();
        let w1: Vec<f64> = (0..n).map(|_| r.gen()).collect();
        let w2: Vec<f64> = (0..n).map(|_| r.gen()).collect();
        let b1 = m.greedy_max_weight_base(&w1);
        let b2 = m.greedy_max_weight_base(&w2);
        prop_assert!(m.is_base(&b1) && m.is_base(&b2));
        for i in b1.difference(&b2).iter() {
            let j = m.find_exchange(&b1, &b2, i).unwrap();
            prop_assert!(b2.contains(j) && !b1.contains(j));
            prop_assert!(m.is_base(&b1.without(i).with(j)));
            prop_assert!(m.is_base(&b2.without(j).with(i)));
        }
    }

    #[test]
    fn greedy_finds_a_maximum_weight_base(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let w: Vec<f64> = (0..m.n()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let b = m.greedy_max_weight_base(&w);
        prop_assert!(m.is_base(&b));
        let best = all_subsets(m.n())
            .filter(|s| m.is_base(s))
            .map(|s| s.weight(&w))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((b.weight(&w) - best).abs() < 1e-9);
    }
}

// ---------------------------------------------------------------------------
// Polytopes

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn base_decomposition_recomposes(seed in any::<u64>(), kind in 0usize..4, terms in 1usize..5) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let x = random_base_point(&mut r, &m, terms);
        let c = decompose_base(&m, &x).unwrap();
        prop_assert!(c.validate(&m, Mode::B).is_ok());
        prop_assert!(c.len() <= m.n().max(1));
        prop_assert!(linf(&c.recompose(m.n()), &x) <= 1e-9);
    }

    #[test]
    fn point_decomposition_recomposes(seed in any::<u64>(), kind in 0usize..4, terms in 1usize..5) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let x = random_independent_point(&mut r, &m, terms);
        let c = decompose_point(&m, &x).unwrap();
        prop_assert!(c.validate(&m, Mode::P).is_ok());
        prop_assert!(c.len() <= m.n() + 1);
        prop_assert!(linf(&c.recompose(m.n()), &x) <= 1e-9);
    }

    #[test]
    fn base_membership_implies_matroid_membership(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let x = random_base_point(&mut r, &m, 3);
        prop_assert!(check_membership(&m, &x, Mode::B).unwrap());
        prop_assert!(check_membership(&m, &x, Mode::P).unwrap());
        let y: Vec<f64> = x.iter().map(|v| v * 0.9).collect();
        prop_assert!(check_membership(&m, &y, Mode::P).unwrap());
        if m.rank_full() > 0 {
            prop_assert!(!check_membership(&m, &y, Mode::B).unwrap());
        }
    }

    #[test]
    fn separation_matches_enumeration(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let x: Vec<f64> = if r.gen_bool(0.5) {
            random_independent_point(&mut r, &m, 3)
                .into_iter()
                .map(|v| (v * r.gen_range(0.9..1.3)).min(1.0))
                .collect()
        } else {
            (0..m.n()).map(|_| r.gen::<f64>()).collect()
        };
        let found = separate(&m, &x).unwrap();
        let brute = !in_matroid_polytope_brute(&m, &x, 1e-9);
        prop_assert_eq!(found.is_some(), brute, "x = {:?}", x);
        if let Some(s) = found {
            prop_assert!(s.set.weight(&x) > m.rank(&s.set) as f64 + 1e-9);
        }
    }
}

// ---------------------------------------------------------------------------
// Multilinear extension

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn multilinear_is_monotone_with_nonpositive_cross_derivatives(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let f = random_coverage(&mut r, n, 6);
        let x: Vec<f64> = (0..n).map(|_| r.gen()).collect();
        let base = f.multilinear_exact(&x).unwrap();
        let i = r.gen_range(0..n);
        let mut up = x.clone();
        up[i] = (up[i] + 0.3).min(1.0);
        prop_assert!(f.multilinear_exact(&up).unwrap() >= base - 1e-12);

        // ∂²F/∂x_i∂x_j from the four corners in coordinates i, j.
        let j = (i + 1 + r.gen_range(0..n - 1)) % n;
        let at = |a: f64, b: f64| {
            let mut z = x.clone();
            z[i] = a;
            z[j] = b;
            f.multilinear_exact(&z).unwrap()
        };
        let cross = at(1.0, 1.0) - at(1.0, 0.0) - at(0.0, 1.0) + at(0.0, 0.0);
        prop_assert!(cross <= 1e-9);
    }

    #[test]
    fn exact_gradient_matches_finite_differences(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let f = random_coverage(&mut r, n, 6);
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..0.95)).collect();
        let g = f.gradient_exact(&x).unwrap();
        let h = 1e-5;
        for i in 0..n {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (f.multilinear_exact(&a).unwrap() - f.multilinear_exact(&b).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() < 1e-6, "coordinate {}: {} vs {}", i, fd, g[i]);
        }
    }
}

// ---------------------------------------------------------------------------
// Rounding

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn rounding_returns_feasible_sets(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let d = m.rank_full();
        let x = random_base_point(&mut r, &m, 3);
        let c = decompose_base(&m, &x).unwrap();
        let b = swap_round(&c, &m, &mut r, None).unwrap();
        prop_assert!(m.is_base(&b) && b.len() == d);
        let p = pipage_round(&m, &x, &mut r, None).unwrap();
        prop_assert!(m.is_base(&p.base));
        prop_assert!(p.iterations <= m.n() * m.n());

        let y = random_independent_point(&mut r, &m, 3);
        let cp = decompose_point(&m, &y).unwrap();
        prop_assert!(m.is_independent(&swap_round_point(&cp, &m, &mut r).unwrap()));
        prop_assert!(m.is_independent(&adjust_pipage(&m, &y, &mut r, None).unwrap().base));
        let s = independent_round(&y, &mut r);
        prop_assert!(y.iter().enumerate().all(|(i, &v)| v > 0.0 || !s.contains(i)));
    }

    #[test]
    fn integral_points_round_to_themselves(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let w: Vec<f64> = (0..m.n()).map(|_| r.gen()).collect();
        let b = m.greedy_max_weight_base(&w);
        let x = b.indicator();
        prop_assert_eq!(&pipage_round(&m, &x, &mut r, None).unwrap().base, &b);
        let c = decompose_base(&m, &x).unwrap();
        prop_assert_eq!(&swap_round(&c, &m, &mut r, None).unwrap(), &b);
    }

    #[test]
    fn traces_are_martingales(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 8);
        let x = random_base_point(&mut r, &m, 3);
        let y: Vec<f64> = x.iter().map(|v| v * 0.8).collect();
        let harness = Harness::new(20, seed);
        for (method, point) in [(Method::Swap, &x), (Method::Pipage, &x), (Method::AdjustPipage, &y)] {
            let sampler = Sampler::new(method, &m, point, None).unwrap();
            let report = check_traces(&sampler, &harness).unwrap();
            prop_assert!(report.passed, "{:?}: {:?}", method, report.check);
        }
    }

    #[test]
    fn rounding_is_deterministic_under_a_seed(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 10);
        let x = random_base_point(&mut r, &m, 3);
        for method in [Method::Swap, Method::Pipage] {
            let sampler = Sampler::new(method, &m, &x, None).unwrap();
            let a: Vec<ElementSet> = (0..5).map(|t| sampler.trial(seed, t).unwrap()).collect();
            let b: Vec<ElementSet> = (0..5).map(|t| sampler.trial(seed, t).unwrap()).collect();
            prop_assert_eq!(a, b);
        }
    }
}

// ---------------------------------------------------------------------------
// Regions, solvers and instances

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn cutting_plane_optimum_is_in_the_polytope(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 9);
        let c: Vec<f64> = (0..m.n()).map(|_| r.gen_range(-1.0..1.0)).collect();
        for mode in [Mode::P, Mode::B] {
            let mut region = Region::new(&m, mode, vec![]);
            region.greedy_shortcut = false;
            let out = region.optimize(&c, Sense::Max).unwrap();
            prop_assert!(out.is_optimal());
            prop_assert!(in_matroid_polytope_brute(&m, &out.x, 1e-7));
            let greedy = match mode {
                Mode::B => m.greedy_max_weight_base(&c),
                Mode::P => m.greedy_max_weight_independent(&c),
            };
            prop_assert!((out.value - greedy.weight(&c)).abs() < 1e-6);
        }
    }

    #[test]
    fn continuous_greedy_stays_in_the_region(seed in any::<u64>(), kind in 0usize..4) {
        use matround::solvers::{continuous_greedy, SolverParams};
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 8);
        let f = random_coverage(&mut r, m.n(), 5);
        let params = SolverParams { steps: 10, samples: 50, ..SolverParams::default() };
        let mut region = Region::new(&m, Mode::P, vec![]);
        let out = continuous_greedy(&f, &mut region, &params, &mut r).unwrap();
        prop_assert!(in_matroid_polytope_brute(&m, &out.x, 1e-7));
    }

    #[test]
    fn instances_round_trip(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let m = random_matroid(&mut r, kind, 8);
        let x = random_base_point(&mut r, &m, 2);
        let f = random_coverage(&mut r, m.n(), 4);
        let file = InstanceFile {
            format: FORMAT,
            name: Some(format!("random-{seed}")),
            matroid: m.to_spec().unwrap(),
            point: Some(x),
            mode: Some(Mode::B),
            combination: None,
            functions: vec![f.to_spec().unwrap()],
            packing: None,
            targets: Some(vec![1.0]),
            weights: None,
            deltas: Some(vec![0.2, 0.5]),
            subsets: None,
            cuts: None,
        };
        let inst = Instance::from_file(file).unwrap();
        let again = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&inst, &again);
        let restored: &Matroid = &again.matroid;
        prop_assert_eq!(restored.n(), m.n());
        prop_assert_eq!(restored.rank_full(), m.rank_full());
    }
}
