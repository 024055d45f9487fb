//! Matroid oracles over a dense ground set `0..n`.
//!
//! A [`Matroid`] is immutable once built. Besides the four concrete kinds that
//! can be read from JSON (uniform, partition, graphic, explicit) it supports the
//! derived matroids the rounding procedures need: deletion and contraction
//! minors, and the dummy-element extension used to round points of `P(M)` as
//! points of a base polytope.
//!
//! Derived matroids keep the parent's index space. Deleted and contracted
//! elements become loops, so vectors and sets never need re-indexing.

use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::ElementSet;

/// Largest ground set for which rank tables and exhaustive enumeration are used.
pub const EXHAUSTIVE_LIMIT: usize = 22;

/// Largest vertex count for the vertex-subset search on graphic matroids.
pub const GRAPHIC_VERTEX_LIMIT: usize = 20;

/// Largest vertex count for the `3^V` partition search used when `include` is disconnected.
pub const PARTITION_VERTEX_LIMIT: usize = 14;

/// Relative tolerance for comparing slacks when picking a minimizer.
const TIE_EPS: f64 = 1e-12;

/// JSON description of a matroid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MatroidSpec {
    Uniform {
        n: usize,
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Partition {
        /// Blocks partitioning `0..n`.
        blocks: Vec<Vec<usize>>,
        capacities: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Graphic {
        vertices: usize,
        /// Element `e` is the edge `edges[e]`.
        edges: Vec<(usize, usize)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Explicit {
        n: usize,
        /// `ranks[mask]` is the rank of the set with bitmask `mask`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ranks: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        independent_sets: Option<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

/// The ground set `0..n` with optional external names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    pub n: usize,
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
enum Kind {
    Uniform {
        k: usize,
    },
    Partition {
        block_of: Vec<usize>,
        blocks: Vec<Vec<usize>>,
        caps: Vec<usize>,
    },
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Explicit {
        ranks: Arc<Vec<u8>>,
    },
    Minor {
        inner: Arc<Matroid>,
        deleted: ElementSet,
        contracted: ElementSet,
        contracted_rank: usize,
    },
    Dummy {
        inner: Arc<Matroid>,
        dummies: usize,
    },
}

/// An independence/rank oracle.
#[derive(Clone, Debug)]
pub struct Matroid {
    ground: GroundSet,
    kind: Kind,
    full_rank: OnceLock<usize>,
    rank_table: OnceLock<Option<Arc<Vec<u8>>>>,
}

/// Result of [`Matroid::validate_axioms`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AxiomReport {
    pub exhaustive: bool,
    pub checks: usize,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A set attaining `min r(S) - y(S)` over a constrained family, with its slack.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackSet {
    pub set: ElementSet,
    pub slack: f64,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

impl Matroid {
    fn build(n: usize, labels: Option<Vec<String>>, kind: Kind) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidMatroid(format!("{} labels for {} elements", l.len(), n)));
            }
        }
        Ok(Self {
            ground: GroundSet { n, labels },
            kind,
            full_rank: OnceLock::new(),
            rank_table: OnceLock::new(),
        })
    }

    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatroid("empty ground set".into()));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidMatroid(format!("uniform rank {k} must lie in 1..={n}")));
        }
        Self::build(n, None, Kind::Uniform { k })
    }

    pub fn partition(blocks: Vec<Vec<usize>>, caps: Vec<usize>) -> Result<Self> {
        if blocks.len() != caps.len() {
            return Err(Error::InvalidMatroid(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                caps.len()
            )));
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        if n == 0 {
            return Err(Error::InvalidMatroid("empty ground set".into()));
        }
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= n {
                    return Err(Error::IndexOutOfRange { index: e, n });
                }
                if block_of[e] != usize::MAX {
                    return Err(Error::InvalidMatroid(format!("element {e} appears in two blocks")));
                }
                block_of[e] = b;
            }
        }
        let m = Self::build(n, None, Kind::Partition { block_of, blocks, caps })?;
        if m.rank_full() == 0 {
            return Err(Error::InvalidMatroid("partition matroid has rank 0".into()));
        }
        Ok(m)
    }

    pub fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidMatroid("graph has no edges".into()));
        }
        for &(u, v) in &edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidMatroid(format!(
                    "edge ({u},{v}) references a vertex outside 0..{vertices}"
                )));
            }
        }
        let m = Self::build(edges.len(), None, Kind::Graphic { vertices, edges })?;
        if m.rank_full() == 0 {
            return Err(Error::InvalidMatroid("graph has only loops".into()));
        }
        Ok(m)
    }

    /// The complete graph on `v` vertices; edge order is lexicographic `(0,1), (0,2), ...`.
    pub fn complete_graph(v: usize) -> Result<Self> {
        let edges = (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).collect();
        Self::graphic(v, edges)
    }

    /// Explicit matroid from a full rank table; the rank axioms are verified.
    pub fn from_rank_table(n: usize, ranks: Vec<usize>) -> Result<Self> {
        let m = Self::from_rank_table_unchecked(n, ranks)?;
        let report = m.validate_axioms_exhaustive();
        if !report.passed() {
            return Err(Error::InvalidMatroid(report.violations.join("; ")));
        }
        Ok(m)
    }

    /// Explicit matroid from a rank table, checking only the table's shape.
    pub fn from_rank_table_unchecked(n: usize, ranks: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatroid("empty ground set".into()));
        }
        if n > EXHAUSTIVE_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: EXHAUSTIVE_LIMIT,
            });
        }
        if ranks.len() != 1 << n {
            return Err(Error::InvalidMatroid(format!(
                "rank table has {} entries, expected {}",
                ranks.len(),
                1usize << n
            )));
        }
        let table: Vec<u8> = ranks
            .iter()
            .map(|&r| u8::try_from(r).map_err(|_| Error::InvalidMatroid("rank > 255".into())))
            .collect::<Result<_>>()?;
        Self::build(n, None, Kind::Explicit { ranks: Arc::new(table) })
    }

    /// Explicit matroid from its independent sets (the list must be downward closed
    /// up to the matroid axioms, which are verified).
    pub fn from_independent_sets(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        if n == 0 || n > EXHAUSTIVE_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: EXHAUSTIVE_LIMIT,
            });
        }
        let mut indep = vec![false; 1 << n];
        indep[0] = true;
        for s in sets {
            let mut mask = 0usize;
            for &e in s {
                if e >= n {
                    return Err(Error::IndexOutOfRange { index: e, n });
                }
                mask |= 1 << e;
            }
            indep[mask] = true;
        }
        let mut ranks = vec![0usize; 1 << n];
        for mask in 1usize..(1 << n) {
            ranks[mask] = if indep[mask] {
                mask.count_ones() as usize
            } else {
                (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| ranks[mask & !(1 << i)])
                    .max()
                    .unwrap_or(0)
            };
        }
        let m = Self::from_rank_table(n, ranks)?;
        // A listed set missing its subsets would make the rank table disagree with the list.
        for (mask, &flag) in indep.iter().enumerate() {
            let is_indep = m.rank_of_mask(mask as u64) == mask.count_ones() as usize;
            if flag != is_indep {
                return Err(Error::InvalidMatroid(format!(
                    "independent-set list is not a matroid (set {:?})",
                    ElementSet::from_mask(n, mask as u64)
                )));
            }
        }
        Ok(m)
    }

    pub fn from_spec(spec: &MatroidSpec) -> Result<Self> {
        let (m, labels) = match spec {
            MatroidSpec::Uniform { n, k, labels } => (Self::uniform(*n, *k)?, labels),
            MatroidSpec::Partition {
                blocks,
                capacities,
                labels,
            } => (Self::partition(blocks.clone(), capacities.clone())?, labels),
            MatroidSpec::Graphic {
                vertices,
                edges,
                labels,
            } => (Self::graphic(*vertices, edges.clone())?, labels),
            MatroidSpec::Explicit {
                n,
                ranks,
                independent_sets,
                labels,
            } => {
                let m = match (ranks, independent_sets) {
                    (Some(r), None) => Self::from_rank_table(*n, r.clone())?,
                    (None, Some(s)) => Self::from_independent_sets(*n, s)?,
                    (Some(r), Some(s)) => {
                        let a = Self::from_rank_table(*n, r.clone())?;
                        let b = Self::from_independent_sets(*n, s)?;
                        if a.rank_table() != b.rank_table() {
                            return Err(Error::InvalidMatroid(
                                "rank table and independent-set list disagree".into(),
                            ));
                        }
                        a
                    }
                    (None, None) => {
                        return Err(Error::InvalidMatroid(
                            "explicit matroid needs `ranks` or `independent_sets`".into(),
                        ))
                    }
                };
                (m, labels)
            }
        };
        m.with_labels(labels.clone())
    }

    fn with_labels(mut self, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.n() {
                return Err(Error::InvalidMatroid(format!(
                    "{} labels for {} elements",
                    l.len(),
                    self.n()
                )));
            }
        }
        self.ground.labels = labels;
        Ok(self)
    }

    /// The JSON form, for the concrete kinds.
    pub fn to_spec(&self) -> Option<MatroidSpec> {
        let labels = self.ground.labels.clone();
        match &self.kind {
            Kind::Uniform { k } => Some(MatroidSpec::Uniform {
                n: self.n(),
                k: *k,
                labels,
            }),
            Kind::Partition { blocks, caps, .. } => Some(MatroidSpec::Partition {
                blocks: blocks.clone(),
                capacities: caps.clone(),
                labels,
            }),
            Kind::Graphic { vertices, edges } => Some(MatroidSpec::Graphic {
                vertices: *vertices,
                edges: edges.clone(),
                labels,
            }),
            Kind::Explicit { ranks } => Some(MatroidSpec::Explicit {
                n: self.n(),
                ranks: Some(ranks.iter().map(|&r| r as usize).collect()),
                independent_sets: None,
                labels,
            }),
            Kind::Minor { .. } | Kind::Dummy { .. } => None,
        }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn n(&self) -> usize {
        self.ground.n
    }

    /// Short description of the matroid kind.
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Uniform { .. } => "uniform",
            Kind::Partition { .. } => "partition",
            Kind::Graphic { .. } => "graphic",
            Kind::Explicit { .. } => "explicit",
            Kind::Minor { .. } => "minor",
            Kind::Dummy { .. } => "dummy-extension",
        }
    }

    /// Edge list, for graphic matroids.
    pub fn graph(&self) -> Option<(usize, &[(usize, usize)])> {
        match &self.kind {
            Kind::Graphic { vertices, edges } => Some((*vertices, edges)),
            _ => None,
        }
    }

    pub fn empty_set(&self) -> ElementSet {
        ElementSet::empty(self.n())
    }

    pub fn full_set(&self) -> ElementSet {
        ElementSet::full(self.n())
    }

    /// Checks that `s` lives over this ground set.
    pub fn check_set(&self, s: &ElementSet) -> Result<()> {
        if s.universe() != self.n() {
            let index = s.iter().find(|&i| i >= self.n()).unwrap_or(s.universe());
            return Err(Error::IndexOutOfRange { index, n: self.n() });
        }
        Ok(())
    }

    /// Elements that can never be in an independent set: deleted or contracted
    /// elements of a minor, plus genuine loops.
    pub fn loops(&self) -> ElementSet {
        ElementSet::from_indices(
            self.n(),
            (0..self.n()).filter(|&i| !self.is_independent(&ElementSet::from_indices(self.n(), [i]))),
        )
    }

    pub fn is_independent(&self, s: &ElementSet) -> bool {
        debug_assert_eq!(s.universe(), self.n());
        match &self.kind {
            Kind::Uniform { k } => s.len() <= *k,
            Kind::Partition { block_of, caps, .. } => {
                let mut counts = vec![0usize; caps.len()];
                for e in s.iter() {
                    let b = block_of[e];
                    counts[b] += 1;
                    if counts[b] > caps[b] {
                        return false;
                    }
                }
                true
            }
            Kind::Graphic { vertices, edges } => {
                let mut uf = UnionFind::new(*vertices);
                s.iter().all(|e| {
                    let (u, v) = edges[e];
                    uf.union(u, v)
                })
            }
            Kind::Explicit { ranks } => {
                let mask = s.to_mask().expect("explicit matroids have n <= 22");
                ranks[mask as usize] as usize == s.len()
            }
            Kind::Minor {
                inner,
                deleted,
                contracted,
                ..
            } => {
                if !s.is_disjoint(deleted) || !s.is_disjoint(contracted) {
                    return false;
                }
                inner.is_independent(&s.union(contracted))
            }
            Kind::Dummy { inner, .. } => {
                let base_n = inner.n();
                let core = s.resized(base_n);
                s.len() <= inner.rank_full() && inner.is_independent(&core)
            }
        }
    }

    pub fn rank(&self, s: &ElementSet) -> usize {
        debug_assert_eq!(s.universe(), self.n());
        match &self.kind {
            Kind::Uniform { k } => s.len().min(*k),
            Kind::Partition { block_of, caps, .. } => {
                let mut counts = vec![0usize; caps.len()];
                for e in s.iter() {
                    counts[block_of[e]] += 1;
                }
                counts.iter().zip(caps).map(|(&c, &k)| c.min(k)).sum()
            }
            Kind::Graphic { vertices, edges } => {
                let mut uf = UnionFind::new(*vertices);
                s.iter()
                    .filter(|&e| {
                        let (u, v) = edges[e];
                        uf.union(u, v)
                    })
                    .count()
            }
            Kind::Explicit { ranks } => ranks[s.to_mask().expect("explicit matroids have n <= 22") as usize] as usize,
            Kind::Minor {
                inner,
                deleted,
                contracted,
                contracted_rank,
            } => {
                let live = s.difference(deleted).union(contracted);
                inner.rank(&live) - contracted_rank
            }
            Kind::Dummy { inner, dummies } => {
                let base_n = inner.n();
                let core = s.resized(base_n);
                let extra = s.iter().filter(|&i| i >= base_n).count();
                debug_assert!(extra <= *dummies);
                (inner.rank(&core) + extra).min(inner.rank_full())
            }
        }
    }

    /// `d = r(N)`.
    pub fn rank_full(&self) -> usize {
        *self.full_rank.get_or_init(|| self.rank(&self.full_set()))
    }

    fn rank_of_mask(&self, mask: u64) -> usize {
        match self.rank_table() {
            Some(t) => t[mask as usize] as usize,
            None => self.rank(&ElementSet::from_mask(self.n(), mask)),
        }
    }

    /// Ranks of all `2^n` subsets indexed by bitmask, when `n <= EXHAUSTIVE_LIMIT`.
    pub fn rank_table(&self) -> Option<Arc<Vec<u8>>> {
        self.rank_table
            .get_or_init(|| {
                if let Kind::Explicit { ranks } = &self.kind {
                    return Some(ranks.clone());
                }
                let n = self.n();
                if n > EXHAUSTIVE_LIMIT {
                    return None;
                }
                // basis[mask] is a greedy basis of mask; adding the top element either
                // extends it or leaves the rank unchanged.
                let size = 1usize << n;
                let mut basis = vec![0u32; size];
                let mut ranks = vec![0u8; size];
                for mask in 1..size {
                    let top = usize::BITS - 1 - mask.leading_zeros();
                    let rest = mask & !(1 << top);
                    let cand = basis[rest] | (1 << top);
                    if self.is_independent(&ElementSet::from_mask(n, cand as u64)) {
                        basis[mask] = cand;
                        ranks[mask] = ranks[rest] + 1;
                    } else {
                        basis[mask] = basis[rest];
                        ranks[mask] = ranks[rest];
                    }
                }
                Some(Arc::new(ranks))
            })
            .clone()
    }

    /// Matroid greedy: a base maximizing `sum w_i`, ties broken toward lower indices.
    pub fn greedy_max_weight_base(&self, w: &[f64]) -> ElementSet {
        self.greedy_in_order(&order_by_weight(w), false, w)
    }

    /// Greedy over elements of positive weight only: a maximum-weight independent set.
    pub fn greedy_max_weight_independent(&self, w: &[f64]) -> ElementSet {
        self.greedy_in_order(&order_by_weight(w), true, w)
    }

    /// Greedy along an explicit element order.
    pub fn greedy_in_order(&self, order: &[usize], positive_only: bool, w: &[f64]) -> ElementSet {
        let d = self.rank_full();
        let mut b = self.empty_set();
        let mut size = 0;
        for &e in order {
            if size == d {
                break;
            }
            if positive_only && w[e] <= 0.0 {
                continue;
            }
            b.insert(e);
            if self.is_independent(&b) {
                size += 1;
            } else {
                b.remove(e);
            }
        }
        b
    }

    pub fn is_base(&self, s: &ElementSet) -> bool {
        s.len() == self.rank_full() && self.is_independent(s)
    }

    /// Strong base exchange: the first `j` in `b2 \ b1` (index order) such that
    /// `b1 - i + j` and `b2 - j + i` are both bases.
    pub fn find_exchange(&self, b1: &ElementSet, b2: &ElementSet, i: usize) -> Result<usize> {
        if !b1.contains(i) || b2.contains(i) {
            return Err(Error::Contract(format!("exchange element {i} must lie in b1 \\ b2")));
        }
        self.find_exchange_unchecked(b1, b2, i).ok_or_else(|| {
            Error::Contract(format!(
                "no exchange partner for {i}; inputs {b1:?} and {b2:?} are not both bases"
            ))
        })
    }

    /// Like [`Matroid::find_exchange`] for equal-size independent sets; `None` if no partner exists.
    pub(crate) fn find_exchange_unchecked(&self, b1: &ElementSet, b2: &ElementSet, i: usize) -> Option<usize> {
        let b1_minus = b1.without(i);
        let b2_plus = b2.with(i);
        b2.difference(b1)
            .iter()
            .find(|&j| self.is_independent(&b1_minus.with(j)) && self.is_independent(&b2_plus.without(j)))
    }

    /// Deletes `d`: its elements become loops.
    pub fn delete(&self, d: &ElementSet) -> Matroid {
        self.minor(d, &self.empty_set())
    }

    /// Contracts the independent set `c`: its elements become loops and the rest
    /// is measured relative to `c`.
    pub fn contract(&self, c: &ElementSet) -> Result<Matroid> {
        if !self.is_independent(c) {
            return Err(Error::Contract(format!("contracted set {c:?} is dependent")));
        }
        Ok(self.minor(&self.empty_set(), c))
    }

    fn minor(&self, d: &ElementSet, c: &ElementSet) -> Matroid {
        let (inner, deleted, contracted) = match &self.kind {
            Kind::Minor {
                inner,
                deleted,
                contracted,
                ..
            } => (inner.clone(), deleted.union(d), contracted.union(c)),
            _ => (Arc::new(self.clone()), d.clone(), c.clone()),
        };
        let deleted = deleted.difference(&contracted);
        let contracted_rank = inner.rank(&contracted);
        Matroid {
            ground: self.ground.clone(),
            kind: Kind::Minor {
                inner,
                deleted,
                contracted,
                contracted_rank,
            },
            full_rank: OnceLock::new(),
            rank_table: OnceLock::new(),
        }
    }

    /// The extension by `d = r(N)` dummy elements `n..n+d`, whose independent sets are
    /// `{I : I ∩ N independent, |I| <= d}`. Every independent set pads to a base.
    pub fn with_dummies(&self) -> Matroid {
        let d = self.rank_full();
        Matroid {
            ground: GroundSet {
                n: self.n() + d,
                labels: None,
            },
            kind: Kind::Dummy {
                inner: Arc::new(self.clone()),
                dummies: d,
            },
            full_rank: OnceLock::new(),
            rank_table: OnceLock::new(),
        }
    }

    /// Minimizes `r(S) - y(S)` over nonempty `S` with `include ⊆ S` and
    /// `S ∩ exclude = ∅`.
    ///
    /// Ties prefer fewer elements, then the smallest bitmask. Uniform and partition
    /// matroids are solved in closed form; graphic matroids by searching vertex
    /// subsets (exact whenever `y ∈ P(M)`, and exact in detecting violations
    /// otherwise), or by a partition search when `include` spans several
    /// components; minors and dummy extensions reduce to their parent; explicit
    /// matroids are enumerated. Contractions may return the empty set with slack 0.
    pub fn min_slack(&self, y: &[f64], include: &ElementSet, exclude: &ElementSet) -> Result<Option<SlackSet>> {
        debug_assert_eq!(y.len(), self.n());
        if !include.is_disjoint(exclude) {
            return Ok(None);
        }
        match &self.kind {
            Kind::Uniform { k } => Ok(uniform_min_slack(*k, y, include, exclude)),
            Kind::Partition { blocks, caps, .. } => Ok(partition_min_slack(blocks, caps, y, include, exclude)),
            Kind::Graphic { vertices, edges } => {
                if include_components(*vertices, edges, include) > 1 {
                    return if *vertices <= PARTITION_VERTEX_LIMIT {
                        Ok(graphic_partition_min_slack(*vertices, edges, y, include, exclude))
                    } else {
                        self.min_slack_brute(y, include, exclude)
                    };
                }
                if *vertices <= GRAPHIC_VERTEX_LIMIT && (self.n() > EXHAUSTIVE_LIMIT || *vertices < self.n()) {
                    Ok(graphic_min_slack(*vertices, edges, y, include, exclude))
                } else {
                    self.min_slack_brute(y, include, exclude)
                }
            }
            Kind::Explicit { .. } => self.min_slack_brute(y, include, exclude),
            Kind::Minor {
                inner,
                deleted,
                contracted,
                contracted_rank,
            } => minor_min_slack(inner, deleted, contracted, *contracted_rank, y, include, exclude),
            Kind::Dummy { inner, .. } => dummy_min_slack(inner, self.n(), y, include, exclude),
        }
    }

    /// [`Matroid::min_slack`] by exhaustive enumeration over the rank table.
    pub fn min_slack_brute(&self, y: &[f64], include: &ElementSet, exclude: &ElementSet) -> Result<Option<SlackSet>> {
        let n = self.n();
        let table = self.rank_table().ok_or(Error::TooLarge {
            n,
            limit: EXHAUSTIVE_LIMIT,
        })?;
        let inc = include.to_mask().unwrap();
        let exc = exclude.to_mask().unwrap();
        if inc & exc != 0 {
            return Ok(None);
        }
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let free: Vec<usize> = (0..n).filter(|&i| (inc | exc) >> i & 1 == 0).collect();
        let y_inc: f64 = include.weight(y);

        // Split the free elements in two halves so each subset weight is a two-term sum.
        let half = free.len() / 2;
        let (lo_el, hi_el) = free.split_at(half);
        let tables = |els: &[usize]| {
            let mut masks = vec![0u64; 1 << els.len()];
            let mut sums = vec![0.0f64; 1 << els.len()];
            for s in 1..masks.len() {
                let b = s.trailing_zeros() as usize;
                masks[s] = masks[s & (s - 1)] | 1 << els[b];
                sums[s] = sums[s & (s - 1)] + y[els[b]];
            }
            (masks, sums)
        };
        let (lo_m, lo_s) = tables(lo_el);
        let (hi_m, hi_s) = tables(hi_el);

        let mut best: Option<(u64, f64)> = None;
        for (hm, hs) in hi_m.iter().zip(&hi_s) {
            for (lm, ls) in lo_m.iter().zip(&lo_s) {
                let mask = inc | hm | lm;
                if mask == 0 {
                    continue;
                }
                debug_assert_eq!(mask & !full, 0);
                let slack = table[mask as usize] as f64 - (y_inc + hs + ls);
                if better(mask, slack, best) {
                    best = Some((mask, slack));
                }
            }
        }
        Ok(best.map(|(mask, slack)| SlackSet {
            set: ElementSet::from_mask(n, mask),
            slack,
        }))
    }

    /// Checks the rank axioms: exhaustively for `n <= 16`, on `samples` random
    /// configurations otherwise.
    pub fn validate_axioms<R: Rng>(&self, samples: usize, rng: &mut R) -> AxiomReport {
        if self.n() <= 16 {
            return self.validate_axioms_exhaustive();
        }
        let n = self.n();
        let mut report = AxiomReport::default();
        for _ in 0..samples {
            let s = ElementSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.5)));
            let outside: Vec<usize> = (0..n).filter(|&e| !s.contains(e)).collect();
            if outside.len() < 2 {
                continue;
            }
            let i = outside[rng.gen_range(0..outside.len())];
            let j = outside[rng.gen_range(0..outside.len())];
            self.check_local(&s, i, j, |set| self.rank(set), &mut report);
            self.check_exchange_sample(&s, rng, &mut report);
            if report.violations.len() > 20 {
                break;
            }
        }
        report
    }

    fn validate_axioms_exhaustive(&self) -> AxiomReport {
        let n = self.n();
        let mut report = AxiomReport {
            exhaustive: true,
            ..Default::default()
        };
        let rank = |s: &ElementSet| self.rank_of_mask(s.to_mask().unwrap());
        if rank(&self.empty_set()) != 0 {
            report.violations.push("r(∅) != 0".into());
        }
        for mask in 0u64..(1 << n) {
            let s = ElementSet::from_mask(n, mask);
            report.checks += 1;
            if rank(&s) > s.len() {
                report.violations.push(format!("r(S) <= |S| violated at S = {s:?}"));
            }
            for i in (0..n).filter(|&i| mask >> i & 1 == 0) {
                for j in (i..n).filter(|&j| mask >> j & 1 == 0) {
                    self.check_local(&s, i, j, rank, &mut report);
                }
            }
            if report.violations.len() > 20 {
                break;
            }
        }
        report
    }

    /// Unit increase at `S + i` and diminishing returns for the pair `i, j`.
    fn check_local(
        &self,
        s: &ElementSet,
        i: usize,
        j: usize,
        rank: impl Fn(&ElementSet) -> usize,
        report: &mut AxiomReport,
    ) {
        report.checks += 1;
        let r = rank(s);
        let ri = rank(&s.with(i));
        if ri < r || ri > r + 1 {
            report
                .violations
                .push(format!("unit increase violated at S = {s:?}, i = {i}"));
        }
        if i != j {
            let rj = rank(&s.with(j));
            let rij = rank(&s.with(i).with(j));
            if ri + rj < rij + r {
                report
                    .violations
                    .push(format!("submodularity violated at S = {s:?}, i = {i}, j = {j}"));
            }
        }
    }

    fn check_exchange_sample<R: Rng>(&self, s: &ElementSet, rng: &mut R, report: &mut AxiomReport) {
        // Greedy bases of s and of a random superset-ordering give |I| < |J| pairs.
        let order: Vec<usize> = s.iter().collect();
        let mut i_set = self.empty_set();
        for &e in &order {
            if rng.gen_bool(0.5) && self.is_independent(&i_set.with(e)) {
                i_set.insert(e);
            }
        }
        let j_set = self.greedy_in_order(&order, false, &[]);
        if i_set.len() < j_set.len() {
            report.checks += 1;
            let ok = j_set
                .difference(&i_set)
                .iter()
                .any(|e| self.is_independent(&i_set.with(e)));
            if !ok {
                report
                    .violations
                    .push(format!("exchange axiom violated for I = {i_set:?}, J = {j_set:?}"));
            }
        }
    }
}

/// Indices sorted by decreasing weight, ties toward lower index.
pub fn order_by_weight(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    order
}

fn better(mask: u64, slack: f64, best: Option<(u64, f64)>) -> bool {
    match best {
        None => true,
        Some((bm, bs)) => {
            if slack < bs - TIE_EPS {
                true
            } else if slack > bs + TIE_EPS {
                false
            } else {
                let (c, bc) = (mask.count_ones(), bm.count_ones());
                c < bc || (c == bc && mask < bm)
            }
        }
    }
}

fn better_set(set: &ElementSet, slack: f64, best: &Option<SlackSet>) -> bool {
    match best {
        None => true,
        Some(b) => {
            if slack < b.slack - TIE_EPS {
                true
            } else if slack > b.slack + TIE_EPS {
                false
            } else {
                set.len() < b.set.len()
            }
        }
    }
}

fn sorted_free(y: &[f64], candidates: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = candidates.collect();
    v.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
    v
}

fn uniform_min_slack(k: usize, y: &[f64], include: &ElementSet, exclude: &ElementSet) -> Option<SlackSet> {
    let n = y.len();
    let free = sorted_free(y, (0..n).filter(|&i| !include.contains(i) && !exclude.contains(i)));
    let base = include.len();
    let y_inc = include.weight(y);
    let mut best: Option<(usize, f64)> = None;
    let mut prefix = 0.0;
    for t in 0..=free.len() {
        if t > 0 {
            prefix += y[free[t - 1]];
        }
        if base + t == 0 {
            continue;
        }
        let slack = (base + t).min(k) as f64 - y_inc - prefix;
        if best.is_none_or(|(_, b)| slack < b - TIE_EPS) {
            best = Some((t, slack));
        }
    }
    best.map(|(t, slack)| {
        let mut set = include.clone();
        for &e in &free[..t] {
            set.insert(e);
        }
        SlackSet { set, slack }
    })
}

fn partition_min_slack(
    blocks: &[Vec<usize>],
    caps: &[usize],
    y: &[f64],
    include: &ElementSet,
    exclude: &ElementSet,
) -> Option<SlackSet> {
    let n = y.len();
    // Per block: best member choice overall, and best nonempty choice.
    let mut chosen = include.clone();
    let mut total = 0.0;
    let mut best_nonempty: Option<(usize, Vec<usize>, f64, f64)> = None;
    let mut per_block_best = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        let forced: Vec<usize> = block.iter().copied().filter(|&e| include.contains(e)).collect();
        let free = sorted_free(
            y,
            block
                .iter()
                .copied()
                .filter(|&e| !include.contains(e) && !exclude.contains(e)),
        );
        let y_forced: f64 = forced.iter().map(|&e| y[e]).sum();
        let mut best: Option<(usize, f64)> = None;
        let mut best_ne: Option<(usize, f64)> = None;
        let mut prefix = 0.0;
        for t in 0..=free.len() {
            if t > 0 {
                prefix += y[free[t - 1]];
            }
            let slack = (forced.len() + t).min(caps[b]) as f64 - y_forced - prefix;
            if best.is_none_or(|(_, s)| slack < s - TIE_EPS) {
                best = Some((t, slack));
            }
            if forced.len() + t > 0 && best_ne.is_none_or(|(_, s)| slack < s - TIE_EPS) {
                best_ne = Some((t, slack));
            }
        }
        let (t, slack) = best.expect("t = 0 is always a candidate");
        for &e in &free[..t] {
            chosen.insert(e);
        }
        total += slack;
        per_block_best.push(slack);
        if let Some((t_ne, s_ne)) = best_ne {
            let members: Vec<usize> = forced.iter().chain(&free[..t_ne]).copied().collect();
            if best_nonempty
                .as_ref()
                .is_none_or(|(_, _, gain, _)| s_ne - slack < *gain - TIE_EPS)
            {
                best_nonempty = Some((b, members, s_ne - slack, s_ne));
            }
        }
    }
    if !chosen.is_empty() {
        return Some(SlackSet {
            set: chosen,
            slack: total,
        });
    }
    // Everything chose the empty option; force the cheapest nonempty block choice.
    let (b, members, _, s_ne) = best_nonempty?;
    let slack = total - per_block_best[b] + s_ne;
    Some(SlackSet {
        set: ElementSet::from_indices(n, members),
        slack,
    })
}

fn graphic_min_slack(
    vertices: usize,
    edges: &[(usize, usize)],
    y: &[f64],
    include: &ElementSet,
    exclude: &ElementSet,
) -> Option<SlackSet> {
    let n = edges.len();
    let mut best: Option<SlackSet> = None;
    let mut best_mask: Option<(u64, f64)> = None;
    for vmask in 1u32..(1u32 << vertices) {
        let mut set = ElementSet::empty(n);
        for (e, &(u, v)) in edges.iter().enumerate() {
            if vmask >> u & 1 == 1 && vmask >> v & 1 == 1 && !exclude.contains(e) {
                set.insert(e);
            }
        }
        if set.is_empty() || !include.is_subset(&set) {
            continue;
        }
        let mut uf = UnionFind::new(vertices);
        let rank = set.iter().filter(|&e| uf.union(edges[e].0, edges[e].1)).count();
        let slack = rank as f64 - set.weight(y);
        let take = match set.to_mask() {
            Some(m) => better(m, slack, best_mask),
            None => better_set(&set, slack, &best),
        };
        if take {
            best_mask = set.to_mask().map(|m| (m, slack));
            best = Some(SlackSet { set, slack });
        }
    }
    best
}

/// Number of connected pieces formed by the endpoints of the included edges.
fn include_components(vertices: usize, edges: &[(usize, usize)], include: &ElementSet) -> usize {
    let mut uf = UnionFind::new(vertices);
    let mut touched = vec![false; vertices];
    for e in include.iter() {
        let (u, v) = edges[e];
        uf.union(u, v);
        touched[u] = true;
        touched[v] = true;
    }
    let mut roots: Vec<usize> = (0..vertices).filter(|&u| touched[u]).map(|u| uf.find(u)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Exact search over vertex-disjoint blocks: the slack of a union of induced edge
/// sets on disjoint vertex sets is the sum of their slacks, so the optimum is a
/// partition of part of `V` with every included edge inside one block.
fn graphic_partition_min_slack(
    vertices: usize,
    edges: &[(usize, usize)],
    y: &[f64],
    include: &ElementSet,
    exclude: &ElementSet,
) -> Option<SlackSet> {
    let n = edges.len();
    let states = 1usize << vertices;
    let mut tied = vec![0usize; vertices];
    let mut forced = 0usize;
    for e in include.iter() {
        let (u, v) = edges[e];
        tied[u] |= 1 << v;
        tied[v] |= 1 << u;
        forced |= 1 << u | 1 << v;
    }

    // Slack, size and closure of each induced block.
    let mut slack = vec![0.0f64; states];
    let mut size = vec![0usize; states];
    let mut closed = vec![true; states];
    let mut reach = vec![0usize; states];
    for t in 1..states {
        let low = t.trailing_zeros() as usize;
        reach[t] = reach[t & (t - 1)] | tied[low];
        closed[t] = reach[t] & !t == 0;
        let mut uf = UnionFind::new(vertices);
        let mut rank = 0usize;
        let mut weight = 0.0;
        for (e, &(u, v)) in edges.iter().enumerate() {
            if t >> u & 1 == 1 && t >> v & 1 == 1 && !exclude.contains(e) {
                size[t] += 1;
                weight += y[e];
                if uf.union(u, v) {
                    rank += 1;
                }
            }
        }
        slack[t] = rank as f64 - weight;
    }

    // best[s] covers the vertex set `s`; choice 0 leaves the lowest vertex unused.
    let mut best: Vec<(f64, usize)> = vec![(0.0, 0); states];
    let mut choice = vec![0usize; states];
    let beats = |a: (f64, usize), b: (f64, usize)| a.0 < b.0 - TIE_EPS || (a.0 <= b.0 + TIE_EPS && a.1 < b.1);
    for s in 1..states {
        let low = s & s.wrapping_neg();
        let mut cur = if forced & low == 0 {
            best[s ^ low]
        } else {
            (f64::INFINITY, usize::MAX)
        };
        let rest = s ^ low;
        let mut sub = rest;
        loop {
            let t = sub | low;
            if closed[t] {
                let prev = best[s ^ t];
                let cand = (slack[t] + prev.0, size[t].saturating_add(prev.1));
                if beats(cand, cur) {
                    cur = cand;
                    choice[s] = t;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[s] = cur;
    }
    if !best[states - 1].0.is_finite() {
        return None;
    }

    let mut set = ElementSet::empty(n);
    let mut s = states - 1;
    while s != 0 {
        let low = s & s.wrapping_neg();
        let t = choice[s];
        if t == 0 {
            s ^= low;
            continue;
        }
        for (e, &(u, v)) in edges.iter().enumerate() {
            if t >> u & 1 == 1 && t >> v & 1 == 1 && !exclude.contains(e) {
                set.insert(e);
            }
        }
        s ^= t;
    }
    let slack = edge_slack(vertices, edges, y, &set);
    Some(SlackSet { set, slack })
}

fn edge_slack(vertices: usize, edges: &[(usize, usize)], y: &[f64], set: &ElementSet) -> f64 {
    let mut uf = UnionFind::new(vertices);
    let rank = set.iter().filter(|&e| uf.union(edges[e].0, edges[e].1)).count();
    rank as f64 - set.weight(y)
}

fn minor_min_slack(
    inner: &Matroid,
    deleted: &ElementSet,
    contracted: &ElementSet,
    contracted_rank: usize,
    y: &[f64],
    include: &ElementSet,
    exclude: &ElementSet,
) -> Result<Option<SlackSet>> {
    // Loops (deleted or contracted) contribute -y_e and nothing to the rank.
    let loops = deleted.union(contracted);
    let loops_taken = ElementSet::from_indices(
        y.len(),
        loops
            .iter()
            .filter(|&e| include.contains(e) || (!exclude.contains(e) && y[e] > 0.0)),
    );
    let y_loops = loops_taken.weight(y);

    // Contraction: r(S) = r_inner(S ∪ C) - r(C), with C carrying no weight.
    let mut y_inner = y.to_vec();
    for e in contracted.iter() {
        y_inner[e] = 0.0;
    }
    let inner_include = include.difference(&loops).union(contracted);
    let inner_exclude = exclude.union(deleted).difference(contracted);
    let core = inner.min_slack(&y_inner, &inner_include, &inner_exclude)?;

    let mut best: Option<SlackSet> = core.map(|s| SlackSet {
        set: s.set.difference(contracted).union(&loops_taken),
        slack: s.slack - contracted_rank as f64 - y_loops,
    });
    if let Some(b) = &best {
        if b.set.is_empty() && !contracted.is_empty() && !loops_taken.is_empty() {
            best = None;
        }
    }
    // Only loops, no live element.
    if !loops_taken.is_empty() && include.is_subset(&loops) {
        let cand = SlackSet {
            set: loops_taken.clone(),
            slack: -y_loops,
        };
        if better_set(&cand.set, cand.slack, &best) {
            best = Some(cand);
        }
    }
    Ok(best)
}

fn dummy_min_slack(
    inner: &Matroid,
    n: usize,
    y: &[f64],
    include: &ElementSet,
    exclude: &ElementSet,
) -> Result<Option<SlackSet>> {
    let base_n = inner.n();
    let d = inner.rank_full() as f64;
    let forced_dummies: Vec<usize> = include.iter().filter(|&i| i >= base_n).collect();
    let y_forced: f64 = forced_dummies.iter().map(|&i| y[i]).sum();
    let core_include = include.resized(base_n);
    let core_exclude = exclude.resized(base_n);
    let padded = |core: &ElementSet| {
        let mut s = core.resized(n);
        for &i in &forced_dummies {
            s.insert(i);
        }
        s
    };
    let mut best: Option<SlackSet> = None;

    // Branch where the truncation at d does not bind: r(S_N) + |S_D| - y(S).
    let core = inner.min_slack(&y[..base_n], &core_include, &core_exclude)?;
    if let Some(c) = core {
        let set = padded(&c.set);
        let slack = c.slack + forced_dummies.len() as f64 - y_forced;
        best = Some(SlackSet { set, slack });
    }
    if core_include.is_empty() {
        // No live element: only dummies, each costing 1 - y_s.
        let mut set = padded(&ElementSet::empty(base_n));
        let mut slack = forced_dummies.len() as f64 - y_forced;
        if set.is_empty() {
            let top = (base_n..n)
                .filter(|&s| !exclude.contains(s))
                .max_by(|&a, &b| y[a].total_cmp(&y[b]).then(b.cmp(&a)));
            if let Some(s) = top {
                set.insert(s);
                slack = 1.0 - y[s];
            }
        }
        if !set.is_empty() && better_set(&set, slack, &best) {
            best = Some(SlackSet { set, slack });
        }
    }

    // Branch where the truncation binds: d - y(S), best with every positive element.
    let all = ElementSet::from_indices(
        n,
        (0..n).filter(|&i| include.contains(i) || (!exclude.contains(i) && y[i] > 0.0)),
    );
    if !all.is_empty() {
        let slack = d - all.weight(y);
        if better_set(&all, slack, &best) {
            best = Some(SlackSet { set: all, slack });
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(n: usize, v: &[usize]) -> ElementSet {
        ElementSet::from_indices(n, v.iter().copied())
    }

    fn k3() -> Matroid {
        Matroid::complete_graph(3).unwrap()
    }

    #[test]
    fn independence_examples() {
        let u = Matroid::uniform(4, 2).unwrap();
        assert!(u.is_independent(&set(4, &[0, 1])));
        assert!(!k3().is_independent(&set(3, &[0, 1, 2])));
        let p = Matroid::partition(vec![vec![0, 1], vec![2]], vec![1, 1]).unwrap();
        assert!(!p.is_independent(&set(3, &[0, 1])));
        assert!(p.is_independent(&set(3, &[0, 2])));
    }

    #[test]
    fn rank_examples() {
        let u = Matroid::uniform(4, 2).unwrap();
        assert_eq!(u.rank(&set(4, &[0, 1, 2])), 2);
        assert_eq!(k3().rank(&set(3, &[0, 1, 2])), 2);
        assert_eq!(u.rank(&u.empty_set()), 0);
        assert_eq!(k3().rank(&k3().empty_set()), 0);
    }

    #[test]
    fn greedy_examples() {
        // K3 edges are (0,1), (0,2), (1,2).
        assert_eq!(k3().greedy_max_weight_base(&[3.0, 2.0, 1.0]).to_vec(), vec![0, 1]);
        let u = Matroid::uniform(4, 2).unwrap();
        assert_eq!(u.greedy_max_weight_base(&[0.0; 4]).to_vec(), vec![0, 1]);
        let u12 = Matroid::uniform(2, 1).unwrap();
        assert_eq!(u12.greedy_max_weight_base(&[1.0, 2.0]).to_vec(), vec![1]);
    }

    #[test]
    fn exchange_examples() {
        let m = k3();
        assert_eq!(m.find_exchange(&set(3, &[0, 1]), &set(3, &[0, 2]), 1).unwrap(), 2);
        let u = Matroid::uniform(4, 2).unwrap();
        assert_eq!(u.find_exchange(&set(4, &[0, 1]), &set(4, &[2, 3]), 0).unwrap(), 2);
        assert!(u.find_exchange(&set(4, &[0, 1]), &set(4, &[0, 1]), 0).is_err());
    }

    #[test]
    fn axiom_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(Matroid::uniform(4, 2).unwrap().validate_axioms(0, &mut rng).passed());
        assert!(k3().validate_axioms(0, &mut rng).passed());
        // r({0,1}) = 3 on a two-element ground set.
        let bad = Matroid::from_rank_table_unchecked(2, vec![0, 1, 1, 3]).unwrap();
        let report = bad.validate_axioms(0, &mut rng);
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| v.contains("r(S) <= |S|")));
        assert!(Matroid::from_rank_table(2, vec![0, 1, 1, 3]).is_err());
    }

    #[test]
    fn explicit_list_matches_uniform() {
        let sets: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]];
        let m = Matroid::from_independent_sets(3, &sets).unwrap();
        let u = Matroid::uniform(3, 2).unwrap();
        assert_eq!(m.rank_table(), u.rank_table());
        // missing subsets are rejected
        assert!(Matroid::from_independent_sets(3, &[vec![0, 1]]).is_err());
    }

    #[test]
    fn invalid_constructions() {
        assert!(Matroid::uniform(3, 0).is_err());
        assert!(Matroid::uniform(3, 4).is_err());
        assert!(Matroid::partition(vec![vec![0, 0]], vec![1]).is_err());
        assert!(Matroid::graphic(2, vec![(0, 2)]).is_err());
        assert!(Matroid::graphic(1, vec![(0, 0)]).is_err());
    }

    #[test]
    fn minors() {
        let u = Matroid::uniform(4, 2).unwrap();
        let c = u.contract(&set(4, &[0])).unwrap();
        assert_eq!(c.rank_full(), 1);
        assert!(!c.is_independent(&set(4, &[0])));
        assert!(c.is_independent(&set(4, &[1])));
        assert!(!c.is_independent(&set(4, &[1, 2])));
        let d = c.delete(&set(4, &[3]));
        assert_eq!(d.rank(&set(4, &[3])), 0);
        assert_eq!(d.rank_full(), 1);
        assert_eq!(d.loops().to_vec(), vec![0, 3]);
    }

    #[test]
    fn dummy_extension() {
        let m = Matroid::uniform(2, 1).unwrap();
        let ext = m.with_dummies();
        assert_eq!(ext.n(), 3);
        assert_eq!(ext.rank_full(), 1);
        assert!(ext.is_base(&set(3, &[2])));
        assert!(!ext.is_independent(&set(3, &[0, 2])));
    }

    fn fixtures() -> Vec<Matroid> {
        vec![
            Matroid::uniform(5, 2).unwrap(),
            Matroid::partition(vec![vec![0, 3], vec![1, 2, 4], vec![5]], vec![1, 2, 1]).unwrap(),
            Matroid::graphic(4, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 0), (1, 1)]).unwrap(),
            Matroid::complete_graph(4).unwrap(),
            Matroid::uniform(6, 3).unwrap().contract(&set(6, &[1])).unwrap(),
            Matroid::complete_graph(4)
                .unwrap()
                .delete(&set(6, &[2]))
                .contract(&set(6, &[0]))
                .unwrap(),
            Matroid::partition(vec![vec![0, 1], vec![2, 3]], vec![1, 1])
                .unwrap()
                .with_dummies(),
        ]
    }

    #[test]
    fn min_slack_fast_paths_agree_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for m in fixtures() {
            let n = m.n();
            for trial in 0..200 {
                // Points in [0,1]^n, some deliberately outside P(M).
                let scale = if trial % 2 == 0 { 0.6 } else { 1.0 };
                let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * scale).collect();
                let include = if trial % 3 == 0 {
                    set(n, &[trial % n])
                } else {
                    m.empty_set()
                };
                let exclude = if trial % 5 == 0 && !include.contains((trial + 1) % n) {
                    set(n, &[(trial + 1) % n])
                } else {
                    m.empty_set()
                };
                let fast = m.min_slack(&y, &include, &exclude).unwrap();
                let brute = m.min_slack_brute(&y, &include, &exclude).unwrap();
                let (f, b) = (fast.unwrap(), brute.unwrap());
                let empty = m.empty_set();
                let global = m.min_slack_brute(&y, &empty, &empty).unwrap().unwrap();
                let in_polytope = global.slack >= -1e-12;
                if m.kind_name() != "graphic" || in_polytope {
                    assert!(
                        (f.slack - b.slack).abs() < 1e-9 || (f.set.is_empty() && b.slack > -1e-12),
                        "{}: fast {f:?} brute {b:?} y={y:?}",
                        m.kind_name()
                    );
                }
                // the returned set must carry the slack it claims
                if !f.set.is_empty() {
                    let actual = m.rank(&f.set) as f64 - f.set.weight(&y);
                    assert!((actual - f.slack).abs() < 1e-9);
                    assert!(include.is_subset(&f.set) && f.set.is_disjoint(&exclude));
                }
                // detection of violations is exact for every kind
                if include.is_empty() || in_polytope {
                    assert_eq!(f.slack < -1e-9, b.slack < -1e-9, "{}", m.kind_name());
                }
            }
        }
    }

    #[test]
    fn disconnected_includes_are_exact_on_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let graphs = [
            Matroid::graphic(
                6,
                vec![
                    (2, 5),
                    (4, 5),
                    (0, 3),
                    (2, 5),
                    (1, 4),
                    (2, 5),
                    (2, 3),
                    (1, 4),
                    (0, 1),
                    (1, 5),
                ],
            )
            .unwrap(),
            Matroid::graphic(5, vec![(0, 1), (2, 3), (1, 2), (3, 4), (0, 4), (2, 2), (1, 3)]).unwrap(),
        ];
        for m in graphs {
            let n = m.n();
            for _ in 0..300 {
                let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 0.7).collect();
                let include = ElementSet::from_indices(n, (0..n).filter(|_| rng.gen::<f64>() < 0.3));
                let exclude =
                    ElementSet::from_indices(n, (0..n).filter(|&e| !include.contains(e) && rng.gen::<f64>() < 0.15));
                let (vertices, edges) = m.graph().unwrap();
                if include_components(vertices, edges, &include) < 2 {
                    continue;
                }
                let fast = m.min_slack(&y, &include, &exclude).unwrap();
                let brute = m.min_slack_brute(&y, &include, &exclude).unwrap();
                match (fast, brute) {
                    (Some(f), Some(b)) => {
                        assert!((f.slack - b.slack).abs() < 1e-9, "fast {f:?} brute {b:?}");
                        assert!(include.is_subset(&f.set) && f.set.is_disjoint(&exclude));
                        let actual = m.rank(&f.set) as f64 - f.set.weight(&y);
                        assert!((actual - f.slack).abs() < 1e-9);
                    }
                    (None, None) => {}
                    other => panic!("{other:?}"),
                }
            }
        }
    }
}
