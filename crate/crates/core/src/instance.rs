//! JSON instances: a matroid together with the data a command needs.
//!
//! ```json
//! {
//!   "format": 1,
//!   "matroid": {"type": "graphic", "vertices": 3, "edges": [[0,1],[0,2],[1,2]]},
//!   "point": [0.6667, 0.6667, 0.6667],
//!   "mode": "base"
//! }
//! ```
//!
//! Optional fields: `name`, `point`, `mode` (`base` or `matroid`, the polytope the
//! point is claimed to lie in), `combination`, `functions`, `packing`, `targets`,
//! `weights`, `deltas`, `subsets` and `cuts`. Validation is eager: a parsed
//! instance is internally consistent.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{Matroid, MatroidSpec};
use crate::polytope::{membership_violation, ConvexCombination, Mode, TOL};
use crate::solvers::{PackingSystem, TargetVector};
use crate::submodular::{Submodular, SubmodularSpec};

pub const FORMAT: u32 = 1;

/// The wire form of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub matroid: MatroidSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combination: Option<ConvexCombination>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<SubmodularSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packing: Option<PackingSystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    /// Linear weights `a ∈ [0,1]^n` for tail checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    /// Subsets for correlation checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsets: Option<Vec<Vec<usize>>>,
    /// Element sets whose crossing counts form congestion rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<Vec<usize>>>,
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub file: InstanceFile,
    pub matroid: Matroid,
    pub functions: Vec<Arc<Submodular>>,
    /// The point, synthesized from the combination when only that was given.
    pub point: Option<Vec<f64>>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.file == other.file
    }
}

fn schema(field: &str, reason: impl Into<String>) -> Error {
    Error::Schema {
        field: field.into(),
        reason: reason.into(),
    }
}

impl Instance {
    pub fn from_file(file: InstanceFile) -> Result<Self> {
        let mut file = file;
        if file.format != FORMAT {
            return Err(schema(
                "format",
                format!("unsupported format {}, expected {FORMAT}", file.format),
            ));
        }
        let matroid = Matroid::from_spec(&file.matroid)?;
        let n = matroid.n();

        if let Some(c) = &file.combination {
            let c = c.resized(n)?;
            let mode = file.mode.unwrap_or_else(|| {
                let d = matroid.rank_full();
                if c.terms.iter().all(|t| t.set.len() == d) {
                    Mode::B
                } else {
                    Mode::P
                }
            });
            c.validate(&matroid, mode)
                .map_err(|e| Error::Inconsistent(format!("combination: {e}")))?;
            file.combination = Some(c);
        }
        let point = match (&file.point, &file.combination) {
            (Some(p), c) => {
                if p.len() != n {
                    return Err(schema(
                        "point",
                        format!("length {} does not match ground set size {n}", p.len()),
                    ));
                }
                if let Some(c) = c {
                    let r = c.recompose(n);
                    let err = r.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if err > TOL {
                        return Err(Error::Inconsistent(format!(
                            "combination recomposes to a point {err} away from the given point"
                        )));
                    }
                }
                Some(p.clone())
            }
            (None, Some(c)) => Some(c.recompose(n)),
            (None, None) => None,
        };
        if let (Some(p), Some(mode)) = (&point, file.mode) {
            if let Some(reason) = membership_violation(&matroid, p, mode)? {
                return Err(Error::Inconsistent(format!(
                    "point is not in the {} polytope: {reason}",
                    mode.name()
                )));
            }
        }
        if let Some(p) = &point {
            if let Some(v) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(schema("point", format!("coordinate {v} outside [0,1]")));
            }
        }

        let functions = file
            .functions
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let f = Submodular::from_spec(spec)?;
                if f.n() != n {
                    return Err(Error::Inconsistent(format!(
                        "function {i} is over {} elements but the matroid has {n}",
                        f.n()
                    )));
                }
                Ok(Arc::new(f))
            })
            .collect::<Result<Vec<_>>>()?;

        if let Some(p) = &file.packing {
            p.validate(n)?;
        }
        if let Some(t) = &file.targets {
            TargetVector::new(t.clone())?;
            if t.len() != functions.len() {
                return Err(Error::Inconsistent(format!(
                    "{} targets for {} functions",
                    t.len(),
                    functions.len()
                )));
            }
        }
        if let Some(w) = &file.weights {
            if w.len() != n {
                return Err(schema(
                    "weights",
                    format!("length {} does not match ground set size {n}", w.len()),
                ));
            }
            if let Some(v) = w.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(schema("weights", format!("weight {v} outside [0,1]")));
            }
        }
        if let Some(d) = &file.deltas {
            if let Some(v) = d.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(schema("deltas", format!("{v} is not a nonnegative number")));
            }
        }
        for (field, family) in [("subsets", &file.subsets), ("cuts", &file.cuts)] {
            for s in family.iter().flatten() {
                if let Some(&i) = s.iter().find(|&&i| i >= n) {
                    return Err(schema(
                        field,
                        format!("element {i} out of range for ground set of size {n}"),
                    ));
                }
                if s.is_empty() {
                    return Err(schema(field, "sets must be nonempty"));
                }
            }
        }
        Ok(Self {
            file,
            matroid,
            functions,
            point,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| schema("<document>", e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("instances serialize")
    }

    pub fn n(&self) -> usize {
        self.matroid.n()
    }

    /// The point, or a schema error naming the missing field.
    pub fn require_point(&self) -> Result<&[f64]> {
        self.point
            .as_deref()
            .ok_or_else(|| schema("point", "this command needs a point or a combination"))
    }

    pub fn require_packing(&self) -> Result<&PackingSystem> {
        self.file
            .packing
            .as_ref()
            .ok_or_else(|| schema("packing", "this command needs a packing system"))
    }

    /// Congestion rows: the packing matrix, or cut indicators when only cuts are given.
    pub fn congestion_matrix(&self) -> Result<Vec<Vec<f64>>> {
        if let Some(p) = &self.file.packing {
            return Ok(p.matrix.clone());
        }
        let cuts = self
            .file
            .cuts
            .as_ref()
            .ok_or_else(|| schema("packing", "this command needs a packing matrix or cuts"))?;
        let n = self.n();
        Ok(cuts
            .iter()
            .map(|c| {
                let mut row = vec![0.0; n];
                for &e in c {
                    row[e] = 1.0;
                }
                row
            })
            .collect())
    }

    /// The polytope the point lies in: the declared mode, else `B` when the point
    /// is in the base polytope.
    pub fn point_mode(&self) -> Result<Mode> {
        if let Some(m) = self.file.mode {
            return Ok(m);
        }
        let p = self.require_point()?;
        Ok(if membership_violation(&self.matroid, p, Mode::B)?.is_none() {
            Mode::B
        } else {
            Mode::P
        })
    }
}

/// Reads and validates an instance file.
pub fn parse_instance(path: &Path) -> Result<Instance> {
    let text =
        std::fs::read_to_string(path).map_err(|e| schema("<file>", format!("cannot read {}: {e}", path.display())))?;
    Instance::from_json(&text)
}
