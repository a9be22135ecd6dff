//! Virtual-dimension arithmetic for warped-product specs with an
//! obstruction bundle, finite topological spaces, the 0-manifold
//! predicate, and the assembly of discrete branes from point-like specs.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PndpError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("spec {id} is not point-like: virtual dimension {dim_m}")]
    NonPointlike { id: String, dim_m: i64 },
}

/// A product-base spec with a fibered Kuranishi-style datum: the fiber's
/// virtual dimension is its base dimension minus the obstruction rank,
/// and may be negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PndpSpec {
    pub id: String,
    pub dim_b1: u32,
    pub dim_b2: u32,
    /// Dimension of the fiber's product base.
    pub fiber_dims: u32,
    /// Rank of the obstruction bundle.
    pub rank_e: u32,
}

impl PndpSpec {
    pub fn new(id: &str, dim_b1: u32, dim_b2: u32, fiber_dims: u32, rank_e: u32) -> Self {
        PndpSpec {
            id: id.to_string(),
            dim_b1,
            dim_b2,
            fiber_dims,
            rank_e,
        }
    }

    pub fn dim_base(&self) -> i64 {
        i64::from(self.dim_b1) + i64::from(self.dim_b2)
    }
}

///`(dim F, dim M)`: the fiber's virtual dimension and the total virtual
/// dimension, both possibly negative.
pub fn virtual_dimension(s: &PndpSpec) -> (i64, i64) {
    let dim_f = i64::from(s.fiber_dims) - i64::from(s.rank_e);
    (dim_f, s.dim_base() + dim_f)
}

/// A finite topological space: named points and the declared open sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTopSpace {
    pub points: Vec<String>,
    pub opens: Vec<BTreeSet<usize>>,
}

impl FiniteTopSpace {
    pub fn new(points: Vec<String>, mut opens: Vec<BTreeSet<usize>>) -> Self {
        opens.sort();
        opens.dedup();
        FiniteTopSpace { points, opens }
    }

    /// The discrete topology: every subset open.
    pub fn discrete(points: Vec<String>) -> Self {
        let n = points.len();
        assert!(n <= 16, "power set too large");
        let opens = (0u32..(1 << n))
            .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
        FiniteTopSpace::new(points, opens)
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    /// Topology axioms: empty set and whole set present, closed under
    /// pairwise unions and intersections.
    pub fn validate(&self) -> Result<(), PndpError> {
        let n = self.points.len();
        for o in &self.opens {
            if o.iter().any(|&p| p >= n) {
                return Err(PndpError::Structural(
                    "open set references a missing point".into(),
                ));
            }
        }
        let whole: BTreeSet<usize> = (0..n).collect();
        if !self.opens.contains(&BTreeSet::new()) {
            return Err(PndpError::Structural("empty set is not open".into()));
        }
        if !self.opens.contains(&whole) {
            return Err(PndpError::Structural("whole set is not open".into()));
        }
        for a in &self.opens {
            for b in &self.opens {
                let union: BTreeSet<usize> = a.union(b).copied().collect();
                if !self.opens.contains(&union) {
                    return Err(PndpError::Structural(format!(
                        "union of {a:?} and {b:?} is not open"
                    )));
                }
                let inter: BTreeSet<usize> = a.intersection(b).copied().collect();
                if !self.opens.contains(&inter) {
                    return Err(PndpError::Structural(format!(
                        "intersection of {a:?} and {b:?} is not open"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn singleton_open(&self, p: usize) -> bool {
        let singleton: BTreeSet<usize> = [p].into_iter().collect();
        self.opens.contains(&singleton)
    }
}

/// Is every singleton open?
pub fn is_discrete_space(t: &FiniteTopSpace) -> Result<bool, PndpError> {
    t.validate()?;
    Ok((0..t.point_count()).all(|p| t.singleton_open(p)))
}

/// Per-point witness for the 0-manifold predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointWitness {
    pub point: String,
    /// Does the point have an open neighborhood homeomorphic to the
    /// one-point space, i.e. an open singleton?
    pub has_chart: bool,
    pub witness: String,
}

/// Agreement report between "every point has a chart to the one-point
/// space" and "the topology is discrete".
#[derive(Clone, Debug)]
pub struct ZeroManifoldReport {
    pub per_point: Vec<PointWitness>,
    pub is_zero_manifold: bool,
    pub is_discrete: bool,
    pub agree: bool,
}

/// Check the two equivalent predicates point by point. The only open
/// subsets of the one-point space are trivial, so a chart at `p` is
/// exactly an open `{p}`.
pub fn zero_manifold_equiv(t: &FiniteTopSpace) -> Result<ZeroManifoldReport, PndpError> {
    t.validate()?;
    let mut per_point = Vec::new();
    for p in 0..t.point_count() {
        let has_chart = t.singleton_open(p);
        let witness = if has_chart {
            format!("{{{}}} is an open chart", t.points[p])
        } else {
            format!("every open set containing {} has another point", t.points[p])
        };
        per_point.push(PointWitness {
            point: t.points[p].clone(),
            has_chart,
            witness,
        });
    }
    let is_zero_manifold = per_point.iter().all(|w| w.has_chart);
    let is_discrete = is_discrete_space(t)?;
    Ok(ZeroManifoldReport {
        per_point,
        is_zero_manifold,
        is_discrete,
        agree: is_zero_manifold == is_discrete,
    })
}

/// Assemble a discrete brane from point-like specs: one point per spec,
/// discrete topology. Errors on the first spec whose virtual dimension
/// is nonzero.
pub fn emerge_brane_points(specs: &[PndpSpec]) -> Result<FiniteTopSpace, PndpError> {
    if specs.len() > 16 {
        return Err(PndpError::Structural(
            "more than 16 points would not fit a materialized power set".into(),
        ));
    }
    for s in specs {
        let (_, dim_m) = virtual_dimension(s);
        if dim_m != 0 {
            return Err(PndpError::NonPointlike {
                id: s.id.clone(),
                dim_m,
            });
        }
    }
    Ok(FiniteTopSpace::discrete(
        specs.iter().map(|s| s.id.clone()).collect(),
    ))
}

/// Every topology on `n ≤ 4` labelled points, by exhaustive enumeration
/// of set families (subsets are bitmasks).
pub fn all_topologies(n: usize) -> Vec<FiniteTopSpace> {
    assert!(n <= 4, "family enumeration is exponential in 2^n");
    let subsets = 1u32 << n;
    let whole = subsets - 1;
    let mut out = Vec::new();
    for family in 0u64..(1 << subsets) {
        if family & 1 == 0 || family & (1 << whole) == 0 {
            continue; // empty set / whole set missing
        }
        let members: Vec<u32> = (0..subsets).filter(|&s| family & (1 << s) != 0).collect();
        let closed = members.iter().all(|&a| {
            members
                .iter()
                .all(|&b| family & (1 << (a | b)) != 0 && family & (1 << (a & b)) != 0)
        });
        if !closed {
            continue;
        }
        let points = (0..n).map(|i| format!("p{i}")).collect();
        let opens = members
            .iter()
            .map(|&mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
        out.push(FiniteTopSpace::new(points, opens));
    }
    out
}
