//! Brane configurations over a simplicial host: gauge-group
//! classification from the intersection relation, the loop-space
//! endpoint predicate for strings, twist classes in simplicial H^3,
//! twist-preserving region maps, staircase assembly, and the
//! U(1) -> U(N) -> PU(N) rank bookkeeping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cat::{self, Diagram, FinCategory, MorId, ObjId};
use crate::complex::{
    cochain_from_simplicial, cohomology_class, Cochain, CohomologyClass, ComplexError,
    SimplicialComplex,
};
use crate::matrix::{self, RingTag};

#[derive(Debug, Error)]
pub enum BraneError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("map is not simplicial: {0}")]
    NotSimplicial(String),
    #[error("staircase assembly: missing {0}")]
    Assembly(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Cat(#[from] cat::CatError),
}

/// One brane: a stack of `stack ≥ 1` coincident branes occupying a
/// subcomplex of the host.
#[derive(Clone, Debug)]
pub struct Brane {
    pub id: String,
    pub stack: usize,
    pub region: SimplicialComplex,
}

/// A configuration of branes in a common host complex. Two branes
/// intersect iff their regions share a simplex.
#[derive(Clone, Debug)]
pub struct BraneConfig {
    pub host: SimplicialComplex,
    pub branes: Vec<Brane>,
}

impl BraneConfig {
    pub fn new(host: SimplicialComplex, branes: Vec<Brane>) -> Result<Self, BraneError> {
        let mut seen = BTreeSet::new();
        for b in &branes {
            if b.stack == 0 {
                return Err(BraneError::Structural(format!(
                    "brane {} has an empty stack",
                    b.id
                )));
            }
            if !seen.insert(b.id.clone()) {
                return Err(BraneError::Structural(format!("duplicate brane id {}", b.id)));
            }
            if !host.has_subcomplex(&b.region) {
                return Err(BraneError::Structural(format!(
                    "region of brane {} is not a subcomplex of the host",
                    b.id
                )));
            }
        }
        Ok(BraneConfig { host, branes })
    }

    pub fn brane_index(&self, id: &str) -> Option<usize> {
        self.branes.iter().position(|b| b.id == id)
    }

    pub fn intersects(&self, a: usize, b: usize) -> bool {
        SimplicialComplex::regions_intersect(&self.branes[a].region, &self.branes[b].region)
    }

    /// Total stack count N; gauge groups are subgroups of U(N).
    pub fn total_stack(&self) -> usize {
        self.branes.iter().map(|b| b.stack).sum()
    }
}

/// A product of unitary factors, canonically ordered by descending rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeGroupExpr {
    factors: Vec<usize>,
}

impl GaugeGroupExpr {
    pub fn new(mut factors: Vec<usize>) -> Self {
        factors.sort_unstable_by(|a, b| b.cmp(a));
        GaugeGroupExpr { factors }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn total_rank(&self) -> usize {
        self.factors.iter().sum()
    }
}

impl fmt::Display for GaugeGroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|n| format!("U({n})")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Partition the branes into connected components of the intersection
/// relation; each component contributes one unitary factor of rank equal
/// to the total stack size in the component.
pub fn gauge_group(cfg: &BraneConfig) -> GaugeGroupExpr {
    let n = cfg.branes.len();
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(comp: &mut Vec<usize>, i: usize) -> usize {
        if comp[i] != i {
            let r = find(comp, comp[i]);
            comp[i] = r;
        }
        comp[i]
    }
    for a in 0..n {
        for b in a + 1..n {
            if cfg.intersects(a, b) {
                let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
                if ra != rb {
                    comp[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut comp, i);
        *sizes.entry(r).or_default() += cfg.branes[i].stack;
    }
    GaugeGroupExpr::new(sizes.into_values().collect())
}

/// An open string, recorded by its endpoint branes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StringConfig {
    pub start: String,
    pub end: String,
}

/// The loop of a string is nontrivial iff it begins and ends on the same
/// brane, or its endpoint branes intersect.
pub fn loop_nontrivial(s: &StringConfig, cfg: &BraneConfig) -> Result<bool, BraneError> {
    let a = cfg
        .brane_index(&s.start)
        .ok_or_else(|| BraneError::Structural(format!("dangling endpoint {}", s.start)))?;
    let b = cfg
        .brane_index(&s.end)
        .ok_or_else(|| BraneError::Structural(format!("dangling endpoint {}", s.end)))?;
    Ok(a == b || cfg.intersects(a, b))
}

/// An integer 3-cochain on a host complex, meant to be a cocycle.
#[derive(Clone, Debug)]
pub struct TwistAssignment {
    pub host: SimplicialComplex,
    pub cochain: Cochain,
}

impl TwistAssignment {
    pub fn new(host: SimplicialComplex, values: Vec<i128>) -> Result<Self, BraneError> {
        if values.len() != host.count(3) {
            return Err(BraneError::Structural(format!(
                "twist carries {} values but the host has {} 3-simplices",
                values.len(),
                host.count(3)
            )));
        }
        Ok(TwistAssignment {
            host,
            cochain: Cochain { degree: 3, values },
        })
    }
}

/// The class of a twist cocycle in the normalized presentation of
/// `H^3(X, Z)`. Errors when the cochain is not a cocycle.
pub fn twist_class(t: &TwistAssignment) -> Result<CohomologyClass, BraneError> {
    let complex = cochain_from_simplicial(&t.host, RingTag::Int)?;
    Ok(cohomology_class(&complex, &t.cochain)?)
}

/// Pull a cochain back along a simplicial vertex map `src -> tgt`:
/// degenerate images contribute zero, others the value of the image
/// simplex with the sign of the sorting permutation.
pub fn pullback_cochain(
    map: &BTreeMap<usize, usize>,
    src: &SimplicialComplex,
    tgt: &SimplicialComplex,
    t: &Cochain,
) -> Result<Cochain, BraneError> {
    let degree = t.degree;
    for v in src.simplices(0) {
        if !map.contains_key(&v[0]) {
            return Err(BraneError::NotSimplicial(format!(
                "vertex {} has no image",
                v[0]
            )));
        }
    }
    // simplicial: the image vertex set of every simplex is a simplex
    for d in 0..=src.dim() {
        for s in src.simplices(d) {
            let mut img: Vec<usize> = s.iter().map(|v| map[v]).collect();
            img.sort_unstable();
            img.dedup();
            if !tgt.contains(&img) {
                return Err(BraneError::NotSimplicial(format!(
                    "image of {s:?} is not a simplex of the target"
                )));
            }
        }
    }
    let mut values = vec![0i128; src.count(degree)];
    for (i, s) in src.simplices(degree).iter().enumerate() {
        let img: Vec<usize> = s.iter().map(|v| map[v]).collect();
        let mut sorted = img.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue; // degenerate image
        }
        // parity of the permutation sorting the image tuple
        let mut perm: Vec<usize> = (0..img.len()).collect();
        perm.sort_by_key(|&i| img[i]);
        let mut sign = 1i128;
        let mut seen = vec![false; perm.len()];
        for start in 0..perm.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut at = start;
            while !seen[at] {
                seen[at] = true;
                at = perm[at];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        let ti = tgt
            .index_of(&sorted)
            .expect("image simplex checked present");
        values[i] = sign * t.values[ti];
    }
    Ok(Cochain { degree, values })
}

/// Does the region map preserve the twist: is the pullback of `t2` along
/// `map` cohomologous to `t1` on its host?
pub fn morphism_preserves_twist(
    map: &BTreeMap<usize, usize>,
    t1: &TwistAssignment,
    t2: &TwistAssignment,
) -> Result<bool, BraneError> {
    let pulled = pullback_cochain(map, &t1.host, &t2.host, &t2.cochain)?;
    let complex = cochain_from_simplicial(&t1.host, RingTag::Int)?;
    let diff: Vec<i128> = pulled
        .values
        .iter()
        .zip(&t1.cochain.values)
        .map(|(a, b)| a - b)
        .collect();
    let d_in = complex.differential_into(3);
    Ok(matrix::solve(RingTag::Int, &d_in, &diff).is_some())
}

/// User-supplied generators for a staircase of brane/string morphisms:
/// an object for every grid position, a horizontal arrow
/// `(i,j) -> (i,j+1)` and a vertical arrow `(i,j) -> (i+1,j)` wherever
/// the grid has one.
#[derive(Clone, Debug, Default)]
pub struct StaircaseGenerators {
    pub objects: BTreeMap<(usize, usize), ObjId>,
    pub horizontal: BTreeMap<(usize, usize), MorId>,
    pub vertical: BTreeMap<(usize, usize), MorId>,
}

#[derive(Clone, Debug)]
pub struct BraneStaircase {
    pub diagram: Diagram,
    pub commutativity: cat::CommutativityReport,
}

/// Assemble the `n`-level staircase diagram from the generators and
/// verify it commutes in the host category.
pub fn brane_staircase(
    host: &FinCategory,
    gens: &StaircaseGenerators,
    n: usize,
) -> Result<BraneStaircase, BraneError> {
    if n == 0 {
        let diagram = Diagram::new(Vec::new(), Vec::new());
        let commutativity = cat::check_commutes(host, &diagram)?;
        return Ok(BraneStaircase {
            diagram,
            commutativity,
        });
    }
    let mut positions = Vec::new();
    for i in 0..=n {
        for j in i..=n {
            positions.push((i, j));
        }
    }
    let mut nodes = Vec::new();
    let node_of: BTreeMap<(usize, usize), usize> = positions
        .iter()
        .enumerate()
        .map(|(k, &p)| (p, k))
        .collect();
    for &p in &positions {
        let o = gens
            .objects
            .get(&p)
            .ok_or_else(|| BraneError::Assembly(format!("object at position {p:?}")))?;
        nodes.push(*o);
    }
    let mut edges = Vec::new();
    for &(i, j) in &positions {
        if j < n {
            let m = gens
                .horizontal
                .get(&(i, j))
                .ok_or_else(|| BraneError::Assembly(format!("horizontal arrow at ({i},{j})")))?;
            edges.push((node_of[&(i, j)], node_of[&(i, j + 1)], *m));
        }
        if i < j {
            let m = gens
                .vertical
                .get(&(i, j))
                .ok_or_else(|| BraneError::Assembly(format!("vertical arrow at ({i},{j})")))?;
            edges.push((node_of[&(i, j)], node_of[&(i + 1, j)], *m));
        }
    }
    let diagram = Diagram::new(nodes, edges);
    let commutativity = cat::check_commutes(host, &diagram)?;
    Ok(BraneStaircase {
        diagram,
        commutativity,
    })
}

/// Dimension bookkeeping of the extension `U(1) -> U(N) -> PU(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensionRankReport {
    pub n: usize,
    pub dim_u1: usize,
    pub dim_un: usize,
    pub dim_pun: usize,
    pub additive: bool,
}

pub fn extension_rank_check(n: usize) -> Result<ExtensionRankReport, BraneError> {
    if n == 0 {
        return Err(BraneError::Structural("rank must be positive".into()));
    }
    let dim_un = n * n;
    let dim_pun = n * n - 1;
    Ok(ExtensionRankReport {
        n,
        dim_u1: 1,
        dim_un,
        dim_pun,
        additive: dim_un == 1 + dim_pun,
    })
}
