//! Simplicial complexes and their discrete de Rham-style machinery:
//! cochain complexes with integer-matrix differentials, cohomology in
//! invariant-factor form, the potential/gauge solver, barycentric
//! refinement, quotient complexes, and the discretization preservation
//! check.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cat::{FinCategory, Functor};
use crate::exact::ExactStructure;
use crate::kth::{
    grothendieck_presentation, groups_isomorphic, smith_normal_form, AbelianGroupPresentation,
    GroupNormalForm,
};
use crate::matrix::{self, Mat, RingTag};
use crate::report::ValidationReport;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("complex is not face-closed: missing {0}")]
    NotFaceClosed(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("degree-0 cochains have no potential field")]
    NoPotentialDegree,
    #[error("quotient is not simplicial: {0}")]
    QuotientNotSimplicial(String),
    #[error("cochain is not a cocycle: {0}")]
    NotCocycle(String),
    #[error(transparent)]
    Kth(#[from] crate::kth::KthError),
}

// ---------------------------------------------------------------------
// Simplicial complexes
// ---------------------------------------------------------------------

/// A finite simplicial complex: simplices are strictly increasing vertex
/// tuples, stored per dimension in lexicographic order. Orientation is
/// the one induced by the vertex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Build from arbitrary simplices, adding all faces.
    pub fn from_maximal(simplices: &[Vec<usize>]) -> Result<Self, ComplexError> {
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        for s in simplices {
            let mut v = s.clone();
            v.sort_unstable();
            v.dedup();
            if v.len() != s.len() {
                return Err(ComplexError::Structural(format!(
                    "simplex {s:?} has repeated vertices"
                )));
            }
            if v.is_empty() {
                return Err(ComplexError::Structural("empty simplex".into()));
            }
            // every nonempty subset is a face
            let n = v.len();
            for mask in 1u32..(1 << n) {
                let face: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| v[i]).collect();
                let d = face.len() - 1;
                while by_dim.len() <= d {
                    by_dim.push(BTreeSet::new());
                }
                by_dim[d].insert(face);
            }
        }
        Ok(SimplicialComplex {
            simplices: by_dim
                .into_iter()
                .map(|set| set.into_iter().collect())
                .collect(),
        })
    }

    /// Build from explicit per-dimension lists without closing under
    /// faces (so the face-closure error path stays reachable).
    pub fn from_raw(simplices: Vec<Vec<Vec<usize>>>) -> Self {
        let normalized = simplices
            .into_iter()
            .map(|mut dim| {
                for s in &mut dim {
                    s.sort_unstable();
                }
                dim.sort();
                dim.dedup();
                dim
            })
            .collect();
        SimplicialComplex {
            simplices: normalized,
        }
    }

    pub fn point() -> Self {
        SimplicialComplex::from_maximal(&[vec![0]]).unwrap()
    }

    /// Highest dimension with any simplex; a complex with only vertices
    /// has dimension 0.
    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, Vec::len)
    }

    pub fn simplices(&self, dim: usize) -> &[Vec<usize>] {
        self.simplices.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn index_of(&self, simplex: &[usize]) -> Option<usize> {
        let dim = simplex.len().checked_sub(1)?;
        self.simplices
            .get(dim)?
            .binary_search_by(|s| s.as_slice().cmp(simplex))
            .ok()
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        self.index_of(simplex).is_some()
    }

    /// Is every face of every simplex present?
    pub fn face_closure_witness(&self) -> Option<Vec<usize>> {
        for dim in 1..self.simplices.len() {
            for s in &self.simplices[dim] {
                for drop in 0..s.len() {
                    let face: Vec<usize> = s
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    if !self.contains(&face) {
                        return Some(face);
                    }
                }
            }
        }
        None
    }

    pub fn is_face_closed(&self) -> bool {
        self.face_closure_witness().is_none()
    }

    /// Is `sub` a subcomplex: every simplex of `sub` a simplex of self?
    pub fn has_subcomplex(&self, sub: &SimplicialComplex) -> bool {
        (0..sub.simplices.len()).all(|d| sub.simplices(d).iter().all(|s| self.contains(s)))
    }

    /// Do two subcomplex region lists share a simplex? Since complexes
    /// are face-closed it is enough to compare vertex sets.
    pub fn regions_intersect(a: &SimplicialComplex, b: &SimplicialComplex) -> bool {
        let av: BTreeSet<&Vec<usize>> = a.simplices(0).iter().collect();
        b.simplices(0).iter().any(|v| av.contains(v))
    }

    pub fn euler_characteristic(&self) -> i128 {
        self.counts()
            .iter()
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i128 } else { -(c as i128) })
            .sum()
    }
}

// ---------------------------------------------------------------------
// Cochain complexes
// ---------------------------------------------------------------------

/// A cochain complex of free modules with matrix differentials
/// `d[n]: C^n -> C^{n+1}` satisfying `d ∘ d = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex {
    pub ring: RingTag,
    pub ranks: Vec<usize>,
    pub d: Vec<Mat>,
}

impl CochainComplex {
    /// The differential out of degree `n`, a zero map for the top degree.
    pub fn differential(&self, n: usize) -> Mat {
        if n < self.d.len() {
            self.d[n].clone()
        } else {
            Mat::zeros(0, self.ranks.get(n).copied().unwrap_or(0))
        }
    }

    /// The differential into degree `n` (zero map below degree 0).
    pub fn differential_into(&self, n: usize) -> Mat {
        if n == 0 || n > self.d.len() {
            Mat::zeros(self.ranks.get(n).copied().unwrap_or(0), 0)
        } else {
            self.d[n - 1].clone()
        }
    }

    pub fn verify_d_squared(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        for n in 0..self.d.len().saturating_sub(1) {
            if !self.d[n + 1].mul(&self.d[n]).reduce(self.ring).is_zero() {
                report.push("d-squared", format!("d_{} ∘ d_{} ≠ 0", n + 1, n));
            }
        }
        report
    }
}

/// A single cochain: a coefficient vector in one degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<i128>,
}

impl Cochain {
    pub fn zero(complex: &CochainComplex, degree: usize) -> Self {
        Cochain {
            degree,
            values: vec![0; complex.ranks.get(degree).copied().unwrap_or(0)],
        }
    }
}

/// The cochain complex of a simplicial complex: degree-`n` rank is the
/// number of `n`-simplices and the differential is the transpose of the
/// oriented boundary.
pub fn cochain_from_simplicial(
    k: &SimplicialComplex,
    ring: RingTag,
) -> Result<CochainComplex, ComplexError> {
    if let Some(missing) = k.face_closure_witness() {
        return Err(ComplexError::NotFaceClosed(format!("{missing:?}")));
    }
    let ranks = k.counts();
    let mut d = Vec::new();
    for n in 0..ranks.len().saturating_sub(1) {
        let mut m = Mat::zeros(ranks[n + 1], ranks[n]);
        for (ti, tau) in k.simplices(n + 1).iter().enumerate() {
            for drop in 0..tau.len() {
                let face: Vec<usize> = tau
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != drop)
                    .map(|(_, &v)| v)
                    .collect();
                let fi = k.index_of(&face).expect("face closure checked");
                let sign = if drop % 2 == 0 { 1 } else { -1 };
                m[(ti, fi)] += sign;
            }
        }
        d.push(m.reduce(ring));
    }
    let complex = CochainComplex { ring, ranks, d };
    debug_assert!(complex.verify_d_squared().is_ok());
    Ok(complex)
}

// ---------------------------------------------------------------------
// Cohomology
// ---------------------------------------------------------------------

/// Kernel basis and relation matrix (image of the incoming differential
/// in kernel coordinates) at one degree. Over Z/p the relation matrix
/// additionally carries `p` times each kernel generator, so the
/// presentation is correct as an abelian group.
fn cohomology_data(c: &CochainComplex, n: usize) -> (Mat, Mat) {
    let d_out = c.differential(n);
    let d_in = c.differential_into(n);
    let kernel = matrix::kernel_basis(c.ring, &d_out);
    // express each incoming column in kernel coordinates
    let mut coords = Mat::zeros(kernel.cols(), d_in.cols());
    for col in 0..d_in.cols() {
        let v = d_in.col(col);
        let x = matrix::solve(c.ring, &kernel, &v)
            .expect("image lies inside the kernel when d^2 = 0");
        coords.set_col(col, &x);
    }
    let relations = match c.ring {
        RingTag::Int => coords,
        RingTag::Mod(p) => coords.hcat(&Mat::identity(kernel.cols()).scale(p as i128)),
    };
    (kernel, relations)
}

/// Cohomology in every degree, normalized via Smith normal form.
pub fn cohomology(c: &CochainComplex) -> Result<Vec<AbelianGroupPresentation>, ComplexError> {
    let dsq = c.verify_d_squared();
    if !dsq.is_ok() {
        return Err(ComplexError::InvariantViolation(dsq.to_string()));
    }
    let mut out = Vec::new();
    for n in 0..c.ranks.len() {
        let (kernel, relations) = cohomology_data(c, n);
        out.push(AbelianGroupPresentation {
            generators: kernel.cols(),
            relations,
        });
    }
    Ok(out)
}

/// Normal forms of every cohomology group.
pub fn cohomology_normal_forms(c: &CochainComplex) -> Result<Vec<GroupNormalForm>, ComplexError> {
    Ok(cohomology(c)?.iter().map(|g| g.normal_form()).collect())
}

/// Per-degree exactness of the complex (trivial cohomology), reported
/// alongside the groups since discrete complexes are generally not
/// exact.
pub fn exactness_by_degree(c: &CochainComplex) -> Result<Vec<bool>, ComplexError> {
    Ok(cohomology_normal_forms(c)?
        .iter()
        .map(|nf| nf.free_rank == 0 && nf.torsion.is_empty())
        .collect())
}

/// A cohomology class in the invariant-factor basis of its group:
/// torsion coordinates carry their modulus, free coordinates are plain
/// integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyClass {
    pub degree: usize,
    pub torsion_coords: Vec<(i128, i128)>,
    pub free_coords: Vec<i128>,
}

impl CohomologyClass {
    pub fn is_zero(&self) -> bool {
        self.torsion_coords.iter().all(|&(c, _)| c == 0)
            && self.free_coords.iter().all(|&c| c == 0)
    }
}

impl std::fmt::Display for CohomologyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let torsion: Vec<String> = self
            .torsion_coords
            .iter()
            .map(|(c, m)| format!("{c} (mod {m})"))
            .collect();
        let free: Vec<String> = self.free_coords.iter().map(|c| c.to_string()).collect();
        write!(
            f,
            "[{}]",
            torsion.into_iter().chain(free).collect::<Vec<_>>().join(", ")
        )
    }
}

/// Express a cocycle's class in the normalized presentation of `H^n`.
pub fn cohomology_class(
    c: &CochainComplex,
    cocycle: &Cochain,
) -> Result<CohomologyClass, ComplexError> {
    let n = cocycle.degree;
    let rank = c.ranks.get(n).copied().unwrap_or(0);
    if cocycle.values.len() != rank {
        return Err(ComplexError::Structural(format!(
            "cochain length {} does not match rank {rank} in degree {n}",
            cocycle.values.len()
        )));
    }
    let d_out = c.differential(n);
    if !d_out
        .mul_vec(&cocycle.values)
        .iter()
        .all(|&x| c.ring.normalize(x) == 0)
    {
        return Err(ComplexError::NotCocycle(format!(
            "d applied to the degree-{n} cochain is nonzero"
        )));
    }
    let (kernel, relations) = cohomology_data(c, n);
    let x = matrix::solve(c.ring, &kernel, &cocycle.values)
        .expect("cocycles lie in the kernel span");
    let s = smith_normal_form(&relations);
    let y = s.u.mul_vec(&x);
    let mut torsion_coords = Vec::new();
    let mut free_coords = Vec::new();
    for (i, &coord) in y.iter().enumerate() {
        if i < s.rank {
            let m = s.d[(i, i)];
            if m.abs() > 1 {
                torsion_coords.push((coord.rem_euclid(m.abs()), m.abs()));
            }
        } else {
            free_coords.push(coord);
        }
    }
    Ok(CohomologyClass {
        degree: n,
        torsion_coords,
        free_coords,
    })
}

// ---------------------------------------------------------------------
// Potential fields
// ---------------------------------------------------------------------

/// Outcome of the potential/gauge analysis for one cochain.
#[derive(Clone, Debug)]
pub struct PotentialReport {
    pub degree: usize,
    /// Is the input closed (`dφ = 0`)?
    pub closed: bool,
    /// A potential `ψ` with `dψ = φ`, when one exists.
    pub witness: Option<Cochain>,
    /// When a witness exists: did `d(φ + dχ) = dφ` hold for every basis
    /// cochain `χ`?
    pub gauge_holds: Option<bool>,
    /// When the input is closed but not exact: its class in `H^n`.
    pub obstruction: Option<CohomologyClass>,
}

impl PotentialReport {
    pub fn solvable(&self) -> bool {
        self.witness.is_some()
    }
}

/// Solve `dψ = φ` by exact linear algebra; on success verify the gauge
/// property over a full basis of test cochains, on failure report the
/// obstruction class.
pub fn potential_sequence(
    c: &CochainComplex,
    phi: &Cochain,
) -> Result<PotentialReport, ComplexError> {
    let n = phi.degree;
    if n == 0 {
        return Err(ComplexError::NoPotentialDegree);
    }
    let rank = c.ranks.get(n).copied().unwrap_or(0);
    if phi.values.len() != rank {
        return Err(ComplexError::Structural(format!(
            "cochain length {} does not match rank {rank} in degree {n}",
            phi.values.len()
        )));
    }
    let d_out = c.differential(n);
    let d_phi = d_out.mul_vec(&phi.values);
    let closed = d_phi.iter().all(|&x| c.ring.normalize(x) == 0);

    let d_in = c.differential_into(n);
    match matrix::solve(c.ring, &d_in, &phi.values) {
        Some(psi) => {
            // gauge property: d(φ + dχ) = dφ for every basis cochain χ
            let mut gauge = true;
            for basis in 0..c.ranks.get(n - 1).copied().unwrap_or(0) {
                let mut chi = vec![0i128; c.ranks[n - 1]];
                chi[basis] = 1;
                let shifted: Vec<i128> = d_in
                    .mul_vec(&chi)
                    .iter()
                    .zip(&phi.values)
                    .map(|(a, b)| a + b)
                    .collect();
                let lhs = d_out.mul_vec(&shifted);
                if lhs
                    .iter()
                    .zip(&d_phi)
                    .any(|(a, b)| c.ring.normalize(a - b) != 0)
                {
                    gauge = false;
                    break;
                }
            }
            Ok(PotentialReport {
                degree: n,
                closed,
                witness: Some(Cochain {
                    degree: n - 1,
                    values: psi,
                }),
                gauge_holds: Some(gauge),
                obstruction: None,
            })
        }
        None => {
            let obstruction = if closed {
                Some(cohomology_class(c, phi)?)
            } else {
                None
            };
            Ok(PotentialReport {
                degree: n,
                closed,
                witness: None,
                gauge_holds: None,
                obstruction,
            })
        }
    }
}

// ---------------------------------------------------------------------
// Refinement and quotients
// ---------------------------------------------------------------------

/// Barycentric subdivision: one new vertex per simplex, one simplex per
/// chain of proper faces. New vertices are numbered dimension-major in
/// the order of the original simplex lists.
pub fn barycentric_refine(k: &SimplicialComplex) -> SimplicialComplex {
    let mut id_of: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut next = 0usize;
    for d in 0..=k.dim() {
        for s in k.simplices(d) {
            id_of.insert(s.clone(), next);
            next += 1;
        }
    }
    // chains of strict face inclusions as simplex-id tuples
    let mut chains: Vec<Vec<usize>> = Vec::new();
    let mut chains_ending: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
    for d in 0..=k.dim() {
        for s in k.simplices(d) {
            let own = vec![id_of[s]];
            let mut ending = vec![own.clone()];
            // extend every chain ending at a proper face of s
            let n = s.len();
            for mask in 1u32..((1 << n) - 1) {
                let face: Vec<usize> =
                    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect();
                if let Some(prior) = chains_ending.get(&face) {
                    for ch in prior {
                        let mut ext = ch.clone();
                        ext.push(id_of[s]);
                        ending.push(ext);
                    }
                }
            }
            chains.extend(ending.iter().cloned());
            chains_ending.insert(s.clone(), ending);
        }
    }
    let mut by_dim: Vec<Vec<Vec<usize>>> = Vec::new();
    for ch in chains {
        let d = ch.len() - 1;
        while by_dim.len() <= d {
            by_dim.push(Vec::new());
        }
        by_dim[d].push(ch);
    }
    for dim in &mut by_dim {
        dim.sort();
        dim.dedup();
    }
    SimplicialComplex { simplices: by_dim }
}

/// Quotient complex `host / sub`: the subcomplex collapses to a single
/// vertex. Errors when the identification cannot be realized as a
/// simplicial complex (subdivide first in that case).
pub fn quotient_complex(
    host: &SimplicialComplex,
    sub: &SimplicialComplex,
) -> Result<SimplicialComplex, ComplexError> {
    if !host.has_subcomplex(sub) {
        return Err(ComplexError::Structural(
            "quotient region is not a subcomplex of the host".into(),
        ));
    }
    if sub.count(0) == 0 {
        return Err(ComplexError::Structural(
            "quotient region must be nonempty".into(),
        ));
    }
    let collapsed: BTreeSet<usize> = sub.simplices(0).iter().map(|v| v[0]).collect();
    let star = *collapsed.iter().next().unwrap();
    let map = |v: usize| if collapsed.contains(&v) { star } else { v };

    let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new()];
    by_dim[0].insert(vec![star]);
    let mut images: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for d in 0..=host.dim() {
        for s in host.simplices(d) {
            if sub.contains(s) {
                continue;
            }
            let mut image: Vec<usize> = s.iter().map(|&v| map(v)).collect();
            image.sort_unstable();
            let deduped: Vec<usize> = {
                let mut i = image.clone();
                i.dedup();
                i
            };
            if deduped.len() != image.len() {
                return Err(ComplexError::QuotientNotSimplicial(format!(
                    "simplex {s:?} outside the region degenerates under the collapse"
                )));
            }
            if let Some(other) = images.get(&image) {
                return Err(ComplexError::QuotientNotSimplicial(format!(
                    "simplices {other:?} and {s:?} collide at {image:?}"
                )));
            }
            images.insert(image.clone(), s.clone());
            while by_dim.len() <= d {
                by_dim.push(BTreeSet::new());
            }
            by_dim[d].insert(image);
        }
    }
    Ok(SimplicialComplex {
        simplices: by_dim
            .into_iter()
            .map(|set| set.into_iter().collect())
            .collect(),
    })
}

// ---------------------------------------------------------------------
// Preservation check
// ---------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct DegreeComparison {
    pub degree: usize,
    pub left: GroupNormalForm,
    pub right: GroupNormalForm,
    pub preserved: bool,
}

/// Outcome of the discretization preservation check between two
/// complexes: cohomology in every degree plus the K0 proxy of the
/// cochain modules.
#[derive(Clone, Debug)]
pub struct PreservationReport {
    pub degrees: Vec<DegreeComparison>,
    pub k0_left: GroupNormalForm,
    pub k0_right: GroupNormalForm,
    pub k0_preserved: bool,
    pub preserved: bool,
}

/// K0 of the exact category the cochain modules live in: free modules of
/// rank up to the largest cochain rank, with the standard split
/// sequences. Presented with the consecutive split relations
/// `[k] = [k-1] + [1]`, which generate the same relation subgroup as the
/// full split family.
pub fn cochain_module_k0(k: &SimplicialComplex) -> AbelianGroupPresentation {
    let max_rank = k.counts().into_iter().max().unwrap_or(0);
    let generators = max_rank + 1;
    let mut cols: Vec<Vec<i128>> = Vec::new();
    // [0] = [0] + [0] forces the zero class to vanish
    let mut zero_rel = vec![0i128; generators];
    zero_rel[0] = 1;
    cols.push(zero_rel);
    for r in 2..=max_rank {
        let mut rel = vec![0i128; generators];
        rel[r] += 1;
        rel[r - 1] -= 1;
        rel[1] -= 1;
        cols.push(rel);
    }
    let mut relations = Mat::zeros(generators, cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            relations[(r, c)] = x;
        }
    }
    AbelianGroupPresentation {
        generators,
        relations,
    }
}

/// Necessary-condition check for discretization invariance: integer
/// cohomology in every degree and the K0 proxy must agree.
pub fn theorem_check(
    k: &SimplicialComplex,
    k2: &SimplicialComplex,
) -> Result<PreservationReport, ComplexError> {
    let ca = cochain_from_simplicial(k, RingTag::Int)?;
    let cb = cochain_from_simplicial(k2, RingTag::Int)?;
    let ha = cohomology_normal_forms(&ca)?;
    let hb = cohomology_normal_forms(&cb)?;
    let trivial = GroupNormalForm {
        free_rank: 0,
        torsion: Vec::new(),
    };
    let depth = ha.len().max(hb.len());
    let mut degrees = Vec::new();
    let mut preserved = true;
    for n in 0..depth {
        let left = ha.get(n).cloned().unwrap_or_else(|| trivial.clone());
        let right = hb.get(n).cloned().unwrap_or_else(|| trivial.clone());
        let ok = left == right;
        preserved &= ok;
        degrees.push(DegreeComparison {
            degree: n,
            left,
            right,
            preserved: ok,
        });
    }
    let k0_left = cochain_module_k0(k).normal_form();
    let k0_right = cochain_module_k0(k2).normal_form();
    let k0_preserved = k0_left == k0_right;
    preserved &= k0_preserved;
    Ok(PreservationReport {
        degrees,
        k0_left,
        k0_right,
        k0_preserved,
        preserved,
    })
}

/// Check that a functor between exact-structure hosts preserves the
/// declared sequence class, sends weak equivalences (isomorphisms) to
/// weak equivalences, and induces an isomorphism on K0 of the image
/// structure.
pub fn functor_m_check(
    f: &Functor,
    source: &ExactStructure,
    target: &ExactStructure,
) -> ValidationReport {
    let (sc, tc): (&FinCategory, &FinCategory) = (source.host.cat(), target.host.cat());
    let mut report = f.validate(sc, tc);
    if !report.is_ok() {
        return report;
    }
    let target_sigma: BTreeSet<(crate::cat::MorId, crate::cat::MorId)> =
        target.sigma.iter().copied().collect();
    for &(f1, f2) in &source.sigma {
        if !target_sigma.contains(&(f.on_mor(f1), f.on_mor(f2))) {
            report.push(
                "sigma-preservation",
                format!(
                    "image of ({}, {}) is not in the target class",
                    sc.morphism_name(f1),
                    sc.morphism_name(f2)
                ),
            );
        }
    }
    for iso in sc.isomorphisms() {
        if !tc.is_iso(f.on_mor(iso)) {
            report.push(
                "we-preservation",
                format!(
                    "image of isomorphism {} is not an isomorphism",
                    sc.morphism_name(iso)
                ),
            );
        }
    }
    // K0 of the source vs K0 of the image structure
    let k0_src = crate::kth::k0_presentation_unchecked(source);
    let image_objects: Vec<crate::cat::ObjId> = {
        let set: BTreeSet<usize> = sc.objects().map(|o| f.on_obj(o).0).collect();
        set.into_iter().map(crate::cat::ObjId).collect()
    };
    let image_triples: Vec<_> = source
        .sigma
        .iter()
        .map(|&(f1, f2)| {
            (
                f.on_obj(sc.src(f1)),
                f.on_obj(sc.tgt(f1)),
                f.on_obj(sc.tgt(f2)),
            )
        })
        .collect();
    let k0_img = grothendieck_presentation(tc, &image_objects, &image_triples);
    if !groups_isomorphic(&k0_src, &k0_img) {
        report.push(
            "k0-preservation",
            format!(
                "K0 {} of the source differs from K0 {} of the image",
                k0_src.normal_form(),
                k0_img.normal_form()
            ),
        );
    }
    report
}

// ---------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    pub fn circle() -> SimplicialComplex {
        SimplicialComplex::from_maximal(&[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    pub fn solid_triangle() -> SimplicialComplex {
        SimplicialComplex::from_maximal(&[vec![0, 1, 2]]).unwrap()
    }

    /// The 7-vertex triangulation of the torus: triangles {i, i+1, i+3}
    /// and {i, i+2, i+3} mod 7 over the complete graph K7.
    pub fn minimal_torus() -> SimplicialComplex {
        let mut tris = Vec::new();
        for i in 0..7usize {
            tris.push(vec![i, (i + 1) % 7, (i + 3) % 7]);
            tris.push(vec![i, (i + 2) % 7, (i + 3) % 7]);
        }
        SimplicialComplex::from_maximal(&tris).unwrap()
    }

    #[test]
    fn torus_combinatorics() {
        let t = minimal_torus();
        assert_eq!(t.counts(), vec![7, 21, 14]);
        assert_eq!(t.euler_characteristic(), 0);
        // each edge lies in exactly two triangles
        for e in t.simplices(1) {
            let n = t
                .simplices(2)
                .iter()
                .filter(|tri| e.iter().all(|v| tri.contains(v)))
                .count();
            assert_eq!(n, 2, "edge {e:?}");
        }
    }

    #[test]
    fn point_complex_ranks() {
        let c = cochain_from_simplicial(&SimplicialComplex::point(), RingTag::Int).unwrap();
        assert_eq!(c.ranks, vec![1]);
        assert!(c.d.is_empty());
    }

    #[test]
    fn circle_differential_rank() {
        let c = cochain_from_simplicial(&circle(), RingTag::Int).unwrap();
        assert_eq!(c.ranks, vec![3, 3]);
        assert_eq!(matrix::rank(RingTag::Int, &c.d[0]), 2);
    }

    #[test]
    fn d_squared_everywhere() {
        for k in [circle(), solid_triangle(), minimal_torus()] {
            for ring in [RingTag::Int, RingTag::Mod(2), RingTag::Mod(3)] {
                let c = cochain_from_simplicial(&k, ring).unwrap();
                assert!(c.verify_d_squared().is_ok());
            }
        }
    }

    #[test]
    fn non_face_closed_is_rejected() {
        let k = SimplicialComplex::from_raw(vec![vec![vec![0], vec![1]], vec![vec![0, 2]]]);
        assert!(matches!(
            cochain_from_simplicial(&k, RingTag::Int),
            Err(ComplexError::NotFaceClosed(_))
        ));
    }

    fn nf(free: usize, torsion: Vec<i128>) -> GroupNormalForm {
        GroupNormalForm {
            free_rank: free,
            torsion,
        }
    }

    #[test]
    fn cohomology_of_point() {
        let c = cochain_from_simplicial(&SimplicialComplex::point(), RingTag::Int).unwrap();
        assert_eq!(cohomology_normal_forms(&c).unwrap(), vec![nf(1, vec![])]);
    }

    #[test]
    fn cohomology_of_circle() {
        let c = cochain_from_simplicial(&circle(), RingTag::Int).unwrap();
        assert_eq!(
            cohomology_normal_forms(&c).unwrap(),
            vec![nf(1, vec![]), nf(1, vec![])]
        );
    }

    #[test]
    fn cohomology_of_torus() {
        let c = cochain_from_simplicial(&minimal_torus(), RingTag::Int).unwrap();
        assert_eq!(
            cohomology_normal_forms(&c).unwrap(),
            vec![nf(1, vec![]), nf(2, vec![]), nf(1, vec![])]
        );
    }

    /// Brute-force cohomology dimensions over a small prime field by
    /// enumerating all cochains.
    pub fn brute_force_mod_p_dims(k: &SimplicialComplex, p: u32) -> Vec<usize> {
        let c = cochain_from_simplicial(k, RingTag::Mod(p)).unwrap();
        let mut dims = Vec::new();
        for n in 0..c.ranks.len() {
            let d_out = c.differential(n);
            let d_in = c.differential_into(n);
            let rank = c.ranks[n];
            let total = (p as u64).pow(rank as u32);
            assert!(total <= 1 << 22, "enumeration too large");
            let decode = |mut idx: u64| -> Vec<i128> {
                let mut v = vec![0i128; rank];
                for e in v.iter_mut() {
                    *e = (idx % p as u64) as i128;
                    idx /= p as u64;
                }
                v
            };
            let mut kernel = Vec::new();
            for idx in 0..total {
                let v = decode(idx);
                if d_out
                    .mul_vec(&v)
                    .iter()
                    .all(|&x| x.rem_euclid(p as i128) == 0)
                {
                    kernel.push(v);
                }
            }
            let mut image = BTreeSet::new();
            let in_rank = d_in.cols();
            let in_total = (p as u64).pow(in_rank as u32);
            assert!(in_total <= 1 << 22, "enumeration too large");
            for idx in 0..in_total {
                let mut chi = vec![0i128; in_rank];
                let mut rem = idx;
                for e in chi.iter_mut() {
                    *e = (rem % p as u64) as i128;
                    rem /= p as u64;
                }
                let img: Vec<i128> = d_in
                    .mul_vec(&chi)
                    .iter()
                    .map(|&x| x.rem_euclid(p as i128))
                    .collect();
                image.insert(img);
            }
            let classes = kernel.len() / image.len();
            let mut dim = 0;
            let mut size = 1usize;
            while size < classes {
                size *= p as usize;
                dim += 1;
            }
            assert_eq!(size, classes, "quotient size must be a power of p");
            dims.push(dim);
        }
        dims
    }

    #[test]
    fn mod_p_cohomology_matches_brute_force() {
        for k in [SimplicialComplex::point(), circle(), solid_triangle()] {
            for p in [2u32, 3] {
                let c = cochain_from_simplicial(&k, RingTag::Mod(p)).unwrap();
                let via_snf: Vec<usize> = cohomology_normal_forms(&c)
                    .unwrap()
                    .iter()
                    .map(|g| {
                        assert_eq!(g.free_rank, 0);
                        assert!(g.torsion.iter().all(|&t| t == p as i128));
                        g.torsion.len()
                    })
                    .collect();
                assert_eq!(via_snf, brute_force_mod_p_dims(&k, p));
            }
        }
    }

    #[test]
    fn potential_on_zero_cochain() {
        let c = cochain_from_simplicial(&circle(), RingTag::Int).unwrap();
        let phi = Cochain::zero(&c, 1);
        let r = potential_sequence(&c, &phi).unwrap();
        assert!(r.solvable());
        assert_eq!(r.witness.unwrap().values, vec![0, 0, 0]);
        assert_eq!(r.gauge_holds, Some(true));
    }

    #[test]
    fn potential_on_exact_cochain_of_cone() {
        let k = solid_triangle();
        let c = cochain_from_simplicial(&k, RingTag::Int).unwrap();
        // φ = d ψ0 for ψ0 = (0, 1, 3)
        let psi0 = vec![0, 1, 3];
        let phi = Cochain {
            degree: 1,
            values: c.d[0].mul_vec(&psi0),
        };
        let r = potential_sequence(&c, &phi).unwrap();
        assert!(r.solvable());
        let psi = r.witness.unwrap();
        assert_eq!(c.d[0].mul_vec(&psi.values), phi.values);
        assert_eq!(r.gauge_holds, Some(true));
    }

    #[test]
    fn potential_obstruction_on_circle_generator() {
        let c = cochain_from_simplicial(&circle(), RingTag::Int).unwrap();
        // the generator of H^1: a cochain summing to ±1 around the loop
        let phi = Cochain {
            degree: 1,
            values: vec![1, 0, 0],
        };
        let r = potential_sequence(&c, &phi).unwrap();
        assert!(!r.solvable());
        assert!(r.closed);
        let cls = r.obstruction.unwrap();
        assert!(!cls.is_zero());
        assert_eq!(cls.free_coords.len(), 1);
        assert_eq!(cls.free_coords[0].abs(), 1);
    }

    #[test]
    fn potential_rejects_degree_zero() {
        let c = cochain_from_simplicial(&circle(), RingTag::Int).unwrap();
        let phi = Cochain::zero(&c, 0);
        assert!(matches!(
            potential_sequence(&c, &phi),
            Err(ComplexError::NoPotentialDegree)
        ));
    }

    #[test]
    fn refine_point_is_point() {
        let r = barycentric_refine(&SimplicialComplex::point());
        assert_eq!(r.counts(), vec![1]);
    }

    #[test]
    fn refine_circle_is_hexagon() {
        let r = barycentric_refine(&circle());
        assert_eq!(r.counts(), vec![6, 6]);
        assert!(r.is_face_closed());
    }

    #[test]
    fn refine_solid_triangle_counts() {
        let r = barycentric_refine(&solid_triangle());
        assert_eq!(r.counts(), vec![7, 12, 6]);
        assert!(r.is_face_closed());
    }

    #[test]
    fn cohomology_invariant_under_refinement() {
        for k in [circle(), solid_triangle(), minimal_torus()] {
            let r = barycentric_refine(&k);
            let ck = cochain_from_simplicial(&k, RingTag::Int).unwrap();
            let cr = cochain_from_simplicial(&r, RingTag::Int).unwrap();
            assert_eq!(
                cohomology_normal_forms(&ck).unwrap(),
                cohomology_normal_forms(&cr).unwrap()
            );
        }
    }

    #[test]
    fn euler_characteristic_two_ways() {
        for k in [circle(), solid_triangle(), minimal_torus()] {
            let c = cochain_from_simplicial(&k, RingTag::Int).unwrap();
            let from_cohomology: i128 = cohomology_normal_forms(&c)
                .unwrap()
                .iter()
                .enumerate()
                .map(|(d, g)| {
                    let r = g.free_rank as i128;
                    if d % 2 == 0 {
                        r
                    } else {
                        -r
                    }
                })
                .sum();
            assert_eq!(k.euler_characteristic(), from_cohomology);
        }
    }

    #[test]
    fn quotient_of_square_circle_by_edge() {
        // square circle with an edge collapsed is still a circle
        let square =
            SimplicialComplex::from_maximal(&[vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]])
                .unwrap();
        let edge = SimplicialComplex::from_maximal(&[vec![0, 1]]).unwrap();
        let q = quotient_complex(&square, &edge).unwrap();
        assert_eq!(q.counts(), vec![3, 3]);
        let cq = cochain_from_simplicial(&q, RingTag::Int).unwrap();
        let ch = cochain_from_simplicial(&square, RingTag::Int).unwrap();
        assert_eq!(
            cohomology_normal_forms(&cq).unwrap(),
            cohomology_normal_forms(&ch).unwrap()
        );
    }

    #[test]
    fn quotient_collision_is_detected() {
        // collapsing one edge of the 3-vertex circle forces two edges
        // onto the same vertex pair
        let edge = SimplicialComplex::from_maximal(&[vec![0, 1]]).unwrap();
        assert!(matches!(
            quotient_complex(&circle(), &edge),
            Err(ComplexError::QuotientNotSimplicial(_))
        ));
    }

    #[test]
    fn theorem_check_self_and_refinement() {
        for k in [circle(), solid_triangle(), minimal_torus()] {
            let self_check = theorem_check(&k, &k).unwrap();
            assert!(self_check.preserved);
            let r = barycentric_refine(&k);
            let refine_check = theorem_check(&k, &r).unwrap();
            assert!(refine_check.preserved, "{:?}", refine_check.degrees);
        }
    }

    #[test]
    fn theorem_check_circle_vs_point_fails_in_h1() {
        let r = theorem_check(&circle(), &SimplicialComplex::point()).unwrap();
        assert!(!r.preserved);
        let h1 = &r.degrees[1];
        assert!(!h1.preserved);
        assert_eq!(h1.left, nf(1, vec![]));
        assert_eq!(h1.right, nf(0, vec![]));
    }

    #[test]
    fn cochain_module_k0_is_z() {
        for k in [circle(), solid_triangle(), minimal_torus()] {
            let g = cochain_module_k0(&k);
            assert_eq!(g.normal_form(), nf(1, vec![]));
        }
    }

    #[test]
    fn base_change_equivalence_passes_functor_check() {
        use crate::cat::MorId;
        use crate::exact::{full_field_category, ExactStructure};
        use crate::matrix::Mat;
        // conjugate every F2 matrix by a fixed basis change per object:
        // S_0 = (), S_1 = [1], S_2 = [[0,1],[1,0]]
        let e = ExactStructure::with_full_sigma(full_field_category(2, 2).unwrap());
        let cat = e.host.cat();
        let s: Vec<Mat> = vec![
            Mat::identity(0),
            Mat::identity(1),
            Mat::from_rows(vec![vec![0, 1], vec![1, 0]]),
        ];
        let morphism_map: Vec<MorId> = cat
            .morphisms()
            .map(|m| {
                let (a, b) = (cat.src(m), cat.tgt(m));
                let conj = s[b.0].mul(e.host.matrix(m)).mul(&s[a.0]);
                e.host
                    .find_morphism(a, b, &conj)
                    .expect("full category contains the conjugate")
            })
            .collect();
        let f = Functor {
            object_map: cat.objects().collect(),
            morphism_map,
        };
        assert!(f.validate(cat, cat).is_ok());
        let report = functor_m_check(&f, &e, &e);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn functor_checks() {
        use crate::exact::{full_field_category, ExactStructure};
        let e = ExactStructure::with_full_sigma(full_field_category(2, 1).unwrap());
        let id = Functor::identity(e.host.cat());
        assert!(functor_m_check(&id, &e, &e).is_ok());

        // collapse everything to the zero object: K0 degenerates
        let cat = e.host.cat();
        let zero = crate::cat::ObjId(0);
        let zmap: Vec<crate::cat::MorId> = cat
            .morphisms()
            .map(|_| cat.hom(zero, zero)[0])
            .collect();
        let collapse = Functor {
            object_map: cat.objects().map(|_| zero).collect(),
            morphism_map: zmap,
        };
        let report = functor_m_check(&collapse, &e, &e);
        assert!(report.of_rule("k0-preservation").count() > 0, "{report}");
    }
}
